"""Diastasis, Calabi coefficient matrices and resolvability tests.

A Kahler potential expanded around a point becomes the diastasis centred at
that point once its purely holomorphic and purely antiholomorphic terms are
dropped.  The metric is resolvable of rank ``N`` (locally immersible into
flat ``C^N``) iff the Hermitian matrix of the remaining coefficients is
positive semidefinite of rank ``N``.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .algebra import BiSeries, MultiIndex, format_multi_index, pure_part_removal
from .exceptions import DomainError, ParameterError, PreconditionError

DEFAULT_TOL = 1e-9

GLOBAL_CRITERION_NOTE = (
    "single-valuedness of the continued diastasis is not tested numerically; "
    "it is assumed from simple connectivity of the covering"
)


@dataclass(frozen=True)
class CalabiMatrix:
    """Hermitian coefficient matrix of a diastasis, nonzero multi-indices only."""

    labels: tuple[MultiIndex, ...]
    entries: np.ndarray

    @property
    def size(self) -> int:
        return len(self.labels)

    def label_names(self) -> list[str]:
        return [format_multi_index(m) for m in self.labels]

    def to_csv(self) -> str:
        names = self.label_names()
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([""] + names)
        for name, row in zip(names, self.entries):
            writer.writerow([name] + [_format_complex(v) for v in row])
        return buf.getvalue()


@dataclass(frozen=True)
class ResolvabilityReport:
    psd: bool
    rank: int
    min_eigenvalue: float
    tolerance: float
    labels: tuple[MultiIndex, ...]
    witness_index: MultiIndex | None = None
    eigenvalues: tuple[float, ...] = field(default=(), repr=False)
    # a finite truncation only ever sees part of the matrix
    rank_is_lower_bound: bool = True

    def to_dict(self) -> dict:
        return {
            "psd": self.psd,
            "rank": self.rank,
            "min_eigenvalue": self.min_eigenvalue,
            "tolerance": self.tolerance,
            "labels": [format_multi_index(m) for m in self.labels],
            "witness_index": None if self.witness_index is None else format_multi_index(self.witness_index),
            "rank_is_lower_bound": self.rank_is_lower_bound,
            "assumption": GLOBAL_CRITERION_NOTE,
        }


def _format_complex(v: complex) -> str:
    return f"{v.real:.17g}{v.imag:+.17g}j"


def diastasis_from_potential(phi: BiSeries) -> BiSeries:
    """Diastasis centred at the expansion point of a real potential series.

    Equals ``phi(z) - phi(z, 0) - phi(0, conj z) + phi(0)`` with the second
    argument the independent antiholomorphic variable.
    """
    if not phi.hermitian or not phi.is_hermitian(tol=1e-12):
        raise DomainError("diastasis needs a real (Hermitian-flagged) potential series")
    return pure_part_removal(phi)


def calabi_matrix(d0: BiSeries) -> CalabiMatrix:
    """Read off ``a[j, k]`` for nonzero multi-indices ``m_j, m_k``."""
    c = d0.coeffs
    if np.any(c[0, :] != 0) or np.any(c[:, 0] != 0):
        raise PreconditionError("series has pure holomorphic/antiholomorphic terms; take its diastasis first")
    block = c[1:, 1:]
    entries = 0.5 * (block + block.conj().T)
    entries.setflags(write=False)
    return CalabiMatrix(labels=d0.labels[1:], entries=entries)


def resolvability(matrix: CalabiMatrix, tol: float = DEFAULT_TOL) -> ResolvabilityReport:
    """PSD verdict and numerical rank, thresholds relative to ``max(1, ||A||_2)``."""
    if not tol > 0:
        raise ParameterError("tol must be positive")
    if matrix.size == 0:
        return ResolvabilityReport(True, 0, 0.0, tol, matrix.labels)
    values, vectors = np.linalg.eigh(matrix.entries)
    scale = max(1.0, float(np.max(np.abs(values))))
    threshold = tol * scale
    min_value = float(values[0])
    psd = min_value >= -threshold
    rank = int(np.sum(values > threshold))
    witness = None
    if not psd:
        witness = matrix.labels[int(np.argmax(np.abs(vectors[:, 0])))]
    return ResolvabilityReport(
        psd=bool(psd),
        rank=rank,
        min_eigenvalue=min_value,
        tolerance=tol,
        labels=matrix.labels,
        witness_index=witness,
        eigenvalues=tuple(float(v) for v in values),
    )


def go_eigen_product(a: float, b: float, j: int) -> float:
    """``prod_{k=1}^{j-1} (k b + 1 - j a)``, the sign of the ``j``-th diagonal coefficient."""
    out = 1.0
    for k in range(1, j):
        out *= k * b + 1 - j * a
    return out


def go_negative_witness(a: float, b: float, jmax: int) -> int | None:
    """Smallest ``j`` in ``[2, jmax]`` whose diagonal coefficient is negative.

    For the rotation invariant potential of a diagonal Hopf surface the Calabi
    matrix is diagonal; a negative entry rules out any Kahler immersion of the
    covering into ``l^2``.
    """
    if abs(a + b - 2) > 1e-12:
        raise ParameterError(f"need a + b = 2, got a={a}, b={b}")
    if not (a >= b > 0):
        raise ParameterError(f"need a >= b > 0, got a={a}, b={b}")
    if jmax < 2:
        raise ParameterError("jmax must be at least 2")
    for j in range(2, jmax + 1):
        if go_eigen_product(a, b, j) < 0:
            return j
    return None
