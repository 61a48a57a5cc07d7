"""Potentials, Hermitian metrics, Lee forms and deck transformations.

Conventions
-----------
A metric is described by its coefficient matrix ``h[a, b]`` with
``omega = i * sum h[a, b] dz_a ^ d conj(z_b)`` (overall positive constants
never matter for the checks here).  A potential ``phi`` gives
``h = d^2 phi / dz_a d conj(z_b)``.  Real coordinates are interleaved,
``(x_1, y_1, x_2, y_2, ...)`` with ``z_a = x_a + i y_a``; Lee forms are
returned as their ``2n`` coefficients in that basis.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import mpmath
import numpy as np

from ._fd import STENCILS
from ._parallel import pmap
from .algebra import BiSeries
from .exceptions import ContractError, DomainError, ParameterError

HESSIAN_STEP = 1e-4
EXTERIOR_STEP = 1e-3
HOMOTHETY_SPREAD_TOL = 1e-6
CHARACTER_BOUND = 50


class NonPositiveMetricWarning(RuntimeWarning):
    """A metric evaluation came out not positive definite."""


def to_real(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def to_complex(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[..., 0::2] + 1j * x[..., 1::2]


def _always(_: np.ndarray) -> bool:
    return True


@dataclass(frozen=True)
class PotentialField:
    """A real potential on a domain of ``C^n``.

    ``evaluate`` takes points of shape ``(n,)`` or ``(m, n)``.  When
    ``exact_series`` is given it is the expansion around ``center`` and is
    trusted for points within ``series_radius`` of the center.
    """

    nvars: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    domain_guard: Callable[[np.ndarray], bool] = _always
    exact_series: BiSeries | None = None
    center: np.ndarray | None = None
    series_radius: float = math.inf
    name: str = ""

    def __call__(self, z: np.ndarray):
        return self.evaluate(z)

    def series_applies(self, point: np.ndarray) -> bool:
        if self.exact_series is None:
            return False
        center = np.zeros(self.nvars) if self.center is None else self.center
        return float(np.linalg.norm(np.asarray(point) - center)) <= self.series_radius


@dataclass(frozen=True)
class HermitianMetricField:
    """Coefficient matrix of a Hermitian metric, optionally with its Lee form."""

    nvars: int
    coeff: Callable[[np.ndarray], np.ndarray]
    lee_form: Callable[[np.ndarray], np.ndarray] | None = None
    domain_guard: Callable[[np.ndarray], bool] = _always
    name: str = ""

    def __call__(self, z: np.ndarray) -> np.ndarray:
        return self.coeff(z)

    def scaled(self, c: float, name: str | None = None) -> "HermitianMetricField":
        return HermitianMetricField(
            self.nvars,
            lambda z: c * self.coeff(z),
            self.lee_form,
            self.domain_guard,
            name or f"{c}*{self.name}",
        )


@dataclass(frozen=True)
class DeckMap:
    """A holomorphic self-map of a covering domain, with its Jacobian.

    ``jacobian(z)[c, a] = d gamma_c / d z_a``.
    """

    kind: str
    name: str
    apply: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    params: Mapping[str, object] = field(default_factory=dict)

    def __call__(self, z: np.ndarray) -> np.ndarray:
        return self.apply(np.asarray(z, dtype=complex))

    def compose(self, other: "DeckMap") -> "DeckMap":
        """``self o other``."""
        return DeckMap(
            kind="composite",
            name=f"{self.name}*{other.name}",
            apply=lambda z: self.apply(other.apply(z)),
            jacobian=lambda z: self.jacobian(other.apply(z)) @ other.jacobian(z),
        )

    @classmethod
    def linear(cls, matrix: np.ndarray, name: str, kind: str = "linear") -> "DeckMap":
        m = np.array(matrix, dtype=complex)
        m.setflags(write=False)
        return cls(kind, name, lambda z: m @ z, lambda z: m, {"matrix": m})

    @classmethod
    def scalar(cls, lam: complex, nvars: int, name: str | None = None) -> "DeckMap":
        return cls.linear(lam * np.eye(nvars), name or f"{lam}*id")

    @classmethod
    def translation(cls, shift: Sequence[complex], name: str) -> "DeckMap":
        s = np.array(shift, dtype=complex)
        eye = np.eye(s.size, dtype=complex)
        return cls("affine", name, lambda z: z + s, lambda z: eye, {"shift": s})

    def is_biholomorphic_at(self, samples: Sequence[np.ndarray], tol: float = 1e-12) -> bool:
        for z in samples:
            if abs(np.linalg.det(self.jacobian(np.asarray(z, dtype=complex)))) <= tol:
                return False
        return True


# -- metrics from potentials -------------------------------------------------


def _fd_hessian(phi: PotentialField, point: np.ndarray, h: float) -> np.ndarray:
    n = phi.nvars
    x0 = to_real(point)
    dim = 2 * n
    off1, w1 = STENCILS[1]
    off2, w2 = STENCILS[2]
    points = []
    layout = []  # (p, q, weight) per evaluation point
    for p in range(dim):
        for o, w in zip(off2, w2):
            x = x0.copy()
            x[p] += o * h
            points.append(x)
            layout.append((p, p, w))
        for q in range(p + 1, dim):
            for oi, wi in zip(off1, w1):
                for oj, wj in zip(off1, w1):
                    x = x0.copy()
                    x[p] += oi * h
                    x[q] += oj * h
                    points.append(x)
                    layout.append((p, q, wi * wj))
    zs = to_complex(np.array(points))
    for z in zs:
        if not phi.domain_guard(z):
            raise DomainError("finite-difference stencil leaves the domain; move the point inward")
    values = np.asarray(phi.evaluate(zs), dtype=float)
    hr = np.zeros((dim, dim))
    for (p, q, w), v in zip(layout, values):
        hr[p, q] += w * v
    hr /= h * h
    hr = np.triu(hr) + np.triu(hr, 1).T
    xs = slice(0, dim, 2)
    ys = slice(1, dim, 2)
    return 0.25 * (hr[xs, xs] + hr[ys, ys] + 1j * (hr[xs, ys] - hr[ys, xs]))


def metric_from_potential(
    phi: PotentialField, point: np.ndarray, method: str = "auto", step: float = HESSIAN_STEP
) -> np.ndarray:
    """``d^2 phi / dz_a d conj(z_b)`` at ``point``.

    ``method`` is ``"series"`` (exact differentiation of ``phi.exact_series``),
    ``"fd"`` (fourth-order central differences in real coordinates) or
    ``"auto"`` (series when it applies at the point, otherwise differences).
    A result that is not positive definite triggers
    :class:`NonPositiveMetricWarning`.
    """
    point = np.asarray(point, dtype=complex)
    if not phi.domain_guard(point):
        raise DomainError(f"point {point} outside the domain of {phi.name or 'potential'}")
    if method == "auto":
        method = "series" if phi.series_applies(point) else "fd"
    if method == "series":
        if phi.exact_series is None:
            raise ContractError("potential has no exact series")
        center = np.zeros(phi.nvars) if phi.center is None else phi.center
        h = phi.exact_series.hessian(point - center)
    elif method == "fd":
        h = _fd_hessian(phi, point, step)
    else:
        raise ParameterError(f"unknown method {method!r}")
    h = 0.5 * (h + h.conj().T)
    if np.min(np.linalg.eigvalsh(h)) <= 0:
        warnings.warn(f"metric not positive definite at {point}", NonPositiveMetricWarning, stacklevel=2)
    return h


# -- lcK condition ------------------------------------------------------------


def _real_two_form(h: np.ndarray) -> np.ndarray:
    n = h.shape[0]
    e = np.zeros((2 * n, n), dtype=complex)
    for a in range(n):
        e[2 * a, a] = 1.0
        e[2 * a + 1, a] = 1j
    return -2.0 * np.imag(e @ h @ e.conj().T)


def lck_residual(metric: HermitianMetricField, point: np.ndarray, step: float = EXTERIOR_STEP) -> float:
    """Max-norm of the coefficients of ``d omega - theta ^ omega`` at ``point``."""
    if metric.lee_form is None:
        raise ContractError(f"metric {metric.name or ''} has no Lee form")
    point = np.asarray(point, dtype=complex)
    if not metric.domain_guard(point):
        raise DomainError(f"point {point} outside the metric domain")
    x0 = to_real(point)
    dim = x0.size
    offsets, weights = STENCILS[1]
    omega = _real_two_form(np.asarray(metric.coeff(point)))
    d_omega = np.zeros((dim, dim, dim))  # d_omega[r] = d Omega / d x_r
    for r in range(dim):
        acc = np.zeros((dim, dim))
        for o, w in zip(offsets, weights):
            x = x0.copy()
            x[r] += o * step
            acc += w * _real_two_form(np.asarray(metric.coeff(to_complex(x))))
        d_omega[r] = acc / step
    theta = np.asarray(metric.lee_form(point), dtype=float)
    residual = 0.0
    for r in range(dim):
        for p in range(r + 1, dim):
            for q in range(p + 1, dim):
                value = (
                    d_omega[r, p, q] + d_omega[p, q, r] + d_omega[q, r, p]
                    - theta[r] * omega[p, q] - theta[p] * omega[q, r] - theta[q] * omega[r, p]
                )
                residual = max(residual, abs(value))
    return float(residual)


# -- homotheties --------------------------------------------------------------


@dataclass(frozen=True)
class HomothetyResult:
    factor: float
    spread: float
    homothetic: bool
    samples: int

    def to_dict(self) -> dict:
        return {
            "factor": self.factor,
            "spread": self.spread,
            "homothetic": self.homothetic,
            "samples": self.samples,
        }


def pullback_by(gamma: DeckMap, metric: HermitianMetricField, point: np.ndarray) -> np.ndarray:
    """Coefficients of ``gamma^* omega`` at ``point``."""
    point = np.asarray(point, dtype=complex)
    jac = np.asarray(gamma.jacobian(point), dtype=complex)
    return jac.T @ np.asarray(metric.coeff(gamma(point))) @ jac.conj()


def homothety_factor(
    gamma: DeckMap,
    metric: HermitianMetricField,
    samples: Sequence[np.ndarray],
    spread_tol: float = HOMOTHETY_SPREAD_TOL,
) -> HomothetyResult:
    """Estimate ``c`` with ``gamma^* omega = c * omega`` from sampled points.

    Per sample the least-squares ratio is taken; the factor is their median
    and the spread is the worst relative mismatch ``|pullback - c h| / |c h|``.
    """

    def one(z):
        z = np.asarray(z, dtype=complex)
        if not (metric.domain_guard(z) and metric.domain_guard(gamma(z))):
            raise DomainError(f"sample {z} or its image leaves the domain")
        h = np.asarray(metric.coeff(z))
        pulled = pullback_by(gamma, metric, z)
        return h, pulled

    pairs = pmap(one, samples)
    ratios = [float(np.real(np.vdot(h, p)) / np.real(np.vdot(h, h))) for h, p in pairs]
    c = float(np.median(ratios))
    spread = 0.0
    for h, p in pairs:
        spread = max(spread, float(np.linalg.norm(p - c * h) / np.linalg.norm(c * h)))
    return HomothetyResult(c, spread, spread <= spread_tol, len(pairs))


# -- homothety characters -----------------------------------------------------


@dataclass(frozen=True)
class CharacterRank:
    rank: int
    heuristic: bool
    bound: int
    relations: tuple[tuple[int, ...], ...] = ()

    @property
    def label(self) -> str:
        if self.heuristic:
            return f"rank >= {self.rank} (heuristic)"
        return f"rank = {self.rank}"

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "heuristic": self.heuristic,
            "label": self.label,
            "bound": self.bound,
            "relations": [list(r) for r in self.relations],
        }


def integer_relation(values: Sequence[float], bound: int = CHARACTER_BOUND, tol: float = 1e-9) -> tuple[int, ...] | None:
    """Nonzero integer vector ``c`` with ``|c_i| <= bound`` and ``c . values ~ 0``, if PSLQ finds one."""
    scale = max(abs(v) for v in values)
    with mpmath.workdps(30):
        rel = mpmath.pslq([mpmath.mpf(v) / scale for v in values], tol=mpmath.mpf(tol), maxcoeff=bound, maxsteps=10_000)
    if rel is None or max(abs(c) for c in rel) > bound:
        return None
    residual = abs(sum(c * v for c, v in zip(rel, values)))
    if residual > tol * scale * sum(abs(c) for c in rel):
        return None
    return tuple(int(c) for c in rel)


def character_rank(factors: Sequence[float], bound: int = CHARACTER_BOUND, tol: float = 1e-9) -> CharacterRank:
    """Rank of the multiplicative group generated by positive homothety factors.

    Computed as the rank over ``Q`` of the logarithms.  Dependence is certified
    by an explicit integer relation; independence only means no relation with
    coefficients up to ``bound`` exists, so any rank above 1 is heuristic.
    """
    if not factors:
        raise ParameterError("need at least one factor")
    if any(not f > 0 for f in factors):
        raise ParameterError("homothety factors must be positive")
    logs = [math.log(f) for f in factors]
    logs = [v for v in logs if abs(v) > tol]
    basis: list[float] = []
    relations = []
    for v in logs:
        if basis:
            rel = integer_relation([v] + basis, bound, tol)
            if rel is not None and rel[0] != 0:
                relations.append(rel)
                continue
        basis.append(v)
    rank = len(basis)
    return CharacterRank(rank=rank, heuristic=rank >= 2, bound=bound, relations=tuple(relations))
