"""Truncated power series in holomorphic and antiholomorphic variables.

A :class:`BiSeries` in ``n`` variables stores the coefficients ``a[j, k]`` of
the monomials ``z**m_j * conj(z)**m_k``, where the multi-indices ``m_j`` run over
all exponent tuples of total degree ``<= d`` in graded lexicographic order.
Truncation is per side: a term survives iff its holomorphic degree and its
antiholomorphic degree are both ``<= d``.  With this rule every retained
coefficient of a sum, product, exponential or power is computed exactly
(no truncated term can feed back into a retained one).

Coefficients are stored as a dense ``(L, L)`` complex array indexed by the
label list, so the Calabi matrix of a series is a slice of its storage.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .exceptions import DimensionError, DomainError

MultiIndex = tuple[int, ...]

MAX_VARS = 4


def graded_lex_key(m: Sequence[int]) -> tuple:
    """Sort key: total degree first, then lexicographic with ``z1`` largest."""
    return (sum(m), tuple(-e for e in m))


@lru_cache(maxsize=None)
def multi_indices(nvars: int, max_degree: int) -> tuple[MultiIndex, ...]:
    """All exponent tuples of total degree ``<= max_degree``, graded-lex sorted.

    The zero index comes first; the indices of degree ``<= e`` always form a
    prefix of the list, for every ``e <= max_degree``.
    """
    out: list[MultiIndex] = []

    def rec(prefix: list[int], remaining: int, slots: int) -> None:
        if slots == 0:
            out.append(tuple(prefix))
            return
        for e in range(remaining + 1):
            rec(prefix + [e], remaining - e, slots - 1)

    rec([], max_degree, nvars)
    return tuple(sorted(out, key=graded_lex_key))


def format_multi_index(m: Sequence[int], var: str = "z") -> str:
    """Human-readable monomial name, e.g. ``(2, 1) -> 'z1^2*z2'``."""
    parts = []
    for i, e in enumerate(m, start=1):
        if e == 1:
            parts.append(f"{var}{i}")
        elif e > 1:
            parts.append(f"{var}{i}^{e}")
    return "*".join(parts) if parts else "1"


@lru_cache(maxsize=None)
def _tables(nvars: int, d: int):
    labels = multi_indices(nvars, d)
    index = {m: i for i, m in enumerate(labels)}
    exps = np.array(labels, dtype=np.int64).reshape(len(labels), nvars)
    degrees = exps.sum(axis=1)
    # number of labels of degree <= e, for e = 0..d
    prefix = np.array([int(np.sum(degrees <= e)) for e in range(d + 1)], dtype=np.int64)
    # shift[p] = target indices of q + p for the prefix of labels q with deg(q) <= d - deg(p)
    shift = []
    for p in labels:
        room = d - sum(p)
        count = prefix[room]
        shift.append(
            np.array(
                [index[tuple(a + b for a, b in zip(q, p))] for q in labels[:count]],
                dtype=np.int64,
            )
        )
    return labels, index, exps, degrees, shift


def _check_nvars(nvars: int) -> None:
    if not 1 <= nvars <= MAX_VARS:
        raise DimensionError(f"nvars must be in [1, {MAX_VARS}], got {nvars}")


class BiSeries:
    """Truncated series ``sum a[j, k] z**m_j conj(z)**m_k``.

    Instances are immutable values: arithmetic returns new series and the
    coefficient array is read-only.

    Parameters
    ----------
    nvars : int
        Number of holomorphic variables (1 to 4).
    max_bidegree : int
        Per-side truncation degree ``d``.
    coeffs : mapping or array, optional
        Either a mapping ``{(j, k): value}`` keyed by multi-index pairs
        (entries beyond the truncation are dropped), or a dense ``(L, L)``
        array in label order.
    hermitian : bool
        Flag declaring the series real valued.  The flag is checked against
        the coefficients on construction.
    """

    __slots__ = ("nvars", "max_bidegree", "coeffs", "hermitian")
    __hash__ = None  # type: ignore[assignment]

    def __init__(
        self,
        nvars: int,
        max_bidegree: int,
        coeffs: Mapping[tuple[MultiIndex, MultiIndex], complex] | np.ndarray | None = None,
        hermitian: bool = False,
    ):
        _check_nvars(nvars)
        if max_bidegree < 0:
            raise DimensionError("max_bidegree must be non-negative")
        labels, index, *_ = _tables(nvars, max_bidegree)
        size = len(labels)
        if coeffs is None:
            arr = np.zeros((size, size), dtype=complex)
        elif isinstance(coeffs, np.ndarray):
            if coeffs.shape != (size, size):
                raise DimensionError(
                    f"coefficient array must have shape {(size, size)}, got {coeffs.shape}"
                )
            arr = np.array(coeffs, dtype=complex)
        else:
            arr = np.zeros((size, size), dtype=complex)
            for (j, k), value in coeffs.items():
                j, k = tuple(j), tuple(k)
                if len(j) != nvars or len(k) != nvars:
                    raise DimensionError(f"multi-index length mismatch for {(j, k)}")
                if sum(j) > max_bidegree or sum(k) > max_bidegree:
                    continue
                arr[index[j], index[k]] += value
        arr.setflags(write=False)
        self.nvars = nvars
        self.max_bidegree = max_bidegree
        self.coeffs = arr
        if hermitian and not self.is_hermitian(tol=1e-12):
            raise DomainError("coefficients are not Hermitian symmetric")
        self.hermitian = bool(hermitian)

    # -- constructors -------------------------------------------------

    @classmethod
    def zeros(cls, nvars: int, d: int) -> "BiSeries":
        return cls(nvars, d, hermitian=True)

    @classmethod
    def constant(cls, nvars: int, d: int, value: complex) -> "BiSeries":
        zero = (0,) * nvars
        return cls(nvars, d, {(zero, zero): value}, hermitian=np.imag(value) == 0)

    @classmethod
    def monomial(
        cls, nvars: int, d: int, j: Sequence[int], k: Sequence[int], value: complex = 1.0
    ) -> "BiSeries":
        return cls(nvars, d, {(tuple(j), tuple(k)): value})

    @classmethod
    def holomorphic(cls, nvars: int, d: int, var: int) -> "BiSeries":
        """The coordinate ``z_var`` (0-based)."""
        e = tuple(1 if i == var else 0 for i in range(nvars))
        return cls.monomial(nvars, d, e, (0,) * nvars)

    @classmethod
    def antiholomorphic(cls, nvars: int, d: int, var: int) -> "BiSeries":
        """The coordinate ``conj(z_var)`` (0-based)."""
        e = tuple(1 if i == var else 0 for i in range(nvars))
        return cls.monomial(nvars, d, (0,) * nvars, e)

    @classmethod
    def norm_squared(cls, nvars: int, d: int, variables: Iterable[int] | None = None) -> "BiSeries":
        """``sum |z_i|**2`` over the given variables (all by default)."""
        if variables is None:
            variables = range(nvars)
        terms = {}
        for var in variables:
            e = tuple(1 if i == var else 0 for i in range(nvars))
            terms[(e, e)] = 1.0
        return cls(nvars, d, terms, hermitian=True)

    # -- inspection ---------------------------------------------------

    @property
    def labels(self) -> tuple[MultiIndex, ...]:
        return _tables(self.nvars, self.max_bidegree)[0]

    def coefficient(self, j: Sequence[int], k: Sequence[int]) -> complex:
        index = _tables(self.nvars, self.max_bidegree)[1]
        j, k = tuple(j), tuple(k)
        if j not in index or k not in index:
            return 0j
        return complex(self.coeffs[index[j], index[k]])

    @property
    def constant_term(self) -> complex:
        return complex(self.coeffs[0, 0])

    def items(self) -> Iterator[tuple[tuple[MultiIndex, MultiIndex], complex]]:
        """Nonzero coefficients in deterministic graded-lex order (row-major)."""
        labels = self.labels
        rows, cols = np.nonzero(self.coeffs)
        for r, c in zip(rows, cols):
            yield (labels[r], labels[c]), complex(self.coeffs[r, c])

    def is_hermitian(self, tol: float = 0.0) -> bool:
        diff = np.max(np.abs(self.coeffs - self.coeffs.conj().T), initial=0.0)
        scale = max(1.0, float(np.max(np.abs(self.coeffs), initial=0.0)))
        return bool(diff <= tol * scale)

    def with_hermitian_flag(self, tol: float = 1e-12) -> "BiSeries":
        """Return a copy flagged real valued; raises if the coefficients disagree."""
        if not self.is_hermitian(tol):
            raise DomainError("series is not Hermitian symmetric")
        sym = 0.5 * (self.coeffs + self.coeffs.conj().T)
        return BiSeries(self.nvars, self.max_bidegree, sym, hermitian=True)

    def allclose(self, other: "BiSeries", atol: float = 1e-12, rtol: float = 0.0) -> bool:
        a, b = _align(self, other)
        return bool(np.allclose(a.coeffs, b.coeffs, atol=atol, rtol=rtol))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BiSeries):
            return NotImplemented
        return (
            self.nvars == other.nvars
            and self.max_bidegree == other.max_bidegree
            and bool(np.array_equal(self.coeffs, other.coeffs))
        )

    def __repr__(self) -> str:
        nnz = int(np.count_nonzero(self.coeffs))
        return (
            f"BiSeries(nvars={self.nvars}, max_bidegree={self.max_bidegree}, "
            f"nonzero={nnz}, hermitian={self.hermitian})"
        )

    # -- arithmetic ---------------------------------------------------

    def truncate(self, d: int) -> "BiSeries":
        if d > self.max_bidegree:
            raise DimensionError("cannot raise the truncation degree")
        if d == self.max_bidegree:
            return self
        size = len(multi_indices(self.nvars, d))
        return BiSeries(self.nvars, d, self.coeffs[:size, :size], hermitian=self.hermitian)

    def _binary(self, other):
        if isinstance(other, BiSeries):
            return _align(self, other)
        if np.isscalar(other):
            return self, BiSeries.constant(self.nvars, self.max_bidegree, complex(other))
        return None

    def __add__(self, other):
        pair = self._binary(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return BiSeries(a.nvars, a.max_bidegree, a.coeffs + b.coeffs,
                        hermitian=a.hermitian and b.hermitian)

    __radd__ = __add__

    def __neg__(self):
        return BiSeries(self.nvars, self.max_bidegree, -self.coeffs, hermitian=self.hermitian)

    def __sub__(self, other):
        pair = self._binary(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return a + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, BiSeries):
            a, b = _align(self, other)
            return BiSeries(a.nvars, a.max_bidegree, _multiply(a.coeffs, b.coeffs, a.nvars, a.max_bidegree),
                            hermitian=a.hermitian and b.hermitian)
        if np.isscalar(other):
            value = complex(other)
            return BiSeries(self.nvars, self.max_bidegree, self.coeffs * value,
                            hermitian=self.hermitian and value.imag == 0)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if np.isscalar(other):
            return self * (1.0 / other)
        return NotImplemented

    def __pow__(self, exponent: int):
        if not isinstance(exponent, (int, np.integer)) or exponent < 0:
            return NotImplemented
        result = BiSeries.constant(self.nvars, self.max_bidegree, 1.0)
        base = self
        e = int(exponent)
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return BiSeries(result.nvars, result.max_bidegree, result.coeffs,
                        hermitian=self.hermitian)

    def conjugate(self) -> "BiSeries":
        """Series of the complex conjugate function: ``a[j, k] -> conj(a[k, j])``."""
        return BiSeries(self.nvars, self.max_bidegree, self.coeffs.conj().T, hermitian=self.hermitian)

    def exp(self) -> "BiSeries":
        return series_exp(self)

    def rpow(self, r: float) -> "BiSeries":
        return series_rpow(self, r)

    def pure_part_removal(self) -> "BiSeries":
        return pure_part_removal(self)

    # -- evaluation ---------------------------------------------------

    def monomials(self, z: np.ndarray) -> np.ndarray:
        """Values ``z**m_j`` of all labels; ``z`` has shape ``(n,)`` or ``(m, n)``."""
        z = np.asarray(z, dtype=complex)
        _, _, exps, _, _ = _tables(self.nvars, self.max_bidegree)
        pts = np.atleast_2d(z)
        if pts.shape[-1] != self.nvars:
            raise DimensionError(f"point has {pts.shape[-1]} coordinates, expected {self.nvars}")
        powers = pts[:, :, None] ** np.arange(self.max_bidegree + 1)[None, None, :]
        out = np.ones((pts.shape[0], exps.shape[0]), dtype=complex)
        for v in range(self.nvars):
            out *= powers[:, v, exps[:, v]]
        return out[0] if z.ndim == 1 else out

    def evaluate_polarized(self, z: np.ndarray, w: np.ndarray) -> complex | np.ndarray:
        """``sum a[j, k] z**m_j conj(w)**m_k`` (the analytic continuation in ``conj(z)``)."""
        mz = self.monomials(z)
        mw = self.monomials(w)
        if mz.ndim == 1:
            return complex(mz @ self.coeffs @ mw.conj())
        return np.einsum("pi,ij,pj->p", mz, self.coeffs, mw.conj())

    def evaluate(self, z: np.ndarray) -> complex | np.ndarray:
        return self.evaluate_polarized(z, z)

    def hessian(self, z: np.ndarray) -> np.ndarray:
        """Complex Hessian ``d^2 f / dz_a d conj(z_b)`` at a point, exact for the series."""
        z = np.asarray(z, dtype=complex)
        _, _, exps, _, _ = _tables(self.nvars, self.max_bidegree)
        powers = z[:, None] ** np.arange(self.max_bidegree + 1)[None, :]
        grads = np.empty((self.nvars, exps.shape[0]), dtype=complex)
        for a in range(self.nvars):
            g = np.ones(exps.shape[0], dtype=complex)
            for v in range(self.nvars):
                e = exps[:, v]
                if v == a:
                    g = g * e * powers[v, np.maximum(e - 1, 0)]
                else:
                    g = g * powers[v, e]
            grads[a] = g
        return grads @ self.coeffs @ grads.conj().T

    # -- serialization ------------------------------------------------

    def to_json(self) -> dict:
        terms = [
            {"j": list(j), "k": list(k), "re": float(c.real), "im": float(c.imag)}
            for (j, k), c in self.items()
        ]
        return {
            "nvars": self.nvars,
            "max_bidegree": self.max_bidegree,
            "hermitian": self.hermitian,
            "terms": terms,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "BiSeries":
        terms = {}
        for t in data["terms"]:
            key = (tuple(t["j"]), tuple(t["k"]))
            terms[key] = terms.get(key, 0) + complex(t["re"], t["im"])
        return cls(int(data["nvars"]), int(data["max_bidegree"]), terms,
                   hermitian=bool(data.get("hermitian", False)))


def _align(a: BiSeries, b: BiSeries) -> tuple[BiSeries, BiSeries]:
    if a.nvars != b.nvars:
        raise DimensionError(f"series in {a.nvars} and {b.nvars} variables")
    d = min(a.max_bidegree, b.max_bidegree)
    return a.truncate(d), b.truncate(d)


def _multiply(a: np.ndarray, b: np.ndarray, nvars: int, d: int) -> np.ndarray:
    # Loop over the nonzero entries of the sparser factor; each contributes a
    # shifted copy of the other factor's leading block.
    if np.count_nonzero(a) < np.count_nonzero(b):
        a, b = b, a
    _, _, _, _, shift = _tables(nvars, d)
    out = np.zeros_like(a)
    rows, cols = np.nonzero(b)
    for p, q in zip(rows, cols):
        tp, tq = shift[p], shift[q]
        out[np.ix_(tp, tq)] += b[p, q] * a[: tp.size, : tq.size]
    return out


def series_add(a: BiSeries, b: BiSeries) -> BiSeries:
    return a + b


def series_mul(a: BiSeries, b: BiSeries) -> BiSeries:
    return a * b


def _power_sum(b: BiSeries, coefficients) -> BiSeries:
    """``sum_n c_n b**n`` for ``b`` without constant term (finite by truncation)."""
    d = b.max_bidegree
    total = BiSeries.constant(b.nvars, d, coefficients(0))
    term = BiSeries.constant(b.nvars, d, 1.0)
    # each power raises the total bidegree by at least one
    for n in range(1, 2 * d + 1):
        term = term * b
        if not np.any(term.coeffs):
            break
        total = total + coefficients(n) * term
    return total


def series_exp(a: BiSeries) -> BiSeries:
    """Exponential, expanded around the constant term ``a(0)``."""
    a0 = a.constant_term
    b = a - a0
    out = _power_sum(b, lambda n: 1.0 / math.factorial(n)) * complex(np.exp(a0))
    return BiSeries(out.nvars, out.max_bidegree, out.coeffs, hermitian=a.hermitian)


def series_rpow(a: BiSeries, r: float) -> BiSeries:
    """Real power ``a**r`` via the binomial series around ``a(0) > 0``."""
    a0 = a.constant_term
    if not (a0.real > 0 and abs(a0.imag) <= 1e-14 * a0.real):
        raise DomainError(f"rpow needs a real positive constant term, got {a0}")
    c0 = a0.real
    b = (a - c0) * (1.0 / c0)

    def binom(n: int) -> float:
        out = 1.0
        for i in range(n):
            out *= (r - i) / (i + 1)
        return out

    out = _power_sum(b, binom) * (c0 ** r)
    return BiSeries(out.nvars, out.max_bidegree, out.coeffs, hermitian=a.hermitian)


def pure_part_removal(a: BiSeries) -> BiSeries:
    """Drop every term that is holomorphic or antiholomorphic alone (and the constant)."""
    arr = a.coeffs.copy()
    arr[0, :] = 0
    arr[:, 0] = 0
    return BiSeries(a.nvars, a.max_bidegree, arr, hermitian=a.hermitian)
