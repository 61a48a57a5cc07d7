"""Holomorphic maps into flat space, truncated with certified tails.

An :class:`ImmersionMap` produces its components ``F_j`` and their complex
gradients one index at a time.  Infinite maps carry a ``tail_bound``
returning upper bounds for ``sum_{j >= J} |F_j|^2`` and for
``sum_{j >= J} |grad F_j|^2``; evaluation picks ``J`` per point so both
tails fall below ``1e-10`` of the partial sums.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from ._parallel import pmap
from .exceptions import DomainError
from .geometry import DeckMap, HermitianMetricField

TAIL_RTOL = 1e-10
GEOMETRIC_CAP = 500
FACTORIAL_CAP = 120
DESCENT_TOL = 1e-8
DESCENT_PAIRS = 30

Components = Callable[[np.ndarray, int], tuple[np.ndarray, np.ndarray]]
TailBound = Callable[[np.ndarray, int], tuple[float, float]]


def _always(_: np.ndarray) -> bool:
    return True


@dataclass(frozen=True)
class Evaluation:
    values: np.ndarray
    jacobian: np.ndarray  # jacobian[j, a] = dF_j / dz_a
    terms: int
    value_tail: float
    jacobian_tail: float


@dataclass(frozen=True)
class ImmersionMap:
    name: str
    nvars: int
    components: Components
    size: int | None = None
    tail_bound: TailBound | None = None
    cap: int = GEOMETRIC_CAP
    domain_guard: Callable[[np.ndarray], bool] = _always
    chunk: int = 16

    def evaluate(self, point: np.ndarray, terms: int | None = None) -> Evaluation:
        """Components at ``point``; ``terms`` forces the truncation length."""
        point = np.asarray(point, dtype=complex)
        if not self.domain_guard(point):
            raise DomainError(f"point {point} outside the domain of {self.name}")
        if self.size is not None:
            values, jac = self.components(point, self.size)
            return Evaluation(values, jac, self.size, 0.0, 0.0)
        if terms is not None:
            values, jac = self.components(point, terms)
            tv, tj = self.tail_bound(point, terms)
            return Evaluation(values, jac, terms, tv, tj)
        count = self.chunk
        while True:
            values, jac = self.components(point, count)
            tv, tj = self.tail_bound(point, count)
            vsum = float(np.sum(np.abs(values) ** 2))
            jsum = float(np.sum(np.abs(jac) ** 2))
            if (tv <= TAIL_RTOL * vsum and tj <= TAIL_RTOL * jsum) or count >= self.cap:
                return Evaluation(values, jac, count, tv, tj)
            count = min(2 * count, self.cap)

    def __call__(self, point: np.ndarray) -> np.ndarray:
        return self.evaluate(point).values

    def precompose(self, gamma: DeckMap, name: str | None = None) -> "ImmersionMap":
        """``F o gamma`` (same tail bounds evaluated at the image point)."""

        def comps(z, count):
            values, jac = self.components(gamma(z), count)
            return values, jac @ gamma.jacobian(z)

        tail = None
        if self.tail_bound is not None:
            def tail(z, count):
                tv, tj = self.tail_bound(gamma(z), count)
                scale = float(np.linalg.norm(gamma.jacobian(z), 2)) ** 2
                return tv, tj * scale

        return ImmersionMap(
            name or f"{self.name}o{gamma.name}",
            self.nvars,
            comps,
            self.size,
            tail,
            self.cap,
            lambda z: self.domain_guard(gamma(z)),
            self.chunk,
        )

    def postcompose(self, unitary: np.ndarray, name: str | None = None) -> "ImmersionMap":
        """``U o F`` for a finite map and a unitary ``U``."""
        if self.size is None:
            raise ValueError("postcompose needs a finite map")
        u = np.asarray(unitary, dtype=complex)

        def comps(z, count):
            values, jac = self.components(z, count)
            return u @ values, u @ jac

        return ImmersionMap(name or f"U*{self.name}", self.nvars, comps, self.size,
                            domain_guard=self.domain_guard)


def _ratio_tail(first: float, ratio: float) -> float:
    """Bound ``sum_{i>=0} t_i`` when ``t_0 = first`` and ``t_{i+1} / t_i <= ratio``."""
    if first == 0.0:
        return 0.0
    if ratio >= 1.0:
        return math.inf
    return first / (1.0 - ratio)


def _common_terms(F: ImmersionMap, points: Sequence[np.ndarray]) -> int | None:
    if F.size is not None:
        return None
    return max(F.evaluate(p).terms for p in points)


# -- evaluation helpers -------------------------------------------------------


@dataclass(frozen=True)
class NormEstimate:
    value: float
    error: float
    terms: int


def norm_squared(F: ImmersionMap, point: np.ndarray) -> NormEstimate:
    """``||F(point)||^2`` as partial sum plus certified tail."""
    ev = F.evaluate(point)
    return NormEstimate(float(np.sum(np.abs(ev.values) ** 2)), ev.value_tail, ev.terms)


def gram(F: ImmersionMap, x: np.ndarray, y: np.ndarray) -> complex:
    """``<F(x), F(y)> = sum_j F_j(x) conj(F_j(y))`` at a common truncation."""
    terms = _common_terms(F, [x, y])
    fx = F.evaluate(x, terms).values
    fy = F.evaluate(y, terms).values
    return complex(np.sum(fx * fy.conj()))


def pullback_metric(F: ImmersionMap, point: np.ndarray, return_error: bool = False):
    """``h[a, b] = sum_j dF_j/dz_a conj(dF_j/dz_b)``."""
    ev = F.evaluate(point)
    if not math.isfinite(ev.jacobian_tail):
        raise DomainError(f"{F.name}: Jacobian tail diverges at {point}")
    h = ev.jacobian.T @ ev.jacobian.conj()
    h = 0.5 * (h + h.conj().T)
    if return_error:
        return h, ev.jacobian_tail
    return h


# -- certificates -------------------------------------------------------------


@dataclass(frozen=True)
class ImmersionReport:
    map: str
    target: str
    passed: bool
    c: float
    max_deviation: float
    tolerance: float
    samples: int
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "map": self.map,
            "target": self.target,
            "pass": self.passed,
            "c": self.c,
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "samples": self.samples,
            "seed": self.seed,
        }


def verify_immersion(
    F: ImmersionMap,
    target: HermitianMetricField,
    samples: Sequence[np.ndarray],
    tol: float = 1e-6,
    seed: int | None = None,
) -> ImmersionReport:
    """Check ``F^* omega_0 = c * target`` for one positive constant ``c``.

    ``c`` minimizes the worst relative Frobenius mismatch over the samples;
    ``c != 1`` means the two sides use different normalizations.
    """

    def one(z):
        return pullback_metric(F, z), np.asarray(target.coeff(np.asarray(z, dtype=complex)))

    pairs = pmap(one, samples)
    ratios = np.array([np.real(np.vdot(t, p)) / np.real(np.vdot(t, t)) for p, t in pairs])

    def worst(c: float) -> float:
        return max(float(np.linalg.norm(p - c * t) / np.linalg.norm(c * t)) for p, t in pairs)

    lo, hi = float(ratios.min()), float(ratios.max())
    if hi - lo <= 1e-15 * max(abs(hi), 1.0) or lo <= 0:
        c = float(np.median(ratios))
    else:
        res = minimize_scalar(worst, bounds=(lo, hi), method="bounded", options={"xatol": 1e-15 * hi})
        c = float(res.x)
        if worst(float(np.median(ratios))) < worst(c):
            c = float(np.median(ratios))
    deviation = worst(c) if c > 0 else math.inf
    return ImmersionReport(
        map=F.name,
        target=target.name,
        passed=bool(c > 0 and deviation < tol),
        c=c,
        max_deviation=deviation,
        tolerance=tol,
        samples=len(pairs),
        seed=seed,
    )


@dataclass(frozen=True)
class DescentReport:
    map: str
    deck: str
    mode: str  # "scalar" | "gram" | "none"
    scalar: complex | None
    gram_factor: float | None
    max_deviation: float
    scalar_deviation: float
    gram_deviation: float
    seed: int
    samples: int

    def to_dict(self) -> dict:
        lam = None if self.scalar is None else {"re": self.scalar.real, "im": self.scalar.imag}
        return {
            "map": self.map,
            "deck": self.deck,
            "mode": self.mode,
            "lambda": lam,
            "c": self.gram_factor,
            "max_deviation": self.max_deviation,
            "scalar_deviation": self.scalar_deviation,
            "gram_deviation": self.gram_deviation,
            "seed": self.seed,
            "samples": self.samples,
        }


def scalar_descent(
    F: ImmersionMap,
    gamma: DeckMap,
    samples: Sequence[np.ndarray],
    tol: float = DESCENT_TOL,
    seed: int = 0,
    pairs: int = DESCENT_PAIRS,
) -> DescentReport:
    """Does ``F o gamma = lambda F`` (scalar), or only ``<F(gx), F(gy)> = c <F(x), F(y)>`` (gram)?

    Gram equivariance means ``F o gamma`` and ``sqrt(c) F`` differ by an ambient
    unitary; scalar equivariance is what descent to a classical Hopf quotient
    ``C^N / <lambda id>`` needs.
    """
    samples = [np.asarray(z, dtype=complex) for z in samples]
    images = [gamma(z) for z in samples]

    def both(i):
        terms = _common_terms(F, [samples[i], images[i]])
        return F.evaluate(images[i], terms).values, F.evaluate(samples[i], terms).values

    evals = pmap(both, range(len(samples)))

    ratios = []
    for moved, base in evals:
        mag = np.abs(base)
        big = mag >= 0.5 * mag.max()
        ratios.extend(moved[big] / base[big])
    ratios = np.array(ratios)
    lam = complex(np.median(ratios.real), np.median(ratios.imag))
    scalar_dev = max(
        float(np.linalg.norm(moved - lam * base) / max(np.linalg.norm(moved), abs(lam) * np.linalg.norm(base)))
        for moved, base in evals
    )

    norms_moved = [float(np.sum(np.abs(m) ** 2)) for m, _ in evals]
    norms_base = [float(np.sum(np.abs(b) ** 2)) for _, b in evals]
    c = float(np.median(np.array(norms_moved) / np.array(norms_base)))
    rng = np.random.default_rng(seed)
    index_pairs = rng.integers(0, len(samples), size=(pairs, 2))

    def pair_dev(ij):
        i, j = int(ij[0]), int(ij[1])
        g_moved = gram(F, images[i], images[j])
        g_base = gram(F, samples[i], samples[j])
        scale = math.sqrt(norms_moved[i] * norms_moved[j])
        return abs(g_moved - c * g_base) / scale

    gram_dev = max(pmap(pair_dev, list(index_pairs)))

    if scalar_dev <= tol:
        mode, dev = "scalar", scalar_dev
    elif gram_dev <= tol:
        mode, dev = "gram", gram_dev
    else:
        mode, dev = "none", min(scalar_dev, gram_dev)
    return DescentReport(
        map=F.name,
        deck=gamma.name,
        mode=mode,
        scalar=lam if mode == "scalar" else None,
        gram_factor=c if mode in ("scalar", "gram") else None,
        max_deviation=dev,
        scalar_deviation=scalar_dev,
        gram_deviation=gram_dev,
        seed=seed,
        samples=len(samples),
    )


def rigidity_gauge(
    F1: ImmersionMap,
    F2: ImmersionMap,
    pairs: Sequence[tuple[np.ndarray, np.ndarray]],
    tol: float = DESCENT_TOL,
) -> bool:
    """True iff the Gram kernels of ``F1`` and ``F2`` agree on all pairs.

    Equal kernels certify a unitary ``U`` with ``F2 = U o F1`` on the span.
    """
    for x, y in pairs:
        g1, g2 = gram(F1, x, y), gram(F2, x, y)
        scale = math.sqrt(norm_squared(F1, x).value * norm_squared(F1, y).value)
        scale = max(scale, math.sqrt(norm_squared(F2, x).value * norm_squared(F2, y).value))
        if abs(g1 - g2) > tol * scale:
            return False
    return True


# -- catalog maps -------------------------------------------------------------


def identity_map(nvars: int) -> ImmersionMap:
    eye = np.eye(nvars, dtype=complex)
    return ImmersionMap("identity", nvars, lambda z, _: (np.asarray(z, dtype=complex).copy(), eye), size=nvars)


def parton_map(k: int) -> ImmersionMap:
    """``F_j = sqrt(binom(k, j) / k) z1^(k-j) z2^j`` for ``j = 0..k``."""
    j = np.arange(k + 1)
    coef = np.sqrt(np.array([math.comb(k, int(i)) for i in j]) / k)
    e1, e2 = k - j, j

    def comps(z, _):
        z1, z2 = complex(z[0]), complex(z[1])
        p1 = z1 ** e1
        p2 = z2 ** e2
        values = coef * p1 * p2
        d1 = coef * e1 * z1 ** np.maximum(e1 - 1, 0) * p2
        d2 = coef * e2 * p1 * z2 ** np.maximum(e2 - 1, 0)
        return values, np.stack([d1, d2], axis=1)

    return ImmersionMap(f"parton-k{k}", 2, comps, size=k + 1)


def elliptic_domain(z: np.ndarray) -> bool:
    s = z[0] - 1j * z[1]
    p = z[0] + 1j * z[1]
    return bool(abs(s) > 0 and abs(p) < abs(s))


def elliptic_map() -> ImmersionMap:
    """``phi_j = r^j / s`` with ``s = z1 - i z2``, ``r = (z1 + i z2) / s``."""

    def comps(z, count):
        s = complex(z[0] - 1j * z[1])
        r = complex(z[0] + 1j * z[1]) / s
        j = np.arange(count)
        rj = r ** j
        rjm1 = r ** np.maximum(j - 1, 0)
        values = rj / s
        a = j * rjm1 / s**2
        b = (j + 1) * rj / s**2
        return values, np.stack([a - b, 1j * (a + b)], axis=1)

    def tail(z, count):
        s = abs(z[0] - 1j * z[1])
        q = abs((z[0] + 1j * z[1]) / (z[0] - 1j * z[1])) ** 2
        value = q**count / (s**2 * (1 - q)) if q < 1 else math.inf
        J = max(count, 1)
        first = 2 * (2 * J + 1) ** 2 * q ** (J - 1) / s**4
        ratio = ((2 * J + 3) / (2 * J + 1)) ** 2 * q
        return value, _ratio_tail(first, ratio)

    return ImmersionMap("elliptic-phi", 2, comps, tail_bound=tail, cap=GEOMETRIC_CAP, domain_guard=elliptic_domain)


def kodaira_map() -> ImmersionMap:
    """``F_j = z^j / (2^j sqrt(j!)) exp(-i w / 4)``."""

    def comps(z, count):
        zz, w = complex(z[0]), complex(z[1])
        j = np.arange(count)
        log_coef = -j * math.log(2) - 0.5 * np.array([math.lgamma(i + 1) for i in j])
        coef = np.exp(log_coef)
        e = np.exp(-0.25j * w)
        values = coef * zz**j * e
        dz = coef * j * zz ** np.maximum(j - 1, 0) * e
        dw = -0.25j * values
        return values, np.stack([dz, dw], axis=1)

    def tail(z, count):
        x = abs(z[0]) ** 2 / 4
        e2 = math.exp(z[1].imag / 2)
        J = max(count, 1)
        value_first = math.exp(J * math.log(x) - math.lgamma(J + 1)) * e2 if x > 0 else 0.0
        value = _ratio_tail(value_first, x / (J + 1))
        d_first = (J / 4) * math.exp((J - 1) * math.log(x) - math.lgamma(J)) * e2 if x > 0 else 0.0
        d_ratio = (J + 1) / J * x / J
        return value, _ratio_tail(d_first, d_ratio) + value / 16

    return ImmersionMap("kodaira-F", 2, comps, tail_bound=tail, cap=FACTORIAL_CAP)


def inoue_domain(z: np.ndarray) -> bool:
    return bool(abs(z[1]) < 1)


def inoue_map() -> ImmersionMap:
    """``(z, sqrt2 w, sqrt2 (w^2 - i w), ..., sqrt2 (w^(j+1) - i w^j), ...)`` on ``C x disc``."""
    r2 = math.sqrt(2)

    def comps(z, count):
        zz, w = complex(z[0]), complex(z[1])
        values = np.zeros(count, dtype=complex)
        dz = np.zeros(count, dtype=complex)
        dw = np.zeros(count, dtype=complex)
        values[0], dz[0] = zz, 1.0
        if count > 1:
            values[1], dw[1] = r2 * w, r2
        if count > 2:
            c = np.arange(2, count)
            values[2:] = r2 * (w**c - 1j * w ** (c - 1))
            dw[2:] = r2 * (c * w ** (c - 1) - 1j * (c - 1) * w ** np.maximum(c - 2, 0))
        return values, np.stack([dz, dw], axis=1)

    def tail(z, count):
        w = complex(z[1])
        q = abs(w) ** 2
        J = max(count, 2)
        value = 2 * abs(w - 1j) ** 2 * q ** (J - 1) / (1 - q) if q < 1 else math.inf
        first = 2 * (2 * J - 1) ** 2 * q ** (J - 2)
        ratio = ((2 * J + 1) / (2 * J - 1)) ** 2 * q
        return value, _ratio_tail(first, ratio)

    return ImmersionMap("inoue-F", 2, comps, tail_bound=tail, cap=GEOMETRIC_CAP, domain_guard=inoue_domain)
