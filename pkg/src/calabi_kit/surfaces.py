"""Catalog of compact lcK surfaces given by explicit covering data.

Each family is built into a :class:`Surface`: the Kahler covering with its
potential and metric, the lcK metric with Lee form, deck generators, and
(where one exists) an explicit holomorphic map into flat space together with
the metric it should pull back to.

Families and selectors::

    hopf:a=4/3,b=2/3  or  hopf:alpha=2,beta=2i     diagonal Hopf surface
    parton:k=3[,alpha=2]                             Parton potential on C^2 - 0
    elliptic                                         properly elliptic surface
    kodaira                                          primary Kodaira surface
    inoue[:m=0,1,0,0,0,1,1,1,0]                      Inoue surface S_M
    hopf-ambient[:n=2,lambda=2]                      classical Hopf manifold
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from . import immersions as imm
from ._fd import central_derivative
from .algebra import BiSeries
from .calabi import go_eigen_product
from .exceptions import DomainError, ParameterError
from .geometry import DeckMap, HermitianMetricField, PotentialField

GO_BRACKET_LOW = 1e-300
GO_MAX_ITER = 200
GO_FD_STEPS = {1: 1e-4, 2: 5e-4, 3: 2e-3}

FAMILIES = ("hopf-diagonal", "hopf-parton", "properly-elliptic", "kodaira", "inoue-SM", "hopf-ambient")
ALIASES = {
    "hopf": "hopf-diagonal",
    "hopf-diagonal": "hopf-diagonal",
    "parton": "hopf-parton",
    "hopf-parton": "hopf-parton",
    "elliptic": "properly-elliptic",
    "properly-elliptic": "properly-elliptic",
    "kodaira": "kodaira",
    "inoue": "inoue-SM",
    "inoue-sm": "inoue-SM",
    "hopf-ambient": "hopf-ambient",
    "ambient": "hopf-ambient",
}

INOUE_DEFAULT = (0, 1, 0, 0, 0, 1, 1, 1, 0)


# -- Gauduchon-Ornea potential ------------------------------------------------


@dataclass(frozen=True)
class GOParams:
    """Exponents of ``|z1|^2 phi^-a + |z2|^2 phi^-b = 1``; ``a + b = 2``, ``a >= 1 >= b > 0``."""

    a: float
    b: float

    def __post_init__(self):
        if abs(self.a + self.b - 2) > 1e-12:
            raise ParameterError(f"need a + b = 2, got a={self.a}, b={self.b}")
        if not (self.a >= 1 - 1e-12 and 1 + 1e-12 >= self.b > 0):
            raise ParameterError(f"need a >= 1 >= b > 0, got a={self.a}, b={self.b}")

    @classmethod
    def from_moduli(cls, alpha_abs: float, beta_abs: float) -> "GOParams":
        if not alpha_abs >= beta_abs > 1:
            raise ParameterError(f"need |alpha| >= |beta| > 1, got {alpha_abs}, {beta_abs}")
        la, lb = math.log(alpha_abs), math.log(beta_abs)
        a = 2 * la / (la + lb)
        return cls(a, 2 - a)

    @property
    def flat(self) -> bool:
        return abs(self.a - self.b) <= 1e-12


def _go_log_solve(a: float, b: float, s1: np.ndarray, s2: np.ndarray) -> np.ndarray:
    """``log phi`` solving the defining equation, by bisection in ``log phi``."""
    with np.errstate(divide="ignore"):
        l1 = np.log(s1)
        l2 = np.log(s2)
    hi = np.maximum(np.maximum((l1 + math.log(2)) / a, (l2 + math.log(2)) / b), 0.0)
    lo = np.full_like(hi, math.log(GO_BRACKET_LOW))
    for _ in range(GO_MAX_ITER):
        mid = 0.5 * (lo + hi)
        too_small = np.logaddexp(l1 - a * mid, l2 - b * mid) > 0
        lo = np.where(too_small, mid, lo)
        hi = np.where(too_small, hi, mid)
        if np.all(hi - lo <= 4 * np.spacing(np.abs(hi) + 1.0)):
            break
    return 0.5 * (lo + hi)


def go_potential(params: GOParams, point: np.ndarray) -> float | np.ndarray:
    """Unique ``phi > 0`` with ``|z1|^2 phi^-a + |z2|^2 phi^-b = 1``.

    ``point`` has shape ``(2,)`` or ``(m, 2)``.
    """
    z = np.asarray(point, dtype=complex)
    pts = np.atleast_2d(z)
    s1 = np.abs(pts[:, 0]) ** 2
    s2 = np.abs(pts[:, 1]) ** 2
    if np.any((s1 == 0) & (s2 == 0)):
        raise DomainError("the potential is not defined at the origin")
    phi = np.exp(_go_log_solve(params.a, params.b, s1, s2))
    return float(phi[0]) if z.ndim == 1 else phi


def go_residual(params: GOParams, point: np.ndarray) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(point, dtype=complex))
    phi = np.atleast_1d(go_potential(params, pts))
    return np.abs(pts[:, 0]) ** 2 * phi**-params.a + np.abs(pts[:, 1]) ** 2 * phi**-params.b - 1.0


def go_radial(params: GOParams, t: np.ndarray, s2: float) -> np.ndarray:
    """``phi`` as a function of ``t = |z1|^2`` near 0 at fixed ``|z2|^2 = s2``.

    The defining equation is continued to small negative ``t`` so that
    central differences at ``t = 0`` make sense; the root is bracketed in
    ``log phi`` within one unit of ``log phi(0) = log(s2) / b``.
    """
    a, b = params.a, params.b
    t = np.atleast_1d(np.asarray(t, dtype=float))
    l0 = math.log(s2) / b

    def g(L):
        return t * np.exp(-a * L) + s2 * np.exp(-b * L) - 1.0

    lo = np.full_like(t, l0 - 1.0)
    hi = np.full_like(t, l0 + 1.0)
    if np.any(g(lo) <= 0) or np.any(g(hi) >= 0):
        raise DomainError("radial step too large for the local bracket")
    for _ in range(GO_MAX_ITER):
        mid = 0.5 * (lo + hi)
        positive = g(mid) > 0
        lo = np.where(positive, mid, lo)
        hi = np.where(positive, hi, mid)
        if np.all(hi - lo <= 4 * np.spacing(np.abs(hi) + 1.0)):
            break
    return np.exp(0.5 * (lo + hi))


def go_closed_derivative(params: GOParams, s: complex, j: int) -> float:
    """Closed form of ``d^j phi / dt^j`` at ``(0, s)``, ``t = |z1|^2``."""
    a, b = params.a, params.b
    s2 = abs(s) ** 2
    phi0 = s2 ** (1 / b)
    base = phi0 ** (j * (b - a) + 1) / (s2**j * b**j)
    return base * go_eigen_product(a, b, j)


def go_derivative_check(params: GOParams, s: complex, j: int) -> tuple[float, float]:
    """``(closed_form, finite_difference)`` for ``d^j phi / dt^j`` at ``(0, s)``.

    By rotation invariance ``phi`` depends on ``t = |z1|^2`` only, and the
    mixed derivative ``d^2j phi / dz1^j dconj(z1)^j`` at ``z1 = 0`` is ``j!``
    times the ``t``-derivative, so both carry the same sign.  The finite
    difference runs on :func:`go_radial` with a step scaled to ``phi(0)^a``.
    """
    if j not in GO_FD_STEPS:
        raise ParameterError("j must be 1, 2 or 3")
    if s == 0:
        raise DomainError("s must be nonzero")
    s2 = abs(s) ** 2
    closed = go_closed_derivative(params, s, j)
    h = GO_FD_STEPS[j] * s2 ** (params.a / params.b)
    fd = central_derivative(lambda t: go_radial(params, t, s2), 0.0, j, h)
    return closed, fd


def _go_partials(params: GOParams, z: np.ndarray):
    """``phi``, its ``s``-gradient and ``s``-Hessian at ``z`` (``s_i = |z_i|^2``)."""
    a, b = params.a, params.b
    s = np.abs(z) ** 2
    phi = go_potential(params, z)
    pa, pb = phi**-a, phi**-b
    g_phi = -(a * s[0] * pa + b * s[1] * pb) / phi
    g_phiphi = (a * (a + 1) * s[0] * pa + b * (b + 1) * s[1] * pb) / phi**2
    g_s = np.array([pa, pb])
    g_phis = np.array([-a * pa / phi, -b * pb / phi])
    grad = -g_s / g_phi
    hess = -(g_phiphi * np.outer(grad, grad) + np.outer(grad, g_phis) + np.outer(g_phis, grad)) / g_phi
    return phi, grad, hess


def go_hessian(params: GOParams, point: np.ndarray) -> np.ndarray:
    """Complex Hessian of the GO potential via implicit differentiation."""
    z = np.asarray(point, dtype=complex)
    _, grad, hess = _go_partials(params, z)
    return np.diag(grad).astype(complex) + hess * np.outer(z.conj(), z)


def go_lee_form(params: GOParams, point: np.ndarray) -> np.ndarray:
    """``-d log phi`` in interleaved real coordinates."""
    z = np.asarray(point, dtype=complex)
    phi, grad, _ = _go_partials(params, z)
    out = np.empty(4)
    out[0::2] = -2 * grad * z.real / phi
    out[1::2] = -2 * grad * z.imag / phi
    return out


# -- surface selectors --------------------------------------------------------


def _parse_number(text: str) -> complex:
    text = text.strip().replace(" ", "")
    if "/" in text and "i" not in text:
        return complex(float(Fraction(text)))
    if text.endswith("i"):
        body = text[:-1]
        if body in ("", "+", "-"):
            body += "1"
        # "a+bi" or "bi"
        for k in range(len(body) - 1, 0, -1):
            if body[k] in "+-" and body[k - 1] not in "eE":
                return complex(float(body[:k]), float(body[k:]))
        return complex(0.0, float(body))
    return complex(float(text))


def _real(value: complex, key: str) -> float:
    if abs(value.imag) > 0:
        raise ParameterError(f"{key} must be real")
    return value.real


@dataclass(frozen=True)
class SurfaceSpec:
    family: str
    params: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown family {self.family!r}")

    @property
    def selector(self) -> str:
        if not self.params:
            return self.family
        parts = []
        for key in sorted(self.params):
            value = self.params[key]
            if isinstance(value, tuple):
                value = ",".join(str(v) for v in value)
            parts.append(f"{key}={value}")
        return f"{self.family}:{','.join(parts)}"


def parse_surface(text: str) -> SurfaceSpec:
    """Parse a selector such as ``hopf:alpha=2,beta=2i`` or ``inoue:m=0,1,0,...``."""
    name, _, rest = text.strip().partition(":")
    family = ALIASES.get(name.strip().lower())
    if family is None:
        raise ParameterError(f"unknown surface {name!r}; known: {', '.join(sorted(set(ALIASES)))}")
    raw: dict[str, list[str]] = {}
    key = None
    for token in filter(None, (t.strip() for t in rest.split(","))):
        if "=" in token:
            key, _, value = token.partition("=")
            key = key.strip().lower()
            raw[key] = [value]
        elif key is not None:
            raw[key].append(token)
        else:
            raise ParameterError(f"cannot parse {token!r} in {text!r}")
    params: dict[str, object] = {}
    for key, values in raw.items():
        if key == "m":
            if len(values) != 9:
                raise ParameterError("m needs 9 integer entries")
            params["m"] = tuple(int(v) for v in values)
        elif len(values) != 1:
            raise ParameterError(f"{key} takes one value")
        elif key in ("k", "n"):
            params[key] = int(values[0])
        else:
            v = _parse_number(values[0])
            params[key] = v.real if v.imag == 0 else v
    allowed = {
        "hopf-diagonal": {"a", "b", "alpha", "beta"},
        "hopf-parton": {"k", "alpha"},
        "properly-elliptic": set(),
        "kodaira": set(),
        "inoue-SM": {"m"},
        "hopf-ambient": {"n", "lambda"},
    }[family]
    extra = set(params) - allowed
    if extra:
        raise ParameterError(f"{family} does not take {sorted(extra)}")
    return SurfaceSpec(family, params)


# -- surfaces -----------------------------------------------------------------

Sampler = Callable[[int, int], np.ndarray]


@dataclass(frozen=True)
class Surface:
    """Covering data of a compact lcK surface.

    ``series(d)`` expands the covering potential around ``potential.center``
    to per-side degree ``d`` (``None`` when no closed expansion exists).
    The immersion, when present, is defined on the chart of
    ``immersion_target`` and ``immersion_decks``; for most families that is
    the covering itself.
    """

    spec: SurfaceSpec
    potential: PotentialField
    covering_metric: HermitianMetricField
    lck_metric: HermitianMetricField
    decks: Mapping[str, DeckMap]
    sampler: Sampler
    series: Callable[[int], BiSeries] | None = None
    immersion: imm.ImmersionMap | None = None
    immersion_target: HermitianMetricField | None = None
    immersion_decks: Mapping[str, DeckMap] = field(default_factory=dict)
    immersion_sampler: Sampler | None = None
    immersion_potential: PotentialField | None = None
    facts: Mapping[str, object] = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    @property
    def name(self) -> str:
        return self.spec.selector

    def samples(self, n: int, seed: int = 0) -> np.ndarray:
        return self.sampler(n, seed)

    def immersion_samples(self, n: int, seed: int = 0) -> np.ndarray:
        if self.immersion_sampler is None:
            return self.sampler(n, seed)
        return self.immersion_sampler(n, seed)


def _disc(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.uniform(0, 1, n))
    return r * np.exp(2j * np.pi * rng.uniform(0, 1, n))


def _shell_sampler(nvars: int, low: float = 0.3, high: float = 2.0) -> Sampler:
    def sample(n, seed):
        rng = np.random.default_rng(seed)
        z = rng.normal(size=(n, nvars)) + 1j * rng.normal(size=(n, nvars))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        return z * rng.uniform(low, high, (n, 1))

    return sample


def _norm2(z: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(np.atleast_2d(z)) ** 2, axis=-1)


def _nonzero(z: np.ndarray) -> bool:
    return bool(np.any(np.asarray(z) != 0))


def _flat_lee(z: np.ndarray, power: float = 1.0) -> np.ndarray:
    """``-power * d log |z|^2`` in real coordinates."""
    from .geometry import to_real

    x = to_real(z)
    return -2 * power * x / float(np.dot(x, x))


def _hopf_ambient(spec: SurfaceSpec) -> Surface:
    n = int(spec.params.get("n", 2))
    lam = complex(spec.params.get("lambda", 2.0))
    if not 1 <= n <= 4:
        raise ParameterError("n must be between 1 and 4")
    if abs(abs(lam) - 1) < 1e-12:
        raise ParameterError("|lambda| must differ from 1")
    eye = np.eye(n, dtype=complex)
    potential = PotentialField(
        n,
        lambda z: _norm2(z)[0] if np.ndim(z) == 1 else _norm2(z),
        _nonzero,
        BiSeries.norm_squared(n, 1),
        name="|z|^2",
    )
    flat = HermitianMetricField(n, lambda z: eye, lambda z: np.zeros(2 * n), name="flat")
    hopf = HermitianMetricField(
        n, lambda z: eye / _norm2(z)[0], lambda z: _flat_lee(z), _nonzero, name="hopf-ambient"
    )
    deck = DeckMap.scalar(lam, n, name="lambda*id")
    return Surface(
        spec=spec,
        potential=potential,
        covering_metric=flat,
        lck_metric=hopf,
        decks={"lambda": deck},
        sampler=_shell_sampler(n),
        series=lambda d: BiSeries.norm_squared(n, d),
        immersion=imm.identity_map(n),
        immersion_target=flat,
        immersion_decks={"lambda": deck},
        facts={"lambda": lam, "descends": True},
    )


def _hopf_diagonal(spec: SurfaceSpec) -> Surface:
    p = spec.params
    if "alpha" in p or "beta" in p:
        if not ("alpha" in p and "beta" in p) or "a" in p or "b" in p:
            raise ParameterError("give either alpha and beta, or a and b")
        alpha, beta = complex(p["alpha"]), complex(p["beta"])
        params = GOParams.from_moduli(abs(alpha), abs(beta))
    else:
        if "a" not in p:
            raise ParameterError("hopf needs a (and b = 2 - a) or alpha and beta")
        a = float(p["a"])
        b = float(p.get("b", 2 - a))
        params = GOParams(a, b)
        alpha, beta = complex(math.exp(a)), complex(math.exp(b))
    gamma = DeckMap.linear(np.diag([alpha, beta]), name="gamma")

    def evaluate(z):
        return go_potential(params, z)

    flat = params.flat
    potential = PotentialField(
        2, evaluate, _nonzero, BiSeries.norm_squared(2, 1) if flat else None, name="go-potential"
    )
    covering = HermitianMetricField(2, lambda z: go_hessian(params, z), None, _nonzero, name="go-covering")

    def lck(z):
        return go_hessian(params, z) / go_potential(params, z)

    lck_metric = HermitianMetricField(2, lck, lambda z: go_lee_form(params, z), _nonzero, name="go-lck")
    notes = []
    if not flat:
        notes.append("the covering metric is not resolvable; use the witness check")
    return Surface(
        spec=spec,
        potential=potential,
        covering_metric=covering,
        lck_metric=lck_metric,
        decks={"gamma": gamma},
        sampler=_shell_sampler(2),
        series=(lambda d: BiSeries.norm_squared(2, d)) if flat else None,
        immersion=imm.identity_map(2) if flat else None,
        immersion_target=covering if flat else None,
        immersion_decks={"gamma": gamma} if flat else {},
        facts={
            "a": params.a,
            "b": params.b,
            "alpha": alpha,
            "beta": beta,
            "go_params": params,
            "homothety": abs(alpha * beta),
            "resolvable": flat,
            "descends": flat and abs(alpha - beta) <= 1e-12,
        },
        notes=tuple(notes),
    )


def _parton(spec: SurfaceSpec) -> Surface:
    k = int(spec.params.get("k", 2))
    alpha = complex(spec.params.get("alpha", 2.0))
    if k < 1:
        raise ParameterError("k must be a positive integer")
    if abs(alpha) <= 1:
        raise ParameterError("|alpha| must exceed 1")

    def evaluate(z):
        return _norm2(z)[0] ** k / k if np.ndim(z) == 1 else _norm2(z) ** k / k

    def hess(z):
        z = np.asarray(z, dtype=complex)
        a1, a2 = abs(z[0]) ** 2, abs(z[1]) ** 2
        s = a1 + a2
        off = (k - 1) * z[0].conj() * z[1]
        return s ** (k - 2) * np.array([[k * a1 + a2, off], [off.conjugate(), a1 + k * a2]])

    def lck(z):
        return hess(z) / _norm2(z)[0] ** k

    series = lambda d: BiSeries.norm_squared(2, d) ** k / k  # noqa: E731
    potential = PotentialField(2, evaluate, _nonzero, series(k), name=f"parton-k{k}")
    covering = HermitianMetricField(2, hess, None, _nonzero, name=f"parton-k{k}")
    lck_metric = HermitianMetricField(2, lck, lambda z: _flat_lee(z, k), _nonzero, name=f"parton-lck-k{k}")
    deck = DeckMap.scalar(alpha, 2, name="alpha*id")
    return Surface(
        spec=spec,
        potential=potential,
        covering_metric=covering,
        lck_metric=lck_metric,
        decks={"alpha": deck},
        sampler=_shell_sampler(2),
        series=series,
        immersion=imm.parton_map(k),
        immersion_target=covering,
        immersion_decks={"alpha": deck},
        facts={"k": k, "alpha": alpha, "lambda": alpha**k, "rank": k + 1, "descends": True},
        notes=(
            "F(alpha z) = alpha^k F(z), so the equivariance scalar is alpha^k",
        ),
    )


ELLIPTIC_CENTER = np.array([1.0, 0.5j])


def _im_z1z2bar(z: np.ndarray) -> np.ndarray:
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    return np.imag(z[:, 0] * z[:, 1].conj())


def elliptic_series(d: int, center: np.ndarray = ELLIPTIC_CENTER) -> BiSeries:
    """Expansion of ``1 / |Im(z1 conj z2)|`` around ``center`` (shifted coordinates)."""
    p1, p2 = complex(center[0]), complex(center[1])
    z1 = BiSeries.holomorphic(2, d, 0) + p1
    z2 = BiSeries.holomorphic(2, d, 1) + p2
    w1 = BiSeries.antiholomorphic(2, d, 0) + p1.conjugate()
    w2 = BiSeries.antiholomorphic(2, d, 1) + p2.conjugate()
    minus_g = (z1 * w2 - w1 * z2) * (-1 / 2j)
    return minus_g.with_hermitian_flag().rpow(-1.0).with_hermitian_flag()


def _elliptic(spec: SurfaceSpec) -> Surface:
    guard = imm.elliptic_domain
    half_i = 1 / 2j
    g2 = np.array([[0, half_i], [-half_i, 0]])

    def evaluate(z):
        g = _im_z1z2bar(z)
        return 1 / np.abs(g[0]) if np.ndim(z) == 1 else 1 / np.abs(g)

    # 1/|g| = -1/g on the domain, where g = Im(z1 conj z2) < 0
    def hess(z):
        z = np.asarray(z, dtype=complex)
        g = float(_im_z1z2bar(z)[0])
        grad = np.array([z[1].conjugate() * half_i, -z[0].conjugate() * half_i])
        return g2 / g**2 - 2 * np.outer(grad, grad.conj()) / g**3

    def lck(z):
        return hess(z) * abs(float(_im_z1z2bar(z)[0]))

    def lee(z):
        z = np.asarray(z, dtype=complex)
        g = float(_im_z1z2bar(z)[0])
        x1, y1, x2, y2 = z[0].real, z[0].imag, z[1].real, z[1].imag
        return np.array([-y2, x2, y1, -x1]) / g

    def sampler(ratio: float, low: float, high: float) -> Sampler:
        # z1 + i z2 = r s and z1 - i z2 = s, with |r| <= ratio
        def sample(n, seed):
            rng = np.random.default_rng(seed)
            r = _disc(rng, n, ratio)
            s = rng.uniform(low, high, n) * np.exp(2j * np.pi * rng.uniform(0, 1, n))
            p = r * s
            return np.stack([(p + s) / 2, (p - s) / 2j], axis=1)

        return sample

    def scalar_deck(m: int) -> DeckMap:
        return DeckMap.scalar(float(m), 2, name=f"{m}id")

    sl2 = DeckMap.linear(np.array([[2.0, 1.0], [1.0, 1.0]]), name="sl2")
    decks = {"2id": scalar_deck(2), "3id": scalar_deck(3), "sl2": sl2}
    potential = PotentialField(2, evaluate, guard, elliptic_series(12), ELLIPTIC_CENTER, 0.05, name="elliptic")
    covering = HermitianMetricField(2, hess, None, guard, name="elliptic-covering")
    lck_metric = HermitianMetricField(2, lck, lee, guard, name="elliptic-lck")
    return Surface(
        spec=spec,
        potential=potential,
        covering_metric=covering,
        lck_metric=lck_metric,
        decks=decks,
        # interior samples keep exterior-derivative stencils away from the boundary
        sampler=sampler(0.6, 1.0, 2.0),
        series=elliptic_series,
        immersion=imm.elliptic_map(),
        immersion_target=covering,
        immersion_decks=decks,
        immersion_sampler=sampler(0.8, 0.5, 1.5),
        facts={"c": 0.25, "descends": False},
        notes=(
            "domain is Im(z1 conj z2) < 0, where the defining series converges",
            "the map pulls back 1/4 of the Hessian of 1/|Im(z1 conj z2)|",
        ),
    )


def kodaira_u(z: np.ndarray) -> np.ndarray:
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    return 0.5 * np.abs(z[:, 0]) ** 2 + z[:, 1].imag


def kodaira_series(d: int) -> BiSeries:
    """Expansion of ``exp(u / 2)`` at the origin."""
    half_u = BiSeries.norm_squared(2, d, [0]) * 0.25 + (
        BiSeries.holomorphic(2, d, 1) - BiSeries.antiholomorphic(2, d, 1)
    ) * (-0.25j)
    return half_u.with_hermitian_flag().exp().with_hermitian_flag()


def heisenberg_deck(zeta: complex, shift: float = 0.0, name: str | None = None) -> DeckMap:
    """``(z, w) -> (z + zeta, w - i conj(zeta) z - i |zeta|^2 / 2 + shift)``; preserves ``u``."""
    zb = complex(zeta).conjugate()

    def apply(p):
        return np.array([p[0] + zeta, p[1] - 1j * zb * p[0] - 0.5j * abs(zeta) ** 2 + shift])

    jac = np.array([[1, 0], [-1j * zb, 1]], dtype=complex)
    return DeckMap("heisenberg", name or f"heis({zeta})", apply, lambda p: jac, {"zeta": zeta, "shift": shift})


def _kodaira(spec: SurfaceSpec) -> Surface:
    def evaluate(z):
        v = np.exp(0.5 * kodaira_u(z))
        return float(v[0]) if np.ndim(z) == 1 else v

    def hess(z):
        z = np.asarray(z, dtype=complex)
        e = math.exp(0.5 * float(kodaira_u(z)[0])) / 16
        zz = z[0]
        return e * np.array([[abs(zz) ** 2 + 4, 1j * zz.conjugate()], [-1j * zz, 1]])

    def lck(z):
        zz = complex(z[0])
        return np.array([[2 + abs(zz) ** 2 / 2, 0.5j * zz.conjugate()], [-0.5j * zz, 0.5]])

    def lee(z):
        zz = complex(z[0])
        return -0.5 * np.array([zz.real, zz.imag, 0.0, 1.0])

    def sample(n, seed):
        rng = np.random.default_rng(seed)
        z = _disc(rng, n, 2.0)
        w = rng.uniform(-2, 2, n) + 1j * rng.uniform(-2, 2, n)
        return np.stack([z, w], axis=1)

    decks = {
        "heis-x": heisenberg_deck(1 / math.sqrt(2), name="heis-x"),
        "heis-y": heisenberg_deck(1j / math.sqrt(2), name="heis-y"),
        "t": DeckMap.translation([0, 1.0], name="t"),
        "u": DeckMap.translation([0, 1.0j], name="u"),
    }
    potential = PotentialField(2, evaluate, exact_series=kodaira_series(16), series_radius=1.0, name="exp(u/2)")
    covering = HermitianMetricField(2, hess, None, name="kodaira-covering")
    return Surface(
        spec=spec,
        potential=potential,
        covering_metric=covering,
        lck_metric=HermitianMetricField(2, lck, lee, name="kodaira-lck"),
        decks=decks,
        sampler=sample,
        series=kodaira_series,
        immersion=imm.kodaira_map(),
        immersion_target=covering,
        immersion_decks=decks,
        facts={"c": 1.0, "descends": False},
        notes=(
            "potential taken as exp(u/2); the map's norm squared equals it exactly",
            "the lck metric is 8 exp(-u/2) times the Hessian of exp(u/2), Lee form -du/2",
        ),
    )


@dataclass(frozen=True)
class InoueData:
    matrix: np.ndarray
    rho: float
    mu: complex
    ell: np.ndarray  # real eigenvector for rho
    m: np.ndarray  # complex eigenvector for mu


def inoue_data(entries=INOUE_DEFAULT) -> InoueData:
    m = np.array(entries, dtype=float).reshape(3, 3)
    if np.any(m != np.round(m)):
        raise ParameterError("M must have integer entries")
    if round(np.linalg.det(m)) != 1:
        raise ParameterError("M must have determinant 1")
    values, vectors = np.linalg.eig(m)
    real = [i for i in range(3) if abs(values[i].imag) < 1e-9]
    cplx = [i for i in range(3) if values[i].imag > 1e-9]
    if len(real) != 1 or len(cplx) != 1 or values[real[0]].real <= 1:
        raise ParameterError("M needs one real eigenvalue > 1 and a pair of complex ones")
    ell = np.real(vectors[:, real[0]])
    ell = ell / ell[np.argmax(np.abs(ell))]
    mvec = vectors[:, cplx[0]]
    return InoueData(m, float(values[real[0]].real), complex(values[cplx[0]]), ell, mvec)


def cayley_to_half_plane(w_disc: complex) -> complex:
    return (w_disc + 1j) / (1j * w_disc + 1)


def cayley_to_disc(w: complex) -> complex:
    return (w - 1j) / (-1j * w + 1)


def inoue_d0(z: np.ndarray) -> np.ndarray:
    """Closed-form diastasis at the origin in the disc chart."""
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    w = z[:, 1]
    q = np.abs(w) ** 2
    return np.abs(z[:, 0]) ** 2 + np.real(2 * (2 + 1j * (w - w.conj())) * q / (1 - q))


def inoue_series(d: int) -> BiSeries:
    terms = {((1, 0), (1, 0)): 1.0}
    for n in range(1, d + 1):
        terms[((0, n), (0, n))] = 4.0
        terms[((0, n + 1), (0, n))] = 2j
        terms[((0, n), (0, n + 1))] = -2j
    return BiSeries(2, d, terms, hermitian=True)


def _in_half_plane(z: np.ndarray) -> bool:
    return bool(np.asarray(z)[1].imag > 0)


def _inoue(spec: SurfaceSpec) -> Surface:
    data = inoue_data(spec.params.get("m", INOUE_DEFAULT))

    def evaluate(z):
        z = np.atleast_2d(np.asarray(z, dtype=complex))
        v = np.abs(z[:, 0]) ** 2 + 1 / (2 * z[:, 1].imag)
        return v

    def evaluate_scalar(z):
        v = evaluate(z)
        return float(v[0]) if np.ndim(z) == 1 else v

    def covering(z):
        y = np.asarray(z)[1].imag
        return np.diag([1.0, 1 / (4 * y**3)]).astype(complex)

    def tricerri(z):
        y = np.asarray(z)[1].imag
        return np.diag([y, 1 / (4 * y**2)]).astype(complex)

    def lee(z):
        return np.array([0.0, 0.0, 0.0, 1 / np.asarray(z)[1].imag])

    def sample(n, seed):
        rng = np.random.default_rng(seed)
        z = _disc(rng, n, 1.0)
        w = rng.uniform(-1, 1, n) + 1j * rng.uniform(0.5, 2.0, n)
        return np.stack([z, w], axis=1)

    def disc_sample(n, seed):
        rng = np.random.default_rng(seed)
        return np.stack([_disc(rng, n, 1.0), _disc(rng, n, 0.8)], axis=1)

    f0 = DeckMap.linear(np.diag([data.mu, data.rho]), name="f0")
    decks = {"f0": f0}
    for j in range(3):
        decks[f"f{j + 1}"] = DeckMap.translation([data.m[j], data.ell[j]], name=f"f{j + 1}")

    def disc_deck(deck: DeckMap) -> DeckMap:
        def apply(p):
            q = deck(np.array([p[0], cayley_to_half_plane(p[1])]))
            return np.array([q[0], cayley_to_disc(q[1])])

        def jac(p):
            w = cayley_to_half_plane(p[1])
            q = deck(np.array([p[0], w]))
            jd = deck.jacobian(np.array([p[0], w]))
            d_in = 2 / (1j * p[1] + 1) ** 2
            d_out = 2 / (1 - 1j * q[1]) ** 2
            return np.array([[jd[0, 0], 0], [0, d_out * jd[1, 1] * d_in]], dtype=complex)

        return DeckMap("moebius-component", deck.name, apply, jac, deck.params)

    def d0_hessian(z):
        w = complex(np.asarray(z)[1])
        q = abs(w) ** 2
        return np.diag([1.0, 4 * abs(1 + 1j * w) ** 2 / (1 - q) ** 3]).astype(complex)

    disc_guard = imm.inoue_domain
    d0_field = PotentialField(
        2,
        lambda z: float(inoue_d0(z)[0]) if np.ndim(z) == 1 else inoue_d0(z),
        disc_guard,
        inoue_series(60),
        series_radius=0.6,
        name="inoue-D0",
    )
    return Surface(
        spec=spec,
        potential=PotentialField(2, evaluate_scalar, _in_half_plane, name="inoue-covering-potential"),
        covering_metric=HermitianMetricField(2, covering, None, _in_half_plane, name="tricerri-covering"),
        lck_metric=HermitianMetricField(2, tricerri, lee, _in_half_plane, name="tricerri"),
        decks=decks,
        sampler=sample,
        series=inoue_series,
        immersion=imm.inoue_map(),
        immersion_target=HermitianMetricField(2, d0_hessian, None, disc_guard, name="inoue-D0"),
        immersion_decks={name: disc_deck(d) for name, d in decks.items()},
        immersion_sampler=disc_sample,
        immersion_potential=d0_field,
        facts={"rho": data.rho, "mu": data.mu, "mu_abs2": abs(data.mu) ** 2, "data": data, "descends": None},
        notes=(
            "series, immersion and immersion decks live in the disc chart w = (W - i)/(-iW + 1)",
            "the half-plane covering metric transported to the disc is 1/4 of the Hessian of D0",
        ),
    )


_BUILDERS = {
    "hopf-diagonal": _hopf_diagonal,
    "hopf-parton": _parton,
    "properly-elliptic": _elliptic,
    "kodaira": _kodaira,
    "inoue-SM": _inoue,
    "hopf-ambient": _hopf_ambient,
}


def build_surface(spec: SurfaceSpec | str) -> Surface:
    if isinstance(spec, str):
        spec = parse_surface(spec)
    return _BUILDERS[spec.family](spec)

