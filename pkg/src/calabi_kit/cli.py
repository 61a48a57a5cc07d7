"""Command line driver: ``calabi-kit <command> --surface ... [options]``.

Every command prints one JSON report (schema 1) and exits with 0 when its
checks pass, 1 when a check fails and 2 on configuration errors or when the
check does not apply to the surface.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .calabi import (
    DEFAULT_TOL,
    GLOBAL_CRITERION_NOTE,
    calabi_matrix,
    diastasis_from_potential,
    go_eigen_product,
    go_negative_witness,
    resolvability,
)
from .exceptions import CalabiKitError, ParameterError
from .geometry import character_rank, homothety_factor, lck_residual
from .immersions import scalar_descent, verify_immersion
from .surfaces import GOParams, Surface, build_surface, go_derivative_check, parse_surface

SCHEMA = 1
EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
LCK_TOL = 1e-5
IMMERSION_TOL = 1e-6
DESCENT_TOL = 1e-8
WITNESS_FD_TOL = 1e-4


class NotApplicable(Exception):
    """The requested check does not apply to the surface."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    surface: str | None
    d: int = 4
    samples: int = 50
    seed: int = 0
    tol: float | None = None
    jmax: int = 40
    out: str | None = None

    def __post_init__(self):
        if self.samples < 1:
            raise ParameterError("samples must be at least 1")
        if self.tol is not None and not self.tol > 0:
            raise ParameterError("tol must be positive")
        if not 1 <= self.d <= 8:
            raise ParameterError("d must be between 1 and 8")


def _jsonable(value):
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def render(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def _envelope(config: RunConfig, check: str, claims: list[str], passed: bool, body: dict) -> dict:
    return {
        "schema": SCHEMA,
        "version": __version__,
        "check": check,
        "claims": claims,
        "pass": bool(passed),
        "config": {k: v for k, v in asdict(config).items() if k != "out"},
        "result": body,
    }


# -- commands -----------------------------------------------------------------


def cmd_witness(config: RunConfig, alpha_abs: float | None = None, beta_abs: float | None = None,
                a: float | None = None) -> dict:
    if a is not None:
        params = GOParams(a, 2 - a)
        alpha_abs, beta_abs = math.exp(params.a), math.exp(params.b)
    else:
        if alpha_abs is None or beta_abs is None:
            raise ParameterError("witness needs --alpha and --beta, or --a")
        params = GOParams.from_moduli(alpha_abs, beta_abs)
    j = go_negative_witness(params.a, params.b, config.jmax)
    body = {
        "alpha_abs": alpha_abs,
        "beta_abs": beta_abs,
        "a": params.a,
        "b": params.b,
        "jmax": config.jmax,
        "witness_j": j,
        "product": None if j is None else go_eigen_product(params.a, params.b, j),
        "resolvable": j is None,
    }
    passed = (j is None) == params.flat
    check_j = j if j is not None and j <= 3 else 2
    closed, fd = go_derivative_check(params, 1.0, check_j)
    agree = abs(closed - fd) <= WITNESS_FD_TOL * max(1.0, abs(closed))
    body["cross_check"] = {"j": check_j, "s": 1.0, "closed_form": closed, "finite_difference": fd, "agree": agree}
    return _envelope(config, "witness", ["go-resolvable-iff-equal-moduli"], passed and agree, body)


def _surface_witness(config: RunConfig, surface: Surface) -> dict:
    return cmd_witness(config, abs(surface.facts["alpha"]), abs(surface.facts["beta"]))


def cmd_resolvability(config: RunConfig, surface: Surface) -> dict:
    if surface.series is None:
        report = _surface_witness(config, surface)
        report["notice"] = "no diastasis expansion for |alpha| != |beta|; ran the witness check instead"
        return report
    tol = config.tol or DEFAULT_TOL
    series = surface.series(config.d)
    matrix = calabi_matrix(diastasis_from_potential(series))
    report = resolvability(matrix, tol)
    body = report.to_dict()
    body["degree"] = config.d
    family = surface.spec.family
    claims = ["calabi-local-criterion"]
    expected = None
    if family in ("hopf-ambient", "hopf-diagonal"):
        claims.append("flat-diastasis")
        expected = surface.spec.params.get("n", 2)
    elif family == "hopf-parton":
        claims.append("parton-rank-k-plus-1")
        k = surface.facts["k"]
        expected = k + 1 if config.d >= k else None
    if expected is not None:
        body["expected_rank"] = expected
    passed = report.psd and (expected is None or report.rank == expected)
    return _envelope(config, "resolvability", claims, passed, body)


def _immersion_or_na(surface: Surface) -> None:
    if surface.immersion is None:
        raise NotApplicable(
            "the covering metric is not resolvable (negative Calabi coefficient), "
            "so no Kahler immersion into flat space exists"
        )


def cmd_verify(config: RunConfig, surface: Surface) -> dict:
    _immersion_or_na(surface)
    tol = config.tol or IMMERSION_TOL
    samples = surface.immersion_samples(config.samples, config.seed)
    report = verify_immersion(surface.immersion, surface.immersion_target, samples, tol, seed=config.seed)
    claim = {
        "hopf-parton": "parton-immersion",
        "properly-elliptic": "elliptic-immersion",
        "kodaira": "kodaira-immersion",
        "inoue-SM": "inoue-immersion",
    }.get(surface.spec.family, "flat-immersion")
    return _envelope(config, "verify", [claim], report.passed, report.to_dict())


def cmd_descent(config: RunConfig, surface: Surface) -> dict:
    family = surface.spec.family
    if family == "inoue-SM":
        raise NotApplicable(
            "Inoue surfaces are not diffeomorphic to Vaisman manifolds, "
            "so they carry no lcK metric induced from a classical Hopf manifold"
        )
    _immersion_or_na(surface)
    tol = config.tol or DESCENT_TOL
    samples = surface.immersion_samples(config.samples, config.seed)
    decks = {}
    for name, gamma in surface.immersion_decks.items():
        decks[name] = scalar_descent(surface.immersion, gamma, samples, tol, seed=config.seed).to_dict()
    descends = all(r["mode"] == "scalar" for r in decks.values())
    expected = surface.facts.get("descends")
    claims = {
        "hopf-diagonal": ["hopf-descent-iff-alpha-equals-beta"],
        "hopf-parton": ["parton-descent-scalar"],
        "kodaira": ["kodaira-no-lck-map"],
        "properly-elliptic": ["elliptic-equivariance"],
        "hopf-ambient": ["hopf-ambient-descent"],
    }[family]
    body = {"decks": decks, "all_scalar": descends}
    if family == "properly-elliptic":
        # every deck acts, but the homothety character decides descent
        passed = all(r["mode"] in ("scalar", "gram") for r in decks.values())
    else:
        passed = descends == expected
    if family == "hopf-parton":
        body["expected_lambda"] = surface.facts["lambda"]
    body["verdict"] = "descends to a classical Hopf quotient" if descends else "no scalar descent"
    return _envelope(config, "descent", claims, passed, body)


def cmd_character(config: RunConfig, surface: Surface, decks: list[str] | None = None) -> dict:
    names = decks or list(surface.decks)
    unknown = [n for n in names if n not in surface.decks]
    if unknown:
        raise ParameterError(f"unknown deck(s) {unknown}; available: {list(surface.decks)}")
    samples = surface.samples(config.samples, config.seed)
    factors = {}
    homothetic = True
    for name in names:
        res = homothety_factor(surface.decks[name], surface.covering_metric, samples)
        factors[name] = res.to_dict()
        homothetic &= res.homothetic
    rank = character_rank([f["factor"] for f in factors.values()])
    obstructed = rank.rank >= 2
    body = {
        "factors": factors,
        "character": rank.to_dict(),
        "verdict": (
            "obstructed: no proper potential, so not induced from a classical Hopf manifold"
            if obstructed
            else "character of rank at most 1: no obstruction from the character"
        ),
    }
    claims = ["character-obstruction"]
    if surface.spec.family == "properly-elliptic":
        claims.append("elliptic-no-proper-potential")
    if surface.spec.family == "inoue-SM":
        claims.append("inoue-homothety")
        body["expected_f0_factor"] = surface.facts["mu_abs2"]
    return _envelope(config, "character", claims, homothetic, body)


def cmd_lck(config: RunConfig, surface: Surface) -> dict:
    tol = config.tol or LCK_TOL
    samples = surface.samples(config.samples, config.seed)
    residuals = [lck_residual(surface.lck_metric, z) for z in samples]
    body = {
        "metric": surface.lck_metric.name,
        "max_residual": max(residuals),
        "tolerance": tol,
        "samples": len(samples),
    }
    return _envelope(config, "lck", ["lck-condition"], max(residuals) < tol, body)


# -- argument handling ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="calabi-kit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, surface_required=True):
        p.add_argument("--surface", required=surface_required, help="catalog selector, e.g. parton:k=3")
        p.add_argument("--d", type=int, default=4, help="truncation degree (1-8)")
        p.add_argument("--samples", type=int, default=50)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--jmax", type=int, default=40)
        p.add_argument("--out", default=None, help="write the JSON report here instead of stdout")

    p = sub.add_parser("resolvability", help="Calabi matrix PSD and rank of the covering potential")
    common(p)
    p.add_argument("--diastasis-json", default=None, help="also write the diastasis series as JSON")
    p.add_argument("--matrix-csv", default=None, help="also write the Calabi matrix as CSV")
    p = sub.add_parser("witness", help="negative Calabi coefficient for diagonal Hopf surfaces")
    common(p, surface_required=False)
    p.add_argument("--alpha", type=float, default=None, help="|alpha|")
    p.add_argument("--beta", type=float, default=None, help="|beta|")
    p.add_argument("--a", type=float, default=None, help="exponent a (b = 2 - a)")
    p = sub.add_parser("verify", help="pullback of the flat metric by the explicit immersion")
    common(p)
    p = sub.add_parser("descent", help="scalar or Gram equivariance of the immersion under deck maps")
    common(p)
    p = sub.add_parser("character", help="homothety factors of deck maps and their rank")
    common(p)
    p.add_argument("--deck", default=None, help="comma separated deck names")
    p = sub.add_parser("lck", help="residual of d omega - theta ^ omega")
    common(p)
    return parser


def run(argv: list[str] | None = None) -> tuple[int, str, str | None]:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = RunConfig(
            command=args.command,
            surface=args.surface,
            d=args.d,
            samples=args.samples,
            seed=args.seed,
            tol=args.tol,
            jmax=args.jmax,
            out=args.out,
        )
        if args.command == "witness":
            if args.surface:
                surface = build_surface(args.surface)
                if surface.spec.family != "hopf-diagonal":
                    raise NotApplicable("the witness check is about diagonal Hopf surfaces")
                report = _surface_witness(config, surface)
            else:
                report = cmd_witness(config, args.alpha, args.beta, args.a)
        else:
            surface = build_surface(parse_surface(args.surface))
            if args.command == "resolvability":
                report = cmd_resolvability(config, surface)
                if surface.series is not None:
                    d0 = diastasis_from_potential(surface.series(config.d))
                    if args.diastasis_json:
                        Path(args.diastasis_json).write_text(json.dumps(d0.to_json(), sort_keys=True, indent=2) + "\n")
                    if args.matrix_csv:
                        Path(args.matrix_csv).write_text(calabi_matrix(d0).to_csv())
            elif args.command == "verify":
                report = cmd_verify(config, surface)
            elif args.command == "descent":
                report = cmd_descent(config, surface)
            elif args.command == "character":
                decks = args.deck.split(",") if args.deck else None
                report = cmd_character(config, surface, decks)
            else:
                report = cmd_lck(config, surface)
            report["surface"] = surface.name
            if surface.notes:
                report["notes"] = list(surface.notes)
        report["assumptions"] = [GLOBAL_CRITERION_NOTE]
        code = EXIT_PASS if report["pass"] else EXIT_FAIL
    except NotApplicable as exc:
        report = {"schema": SCHEMA, "check": args.command, "pass": False, "not_applicable": str(exc)}
        code = EXIT_CONFIG
    except CalabiKitError as exc:
        report = {"schema": SCHEMA, "check": args.command, "pass": False, "error": str(exc)}
        code = EXIT_CONFIG
    text = render(report)
    if args.out:
        Path(args.out).write_text(text)
    return code, text, args.out


def main(argv: list[str] | None = None) -> int:
    code, text, out = run(argv)
    if out is None:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
