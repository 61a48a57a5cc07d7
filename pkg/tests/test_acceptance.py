"""Acceptance criteria, one test each, every test printing a single PASS/FAIL line."""
import contextlib
import json
import subprocess
import sys

import numpy as np
import pytest

from calabi_kit.algebra import BiSeries
from calabi_kit.calabi import calabi_matrix, diastasis_from_potential, go_negative_witness, resolvability
from calabi_kit.cli import run
from calabi_kit.geometry import character_rank, homothety_factor, lck_residual
from calabi_kit.immersions import parton_map, scalar_descent, verify_immersion
from calabi_kit.surfaces import GOParams, go_closed_derivative, go_potential, go_radial, go_residual, build_surface


@pytest.fixture
def criterion(capsys):
    @contextlib.contextmanager
    def check(number, title):
        try:
            yield
        except BaseException:
            with capsys.disabled():
                print(f"\nFAIL  criterion {number:2d}: {title}")
            raise
        with capsys.disabled():
            print(f"\nPASS  criterion {number:2d}: {title}")

    return check


def test_01_flat_diastasis(criterion):
    with criterion(1, "flat diastasis has identity Calabi matrix of rank 2"):
        a = calabi_matrix(diastasis_from_potential(BiSeries.norm_squared(2, 1)))
        assert np.max(np.abs(a.entries - np.eye(2))) <= 1e-12
        assert resolvability(a).rank == 2


def test_02_parton_rank(criterion):
    with criterion(2, "Parton potential resolvable of rank k+1 for k = 1..6"):
        for k in range(1, 7):
            report = resolvability(calabi_matrix(diastasis_from_potential(build_surface(f"parton:k={k}").series(k))))
            assert report.psd and report.rank == k + 1, k


def _fourth_order_second_derivative(f, h):
    t = h * np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    v = f(t)
    return float((-v[0] + 16 * v[1] - 30 * v[2] + 16 * v[3] - v[4]) / (12 * h * h))


def test_03_go_obstruction(criterion):
    with criterion(3, "GO witness j = 2 for a != 1, none for a = 1, derivative cross-check"):
        rng = np.random.default_rng(20240601)
        for a in rng.uniform(1, 2, 50):
            assert go_negative_witness(a, 2 - a, 40) == 2, a
        assert go_negative_witness(1.0, 1.0, 40) is None
        params = GOParams(4 / 3, 2 / 3)
        closed = go_closed_derivative(params, 1.0, 2)
        fd = _fourth_order_second_derivative(lambda t: go_radial(params, t, 1.0), 5e-4)
        assert closed == pytest.approx(-2.25, abs=1e-12)
        assert abs(closed - fd) < 1e-4


def test_04_go_solver(criterion):
    with criterion(4, "GO solver residual below 1e-12 and exact special values"):
        rng = np.random.default_rng(4)
        for a in (4 / 3, 1.5, 1.9):
            params = GOParams(a, 2 - a)
            scale = 10.0 ** rng.uniform(-2, 2, (1000, 1))
            z = scale * (rng.normal(size=(1000, 2)) + 1j * rng.normal(size=(1000, 2)))
            assert np.max(np.abs(go_residual(params, z))) < 1e-12
            assert go_potential(params, np.array([1.0, 0.0])) == pytest.approx(1.0, abs=1e-12)
        flat = GOParams(1.0, 1.0)
        z = rng.normal(size=(1000, 2)) + 1j * rng.normal(size=(1000, 2))
        norm2 = np.sum(np.abs(z) ** 2, axis=1)
        assert np.max(np.abs(go_potential(flat, z) - norm2) / norm2) < 1e-12


def test_05_immersion_certificates(criterion):
    with criterion(5, "immersion certificates for Parton, elliptic, Kodaira and Inoue"):
        for k in range(1, 5):
            s = build_surface(f"parton:k={k}")
            r = verify_immersion(s.immersion, s.immersion_target, s.immersion_samples(100, 0))
            assert r.passed and r.max_deviation < 1e-6 and r.c == pytest.approx(1.0, abs=1e-9), k
        for selector in ("elliptic", "kodaira"):
            s = build_surface(selector)
            r = verify_immersion(s.immersion, s.immersion_target, s.immersion_samples(100, 0))
            assert r.passed and r.max_deviation < 1e-6 and r.c > 0, selector
        s = build_surface("inoue")
        pts = s.immersion_samples(100, 0)
        assert np.max(np.abs(pts[:, 1])) <= 0.8
        r = verify_immersion(s.immersion, s.immersion_target, pts)
        assert r.passed and r.max_deviation < 1e-6 and r.c == pytest.approx(1.0, abs=1e-6)


def test_06_descent_dichotomy(criterion):
    with criterion(6, "descent scalar for Parton and alpha = beta, gram only for alpha = 2, beta = 2i"):
        for selector, deck in (("parton:k=3,alpha=2", "alpha"), ("hopf:alpha=2,beta=2", "gamma"),
                               ("hopf:alpha=1.5+0.5i,beta=1.5+0.5i", "gamma")):
            s = build_surface(selector)
            assert scalar_descent(s.immersion, s.decks[deck], s.samples(50, 0)).mode == "scalar", selector
        s = build_surface("hopf:alpha=2,beta=2i")
        r = scalar_descent(s.immersion, s.decks["gamma"], s.samples(50, 0))
        assert r.mode == "gram" and r.scalar is None


def test_07_character_obstruction(criterion):
    with criterion(7, "character rank 2 and elliptic surface not Hopf-induced"):
        r = character_rank([1 / 4, 1 / 9])
        assert r.rank == 2 and r.heuristic and "heuristic" in r.label
        code, text, _ = run(["character", "--surface", "elliptic", "--deck", "2id,3id"])
        report = json.loads(text)
        assert code == 0 and report["result"]["character"]["rank"] == 2
        verdict = report["result"]["verdict"]
        assert "no proper potential" in verdict and "not induced from a classical Hopf manifold" in verdict


def test_08_lck_condition(criterion):
    with criterion(8, "lcK residual below 1e-5 for Hopf ambient, GO and Tricerri metrics"):
        for selector in ("hopf-ambient", "hopf:a=4/3,b=2/3", "inoue"):
            s = build_surface(selector)
            for z in s.samples(50, 8):
                assert lck_residual(s.lck_metric, z) < 1e-5, selector
        tricerri = build_surface("inoue").lck_metric
        z = np.array([0.2, 0.3 + 1.7j])
        assert np.allclose(tricerri.lee_form(z), [0, 0, 0, 1 / 1.7])


def test_09_inoue_homothety(criterion):
    with criterion(9, "Inoue f0 scales the Tricerri covering form by 1/rho"):
        companion = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        eig = np.linalg.eigvals(companion)
        rho = float(max(e.real for e in eig if abs(e.imag) < 1e-12))
        assert abs(rho**3 - rho - 1) < 1e-12
        s = build_surface("inoue")
        factor = homothety_factor(s.decks["f0"], s.covering_metric, s.samples(50, 0)).factor
        assert factor == pytest.approx(1 / rho, rel=1e-9)


def test_10_hereditary(criterion):
    with criterion(10, "Parton k = 2 diastasis equals squared distance of images"):
        series = BiSeries.norm_squared(2, 2) ** 2 / 2
        F = parton_map(2)
        rng = np.random.default_rng(10)
        for _ in range(50):
            z, w = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            diastasis = (series.evaluate_polarized(z, z) + series.evaluate_polarized(w, w)
                         - series.evaluate_polarized(z, w) - series.evaluate_polarized(w, z)).real
            assert np.sum(np.abs(F(z) - F(w)) ** 2) == pytest.approx(diastasis, rel=1e-9)


SUITE = [
    ["resolvability", "--surface", "parton:k=3", "--d", "4"],
    ["resolvability", "--surface", "hopf:a=1,b=1", "--d", "2"],
    ["resolvability", "--surface", "kodaira", "--d", "3"],
    ["resolvability", "--surface", "elliptic", "--d", "3"],
    ["resolvability", "--surface", "inoue", "--d", "3"],
    ["resolvability", "--surface", "hopf:alpha=4,beta=2"],
    ["witness", "--alpha", "4", "--beta", "2"],
    ["witness", "--alpha", "3", "--beta", "3"],
    ["verify", "--surface", "parton:k=2"],
    ["verify", "--surface", "elliptic"],
    ["verify", "--surface", "kodaira"],
    ["verify", "--surface", "inoue"],
    ["descent", "--surface", "parton:k=2"],
    ["descent", "--surface", "hopf:alpha=2,beta=2i"],
    ["descent", "--surface", "kodaira"],
    ["descent", "--surface", "elliptic"],
    ["descent", "--surface", "inoue"],
    ["character", "--surface", "elliptic", "--deck", "2id,3id"],
    ["character", "--surface", "inoue"],
    ["lck", "--surface", "hopf-ambient"],
    ["lck", "--surface", "hopf:a=4/3,b=2/3"],
    ["lck", "--surface", "inoue"],
    ["lck", "--surface", "kodaira"],
]

RUNNER = """
import json, sys
from calabi_kit.cli import run
for argv in json.loads(sys.argv[1]):
    code, text, _ = run(argv)
    sys.stdout.write(f"{code}\\n{text}")
"""


def _suite_bytes():
    return subprocess.run([sys.executable, "-c", RUNNER, json.dumps(SUITE)], capture_output=True, check=True).stdout


def test_11_determinism(criterion):
    with criterion(11, "two runs of the full CLI suite give byte-identical JSON"):
        first, second = _suite_bytes(), _suite_bytes()
        assert first.count(b'"schema": 1') == len(SUITE)
        assert first == second
