import math

import numpy as np
import pytest

from calabi_kit.algebra import BiSeries, multi_indices
from calabi_kit.calabi import (
    CalabiMatrix,
    calabi_matrix,
    diastasis_from_potential,
    go_eigen_product,
    go_negative_witness,
    resolvability,
)
from calabi_kit.exceptions import DomainError, ParameterError, PreconditionError
from calabi_kit.surfaces import build_surface, kodaira_series


def matrix_of(entries, labels=None):
    entries = np.asarray(entries, dtype=complex)
    labels = labels or multi_indices(1, entries.shape[0])[1:]
    return CalabiMatrix(tuple(labels), entries)


def test_flat_diastasis_is_identity():
    d0 = diastasis_from_potential(BiSeries.norm_squared(2, 1))
    a = calabi_matrix(d0)
    assert a.label_names() == ["z1", "z2"]
    assert np.array_equal(a.entries, np.eye(2))
    report = resolvability(a)
    assert report.psd and report.rank == 2


def test_pluriharmonic_terms_dropped():
    d = 3
    z1 = BiSeries.holomorphic(2, d, 0)
    phi = BiSeries.norm_squared(2, d) + (z1**3 + z1.conjugate() ** 3) * 0.5 + 7
    assert diastasis_from_potential(phi.with_hermitian_flag()) == BiSeries.norm_squared(2, d)


def test_non_hermitian_rejected():
    with pytest.raises(DomainError):
        diastasis_from_potential(BiSeries.monomial(1, 2, (1,), (0,)))


def test_kodaira_first_block():
    d0 = diastasis_from_potential(kodaira_series(3))
    assert d0.coefficient((1, 0), (1, 0)) == pytest.approx(0.25)
    assert d0.coefficient((0, 1), (0, 1)) == pytest.approx(1 / 16)
    assert d0.coefficient((1, 0), (0, 1)) == 0


def test_parton_two_multinomial():
    d0 = diastasis_from_potential(BiSeries.norm_squared(2, 2) ** 2 / 2)
    a = calabi_matrix(d0)
    block = a.entries[2:, 2:]
    # (|z1|^2 + |z2|^2)^2 / 2 = sum_j binom(2, j)/2 |z1^(2-j) z2^j|^2
    oracle = np.diag([math.comb(2, j) / 2 for j in range(3)])
    assert a.label_names()[2:] == ["z1^2", "z1*z2", "z2^2"]
    assert np.allclose(block, oracle)
    assert np.allclose(a.entries[:2, :], 0) and np.allclose(a.entries[:, :2], 0)


def test_readoff_example():
    d = 2
    s = BiSeries(1, d, {((1,), (1,)): 2, ((1,), (2,)): 1, ((2,), (1,)): 1}, hermitian=True)
    a = calabi_matrix(s)
    assert a.label_names() == ["z1", "z1^2"]
    assert np.array_equal(a.entries, [[2, 1], [1, 0]])


def test_pure_part_precondition():
    with pytest.raises(PreconditionError):
        calabi_matrix(BiSeries.norm_squared(1, 2) + 1)


def test_indefinite_example():
    report = resolvability(matrix_of([[1, 2], [2, 1]]))
    assert not report.psd
    assert report.min_eigenvalue == pytest.approx(-1)
    assert report.rank == 1
    assert report.witness_index is not None


def test_tolerance_positive():
    with pytest.raises(ParameterError):
        resolvability(matrix_of([[1]]), tol=0)


@pytest.mark.parametrize("k", range(1, 7))
def test_parton_rank(k):
    s = build_surface(f"parton:k={k}").series(k)
    report = resolvability(calabi_matrix(diastasis_from_potential(s)))
    assert report.psd and report.rank == k + 1


@pytest.mark.parametrize("family", ["parton:k=3", "kodaira", "elliptic", "inoue", "hopf:a=1,b=1"])
def test_rank_monotone_in_degree(family):
    surface = build_surface(family)
    ranks = [resolvability(calabi_matrix(diastasis_from_potential(surface.series(d)))).rank for d in range(1, 6)]
    assert ranks == sorted(ranks)


def test_csv_headers():
    a = calabi_matrix(diastasis_from_potential(BiSeries.norm_squared(2, 1)))
    lines = a.to_csv().splitlines()
    assert lines[0] == ",z1,z2"
    assert lines[1].startswith("z1,1+0j")


def test_report_json_keys():
    report = resolvability(matrix_of([[1.0]])).to_dict()
    for key in ("psd", "rank", "min_eigenvalue", "tolerance", "labels"):
        assert key in report


# -- GO witness -------------------------------------------------------------------


def test_go_witness_examples():
    assert go_negative_witness(4 / 3, 2 / 3, 10) == 2
    assert go_eigen_product(4 / 3, 2 / 3, 2) == pytest.approx(-1)
    assert go_negative_witness(1.0, 1.0, 40) is None
    assert go_negative_witness(1.01, 0.99, 10) == 2
    assert go_eigen_product(1.01, 0.99, 2) == pytest.approx(-0.03)


def test_go_witness_random_a():
    rng = np.random.default_rng(11)
    for a in rng.uniform(1, 2, 50):
        if a == 1:
            continue
        assert go_negative_witness(a, 2 - a, 40) == 2


def test_go_witness_parameter_errors():
    with pytest.raises(ParameterError):
        go_negative_witness(1.5, 0.6, 10)
    with pytest.raises(ParameterError):
        go_negative_witness(1.0, 1.0, 1)
    with pytest.raises(ParameterError):
        go_negative_witness(0.5, 1.5, 10)
