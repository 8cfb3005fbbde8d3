#!/usr/bin/env python3

import math

import numpy as np
import pytest

from conformal import Potential
from corner import preset_corner
from eigen import (EigenProblem, classify_case, dense_eigenvalues, eigen_equation_residual,
                   extend_constant, neumann_principal_eigenvalue, positivity_threshold,
                   smoothing_eigen_scan, supersolution_check)
from errors import EigenError
from profiles import ProfileMetric


@pytest.fixture(scope="module")
def annulus():
    return ProfileMetric.flat(3, s_start=1.0, s_end=2.0, samples=201)


@pytest.mark.parametrize("value", [0.0, 2.0, -3.5])
def test_constant_potential(annulus, value):
    result = neumann_principal_eigenvalue(
        EigenProblem(annulus, (1.0, 2.0), Potential.constant(annulus, value)))
    assert result.mu1 == pytest.approx(value, abs=1e-9)
    assert np.ptp(result.u) <= 1e-8 * result.u.max()
    assert result.mu2 > result.mu1
    assert result.rayleigh_residual <= 1e-8
    assert result.eigen_residual <= 1e-7


def test_eigenfunction_normalization(annulus):
    V = Potential(np.cos(3.0 * annulus.grid), "cos")
    problem = EigenProblem(annulus, (1.0, 2.0), V)
    result = neumann_principal_eigenvalue(problem)
    _, masses, _ = problem.discretize()
    assert annulus.sphere.omega * np.sum(masses * result.u ** 2) == pytest.approx(1.0)
    assert np.all(result.u > 0.0)


def test_dense_cross_check():
    coarse = ProfileMetric.flat(3, s_start=1.0, s_end=2.0, samples=41)
    V = Potential(np.cos(3.0 * coarse.grid) + coarse.grid, "cos+s")
    problem = EigenProblem(coarse, (1.0, 2.0), V)
    result = neumann_principal_eigenvalue(problem)
    mu1, mu2 = dense_eigenvalues(problem)
    assert result.mu1 == pytest.approx(mu1, abs=1e-8)
    assert result.mu2 == pytest.approx(mu2, rel=1e-8)
    assert mu2 > 0.0


@pytest.mark.parametrize("shift", [0.5, -2.0])
def test_eigen_residual_measures_distance_to_spectrum(annulus, shift):
    problem = EigenProblem(annulus, (1.0, 2.0), Potential(np.cos(3.0 * annulus.grid), "cos"))
    result = neumann_principal_eigenvalue(problem)
    assert result.eigen_residual <= 1e-7
    again = eigen_equation_residual(problem, result.mu1, result.u)
    assert again == pytest.approx(result.eigen_residual)
    shifted = eigen_equation_residual(problem, result.mu1 + shift, result.u)
    assert shifted == pytest.approx(abs(shift), rel=1e-6)


def test_eigen_residual_rejects_a_wrong_vector(annulus):
    problem = EigenProblem(annulus, (1.0, 2.0), Potential(np.cos(3.0 * annulus.grid), "cos"))
    result = neumann_principal_eigenvalue(problem)
    bent = result.u * (1.0 + 0.1 * np.cos(math.pi * (result.grid - 1.0)))
    assert eigen_equation_residual(problem, result.mu1, bent) > 1e-2
    with pytest.raises(EigenError):
        eigen_equation_residual(problem, result.mu1, np.zeros_like(result.u))


def test_eigenvalue_is_monotone_in_potential(annulus):
    rng = np.random.default_rng(7)
    for _ in range(5):
        low = rng.normal(size=annulus.size)
        high = low + np.abs(rng.normal(size=annulus.size))
        mu_low = neumann_principal_eigenvalue(EigenProblem(annulus, (1.0, 2.0), Potential(low))).mu1
        mu_high = neumann_principal_eigenvalue(EigenProblem(annulus, (1.0, 2.0), Potential(high))).mu1
        assert mu_low <= mu_high + 1e-10


def test_invalid_problems(annulus):
    zero = Potential.constant(annulus, 0.0)
    with pytest.raises(EigenError):
        neumann_principal_eigenvalue(EigenProblem(annulus, (1.0, 1.02), zero))
    with pytest.raises(EigenError):
        EigenProblem(annulus, (0.5, 1.5), zero)
    with pytest.raises(EigenError):
        EigenProblem(annulus, (1.0, 2.0), zero, a=0.0)


# -- supersolutions and extension -------------------------------------------

def test_supersolution_check(annulus):
    ones = np.ones(annulus.size)
    report = supersolution_check(annulus, Potential.constant(annulus, 1.0), ones)
    assert report.holds
    assert report.margin == pytest.approx(1.0)
    assert report.lower_bound == 1.0

    assert not supersolution_check(annulus, Potential.constant(annulus, 0.0), ones).holds


def test_principal_eigenfunction_is_a_supersolution_when_mu_positive(annulus):
    V = Potential(2.0 + np.cos(math.pi * (annulus.grid - 1.5)), "2+cos")
    result = neumann_principal_eigenvalue(EigenProblem(annulus, (1.0, 2.0), V))
    assert result.mu1 > 0.0
    u = extend_constant(annulus, result)
    report = supersolution_check(annulus, V, u)
    assert report.margin > 0.0
    assert report.lower_bound > 0.0


def test_extend_constant():
    metric = ProfileMetric.flat(3, s_start=1.0, s_end=3.0, samples=401)
    V = Potential(2.0 + np.cos(math.pi * (metric.grid - 2.0)), "2+cos")
    result = neumann_principal_eigenvalue(EigenProblem(metric, (1.5, 2.5), V))
    u = extend_constant(metric, result)
    inside = metric.mask(1.5, 2.5)
    assert np.array_equal(u[inside], result.u)
    assert np.all(u[metric.grid < 1.5] == result.u[0])
    assert np.all(u[metric.grid > 2.5] == result.u[-1])


# -- smoothing scans --------------------------------------------------------

def test_scan_without_mean_curvature_gap():
    corner = preset_corner(3, 2.5, 0.0, 0.05)
    domain = (corner.s0 - 1.0, corner.s0 + 1.0)
    scan = smoothing_eigen_scan(corner, domain, [0.1, 0.05])
    assert np.all(np.abs(scan.table["mu1"]) <= 1e-8)
    assert scan.case == "none"
    assert scan.threshold is None
    assert scan.floor is None


def test_scan_with_positive_gap():
    corner = preset_corner(3, 2.5, 1.0, 0.05)
    domain = (corner.s0 - 1.0, corner.s0 + 1.0)
    scan = smoothing_eigen_scan(corner, domain, [0.1, 0.05])
    assert scan.case == "b"
    assert list(scan.table["delta"]) == [0.1, 0.05]
    assert np.all(scan.table["mu1"] > 0.0)
    assert np.all(scan.table["rayleigh_residual"] <= 1e-8)
    assert np.all(scan.table["eigen_residual"] <= 1e-4 * np.maximum(1.0, scan.table["mu1"].abs()))
    assert scan.threshold == 0.1
    assert scan.floor == pytest.approx(scan.table["mu1"].min())


def test_scan_with_reversed_gap():
    corner = preset_corner(3, 2.5, -0.2, 0.05)
    domain = (corner.s0 - 1.0, corner.s0 + 1.0)
    scan = smoothing_eigen_scan(corner, domain, [0.05])
    assert scan.table["mu1"].iloc[0] < 0.0
    assert classify_case(corner, domain) == "none"
    with pytest.raises(EigenError):
        smoothing_eigen_scan(corner, (corner.s0 + 0.1, corner.s0 + 1.0), [0.05])


def test_positivity_threshold():
    assert positivity_threshold([0.2, 0.1, 0.05], [-1.0, 0.5, 0.7]) == 0.1
    assert positivity_threshold([0.2, 0.1, 0.05], [1.0, 0.5, 0.7]) == 0.2
    assert positivity_threshold([0.2, 0.1, 0.05], [1.0, 0.5, -0.1]) is None


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
