#!/usr/bin/env python3

import math

import numpy as np
import pytest

from errors import AdmMassError, GeometryError, ProfileError
from geometry import (adm_mass, distance, integrate, mass_curvature_residual, mean_curvature_sphere,
                      misner_sharp_mass, misner_sharp_samples, ricci_curvature, ricci_samples,
                      richardson_table, scalar_curvature, scalar_curvature_samples)
from profiles import EndFlag, ProfileMetric, SphereConstants

BOUNDARY = (EndFlag.BOUNDARY, EndFlag.BOUNDARY)
AF = (EndFlag.BOUNDARY, EndFlag.ASYMPTOTICALLY_FLAT)


@pytest.fixture(scope="module")
def schwarzschild_1e4():
    """n=3, m=1 Schwarzschild exterior sampled at 10^4 points."""
    return ProfileMetric.schwarzschild(3, 1.0, 2.5, 1.0e4, samples=10_000)


def test_sphere_constants():
    assert SphereConstants.for_dimension(3).omega == pytest.approx(4 * math.pi)
    assert SphereConstants.for_dimension(4).omega == pytest.approx(2 * math.pi ** 2)


# -- scalar and Ricci curvature ---------------------------------------------

def test_flat_is_scalar_flat():
    flat = ProfileMetric.flat(3, s_end=2.0)
    assert scalar_curvature(flat, 100) == 0.0
    assert ricci_curvature(flat, 100) == (0.0, 0.0)


@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
def test_cylinder_curvature(c):
    cyl = ProfileMetric.cylinder(3, c, samples=101)
    assert scalar_curvature(cyl, 50) == pytest.approx(2.0 / c ** 2)
    assert ricci_curvature(cyl, 50) == pytest.approx((0.0, 1.0 / c ** 2))

    # finite-difference oracle on the same warping samples
    sampled = ProfileMetric.table(3, cyl.grid, np.full(cyl.size, c))
    assert scalar_curvature(sampled, 50) == pytest.approx(2.0 / c ** 2, abs=1e-6)


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
def test_schwarzschild_scalar_flat(n):
    metric = ProfileMetric.schwarzschild(n, 1.0, 3.0, 50.0, samples=200, end_flags=BOUNDARY)
    assert np.max(np.abs(scalar_curvature_samples(metric))) <= 1e-8


def test_schwarzschild_ricci_at_horizon_radius():
    metric = ProfileMetric.schwarzschild(3, 1.0, 2.0, 10.0, samples=64, end_flags=BOUNDARY)
    radial, tangential = ricci_curvature(metric, 0)
    assert radial == pytest.approx(-0.25)
    assert tangential == pytest.approx(0.125)


@pytest.mark.parametrize("metric", [
    ProfileMetric.flat(3, s_end=3.0),
    ProfileMetric.cylinder(4, 1.5),
    ProfileMetric.schwarzschild(3, 1.0, 2.5, 40.0, samples=300, end_flags=BOUNDARY),
    ProfileMetric.schwarzschild(5, -0.3, 1.0, 40.0, samples=300, end_flags=BOUNDARY),
])
def test_trace_identity(metric):
    radial, tangential = ricci_samples(metric)
    trace = radial + (metric.n - 1) * tangential
    np.testing.assert_allclose(trace, scalar_curvature_samples(metric), rtol=0, atol=1e-10)


def test_boundary_index_needs_one_sided_stencil_on_tables():
    s = np.linspace(1.0, 2.0, 50)
    table = ProfileMetric.table(3, s, s + 0.1 * np.sin(s))
    with pytest.raises(GeometryError):
        scalar_curvature(table, 0)
    assert np.isfinite(scalar_curvature(table, 0, one_sided=True))
    with pytest.raises(GeometryError):
        scalar_curvature(table, 500)


# -- mean curvature ---------------------------------------------------------

def test_mean_curvature_of_spheres():
    flat = ProfileMetric.flat(3, s_end=2.0)
    assert mean_curvature_sphere(flat, -1, +1) == pytest.approx(1.0)
    assert mean_curvature_sphere(ProfileMetric.cylinder(3, 1.0), 10) == 0.0

    schw = ProfileMetric.schwarzschild(3, 1.0, 2.5, 10.0, samples=64, end_flags=BOUNDARY)
    assert mean_curvature_sphere(schw, 0) == pytest.approx(0.357771, abs=1e-6)


def test_mean_curvature_flips_with_orientation():
    schw = ProfileMetric.schwarzschild(3, 1.0, 2.5, 10.0, samples=64, end_flags=BOUNDARY)
    for i in (0, 20, 63):
        assert mean_curvature_sphere(schw, i, -1) == -mean_curvature_sphere(schw, i, +1)
    with pytest.raises(GeometryError):
        mean_curvature_sphere(schw, 0, 0)


# -- Misner-Sharp and ADM mass ----------------------------------------------

def test_misner_sharp_examples():
    assert np.all(misner_sharp_samples(ProfileMetric.flat(3, s_end=2.0)) == 0.0)
    assert misner_sharp_mass(ProfileMetric.cylinder(3, 3.0), 5) == pytest.approx(1.5)


def test_mass_curvature_identity():
    schw = ProfileMetric.schwarzschild(3, 1.0, 2.5, 40.0, samples=400, end_flags=BOUNDARY)
    assert np.max(np.abs(mass_curvature_residual(schw))) < 1e-6

    s = np.linspace(1.0, 2.0, 401)
    table = ProfileMetric.table(3, s, s + 0.1 * np.sin(s))
    assert np.max(np.abs(mass_curvature_residual(table))) < 1e-5


def test_schwarzschild_consistency(schwarzschild_1e4):
    """密集取樣的 Schwarzschild: 曲率、Misner-Sharp 與兩種 ADM 質量"""
    metric = schwarzschild_1e4
    assert metric.af.ok
    assert np.max(np.abs(scalar_curvature_samples(metric))) <= 1e-8
    np.testing.assert_allclose(misner_sharp_samples(metric), 1.0, rtol=0, atol=1e-10)

    result = adm_mass(metric)
    assert result.primary == pytest.approx(1.0, abs=1e-6)
    assert result.relative_agreement <= 1e-4
    assert len(result.radii) == len(result.misner_sharp) == len(result.flux)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_adm_calibration_against_flux(n):
    metric = ProfileMetric.schwarzschild(n, 1.0, 3.0, 2000.0, samples=2000)
    result = adm_mass(metric)
    assert result.primary == pytest.approx(1.0, abs=1e-6)
    assert result.crosscheck == pytest.approx(1.0, rel=1e-4)


def test_flat_end_has_zero_mass():
    flat = ProfileMetric.flat(3, grid=np.geomspace(1.0, 1.0e4, 500), end_flags=AF)
    result = adm_mass(flat)
    assert result.primary == pytest.approx(0.0, abs=1e-12)
    assert result.crosscheck == pytest.approx(0.0, abs=1e-10)


def test_adm_mass_requires_flat_end():
    with pytest.raises(AdmMassError):
        adm_mass(ProfileMetric.flat(3, s_end=2.0))
    with pytest.raises(AdmMassError):
        adm_mass(ProfileMetric.schwarzschild(3, 1.0, 2.5, 1.0e4, samples=200), end="inner")


def test_af_flag_is_checked():
    with pytest.raises(ProfileError):
        ProfileMetric.schwarzschild(3, 1.0, 2.5, 50.0, samples=200)


def test_richardson_table_removes_leading_terms():
    values = [1.0 + 2.0 / r + 3.0 / r ** 2 for r in (10.0, 20.0, 40.0)]
    assert richardson_table(values)[-1][0] == pytest.approx(1.0, abs=1e-12)


# -- distances and volumes --------------------------------------------------

def test_distance():
    cyl = ProfileMetric.cylinder(3, 1.0, 0.0, 6.0, samples=61)
    assert distance(cyl, 0.0, 3.0) == 3.0
    assert distance(cyl, 5.0, 2.0) == 3.0
    with pytest.raises(GeometryError):
        distance(cyl, 0.0, 7.0)


def test_integrate_closed_forms():
    cyl = ProfileMetric.cylinder(3, 1.0, 0.0, 5.0, samples=101)
    assert integrate(cyl, 1.0) == pytest.approx(4 * math.pi * 5.0)
    assert integrate(cyl, np.zeros(cyl.size)) == 0.0

    ball = ProfileMetric.flat(3, s_end=2.0, samples=401)
    assert integrate(ball, 1.0) == pytest.approx(4.0 / 3.0 * math.pi * 8.0, rel=1e-9)
    with pytest.raises(GeometryError):
        integrate(ball, 1.0, (0.0, 3.0))


def test_integrate_converges_under_refinement():
    def antiderivative(s):
        return s ** 2 * math.sin(s) + 2 * s * math.cos(s) - 2 * math.sin(s)

    exact = 4 * math.pi * (antiderivative(2.0) - antiderivative(1.0))
    errors = []
    for samples in (17, 33):
        annulus = ProfileMetric.flat(3, s_start=1.0, s_end=2.0, samples=samples)
        errors.append(abs(integrate(annulus, np.cos(annulus.grid)) - exact))
    assert errors[0] / errors[1] >= 3.5


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
