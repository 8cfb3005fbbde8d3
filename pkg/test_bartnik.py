#!/usr/bin/env python3

import math

import numpy as np
import pandas as pd
import pytest

from bartnik import (BartnikData, brown_york, horizon_extension, shi_tam_extend,
                     shi_tam_mass_parameter, verify_fill_in_bound)
from errors import BartnikError
from geometry import adm_mass, scalar_curvature_samples
from profiles import EndFlag, ProfileMetric

BOUNDARY = (EndFlag.BOUNDARY, EndFlag.BOUNDARY)


@pytest.mark.parametrize("n, rho, eta, expected", [
    (3, 1.0, 2.0, 0.0),                          # round sphere in flat space
    (3, 4.0, math.sqrt(2) / 4, 4 - 2 * math.sqrt(2)),
    (3, 1.0, 0.0, 1.0),                          # minimal boundary
    (4, 2.0, 1.5, 0.0),
])
def test_brown_york_constant_eta(n, rho, eta, expected):
    assert brown_york(BartnikData.constant(n, rho, eta)) == pytest.approx(expected, abs=1e-12)


def test_brown_york_quadrature_matches_closed_form():
    # eta = 1 + cos(theta), midpoint rule in cos(theta)
    samples = 200
    x = -1.0 + (np.arange(samples) + 0.5) * 2.0 / samples
    weights = np.full(samples, 2 * math.pi * 2.0 / samples)
    data = BartnikData(3, 1.0, 1.0 + x, weights)
    assert not data.is_constant
    assert brown_york(data) == pytest.approx(0.5, abs=1e-12)
    assert brown_york(data) == pytest.approx(brown_york(BartnikData.constant(3, 1.0, 1.0)), abs=1e-12)


def test_brown_york_reverses_order_in_eta():
    values = [brown_york(BartnikData.constant(3, 1.5, eta)) for eta in (0.1, 0.5, 1.0, 2.0)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_bartnik_data_validation():
    with pytest.raises(BartnikError):
        BartnikData(3, 1.0, np.array([1.0]), np.array([1.0]))
    with pytest.raises(BartnikError):
        BartnikData.constant(3, 0.0, 1.0)
    with pytest.raises(BartnikError):
        BartnikData(3, 1.0, np.array([1.0, 2.0]), np.array([4 * math.pi]))


def test_fill_in_bound():
    data = BartnikData.constant(3, 1.0, 2.0)
    assert verify_fill_in_bound(data, 3.0) == (True, 1.0)
    assert verify_fill_in_bound(data, 1.0) == (False, -1.0)


def test_eta_table_from_csv(tmp_path):
    path = tmp_path / "eta.csv"
    pd.DataFrame({"angle": [0.3, 1.2, 1.9, 2.8], "eta": [1.0, 1.0, 2.0, 2.0],
                  "weight": [math.pi] * 4}).to_csv(path, index=False)
    data = BartnikData.from_csv(path, 3, 1.0)
    assert len(data.eta) == 4
    assert brown_york(data) == pytest.approx(0.25)

    (tmp_path / "bad.csv").write_text("eta,weight\n1.0,12.566370614359172\n")
    with pytest.raises(BartnikError):
        BartnikData.from_csv(tmp_path / "bad.csv", 3, 1.0)


# -- Shi-Tam extension ------------------------------------------------------

def test_mass_parameter_examples():
    assert shi_tam_mass_parameter(3, 4.0, math.sqrt(2) / 4) == pytest.approx(1.0)
    assert shi_tam_mass_parameter(3, 2.0, 1.0) == pytest.approx(0.0)
    assert shi_tam_mass_parameter(3, 2.0, 1e-12) == pytest.approx(1.0)


def test_shi_tam_extension_is_scalar_flat_with_prescribed_boundary():
    ext = shi_tam_extend(3, 4.0, math.sqrt(2) / 4)
    assert ext.c == pytest.approx(1.0)
    assert np.max(np.abs(scalar_curvature_samples(ext.profile))) <= 1e-8
    assert ext.boundary_mean_curvature == pytest.approx(math.sqrt(2) / 4, abs=1e-10)
    assert adm_mass(ext.profile).primary == pytest.approx(1.0, abs=1e-6)


def test_shi_tam_extension_rejects_nonpositive_eta():
    with pytest.raises(BartnikError):
        shi_tam_extend(3, 1.0, 0.0)
    with pytest.raises(BartnikError):
        shi_tam_extend(3, -1.0, 1.0)


def test_horizon_extension():
    ext = horizon_extension(3, 2.0, samples=500)
    assert ext.c == pytest.approx(1.0)
    assert ext.boundary_mean_curvature == pytest.approx(0.0, abs=1e-12)


def test_brown_york_dominates_extension_mass():
    """m_BY >= c 在整個 (r0, eta) 網格上成立, eta = 2/r0 時等號成立"""
    for r0 in np.linspace(0.5, 10.0, 20):
        for eta in np.linspace(0.05, 3.0, 20):
            c = shi_tam_mass_parameter(3, r0, eta)
            boundary_h = 2.0 * math.sqrt(1.0 - 2.0 * c / r0) / r0
            assert boundary_h == pytest.approx(eta, abs=1e-10)
            m_by = brown_york(BartnikData.constant(3, r0, eta))
            assert m_by - c == pytest.approx(0.5 * r0 * (1 - eta * r0 / 2) ** 2, abs=1e-10)
            assert m_by >= c - 1e-12

        eta = 2.0 / r0
        assert brown_york(BartnikData.constant(3, r0, eta)) == pytest.approx(0.0, abs=1e-12)
        assert shi_tam_mass_parameter(3, r0, eta) == pytest.approx(0.0, abs=1e-12)


def test_brown_york_monotone_along_schwarzschild():
    metric = ProfileMetric.schwarzschild(3, 1.0, 2.5, 1000.0, samples=400, end_flags=BOUNDARY)
    values = np.array([brown_york(BartnikData.from_profile(metric, i)) for i in range(metric.size)])
    assert np.all(np.diff(values) <= 1e-12)
    assert 0.0 <= values[-1] - 1.0 <= 1e-3


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
