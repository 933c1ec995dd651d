import math

import numpy as np
import pytest

import ehrhard_lab as el


def test_gaussian_surface_solves_pdi():
    h = el.surface("ehrhard:a=0.5,b=0.5")
    assert abs(el.pdi_value(h, (0.5, 0.5), 0.3, 0.7)) < 1e-9
    report = el.check_pdi(h, (0.5, 0.5), nx=40, ny=40)
    assert report["feasible"]
    assert abs(h(0.5, 0.5) - 0.5) < 1e-12


def test_power_law_is_infeasible():
    report = el.check_pdi(el.surface("power:alpha=0.3"), (0.5, 0.5), nx=20, ny=20)
    assert not report["feasible"]
    assert report["violations"] > 0


def test_regimes_and_elliptic_params():
    assert el.regime((0.5, 0.5)) == "parabolic"
    assert el.regime((1.0, 1.0)) == "elliptic"
    p, q = el.elliptic_params((1.0, 1.0))
    assert p == pytest.approx(4 / 3) and q == pytest.approx(-2 / 3)
    with pytest.raises(el.RegimeError):
        el.elliptic_params((0.5, 0.5))


def test_inequality_gap_for_gaussian_bumps():
    x = np.linspace(-8, 8, 801)
    f = np.exp(-x * x)
    h = el.surface("monomial:c=1,alpha=0.5,beta=0.5").on(1e-300, 10, 1e-300, 10)
    lo, hi, vals = el.sup_convolve(h, f, f, -8.0, 8.0, (0.5, 0.5))
    t = np.linspace(lo, hi, len(vals))
    assert np.allclose(vals, np.exp(-t * t), atol=1e-3)
    gap = el.inequality_gap(h, f, f, -8.0, 8.0, (0.5, 0.5))
    assert gap["lhs"] == pytest.approx(1 / math.sqrt(3), rel=1e-4)
    assert gap["gap"] >= -1e-9


def test_counterexample_search_finds_power_law_witness():
    r = el.find_counterexample(el.surface("power:alpha=0.3"), (0.5, 0.5), budget=1000)
    assert r["found"]
    assert r["gap"]["gap"] < 0
    assert len(r["f"]) == len(r["g"])


def test_closed_form_argmax():
    jet = (1.0, 1.0, 1.0, 0.0, 0.0, 0.0)
    assert el.psi_closed_form(jet, -1, -1, 2) == pytest.approx(-2.0)
    assert el.argmax_x0(jet, -2, -2, 1.0) == pytest.approx(0.5)


def test_measure_audit():
    assert el.audit_measure("gaussian")["pass"]
    quartic = el.audit_measure("quartic")
    assert not quartic["pass"]
    assert not quartic["subadditive"]


def test_small_obstacle_solve():
    r = el.solve_obstacle(n=21)
    s = r["surface"]
    assert s.shape == (21, 21)
    assert r["first_violation"] == -1
    assert s[-1, -1] == pytest.approx(1.0)


def test_classification():
    cls, a, b = el.classify_homogeneous(el.surface("pl:a=0.4,case=classic"))
    assert cls == "pl_classic"
    assert a == pytest.approx(0.4, abs=1e-6)
