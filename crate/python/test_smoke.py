"""Smoke test for the compiled module: pip install crates/py, then run pytest python/."""

import math

import pytest

thinwall = pytest.importorskip("thinwall")


def test_bessel_matches_half_order_closed_form():
    x = 2.3
    j, y = thinwall.bessel_jy(0.5, x)
    assert j == pytest.approx(math.sqrt(2 / (math.pi * x)) * math.sin(x), rel=1e-12)
    assert y == pytest.approx(-math.sqrt(2 / (math.pi * x)) * math.cos(x), rel=1e-12)


def test_fit_slope():
    d = [1 / 8, 1 / 16, 1 / 32]
    s, c = thinwall.fit_slope(d, [3 * t**2 for t in d])
    assert s == pytest.approx(2.0, abs=1e-12)
    assert c == pytest.approx(math.log(3), abs=1e-12)


def test_cell_constants_of_reference_hole():
    c = thinwall.cell_constants()
    scale = max(abs(complex(*c["D2"])), abs(complex(*c["N2"])))
    assert scale > 0.1
    assert abs(complex(*c["D1"])) <= 1e-6 * scale


def test_hole_free_cell_is_transparent():
    c = thinwall.cell_constants("hole = none\n")
    assert max(abs(complex(*c[k])) for k in ("D1", "D2", "N1", "N2", "N3")) <= 1e-8


def test_coarse_direct_solve():
    r = thinwall.solve_exact(0.125)
    assert r["mesh"]["holes"] == 8
    assert r["residual"] < 1e-10


def test_bad_config_raises():
    with pytest.raises(ValueError):
        thinwall.cell_constants("k0 = banana\n")
