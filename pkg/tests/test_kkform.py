import numpy as np
import pytest
import scipy.linalg

from lieorb.kkform import (
    closedness_check,
    dual_element,
    exactness_verdict,
    fiber_isotropy_check,
    k_orbit_lagrangian_check,
    kk_eval,
    nondegeneracy_check,
    omega_rank,
    orbit_point,
    re_dual_gap,
    tangent_rep,
)
from lieorb.liecore import ConfigurationError, random_element
from oracles import killing_matrix_oracle


def _pt(ws, key, entries, g=None):
    alg = ws.algebra(key)
    c = alg.element_from_entries(entries)
    return alg, orbit_point(alg, c, np.eye(alg.d) if g is None else g)


def test_kk_eval_base_value(ws):
    alg, pt = _pt(ws, "sl2r", (1, -1))
    H, E, F = alg.basis
    # oracle: B(H, [E, F]) = B(H, H) via the brute-force Killing matrix
    K = killing_matrix_oracle(alg)
    assert K[0, 0] == pytest.approx(8.0, abs=1e-10)
    assert kk_eval(alg, pt, E, F) == pytest.approx(8.0, abs=1e-10)
    assert kk_eval(alg, pt, E, E) == pytest.approx(0.0, abs=1e-12)


def test_antisymmetry_and_degeneracy(ws, rng):
    alg, pt = _pt(ws, "sl3r", (1, 0, -1))
    for X in alg.basis:
        for Y in alg.basis:
            assert kk_eval(alg, pt, X, Y) == pytest.approx(-kk_eval(alg, pt, Y, X), abs=1e-10)
    for _ in range(100):
        X, Y = random_element(alg, rng), random_element(alg, rng)
        assert kk_eval(alg, pt, X, Y) == pytest.approx(-kk_eval(alg, pt, Y, X), abs=1e-10)
    # perturbing by centralizer elements does not change the value
    data = ws.data("sl3r", (1, 0, -1))
    for _ in range(10):
        X, Y = random_element(alg, rng), random_element(alg, rng)
        Z = alg.from_coords(rng.standard_normal(len(data.z_indices)) @ data.z_coords)
        assert kk_eval(alg, pt, X + Z, Y) == pytest.approx(kk_eval(alg, pt, X, Y), abs=1e-10)


def test_tangent_rep_vanishes_iff_centralizer(ws, rng):
    alg, pt = _pt(ws, "sl3r", (1, 0, -1))
    data = ws.data("sl3r", (1, 0, -1))
    Z = alg.from_coords(rng.standard_normal(len(data.z_indices)) @ data.z_coords)
    assert np.max(np.abs(tangent_rep(alg, pt, Z).value)) < 1e-10
    V = data.n_basis[0]
    assert np.max(np.abs(tangent_rep(alg, pt, V).value)) > 1e-3


def test_g_invariance(ws, rng):
    alg, pt = _pt(ws, "sl3r", (1, 0, -1))
    for _ in range(20):
        g = scipy.linalg.expm(random_element(alg, rng, 0.4))
        g_inv = np.linalg.inv(g)
        pt2 = orbit_point(alg, alg.element_from_entries((1, 0, -1)), g @ pt.g, validate=False)
        X, Y = random_element(alg, rng), random_element(alg, rng)
        lhs = kk_eval(alg, pt2, g @ X @ g_inv, g @ Y @ g_inv)
        assert lhs == pytest.approx(kk_eval(alg, pt, X, Y), abs=1e-9 * max(1, abs(lhs)))


def test_closedness(ws, rng):
    alg = ws.algebra("sl3r")
    c = alg.element_from_entries((1, 0, -1))
    for _ in range(10):
        g = scipy.linalg.expm(random_element(alg, rng, 0.4))
        pt = orbit_point(alg, c, g, validate=False)
        X, Y, Z = (random_element(alg, rng) for _ in range(3))
        assert closedness_check(alg, pt, X, Y, Z) < 1e-9
        assert closedness_check(alg, pt, X, X, Z) < 1e-9
    data = ws.data("sl3r", (1, 0, -1))
    pt = orbit_point(alg, c, np.eye(3))
    Zc = alg.from_coords(data.z_coords[0])
    assert closedness_check(alg, pt, random_element(alg, rng), random_element(alg, rng), Zc) < 1e-9


def test_nondegeneracy(ws, rng):
    alg = ws.algebra("sl2r")
    data = ws.data("sl2r", (1, -1))
    assert nondegeneracy_check(alg, data) == pytest.approx(8.0, abs=1e-9)
    data3 = ws.data("sl3r", (1, 0, -1))
    alg3 = ws.algebra("sl3r")
    assert nondegeneracy_check(alg3, data3) > 1e-8
    for _ in range(5):
        g = scipy.linalg.expm(random_element(alg3, rng, 0.4))
        pt = orbit_point(alg3, data3.c, g, validate=False)
        assert omega_rank(alg3, data3, pt) == alg3.dim - len(data3.z_indices)


def test_fiber_isotropy(ws, rng):
    from conftest import DATA_GRID

    assert fiber_isotropy_check(ws.algebra("sl2r"), ws.data("sl2r", (1, -1))) == 0.0
    for key, entries in DATA_GRID:
        alg = ws.algebra(key)
        data = ws.data(key, entries)
        assert fiber_isotropy_check(alg, data) < 1e-10
        for _ in range(3):
            g = scipy.linalg.expm(random_element(alg, rng, 0.4))
            assert fiber_isotropy_check(alg, data, g) < 1e-9


def test_fiber_isotropy_root_pairing(ws):
    # B(c, [E12, E23]) pairs grade 1 with grade 2, hence vanishes exactly
    alg = ws.algebra("sl3r")
    data = ws.data("sl3r", (1, 0, -1))
    E12, E23 = data.n_basis[0], data.n_basis[1]
    assert abs(alg.killing(data.c, alg.bracket(E12, E23))) < 1e-12


def test_k_orbit_lagrangian_modes(ws):
    alg = ws.algebra("sl2c")
    split = ws.split("sl2c")
    c_real = alg.element_from_entries([1, -1])
    c_imag = alg.element_from_entries([1j, -1j])
    assert k_orbit_lagrangian_check(alg, split, c_real, "re") < 1e-10
    assert k_orbit_lagrangian_check(alg, split, c_imag, "im") < 1e-10
    assert k_orbit_lagrangian_check(alg, split, c_imag, "re") > 1e-3
    assert k_orbit_lagrangian_check(alg, split, c_real, "im") > 1e-3
    with pytest.raises(ConfigurationError):
        k_orbit_lagrangian_check(alg, split, c_real, "real-form")
    algr, splitr = ws.algebra("sl3r"), ws.split("sl3r")
    cr = algr.element_from_entries([1, 0, -1])
    assert k_orbit_lagrangian_check(algr, splitr, cr, "real-form") < 1e-10
    with pytest.raises(ConfigurationError):
        k_orbit_lagrangian_check(algr, splitr, cr, "re")


def test_exactness_verdicts(ws):
    cases = {
        (1, -1): (True, False),
        (1j, -1j): (False, True),
        (1 + 1j, -1 - 1j): (False, False),
    }
    for key in ("sl2c", "sl3c"):
        alg, split = ws.algebra(key), ws.split(key)
        for entries, want in cases.items():
            padded = list(entries) + [0] * (alg.n - 2)
            v = exactness_verdict(alg, split, padded)
            assert (v["re_exact"], v["im_exact"]) == want
            if not v["re_exact"]:
                assert v["evidence"]["re_restriction_max"] > 1e-3
            else:
                assert v["evidence"]["re_restriction_max"] < 1e-10
    with pytest.raises(ConfigurationError):
        exactness_verdict(ws.algebra("sl2r"), ws.split("sl2r"), [1, -1])


def test_dual_element(ws, rng):
    alg = ws.algebra("sl3r")
    c = alg.element_from_entries([2, -1, -1])
    lam = np.array([alg.killing(c, b) for b in alg.basis])
    np.testing.assert_allclose(dual_element(alg, lam), c, atol=1e-10)


def test_re_duality(ws, rng):
    for key in ("sl2c", "sl3c"):
        alg = ws.algebra(key)
        n = alg.n
        for _ in range(10):
            z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            z -= z.sum() / n
            assert re_dual_gap(alg, z) < 1e-10


def test_orbit_point_invariants(ws, rng):
    alg = ws.algebra("sl3r")
    c = alg.element_from_entries((1, 0, -1))
    g = scipy.linalg.expm(random_element(alg, rng, 0.5))
    pt = orbit_point(alg, c, g)
    np.testing.assert_allclose(pt.w, g @ c @ np.linalg.inv(g), atol=1e-10)
