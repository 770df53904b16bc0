import numpy as np
import pytest

from lieorb.kkform import kk_eval, orbit_point
from lieorb.liecore import ConfigurationError, random_in_K
from lieorb.symplecto import (
    CotangentTangent,
    coset_gap,
    cotangent_point,
    equivalence_gap,
    horizontal_basis,
    liouville_eval,
    liouville_fd_gap,
    phi_lambda,
    project_pi,
    pullback_residual,
    section_lagrangian_check,
    tautological_form,
)


def test_phi_zero_section(ws, rng):
    data = ws.data("sl3r", (1, 0, -1))
    alg = ws.algebra("sl3r")
    k = random_in_K(alg, rng).matrix
    op = phi_lambda(data, cotangent_point(data, k, np.zeros(3)))
    np.testing.assert_allclose(op.w, k @ data.c @ k.T, atol=1e-12)


def test_phi_sl2_example(ws):
    data = ws.data("sl2r", (1, -1))
    op = phi_lambda(data, cotangent_point(data, np.eye(2), np.array([1.0])))
    np.testing.assert_allclose(op.g, [[1.0, 0.5], [0.0, 1.0]], atol=1e-14)
    H, E, _ = ws.algebra("sl2r").basis
    np.testing.assert_allclose(op.w, H - E, atol=1e-12)


def test_phi_rejects_non_k_base(ws):
    data = ws.data("sl2r", (1, -1))
    with pytest.raises(ConfigurationError):
        cotangent_point(data, np.array([[2.0, 0.0], [0.0, 0.5]]), np.zeros(1))


def test_phi_equivalence_classes(ws, rng):
    # sl(2): m = -I lies in the compact stabilizer
    data = ws.data("sl2r", (1, -1))
    pt = cotangent_point(data, random_in_K(ws.algebra("sl2r"), rng).matrix, np.array([0.8]))
    assert equivalence_gap(data, pt, -np.eye(2)) < 1e-9
    # sl(3) wall case has a continuous stabilizer
    import scipy.linalg

    from lieorb.parabolic import z_k_coords

    data3 = ws.data("sl3r", (1, 1, -2))
    alg3 = ws.algebra("sl3r")
    zk = z_k_coords(data3)
    assert zk.shape[0] > 0
    m = scipy.linalg.expm(0.6 * alg3.from_coords(zk[0]))
    pt3 = cotangent_point(data3, random_in_K(alg3, rng).matrix, rng.standard_normal(2))
    assert equivalence_gap(data3, pt3, m) < 1e-9


def test_phi_equivariance(ws, rng):
    data = ws.data("sl3r", (1, 0, -1))
    alg = ws.algebra("sl3r")
    k0 = random_in_K(alg, rng).matrix
    k = random_in_K(alg, rng).matrix
    V = rng.standard_normal(3)
    a = phi_lambda(data, cotangent_point(data, k0 @ k, V), validate=False)
    b = phi_lambda(data, cotangent_point(data, k, V), validate=False)
    np.testing.assert_allclose(a.w, k0 @ b.w @ np.linalg.inv(k0), atol=1e-9)


def test_project_pi(ws, rng):
    data = ws.data("sl3r", (1, 0, -1))
    alg = ws.algebra("sl3r")
    bc = project_pi(data, orbit_point(alg, data.c, np.eye(3)))
    assert coset_gap(data, bc.k, np.eye(3)) < 1e-12
    from lieorb.flows import exp_H

    nelt = exp_H(data, rng.standard_normal(3))
    bc = project_pi(data, orbit_point(alg, data.c, nelt.matrix, validate=False))
    assert coset_gap(data, bc.k, np.eye(3)) < 1e-9


def test_bundle_compatibility_sweep(ws, rng):
    for key, entries in (("sl3r", (1, 0, -1)), ("sl3c", (1, 0, -1))):
        data = ws.data(key, entries)
        alg = ws.algebra(key)
        for _ in range(15):
            pt = cotangent_point(data, random_in_K(alg, rng).matrix, rng.standard_normal(data.n_dim))
            bc = project_pi(data, phi_lambda(data, pt, validate=False))
            assert coset_gap(data, bc.k, pt.k) < 1e-9


def test_tautological_form(ws, rng):
    data = ws.data("sl2r", (1, -1))
    alg = ws.algebra("sl2r")
    H, E, F = alg.basis
    pt = cotangent_point(data, np.eye(2), np.array([1.0]))  # eta_E
    W = CotangentTangent(E - F, np.zeros(1))
    assert tautological_form(data, pt, W) == pytest.approx(4.0, abs=1e-12)
    # zero section and vertical directions are annihilated
    pt0 = cotangent_point(data, np.eye(2), np.zeros(1))
    assert tautological_form(data, pt0, W) == 0.0
    Wv = CotangentTangent(np.zeros((2, 2)), np.array([1.0]))
    assert tautological_form(data, pt, Wv) == 0.0


def test_liouville_vs_fd(ws, rng):
    cases = [("sl2r", (1, -1), 3), ("sl3r", (1, 0, -1), 4), ("sl3r", (1, 1, -2), 3), ("sl3c", (1, 0, -1), 2)]
    for key, entries, count in cases:
        data = ws.data(key, entries)
        alg = ws.algebra(key)
        for _ in range(count):
            pt = cotangent_point(data, random_in_K(alg, rng).matrix, 0.8 * rng.standard_normal(data.n_dim))
            assert liouville_fd_gap(data, pt) < 1e-6


def test_liouville_vertical_pair_vanishes(ws, rng):
    data = ws.data("sl3r", (1, 0, -1))
    pt = cotangent_point(data, np.eye(3), np.zeros(3))
    W1 = CotangentTangent(np.zeros((3, 3)), rng.standard_normal(3))
    W2 = CotangentTangent(np.zeros((3, 3)), rng.standard_normal(3))
    assert liouville_eval(data, pt, W1, W2) == 0.0


def test_pullback_hand_value_sl2(ws):
    # phi* Omega on (horizontal, vertical) at (I, v E) equals sigma = +4
    data = ws.data("sl2r", (1, -1))
    alg = ws.algebra("sl2r")
    H, E, F = alg.basis
    pt = cotangent_point(data, np.eye(2), np.array([0.7]))
    Wh = CotangentTangent(E - F, np.zeros(1))
    Wv = CotangentTangent(np.zeros((2, 2)), np.array([1.0]))
    assert liouville_eval(data, pt, Wh, Wv) == pytest.approx(4.0, abs=1e-12)
    w0 = H - 0.7 * E
    op = orbit_point(alg, data.c, np.eye(2) @ np.array([[1.0, 0.35], [0.0, 1.0]]), validate=False)
    np.testing.assert_allclose(op.w, w0, atol=1e-12)
    # representatives: horizontal E - F, vertical solves [X, w0] = -E
    X_v = 0.5 * E
    np.testing.assert_allclose(alg.bracket(X_v, w0), -E, atol=1e-12)
    assert kk_eval(alg, op, E - F, X_v) == pytest.approx(4.0, abs=1e-12)


def test_pullback_zero_section_blocks(ws):
    data = ws.data("sl3r", (1, 0, -1))
    pt = cotangent_point(data, np.eye(3), np.zeros(3))
    # both vertical-vertical blocks vanish: fibers are Lagrangian on each side
    alg = ws.algebra("sl3r")
    op = phi_lambda(data, pt, validate=False)
    for i in range(3):
        for j in range(3):
            Wi = CotangentTangent(np.zeros((3, 3)), np.eye(3)[i])
            Wj = CotangentTangent(np.zeros((3, 3)), np.eye(3)[j])
            assert liouville_eval(data, pt, Wi, Wj) == 0.0
            assert abs(kk_eval(alg, op, data.n_basis[i], data.n_basis[j])) < 1e-12
    assert pullback_residual(data, pt) < 1e-6


def test_pullback_sweep(ws, rng):
    cases = [
        ("sl2r", (1, -1), 5),
        ("sl3r", (1, 0, -1), 5),
        ("sl3r", (1, 1, -2), 5),
        ("sl4r", (3, 1, -1, -3), 3),
        ("sl2c", (1, -1), 4),
        ("sl3c", (1, 0, -1), 3),
    ]
    for key, entries, count in cases:
        data = ws.data(key, entries)
        alg = ws.algebra(key)
        for _ in range(count):
            pt = cotangent_point(data, random_in_K(alg, rng).matrix, 0.8 * rng.standard_normal(data.n_dim))
            assert pullback_residual(data, pt) < 1e-6


def test_section_lagrangian(ws, rng):
    data = ws.data("sl2r", (1, -1))
    assert section_lagrangian_check(data, rng, samples=3) < 1e-12
    data3 = ws.data("sl3r", (1, 0, -1))
    assert section_lagrangian_check(data3, rng, samples=5) < 1e-9
    # theta-flip identity at the base point: Omega(X, Y) = -Omega(X, Y) on k
    alg = ws.algebra("sl3r")
    split = ws.split("sl3r")
    op = orbit_point(alg, data3.c, np.eye(3))
    for X in split.k_basis:
        for Y in split.k_basis:
            assert abs(kk_eval(alg, op, X, Y)) < 1e-12


def test_injectivity_sampling(ws, rng):
    data = ws.data("sl3r", (1, 0, -1))
    alg = ws.algebra("sl3r")
    pts = []
    for _ in range(15):
        pts.append(cotangent_point(data, random_in_K(alg, rng).matrix, rng.standard_normal(3)))
    ws_ = [phi_lambda(data, p, validate=False).w for p in pts]
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            distinct = coset_gap(data, pts[i].k, pts[j].k) > 1e-3 or np.max(
                np.abs(pts[i].V - pts[j].V)
            ) > 1e-3
            if distinct:
                assert np.max(np.abs(ws_[i] - ws_[j])) > 1e-7


def test_horizontal_basis_spans_complement(ws):
    data = ws.data("sl3r", (1, 0, -1))
    Ys = horizontal_basis(data)
    assert Ys.shape[0] == data.n_dim
    coords = np.stack([ws.algebra("sl3r").coords(Y) for Y in Ys])
    assert np.linalg.matrix_rank(coords) == data.n_dim
