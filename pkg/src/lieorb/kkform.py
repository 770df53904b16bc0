"""Orbit points, the Kostant-Kirillov two-form, and the exactness criterion.

Tangent vectors to the orbit at w = Ad(g)c are kept together with a
representative X (the tangent value is [X, w]), and the two-form is always
evaluated on representatives as B(w, [X, Y]).  On realified complex algebras
the real and imaginary parts of the holomorphic form are recovered through
the complex structure J:

    Re Omega = B_R(w, [X, Y]) / 2,      Im Omega = -B_R(w, [J X, Y]) / 2.

Exactness of Re/Im Omega is decided only through the two equivalent criteria
(spectrum of ad(c); vanishing of the restricted form on the compact orbit);
no primitive one-form is ever constructed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .liecore import (
    TOL_DECOMP,
    TOL_EIGEN,
    TOL_STRUCT,
    CartanSplit,
    ConfigurationError,
    GroupElement,
    InconsistencyError,
    MatrixLieAlgebra,
    complex_trace_form,
)
from .parabolic import HyperbolicData


@dataclass(frozen=True, eq=False)
class OrbitPoint:
    g: np.ndarray
    w: np.ndarray
    w_coords: np.ndarray


@dataclass(frozen=True, eq=False)
class TangentRep:
    X: np.ndarray
    value: np.ndarray


def orbit_point(
    algebra: MatrixLieAlgebra, c: np.ndarray, g, validate: bool = True
) -> OrbitPoint:
    G = g.matrix if isinstance(g, GroupElement) else np.asarray(g, dtype=float)
    w = G @ c @ np.linalg.inv(G)
    if validate:
        ev_c = np.sort_complex(np.linalg.eigvals(algebra.ad_matrix_of(c)))
        ev_w = np.sort_complex(np.linalg.eigvals(algebra.ad_matrix_of(w)))
        scale = max(1.0, float(np.max(np.abs(ev_c))))
        if np.max(np.abs(ev_c - ev_w)) > TOL_DECOMP * scale * 10:
            raise InconsistencyError("conjugate has a different ad-spectrum")
    return OrbitPoint(G, w, algebra.coords(w))


def tangent_rep(algebra: MatrixLieAlgebra, pt: OrbitPoint, X: np.ndarray) -> TangentRep:
    return TangentRep(np.asarray(X, dtype=float), algebra.bracket(X, pt.w))


def dual_element(algebra: MatrixLieAlgebra, lam: np.ndarray) -> np.ndarray:
    """Element X with B(X, .) = lam, lam given in dual coordinates."""
    x = np.linalg.solve(algebra.killing_matrix, np.asarray(lam, dtype=float))
    return algebra.from_coords(x)


def kk_eval(algebra: MatrixLieAlgebra, pt: OrbitPoint, X: np.ndarray, Y: np.ndarray) -> float:
    """Omega at pt on the tangent vectors represented by X and Y: B(w, [X, Y])."""
    return float(pt.w_coords @ algebra.killing_matrix @ algebra.coords(algebra.bracket(X, Y)))


def closedness_check(
    algebra: MatrixLieAlgebra, pt: OrbitPoint, X: np.ndarray, Y: np.ndarray, Z: np.ndarray
) -> float:
    """Cyclic Jacobi residual B(w, [[X,Y],Z]) + B(w, [[Y,Z],X]) + B(w, [[Z,X],Y])."""
    b = algebra.bracket
    total = (
        kk_eval(algebra, pt, b(X, Y), Z)
        + kk_eval(algebra, pt, b(Y, Z), X)
        + kk_eval(algebra, pt, b(Z, X), Y)
    )
    return abs(total)


def _translated_directions(algebra, data: HyperbolicData, pt: OrbitPoint) -> list[np.ndarray]:
    """Representatives Ad(g) of the theta-n + n directions, spanning g/z(w)."""
    g = pt.g
    g_inv = np.linalg.inv(g)
    dirs = []
    for x in data.nbar_coords:
        dirs.append(g @ algebra.from_coords(x) @ g_inv)
    for V in data.n_basis:
        dirs.append(g @ V @ g_inv)
    return dirs


def nondegeneracy_check(
    algebra: MatrixLieAlgebra, data: HyperbolicData, pt: OrbitPoint | None = None
) -> float:
    """Smallest singular value of Omega on a basis of g/z(w) at the point."""
    if pt is None:
        pt = orbit_point(algebra, data.c, np.eye(algebra.d), validate=False)
    dirs = _translated_directions(algebra, data, pt)
    m = len(dirs)
    M = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            v = kk_eval(algebra, pt, dirs[i], dirs[j])
            M[i, j] = v
            M[j, i] = -v
    svals = np.linalg.svd(M, compute_uv=False)
    return float(svals[-1])


def omega_rank(algebra: MatrixLieAlgebra, data: HyperbolicData, pt: OrbitPoint) -> int:
    dirs = _translated_directions(algebra, data, pt)
    m = len(dirs)
    M = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            v = kk_eval(algebra, pt, dirs[i], dirs[j])
            M[i, j] = v
            M[j, i] = -v
    svals = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(svals > TOL_EIGEN * max(1.0, svals[0])))


def fiber_isotropy_check(
    algebra: MatrixLieAlgebra, data: HyperbolicData, g=None
) -> float:
    """max |Omega| over the fiber directions; at the base fiber when g is None."""
    if g is None:
        pt = orbit_point(algebra, data.c, np.eye(algebra.d), validate=False)
        dirs = list(data.n_basis)
    else:
        G = g.matrix if isinstance(g, GroupElement) else np.asarray(g, dtype=float)
        pt = orbit_point(algebra, data.c, G, validate=False)
        G_inv = np.linalg.inv(G)
        dirs = [G @ V @ G_inv for V in data.n_basis]
    worst = 0.0
    for i in range(len(dirs)):
        for j in range(i + 1, len(dirs)):
            worst = max(worst, abs(kk_eval(algebra, pt, dirs[i], dirs[j])))
    return worst


def k_orbit_lagrangian_check(
    algebra: MatrixLieAlgebra, split: CartanSplit, c: np.ndarray, which: str
) -> float:
    """max |form(X, Y)| over k-basis pairs at the base point of the orbit of c.

    which = "re" / "im" evaluates the real/imaginary part of the holomorphic
    form on a realified algebra; "real-form" evaluates Omega itself on a real
    form.  Together with the half-dimension count this certifies (or refutes)
    the Lagrangian property of the compact orbit.
    """
    if which in ("re", "im"):
        if not algebra.is_complex:
            raise ConfigurationError("re/im modes need a complex-realified algebra")
    elif which == "real-form":
        if algebra.is_complex:
            raise ConfigurationError("real-form mode needs a real form")
    else:
        raise ConfigurationError(f"unknown mode {which!r}")
    K = algebra.killing_matrix
    wc = algebra.coords(c)
    worst = 0.0
    for i in range(split.k_basis.shape[0]):
        for j in range(i + 1, split.k_basis.shape[0]):
            X, Y = split.k_basis[i], split.k_basis[j]
            if which == "im":
                X = algebra.J @ X
                val = -0.5 * float(wc @ K @ algebra.coords(algebra.bracket(X, Y)))
            elif which == "re":
                val = 0.5 * float(wc @ K @ algebra.coords(algebra.bracket(X, Y)))
            else:
                val = float(wc @ K @ algebra.coords(algebra.bracket(X, Y)))
            worst = max(worst, abs(val))
    return worst


def exactness_verdict(
    algebra: MatrixLieAlgebra, split: CartanSplit, c_entries: Sequence[complex]
) -> dict:
    """Decide exactness of Re/Im Omega on the orbit of diag(c_entries).

    The spectral test (eigenvalues of ad(c) real / purely imaginary) is
    cross-checked against the vanishing of the restricted form on the compact
    orbit; disagreement is a hard failure.
    """
    if not algebra.is_complex:
        raise ConfigurationError("exactness verdict applies to realified complex orbits")
    vals = [complex(e) for e in c_entries]
    if len(vals) != algebra.n or abs(sum(vals)) > 1e-12:
        raise ConfigurationError("need traceless diagonal entries of matching size")
    if max(abs(v) for v in vals) == 0:
        raise ConfigurationError("c must be nonzero")
    c = algebra.element_from_entries(vals)
    ev = np.linalg.eigvals(algebra.ad_matrix_of(c))
    scale = max(1.0, float(np.max(np.abs(ev))))
    re_spec = bool(np.max(np.abs(ev.imag)) < TOL_DECOMP * scale)
    im_spec = bool(np.max(np.abs(ev.real)) < TOL_DECOMP * scale)

    re_resid = k_orbit_lagrangian_check(algebra, split, c, "re")
    im_resid = k_orbit_lagrangian_check(algebra, split, c, "im")
    re_geom = re_resid < TOL_STRUCT * scale
    im_geom = im_resid < TOL_STRUCT * scale
    cscale = max(abs(v) for v in vals)
    if not re_geom and re_resid < 1e-3 * cscale:
        raise InconsistencyError(f"re witness too weak: {re_resid:.2e}")
    if not im_geom and im_resid < 1e-3 * cscale:
        raise InconsistencyError(f"im witness too weak: {im_resid:.2e}")
    if re_spec != re_geom or im_spec != im_geom:
        raise InconsistencyError(
            "spectral and geometric exactness tests disagree: "
            f"spec=({re_spec},{im_spec}) geom=({re_geom},{im_geom})"
        )
    return {
        "re_exact": re_spec,
        "im_exact": im_spec,
        "evidence": {
            "max_imag_eigenvalue": float(np.max(np.abs(ev.imag))),
            "max_real_eigenvalue": float(np.max(np.abs(ev.real))),
            "re_restriction_max": re_resid,
            "im_restriction_max": im_resid,
        },
    }


def re_dual_gap(algebra: MatrixLieAlgebra, c_entries: Sequence[complex]) -> float:
    """||c - 2 X_{Re eta}|| for eta = B_C(c, .).

    Vanishes identically: B_R(2 X_{Re eta}, Y) = 2 Re B_C(c, Y) = B_R(c, Y).
    """
    if not algebra.is_complex:
        raise ConfigurationError("re-duality applies to realified complex algebras")
    c = algebra.element_from_entries([complex(e) for e in c_entries])
    lam = np.array([complex_trace_form(algebra, c, b).real for b in algebra.basis])
    X = dual_element(algebra, lam)
    return float(np.max(np.abs(c - 2.0 * X)))
