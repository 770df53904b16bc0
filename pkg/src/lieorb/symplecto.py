"""The cotangent-bundle model over the compact flag and the orbit map.

Points of T*(G/P(c)) are carried as pairs (k, V): k in K fixes the base coset
and V in n(c) encodes the fiber covector eta_V = -B(V, .).  The orbit map is

    phi(k, V) = k . exp_H(V) . e_bar,

and its differentials are taken by central finite differences so the
verification stays independent of the construction.

Frozen sign conventions (fixed once on sl(2, R), asserted everywhere):
  * eta_V = -B(V, .)
  * tautological one-form  tau(Y, delta) = eta_V(Y mod P) = -B(V, Y)
  * Liouville form oriented as sigma = -d tau, i.e.

        sigma(W1, W2) = d_eta2(Y1) - d_eta1(Y2) + eta([Y1, Y2])
                      = B(d1, Y2) - B(d2, Y1) - B(V, [Y1, Y2]),

    which is the orientation that matches the pullback of the orbit form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .kkform import OrbitPoint, kk_eval, orbit_point
from .liecore import (
    TOL_DECOMP,
    ConfigurationError,
    DecompositionError,
    GroupElement,
    InconsistencyError,
    MatrixLieAlgebra,
    cartan_split,
    in_K_residual,
    kp_decompose,
    random_in_K,
)
from .flows import exp_H
from .parabolic import HyperbolicData


@dataclass(frozen=True, eq=False)
class CotangentPoint:
    k: np.ndarray
    V: np.ndarray  # n(c)-coordinates of the B-dual of the covector


@dataclass(frozen=True, eq=False)
class CotangentTangent:
    """Tangent of the curve t -> (k exp(t Y), V + t delta)."""

    Y: np.ndarray      # direction in k
    delta: np.ndarray  # n(c)-coordinates


@dataclass(frozen=True, eq=False)
class BaseCoset:
    k: np.ndarray


def cotangent_point(data: HyperbolicData, k, V) -> CotangentPoint:
    kmat = k.matrix if isinstance(k, GroupElement) else np.asarray(k, dtype=float)
    r = in_K_residual(data.algebra, kmat)
    if r > TOL_DECOMP:
        raise ConfigurationError(f"base representative is not in K (residual {r:.2e})")
    return CotangentPoint(kmat, np.asarray(V, dtype=float))


def phi_lambda(data: HyperbolicData, pt: CotangentPoint, validate: bool = True) -> OrbitPoint:
    """phi(k, V) = k exp_H(V) e_bar as an orbit point."""
    if in_K_residual(data.algebra, pt.k) > TOL_DECOMP:
        raise ConfigurationError("base representative is not in K")
    g = pt.k @ exp_H(data, pt.V).matrix
    return orbit_point(data.algebra, data.c, g, validate=validate)


def project_pi(data: HyperbolicData, pt: OrbitPoint) -> BaseCoset:
    """Bundle projection G/Z(c) -> G/P(c) = K/Z_K(c), canonical K representative."""
    k, _ = kp_decompose(data.algebra, pt.g, data.p_filtration_coords)
    return BaseCoset(k.matrix)


def coset_gap(data: HyperbolicData, k1: np.ndarray, k2: np.ndarray) -> float:
    """Distance of k1 Z_K(c) and k2 Z_K(c): how far Ad(k1^-1 k2) moves c."""
    m = k1.T @ k2  # k1 in K, so the transpose is the inverse
    gap = float(np.max(np.abs(m @ data.c @ m.T - data.c)))
    return max(gap, in_K_residual(data.algebra, m))


def tautological_form(data: HyperbolicData, pt: CotangentPoint, W: CotangentTangent) -> float:
    """eta(d(base) W) = -B(V, Y); vertical directions are annihilated."""
    algebra = data.algebra
    Vm = data.n_matrix_of(pt.V)
    return -float(algebra.coords(Vm) @ algebra.killing_matrix @ algebra.coords(W.Y))


def liouville_eval(
    data: HyperbolicData, pt: CotangentPoint, W1: CotangentTangent, W2: CotangentTangent
) -> float:
    """Liouville form in the (k, V) chart; see the frozen conventions above."""
    algebra = data.algebra
    K = algebra.killing_matrix
    d1 = algebra.coords(data.n_matrix_of(W1.delta))
    d2 = algebra.coords(data.n_matrix_of(W2.delta))
    y1 = algebra.coords(W1.Y)
    y2 = algebra.coords(W2.Y)
    vb = algebra.coords(data.n_matrix_of(pt.V))
    br = algebra.coords(algebra.bracket(W1.Y, W2.Y))
    return float(d1 @ K @ y2 - d2 @ K @ y1 - vb @ K @ br)


def horizontal_basis(data: HyperbolicData) -> np.ndarray:
    """Directions V_j + theta(V_j) in k, complementary to the stabilizer part."""
    mats = []
    for V in data.n_basis:
        mats.append(V + data.algebra.theta(V))
    return np.stack(mats)


def liouville_fd_gap(data: HyperbolicData, pt: CotangentPoint, step: float = 1e-5) -> float:
    """Compare liouville_eval with the FD exterior derivative of tau.

    The chart u = (y, v) -> (k0 exp(y_1 Y_1) ... exp(y_n Y_n), V0 + v) is a
    local parametrization; coordinate tangents are computed in closed form
    and d tau by second-order central differences of the chart components.
    The frozen orientation is sigma = -d tau.
    """
    algebra = data.algebra
    Ys = horizontal_basis(data)
    n = data.n_dim
    dimu = 2 * n
    K = algebra.killing_matrix

    def tau_components(u: np.ndarray) -> np.ndarray:
        y, v = u[:n], u[n:]
        # suffix products S_i = exp(y_{i+1} Y_{i+1}) ... exp(y_n Y_n)
        suffix = [np.eye(algebra.d)]
        for j in range(n - 1, -1, -1):
            suffix.append(scipy.linalg.expm(y[j] * Ys[j]) @ suffix[-1])
        suffix.reverse()  # suffix[i] = prod_{j >= i} exp(y_j Y_j); suffix[n] = I
        Vm = data.n_matrix_of(pt.V + v)
        vc = algebra.coords(Vm)
        comps = np.zeros(dimu)
        for i in range(n):
            S = suffix[i + 1]
            Yt = np.linalg.solve(S, Ys[i] @ S)  # Ad(S^-1) Y_i
            comps[i] = -float(vc @ K @ algebra.coords(Yt))
        return comps  # fiber components of tau vanish identically

    u0 = np.zeros(dimu)
    # chart tangents at u0
    Ws = [CotangentTangent(Ys[i], np.zeros(n)) for i in range(n)]
    Ws += [CotangentTangent(np.zeros((algebra.d, algebra.d)), np.eye(n)[b]) for b in range(n)]

    dtau = np.zeros((dimu, dimu))
    for i in range(dimu):
        e = np.eye(dimu)[i] * step
        tp = tau_components(u0 + e)
        tm = tau_components(u0 - e)
        dtau[i] = (tp - tm) / (2 * step)  # dtau[i, j] = d_i tau_j
    worst = 0.0
    for i in range(dimu):
        for j in range(i + 1, dimu):
            fd = dtau[i, j] - dtau[j, i]
            sigma = liouville_eval(data, pt, Ws[i], Ws[j])
            worst = max(worst, abs(sigma + fd))
    return worst


def _orbit_w(data: HyperbolicData, g: np.ndarray) -> np.ndarray:
    return g @ data.c @ np.linalg.inv(g)


def _fd_tangent(w_plus, w_minus, w_plus_h, w_minus_h, step: float, scale: float):
    """Richardson-extrapolated central difference with a consistency check."""
    d1 = (w_plus - w_minus) / (2 * step)
    d2 = (w_plus_h - w_minus_h) / step  # half step
    if float(np.max(np.abs(d1 - d2))) > 1e-5 * max(1.0, scale):
        raise DecompositionError("finite-difference step adaptation failed")
    return (4.0 * d2 - d1) / 3.0


def pullback_residual(data: HyperbolicData, pt: CotangentPoint, step: float = 1e-5) -> float:
    """max |phi* Omega - sigma| over a frame of 2 dim n(c) tangent directions.

    phi is differentiated by central differences along the chart curves; the
    resulting orbit tangents are re-expressed through representatives by
    solving [X, w] = w-dot, and both Gram matrices are assembled.
    """
    algebra = data.algebra
    n = data.n_dim
    Ys = horizontal_basis(data)
    nV = exp_H(data, pt.V).matrix
    g0 = pt.k @ nV
    w0 = _orbit_w(data, g0)
    pt0 = orbit_point(algebra, data.c, g0, validate=False)
    scale = float(np.max(np.abs(w0)))

    tangents = []
    Ws = []
    for i in range(n):
        curves = {}
        for s in (step, -step, step / 2, -step / 2):
            curves[s] = _orbit_w(data, pt.k @ scipy.linalg.expm(s * Ys[i]) @ nV)
        dw = _fd_tangent(curves[step], curves[-step], curves[step / 2], curves[-step / 2], step, scale)
        tangents.append(dw)
        Ws.append(CotangentTangent(Ys[i], np.zeros(n)))
    for b in range(n):
        e = np.eye(n)[b]
        curves = {}
        for s in (step, -step, step / 2, -step / 2):
            curves[s] = _orbit_w(data, pt.k @ exp_H(data, pt.V + s * e).matrix)
        dw = _fd_tangent(curves[step], curves[-step], curves[step / 2], curves[-step / 2], step, scale)
        tangents.append(dw)
        Ws.append(CotangentTangent(np.zeros((algebra.d, algebra.d)), e))

    # representatives: solve [X, w0] = dw, i.e. -ad(w0) x = dw in coordinates
    M = -algebra.ad_coord(algebra.coords(w0))
    P = np.linalg.pinv(M, rcond=1e-10)
    reps = []
    for dw in tangents:
        dwc = algebra.coords(dw)
        x = P @ dwc
        if float(np.max(np.abs(M @ x - dwc))) > 1e-5 * max(1.0, scale):
            raise DecompositionError("orbit tangent fell outside the orbit (FD breakdown)")
        reps.append(algebra.from_coords(x))

    m = 2 * n
    worst = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            om = kk_eval(algebra, pt0, reps[i], reps[j])
            sg = liouville_eval(data, pt, Ws[i], Ws[j])
            worst = max(worst, abs(om - sg))
    return worst


def section_lagrangian_check(
    data: HyperbolicData, rng: np.random.Generator, samples: int = 10
) -> float:
    """max |Omega| on pushforwards of k-directions at random zero-section points.

    Zero-section tangents have exact representatives Ad(k) Y, so no finite
    differences are needed here.
    """
    algebra = data.algebra
    split = cartan_split(algebra)
    worst = 0.0
    for _ in range(samples):
        k = random_in_K(algebra, rng).matrix
        pt = orbit_point(algebra, data.c, k, validate=False)
        dirs = [k @ Y @ k.T for Y in split.k_basis]
        for i in range(len(dirs)):
            for j in range(i + 1, len(dirs)):
                worst = max(worst, abs(kk_eval(algebra, pt, dirs[i], dirs[j])))
    return worst


def equivalence_gap(data: HyperbolicData, pt: CotangentPoint, m: np.ndarray) -> float:
    """phi agreement of the two representatives (k m, Ad(m)^-1 V) and (k, V)."""
    algebra = data.algebra
    m = np.asarray(m, dtype=float)
    gap0 = float(np.max(np.abs(m @ data.c @ np.linalg.inv(m) - data.c)))
    if max(gap0, in_K_residual(algebra, m)) > TOL_DECOMP:
        raise ConfigurationError("m does not lie in the compact stabilizer of c")
    Vm = data.n_matrix_of(pt.V)
    V2 = data.n_coords_of(np.linalg.inv(m) @ Vm @ m, strict=1e-8)
    a = phi_lambda(data, CotangentPoint(pt.k, pt.V), validate=False)
    b = phi_lambda(data, CotangentPoint(pt.k @ m, V2), validate=False)
    return float(np.max(np.abs(a.w - b.w)))
