"""Configuration-driven verification runs with machine-readable JSON reports.

Usage:  lieorb <subcommand> --config path.json [--seed N] [--out path]

Subcommands: roots, parabolic, kk-check, flow-check, symplecto-verify,
arnold, fixture.  The config selects the algebra, the chamber element c and
tolerance overrides; the report body is deterministic for a fixed seed
(timestamps and runtimes live outside the body).  Exit codes: 0 all checks
pass, 1 a check failed, 2 configuration error, 3 internal inconsistency.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy

from . import __version__
from .liecore import (
    AlgebraSpec,
    ConfigurationError,
    DecompositionError,
    InconsistencyError,
    build_algebra,
    cartan_split,
    complex_trace_form,
    killing_compare_realified,
    random_element,
    random_in_K,
)
from .rootspace import k_from_roots_check, maximal_abelian, restricted_roots
from .parabolic import chamber_sort, hyperbolic_data, z_k_coords
from .kkform import (
    closedness_check,
    exactness_verdict,
    fiber_isotropy_check,
    k_orbit_lagrangian_check,
    kk_eval,
    nondegeneracy_check,
    orbit_point,
    re_dual_gap,
)
from .flows import commute_residual, exp_H, flow_exact, flow_numeric, invert_exp_H
from .symplecto import (
    coset_gap,
    cotangent_point,
    liouville_fd_gap,
    phi_lambda,
    project_pi,
    pullback_residual,
    section_lagrangian_check,
)

CONVENTIONS = {
    "eta_V": "-B(V, .)",
    "tautological": "tau(Y, delta) = eta_V(Y mod P)",
    "liouville_orientation": "sigma = -d(tau)  (base-fiber pairing positive)",
    "re_omega_complex_scale": 2.0,
}

DEFAULT_TOLERANCES = {
    "structural": 1e-10,
    "decomposition": 1e-9,
    "eigen": 1e-8,
    "finite_difference": 1e-6,
}

ALL_CHECKS = ("roots", "parabolic", "kk", "flow", "symplecto", "arnold")


@dataclass
class RunConfig:
    algebra: AlgebraSpec
    c_entries: tuple
    checks: tuple[str, ...]
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    output_path: str | None = None
    samples: int = 20

    def tol(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))


def _parse_entry(e):
    try:
        if isinstance(e, dict):
            if set(e) - {"re", "im"}:
                raise ConfigurationError(f"bad complex entry {e!r}")
            return complex(float(e.get("re", 0.0)), float(e.get("im", 0.0)))
        if isinstance(e, str):
            return Fraction(e)
        if isinstance(e, bool):
            raise ConfigurationError(f"bad entry {e!r}")
        if isinstance(e, int):
            return Fraction(e)
        if isinstance(e, float):
            if e != int(e):
                raise ConfigurationError("float entries must be integral; use strings for rationals")
            return Fraction(int(e))
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigurationError(f"bad entry {e!r}: {exc}") from exc
    raise ConfigurationError(f"bad entry {e!r}")


def parse_config(d: dict) -> RunConfig:
    if not isinstance(d, dict):
        raise ConfigurationError("config must be a JSON object")
    alg = d.get("algebra", {})
    try:
        spec = AlgebraSpec(
            family=alg.get("family", "sl"), n=int(alg.get("n", 2)), field=alg.get("field", "R")
        )
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"bad algebra spec: {exc}") from exc
    raw_c = d.get("c", None)
    if raw_c is None:
        raise ConfigurationError("config requires a diagonal element c")
    entries = tuple(_parse_entry(e) for e in raw_c)
    if len(entries) != spec.n:
        raise ConfigurationError(f"c must have {spec.n} entries")
    total = sum((complex(e) for e in entries), 0j)
    if abs(total) > 1e-12:
        raise ConfigurationError("c must be traceless")
    checks = tuple(d.get("checks", ["roots", "parabolic", "kk", "flow", "symplecto"]))
    if not checks:
        raise ConfigurationError("checks must be non-empty")
    for c in checks:
        if c not in ALL_CHECKS and c != "fixture":
            raise ConfigurationError(f"unknown check {c!r}")
    tols = dict(d.get("tolerances", {}))
    for k in tols:
        if k not in DEFAULT_TOLERANCES:
            raise ConfigurationError(f"unknown tolerance class {k!r}")
    try:
        seed = int(d.get("seed", 0))
        samples = int(d.get("samples", 20))
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"seed/samples must be integers: {exc}") from exc
    if samples < 1:
        raise ConfigurationError("samples must be positive")
    return RunConfig(
        algebra=spec,
        c_entries=entries,
        checks=checks,
        seed=seed,
        tolerances=tols,
        output_path=d.get("output_path"),
        samples=samples,
    )


def _entry_json(e):
    if isinstance(e, Fraction):
        return str(e) if e.denominator != 1 else int(e)
    c = complex(e)
    return {"re": c.real, "im": c.imag}


def _res(value: float, tol: float, kind: str = "max") -> dict:
    ok = value <= tol if kind == "max" else value >= tol
    return {"value": float(value), "tol": float(tol), "kind": kind, "pass": bool(ok)}


def _section_pass(section: dict) -> bool:
    ok = True
    for v in section.values():
        if isinstance(v, dict) and "pass" in v and isinstance(v["pass"], bool):
            ok = ok and v["pass"]
    return ok


class _Context:
    """Lazily built shared objects for one run."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.algebra = build_algebra(config.algebra)
        self._split = None
        self._rs = None
        self._data = None

    @property
    def real_entries(self):
        out = []
        for e in self.config.c_entries:
            if isinstance(e, Fraction):
                out.append(e)
            else:
                return None
        return tuple(out)

    @property
    def split(self):
        if self._split is None:
            self._split = cartan_split(self.algebra)
        return self._split

    @property
    def rs(self):
        if self._rs is None:
            self._rs = restricted_roots(self.algebra, maximal_abelian(self.algebra, self.split))
        return self._rs

    @property
    def data(self):
        if self._data is None:
            entries = self.real_entries
            if entries is None:
                raise ConfigurationError("this check needs a real (hyperbolic) diagonal c")
            self._data = hyperbolic_data(self.algebra, self.rs, chamber_sort(entries))
        return self._data


def check_roots(ctx: _Context, cfg: RunConfig, rng) -> dict:
    rs = ctx.rs
    grading = 0.0
    for a in rs.roots:
        for b in rs.roots:
            target = a.weights + b.weights
            match = [r for r in rs.roots if tuple(r.weights) == tuple(target)]
            if not np.any(target):
                span = rs.zero_coords.T
            elif match:
                span = match[0].space_coords.T
            else:
                span = np.zeros((ctx.algebra.dim, 0))
            Q, _ = np.linalg.qr(span) if span.shape[1] else (span, None)
            for X in a.space_basis:
                for Y in b.space_basis:
                    v = ctx.algebra.coords(ctx.algebra.bracket(X, Y))
                    resid = v if span.shape[1] == 0 else v - Q @ (Q.T @ v)
                    grading = max(grading, float(np.max(np.abs(resid))))
    theta_pair = 0.0
    Th = ctx.algebra.theta_matrix
    for r in rs.roots:
        neg = rs.negative_of(r)
        Q, _ = np.linalg.qr(neg.space_coords.T)
        for x in r.space_coords:
            v = Th @ x
            theta_pair = max(theta_pair, float(np.max(np.abs(v - Q @ (Q.T @ v)))))
    dims_ok = ctx.algebra.dim == rs.zero_coords.shape[0] + sum(r.multiplicity for r in rs.roots)
    section = {
        "roots": [
            {"alpha": [int(w) for w in r.weights], "mult": int(r.multiplicity)} for r in rs.roots
        ],
        "dim_m": int(rs.m_coords.shape[0]),
        "dim_a": int(rs.rank),
        "dimension_bookkeeping": {"value": 0.0 if dims_ok else 1.0, "tol": 0.5, "kind": "max", "pass": dims_ok},
        "bracket_grading": _res(grading, cfg.tol("decomposition")),
        "theta_pairing": _res(theta_pair, cfg.tol("decomposition")),
        "k_from_roots": _res(k_from_roots_check(rs, ctx.split), cfg.tol("decomposition")),
    }
    section["pass"] = _section_pass(section)
    return section


def check_parabolic(ctx: _Context, cfg: RunConfig, rng) -> dict:
    data = ctx.data
    alg = ctx.algebra
    ortho = 0.0
    K = alg.killing_matrix
    for v in np.eye(alg.dim)[list(data.b_indices)]:
        for x in data.p_filtration_coords:
            ortho = max(ortho, abs(float(v @ K @ x)))
    half = data.n_dim * 2 == alg.dim - len(data.z_indices)
    # Ad of the compact stabilizer preserves each eigenvalue level
    zk = z_k_coords(data)
    ad_inv = 0.0
    for x in zk:
        Y = alg.from_coords(x)
        m = scipy.linalg.expm(float(rng.uniform(-1, 1)) * Y)
        m_inv = np.linalg.inv(m)
        for block in data.blocks:
            idx = [data.b_indices[j] for j in block]
            span = np.eye(alg.dim)[idx].T
            Q, _ = np.linalg.qr(span)
            for j in block:
                v = alg.coords(m @ data.n_basis[j] @ m_inv)
                ad_inv = max(ad_inv, float(np.max(np.abs(v - Q @ (Q.T @ v)))))
    section = {
        "dim_z": len(data.z_indices),
        "dim_n": data.n_dim,
        "eigenvalues": [[nu, dj] for (nu, dj) in data.levels],
        "N0": data.N0,
        "killing_n_vs_P": _res(ortho, cfg.tol("structural")),
        "half_dimension": {"value": 0.0 if half else 1.0, "tol": 0.5, "kind": "max", "pass": half},
        "stabilizer_invariance": _res(ad_inv, cfg.tol("decomposition")),
    }
    section["pass"] = _section_pass(section)
    return section


def check_kk(ctx: _Context, cfg: RunConfig, rng) -> dict:
    alg = ctx.algebra
    c = alg.element_from_entries([complex(e) for e in ctx.config.c_entries])
    anti = inv = closed = 0.0
    for _ in range(max(5, cfg.samples // 4)):
        g = scipy.linalg.expm(random_element(alg, rng, 0.4))
        pt = orbit_point(alg, c, g, validate=False)
        X, Y, Z = (random_element(alg, rng) for _ in range(3))
        anti = max(anti, abs(kk_eval(alg, pt, X, Y) + kk_eval(alg, pt, Y, X)))
        anti = max(anti, abs(kk_eval(alg, pt, X, X)))
        closed = max(closed, closedness_check(alg, pt, X, Y, Z))
        h = scipy.linalg.expm(random_element(alg, rng, 0.4))
        pt2 = orbit_point(alg, c, h @ g, validate=False)
        h_inv = np.linalg.inv(h)
        inv = max(
            inv,
            abs(kk_eval(alg, pt2, h @ X @ h_inv, h @ Y @ h_inv) - kk_eval(alg, pt, X, Y)),
        )
    scale = max(1.0, float(np.max(np.abs(alg.killing_matrix))))
    section = {
        "antisymmetry": _res(anti, cfg.tol("structural") * scale),
        "invariance": _res(inv, cfg.tol("decomposition") * scale * 10),
        "closedness": _res(closed, cfg.tol("decomposition") * scale),
    }
    real = ctx.real_entries
    if real is not None:
        data = ctx.data
        iso = fiber_isotropy_check(alg, data)
        for _ in range(3):
            iso = max(iso, fiber_isotropy_check(alg, data, scipy.linalg.expm(random_element(alg, rng, 0.4))))
        section["fiber_isotropy"] = _res(iso, cfg.tol("decomposition"))
        section["nondegeneracy"] = _res(nondegeneracy_check(alg, data), cfg.tol("eigen"), kind="min")
    if alg.is_complex:
        verdict = exactness_verdict(alg, ctx.split, [complex(e) for e in ctx.config.c_entries])
        section["exactness_verdict"] = verdict
        section["re_duality_gap"] = _res(
            re_dual_gap(alg, [complex(e) for e in ctx.config.c_entries]), cfg.tol("structural")
        )
        section["killing_realified_gap"] = _res(killing_compare_realified(alg), cfg.tol("decomposition"))
        which = "re" if verdict["re_exact"] else ("im" if verdict["im_exact"] else None)
        if which:
            section["k_lagrangian"] = _res(
                k_orbit_lagrangian_check(alg, ctx.split, c, which), cfg.tol("structural")
            )
    else:
        section["k_lagrangian"] = _res(
            k_orbit_lagrangian_check(alg, ctx.split, c, "real-form"), cfg.tol("structural")
        )
    section["pass"] = _section_pass(section)
    return section


def check_flow(ctx: _Context, cfg: RunConfig, rng) -> dict:
    data = ctx.data
    n = data.n_dim
    count = cfg.samples
    V = rng.standard_normal((count, n))
    U0 = rng.standard_normal((count, n))
    gap = 0.0
    degree_hist: dict[int, int] = {}
    tail = 0.0
    for t in (1.0, -2.0):
        num = flow_numeric(data, V, U0, t)
        for i in range(count):
            fp = flow_exact(data, V[i], U0[i])
            gap = max(gap, float(np.max(np.abs(fp.eval(t) - num[i]))))
            degree_hist[fp.degree] = degree_hist.get(fp.degree, 0) + 1
            if fp.degree > fp.degree_bound:
                tail = max(tail, 1.0)
    commute = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            commute = max(commute, commute_residual(data, np.eye(n)[i], np.eye(n)[j]))
    roundtrip = 0.0
    for i in range(min(count, 25)):
        g = exp_H(data, V[i])
        roundtrip = max(roundtrip, float(np.max(np.abs(invert_exp_H(data, g) - V[i]))))
    section = {
        "max_oracle_gap": _res(gap, cfg.tol("eigen")),
        "max_commute_residual": _res(commute, cfg.tol("decomposition")),
        "max_roundtrip_residual": _res(roundtrip, cfg.tol("decomposition")),
        "degree_histogram": {str(k): v for k, v in sorted(degree_hist.items())},
        "degree_bound_violations": _res(tail, 0.5),
    }
    section["pass"] = _section_pass(section)
    return section


def check_symplecto(ctx: _Context, cfg: RunConfig, rng) -> dict:
    data = ctx.data
    alg = ctx.algebra
    n = data.n_dim
    pull = bundle = section_res = liou = zero_gap = 0.0
    for _ in range(cfg.samples):
        k = random_in_K(alg, rng).matrix
        pt = cotangent_point(data, k, 0.8 * rng.standard_normal(n))
        pull = max(pull, pullback_residual(data, pt))
        bc = project_pi(data, phi_lambda(data, pt, validate=False))
        bundle = max(bundle, coset_gap(data, bc.k, pt.k))
        zpt = phi_lambda(data, cotangent_point(data, k, np.zeros(n)), validate=False)
        zero_gap = max(zero_gap, float(np.max(np.abs(zpt.w - k @ data.c @ k.T))))
    for _ in range(max(2, cfg.samples // 5)):
        k = random_in_K(alg, rng).matrix
        pt = cotangent_point(data, k, 0.8 * rng.standard_normal(n))
        liou = max(liou, liouville_fd_gap(data, pt))
    section_res = section_lagrangian_check(data, rng, samples=max(3, cfg.samples // 4))
    out = {
        "pullback_max_residual": _res(pull, cfg.tol("finite_difference")),
        "bundle_residual": _res(bundle, cfg.tol("decomposition")),
        "section_residual": _res(section_res, cfg.tol("decomposition")),
        "zero_section_gap": _res(zero_gap, cfg.tol("decomposition")),
        "liouville_fd_gap": _res(liou, cfg.tol("finite_difference")),
        "samples": cfg.samples,
        "seed": cfg.seed,
    }
    out["pass"] = _section_pass(out)
    return out


def check_arnold(ctx: _Context, cfg: RunConfig, rng) -> dict:
    """End-to-end scenario: realified sl(n, C), regular real diagonal c."""
    alg = ctx.algebra
    if not alg.is_complex:
        raise ConfigurationError("the arnold scenario needs the complex-realified family")
    entries = ctx.real_entries
    if entries is None:
        raise ConfigurationError("the arnold scenario needs real diagonal entries")
    if len(set(entries)) != len(entries):
        raise ConfigurationError("the arnold scenario needs a regular element")
    # ad(c) spectrum must be the pair differences, each seen twice when realified
    c = alg.element_from_entries(entries)
    ev = np.sort_complex(np.linalg.eigvals(alg.ad_matrix_of(c)))
    expect = []
    for a in entries:
        for b in entries:
            if a != b:
                expect.extend([float(a - b)] * 2)
    expect.extend([0.0] * (alg.dim - len(expect)))
    expect = np.sort_complex(np.array(expect, dtype=complex))
    spec_gap = float(np.max(np.abs(ev - expect)))
    verdict = exactness_verdict(alg, ctx.split, [complex(e) for e in entries])
    # Re of the holomorphic form is half the realified form (B_R = 2 Re B_C)
    data = ctx.data
    scale_gap = 0.0
    pt = orbit_point(alg, c, scipy.linalg.expm(random_element(alg, rng, 0.3)), validate=False)
    for _ in range(10):
        X, Y = random_element(alg, rng), random_element(alg, rng)
        om = kk_eval(alg, pt, X, Y)
        om_c = complex_trace_form(alg, pt.w, alg.bracket(X, Y))
        scale_gap = max(scale_gap, abs(om_c.real - om / 2.0))
    sympl = check_symplecto(ctx, cfg, rng)
    out = {
        "ad_spectrum_gap": _res(spec_gap, cfg.tol("decomposition")),
        "re_exact": verdict["re_exact"],
        "im_exact": verdict["im_exact"],
        "re_exact_ok": {"value": 0.0 if verdict["re_exact"] else 1.0, "tol": 0.5, "kind": "max", "pass": verdict["re_exact"]},
        "re_omega_scale_gap": _res(scale_gap, cfg.tol("decomposition") * 100),
        "symplecto": sympl,
    }
    out["pass"] = _section_pass(out) and sympl["pass"]
    return out


CHECK_FUNCS = {
    "roots": check_roots,
    "parabolic": check_parabolic,
    "kk": check_kk,
    "flow": check_flow,
    "symplecto": check_symplecto,
    "arnold": check_arnold,
}


def run(config: RunConfig) -> dict:
    """Execute the configured checks; returns {body, meta} with a stable body."""
    t0 = time.perf_counter()
    ctx = _Context(config)
    checks = {}
    for name in config.checks:
        if name == "fixture":
            continue
        rng = np.random.default_rng(config.seed + sum(map(ord, name)))
        checks[name] = CHECK_FUNCS[name](ctx, config, rng)
    body = {
        "config": {
            "algebra": {"family": config.algebra.family, "n": config.algebra.n, "field": config.algebra.field},
            "c": [_entry_json(e) for e in config.c_entries],
            "checks": list(config.checks),
        },
        "seed": config.seed,
        "versions": {"lieorb": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
        "conventions": CONVENTIONS,
        "checks": checks,
        "pass": all(c.get("pass", False) for c in checks.values()) if checks else True,
    }
    return {"body": body, "meta": {"runtime_s": time.perf_counter() - t0}}


def emit_fixture(config: RunConfig) -> dict:
    """Golden structural data: byte-stable, seed-independent."""
    ctx = _Context(config)
    alg = ctx.algebra
    rs = ctx.rs
    fixture = {
        "algebra": {"family": config.algebra.family, "n": config.algebra.n, "field": config.algebra.field},
        "dim": alg.dim,
        "structure_constants": alg.structure.tolist(),
        "killing_matrix": alg.killing_matrix.tolist(),
        "roots": [
            {
                "alpha": [int(w) for w in r.weights],
                "functional": r.functional.tolist(),
                "mult": int(r.multiplicity),
            }
            for r in rs.roots
        ],
        "conventions": CONVENTIONS,
    }
    if ctx.real_entries is not None:
        data = ctx.data
        fixture["eigenvalue_ladder"] = [[nu, dj] for (nu, dj) in data.levels]
        fixture["N0"] = data.N0
    return fixture


def dumps_report(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="lieorb", description=__doc__)
    parser.add_argument(
        "subcommand",
        choices=["roots", "parabolic", "kk-check", "flow-check", "symplecto-verify", "arnold", "fixture"],
    )
    parser.add_argument("--config", required=True, help="path to JSON run configuration")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None, help="write the report here instead of stdout")
    args = parser.parse_args(argv)

    sub_to_check = {
        "roots": "roots",
        "parabolic": "parabolic",
        "kk-check": "kk",
        "flow-check": "flow",
        "symplecto-verify": "symplecto",
        "arnold": "arnold",
    }
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        config = parse_config(raw)
        env_seed = os.environ.get("LIEORB_SEED")
        if env_seed is not None:
            config.seed = int(env_seed)
        if args.seed is not None:
            config.seed = args.seed
        if args.subcommand == "fixture":
            report = emit_fixture(config)
        else:
            config.checks = (sub_to_check[args.subcommand],)
            report = run(config)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (InconsistencyError, DecompositionError) as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return 3

    text = dumps_report(report)
    out_path = args.out or config.output_path
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.subcommand == "fixture":
        return 0
    return 0 if report["body"]["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
