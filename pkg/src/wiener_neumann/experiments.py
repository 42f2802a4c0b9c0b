"""Experiment drivers behind the CLI commands.

Each driver returns a list of check records and an optional plot series.  A
record is ``{name, theorem, statistic, threshold, pass}`` with
``pass == (statistic <= threshold)``; lower bounds are encoded by negating both
sides.
"""
from __future__ import annotations

import math

import numpy as np
import sympy as sp

from . import ball
from .config import ExperimentConfig, polynomial_from_spec
from .divergence import (CylVectorField, adjointness_residual, bilinear_identity_residual,
                         boundary_hessian_identity, bulk_rule, divergence, divergence_norm,
                         gradient_field, halfspace_tangent_field, ibp_residuals, rotation_field,
                         sphere_tangent_field, z_norm)
from .domains import half_space, unit_ball, whole_space
from .extension import (approximation_report, corrupted_coefficients, extend, matching_report,
                        operator_norm_probe, solve_coefficients)
from .gaussian import CylFunction, GaussianModel
from .probes import LCG, neumann_polynomial, random_polynomial, random_polynomial_expr
from .solver import (TWO_SQRT2, DiscreteProblem, SpectralDiscretization, StripDiscretization,
                     apply_L, estimate_report, graph_norm_check, penalization_sweep, solve)
from .weights import Weight, my_gradient, my_hessian, my_value, prox
from .weights import zero_weight

TAGS = {
    "domain": "domain-hypotheses",
    "weight": "weight-hypotheses",
    "ibp": "gaussian-ibp-with-traces",
    "norms": "sobolev-norm-definitions",
    "series": "operator-series",
    "my1": "moreau-yosida-first-order",
    "my2": "moreau-yosida-second-order",
    "bilinear": "divergence-bilinear-identities",
    "hessian": "boundary-hessian-identity",
    "divergence": "weighted-divergence",
    "penalization": "penalized-weights",
    "maxreg": "maximal-regularity",
    "neumann": "neumann-condition",
    "graph": "graph-norm-equivalence",
    "whole": "whole-space-domain-characterization",
    "halfspace": "halfspace-domain-characterization",
    "extdomain": "extension-domain-characterization",
    "extension": "halfspace-extension",
    "approx": "cylindrical-approximation",
    "ball": "ball-example",
}


def record(name: str, tag: str, statistic, threshold) -> dict:
    stat = float(statistic)
    thr = float(threshold)
    return {"name": name, "theorem": TAGS[tag], "statistic": stat, "threshold": thr,
            "pass": bool(np.isfinite(stat) and stat <= thr)}


def _rng(cfg: ExperimentConfig) -> LCG:
    return LCG(cfg.seed)


def hypothesis_records(cfg: ExperimentConfig) -> list[dict]:
    recs = []
    if not cfg.domain.is_whole_space:
        cfg.domain.check_hypotheses()
        recs.append(record("domain-convex-nondegenerate", "domain", 0.0, 0.0))
    worst = cfg.weight.check_convexity()
    recs.append(record("weight-convexity", "weight", max(0.0, -worst), 1e-10))
    return recs


# integration by parts ------------------------------------------------------

def run_ibp(cfg: ExperimentConfig):
    rng = _rng(cfg)
    count, degree = cfg.param("count", 30), cfg.param("degree", 4)
    tol = cfg.param("tolerance", 1e-6)
    worst = 0.0
    for _ in range(count):
        phi = random_polynomial(cfg.model, degree, rng)
        res, w12 = ibp_residuals(phi, cfg.weight, cfg.domain, with_norm=True)
        worst = max(worst, float(np.max(np.abs(res))) / (1 + w12))
    return hypothesis_records(cfg) + [record("ibp-residual", "ibp", worst, tol)], None


# Moreau-Yosida -------------------------------------------------------------

def convex_probe(model: GaussianModel, rng: LCG) -> CylFunction:
    """Linear plus positive semidefinite quadratic plus a quartic of the ambient norm."""
    n = model.dim
    xi = sp.Matrix(model.symbols)
    B = rng.uniform((n, n), -1.0, 1.0)
    S = B.T @ B / n
    lin = rng.coefficients(n)
    beta = float(rng.uniform())
    quad = (xi.T * sp.Matrix(S.tolist()) * xi)[0] / 2
    sq = sum(float(l) * s**2 for l, s in zip(model.spectrum, model.symbols))
    expr = sum(float(c) * s for c, s in zip(lin, model.symbols)) + quad + sp.Float(beta) * sq**2 / 2
    return CylFunction.from_expr(sp.expand(expr), model)


def run_my(cfg: ExperimentConfig):
    rng = _rng(cfg)
    model = cfg.model
    n = model.dim
    count = cfg.param("count", 10)
    alpha = cfg.param("alpha", 0.5)
    alphas = cfg.param("alphas", [1e-1, 1e-2, 1e-3])
    env_gap = mini = nonexp = grad_err = 0.0
    violations = 0
    kkt = 0.0
    for _ in range(count):
        f = convex_probe(model, rng)
        X = rng.normal((4, n)) * model.sqrt_spectrum
        res = prox(f, X, alpha)
        kkt = max(kkt, res.kkt_residual)
        env_gap = max(env_gap, float(np.max(res.envelope - f(X))))
        for x, P in zip(X, res.minimizer):
            hs = rng.normal((100, n)) * model.sqrt_spectrum
            lhs = f(x + P)
            rhs = f(x + hs) + np.sum(model.h_coords(P) * model.h_coords(hs - P), axis=1) / alpha
            mini = max(mini, float(np.max(lhs - rhs)) / max(1.0, abs(float(lhs))))
        H = rng.normal((4, n)) * model.sqrt_spectrum * 0.5
        P2 = prox(f, X + H, alpha).minimizer
        ratio = np.linalg.norm(model.h_coords(P2 - res.minimizer), axis=1) / np.linalg.norm(model.h_coords(H), axis=1)
        nonexp = max(nonexp, float(np.max(ratio)))
        g = my_gradient(f, X, alpha)
        eps = 1e-4
        fd = np.stack([(my_value(f, X + eps * model.h_basis(i), alpha) - my_value(f, X - eps * model.h_basis(i), alpha))
                       / (2 * eps) for i in range(n)], axis=1)
        grad_err = max(grad_err, float(np.max(np.linalg.norm(g - fd, axis=1) / np.maximum(np.linalg.norm(fd, axis=1), 1e-12))))
        errs = np.array([np.linalg.norm(my_hessian(f, X, a) - f.hess(X), axis=(1, 2)) for a in alphas])
        violations += int(np.sum(np.diff(errs, axis=0) >= 0))
    return hypothesis_records(cfg) + [
        record("prox-kkt-residual", "my1", kkt, 1e-9),
        record("envelope-bound", "my1", env_gap, 1e-12),
        record("minimizer-characterization", "my1", mini, 1e-9),
        record("prox-nonexpansive", "my1", nonexp, 1 + 1e-9),
        record("gradient-formula", "my1", grad_err, 1e-5),
        record("hessian-convergence-violations", "my2", violations, 0),
    ], None


# divergence ----------------------------------------------------------------

def random_tangent_field(cfg: ExperimentConfig, rng: LCG, degree: int = 2) -> CylVectorField:
    d, model = cfg.domain, cfg.model
    if d.kind == "half_space":
        coeffs = [random_polynomial(model, degree, rng) for _ in range(model.dim - 1)]
        return halfspace_tangent_field(d, coeffs, random_polynomial(model, 1, rng))
    if d.kind == "unit_ball":
        pairs = {(i, j): random_polynomial(model, degree, rng)
                 for i in range(model.dim) for j in range(i + 1, model.dim)}
        return sphere_tangent_field(d, pairs)
    return CylVectorField(model, [(random_polynomial(model, degree, rng), i) for i in range(model.dim)])


def run_div(cfg: ExperimentConfig):
    rng = _rng(cfg)
    d, w, model = cfg.domain, cfg.weight, cfg.model
    count = cfg.param("count", 20)
    adj = bound = ident = 0.0
    for _ in range(count):
        phi = random_tangent_field(cfg, rng)
        f = random_polynomial(model, 3, rng)
        adj = max(adj, abs(adjointness_residual(f, phi, w, d)))
        zn = z_norm(phi, w, d)
        if zn > 0:
            bound = max(bound, divergence_norm(phi, w, d) / zn)
        if d.kind == "unit_ball":
            ident = max(ident, boundary_hessian_identity(phi, d))
    bil = 0.0
    for _ in range(max(1, count // 4)):
        f = random_polynomial(model, 2, rng)
        g = random_polynomial(model, 2, rng)
        for h in range(model.dim):
            for k in range(model.dim):
                bil = max(bil, abs(bilinear_identity_residual(f, g, h, k, w, d)))
    recs = hypothesis_records(cfg) + [
        record("adjointness", "divergence", adj, 1e-6),
        record("divergence-bound", "divergence", bound, 1.0),
        record("bilinear-identity", "bilinear", bil, 1e-6),
    ]
    if d.kind == "unit_ball" and model.dim >= 2:
        recs.append(record("boundary-hessian-identity", "hessian", ident, 1e-7))
        rot = [(i, j) for i in range(model.dim) for j in range(i + 1, model.dim)
               if model.spectrum[i] == model.spectrum[j]]
        worst = rot_ident = 0.0
        nodes = d.bulk_rule().nodes
        for i, j in rot:
            field = rotation_field(model, i, j, "scaled")
            worst = max(worst, float(np.max(np.abs(divergence(field, zero_weight(model), d)(nodes)))))
            rot_ident = max(rot_ident, boundary_hessian_identity(field, d))
        if rot:
            recs.append(record("rotation-field-divergence", "divergence", worst, 1e-10))
            recs.append(record("rotation-field-hessian-identity", "hessian", rot_ident, 1e-9))
    return recs, None


# solver --------------------------------------------------------------------

def _lams(cfg, default):
    lam = cfg.param("lam", default)
    return [float(v) for v in (lam if isinstance(lam, list) else [lam])]


def _disc(cfg: ExperimentConfig, mesh=None):
    if cfg.domain.is_whole_space:
        return SpectralDiscretization(cfg.param("hermite_degree", 8))
    return StripDiscretization(mesh=mesh or cfg.param("mesh", 0.025), cutoff=cfg.param("cutoff", 8.0),
                               tangential_degree=cfg.param("tangential_degree", 8))


def _data(cfg: ExperimentConfig, rng: LCG) -> CylFunction:
    spec = cfg.param("f")
    if spec is not None:
        return polynomial_from_spec(spec, cfg.model)
    return random_polynomial(cfg.model, cfg.param("degree", 3), rng)


def run_solve(cfg: ExperimentConfig):
    rng = _rng(cfg)
    recs = hypothesis_records(cfg)
    f = _data(cfg, rng)
    out = {}
    for lam in _lams(cfg, 1.0):
        res = solve(DiscreteProblem(cfg.model, cfg.weight, cfg.domain, lam, f, _disc(cfg)))
        scale = max(res.norms["f_l2"], 1e-300)
        recs.append(record(f"weak-residual-lam{lam:g}", "maxreg", res.weak_residual / scale, 1e-9))
        recs.append(record(f"resolvent-contraction-lam{lam:g}", "maxreg",
                           lam * res.norms["l2"] / scale, 1 + 1e-12))
        out[f"{lam:g}"] = {"norms": res.norms, "neumann_residual": res.neumann_residual}
    u = random_polynomial(cfg.model, 3, rng)
    if cfg.weight.U is not None or cfg.weight.is_zero:
        diff = sp.expand(apply_L(u, cfg.weight).expr - divergence(gradient_field(u), cfg.weight).expr)
        stat = 0.0 if diff == 0 else float(max(abs(float(c)) for c in sp.Poly(diff, *cfg.model.symbols).coeffs()))
        recs.append(record("series-equals-divergence-of-gradient", "series", stat, 1e-12))
    return recs, {"solutions": out}


def neumann_order(cfg: ExperimentConfig, f: CylFunction, lam: float, meshes) -> tuple[float, list]:
    resid = []
    for h in meshes:
        res = solve(DiscreteProblem(cfg.model, cfg.weight, cfg.domain, lam, f, _disc(cfg, h)))
        resid.append(res.neumann_residual)
    orders = [math.log2(a / b) / math.log2(h1 / h2)
              for a, b, h1, h2 in zip(resid, resid[1:], meshes, meshes[1:])]
    return min(orders), resid


def run_estimates(cfg: ExperimentConfig):
    rng = _rng(cfg)
    count = cfg.param("count", 50)
    tol = cfg.param("tolerance", 5e-3)
    thr = cfg.param("threshold", 1 + tol)
    worst = np.zeros(3)
    for lam in _lams(cfg, [0.5, 1.0, 4.0]):
        for _ in range(count):
            f = _data(cfg, rng)
            res = solve(DiscreteProblem(cfg.model, cfg.weight, cfg.domain, lam, f, _disc(cfg)))
            worst = np.maximum(worst, estimate_report(res)["ratios"])
    recs = hypothesis_records(cfg) + [
        record("resolvent-l2-ratio", "maxreg", worst[0], thr),
        record("resolvent-gradient-ratio", "maxreg", worst[1], thr),
        record("second-order-ratio", "maxreg", worst[2], thr),
    ]
    series = None
    if not cfg.domain.is_whole_space:
        meshes = cfg.param("meshes", [0.1, 0.05, 0.025])
        order, resid = neumann_order(cfg, random_polynomial(cfg.model, 3, LCG(cfg.seed + 1)), 1.0, meshes)
        recs.append(record("neumann-residual-order", "neumann", -order, -1.8))
        series = {"columns": ["mesh", "neumann_residual"], "rows": list(zip(meshes, resid))}
    return recs, series


def run_penalize(cfg: ExperimentConfig):
    d, model = cfg.domain, cfg.model
    if d.kind != "half_space":
        raise ValueError("penalize needs a half-space domain")
    alphas = cfg.param("alphas", [0.5, 0.2, 0.1, 0.05, 0.02])
    lam = _lams(cfg, 1.0)[0]
    spec = cfg.param("f")
    if spec is not None:
        f = polynomial_from_spec(spec, model)
    else:
        eta1 = sum(float(c) * s for c, s in zip(d.frame[:, 0], model.symbols))
        f = CylFunction.from_expr(eta1, model)
    mesh = cfg.param("reference_mesh", 0.0025 if model.dim == 1 else 0.0125)
    p = DiscreteProblem(model, cfg.weight, d, lam, f, _disc(cfg, mesh))
    sweep = penalization_sweep(p, alphas)
    rows = sweep["rows"]
    errs = [r["error"] for r in rows]
    bad = sum(1 for a, b in zip(errs, errs[1:]) if not b < a)
    tol = cfg.param("tolerance", 5e-3)
    recs = hypothesis_records(cfg) + [
        record("error-strictly-decreasing-violations", "penalization", bad, 0),
        record("final-relative-error", "penalization", rows[-1]["relative_error"], cfg.param("threshold", 0.05)),
        record("penalized-estimates-max-ratio", "maxreg", max(max(r["ratios"]) for r in rows), 1 + tol),
    ]
    series = {"columns": ["alpha", "error", "relative_error"],
              "rows": [(r["alpha"], r["error"], r["relative_error"]) for r in rows]}
    return recs, series


def run_domain_norms(cfg: ExperimentConfig):
    rng = _rng(cfg)
    d = cfg.domain
    count, degree = cfg.param("count", 20), cfg.param("degree", 4)
    lower = upper = 0.0
    for _ in range(count):
        u = random_polynomial(cfg.model, degree, rng) if d.is_whole_space else neumann_polynomial(d, degree, rng)
        chk = graph_norm_check(u, cfg.weight, d)
        lower = max(lower, chk["lower_ratio"])
        upper = max(upper, chk["upper_ratio"])
    tag = "whole" if d.is_whole_space else "halfspace"
    return hypothesis_records(cfg) + [
        record("graph-below-sobolev", "graph", lower, 1 + 1e-8),
        record("sobolev-below-graph", tag, upper, TWO_SQRT2 * (1 + 1e-8)),
    ], None


# extension -----------------------------------------------------------------

def boundary_probes(d, count: int = 16, spread: float = 2.5):
    """Points on the hyperplane with tangential coordinates spread over ``[-spread, spread]``."""
    n = d.model.dim
    if n == 1:
        eta = np.array([[d.s]])
    else:
        t = np.linspace(-spread, spread, count)
        grids = np.meshgrid(*([t] * (n - 1)), indexing="ij")
        tang = np.stack([g.ravel() for g in grids], axis=1)
        eta = np.concatenate([np.full((tang.shape[0], 1), d.s), tang], axis=1)
    return d.model.to_ambient(eta @ d.frame.T)


def run_extension(cfg: ExperimentConfig):
    d, model = cfg.domain, cfg.model
    if d.kind != "half_space":
        raise ValueError("extension-check needs a half-space domain")
    rng = _rng(cfg)
    coeffs = solve_coefficients(d.r)
    res = coeffs.residuals()
    expected_b = np.array([1 - 1 / j**2 for j in range(1, 8)])
    count, degree = cfg.param("count", 20), cfg.param("degree", 4)
    probes = boundary_probes(d)
    jumps = np.zeros(3)
    tests = []
    for _ in range(count):
        f = random_polynomial(model, degree, rng)
        tests.append(f)
        rep = matching_report(extend(f, coeffs, d), probes)
        jumps = np.maximum(jumps, [rep["c0"], rep["c1"], rep["c2"]])
    eta1 = sum(float(c) * s for c, s in zip(d.frame[:, 0], model.symbols))
    curved = CylFunction.from_expr(eta1**2 + random_polynomial_expr(model.symbols, 1, rng), model)
    bad = matching_report(extend(curved, corrupted_coefficients(coeffs), d), probes)["c2"]
    orders = cfg.param("orders", [model.quad_order, model.quad_order + 16])
    K = [operator_norm_probe(tests, coeffs, d, order=q)["K"] for q in orders]
    stability = abs(K[1] - K[0]) / K[0]
    # restriction and linearity on sample points
    X = rng.normal((64, model.dim)) * model.sqrt_spectrum
    f, g = tests[0], tests[1]
    ef, eg, efg = extend(f, coeffs, d), extend(g, coeffs, d), extend(f + g, coeffs, d)
    inside = d.contains(X)
    restrict = float(np.max(np.abs(ef(X[inside]) - f(X[inside])))) if inside.any() else 0.0
    # outer branches sum reflected values with weights of size sum|a_j|
    scale = np.maximum(1.0, np.abs(ef(X)) + np.abs(eg(X))) * np.where(inside, 1.0, np.sum(np.abs(coeffs.a)))
    linear = float(np.max(np.abs(efg(X) - ef(X) - eg(X)) / scale))
    recs = [
        record("coefficient-residual", "extension", max(res["exact"]), 1e-12),
        record("coefficient-residual-double-relative", "extension", max(res["relative_double"]), 1e-12),
        record("b-vector", "extension", float(np.max(np.abs(coeffs.b - expected_b))), 1e-15),
        record("condition-number-finite", "extension", coeffs.condition_number, 1e12),
        record("c0-jump", "extension", jumps[0], 1e-6),
        record("c1-jump", "extension", jumps[1], 1e-6),
        record("c2-jump", "extension", jumps[2], 1e-6),
        record("corrupted-c2-jump", "extension", -bad, -1e-3),
        record("operator-norm-stability", "extdomain", stability, 0.1),
        record("restriction-identity", "extension", restrict, 0.0),
        record("linearity", "extension", linear, 1e-12),
    ]
    series = {"columns": ["quad_order", "K"], "rows": list(zip(orders, K))}
    if model.dim >= 2:
        u = neumann_polynomial(d, 4, rng)
        app = approximation_report(u, coeffs, d)
        defect = max(r["neumann_defect"] for r in app["rows"])
        recs.append(record("approximant-neumann-defect", "approx", defect, 1e-12))
        recs.append(record("approximant-error-decreasing", "approx", 0.0 if app["decreasing"] else 1.0, 0.0))
        series["approximants"] = app["rows"]
    return recs, series


# ball ------------------------------------------------------------------------

def run_ball(cfg: ExperimentConfig):
    spectrum = cfg.model.spectrum.tolist() if cfg.model.dim == 2 else [1.0, 4.0]
    tol = cfg.param("tolerance", 1e-8)
    iso = GaussianModel([1.0, 1.0], cfg.model.quad_order)
    d_iso = unit_ball(iso)
    field = rotation_field(iso, 0, 1, "scaled")
    div = divergence(field, zero_weight(iso), d_iso)
    div_stat = float(np.max(np.abs(div(d_iso.bulk_rule().nodes))))
    ident = boundary_hessian_identity(field, d_iso)
    y = d_iso.boundary_rule().nodes
    v = field.values(y)
    lhs = float(np.max(np.abs(np.einsum("ni,nij,nj->n", v, d_iso.G.hess(y), v) - 2.0)))
    expr = ball.ode_solution(spectrum)
    resid = ball.ode_residual(expr, spectrum)
    flow = ball.flow_variation(expr, spectrum, [[0.5, 0.5], [0.3, 0.7], [0.8, 0.1]])
    rays = [ball.ray_limit(expr, t) for t in (np.pi / 4, np.pi / 3)]
    curves = [ball.curve_limit(expr, spectrum, s) for s in (1.0, 2.0)]
    recs = [
        record("rotation-field-divergence", "ball", div_stat, 1e-10),
        record("rotation-field-identity", "ball", ident, 1e-9),
        record("rotation-field-hessian-form-equals-two", "ball", lhs, 1e-12),
        record("ode-residual", "ball", resid, tol),
        record("characteristic-constancy", "ball", flow, 1e-12),
        record("ray-limit-separation", "ball", -abs(rays[0] - rays[1]), -10 * tol),
        record("characteristic-limit-separation", "ball", -abs(curves[0] - curves[1]), -10 * tol),
    ]
    series = {"columns": ["path", "limit"],
              "rows": [("ray pi/4", rays[0]), ("ray pi/3", rays[1]),
                       ("curve level 1", curves[0]), ("curve level 2", curves[1])]}
    return recs, series


COMMANDS = {
    "ibp-check": run_ibp,
    "my-check": run_my,
    "div-check": run_div,
    "solve": run_solve,
    "estimates": run_estimates,
    "penalize": run_penalize,
    "domain-norms": run_domain_norms,
    "extension-check": run_extension,
    "ball-demo": run_ball,
}
