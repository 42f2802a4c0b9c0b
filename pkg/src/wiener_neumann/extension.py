"""Reflection-type extension of functions on a half-space to the whole space.

For ``G(x) = a.x - r`` with ``h = Q a`` the extension is

    Ef(x) = sum_j a_j f(x - (j+1) G(x) h / |h|_H^2) exp(-(c_j G + b_j G^2) / (2 |h|_H))

for ``G(x) > 0`` and ``f`` itself on the half-space.  The seven weights ``a_j``
make ``Ef`` twice continuously differentiable across the hyperplane.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy as sp

from .domains import LevelSetDomain
from .gaussian import CylFunction, GaussianModel, gauss_hermite_1d

J = np.arange(1, 8)
RICHARDSON_OFFSETS = (1e-3, 1e-4)


def b_values() -> list[Fraction]:
    return [1 - Fraction(1, j * j) for j in range(1, 8)]


def k_values() -> list[Fraction]:
    """``c_j / r``; the c-conditions are homogeneous in ``r``."""
    return [Fraction(2 * (j + 1), j * j) * (2 - Fraction(1, j * j)) for j in range(1, 8)]


def coefficient_rows(r_nonzero: bool = True) -> list[list[Fraction]]:
    b, k = b_values(), k_values()
    rows = [
        [Fraction(1)] * 7,
        [Fraction(j + 1) for j in range(1, 8)],
        [Fraction((j + 1) ** 2) for j in range(1, 8)],
        b,
    ]
    if r_nonzero:
        rows += [k, [kj * (j + 1) for kj, j in zip(k, range(1, 8))], [kj * kj for kj in k]]
    return rows


@dataclass(frozen=True)
class ReflectionCoefficients:
    """Weights ``a_j`` (exact rationals and doubles) with ``b_j``, ``c_j`` for offset ``r``."""

    r: float
    exact: tuple
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    c: np.ndarray = field(repr=False)
    condition_number: float = float("nan")

    def residuals(self) -> dict:
        """Constraint residuals of the exact weights and of their double roundings."""
        rows = coefficient_rows(self.r != 0)
        rhs = [1] + [0] * (len(rows) - 1)
        exact = [abs(float(sum(x * y for x, y in zip(row, self.exact)) - t)) for row, t in zip(rows, rhs)]
        rounded = [Fraction(float(v)) for v in self.exact]
        scale = [float(sum(abs(x * y) for x, y in zip(row, rounded))) for row in rows]
        floating = [abs(float(sum(x * y for x, y in zip(row, rounded)) - t)) / s
                    for row, t, s in zip(rows, rhs, scale)]
        if self.r != 0:
            # c-rows are reported against c = r k, as stated with the 1e-12 max|c| scaling
            cmax = float(np.max(np.abs(self.c)))
            for i in (4, 5, 6):
                exact[i] *= abs(self.r) ** (1 if i < 6 else 2) / max(cmax, 1e-300)
        return {"exact": exact, "relative_double": floating}

    def to_json(self) -> dict:
        return {"r": self.r, "a": self.a.tolist(), "a_exact": [str(v) for v in self.exact],
                "b": self.b.tolist(), "c": self.c.tolist(), "condition_number": self.condition_number}


def _exact_solve(rows, rhs):
    M = sp.Matrix([[sp.Rational(x.numerator, x.denominator) for x in row] for row in rows])
    v = sp.Matrix(rhs)
    if M.shape[0] == M.shape[1]:
        if M.det() == 0:
            raise RuntimeError("reflection system degenerate")
        sol = M.LUsolve(v)
    else:
        # minimum Euclidean norm solution of an underdetermined full-rank system
        G = M * M.T
        if G.det() == 0:
            raise RuntimeError("reflection system degenerate")
        sol = M.T * G.LUsolve(v)
    return tuple(Fraction(int(sp.fraction(s)[0]), int(sp.fraction(s)[1])) for s in sol)


def solve_coefficients(r: float) -> ReflectionCoefficients:
    """Solve the moment conditions for the weights ``a_j`` in exact arithmetic."""
    r = float(r)
    rows = coefficient_rows(r != 0)
    rhs = [1] + [0] * (len(rows) - 1)
    exact = _exact_solve(rows, rhs)
    A = np.array([[float(x) for x in row] for row in rows])
    cond = float(np.linalg.cond(A)) if r != 0 else float(np.linalg.cond(A @ A.T))
    k = np.array([float(v) for v in k_values()])
    return ReflectionCoefficients(
        r=r, exact=exact, a=np.array([float(v) for v in exact]),
        b=np.array([float(v) for v in b_values()]), c=r * k, condition_number=cond)


def corrupted_coefficients(coeffs: ReflectionCoefficients, defect: float = 0.1) -> ReflectionCoefficients:
    """Weights violating the third moment row by ``defect``; a negative control."""
    rows = coefficient_rows(coeffs.r != 0)
    A = np.array([[float(x) for x in row] for row in rows])
    rhs = np.zeros(len(rows))
    rhs[0], rhs[2] = 1.0, defect
    a = np.linalg.lstsq(A, rhs, rcond=None)[0]
    exact = tuple(Fraction(float(v)) for v in a)
    return ReflectionCoefficients(coeffs.r, exact, a, coeffs.b, coeffs.c, coeffs.condition_number)


class ExtendedFunction(CylFunction):
    """``Ef`` with exact value, H-gradient and H-Hessian evaluators on both branches."""

    def __init__(self, f: CylFunction, domain: LevelSetDomain, coeffs: ReflectionCoefficients):
        if domain.kind != "half_space":
            raise ValueError("the reflection extension needs a half-space")
        super().__init__(f.model, self._value, self._grad, self._hess)
        self.f = f
        self.domain = domain
        self.coeffs = coeffs
        self.v = domain.nu * domain.h_norm  # grad_H G in H coordinates
        self.vnorm = domain.h_norm

    def G(self, x):
        return np.atleast_2d(x) @ self.domain.a - self.domain.r

    def reflected(self, x, j: int, g=None):
        """Ambient point ``x - (j+1) G(x) h / |h|_H^2``."""
        x = np.atleast_2d(x)
        g = self.G(x) if g is None else g
        return x - (j + 1) * g[:, None] * self.domain.h_a[None, :] / self.vnorm**2

    def _outer(self, x, g, order: int):
        """Outer branch and its derivatives up to ``order`` evaluated at ``x`` with level ``g``."""
        c = self.coeffs
        v = self.v
        n = self.model.dim
        N = x.shape[0]
        val = np.zeros(N)
        grad = np.zeros((N, n))
        hess = np.zeros((N, n, n))
        for idx, j in enumerate(J):
            y = self.reflected(x, j, g)
            gy = y @ self.domain.a - self.domain.r
            if np.any(gy > 1e-9 * (1 + np.abs(g))):
                raise RuntimeError("reflection guarantee violated")
            P = np.eye(n) - (j + 1) * np.outer(v, v) / self.vnorm**2
            q = (c.c[idx] + 2 * c.b[idx] * g) / (2 * self.vnorm)
            E = np.exp(-(c.c[idx] * g + c.b[idx] * g**2) / (2 * self.vnorm))
            fv = self.f(y)
            val += c.a[idx] * E * fv
            if order >= 1:
                df = self.f.grad(y) @ P
                dE = -q * E
                grad += c.a[idx] * (E[:, None] * df + (dE * fv)[:, None] * v)
                if order >= 2:
                    d2f = np.einsum("ia,nab,bj->nij", P, self.f.hess(y), P)
                    d2E = E * (q**2 - c.b[idx] / self.vnorm)
                    cross = df[:, :, None] * v[None, None, :]
                    hess += c.a[idx] * (E[:, None, None] * d2f
                                        + dE[:, None, None] * (cross + np.swapaxes(cross, 1, 2))
                                        + d2E[:, None, None] * np.outer(v, v)[None])
        return val, grad, hess

    def _split(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        g = self.G(x)
        return x, g, g > 0

    def _value(self, x):
        x, g, out = self._split(x)
        res = np.empty(x.shape[0])
        if (~out).any():
            res[~out] = self.f(x[~out])
        if out.any():
            res[out] = self._outer(x[out], g[out], 0)[0]
        return res

    def _grad(self, x):
        x, g, out = self._split(x)
        res = np.empty(x.shape)
        if (~out).any():
            res[~out] = self.f.grad(x[~out])
        if out.any():
            res[out] = self._outer(x[out], g[out], 1)[1]
        return res

    def _hess(self, x):
        x, g, out = self._split(x)
        res = np.empty(x.shape + (x.shape[1],))
        if (~out).any():
            res[~out] = self.f.hess(x[~out])
        if out.any():
            res[out] = self._outer(x[out], g[out], 2)[2]
        return res

    def outer_limit(self, y):
        """One-sided limits from outside at boundary points ``y`` (value, gradient, Hessian)."""
        y = np.atleast_2d(y)
        return self._outer(y, np.zeros(y.shape[0]), 2)


def extend(f: CylFunction, coeffs: ReflectionCoefficients, domain: LevelSetDomain) -> ExtendedFunction:
    if abs(coeffs.r - domain.r) > 1e-15 * max(1.0, abs(domain.r)):
        raise ValueError("coefficients were solved for a different offset")
    return ExtendedFunction(f, domain, coeffs)


def matching_report(ef: ExtendedFunction, probes=None) -> dict:
    """Jumps of value, gradient and Hessian across the hyperplane.

    Jumps compare the outer branch evaluated on the hyperplane with the inner
    function; a Richardson estimate from one-sided differences is reported
    alongside as a diagnostic.
    """
    d = ef.domain
    if probes is None:
        probes = d.boundary_rule().nodes[:: max(1, len(d.boundary_rule()) // 16)]
    y = np.atleast_2d(probes)
    val, grad, hess = ef.outer_limit(y)
    jumps = [float(np.max(np.abs(val - ef.f(y)))),
             float(np.max(np.abs(grad - ef.f.grad(y)))),
             float(np.max(np.abs(hess - ef.f.hess(y))))]
    return {"c0": jumps[0], "c1": jumps[1], "c2": jumps[2], "richardson": richardson_jumps(ef, y)}


def richardson_jumps(ef: ExtendedFunction, y) -> list[float]:
    """Value, gradient and Hessian jumps from one-sided samples at two offsets."""
    d = ef.domain
    step = d.model.to_ambient(d.nu) / d.h_norm  # ambient displacement per unit of G
    est = []
    for k, fn in enumerate((ef.value, ef.grad, ef.hess)):
        lim = []
        for side in (1.0, -1.0):
            e1, e2 = RICHARDSON_OFFSETS
            a1 = np.asarray(fn(y + side * e1 * step))
            a2 = np.asarray(fn(y + side * e2 * step))
            lim.append((e1 * a2 - e2 * a1) / (e1 - e2))
        est.append(float(np.max(np.abs(lim[0] - lim[1]))))
    return est


def _w22_sq(w, v, g, H):
    return float(np.dot(w, v**2 + np.sum(g**2, axis=1) + np.sum(H**2, axis=(1, 2))))


def w22_norms(ef: ExtendedFunction, order=None) -> tuple[float, float]:
    """``(|Ef|_{W22(X)}, |f|_{W22(Omega)})`` with half-space rules on both sides."""
    d = ef.domain
    inside = d.bulk_rule(order)
    outside = d.outside_rule(order)
    xi, wi = inside.nodes, inside.weights
    xo, wo = outside.nodes, outside.weights
    omega = _w22_sq(wi, ef.f(xi), ef.f.grad(xi), ef.f.hess(xi))
    whole = omega + _w22_sq(wo, ef(xo), ef.grad(xo), ef.hess(xo))
    return float(np.sqrt(whole)), float(np.sqrt(omega))


def operator_norm_probe(test_set, coeffs: ReflectionCoefficients, domain: LevelSetDomain, order=None) -> dict:
    """Largest ``|Ef|_{W22(X)} / |f|_{W22(Omega)}`` over the test set."""
    ratios = []
    for f in test_set:
        whole, omega = w22_norms(extend(f, coeffs, domain), order)
        if omega > 0:
            ratios.append(whole / omega)
    return {"K": float(max(ratios)), "ratios": ratios}


def cylindrical_approximants(u: CylFunction, coeffs: ReflectionCoefficients, domain: LevelSetDomain,
                             avg_order: int = 12):
    """Averages of ``Eu`` over the trailing rotated coordinates.

    ``v_m`` keeps the first ``m`` coordinates of ``eta`` (the first being the
    normal) and integrates the rest against the standard Gaussian.
    """
    ef = extend(u, coeffs, domain)
    model = domain.model
    frame = domain.frame
    t, w = gauss_hermite_1d(avg_order)
    out = []
    for m in range(1, model.dim + 1):
        out.append(_averaged(ef, model, frame, m, t, w))
    return ef, out


def _averaged(ef, model: GaussianModel, frame, m: int, t, w) -> CylFunction:
    n = model.dim
    k = n - m
    if k == 0:
        return ef
    grids = np.meshgrid(*([t] * k), indexing="ij")
    Y = np.stack([g_.ravel() for g_ in grids], axis=1)
    W = np.prod(np.stack(np.meshgrid(*([w] * k), indexing="ij")).reshape(k, -1), axis=0)
    keep = np.zeros(n)
    keep[:m] = 1.0

    def lifted(x):
        eta = model.to_xi(np.atleast_2d(x)) @ frame
        E = np.repeat(eta, Y.shape[0], axis=0)
        E[:, m:] = np.tile(Y, (eta.shape[0], 1))
        return model.to_ambient(E @ frame.T), eta.shape[0]

    def value(x):
        pts, N = lifted(x)
        return (ef(pts).reshape(N, -1) @ W)

    def gradient(x):
        pts, N = lifted(x)
        g = (ef.grad(pts) @ frame) * keep
        g = np.einsum("nqi,q->ni", g.reshape(N, -1, n), W)
        return g @ frame.T

    def hessian(x):
        pts, N = lifted(x)
        H = np.einsum("ai,nab,bj->nij", frame, ef.hess(pts), frame) * np.outer(keep, keep)
        H = np.einsum("nqij,q->nij", H.reshape(N, -1, n, n), W)
        return np.einsum("ia,nab,jb->nij", frame, H, frame)

    return CylFunction(model, value, gradient, hessian)


def approximation_report(u: CylFunction, coeffs: ReflectionCoefficients, domain: LevelSetDomain,
                         avg_order: int = 12, order: int = 12) -> dict:
    """Boundary condition of each approximant and its second-order errors."""
    ef, approx = cylindrical_approximants(u, coeffs, domain, avg_order)
    inside = domain.bulk_rule(order)
    outside = domain.outside_rule(order)
    y = domain.boundary_rule().nodes
    nrm = domain.normal_H(y)
    ref = {}
    for key, rule in (("in", inside), ("out", outside)):
        ref[key] = (ef(rule.nodes), ef.grad(rule.nodes), ef.hess(rule.nodes))
    rows = []
    for m, v in enumerate(approx, start=1):
        bc = float(np.max(np.abs(np.sum(v.grad(y) * nrm, axis=1))))
        errs = {}
        for key, rule in (("in", inside), ("out", outside)):
            e0, e1, e2 = ref[key]
            errs[key] = _w22_sq(rule.weights, v(rule.nodes) - e0, v.grad(rule.nodes) - e1,
                                v.hess(rule.nodes) - e2)
        rows.append({"m": m, "neumann_defect": bc,
                     "error_whole": float(np.sqrt(errs["in"] + errs["out"])),
                     "error_domain": float(np.sqrt(errs["in"]))})
    whole = [r["error_whole"] for r in rows]
    return {"rows": rows, "decreasing": all(b <= a for a, b in zip(whole, whole[1:]))
            and all(b < a for a, b in zip(whole, whole[1:]) if a > 0)}
