"""Cylindrical H-valued fields, the weighted divergence and its boundary identities.

Fields are written ``Phi = sum_i phi_i e_i`` over the H-orthonormal basis.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy as sp

from .domains import LevelSetDomain, QuadratureGrid, polar_rule
from .gaussian import CylFunction, GaussianModel
from .weights import Weight

TANGENCY_TOL = 1e-8


class CylVectorField:
    """Finite sum of coefficient functions times H-basis directions."""

    def __init__(self, model: GaussianModel, terms, tangent_to_boundary: bool = False):
        merged = {}
        for phi, i in terms:
            i = int(i)
            if not 0 <= i < model.dim:
                raise ValueError(f"direction index {i} outside 0..{model.dim - 1}")
            merged[i] = merged[i] + phi if i in merged else phi
        self.model = model
        self.terms = sorted(merged.items())
        self.tangent_to_boundary = bool(tangent_to_boundary)

    @classmethod
    def from_ambient(cls, model: GaussianModel, components, tangent_to_boundary: bool = False):
        """Field whose ambient vector components are the given functions."""
        terms = [(c / float(s), i) for i, (c, s) in enumerate(zip(components, model.sqrt_spectrum))
                 if c is not None]
        return cls(model, terms, tangent_to_boundary)

    def __repr__(self):
        return f"CylVectorField({[(repr(p), i) for i, p in self.terms]})"

    def __add__(self, other):
        return CylVectorField(self.model, [(p, i) for i, p in self.terms + other.terms],
                              self.tangent_to_boundary and other.tangent_to_boundary)

    def scale(self, c):
        return CylVectorField(self.model, [(p * c, i) for i, p in self.terms], self.tangent_to_boundary)

    def values(self, x) -> np.ndarray:
        """H-coordinates of the field, shape ``(N, n)``."""
        x = np.atleast_2d(x)
        out = np.zeros((x.shape[0], self.model.dim))
        for i, phi in self.terms:
            out[:, i] = phi(x)
        return out

    def jacobian(self, x) -> np.ndarray:
        """``J[:, i, j] = d_j phi_i``."""
        x = np.atleast_2d(x)
        out = np.zeros((x.shape[0], self.model.dim, self.model.dim))
        for i, phi in self.terms:
            out[:, i, :] = phi.grad(x)
        return out

    def tangency_defect(self, d: LevelSetDomain) -> float:
        """Max of ``|<Phi, grad G>_H| / |grad G|_H`` over boundary nodes."""
        if d.is_whole_space:
            return 0.0
        nodes = d.boundary_rule().nodes
        return float(np.max(np.abs(np.sum(self.values(nodes) * d.normal_H(nodes), axis=1))))


def gradient_field(u: CylFunction) -> CylVectorField:
    return CylVectorField(u.model, [(u.partial(i), i) for i in range(u.model.dim)])


def _require_tangent(phi: CylVectorField, d: LevelSetDomain):
    if d is None or d.is_whole_space:
        return
    if phi.tangency_defect(d) > TANGENCY_TOL:
        raise ValueError("field not in Z(Omega,H)")


def divergence(phi: CylVectorField, w: Weight, d: LevelSetDomain | None = None) -> CylFunction:
    """``sum_i (d_i phi_i - phi_i d_i U - phi_i hat_i)``."""
    _require_tangent(phi, d)
    model = phi.model
    total = CylFunction.constant(0, model)
    for i, p in phi.terms:
        term = p.partial(i) - p * model.hat(i)
        if w.U is not None:
            term = term - p * w.U.partial(i)
        elif not w.is_zero:
            term = term - p * _weight_partial(w, i)
        total = total + term
    return total


def _weight_partial(w: Weight, i: int) -> CylFunction:
    return CylFunction(w.model, lambda x: np.atleast_2d(w.grad(x))[:, i], active=range(w.model.dim))


@dataclass(frozen=True)
class WeightedRule:
    """Quadrature nodes with ``exp(-U)`` folded into the weights, plus U derivatives."""

    nodes: np.ndarray
    weights: np.ndarray
    gradU: np.ndarray
    hessU: np.ndarray


def _weighted(rule, w: Weight) -> WeightedRule:
    x = rule.nodes
    n = x.shape[1]
    grad = np.atleast_2d(w.grad(x)).reshape(-1, n)
    hess = np.asarray(w.hess(x)).reshape(-1, n, n)
    return WeightedRule(x, rule.weights * w.density(x), grad, hess)


# tensor Gauss-Hermite order for super-Gaussian weights on low-dimensional half-spaces
RADIAL_HALFSPACE_ORDER = 80


def measure_rule(d: LevelSetDomain, w: Weight) -> QuadratureGrid:
    """Quadrature for ``mu`` on the domain, refined when ``exp(-U)`` decays faster than Gaussian."""
    radius = getattr(w, "support_radius", None)
    if radius is None:
        return d.bulk_rule()
    if d.is_whole_space:
        return polar_rule(d.model, radius)
    if d.model.dim <= 2:
        return d.bulk_rule(RADIAL_HALFSPACE_ORDER)
    return d.bulk_rule()


@lru_cache(maxsize=16)
def bulk_rule(d: LevelSetDomain, w: Weight) -> WeightedRule:
    return _weighted(measure_rule(d, w), w)


@lru_cache(maxsize=16)
def boundary_rule(d: LevelSetDomain, w: Weight) -> WeightedRule:
    return _weighted(d.boundary_rule(), w)


def _bulk(d, w):
    r = bulk_rule(d, w)
    return r.nodes, r.weights


def _boundary(d, w):
    r = boundary_rule(d, w)
    return r.nodes, r.weights


def ibp_residuals(phi: CylFunction, w: Weight, d: LevelSetDomain, with_norm: bool = False):
    """Bulk minus boundary side of the integration-by-parts formula, one entry per direction.

    With ``with_norm`` the weighted W^{1,2} norm of ``phi`` is returned too,
    reusing the bulk evaluations.
    """
    b = bulk_rule(d, w)
    hat = b.nodes / d.model.sqrt_spectrum
    v, g = phi(b.nodes), phi.grad(b.nodes)
    res = b.weights @ (g - v[:, None] * (b.gradU + hat))
    if not d.is_whole_space:
        s = boundary_rule(d, w)
        res = res - s.weights @ (phi(s.nodes)[:, None] * d.normal_H(s.nodes))
    if with_norm:
        return res, float(np.sqrt(b.weights @ (v**2 + np.sum(g**2, axis=1))))
    return res


def ibp_residual(phi: CylFunction, k: int, w: Weight, d: LevelSetDomain) -> float:
    """Bulk minus boundary side of the integration-by-parts formula along ``e_k``."""
    return float(ibp_residuals(phi, w, d)[k])


def adjointness_residual(f: CylFunction, phi: CylVectorField, w: Weight, d: LevelSetDomain) -> float:
    """``int <grad f, Phi> dnu + int f div Phi dnu``."""
    div = divergence(phi, w, d)
    x, wb = _bulk(d, w)
    return float(np.dot(wb, np.sum(f.grad(x) * phi.values(x), axis=1) + f(x) * div(x)))


def z_norm(phi: CylVectorField, w: Weight, d: LevelSetDomain) -> float:
    """Norm combining the W^{1,2} field norm, the weight Hessian form and the boundary form."""
    x, wb = _bulk(d, w)
    v = phi.values(x)
    J = phi.jacobian(x)
    total = np.dot(wb, np.sum(v**2, axis=1) + np.sum(J**2, axis=(1, 2)))
    total += np.dot(wb, np.einsum("ni,nij,nj->n", v, bulk_rule(d, w).hessU, v))
    if not d.is_whole_space:
        y, ws = _boundary(d, w)
        vy = phi.values(y)
        gG = np.atleast_2d(d.G.grad(y))
        form = np.einsum("ni,nij,nj->n", vy, d.G.hess(y), vy) / np.linalg.norm(gG, axis=1)
        total += np.dot(ws, form)
    return float(np.sqrt(total))


def divergence_norm(phi: CylVectorField, w: Weight, d: LevelSetDomain) -> float:
    div = divergence(phi, w, d)
    x, wb = _bulk(d, w)
    return float(np.sqrt(np.dot(wb, div(x) ** 2)))


def boundary_hessian_identity(phi: CylVectorField, d: LevelSetDomain) -> float:
    """Max over boundary nodes of ``|<D^2G Phi, Phi> + <(D Phi) Phi, grad G>|``."""
    _require_tangent(phi, d)
    y = d.boundary_rule().nodes
    v = phi.values(y)
    lhs = np.einsum("ni,nij,nj->n", v, d.G.hess(y), v)
    rhs = np.einsum("nij,nj,ni->n", phi.jacobian(y), v, np.atleast_2d(d.G.grad(y)))
    return float(np.max(np.abs(lhs + rhs)))


def bilinear_identity_residual(f: CylFunction, g: CylFunction, h: int, k: int, w: Weight,
                               d: LevelSetDomain) -> float:
    """Left minus right side of the two-function integration-by-parts identity."""
    model = f.model
    b = bulk_rule(d, w)
    x, wb, gradU, hessU = b.nodes, b.weights, b.gradU, b.hessU
    hat = x / model.sqrt_spectrum
    fv, gv = f(x), g(x)
    Df, Dg = f.grad(x), g.grad(x)
    Af = Df[:, h] - fv * gradU[:, h] - fv * hat[:, h]
    Ag = Dg[:, k] - gv * gradU[:, k] - gv * hat[:, k]
    lhs = np.dot(wb, Af * Ag)
    rhs = np.dot(wb, fv * gv * hessU[:, h, k]) + float(h == k) * np.dot(wb, fv * gv) \
        + np.dot(wb, Df[:, k] * Dg[:, h])
    if not d.is_whole_space:
        bd = boundary_rule(d, w)
        y, ws = bd.nodes, bd.weights
        nrm = d.normal_H(y)
        fy, gy = f(y), g(y)
        Dgy = g.grad(y)
        Agy = Dgy[:, k] - gy * bd.gradU[:, k] - gy * y[:, k] / model.sqrt_spectrum[k]
        rhs += np.dot(ws, fy * Agy * nrm[:, h]) - np.dot(ws, fy * Dgy[:, h] * nrm[:, k])
    return float(lhs - rhs)


def rotation_field(model: GaussianModel, i: int, j: int, kind: str = "ambient") -> CylVectorField:
    """Rotation generator in the (i, j) plane.

    ``kind="ambient"`` is ``x_j e_i - x_i e_j`` (tangent to every centred sphere);
    ``kind="scaled"`` is ``(x_j/sqrt(l_j)) h_i - (x_i/sqrt(l_i)) h_j`` with
    ``h`` the H-orthonormal vectors, tangent only when ``l_i = l_j``.
    """
    xi = model.symbols
    if kind == "ambient":
        x = model.ambient_symbols()
        comps = [None] * model.dim
        comps[i] = CylFunction.from_expr(x[j], model)
        comps[j] = CylFunction.from_expr(-x[i], model)
        return CylVectorField.from_ambient(model, comps, tangent_to_boundary=True)
    if kind == "scaled":
        return CylVectorField(model, [(CylFunction.from_expr(xi[j], model), i),
                                      (CylFunction.from_expr(-xi[i], model), j)],
                              tangent_to_boundary=bool(model.spectrum[i] == model.spectrum[j]))
    raise ValueError("kind must be 'ambient' or 'scaled'")


def halfspace_tangent_field(d: LevelSetDomain, coefficients, normal_factor: CylFunction | None = None):
    """``sum_k p_k tau_k + G q nu`` with ``tau_k`` spanning the H-tangent space of the hyperplane."""
    model = d.model
    frame = d.frame
    terms = []
    for col, p in enumerate(coefficients, start=1):
        for i in range(model.dim):
            if abs(frame[i, col]) > 0:
                terms.append((p * float(frame[i, col]), i))
    if normal_factor is not None:
        for i in range(model.dim):
            if abs(frame[i, 0]) > 0:
                terms.append((normal_factor * d.G * float(frame[i, 0]), i))
    return CylVectorField(model, terms, tangent_to_boundary=True)


def sphere_tangent_field(d: LevelSetDomain, coefficients: dict) -> CylVectorField:
    """``sum p_ij (x_j e_i - x_i e_j)`` over ambient rotation generators."""
    model = d.model
    field = CylVectorField(model, [], tangent_to_boundary=True)
    for (i, j), p in coefficients.items():
        rot = rotation_field(model, i, j)
        field = field + CylVectorField(model, [(q * p, k) for k, q in rot.terms], True)
    return field


def symbolic_equal(a: CylFunction, b: CylFunction) -> bool:
    return sp.simplify(sp.expand(a.expr - b.expr)) == 0
