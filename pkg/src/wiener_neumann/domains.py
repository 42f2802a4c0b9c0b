"""Convex level-set domains, their Gaussian surface measure and the H-distance.

Surface weights are the standard Gaussian density times Hausdorff measure, both
taken in standardized coordinates ``xi = x / sqrt(spectrum)``.  In those
coordinates the H-metric is Euclidean, so the outer unit normal is
``grad_H G / |grad_H G|_H`` and the divergence theorem holds verbatim.
"""
from __future__ import annotations

from itertools import product

import numpy as np
import sympy as sp
from numpy.polynomial.legendre import leggauss

from .gaussian import CylFunction, GaussianModel, QuadratureGrid, gauss_hermite_1d, tensor_grid

SQRT_2PI = np.sqrt(2 * np.pi)
NORMAL_PANEL = 1.0
NORMAL_POINTS = 12
NORMAL_REACH = 9.0
CIRCLE_NODES = 256
SPHERE_LATITUDES = 48
SPHERE_LONGITUDES = 96
RADIAL_NODES = 48
POLAR_PANELS = 6
POLAR_POINTS = 8
POLAR_ANGULAR = (24, 48)
PROJECTION_MAX_ITER = 200
PROJECTION_TOL = 1e-10


def std_normal_pdf(t):
    return np.exp(-0.5 * np.asarray(t, dtype=float) ** 2) / SQRT_2PI


def composite_legendre(lo: float, hi: float, panel: float = NORMAL_PANEL,
                       points: int = NORMAL_POINTS):
    """Composite Gauss-Legendre nodes and weights on ``[lo, hi]``."""
    if hi <= lo:
        return np.empty(0), np.empty(0)
    m = max(1, int(np.ceil((hi - lo) / panel)))
    edges = np.linspace(lo, hi, m + 1)
    t, w = leggauss(points)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def normal_rule(s: float, side: str = "inside"):
    """Quadrature for the standard normal law restricted to ``t <= s`` or ``t >= s``."""
    if side == "inside":
        t, w = composite_legendre(min(-NORMAL_REACH, s - 3.0), s)
    elif side == "outside":
        t, w = composite_legendre(s, max(NORMAL_REACH, s + 3.0))
    else:
        raise ValueError("side must be 'inside' or 'outside'")
    return t, w * std_normal_pdf(t)


def householder_frame(nu) -> np.ndarray:
    """Orthogonal symmetric matrix whose first column is the unit vector ``nu``."""
    nu = np.asarray(nu, dtype=float)
    n = nu.size
    e1 = np.zeros(n)
    e1[0] = 1.0
    v = e1 - nu
    if np.linalg.norm(v) < 1e-14:
        return np.eye(n)
    return np.eye(n) - 2.0 * np.outer(v, v) / np.dot(v, v)


class LevelSetDomain:
    """The sublevel set ``{G <= 0}`` of a convex cylindrical function.

    ``kind`` is ``"half_space"``, ``"unit_ball"``, ``"whole_space"`` or
    ``"custom"``.  Only the first three carry quadrature rules.
    """

    def __init__(self, model: GaussianModel, G: CylFunction | None, kind: str = "custom",
                 a=None, r: float = 0.0, check: bool = True):
        if kind not in ("half_space", "unit_ball", "whole_space", "custom"):
            raise ValueError(f"unknown domain kind {kind!r}")
        self.model = model
        self.G = G
        self.kind = kind
        self.a = None if a is None else np.asarray(a, dtype=float)
        self.r = float(r)
        self._bulk = None
        self._outside = None
        self._boundary = None
        if kind == "half_space":
            self.h_a = model.spectrum * self.a
            self.h_norm = float(np.sqrt(np.sum(model.spectrum * self.a**2)))
            if self.h_norm == 0:
                raise ValueError("half-space covector must be non-zero")
            self.nu = model.sqrt_spectrum * self.a / self.h_norm
            self.s = self.r / self.h_norm
            self.frame = householder_frame(self.nu)
        if check and G is not None and kind != "custom":
            self.check_hypotheses()

    def __repr__(self):
        if self.kind == "half_space":
            return f"LevelSetDomain(half_space, a={self.a.tolist()}, r={self.r})"
        return f"LevelSetDomain({self.kind})"

    @property
    def is_whole_space(self) -> bool:
        return self.kind == "whole_space"

    def to_config(self) -> dict:
        out = {"kind": self.kind, "spectrum": self.model.spectrum.tolist()}
        if self.kind == "half_space":
            out.update(a=self.a.tolist(), r=self.r)
        return out

    # pointwise geometry -------------------------------------------------

    def G_value(self, x):
        if self.G is None:
            x = np.atleast_2d(x)
            return np.full(x.shape[0], -np.inf)
        return self.G(x)

    def contains(self, x) -> bool | np.ndarray:
        return self.G_value(x) <= 0

    def normal_H(self, x) -> np.ndarray:
        """Unit outer normal in H-orthonormal coordinates."""
        g = np.atleast_2d(self.G.grad(x))
        return g / np.linalg.norm(g, axis=1, keepdims=True)

    def check_hypotheses(self, n_probe: int = 64, seed: int = 0):
        rng = np.random.default_rng(seed)
        if self.kind == "whole_space":
            return
        x = rng.standard_normal((n_probe, self.model.dim)) * self.model.sqrt_spectrum
        y = rng.standard_normal((n_probe, self.model.dim)) * self.model.sqrt_spectrum
        mid = self.G((x + y) / 2)
        if np.any(mid > (self.G(x) + self.G(y)) / 2 + 1e-10):
            raise ValueError("G is not convex on probe segments")
        if self.has_surface_rule:
            g = np.atleast_2d(self.G.grad(self.boundary_rule().nodes))
            if np.any(np.linalg.norm(g, axis=1) == 0):
                raise ValueError("grad_H G vanishes on the boundary")

    # quadrature rules ---------------------------------------------------

    @property
    def has_surface_rule(self) -> bool:
        if self.kind == "half_space":
            return True
        return self.kind == "unit_ball" and self.model.dim <= 3

    def _tangential(self, order=None):
        order = self.model.quad_order if order is None else order
        k = self.model.dim - 1
        if k == 0:
            return np.zeros((1, 0)), np.ones(1)
        t, w = gauss_hermite_1d(order)
        pts = np.array(list(product(t, repeat=k)))
        wts = np.prod(np.array(list(product(w, repeat=k))), axis=1)
        return pts, wts

    def _halfspace_rule(self, side, order=None):
        t1, w1 = normal_rule(self.s, side)
        tp, tw = self._tangential(order)
        eta = np.concatenate(
            [np.repeat(t1, tw.size)[:, None], np.tile(tp, (t1.size, 1))], axis=1)
        w = np.repeat(w1, tw.size) * np.tile(tw, t1.size)
        return QuadratureGrid(self.model.to_ambient(eta @ self.frame.T), w)

    def bulk_rule(self, order=None) -> QuadratureGrid:
        """Quadrature for ``mu`` restricted to the domain."""
        if order is not None:
            return self._make_bulk(order)
        if self._bulk is None:
            self._bulk = self._make_bulk(None)
        return self._bulk

    def _make_bulk(self, order):
        if self.kind == "whole_space":
            return tensor_grid(self.model, order)
        if self.kind == "half_space":
            return self._halfspace_rule("inside", order)
        if self.kind == "unit_ball":
            return _ball_bulk(self.model)
        raise ValueError("no bulk rule for a custom domain")

    def outside_rule(self, order=None) -> QuadratureGrid:
        """Quadrature for ``mu`` restricted to the complement (half-spaces only)."""
        if self.kind != "half_space":
            raise ValueError("complement rule is available for half-spaces only")
        if order is not None:
            return self._halfspace_rule("outside", order)
        if self._outside is None:
            self._outside = self._halfspace_rule("outside")
        return self._outside

    def boundary_rule(self) -> QuadratureGrid:
        if not self.has_surface_rule:
            raise ValueError("no surface rule")
        if self._boundary is None:
            if self.kind == "half_space":
                tp, tw = self._tangential()
                eta = np.concatenate([np.full((tw.size, 1), self.s), tp], axis=1)
                self._boundary = QuadratureGrid(
                    self.model.to_ambient(eta @ self.frame.T), tw * std_normal_pdf(self.s))
            else:
                self._boundary = _sphere_rule(self.model)
        return self._boundary

    # distance along H ---------------------------------------------------

    def dH_project(self, x) -> np.ndarray:
        """Ambient H-vector ``h*`` of least H-norm with ``x - h*`` in the domain."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        if self.kind == "whole_space":
            out = np.zeros_like(x)
        elif self.kind == "half_space":
            g = np.maximum(x @ self.a - self.r, 0.0)
            out = g[:, None] * self.h_a[None, :] / self.h_norm**2
        elif self.kind == "unit_ball":
            out = np.array([_ball_projection(xi, self.model.spectrum) for xi in x])
        else:
            raise ValueError("projection failed")
        return out[0] if single else out

    def dH_distance(self, x):
        h = self.dH_project(x)
        return np.sqrt(np.sum(np.atleast_2d(h) ** 2 / self.model.spectrum, axis=1)) \
            if np.ndim(h) == 2 else float(np.sqrt(np.sum(h**2 / self.model.spectrum)))


def _ball_projection(x, lam):
    if np.dot(x, x) <= 1.0:
        return np.zeros_like(x)
    m = 0.0
    for _ in range(PROJECTION_MAX_ITER):
        q = x / (1.0 + m * lam)
        phi = np.dot(q, q) - 1.0
        if abs(phi) <= PROJECTION_TOL:
            return m * lam * q
        dphi = -2.0 * np.sum(lam * q**2 / (1.0 + m * lam))
        m -= phi / dphi
    raise RuntimeError("projection failed")


def _ball_bulk(model: GaussianModel) -> QuadratureGrid:
    n = model.dim
    t, w = leggauss(RADIAL_NODES)
    r, wr = 0.5 * (t + 1), 0.5 * w
    if n == 1:
        pts = np.concatenate([-r[::-1], r])[:, None]
        wts = np.concatenate([wr[::-1], wr])
    elif n == 2:
        th = 2 * np.pi * np.arange(CIRCLE_NODES) / CIRCLE_NODES
        rr, tt = np.meshgrid(r, th, indexing="ij")
        pts = np.stack([rr * np.cos(tt), rr * np.sin(tt)], axis=-1).reshape(-1, 2)
        wts = (wr[:, None] * r[:, None] * np.full(th.size, 2 * np.pi / th.size)).ravel()
    elif n == 3:
        dirs, dw = _unit_sphere_rule()
        pts = (r[:, None, None] * dirs[None]).reshape(-1, 3)
        wts = (wr[:, None] * r[:, None] ** 2 * dw[None]).ravel()
    else:
        raise ValueError("ball quadrature supports dimension <= 3")
    return QuadratureGrid(pts, wts * model.density(pts))


def polar_rule(model: GaussianModel, radius: float, panels: int = POLAR_PANELS,
               points: int = POLAR_POINTS, angular: tuple = POLAR_ANGULAR) -> QuadratureGrid:
    """Quadrature for ``mu`` on the ambient ball of the given radius, in polar coordinates.

    Suited to integrands carrying a radial factor that is negligible beyond
    ``radius``; unlike tensor Gauss-Hermite it converges geometrically for them.
    """
    n = model.dim
    r, wr = composite_legendre(0.0, float(radius), float(radius) / panels, points)
    if n == 1:
        pts = np.concatenate([-r[::-1], r])[:, None]
        wts = np.concatenate([wr[::-1], wr])
    elif n == 2:
        m = 2 * angular[1]
        th = 2 * np.pi * np.arange(m) / m
        dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
        pts = (r[:, None, None] * dirs[None]).reshape(-1, 2)
        wts = (wr[:, None] * r[:, None] * np.full(th.size, 2 * np.pi / th.size)).ravel()
    elif n == 3:
        dirs, dw = _unit_sphere_rule(*angular)
        pts = (r[:, None, None] * dirs[None]).reshape(-1, 3)
        wts = (wr[:, None] * r[:, None] ** 2 * dw[None]).ravel()
    else:
        raise ValueError("polar quadrature supports dimension <= 3")
    return QuadratureGrid(pts, wts * model.density(pts))


def _unit_sphere_rule(latitudes: int = SPHERE_LATITUDES, longitudes: int = SPHERE_LONGITUDES):
    t, wt = leggauss(latitudes)
    th = 2 * np.pi * np.arange(longitudes) / longitudes
    tt, pp = np.meshgrid(t, th, indexing="ij")
    sp_ = np.sqrt(1 - tt**2)
    dirs = np.stack([sp_ * np.cos(pp), sp_ * np.sin(pp), tt], axis=-1).reshape(-1, 3)
    w = (wt[:, None] * np.full(th.size, 2 * np.pi / th.size)).ravel()
    return dirs, w


def _sphere_rule(model: GaussianModel) -> QuadratureGrid:
    """Boundary rule on the ambient unit sphere with weights for the surface measure."""
    n = model.dim
    inv = 1.0 / model.sqrt_spectrum
    if n == 1:
        pts = np.array([[-1.0], [1.0]])
        elem = np.ones(2)
    elif n == 2:
        th = 2 * np.pi * np.arange(CIRCLE_NODES) / CIRCLE_NODES
        pts = np.stack([np.cos(th), np.sin(th)], axis=1)
        tangent = np.stack([-np.sin(th), np.cos(th)], axis=1) * inv
        elem = np.linalg.norm(tangent, axis=1) * 2 * np.pi / th.size
    else:
        # the image of the sphere under xi = A x scales area by |det A| |A^{-T} n|
        pts, w = _unit_sphere_rule()
        elem = w * np.prod(inv) * np.linalg.norm(pts * model.sqrt_spectrum, axis=1)
    xi = pts * inv
    dens = np.exp(-0.5 * np.sum(xi**2, axis=1)) / SQRT_2PI**n
    return QuadratureGrid(pts, elem * dens)


def half_space(model: GaussianModel, a, r: float = 0.0) -> LevelSetDomain:
    """The half-space ``{sum a_i x_i <= r}``."""
    a = np.asarray(a, dtype=float)
    if a.shape != (model.dim,):
        raise ValueError("covector dimension mismatch")
    expr = sum(float(ai * si) * xi for ai, si, xi in zip(a, model.sqrt_spectrum, model.symbols) if ai)
    G = CylFunction.from_expr(sp.sympify(expr) - sp.Float(r), model)
    return LevelSetDomain(model, G, "half_space", a=a, r=r)


def unit_ball(model: GaussianModel) -> LevelSetDomain:
    """The ambient unit ball ``{(x, x) <= 1}``."""
    expr = sum(float(l) * xi**2 for l, xi in zip(model.spectrum, model.symbols)) - 1
    return LevelSetDomain(model, CylFunction.from_expr(expr, model), "unit_ball")


def whole_space(model: GaussianModel) -> LevelSetDomain:
    return LevelSetDomain(model, None, "whole_space")


def custom_domain(model: GaussianModel, G: CylFunction) -> LevelSetDomain:
    return LevelSetDomain(model, G, "custom")


def domain_from_config(model: GaussianModel, spec: dict) -> LevelSetDomain:
    kind = spec.get("kind", "whole_space")
    if kind == "half_space":
        return half_space(model, spec["a"], spec.get("r", 0.0))
    if kind == "unit_ball":
        return unit_ball(model)
    if kind == "whole_space":
        return whole_space(model)
    raise ValueError(f"unknown domain kind {kind!r}")


def surface_integrate(d: LevelSetDomain, g) -> float:
    """Integral of ``g`` against the Gaussian surface measure on ``{G = 0}``."""
    rule = d.boundary_rule()
    return rule.integrate(g(rule.nodes))


def trace_restrict(f, d: LevelSetDomain) -> np.ndarray:
    """Values of ``f`` at the boundary nodes (the trace of a continuous function)."""
    return np.asarray(f(d.boundary_rule().nodes), dtype=float)


def dH_distance(d: LevelSetDomain, x):
    return d.dH_distance(x)


def dH_project(d: LevelSetDomain, x):
    return d.dH_project(x)


def contains(d: LevelSetDomain, x):
    return d.contains(x)
