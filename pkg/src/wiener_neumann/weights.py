"""Convex weights, Moreau-Yosida approximation along H, and penalized weights.

Gradients and Hessians are expressed in the H-orthonormal basis.  Prox points
are returned as ambient H-vectors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy as sp

from .gaussian import CylFunction, GaussianModel

PROX_MAX_ITER = 500
PROX_TOL = 1e-11
KKT_TOL = 1e-9
CURVATURE_TOL = 1e-10
FD_STEP = 1e-5


# exp(-60) is below double precision relative to the bulk mass
RADIAL_CUTOFF = 60.0


class Weight:
    """A convex weight ``U`` defining ``nu = exp(-U) mu``.  ``U=None`` means zero."""

    def __init__(self, model: GaussianModel, U: CylFunction | None = None, name: str = "custom",
                 lipschitz: float | None = None, support_radius: float | None = None):
        self.model = model
        self.U = U
        self.name = name
        self.gradient_lipschitz = lipschitz
        # ambient radius beyond which exp(-U) is negligible, for radial weights
        self.support_radius = support_radius

    @property
    def is_zero(self) -> bool:
        return self.U is None

    def __repr__(self):
        return f"Weight({self.name})"

    def _rows(self, x):
        return np.atleast_2d(np.asarray(x, dtype=float))

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if self.U is None:
            out = np.zeros(self._rows(x).shape[0])
            return out[0] if x.ndim == 1 else out
        return self.U(x)

    __call__ = value

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        if self.U is None:
            return np.zeros(x.shape)
        return self.U.grad(x)

    def hess(self, x):
        x = np.asarray(x, dtype=float)
        if self.U is None:
            return np.zeros(x.shape + (self.model.dim,))
        return self.U.hess(x)

    def density(self, x):
        """``exp(-U)`` at ``x``."""
        return np.exp(-self.value(x))

    def check_convexity(self, n_probe: int = 64, seed: int = 0) -> float:
        """Most negative probe value of midpoint defect and of the Hessian form."""
        if self.U is None:
            return 0.0
        rng = np.random.default_rng(seed)
        n = self.model.dim
        x = rng.standard_normal((n_probe, n)) * self.model.sqrt_spectrum
        y = rng.standard_normal((n_probe, n)) * self.model.sqrt_spectrum
        defect = (self.U(x) + self.U(y)) / 2 - self.U((x + y) / 2)
        h = rng.standard_normal((n_probe, n))
        form = np.einsum("ni,nij,nj->n", h, self.U.hess(x), h)
        worst = float(min(defect.min(), form.min()))
        if worst < -CURVATURE_TOL:
            raise ValueError("convexity violated")
        return worst


def zero_weight(model: GaussianModel) -> Weight:
    return Weight(model, None, "zero", lipschitz=0.0)


def linear_weight(model: GaussianModel, c) -> Weight:
    """``U(x) = sum c_i x_i`` in ambient coordinates."""
    c = np.asarray(c, dtype=float)
    if c.shape != (model.dim,):
        raise ValueError("linear weight needs one coefficient per coordinate")
    expr = sum(float(ci * si) * xi for ci, si, xi in zip(c, model.sqrt_spectrum, model.symbols))
    return Weight(model, CylFunction.from_expr(sp.sympify(expr), model), "linear", lipschitz=0.0)


def norm_power_weight(model: GaussianModel, scale: float = 1.0) -> Weight:
    """``U(x) = scale * Phi(|x|^2)`` with ``Phi(s) = s^2 / 2``."""
    if scale < 0:
        raise ValueError("scale must be non-negative for convexity")
    sq = sum(float(l) * xi**2 for l, xi in zip(model.spectrum, model.symbols))
    radius = (2 * RADIAL_CUTOFF / scale) ** 0.25 if scale > 0 else None
    return Weight(model, CylFunction.from_expr(sp.Float(scale) * sq**2 / 2, model), "phi_norm",
                  support_radius=radius)


def weight_from_config(model: GaussianModel, spec: dict | None) -> Weight:
    spec = spec or {"preset": "zero"}
    preset = spec.get("preset", "zero")
    if preset == "zero":
        return zero_weight(model)
    if preset == "linear":
        return linear_weight(model, spec.get("coefficients", [1.0] + [0.0] * (model.dim - 1)))
    if preset == "phi_norm":
        return norm_power_weight(model, spec.get("scale", 1.0))
    raise ValueError(f"unknown weight preset {preset!r}")


@dataclass(frozen=True)
class ProxResult:
    """Prox points ``P(x, alpha)`` (ambient H-vectors) with envelope values."""

    minimizer: np.ndarray
    envelope: np.ndarray
    iterations: int
    kkt_residual: float


def _as_function(f):
    return f.U if isinstance(f, Weight) else f


def prox(f, x, alpha: float) -> ProxResult:
    """Minimize ``h -> f(x + h) + |h|_H^2 / (2 alpha)`` by damped Newton.

    ``x`` may be a single point or a batch of shape ``(N, n)``.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    model = f.model
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    N, n = X.shape
    if isinstance(f, Weight) and f.is_zero:
        z = np.zeros((N, n))
        res = ProxResult(z, np.zeros(N), 0, 0.0)
        return _single(res) if single else res
    fn = _as_function(f)
    sq = model.sqrt_spectrum
    k = np.zeros((N, n))
    active = np.ones(N, dtype=bool)
    it = 0
    while True:
        pts = X + k * sq
        g = fn.grad(pts) + k / alpha
        gnorm = np.linalg.norm(g, axis=1)
        active = gnorm > PROX_TOL * np.maximum(1.0, np.abs(fn(X)))
        if not active.any():
            break
        if it >= PROX_MAX_ITER:
            raise RuntimeError("prox non-convergent")
        it += 1
        idx = np.flatnonzero(active)
        A = fn.hess(pts[idx])
        if np.linalg.eigvalsh(A).min() < -CURVATURE_TOL * max(1.0, np.abs(A).max()):
            raise ValueError("convexity violated")
        step = -np.linalg.solve(A + np.eye(n) / alpha, g[idx][:, :, None])[:, :, 0]
        obj0 = fn(pts[idx]) + np.sum(k[idx] ** 2, axis=1) / (2 * alpha)
        slope = np.sum(g[idx] * step, axis=1)
        t = np.ones(idx.size)
        for _ in range(60):
            trial = k[idx] + t[:, None] * step
            obj = fn(X[idx] + trial * sq) + np.sum(trial**2, axis=1) / (2 * alpha)
            bad = obj > obj0 + 1e-4 * t * slope + 1e-14 * np.abs(obj0)
            if not bad.any():
                break
            t[bad] *= 0.5
        k[idx] += t[:, None] * step
    pts = X + k * sq
    kkt = float(np.max(np.linalg.norm(fn.grad(pts) + k / alpha, axis=1)))
    env = fn(pts) + np.sum(k**2, axis=1) / (2 * alpha)
    res = ProxResult(k * sq, env, it, kkt)
    return _single(res) if single else res


def _single(res: ProxResult) -> ProxResult:
    return ProxResult(res.minimizer[0], float(res.envelope[0]), res.iterations, res.kkt_residual)


def my_value(f, x, alpha):
    return prox(f, x, alpha).envelope


def my_gradient(f, x, alpha):
    """``grad_H f_alpha = -P(x, alpha) / alpha`` in H-orthonormal coordinates."""
    P = prox(f, x, alpha).minimizer
    return -f.model.h_coords(P) / alpha


def my_hessian(f, x, alpha, result: ProxResult | None = None):
    """Hessian of the envelope from ``(I + alpha A) D = A`` with ``A`` the Hessian at ``x + P``."""
    if isinstance(f, Weight) and f.is_zero:
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape + (f.model.dim,))
    fn = _as_function(f)
    res = prox(f, x, alpha) if result is None else result
    x = np.asarray(x, dtype=float)
    A = fn.hess(x + res.minimizer)
    n = f.model.dim
    M = np.eye(n) + alpha * A
    if np.any(np.abs(np.linalg.det(M)) < 1e-300) or np.linalg.cond(M).max() > 1e14:
        raise RuntimeError("Hessian system singular")
    D = np.linalg.solve(M, A)
    return 0.5 * (D + np.swapaxes(D, -1, -2))


class MoreauYosida(Weight):
    """The envelope ``U_alpha`` as a weight."""

    def __init__(self, base: Weight, alpha: float):
        super().__init__(base.model, None, f"{base.name}_alpha")
        self.base = base
        self.alpha = float(alpha)

    @property
    def is_zero(self) -> bool:
        return self.base.is_zero

    def value(self, x):
        if self.base.is_zero:
            return self.base.value(x)
        return prox(self.base, x, self.alpha).envelope

    __call__ = value

    def grad(self, x):
        if self.base.is_zero:
            return self.base.grad(x)
        return my_gradient(self.base, x, self.alpha)

    def hess(self, x):
        return my_hessian(self.base, x, self.alpha)

    def check_convexity(self, n_probe: int = 64, seed: int = 0) -> float:
        return self.base.check_convexity(n_probe, seed)


class PenalizedWeight(Weight):
    """``V_alpha = U_alpha + d_H(., Omega)^2 / (2 alpha)``."""

    def __init__(self, base: Weight, domain, alpha: float):
        if not 0 < alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        super().__init__(base.model, None, f"{base.name}_penalized")
        self.base = base
        self.domain = domain
        self.alpha = float(alpha)
        self.envelope = MoreauYosida(base, alpha)

    @property
    def is_zero(self) -> bool:
        return False

    def value(self, x):
        d = self.domain.dH_distance(x)
        return self.envelope.value(x) + np.asarray(d) ** 2 / (2 * self.alpha)

    __call__ = value

    def grad(self, x):
        h = self.domain.dH_project(x)
        return self.envelope.grad(x) + self.model.h_coords(h) / self.alpha

    def hess(self, x):
        """Central differences of the gradient along the H-basis, symmetrized."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = np.atleast_2d(x)
        n = self.model.dim
        out = np.empty((X.shape[0], n, n))
        for i in range(n):
            e = self.model.h_basis(i) * FD_STEP
            out[:, :, i] = (np.atleast_2d(self.grad(X + e)) - np.atleast_2d(self.grad(X - e))) / (2 * FD_STEP)
        out = 0.5 * (out + np.swapaxes(out, 1, 2))
        return out[0] if single else out

    def check_convexity(self, n_probe: int = 64, seed: int = 0) -> float:
        return self.base.check_convexity(n_probe, seed)


def penalized(w: Weight, d, alpha: float) -> PenalizedWeight:
    return PenalizedWeight(w, d, alpha)
