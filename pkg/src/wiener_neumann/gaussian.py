"""Finite-dimensional Gaussian measures with Cameron-Martin structure.

The covariance is diagonal with eigenvalues ``spectrum``.  Points are given in
ambient coordinates ``x``; the standardized coordinates ``xi = x / sqrt(spectrum)``
are the values of the hat functionals of the H-orthonormal basis
``sqrt(spectrum_i) e_i``.  All H-gradients and H-Hessians are expressed in that
basis, so ``d_i f = sqrt(spectrum_i) * df/dx_i``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product
from math import factorial

import numpy as np
import sympy as sp
from numpy.polynomial.hermite_e import hermegauss

MAX_TENSOR_DIM = 4
DEFAULT_QUAD_ORDER = 40


class GaussianModel:
    """Centered Gaussian measure on R^n with diagonal covariance."""

    def __init__(self, spectrum, quad_order: int = DEFAULT_QUAD_ORDER):
        spectrum = np.atleast_1d(np.asarray(spectrum, dtype=float))
        if spectrum.ndim != 1 or spectrum.size == 0:
            raise ValueError("spectrum must be a non-empty list of reals")
        if np.any(~np.isfinite(spectrum)) or np.any(spectrum <= 0):
            raise ValueError("covariance eigenvalues must be positive")
        if int(quad_order) < 2:
            raise ValueError("quad_order must be at least 2")
        self.spectrum = spectrum
        self.spectrum.setflags(write=False)
        self.sqrt_spectrum = np.sqrt(spectrum)
        self.sqrt_spectrum.setflags(write=False)
        self.quad_order = int(quad_order)
        self.symbols = sp.symbols(f"xi1:{self.dim + 1}", real=True)

    @property
    def dim(self) -> int:
        return self.spectrum.size

    def __repr__(self):
        return f"GaussianModel(spectrum={self.spectrum.tolist()}, quad_order={self.quad_order})"

    def with_quad_order(self, quad_order: int) -> GaussianModel:
        return GaussianModel(self.spectrum, quad_order)

    def to_xi(self, x):
        return np.asarray(x, dtype=float) / self.sqrt_spectrum

    def to_ambient(self, xi):
        return np.asarray(xi, dtype=float) * self.sqrt_spectrum

    def h_basis(self, i: int) -> np.ndarray:
        """Ambient coordinates of the i-th H-orthonormal basis vector."""
        e = np.zeros(self.dim)
        e[i] = self.sqrt_spectrum[i]
        return e

    def h_coords(self, h) -> np.ndarray:
        """Coordinates of an ambient H-vector in the H-orthonormal basis."""
        h = np.asarray(h, dtype=float)
        if h.shape[-1] != self.dim:
            raise ValueError(f"dimension mismatch: expected {self.dim}, got {h.shape[-1]}")
        return h / self.sqrt_spectrum

    def cm_inner(self, h, k) -> float:
        return cm_inner(h, k, self)

    def cm_norm(self, h) -> float:
        return float(np.sqrt(cm_inner(h, h, self)))

    def density(self, x) -> np.ndarray:
        """Lebesgue density of the measure in ambient coordinates."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        q = np.sum(x**2 / self.spectrum, axis=1)
        return np.exp(-0.5 * q) / np.sqrt(np.prod(2 * np.pi * self.spectrum))

    def hat(self, i: int) -> CylFunction:
        """The standard normal functional x_i / sqrt(lambda_i)."""
        return CylFunction.from_expr(self.symbols[i], self)

    def coordinate(self, i: int) -> CylFunction:
        """The ambient coordinate x_i as a cylindrical function."""
        return CylFunction.from_expr(self.sqrt_spectrum[i] * self.symbols[i], self)

    def ambient_symbols(self):
        """Sympy expressions for the ambient coordinates in terms of ``symbols``."""
        return [sp.Float(s) * xi if s != 1.0 else xi for s, xi in zip(self.sqrt_spectrum, self.symbols)]

    def grid(self, order: int | None = None) -> QuadratureGrid:
        return tensor_grid(self, order)


def cm_inner(h, k, model: GaussianModel) -> float:
    """Cameron-Martin inner product of two ambient H-vectors."""
    h = np.asarray(h, dtype=float)
    k = np.asarray(k, dtype=float)
    if h.shape != (model.dim,) or k.shape != (model.dim,):
        raise ValueError(
            f"dimension mismatch: vectors of shape {h.shape} and {k.shape} in dimension {model.dim}"
        )
    return float(np.sum(h * k / model.spectrum))


@dataclass(frozen=True)
class QuadratureGrid:
    """Nodes (ambient coordinates) and weights of a quadrature rule for a measure."""

    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return self.weights.size

    def integrate(self, values) -> float:
        values = np.asarray(values, dtype=float)
        if not np.all(np.isfinite(values)):
            raise ValueError("non-integrable sample")
        return float(np.dot(self.weights, values))


def gauss_hermite_1d(order: int):
    """Nodes and weights for the standard normal law, weights summing to one."""
    t, w = hermegauss(order)
    return t, w / np.sqrt(2 * np.pi)


def tensor_grid(model: GaussianModel, order: int | None = None) -> QuadratureGrid:
    order = model.quad_order if order is None else int(order)
    if model.dim > MAX_TENSOR_DIM:
        raise ValueError(
            f"tensor quadrature supports dimension <= {MAX_TENSOR_DIM}, got {model.dim}"
        )
    t, w = gauss_hermite_1d(order)
    xi = np.array(list(product(t, repeat=model.dim)))
    weights = np.prod(np.array(list(product(w, repeat=model.dim))), axis=1)
    return QuadratureGrid(model.to_ambient(xi), weights)


def integrate_mu(f, model: GaussianModel, grid: QuadratureGrid | None = None) -> float:
    """Integral of ``f`` against the Gaussian measure by tensor Gauss-Hermite."""
    grid = model.grid() if grid is None else grid
    if isinstance(f, CylFunction):
        _check_active(f, model)
    values = f(grid.nodes)
    return grid.integrate(values)


def _check_active(f, model):
    if f.model.dim != model.dim:
        raise ValueError("function and model have different dimensions")


def _compile(expr, symbols):
    if expr.is_polynomial(*symbols):
        return _compile_polynomial(expr, symbols)
    fn = sp.lambdify(symbols, expr, modules="numpy")

    def evaluate(xi):
        out = fn(*xi.T)
        return np.broadcast_to(np.asarray(out, dtype=float), xi.shape[:1]).copy()

    return evaluate


def _compile_polynomial(expr, symbols):
    # power tables beat lambdify's generic pow on large node sets
    poly = expr if isinstance(expr, sp.Poly) else sp.Poly(expr, *symbols)
    terms = [(np.array(m, dtype=int), float(c)) for m, c in poly.terms()]
    top = [max((int(m[i]) for m, _ in terms), default=0) for i in range(len(symbols))]

    def evaluate(xi):
        N = xi.shape[0]
        powers = []
        for i, d in enumerate(top):
            p = np.empty((d + 1, N))
            p[0] = 1.0
            for k in range(1, d + 1):
                p[k] = p[k - 1] * xi[:, i]
            powers.append(p)
        out = np.zeros(N)
        for m, c in terms:
            term = np.full(N, c)
            for i, k in enumerate(m):
                if k:
                    term *= powers[i][k]
            out += term
        return out

    return evaluate


class CylFunction:
    """Cylindrical function with value, H-gradient and H-Hessian evaluators.

    The evaluators act on ambient points of shape ``(N, n)``.  A function built
    from a sympy expression in the standardized coordinates keeps the
    expression, which makes arithmetic and differentiation exact.
    """

    def __init__(self, model: GaussianModel, value, gradient=None, hessian=None,
                 active=None, expr=None):
        self.model = model
        self._value = value
        self._gradient = gradient
        self._hessian = hessian
        self.expr = expr
        if active is None:
            active = range(model.dim)
        self.active = tuple(sorted(set(int(i) for i in active)))
        if any(i < 0 or i >= model.dim for i in self.active):
            raise ValueError("active coordinates outside 1..n")

    @classmethod
    def from_expr(cls, expr, model: GaussianModel) -> CylFunction:
        expr = sp.sympify(expr)
        unknown = expr.free_symbols - set(model.symbols)
        if unknown:
            raise ValueError(f"expression uses symbols outside the model: {sorted(map(str, unknown))}")
        active = [i for i, s in enumerate(model.symbols) if s in expr.free_symbols]
        return cls(model, None, active=active, expr=expr)

    @classmethod
    def constant(cls, c: float, model: GaussianModel) -> CylFunction:
        return cls.from_expr(sp.Float(c) if c != int(c) else sp.Integer(int(c)), model)

    # symbolic machinery -------------------------------------------------

    @cached_property
    def _poly(self):
        """The expression as a ``Poly`` in the model symbols, or None."""
        syms = self.model.symbols
        return sp.Poly(self.expr, *syms) if self.expr.is_polynomial(*syms) else None

    @cached_property
    def _sym_value(self):
        if self._poly is not None:
            return _compile_polynomial(self._poly, self.model.symbols)
        return _compile(self.expr, self.model.symbols)

    @cached_property
    def _sym_grad(self):
        syms = self.model.symbols
        if self._poly is not None:
            return [_compile_polynomial(self._poly.diff(s), syms) for s in syms]
        return [_compile(sp.diff(self.expr, s), syms) for s in syms]

    @cached_property
    def _sym_hess(self):
        syms = self.model.symbols
        n = len(syms)
        table = {}
        for i in range(n):
            for j in range(i, n):
                if self._poly is not None:
                    table[i, j] = _compile_polynomial(self._poly.diff(syms[i]).diff(syms[j]), syms)
                else:
                    table[i, j] = _compile(sp.diff(self.expr, syms[i], syms[j]), syms)
        return table

    # evaluation ---------------------------------------------------------

    def _points(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        if x.shape[1] != self.model.dim:
            raise ValueError(f"points must have {self.model.dim} coordinates")
        return x, single

    def __call__(self, x):
        return self.value(x)

    def value(self, x):
        x, single = self._points(x)
        if self.expr is not None:
            out = self._sym_value(self.model.to_xi(x))
        else:
            out = np.asarray(self._value(x), dtype=float)
        return out[0] if single else out

    def grad(self, x):
        x, single = self._points(x)
        if self.expr is not None:
            xi = self.model.to_xi(x)
            out = np.stack([g(xi) for g in self._sym_grad], axis=1)
        elif self._gradient is None:
            raise TypeError("this function carries no gradient evaluator")
        else:
            out = np.asarray(self._gradient(x), dtype=float)
        return out[0] if single else out

    def hess(self, x):
        x, single = self._points(x)
        if self.expr is not None:
            xi = self.model.to_xi(x)
            n = self.model.dim
            out = np.empty((x.shape[0], n, n))
            for (i, j), h in self._sym_hess.items():
                out[:, i, j] = h(xi)
                out[:, j, i] = out[:, i, j]
        elif self._hessian is None:
            raise TypeError("this function carries no Hessian evaluator")
        else:
            out = np.asarray(self._hessian(x), dtype=float)
        return out[0] if single else out

    @property
    def has_hessian(self) -> bool:
        return self.expr is not None or self._hessian is not None

    # derived functions -------------------------------------------------

    def partial(self, direction) -> CylFunction:
        """Derivative along an H-direction (basis index or ambient H-vector)."""
        v = direction_vector(direction, self.model)
        if self.expr is not None:
            expr = sum(c * sp.diff(self.expr, s) for c, s in zip(v, self.model.symbols) if c != 0)
            return CylFunction.from_expr(sp.sympify(expr), self.model)
        if self._gradient is None:
            raise TypeError("cannot differentiate a function without a gradient evaluator")
        grad = self._gradient
        hess = self._hessian
        return CylFunction(
            self.model,
            lambda x: np.asarray(grad(x)) @ v,
            None if hess is None else (lambda x: np.asarray(hess(x)) @ v),
            active=self.active,
        )

    def apply(self, func) -> CylFunction:
        """Compose with a scalar sympy-compatible map, e.g. ``sympy.exp``."""
        if self.expr is None:
            raise TypeError("composition needs a symbolic function")
        return CylFunction.from_expr(func(self.expr), self.model)

    def _coerce(self, other):
        if isinstance(other, CylFunction):
            if other.model.dim != self.model.dim:
                raise ValueError("functions live on different models")
            return other
        return CylFunction.constant(float(other), self.model)

    def __add__(self, other):
        other = self._coerce(other)
        if self.expr is not None and other.expr is not None:
            return CylFunction.from_expr(self.expr + other.expr, self.model)
        return CylFunction(
            self.model,
            lambda x: self.value(x) + other.value(x),
            lambda x: self.grad(x) + other.grad(x),
            (lambda x: self.hess(x) + other.hess(x)) if self.has_hessian and other.has_hessian else None,
            active=set(self.active) | set(other.active),
        )

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if self.expr is not None and other.expr is not None:
            return CylFunction.from_expr(self.expr * other.expr, self.model)

        def value(x):
            return self.value(x) * other.value(x)

        def gradient(x):
            return self.grad(x) * other.value(x)[:, None] + self.value(x)[:, None] * other.grad(x)

        def hessian(x):
            f, g = self.value(x), other.value(x)
            df, dg = self.grad(x), other.grad(x)
            cross = df[:, :, None] * dg[:, None, :]
            return (self.hess(x) * g[:, None, None] + f[:, None, None] * other.hess(x)
                    + cross + np.swapaxes(cross, 1, 2))

        return CylFunction(
            self.model, value, gradient,
            hessian if self.has_hessian and other.has_hessian else None,
            active=set(self.active) | set(other.active),
        )

    __rmul__ = __mul__

    def __pow__(self, k: int):
        k = int(k)
        if k < 0:
            raise ValueError("only non-negative integer powers are supported")
        if self.expr is not None:
            return CylFunction.from_expr(self.expr**k, self.model)
        out = CylFunction.constant(1, self.model)
        for _ in range(k):
            out = out * self
        return out

    def __truediv__(self, c):
        return self * (1.0 / float(c))

    def __repr__(self):
        body = str(self.expr) if self.expr is not None else "<numeric>"
        return f"CylFunction({body})"


def direction_vector(direction, model: GaussianModel) -> np.ndarray:
    """H-orthonormal coordinates of a direction given as index or ambient H-vector."""
    if isinstance(direction, (int, np.integer)):
        if not 0 <= direction < model.dim:
            raise ValueError(f"direction index {direction} outside 0..{model.dim - 1}")
        v = np.zeros(model.dim)
        v[int(direction)] = 1.0
        return v
    return model.h_coords(direction)


def polynomial(coeffs: dict, model: GaussianModel, coords: str = "hat") -> CylFunction:
    """Polynomial from ``{exponent tuple: coefficient}``.

    ``coords="hat"`` reads exponents against the standardized coordinates,
    ``coords="ambient"`` against the ambient ones.
    """
    if coords == "hat":
        base = model.symbols
    elif coords == "ambient":
        base = model.ambient_symbols()
    else:
        raise ValueError("coords must be 'hat' or 'ambient'")
    expr = sp.Integer(0)
    for exps, c in coeffs.items():
        if len(exps) != model.dim:
            raise ValueError("exponent tuple length must equal the dimension")
        term = sp.Float(c)
        for b, e in zip(base, exps):
            if e:
                term *= b**int(e)
        expr += term
    return CylFunction.from_expr(expr, model)


def multi_indices(n: int, degree: int) -> list[tuple[int, ...]]:
    """Multi-indices of total degree at most ``degree``, graded then lexicographic."""
    out = [a for a in product(range(degree + 1), repeat=n) if sum(a) <= degree]
    return sorted(out, key=lambda a: (sum(a), tuple(-k for k in a)))


def hermite_fn(multi_index, model: GaussianModel) -> CylFunction:
    """Tensor Hermite polynomial, orthonormal in L^2 of the Gaussian measure."""
    multi_index = [int(k) for k in multi_index]
    if len(multi_index) > model.dim:
        raise ValueError("multi-index longer than the dimension")
    if any(k < 0 for k in multi_index):
        raise ValueError("degrees must be non-negative")
    expr = sp.Integer(1)
    for k, s in zip(multi_index, model.symbols):
        if k:
            expr *= sp.hermite_prob(k, s) / sp.sqrt(factorial(k))
    return CylFunction.from_expr(sp.expand(expr), model)


def hermite_table(t, degree: int):
    """Normalized probabilists' Hermite functions and two derivatives at ``t``.

    Returns an array of shape ``(3, len(t), degree + 1)``.
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros((3, t.size, degree + 1))
    out[0, :, 0] = 1.0
    if degree >= 1:
        out[0, :, 1] = t
    for k in range(1, degree):
        # He_{k+1} = t He_k - k He_{k-1}, normalized by sqrt((k+1)!)
        out[0, :, k + 1] = (t * out[0, :, k] - np.sqrt(k) * out[0, :, k - 1]) / np.sqrt(k + 1)
    for k in range(1, degree + 1):
        out[1, :, k] = np.sqrt(k) * out[0, :, k - 1]
    for k in range(2, degree + 1):
        out[2, :, k] = np.sqrt(k * (k - 1)) * out[0, :, k - 2]
    return out


def gaussian_moment(exponents, model: GaussianModel) -> float:
    """Closed-form moment E[prod x_i^k_i] of the centered Gaussian."""
    total = 1.0
    for k, lam in zip(exponents, model.spectrum):
        if k % 2:
            return 0.0
        double_fact = float(np.prod(np.arange(k - 1, 0, -2))) if k > 0 else 1.0
        total *= double_fact * lam ** (k // 2)
    return total
