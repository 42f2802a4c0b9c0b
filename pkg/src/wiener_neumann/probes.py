"""Seeded probe generation shared by tests, the CLI and the acceptance suite.

The generator is the 64-bit linear congruential recurrence
``state <- (A * state + C) mod 2**64`` with Knuth's MMIX constants.  Each
draw keeps the top 53 bits, giving a double uniform on ``[0, 1)``.
"""
from __future__ import annotations

import numpy as np
import sympy as sp

from .gaussian import CylFunction, GaussianModel, multi_indices

LCG_A = 6364136223846793005
LCG_C = 1442695040888963407
MASK64 = (1 << 64) - 1


class LCG:
    """64-bit linear congruential generator."""

    def __init__(self, seed: int = 0):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (LCG_A * self.state + LCG_C) & MASK64
        return self.state

    def uniform(self, size=None, low: float = 0.0, high: float = 1.0):
        if size is None:
            return low + (high - low) * (self.next_u64() >> 11) / float(1 << 53)
        n = int(np.prod(size))
        vals = np.array([(self.next_u64() >> 11) for _ in range(n)], dtype=float) / float(1 << 53)
        return (low + (high - low) * vals).reshape(size)

    def coefficients(self, n: int) -> np.ndarray:
        """``n`` coefficients uniform on ``[-1, 1)``."""
        return self.uniform((n,), -1.0, 1.0)

    def normal(self, size) -> np.ndarray:
        """Standard normal draws by Box-Muller on pairs of uniforms."""
        n = int(np.prod(size))
        m = (n + 1) // 2
        u1 = 1.0 - self.uniform((m,))
        u2 = self.uniform((m,))
        r = np.sqrt(-2 * np.log(u1))
        z = np.concatenate([r * np.cos(2 * np.pi * u2), r * np.sin(2 * np.pi * u2)])[:n]
        return z.reshape(size)


def random_polynomial_expr(symbols, degree: int, rng: LCG):
    """Polynomial with coefficients uniform on ``[-1, 1)`` over graded monomials."""
    expr = sp.Integer(0)
    exps = multi_indices(len(symbols), degree)
    for c, e in zip(rng.coefficients(len(exps)), exps):
        term = sp.Float(float(c))
        for s, k in zip(symbols, e):
            if k:
                term = term * s**k
        expr += term
    return expr


def random_polynomial(model: GaussianModel, degree: int, rng: LCG) -> CylFunction:
    """Random polynomial in the standardized coordinates."""
    return CylFunction.from_expr(random_polynomial_expr(model.symbols, degree, rng), model)


def rotated_symbols(model: GaussianModel, frame) -> list:
    """Sympy expressions for ``eta = frame^T xi``."""
    xi = sp.Matrix(model.symbols)
    return list(sp.Matrix(np.asarray(frame, dtype=float).T.tolist()) * xi)


def neumann_polynomial(domain, degree: int, rng: LCG) -> CylFunction:
    """Random ``p(eta') + (eta_1 - s)^2 q(eta)`` on a half-space.

    The normal derivative vanishes on the boundary hyperplane.
    """
    model = domain.model
    eta = rotated_symbols(model, domain.frame)
    p = random_polynomial_expr(eta[1:], degree, rng) if len(eta) > 1 else sp.Float(float(rng.coefficients(1)[0]))
    q = random_polynomial_expr(eta, max(degree - 2, 0), rng)
    expr = sp.expand(p + (eta[0] - sp.Float(domain.s)) ** 2 * q)
    return CylFunction.from_expr(expr, model)
