"""Fixed quadrature rules shared by the solver modules.

Two building blocks:

* a tanh-sinh (double exponential) rule on (0,1), exact enough at modest node
  counts for integrands with algebraic endpoint singularities, and

* a composite half-line grid obtained by gluing t = u^2 on (0,1] to t = 1/s on
  [1,inf), which turns one (0,1) rule into a rule for integrals over (0,inf)
  with algebraic behaviour at both ends.

Everything here is deterministic: no adaptivity, no randomness. Levels nest
(the level L-1 tanh-sinh nodes are the even-indexed level L nodes), which the
phase module exploits for cheap error estimates.
"""

from functools import lru_cache

import numpy as np

__all__ = [
    "tanh_sinh_rule",
    "half_line_grid",
    "gauss_legendre_01",
]

# Beyond |y| ~ 18 the weights underflow the double-precision tail.
_YMAX = 18.0


@lru_cache(maxsize=32)
def _tanh_sinh_cached(level: int, ymax: float):
    h = 0.5**level
    kmax = int(np.floor(np.arcsinh(2.0 / np.pi * ymax) / h))
    k = np.arange(-kmax, kmax + 1)
    y = 0.5 * np.pi * np.sinh(k * h)
    x = 1.0 / (1.0 + np.exp(-2.0 * y))
    # complement 1-x computed without cancellation; x + xc == 1 exactly
    xc = 1.0 / (1.0 + np.exp(2.0 * y))
    w = h * 0.25 * np.pi * np.cosh(k * h) / np.cosh(y) ** 2
    for a in (x, xc, w):
        a.setflags(write=False)
    return x, w, xc


def tanh_sinh_rule(level: int = 6, ymax: float = _YMAX):
    """Nodes, weights and complements (1 - nodes) of a tanh-sinh rule on (0,1).

    ``level`` halves the step per increment; level 6 gives ~770 nodes. The
    returned arrays are read-only views of a cached rule; copy before writing.
    """
    if level < 1:
        raise ValueError("tanh-sinh level must be >= 1")
    return _tanh_sinh_cached(int(level), float(ymax))


@lru_cache(maxsize=16)
def _half_line_cached(level: int):
    u, wu, _ = _tanh_sinh_cached(level, _YMAX)
    s, ws, _ = _tanh_sinh_cached(level, _YMAX)
    t = np.concatenate([u * u, 1.0 / s])
    w = np.concatenate([wu * 2.0 * u, ws / s**2])
    order = np.argsort(t)
    t = t[order]
    w = w[order]
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def half_line_grid(level: int = 6):
    """Nodes and weights for integrals over (0, inf), sorted increasing.

    Built from the tanh-sinh rule via t = u^2 on (0,1] and t = 1/s on [1,inf).
    Handles integrands that behave like t^(a-1) near 0 (a > 0) and decay
    algebraically faster than 1/t at infinity.
    """
    return _half_line_cached(int(level))


@lru_cache(maxsize=64)
def _gl_cached(m: int):
    u, w = np.polynomial.legendre.leggauss(m)
    x = (u + 1.0) / 2.0
    w = w / 2.0
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre_01(m: int):
    """Gauss-Legendre nodes and weights mapped to (0,1), read-only and cached."""
    if m < 1:
        raise ValueError("need at least one node")
    return _gl_cached(int(m))
