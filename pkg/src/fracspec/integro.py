"""Half-line integral system: refined eigenvalues past the asymptotics.

The eigenvalue problem reduces, after a Laplace-type transform, to a 2x2
system of integral equations on (0, inf) in a scaled variable t (the
frequency rho only enters through e^{-rho tau} and explicit prefactors):

    (A f)(t) = (1/pi) int_0^inf e^{-rho tau}/(tau + t) M(tau) f(tau) dtau,
    M = [[0, g0], [h0, 0]],

with three inhomogeneous solutions p = Ap + (1,0), q = Aq + (0,1),
r = Ar + (0,t). Their analytic continuations at t = -+i combine into two
boundary functionals xi, eta; rho is an eigenvalue's signature exactly when
Im(xi conj(eta)) = 0. Roots are isolated by scanning the normalized
condition over a bracket around the two-term asymptotic value and polished
by Brent's method.

g0 and h0 both vanish like t^alpha at 0 and decay like t^{-alpha} at
infinity, so the system is solved on a dyadically refined grid over
(0, T] with T = 40/rho (the kernel's own decay makes the tail beyond T
negligible). Fixed-point iteration contracts for every rho used here;
non-contraction raises rather than looping.

reconstruct_f_exact rebuilds the eigenfunction itself from the same
solution: one oscillatory residue term plus two boundary-layer integrals
over the half line, normalized to unit L2 norm on (0,1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .asymptotics import Order, rho_asymptotic
from .errors import AccuracyError, BracketError, ConvergenceError, DomainError
from .phase import (
    FractionalOrder,
    PhaseTable,
    Variant,
    _as_order,
    _sin_theta0_minus_api,
    b_alpha,
    g0,
    gamma0,
    h0,
    theta0,
    xc0,
)
from .quadrature import gauss_legendre_01, half_line_grid

__all__ = [
    "PQRSolution",
    "SecularValue",
    "RefinedRoot",
    "build_pqr_grid",
    "apply_A",
    "solve_pqr",
    "analytic_extend",
    "secular",
    "refine_rho",
    "c_ratio",
    "reconstruct_f_exact",
    "dump_integro_csv",
]

_T_OVER_RHO = 40.0  # truncation: e^{-rho tau} < 5e-18 past tau = 40/rho
_OCTAVES = 40  # dyadic refinement toward 0; cutoff error ~ (T 2^-40)^{1+a}
_STOP = 1e-12
_MAX_ITER = 100


def build_pqr_grid(rho: float, octaves: int = _OCTAVES, per_octave: int = 6):
    """Composite Gauss rule on (0, 40/rho], dyadically refined toward 0.

    Returns (nodes, weights), strictly increasing nodes.
    """
    if rho <= 0:
        raise DomainError("rho must be positive")
    t_max = _T_OVER_RHO / rho
    xg, wg = gauss_legendre_01(per_octave)
    nodes = []
    weights = []
    hi = t_max
    for _ in range(octaves):
        lo = hi / 2.0
        nodes.append(lo + (hi - lo) * xg)
        weights.append((hi - lo) * wg)
        hi = lo
    t = np.concatenate(nodes[::-1])
    w = np.concatenate(weights[::-1])
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


@dataclass(frozen=True, eq=False)
class PQRSolution:
    """Converged grid values of the three auxiliary solutions.

    p, q, r have shape (2, N) over the grid nodes. converged means the
    sup-norm update of every family fell below 1e-12 within the iteration
    cap; iterations is the largest count used and residuals the final
    per-family updates (p, q, r order).
    """

    rho: float
    grid: np.ndarray
    weights: np.ndarray
    p: np.ndarray
    q: np.ndarray
    r: np.ndarray
    converged: bool
    iterations: int
    residuals: tuple

    @property
    def residual(self) -> float:
        return max(self.residuals)


def _system_data(rho: float, table: PhaseTable, grid=None):
    if grid is None:
        t, w = build_pqr_grid(rho)
    else:
        t, w = grid
    gv = g0(t, table)
    hv = h0(t, table)
    e = w * np.exp(-rho * t)
    D = 1.0 / (t[None, :] + t[:, None])
    W1 = D * (e * gv)[None, :] / np.pi  # maps f2 samples to (A f)_1
    W2 = D * (e * hv)[None, :] / np.pi  # maps f1 samples to (A f)_2
    return t, w, gv, hv, e, W1, W2


def apply_A(f, rho: float, table: PhaseTable, grid=None):
    """Apply the integral operator to samples f of shape (2, N) on the grid."""
    f = np.asarray(f, dtype=float)
    t, w, gv, hv, e, W1, W2 = _system_data(rho, table, grid)
    if f.shape != (2, t.size):
        raise DomainError(f"f must have shape (2, {t.size})")
    return np.stack([W1 @ f[1], W2 @ f[0]])


def solve_pqr(rho: float, table: PhaseTable) -> PQRSolution:
    """Solve the three fixed-point systems on the dyadic grid.

    Stops when every family's sup-norm update is below 1e-12 (or after 100
    sweeps, reported via converged=False); raises ConvergenceError if the
    updates grow instead of contracting.
    """
    if rho <= 0:
        raise DomainError("rho must be positive")
    t, w, gv, hv, e, W1, W2 = _system_data(rho, table)
    n = t.size
    b = np.zeros((3, 2, n))
    b[0, 0] = 1.0  # p
    b[1, 1] = 1.0  # q
    b[2, 1] = t  # r
    f = b.copy()
    prev = np.inf
    res = np.full(3, np.inf)
    iters = _MAX_ITER
    for it in range(1, _MAX_ITER + 1):
        new0 = b[:, 0, :] + f[:, 1, :] @ W1.T
        new1 = b[:, 1, :] + f[:, 0, :] @ W2.T
        new = np.stack([new0, new1], axis=1)
        res = np.abs(new - f).max(axis=(1, 2))
        f = new
        d = float(res.max())
        if d < _STOP:
            iters = it
            break
        if d > 1.5 * prev and prev > _STOP:
            raise ConvergenceError(
                f"fixed-point iteration is not contracting at rho={rho:g}"
                f" (update grew {prev:.3e} -> {d:.3e})"
            )
        prev = d
    converged = float(res.max()) < _STOP
    return PQRSolution(
        rho=float(rho),
        grid=t,
        weights=w,
        p=f[0],
        q=f[1],
        r=f[2],
        converged=converged,
        iterations=iters,
        residuals=tuple(float(x) for x in res),
    )


def _extend_kernel(sol: PQRSolution, table: PhaseTable, z):
    t, w = sol.grid, sol.weights
    gv = g0(t, table)
    hv = h0(t, table)
    e = w * np.exp(-sol.rho * t)
    ker = e / (t[None, :] + np.asarray(z)[:, None]) / np.pi
    return ker * gv[None, :], ker * hv[None, :]


def _extend_batch(sol: PQRSolution, table: PhaseTable, z):
    """Continuation of p, q, r at points z (array); returns three (2, M)."""
    kg, kh = _extend_kernel(sol, table, z)
    zz = np.asarray(z)
    p = np.stack([kg @ sol.p[1] + 1.0, kh @ sol.p[0]])
    q = np.stack([kg @ sol.q[1], kh @ sol.q[0] + 1.0])
    r = np.stack([kg @ sol.r[1], kh @ sol.r[0] + zz])
    return p, q, r


def analytic_extend(sol: PQRSolution, z, table: PhaseTable):
    """Evaluate the continuations of p, q, r at one point z off (-inf, 0].

    On (-inf, 0] the kernel 1/(tau + z) hits the integration range, so the
    formula does not define a continuation there. Values at conjugate points
    are conjugate (all grid data is real); at a grid node the continuation
    reproduces the grid value.
    """
    zc = complex(z)
    if zc.imag == 0.0 and zc.real <= 0.0:
        raise DomainError("continuation undefined on (-inf, 0]")
    zz = np.asarray([zc])
    p, q, r = _extend_batch(sol, table, zz)
    return p[:, 0], q[:, 0], r[:, 0]


@dataclass(frozen=True, eq=False)
class SecularValue:
    """Boundary functionals at one rho; condition is Im(xi conj(eta))."""

    rho: float
    xi: complex
    eta: complex
    solution: PQRSolution

    @property
    def condition(self) -> float:
        return float(np.imag(self.xi * np.conj(self.eta)))

    @property
    def normalized(self) -> float:
        return self.condition / (abs(self.xi) * abs(self.eta))


def secular(rho: float, table: PhaseTable, solution: PQRSolution | None = None):
    """Assemble xi and eta from the continuations at -+i.

    xi  = X(rho i) p1(-i) + rho^-a e^{-rho i} Y(-rho i) p2(i)
    eta = X(rho i) rho^a [rho b q1(-i) - rho r1(-i)]
        + e^{-rho i} Y(-rho i) [rho b q2(i) - rho r2(i)]

    with X(rho i) = X_c0(i)/(rho i), Y(-rho i) = (rho i)^{a-1} X_c0(-i) and
    b = b_alpha. Im(xi conj(eta)) vanishes exactly at eigenvalue signatures
    rho = lambda^{1/(2a)}. A solution already computed at this rho can be
    passed to skip the solve.
    """
    a = table.alpha
    if solution is not None and solution.rho != float(rho):
        raise DomainError("supplied solution was computed at a different rho")
    sol = solution if solution is not None else solve_pqr(rho, table)
    pm, qm, rm = analytic_extend(sol, -1j, table)
    pp, qp, rp = analytic_extend(sol, 1j, table)
    x_i = xc0(1j, table)
    x_mi = xc0(-1j, table)
    X = x_i / (rho * 1j)
    Y = (rho * 1j) ** (a - 1.0) * x_mi
    ph = np.exp(-1j * rho)
    bal = b_alpha(table.order)
    xi = X * pm[0] + rho ** (-a) * ph * Y * pp[1]
    eta = X * rho**a * (rho * bal * qm[0] - rho * rm[0]) + ph * Y * (
        rho * bal * qp[1] - rho * rp[1]
    )
    return SecularValue(rho=float(rho), xi=complex(xi), eta=complex(eta), solution=sol)


@dataclass(frozen=True, eq=False)
class RefinedRoot:
    """A polished root of the secular condition near the n-th asymptote."""

    n: int
    rho: float
    value: SecularValue
    bracket: tuple

    @property
    def condition_residual(self) -> float:
        return abs(self.value.condition) / (
            abs(self.value.xi) * abs(self.value.eta)
        )

    @property
    def iterations(self) -> int:
        return self.value.solution.iterations


def refine_rho(
    n: int, alpha, table: PhaseTable | None = None, scan_points: int = 33
) -> RefinedRoot:
    """Refine rho_n from the two-term asymptote by a bracketed root solve.

    Scans the normalized condition on [rho_n - pi/2, rho_n + pi/2]; a sign
    change is required and reported honestly: none found raises
    BracketError (no root is guessed). The polished root must satisfy
    |Im(xi conj(eta))| < 1e-10 |xi||eta| or AccuracyError is raised.
    """
    order = _as_order(alpha)
    if order.variant is not Variant.RL_BRIDGE:
        raise DomainError("refinement applies to the rl-bridge variant")
    if not 0.5 < order.alpha < 1.0:
        raise DomainError(
            "refinement requires alpha in (1/2, 1); alpha = 1 has exact roots"
        )
    if n < 1:
        raise DomainError("n must be >= 1")
    if table is None:
        table = PhaseTable(order)
    rho0 = rho_asymptotic(n, order, Order.SECOND)
    lo = max(rho0 - np.pi / 2.0, 1e-3)
    hi = rho0 + np.pi / 2.0

    def fn(r):
        return secular(r, table).normalized

    rs = np.linspace(lo, hi, scan_points)
    vals = np.array([fn(r) for r in rs])
    sign = np.sign(vals)
    flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    if flips.size == 0:
        raise BracketError(
            f"no sign change of the secular condition in [{lo:.6g}, {hi:.6g}]"
            f" for n={n}, alpha={order.alpha:g} ({scan_points} samples)"
        )
    mids = 0.5 * (rs[flips] + rs[flips + 1])
    i = int(flips[np.argmin(np.abs(mids - rho0))])
    root = brentq(fn, rs[i], rs[i + 1], xtol=1e-13)
    sv = secular(float(root), table)
    if abs(sv.condition) >= 1e-10 * abs(sv.xi) * abs(sv.eta):
        raise AccuracyError(
            f"root at rho={root:.12g} fails the residual contract:"
            f" |Im(xi conj(eta))| = {abs(sv.condition):.3e}"
        )
    return RefinedRoot(n=n, rho=float(root), value=sv, bracket=(float(lo), float(hi)))


def c_ratio(rho: float, table: PhaseTable) -> float:
    """Coefficient ratio c1/c0 = -Re(xi/eta) at rho."""
    sv = secular(rho, table)
    return float(-np.real(sv.xi / sv.eta))


def reconstruct_f_exact(x, rho: float, table: PhaseTable):
    """Eigenfunction values at x from the integral representation.

    Intended for rho already refined by refine_rho; at non-eigenvalue rho
    the formula still evaluates but satisfies no boundary condition. The
    result has unit L2 norm on (0,1) and is positive on its first
    quarter-oscillation.

    One oscillatory term (the residue at the poles +-i rho) plus two real
    half-line integrals carrying the boundary layers at 1 and at 0. The
    integrals use the master half-line grid: their integrands decay only
    algebraically when x approaches an endpoint, far past the truncation
    radius of the solver's own grid.
    """
    a = table.alpha
    scalar = np.isscalar(x)
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any((xx < 0) | (xx > 1)):
        raise DomainError("x must lie in [0, 1]")

    sol = solve_pqr(rho, table)
    sv = secular(rho, table, solution=sol)
    c1 = float(-np.real(sv.xi / sv.eta))
    bal = b_alpha(table.order)

    tau, wt = half_line_grid(table.quadrature_order)
    # truncate the rule's extreme nodes: below 1e-10 the integrands vanish
    # like tau^{3a-1} (I2) and tau^{a+...} (I1), above 1e12 they decay like
    # tau^{-1-a} and tau^{-2a}; both omitted tails are far below the
    # representation's own accuracy, and X_c0's quadrature error estimate
    # stays within tolerance on the kept range.
    keep = (tau > 1e-10) & (tau < 1e12)
    tau, wt = tau[keep], wt[keep]
    P, Q, R = _extend_batch(sol, table, tau)
    psi0 = P[0] + c1 * rho * bal * Q[0] - c1 * rho * R[0]
    psi1 = P[1] + c1 * rho * bal * Q[1] - c1 * rho * R[1]

    th = theta0(tau, table.order)
    gm = gamma0(tau, table.order)
    xcm = xc0(np.asarray(-tau, dtype=complex), table).real
    s_api = np.sin(a * np.pi)

    # residue term: Psi0 at the pole rho*i via the continuation at -i
    pm, qm, rm = analytic_extend(sol, -1j, table)
    psi0_pole = pm[0] + c1 * rho * bal * qm[0] - c1 * rho * rm[0]
    amp = (
        (1.0 / 1j)
        * rho ** (1.0 - a)
        * np.exp(-0.5j * np.pi * a)
        * (s_api / (a * np.pi))
        * (xc0(1j, table) / (rho * 1j))
        * psi0_pole
    )

    def values(pts):
        t0 = np.real(amp * np.exp(1j * rho * pts))
        e1 = np.exp(-rho * np.outer(1.0 - pts, tau))
        i1 = e1 @ (wt * tau ** (a - 1.0) * xcm * psi1 * np.sin(th) / gm) * (
            s_api / np.pi**2
        )
        e2 = np.exp(-rho * np.outer(pts, tau))
        i2 = -(
            e2
            @ (wt / tau * xcm * psi0 * _sin_theta0_minus_api(tau, a) / gm)
            * (s_api / np.pi**2)
            * rho ** (-a)
        )
        return t0 + i1 + i2

    # normalize on a fixed internal rule so the scale is x-independent
    xn, wn = gauss_legendre_01(400)
    fn = values(xn)
    nrm = float(np.sqrt(wn @ (fn * fn)))
    if nrm == 0.0:
        raise AccuracyError("reconstructed eigenfunction vanished identically")
    win = xn < min(np.pi / (2.0 * rho), 1.0)
    s = float(wn[win] @ fn[win]) if win.any() else float(fn[0])
    sgn = -1.0 if s < 0 else 1.0

    out = sgn * values(xx) / nrm
    return float(out[0]) if scalar else out


def dump_integro_csv(roots, alpha, fh) -> None:
    """Write `n,rho_refined,rho_asym2,condition_residual,iterations` rows."""
    order = _as_order(alpha)
    fh.write("n,rho_refined,rho_asym2,condition_residual,iterations\n")
    for rt in roots:
        r2 = rho_asymptotic(rt.n, order, Order.SECOND)
        fh.write(
            f"{rt.n},{rt.rho:.12e},{r2:.12e},"
            f"{rt.condition_residual:.12e},{rt.iterations}\n"
        )
