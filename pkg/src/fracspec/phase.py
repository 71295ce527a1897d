"""Phase functions of the spectral problem and their singular transforms.

This module holds the closed-form functions attached to the eigenvalue
problem's Hilbert boundary value structure: the phase theta0, the modulus
gamma0, the constant b_alpha = cot(pi/(2 alpha)), the Cauchy-integral
function X_c0 evaluated by double-exponential quadrature, the principal-value
weight behind g0/h0, and g0/h0 themselves.

Everything is scale-free: the frequency rho never enters any function here,
and the signatures enforce that structurally.

A PhaseTable bundles the quadrature data for one alpha. Its transform_cache
memoizes point evaluations of X_c0 and the PV weight; the cache can be
persisted to FRACSPEC_CACHE_DIR as flat text (see save_cache / load_cache).
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import AccuracyError, DomainError
from .quadrature import tanh_sinh_rule

__all__ = [
    "Variant",
    "FractionalOrder",
    "PhaseTable",
    "theta0",
    "gamma0",
    "b_alpha",
    "xc0",
    "pv_weight",
    "g0",
    "h0",
    "cache_dir",
    "save_cache",
    "load_cache",
]


class Variant(Enum):
    """Which boundary-value problem the order belongs to."""

    RL_BRIDGE = "rl-bridge"
    CAPUTO = "caputo"


@dataclass(frozen=True)
class FractionalOrder:
    """Fractional order alpha tagged with the problem variant.

    The rl-bridge problem needs alpha in (1/2, 1]; caputo allows (0, 1].
    alpha = 1 is admitted in both variants as the classical degeneration
    (sine eigenfunctions), which several checks exercise directly.
    """

    alpha: float
    variant: Variant = Variant.RL_BRIDGE

    def __post_init__(self):
        a = self.alpha
        if not np.isfinite(a):
            raise DomainError(f"alpha must be finite, got {a!r}")
        if self.variant is Variant.RL_BRIDGE:
            if not 0.5 < a <= 1.0:
                raise DomainError(
                    f"rl-bridge variant requires alpha in (1/2, 1], got {a}"
                )
        else:
            if not 0.0 < a <= 1.0:
                raise DomainError(f"caputo variant requires alpha in (0, 1], got {a}")


def _as_order(alpha) -> FractionalOrder:
    if isinstance(alpha, FractionalOrder):
        return alpha
    return FractionalOrder(float(alpha))


def _check_positive(t):
    t = np.asarray(t, dtype=float)
    if t.size and np.any(t <= 0.0):
        raise DomainError("t must be positive")
    return t


def theta0(t, alpha):
    """Phase theta0(t) = -atan(sin(a pi) / (t^{2a} - cos(a pi))).

    Nonpositive, nondecreasing, with limits (a-1)pi at 0+ and 0 at infinity.
    Only defined for the rl-bridge variant (the denominator stays positive
    exactly when a > 1/2).
    """
    order = _as_order(alpha)
    if order.variant is not Variant.RL_BRIDGE:
        raise DomainError("theta0 is defined for the rl-bridge variant only")
    a = order.alpha
    tt = _check_positive(t)
    val = -np.arctan(np.sin(a * np.pi) / (tt ** (2 * a) - np.cos(a * np.pi)))
    return float(val) if np.isscalar(t) else val


def gamma0(t, alpha):
    """Modulus factor gamma0(t) = (t^{2a} - 2 cos(a pi) + t^{-2a})^{1/2}."""
    a = _as_order(alpha).alpha
    tt = _check_positive(t)
    val = np.sqrt(tt ** (2 * a) - 2.0 * np.cos(a * np.pi) + tt ** (-2 * a))
    return float(val) if np.isscalar(t) else val


def b_alpha(alpha) -> float:
    """The constant b_alpha = cot(pi / (2 alpha)), for alpha in (1/2, 1]."""
    a = _as_order(alpha).alpha
    if not 0.5 < a <= 1.0:
        raise DomainError(f"b_alpha requires alpha in (1/2, 1], got {a}")
    return 1.0 / np.tan(np.pi / (2.0 * a))


def _sin_theta0_minus_api(t, a):
    # sin(theta0 - a pi) == -sin(a pi) t^a / gamma0(t), an exact identity.
    # Evaluating the left side directly loses all digits as t -> 0 (the
    # argument approaches -pi), so the closed form is used.
    return -np.sin(a * np.pi) * t**a / gamma0(t, FractionalOrder(a))


class PhaseTable:
    """Quadrature data for one alpha: nodes, phase samples, transform cache.

    The Cauchy integral over (0, inf) is split as t = u^2 on (0,1] and
    t = 1/s on [1, inf); both pieces use one tanh-sinh rule. Tanh-sinh levels
    nest, so each evaluation also yields the coarser level's value for free;
    the difference drives the accuracy-error contract.
    """

    def __init__(self, order, level: int = 6, tol: float = 1e-10):
        order = _as_order(order)
        if order.variant is not Variant.RL_BRIDGE:
            raise DomainError("PhaseTable requires the rl-bridge variant")
        self.order = order
        self.alpha = order.alpha
        self.quadrature_order = int(level)
        self.tol = float(tol)
        a = self.alpha

        u, wu, _ = tanh_sinh_rule(level)
        self._t1 = u * u
        th1 = theta0(self._t1, order)
        self._coef1 = wu * th1 * 2.0 * u

        s, ws, _ = tanh_sinh_rule(level)
        self._s = s
        self._t2 = 1.0 / s
        th2 = theta0(self._t2, order)
        self._coef2 = ws * th2 / s
        self._coef2_plain = ws * th2 / s**2

        # nesting mask: even-index k of the symmetric tanh-sinh rule
        n1 = self._t1.size
        k1 = np.arange(n1) - n1 // 2
        self._even1 = k1 % 2 == 0
        n2 = self._s.size
        k2 = np.arange(n2) - n2 // 2
        self._even2 = k2 % 2 == 0

        # PV rule on sigma in (0,1), with complement kept for stability
        self._sig, self._wsig, self._sigc = tanh_sinh_rule(level)
        npv = self._sig.size
        kpv = np.arange(npv) - npv // 2
        self._evenpv = kpv % 2 == 0

        nodes = np.concatenate([self._t1, self._t2])
        values = np.concatenate([th1, th2])
        idx = np.argsort(nodes)
        self.nodes = nodes[idx]
        self.theta0_values = values[idx]

        self.transform_cache: dict = {}
        self._lock = threading.Lock()
        self._aux: dict = {}  # derived sample arrays (layer integrands etc.)

    # -- Cauchy transform ------------------------------------------------

    def _cauchy(self, z):
        """(1/pi) int theta0(t)/(t - z) dt and its nesting error estimate."""
        z = np.asarray(z)
        zz = z[..., None]
        q1 = self._coef1 / (self._t1 - zz)
        q2 = self._coef2 / (1.0 - self._s * zz)
        fine = (q1.sum(axis=-1) + q2.sum(axis=-1)) / np.pi
        coarse = (
            2.0 * q1[..., self._even1].sum(axis=-1)
            + 2.0 * q2[..., self._even2].sum(axis=-1)
        ) / np.pi
        return fine, np.abs(fine - coarse)

    def _pv_exponent(self, t):
        """Exponent of the PV weight, with singularity subtraction.

        The PV integral (2t/pi) int theta0(tau)/(tau^2 - t^2) dtau is mapped
        by tau = t*sigma^{+-1} onto (0,1); subtracting theta0(t) removes the
        singularity and the difference of phases is evaluated through one
        atan of a stable quotient.
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        a = self.alpha
        sig, w, sigc = self._sig, self._wsig, self._sigc
        c = np.cos(a * np.pi)
        s2 = np.sin(a * np.pi)
        tt = t[:, None] ** (2 * a)
        lo = np.log(sig)

        def dtheta(tau_pow, t_pow, diff):
            return -np.arctan(s2 * diff / ((tau_pow - c) * (t_pow - c) + s2 * s2))

        d_hi = -tt * np.expm1(-2 * a * lo)[None, :]
        tau_hi = tt * sig[None, :] ** (-2 * a)
        d_lo = -tt * np.expm1(2 * a * lo)[None, :]
        tau_lo = tt * sig[None, :] ** (2 * a)
        num = dtheta(tau_hi, tt, d_hi) - dtheta(tau_lo, tt, d_lo)
        q = w * num / (sigc * (1.0 + sig))
        fine = q.sum(axis=-1)
        coarse = 2.0 * q[:, self._evenpv].sum(axis=-1)
        return -(2.0 / np.pi) * fine, (2.0 / np.pi) * np.abs(fine - coarse)


def _on_cut(z) -> bool:
    z = complex(z)
    return z.imag == 0.0 and z.real >= 0.0


def xc0(z, table: PhaseTable):
    """X_c0(z) = exp((1/pi) int_0^inf theta0(t)/(t - z) dt), z off [0, inf).

    Scalar complex arguments are memoized in the table's transform_cache
    (repeat calls are bit-identical); array arguments take a vectorized
    uncached path. Raises AccuracyError when the quadrature's internal error
    estimate exceeds the table tolerance.
    """
    if isinstance(z, np.ndarray):
        if np.any((z.imag == 0.0) & (z.real >= 0.0)):
            raise DomainError("xc0 is undefined on the cut [0, inf)")
        val, err = table._cauchy(z)
        if err.size and float(err.max()) > table.tol:
            raise AccuracyError(
                f"xc0 quadrature error estimate {float(err.max()):.3e} > tol"
            )
        return np.exp(val)

    zc = complex(z)
    if _on_cut(zc):
        raise DomainError("xc0 is undefined on the cut [0, inf)")
    key = ("xc0", (zc.real, zc.imag))
    with table._lock:
        hit = table.transform_cache.get(key)
    if hit is not None:
        return hit
    val, err = table._cauchy(np.asarray(zc))
    if float(err) > table.tol:
        raise AccuracyError(f"xc0 quadrature error estimate {float(err):.3e} > tol")
    out = complex(np.exp(val))
    if out.imag == 0.0:
        out = complex(out.real, 0.0)
    with table._lock:
        table.transform_cache.setdefault(key, out)
    return out


def pv_weight(t, table: PhaseTable):
    """exp(-(2t/pi) PV int theta0(tau)/(tau^2 - t^2) dtau), for t > 0."""
    arr = isinstance(t, np.ndarray)
    tt = _check_positive(t)
    if arr:
        expo, err = table._pv_exponent(tt)
        if err.size and float(err.max()) > table.tol:
            raise AccuracyError(
                f"pv quadrature error estimate {float(err.max()):.3e} > tol"
            )
        return np.exp(expo)
    tv = float(tt)
    key = ("pv", tv)
    with table._lock:
        hit = table.transform_cache.get(key)
    if hit is not None:
        return hit
    expo, err = table._pv_exponent(tv)
    if float(err[0]) > table.tol:
        raise AccuracyError(f"pv quadrature error estimate {float(err[0]):.3e} > tol")
    out = float(np.exp(expo[0]))
    with table._lock:
        table.transform_cache.setdefault(key, out)
    return out


def g0(t, table: PhaseTable):
    """g0(t) = t^alpha sin(theta0(t)) pv_weight(t); negative on (0, inf)."""
    a = table.alpha
    if np.isscalar(t):
        tv = float(t)
        return tv**a * np.sin(theta0(tv, table.order)) * pv_weight(tv, table)
    tt = _check_positive(t)
    return tt**a * np.sin(theta0(tt, table.order)) * pv_weight(tt, table)


def h0(t, table: PhaseTable):
    """h0(t) = -t^{-alpha} sin(theta0(t) - alpha pi) pv_weight(t)."""
    a = table.alpha
    if np.isscalar(t):
        tv = float(t)
        return -(tv ** (-a)) * float(_sin_theta0_minus_api(tv, a)) * pv_weight(
            tv, table
        )
    tt = _check_positive(t)
    return -(tt ** (-a)) * _sin_theta0_minus_api(tt, a) * pv_weight(tt, table)


# -- disk cache ----------------------------------------------------------


def cache_dir() -> str | None:
    """Cache directory from FRACSPEC_CACHE_DIR, or None (no persistence)."""
    d = os.environ.get("FRACSPEC_CACHE_DIR", "").strip()
    return d or None


def _g17(v: float) -> str:
    return f"{float(v):.17g}"


def _cache_path(alpha: float, directory: str) -> str:
    return os.path.join(directory, f"phase_{_g17(alpha)}.txt")


def cache_records(table: PhaseTable) -> list[str]:
    """All cache records of a table in deterministic order."""
    a = _g17(table.alpha)
    lines = [
        f"alpha={a} kind=theta0 key={_g17(t)} value={_g17(v)}"
        for t, v in zip(table.nodes, table.theta0_values)
    ]
    with table._lock:
        items = sorted(table.transform_cache.items(), key=lambda kv: kv[0])
    for (kind, key), value in items:
        if kind == "xc0":
            lines.append(
                f"alpha={a} kind=xc0 key={_g17(key[0])},{_g17(key[1])}"
                f" value={_g17(value.real)},{_g17(value.imag)}"
            )
        elif kind == "pv":
            lines.append(f"alpha={a} kind=pv key={_g17(key)} value={_g17(value)}")
    return lines


def save_cache(table: PhaseTable, directory: str | None = None) -> str | None:
    """Write the table's records to the cache directory; returns the path.

    Returns None (writes nothing) when no directory is configured.
    """
    directory = directory or cache_dir()
    if directory is None:
        return None
    os.makedirs(directory, exist_ok=True)
    path = _cache_path(table.alpha, directory)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(cache_records(table)) + "\n")
    return path


def load_cache(table: PhaseTable, directory: str | None = None) -> int:
    """Populate the transform_cache from disk; returns records loaded."""
    directory = directory or cache_dir()
    if directory is None:
        return 0
    path = _cache_path(table.alpha, directory)
    if not os.path.exists(path):
        return 0
    want_alpha = _g17(table.alpha)
    n = 0
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            fields = dict(part.split("=", 1) for part in line.split(" "))
            if fields.get("alpha") != want_alpha:
                continue
            kind = fields.get("kind")
            key = fields.get("key", "")
            value = fields.get("value", "")
            if kind == "xc0":
                kr, ki = (float(x) for x in key.split(","))
                vr, vi = (float(x) for x in value.split(","))
                with table._lock:
                    table.transform_cache[("xc0", (kr, ki))] = complex(vr, vi)
                n += 1
            elif kind == "pv":
                with table._lock:
                    table.transform_cache[("pv", float(key))] = float(value)
                n += 1
            elif kind == "theta0":
                n += 1  # table nodes are rebuilt, record only counted
    return n
