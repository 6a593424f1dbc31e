"""Quasi-concave functions on [0, 1] parametrising Lorentz and Marcinkiewicz norms.

Every phi is vectorised and additionally exposes ``log_eval(L) = log phi(e^L)`` so
that arguments far below the binary64 range (``t^j / j!`` for large ``j``) can be
handled without underflow.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from ..errors import DomainError, ValidationError

LOG2 = math.log(2.0)

_VALIDATION_GRID = np.unique(np.concatenate([
    np.logspace(-12, 0, 241), np.linspace(0.0, 1.0, 257)]))


class PhiSpec:
    """Base class; subclasses implement ``_eval`` (t > 0) and optionally ``log_eval``."""

    label = "phi"
    kinks: tuple = ()

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        pos = t > 0
        out[pos] = self._eval(t[pos])
        return out if out.ndim else float(out)

    def _eval(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def log_eval(self, logt):
        logt = np.asarray(logt, dtype=float)
        with np.errstate(divide="ignore"):
            return np.log(self(np.exp(logt)))

    def powered(self, lam: float) -> "PhiSpec":
        """phi**lam."""
        base = self
        return FunctionPhi(lambda t: base(t) ** lam,
                           log_fn=lambda L: lam * base.log_eval(L),
                           label=f"({self.label})^{lam:g}", kinks=self.kinks)

    def __repr__(self):
        return f"<{type(self).__name__} {self.label}>"


class PowerPhi(PhiSpec):
    """min(1, a t^alpha)."""

    def __init__(self, a: float = 1.0, alpha: float = 1.0, check: bool = True):
        if a < 1 or not 0 < alpha <= 1:
            raise ValidationError("power phi needs a >= 1 and alpha in (0, 1]")
        self.a, self.alpha = float(a), float(alpha)
        self.label = f"power:{a:g}:{alpha:g}"
        self.kinks = (self.a ** (-1 / self.alpha),) if a > 1 else ()
        if check:
            check_phi(self)

    def _eval(self, t):
        return np.minimum(1.0, self.a * t ** self.alpha)

    def log_eval(self, logt):
        return np.minimum(0.0, math.log(self.a) + self.alpha * np.asarray(logt, dtype=float))


class LogPhi(PhiSpec):
    """(log(1 + 1/t) / log 2)^(-1/p).

    In Φ for p >= 1; for small p only concave near the origin, so the
    quasi-concavity check is skipped below p = 1.
    """

    def __init__(self, p: float, check: bool = True):
        if p <= 0:
            raise ValidationError("log family needs p > 0")
        self.p = float(p)
        self.label = f"phi_p:{p:g}"
        if check:
            check_phi(self, quasi_concave=self.p >= 1)

    def _eval(self, t):
        return np.exp(self.log_eval(np.log(t)))

    def log_eval(self, logt):
        logt = np.asarray(logt, dtype=float)
        # log(1 + 1/t) = logaddexp(0, -log t)
        with np.errstate(divide="ignore"):
            return (math.log(LOG2) - np.log(np.logaddexp(0.0, -logt))) / self.p


class TabulatedPhi(PhiSpec):
    """Piecewise-linear interpolation of (t, phi) samples; (0, 0) is implied."""

    def __init__(self, ts: Sequence[float], vals: Sequence[float], *, normalized: bool = True,
                 check: bool = True, label: str = "tabulated"):
        ts = np.asarray(ts, dtype=float)
        vals = np.asarray(vals, dtype=float)
        if ts.shape != vals.shape or ts.ndim != 1 or len(ts) < 1:
            raise ValidationError("tabulated phi needs matching 1-d arrays")
        if ts[0] != 0.0:
            ts = np.concatenate([[0.0], ts])
            vals = np.concatenate([[0.0], vals])
        if np.any(np.diff(ts) <= 0) or ts[-1] != 1.0:
            raise ValidationError("tabulated phi needs increasing t ending at 1")
        if vals[0] != 0.0:
            raise ValidationError("tabulated phi needs phi(0) = 0")
        self.ts, self.vals = ts, vals
        self.label = label
        self.kinks = tuple(ts[1:-1])
        if check:
            check_phi(self, normalized=normalized)

    def _eval(self, t):
        return np.interp(t, self.ts, self.vals)


class PlateauPhi(PhiSpec):
    """a t^alpha on [0, s], a s^alpha on [s, a s^alpha], t on [a s^alpha, 1]."""

    def __init__(self, a: float, alpha: float, s: float, check: bool = True):
        if a < 1 or not 0 < alpha <= 1:
            raise ValidationError("needs a >= 1 and alpha in (0, 1]")
        if not 0 < s < a ** (-1 / alpha):
            raise ValidationError("needs 0 < s < a^(-1/alpha)")
        self.a, self.alpha, self.s = float(a), float(alpha), float(s)
        self.level = self.a * self.s ** self.alpha
        self.label = f"plateau:{a:g}:{alpha:g}:{s:g}"
        self.kinks = (self.s, self.level)
        if check:
            check_phi(self)

    def _eval(self, t):
        return np.where(t <= self.s, self.a * t ** self.alpha,
                        np.where(t <= self.level, self.level, t))

    def log_eval(self, logt):
        logt = np.asarray(logt, dtype=float)
        ls, ll = math.log(self.s), math.log(self.level)
        return np.where(logt <= ls, math.log(self.a) + self.alpha * logt,
                        np.where(logt <= ll, ll, logt))


class FunctionPhi(PhiSpec):
    """Wraps an arbitrary vectorised callable; no validation unless asked."""

    def __init__(self, fn: Callable, *, log_fn: Callable | None = None, label: str = "custom",
                 kinks: Sequence[float] = (), check: bool = False, normalized: bool = True):
        self.fn = fn
        self.log_fn = log_fn
        self.label = label
        self.kinks = tuple(kinks)
        if check:
            check_phi(self, normalized=normalized)

    def _eval(self, t):
        return np.asarray(self.fn(t), dtype=float)

    def log_eval(self, logt):
        if self.log_fn is not None:
            return np.asarray(self.log_fn(np.asarray(logt, dtype=float)), dtype=float)
        return super().log_eval(logt)


def phi_eval(phi: PhiSpec, t):
    t_arr = np.asarray(t, dtype=float)
    if np.any((t_arr < 0) | (t_arr > 1)):
        raise DomainError("phi is defined on [0, 1]")
    return phi(t)


def is_quasi_concave(phi: PhiSpec, grid=None, rtol: float = 1e-12) -> bool:
    grid = _VALIDATION_GRID if grid is None else np.asarray(grid, dtype=float)
    g = grid[grid > 0]
    v = phi(g)
    if np.any(v <= 0):
        return False
    ratio = g / v
    return bool(np.all(np.diff(v) >= -rtol * v[1:]) and np.all(np.diff(ratio) >= -rtol * ratio[1:]))


def check_phi(phi: PhiSpec, grid=None, *, normalized: bool = True, quasi_concave: bool = True) -> None:
    """Raise ValidationError unless phi(0)=0, phi(1)=1, monotone, quasi-concave."""
    if phi(0.0) != 0.0:
        raise ValidationError(f"{phi.label}: phi(0) != 0")
    if normalized and abs(phi(1.0) - 1.0) > 1e-12:
        raise ValidationError(f"{phi.label}: phi(1) != 1")
    grid = _VALIDATION_GRID if grid is None else np.asarray(grid, dtype=float)
    v = phi(grid)
    if np.any(np.diff(v) < -1e-12 * np.abs(v[1:])):
        raise ValidationError(f"{phi.label}: phi is not non-decreasing")
    if quasi_concave and not is_quasi_concave(phi, grid):
        raise ValidationError(f"{phi.label}: t/phi(t) is not non-decreasing")


def _upper_hull(t: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Values on ``t`` of the least concave function above the points (t, v)."""
    hull: list[int] = []
    for i in range(len(t)):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            # drop i1 if it lies on or below the chord i0 -> i
            cross = (t[i1] - t[i0]) * (v[i] - v[i0]) - (v[i1] - v[i0]) * (t[i] - t[i0])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return np.maximum(np.interp(t, t[hull], v[hull]), v)


def log_family_hull(p: float, points: int = 4001) -> FunctionPhi:
    """Least concave majorant of phi_p.

    For p < 1 the log family is concave only near 0; its majorant is an equivalent
    concave function, so Lambda(majorant) is a genuine r.i. norm.  The hull is found
    on a geometric grid down to 1e-16; evaluation takes max(hull chord, phi_p), which
    is exact where the hull touches phi_p and linear on the chords.
    """
    base = LogPhi(p, check=False)
    ts = np.concatenate([[0.0], np.geomspace(1e-16, 1.0, points)])
    env = _upper_hull(ts, base(ts))
    touch = np.isclose(env, base(ts), rtol=1e-13, atol=0.0)
    kinks = tuple(ts[1:][np.diff(touch.astype(int)) != 0])
    return FunctionPhi(lambda t: np.maximum(np.interp(t, ts, env), base(t)),
                       label=f"phi_p_hat:{p:g}", kinks=kinks)


def concave_majorant(ts, psi_vals=None, *, normalized: bool | None = None) -> TabulatedPhi:
    """Least concave majorant of a tabulated quasi-concave function.

    Accepts a :class:`TabulatedPhi` or raw sample arrays.  The returned envelope
    phi satisfies ``phi/2 <= psi <= phi`` at every sample point (checked).
    """
    if isinstance(ts, TabulatedPhi):
        ts, psi_vals = ts.ts, ts.vals
    t = np.asarray(ts, dtype=float)
    v = np.asarray(psi_vals, dtype=float)
    if t[0] != 0.0:
        t = np.concatenate([[0.0], t])
        v = np.concatenate([[0.0], v])
    pos = t > 0
    if np.any(np.diff(v) < -1e-12 * np.abs(v[1:])):
        raise ValidationError("psi is not non-decreasing")
    ratio = t[pos] / np.where(v[pos] > 0, v[pos], np.nan)
    if np.any(v[pos] <= 0) or np.any(np.diff(ratio) < -1e-12 * ratio[1:]):
        raise ValidationError("psi is not quasi-concave on its grid")

    env = _upper_hull(t, v)
    if np.any(0.5 * env > v * (1 + 1e-12) + 1e-300):
        raise ValidationError("envelope violates phi/2 <= psi")
    if normalized is None:
        normalized = abs(env[-1] - 1.0) <= 1e-12
    return TabulatedPhi(t, env, normalized=normalized, check=False, label="concave_majorant")


def psi_y(y, t=None):
    """psi_y(t) = (int_0^t y* + t) / (||y||_1 + 1).

    With ``t`` given returns the value; otherwise returns the function as a PhiSpec.
    """
    from ..stepcore import decreasing_rearrangement

    ys = decreasing_rearrangement(y)
    vals, bps = ys.arrays()
    F = np.concatenate([[0.0], np.cumsum(vals * np.diff(bps))])
    l1 = F[-1]

    def fn(s):
        s = np.asarray(s, dtype=float)
        return (np.interp(s, bps, F) + s) / (l1 + 1.0)

    phi = FunctionPhi(fn, label="psi_y", kinks=tuple(bps[1:-1]))
    if t is None:
        return phi
    return phi_eval(phi, t)
