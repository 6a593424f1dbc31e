"""Step functions on [0, 1]: rearrangement, head integrals, majorization.

A :class:`StepFunction` lives in one of two regimes.  In the *exact* regime the
breakpoints are :class:`~fractions.Fraction` instances (produced by permutation
enumeration, where every mass is ``m/n!``); otherwise breakpoints are binary64.
Values are rational whenever every value is an ``int``/``Fraction`` and floats
otherwise.  Majorization and head integrals are computed without rounding when
both breakpoints and values are rational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ValidationError

_BP_SNAP = 1e-9


def _is_rational(v) -> bool:
    return isinstance(v, (int, Fraction, np.integer)) and not isinstance(v, bool)


def _to_fraction(v) -> Fraction:
    return Fraction(int(v)) if isinstance(v, np.integer) else Fraction(v)


def _canonical(breakpoints, values):
    bps = list(breakpoints)
    vals = list(values)
    if len(bps) != len(vals) + 1 or not vals:
        raise ValidationError("need len(breakpoints) == len(values) + 1 >= 2")

    exact = all(_is_rational(b) for b in bps)
    if exact:
        bps = [_to_fraction(b) for b in bps]
        if bps[0] != 0 or bps[-1] != 1:
            raise ValidationError("breakpoints must start at 0 and end at 1")
    else:
        bps = [float(b) for b in bps]
        if abs(bps[0]) > _BP_SNAP or abs(bps[-1] - 1.0) > _BP_SNAP:
            raise ValidationError("breakpoints must start at 0 and end at 1")
        bps[0], bps[-1] = 0.0, 1.0

    if all(_is_rational(v) for v in vals):
        vals = [_to_fraction(v) for v in vals]
    else:
        vals = [float(v) for v in vals]
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError("values must be finite")
    if any(v < 0 for v in vals):
        raise ValidationError("values must be nonnegative")

    out_b = [bps[0]]
    out_v: list = []
    for left, right, v in zip(bps[:-1], bps[1:], vals):
        if right < left:
            raise ValidationError("breakpoints must be non-decreasing")
        if right == left:
            continue  # zero-measure piece
        if out_v and out_v[-1] == v:
            out_b[-1] = right
        else:
            out_v.append(v)
            out_b.append(right)
    if not out_v:
        raise ValidationError("step function has no positive-measure piece")
    return tuple(out_b), tuple(out_v), exact


@dataclass(frozen=True)
class StepFunction:
    """Finitely-valued nonnegative function on [0, 1] with left-closed pieces."""

    breakpoints: tuple
    values: tuple
    exact: bool = field(init=False, compare=False)

    def __post_init__(self):
        bps, vals, exact = _canonical(self.breakpoints, self.values)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "exact", exact)

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_pieces(cls, values: Sequence, widths: Sequence) -> "StepFunction":
        if len(values) != len(widths):
            raise ValidationError("values and widths differ in length")
        if all(_is_rational(w) for w in widths):
            acc = Fraction(0)
            bps = [acc]
            for w in widths:
                acc += _to_fraction(w)
                bps.append(acc)
        else:
            cum = np.concatenate([[0.0], np.cumsum(np.asarray(widths, dtype=float))])
            if abs(cum[-1] - 1.0) > _BP_SNAP:
                raise ValidationError(f"widths sum to {cum[-1]!r}, not 1")
            bps = cum.tolist()
        return cls(tuple(bps), tuple(values))

    @classmethod
    def from_vector(cls, values: Sequence) -> "StepFunction":
        """Values on the equal partition ((k-1)/n, k/n)."""
        n = len(values)
        return cls(tuple(Fraction(k, n) for k in range(n + 1)), tuple(values))

    @classmethod
    def constant(cls, c=1) -> "StepFunction":
        return cls((0, 1), (c,))

    @classmethod
    def indicator(cls, s) -> "StepFunction":
        """The characteristic function of (0, s)."""
        if not 0 <= s <= 1:
            raise DomainError("indicator support must lie in [0, 1]")
        return cls((0, s, 1), (1, 0))

    @classmethod
    def from_distribution(cls, dist: "ValueDistribution") -> "StepFunction":
        """The non-increasing step function with law ``dist``."""
        return cls.from_pieces([a[0] for a in dist.atoms], [a[1] for a in dist.atoms])

    @classmethod
    def from_json(cls, obj: dict) -> "StepFunction":
        return cls(tuple(_parse_number(b) for b in obj["breakpoints"]),
                   tuple(_parse_number(v) for v in obj["values"]))

    def to_json(self) -> dict:
        return {"breakpoints": [_dump_number(b) for b in self.breakpoints],
                "values": [_dump_number(v) for v in self.values]}

    # -- accessors ----------------------------------------------------------

    @property
    def rational(self) -> bool:
        return self.exact and isinstance(self.values[0], Fraction)

    def widths(self) -> tuple:
        b = self.breakpoints
        return tuple(b[i + 1] - b[i] for i in range(len(b) - 1))

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(values, breakpoints) as float64 arrays."""
        return (np.array([float(v) for v in self.values]),
                np.array([float(b) for b in self.breakpoints]))

    def sup(self):
        return max(self.values)

    def is_nonincreasing(self) -> bool:
        v = self.values
        return all(v[i] >= v[i + 1] for i in range(len(v) - 1))

    def distribution(self) -> "ValueDistribution":
        return ValueDistribution.from_pairs(
            (v, _to_fraction(w) if self.exact else Fraction(w))
            for v, w in zip(self.values, self.widths()))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        vals, bps = self.arrays()
        idx = np.clip(np.searchsorted(bps, t, side="right") - 1, 0, len(vals) - 1)
        return vals[idx]


def _parse_number(v):
    if isinstance(v, str):
        return Fraction(v)
    return v


def _dump_number(v):
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else str(v)
    return v


@dataclass(frozen=True)
class ValueDistribution:
    """Finite law: atoms ``(value, mass)`` sorted by decreasing value, masses exact."""

    atoms: tuple

    def __post_init__(self):
        merged: dict = {}
        for value, mass in self.atoms:
            mass = _to_fraction(mass) if _is_rational(mass) else Fraction(mass)
            if mass <= 0:
                raise ValidationError("atom masses must be positive")
            if not _is_rational(value):
                value = float(value)
                if not math.isfinite(value) or value < 0:
                    raise ValidationError("atom values must be finite and >= 0")
            else:
                value = _to_fraction(value)
                if value < 0:
                    raise ValidationError("atom values must be >= 0")
            merged[value] = merged.get(value, Fraction(0)) + mass
        if sum(merged.values()) != 1:
            raise ValidationError("atom masses must sum to exactly 1")
        atoms = tuple(sorted(merged.items(), key=lambda a: a[0], reverse=True))
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> "ValueDistribution":
        return cls(tuple(pairs))

    @classmethod
    def from_counts(cls, values: Sequence, counts: Sequence[int], total: int) -> "ValueDistribution":
        return cls(tuple((v, Fraction(int(c), total)) for v, c in zip(values, counts)))

    @classmethod
    def from_json(cls, obj: dict) -> "ValueDistribution":
        return cls(tuple((_parse_number(a["value"]), Fraction(a["num"], a["den"]))
                         for a in obj["atoms"]))

    def to_json(self) -> dict:
        return {"atoms": [{"value": _dump_number(v), "num": m.numerator, "den": m.denominator}
                          for v, m in self.atoms]}

    def mean(self):
        return sum(v * m for v, m in self.atoms)

    def to_step_function(self) -> StepFunction:
        return StepFunction.from_distribution(self)


# -- operations -------------------------------------------------------------

def decreasing_rearrangement(x: StepFunction) -> StepFunction:
    if x.is_nonincreasing():
        return x
    order = sorted(range(len(x.values)), key=lambda i: x.values[i], reverse=True)
    w = x.widths()
    if x.exact:
        return StepFunction.from_pieces([x.values[i] for i in order], [w[i] for i in order])
    # exact binary partial sums keep breakpoints reproducible
    acc = Fraction(0)
    bps = [0.0]
    for i in order:
        acc += Fraction(w[i])
        bps.append(float(acc))
    return StepFunction(tuple(bps), tuple(x.values[i] for i in order))


def distribution_function(x: StepFunction, t):
    """d_x(t) = mes{|x| > t}."""
    w = x.widths()
    return sum((wi for v, wi in zip(x.values, w) if v > t), Fraction(0) if x.exact else 0.0)


def _head_integrals_exact(xs: StepFunction, taus: Sequence) -> list:
    """Head integrals of a non-increasing rational step function at sorted taus."""
    out = []
    k = 0
    acc = Fraction(0)
    bps, vals = xs.breakpoints, xs.values
    for tau in taus:
        while k < len(vals) and bps[k + 1] <= tau:
            acc += vals[k] * (bps[k + 1] - bps[k])
            k += 1
        partial = vals[k] * (tau - bps[k]) if k < len(vals) else 0
        out.append(acc + partial)
    return out


def _head_integrals_float(xs: StepFunction, taus) -> np.ndarray:
    vals, bps = xs.arrays()
    F = np.concatenate([[0.0], np.cumsum(vals * np.diff(bps))])
    return np.interp(np.asarray(taus, dtype=float), bps, F)


def head_integral(x: StepFunction, tau):
    """Integral of x* over [0, tau]."""
    if not 0 <= tau <= 1:
        raise DomainError(f"tau={tau!r} outside [0, 1]")
    xs = decreasing_rearrangement(x)
    if xs.rational and _is_rational(tau):
        return _head_integrals_exact(xs, [_to_fraction(tau)])[0]
    return float(_head_integrals_float(xs, [tau])[0])


def majorizes(y: StepFunction, x: StepFunction) -> bool:
    """True iff x ≺ y, i.e. every head integral of x* is at most that of y*."""
    xs, ys = decreasing_rearrangement(x), decreasing_rearrangement(y)
    if xs.rational and ys.rational:
        grid = sorted(set(xs.breakpoints) | set(ys.breakpoints))
        hx = _head_integrals_exact(xs, grid)
        hy = _head_integrals_exact(ys, grid)
        return all(a <= b for a, b in zip(hx, hy))
    grid = np.union1d(xs.arrays()[1], ys.arrays()[1])
    slack = 1e-12 * max(1.0, float(xs.sup()), float(ys.sup()))
    return bool(np.all(_head_integrals_float(xs, grid) <= _head_integrals_float(ys, grid) + slack))


def vector_majorizes(y, x, axis: int = -1) -> np.ndarray | bool:
    """Vector form of x ≺ y for equal-length nonnegative vectors (batched along ``axis``).

    Integer arrays are compared exactly; float arrays with slack 1e-12·max(1, max|·|).
    """
    x = np.asarray(x)
    y = np.asarray(y)
    cx = np.cumsum(-np.sort(-x, axis=axis), axis=axis)
    cy = np.cumsum(-np.sort(-y, axis=axis), axis=axis)
    if np.issubdtype(cx.dtype, np.integer) and np.issubdtype(cy.dtype, np.integer):
        ok = np.all(cx <= cy, axis=axis)
    else:
        slack = 1e-12 * max(1.0, float(np.max(np.abs(x), initial=0)), float(np.max(np.abs(y), initial=0)))
        ok = np.all(cx <= cy + slack, axis=axis)
    return bool(ok) if np.ndim(ok) == 0 else ok


def dilated_disjoint_sum(xs: Sequence[StepFunction]) -> StepFunction:
    """C(x_1, ..., x_n): x_k dilated onto ((k-1)/n, k/n)."""
    if not xs:
        raise DomainError("dilated disjoint sum of an empty family")
    n = len(xs)
    exact = all(x.exact for x in xs)
    bps: list = [Fraction(0) if exact else 0.0]
    vals: list = []
    for k, x in enumerate(xs):
        for right, v in zip(x.breakpoints[1:], x.values):
            if exact:
                bps.append((k + right) / Fraction(n))
            else:
                bps.append((k + float(right)) / n)
            vals.append(v)
    return StepFunction(tuple(bps), tuple(vals))


def k_functional_l1_linf(t, x: StepFunction):
    """K(t, x; L_1, L_inf), equal to the head integral of x* up to min(t, 1)."""
    if not t > 0:
        raise DomainError("K-functional needs t > 0")
    return head_integral(x, min(t, 1))
