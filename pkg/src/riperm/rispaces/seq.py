"""Symmetric sequence spaces X on R^n, normalised so that ||(1, 0, ..., 0)||_X = 1.

Norms act on the last axis, so a whole batch of diagonals (one row per
permutation) is evaluated in one call.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ..errors import ValidationError


class SeqSpace:
    label = "X"

    def norm(self, z) -> np.ndarray | float:
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.label}>"


class LpSeq(SeqSpace):
    def __init__(self, q: float):
        if not q >= 1:
            raise ValidationError("l_q needs q >= 1")
        self.q = float(q)
        self.label = "linf" if math.isinf(q) else f"l{q:g}"

    def norm(self, z):
        z = np.abs(np.asarray(z, dtype=float))
        if math.isinf(self.q):
            return z.max(axis=-1)
        if self.q == 1:
            return z.sum(axis=-1)
        return (z ** self.q).sum(axis=-1) ** (1 / self.q)


class HeadSum(SeqSpace):
    """X_m: sum of the m largest entries."""

    def __init__(self, m: int):
        if m < 1:
            raise ValidationError("head-sum space needs m >= 1")
        self.m = int(m)
        self.label = f"head{m}"

    def norm(self, z):
        z = np.abs(np.asarray(z, dtype=float))
        m = min(self.m, z.shape[-1])
        if m == z.shape[-1]:
            return z.sum(axis=-1)
        part = -np.partition(-z, m - 1, axis=-1)[..., :m]
        return part.sum(axis=-1)


class Weighted(SeqSpace):
    """sum_k z*_k w_k with w non-increasing; w is rescaled so that w_1 = 1."""

    def __init__(self, w: Sequence[float]):
        w = np.asarray(w, dtype=float)
        if w.ndim != 1 or len(w) == 0 or w[0] <= 0 or np.any(np.diff(w) > 0) or np.any(w < 0):
            raise ValidationError("weights must be non-increasing, nonnegative, w_1 > 0")
        self.w = w / w[0]
        self.label = "weighted"

    def norm(self, z):
        z = np.abs(np.asarray(z, dtype=float))
        zs = -np.sort(-z, axis=-1)
        n = zs.shape[-1]
        w = np.zeros(n)
        k = min(n, len(self.w))
        w[:k] = self.w[:k]
        return (zs * w).sum(axis=-1)


def parse_seq(text: str) -> SeqSpace:
    """``linf``, ``l<q>``, ``head<m>``."""
    if text == "linf":
        return LpSeq(math.inf)
    if text.startswith("head"):
        return HeadSum(int(text[4:]))
    if text.startswith("l"):
        return LpSeq(float(text[1:]))
    raise ValidationError(f"unknown sequence space {text!r}")
