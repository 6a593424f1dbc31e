"""Fixed points of random permutations, in exact integer/rational arithmetic.

``mu(n, k, j)`` is the probability that a uniform permutation of n letters has
exactly j fixed points among positions 1..k.  Writing A(m, r) for the number of
permutations of m letters with no fixed point among the first r positions,

    n! mu(n, k, j) = C(k, j) A(n - j, k - j),   A(m, r) = A(m, r-1) - A(m-1, r-1),

with A(m, 0) = m!.  Everything below is built on those two identities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .stepcore import StepFunction


@lru_cache(maxsize=None)
def factorial(n: int) -> int:
    return math.factorial(n)


def _check(n: int, k: int, j: int) -> None:
    if n < 1 or not 0 <= j <= k <= n:
        raise DomainError(f"need 0 <= j <= k <= n, n >= 1 (got n={n}, k={k}, j={j})")


def b_count(n: int, k: int, j: int) -> int:
    """n! mu(n, k, j) by inclusion-exclusion."""
    _check(n, k, j)
    r = k - j
    m = n - j
    total = sum((-1) ** i * math.comb(r, i) * factorial(m - i) for i in range(r + 1))
    return math.comb(k, j) * total


def mu_exact(n: int, k: int, j: int) -> Fraction:
    return Fraction(b_count(n, k, j), factorial(n))


@lru_cache(maxsize=8)
def avoid_table(m_max: int) -> tuple:
    """A(m, r) for 0 <= r <= m <= m_max as nested tuples of ints."""
    rows = [[factorial(m)] for m in range(m_max + 1)]
    for r in range(1, m_max + 1):
        for m in range(r, m_max + 1):
            rows[m].append(rows[m][r - 1] - rows[m - 1][r - 1])
    return tuple(tuple(row) for row in rows)


def b_table(n_max: int):
    """Yield (n, k, j, B) for all 1 <= n <= n_max, 0 <= j <= k <= n, with B = n! mu exactly."""
    A = avoid_table(n_max)
    for n in range(1, n_max + 1):
        for k in range(n + 1):
            for j in range(k + 1):
                yield n, k, j, math.comb(k, j) * A[n - j][k - j]


@dataclass(frozen=True)
class CoincidenceTable:
    n: int
    k: int
    mu: tuple

    @classmethod
    def build(cls, n: int, k: int) -> "CoincidenceTable":
        _check(n, k, 0)
        return cls(n, k, tuple(mu_exact(n, k, j) for j in range(k + 1)))

    def total(self) -> Fraction:
        return sum(self.mu, Fraction(0))

    def to_json(self) -> dict:
        return {"n": self.n, "k": self.k,
                "mu": [{"j": j, "num": m.numerator, "den": m.denominator, "float": float(m)}
                       for j, m in enumerate(self.mu)]}


@dataclass(frozen=True)
class BreakpointProfile:
    """Law of the number of fixed points: s[j] = P(j fixed points), tau[j] = P(>= j), j = 0..n."""

    n: int
    s: tuple
    tau: tuple

    def step_function(self) -> StepFunction:
        """Non-increasing rearrangement of T_1 I_n: value j on [tau_{j+1}, tau_j)."""
        vals = [j for j in range(self.n, -1, -1) if self.s[j] > 0]
        widths = [self.s[j] for j in vals]
        return StepFunction.from_pieces(vals, widths)


def fixed_point_distribution(n: int) -> BreakpointProfile:
    if n < 1:
        raise DomainError("n must be >= 1")
    s = []
    for j in range(n + 1):
        acc = sum((Fraction((-1) ** i, factorial(i)) for i in range(n - j + 1)), Fraction(0))
        s.append(acc / factorial(j))
    tau = []
    acc = Fraction(0)
    for j in range(n, -1, -1):
        acc += s[j]
        tau.append(acc)
    return BreakpointProfile(n, tuple(s), tuple(reversed(tau)))


# -- the C = 6 condition for T_1 I_n -------------------------------------------

def _concavity_ratio(bps, vals, alpha: float, taus: np.ndarray) -> np.ndarray:
    """tau^(1-alpha) (int_0^tau f)^alpha / int_0^tau f^alpha for non-increasing f."""
    F = np.concatenate([[0.0], np.cumsum(vals * np.diff(bps))])
    G = np.concatenate([[0.0], np.cumsum(vals ** alpha * np.diff(bps))])
    Ft = np.interp(taus, bps, F)
    Gt = np.interp(taus, bps, G)
    return taus ** (1 - alpha) * Ft ** alpha / Gt


def ratio_grid(bps: np.ndarray, fill: int = 16) -> np.ndarray:
    """Breakpoints plus geometric fill points inside every piece."""
    pts = [bps[1:]]
    for a, b in zip(bps[:-1], bps[1:]):
        lo = a if a > 0 else b * 1e-6
        pts.append(np.geomspace(lo, b, fill + 2)[1:-1])
    return np.unique(np.concatenate(pts))


def concavity_ratio_max(f: StepFunction, alpha: float, fill: int = 16) -> tuple[float, float]:
    """max over tau of the ratio above for f*; returns (max ratio, argmax tau)."""
    from .stepcore import decreasing_rearrangement

    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    vals, bps = decreasing_rearrangement(f).arrays()
    if not np.any(vals > 0):
        raise DomainError("f vanishes identically")
    taus = ratio_grid(bps, fill)
    taus = taus[taus > 0]
    r = _concavity_ratio(bps, vals, alpha, taus)
    i = int(np.argmax(r))
    return float(r[i]), float(taus[i])


@dataclass(frozen=True)
class FixedPointConcavity:
    n: int
    alpha: float
    max_ratio: float
    witness_tau: float
    max_ratio_at_breakpoints: float


def fixed_point_concavity(n: int, alpha: float, fill: int = 16) -> FixedPointConcavity:
    """Condition (C = 6) for f = T_1 I_n on breakpoints plus fill points."""
    if n < 2:
        raise DomainError("n must be >= 2")
    prof = fixed_point_distribution(n)
    f = prof.step_function()
    best, tau = concavity_ratio_max(f, alpha, fill)
    vals, bps = f.arrays()
    taus = np.array([float(t) for t in prof.tau[1:] if t > 0])
    at_bp = float(np.max(_concavity_ratio(bps, vals, alpha, taus)))
    return FixedPointConcavity(n, alpha, best, tau, at_bp)


def fixed_point_tail_inequalities(n: int) -> dict:
    """Exact checks tau_j <= 3 s_j and sum_{i>=j} i s_i <= 3 j s_j for 1 <= j <= n, j != n-1."""
    prof = fixed_point_distribution(n)
    s, tau = prof.s, prof.tau
    bad14, bad15 = [], []
    for j in range(1, n + 1):
        if j == n - 1:
            continue
        if not tau[j] <= 3 * s[j]:
            bad14.append(j)
        if not sum((i * s[i] for i in range(j, n + 1)), Fraction(0)) <= 3 * j * s[j]:
            bad15.append(j)
    return {"n": n, "tail_violations": bad14, "weighted_tail_violations": bad15}


# -- bounds on mu for k <= ns ----------------------------------------------------

def upper_bound_violations(n_max: int, s_values=None) -> list:
    """Exact check of mu(n,k,j) <= (k/n)^j / j! for all n <= n_max and, for each s in
    ``s_values`` with k <= floor(n s), of mu(n,k,j) <= s^j / j!.  Returns violating cells."""
    bad = []
    s_fr = [Fraction(str(s)) for s in (s_values or [])]
    for n, k, j, B in b_table(n_max):
        if j == 0:
            continue
        # mu <= (k/n)^j/j!  <=>  B j! n^j <= k^j n!
        lhs = B * factorial(j)
        if lhs * n ** j > k ** j * factorial(n):
            bad.append(("chain", n, k, j))
        for s in s_fr:
            if k <= s * n and lhs * s.denominator ** j > s.numerator ** j * factorial(n):
                bad.append((str(s), n, k, j))
    return bad


@dataclass(frozen=True)
class MuSupBounds:
    s: float
    j: int
    n_max: int
    sup_estimate: float
    argmax_n: int
    upper: float
    lower: float
    delta: float  # relative shortfall of the sup below the lower bound (<= 0 means attained)
    upper_ok: bool


def mu_sup_bounds(s: float, j: int, n_max: int) -> MuSupBounds:
    """sup over n <= n_max, k <= floor(n s) of mu(n, k, j), against s^j/j! and s^j/(e j!).

    The sup is found in exact arithmetic; ``upper_ok`` compares it with s^j/j! exactly.
    """
    if not 0 < s < 1 or j < 1:
        raise DomainError("need 0 < s < 1 and j >= 1")
    s_fr = Fraction(str(s))
    best, arg = Fraction(0), 0
    for n in range(1, n_max + 1):
        k = math.floor(n * s_fr)
        if k < j:
            continue
        # mu is non-decreasing in k for fixed n, so k = floor(ns) gives the sup
        v = mu_exact(n, k, j)
        if v > best:
            best, arg = v, n
    upper = s_fr ** j / factorial(j)
    lower = float(upper) / math.e
    return MuSupBounds(s, j, n_max, float(best), arg, float(upper), lower,
                        1 - float(best) / lower, best <= upper)


@dataclass(frozen=True)
class PoissonLimit:
    n: int
    k: int
    s: float
    j: int
    mu: float
    limit: float
    rel_error: float
    lower: float


def poisson_limit_check(n: int, s: float, j: int) -> PoissonLimit:
    """mu(n, floor(ns), j) in exact arithmetic against s^j e^{-s}/j!."""
    k = math.floor(n * s)
    mu = float(mu_exact(n, k, j))
    limit = s ** j * math.exp(-s) / math.factorial(j)
    return PoissonLimit(n, k, s, j, mu, limit, abs(mu - limit) / limit,
                        s ** j / (math.e * math.factorial(j)))


def displayed_identity_gap(n: int, k: int, j: int) -> dict:
    """Compare the no-fixed-point probability mu(n-j, k-j, 0) with (1 - 1/(n-j))^(k-j)."""
    _check(n, k, j)
    m, r = n - j, k - j
    exact = mu_exact(m, r, 0) if m >= 1 else Fraction(1)
    approx = Fraction(m - 1, m) ** r if m >= 1 else Fraction(1)
    gap = float((approx - exact) / exact) if exact else math.inf
    return {"exact": float(exact), "product_form": float(approx), "relative_gap": gap}
