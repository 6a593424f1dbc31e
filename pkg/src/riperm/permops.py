"""Matrix-side operators: T_q by enumeration or Monte Carlo, U, B_n, and the swap moves.

For an n x n matrix x, ``T_q x`` is the step function taking the value
``(sum_i |x_{i,pi(i)}|^q)^{1/q}`` on a piece of length 1/n! for every permutation
pi.  Norms of ``T_q x`` in an r.i. space depend only on its law, which we carry
as a :class:`~riperm.stepcore.ValueDistribution`.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError, EnumerationLimitError, ValidationError
from .rispaces.seq import SeqSpace
from .rispaces.spaces import Space
from .stepcore import StepFunction, ValueDistribution, majorizes

EXHAUSTIVE_MAX_N = 8
TWO_PERM_MAX_N = 5
MC_CHUNK = 8192


@dataclass(frozen=True, eq=False)
class MatrixN:
    """n x n nonnegative matrix; ``entries`` is float64, int64, or object (Fractions)."""

    entries: np.ndarray

    def __post_init__(self):
        a = self.entries
        if not isinstance(a, np.ndarray):
            a = _as_array(a)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValidationError("MatrixN needs a square, non-empty 2-d array")
        if a.dtype == object:
            if any(v < 0 for v in a.ravel()):
                raise ValidationError("MatrixN entries must be >= 0")
        else:
            if not np.all(np.isfinite(a)) or np.any(a < 0):
                raise ValidationError("MatrixN entries must be finite and >= 0")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def exact(self) -> bool:
        return self.entries.dtype == object or np.issubdtype(self.entries.dtype, np.integer)

    @classmethod
    def from_json(cls, obj: dict) -> "MatrixN":
        n = int(obj["n"])
        flat = [Fraction(v) if isinstance(v, str) else v for v in obj["entries"]]
        if len(flat) != n * n:
            raise ValidationError("entries must have n*n values")
        return cls(_as_array(np.array(flat, dtype=object).reshape(n, n)))

    def to_json(self) -> dict:
        def dump(v):
            if isinstance(v, Fraction):
                return int(v) if v.denominator == 1 else str(v)
            return v.item() if hasattr(v, "item") else v
        return {"n": self.n, "entries": [dump(v) for v in self.entries.ravel()]}

    def floats(self) -> np.ndarray:
        return self.entries.astype(float)

    # predicates
    def is_diagonal(self) -> bool:
        a = self.entries
        return all(a[i, j] == 0 for i in range(self.n) for j in range(self.n) if i != j)

    def is_qn(self) -> bool:
        a = self.entries
        return all(v in (0, 1) for v in a.ravel()) and sum(1 for v in a.ravel() if v == 1) == self.n

    def is_pn(self) -> bool:
        a = self.entries
        return all(0 <= v <= 1 for v in a.ravel()) and sum(a.ravel()) <= self.n

    def is_permutation(self) -> bool:
        return (self.is_qn() and all(sum(r) == 1 for r in self.entries)
                and all(sum(c) == 1 for c in self.entries.T))


def _as_array(a) -> np.ndarray:
    arr = np.asarray(a)
    if arr.dtype == object:
        vals = arr.ravel().tolist()
        if all(isinstance(v, (int, np.integer)) and not isinstance(v, bool) for v in vals):
            return np.array([int(v) for v in vals], dtype=np.int64).reshape(arr.shape)
        if all(isinstance(v, (int, Fraction, np.integer)) for v in vals):
            return np.array([Fraction(int(v)) if isinstance(v, np.integer) else Fraction(v)
                             for v in vals], dtype=object).reshape(arr.shape)
        return np.array(vals, dtype=float).reshape(arr.shape)
    if np.issubdtype(arr.dtype, np.integer):
        return arr.astype(np.int64)
    return arr.astype(float)


def as_matrix(x) -> MatrixN:
    return x if isinstance(x, MatrixN) else MatrixN(_as_array(x))


@lru_cache(maxsize=16)
def all_permutations(n: int) -> np.ndarray:
    """All of S_n in lexicographic order, shape (n!, n)."""
    p = np.array(list(itertools.permutations(range(n))), dtype=np.intp).reshape(-1, n)
    p.setflags(write=False)
    return p


def _check_enum(n: int, limit: int = EXHAUSTIVE_MAX_N) -> None:
    if n > limit:
        raise EnumerationLimitError(
            f"n={n} exceeds the exhaustive threshold {limit}; use mode='mc'")


def _combine(diag: np.ndarray, q: float) -> np.ndarray:
    """(sum |d_i|^q)^{1/q} along the last axis; exact for integer/object arrays when q in {1, inf}."""
    if math.isinf(q):
        return diag.max(axis=-1)
    if q == 1:
        return diag.sum(axis=-1)
    d = diag.astype(float)
    return (d ** q).sum(axis=-1) ** (1.0 / q)


def tq_values(x, q: float, perms: np.ndarray | None = None) -> np.ndarray:
    """T_q x on each permutation row of ``perms`` (default: all of S_n)."""
    x = as_matrix(x)
    if not q >= 1:
        raise DomainError("q must lie in [1, inf]")
    if perms is None:
        _check_enum(x.n)
        perms = all_permutations(x.n)
    diag = x.entries[np.arange(x.n), perms]
    return _combine(diag, q)


def _law(values: np.ndarray, total: int) -> ValueDistribution:
    if values.dtype == object:
        counts: dict = {}
        for v in values:
            counts[v] = counts.get(v, 0) + 1
        return ValueDistribution.from_counts(list(counts), list(counts.values()), total)
    uniq, cnt = np.unique(values, return_counts=True)
    if np.issubdtype(uniq.dtype, np.integer):
        return ValueDistribution.from_counts([int(u) for u in uniq], cnt, total)
    return ValueDistribution.from_counts([float(u) for u in uniq], cnt, total)


def tq_distribution(x, q: float, threshold: int = EXHAUSTIVE_MAX_N) -> ValueDistribution:
    """Exact law of T_q x under the uniform measure on S_n."""
    x = as_matrix(x)
    _check_enum(x.n, threshold)
    vals = tq_values(x, q, all_permutations(x.n))
    return _law(vals, math.factorial(x.n))


def tq_step_function(x, q: float, order: np.ndarray | None = None) -> StepFunction:
    """T_q x as a literal step function, permutations laid out in ``order`` (default lexicographic)."""
    x = as_matrix(x)
    _check_enum(x.n)
    perms = all_permutations(x.n)
    if order is not None:
        perms = perms[np.asarray(order)]
    vals = tq_values(x, q, perms)
    return StepFunction.from_vector(vals.tolist())


def tq_norm(x, q: float, E: Space, mode: str = "exact", samples: int = 100_000,
            seed: int = 0, workers: int = 1) -> float:
    """||T_q x||_E, exactly (n <= 8) or from seeded permutation sampling."""
    if mode == "exact":
        x = as_matrix(x)
        _check_enum(x.n)
        vals = np.asarray(tq_values(x, q, all_permutations(x.n)), dtype=float)
        uniq, counts = np.unique(vals, return_counts=True)
        return _empirical_norm(E, uniq, counts)
    if mode == "mc":
        return tq_norm_mc(x, q, E, samples=samples, seed=seed, workers=workers).value
    raise DomainError(f"unknown mode {mode!r}")


# -- Monte Carlo --------------------------------------------------------------

def _chunk_rng(seed: int, chunk: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(stream, chunk))))


def sample_permutations(n: int, samples: int, seed: int, workers: int = 1,
                        chunk: int = MC_CHUNK) -> np.ndarray:
    """Uniform permutations, shape (samples, n).

    Chunk c is drawn from its own counter-based stream keyed by (seed, c), and
    chunks are concatenated in order, so the result does not depend on ``workers``.
    """
    sizes = [min(chunk, samples - s) for s in range(0, samples, chunk)]

    def draw(c):
        rng = _chunk_rng(seed, c)
        return rng.permuted(np.tile(np.arange(n), (sizes[c], 1)), axis=1)

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(draw, range(len(sizes))))
    else:
        parts = [draw(c) for c in range(len(sizes))]
    return np.concatenate(parts, axis=0) if parts else np.empty((0, n), dtype=np.intp)


@dataclass(frozen=True)
class MCEstimate:
    value: float
    se: float
    samples: int
    bootstrap: int


def _empirical_norm(E: Space, uniq: np.ndarray, counts: np.ndarray) -> float:
    """Norm of the empirical law; ``uniq`` ascending and distinct."""
    keep = counts > 0
    vals, cnt = uniq[keep][::-1], counts[keep][::-1]
    bps = np.concatenate([[0], np.cumsum(cnt)]) / cnt.sum()
    return E.norm_arrays(vals, bps)


def tq_norm_mc(x, q: float, E: Space, samples: int = 100_000, seed: int = 0,
               workers: int = 1, bootstrap: int = 200) -> MCEstimate:
    x = as_matrix(x)
    perms = sample_permutations(x.n, samples, seed, workers=workers)
    vals = np.asarray(tq_values(MatrixN(x.floats()), q, perms), dtype=float)
    uniq, counts = np.unique(vals, return_counts=True)
    value = _empirical_norm(E, uniq, counts)
    rng = _chunk_rng(seed, 0, stream=1)
    p = counts / counts.sum()
    boots = [_empirical_norm(E, uniq, rng.multinomial(samples, p)) for _ in range(bootstrap)]
    se = float(np.std(boots, ddof=1)) if bootstrap > 1 else float("nan")
    return MCEstimate(value, se, samples, bootstrap)


# -- U, tail term, B_n --------------------------------------------------------

def matrix_rearrangement(x) -> list:
    x = as_matrix(x)
    return sorted(x.entries.ravel().tolist(), reverse=True)


def u_function(x) -> StepFunction:
    """Ux = sum_{k<=n} x*_k on ((k-1)/n, k/n)."""
    x = as_matrix(x)
    return StepFunction.from_vector(matrix_rearrangement(x)[: x.n])


def tail_lq_term(x, q: float) -> float:
    """((1/n) sum_{k=n+1}^{n^2} (x*_k)^q)^{1/q}."""
    if math.isinf(q):
        raise DomainError("the tail term is not defined for q = inf")
    x = as_matrix(x)
    tail = np.asarray([float(v) for v in matrix_rearrangement(x)[x.n:]])
    return float((np.sum(tail ** q) / x.n) ** (1 / q))


def bn_operator(x: StepFunction, n: int) -> MatrixN:
    """B_n x = diag(n * int over ((k-1)/n, k/n) of x)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    means = [n * _interval_integral(x, Fraction(k, n), Fraction(k + 1, n)) for k in range(n)]
    diag = np.zeros((n, n), dtype=object if x.rational else float)
    for k, m in enumerate(means):
        diag[k, k] = m
    return as_matrix(diag)


def _interval_integral(x: StepFunction, a, b):
    total = Fraction(0) if x.rational else 0.0
    for left, right, v in zip(x.breakpoints[:-1], x.breakpoints[1:], x.values):
        lo, hi = max(left, a), min(right, b)
        if hi > lo:
            total += v * (hi - lo) if x.rational else float(v) * float(hi - lo)
    return total


# -- swap moves ---------------------------------------------------------------

def shift_entry(u) -> MatrixN:
    """Move u_11 to position (1, 2); requires u_11 > 0 and an all-zero column 2."""
    u = as_matrix(u)
    if u.n < 2:
        raise DomainError("the shift needs n >= 2")
    a = u.entries
    if not a[0, 0] > 0:
        raise DomainError("precondition u_11 > 0 fails")
    if any(a[i, 1] != 0 for i in range(u.n)):
        raise DomainError("precondition u_{i,2} = 0 for all i fails")
    v = np.array(a, copy=True)
    v[0, 1] = a[0, 0]
    v[0, 0] = 0
    return as_matrix(v)


def t1_law_majorizes(y, x) -> bool:
    """T_1 x ≺ T_1 y, exactly when both matrices are rational."""
    return majorizes(tq_distribution(y, 1).to_step_function(), tq_distribution(x, 1).to_step_function())


def reduce_to_permutation(x, return_chain: bool = False):
    """Repeatedly move a one from a doubled row (column) into an empty row (column).

    Rows are scanned top-down for a doubled row, then top-down for an empty row;
    once every row holds a single one the same is done for columns left-to-right.
    Each move is the shift above up to relabelling rows/columns and transposition,
    so T_1 of the successive matrices increases in the ≺ order.
    Returns (permutation matrix, steps) or, with ``return_chain``, also the chain.
    """
    x = as_matrix(x)
    if not x.is_qn():
        raise DomainError("input is not in Q_n")
    a = np.array(x.entries, dtype=np.int64)
    chain = [as_matrix(a.copy())]
    steps = 0
    for transpose in (False, True):
        m = a.T if transpose else a
        while True:
            counts = m.sum(axis=1)
            doubled = np.flatnonzero(counts >= 2)
            empty = np.flatnonzero(counts == 0)
            if len(doubled) == 0 or len(empty) == 0:
                break
            r, e = doubled[0], empty[0]
            c = np.flatnonzero(m[r])[0]
            m[r, c] = 0
            m[e, c] = 1
            steps += 1
            chain.append(as_matrix(a.copy()))
    out = as_matrix(a)
    if not out.is_permutation():
        raise AssertionError("reduction did not reach a permutation matrix")
    return (out, steps, chain) if return_chain else (out, steps)


# -- sequence-space averages and three-index arrays ----------------------------

def _perm_pairs_max(y: np.ndarray, perms: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """max_i y[i, pi(i), sigma(i)] for every (pi, sigma) pair, flattened."""
    out = []
    for pi in perms:
        out.append(y[rows, pi[None, :], perms].max(axis=-1))
    return np.concatenate(out)


def sequence_norm_avg(x, X: SeqSpace, mode: str = "exact", samples: int = 100_000,
                      seed: int = 0) -> float:
    """(1/n!) sum_pi ||(x_{i,pi(i)})_i||_X."""
    x = as_matrix(x)
    a = x.floats()
    if mode == "exact":
        _check_enum(x.n)
        perms = all_permutations(x.n)
    elif mode == "mc":
        perms = sample_permutations(x.n, samples, seed)
    else:
        raise DomainError(f"unknown mode {mode!r}")
    diag = a[np.arange(x.n), perms]
    return float(np.mean(X.norm(diag)))


def two_perm_mean_max(y, mode: str = "exact", samples: int = 100_000, seed: int = 0) -> float:
    """(1/(n!)^2) sum_{pi, sigma} max_i |y_{i, pi(i), sigma(i)}|."""
    y = np.abs(np.asarray(y, dtype=float))
    if y.ndim != 3 or len(set(y.shape)) != 1:
        raise ValidationError("need an n x n x n array")
    n = y.shape[0]
    rows = np.arange(n)
    if mode == "exact":
        _check_enum(n, TWO_PERM_MAX_N)
        perms = all_permutations(n)
        return float(np.mean(_perm_pairs_max(y, perms, rows)))
    if mode == "mc":
        p1 = sample_permutations(n, samples, seed)
        p2 = sample_permutations(n, samples, seed + 1)
        return float(np.mean(y[rows, p1, p2].max(axis=-1)))
    raise DomainError(f"unknown mode {mode!r}")


def top_square_mean(y) -> float:
    """(1/n^2) sum of the n^2 largest |y_ijk|."""
    y = np.abs(np.asarray(y, dtype=float))
    n = y.shape[0]
    top = -np.sort(-y.ravel())[: n * n]
    return float(top.sum() / (n * n))
