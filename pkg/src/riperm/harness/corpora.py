"""Seeded matrix, array and step-function corpora.

Every random draw comes from ``Generator(Philox(SeedSequence(seed, spawn_key=key)))``
where ``key`` is built from the corpus name (CRC-32) and the matrix size, so a corpus
depends only on (seed, name, n) and never on the order in which corpora are built.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import zlib
from fractions import Fraction

import numpy as np

from ..permops import MatrixN, as_matrix
from ..stepcore import StepFunction


def stream(seed: int, name: str, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(zlib.crc32(name.encode()),) + key)
    return np.random.Generator(np.random.Philox(ss))


def digest(obj) -> str:
    """Short SHA-256 of a matrix, array or JSON-able object."""
    if isinstance(obj, MatrixN):
        obj = obj.to_json()
    elif isinstance(obj, np.ndarray):
        obj = {"shape": list(obj.shape), "entries": obj.ravel().tolist()}
    elif isinstance(obj, StepFunction):
        obj = obj.to_json()
    text = json.dumps(obj, sort_keys=True, default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


# -- structured matrices -------------------------------------------------------

def identity(n: int) -> MatrixN:
    return as_matrix(np.eye(n, dtype=np.int64))


def partial_identity(n: int, k: int) -> MatrixN:
    """I_{n,k}: ones on the first k diagonal places."""
    a = np.zeros((n, n), dtype=np.int64)
    a[np.arange(k), np.arange(k)] = 1
    return as_matrix(a)


def structured(n: int) -> list[tuple[str, MatrixN]]:
    out = [("zero", as_matrix(np.zeros((n, n), dtype=np.int64))),
           ("identity", identity(n)),
           ("anti_identity", as_matrix(np.eye(n, dtype=np.int64)[::-1])),
           ("all_ones", as_matrix(np.ones((n, n), dtype=np.int64))),
           ("single_entry", as_matrix(np.pad(np.ones((1, 1), dtype=np.int64), ((0, n - 1), (0, n - 1))))),
           ("rank_one_rows", as_matrix(np.repeat(np.arange(1, n + 1, dtype=np.int64)[:, None], n, axis=1))),
           ("dominant_row", as_matrix(np.vstack([np.full((1, n), n, dtype=np.int64),
                                                 np.ones((n - 1, n), dtype=np.int64)])))]
    return out


# -- random matrices -------------------------------------------------------------

def random_matrix(kind: str, n: int, rng: np.random.Generator) -> MatrixN:
    if kind == "uniform":
        return as_matrix(rng.random((n, n)))
    if kind == "diagonal":
        return as_matrix(np.diag(rng.random(n)))
    if kind == "permutation":
        return as_matrix(np.eye(n, dtype=np.int64)[rng.permutation(n)])
    if kind == "qn":
        a = np.zeros(n * n, dtype=np.int64)
        a[rng.choice(n * n, size=n, replace=False)] = 1
        return as_matrix(a.reshape(n, n))
    if kind == "pn":
        return as_matrix(random_pn(n, rng))
    if kind == "rank_one":
        return as_matrix(np.outer(rng.random(n), np.ones(n)))
    if kind == "single_entry":
        a = np.zeros((n, n))
        a[rng.integers(n), rng.integers(n)] = rng.random() + 0.5
        return as_matrix(a)
    if kind == "heavy_tail":
        return as_matrix(rng.pareto(1.5, (n, n)))
    if kind == "sparse":
        return as_matrix(rng.random((n, n)) * (rng.random((n, n)) < 2.0 / n))
    raise ValueError(f"unknown matrix kind {kind!r}")


RANDOM_KINDS = ("uniform", "diagonal", "permutation", "qn", "pn", "rank_one",
                "single_entry", "heavy_tail", "sparse")


def random_pn(n: int, rng: np.random.Generator) -> np.ndarray:
    """Entries in [0, 1] with total mass at most n."""
    a = rng.random((n, n)) ** rng.uniform(0.3, 3.0)
    total = a.sum()
    if total > n:
        a *= n / total * rng.uniform(0.5, 1.0)
    return a


def random_pn_integer(n: int, denom: int, rng: np.random.Generator) -> np.ndarray:
    """P_n matrix scaled by ``denom``: integer entries in [0, denom], sum <= n*denom."""
    a = np.floor(random_pn(n, rng) * denom).astype(np.int64)
    return np.clip(a, 0, denom)


def general_corpus(n: int, trials: int, seed: int, name: str = "general") -> list[tuple[str, MatrixN]]:
    rng = stream(seed, name, n)
    out = structured(n)
    for t in range(trials):
        kind = RANDOM_KINDS[t % len(RANDOM_KINDS)]
        out.append((f"{kind}#{t}", random_matrix(kind, n, rng)))
    return out


def diagonal_corpus(n: int, trials: int, seed: int, general=None) -> list[tuple[str, MatrixN]]:
    """I_{n,k}, random diagonals, and diag(top-n entries) of each general matrix."""
    rng = stream(seed, "diagonal", n)
    out = [(f"I_{n},{k}", partial_identity(n, k)) for k in range(1, n + 1)]
    for t in range(trials):
        out.append((f"diag#{t}", as_matrix(np.diag(rng.random(n) ** rng.uniform(0.2, 5.0)))))
    for label, x in general or []:
        top = np.sort(x.floats().ravel())[::-1][:n]
        if top.any():
            out.append((f"top_diag[{label}]", as_matrix(np.diag(top))))
    return out


def all_qn(n: int) -> np.ndarray:
    """Every 0/1 matrix with exactly n ones, shape (C(n^2, n), n, n)."""
    idx = np.array(list(itertools.combinations(range(n * n), n)), dtype=np.intp)
    out = np.zeros((len(idx), n * n), dtype=np.int64)
    np.put_along_axis(out, idx, 1, axis=1)
    return out.reshape(-1, n, n)


def random_arrays3(n: int, count: int, seed: int) -> list[tuple[str, np.ndarray]]:
    rng = stream(seed, "array3", n)
    out = [("ones", np.ones((n, n, n))), ("single", _single3(n))]
    for t in range(count):
        kind = t % 3
        if kind == 0:
            y = rng.random((n, n, n))
        elif kind == 1:
            y = rng.pareto(1.5, (n, n, n))
        else:
            y = rng.random((n, n, n)) * (rng.random((n, n, n)) < 1.5 / n)
        out.append((f"array#{t}", y))
    return out


def _single3(n: int) -> np.ndarray:
    y = np.zeros((n, n, n))
    y[0, 0, 0] = 1.0
    return y


# -- step-function tuples for convexity probes ------------------------------------

def probe_corpus(seed: int, size: int = 40, pieces: int = 6) -> list[tuple[StepFunction, ...]]:
    """Fixed tuples: dyadic indicators, spikes, a zero partner, and random decreasing steps."""
    rng = stream(seed, "probe", pieces)
    out: list[tuple[StepFunction, ...]] = []
    for a in range(0, 10, 3):
        out.append((StepFunction.indicator(Fraction(1, 2 ** a)), StepFunction.constant(1)))
    out.append((StepFunction.constant(1), StepFunction.constant(0)))
    out.append(tuple(StepFunction.indicator(Fraction(1, 2 ** a)) for a in range(0, 12, 2)))
    out.append(tuple(StepFunction((0, Fraction(1, 4 ** a), 1), (2 ** a, 0)) for a in range(5)))
    out.append((StepFunction.indicator(Fraction(1, 2)),) * 3)
    for _ in range(size):
        k = int(rng.integers(2, 6))
        tup = []
        for _ in range(k):
            widths = [Fraction(int(w), 64) for w in _composition(rng, 64, pieces)]
            vals = sorted((float(v) for v in rng.pareto(1.2, len(widths))), reverse=True)
            tup.append(StepFunction.from_pieces(vals, widths))
        out.append(tuple(tup))
    return out


def _composition(rng, total: int, parts: int) -> list[int]:
    cuts = np.sort(rng.choice(np.arange(1, total), size=parts - 1, replace=False))
    return np.diff(np.concatenate([[0], cuts, [total]])).tolist()
