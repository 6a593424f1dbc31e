"""Classification criteria: the Gamma series, concavity-ratio constants, witness
construction for failing power bounds, almost-convexity census, and empirical
D / D*-convexity probes.

All series work happens in the log domain: ``phi(t^j / j!)`` is evaluated as
``phi.log_eval(j log t - lgamma(j + 1))`` so nothing underflows for large j.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, optimize
from scipy.special import gammaln

from .coincidence import concavity_ratio_max, mu_exact
from .errors import DomainError, ValidationError
from .permops import as_matrix, matrix_rearrangement, sequence_norm_avg
from .rispaces.phi import FunctionPhi, PlateauPhi, PhiSpec, concave_majorant
from .rispaces.seq import SeqSpace
from .rispaces.spaces import Space
from .stepcore import StepFunction, dilated_disjoint_sum

DIVERGENCE_THRESHOLD = 1e3
DEFAULT_T_GRID = tuple(2.0 ** -i for i in range(41))


# -- Gamma -----------------------------------------------------------------------

@dataclass(frozen=True)
class GammaResult:
    """sup_t (1/phi(t)) sum_j j^(1/q-1) phi(t^j/j!) on a grid.

    ``value`` is the truncated sum over j <= j_used plus an Euler-Maclaurin tail
    estimate; ``partial`` is the bare truncated sum at the witness;
    ``truncation_bound`` is the integral-test bound on the omitted tail, so
    ``partial + truncation_bound`` is an upper bound for the full series at the witness.
    """

    value: float
    t_witness: float
    j_used: int
    truncation_bound: float
    partial: float
    diverged: bool
    max_partial_sum: float
    label: str = "finite"

    @property
    def upper(self) -> float:
        return self.partial + self.truncation_bound


def _log_terms(phi: PhiSpec, q: float, logt: float, js: np.ndarray) -> np.ndarray:
    """log of j^(1/q-1) phi(t^j/j!)/phi(t) for an array of (possibly non-integer) j."""
    args = js * logt - gammaln(js + 1.0)
    return (1.0 / q - 1.0) * np.log(js) + phi.log_eval(args) - float(phi.log_eval(logt))


def _term(phi, q, logt, j: float) -> float:
    return float(np.exp(_log_terms(phi, q, logt, np.array([j], dtype=float)))[0])


def _tail(phi: PhiSpec, q: float, logt: float, J: int) -> tuple[float, float]:
    """(Euler-Maclaurin estimate of sum_{j>J} f(j), integral bound int_J^inf f).

    Both are inf when the integrand has not decayed by j ~ 1e300 or quad fails.
    """
    u_max = 690.0 - math.log(J)

    def g(u):  # substitution j = J e^u
        j = J * math.exp(u)
        return _term(phi, q, logt, j) * j

    if g(u_max) > 1e-14:
        return math.inf, math.inf
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            integral, _ = integrate.quad(g, 0.0, u_max, epsabs=1e-15, epsrel=1e-12, limit=500)
        except integrate.IntegrationWarning:
            return math.inf, math.inf
    fJ = _term(phi, q, logt, J)
    h = 1e-3 * J
    dfJ = (_term(phi, q, logt, J + h) - _term(phi, q, logt, J - h)) / (2 * h)
    return integral - fJ / 2 - dfJ / 12, integral


def _series(phi, q, logt, js) -> np.ndarray:
    return np.cumsum(np.exp(_log_terms(phi, q, logt, js)))


def gamma(phi: PhiSpec, q: float, t_grid: Sequence[float] | None = None, j_max: int = 400,
          tol: float = 1e-12, refine: bool = True, tail: bool = True) -> GammaResult:
    """Evaluate the Gamma series criterion on a t-grid (default 2^-i, i = 0..40)."""
    if not 1 <= q < math.inf:
        raise DomainError("q must lie in [1, inf)")
    if j_max < 2:
        raise DomainError("j_max must be >= 2")
    grid = np.asarray(DEFAULT_T_GRID if t_grid is None else t_grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0) or np.any(grid > 1):
        raise DomainError("t_grid must be a non-empty subset of (0, 1]")
    grid = np.unique(grid)[::-1]
    js = np.arange(1, j_max + 1, dtype=float)

    def evaluate(logt):
        partial = _series(phi, q, logt, js)
        if tail:
            est, bound = _tail(phi, q, logt, j_max)
        else:
            est, bound = 0.0, math.nan
        return float(partial[-1]), float(partial.max()), est, bound

    rows = [(math.log(t),) + evaluate(math.log(t)) for t in grid]
    max_partial = max(r[2] for r in rows)
    if max_partial > DIVERGENCE_THRESHOLD:
        i = int(np.argmax([r[2] for r in rows]))
        return GammaResult(math.inf, float(grid[i]), j_max, math.inf, rows[i][1], True,
                           max_partial, "diverged (numerical)")

    scores = [r[1] + r[3] for r in rows]
    i = int(np.argmax(scores))
    best = rows[i]

    if refine and len(rows) > 1:
        lo = rows[min(i + 1, len(rows) - 1)][0]
        hi = rows[max(i - 1, 0)][0]
        if hi > lo:
            res = optimize.minimize_scalar(lambda L: -sum(evaluate(L)[::2]), bounds=(lo, hi),
                                           method="bounded", options={"xatol": 1e-10})
            cand = evaluate(float(res.x))
            if cand[0] + cand[2] > best[1] + best[3]:
                best = (float(res.x),) + cand
                max_partial = max(max_partial, cand[1])

    logt, partial, _, est, bound = best
    value = partial + est if tail else partial
    label = "finite" if math.isfinite(bound) or not tail else "tail integral diverges"
    return GammaResult(value, math.exp(logt), j_max, bound, partial, False, max_partial, label)


def gamma_partial_sums(phi: PhiSpec, q: float, t: float, j_max: int) -> np.ndarray:
    """Partial sums of the normalised series at a single t."""
    return _series(phi, q, math.log(t), np.arange(1, j_max + 1, dtype=float))


# -- Lorentz diagonal constants ----------------------------------------------------

def tq_lorentz_diag(phi: PhiSpec, q: float, n: int, k: int, tail_measures: bool = True) -> float:
    """||T_q I_{n,k}|| in Lambda_1(phi) by the layer-cake formula.

    T_q I_{n,k} takes the value j^(1/q) with probability mu(n,k,j); the exact norm uses
    phi of the tail measures P(>= j), the point-mass variant uses phi(mu(n,k,j)).
    """
    mus = [mu_exact(n, k, j) for j in range(k + 1)]
    total = 0.0
    tail = sum(mus[1:])
    for j in range(1, k + 1):
        weight = j ** (1 / q) - (j - 1) ** (1 / q)
        m = tail if tail_measures else mus[j]
        total += weight * float(phi(float(m)))
        tail -= mus[j]
    return total


def lorentz_diag_constant(phi: PhiSpec, q: float, n_values: Sequence[int]) -> tuple[float, tuple]:
    """sup over I_{n,k} (n in n_values, 1 <= k <= n) of ||T_q I_{n,k}|| / ||U I_{n,k}||."""
    best, arg = 0.0, (0, 0)
    for n in n_values:
        for k in range(1, n + 1):
            r = tq_lorentz_diag(phi, q, n, k) / float(phi(k / n))
            if r > best:
                best, arg = r, (n, k)
    return best, arg


# -- concavity-ratio constants -------------------------------------------------------

def concavity_constant(f: StepFunction, alpha: float) -> float:
    """Smallest C with tau^(1-alpha) (int_0^tau f*)^alpha <= C int_0^tau (f*)^alpha on the grid."""
    return concavity_ratio_max(f, alpha)[0]


# -- power-bounded phi --------------------------------------------------------------

@dataclass(frozen=True)
class PowerBoundReport:
    bound: float
    measured: float
    measured_s: float
    full_sup: float


def power_bound_gamma(a: float, alpha: float, q: float = 1.0, s_grid: Sequence[float] | None = None,
                   j_max: int = 400) -> PowerBoundReport:
    """Normalised series for the family phi_s at its critical point t = a s^alpha.

    ``measured`` is the sup over ``s_grid`` at the critical points; ``full_sup`` is the
    grid Gamma of the phi_s attaining ``measured``.
    """
    cap = a ** (-1 / alpha)
    if s_grid is None:
        s_grid = cap * np.geomspace(1e-8, 1 - 1e-6, 60)
    js = np.arange(1, j_max + 1, dtype=float)
    best, best_s = -math.inf, math.nan
    for s in s_grid:
        phi = PlateauPhi(a, alpha, float(s), check=False)
        v = float(_series(phi, q, math.log(phi.level), js)[-1])
        if v > best:
            best, best_s = v, float(s)
    full = gamma(PlateauPhi(a, alpha, best_s, check=False), q, j_max=j_max).value
    return PowerBoundReport(5 * a / alpha, best, best_s, full)


def capped_sqrt(eps: float) -> FunctionPhi:
    """min(sqrt(t), eps): quasi-concave but not normalised."""
    le = math.log(eps)
    return FunctionPhi(lambda t: np.minimum(np.sqrt(t), eps),
                       log_fn=lambda L: np.minimum(0.5 * L, le), label=f"min(sqrt,{eps:g})")


# -- witness for a phi without power bound ---------------------------------------------

@dataclass(frozen=True)
class GammaWitness:
    logt: tuple          # log t_n, n = 1..N
    logs: tuple          # log s_n, n = 2..N
    psi: PhiSpec
    partial_sums: tuple  # (1/psi(s_n)) sum_{k<=n} k^(1/q-1) psi(s_n^k/k!)
    harmonic: tuple

    @property
    def t(self):
        return tuple(math.exp(v) for v in self.logt)

    @property
    def s(self):
        return tuple(math.exp(v) for v in self.logs)


class PreconditionError(ValidationError):
    """phi admits a power bound on the working grid."""


def power_bound_defect(phi: PhiSpec, n: int, log_grid: np.ndarray) -> bool:
    """True when log phi(t) - (log t)/n is still increasing at the smallest grid point,
    i.e. sup_t phi(t) t^(-1/n) is not attained on the grid."""
    v = phi.log_eval(log_grid) - log_grid / n
    return bool(np.argmax(v) == 0 and v[0] > v[1])


def unbounded_gamma_witness(phi: PhiSpec, n_terms: int = 8, q: float = 1.0,
                      log_t_min: float = -1e12, points: int = 400_001) -> GammaWitness:
    """Greedy t_n sequence, plateaus s_n and the step-linear psi <= phi.

    Works in log t throughout, so t_n far below the binary64 range are fine.
    """
    log_grid = np.concatenate([-np.geomspace(-log_t_min, 1e-9, points), [0.0]])  # ascending
    for n in range(1, n_terms + 1):
        if not power_bound_defect(phi, n, log_grid):
            raise PreconditionError(
                f"{phi.label}: sup phi(t) t^(-1/{n}) is attained on the grid; a power bound holds")
    lphi = phi.log_eval(log_grid)
    Lt, Ls = [0.0], []
    for n in range(2, n_terms + 1):
        prev = Lt[-1]
        lp_prev = float(phi.log_eval(prev))
        need = math.log(n) + lp_prev - prev + log_grid / n
        ok = np.flatnonzero((lphi >= need) & (log_grid < prev))
        if ok.size == 0:
            raise PreconditionError(f"no t_{n} found above exp({log_t_min})")
        L = float(log_grid[ok[-1]])
        Lt.append(L)
        Ls.append(prev + float(phi.log_eval(L)) - lp_prev)
    psi = _witness_psi(phi, np.array(Lt), np.array(Ls))
    sums, harm = [], []
    for n in range(2, n_terms + 1):
        ks = np.arange(1, n + 1, dtype=float)
        ls = Ls[n - 2]
        terms = (1 / q - 1) * np.log(ks) + psi.log_eval(ks * ls - gammaln(ks + 1)) - float(psi.log_eval(ls))
        sums.append(float(np.exp(terms).sum()))
        harm.append(float((1 / ks).sum()))
    return GammaWitness(tuple(Lt), tuple(Ls), psi, tuple(sums), tuple(harm))


def _witness_psi(phi: PhiSpec, Lt: np.ndarray, Ls: np.ndarray) -> FunctionPhi:
    lphi_t = phi.log_eval(Lt)
    slope = lphi_t - Lt  # log(phi(t_n)/t_n)

    def log_psi(L):
        L = np.asarray(L, dtype=float)
        out = np.full(L.shape, L + slope[-1])  # below t_N: linear through (t_N, phi(t_N))
        for n in range(len(Lt) - 1, 0, -1):   # piece n+1 in 1-based terms
            flat = (L >= Lt[n]) & (L <= Ls[n - 1])
            lin = (L > Ls[n - 1]) & (L <= Lt[n - 1])
            out = np.where(flat, lphi_t[n], out)
            out = np.where(lin, L + slope[n - 1], out)
        return out

    return FunctionPhi(lambda t: np.exp(log_psi(np.log(t))), log_fn=log_psi,
                       label=f"witness[{phi.label}]", kinks=tuple(np.exp(np.r_[Lt, Ls])))


def witness_majorant(w: GammaWitness, points: int = 4001) -> PhiSpec:
    """Concave majorant of the witness on a log-spaced grid down to the last t_n."""
    ts = np.unique(np.concatenate([np.geomspace(max(w.t[-1], 1e-300), 1.0, points),
                                   np.array(w.t), np.array(w.s)]))
    return concave_majorant(ts, w.psi(ts))


# -- almost convexity ---------------------------------------------------------------

@dataclass(frozen=True)
class AlmostConvexCensus:
    """Finite-window census; ``verdict`` only speaks for the tested window."""

    a: float
    b: float
    p: int
    n_range: tuple
    m_range: tuple
    counts: dict = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return all(c < self.b ** m for m, c in self.counts.items())

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b, "p": self.p, "n_range": list(self.n_range),
                "m_range": list(self.m_range), "counts": {str(m): c for m, c in self.counts.items()},
                "verdict": "pass (finite window)" if self.verdict else "fail (finite window)"}


def almost_convex_census(M, a: float, b: float, p: int, n_range: tuple, m_range: tuple,
                         domain_max: float = math.inf, rtol: float = 1e-12) -> AlmostConvexCensus:
    """Count n in n_range with M(a^(n+m)) < a^(m-p) M(a^n), per m in m_range.

    ``M`` is an MFunc or any object with ``log_eval``; points outside the domain
    (a^(n+m) > domain_max) count as satisfied.
    """
    if not (a > 1 and b > 1) or p < 1:
        raise DomainError("need a, b > 1 and integer p >= 1")
    la = math.log(a)
    ns = np.arange(n_range[0], n_range[1] + 1, dtype=float)
    lmn = np.asarray(M.log_eval(ns * la), dtype=float)
    counts = {}
    for m in range(m_range[0], m_range[1] + 1):
        top = (ns + m) * la
        lhs = np.asarray(M.log_eval(top), dtype=float)
        rhs = (m - p) * la + lmn
        bad = lhs < rhs - rtol * np.maximum(1.0, np.abs(rhs))
        bad &= top <= math.log(domain_max)
        counts[m] = int(bad.sum())
    return AlmostConvexCensus(a, b, p, tuple(n_range), tuple(m_range), counts)


class PowerOnUnit:
    """t^e restricted to [0, 1], with log_eval; used for the Lorentz pairing probes."""

    def __init__(self, e: float):
        self.e = e
        self.label = f"t^{e:g}"

    def log_eval(self, L):
        return self.e * np.asarray(L, dtype=float)


# -- D / D*-convexity probes ----------------------------------------------------------

@dataclass(frozen=True)
class ConvexityProbeReport:
    family: str
    direction: str
    constant: float
    raw_sup: float
    witness_index: int
    witness: tuple
    samples: int

    def to_json(self) -> dict:
        return {"family": self.family, "direction": self.direction, "constant": self.constant,
                "raw_sup": self.raw_sup, "witness_index": self.witness_index,
                "witness": [x.to_json() for x in self.witness], "samples": self.samples}


def _probe(E: Space, corpus, ratio_fn, direction: str) -> ConvexityProbeReport:
    if not corpus:
        raise DomainError("probe corpus is empty")
    best, arg = -math.inf, 0
    for i, xs in enumerate(corpus):
        norms = np.array([E.norm(x) for x in xs])
        r = ratio_fn(E.norm(dilated_disjoint_sum(list(xs))), norms)
        if r > best:
            best, arg = r, i
    return ConvexityProbeReport(E.spec, direction, max(1.0, best), best, arg,
                                tuple(corpus[arg]), len(corpus))


def _d_ratio(c, norms):
    return c / norms.max() if norms.max() > 0 else 1.0


def _dstar_ratio(c, norms):
    return norms.min() / c if c > 0 else (math.inf if norms.min() > 0 else 1.0)


def dconvex_probe(E: Space, corpus, dstar: bool = False) -> ConvexityProbeReport:
    """sup ||C(x)|| / max ||x_k|| (D) or sup min ||x_k|| / ||C(x)|| (D*) over the corpus."""
    if dstar:
        return _probe(E, corpus, _dstar_ratio, "D*")
    return _probe(E, corpus, _d_ratio, "D")


def reevaluate(E: Space, xs, direction: str) -> float:
    norms = np.array([E.norm(x) for x in xs])
    c = E.norm(dilated_disjoint_sum(list(xs)))
    return {"D": _d_ratio, "D*": _dstar_ratio}[direction](c, norms)


def mean_convexity_probe(E: Space, corpus, p: float, q: float, lower: bool = False) -> ConvexityProbeReport:
    """sup ||C(x)|| / q-mean ||x_k|| (upper form) or sup p-mean ||x_k|| / ||C(x)|| (lower form)."""
    if lower:
        def r(c, norms):
            mean = np.mean(norms ** p) ** (1 / p)
            return mean / c if c > 0 else 1.0
        return _probe(E, corpus, r, f"p-mean lower (p={p:g})")

    def r(c, norms):
        mean = np.max(norms) if math.isinf(q) else np.mean(norms ** q) ** (1 / q)
        return c / mean if mean > 0 else 1.0
    return _probe(E, corpus, r, f"q-mean upper (q={q:g})")


def lp_modular_gap(p: float, xs: Sequence[StepFunction]) -> float:
    """| ||C(x)||_p^p - (1/n) sum ||x_k||_p^p |, relative to the mean (finite p)."""
    from .rispaces.spaces import Lp

    E = Lp(p)
    c = E.norm(dilated_disjoint_sum(list(xs))) ** p
    mean = float(np.mean([E.norm(x) ** p for x in xs]))
    return abs(c - mean) / mean if mean > 0 else abs(c)


# -- sequence-space averages ------------------------------------------------------------

@dataclass(frozen=True)
class SequenceAverage:
    lhs: float
    rhs: float
    ratio: float


def sequence_average_rhs(x, X: SeqSpace) -> float:
    x = as_matrix(x)
    n = x.n
    xs = np.asarray([float(v) for v in matrix_rearrangement(x)])
    head = xs[:n].sum() / n
    strided = xs[n - 1::n][:n]  # x*_{kn}, k = 1..n
    return float(head + X.norm(strided))


def sequence_average_check(x, X: SeqSpace, mode: str = "exact", samples: int = 100_000,
                    seed: int = 0) -> SequenceAverage:
    lhs = sequence_norm_avg(x, X, mode=mode, samples=samples, seed=seed)
    rhs = sequence_average_rhs(x, X)
    return SequenceAverage(lhs, rhs, lhs / rhs if rhs > 0 else 1.0)


# -- exponential-class series test ---------------------------------------------------------

@dataclass(frozen=True)
class ExpSeriesReport:
    p: float
    q: float
    eps: float
    j_max: int
    log_partial_sum: float
    increasing_tail: bool  # terms still growing at j_max: the series diverges


def exp_class_series(p: float, q: float, eps: float = 0.5, j_max: int = 2000) -> ExpSeriesReport:
    """sum_j (exp(eps^p j^(p/q)) - 1)/j! in log form.

    For p > q the exponent eventually beats log j! and the terms grow without bound;
    for p <= q (with eps < 1 when p = q) they decay factorially.
    """
    js = np.arange(1, j_max + 1, dtype=float)
    z = eps ** p * js ** (p / q)
    log_terms = np.where(z < 30, np.log(np.expm1(np.minimum(z, 30))), z + np.log1p(-np.exp(-z)))
    log_terms = log_terms - gammaln(js + 1)
    total = float(np.logaddexp.reduce(log_terms))
    growing = bool(log_terms[-1] > log_terms[-2])
    return ExpSeriesReport(p, q, eps, j_max, total, growing)
