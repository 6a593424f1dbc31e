"""Norm evaluators for rearrangement-invariant spaces on [0, 1].

Each space is normalised at construction so that the constant function 1 has
norm 1 (E_X is the exception: it keeps ||(1, 0, ..., 0)||_X = 1).  All norms act
on the decreasing rearrangement, so every evaluator is rearrangement invariant
by construction.
"""

from __future__ import annotations

import math
from functools import cached_property

import numpy as np
from scipy.optimize import minimize_scalar

from ..errors import ConvergenceError, DomainError, UnsupportedError, ValidationError
from ..stepcore import StepFunction, decreasing_rearrangement
from .mfunc import ExpM, MFunc, PowerM, staircase_m
from .phi import LogPhi, PhiSpec, PowerPhi, log_family_hull, psi_y
from .seq import SeqSpace, parse_seq

_ONE = StepFunction.constant(1)


def _rearranged_arrays(x: StepFunction):
    vals, bps = decreasing_rearrangement(x).arrays()
    return vals, bps


class Space:
    """Base class: subclasses implement ``_raw(vals, bps)`` on x* arrays."""

    normalize = True

    def _raw(self, vals: np.ndarray, bps: np.ndarray) -> float:
        raise NotImplementedError

    @cached_property
    def scale(self) -> float:
        if not self.normalize:
            return 1.0
        s = self._raw(*_ONE.arrays())
        if not (s > 0 and math.isfinite(s)):
            raise ValidationError(f"{self.spec}: norm of 1 is {s}")
        return s

    def norm(self, x: StepFunction) -> float:
        vals, bps = _rearranged_arrays(x)
        if not np.any(vals > 0):
            return 0.0
        return self._raw(vals, bps) / self.scale

    def norm_arrays(self, vals, bps) -> float:
        """Norm of the non-increasing function with distinct ``vals`` on pieces ``bps``."""
        vals = np.asarray(vals, dtype=float)
        if not np.any(vals > 0):
            return 0.0
        return self._raw(vals, np.asarray(bps, dtype=float)) / self.scale

    def to_json(self) -> dict:
        return {"spec": self.spec}

    def __repr__(self):
        return f"<{type(self).__name__} {self.spec}>"


class Lp(Space):
    def __init__(self, p: float):
        if not p >= 1:
            raise ValidationError("L_p needs p >= 1")
        self.p = float(p)
        self.spec = f"lp:{'inf' if math.isinf(p) else format(p, 'g')}"
        self.scale

    def _raw(self, vals, bps):
        w = np.diff(bps)
        if math.isinf(self.p):
            return float(vals[w > 0].max())
        return float(np.sum(vals ** self.p * w) ** (1 / self.p))


class Lorentz(Space):
    """Lambda_r(phi): (int (x*)^r d(phi^r))^(1/r), exact for step functions."""

    def __init__(self, r: float, phi: PhiSpec):
        if not r >= 1:
            raise ValidationError("Lorentz space needs r >= 1")
        self.r = float(r)
        self.phi = phi
        self.spec = f"lorentz:{r:g}:{phi.label}"
        self.scale

    def _raw(self, vals, bps):
        dphi = np.diff(self.phi(bps) ** self.r)
        return float(np.sum(vals ** self.r * dphi) ** (1 / self.r))


class Marcinkiewicz(Space):
    """M(phi): sup_s (int_0^s x*) / phi(s)."""

    fill_per_piece = 8
    log_fill = 64

    def __init__(self, phi: PhiSpec):
        self.phi = phi
        self.spec = f"marcinkiewicz:{phi.label}"
        self.scale

    def _raw(self, vals, bps):
        F = np.concatenate([[0.0], np.cumsum(vals * np.diff(bps))])
        left, width = bps[:-1], np.diff(bps)
        fracs = np.arange(1, self.fill_per_piece + 1) / (self.fill_per_piece + 1)
        first = bps[1] if len(bps) > 1 else 1.0
        cand = np.concatenate([
            bps[1:],
            (left[:, None] + width[:, None] * fracs[None, :]).ravel(),
            np.logspace(math.log10(first) - 6, 0, self.log_fill),
            np.asarray([k for k in self.phi.kinks if 0 < k < 1], dtype=float),
        ])
        cand = np.unique(cand[(cand > 0) & (cand <= 1)])
        ph = self.phi(cand)
        ok = ph > 0
        cand, ph = cand[ok], ph[ok]
        ratio = np.interp(cand, bps, F) / ph
        i = int(np.argmax(ratio))
        best = float(ratio[i])
        lo = cand[i - 1] if i > 0 else cand[i] * 0.5
        hi = cand[i + 1] if i + 1 < len(cand) else cand[i]
        if hi > lo:
            res = minimize_scalar(lambda s: -float(np.interp(s, bps, F)) / max(self.phi(s), 1e-300),
                                  bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-14 * hi})
            best = max(best, -float(res.fun))
        return best


class Orlicz(Space):
    """L_M with the Luxemburg functional inf{lam : int M(|x|/lam) <= 1}."""

    max_iter = 200

    def __init__(self, M: MFunc):
        self.M = M
        self.spec = f"orlicz:{M.label}"
        self.scale

    def modular(self, x: StepFunction, lam: float) -> float:
        vals, bps = x.arrays()
        with np.errstate(over="ignore"):
            return float(np.sum(np.diff(bps) * self.M(vals / lam)))

    def _raw(self, vals, bps):
        return _luxemburg(self.M, vals, np.diff(bps), self.max_iter)


def _luxemburg(M: MFunc, vals, widths, max_iter: int = 200) -> float:
    keep = (vals > 0) & (widths > 0)
    v, w = vals[keep], widths[keep]
    if len(v) == 0:
        return 0.0
    # homogeneity: bisect for x / max|x| and rescale, so tiny or huge values stay in range
    top = int(np.argmax(v))
    peak = float(v[top])
    v = v / peak
    hi = 1.0 / float(M.inverse(1.0))               # modular(hi) <= sum(w) <= 1
    lo = 1.0 / float(M.inverse(1.0 / w[top]))      # top piece alone gives modular >= 1

    def modular(lam):
        with np.errstate(over="ignore"):
            return float(np.sum(w * M(v / lam)))

    if lo >= hi:
        return peak * hi
    for _ in range(max_iter):
        if hi / lo - 1 <= 1e-15:
            return peak * hi
        mid = math.sqrt(lo * hi)
        if modular(mid) > 1:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError("Luxemburg bisection hit the iteration cap")


class ExpLp(Orlicz):
    """exp L_p, generated by M_p(u) = exp(|u|^p) - 1 (used as given for p < 1)."""

    def __init__(self, p: float):
        self.p = float(p)
        super().__init__(ExpM(p))
        self.spec = f"explp:{p:g}"


class OrliczLorentz(Space):
    """L_{M,N}: || x* o M~ o N~^{-1} ||_{L_N} with M~(t) = 1/M(1/t)."""

    def __init__(self, M: MFunc, N: MFunc):
        self.M, self.N = M, N
        self.spec = f"ol:{M.label}:{N.label}"
        self.scale

    def substituted_breakpoints(self, bps: np.ndarray) -> np.ndarray:
        """Image of x*-breakpoints under (M~ o N~^{-1})^{-1}(u) = 1/N(M^{-1}(1/u))."""
        with np.errstate(divide="ignore", over="ignore"):
            inv = 1.0 / np.asarray(bps, dtype=float)
            out = 1.0 / self.N(self.M.inverse(inv))
        out = np.where(np.asarray(bps) == 0, 0.0, out)
        return np.minimum(out, 1.0)

    def _raw(self, vals, bps):
        nb = self.substituted_breakpoints(bps)
        return _luxemburg(self.N, vals, np.diff(nb))


class EX(Space):
    """E_X: block values of x* on the n-partition, measured in X.

    ``average`` uses the block means n * int_block x*; ``literal`` uses (1/n) * int_block x*.
    """

    normalize = False

    def __init__(self, X: SeqSpace, n: int, convention: str = "average"):
        if convention not in ("average", "literal"):
            raise ValidationError("E_X convention must be 'average' or 'literal'")
        if n < 1:
            raise ValidationError("E_X needs n >= 1")
        self.X, self.n, self.convention = X, int(n), convention
        self.spec = f"ex:{X.label}:{n}:{convention}"

    def blocks(self, vals, bps) -> np.ndarray:
        F = np.concatenate([[0.0], np.cumsum(vals * np.diff(bps))])
        H = np.interp(np.arange(self.n + 1) / self.n, bps, F)
        b = np.diff(H)
        return b * self.n if self.convention == "average" else b / self.n

    def _raw(self, vals, bps):
        return float(self.X.norm(self.blocks(vals, bps)))


SpaceSpec = Space


def norm(E: Space, x: StepFunction) -> float:
    return E.norm(x)


def fundamental_function(E: Space, s: float) -> float:
    if not 0 < s <= 1:
        raise DomainError("fundamental function is defined on (0, 1]")
    return E.norm(StepFunction.indicator(s))


def _random_decreasing(rng: np.random.Generator, pieces: int) -> StepFunction:
    cuts = np.sort(rng.random(pieces - 1))
    widths = np.diff(np.concatenate([[0.0], cuts, [1.0]]))
    vals = np.sort(rng.exponential(size=pieces) ** rng.uniform(0.5, 3.0))[::-1]
    return StepFunction.from_pieces(vals.tolist(), widths.tolist())


def _associate(E: Space) -> Space:
    if isinstance(E, Lp):
        if E.p == 1:
            return Lp(math.inf)
        if math.isinf(E.p):
            return Lp(1)
        return Lp(E.p / (E.p - 1))
    if isinstance(E, Lorentz) and E.r == 1:
        return Marcinkiewicz(E.phi)
    raise UnsupportedError(f"no associate-space evaluator for {E.spec}")


def norm_one_probe(E: Space, x: StepFunction, samples: int = 64, seed: int = 0) -> tuple[float, int]:
    """Sampled lower estimate of sup_{||y||_E' = 1} ||x||_{Lambda(psi_y)}.

    Candidates: ``samples`` random decreasing y plus the Hölder-extremal y for x.
    Returns (estimate, number of candidates evaluated).
    """
    Ed = _associate(E)
    vals, bps = _rearranged_arrays(x)
    if not np.any(vals > 0):
        return 0.0, 0
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    cands = [StepFunction.constant(1)]
    if isinstance(E, Lp) and 1 < E.p < math.inf:
        cands.append(StepFunction(tuple(bps), tuple(vals ** (E.p - 1))))
    elif isinstance(E, Lp) and E.p == 1:
        pass  # constant y is extremal
    elif isinstance(E, Lorentz):
        dphi = np.diff(E.phi(bps)) / np.diff(bps)
        cands.append(StepFunction(tuple(bps), tuple(dphi)))
    for _ in range(samples):
        cands.append(_random_decreasing(rng, int(rng.integers(1, 12))))
    best = 0.0
    for y in cands:
        ny = Ed.norm(y)
        if not ny > 0:
            continue
        yn = StepFunction(y.breakpoints, tuple(float(v) / ny for v in y.values))
        best = max(best, _lambda_raw(psi_y(yn), vals, bps))
    return best, len(cands)


def _lambda_raw(phi: PhiSpec, vals, bps) -> float:
    return float(np.sum(vals * np.diff(phi(bps))))


# -- string / JSON syntax --------------------------------------------------

def _take_phi(tok: list[str]) -> PhiSpec:
    kind = tok.pop(0)
    if kind == "phi_p":
        return LogPhi(float(tok.pop(0)))
    if kind == "phi_p_hat":
        return log_family_hull(float(tok.pop(0)))
    if kind == "power":
        a = float(tok.pop(0))
        return PowerPhi(a, float(tok.pop(0)))
    if kind == "linear":
        return PowerPhi(1, 1)
    if kind == "min":
        return PowerPhi(float(tok.pop(0)), 1)
    raise ValidationError(f"unknown phi {kind!r}")


def _take_m(tok: list[str]) -> MFunc:
    kind = tok.pop(0)
    if kind == "power":
        return PowerM(float(tok.pop(0)))
    if kind == "exp_p":
        return ExpM(float(tok.pop(0)))
    if kind == "staircase":
        a = float(tok.pop(0))
        return staircase_m(a, int(tok.pop(0)), -256, 256)
    raise ValidationError(f"unknown M function {kind!r}")


def parse_phi(text: str) -> PhiSpec:
    tok = text.split(":")
    phi = _take_phi(tok)
    if tok:
        raise ValidationError(f"trailing tokens in phi spec {text!r}")
    return phi


def parse_mfunc(text: str) -> MFunc:
    tok = text.split(":")
    M = _take_m(tok)
    if tok:
        raise ValidationError(f"trailing tokens in M spec {text!r}")
    return M


def parse_space(text: str) -> Space:
    """Parse ``lp:2``, ``lorentz:1:phi_p:0.5``, ``marcinkiewicz:phi_p:1``,
    ``orlicz:exp_p:0.5``, ``explp:2``, ``ol:power:2:exp_p:1``, ``ex:linf:8:average``."""
    tok = text.strip().split(":")
    fam = tok.pop(0)
    try:
        if fam == "lp":
            E = Lp(float(tok.pop(0)))
        elif fam == "lorentz":
            r = float(tok.pop(0))
            E = Lorentz(r, _take_phi(tok))
        elif fam == "marcinkiewicz":
            E = Marcinkiewicz(_take_phi(tok))
        elif fam == "orlicz":
            E = Orlicz(_take_m(tok))
        elif fam == "explp":
            E = ExpLp(float(tok.pop(0)))
        elif fam == "ol":
            M = _take_m(tok)
            E = OrliczLorentz(M, _take_m(tok))
        elif fam == "ex":
            X = parse_seq(tok.pop(0))
            n = int(tok.pop(0))
            E = EX(X, n, tok.pop(0) if tok else "average")
        else:
            raise ValidationError(f"unknown space family {fam!r}")
    except IndexError:
        raise ValidationError(f"incomplete space spec {text!r}") from None
    if tok:
        raise ValidationError(f"trailing tokens in space spec {text!r}")
    return E


def space_from_json(obj: dict | str) -> Space:
    return parse_space(obj if isinstance(obj, str) else obj["spec"])
