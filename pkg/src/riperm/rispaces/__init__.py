"""Rearrangement-invariant spaces: phi functions, Orlicz functions, sequence spaces, norms."""

from .mfunc import ExpM, LorentzM, MFunc, PowerM, TabulatedM, staircase_m
from .phi import (FunctionPhi, PlateauPhi, LogPhi, PhiSpec, PowerPhi, TabulatedPhi,
                  check_phi, concave_majorant, is_quasi_concave, log_family_hull, phi_eval, psi_y)
from .seq import HeadSum, LpSeq, SeqSpace, Weighted, parse_seq
from .spaces import (EX, ExpLp, Lorentz, Lp, Marcinkiewicz, Orlicz, OrliczLorentz, Space,
                     SpaceSpec, fundamental_function, norm, norm_one_probe, parse_mfunc,
                     parse_phi, parse_space, space_from_json)
