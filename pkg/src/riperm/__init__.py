"""riperm: rearrangement-invariant norms of permutation operators on matrices.

Subpackages and modules:

* :mod:`riperm.stepcore`    step functions, rearrangements, majorization
* :mod:`riperm.rispaces`    quasi-concave functions, Orlicz functions, r.i. norms
* :mod:`riperm.permops`     T_q, U, B_n and swap moves on n x n matrices
* :mod:`riperm.coincidence` exact fixed-point statistics of random permutations
* :mod:`riperm.criteria`    the Gamma series, census and convexity probes
* :mod:`riperm.harness`     verification suites, corpora and reports
"""

__version__ = "0.1.0"

from .errors import (ConvergenceError, DomainError, EnumerationLimitError, RIError, UnsupportedError,
                     ValidationError)
from .stepcore import (StepFunction, ValueDistribution, decreasing_rearrangement, dilated_disjoint_sum,
                       head_integral, k_functional_l1_linf, majorizes)
from .permops import (MatrixN, as_matrix, matrix_rearrangement, reduce_to_permutation, sequence_norm_avg,
                      shift_entry, tail_lq_term, tq_distribution, tq_norm, tq_norm_mc, u_function)
from .coincidence import CoincidenceTable, fixed_point_distribution, mu_exact
from .criteria import GammaResult, almost_convex_census, dconvex_probe, gamma
from .rispaces import parse_mfunc, parse_phi, parse_seq, parse_space
from .harness import load_config, run_all

__all__ = [name for name in dir() if not name.startswith("_")]
