"""Discrete spherical averages on Z^n over factorial radius sequences.

Lattice-point counting and enumeration, quadratic Gauss sums, the major-arc
multipliers that approximate the Fourier transform of a lattice sphere, and
spatial maximal-function estimates, each with an independent check.
"""
from .arithmetic import (
    GaussSumTable, completed_sum_identity, gauss_bound_check, gauss_F, quad_gauss_1d,
    residue_count, units, zero_count,
)
from .averaging import (
    GridFunction, OpNormReport, TestFamilySpec, apply_average, lp_norm, maximal_function,
    maximal_lp_norms, op_norm_estimate, sup_window_count,
)
from .errors import (
    BudgetExceeded, DegenerateFit, EmptySphere, FactorizationFailed, FormatError, NotPrime,
    RangeExceeded, SpherelabError, SupportOverlap, UnsupportedDimension,
)
from .lattice import (
    RepCountTable, SpherePointSet, count_representations, enumerate_sphere, load_table,
    rep_count_table, save_table, sphere_slices,
)
from .multipliers import (
    DecayFitReport, DecompositionReport, approx_residual, decay_fit, decomposition_check,
    e1_eval, e2_eval, m_eval, omega_eval, omega_hat, sphere_ft, u_factor, v_factor, zeta,
)
from .seqfact import (
    FactorialIndex, WindowConfig, character_value, check_sparsity, divides_lambda, j0_for,
    lambda_value, lambda_valuation,
)

__version__ = "0.1.0"
