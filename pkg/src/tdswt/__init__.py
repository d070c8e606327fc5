"""ParametricDispersive: Schrieffer-Wolff treatment of pumped couplers.

Closed-form dressed shifts and pump-induced dissipation rates for
parametrically coupled qubit/Kerr-resonator systems, cross-checked
against exact Floquet and Lindblad numerics on truncated spaces.
"""

from .engine import (
    ConvergenceDiag,
    ParametricResonance,
    SwtResult,
    effective_hamiltonian,
    generator_ode_residual,
    solve_generator,
    swt_cascade,
)
from .harmonics import HarmonicOperator, ToneBasis, hs_commutator
from .hilbert import (
    DegenerateLevelWarning,
    HilbertSpace,
    Operator,
    build_ladder,
    build_number,
    commutator,
    off_diag,
    pinch,
)
from .models import (
    BathSpectrum,
    KerrParams,
    NoBlindSpot,
    RabiParams,
    RateReport,
    SystemModel,
    TransitionRates,
    blind_spot,
    build_jc,
    build_kerr,
    build_rabi,
    chi2_jc,
    chi2_kerr,
    chi2_kerr_ground,
    chi2_qubit,
    chi2_two_tone,
    chi4_kerr_01,
    chi4_qubit,
    induced_rates,
)

__version__ = "0.1.0"
