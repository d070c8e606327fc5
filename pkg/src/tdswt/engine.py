"""Time-dependent Schrieffer-Wolff cascade for periodically driven systems.

Given H(t) = H0 + V(t) with diagonal H0 and V a finite harmonic series,
each stage solves the generator equation

    i dS/dt + [S, H0] + V_od = 0

elementwise in the frequency domain (integration constants zero, so S
inherits the drive's harmonic support and stays bounded) and feeds the
Baker-Campbell-Hausdorff expansion of the dressing to build the next
stage's interaction.  The cascade with generators S1..SM removes the
block-off-diagonal part of H(t) through order M in the coupling; what
remains diagonal is accumulated per order for rotating-wave projection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .harmonics import HarmonicOperator, hs_commutator
from .hilbert import Operator

__all__ = [
    "ParametricResonance",
    "ConvergenceDiag",
    "SwtResult",
    "solve_generator",
    "swt_cascade",
    "effective_hamiltonian",
    "generator_ode_residual",
]

# A frequency denominator smaller than this fraction of the H0 spectral
# span aborts the transformation (the drive is parametrically resonant
# with that transition); denominators within WARN_FACTOR of the abort
# threshold are recorded in the diagnostics instead.
RESONANCE_RTOL = 1e-6
WARN_FACTOR = 1e3

# Numerators below this fraction of the interaction's largest element do
# not count when testing denominators: a vanishing matrix element in
# front of a small denominator is not a resonance.
NUMERATOR_RTOL = 1e-14


class ParametricResonance(Exception):
    """A drive harmonic hit a transition it couples to.

    Attributes
    ----------
    j, k : int
        Row and column basis indices of the divergent element.
    key : tuple of int
        Integer tone vector of the offending harmonic.
    denominator : float
        The near-zero value (E_k - E_j) + key . omega.
    """

    def __init__(self, j: int, k: int, key: tuple[int, ...], denominator: float):
        self.j = int(j)
        self.k = int(k)
        self.key = tuple(key)
        self.denominator = float(denominator)
        super().__init__(
            f"drive harmonic {self.key} is resonant with transition "
            f"({self.j} <- {self.k}): denominator {self.denominator:.3e}"
        )


@dataclass
class ConvergenceDiag:
    """Convergence bookkeeping for one cascade.

    max_generator_element is the largest |S| element over all orders;
    radius_estimate is the largest first-order element, i.e. the usual
    g/Delta small parameter; min_denominator is the smallest frequency
    denominator that carried a non-negligible numerator.
    resonance_flags lists (j, k, key, denominator) tuples for
    denominators within WARN_FACTOR of the abort threshold.
    """

    max_generator_element: float = 0.0
    min_denominator: float = np.inf
    radius_estimate: float = 0.0
    resonance_flags: list[tuple[int, int, tuple[int, ...], float]] = field(default_factory=list)

    def absorb(self, max_el: float, min_den: float, flags: list):
        self.max_generator_element = max(self.max_generator_element, max_el)
        self.min_denominator = min(self.min_denominator, min_den)
        self.resonance_flags.extend(flags)


@dataclass
class SwtResult:
    """Output of swt_cascade.

    generators[m] is S_{m+1}; v_diag[m] is the block-diagonal interaction
    collected at order m (m = 2..max_order) as a harmonic series, still
    carrying its micromotion sidebands until rwa projection.
    """

    h0: Operator
    generators: list[HarmonicOperator]
    v_diag: dict[int, HarmonicOperator]
    diagnostics: ConvergenceDiag
    max_order: int


def _spectral_span(h0: Operator) -> float:
    e = h0.diagonal().real
    return float(e.max() - e.min()) if e.size > 1 else 1.0


def solve_generator(h0: Operator, v_od: HarmonicOperator, *,
                    eps_res: float | None = None,
                    diag: ConvergenceDiag | None = None) -> HarmonicOperator:
    """Solve i dS/dt + [S, H0] + V_od = 0 for the periodic generator S.

    The particular solution is elementwise,

        S_k[j, i] = -V_k[j, i] / ((E_i - E_j) + key . omega),

    with all integration constants set to zero so S carries exactly the
    drive harmonics.  H0 must be diagonal and every term of V_od must be
    strictly block-off-diagonal with respect to it.

    Raises ParametricResonance when a denominator with a significant
    numerator falls below eps_res (default RESONANCE_RTOL times the H0
    spectral span).  Denominators within WARN_FACTOR of that are recorded
    in `diag` when one is supplied.
    """
    if not h0.is_diagonal():
        raise ValueError("H0 must be diagonal in the working basis")
    if v_od.pinch(h0, warn=False).max_abs() > 0.0:
        raise ValueError("V_od has elements inside degenerate H0 blocks")

    e = h0.diagonal().real
    span = _spectral_span(h0)
    if eps_res is None:
        eps_res = RESONANCE_RTOL * span
    eps_warn = WARN_FACTOR * eps_res

    floor = NUMERATOR_RTOL * v_od.max_abs()
    min_den = np.inf
    flags: list[tuple[int, int, tuple[int, ...], float]] = []
    terms: dict[tuple[int, ...], Operator] = {}

    for key in v_od.keys_sorted():
        num = v_od.terms[key].matrix
        w = v_od.basis.frequency(key)
        denom = (e[None, :] - e[:, None]) + w
        sig = np.abs(num) > floor
        if not sig.any():
            continue
        absd = np.abs(denom)
        bad = sig & (absd < eps_res)
        if bad.any():
            j, k = np.argwhere(bad)[0]
            raise ParametricResonance(j, k, key, denom[j, k])
        warn_mask = sig & (absd < eps_warn)
        for j, k in np.argwhere(warn_mask):
            flags.append((int(j), int(k), key, float(denom[j, k])))
        min_den = min(min_den, float(absd[sig].min()))
        s = np.zeros_like(num)
        s[sig] = -num[sig] / denom[sig]
        terms[key] = Operator(v_od.space, s)

    gen = HarmonicOperator(v_od.basis, v_od.space, terms)
    if diag is not None:
        diag.absorb(gen.max_abs(), min_den, flags)
    return gen


def swt_cascade(model, max_order: int = 2) -> SwtResult:
    """Run the Schrieffer-Wolff cascade on a driven model.

    `model` needs attributes `h0` (diagonal Operator) and `interaction`
    (Hermitian HarmonicOperator with no block-diagonal part).  For
    max_order = M in {2, 3, 4} the cascade computes generators S1..SM
    and the block-diagonal interaction v_diag[m] for m = 2..M.  After
    all M rotations the residual off-diagonal coupling is of order M+1,
    so halving the drive amplitude shrinks it by 2^(M+1).

    Order bookkeeping, with A = [S1, V] and B = [S1, A]:

        order 2 total: (1/2) A
        order 3 total: (1/3) B
        order 4 total: (1/8) [S1, B] + (1/2) [S2, VOD2] + [S2, VD2]

    where VD2/VOD2 split (1/2) A against H0.  The [S2, VD2] term is
    purely block-off-diagonal and only matters for S4; the diagonal
    collected at order 4 is the pinch of the first two pieces.
    """
    if max_order not in (2, 3, 4):
        raise ValueError(f"max_order must be 2, 3, or 4, got {max_order}")
    h0: Operator = model.h0
    v: HarmonicOperator = model.interaction
    if not v.is_hermitian_series():
        raise ValueError("interaction must be a Hermitian harmonic series")
    # One degeneracy warning per cascade, from this first split.
    if v.pinch(h0, warn=True).max_abs() > 1e-14 * max(v.max_abs(), 1.0):
        raise ValueError("interaction has a block-diagonal part at order 1")

    eps_res = RESONANCE_RTOL * _spectral_span(h0)
    diag = ConvergenceDiag()

    s1 = solve_generator(h0, v, eps_res=eps_res, diag=diag)
    diag.radius_estimate = s1.max_abs()
    generators = [s1]
    v_diag: dict[int, HarmonicOperator] = {}

    a = hs_commutator(s1, v)
    v2 = 0.5 * a
    vd2 = v2.pinch(h0, warn=False)
    vod2 = v2.off_diag(h0, warn=False)
    v_diag[2] = vd2
    s2 = solve_generator(h0, vod2, eps_res=eps_res, diag=diag)
    generators.append(s2)

    if max_order >= 3:
        b = hs_commutator(s1, a)
        v3 = (1.0 / 3.0) * b
        v_diag[3] = v3.pinch(h0, warn=False)
        s3 = solve_generator(h0, v3.off_diag(h0, warn=False), eps_res=eps_res, diag=diag)
        generators.append(s3)

    if max_order >= 4:
        w4 = (1.0 / 8.0) * hs_commutator(s1, b) \
            + 0.5 * hs_commutator(s2, vod2) \
            + hs_commutator(s2, vd2)
        v_diag[4] = w4.pinch(h0, warn=False)
        s4 = solve_generator(h0, w4.off_diag(h0, warn=False), eps_res=eps_res, diag=diag)
        generators.append(s4)

    return SwtResult(h0=h0, generators=generators, v_diag=v_diag,
                     diagnostics=diag, max_order=max_order)


def effective_hamiltonian(result: SwtResult, order: int | None = None,
                          rwa: bool = True) -> Operator | HarmonicOperator:
    """Dressed Hamiltonian through the requested order.

    With rwa=True (the default) returns the static Operator
    H0 + sum_m P_rwa(v_diag[m]); with rwa=False returns the full
    block-diagonal harmonic series including micromotion sidebands.
    """
    if order is None:
        order = result.max_order
    if not 2 <= order <= result.max_order:
        raise ValueError(f"order must be between 2 and {result.max_order}")
    picked = [result.v_diag[m] for m in range(2, order + 1) if m in result.v_diag]
    if rwa:
        acc = result.h0.matrix.copy()
        for hseries in picked:
            acc = acc + hseries.rwa_project().matrix
        return Operator(result.h0.space, acc)
    basis = result.generators[0].basis
    total = HarmonicOperator.static(basis, result.h0)
    for hseries in picked:
        total = total + hseries
    return total


def generator_ode_residual(h0: Operator, s: HarmonicOperator,
                           v_od: HarmonicOperator) -> float:
    """Largest element of i dS/dt + [S, H0] + V_od, which should vanish."""
    h0_series = HarmonicOperator.static(s.basis, h0)
    r = 1j * s.time_derivative() + hs_commutator(s, h0_series, prune_rtol=0.0) + v_od
    return r.max_abs()
