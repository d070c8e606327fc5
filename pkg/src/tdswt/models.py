"""Parametrically driven circuit-QED models and closed-form observables.

Units: every frequency-like quantity in this module is angular, in
rad/ns (so 2*pi times a value in GHz), hbar = 1, time in ns.  Rates come
out in 1/ns.  The command-line layer converts from linear GHz/MHz.

Conventions fixed here and relied on everywhere else:

  * qubit basis index 0 is the ground state, sigma_z = diag(+1, -1),
    H0_qubit = -(omega_q/2) sigma_z, so E(e) - E(g) = omega_q > 0;
  * the drive g(t) = g_p exp(-i(omega_p t + phi_p)) + c.c., and the
    harmonic-series key +1 stores the exp(-i omega_p t) amplitude
    g_p exp(-i phi_p);
  * dispersive shifts follow the sigma_z(n+1/2) coefficient convention:
    chi < 0 means the resonator with the qubit in its ground state sits
    below the bare resonator frequency.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .engine import RESONANCE_RTOL, ParametricResonance
from .harmonics import HarmonicOperator, ToneBasis
from .hilbert import HilbertSpace, Operator, build_ladder, build_number

__all__ = [
    "RabiParams",
    "KerrParams",
    "BathSpectrum",
    "SystemModel",
    "NoBlindSpot",
    "build_rabi",
    "build_jc",
    "build_kerr",
    "chi2_qubit",
    "chi2_jc",
    "chi2_two_tone",
    "chi2_kerr",
    "chi2_kerr_ground",
    "chi4_qubit",
    "chi4_kerr_01",
    "blind_spot",
    "induced_rates",
    "RateReport",
    "TransitionRates",
]


class NoBlindSpot(Exception):
    """The requested model has no pump frequency where the shift vanishes."""


@dataclass(frozen=True)
class RabiParams:
    """Two-level system coupled to a resonator through a pumped coupler.

    g_p is the real sideband amplitude of the coupling modulation and
    phi_p its phase; omega_p = 0 degenerates to a static coupling of
    strength 2 g_p cos(phi_p).
    """

    omega_q: float
    omega_a: float
    g_p: float
    omega_p: float
    phi_p: float = 0.0
    n_a: int = 12

    def __post_init__(self):
        if self.omega_q <= 0 or self.omega_a <= 0:
            raise ValueError("omega_q and omega_a must be positive")
        if self.omega_p < 0:
            raise ValueError("omega_p must be nonnegative")
        if self.n_a < 4:
            raise ValueError("resonator truncation n_a must be at least 4")

    @property
    def omega_minus(self) -> float:
        return self.omega_q - self.omega_a

    @property
    def omega_plus(self) -> float:
        return self.omega_q + self.omega_a

    @property
    def amp(self) -> complex:
        """Complex amplitude stored under harmonic key +1."""
        return self.g_p * np.exp(-1j * self.phi_p)


@dataclass(frozen=True)
class KerrParams:
    """Kerr mode (frequency omega_b, anharmonicity K > 0) times resonator."""

    omega_a: float
    omega_b: float
    kerr: float
    g_p: float
    omega_p: float
    phi_p: float = 0.0
    n_a: int = 10
    n_b: int = 4

    def __post_init__(self):
        if self.omega_a <= 0 or self.omega_b <= 0:
            raise ValueError("mode frequencies must be positive")
        if self.kerr <= 0:
            raise ValueError("Kerr coefficient must be positive")
        if self.omega_p < 0:
            raise ValueError("omega_p must be nonnegative")
        if self.n_a < 4 or self.n_b < 3:
            raise ValueError("need n_a >= 4 and n_b >= 3")

    def Omega(self, n_b: int, sign: int) -> float:
        """Sideband detunings Omega_{+/-}(n_b) = omega_b + K - 2K n_b +/- omega_a."""
        return self.omega_b + self.kerr - 2.0 * self.kerr * n_b + sign * self.omega_a

    @property
    def amp(self) -> complex:
        return self.g_p * np.exp(-1j * self.phi_p)


@dataclass(frozen=True)
class BathSpectrum:
    """One-sided bath coupling density kappa(omega) at zero temperature.

    Calling it clamps kappa(omega <= 0) to zero, which encodes that the
    bath can only absorb quanta; any heating must then be powered by the
    pump, not the bath.
    """

    func: Callable[[float], float]
    name: str = "custom"

    def __call__(self, omega: float) -> float:
        if omega <= 0.0:
            return 0.0
        return max(0.0, float(self.func(omega)))

    @classmethod
    def flat(cls, kappa0: float) -> "BathSpectrum":
        if kappa0 < 0:
            raise ValueError("kappa0 must be nonnegative")
        return cls(func=lambda _w: kappa0, name="flat")


@dataclass(frozen=True)
class SystemModel:
    """A concrete driven model: diagonal H0 plus harmonic interaction."""

    kind: str
    space: HilbertSpace
    h0: Operator
    interaction: HarmonicOperator
    params: RabiParams | KerrParams

    @property
    def period(self) -> float:
        """Pump period in ns (single-tone models only)."""
        if self.interaction.basis.ntones != 1:
            raise ValueError("period is defined for single-tone models only")
        return 2.0 * np.pi / self.interaction.basis.omegas[0]


def _coupling_terms(basis: ToneBasis, amp: complex, x: Operator):
    """Harmonic terms of g(t) * X for g(t) = amp e^{-iwt} + conj(amp) e^{+iwt}."""
    if basis.ntones == 0:
        return {(): (amp + np.conj(amp)) * x}
    return {(1,): amp * x, (-1,): np.conj(amp) * x}


def _drive_basis(omega_p: float) -> ToneBasis:
    return ToneBasis(()) if omega_p == 0.0 else ToneBasis((omega_p,))


def build_rabi(p: RabiParams) -> SystemModel:
    """Transverse parametric coupling g(t) sigma_x (a + a^dag)."""
    space = HilbertSpace((2, p.n_a))
    nq = space.number_vector(0)
    na = space.number_vector(1)
    energies = -0.5 * p.omega_q * (1.0 - 2.0 * nq) + p.omega_a * (na + 0.5)
    h0 = Operator(space, np.diag(energies.astype(complex)))
    sm = build_ladder(space, 0)
    a = build_ladder(space, 1)
    x = (sm + sm.dagger()) @ (a + a.dagger())
    basis = _drive_basis(p.omega_p)
    interaction = HarmonicOperator(basis, space, _coupling_terms(basis, p.amp, x))
    return SystemModel("rabi", space, h0, interaction, p)


def build_jc(p: RabiParams) -> SystemModel:
    """Excitation-preserving half of the parametric coupling.

    Same parameter set as the full model, interaction
    g(t) (sigma^+ a + sigma^- a^dag).
    """
    space = HilbertSpace((2, p.n_a))
    nq = space.number_vector(0)
    na = space.number_vector(1)
    energies = -0.5 * p.omega_q * (1.0 - 2.0 * nq) + p.omega_a * (na + 0.5)
    h0 = Operator(space, np.diag(energies.astype(complex)))
    sm = build_ladder(space, 0)
    a = build_ladder(space, 1)
    x = sm.dagger() @ a + sm @ a.dagger()
    basis = _drive_basis(p.omega_p)
    interaction = HarmonicOperator(basis, space, _coupling_terms(basis, p.amp, x))
    return SystemModel("jc", space, h0, interaction, p)


def build_kerr(p: KerrParams) -> SystemModel:
    """Kerr mode exchanging quanta with the resonator via a pumped coupler."""
    space = HilbertSpace((p.n_b, p.n_a))
    nb = space.number_vector(0)
    na = space.number_vector(1)
    energies = p.omega_b * nb - p.kerr * nb ** 2 + p.omega_a * na
    h0 = Operator(space, np.diag(energies.astype(complex)))
    b = build_ladder(space, 0)
    a = build_ladder(space, 1)
    x = (b + b.dagger()) @ (a + a.dagger())
    basis = _drive_basis(p.omega_p)
    interaction = HarmonicOperator(basis, space, _coupling_terms(basis, p.amp, x))
    return SystemModel("kerr", space, h0, interaction, p)


# ---------------------------------------------------------------------------
# closed-form second- and fourth-order observables
# ---------------------------------------------------------------------------


def _formula_scale(*freqs: float) -> float:
    return max(abs(f) for f in freqs)


def _guard(denom: float, scale: float, key: tuple[int, ...] = (1,)) -> float:
    """Raise ParametricResonance when a closed form sits on a pole.

    Formula-level poles carry basis indices (-1, -1) since no matrix
    element is involved.
    """
    if abs(denom) < RESONANCE_RTOL * scale:
        raise ParametricResonance(-1, -1, key, denom)
    return denom


def chi2_qubit(p: RabiParams) -> float:
    """Second-order dispersive shift of the two-level model.

    chi = -2 g_p^2 [ w-/(w-^2 - wp^2) + w+/(w+^2 - wp^2) ],
    evaluated in a factored form whose numerator carries the exact
    (w- w+ - wp^2) cancellation, so the blind spot is a hard zero.
    """
    wm, wp_, op = p.omega_minus, p.omega_plus, p.omega_p
    scale = _formula_scale(p.omega_q, p.omega_a, op if op else p.omega_a)
    dm = _guard(wm - op, scale) * _guard(wm + op, scale)
    dp = _guard(wp_ - op, scale) * _guard(wp_ + op, scale)
    g2 = abs(p.amp) ** 2
    return -2.0 * g2 * (wp_ + wm) * (wm * wp_ - op * op) / (dm * dp)


def chi2_jc(p: RabiParams) -> float:
    """Second-order shift keeping only the excitation-preserving coupling."""
    wm, op = p.omega_minus, p.omega_p
    scale = _formula_scale(p.omega_q, p.omega_a, op if op else p.omega_a)
    d = _guard(wm - op, scale) * _guard(wm + op, scale)
    return -2.0 * abs(p.amp) ** 2 * wm / d


def chi2_two_tone(p: RabiParams, g0: float) -> float:
    """Shift under a static tone g0 plus the pumped tone of `p`.

    At second order the tones contribute independently:
    chi = -sum_tones |g_tone|^2 sum_{s,t = +/-} 1/(w_s + t w_tone).
    Note the static tone enters the formula with amplitude g0 as stored,
    i.e. as the exp(0) sideband pair; a truly DC coupler of strength G
    corresponds to g0 = G/2.
    """
    wm, wp_ = p.omega_minus, p.omega_plus
    scale = _formula_scale(p.omega_q, p.omega_a, p.omega_p if p.omega_p else p.omega_a)

    def f2(w_tone: float) -> float:
        return sum(
            1.0 / _guard(ws + t * w_tone, scale)
            for ws in (wm, wp_) for t in (+1.0, -1.0)
        )

    return -(g0 ** 2) * f2(0.0) - abs(p.amp) ** 2 * f2(p.omega_p)


def _kerr_scale(p: KerrParams, n_max: int) -> float:
    vals = [abs(p.Omega(n, s)) for n in range(n_max + 1) for s in (+1, -1)]
    vals += [p.omega_a, p.omega_b, p.omega_p if p.omega_p else p.omega_a]
    return max(vals)


def _delta_omega_a(p: KerrParams, n: int, scale: float) -> float:
    """Resonator pull |g|^2 d<n_a>-coefficient with the Kerr mode at level n."""
    g2 = abs(p.amp) ** 2

    def f(omega_n: float) -> float:
        return (1.0 / _guard(omega_n - p.omega_p, scale)
                + 1.0 / _guard(omega_n + p.omega_p, scale))

    total = 0.0
    for s in (+1, -1):
        if n > 0:
            total += n * f(p.Omega(n, s))
        total -= (n + 1) * f(p.Omega(n + 1, s))
    return g2 * total


def chi2_kerr(p: KerrParams, n_b: int) -> float:
    """Shift of the resonator when the Kerr mode climbs n_b - 1 -> n_b.

    Computed as the difference of the per-level resonator pulls, which
    reduces to the familiar two-level expression at n_b = 1 and
    telescopes correctly for higher levels.
    """
    if not 1 <= n_b <= p.n_b - 2:
        raise ValueError(f"n_b must be in [1, {p.n_b - 2}] for this truncation")
    scale = _kerr_scale(p, n_b + 1)
    return _delta_omega_a(p, n_b, scale) - _delta_omega_a(p, n_b - 1, scale)


def chi2_kerr_ground(p: KerrParams) -> float:
    """Resonator pull with the Kerr mode parked in its ground state.

    Does not vanish at the blind spot of chi2_kerr(. , 1): the pump still
    pulls the resonator, it just pulls it equally for the two lowest
    Kerr levels.
    """
    scale = _kerr_scale(p, 1)
    return _delta_omega_a(p, 0, scale)


def chi4_qubit(p: RabiParams) -> float:
    """Fourth-order correction to the two-level dispersive shift.

    From the triple-commutator term of the cascade, rotating-wave
    projected; u_s = 1/(w_s + wp), v_s = 1/(w_s - wp).  The returned
    value is the sigma_z (n^2 + n + 1/2) coefficient contrast between
    one and zero photons, which is what adds to chi2 for the 0 -> 1
    transition.
    """
    wm, wp_, op = p.omega_minus, p.omega_plus, p.omega_p
    scale = _formula_scale(p.omega_q, p.omega_a, op if op else p.omega_a)
    u = {s: 1.0 / _guard(w + op, scale) for s, w in ((-1, wm), (+1, wp_))}
    v = {s: 1.0 / _guard(w - op, scale) for s, w in ((-1, wm), (+1, wp_))}

    bracket = 0.0
    for s in (+1, -1):
        o = -s
        bracket += (u[s] + v[s]) ** 3
        bracket -= u[s] ** 2 * v[s]
        bracket -= v[s] ** 2 * u[s]
        bracket += 2.0 * (u[s] + v[s]) * (u[o] + v[o]) ** 2
        bracket -= 2.0 * u[s] * u[o] * v[o]
        bracket -= 2.0 * v[s] * v[o] * u[o]

    c1 = abs(p.amp) ** 4 * bracket
    return 2.0 * c1


def chi4_kerr_01(p: KerrParams) -> float:
    """Fourth-order correction to chi2_kerr(., 1), pump near the
    difference sidebands.

    The closed form keeps only products with a common pump sign within
    each term (the dominant combinations near the lower sidebands), so
    away from that regime it is an approximation rather than an identity.
    """
    scale = _kerr_scale(p, 3)
    g4 = abs(p.amp) ** 4
    total = 0.0
    for t in (+1, -1):
        def r(omega_n: float) -> float:
            return 1.0 / _guard(omega_n + t * p.omega_p, scale)

        om_ = {n: p.Omega(n, -1) for n in range(4)}
        op_ = {n: p.Omega(n, +1) for n in range(4)}
        total += (
            -18.0 * r(om_[3]) ** 2 * r(om_[2])
            + 36.0 * r(om_[2]) * r(om_[3]) * r(op_[2])
            + 54.0 * r(op_[2]) ** 2 * r(om_[3])
            + 6.0 * r(om_[0]) * r(om_[2]) * r(op_[1])
            + 4.0 * r(op_[0]) * r(om_[1]) * r(op_[1])
        )
    return -0.25 * g4 * total


def blind_spot(p: RabiParams | KerrParams) -> float:
    """Pump frequency at which the second-order shift vanishes.

    Two-level model: omega_BS = sqrt(w+ w-), which exists iff
    omega_q > omega_a.  Kerr model: root of chi2_kerr(., 1) between the
    poles at Omega_-(1) and -Omega_-(2), refined numerically from the
    geometric-mean seed; exists iff 0 < Omega_-(1) < 2K.
    """
    if isinstance(p, RabiParams):
        if p.omega_q <= p.omega_a:
            raise NoBlindSpot(
                "sqrt(w+ w-) requires omega_q > omega_a "
                f"(got omega_q={p.omega_q:.6g}, omega_a={p.omega_a:.6g})"
            )
        return float(np.sqrt(p.omega_plus * p.omega_minus))

    om1 = p.Omega(1, -1)
    if not 0.0 < om1 < 2.0 * p.kerr:
        raise NoBlindSpot(
            "need 0 < Omega_-(1) < 2K for a shift zero between the "
            f"sidebands (got Omega_-(1)={om1:.6g}, 2K={2 * p.kerr:.6g})"
        )
    lo, hi = sorted((om1, 2.0 * p.kerr - om1))
    seed = float(np.sqrt(lo * hi))
    if hi - lo < 1e-9 * p.kerr:
        return seed
    pad = 1e-9 * (hi - lo)

    def f(w):
        return chi2_kerr(replace(p, omega_p=float(w)), 1)

    a, b = lo + pad, hi - pad
    fa, fb = f(a), f(b)
    if fa * fb > 0:
        raise NoBlindSpot("no sign change of chi2_kerr between the sidebands")
    return float(brentq(f, a, b, xtol=1e-12 * max(hi, 1.0)))


# ---------------------------------------------------------------------------
# pump-induced dissipation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransitionRates:
    """Induced rates for one ladder step (level-1 <-> level) of the
    nonlinear mode, split by which sideband manifold mediates them."""

    level: int
    minus_down: float
    minus_up: float
    plus_down: float
    plus_up: float

    @property
    def total_down(self) -> float:
        return self.minus_down + self.plus_down

    @property
    def total_up(self) -> float:
        return self.minus_up + self.plus_up


@dataclass(frozen=True)
class RateReport:
    kind: str
    transitions: tuple[TransitionRates, ...]

    def level(self, n: int) -> TransitionRates:
        for t in self.transitions:
            if t.level == n:
                return t
        raise KeyError(f"no transition rates for level {n}")


def _rates_for_detunings(om: float, op_: float, omega_a: float, g2: float,
                         omega_p: float, bath: BathSpectrum,
                         scale: float) -> tuple[float, float, float, float]:
    """Golden-rule rates through the resonator for one ladder step.

    om and op_ are the difference and sum sideband detunings of that
    step; the emitted/absorbed bath quantum is at omega_a + detuning
    shifted by one pump quantum either way.
    """
    md = mu = pd = pu = 0.0
    for s in (+1.0, -1.0):
        dm = _guard(om + s * omega_p, scale)
        dp = _guard(op_ + s * omega_p, scale)
        md += bath(omega_a + dm) * g2 / dm ** 2
        mu += bath(-omega_a - dm) * g2 / dm ** 2
        pd += bath(-omega_a + dp) * g2 / dp ** 2
        pu += bath(omega_a - dp) * g2 / dp ** 2
    return md, mu, pd, pu


def induced_rates(p: RabiParams | KerrParams, bath: BathSpectrum) -> RateReport:
    """Pump-induced transition rates of the nonlinear mode.

    The pump converts resonator decay (spectrum `bath`) into effective
    up/down transitions of the qubit or Kerr mode: each rate is
    kappa(emitted frequency) * g_p^2 / detuning^2, summed over the two
    pump sidebands of each sideband manifold.  At zero temperature the
    bath factor kills any term whose emitted frequency is negative, so
    heating terms survive only when the pump itself supplies the energy.
    """
    g2 = abs(p.amp) ** 2
    if isinstance(p, RabiParams):
        scale = _formula_scale(p.omega_q, p.omega_a, p.omega_p if p.omega_p else p.omega_a)
        md, mu, pd, pu = _rates_for_detunings(
            p.omega_minus, p.omega_plus, p.omega_a, g2, p.omega_p, bath, scale)
        return RateReport("rabi", (TransitionRates(1, md, mu, pd, pu),))

    scale = _kerr_scale(p, p.n_b)
    transitions = []
    for n in range(1, p.n_b):
        md, mu, pd, pu = _rates_for_detunings(
            p.Omega(n, -1), p.Omega(n, +1), p.omega_a, g2, p.omega_p, bath, scale)
        transitions.append(TransitionRates(n, md, mu, pd, pu))
    return RateReport("kerr", tuple(transitions))
