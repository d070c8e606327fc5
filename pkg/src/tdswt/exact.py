"""Exact Floquet and Lindblad references on the truncated model spaces.

Everything here integrates the model in the interaction frame of the
diagonal H0: the frame phases are known exactly, so the integrator only
resolves sideband frequencies (order coupling detunings plus the pump)
instead of the bare level energies, which buys an order of magnitude in
step size at fixed accuracy.  All integration is fixed-step RK4, fully
deterministic.

Degenerate folded quasi-energies are endemic here (commensurate pumps
are exactly the interesting operating points), so the monodromy is never
diagonalized raw: eigenvectors are taken per conserved-parity sector,
and when the drive flips sign after half a period the half-period glide
propagator is diagonalized instead, which splits the folded pairs that
parity alone cannot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit, linear_sum_assignment

from .hilbert import Operator
from .models import SystemModel

__all__ = [
    "FloquetResult",
    "SpectrumTrace",
    "RateFit",
    "DressedShift",
    "AmbiguousLabeling",
    "ConvergenceFailure",
    "propagate_period",
    "dressed_shift",
    "lindblad_evolve",
    "spectrum_probe",
    "fit_rate",
]

QE_TOL = 2.0 * np.pi * 1e-10   # quasi-energy convergence target, rad/ns
UNITARITY_TOL = 1e-9
OVERLAP_FLOOR = 0.6            # squared overlap below which labeling errors
MAX_STEPS = 1 << 20


class AmbiguousLabeling(Exception):
    """Floquet modes could not be matched to bare basis states."""


class ConvergenceFailure(Exception):
    """Fixed-step integration failed its convergence or sanity checks."""


@dataclass
class FloquetResult:
    """Monodromy eigensystem with modes labeled by bare basis states."""

    period: float
    steps: int
    monodromy: Operator
    quasi_energies: np.ndarray        # per mode, rad/ns, folded
    modes: np.ndarray                 # columns are Floquet modes at t = 0
    state_labels: dict[int, int]      # bare basis index -> mode index
    overlaps: np.ndarray              # squared overlap of each labeled pair
    used_glide: bool

    def energy_of(self, label) -> float:
        """Quasi-energy of the mode labeled by a bare state.

        `label` is either a flat basis index or an occupation tuple.
        """
        idx = label if isinstance(label, (int, np.integer)) else None
        if idx is None:
            idx = self.monodromy.space.index_of(tuple(label))
        return float(self.quasi_energies[self.state_labels[int(idx)]])


@dataclass
class DressedShift:
    value: float
    flagged: bool

    def __float__(self):
        return self.value


@dataclass
class SpectrumTrace:
    """Strobed steady-state probe response against probe detuning."""

    deltas: np.ndarray        # probe detuning from omega_a, rad/ns
    response: np.ndarray      # |<a>_ss|^2
    peak_delta: float         # fitted peak location, rad/ns
    half_width: float         # fitted half width at half maximum, rad/ns
    fit_ok: bool
    qubit_state: int


@dataclass
class RateFit:
    gamma: float
    amplitude: float
    offset: float
    r_squared: float
    flagged: bool


# ---------------------------------------------------------------------------
# interaction-frame machinery
# ---------------------------------------------------------------------------


def _interaction_stack(model: SystemModel):
    """Stacked amplitudes and element frequencies of H_I(t).

    H_I(t)[j, k] = sum_m amps[m, j, k] * exp(i freqs[m, j, k] * t) with
    freqs[m] = (E_j - E_k - omega_m), absorbing the frame phases.
    """
    e = model.h0.diagonal().real
    frame = e[:, None] - e[None, :]
    amps, freqs = [], []
    for key, op in model.interaction.terms.items():
        w = model.interaction.basis.frequency(key)
        amps.append(op.matrix)
        freqs.append(frame - w)
    return np.array(amps), np.array(freqs), e


def _h_int(amps, freqs, t):
    return (amps * np.exp(1j * freqs * t)).sum(axis=0)


def _parity_vector(space, subsystem=None) -> np.ndarray:
    """(-1)^n of one subsystem, or of the total occupation when None."""
    if subsystem is None:
        total = sum(space.number_vector(i) for i in range(len(space.dims)))
        return np.where(total.astype(int) % 2 == 0, 1.0, -1.0)
    return np.where(space.number_vector(subsystem).astype(int) % 2 == 0, 1.0, -1.0)


def _commutes_with_parity(model, s) -> bool:
    mask = np.abs(s[:, None] * s[None, :] - 1.0) < 1e-14
    return all(np.all(np.abs(op.matrix[~mask]) == 0.0)
               for op in model.interaction.terms.values())


def _anticommutes_with_parity(model, s) -> bool:
    mask = np.abs(s[:, None] * s[None, :] + 1.0) < 1e-14
    return all(np.all(np.abs(op.matrix[~mask]) == 0.0)
               for op in model.interaction.terms.values())


def _glide_parity(model) -> np.ndarray | None:
    """A subsystem parity under which the drive is odd, if one exists.

    Combined with every harmonic key being odd (so the coupling flips
    sign after half a pump period), P * U(T/2) is a square root of the
    monodromy and resolves folded degeneracies between uncoupled states
    of opposite parity.
    """
    if any(sum(k) % 2 == 0 for k in model.interaction.terms):
        return None
    for sub in range(len(model.space.dims)):
        s = _parity_vector(model.space, sub)
        if _anticommutes_with_parity(model, s):
            return s
    return None


def _rk4_unitary(amps, freqs, t0, t1, steps, dim):
    u = np.eye(dim, dtype=complex)
    h = (t1 - t0) / steps
    for i in range(steps):
        t = t0 + i * h
        h1 = _h_int(amps, freqs, t)
        h2 = _h_int(amps, freqs, t + 0.5 * h)
        h3 = _h_int(amps, freqs, t + h)
        k1 = -1j * (h1 @ u)
        u2 = u + 0.5 * h * k1
        k2 = -1j * (h2 @ u2)
        u3 = u + 0.5 * h * k2
        k3 = -1j * (h2 @ u3)
        u4 = u + h * k3
        k4 = -1j * (h3 @ u4)
        u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return u


def _fold(x: float, w: float) -> float:
    y = x - w * np.round(x / w)
    if y <= -0.5 * w:
        y += w
    return float(y)


def _sector_eig(mat: np.ndarray, sectors: list[np.ndarray]):
    """Eigendecomposition block by block over index sets `sectors`."""
    dim = mat.shape[0]
    vals = np.zeros(dim, dtype=complex)
    vecs = np.zeros((dim, dim), dtype=complex)
    pos = 0
    for idx in sectors:
        block = mat[np.ix_(idx, idx)]
        w, v = np.linalg.eig(block)
        vals[pos:pos + len(idx)] = w
        vecs[np.ix_(idx, np.arange(pos, pos + len(idx)))] = v
        pos += len(idx)
    return vals, vecs


def _label_modes(vecs: np.ndarray):
    """Assign each bare basis state the mode it overlaps most with."""
    prob = np.abs(vecs) ** 2           # prob[i, m] = |<i|mode m>|^2
    row, col = linear_sum_assignment(-prob)
    labels = {int(i): int(m) for i, m in zip(row, col)}
    overlaps = prob[row, col]
    if overlaps.min() < OVERLAP_FLOOR:
        i = int(row[np.argmin(overlaps)])
        raise AmbiguousLabeling(
            f"best overlap for bare state {i} is {overlaps.min():.3f} "
            f"(< {OVERLAP_FLOOR}); Floquet modes are strongly hybridized"
        )
    return labels, overlaps


def propagate_period(model: SystemModel, steps: int = 1024) -> FloquetResult:
    """Monodromy and labeled quasi-energy spectrum of a single-tone model.

    Integrates dU/dt = -i H(t) U over one pump period with fixed-step
    RK4 in the interaction frame, doubling the step count until every
    labeled quasi-energy moves by less than 1e-10 (in units of 2 pi GHz)
    under a doubling.  When the drive is odd under a subsystem parity
    and carries only odd harmonics, only half a period is integrated and
    the glide square root is diagonalized instead of the monodromy.

    Quasi-energies are folded to (-omega_p/2, omega_p/2].
    """
    if model.interaction.basis.ntones != 1:
        raise ValueError("Floquet propagation needs a single-tone model")
    if steps < 2:
        raise ValueError("steps must be at least 2")
    period = model.period
    omega_p = model.interaction.basis.omegas[0]
    dim = model.space.dim
    amps, freqs, e = _interaction_stack(model)

    glide = _glide_parity(model)
    t_end = 0.5 * period if glide is not None else period

    if _commutes_with_parity(model, _parity_vector(model.space)):
        s = _parity_vector(model.space)
        sectors = [np.where(s > 0)[0], np.where(s < 0)[0]]
        sectors = [idx for idx in sectors if len(idx)]
    else:
        sectors = [np.arange(dim)]

    steps = max(int(steps), 1024)
    prev_energies = None
    while True:
        u_int = _rk4_unitary(amps, freqs, 0.0, t_end, steps, dim)
        err = np.abs(u_int.conj().T @ u_int - np.eye(dim)).max()
        if err > UNITARITY_TOL:
            raise ConvergenceFailure(
                f"monodromy not unitary to {UNITARITY_TOL:g} (got {err:.2e})")
        u_lab = np.exp(-1j * e * t_end)[:, None] * u_int
        if glide is not None:
            k = glide[:, None] * u_lab
            vals, vecs = _sector_eig(k, sectors)
            qe = np.array([_fold(-2.0 * np.angle(v) / period, omega_p) for v in vals])
            mono = Operator(model.space, k @ k)
        else:
            vals, vecs = _sector_eig(u_lab, sectors)
            qe = np.array([_fold(-np.angle(v) / period, omega_p) for v in vals])
            mono = Operator(model.space, u_lab)
        labels, overlaps = _label_modes(vecs)
        labeled = np.array([qe[labels[i]] for i in range(dim)])
        if prev_energies is not None:
            # compare on the fold circle so boundary hops don't spoof it
            diff = max(abs(_fold(d, omega_p)) for d in labeled - prev_energies)
            if diff < QE_TOL:
                return FloquetResult(
                    period=period, steps=steps, monodromy=mono,
                    quasi_energies=qe, modes=vecs, state_labels=labels,
                    overlaps=overlaps, used_glide=glide is not None)
        prev_energies = labeled
        steps *= 2
        if steps > MAX_STEPS:
            raise ConvergenceFailure(
                f"quasi-energies did not converge below {QE_TOL:g} within "
                f"{MAX_STEPS} steps per period")


def dressed_shift(fr: FloquetResult, model: SystemModel,
                  transition: tuple[int, int] = (0, 1)) -> DressedShift:
    """Exact dressed shift of the resonator across a nonlinear-mode step.

    Each per-level photon splitting E(level, n_a=1) - E(level, n_a=0) is
    unfolded by the pump-quantum branch that lands it closest to the
    bare omega_a.  For the two-level kinds the returned value follows
    the sigma_z (n + 1/2) coefficient convention,
    (Delta_g - Delta_e) / 2; for the Kerr kind it is the plain
    transition difference Delta_upper - Delta_lower.  The result is
    flagged when an unfolded splitting strays far enough from omega_a
    that the branch choice becomes ambiguous.
    """
    lo, hi = transition
    omega_a = model.params.omega_a
    omega_p = model.interaction.basis.omegas[0]
    space = model.space
    if not 0 <= lo < hi < space.dims[0]:
        raise ValueError(f"invalid transition {transition} for dims {space.dims}")

    flagged = False

    def photon_splitting(level: int) -> float:
        nonlocal flagged
        d = fr.energy_of((level, 1)) - fr.energy_of((level, 0))
        m = np.round((omega_a - d) / omega_p)
        d_unfolded = d + m * omega_p
        if abs(d_unfolded - omega_a) > 0.3 * omega_p:
            flagged = True
        return d_unfolded

    delta_lo = photon_splitting(lo)
    delta_hi = photon_splitting(hi)
    if model.kind in ("rabi", "jc"):
        value = 0.5 * (delta_lo - delta_hi)
    else:
        value = delta_hi - delta_lo
    return DressedShift(value=float(value), flagged=flagged)


# ---------------------------------------------------------------------------
# Lindblad evolution
# ---------------------------------------------------------------------------


def _normalize_collapse(model, collapse):
    out = []
    for c, rate in collapse:
        mat = c.matrix if isinstance(c, Operator) else np.asarray(c, dtype=complex)
        if rate < 0:
            raise ValueError("collapse rates must be nonnegative")
        out.append((mat, float(rate)))
    return out


def _collapse_frame_parts(e, cmat):
    """Split a collapse operator's interaction-frame phases.

    Returns (is_uniform, phase_freqs): when every nonzero element of c
    rotates at the same frame frequency, the dissipator is exactly frame
    independent and can be precomputed.
    """
    g = e[:, None] - e[None, :]
    support = np.abs(cmat) > 0
    if not support.any():
        return True, 0.0
    f = g[support]
    if np.allclose(f, f.flat[0], atol=1e-12):
        return True, float(f.flat[0])
    return False, g


def _dissipator(c, cdc, rho):
    return c @ rho @ c.conj().T - 0.5 * (cdc @ rho + rho @ cdc)


def _lindblad_rhs_factory(model, channels, extra_h=None):
    """RHS of the interaction-frame master equation as a closure."""
    amps, freqs, e = _interaction_stack(model)
    static, rotating = [], []
    for cmat, rate in channels:
        uniform, g = _collapse_frame_parts(e, cmat)
        c = np.sqrt(rate) * cmat
        if uniform:
            static.append((c, c.conj().T @ c))
        else:
            rotating.append((c, g))

    def rhs(t, rho):
        h = _h_int(amps, freqs, t)
        if extra_h is not None:
            h = h + extra_h(t)
        out = -1j * (h @ rho - rho @ h)
        for c, cdc in static:
            out += _dissipator(c, cdc, rho)
        for c, g in rotating:
            ct = c * np.exp(1j * g * t)
            out += _dissipator(ct, ct.conj().T @ ct, rho)
        return out

    max_freq = float(np.abs(freqs).max()) if freqs.size else 1.0
    return rhs, e, max_freq


def _rk4_rho(rhs, rho, t0, t1, substep):
    n = max(1, int(np.ceil((t1 - t0) / substep)))
    h = (t1 - t0) / n
    t = t0
    for _ in range(n):
        k1 = rhs(t, rho)
        k2 = rhs(t + 0.5 * h, rho + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, rho + 0.5 * h * k2)
        k4 = rhs(t + h, rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
    return rho


def lindblad_evolve(model: SystemModel, collapse, rho0, t_grid,
                    substep: float | None = None,
                    check: str = "window") -> np.ndarray:
    """Master-equation trajectory, returned in the lab frame.

    collapse is a list of (operator, rate) pairs; the evolution runs in
    the interaction frame of H0 with fixed-step RK4.  The default
    substep resolves the fastest sideband element at 0.3 rad per step.
    check='window' re-integrates the opening stretch at half step and
    errors if the two disagree, check='full' doubles the whole run,
    check='none' skips it.  Trace is monitored at every output time.
    """
    if check not in ("none", "window", "full"):
        raise ValueError("check must be 'none', 'window', or 'full'")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 2 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be an increasing 1d array")
    channels = _normalize_collapse(model, collapse)
    rhs, e, max_freq = _lindblad_rhs_factory(model, channels)
    if substep is None:
        substep = 0.3 / max_freq

    rho_i = np.asarray(rho0.matrix if isinstance(rho0, Operator) else rho0,
                       dtype=complex).copy()
    if abs(np.trace(rho_i) - 1.0) > 1e-9:
        raise ValueError("rho0 must have unit trace")
    # frame rotation at t_grid[0] (usually 0)
    t0 = t_grid[0]
    phase = np.exp(1j * e * t0)
    rho_i = (phase[:, None] * rho_i) * phase.conj()[None, :]

    if check in ("window", "full"):
        t_win = t_grid[-1] if check == "full" else min(
            t_grid[-1], t0 + 200.0 * substep)
        a = _rk4_rho(rhs, rho_i, t0, t_win, substep)
        b = _rk4_rho(rhs, rho_i, t0, t_win, 0.5 * substep)
        err = np.abs(a - b).max()
        if err > 1e-6:
            raise ConvergenceFailure(
                f"step-halving check failed: max density-matrix change "
                f"{err:.2e} over [{t0:g}, {t_win:g}] ns; reduce substep")

    out = np.empty((len(t_grid), *rho_i.shape), dtype=complex)
    rho = rho_i
    for i, t in enumerate(t_grid):
        if i > 0:
            rho = _rk4_rho(rhs, rho, t_grid[i - 1], t, substep)
        drift = abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag)
        if drift > 1e-6:
            raise ConvergenceFailure(
                f"trace drifted by {drift:.2e} at t = {t:g} ns; step too large")
        phase = np.exp(-1j * e * t)
        out[i] = (phase[:, None] * rho) * phase.conj()[None, :]
    return out


# ---------------------------------------------------------------------------
# spectroscopy and rate extraction
# ---------------------------------------------------------------------------


def spectrum_probe(model: SystemModel, kappa: float, qubit_state: int,
                   deltas, probe: float | None = None,
                   strobe_time: float | None = None,
                   max_strobes: int = 80, rtol: float = 1e-3) -> SpectrumTrace:
    """Steady-state resonator response against probe detuning.

    For each detuning delta (from the bare omega_a) the resonator is
    driven at amplitude `probe` (default kappa/20) on top of the pumped
    model with decay kappa, starting from the nonlinear mode prepared in
    `qubit_state` and the resonator empty.  The demodulated coherent
    amplitude is strobed on a pump-period multiple and extrapolated to
    its fixed point by geometric (linear-prediction) acceleration, which
    removes the kappa/2 transient without waiting it out.  Response is
    |<a>_ss|^2, so a bare cavity traces a Lorentzian of half width
    kappa/2.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if not 0 <= qubit_state < model.space.dims[0]:
        raise ValueError("qubit_state outside the nonlinear mode's levels")
    deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
    eps = kappa / 20.0 if probe is None else float(probe)
    period = model.period
    if strobe_time is None:
        strobe_time = 0.125 / kappa
    n_per = max(1, int(np.round(strobe_time / period)))
    dt = n_per * period

    from .hilbert import build_ladder
    a = build_ladder(model.space, 1).matrix
    channels = _normalize_collapse(model, [(a, kappa)])
    dim = model.space.dim

    responses = np.empty(len(deltas))
    for i, delta in enumerate(deltas):
        def extra_h(t, _d=delta):
            ph = np.exp(1j * _d * t)
            return eps * (a * ph + a.conj().T * np.conj(ph))

        rhs, e, max_freq = _lindblad_rhs_factory(model, channels, extra_h=extra_h)
        substep = 0.3 / max_freq
        rho = np.zeros((dim, dim), dtype=complex)
        j0 = model.space.index_of((qubit_state, 0))
        rho[j0, j0] = 1.0

        samples = []
        est_prev = None
        converged = False
        for k in range(1, max_strobes + 1):
            rho = _rk4_rho(rhs, rho, (k - 1) * dt, k * dt, substep)
            if abs(np.trace(rho).real - 1.0) > 1e-6:
                raise ConvergenceFailure("trace drift during spectrum probe")
            t = k * dt
            m = np.trace(a @ rho) * np.exp(1j * delta * t)
            samples.append(m)
            if len(samples) >= 3:
                m0, m1, m2 = samples[-3], samples[-2], samples[-1]
                denom = m1 - m0
                if abs(denom) == 0.0:
                    est = m2
                else:
                    r = (m2 - m1) / denom
                    est = m2 if abs(1.0 - r) < 1e-12 else (m2 - r * m1) / (1.0 - r)
                if est_prev is not None and abs(est - est_prev) <= rtol * max(abs(est), eps / kappa * 1e-3):
                    responses[i] = abs(est) ** 2
                    converged = True
                    break
                est_prev = est
        if not converged:
            raise ConvergenceFailure(
                f"probe response did not settle within {max_strobes} strobes "
                f"at delta = {delta:g}")

    peak, hw, ok = _fit_lorentzian(deltas, responses)
    return SpectrumTrace(deltas=deltas, response=responses, peak_delta=peak,
                         half_width=hw, fit_ok=ok, qubit_state=qubit_state)


def _fit_lorentzian(x, y):
    """Peak location and HWHM of a Lorentzian plus constant floor."""
    if len(x) < 4:
        j = int(np.argmax(y))
        return float(x[j]), float("nan"), False

    def model_f(xx, amp, x0, w, b):
        return amp / (1.0 + ((xx - x0) / w) ** 2) + b

    j = int(np.argmax(y))
    span = x.max() - x.min()
    p0 = [y[j] - y.min(), x[j], max(span / 6.0, 1e-12), y.min()]
    try:
        popt, _ = curve_fit(model_f, x, y, p0=p0, maxfev=20000)
        amp, x0, w, b = popt
        resid = y - model_f(x, *popt)
        ss = np.sum((y - y.mean()) ** 2)
        r2 = 1.0 - np.sum(resid ** 2) / ss if ss > 0 else 0.0
        ok = amp > 0 and x.min() <= x0 <= x.max() and r2 > 0.9
        return float(x0), float(abs(w)), bool(ok)
    except RuntimeError:
        return float(x[j]), float("nan"), False


def fit_rate(times, populations) -> RateFit:
    """Exponential rate from a population record, P(t) = A exp(-g t) + C.

    Works for decay (A > 0) and heating (A < 0) alike.  The fit is
    flagged when R^2 < 0.99 or when the population changed by less than
    half of its fitted span over the record.
    """
    t = np.asarray(times, dtype=float)
    p = np.asarray(populations, dtype=float)
    if t.shape != p.shape or t.ndim != 1 or len(t) < 4:
        raise ValueError("need matching 1d arrays with at least 4 samples")

    c0 = p[-1]
    a0 = p[0] - c0
    span = abs(a0) if abs(a0) > 0 else max(p.ptp(), 1e-12)
    g0 = 1.0 / max(t[-1] - t[0], 1e-12)
    mid = np.searchsorted(t, 0.5 * (t[0] + t[-1]))
    if 0 < mid < len(t) and abs(p[mid] - c0) > 1e-12 * span and abs(a0) > 0:
        frac = abs((p[mid] - c0) / a0)
        if 0 < frac < 1:
            g0 = -np.log(frac) / (t[mid] - t[0])

    def model_f(tt, a, g, c):
        return a * np.exp(-g * tt) + c

    try:
        popt, _ = curve_fit(model_f, t - t[0], p, p0=[a0, g0, c0], maxfev=20000)
        a, g, c = popt
    except RuntimeError:
        return RateFit(gamma=float("nan"), amplitude=float("nan"),
                       offset=float("nan"), r_squared=0.0, flagged=True)
    resid = p - model_f(t - t[0], *popt)
    ss = np.sum((p - p.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss if ss > 0 else 0.0
    changed = abs(model_f(t[-1] - t[0], *popt) - model_f(0.0, *popt))
    flag = bool(r2 < 0.99 or changed < 0.5 * abs(a))
    return RateFit(gamma=float(g), amplitude=float(a), offset=float(c),
                   r_squared=float(r2), flagged=flag)
