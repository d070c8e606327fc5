"""Finite harmonic series of operators over a fixed set of drive tones.

A HarmonicOperator represents

    A(t) = sum_k A_k exp(-i (k . omega) t)

where k runs over integer vectors (one entry per tone) and omega is the
vector of tone angular frequencies.  The key convention matters: the
term stored under key k carries the phase exp(-i (k . omega) t), so for
a single tone the key +1 component of a Hermitian drive
g(t) = g exp(-i w t) + conj(g) exp(+i w t) is the amplitude g itself.

All algebra (sums, commutators, time derivatives) is exact on the key
lattice; products only ever extend the lattice by key addition, so a
polynomial expansion in a finitely-driven interaction stays finite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .hilbert import HilbertSpace, Operator, off_diag, pinch

__all__ = [
    "ToneBasis",
    "HarmonicOperator",
    "hs_commutator",
]

# Terms whose largest element falls below this fraction of the largest
# element across the whole series are dropped after products.
PRUNE_RTOL = 1e-14


@dataclass(frozen=True)
class ToneBasis:
    """Angular frequencies of the independent drive tones.

    Frequencies must be positive and mutually distinct; rationally
    related tones are allowed (key arithmetic never assumes
    incommensurability, it only tracks integer combinations).
    An empty basis describes a static problem, with the single key ().
    """

    omegas: tuple[float, ...]

    def __post_init__(self):
        om = tuple(float(w) for w in self.omegas)
        if any(w <= 0 for w in om):
            raise ValueError(f"tone frequencies must be positive, got {om}")
        if len(om) > 1:
            scale = max(om)
            for i in range(len(om)):
                for j in range(i + 1, len(om)):
                    if abs(om[i] - om[j]) <= 1e-9 * scale:
                        raise ValueError("tone frequencies must be distinct")
        object.__setattr__(self, "omegas", om)

    @property
    def ntones(self) -> int:
        return len(self.omegas)

    def frequency(self, key: tuple[int, ...]) -> float:
        """Angular frequency k . omega of a key."""
        if len(key) != self.ntones:
            raise ValueError(f"key {key} has wrong length for {self.ntones} tones")
        return float(sum(k * w for k, w in zip(key, self.omegas)))


class HarmonicOperator:
    """Operator-valued trigonometric polynomial over a ToneBasis.

    The terms map is keyed by integer tuples (length = number of tones)
    with Operator values.  Zero terms are never stored.
    """

    def __init__(self, basis: ToneBasis, space: HilbertSpace,
                 terms: dict[tuple[int, ...], Operator] | None = None):
        self.basis = basis
        self.space = space
        self.terms: dict[tuple[int, ...], Operator] = {}
        for key, op in (terms or {}).items():
            key = tuple(int(k) for k in key)
            if len(key) != basis.ntones:
                raise ValueError(f"key {key} has wrong length for {basis.ntones} tones")
            if op.space != space:
                raise ValueError("term operator lives on the wrong Hilbert space")
            if op.max_abs() > 0.0:
                self.terms[key] = self.terms[key] + op if key in self.terms else op

    # -- constructors -----------------------------------------------------

    @classmethod
    def static(cls, basis: ToneBasis, op: Operator) -> "HarmonicOperator":
        """A time-independent operator lifted into the series (key 0)."""
        zero_key = (0,) * basis.ntones
        return cls(basis, op.space, {zero_key: op})

    def copy_with(self, terms: dict[tuple[int, ...], Operator]) -> "HarmonicOperator":
        return HarmonicOperator(self.basis, self.space, terms)

    # -- ring operations --------------------------------------------------

    def _check(self, other: "HarmonicOperator"):
        if self.basis != other.basis or self.space != other.space:
            raise ValueError("harmonic operators have mismatched basis or space")

    def __add__(self, other: "HarmonicOperator") -> "HarmonicOperator":
        self._check(other)
        out = dict(self.terms)
        for key, op in other.terms.items():
            out[key] = out[key] + op if key in out else op
        out = {k: v for k, v in out.items() if v.max_abs() > 0.0}
        return self.copy_with(out)

    def __sub__(self, other: "HarmonicOperator") -> "HarmonicOperator":
        return self + (-1.0) * other

    def __mul__(self, scalar) -> "HarmonicOperator":
        s = complex(scalar)
        if s == 0:
            return self.copy_with({})
        return self.copy_with({k: s * v for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __neg__(self) -> "HarmonicOperator":
        return (-1.0) * self

    def dagger(self) -> "HarmonicOperator":
        # (A_k e^{-i k.w t})^dag = A_k^dag e^{+i k.w t}, filed under -k.
        return self.copy_with({
            tuple(-k for k in key): op.dagger() for key, op in self.terms.items()
        })

    def map_terms(self, f: Callable[[Operator], Operator]) -> "HarmonicOperator":
        """Apply an operator-level map termwise, dropping terms that vanish."""
        out = {}
        for key, op in self.terms.items():
            new = f(op)
            if new.max_abs() > 0.0:
                out[key] = new
        return self.copy_with(out)

    # -- calculus and evaluation -------------------------------------------

    def time_derivative(self) -> "HarmonicOperator":
        """d/dt of the series: each term picks up -i (k . omega)."""
        out = {}
        for key, op in self.terms.items():
            w = self.basis.frequency(key)
            if w != 0.0:
                out[key] = (-1j * w) * op
        return self.copy_with(out)

    def evaluate_at(self, t: float) -> Operator:
        """Dense operator value A(t)."""
        acc = np.zeros((self.space.dim, self.space.dim), dtype=complex)
        for key, op in self.terms.items():
            acc += op.matrix * np.exp(-1j * self.basis.frequency(key) * t)
        return Operator(self.space, acc)

    def rwa_project(self) -> Operator:
        """Keep only the strictly static component (key with k . omega = 0).

        For a single tone this is the k = 0 term.  With several tones,
        rationally related keys can also be static; frequency is compared
        against 1e-12 of the largest tone.
        """
        floor = 1e-12 * max(self.basis.omegas, default=1.0)
        acc = np.zeros((self.space.dim, self.space.dim), dtype=complex)
        for key, op in self.terms.items():
            if abs(self.basis.frequency(key)) <= floor:
                acc += op.matrix
        return Operator(self.space, acc)

    # -- norms, predicates, hygiene ----------------------------------------

    def max_abs(self) -> float:
        return max((op.max_abs() for op in self.terms.values()), default=0.0)

    def is_zero(self) -> bool:
        return not self.terms

    def keys_sorted(self) -> list[tuple[int, ...]]:
        return sorted(self.terms.keys())

    def is_hermitian_series(self, tol: float = 1e-12) -> bool:
        """True when A(t) is Hermitian for all t, i.e. A_{-k} = A_k^dag."""
        scale = max(self.max_abs(), 1.0)
        for key, op in self.terms.items():
            neg = tuple(-k for k in key)
            partner = self.terms.get(neg)
            pm = partner.matrix if partner is not None else 0.0
            if np.abs(op.matrix.conj().T - pm).max() > tol * scale:
                return False
        return True

    def is_antihermitian_series(self, tol: float = 1e-12) -> bool:
        """True when A(t) is anti-Hermitian for all t, i.e. A_{-k} = -A_k^dag."""
        scale = max(self.max_abs(), 1.0)
        for key, op in self.terms.items():
            neg = tuple(-k for k in key)
            partner = self.terms.get(neg)
            pm = partner.matrix if partner is not None else 0.0
            if np.abs(op.matrix.conj().T + pm).max() > tol * scale:
                return False
        return True

    def prune(self, rtol: float = PRUNE_RTOL) -> "HarmonicOperator":
        """Drop terms whose largest element is below rtol of the series max."""
        floor = rtol * self.max_abs()
        return self.copy_with({
            k: v for k, v in self.terms.items() if v.max_abs() > floor
        })

    def slow_nonzero_keys(self, floor: float) -> list[tuple[int, ...]]:
        """Keys oscillating slower than `floor` but not exactly static.

        Used to flag terms a rotating-wave projection discards even
        though they beat at a frequency comparable to a linewidth.
        """
        out = []
        for key in self.keys_sorted():
            w = abs(self.basis.frequency(key))
            if 0.0 < w < floor:
                out.append(key)
        return out

    # -- splits against a diagonal H0 ---------------------------------------

    def pinch(self, h0: Operator, warn: bool = True) -> "HarmonicOperator":
        return self.map_terms(lambda op: pinch(h0, op, warn=warn))

    def off_diag(self, h0: Operator, warn: bool = True) -> "HarmonicOperator":
        return self.map_terms(lambda op: off_diag(h0, op, warn=warn))


def hs_commutator(a: HarmonicOperator, b: HarmonicOperator,
                  prune_rtol: float = PRUNE_RTOL) -> HarmonicOperator:
    """Commutator of two harmonic series.

    Keys add under the product (the phases multiply), so
    [A, B]_k = sum_{p+q=k} (A_p B_q - B_q A_p).  The result is pruned
    at prune_rtol relative to its own largest element.
    """
    a._check(b)
    out: dict[tuple[int, ...], np.ndarray] = {}
    for ka in a.keys_sorted():
        ma = a.terms[ka].matrix
        for kb in b.keys_sorted():
            mb = b.terms[kb].matrix
            key = tuple(x + y for x, y in zip(ka, kb))
            val = ma @ mb - mb @ ma
            if key in out:
                out[key] = out[key] + val
            else:
                out[key] = val
    terms = {k: Operator(a.space, v) for k, v in out.items()}
    return HarmonicOperator(a.basis, a.space, terms).prune(prune_rtol)
