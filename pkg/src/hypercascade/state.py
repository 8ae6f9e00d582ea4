"""Exact multi-photon states over polarization, spatial mode, time bin and frequency.

Every coefficient produced by the ideal cascade circuits has the form
``±(1/√2)^k``, so amplitudes are stored as a sign and a non-negative
integer power.  Sums are carried out exactly in ``Q(√2)`` and converted back,
which keeps state comparison free of floating point.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .errors import AmplitudeOverflow, DuplicateOccupancy, PatternArity


class Pol(enum.Enum):
    H = "H"
    V = "V"

    def flip(self) -> "Pol":
        return Pol.V if self is Pol.H else Pol.H

    def __lt__(self, other):
        return self.value < other.value


class TimeBin(enum.Enum):
    T1 = "t_1"
    T2 = "t_2"

    def __lt__(self, other):
        return self.value < other.value


@dataclass(frozen=True, order=True)
class FreqTag:
    """Symbolic frequency token.

    ``path == ()`` is an undepleted pump photon.  A down-conversion of the
    token ``path`` yields ``path + (0,)`` (signal) and ``path + (1,)``
    (idler), so the tags of one term always describe a binary tree per root.
    """

    root: int = 0
    path: tuple[int, ...] = ()

    @property
    def is_pump(self) -> bool:
        return not self.path

    @property
    def depth(self) -> int:
        return len(self.path)

    def children(self) -> tuple["FreqTag", "FreqTag"]:
        return FreqTag(self.root, self.path + (0,)), FreqTag(self.root, self.path + (1,))

    def __str__(self):
        if self.is_pump:
            return f"p{self.root}"
        return f"p{self.root}." + "".join("si"[b] for b in self.path)


PUMP = FreqTag()


@dataclass(frozen=True)
class Photon:
    pol: Pol
    mode: str
    timebin: TimeBin | None = None
    freq: FreqTag = PUMP

    def __post_init__(self):
        if not self.mode:
            raise ValueError("photon mode label must be non-empty")

    def sort_key(self):
        tb = "" if self.timebin is None else self.timebin.value
        return (self.mode, tb, self.pol.value, self.freq)

    def occupancy_key(self):
        return (self.mode, self.timebin, self.pol, self.freq)

    def replace(self, **changes) -> "Photon":
        fields = dict(pol=self.pol, mode=self.mode, timebin=self.timebin, freq=self.freq)
        fields.update(changes)
        return Photon(**fields)

    def ket(self) -> str:
        tb = "" if self.timebin is None else self.timebin.value
        return f"|{self.pol.value}{tb}⟩_{{{self.mode}}}"


def photon(pol, mode, timebin=None, freq=PUMP) -> Photon:
    """Convenience constructor accepting ``"H"``/``"V"`` and ``"t_1"``/``"t_2"`` strings."""
    if isinstance(pol, str):
        pol = Pol(pol)
    if isinstance(timebin, str):
        timebin = TimeBin(timebin)
    return Photon(pol, mode, timebin, freq)


Term = tuple  # tuple[Photon, ...] in canonical order


def canonicalize(photons: Iterable[Photon]) -> Term:
    term = tuple(sorted(photons, key=Photon.sort_key))
    for a, b in zip(term, term[1:]):
        if a.occupancy_key() == b.occupancy_key():
            raise DuplicateOccupancy(f"two photons share {a.occupancy_key()}")
    return term


@dataclass(frozen=True)
class Amplitude:
    """``sign * (1/√2)**half_pow``."""

    sign: int = 1
    half_pow: int = 0

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.half_pow < 0:
            raise AmplitudeOverflow(f"half_pow must be >= 0, got {self.half_pow}")

    def __mul__(self, other: "Amplitude") -> "Amplitude":
        return Amplitude(self.sign * other.sign, self.half_pow + other.half_pow)

    def __neg__(self) -> "Amplitude":
        return Amplitude(-self.sign, self.half_pow)

    @property
    def weight(self) -> Fraction:
        """Squared magnitude, exactly ``2**-half_pow``."""
        return Fraction(1, 2**self.half_pow)

    def __float__(self):
        return self.sign * 2.0 ** (-self.half_pow / 2)

    def render(self) -> str:
        return f"{'+' if self.sign > 0 else '-'}(1/√2)^{self.half_pow}"

    def pretty(self) -> str:
        """Human form: ``1/2``, ``1/√2``, ``1/(2√2)``..."""
        j, odd = divmod(self.half_pow, 2)
        sign = "" if self.sign > 0 else "-"
        if j == 0 and not odd:
            return sign + "1"
        den = "" if j == 0 else ("2" if j == 1 else f"2^{j}")
        if odd:
            den = f"({den}√2)" if den else "√2"
        return f"{sign}1/{den}"


ONE = Amplitude()
HALF_ROOT = Amplitude(1, 1)


class _Exact(NamedTuple):
    """``rational + irrational / √2`` with dyadic rational coefficients."""

    rational: Fraction
    irrational: Fraction


def _to_exact(amp: Amplitude) -> _Exact:
    j, odd = divmod(amp.half_pow, 2)
    value = Fraction(amp.sign, 2**j)
    return _Exact(Fraction(0), value) if odd else _Exact(value, Fraction(0))


def _from_exact(x: _Exact) -> Amplitude | None:
    if x.rational == 0 and x.irrational == 0:
        return None
    if x.rational != 0 and x.irrational != 0:
        raise AmplitudeOverflow(f"{x.rational} + {x.irrational}/√2 is not ±(1/√2)^k")
    odd = x.rational == 0
    value = x.irrational if odd else x.rational
    mag = abs(value)
    if mag.numerator != 1 or mag.denominator & (mag.denominator - 1):
        raise AmplitudeOverflow(f"coefficient {value} is not a power of 1/2")
    j = mag.denominator.bit_length() - 1
    return Amplitude(1 if value > 0 else -1, 2 * j + (1 if odd else 0))


class PhotonState:
    """Immutable superposition ``Σ amp·|term⟩`` with exact amplitudes."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Term, Amplitude] | None = None):
        self._terms = dict(terms or {})

    @classmethod
    def from_terms(cls, pairs: Iterable[tuple[Iterable[Photon], Amplitude]]) -> "PhotonState":
        """Build a state from possibly repeated, non-canonical terms, combining exactly."""
        acc: dict[Term, _Exact] = {}
        for photons, amp in pairs:
            term = canonicalize(photons)
            x = _to_exact(amp)
            if term in acc:
                prev = acc[term]
                x = _Exact(prev.rational + x.rational, prev.irrational + x.irrational)
            acc[term] = x
        out = {}
        for term, x in acc.items():
            amp = _from_exact(x)
            if amp is not None:
                out[term] = amp
        return cls(out)

    @classmethod
    def single(cls, *photons: Photon, amp: Amplitude = ONE) -> "PhotonState":
        return cls({canonicalize(photons): amp})

    @property
    def terms(self) -> Mapping[Term, Amplitude]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def __contains__(self, term):
        return term in self._terms

    def __getitem__(self, term) -> Amplitude:
        return self._terms[term]

    def __eq__(self, other):
        if not isinstance(other, PhotonState):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __neg__(self) -> "PhotonState":
        return PhotonState({t: -a for t, a in self._terms.items()})

    def scaled(self, amp: Amplitude) -> "PhotonState":
        return PhotonState({t: a * amp for t, a in self._terms.items()})

    def norm_squared(self) -> Fraction:
        return sum((a.weight for a in self._terms.values()), Fraction(0))

    def photons(self) -> Iterable[Photon]:
        for term in self._terms:
            yield from term

    def modes(self) -> set[str]:
        return {p.mode for p in self.photons()}

    def sorted_items(self):
        return sorted(self._terms.items(), key=lambda kv: [p.sort_key() for p in kv[0]])

    def render(self, show_freq: bool = False) -> str:
        return render_state(self, show_freq)

    def __repr__(self):
        return f"PhotonState({len(self)} terms)"


def add_term(state: PhotonState, term: Sequence[Photon], amp: Amplitude) -> PhotonState:
    """Return ``state + amp·|term⟩``; exact cancellation removes the entry."""
    return PhotonState.from_terms([*state.items(), (term, amp)])


def states_equal(a: PhotonState, b: PhotonState, up_to_global_phase: bool = True) -> bool:
    if a == b:
        return True
    return up_to_global_phase and a == -b


def strip_freq(state: PhotonState) -> PhotonState:
    """Forget frequency tags (raises ``DuplicateOccupancy`` if that merges photons)."""
    return PhotonState.from_terms(
        ((p.replace(freq=PUMP) for p in term), amp) for term, amp in state.items()
    )


def render_state(state: PhotonState, show_freq: bool = False) -> str:
    """Canonical one-term-per-line rendering, kets ordered by mode label."""
    if not len(state):
        return "0"
    lines = []
    for term, amp in state.sorted_items():
        kets = []
        for p in term:
            k = p.ket()
            kets.append(f"{k}[{p.freq}]" if show_freq else k)
        lines.append(f"{amp.render()} " + "".join(kets))
    return "\n".join(lines)


# -- GHZ-pair factorization ---------------------------------------------------

Slot = tuple  # (mode, TimeBin | None)


def _slot(s) -> Slot:
    if isinstance(s, str):
        return (s, None)
    mode, tb = s
    return (mode, TimeBin(tb) if isinstance(tb, str) else tb)


def _pattern(p) -> tuple[Pol, ...]:
    return tuple(Pol(c) if isinstance(c, str) else c for c in p)


def product_state(pol_patterns, branch_a, branch_b, amp: Amplitude = Amplitude(1, 2)) -> PhotonState:
    """Expand ``amp·(|p1⟩+|p2⟩)⊗(|A⟩+|B⟩)`` position by position (frequency tags = pump)."""
    pols = [_pattern(p) for p in pol_patterns]
    branches = [[_slot(s) for s in b] for b in (branch_a, branch_b)]
    n = len(branches[0])
    if len(pols) != 2 or any(len(p) != n for p in pols) or len(branches[1]) != n:
        raise PatternArity("patterns must be two polarization strings and two slot lists of equal length")
    pairs = []
    for pat in pols:
        for slots in branches:
            pairs.append(([Photon(pol, mode, tb) for pol, (mode, tb) in zip(pat, slots)], amp))
    return PhotonState.from_terms(pairs)


def tensor_factor_check(state: PhotonState, pol_patterns, branch_a, branch_b) -> bool:
    """True iff ``state`` equals (1/2)(pol GHZ pair) ⊗ (mode/time-bin GHZ pair), up to sign.

    Slots are mode labels, or ``(mode, timebin)`` pairs for the time-bin scheme.
    Frequency tags are ignored.
    """
    if not len(state):
        raise PatternArity("empty state")
    target = product_state(pol_patterns, branch_a, branch_b)
    try:
        bare = strip_freq(state)
    except DuplicateOccupancy:
        return False
    return states_equal(bare, target, up_to_global_phase=True)


@dataclass(frozen=True)
class Factorization:
    amp: Amplitude
    pol_patterns: tuple[str, str]
    branches: tuple[tuple[Slot, ...], tuple[Slot, ...]]

    def render(self) -> str:
        pols = "+".join(f"|{p}⟩" for p in self.pol_patterns)
        a, b = self.branches
        modes_a = [m for m, _ in a]
        if modes_a == [m for m, _ in b]:
            # same spatial modes, branches differ by time bin
            bins = "+".join("".join(tb.value for _, tb in br) for br in self.branches)
            sub = "".join(modes_a)
            return f"{self.amp.pretty()}[({pols})⊗({bins})]_{{{sub}}}"
        kets = "+".join("|" + "".join(m for m, _ in br) + "⟩" for br in self.branches)
        return f"{self.amp.pretty()}({pols})⊗({kets})"


def factorize(state: PhotonState, candidate_branches) -> Factorization | None:
    """Try to write ``state`` as a 2x2 polarization ⊗ branch product.

    ``candidate_branches`` are the two ordered slot lists expected to carry the
    photons; each term must occupy exactly one of them.  Returns ``None`` when
    the state does not have that shape.
    """
    branches = tuple(tuple(_slot(s) for s in b) for b in candidate_branches)
    if len(branches) != 2 or len(state) != 4:
        return None
    amps = {a for a in state._terms.values()}
    if len(amps) != 1:
        return None
    (amp,) = amps
    index = {frozenset(b): b for b in branches}
    seen: dict[tuple[Slot, ...], set[str]] = {b: set() for b in branches}
    for term in state:
        by_slot = {(p.mode, p.timebin): p.pol for p in term}
        br = index.get(frozenset(by_slot))
        if br is None or len(by_slot) != len(term):
            return None
        seen[br].add("".join(by_slot[s].value for s in br))
    pats = list(seen.values())
    if pats[0] != pats[1] or len(pats[0]) != 2:
        return None
    p1, p2 = sorted(pats[0])
    fac = Factorization(amp, (p1, p2), branches)
    if not tensor_factor_check(state, fac.pol_patterns, *branches):
        return None
    return fac
