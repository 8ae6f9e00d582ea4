"""Optical elements as pure state transformations.

Conventions (fixed here and nowhere else):

* HWP at 22.5°: ``|H⟩ → (|H⟩+|V⟩)/√2``, ``|V⟩ → (|H⟩-|V⟩)/√2``.  Only the H row
  is exercised by the cascades; the V row is the usual reflection convention.
* HWP at 45°: ``|H⟩ ↔ |V⟩``.
* NPBS: input 1 → ``(out1 + out2)/√2``, input 2 → ``(out1 - out2)/√2``.
* Crystal: an H photon becomes an H signal plus a V idler in the same mode
  (type-II phase matching); V photons are not phase matched and pass.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DepthExceeded, DoubleTagging, UnsupportedAngle, UnwiredMode
from .state import HALF_ROOT, ONE, Amplitude, Photon, PhotonState, Pol, TimeBin

Branches = list  # list[tuple[list[Photon], Amplitude]]


def _transform(state: PhotonState, fn: Callable[[Photon], Branches | None]) -> PhotonState:
    """Apply a single-photon map to every photon of every term.

    ``fn`` returns ``None`` for photons it leaves alone, otherwise a list of
    ``(replacement_photons, amplitude)`` alternatives.  Terms are expanded as
    the product over photons and recombined exactly.
    """
    pairs = []
    for term, amp in state.items():
        options = []
        for p in term:
            out = fn(p)
            options.append([([p], ONE)] if out is None else out)
        for combo in itertools.product(*options):
            photons = []
            a = amp
            for ps, b in combo:
                photons.extend(ps)
                a = a * b
            pairs.append((photons, a))
    return PhotonState.from_terms(pairs)


def _angle_is(theta: float, ref: float) -> bool:
    return abs(float(theta) - ref) < 1e-12


def apply_hwp(state: PhotonState, mode: str, theta: float, out_mode: str | None = None) -> PhotonState:
    """Half-wave plate on ``mode``; ``theta`` must be exactly 22.5 or 45 degrees."""
    out = out_mode or mode
    if _angle_is(theta, 22.5):
        neg = -HALF_ROOT

        def fn(p):
            if p.mode != mode:
                return None
            v_amp = HALF_ROOT if p.pol is Pol.H else neg
            return [([p.replace(pol=Pol.H, mode=out)], HALF_ROOT), ([p.replace(pol=Pol.V, mode=out)], v_amp)]

    elif _angle_is(theta, 45.0):

        def fn(p):
            if p.mode != mode:
                return None
            return [([p.replace(pol=p.pol.flip(), mode=out)], ONE)]

    else:
        raise UnsupportedAngle(f"HWP angle {theta}° leaves the exact amplitude ring; use 22.5 or 45")
    return _transform(state, fn)


def apply_pbs(state: PhotonState, wiring: Mapping[str, tuple[str, str]], strict: bool = False) -> PhotonState:
    """Route each photon in a wired input mode to its ``(H_out, V_out)`` port."""

    def fn(p):
        ports = wiring.get(p.mode)
        if ports is None:
            if strict:
                raise UnwiredMode(f"photon in mode {p.mode!r} is not wired to this PBS")
            return None
        return [([p.replace(mode=ports[0] if p.pol is Pol.H else ports[1])], ONE)]

    return _transform(state, fn)


def apply_npbs(state: PhotonState, in1: str, in2: str, out1: str, out2: str) -> PhotonState:
    neg = -HALF_ROOT

    def fn(p):
        if p.mode == in1:
            return [([p.replace(mode=out1)], HALF_ROOT), ([p.replace(mode=out2)], HALF_ROOT)]
        if p.mode == in2:
            return [([p.replace(mode=out1)], HALF_ROOT), ([p.replace(mode=out2)], neg)]
        return None

    return _transform(state, fn)


def apply_crystal(state: PhotonState, modes, crystal_id: int = 1, max_depth: int | None = None) -> PhotonState:
    """Deterministic (ideal-limit) down-conversion of every H photon in ``modes``.

    The two children inherit mode and time bin and get fresh frequency tags.
    ``crystal_id`` only labels the element.
    """
    modes = {modes} if isinstance(modes, str) else set(modes)

    def fn(p):
        if p.mode not in modes or p.pol is not Pol.H:
            return None
        if max_depth is not None and p.freq.depth >= max_depth:
            raise DepthExceeded(f"crystal {crystal_id}: photon already at cascade depth {p.freq.depth}")
        sig, idl = p.freq.children()
        return [([p.replace(freq=sig), p.replace(pol=Pol.V, freq=idl)], ONE)]

    return _transform(state, fn)


def apply_dm(state: PhotonState, wiring: Mapping[tuple[str, bool], str]) -> PhotonState:
    """Dichroic mirror: route by ``(mode, is_pump)``; unwired photons pass."""

    def fn(p):
        out = wiring.get((p.mode, p.freq.is_pump))
        return None if out is None else [([p.replace(mode=out)], ONE)]

    return _transform(state, fn)


def apply_longpass(state: PhotonState, mode: str) -> PhotonState:
    """Delete terms carrying pump light in ``mode``.  No renormalization."""
    return PhotonState(
        {t: a for t, a in state.items() if not any(p.mode == mode and p.freq.is_pump for p in t)}
    )


def apply_delay_tagger(state: PhotonState, short_mode: str, long_mode: str, out_mode: str | None = None) -> PhotonState:
    """Turn the arms of an unbalanced interferometer into time-bin tags.

    Photons in ``short_mode`` get ``t_1``, photons in ``long_mode`` get ``t_2``.
    With ``out_mode`` both arms are then merged into that mode; without it the
    arms keep their labels so a following NPBS still sees two input ports.
    """

    def fn(p):
        if p.mode not in (short_mode, long_mode):
            return None
        if p.timebin is not None:
            raise DoubleTagging(f"photon in {p.mode!r} already carries {p.timebin.value}")
        tb = TimeBin.T1 if p.mode == short_mode else TimeBin.T2
        return [([p.replace(timebin=tb, mode=out_mode or p.mode)], ONE)]

    return _transform(state, fn)


def discard_path(state: PhotonState, mode: str) -> tuple[PhotonState, Fraction]:
    """Drop terms with a photon in ``mode`` and renormalize exactly.

    Returns the kept state and the discarded probability weight.  The kept
    weight must be a power of 1/2 so the renormalization stays exact.
    """
    kept = {t: a for t, a in state.items() if not any(p.mode == mode for p in t)}
    total = state.norm_squared()
    kept_w = sum((a.weight for a in kept.values()), Fraction(0))
    if not kept:
        return PhotonState(), total
    ratio = kept_w / total
    if ratio.numerator != 1 or ratio.denominator & (ratio.denominator - 1):
        raise ValueError(f"kept weight {ratio} cannot be renormalized exactly")
    j = ratio.denominator.bit_length() - 1
    out = PhotonState({t: Amplitude(a.sign, a.half_pow - j) for t, a in kept.items()})
    return out, total - kept_w


# -- element descriptions ----------------------------------------------------


@dataclass(frozen=True)
class HWP:
    mode: str
    theta: float
    out: str | None = None
    label: str = ""
    kind = "HWP"

    def apply(self, state):
        return apply_hwp(state, self.mode, self.theta, self.out)

    def inputs(self):
        return {self.mode}

    def outputs(self):
        return {self.out or self.mode}

    def describe(self):
        arrow = f" -> {self.out}" if self.out else ""
        return f"HWP({self.theta:g}°) {self.mode}{arrow}"


@dataclass(frozen=True)
class PBS:
    wiring: tuple[tuple[str, tuple[str, str]], ...]
    label: str = ""
    strict: bool = False
    kind = "PBS"

    @classmethod
    def of(cls, wiring: Mapping[str, tuple[str, str]], label: str = "") -> "PBS":
        return cls(tuple(wiring.items()), label)

    def apply(self, state):
        return apply_pbs(state, dict(self.wiring), self.strict)

    def inputs(self):
        return {m for m, _ in self.wiring}

    def outputs(self):
        return {o for _, ports in self.wiring for o in ports}

    def describe(self):
        routes = ", ".join(f"{m}: H->{h} V->{v}" for m, (h, v) in self.wiring)
        return f"PBS {self.label} [{routes}]"


@dataclass(frozen=True)
class NPBS:
    in1: str
    in2: str
    out1: str
    out2: str
    label: str = ""
    kind = "NPBS"

    def apply(self, state):
        return apply_npbs(state, self.in1, self.in2, self.out1, self.out2)

    def inputs(self):
        return {self.in1, self.in2}

    def outputs(self):
        return {self.out1, self.out2}

    def describe(self):
        return f"NPBS {self.label} [{self.in1}, {self.in2}] -> [{self.out1}, {self.out2}]"


@dataclass(frozen=True)
class DM:
    wiring: tuple[tuple[tuple[str, bool], str], ...]
    label: str = ""
    kind = "DM"

    @classmethod
    def of(cls, wiring: Mapping[tuple[str, bool], str], label: str = "") -> "DM":
        return cls(tuple(wiring.items()), label)

    def apply(self, state):
        return apply_dm(state, dict(self.wiring))

    def inputs(self):
        return {m for (m, _), _ in self.wiring}

    def outputs(self):
        return {o for _, o in self.wiring}

    def describe(self):
        routes = ", ".join(f"{m}/{'pump' if pump else 'down'}->{o}" for (m, pump), o in self.wiring)
        return f"DM {self.label} [{routes}]"


@dataclass(frozen=True)
class Crystal:
    crystal_id: int
    modes: tuple[str, ...]
    max_depth: int | None = None
    kind = "Crystal"

    def apply(self, state):
        return apply_crystal(state, self.modes, self.crystal_id, self.max_depth)

    def inputs(self):
        return set(self.modes)

    def outputs(self):
        return set(self.modes)

    def describe(self):
        return f"Crystal ppKTP_{self.crystal_id} on [{', '.join(self.modes)}]"


@dataclass(frozen=True)
class LongPass:
    mode: str
    kind = "LongPass"

    def apply(self, state):
        return apply_longpass(state, self.mode)

    def inputs(self):
        return {self.mode}

    def outputs(self):
        return {self.mode}

    def describe(self):
        return f"LongPass {self.mode}"


@dataclass(frozen=True)
class DelayTagger:
    short_mode: str
    long_mode: str
    out: str | None = None
    kind = "DelayTagger"

    def apply(self, state):
        return apply_delay_tagger(state, self.short_mode, self.long_mode, self.out)

    def inputs(self):
        return {self.short_mode, self.long_mode}

    def outputs(self):
        return {self.out} if self.out else {self.short_mode, self.long_mode}

    def describe(self):
        return f"DelayTagger short={self.short_mode}(t_1) long={self.long_mode}(t_2)"


@dataclass(frozen=True)
class DiscardPath:
    """Explicitly abandoned output port; its weight is reported, not hidden."""

    mode: str
    kind = "DiscardPath"

    def apply(self, state):
        return discard_path(state, self.mode)[0]

    def inputs(self):
        return {self.mode}

    def outputs(self):
        return set()

    def describe(self):
        return f"DiscardPath {self.mode}"


Element = HWP | PBS | NPBS | DM | Crystal | LongPass | DelayTagger | DiscardPath


@dataclass
class ElementRecord:
    """What one element did during a traced simulation."""

    element: object
    terms_in: int
    terms_out: int
    deleted_terms: int = 0
    discarded_weight: Fraction = field(default_factory=Fraction)


def apply_traced(element, state: PhotonState) -> tuple[PhotonState, ElementRecord]:
    if isinstance(element, DiscardPath):
        out, lost = discard_path(state, element.mode)
        return out, ElementRecord(element, len(state), len(out), len(state) - len(out), lost)
    out = element.apply(state)
    deleted = len(state) - len(out) if isinstance(element, LongPass) else 0
    return out, ElementRecord(element, len(state), len(out), deleted)


def iter_modes(elements: Iterable) -> set[str]:
    modes = set()
    for el in elements:
        modes |= el.inputs() | el.outputs()
    return modes
