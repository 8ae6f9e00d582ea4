"""Construction and simulation of the m-photon cascade circuits.

Topology
--------
A pump photon is split into a spatial (or time-bin) superposition and sent
through a chain of Sagnac down-conversion blocks.  Each block converts one
photon of every branch into a signal/idler pair.  Photons are converted in
breadth-first order, idler before signal, which reproduces the three- and
four-photon layouts for both encodings and extends them to any ``m`` with
exactly ``m - 1`` crystals.

Mode names
----------
Polarization-spatial, branch ``p`` in {a, b}, crystal ``k``:
    loop modes ``p_{2k+2}`` (H, counter-clockwise) and ``p_{2k+1}`` (V, clockwise);
    outputs ``p_2``/``p_1`` for k=1, else ``d_{2k-2}``/``d_{2k-3}`` (branch a)
    or ``c_{2k-2}``/``c_{2k-3}`` (branch b), signal first.
Polarization-time-bin, crystal ``k``:
    loop modes ``2k+2`` (H) and ``2k+3`` (V);
    outputs ``b``/``a`` for k=1, else ``b_{k-1}``/``a_{k-1}``.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .elements import DM, HWP, NPBS, PBS, Crystal, DelayTagger, DiscardPath, LongPass, apply_traced
from .errors import InvalidSpec
from .state import Amplitude, FreqTag, Photon, PhotonState, Pol, TimeBin, factorize

SIGNAL, IDLER = 0, 1


class Scheme(enum.Enum):
    POL_SPATIAL = "pol-spatial"
    POL_TIME_BIN = "pol-time-bin"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("_", "-")
        aliases = {"polspatial": "pol-spatial", "poltimebin": "pol-time-bin", "pol-timebin": "pol-time-bin"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise InvalidSpec(f"unknown scheme {value!r}") from None


@dataclass(frozen=True)
class CascadeSpec:
    scheme: Scheme
    m: int

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if not isinstance(self.m, (int, np.integer)) or isinstance(self.m, bool) or self.m < 2:
            raise InvalidSpec(f"m must be an integer >= 2, got {self.m!r}")

    @property
    def crystals(self) -> int:
        return self.m - 1

    @property
    def branches(self) -> tuple[str, ...]:
        return ("a", "b") if self.scheme is Scheme.POL_SPATIAL else ("t",)


# -- topology ---------------------------------------------------------------


def conversion_plan(m: int) -> tuple[list[tuple[int, tuple[int, ...]]], list[tuple[int, ...]]]:
    """Breadth-first conversion order.

    Returns ``[(crystal_k, converted_path), ...]`` and the surviving leaf paths.
    A path is the tuple of signal(0)/idler(1) choices from the pump.
    """
    queue: list[tuple[int, ...]] = [()]
    plan = []
    for k in range(1, m):
        path = queue.pop(0)
        plan.append((k, path))
        queue += [path + (IDLER,), path + (SIGNAL,)]
    return plan, queue


def _producer(plan) -> dict[tuple[int, ...], int]:
    return {path: k for k, path in plan}


def site_label(spec: CascadeSpec, branch: str, path: tuple[int, ...], producer: dict) -> str:
    """Mode label of the photon at ``path`` once it has left its producing block."""
    ps = spec.scheme is Scheme.POL_SPATIAL
    if not path:
        return branch if ps else "3"
    k = producer[path[:-1]]
    sig = path[-1] == SIGNAL
    if ps:
        if k == 1:
            return f"{branch}_{2 if sig else 1}"
        family = {"a": "d", "b": "c"}[branch]
        return f"{family}_{2 * k - 2 if sig else 2 * k - 3}"
    if k == 1:
        return "b" if sig else "a"
    return f"{'b' if sig else 'a'}_{k - 1}"


def loop_modes(spec: CascadeSpec, branch: str, k: int) -> tuple[str, str]:
    """(counter-clockwise H port, clockwise V port) inside Sagnac block ``k``."""
    if spec.scheme is Scheme.POL_SPATIAL:
        return f"{branch}_{2 * k + 2}", f"{branch}_{2 * k + 1}"
    return str(2 * k + 2), str(2 * k + 3)


def _label_key(label: str):
    m = re.fullmatch(r"([a-z]+)(?:_(\d+))?", label)
    letter, idx = m.group(1), int(m.group(2) or 0)
    return (0 if letter in ("a", "b") else 1, idx, letter)


# -- circuit ----------------------------------------------------------------


@dataclass
class Circuit:
    spec: CascadeSpec
    elements: list
    input_mode: str
    open_ports: tuple[str, ...]
    output_modes: list[str]
    discard_modes: list[str] = field(default_factory=list)
    # two ordered slot lists (mode, timebin) used to print the GHZ-pair factorization
    display_branches: tuple = ()

    def crystal_count(self) -> int:
        return sum(1 for el in self.elements if el.kind == "Crystal")

    def longpass_modes(self) -> list[str]:
        return [el.mode for el in self.elements if el.kind == "LongPass"]

    def validate(self) -> None:
        """Every element must consume only modes produced upstream."""
        from .errors import CircuitOrderError

        live = {self.input_mode, *self.open_ports}
        for i, el in enumerate(self.elements):
            missing = el.inputs() - live
            if missing:
                raise CircuitOrderError(f"element {i} ({el.describe()}) reads unproduced modes {sorted(missing)}")
            live |= el.outputs()

    def describe(self) -> str:
        head = [
            f"circuit {self.spec.scheme.value} m={self.spec.m}",
            f"input {self.input_mode}; open ports {', '.join(self.open_ports) or '-'}",
        ]
        body = [f"{i:3d}  {el.describe()}" for i, el in enumerate(self.elements)]
        tail = [f"outputs {' '.join(self.output_modes)}"]
        if self.discard_modes:
            tail.append(f"discarded {' '.join(self.discard_modes)}")
        return "\n".join(head + body + tail)


def _sagnac_block(spec: CascadeSpec, k: int, inputs: dict[str, str], outputs: dict[str, tuple[str, str]]) -> list:
    """DM, PBS entry, HWP(CW)/crystal/HWP(CCW), PBS exit for crystal ``k``.

    ``inputs`` maps branch -> entry mode, ``outputs`` branch -> (signal, idler) mode.
    In the CCW loop the pump meets the crystal first, in the CW loop the 45° plate
    first, so a single crystal element between the two plates covers both.
    """
    cascaded = k > 1
    dm, entry, exit_ = {}, {}, {}
    ccw_modes, cw_modes = [], []
    for br, mode in inputs.items():
        ccw, cw = loop_modes(spec, br, k)
        sig, idl = outputs[br]
        dm[(mode, not cascaded)] = mode
        dm[(mode, cascaded)] = f"{mode}_dump"
        entry[mode] = (ccw, cw)
        # CCW returns as (V signal, H idler); CW returns as (H signal, V idler)
        exit_[ccw] = (idl, sig)
        exit_[cw] = (sig, idl)
        ccw_modes.append(ccw)
        cw_modes.append(cw)
    elements = [DM.of(dm, f"DM_{k}"), PBS.of(entry, f"PBS_{k}:in")]
    elements += [HWP(m, 45.0, label=f"HWP_{k + 1}") for m in cw_modes]
    elements.append(Crystal(k, tuple(ccw_modes + cw_modes), max_depth=spec.m - 1))
    elements += [HWP(m, 45.0, label=f"HWP_{k + 1}") for m in ccw_modes]
    elements.append(PBS.of(exit_, f"PBS_{k}:out"))
    return elements


def build_cascade(spec: CascadeSpec) -> Circuit:
    if not isinstance(spec, CascadeSpec):
        raise InvalidSpec("expected a CascadeSpec")
    plan, leaves = conversion_plan(spec.m)
    producer = _producer(plan)
    ps = spec.scheme is Scheme.POL_SPATIAL

    if ps:
        elements = [
            HWP("1", 22.5, out="2", label="HWP_1"),
            NPBS("2", "2v", "a", "b", label="NPBS"),
        ]
        open_ports = ("2v",)
        discard = []
    else:
        elements = [
            NPBS("1", "1v", "s", "l", label="NPBS_1"),
            DelayTagger("s", "l"),
            NPBS("s", "l", "2", "c", label="NPBS_2"),
            DiscardPath("c"),
            HWP("2", 22.5, out="3", label="HWP_1"),
        ]
        open_ports = ("1v",)
        discard = ["c"]

    branches = ("a", "b") if ps else ("t",)
    for k, path in plan:
        inputs = {br: site_label(spec, br, path, producer) for br in branches}
        outputs = {
            br: (
                site_label(spec, br, path + (SIGNAL,), producer),
                site_label(spec, br, path + (IDLER,), producer),
            )
            for br in branches
        }
        elements += _sagnac_block(spec, k, inputs, outputs)

    out_modes = sorted({site_label(spec, br, leaf, producer) for br in branches for leaf in leaves}, key=_label_key)
    elements += [LongPass(m) for m in out_modes]

    if ps:
        # order as printed for the three/four-photon states: newest family first, indices descending
        orders = [
            sorted((site_label(spec, br, leaf, producer) for leaf in leaves), key=_label_key, reverse=True)
            for br in ("b", "a")
        ]
        display = tuple(tuple((m, None) for m in o) for o in orders)
    else:
        order = _timebin_display_order(spec, plan, leaves, producer)
        display = tuple(tuple((m, tb) for m in order) for tb in (TimeBin.T1, TimeBin.T2))

    circuit = Circuit(spec, elements, "1", open_ports, out_modes, discard, display)
    circuit.validate()
    return circuit


def _timebin_display_order(spec, plan, leaves, producer) -> list[str]:
    leafset = set(leaves)
    order = []
    for k, path in plan[1:] + plan[:1]:
        kids = (path + (SIGNAL,), path + (IDLER,)) if k > 1 else (path + (IDLER,), path + (SIGNAL,))
        order += [site_label(spec, "t", c, producer) for c in kids if c in leafset]
    return order


# -- simulation ----------------------------------------------------------------


def pump_state(circuit: Circuit) -> PhotonState:
    return PhotonState.single(Photon(Pol.H, circuit.input_mode))


@dataclass
class SimulationTrace:
    final: PhotonState
    records: list
    snapshots: list  # (element, state after it)

    def after(self, label: str) -> PhotonState:
        for el, st in self.snapshots:
            if getattr(el, "label", None) == label:
                return st
        raise KeyError(label)

    @property
    def longpass_deleted(self) -> int:
        return sum(r.deleted_terms for r in self.records if r.element.kind == "LongPass")

    @property
    def discarded_weight(self) -> Fraction:
        return sum((r.discarded_weight for r in self.records), Fraction(0))


def simulate_trace(circuit: Circuit, pump: PhotonState | None = None, keep_snapshots: bool = True) -> SimulationTrace:
    state = pump_state(circuit) if pump is None else pump
    records, snaps = [], []
    for el in circuit.elements:
        state, rec = apply_traced(el, state)
        records.append(rec)
        if keep_snapshots:
            snaps.append((el, state))
    return SimulationTrace(state, records, snaps)


def simulate_symbolic(circuit: Circuit, pump: PhotonState | None = None) -> PhotonState:
    """Fold the circuit over the pump state (default ``|H⟩_1``)."""
    return simulate_trace(circuit, pump, keep_snapshots=False).final


def expected_state(spec: CascadeSpec) -> PhotonState:
    """Closed-form target: ``(1/2)(pol GHZ pair) ⊗ (spatial or time-bin GHZ pair)``.

    Built from the conversion rule alone (a converted photon of polarization P
    leaves its signal in ¬P and its idler in P), without running any element.
    """
    if not isinstance(spec, CascadeSpec):
        raise InvalidSpec("expected a CascadeSpec")
    _, leaves = conversion_plan(spec.m)
    producer = _producer(conversion_plan(spec.m)[0])
    ps = spec.scheme is Scheme.POL_SPATIAL
    half = Amplitude(1, 2)
    pairs = []
    for branch in ("a", "b") if ps else ("t",):
        for tb in (None,) if ps else (TimeBin.T1, TimeBin.T2):
            for root in (Pol.H, Pol.V):
                photons = []
                for leaf in leaves:
                    flips = sum(1 for b in leaf if b == SIGNAL)
                    pol = root.flip() if flips % 2 else root
                    photons.append(Photon(pol, site_label(spec, branch, leaf, producer), tb, FreqTag(0, leaf)))
                pairs.append((photons, half))
    return PhotonState.from_terms(pairs)


def factorization(circuit: Circuit, state: PhotonState):
    return factorize(state, circuit.display_branches)


# -- invariants -----------------------------------------------------------------


def energy_conserved(state: PhotonState, n_pumps: int = 1) -> bool:
    """Each term's frequency tags form full binary trees, one per injected pump."""
    for term in state:
        roots: dict[int, list[tuple[int, ...]]] = {}
        for p in term:
            roots.setdefault(p.freq.root, []).append(p.freq.path)
        if len(roots) != n_pumps:
            return False
        for paths in roots.values():
            if sum((Fraction(1, 2 ** len(pa)) for pa in paths), Fraction(0)) != 1:
                return False
            ordered = sorted(paths)
            if any(b[: len(a)] == a for a, b in zip(ordered, ordered[1:])):
                return False
    return True


def pump_in_outputs(state: PhotonState, modes) -> bool:
    modes = set(modes)
    return any(p.freq.is_pump and p.mode in modes for p in state.photons())


# -- stochastic cascade ----------------------------------------------------------


@dataclass
class CoincidenceCounts:
    n_pump: int
    successes: int
    depth_hist: list[int]  # pumps whose chain stopped at each depth; last entry = full cascade

    @property
    def failures(self) -> int:
        return self.n_pump - self.successes

    @property
    def fraction(self) -> float:
        return self.successes / self.n_pump if self.n_pump else 0.0


def simulate_stochastic(spec: CascadeSpec, n_pump: int, ps: float, seed: int, workers: int = 1) -> CoincidenceCounts:
    """One pump photon per trial, Bernoulli(ps) success on each of the m-1 crystals."""
    if not 0.0 <= ps <= 1.0:
        raise InvalidSpec(f"ps must lie in [0, 1], got {ps}")
    res = kernels.run_pulses(n_pump, chain=spec.m - 1, ps=ps, seed=seed, mu=None, workers=workers)
    return CoincidenceCounts(n_pump, int(res.success_pulses), [int(x) for x in res.depth_hist])
