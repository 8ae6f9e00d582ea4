"""Backend selection and block-sharded drivers for the hot loops.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
numpy/pure-Python ``_pykernels`` module.  ``HYPERCASCADE_BACKEND=python``
forces the fallback.  Both backends consume the same random stream and return
identical counts.

Sharding: pulses are cut into fixed blocks of ``BLOCK`` pulses, block ``b``
drawing from ``SeedSequence(seed, spawn_key=(b,))``.  Totals therefore do not
depend on the number of workers or on the order blocks finish in.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BLOCK = 1 << 16
PAIR_BINS = 16  # pair-count histogram; last bin collects r >= PAIR_BINS - 1
POISSON_TAIL = 1e-17

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def _default_backend() -> str:
    forced = os.environ.get("HYPERCASCADE_BACKEND", "").strip().lower()
    if forced:
        if forced not in _BACKENDS:
            raise RuntimeError(f"backend {forced!r} requested but available: {available_backends()}")
        return forced
    return "cython" if "cython" in _BACKENDS else "python"


BACKEND = _default_backend()


def get_backend(name: str | None = None):
    return _BACKENDS[name or BACKEND]


def poisson_cdf(mu: float) -> np.ndarray:
    """Cumulative Poisson(mu) table for inversion; the last entry is forced to 1
    so the dropped tail (terms below ``POISSON_TAIL``) lands on the final count."""
    if mu < 0:
        raise ValueError("mu must be >= 0")
    if mu == 0:
        return np.array([1.0])
    vals = []
    acc = 0.0
    k = 0
    log_mu = math.log(mu)
    while True:
        term = math.exp(k * log_mu - mu - math.lgamma(k + 1))
        acc += term
        vals.append(acc)
        # stop on the term size: 1 - acc stalls at float rounding level
        if k > mu and term < POISSON_TAIL:
            break
        k += 1
    vals[-1] = 1.0
    return np.array(vals)


@dataclass
class PulseResult:
    pulses: int
    success_pulses: int
    depth_hist: np.ndarray
    pair_hist: np.ndarray

    def __add__(self, other):
        return PulseResult(
            self.pulses + other.pulses,
            self.success_pulses + other.success_pulses,
            self.depth_hist + other.depth_hist,
            self.pair_hist + other.pair_hist,
        )


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _run_block(impl, seed, block, pulses, cdf, fixed_n, chain, ps) -> PulseResult:
    rng = _block_rng(seed, block)
    mean_n = fixed_n if fixed_n >= 0 else float(np.dot(np.diff(np.concatenate(([0.0], cdf))), np.arange(len(cdf))))
    chunk = max(4096, int(pulses * (1 + mean_n * min(chain, 2)) * 1.1))
    depth = np.zeros(chain + 1, dtype=np.int64)
    pairs = np.zeros(PAIR_BINS, dtype=np.int64)
    buf = rng.random(chunk)
    pos = 0
    remaining = pulses
    good = 0
    while remaining:
        done, pos, g = impl.process_pulses(buf, pos, remaining, cdf, fixed_n, chain, ps, depth, pairs)
        remaining -= done
        good += g
        if remaining:
            # stream continues exactly where it stopped, independent of chunk size
            buf = np.concatenate((buf[pos:], rng.random(chunk)))
            pos = 0
    return PulseResult(pulses, good, depth, pairs)


def run_pulses(n_pulses: int, chain: int, ps: float, seed: int, mu: float | None = None,
               workers: int = 1, backend: str | None = None) -> PulseResult:
    """Sample ``n_pulses`` pulses of the cascade.

    ``mu=None`` means exactly one photon per pulse; otherwise the photon number
    is Poisson(mu).  Each photon succeeds after ``chain`` consecutive
    Bernoulli(ps) splittings.
    """
    if n_pulses < 0:
        raise ValueError("n_pulses must be >= 0")
    impl = get_backend(backend)
    cdf = np.array([1.0]) if mu is None else poisson_cdf(mu)
    fixed_n = 1 if mu is None else -1
    blocks = [(b, min(BLOCK, n_pulses - b * BLOCK)) for b in range(math.ceil(n_pulses / BLOCK))]
    total = PulseResult(0, 0, np.zeros(chain + 1, dtype=np.int64), np.zeros(PAIR_BINS, dtype=np.int64))

    def job(bp):
        return _run_block(impl, seed, bp[0], bp[1], cdf, fixed_n, chain, float(ps))

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, blocks))
    else:
        results = [job(bp) for bp in blocks]
    for r in results:
        total = total + r
    return total


def enumerate_success(probs, n: int, backend: str | None = None) -> float:
    return float(get_backend(backend).enumerate_success(np.asarray(probs, dtype=float), int(n)))
