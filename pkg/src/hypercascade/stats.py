"""Multi-photon event probabilities and generation rates of a cascaded source.

Model: a pulse carries ``n`` pump photons.  A photon yields one m-photon
state if it splits on all ``m - 1`` crystals of its cascade, each with
probability ``ps``; photons are independent.  With Poisson(mu) photon numbers
and repetition rate ``F`` this gives ``N_tot = F (1 - exp(-mu ps^(m-1)))``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field

from . import kernels
from .errors import InvalidQuery, OracleBound

ORACLE_MAX_N = 12
ORACLE_MAX_M = 7
TAIL_EPS = 1e-15


@dataclass(frozen=True)
class SourceModel:
    mu: float
    rep_hz: float = 1e9
    ps: float = 7.6e-6

    def __post_init__(self):
        if not self.mu >= 0:
            raise InvalidQuery(f"mu must be >= 0, got {self.mu}")
        if not self.rep_hz > 0:
            raise InvalidQuery(f"repetition rate must be > 0, got {self.rep_hz}")
        if not 0.0 <= self.ps <= 1.0:
            raise InvalidQuery(f"ps must lie in [0, 1], got {self.ps}")

    def as_dict(self):
        return {"mu": self.mu, "repHz": self.rep_hz, "ps": self.ps}


def _check(n: int | None, m: int, ps: float, r: int | None = None):
    if m < 2 or int(m) != m:
        raise InvalidQuery(f"m must be an integer >= 2, got {m}")
    if n is not None and (n < 0 or int(n) != n):
        raise InvalidQuery(f"n must be a non-negative integer, got {n}")
    if r is not None and (r < 0 or int(r) != r):
        raise InvalidQuery(f"r must be a non-negative integer, got {r}")
    if not 0.0 <= ps <= 1.0:
        raise InvalidQuery(f"ps must lie in [0, 1], got {ps}")


def photon_success(m: int, ps: float) -> float:
    """Probability that one photon completes the whole cascade, ``ps^(m-1)``."""
    return ps ** (m - 1)


def p_success(n: int, m: int, ps: float) -> float:
    """``1 - (1 - ps^(m-1))^n``: at least one of ``n`` photons completes."""
    _check(n, m, ps)
    q = photon_success(m, ps)
    if q < 1e-8:
        return -math.expm1(n * math.log1p(-q))
    return 1.0 - (1.0 - q) ** n


def p_success_scenarios(n: int, m: int, ps: float) -> list[tuple[int, float]]:
    """Probability of exactly ``r`` complete cascades, ``r = 0..n`` (binomial)."""
    _check(n, m, ps)
    q = photon_success(m, ps)
    return [(r, math.comb(n, r) * q**r * (1.0 - q) ** (n - r)) for r in range(n + 1)]


def p_failure_terms(n: int, m: int, ps: float) -> list[tuple[int, float]]:
    """Failure scenarios by the number ``i`` of photons that split on the first
    crystal but then stall somewhere in the remaining ``m - 2``."""
    _check(n, m, ps)
    stall = 1.0 - ps ** (m - 2)
    return [(i, math.comb(n, i) * ps**i * stall**i * (1.0 - ps) ** (n - i)) for i in range(n + 1)]


def p_failure(n: int, m: int, ps: float) -> float:
    return math.fsum(p for _, p in p_failure_terms(n, m, ps))


def pr_pairs(m: int, r: int, source: SourceModel) -> float:
    """Poisson-averaged probability of exactly ``r`` m-photon states per pulse:
    ``(mu q)^r / r! * exp(-mu q)`` with ``q = ps^(m-1)``, in log domain."""
    _check(None, m, source.ps, r)
    lam = source.mu * photon_success(m, source.ps)
    if lam == 0.0:
        return 1.0 if r == 0 else 0.0
    return math.exp(r * math.log(lam) - lam - math.lgamma(r + 1))


def pair_ratio(m: int, source: SourceModel) -> float:
    """``Pr(m,2)/Pr(m,1) = mu ps^(m-1) / 2``."""
    p1 = pr_pairs(m, 1, source)
    return pr_pairs(m, 2, source) / p1 if p1 else 0.0


def n_tot(m: int, source: SourceModel) -> float:
    """m-photon states generated per second, ``F (1 - exp(-mu ps^(m-1)))``."""
    _check(None, m, source.ps)
    return -source.rep_hz * math.expm1(-source.mu * photon_success(m, source.ps))


def cascade_source_distribution(m: int, source: SourceModel, r_max: int) -> tuple[list[tuple[int, float]], float]:
    """Coefficients ``Pr(m, r)`` for ``r = 0..r_max`` and the omitted tail mass."""
    if r_max < 0:
        raise InvalidQuery("r_max must be >= 0")
    rows = [(r, pr_pairs(m, r, source)) for r in range(r_max + 1)]
    lam = source.mu * photon_success(m, source.ps)
    tail = 0.0
    r = r_max + 1
    while lam > 0:
        t = pr_pairs(m, r, source)
        tail += t
        if r > lam and t <= TAIL_EPS * max(tail, 1e-300):
            break
        r += 1
    return rows, tail


def oracle_success(n: int, m: int, ps: float, backend: str | None = None) -> float:
    """Brute-force check of ``p_success``.

    Each photon ends at a depth ``d`` in ``0..m-1`` (crystals split in a row
    before the first failure), with probability ``ps^d (1-ps)`` for ``d < m-1``
    and ``ps^(m-1)`` at full depth.  Every joint outcome of the ``n`` photons
    is enumerated and the mass of those with a full-depth photon is summed.
    """
    _check(n, m, ps)
    if n > ORACLE_MAX_N or m > ORACLE_MAX_M:
        raise OracleBound(f"enumeration limited to n <= {ORACLE_MAX_N}, m <= {ORACLE_MAX_M}")
    depth_probs = [ps**d * (1.0 - ps) for d in range(m - 1)] + [ps ** (m - 1)]
    return kernels.enumerate_success(depth_probs, n, backend)


def oracle_success_itertools(n: int, m: int, ps: float) -> float:
    """Same enumeration written as a plain ``itertools.product`` loop (slow, small n only)."""
    depth_probs = [ps**d * (1.0 - ps) for d in range(m - 1)] + [ps ** (m - 1)]
    full = m - 1
    total = 0.0
    for outcome in itertools.product(range(m), repeat=n):
        if full in outcome:
            w = 1.0
            for d in outcome:
                w *= depth_probs[d]
            total += w
    return total


def poisson_series_pr_pairs(m: int, r: int, source: SourceModel, n_max: int = 60) -> float:
    """``Σ_n Poisson(n; mu) C(n,r) q^r (1-q)^(n-r)`` summed directly to ``n_max``."""
    q = photon_success(m, source.ps)
    total = 0.0
    for n in range(r, n_max + 1):
        pn = math.exp(-source.mu + n * math.log(source.mu) - math.lgamma(n + 1)) if source.mu else float(n == 0)
        total += pn * math.comb(n, r) * q**r * (1 - q) ** (n - r)
    return total


@dataclass
class MonteCarloResult:
    estimate: float
    stderr: float
    fraction: float
    pulses: int
    success_pulses: int
    pair_hist: list[int] = field(default_factory=list)
    backend: str = ""

    def as_dict(self):
        return asdict(self)


def monte_carlo_rate(m: int, source: SourceModel, pulses: int, seed: int,
                     workers: int = 1, backend: str | None = None) -> MonteCarloResult:
    """Sample Poisson pulses and per-photon Bernoulli chains; return
    ``F * success_fraction`` with its binomial standard error."""
    _check(None, m, source.ps)
    if pulses < 1:
        raise InvalidQuery("pulses must be >= 1")
    res = kernels.run_pulses(pulses, m - 1, source.ps, seed, mu=source.mu, workers=workers, backend=backend)
    frac = res.success_pulses / pulses
    se = math.sqrt(frac * (1.0 - frac) / pulses)
    return MonteCarloResult(
        estimate=source.rep_hz * frac,
        stderr=source.rep_hz * se,
        fraction=frac,
        pulses=pulses,
        success_pulses=int(res.success_pulses),
        pair_hist=[int(x) for x in res.pair_hist],
        backend=backend or kernels.BACKEND,
    )


@dataclass
class RateReport:
    m: int
    source: SourceModel
    n_tot: float
    pr_pairs: list[tuple[int, float]]
    tail: float
    ratio21: float

    @classmethod
    def compute(cls, m: int, source: SourceModel, r_max: int = 4) -> "RateReport":
        rows, tail = cascade_source_distribution(m, source, r_max)
        return cls(m, source, n_tot(m, source), rows, tail, pair_ratio(m, source))

    @property
    def success_prob(self) -> float:
        """Per-pulse probability of at least one m-photon state."""
        return -math.expm1(-self.source.mu * photon_success(self.m, self.source.ps))
