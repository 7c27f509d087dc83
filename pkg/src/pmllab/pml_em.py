"""Approximate profile maximum likelihood via EM over latent symbol
assignments.

The pipeline has four stages: split off frequent symbols and keep their
empirical estimates, pick an output support size for the remainder, run EM
on the remaining profile, then reassemble and renormalize.

The EM treats the injective assignment of observed distinct symbols to
output support points as the latent variable. The E-step is exact (full
enumeration of assignments) on small instances and Metropolis-sampled with
pairwise swap proposals at scale; the M-step reweights each support point
by its expected assigned multiplicity mass.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .core import Distribution, Profile, Sample, profile_of
from .distributions import RngSeed
from .likelihood import profile_probability

#: Enumerate assignments exactly up to these sizes, sample beyond them.
_EXACT_M_LIMIT = 8
_EXACT_K_LIMIT = 10

#: Relative tilt of the starting point. An exactly uniform start is a fixed
#: point of the update on symmetric profiles and never escapes, so the
#: initialization is uniform with a strictly decreasing deterministic tilt.
_INIT_TILT = 1e-3

_LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class EmConfig:
    """Knobs for the EM solver and the surrounding pipeline."""

    em_iterations: int = 30
    max_support: int = 10000
    mcmc_sweeps_per_estep: int = 60
    tau_multiplier: float = 1.5
    seed: RngSeed = field(default_factory=RngSeed)

    def __post_init__(self):
        if isinstance(self.seed, int):
            object.__setattr__(self, "seed", RngSeed(self.seed))
        if self.em_iterations < 0:
            raise ValueError("em_iterations must be >= 0")
        if self.max_support < 1:
            raise ValueError("max_support must be >= 1")
        if self.mcmc_sweeps_per_estep < 1:
            raise ValueError("mcmc_sweeps_per_estep must be >= 1")
        if self.tau_multiplier <= 0.0:
            raise ValueError("tau_multiplier must be positive")

    def split_threshold(self, n: int) -> float:
        """Multiplicity threshold for the frequent-symbol split (natural log)."""
        return self.tau_multiplier * math.log(n) ** 2


@dataclass(frozen=True)
class SplitResult:
    """Outcome of separating frequent symbols from a sample."""

    large_symbols: Mapping[int, float]
    reduced_sample: Sample
    removed_mass: float

    def __post_init__(self):
        object.__setattr__(self, "large_symbols", MappingProxyType(dict(self.large_symbols)))
        if not -1e-12 <= self.removed_mass <= 1.0 + 1e-12:
            raise ValueError(f"removed mass {self.removed_mass} outside [0, 1]")


def split_large(sample: Sample, cfg: EmConfig | None = None) -> SplitResult:
    """Move symbols with multiplicity >= tau_multiplier * ln(n)^2 to
    empirical estimates and keep the rest."""
    cfg = cfg or EmConfig()
    if sample.n < 2:
        raise ValueError("need at least two draws")
    tau = cfg.split_threshold(sample.n)
    large: dict[int, float] = {}
    kept: dict[int, int] = {}
    for sym in sorted(sample.counts):
        mult = sample.counts[sym]
        if mult >= tau:
            large[sym] = mult / sample.n
        else:
            kept[sym] = mult
    return SplitResult(large, Sample(kept), math.fsum(large.values()))


def estimate_support(sample: Sample, max_support: int = 10000) -> int:
    """Support-size estimate with alternating-sign smoothing of the profile.

    Each prevalence phi_j is weighted by 1 - (-(t-1))^j * Pr(L >= j) with
    t = ln(r) and L binomial over ceil(log2(r t^2 / (t-1)) / 2) trials at
    success probability 1/(t+1); binomial tails are exact pmf sums. The
    result is rounded and clamped to [distinct count, max_support]. Samples
    with fewer than 3 draws make t - 1 non-positive, so they fall back to
    the distinct count.
    """
    if sample.n < 1:
        raise ValueError("need a non-empty sample")
    distinct = sample.distinct
    r = sample.n
    if r < 3:
        return min(max(distinct, 1), max_support)
    t = math.log(r)
    trials = math.ceil(0.5 * math.log2(r * t * t / (t - 1.0)))
    theta = 1.0 / (t + 1.0)
    pmf = [math.comb(trials, i) * theta**i * (1.0 - theta) ** (trials - i) for i in range(trials + 1)]
    tail = [0.0] * (trials + 2)
    for i in range(trials, -1, -1):
        tail[i] = tail[i + 1] + pmf[i]
    est = 0.0
    for j, phi in profile_of(sample).prevalences.items():
        if j <= trials and tail[j] > 0.0:
            weight = 1.0 - (-(t - 1.0)) ** j * tail[j]
        else:
            weight = 1.0
        est += weight * phi
    return min(max(round(est), distinct), max_support)


def _tilted_uniform(K: int) -> np.ndarray:
    if K == 1:
        return np.ones(1)
    tilt = 1.0 + _INIT_TILT * (np.arange(K - 1, -1, -1, dtype=float) / (K - 1))
    return tilt / tilt.sum()


def _empirical_start(mults: np.ndarray, K: int) -> np.ndarray:
    """Start proportional to the observed multiplicities, with a small floor
    on the unassigned support points.

    The EM update has two kinds of attractors: a near-uniform interior
    stationary point and concentrated boundary ones. Starting from both this
    and the tilted uniform point and keeping the higher-likelihood endpoint
    covers instances where either basin holds the maximizer.
    """
    floor = float(mults.min()) / (4.0 * K)
    q = np.full(K, floor)
    q[: mults.size] = mults
    return q / q.sum()


def _exact_estep_mass(q: np.ndarray, mults: np.ndarray, K: int) -> np.ndarray:
    """Expected multiplicity mass per support point, by full enumeration of
    injective assignments."""
    lq = np.log(np.maximum(q, _LOG_FLOOR))
    m = len(mults)
    logw = np.fromiter(
        (sum(mults[j] * lq[s] for j, s in enumerate(perm))
         for perm in itertools.permutations(range(K), m)),
        dtype=float,
    )
    weights = np.exp(logw - logw.max())
    mass = np.zeros(K)
    for w, perm in zip(weights, itertools.permutations(range(K), m)):
        if w == 0.0:
            continue
        for j, s in enumerate(perm):
            mass[s] += w * mults[j]
    return mass / weights.sum()


def _mcmc_estep_mass(
    q: np.ndarray,
    mults: np.ndarray,
    K: int,
    sweeps: int,
    gen: np.random.Generator,
    sigma: np.ndarray,
    unassigned: np.ndarray,
    burn: int,
) -> np.ndarray:
    """Expected multiplicity mass per support point, by Metropolis sampling
    of the latent assignment.

    Each sweep applies a block of disjoint pairwise proposals: swaps of the
    targets of two observed symbols, then relocations of symbols to
    unassigned support points. Blocks of moves with disjoint supports keep
    every acceptance ratio exact while allowing vectorized updates.
    ``sigma`` and ``unassigned`` are the chain state and are advanced in
    place, so the chain persists across E-steps.
    """
    m = int(mults.size)
    lq = np.log(np.maximum(q, _LOG_FLOOR))
    mass = np.zeros(K)
    kept = 0
    npairs = m // 2
    for sweep in range(sweeps + burn):
        perm = gen.permutation(m)
        if npairs:
            j1 = perm[:npairs]
            j2 = perm[npairs : 2 * npairs]
            delta = (mults[j1] - mults[j2]) * (lq[sigma[j2]] - lq[sigma[j1]])
            with np.errstate(divide="ignore"):
                accept = np.log(gen.random(npairs)) < delta
            a1 = j1[accept]
            a2 = j2[accept]
            swapped = sigma[a1].copy()
            sigma[a1] = sigma[a2]
            sigma[a2] = swapped
        free = unassigned.size
        if free:
            nmoves = min(m, free)
            movers = gen.permutation(m)[:nmoves]
            slots = gen.permutation(free)[:nmoves]
            delta = mults[movers] * (lq[unassigned[slots]] - lq[sigma[movers]])
            with np.errstate(divide="ignore"):
                accept = np.log(gen.random(nmoves)) < delta
            mv = movers[accept]
            sl = slots[accept]
            vacated = sigma[mv].copy()
            sigma[mv] = unassigned[sl]
            unassigned[sl] = vacated
        if sweep >= burn:
            mass += np.bincount(sigma, weights=mults, minlength=K)
            kept += 1
    return mass / kept


#: The sampled-E-step solver returns the mean of the descending-sorted
#: iterates over this many final EM iterations. The output is a multiset
#: estimate, so sorting loses nothing, and averaging quantile functions
#: strips Monte Carlo jitter without blurring the converged shape.
_AVG_WINDOW = 20


def _em_iterate(profile: Profile, K: int, cfg: EmConfig, q: np.ndarray,
                exact: bool, record_likelihood: bool):
    mults = np.asarray(profile.multiplicities(), dtype=float)
    m = int(mults.size)
    trace: list[float] = []
    if exact:
        for _ in range(cfg.em_iterations):
            if record_likelihood:
                trace.append(profile_probability(Distribution(q), profile))
            mass = _exact_estep_mass(q, mults, K)
            q = mass / mass.sum()
        dist = Distribution(q)
        if record_likelihood:
            trace.append(profile_probability(dist, profile))
        return dist, trace

    gen = cfg.seed.generator()
    # The pseudo-count keeps support points that the sampled E-step missed
    # alive; the exact E-step gives every point positive mass already, and
    # any smoothing there would break likelihood monotonicity.
    kappa = 1.0 / (K * profile.n)
    order = np.argsort(-q, kind="stable")
    sigma = order[:m].copy()  # mults are descending, so this is a greedy matching
    unassigned = order[m:].copy()
    window = min(_AVG_WINDOW, cfg.em_iterations)
    averaged = np.zeros(K)
    kept = 0
    for it in range(cfg.em_iterations):
        if record_likelihood:
            trace.append(profile_probability(Distribution(q), profile))
        burn = max(1, cfg.mcmc_sweeps_per_estep // 4) if it == 0 else 0
        mass = _mcmc_estep_mass(
            q, mults, K, cfg.mcmc_sweeps_per_estep, gen, sigma, unassigned, burn
        )
        q = mass + kappa
        q = q / q.sum()
        if it >= cfg.em_iterations - window:
            averaged += np.sort(q)[::-1]
            kept += 1
    dist = Distribution(averaged / kept)
    if record_likelihood:
        trace.append(profile_probability(dist, profile))
    return dist, trace


def _em_run(profile: Profile, K: int, cfg: EmConfig, record_likelihood: bool):
    K = int(K)
    if K < 1:
        raise ValueError("support size must be >= 1")
    mults = np.asarray(profile.multiplicities(), dtype=float)
    m = int(mults.size)
    if m > K:
        raise ValueError(f"support size {K} cannot host {m} distinct symbols")
    if m == 0 or cfg.em_iterations == 0:
        dist = Distribution(_tilted_uniform(K))
        trace = [profile_probability(dist, profile)] if record_likelihood else []
        return dist, trace
    exact = m <= _EXACT_M_LIMIT and K <= _EXACT_K_LIMIT
    starts = [_tilted_uniform(K)]
    if exact and K >= 2:
        # desk scale is cheap enough to certify both basins by likelihood
        starts.append(_empirical_start(mults, K))
    if len(starts) == 1:
        return _em_iterate(profile, K, cfg, starts[0], exact, record_likelihood)
    best = None
    for q0 in starts:
        dist, trace = _em_iterate(profile, K, cfg, q0, exact, record_likelihood)
        score = trace[-1] if record_likelihood else profile_probability(dist, profile)
        if best is None or score > best[0]:
            best = (score, dist, trace)
    return best[1], best[2]


def em_pml(profile: Profile, K: int, cfg: EmConfig | None = None) -> Distribution:
    """EM iteration for the PML distribution of a profile over K support
    points (trailing zeros allowed).

    With the exact E-step the profile probability is non-decreasing across
    iterations; with the sampled E-step it is non-decreasing in expectation
    and can be monitored via :func:`em_pml_trace`. The sampled path keeps
    one Metropolis chain alive across E-steps and returns the mean of the
    sorted final iterates, which strips most of the Monte Carlo jitter from
    the returned multiset.
    """
    dist, _ = _em_run(profile, K, cfg or EmConfig(), record_likelihood=False)
    return dist


def em_pml_trace(profile: Profile, K: int, cfg: EmConfig | None = None):
    """Like :func:`em_pml`, but also returns the profile probability of every
    iterate (initialization included)."""
    return _em_run(profile, K, cfg or EmConfig(), record_likelihood=True)


def approximate_pml(
    sample: Sample,
    k_hint: int | None = None,
    cfg: EmConfig | None = None,
) -> Distribution:
    """Full approximate-PML pipeline.

    Splits off frequent symbols, estimates the output support size for the
    remainder (or uses ``k_hint - #removed`` when the true alphabet size is
    supplied), runs EM on the reduced profile, scales the result by the
    unremoved mass, appends the empirical probabilities of the removed
    symbols, and renormalizes exactly.
    """
    cfg = cfg or EmConfig()
    if sample.n < 2:
        raise ValueError("need at least two draws")
    split = split_large(sample, cfg)
    reduced = split.reduced_sample
    big = sorted(split.large_symbols)
    if k_hint is not None and int(k_hint) < len(big) + reduced.distinct:
        raise ValueError(
            f"alphabet hint {k_hint} is smaller than the {len(big) + reduced.distinct} "
            "distinct symbols observed"
        )
    entries: list[float] = []
    if reduced.n:
        if k_hint is not None:
            K = int(k_hint) - len(big)
        else:
            K = estimate_support(reduced, cfg.max_support)
        scale = 1.0 - split.removed_mass
        p_r = em_pml(profile_of(reduced), K, cfg)
        entries.extend(scale * v for v in p_r.probs)
    entries.extend(split.large_symbols[s] for s in big)
    total = math.fsum(entries)
    return Distribution([v / total for v in entries])


def sample_of_profile(profile: Profile) -> Sample:
    """A canonical sample with the given profile (symbols relabeled 0..m-1).

    Profiles are symmetric sufficient statistics, so any relabeling is
    equivalent for everything computed here.
    """
    return Sample({j: mult for j, mult in enumerate(profile.multiplicities())})
