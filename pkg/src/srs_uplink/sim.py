"""Slot-level Monte Carlo of subband random sensing and the contention baseline.

Per-trial draw layout (all from ``rng`` substreams keyed by seed and trial):

    draw 0           number of active UEs (inverse CDF of the truncated pmf)
    draw 1 + j       external occupancy of SR ``j``
    draw 1 + K + 2i  sensing slot of UE ``i``   (unused by CONTENTION)
    draw 2 + K + 2i  free-SR pick of UE ``i``

``simulate_slot`` is the reference (one trial, readable); ``_batch_failed`` is
the vectorised kernel that ``monte_carlo_*`` run.  Both consume the same
draws and agree trial by trial.
"""

from __future__ import annotations

import bisect
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import rng
from .analytic import traffic_pmf_vector
from .model import (
    BLOCKED,
    ConfigError,
    ExternalOccupancy,
    GroupConfig,
    McEstimate,
    Scheme,
    SlotOutcome,
    TrafficModel,
    UeDecision,
    check_seed,
)

CHUNK_TRIALS = 1 << 17
LUT_MAX_K = 12
ENUMERATION_LIMIT = 1 << 16


def _busy_draw(j: int) -> int:
    return 1 + j


def _slot_draw(k: int, i: int) -> int:
    return 1 + k + 2 * i


def _pick_draw(k: int, i: int) -> int:
    return 2 + k + 2 * i


def _scaled_index(u: float, m: int) -> int:
    return min(math.floor(u * m), m - 1)


@dataclass(frozen=True)
class SimConfig:
    group: GroupConfig
    scheme: Scheme
    traffic: TrafficModel
    external: ExternalOccupancy = ExternalOccupancy()
    trials: int = 1_000_000
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if isinstance(self.trials, bool) or not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {self.trials!r}")
        check_seed(self.seed)
        if self.traffic.truncation != self.group.n_group_size:
            raise ConfigError(
                f"traffic truncation {self.traffic.truncation} != group size {self.group.n_group_size}"
            )


def _finish(slots: Sequence[int], chosen: Sequence[Optional[int]]) -> SlotOutcome:
    pairs = [(s, c) for s, c in zip(slots, chosen) if c is not BLOCKED]
    counts: dict = {}
    for p in pairs:
        counts[p] = counts.get(p, 0) + 1
    decisions = []
    n_collided = n_blocked = 0
    for i, (s, c) in enumerate(zip(slots, chosen)):
        if c is BLOCKED:
            failed = True
            n_blocked += 1
        else:
            failed = counts[(s, c)] > 1
            n_collided += failed
        decisions.append(UeDecision(ue_index=i, sensing_slot=s, chosen_sr=c, failed=failed))
    return SlotOutcome(tuple(decisions), n_collided=n_collided, n_blocked=n_blocked)


def simulate_slot(
    n_active: int,
    group: GroupConfig,
    scheme: Scheme | str,
    external: ExternalOccupancy,
    stream: rng.TrialStream,
) -> SlotOutcome:
    """Play out one slot of one user group.

    SRS: UEs sense in order of their random slot.  A UE sees every externally
    busy SR and every SR taken at a strictly shorter sensing duration; UEs
    sharing a duration see the same snapshot and not each other.  Each picks
    a free SR uniformly, or is blocked when none is free.  CONTENTION: each UE
    picks any SR uniformly; landing on an externally busy SR blocks it.
    """
    scheme = Scheme.parse(scheme)
    k, l = group.k_subresources, group.l_sensing_slots
    q = external.busy_probability
    busy = [q > 0 and stream.uniform(_busy_draw(j)) < q for j in range(k)]

    if scheme is Scheme.CONTENTION:
        slots = [0] * n_active
        chosen: list = []
        for i in range(n_active):
            sr = _scaled_index(stream.uniform(_pick_draw(k, i)), k)
            chosen.append(BLOCKED if busy[sr] else sr)
        return _finish(slots, chosen)

    slots = [_scaled_index(stream.uniform(_slot_draw(k, i)), l) for i in range(n_active)]
    chosen = [BLOCKED] * n_active
    occupied = set(j for j in range(k) if busy[j])
    for level in sorted(set(slots)):
        free = [j for j in range(k) if j not in occupied]
        taken_now = set()
        for i in range(n_active):
            if slots[i] != level or not free:
                continue
            sr = free[_scaled_index(stream.uniform(_pick_draw(k, i)), len(free))]
            chosen[i] = sr
            taken_now.add(sr)
        occupied |= taken_now
    return _finish(slots, chosen)


def _cdf(traffic: TrafficModel) -> np.ndarray:
    return np.cumsum(np.asarray(traffic_pmf_vector(traffic)))


def draw_n_active(u: "float | np.ndarray", cdf: np.ndarray):
    n = np.searchsorted(cdf, u, side="right")
    return np.minimum(n, len(cdf) - 1)


def simulate_trial(config: SimConfig, trial: int) -> tuple[int, SlotOutcome]:
    """Scalar replay of trial ``trial`` of ``monte_carlo_poc(config)``."""
    stream = rng.TrialStream(config.seed, trial)
    cdf = _cdf(config.traffic).tolist()
    n = min(bisect.bisect_right(cdf, stream.uniform(0)), len(cdf) - 1)
    return n, simulate_slot(n, config.group, config.scheme, config.external, stream)


# -- vectorised kernel -------------------------------------------------------


@lru_cache(maxsize=None)
def _select_table(k: int) -> tuple[np.ndarray, np.ndarray]:
    """For each occupied-bitmask: number of free SRs, and the r-th free SR (-1 pad)."""
    masks = np.arange(1 << k)
    bits = (masks[:, None] >> np.arange(k)[None, :]) & 1
    free = bits == 0
    n_free = free.sum(axis=1)
    table = np.full((1 << k, max(k, 1)), -1, dtype=np.int64)
    for m in range(1 << k):
        idx = np.flatnonzero(free[m])
        table[m, : len(idx)] = idx
    return n_free.astype(np.int64), table


def _scaled(u: np.ndarray, m) -> np.ndarray:
    idx = np.floor(u * m).astype(np.int64)
    return np.minimum(idx, np.maximum(np.asarray(m) - 1, 0))


def _busy_bits(keys: np.ndarray, k: int, q: float) -> np.ndarray:
    """External occupancy as (T, K) booleans."""
    t = len(keys)
    if q <= 0.0:
        return np.zeros((t, k), dtype=bool)
    if q >= 1.0:
        return np.ones((t, k), dtype=bool)
    return rng.uniforms(keys, range(_busy_draw(0), _busy_draw(k))) < q


def _batch_failed(
    keys: np.ndarray, n: int, group: GroupConfig, scheme: Scheme, q: float, use_lut: bool | None = None
) -> np.ndarray:
    """Group-collision flag per trial for a batch sharing ``n`` active UEs."""
    t = len(keys)
    k, l = group.k_subresources, group.l_sensing_slots
    if n == 0 or t == 0:
        return np.zeros(t, dtype=bool)
    busy = _busy_bits(keys, k, q)
    u = rng.uniforms(keys, range(_slot_draw(k, 0), _slot_draw(k, n)))
    picks = u[:, 1::2]

    if scheme is Scheme.CONTENTION:
        sr = _scaled(picks, k)
        blocked = np.take_along_axis(busy, sr, axis=1)
        code = np.where(blocked, -1 - np.arange(n)[None, :], sr)
        code.sort(axis=1)
        dup = (code[:, 1:] == code[:, :-1]) & (code[:, 1:] >= 0)
        return blocked.any(axis=1) | dup.any(axis=1)

    slots = _scaled(u[:, 0::2], l)
    order = np.argsort(slots, axis=1, kind="stable")
    slots = np.take_along_axis(slots, order, axis=1)
    picks = np.take_along_axis(picks, order, axis=1)
    if use_lut is None:
        use_lut = k <= LUT_MAX_K
    if use_lut:
        return _srs_lut(busy, slots, picks, k)
    return _srs_dense(busy, slots, picks, k)


def _srs_lut(busy: np.ndarray, slots: np.ndarray, picks: np.ndarray, k: int) -> np.ndarray:
    n_free_of, table = _select_table(k)
    weights = np.int64(1) << np.arange(k, dtype=np.int64)
    committed = busy.astype(np.int64) @ weights
    pending = np.zeros_like(committed)
    failed = np.zeros(len(committed), dtype=bool)
    for j in range(slots.shape[1]):
        if j:
            new_level = slots[:, j] != slots[:, j - 1]
            committed = np.where(new_level, committed | pending, committed)
            pending = np.where(new_level, 0, pending)
        n_free = n_free_of[committed]
        blocked = n_free == 0
        r = _scaled(picks[:, j], n_free)
        sr = table[committed, r]
        bit = np.where(blocked, 0, np.int64(1) << np.maximum(sr, 0))
        failed |= blocked | ((pending & bit) != 0)
        pending |= bit
    return failed


def _srs_dense(busy: np.ndarray, slots: np.ndarray, picks: np.ndarray, k: int) -> np.ndarray:
    t = len(busy)
    rows = np.arange(t)
    committed = busy.copy()
    pending = np.zeros_like(committed)
    failed = np.zeros(t, dtype=bool)
    for j in range(slots.shape[1]):
        if j:
            new_level = slots[:, j] != slots[:, j - 1]
            committed[new_level] |= pending[new_level]
            pending[new_level] = False
        free = ~committed
        n_free = free.sum(axis=1)
        blocked = n_free == 0
        r = _scaled(picks[:, j], n_free)
        sr = (np.cumsum(free, axis=1) <= r[:, None]).sum(axis=1)
        ok = ~blocked
        hit = np.zeros(t, dtype=bool)
        hit[ok] = pending[rows[ok], sr[ok]]
        failed |= blocked | hit
        pending[rows[ok], sr[ok]] = True
    return failed


def _count_poc_chunk(args) -> int:
    config, start, stop = args
    keys = rng.trial_keys(config.seed, np.arange(start, stop, dtype=np.uint64))
    n_active = draw_n_active(rng.uniforms(keys, [0])[:, 0], _cdf(config.traffic))
    q = config.external.busy_probability
    total = 0
    for n in np.unique(n_active):
        sel = n_active == n
        total += int(_batch_failed(keys[sel], int(n), config.group, config.scheme, q).sum())
    return total


def _count_fixed_chunk(args) -> int:
    n, group, scheme, q, seed, start, stop = args
    keys = rng.trial_keys(seed, np.arange(start, stop, dtype=np.uint64))
    return int(_batch_failed(keys, n, group, scheme, q).sum())


def _chunks(trials: int, size: int):
    return [(a, min(a + size, trials)) for a in range(0, trials, size)]


def _run(fn, jobs: list, workers: int) -> int:
    if workers <= 1 or len(jobs) <= 1:
        return sum(map(fn, jobs))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return sum(pool.map(fn, jobs))


def monte_carlo_poc(config: SimConfig, workers: int = 1, chunk_trials: int = CHUNK_TRIALS) -> McEstimate:
    """Estimate the overall group-collision probability.

    Trials are independent substreams, so the estimate does not depend on
    ``workers`` or ``chunk_trials``.
    """
    jobs = [(config, a, b) for a, b in _chunks(config.trials, chunk_trials)]
    hits = _run(_count_poc_chunk, jobs, workers)
    return McEstimate.from_counts(hits, config.trials, config.seed)


def monte_carlo_fixed_n(
    n_active: int,
    group: GroupConfig,
    scheme: Scheme | str,
    external: ExternalOccupancy = ExternalOccupancy(),
    trials: int = 1_000_000,
    seed: int = 0,
    workers: int = 1,
    chunk_trials: int = CHUNK_TRIALS,
) -> McEstimate:
    """Collision probability given exactly ``n_active`` UEs (may exceed the group size)."""
    scheme = Scheme.parse(scheme)
    check_seed(seed)
    if n_active < 0:
        raise ValueError(f"n_active must be >= 0, got {n_active}")
    q = external.busy_probability
    jobs = [(n_active, group, scheme, q, seed, a, b) for a, b in _chunks(trials, chunk_trials)]
    hits = _run(_count_fixed_chunk, jobs, workers)
    return McEstimate.from_counts(hits, trials, seed)


# -- exact enumeration oracle ------------------------------------------------


def _busy_masks(k: int, q: Fraction):
    if q == 0:
        yield (False,) * k, Fraction(1)
        return
    for mask in itertools.product((False, True), repeat=k):
        nb = sum(mask)
        w = q**nb * (1 - q) ** (k - nb)
        if w:
            yield mask, w


def _srs_profile_prob(profile: tuple[int, ...], busy: tuple[bool, ...]) -> Fraction:
    """P(collision) given the UE counts at each occupied sensing level, in order."""
    k = len(busy)

    def walk(level: int, occupied: frozenset) -> Fraction:
        if level == len(profile):
            return Fraction(0)
        free = [j for j in range(k) if j not in occupied]
        m = profile[level]
        if not free:
            return Fraction(1)
        total = Fraction(0)
        w = Fraction(1, len(free) ** m)
        for choice in itertools.product(free, repeat=m):
            if len(set(choice)) < m:
                total += w
            else:
                total += w * walk(level + 1, occupied | frozenset(choice))
        return total

    return walk(0, frozenset(j for j in range(k) if busy[j]))


def enumerate_exact_poc(
    n_active: int,
    group: GroupConfig,
    scheme: Scheme | str,
    busy_probability: Fraction | float = 0,
) -> float:
    """Exact group-collision probability of the ``simulate_slot`` rules by enumeration.

    Every joint sensing-slot assignment and every free-SR choice branch is
    visited with its exact probability.  Assignments with the same ordered
    level profile reuse one branch evaluation.  The instance size is bounded
    by ``(K*L)**n <= 65536``.
    """
    scheme = Scheme.parse(scheme)
    k, l = group.k_subresources, group.l_sensing_slots
    if n_active < 0:
        raise ValueError(f"n_active must be >= 0, got {n_active}")
    if (k * l) ** n_active > ENUMERATION_LIMIT or k > 16:
        raise ValueError(
            f"enumeration too large: (K*L)^n = ({k}*{l})^{n_active} exceeds {ENUMERATION_LIMIT}"
        )
    q = Fraction(repr(busy_probability)) if isinstance(busy_probability, float) else Fraction(busy_probability)
    if n_active == 0:
        return 0.0

    total = Fraction(0)
    for busy, w_busy in _busy_masks(k, q):
        if scheme is Scheme.CONTENTION:
            hits = 0
            for choice in itertools.product(range(k), repeat=n_active):
                if any(busy[c] for c in choice) or len(set(choice)) < n_active:
                    hits += 1
            total += w_busy * Fraction(hits, k**n_active)
            continue
        cache: dict = {}
        acc = Fraction(0)
        for slots in itertools.product(range(l), repeat=n_active):
            profile = tuple(slots.count(s) for s in sorted(set(slots)))
            if profile not in cache:
                cache[profile] = _srs_profile_prob(profile, busy)
            acc += cache[profile]
        total += w_busy * acc / l**n_active
    return float(total)
