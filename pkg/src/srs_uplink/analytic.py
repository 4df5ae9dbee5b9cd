"""Closed-form collision probabilities and SPS capacity arithmetic."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .model import ConfigError, GroupConfig, Scheme, SpsParams, TrafficModel


class NonPositiveTransmitTime(ValueError):
    """The LBT overhead of ``n`` users consumes the whole available time."""


def _no_coincidence(n: int, m: int) -> float:
    # (m-1)(m-2)...(m-n+1) / m^(n-1), as a running product to stay in range
    prod = 1.0
    for i in range(1, n):
        prod *= (m - i) / m
    return prod


def pc_contention(n: int, k: int) -> float:
    """Probability that ``n`` uniform picks over ``k`` resources are not all distinct.

    ``n > k`` returns 1. That case covers the blocking a group sees once it has
    more active users than SRs.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if n <= 1:
        return 0.0
    if n > k:
        return 1.0
    return 1.0 - _no_coincidence(n, k)


def pc_srs(n: int, k: int, l: int) -> float:
    """Per-slot collision probability of subband random sensing with ``n`` active UEs."""
    if l < 1:
        raise ValueError(f"l must be >= 1, got {l}")
    base = pc_contention(n, k)
    if n <= 1 or n > k:
        return base
    # a factor is 0 once l < n, so the second term is 1 there
    return base * (1.0 - _no_coincidence(n, l))


@lru_cache(maxsize=256)
def _truncated_poisson(lam: float, truncation: int) -> tuple[float, ...]:
    if lam == 0.0:
        return (1.0,) + (0.0,) * truncation
    log_terms = [n * math.log(lam) - lam - math.lgamma(n + 1) for n in range(truncation + 1)]
    peak = max(log_terms)
    weights = [math.exp(t - peak) for t in log_terms]
    z = math.fsum(weights)
    return tuple(w / z for w in weights)


def traffic_pmf_vector(traffic: TrafficModel) -> tuple[float, ...]:
    """All of ``P(n active)`` for ``n = 0 .. truncation``."""
    return _truncated_poisson(traffic.lambda_mean_active, traffic.truncation)


def traffic_pmf(traffic: TrafficModel, n: int) -> float:
    if not 0 <= n <= traffic.truncation:
        raise ValueError(f"n={n} outside support [0, {traffic.truncation}]")
    return traffic_pmf_vector(traffic)[n]


def overall_collision(traffic: TrafficModel, cfg: GroupConfig, scheme: Scheme | str) -> float:
    """Mix per-n collision probabilities over the group's activity distribution."""
    scheme = Scheme.parse(scheme)
    if traffic.truncation != cfg.n_group_size:
        raise ConfigError(
            f"traffic truncation {traffic.truncation} != group size {cfg.n_group_size}"
        )
    k, l = cfg.k_subresources, cfg.l_sensing_slots
    if scheme is Scheme.SRS:
        pc = [pc_srs(n, k, l) for n in range(cfg.n_group_size + 1)]
    else:
        pc = [pc_contention(n, k) for n in range(cfg.n_group_size + 1)]
    total = math.fsum(p * c for p, c in zip(traffic_pmf_vector(traffic), pc))
    return min(max(total, 0.0), 1.0)


def sps_required_rate(n_users: int, params: SpsParams) -> Fraction:
    """Minimum uplink rate in bit/s for ``n_users`` TDMA users, as an exact rational."""
    if n_users < 0:
        raise ValueError(f"n_users must be >= 0, got {n_users}")
    transmit_ns = params.t_available_ns - n_users * params.t_lbt_ns
    if transmit_ns <= 0:
        raise NonPositiveTransmitTime(
            f"{n_users} users x {params.t_lbt} us LBT leave no transmit time "
            f"within {params.t_available} us"
        )
    return Fraction(n_users * params.packet_bits * 10**9, transmit_ns)


def _as_rate(rate_cap) -> Fraction:
    if isinstance(rate_cap, Fraction):
        return rate_cap
    if isinstance(rate_cap, float):
        return Fraction(repr(rate_cap))
    return Fraction(rate_cap)


def sps_max_users(params: SpsParams, rate_cap) -> int:
    """Largest user count whose required SPS rate fits within ``rate_cap`` bit/s.

    Solves ``N*b <= cap*(T - N*t)`` for N directly, so ``t_lbt = 0`` works.
    """
    cap = _as_rate(rate_cap)
    if cap <= 0:
        raise ValueError(f"rate_cap must be > 0, got {rate_cap}")
    t_ns, lbt_ns = params.t_available_ns, params.t_lbt_ns
    # bits <= cap[bit/s] * ns / 1e9
    n = math.floor(cap * t_ns / (params.packet_bits * 10**9 + cap * lbt_ns))
    while n > 0 and t_ns - n * lbt_ns <= 0:
        n -= 1
    return n
