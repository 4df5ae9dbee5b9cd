"""Domain types shared by the analytic, simulation, grouping and CLI layers.

Every type is a frozen dataclass validated in ``__post_init__``.  Each has a
``to_dict``/``from_dict`` pair using the JSON field names of scenario files;
``from_dict`` rejects unknown keys.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Any, Mapping, Optional, Sequence

SEED_MAX = 2**64 - 1


class ConfigError(ValueError):
    """Raised for any configuration value that violates a type invariant."""


class Scheme(str, enum.Enum):
    SRS = "SRS"
    CONTENTION = "CONTENTION"

    @classmethod
    def parse(cls, value: "str | Scheme") -> "Scheme":
        if isinstance(value, Scheme):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ConfigError(f"unknown scheme {value!r}; expected SRS or CONTENTION") from None


def _require_count(name: str, value: Any, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return value


def _check_keys(cls: type, data: Mapping[str, Any], aliases: Sequence[str] = ()) -> None:
    known = {f.name for f in fields(cls)} | set(aliases)
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{cls.__name__}: unknown key(s) {', '.join(unknown)}")


def to_microseconds(name: str, value: Any) -> Fraction:
    """Parse a duration in microseconds into an exact rational.

    Floats go through their shortest decimal repr, so ``0.1`` means 1/10 us.
    The value must be a whole number of nanoseconds.
    """
    if isinstance(value, bool):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    try:
        if isinstance(value, Fraction):
            us = value
        elif isinstance(value, int):
            us = Fraction(value)
        elif isinstance(value, (float, str)):
            us = Fraction(repr(value) if isinstance(value, float) else value)
        else:
            raise TypeError
    except (TypeError, ValueError, ZeroDivisionError):
        raise ConfigError(f"{name} must be a number of microseconds, got {value!r}") from None
    if (us * 1000).denominator != 1:
        raise ConfigError(f"{name} must be a whole number of nanoseconds, got {value!r} us")
    return us


def _us_to_json(value: Fraction) -> "int | float":
    if value.denominator == 1:
        return int(value)
    # denominator divides 1000, so the float repr is the exact decimal
    return float(value)


@dataclass(frozen=True)
class GroupConfig:
    """Resource and sensing geometry of one user group."""

    k_subresources: int
    l_sensing_slots: int
    n_group_size: int
    n_groups: int = 1

    def __post_init__(self) -> None:
        for f in fields(self):
            _require_count(f.name, getattr(self, f.name))

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "GroupConfig":
        _check_keys(cls, data)
        return cls(**data)


@dataclass(frozen=True)
class SensingConfig:
    """Sensing durations in microseconds; slot ``l`` senses for ``t_initial + t_additional * l``."""

    t_initial: Fraction
    t_additional: Fraction
    l_sensing_slots: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "t_initial", to_microseconds("t_initial", self.t_initial))
        object.__setattr__(self, "t_additional", to_microseconds("t_additional", self.t_additional))
        _require_count("l_sensing_slots", self.l_sensing_slots)
        if self.t_initial < 0:
            raise ConfigError(f"t_initial must be >= 0, got {self.t_initial}")
        if self.t_additional <= 0:
            raise ConfigError(f"t_additional must be > 0, got {self.t_additional}")

    def duration(self, slot: int) -> Fraction:
        if not 0 <= slot < self.l_sensing_slots:
            raise ValueError(f"sensing slot {slot} outside [0, {self.l_sensing_slots - 1}]")
        return self.t_initial + self.t_additional * slot

    @property
    def worst_case(self) -> Fraction:
        return self.duration(self.l_sensing_slots - 1)

    def to_dict(self) -> dict:
        return {
            "t_initial": _us_to_json(self.t_initial),
            "t_additional": _us_to_json(self.t_additional),
            "l_sensing_slots": self.l_sensing_slots,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SensingConfig":
        _check_keys(cls, data)
        return cls(**data)


@dataclass(frozen=True)
class TrafficModel:
    """Poisson activity with mean ``lambda_mean_active``, truncated to ``[0, truncation]``."""

    lambda_mean_active: float
    truncation: int

    def __post_init__(self) -> None:
        lam = self.lambda_mean_active
        if isinstance(lam, bool) or not isinstance(lam, (int, float)) or not math.isfinite(lam) or lam < 0:
            raise ConfigError(f"lambda_mean_active must be a finite real >= 0, got {lam!r}")
        object.__setattr__(self, "lambda_mean_active", float(lam))
        _require_count("truncation", self.truncation)

    def to_dict(self) -> dict:
        return {"lambda_mean_active": self.lambda_mean_active, "truncation": self.truncation}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TrafficModel":
        _check_keys(cls, data)
        return cls(**data)


@dataclass(frozen=True)
class SpsParams:
    """Packet size and timing budget of a TDMA-style SPS uplink.

    Durations are exact microsecond rationals; arithmetic uses the ``*_ns``
    integer views.
    """

    packet_bits: int
    t_uplink_deadline: Fraction
    t_resource_gap: Fraction
    t_available: Fraction
    t_lbt: Fraction

    def __post_init__(self) -> None:
        _require_count("packet_bits", self.packet_bits)
        for name in ("t_uplink_deadline", "t_resource_gap", "t_available", "t_lbt"):
            object.__setattr__(self, name, to_microseconds(name, getattr(self, name)))
        if self.t_resource_gap < 0:
            raise ConfigError(f"t_resource_gap must be >= 0, got {self.t_resource_gap}")
        if self.t_resource_gap > self.t_uplink_deadline:
            raise ConfigError(
                f"t_resource_gap ({self.t_resource_gap} us) must not exceed "
                f"t_uplink_deadline ({self.t_uplink_deadline} us)"
            )
        if not 0 < self.t_available <= self.t_uplink_deadline:
            raise ConfigError(
                f"t_available must lie in (0, t_uplink_deadline={self.t_uplink_deadline}] us, "
                f"got {self.t_available}"
            )
        if self.t_lbt < 0:
            raise ConfigError(f"t_lbt must be >= 0, got {self.t_lbt}")

    @property
    def t_available_ns(self) -> int:
        return int(self.t_available * 1000)

    @property
    def t_lbt_ns(self) -> int:
        return int(self.t_lbt * 1000)

    def to_dict(self) -> dict:
        out: dict = {"packet_bits": self.packet_bits}
        for name in ("t_uplink_deadline", "t_resource_gap", "t_available", "t_lbt"):
            out[name] = _us_to_json(getattr(self, name))
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SpsParams":
        """Build from JSON.  ``packet_bytes`` is accepted in place of ``packet_bits`` (x8)."""
        _check_keys(cls, data, aliases=("packet_bytes",))
        data = dict(data)
        if "packet_bytes" in data:
            if "packet_bits" in data:
                raise ConfigError("give either packet_bits or packet_bytes, not both")
            n_bytes = _require_count("packet_bytes", data.pop("packet_bytes"))
            data["packet_bits"] = n_bytes * 8
        missing = [f.name for f in fields(cls) if f.name not in data]
        if missing:
            raise ConfigError(f"SpsParams: missing key(s) {', '.join(missing)}")
        return cls(**data)


@dataclass(frozen=True)
class ExternalOccupancy:
    """Probability that another system holds a given SR at the start of a slot."""

    busy_probability: float = 0.0

    def __post_init__(self) -> None:
        q = self.busy_probability
        if isinstance(q, bool) or not isinstance(q, (int, float)) or not 0.0 <= q <= 1.0:
            raise ConfigError(f"busy_probability must be a real in [0, 1], got {q!r}")
        object.__setattr__(self, "busy_probability", float(q))

    def to_dict(self) -> dict:
        return {"busy_probability": self.busy_probability}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ExternalOccupancy":
        _check_keys(cls, data)
        return cls(**data)


BLOCKED = None
"""Value of ``UeDecision.chosen_sr`` when the UE found no free SR."""


@dataclass(frozen=True)
class UeDecision:
    ue_index: int
    sensing_slot: int
    chosen_sr: Optional[int]
    failed: bool

    def __post_init__(self) -> None:
        if self.chosen_sr is BLOCKED and not self.failed:
            raise ValueError("a blocked UE must be marked failed")

    @property
    def blocked(self) -> bool:
        return self.chosen_sr is BLOCKED


@dataclass(frozen=True)
class SlotOutcome:
    decisions: tuple[UeDecision, ...]
    n_collided: int
    n_blocked: int

    @property
    def group_collided(self) -> bool:
        return self.n_collided + self.n_blocked > 0


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    stderr: float
    trials: int
    seed: int
    collisions: int = field(default=0, compare=False)

    @classmethod
    def from_counts(cls, collisions: int, trials: int, seed: int) -> "McEstimate":
        p = collisions / trials
        return cls(p_hat=p, stderr=math.sqrt(p * (1.0 - p) / trials), trials=trials, seed=seed,
                   collisions=collisions)


@dataclass(frozen=True)
class UePosition:
    ue_id: int
    x: float
    y: float

    def __post_init__(self) -> None:
        _require_count("ue_id", self.ue_id, minimum=0)
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ConfigError(f"UE {self.ue_id}: coordinates must be finite, got ({self.x}, {self.y})")


def check_seed(seed: Any) -> int:
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed <= SEED_MAX:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return seed
