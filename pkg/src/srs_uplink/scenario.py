"""JSON scenario files for the experiment runners."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Optional

from .model import (
    ConfigError,
    ExternalOccupancy,
    GroupConfig,
    SensingConfig,
    SpsParams,
    check_seed,
)

DEFAULT_TRIALS = 1_000_000


class Kind(str, enum.Enum):
    SPS_SWEEP = "SPS_SWEEP"
    COLLISION_SWEEP = "COLLISION_SWEEP"
    GROUPING = "GROUPING"


_COMMON = {"name", "kind", "output_path"}
_KEYS = {
    Kind.SPS_SWEEP: _COMMON | {"sps", "n_users_grid"},
    Kind.COLLISION_SWEEP: _COMMON | {"group", "sensing", "external", "lambda_grid", "trials", "seed"},
    Kind.GROUPING: _COMMON | {"positions_path", "hearing_range", "total_srs"},
}
_REQUIRED = {
    Kind.SPS_SWEEP: _COMMON | {"sps", "n_users_grid"},
    Kind.COLLISION_SWEEP: _COMMON | {"group", "lambda_grid", "seed"},
    Kind.GROUPING: _COMMON | {"positions_path", "hearing_range", "total_srs"},
}


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: Kind
    output_path: Path
    sps: Optional[SpsParams] = None
    n_users_grid: tuple[int, ...] = ()
    group: Optional[GroupConfig] = None
    sensing: Optional[SensingConfig] = None
    external: ExternalOccupancy = field(default_factory=ExternalOccupancy)
    lambda_grid: tuple[float, ...] = ()
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    positions_path: Optional[Path] = None
    hearing_range: float = 0.0
    total_srs: int = 0


def _strictly_increasing(name: str, grid: Any, number_type) -> tuple:
    if not isinstance(grid, list) or not grid:
        raise ConfigError(f"{name} must be a nonempty list")
    for v in grid:
        if isinstance(v, bool) or not isinstance(v, number_type) or v < 0:
            raise ConfigError(f"{name}: entries must be nonnegative numbers, got {v!r}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError(f"{name} must be strictly increasing")
    return tuple(grid)


def _sub(data: Mapping[str, Any], key: str) -> Mapping[str, Any]:
    value = data[key]
    if not isinstance(value, dict):
        raise ConfigError(f"{key} must be an object")
    return value


def parse_scenario(data: Any, base_dir: Path = Path(".")) -> Scenario:
    """Validate a decoded scenario object.  ``positions_path`` resolves against ``base_dir``."""
    if not isinstance(data, dict):
        raise ConfigError("scenario must be a JSON object")
    try:
        kind = Kind(data.get("kind"))
    except ValueError:
        raise ConfigError(f"kind must be one of {[k.value for k in Kind]}, got {data.get('kind')!r}") from None
    unknown = sorted(set(data) - _KEYS[kind])
    if unknown:
        raise ConfigError(f"unknown key(s) for {kind.value}: {', '.join(unknown)}")
    missing = sorted(_REQUIRED[kind] - set(data))
    if missing:
        raise ConfigError(f"missing key(s) for {kind.value}: {', '.join(missing)}")
    if not isinstance(data["name"], str) or not data["name"]:
        raise ConfigError("name must be a nonempty string")
    if not isinstance(data["output_path"], str) or not data["output_path"]:
        raise ConfigError("output_path must be a nonempty string")
    common = dict(name=data["name"], kind=kind, output_path=Path(data["output_path"]))

    if kind is Kind.SPS_SWEEP:
        grid = _strictly_increasing("n_users_grid", data["n_users_grid"], int)
        return Scenario(**common, sps=SpsParams.from_dict(_sub(data, "sps")), n_users_grid=grid)

    if kind is Kind.COLLISION_SWEEP:
        group = GroupConfig.from_dict(_sub(data, "group"))
        sensing = SensingConfig.from_dict(_sub(data, "sensing")) if "sensing" in data else None
        if sensing is not None and sensing.l_sensing_slots != group.l_sensing_slots:
            raise ConfigError(
                f"sensing.l_sensing_slots={sensing.l_sensing_slots} != "
                f"group.l_sensing_slots={group.l_sensing_slots}"
            )
        external = ExternalOccupancy.from_dict(_sub(data, "external")) if "external" in data else ExternalOccupancy()
        trials = data.get("trials", DEFAULT_TRIALS)
        if isinstance(trials, bool) or not isinstance(trials, int) or trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {trials!r}")
        grid = _strictly_increasing("lambda_grid", data["lambda_grid"], (int, float))
        return Scenario(
            **common,
            group=group,
            sensing=sensing,
            external=external,
            lambda_grid=tuple(float(v) for v in grid),
            trials=trials,
            seed=check_seed(data["seed"]),
        )

    hearing = data["hearing_range"]
    if isinstance(hearing, bool) or not isinstance(hearing, (int, float)) or not hearing > 0:
        raise ConfigError(f"hearing_range must be > 0, got {hearing!r}")
    total = data["total_srs"]
    if isinstance(total, bool) or not isinstance(total, int) or total < 1:
        raise ConfigError(f"total_srs must be a positive integer, got {total!r}")
    if not isinstance(data["positions_path"], str):
        raise ConfigError("positions_path must be a string")
    return Scenario(
        **common,
        positions_path=base_dir / data["positions_path"],
        hearing_range=float(hearing),
        total_srs=total,
    )


def bundled_names() -> list[str]:
    root = resources.files("srs_uplink") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def resolve(ref: "str | Path") -> Path:
    """A scenario file path, or the name of a bundled scenario (``fig6``)."""
    path = Path(ref)
    if path.exists():
        return path
    bundled = resources.files("srs_uplink") / "scenarios" / f"{ref}.json"
    if bundled.is_file():
        return Path(str(bundled))
    return path


def load_scenario(ref: "str | Path") -> Scenario:
    """Read and validate a scenario.  ``OSError`` for unreadable files, ``ConfigError`` otherwise."""
    path = resolve(ref)
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return parse_scenario(data, base_dir=path.parent)
