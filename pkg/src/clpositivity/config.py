"""Scenario configuration: JSON or ``key = value`` files, mirrored by CLI long flags."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import DomainError
from .model import Case, ModelParams
from .observables import QuadratureSpec, default_time_grid
from .states import HermiteGaussState
from .steady import Infeasible, t_min


class ConfigError(ValueError):
    """A scenario field is missing, malformed or inconsistent; ``field`` names it."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


_BOOL_WORDS = {"true": True, "yes": True, "1": True, "on": True, "false": False, "no": False, "0": False, "off": False}


@dataclass(frozen=True)
class ScenarioConfig:
    case: str = "I"
    gamma: float = 0.35
    omega: float = 1.0
    temperature: float | None = None
    temperature_multiple: float | None = None
    cutoff: float | None = None
    beta: float = 0.6
    n: int = 0
    t_start: float = 1e-3
    t_end: float | None = None
    samples: int = 400
    log_spacing: bool = True
    nodes: int = 64
    refine_tol: float = 1e-10
    n_sigma: float = 10.0
    flag_tol: float = 1e-6
    workers: int = 1
    output: str | None = None
    format: str = "csv"

    @classmethod
    def field_names(cls):
        return [f.name for f in dataclasses.fields(cls)]

    @classmethod
    def from_mapping(cls, data: dict) -> "ScenarioConfig":
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, raw in data.items():
            name = key.strip().replace("-", "_")
            if name not in types:
                raise ConfigError(name, "unknown field")
            kwargs[name] = _coerce(name, types[name], raw)
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        text = Path(path).read_text(encoding="utf-8")
        if text.lstrip().startswith("{"):
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError("config", f"invalid JSON: {exc}") from exc
        else:
            data = parse_key_values(text)
        return cls.from_mapping(data)

    def merged(self, overrides: dict) -> "ScenarioConfig":
        """Copy with every non-None entry of ``overrides`` applied (flags beat the file)."""
        data = {k: v for k, v in overrides.items() if v is not None}
        if "temperature" in data:
            data.setdefault("temperature_multiple", None)
        if "temperature_multiple" in data and data["temperature_multiple"] is not None and "temperature" not in data:
            data["temperature"] = None
        return dataclasses.replace(self, **data)

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True)

    # resolution -------------------------------------------------------

    def resolved_temperature(self) -> float | None:
        case = _case(self.case)
        if case is Case.IV:
            return None
        if self.temperature is not None and self.temperature_multiple is not None:
            raise ConfigError("temperature", "give either temperature or temperature_multiple, not both")
        if self.temperature_multiple is not None:
            floor = t_min(case, self.gamma, self.omega, self.cutoff)
            if isinstance(floor, Infeasible):
                raise ConfigError("temperature_multiple", f"t_min is infeasible for case {case.value}")
            return self.temperature_multiple * floor
        if self.temperature is None:
            raise ConfigError("temperature", f"case {case.value} needs temperature or temperature_multiple")
        return self.temperature

    def model_params(self) -> ModelParams:
        case = _case(self.case)
        try:
            return ModelParams(gamma=self.gamma, omega=self.omega, temperature=self.resolved_temperature(),
                               cutoff=self.cutoff, case=case)
        except ConfigError:
            raise
        except DomainError as exc:
            raise ConfigError(_guess_field(str(exc)), str(exc)) from exc

    def state(self) -> HermiteGaussState:
        try:
            return HermiteGaussState(self.n, self.beta)
        except DomainError as exc:
            raise ConfigError("n" if "n must" in str(exc) else "beta", str(exc)) from exc

    def quadrature(self) -> QuadratureSpec:
        try:
            return QuadratureSpec(nodes_K=self.nodes, nodes_r=self.nodes, refine_tol=self.refine_tol,
                                  n_sigma=self.n_sigma, max_nodes=max(1024, self.nodes))
        except DomainError as exc:
            raise ConfigError("nodes", str(exc)) from exc

    def time_grid(self):
        if self.samples < 1:
            raise ConfigError("samples", "time grid is empty (samples must be >= 1)")
        try:
            return default_time_grid(self.gamma, self.samples, self.t_start, self.t_end, self.log_spacing)
        except DomainError as exc:
            raise ConfigError("t_end", str(exc)) from exc


def parse_key_values(text: str) -> dict:
    """``key = value`` (or ``key: value``) lines; ``#`` starts a comment."""
    data = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":" if ":" in line else None
        if sep is None:
            raise ConfigError(f"line {lineno}", f"expected key = value, got {line!r}")
        key, value = (part.strip() for part in line.split(sep, 1))
        data[key] = value
    return data


def _case(value) -> Case:
    try:
        return Case.parse(value)
    except ValueError as exc:
        raise ConfigError("case", str(exc)) from exc


def _coerce(name, type_hint, raw):
    if raw is None or (isinstance(raw, str) and raw.strip().lower() in ("", "none", "null")):
        return None
    hint = str(type_hint)
    try:
        if hint.startswith("bool"):
            if isinstance(raw, bool):
                return raw
            return _BOOL_WORDS[str(raw).strip().lower()]
        if hint.startswith("int"):
            value = float(raw)
            if value != int(value):
                raise ValueError(f"not an integer: {raw!r}")
            return int(value)
        if hint.startswith("float"):
            value = float(raw)
            if math.isnan(value):
                raise ValueError("NaN")
            return value
        return str(raw)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(name, f"cannot parse {raw!r} as {hint}") from exc


def _guess_field(message: str) -> str:
    for name in ("gamma", "omega", "temperature", "cutoff"):
        if name in message:
            return name
    return "config"
