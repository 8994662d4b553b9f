"""JSON scenario files.

Example::

    {
      "version": 1,
      "bandwidth_hz": 1.0,
      "noise_w": 1.0,
      "packet_bits": 100,
      "b_max": 10,
      "coding": {"enabled": false, "gains_db": {"2": 3.0, "4": 3.6}},
      "policy": "pareto",
      "users": [
        {"gain": 1.0, "source_rate_fraction": 0.1, "delay_bound_s": 1000.0}
      ]
    }

A user gives its load either as ``arrival_rate_pps`` (packets/s) or as
``source_rate_fraction`` x, meaning a source bit rate of x * B, i.e.
``lambda = x * B / L``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Optional

import jsonschema

from .delay_qos import TrafficQoS
from .errors import ConfigurationError
from .game import NetworkEnv, Policy, UserProfile
from .modulation import DEFAULT_TCM_GAINS_DB, CodingGainModel

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

_USER_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["gain"],
    "properties": {
        "gain": {"type": "number", "exclusiveMinimum": 0},
        "arrival_rate_pps": {"type": "number", "minimum": 0},
        "source_rate_fraction": {"type": "number", "minimum": 0},
        "delay_bound_s": {"type": "number", "exclusiveMinimum": 0},
    },
    "oneOf": [
        {"required": ["arrival_rate_pps"], "not": {"required": ["source_rate_fraction"]}},
        {"required": ["source_rate_fraction"], "not": {"required": ["arrival_rate_pps"]}},
    ],
}

SCENARIO_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["version", "users"],
    "properties": {
        "version": {"const": SCHEMA_VERSION},
        "bandwidth_hz": {"type": "number", "exclusiveMinimum": 0},
        "noise_w": {"type": "number", "exclusiveMinimum": 0},
        "packet_bits": {"type": "integer", "minimum": 1},
        "b_max": {"type": "integer", "minimum": 2, "multipleOf": 2},
        "coding": {
            "type": "object",
            "additionalProperties": False,
            "required": ["enabled"],
            "properties": {
                "enabled": {"type": "boolean"},
                "gains_db": {
                    "type": "object",
                    "patternProperties": {"^[0-9]+$": {"type": "number", "minimum": 0}},
                    "additionalProperties": False,
                },
                "info": {"type": "string"},
            },
        },
        "policy": {"enum": [p.value for p in Policy]},
        "users": {"type": "array", "minItems": 1, "items": _USER_SCHEMA},
    },
}


@dataclass(frozen=True)
class UserSpec:
    gain: float
    arrival_rate_pps: Optional[float] = None
    source_rate_fraction: Optional[float] = None
    delay_bound_s: Optional[float] = None

    def arrival_rate(self, bandwidth: float, packet_bits: int) -> float:
        if self.arrival_rate_pps is not None:
            return self.arrival_rate_pps
        return self.source_rate_fraction * bandwidth / packet_bits


@dataclass(frozen=True)
class ScenarioConfig:
    users: tuple
    bandwidth_hz: float = 1.0
    noise_w: float = 1.0
    packet_bits: int = 100
    b_max: int = 10
    coding_enabled: bool = False
    gains_db: dict = field(default_factory=lambda: dict(DEFAULT_TCM_GAINS_DB))
    coding_info: str = "8-state rate-2/3 TCM (placeholder gains)"
    policy: Policy = Policy.PARETO_DOMINANT

    def coding_model(self) -> CodingGainModel:
        return CodingGainModel(self.gains_db, self.coding_info)

    def user_profile(
        self, k: int, delay_bound: Optional[float] = None, coded: bool = False
    ) -> UserProfile:
        spec = self.users[k]
        d = spec.delay_bound_s if delay_bound is None else delay_bound
        if d is None:
            raise ConfigurationError(f"user {k} has no delay_bound_s")
        lam = spec.arrival_rate(self.bandwidth_hz, self.packet_bits)
        return UserProfile(
            gain=spec.gain,
            traffic=TrafficQoS(lam, d),
            packet_bits=self.packet_bits,
            b_max=self.b_max,
            coding=self.coding_model() if coded else None,
        )

    def network(self, coded: Optional[bool] = None) -> NetworkEnv:
        coded = self.coding_enabled if coded is None else coded
        profiles = [self.user_profile(k, coded=coded) for k in range(len(self.users))]
        return NetworkEnv(self.bandwidth_hz, self.noise_w, profiles)


DEFAULT_SCENARIO = ScenarioConfig(
    users=(UserSpec(gain=1.0, source_rate_fraction=0.1, delay_bound_s=1000.0),)
)


def parse_scenario(data: dict) -> ScenarioConfig:
    try:
        jsonschema.validate(data, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigurationError(f"invalid scenario at {where}: {exc.message}") from exc

    coding = data.get("coding", {})
    gains = {int(k): float(v) for k, v in coding.get("gains_db", DEFAULT_TCM_GAINS_DB).items()}
    kwargs = {}
    for key in ("bandwidth_hz", "noise_w", "packet_bits", "b_max"):
        if key in data:
            kwargs[key] = data[key]
    if "info" in coding:
        kwargs["coding_info"] = coding["info"]
    return ScenarioConfig(
        users=tuple(UserSpec(**u) for u in data["users"]),
        coding_enabled=coding.get("enabled", False),
        gains_db=gains,
        policy=Policy(data.get("policy", Policy.PARETO_DOMINANT.value)),
        **kwargs,
    )


def load_scenario(path) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read scenario {path}: {exc}") from exc
    config = parse_scenario(data)
    log.debug("loaded scenario %s with %d user(s)", path, len(config.users))
    return config
