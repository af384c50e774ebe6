"""Scenario / sweep configuration and the built-in presets.

Configs are JSON.  Matrices use the row-major ``[[ [re, im], ... ], ...]``
literal of :func:`qbatt.operators.parse_matrix`.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .collision import CollisionModel
from .errors import ConfigError, QBattError
from .hamiltonians import ModelSpec, build_xx_single_qubit
from .operators import as_density, dump_matrix, gibbs, parse_matrix

INITIAL_STATES = ("gibbs_HS", "gibbs_minus_HS", "passive_of_pi", "maximally_mixed")
SWEEP_AXES = ("beta", "h", "J", "a", "tau", "epsilon")


@dataclass
class ScenarioConfig:
    model: ModelSpec
    beta: float
    tau: float
    gap: float = 0.0
    initial_state: Any = "gibbs_HS"
    steps: int = 1_000_000
    conv_tol: float = 1e-12
    name: Optional[str] = None
    outputs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if not self.conv_tol > 0:
            raise ConfigError(f"conv_tol must be > 0, got {self.conv_tol}")

    def collision_model(self) -> CollisionModel:
        hs, ha, v = self.model.build()
        return CollisionModel(hs, ha, v, self.beta, self.tau, self.gap)


@dataclass
class NarrowBand:
    energies: list
    center: float
    offsets: list


@dataclass
class SweepConfig:
    base: ScenarioConfig
    axis: str
    values: list
    narrow_band: Optional[NarrowBand] = None
    name: Optional[str] = None


def _xx_preset() -> dict:
    hs, ha, v = build_xx_single_qubit(1.0, 1.0)
    return {
        "model": {"variant": "custom", "H_S": dump_matrix(hs), "H_A": dump_matrix(ha), "V": dump_matrix(v)},
        "beta": 1.0,
        "tau": 0.1,
        "initial_state": "gibbs_HS",
        "steps": 100000,
        "conv_tol": 1e-12,
    }


PRESETS = {
    "fig1": {
        "model": {"variant": "single_qubit", "h": 1.5, "a": math.sqrt(10)},
        "beta": 1.0,
        "tau": 0.1,
        "gap": 0.0,
        "initial_state": "gibbs_HS",
        "steps": 100000,
        "conv_tol": 1e-10,
    },
    "two_qubit_default": {
        "model": {"variant": "two_qubit", "h": 0.5, "J": 1.0},
        "beta": 2.0,
        "tau": 0.1,
        "gap": 0.0,
        "initial_state": "gibbs_HS",
        "steps": 100000,
        "conv_tol": 1e-12,
    },
    "xx_ness": _xx_preset(),
}

SWEEP_PRESETS = {
    "epsilon_scan": {
        "base": {
            "model": {"variant": "custom", "H_S": [[0, 0, 0, 0], [0, 1, 0, 0], [0, 0, 2, 0], [0, 0, 0, 3]],
                      "H_A": [[0]], "V": [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]},
            "beta": 1.0,
            "tau": 0.1,
        },
        "narrow_band": {"energies": [0, 1, 2, 3], "center": 1.0, "offsets": [1.0, 1 / 3, -1 / 3, -1.0]},
        "axis": "epsilon",
        "values": [float(x) for x in np.logspace(-1, -3, 9)],
    },
    "two_qubit_h_scan": {
        "base": "two_qubit_default",
        "axis": "h",
        "values": [0.1, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75],
    },
}


def _num(d: dict, key: str, where: str, default=None, required=False) -> float:
    if key not in d:
        if required:
            raise ConfigError(f"{where}.{key}: missing required field")
        return default
    try:
        x = float(d[key])
    except (TypeError, ValueError):
        raise ConfigError(f"{where}.{key}: expected a number, got {d[key]!r}") from None
    if not math.isfinite(x):
        raise ConfigError(f"{where}.{key}: must be finite")
    return x


def _matrix(d: dict, key: str, where: str) -> np.ndarray:
    if key not in d:
        raise ConfigError(f"{where}.{key}: missing required field")
    try:
        return parse_matrix(d[key])
    except QBattError as exc:
        raise ConfigError(f"{where}.{key}: {exc}") from None


def parse_model(d: Any, where: str = "model") -> ModelSpec:
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object")
    variant = d.get("variant")
    try:
        if variant == "single_qubit":
            return ModelSpec("single_qubit", h=_num(d, "h", where, required=True), a=_num(d, "a", where, required=True))
        if variant == "two_qubit":
            return ModelSpec("two_qubit", h=_num(d, "h", where, required=True), J=_num(d, "J", where, required=True))
        if variant == "custom":
            return ModelSpec(
                "custom",
                H_S=_matrix(d, "H_S", where),
                H_A=_matrix(d, "H_A", where),
                V=_matrix(d, "V", where),
            )
    except ConfigError:
        raise
    except QBattError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    raise ConfigError(f"{where}.variant: expected single_qubit, two_qubit or custom, got {variant!r}")


def parse_scenario(d: Any, name: Optional[str] = None) -> ScenarioConfig:
    if isinstance(d, str):
        if d not in PRESETS:
            raise ConfigError(f"unknown preset {d!r}; available: {sorted(PRESETS)}")
        name, d = d, PRESETS[d]
    if not isinstance(d, dict):
        raise ConfigError("scenario: expected an object")
    known = {"model", "beta", "tau", "gap", "initial_state", "steps", "conv_tol", "outputs", "name"}
    extra = set(d) - known
    if extra:
        raise ConfigError(f"scenario: unknown field(s) {sorted(extra)}")
    model = parse_model(d.get("model"))
    init = d.get("initial_state", "gibbs_HS")
    if isinstance(init, dict):
        if "matrix" not in init:
            raise ConfigError("initial_state: custom state needs a 'matrix' field")
        try:
            init = parse_matrix(init["matrix"])
        except QBattError as exc:
            raise ConfigError(f"initial_state.matrix: {exc}") from None
    elif init not in INITIAL_STATES:
        raise ConfigError(f"initial_state: expected one of {INITIAL_STATES} or {{'matrix': ...}}, got {init!r}")
    steps = d.get("steps", 1_000_000)
    if not isinstance(steps, int) or isinstance(steps, bool):
        raise ConfigError(f"steps: expected an integer, got {steps!r}")
    return ScenarioConfig(
        model=model,
        beta=_num(d, "beta", "scenario", required=True),
        tau=_num(d, "tau", "scenario", required=True),
        gap=_num(d, "gap", "scenario", default=0.0),
        initial_state=init,
        steps=steps,
        conv_tol=_num(d, "conv_tol", "scenario", default=1e-12),
        name=d.get("name", name),
        outputs=dict(d.get("outputs", {})),
    )


def parse_sweep(d: Any, name: Optional[str] = None) -> SweepConfig:
    if isinstance(d, str):
        if d not in SWEEP_PRESETS:
            raise ConfigError(f"unknown sweep preset {d!r}; available: {sorted(SWEEP_PRESETS)}")
        name, d = d, SWEEP_PRESETS[d]
    if not isinstance(d, dict):
        raise ConfigError("sweep: expected an object")
    for key in ("base", "axis", "values"):
        if key not in d:
            raise ConfigError(f"sweep.{key}: missing required field")
    axis = d["axis"]
    if axis not in SWEEP_AXES:
        raise ConfigError(f"sweep.axis: expected one of {SWEEP_AXES}, got {axis!r}")
    values = d["values"]
    if not isinstance(values, list) or not values:
        raise ConfigError("sweep.values: expected a non-empty list")
    try:
        values = [float(v) for v in values]
    except (TypeError, ValueError):
        raise ConfigError("sweep.values: entries must be numbers") from None
    if not all(math.isfinite(v) for v in values):
        raise ConfigError("sweep.values: entries must be finite")
    base = parse_scenario(d["base"])
    nb = None
    if "narrow_band" in d:
        raw = d["narrow_band"]
        try:
            nb = NarrowBand([float(x) for x in raw["energies"]], float(raw["center"]), [float(x) for x in raw["offsets"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"sweep.narrow_band: {exc}") from None
        if len(nb.offsets) != len(nb.energies):
            raise ConfigError("sweep.narrow_band: offsets and energies differ in length")
    if axis == "epsilon" and nb is None:
        raise ConfigError("sweep.axis: epsilon sweeps need a narrow_band block")
    variant = base.model.variant
    allowed = {"h": ("single_qubit", "two_qubit"), "J": ("two_qubit",), "a": ("single_qubit",)}
    if axis in allowed and variant not in allowed[axis]:
        raise ConfigError(f"sweep.axis: {axis!r} does not apply to model variant {variant!r}")
    return SweepConfig(base, axis, values, nb, d.get("name", name))


def with_value(cfg: ScenarioConfig, axis: str, value: float) -> ScenarioConfig:
    """Copy of ``cfg`` with one parameter replaced."""
    new = copy.deepcopy(cfg)
    if axis in ("beta", "tau"):
        setattr(new, axis, value)
    elif axis in ("h", "J", "a"):
        m = cfg.model
        try:
            new.model = ModelSpec(m.variant, **{"h": m.h, "J": m.J, "a": m.a, axis: value})
        except QBattError as exc:
            raise ConfigError(f"sweep value {axis}={value!r}: {exc}") from None
    else:
        raise ConfigError(f"axis {axis!r} is not a scenario parameter")
    return new


def load_json(path: str | Path) -> Any:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"{p}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def initial_state(cfg: ScenarioConfig, model: CollisionModel, pi: Optional[np.ndarray] = None) -> np.ndarray:
    """Resolve ``cfg.initial_state`` to a density matrix."""
    init = cfg.initial_state
    if isinstance(init, np.ndarray):
        try:
            return as_density(init, "initial_state")
        except QBattError as exc:
            raise ConfigError(f"initial_state.matrix: {exc}") from None
    if init == "gibbs_HS":
        return gibbs(model.H_S, model.beta)
    if init == "gibbs_minus_HS":
        return gibbs(-model.H_S, model.beta)
    if init == "maximally_mixed":
        return np.eye(model.dS, dtype=complex) / model.dS
    if init == "passive_of_pi":
        from .ergotropy import ergotropy

        if pi is None:
            from .collision import fixed_point

            pi = fixed_point(model)
        return ergotropy(pi, model.H_S).passive_state
    raise ConfigError(f"initial_state: unsupported value {init!r}")
