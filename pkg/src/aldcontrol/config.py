"""Run configuration: schema, strict JSON parsing, and shipped presets.

A config document is JSON with the key paths

    plant.a, plant.b
    noise.components[].{weight, kind, tau, mu, sigma, mean, variance}
    hypotheses[].{tau, mu, sigma}
    trajectory.{kind, frequency_hz, amplitude, sample_period_s}
    run.{steps, seed, controller, feedback}
    estimator.{w0, p0_scale}
    controller.{eps_b, u_max, likelihood_sigma_scaling}

Unknown keys are rejected with the offending path.  Presets ``base`` and
``noise1``..``noise4`` ship with the package.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .controller import DEFAULT_EPS_B, DEFAULT_U_MAX
from .noise import AldParams, GaussianParams, MixtureComponent, NoiseModel
from .plant import TRAJECTORY_KINDS, ArxParams, TrajectorySpec

__all__ = [
    "ConfigError",
    "RunConfig",
    "CONTROLLER_KINDS",
    "FEEDBACK_KINDS",
    "PRESETS",
    "parse_controller",
    "load_config",
    "config_from_dict",
    "preset_config",
]

CONTROLLER_KINDS = ("ensemble", "single_ald", "rls", "oracle")
FEEDBACK_KINDS = ("output", "measurement")
PRESETS = ("base", "noise1", "noise2", "noise3", "noise4")

DEFAULT_STEPS = 1000
DEFAULT_P0_SCALE = 100.0
DEFAULT_W0_ENTRY = 0.1


class ConfigError(ValueError):
    """Configuration schema violation, tagged with the field path."""


def parse_controller(token: str) -> tuple[str, int]:
    """Split a controller token into (kind, subsystem index).

    Tokens: ``ensemble``, ``rls``, ``oracle``, ``single-ald:<i>``.
    """
    if token in ("ensemble", "rls", "oracle"):
        return token, 0
    if token.startswith("single-ald:"):
        try:
            index = int(token.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad single-ald index in controller token {token!r}") from None
        if index < 0:
            raise ConfigError(f"single-ald index must be nonnegative, got {index}")
        return "single_ald", index
    raise ConfigError(
        f"unknown controller {token!r}; expected ensemble, rls, oracle, or single-ald:<i>"
    )


@dataclass(frozen=True)
class RunConfig:
    """Everything one closed-loop episode needs, fully deterministic given ``seed``."""

    plant: ArxParams
    noise: NoiseModel
    hypotheses: tuple[AldParams, ...]
    trajectory: TrajectorySpec
    steps: int = DEFAULT_STEPS
    seed: int = 0
    controller: str = "ensemble"
    feedback: str = "output"
    w0: tuple[float, ...] | None = None
    p0_scale: float = DEFAULT_P0_SCALE
    eps_b: float = DEFAULT_EPS_B
    u_max: float = DEFAULT_U_MAX
    likelihood_sigma_scaling: bool = True

    def __post_init__(self) -> None:
        if self.steps < 2:
            raise ConfigError(f"run.steps must be at least 2, got {self.steps}")
        if self.feedback not in FEEDBACK_KINDS:
            raise ConfigError(f"run.feedback must be one of {FEEDBACK_KINDS}, got {self.feedback!r}")
        kind, index = parse_controller(self.controller)
        if kind in ("ensemble", "single_ald") and len(self.hypotheses) == 0:
            raise ConfigError(f"controller {self.controller!r} requires at least one hypothesis")
        if kind == "single_ald" and index >= len(self.hypotheses):
            raise ConfigError(
                f"single-ald index {index} out of range for {len(self.hypotheses)} hypotheses"
            )
        if self.w0 is not None and len(self.w0) != self.plant.d:
            raise ConfigError(
                f"estimator.w0 must have length {self.plant.d}, got {len(self.w0)}"
            )
        if not (math.isfinite(self.p0_scale) and self.p0_scale > 0.0):
            raise ConfigError("estimator.p0_scale must be positive")
        if not (math.isfinite(self.eps_b) and self.eps_b > 0.0):
            raise ConfigError("controller.eps_b must be positive")
        if not (math.isfinite(self.u_max) and self.u_max > 0.0):
            raise ConfigError("controller.u_max must be positive")

    def initial_w(self) -> np.ndarray:
        if self.w0 is None:
            return np.full(self.plant.d, DEFAULT_W0_ENTRY)
        return np.array(self.w0, dtype=float)

    def initial_P(self) -> np.ndarray:
        return self.p0_scale * np.eye(self.plant.d)


def _expect_mapping(obj, path: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected a mapping")
    return obj


def _reject_unknown(obj: dict, allowed: set[str], path: str) -> None:
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}: unknown key")


def _number(obj: dict, key: str, path: str, default=None) -> float:
    if key not in obj:
        if default is None:
            raise ConfigError(f"{path}.{key}: missing required key")
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number")
    return float(value)


def _vector(obj: dict, key: str, path: str) -> list[float]:
    if key not in obj:
        raise ConfigError(f"{path}.{key}: missing required key")
    value = obj[key]
    if not isinstance(value, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise ConfigError(f"{path}.{key}: expected a list of numbers")
    return [float(v) for v in value]


def _ald_params(obj: dict, path: str) -> AldParams:
    _reject_unknown(obj, {"tau", "mu", "sigma"}, path)
    try:
        return AldParams(
            _number(obj, "tau", path), _number(obj, "mu", path), _number(obj, "sigma", path)
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _component(obj: dict, path: str) -> MixtureComponent:
    _reject_unknown(obj, {"weight", "kind", "tau", "mu", "sigma", "mean", "variance"}, path)
    weight = _number(obj, "weight", path)
    kind = obj.get("kind")
    try:
        if kind == "ald":
            for bad in ("mean", "variance"):
                if bad in obj:
                    raise ConfigError(f"{path}.{bad}: not valid for an ald component")
            dist = AldParams(
                _number(obj, "tau", path), _number(obj, "mu", path), _number(obj, "sigma", path)
            )
        elif kind == "gaussian":
            for bad in ("tau", "mu", "sigma"):
                if bad in obj:
                    raise ConfigError(f"{path}.{bad}: not valid for a gaussian component")
            dist = GaussianParams(_number(obj, "mean", path), _number(obj, "variance", path))
        else:
            raise ConfigError(f"{path}.kind: expected 'ald' or 'gaussian', got {kind!r}")
        return MixtureComponent(weight, dist)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def config_from_dict(doc: dict, source: str = "config") -> RunConfig:
    """Validate a parsed document and build a :class:`RunConfig`."""
    doc = _expect_mapping(doc, source)
    _reject_unknown(
        doc, {"plant", "noise", "hypotheses", "trajectory", "run", "estimator", "controller"}, source
    )

    if "plant" not in doc:
        raise ConfigError(f"{source}.plant: missing required key")
    plant_doc = _expect_mapping(doc["plant"], f"{source}.plant")
    _reject_unknown(plant_doc, {"a", "b"}, f"{source}.plant")
    try:
        plant = ArxParams(
            np.array(_vector(plant_doc, "a", f"{source}.plant")),
            np.array(_vector(plant_doc, "b", f"{source}.plant")),
        )
    except ValueError as exc:
        raise ConfigError(f"{source}.plant: {exc}") from None

    if "noise" not in doc:
        raise ConfigError(f"{source}.noise: missing required key")
    noise_doc = _expect_mapping(doc["noise"], f"{source}.noise")
    _reject_unknown(noise_doc, {"components"}, f"{source}.noise")
    comps = noise_doc.get("components")
    if not isinstance(comps, list) or len(comps) == 0:
        raise ConfigError(f"{source}.noise.components: expected a non-empty list")
    components = tuple(
        _component(_expect_mapping(c, f"{source}.noise.components[{i}]"), f"{source}.noise.components[{i}]")
        for i, c in enumerate(comps)
    )
    try:
        noise = NoiseModel(components)
    except ValueError as exc:
        raise ConfigError(f"{source}.noise: {exc}") from None

    hyp_doc = doc.get("hypotheses", [])
    if not isinstance(hyp_doc, list):
        raise ConfigError(f"{source}.hypotheses: expected a list")
    hypotheses = tuple(
        _ald_params(_expect_mapping(h, f"{source}.hypotheses[{i}]"), f"{source}.hypotheses[{i}]")
        for i, h in enumerate(hyp_doc)
    )

    traj_doc = _expect_mapping(doc.get("trajectory", {}), f"{source}.trajectory")
    _reject_unknown(
        traj_doc, {"kind", "frequency_hz", "amplitude", "sample_period_s"}, f"{source}.trajectory"
    )
    kind = traj_doc.get("kind", "sine")
    if kind not in TRAJECTORY_KINDS:
        raise ConfigError(
            f"{source}.trajectory.kind: expected one of {TRAJECTORY_KINDS}, got {kind!r}"
        )
    try:
        trajectory = TrajectorySpec(
            kind,
            _number(traj_doc, "frequency_hz", f"{source}.trajectory", 0.01),
            _number(traj_doc, "amplitude", f"{source}.trajectory", 1.0),
            _number(traj_doc, "sample_period_s", f"{source}.trajectory", 1.0),
        )
    except ValueError as exc:
        raise ConfigError(f"{source}.trajectory: {exc}") from None

    run_doc = _expect_mapping(doc.get("run", {}), f"{source}.run")
    _reject_unknown(run_doc, {"steps", "seed", "controller", "feedback"}, f"{source}.run")
    steps = run_doc.get("steps", DEFAULT_STEPS)
    if isinstance(steps, bool) or not isinstance(steps, int):
        raise ConfigError(f"{source}.run.steps: expected an integer")
    seed = run_doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"{source}.run.seed: expected an integer")
    controller_token = run_doc.get("controller", "ensemble")
    if not isinstance(controller_token, str):
        raise ConfigError(f"{source}.run.controller: expected a string")
    feedback = run_doc.get("feedback", "output")
    if feedback not in FEEDBACK_KINDS:
        raise ConfigError(
            f"{source}.run.feedback: expected one of {FEEDBACK_KINDS}, got {feedback!r}"
        )

    est_doc = _expect_mapping(doc.get("estimator", {}), f"{source}.estimator")
    _reject_unknown(est_doc, {"w0", "p0_scale"}, f"{source}.estimator")
    w0 = tuple(_vector(est_doc, "w0", f"{source}.estimator")) if "w0" in est_doc else None
    p0_scale = _number(est_doc, "p0_scale", f"{source}.estimator", DEFAULT_P0_SCALE)

    ctl_doc = _expect_mapping(doc.get("controller", {}), f"{source}.controller")
    _reject_unknown(ctl_doc, {"eps_b", "u_max", "likelihood_sigma_scaling"}, f"{source}.controller")
    eps_b = _number(ctl_doc, "eps_b", f"{source}.controller", DEFAULT_EPS_B)
    u_max = _number(ctl_doc, "u_max", f"{source}.controller", DEFAULT_U_MAX)
    sigma_scaling = ctl_doc.get("likelihood_sigma_scaling", True)
    if not isinstance(sigma_scaling, bool):
        raise ConfigError(f"{source}.controller.likelihood_sigma_scaling: expected a boolean")

    try:
        return RunConfig(
            plant=plant,
            noise=noise,
            hypotheses=hypotheses,
            trajectory=trajectory,
            steps=steps,
            seed=seed,
            controller=controller_token,
            feedback=feedback,
            w0=w0,
            p0_scale=p0_scale,
            eps_b=eps_b,
            u_max=u_max,
            likelihood_sigma_scaling=sigma_scaling,
        )
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path) -> RunConfig:
    """Load and validate a JSON config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"{path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return config_from_dict(doc, str(path))


def preset_config(name: str) -> RunConfig:
    """Load one of the shipped presets (``base``, ``noise1`` .. ``noise4``)."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; expected one of {PRESETS}")
    text = resources.files("aldcontrol").joinpath("presets", f"{name}.json").read_text()
    return config_from_dict(json.loads(text), f"preset:{name}")
