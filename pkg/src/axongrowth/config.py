"""JSON experiment configuration with unit-suffixed keys.

Every key is optional; omitted values fall back to the reference parameter set.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .backstepping import N1_CONVENTIONS, ControllerGains, build_gain_artifacts, validate_gains
from .errors import ConfigError
from .model import PhysicalParams, derive_constants
from .solver import SCHEMES, SolverConfig
from .triggering import MODES, TriggerParams, compute_rho1, dwell_time

# json key -> dataclass attribute
PHYSICAL_KEYS = {
    "D_m2_per_s": "D",
    "a_m_per_s": "a",
    "g_per_s": "g",
    "r_g_m4_per_mol_s": "r_g",
    "r_g_tilde_per_s": "r_g_tilde",
    "c_inf_mol_per_m3": "c_inf",
    "l_c_m": "l_c",
    "l_s_m": "l_s",
    "l_0_m": "l_0",
    "c0_scale": "c0_scale",
    "gamma_bio": "gamma_bio",
}
GAIN_KEYS = {"k1": "k1", "k2": "k2", "epsilon": "epsilon", "n1_convention": "n1_convention"}
TRIGGER_KEYS = {
    "gamma": "gamma",
    "eta": "eta",
    "sigma": "sigma",
    "rho": "rho",
    "beta": "betas",
    "m0": "m0",
    "h_s": "h",
    "m_dynamics": "m_dynamics",
    "petc_force": "force_petc",
}
SOLVER_KEYS = {
    "n_grid": "n_grid",
    "dt_s": "dt",
    "t_final_s": "t_final",
    "scheme": "scheme",
    "l_cap_m": "l_cap",
    "output_stride": "output_stride",
}
EXPERIMENT_KEYS = ("modes", "output_dir", "output_stride", "deterministic")
SECTIONS = ("physical", "gains", "trigger", "solver", "experiment")


@dataclass(frozen=True)
class ExperimentConfig:
    physical: PhysicalParams = field(default_factory=PhysicalParams)
    gains: ControllerGains = field(default_factory=ControllerGains)
    trigger: TriggerParams = field(default_factory=TriggerParams)
    solver: SolverConfig = field(default_factory=SolverConfig)
    modes: tuple = MODES
    output_dir: str = "out"

    def to_dict(self):
        p, k, tr, s = self.physical, self.gains, self.trigger, self.solver
        return {
            "physical": {key: getattr(p, attr) for key, attr in PHYSICAL_KEYS.items()},
            "gains": {"k1": k.k1, "k2": k.k2, "epsilon": list(k.epsilon), "n1_convention": k.n1_convention},
            "trigger": {
                "gamma": tr.gamma, "eta": tr.eta, "sigma": tr.sigma, "rho": tr.rho,
                "beta": list(tr.betas), "m0": tr.m0, "h_s": tr.h, "m_dynamics": tr.m_dynamics,
                "petc_force": tr.force_petc, "rho1": tr.rho1,
            },
            "solver": {key: getattr(s, attr) for key, attr in SOLVER_KEYS.items()},
            "experiment": {"modes": list(self.modes), "output_dir": self.output_dir, "deterministic": True},
        }

    def fingerprint(self):
        return config_fingerprint(self.to_dict())


def config_fingerprint(resolved: dict) -> str:
    blob = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _number(section, key, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{section}.{key}", f"finite number expected, got {value!r}")
    return float(value)


def _read_section(raw, section, keymap, cast):
    block = raw.get(section, {})
    if not isinstance(block, dict):
        raise ConfigError(section, "object expected")
    out = {}
    for key, value in block.items():
        if key not in keymap:
            raise ConfigError(f"{section}.{key}", "unknown field")
        out[keymap[key]] = cast(section, key, value)
    return out


def _cast_gain(section, key, value):
    if key == "epsilon":
        if not isinstance(value, (list, tuple)) or len(value) != 2:
            raise ConfigError(f"{section}.{key}", "two-element list expected")
        return tuple(_number(section, key, v) for v in value)
    if key == "n1_convention":
        if value not in N1_CONVENTIONS:
            raise ConfigError(f"{section}.{key}", f"one of {N1_CONVENTIONS} expected")
        return value
    return _number(section, key, value)


def _cast_trigger(section, key, value):
    if key == "beta":
        if not isinstance(value, (list, tuple)) or len(value) != 5:
            raise ConfigError(f"{section}.{key}", "five-element list expected")
        return tuple(_number(section, key, v) for v in value)
    if key == "m_dynamics":
        if value not in ("u", "w"):
            raise ConfigError(f"{section}.{key}", "'u' or 'w' expected")
        return value
    if key == "petc_force":
        if not isinstance(value, bool):
            raise ConfigError(f"{section}.{key}", "boolean expected")
        return value
    return _number(section, key, value)


def _cast_solver(section, key, value):
    if key in ("n_grid", "output_stride"):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{section}.{key}", "integer expected")
        return value
    if key == "scheme":
        if value not in SCHEMES:
            raise ConfigError(f"{section}.{key}", f"one of {SCHEMES} expected")
        return value
    return _number(section, key, value)


def _as_config_error(section, exc):
    # messages from the owning modules start with "<section>.<field> ..."
    msg = str(exc)
    head = msg.split(" ", 1)[0]
    path = head if head.startswith(section + ".") else section
    return ConfigError(path, msg)


def build_config(raw: dict | None = None, *, force_h=False) -> ExperimentConfig:
    """Parse, default and validate a configuration mapping."""
    raw = {} if raw is None else raw
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "JSON object expected")
    for section in raw:
        if section not in SECTIONS:
            raise ConfigError(section, "unknown section")

    phys = PhysicalParams(**_read_section(raw, "physical", PHYSICAL_KEYS, _number))
    try:
        phys.validate()
    except ValueError as exc:
        raise ConfigError("physical", str(exc)) from None
    gains = ControllerGains(**_read_section(raw, "gains", GAIN_KEYS, _cast_gain))
    trig = TriggerParams(**_read_section(raw, "trigger", TRIGGER_KEYS, _cast_trigger))
    solver_fields = _read_section(raw, "solver", SOLVER_KEYS, _cast_solver)

    exp = raw.get("experiment", {})
    if not isinstance(exp, dict):
        raise ConfigError("experiment", "object expected")
    for key in exp:
        if key not in EXPERIMENT_KEYS:
            raise ConfigError(f"experiment.{key}", "unknown field")
    modes = exp.get("modes", list(MODES))
    if isinstance(modes, str):
        modes = [modes]
    if not modes or any(mode not in MODES for mode in modes):
        raise ConfigError("experiment.modes", f"non-empty subset of {MODES} expected")
    if "output_stride" in exp:
        stride = _cast_solver("experiment", "output_stride", exp["output_stride"])
        if solver_fields.get("output_stride", stride) != stride:
            raise ConfigError("experiment.output_stride", "conflicts with solver.output_stride")
        solver_fields["output_stride"] = stride
    output_dir = exp.get("output_dir", "out")
    if not isinstance(output_dir, str):
        raise ConfigError("experiment.output_dir", "string expected")
    solver = SolverConfig(**solver_fields)
    try:
        solver.validate(phys)
    except ValueError as exc:
        raise _as_config_error("solver", exc) from None

    dc = derive_constants(phys)
    report = validate_gains(gains, dc)
    if not report.k1_condition:
        raise ConfigError("gains.k1", "k1 > a1_tilde / beta violated")
    if not report.k2_condition:
        raise ConfigError("gains.k2", "k2 > a3_tilde / beta violated")
    if not report.spectral:
        raise ConfigError("gains", "A1 + B K^T is not Hurwitz")

    artifacts = build_gain_artifacts(gains, dc, phys)
    trig = replace(trig, rho1=compute_rho1(artifacts, dc))
    try:
        trig.validate()
    except ValueError as exc:
        raise _as_config_error("trigger", exc) from None
    tau = dwell_time(trig).tau_min
    if trig.h > tau and not force_h:
        raise ConfigError("trigger.h_s", f"0 < h <= tau violated: h={trig.h:.6g} s, tau={tau:.6g} s")
    ratio = trig.h / solver.dt
    if abs(ratio - round(ratio)) > 1e-9 * ratio or round(ratio) < 1:
        raise ConfigError("trigger.h_s", "h must be a positive integer multiple of solver.dt_s")
    if "cetc" in modes and solver.dt > tau / 5.0:
        raise ConfigError("solver.dt_s", f"dt <= tau/5 = {tau / 5.0:.6g} s required for continuous-time triggering")

    return ExperimentConfig(physical=phys, gains=gains, trigger=trig, solver=solver, modes=tuple(modes),
                            output_dir=output_dir)


def load_config(path, *, force_h=False, echo_dir=None) -> ExperimentConfig:
    """Read a JSON file (an empty file means all defaults) and validate it.

    When ``echo_dir`` is given the resolved configuration is written there as
    ``resolved_config.json``.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc.strerror}") from None
    try:
        raw = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON: {exc}") from None
    cfg = build_config(raw, force_h=force_h)
    if echo_dir is not None:
        write_resolved(cfg, echo_dir)
    return cfg


def write_resolved(cfg: ExperimentConfig, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    target = out / "resolved_config.json"
    target.write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
    return target


def with_override(cfg: ExperimentConfig, param_path: str, value, *, force_h=False) -> ExperimentConfig:
    """Copy of ``cfg`` with one dotted JSON path (e.g. ``trigger.sigma``) replaced, revalidated."""
    raw = cfg.to_dict()
    raw["trigger"].pop("rho1")
    raw["experiment"].pop("deterministic")
    section, _, key = param_path.partition(".")
    if section not in raw or not key:
        raise ConfigError(param_path, "expected <section>.<field>")
    raw[section][key] = value
    return build_config(raw, force_h=force_h)
