"""JSON configuration for the command line: one document drives everything.

Schema (all sections except "spectrum"/"preset" and "params" are optional):

    {
      "spectrum": {
        "kappa": {"kind": "power_law", "coefficient": 1.0, "exponent": 2.0},
        "tau":   {"kind": "power_law", "coefficient": 1.0, "exponent": 2.0},
        "rho":   {"kind": "constant", "coefficient": 0.0},
        "nu":    {"kind": "constant", "coefficient": 1.0},
        "dimension": 1
      },
      // or:  "preset": "alg_ex1", "dimension": 1,
      "params": {"theta1": 1.0, "theta2": -0.5,
                 "theta1_box": [0.5, 2.0], "theta2_box": [-1.0, 1.0], "T": 1.0},
      "grid": {"n_steps": 4096},
      "experiment": {"N_list": [25, 50, 100, 200], "replicates": 200,
                     "seed": 20240901, "out": "results"},
      "check": {"k_range": [1, 1000], "theta_grid": 5}
    }

Generator kinds: power_law (coefficient, exponent), exp_law (coefficient,
rate), log_law (coefficient, exponent, shift), loglog_law (coefficient,
shift), constant (coefficient), explicit (values), signed_alternating
(inner).
"""
from __future__ import annotations

import json
from pathlib import Path

from .equations import preset as make_preset
from .simulate import TimeGrid
from .spectrum import (
    Constant,
    Explicit,
    ExpLaw,
    LogLaw,
    LogLogLaw,
    ModelParams,
    PowerLaw,
    SignedAlternating,
    SpectrumSpec,
)

__all__ = ["ConfigError", "load_config", "generator_from_config", "spectrum_from_config"]


class ConfigError(ValueError):
    """Invalid configuration; carries a human-readable location."""


_GEN_FIELDS = {
    "power_law": ("coefficient", "exponent"),
    "exp_law": ("coefficient", "rate"),
    "log_law": ("coefficient", "exponent", "shift"),
    "loglog_law": ("coefficient", "shift"),
    "constant": ("coefficient",),
    "explicit": ("values",),
    "signed_alternating": ("inner",),
}


def generator_from_config(node, where="generator"):
    if not isinstance(node, dict) or "kind" not in node:
        raise ConfigError(f"{where}: expected an object with a 'kind' tag")
    kind = node["kind"]
    if kind not in _GEN_FIELDS:
        raise ConfigError(f"{where}: unknown generator kind {kind!r}")
    extras = set(node) - set(_GEN_FIELDS[kind]) - {"kind"}
    if extras:
        raise ConfigError(f"{where}: unexpected fields {sorted(extras)} for {kind}")
    try:
        if kind == "power_law":
            return PowerLaw(float(node["coefficient"]), float(node["exponent"]))
        if kind == "exp_law":
            return ExpLaw(float(node["coefficient"]), float(node["rate"]))
        if kind == "log_law":
            return LogLaw(float(node["coefficient"]), float(node.get("exponent", 1.0)),
                          float(node.get("shift", 0.0)))
        if kind == "loglog_law":
            return LogLogLaw(float(node["coefficient"]), float(node.get("shift", 0.0)))
        if kind == "constant":
            return Constant(float(node["coefficient"]))
        if kind == "explicit":
            return Explicit([float(v) for v in node["values"]])
        return SignedAlternating(generator_from_config(node["inner"], where + ".inner"))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def spectrum_from_config(node, where="spectrum"):
    for name in ("kappa", "tau", "rho", "nu"):
        if name not in node:
            raise ConfigError(f"{where}: missing sequence {name!r}")
    gens = {name: generator_from_config(node[name], f"{where}.{name}") for name in
            ("kappa", "tau", "rho", "nu")}
    return SpectrumSpec(
        gens["kappa"], gens["tau"], gens["rho"], gens["nu"],
        dimension=int(node.get("dimension", 1)),
        k_max=int(node.get("k_max", 10 ** 6)),
    )


def _params_from_config(node, where="params"):
    try:
        return ModelParams(
            theta1=float(node["theta1"]),
            theta2=float(node["theta2"]),
            theta1_box=tuple(float(x) for x in node["theta1_box"]),
            theta2_box=tuple(float(x) for x in node["theta2_box"]),
            T=float(node.get("T", 1.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def load_config(path):
    """Parse a config file into spec/params/grid/experiment/check pieces."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")

    if "preset" in doc:
        kwargs = {}
        if "dimension" in doc:
            kwargs["d"] = int(doc["dimension"])
        if "params" in doc and "T" in doc["params"]:
            kwargs["T"] = float(doc["params"]["T"])
        try:
            spec, params = make_preset(doc["preset"], **kwargs)
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
        if "params" in doc:
            node = dict(doc["params"])
            node.setdefault("theta1", params.theta1)
            node.setdefault("theta2", params.theta2)
            node.setdefault("theta1_box", list(params.theta1_box))
            node.setdefault("theta2_box", list(params.theta2_box))
            node.setdefault("T", params.T)
            params = _params_from_config(node)
    elif "spectrum" in doc:
        spec = spectrum_from_config(doc["spectrum"])
        if "params" not in doc:
            raise ConfigError(f"{path}: 'params' section is required")
        params = _params_from_config(doc["params"])
    else:
        raise ConfigError(f"{path}: need either 'spectrum' or 'preset'")

    grid_node = doc.get("grid", {})
    grid = TimeGrid(params.T, int(grid_node.get("n_steps", 4096)))

    exp = doc.get("experiment", {})
    experiment = {
        "N_list": [int(n) for n in exp.get("N_list", [25, 50, 100, 200])],
        "replicates": int(exp.get("replicates", 100)),
        "seed": int(exp.get("seed", 0)),
        "out": exp.get("out", "results"),
    }
    check = doc.get("check", {})
    check_opts = {
        "k_range": tuple(int(x) for x in check.get("k_range", (1, 1000))),
        "theta_grid": int(check.get("theta_grid", 5)),
    }
    return {"spec": spec, "params": params, "grid": grid,
            "experiment": experiment, "check": check_opts, "raw": doc}
