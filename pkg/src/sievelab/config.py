"""Run configuration: JSON documents validated against a fixed schema."""
from __future__ import annotations

import copy
import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

__all__ = ["ConfigError", "RunConfig", "DEFAULTS", "parse_config", "config_from_dict", "apply_env"]


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "dimension": 2,
    "omega": {"L": 1.0, "h_minus": 0.5, "h_plus": 0.5},
    "topology": "interface",
    "kernel": {"kind": "constant", "value": 1.0},
    "d_law": {"c": 1.0, "p": 3.0},
    "eps": [0.25, 0.125, 0.0625],
    "mesh": {"h0": 0.03125, "grading_rings": 3, "min_angle": 15.0, "edges_per_hole": 4,
             "passage_layers": 8, "aspect_cap": 500.0, "full_h0": 0.25, "quad_points": 2},
    "model": "reduced",
    "source": "sign",
    "eigen": {"k": 5, "tol": 1e-7, "maxit": 400},
    "linear": {"tol": 1e-10, "maxit": 20000},
    "heat": {"T": 0.5, "steps": 128, "theta": 1.0, "samples": 16},
    "threads": 1,
    "seed": 0,
    "output_dir": "sievelab-out",
    "hole_scale": 1.0,
    "timings": False,
}

_UNHASHED = ("output_dir", "threads")

_KERNEL_KEYS = {
    "constant": {"kind", "value"},
    "gaussian": {"kind", "amplitude", "scale"},
    "separable": {"kind", "base", "amplitude", "omega"},
    "tabulated": {"kind", "path", "table"},
}


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration; ``data`` has every key of :data:`DEFAULTS`."""

    data: dict

    def __getitem__(self, key):
        return self.data[key]

    @property
    def hash(self) -> str:
        """Digest of the settings that can change results (not paths or thread counts)."""
        body = {k: v for k, v in self.data.items() if k not in _UNHASHED}
        text = json.dumps(body, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:12]

    def replace(self, **changes) -> "RunConfig":
        d = copy.deepcopy(self.data)
        d.update(changes)
        return config_from_dict(d, fill=False)


def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown configuration key '{where}'")
        if key == "kernel":
            if isinstance(val, str):
                val = {"kind": val}
            if not isinstance(val, dict):
                raise ConfigError("'kernel' must be an object or a kind name")
            kind = val.get("kind", "constant")
            allowed = _KERNEL_KEYS.get(kind)
            if allowed is None:
                raise ConfigError(f"unknown kernel kind '{kind}'")
            extra = set(val) - allowed
            if extra:
                raise ConfigError(f"unknown configuration key 'kernel.{sorted(extra)[0]}'")
            out[key] = dict(val, kind=kind)
        elif isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"'{where}' must be an object")
            out[key] = _merge(base[key], val, where + ".")
        else:
            out[key] = val
    return out


def _check(d: dict) -> None:
    n = d["dimension"]
    if n not in (2, 3):
        raise ConfigError("dimension must be 2 or 3")
    if d["topology"] not in ("interface", "boundary"):
        raise ConfigError("topology must be 'interface' or 'boundary'")
    if d["model"] not in ("reduced", "full"):
        raise ConfigError("model must be 'reduced' or 'full'")
    eps = d["eps"]
    if not isinstance(eps, list) or not eps or any(not (0 < float(e) < 1) for e in eps):
        raise ConfigError("eps must be a non-empty list of values in (0, 1)")
    if any(float(b) >= float(a) for a, b in zip(eps, eps[1:])):
        raise ConfigError("eps must be strictly decreasing")
    c, p = float(d["d_law"]["c"]), float(d["d_law"]["p"])
    if c <= 0:
        raise ConfigError("d_law.c must be positive")
    if p <= 2:
        raise ConfigError(f"d_law.p = {p:g} <= 2 gives d_eps eps^-2 -/-> 0: violates d-law-5+")
    if n >= 3 and p * (n - 2) >= 2 * (n - 1):
        raise ConfigError(f"d_law.p = {p:g} gives eps^(2(n-1)) d_eps^(2-n) -/-> 0: violates d-law-4+")
    om = d["omega"]
    if min(om["L"], om["h_minus"], om["h_plus"]) <= 0:
        raise ConfigError("omega extents must be positive")
    m = d["mesh"]
    if m["h0"] <= 0 or m["full_h0"] <= 0 or m["passage_layers"] < 1 or m["edges_per_hole"] < 1:
        raise ConfigError("mesh sizes must be positive")
    if m["quad_points"] not in (1, 2, 3):
        raise ConfigError("mesh.quad_points must be 1, 2 or 3")
    if not 1 <= int(d["eigen"]["k"]) <= 8:
        raise ConfigError("eigen.k must lie in 1..8")
    if d["heat"]["theta"] not in (1, 1.0, 0.5):
        raise ConfigError("heat.theta must be 1 or 0.5")
    if d["heat"]["T"] <= 0 or d["heat"]["steps"] < 1 or d["heat"]["samples"] < 2:
        raise ConfigError("heat needs T > 0, steps >= 1 and samples >= 2")
    if int(d["threads"]) < 1:
        raise ConfigError("threads must be at least 1")
    if d["source"] not in ("one", "sign", "x1sq"):
        raise ConfigError("source must be 'one', 'sign' or 'x1sq'")
    if d["hole_scale"] <= 0:
        raise ConfigError("hole_scale must be positive")


def config_from_dict(doc: dict, fill: bool = True) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    base = copy.deepcopy(DEFAULTS)
    if fill and doc.get("dimension", 2) == 3 and "d_law" not in doc:
        base["d_law"]["p"] = 2.5
    if fill and doc.get("topology") == "boundary" and "source" not in doc:
        base["source"] = "x1sq"
    d = _merge(base, doc)
    d["eps"] = [float(e) for e in d["eps"]] if isinstance(d["eps"], list) else d["eps"]
    _check(d)
    return RunConfig(d)


def parse_config(path) -> RunConfig:
    """Read a JSON config; an empty file yields the defaults."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not text.strip():
        return config_from_dict({})
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed configuration: {exc}") from exc
    return config_from_dict(doc)


def apply_env(cfg: RunConfig, environ=None) -> RunConfig:
    """Apply ``SIEVELAB_THREADS`` and ``SIEVELAB_OUTPUT_DIR`` overrides."""
    env = os.environ if environ is None else environ
    changes = {}
    if env.get("SIEVELAB_THREADS"):
        try:
            changes["threads"] = int(env["SIEVELAB_THREADS"])
        except ValueError as exc:
            raise ConfigError("SIEVELAB_THREADS must be an integer") from exc
    if env.get("SIEVELAB_OUTPUT_DIR"):
        changes["output_dir"] = env["SIEVELAB_OUTPUT_DIR"]
    return cfg.replace(**changes) if changes else cfg
