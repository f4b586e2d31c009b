"""Run configuration: a small YAML schema mapping onto the solver types.

Schema (keys and nesting are normative):

    params: paper_defaults            # or a mapping of the seven constants;
                                      # a mapping may set use_paper_defaults
    mesh:
      n_s: 50                         # stent elements
      n_m: 25                         # media elements
    time:
      t_end: 1.0
      dt_m: 1.5494e-4                 # macro step
      substep_ratio: 1                # optional, default 1
      substep_domain: stent           # optional, stent|media
      cfl_safety: 0.3                 # optional, default 0.3
    scheme: monolithic                # monolithic | alg1 | alg2
    output:
      out_dir: out/run1
      snapshot_times: [0.0, 0.5, 1.0] # optional, default [0, t_end]
      record_every: 1                 # optional, default 1
    time_unit: 4320.0                 # optional, seconds per unit of t
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError
from .params import ModelParams, validate_params
from .stepping import DEFAULT_CFL_SAFETY, SUBSTEP_DOMAINS, VARIANTS, SchemeConfig


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    n_s: int
    n_m: int
    t_end: float
    dt_m: float
    variant: str
    out_dir: str
    substep_ratio: int = 1
    substep_domain: str = "stent"
    cfl_safety: float = DEFAULT_CFL_SAFETY
    snapshot_times: tuple[float, ...] = field(default=())
    record_every: int = 1
    time_unit: float | None = None

    def scheme_config(self) -> SchemeConfig:
        return SchemeConfig(
            variant=self.variant,
            dt_m=self.dt_m,
            t_end=self.t_end,
            substep_ratio=self.substep_ratio,
            cfl_safety=self.cfl_safety,
            substep_domain=self.substep_domain,
        )


def _need(tree: dict, path: str, kind, key_path: str):
    node = tree
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"{key_path or path}: missing required key")
        node = node[part]
    return _typed(node, kind, key_path or path)


def _typed(value, kind, key_path: str):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key_path}: expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key_path}: expected an integer, got {value!r}")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"{key_path}: expected a string, got {value!r}")
        return value
    raise AssertionError(kind)


def _optional(tree: dict, name: str, kind, default, key_path: str):
    if not isinstance(tree, dict) or name not in tree or tree[name] is None:
        return default
    return _typed(tree[name], kind, key_path)


def parse_config(path) -> RunConfig:
    """Load and validate a YAML run configuration."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        tree = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" (line {mark.line + 1}, column {mark.column + 1})" if mark else ""
        raise ConfigError(f"config parse failure{where}: {exc}") from None
    if not isinstance(tree, dict):
        raise ConfigError("config root must be a mapping")
    return config_from_dict(tree)


def config_from_dict(tree: dict) -> RunConfig:
    raw_params = tree.get("params")
    if raw_params == "paper_defaults":
        params = validate_params({}, use_paper_defaults=True)
    elif isinstance(raw_params, dict):
        raw = dict(raw_params)
        use_defaults = bool(raw.pop("use_paper_defaults", False))
        try:
            params = validate_params(raw, use_paper_defaults=use_defaults)
        except Exception as exc:
            raise ConfigError(f"params: {exc}") from None
    elif raw_params is None:
        raise ConfigError("params: missing required key")
    else:
        raise ConfigError(
            'params: expected "paper_defaults" or a mapping of values'
        )

    n_s = _need(tree, "mesh.n_s", int, "mesh.n_s")
    n_m = _need(tree, "mesh.n_m", int, "mesh.n_m")
    if n_s < 1 or n_m < 1:
        raise ConfigError("mesh.n_s and mesh.n_m must be at least 1")

    t_end = _need(tree, "time.t_end", float, "time.t_end")
    dt_m = _need(tree, "time.dt_m", float, "time.dt_m")
    time_tree = tree.get("time", {})
    substep_ratio = _optional(time_tree, "substep_ratio", int, 1,
                              "time.substep_ratio")
    substep_domain = _optional(time_tree, "substep_domain", str, "stent",
                               "time.substep_domain")
    cfl_safety = _optional(time_tree, "cfl_safety", float, DEFAULT_CFL_SAFETY,
                           "time.cfl_safety")
    if t_end < 0 or dt_m <= 0:
        raise ConfigError("time.t_end must be >= 0 and time.dt_m > 0")
    if substep_ratio < 1:
        raise ConfigError("time.substep_ratio must be at least 1")
    if substep_domain not in SUBSTEP_DOMAINS:
        raise ConfigError(
            f"time.substep_domain must be one of {SUBSTEP_DOMAINS}"
        )
    if not 0 < cfl_safety <= 1:
        raise ConfigError("time.cfl_safety must lie in (0, 1]")

    variant = _need(tree, "scheme", str, "scheme")
    if variant not in VARIANTS:
        raise ConfigError(f"scheme: must be one of {VARIANTS}, got {variant!r}")

    out_dir = _need(tree, "output.out_dir", str, "output.out_dir")
    out_tree = tree.get("output", {})
    record_every = _optional(out_tree, "record_every", int, 1,
                             "output.record_every")
    if record_every < 1:
        raise ConfigError("output.record_every must be at least 1")
    snaps = out_tree.get("snapshot_times") if isinstance(out_tree, dict) else None
    if snaps is None:
        snapshot_times = (0.0, t_end)
    else:
        if not isinstance(snaps, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in snaps
        ):
            raise ConfigError("output.snapshot_times: expected a list of numbers")
        snapshot_times = tuple(float(v) for v in snaps)
    tol = 1e-9 * max(1.0, t_end)
    if any(b < a for a, b in zip(snapshot_times, snapshot_times[1:])):
        raise ConfigError("output.snapshot_times must be sorted ascending")
    if any(ts < -tol or ts > t_end + tol for ts in snapshot_times):
        raise ConfigError(
            f"output.snapshot_times must lie within [0, {t_end}]"
        )

    time_unit = tree.get("time_unit")
    if time_unit is not None:
        time_unit = _typed(time_unit, float, "time_unit")
        if time_unit <= 0:
            raise ConfigError("time_unit must be positive")

    return RunConfig(
        params=params,
        n_s=n_s,
        n_m=n_m,
        t_end=t_end,
        dt_m=dt_m,
        variant=variant,
        out_dir=out_dir,
        substep_ratio=substep_ratio,
        substep_domain=substep_domain,
        cfl_safety=cfl_safety,
        snapshot_times=snapshot_times,
        record_every=record_every,
        time_unit=time_unit,
    )


def config_to_dict(cfg: RunConfig) -> dict:
    tree = {
        "params": {
            "delta": cfg.params.delta,
            "p_tilde": cfg.params.p_tilde,
            "pe": cfg.params.pe,
            "da": cfg.params.da,
            "k_part": cfg.params.k_part,
            "phi": cfg.params.phi,
            "l": cfg.params.l,
        },
        "mesh": {"n_s": cfg.n_s, "n_m": cfg.n_m},
        "time": {
            "t_end": cfg.t_end,
            "dt_m": cfg.dt_m,
            "substep_ratio": cfg.substep_ratio,
            "substep_domain": cfg.substep_domain,
            "cfl_safety": cfg.cfl_safety,
        },
        "scheme": cfg.variant,
        "output": {
            "out_dir": cfg.out_dir,
            "snapshot_times": list(cfg.snapshot_times),
            "record_every": cfg.record_every,
        },
    }
    if cfg.time_unit is not None:
        tree["time_unit"] = cfg.time_unit
    return tree


def dump_config(cfg: RunConfig, path) -> None:
    """Write a config echo that parse_config reads back to an equal value."""
    Path(path).write_text(
        yaml.safe_dump(config_to_dict(cfg), sort_keys=True)
    )
