"""Command-line surface: entropy, pressure, dim, exceptional, sweep, verify.

Configs are line-based ``key: value`` text with an explicit schema
version, so every emitted figure or table can be replayed from its
config and seed.  Reports are written as deterministic JSON (plus a CSV
flattening for plotting); timestamps go to a separate .meta.json side
channel so reruns stay byte-identical.

Exit codes: 0 success, 1 a verdict was violated or a criterion failed,
2 configuration error (reported with file and line).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from .exceptional import (
    DEFAULT_TOLERANCES,
    exceptional_report,
    report_to_json,
    reports_to_csv,
    sweep_depth,
    toral_exceptional_report,
)
from .fractal import box_dimension
from .symbolic import (
    EMPTY_ENTROPY,
    ForbiddenFamily,
    Word,
    build_survivor,
    full_shift,
    sft_entropy,
)
from .systems import (
    AffineHorseshoe,
    ModelFormatError,
    TargetSet,
    ToralAutomorphism,
    horseshoe_potentials,
    load_model,
    sample_invariant_set,
)
from .thermo import LocallyConstantPotential, bernoulli_measure, bowen_root, parry_measure, pressure
from .verify import config_path, format_table, rows_to_json, run_verify

__all__ = ["main", "ConfigError", "ExperimentConfig"]

OUTPUT_DIR_ENV = "EXCSETS_OUT"


class ConfigError(ValueError):
    """Configuration problem with a file:line prefix."""


@dataclass
class ExperimentConfig:
    """Parsed experiment configuration."""

    path: str
    schema: int
    seed: int = 0
    out: str | None = None
    model: AffineHorseshoe | ToralAutomorphism | None = None
    target: TargetSet | None = None
    depth: int | None = None
    depths: list[int] = field(default_factory=list)
    measure_spec: list[str] = field(default_factory=list)
    alphabet: int | None = None
    family: ForbiddenFamily | None = None
    potential: LocallyConstantPotential | None = None
    grid: int | None = None
    steps: int | None = None
    sample_depth: int | None = None
    scales: list[float] = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)


def _parse_lines(path: str) -> dict[str, tuple[str, int]]:
    entries: dict[str, tuple[str, int]] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}:0: cannot read config ({exc})") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key: value'")
        key, value = line.split(":", 1)
        key = key.strip()
        if key in entries:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        entries[key] = (value.strip(), lineno)
    return entries


def _want_int(path, entries, key, default=None):
    if key not in entries:
        return default
    value, lineno = entries[key]
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{path}:{lineno}: {key} must be an integer") from None


def _want_floats(path, entries, key):
    if key not in entries:
        return []
    value, lineno = entries[key]
    try:
        return [float(part) for part in value.split()]
    except ValueError:
        raise ConfigError(f"{path}:{lineno}: {key} must be a list of numbers") from None


def _parse_target(path, entries) -> TargetSet | None:
    if "target_kind" not in entries:
        return None
    kind, lineno = entries["target_kind"]
    if kind == "empty":
        return TargetSet(kind="empty")
    if kind == "points":
        values = _want_floats(path, entries, "target_points")
        if not values or len(values) % 2:
            raise ConfigError(f"{path}:{lineno}: target_points needs x y pairs")
        pts = tuple((values[i], values[i + 1]) for i in range(0, len(values), 2))
        return TargetSet(kind="points", points=pts)
    if kind == "cylinders":
        if "target_words" not in entries:
            raise ConfigError(f"{path}:{lineno}: target_words is required")
        text, words_line = entries["target_words"]
        try:
            words = tuple(Word.from_string(part) for part in text.split())
        except ValueError:
            raise ConfigError(f"{path}:{words_line}: bad cylinder words") from None
        return TargetSet(kind="cylinders", words=words)
    if kind == "ball":
        values = _want_floats(path, entries, "target_centers")
        if not values or len(values) % 2:
            raise ConfigError(f"{path}:{lineno}: target_centers needs x y pairs")
        centers = tuple((values[i], values[i + 1]) for i in range(0, len(values), 2))
        radius_text, radius_line = entries.get("target_radius", ("0", lineno))
        try:
            radius = float(radius_text)
        except ValueError:
            raise ConfigError(f"{path}:{radius_line}: bad radius") from None
        return TargetSet(kind="ball", centers=centers, radius=radius)
    raise ConfigError(f"{path}:{lineno}: unknown target kind {kind!r}")


def _parse_family(path, entries, alphabet) -> ForbiddenFamily | None:
    if "family" not in entries:
        return None
    text, lineno = entries["family"]
    if alphabet is None:
        raise ConfigError(f"{path}:{lineno}: family needs an alphabet key")
    try:
        return ForbiddenFamily.make(alphabet, text.split())
    except ValueError as exc:
        raise ConfigError(f"{path}:{lineno}: {exc}") from None


def _parse_potential(path, entries) -> LocallyConstantPotential | None:
    if "potential" not in entries:
        return None
    depth = _want_int(path, entries, "potential_depth", 1)
    text, lineno = entries["potential"]
    values = {}
    try:
        for item in text.split():
            block, value = item.split(":")
            values[Word.from_string(block)] = float(value)
        return LocallyConstantPotential(depth, values)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"{path}:{lineno}: bad potential table ({exc})") from None


KNOWN_CONFIG_KEYS = {
    "schema", "seed", "out", "alphabet", "depth", "grid", "steps",
    "sample_depth", "depths", "scales", "model", "family", "potential",
    "potential_depth", "measure", "target_kind", "target_points",
    "target_words", "target_centers", "target_radius",
}


def load_config(path: str) -> ExperimentConfig:
    entries = _parse_lines(path)
    for key, (_, lineno) in entries.items():
        if key not in KNOWN_CONFIG_KEYS and not key.startswith("tolerance_"):
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
    if "schema" not in entries:
        raise ConfigError(f"{path}:1: missing schema version")
    schema = _want_int(path, entries, "schema")
    if schema != 1:
        raise ConfigError(f"{path}:{entries['schema'][1]}: unsupported schema {schema}")
    config = ExperimentConfig(path=path, schema=schema)
    config.seed = _want_int(path, entries, "seed", 0)
    config.alphabet = _want_int(path, entries, "alphabet")
    config.depth = _want_int(path, entries, "depth")
    config.grid = _want_int(path, entries, "grid")
    config.steps = _want_int(path, entries, "steps")
    config.sample_depth = _want_int(path, entries, "sample_depth")
    depths_text = entries.get("depths")
    if depths_text is not None:
        try:
            config.depths = [int(p) for p in depths_text[0].split()]
        except ValueError:
            raise ConfigError(f"{path}:{depths_text[1]}: bad depths list") from None
    config.scales = _want_floats(path, entries, "scales")
    if "out" in entries:
        config.out = entries["out"][0]
    if "model" in entries:
        model_path, lineno = entries["model"]
        candidate = Path(path).parent / model_path
        if not candidate.exists():
            candidate = Path(model_path)
        if not candidate.exists():
            raise ConfigError(f"{path}:{lineno}: model file {model_path!r} not found")
        try:
            config.model = load_model(str(candidate))
        except ModelFormatError as exc:
            raise ConfigError(str(exc)) from None
    config.target = _parse_target(path, entries)
    config.family = _parse_family(path, entries, config.alphabet)
    config.potential = _parse_potential(path, entries)
    if "measure" in entries:
        config.measure_spec = entries["measure"][0].split()
    for key, (value, lineno) in entries.items():
        if key.startswith("tolerance_"):
            name = key[len("tolerance_"):]
            if name not in DEFAULT_TOLERANCES:
                raise ConfigError(f"{path}:{lineno}: unknown tolerance {name!r}")
            try:
                config.tolerances[name] = float(value)
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: bad tolerance value") from None
    return config


def _resolve_measure(config: ExperimentConfig, model: AffineHorseshoe):
    ambient = full_shift(model.branches)
    spec = config.measure_spec or ["bernoulli"] + ["%g" % (1.0 / model.branches)] * model.branches
    if spec[0] == "bernoulli":
        probabilities = [float(p) for p in spec[1:]]
        if len(probabilities) != model.branches:
            raise ConfigError(
                f"{config.path}:0: bernoulli measure needs {model.branches} probabilities")
        return bernoulli_measure(ambient, probabilities)
    if spec[0] == "parry":
        return parry_measure(ambient)
    raise ConfigError(f"{config.path}:0: unknown measure {spec[0]!r}")


def _tolerance_table(config: ExperimentConfig | None, args) -> dict:
    table = dict(DEFAULT_TOLERANCES)
    if config is not None:
        table.update(config.tolerances)
    if getattr(args, "tolerance_table", None):
        entries = _parse_lines(args.tolerance_table)
        for key, (value, lineno) in entries.items():
            if key not in DEFAULT_TOLERANCES:
                raise ConfigError(
                    f"{args.tolerance_table}:{lineno}: unknown tolerance {key!r}")
            try:
                table[key] = float(value)
            except ValueError:
                raise ConfigError(
                    f"{args.tolerance_table}:{lineno}: bad tolerance value") from None
    return table


def _output_dir(config: ExperimentConfig | None, args) -> Path:
    env = os.environ.get(OUTPUT_DIR_ENV)
    if env:
        directory = Path(env)
    elif getattr(args, "out", None):
        directory = Path(args.out)
    elif config is not None and config.out:
        directory = Path(config.out)
    else:
        directory = Path(".")
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def _write(directory: Path, name: str, content: str) -> Path:
    path = directory / name
    path.write_text(content)
    meta = {"written_at": time.strftime("%Y-%m-%dT%H:%M:%S"), "file": name}
    (directory / (name + ".meta.json")).write_text(json.dumps(meta, indent=2))
    return path


def _entropy_payload(config: ExperimentConfig) -> str:
    if config.alphabet is None:
        raise ConfigError(f"{config.path}:1: entropy needs an alphabet key")
    ambient = full_shift(config.alphabet)
    record = {
        "schema": 1,
        "seed": config.seed,
        "alphabet_size": config.alphabet,
        "ambient_entropy": sft_entropy(ambient),
    }
    if config.family is not None:
        survivor = build_survivor(config.family)
        entropy = sft_entropy(survivor.sft)
        record["family"] = sorted(str(w) for w in config.family.words)
        record["survivor_empty"] = survivor.empty
        record["survivor_entropy"] = "empty" if entropy == EMPTY_ENTROPY else entropy
    return json.dumps(record, indent=2)


def cmd_entropy(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
    payload = _entropy_payload(config)
    directory = _output_dir(config, args)
    path = _write(directory, "entropy.json", payload)
    print(payload)
    print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_pressure(args) -> int:
    config = load_config(args.config)
    if config.potential is None:
        raise ConfigError(f"{config.path}:1: pressure needs a potential table")
    if config.family is not None:
        sft = build_survivor(config.family).sft
    elif config.alphabet is not None:
        sft = full_shift(config.alphabet)
    else:
        raise ConfigError(f"{config.path}:1: pressure needs alphabet or family")
    value = pressure(sft, config.potential)
    record = {
        "schema": 1,
        "seed": config.seed,
        "pressure": value,
        "potential": config.potential.to_dict(),
    }
    payload = json.dumps(record, indent=2)
    directory = _output_dir(config, args)
    _write(directory, "pressure.json", payload)
    print(payload)
    return 0


def cmd_dim(args) -> int:
    config = load_config(args.config)
    model = config.model
    if not isinstance(model, AffineHorseshoe):
        raise ConfigError(f"{config.path}:1: dim needs a horseshoe model")
    ambient = full_shift(model.branches)
    phi_s, phi_u = horseshoe_potentials(model)
    d_s = bowen_root(ambient, phi_s)
    d_u = bowen_root(ambient, phi_u)
    record = {
        "schema": 1,
        "seed": config.seed,
        "model": model.describe(),
        "d_s": d_s,
        "d_u": d_u,
        "dimension": d_s + d_u,
    }
    if config.sample_depth:
        cloud = sample_invariant_set(model, config.sample_depth,
                                     max_points=1 << 21, seed=config.seed)
        ratio = 1.0 / max(model.expansion)
        scales = config.scales or [ratio ** k for k in range(2, 8)]
        estimate = box_dimension(cloud, scales)
        record["box_dimension"] = estimate.value
        record["box_stderr"] = estimate.stderr
    payload = json.dumps(record, indent=2)
    directory = _output_dir(config, args)
    _write(directory, "dim.json", payload)
    print(payload)
    return 0


def _resolve_config_arg(args) -> str:
    if getattr(args, "scenario", None):
        return config_path(args.scenario + ".cfg")
    if not args.config:
        raise ConfigError("<cli>:0: --config or --scenario is required")
    return args.config


def cmd_exceptional(args) -> int:
    config = load_config(_resolve_config_arg(args))
    if args.seed is not None:
        config.seed = args.seed
    tolerances = _tolerance_table(config, args)
    if config.target is None:
        raise ConfigError(f"{config.path}:1: exceptional needs a target")
    model = config.model
    if isinstance(model, ToralAutomorphism):
        report = toral_exceptional_report(
            model, config.target, grid=config.grid or 1024,
            steps=config.steps or 10, scales=config.scales or None,
            tolerances=tolerances, seed=config.seed)
    elif isinstance(model, AffineHorseshoe):
        if config.depth is None:
            raise ConfigError(f"{config.path}:1: exceptional needs a depth")
        measure = _resolve_measure(config, model)
        report = exceptional_report(model, config.target, config.depth,
                                    measure, tolerances=tolerances,
                                    seed=config.seed)
    else:
        raise ConfigError(f"{config.path}:1: exceptional needs a model")
    payload = report_to_json(report)
    directory = _output_dir(config, args)
    _write(directory, "exceptional.json", payload)
    _write(directory, "exceptional.csv", reports_to_csv([report]))
    print(payload)
    return 1 if report.any_violated else 0


def cmd_sweep(args) -> int:
    config = load_config(_resolve_config_arg(args))
    if args.seed is not None:
        config.seed = args.seed
    tolerances = _tolerance_table(config, args)
    model = config.model
    if not isinstance(model, AffineHorseshoe):
        raise ConfigError(f"{config.path}:1: sweep needs a horseshoe model")
    if config.target is None or not config.depths:
        raise ConfigError(f"{config.path}:1: sweep needs a target and depths")
    measure = _resolve_measure(config, model)
    reports = sweep_depth(model, config.target, config.depths, measure,
                          tolerances=tolerances, seed=config.seed)
    payload = "[\n" + ",\n".join(report_to_json(r) for r in reports) + "\n]\n"
    directory = _output_dir(config, args)
    _write(directory, "sweep.json", payload)
    _write(directory, "sweep.csv", reports_to_csv(reports))
    print(reports_to_csv(reports))
    return 1 if any(r.any_violated for r in reports) else 0


def cmd_verify(args) -> int:
    filters = None
    if args.filter:
        filters = [part for part in args.filter.split(",") if part]
    rows, all_pass = run_verify(filters=filters)
    print(format_table(rows))
    if args.out or os.environ.get(OUTPUT_DIR_ENV):
        directory = _output_dir(None, args)
        _write(directory, "verify.json", rows_to_json(rows))
    return 0 if all_pass else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="excsets",
        description="survivor subshifts, pressure, and dimension bounds "
                    "for orbit-avoiding sets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario=False):
        p.add_argument("--config", help="experiment config file")
        if scenario:
            p.add_argument("--scenario", help="name of a shipped scenario")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--tolerance-table", help="tolerance override file")

    p_entropy = sub.add_parser("entropy", help="survivor and ambient entropy")
    common(p_entropy)
    p_entropy.set_defaults(func=cmd_entropy)

    p_pressure = sub.add_parser("pressure", help="pressure of a potential")
    common(p_pressure)
    p_pressure.set_defaults(func=cmd_pressure)

    p_dim = sub.add_parser("dim", help="stable/unstable dimension roots")
    common(p_dim)
    p_dim.set_defaults(func=cmd_dim)

    p_exc = sub.add_parser("exceptional", help="run one exceptional-set report")
    common(p_exc, scenario=True)
    p_exc.set_defaults(func=cmd_exceptional)

    p_sweep = sub.add_parser("sweep", help="reports over increasing depths")
    common(p_sweep, scenario=True)
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the acceptance suite")
    p_verify.add_argument("--filter", help="comma list of criterion ids or groups")
    p_verify.add_argument("--out", help="output directory")
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ModelFormatError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
