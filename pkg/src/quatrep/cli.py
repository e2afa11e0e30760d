"""Command-line harness: one subcommand per verification experiment.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage or
configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import yaml

from .experiments import EXPERIMENTS, ConfigError, Report, config_keys

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def load_config(path: str | None, experiment: str) -> dict:
    """Read a JSON or YAML mapping.

    A section named after the experiment, when present, is merged over the
    top-level keys; sections for other experiments are ignored.
    """
    if path is None:
        return {}
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text) if path.endswith(".json") else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must contain a mapping")
    cfg = {k: v for k, v in data.items() if k not in EXPERIMENTS and k != "out"}
    section = data.get(experiment)
    if section is not None:
        if not isinstance(section, dict):
            raise ConfigError(f"section {experiment!r} must be a mapping")
        cfg.update(section)
    return cfg


def write_report(rep: Report, out: Path) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / f"{rep.experiment}.json"]
    paths[0].write_text(rep.to_json(), encoding="utf-8")
    for name in sorted(rep.tables):
        p = out / f"{rep.experiment}-{name}.csv"
        p.write_text(rep.table_csv(name), encoding="utf-8")
        paths.append(p)
    return paths


def _summary(rep: Report) -> str:
    lines = []
    for c in rep.checks:
        status = "PASS" if c.passed else "FAIL"
        lines.append(f"{status} [{rep.experiment}] {c.name}: {c.value:.6g} {c.relation} {c.tol:.6g}  ({c.ref})")
    return "\n".join(lines)


def run(experiment: str, cfg: dict, out: Path) -> int:
    rep = EXPERIMENTS[experiment](cfg)
    write_report(rep, out)
    print(_summary(rep))
    return EXIT_OK if rep.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quatrep", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(EXPERIMENTS) + ["all"]:
        p = sub.add_parser(name, help="run every experiment" if name == "all" else f"run the {name} experiment")
        p.add_argument("--config", help="JSON or YAML config file")
        p.add_argument("--out", default="reports", help="report directory (default: reports)")
        p.add_argument("--seed", type=int)
        p.add_argument("--nodes", type=int)
        p.add_argument("--tol", type=float)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    names = list(EXPERIMENTS) if args.command == "all" else [args.command]
    worst = EXIT_OK
    for name in names:
        try:
            cfg = load_config(args.config, name)
            allowed = config_keys(name)
            for key in ("seed", "nodes", "tol"):
                val = getattr(args, key)
                if val is None:
                    continue
                if key not in allowed:
                    if args.command == "all":
                        continue
                    raise ConfigError(f"--{key} is not used by {name}")
                cfg[key] = val
            code = run(name, cfg, Path(args.out))
        except (ConfigError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
