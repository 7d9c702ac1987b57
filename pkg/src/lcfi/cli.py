"""Command-line entry point: ``lcfi run <config>`` and ``lcfi list``.

Exit codes: 0 success, 2 configuration or geometry error, 3 numerical
tolerance failure.  All outputs are computed before anything is written, so a
failed run leaves no files behind.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

from . import __version__
from .config import load_config
from .errors import ConfigError, GeometryError, QuadratureError, SingularityError, StepInstabilityError
from .experiments import PROFILES, RUNNERS, SCHEMAS, default_config_text, list_experiments, quadrature_for

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "identifier"):
        return obj.identifier
    if hasattr(obj, "item"):
        obj = obj.item()
    if isinstance(obj, complex):
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    if isinstance(obj, float) and not math.isfinite(obj):
        # strict JSON has no inf/nan; an exact residual gives an infinite observed order
        return None
    return obj


def run(config_path, out_dir=None, seed=None, profile="accurate", stream=None, err=None) -> int:
    stream = sys.stdout if stream is None else stream
    err = sys.stderr if err is None else err
    try:
        text = Path(config_path).read_text()
    except OSError as exc:
        print(f"error: cannot read {config_path}: {exc.strerror}", file=err)
        return EXIT_CONFIG
    try:
        cfg = load_config(text, SCHEMAS)
    except ConfigError as exc:
        print(f"error: {config_path}: {exc}", file=err)
        return EXIT_CONFIG
    if seed is not None:
        cfg = type(cfg)(cfg.name, seed, cfg.units, cfg.system, cfg.sections, cfg.quadrature, cfg.source)
    quad = quadrature_for(cfg, profile)
    try:
        output = RUNNERS[cfg.name](cfg, quad)
    except (QuadratureError, StepInstabilityError, ArithmeticError) as exc:
        print(f"error: experiment {cfg.name}: numerical tolerance failure: {exc}", file=err)
        return EXIT_NUMERIC
    except (SingularityError, GeometryError, ValueError) as exc:
        print(f"error: experiment {cfg.name}: {exc}", file=err)
        return EXIT_CONFIG
    out = Path(out_dir) if out_dir is not None else Path("runs") / cfg.name
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for name, content in sorted(output.files.items()):
        data = content.encode()
        (out / name).write_bytes(data)
        entries.append({"file": name, "sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)})
    manifest = {
        "experiment": cfg.name,
        "version": __version__,
        "seed": cfg.seed,
        "tolerance_profile": profile,
        "quadrature": _jsonable(vars(quad)),
        "units": {"system": cfg.system, "hbar": cfg.units.hbar, "c": cfg.units.c, "e": cfg.units.e},
        "parameters": _jsonable(cfg.sections),
        "outputs": entries,
        "summary": _jsonable(output.summary),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, allow_nan=False) + "\n")
    print(f"{cfg.name}: wrote {len(entries)} table(s) and manifest.json to {out}", file=stream)
    return EXIT_OK


def list_command(stream=None, show_config: str | None = None) -> int:
    stream = sys.stdout if stream is None else stream
    if show_config:
        if show_config not in SCHEMAS:
            print(f"error: unknown experiment {show_config!r}", file=sys.stderr)
            return EXIT_CONFIG
        stream.write(default_config_text(show_config))
        return EXIT_OK
    for d in list_experiments():
        print(f"{d.name}: {d.summary}", file=stream)
        for rel in d.relations:
            print(f"    {rel}", file=stream)
        for section, params in d.schema.items():
            keys = ", ".join(f"{k} [{p.kind}]" for k, p in params.items())
            print(f"    [{section}] {keys}", file=stream)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lcfi", description="Flux-tube phase and interaction experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run the experiment described by a config file")
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int, default=None, help="override the config's master seed")
    p_run.add_argument("--out-dir", default=None, help="output directory (default runs/<experiment>)")
    p_run.add_argument("--tolerance-profile", choices=sorted(PROFILES), default="accurate")
    p_list = sub.add_parser("list", help="list experiments and their parameters")
    p_list.add_argument("--config", metavar="NAME", default=None, help="print a default config for NAME")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        return list_command(show_config=args.config)
    return run(args.config, args.out_dir, args.seed, args.tolerance_profile)


if __name__ == "__main__":
    sys.exit(main())
