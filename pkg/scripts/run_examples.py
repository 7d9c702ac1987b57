"""Run every config in configs/ through the CLI and print each run's summary."""

import argparse
import json
import sys
from pathlib import Path

from lcfi.cli import run

ROOT = Path(__file__).resolve().parent.parent


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--configs", default=str(ROOT / "configs"))
    parser.add_argument("--out-dir", default="runs")
    parser.add_argument("--tolerance-profile", choices=("fast", "accurate"), default="fast")
    args = parser.parse_args(argv)
    worst = 0
    for cfg in sorted(Path(args.configs).glob("*.ini")):
        out = Path(args.out_dir) / cfg.stem
        code = run(cfg, out, profile=args.tolerance_profile)
        worst = max(worst, code)
        if code == 0:
            summary = json.loads((out / "manifest.json").read_text())["summary"]
            print(f"  {json.dumps(summary, sort_keys=True)}")
    return worst


if __name__ == "__main__":
    sys.exit(main())
