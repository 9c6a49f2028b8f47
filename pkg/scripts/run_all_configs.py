"""Run every config in configs/ through the CLI and print one status line each.

    python3 scripts/run_all_configs.py [--out results/]
"""

import argparse
import sys
import time
from pathlib import Path

from semiharmonic.cli import main

ROOT = Path(__file__).resolve().parent.parent
STATUS = {0: "ok", 1: "assertion failed", 2: "config error", 3: "support overflow"}


def run(out: Path) -> int:
    worst = 0
    for path in sorted((ROOT / "configs").glob("*.toml")):
        t = time.perf_counter()
        code = main(["--config", str(path), "--out", str(out / path.stem)])
        print(f"{path.name:24s} exit {code} ({STATUS.get(code, '?')}) "
              f"{time.perf_counter() - t:.1f}s", flush=True)
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=ROOT / "results")
    sys.exit(run(ap.parse_args().out))
