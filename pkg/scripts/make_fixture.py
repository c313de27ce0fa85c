"""Regenerate the disk fixture used by the rate-suite tests."""
import argparse
from pathlib import Path

from singular_plate.cli import main as cli

DEFAULT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "disk_alpha05"


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", type=Path, default=DEFAULT)
    args = p.parse_args()
    code = cli(["solve", "--alpha", "0.5", "--out", str(args.out)])
    (args.out / "manifest.json").unlink(missing_ok=True)  # timestamps do not belong in the fixture
    raise SystemExit(code)


if __name__ == "__main__":
    main()
