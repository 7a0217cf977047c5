"""plot-run DIR [--format png|svg]: render figures for one artifact directory."""

from __future__ import annotations

import argparse
import sys

from .plots import plot_run
from .reader import SchemaError


def main(argv=None):
    parser = argparse.ArgumentParser(prog="plot-run", description=__doc__)
    parser.add_argument("directory")
    parser.add_argument("--format", choices=("png", "svg"), default="png")
    args = parser.parse_args(argv)
    try:
        written = plot_run(args.directory, args.format)
    except SchemaError as exc:
        print(f"schema mismatch: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
