#!/usr/bin/env python3
"""Run the acceptance suite and print one verdict line per criterion."""

import argparse
import pathlib
import sys

import pytest

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-k", dest="select", help="pytest -k expression, e.g. 'criterion_5'")
    args = ap.parse_args(argv)
    cmd = [str(ROOT / "tests" / "test_acceptance.py"), "-q", "-p", "no:cacheprovider"]
    if args.select:
        cmd += ["-k", args.select]
    return int(pytest.main(cmd))


if __name__ == "__main__":
    sys.exit(main())
