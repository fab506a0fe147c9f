#!/usr/bin/env python3
"""Build a few level sets and render membership and distance rasters of each.

Outputs go to ``--out-dir`` (default ``./rasters``) together with the manifests
that reproduce them.
"""

import argparse
import pathlib
import sys

from porousplane import cli

PRESETS = {
    # name: build flags
    "default-d2": ["--depth", "2", "--half-width", "1/32"],
    "crossing-d2": ["--depth", "2", "--half-width", "1/32", "--schedule", "explicit:0,0.25"],
    "oblique-d2": ["--depth", "2", "--half-width", "2^-8", "--schedule", "explicit:0,0.17"],
    "mixed-d3": ["--depth", "3", "--center", "0.001,0.0003", "--half-width", "2^-9",
                 "--schedule", "explicit:0,0.17,0.37"],
}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="rasters")
    ap.add_argument("--resolution", type=int, default=512)
    ap.add_argument("--only", choices=sorted(PRESETS), action="append")
    args = ap.parse_args(argv)
    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.only or sorted(PRESETS):
        ls = out / f"{name}.ls"
        if cli.main(["build", *PRESETS[name], "--out", str(ls)]) != 0:
            return 1
        for mode in ("membership", "distance"):
            rc = cli.main(["raster", str(ls), "--mode", mode, "--resolution", str(args.resolution),
                           "--out", str(out / f"{name}-{mode}.pgm")])
            if rc != 0:
                return rc
    return 0


if __name__ == "__main__":
    sys.exit(main())
