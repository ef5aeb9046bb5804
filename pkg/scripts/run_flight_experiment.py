"""Simulate a curved blimp flight, build the photomap and score the trajectory.

    python3 scripts/run_flight_experiment.py OUT_DIR [--texture-size 2048] [--seed 42] [--noise 0.01]

Everything goes through the ``photomap`` command line, so the outputs in
OUT_DIR are exactly what a user would get by hand.
"""

import argparse
import sys
from pathlib import Path

from photomap.cli import main as photomap
from photomap.flightsim import make_texture
from photomap.imageio import write_gray

SCRIPT = """\
# t  xz_angle  thrust  tail
0    0.02      2.0     0.05
10   0.03      2.0     -0.03
25   0.01      2.2     0.04
38   0.02      1.8     -0.05
"""


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out_dir", type=Path)
    ap.add_argument("--texture-size", type=int, default=2048)
    ap.add_argument("--texture-seed", type=int, default=7)
    ap.add_argument("--seed", type=int, default=42, help="pixel-noise seed")
    ap.add_argument("--noise", type=float, default=0.01, help="pixel noise sigma")
    ap.add_argument("--duration", type=float, default=49.0)
    args = ap.parse_args(argv)

    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    texture = out / "texture.png"
    write_gray(texture, make_texture(args.texture_size, args.texture_seed), bits=16)
    (out / "flight.txt").write_text(SCRIPT)

    sets = ["--set", f"duration={args.duration}", "--set", "start_x=-40", "--set", "start_y=-30",
            "--set", f"noise_sigma={args.noise}"]
    steps = [
        ["simulate", texture, out / "flight.txt", out / "frames", *sets, "--seed", args.seed],
        ["map", out / "frames", out / "map.png", out / "trajectory.txt"],
        ["evaluate", out / "trajectory.txt", out / "frames" / "ground_truth.txt"],
    ]
    for argv_ in steps:
        code = photomap([str(a) for a in argv_])
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
