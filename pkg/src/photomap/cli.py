"""``photomap register|map|simulate|evaluate``.

Exit codes: 0 success, 1 I/O or configuration error, 2 data error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from photomap.config import ConfigError, RunConfig, load_config
from photomap.errors import DegenerateInput, EmptySequence
from photomap.flightsim import (
    BlimpState,
    GroundWorld,
    ScriptError,
    ground_truth_transform,
    parse_commands,
    simulate,
)
from photomap.imageio import list_images, read_image, write_gray
from photomap.mosaic import build_map, write_map
from photomap.preprocess import Frame, prepare_frame, to_grayscale
from photomap.registration import register
from photomap.trajectory import LogFormatError, TrajectoryRecord, evaluate, read_log, write_log

log = logging.getLogger("photomap")

EXIT_OK, EXIT_IO, EXIT_DATA = 0, 1, 2
GROUND_TRUTH_LOG = "ground_truth.txt"


def _fail(code: int, message: str) -> int:
    print(f"photomap: {message}", file=sys.stderr)
    return code


def _load_frame(path, cfg: RunConfig, index: int = 0) -> Frame:
    return prepare_frame(read_image(path), cfg.frame_size, cfg.calibration(), index)


def cmd_register(image_a, image_b, cfg: RunConfig) -> int:
    try:
        a = _load_frame(image_a, cfg)
        b = _load_frame(image_b, cfg, 1)
    except (OSError, ValueError) as exc:
        return _fail(EXIT_IO, str(exc))
    try:
        result = register(a, b, cfg.fmi())
    except DegenerateInput:
        return _fail(EXIT_DATA, "degenerate input")
    t = result.transform
    print(f"{t.scale:.6f} {t.rotation:.6f} {t.tx:.3f} {t.ty:.3f} {result.confidence:.6f}")
    return EXIT_OK


def cmd_map(frames_dir, out_map, out_trajectory, cfg: RunConfig) -> int:
    try:
        paths = list_images(frames_dir)
        if not paths:
            return _fail(EXIT_IO, f"no images in {frames_dir}")
        frames = [_load_frame(p, cfg, k) for k, p in enumerate(paths)]
    except (OSError, ValueError) as exc:
        return _fail(EXIT_IO, str(exc))
    try:
        canvas, records = build_map(frames, cfg.fmi(), cfg.tile_size, cfg.blend_policy)
        out = write_map(out_map, canvas)
        write_log(out_trajectory, records)
    except EmptySequence as exc:
        return _fail(EXIT_DATA, str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    for r, p in zip(records, paths):
        if not r.accepted:
            log.warning("frame %d (%s) rejected, confidence %.3f", r.frame_index, p.name, r.confidence)
    accepted = sum(r.accepted for r in records)
    print(f"frames={len(records)} accepted={accepted} map={out.width}x{out.height}")
    return EXIT_OK


def cmd_simulate(texture_path, script_path, out_dir, cfg: RunConfig, seed: int | None = None) -> int:
    try:
        texture = to_grayscale(read_image(texture_path)).data
        script = Path(script_path).read_text()
    except (OSError, ValueError) as exc:
        return _fail(EXIT_IO, str(exc))
    try:
        commands = parse_commands(script)
    except ScriptError as exc:
        return _fail(EXIT_DATA, f"malformed script {script_path}: {exc}")
    if cfg.noise_sigma > 0 and seed is None:
        return _fail(EXIT_IO, "noise_sigma > 0 requires --seed")
    world = GroundWorld(texture, cfg.meters_per_texel, cfg.background)
    cam = cfg.camera()
    start = BlimpState(cfg.start_x, cfg.start_y, cfg.altitude, cfg.start_yaw)
    try:
        captures = simulate(world, commands, cam, cfg.duration, cfg.capture_interval,
                            initial=start, tau=cfg.tau, noise_sigma=cfg.noise_sigma, seed=seed)
    except ValueError as exc:
        return _fail(EXIT_IO, str(exc))
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        records = []
        for k, cap in enumerate(captures):
            write_gray(out / f"frame_{k:06d}.png", cap.image.data, bits=16)
            pose = ground_truth_transform(captures[0].state, cap.state, cam)
            records.append(TrajectoryRecord(k, pose, 1.0, True))
        write_log(out / GROUND_TRUTH_LOG, records)
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    print(f"frames={len(captures)} truth={out / GROUND_TRUTH_LOG}")
    return EXIT_OK


def cmd_evaluate(estimated_log, truth_log) -> int:
    try:
        est = read_log(estimated_log)
        truth = read_log(truth_log)
        summary = evaluate(est, truth)
    except (OSError, LogFormatError, ValueError) as exc:
        return _fail(EXIT_IO, str(exc))
    print("# index position_px rotation_rad scale_err")
    for f in summary.frames:
        print(f"{f.frame_index} {f.position:.3f} {f.rotation:.6f} {f.scale:.6f}")
    print(f"mean_position_error={summary.mean_position:.3f}")
    print(f"max_position_error={summary.max_position:.3f}")
    print(f"final_position_error={summary.final_position:.3f}")
    print(f"path_length={summary.path_length:.3f}")
    print(f"final_error_percent={summary.final_percent:.4f}")
    print(f"max_rotation_error={summary.max_rotation:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value configuration file")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration key (repeatable)")
    common.add_argument("--seed", type=int, help="seed for simulator noise")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="photomap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("register", parents=[common], help="register two images")
    p.add_argument("image_a")
    p.add_argument("image_b")
    p = sub.add_parser("map", parents=[common], help="build a photomap from a frame directory")
    p.add_argument("frames_dir")
    p.add_argument("out_map")
    p.add_argument("out_trajectory")
    p = sub.add_parser("simulate", parents=[common], help="fly the blimp and capture frames")
    p.add_argument("texture")
    p.add_argument("script")
    p.add_argument("out_dir")
    p = sub.add_parser("evaluate", parents=[common], help="compare a trajectory with ground truth")
    p.add_argument("estimated")
    p.add_argument("truth")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.set)
    except ConfigError as exc:
        return _fail(EXIT_IO, str(exc))
    if args.command == "register":
        return cmd_register(args.image_a, args.image_b, cfg)
    if args.command == "map":
        return cmd_map(args.frames_dir, args.out_map, args.out_trajectory, cfg)
    if args.command == "simulate":
        return cmd_simulate(args.texture, args.script, args.out_dir, cfg, args.seed)
    return cmd_evaluate(args.estimated, args.truth)


if __name__ == "__main__":
    sys.exit(main())
