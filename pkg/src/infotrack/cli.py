"""Command-line interface: track, synth, eval, compare.

track runs the tracker over a PGM sequence and writes a trajectory CSV
(one frame_index,x,y,w,h,confidence row per frame) plus a JSON run
manifest holding the resolved config snapshot, seed, sequence identity,
version, and per-frame wall-clock timings; the manifest is written
atomically next to the trajectory. synth renders a synthetic scenario.
eval and compare score trajectories against ground truth, writing
threshold,value curve CSVs, flat key=value summaries, and rendered curve
figures. Exit status is 0 only when every frame was processed and all
outputs were written; any error removes partial outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import __version__
from .config import TrackerConfig, load_config_file
from .evaluation import (PRECISION_THRESHOLDS, SUCCESS_THRESHOLDS, compare,
                         curve_csv_lines, evaluate, summary_lines)
from .geometry import BoundingBox, read_box_file
from .imaging import load_sequence, read_pgm
from .synth import KINDS, Scenario, generate
from .tracker import GAUSSIAN_ONLY, HYBRID, CoTracker

TRAJECTORY_HEADER = "frame_index,x,y,w,h,confidence"
DIAGNOSTICS_HEADER = "tau_t,e1,e2,alpha1,alpha2,critic_accept_rate"


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="ascii") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_trajectory(path: str, rows: list[tuple[int, BoundingBox, float]]) -> None:
    lines = [TRAJECTORY_HEADER]
    for index, box, confidence in rows:
        lines.append(f"{index},{box.x:.6f},{box.y:.6f},{box.w:.6f},"
                     f"{box.h:.6f},{confidence:.6f}")
    _atomic_write(path, "\n".join(lines) + "\n")


def read_trajectory(path: str) -> list[tuple[int, BoundingBox, float]]:
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line == TRAJECTORY_HEADER:
                continue
            parts = line.split(",")
            if len(parts) != 6:
                raise ValueError(f"{path}: line {lineno}: expected 6 fields")
            rows.append((int(parts[0]),
                         BoundingBox(*(float(p) for p in parts[1:5])),
                         float(parts[5])))
    return rows


def _build_config(args: argparse.Namespace) -> TrackerConfig:
    mapping = load_config_file(args.config) if args.config else {}
    if args.seed is not None:
        mapping["seed"] = str(args.seed)  # flags win over the config file
    return TrackerConfig.from_mapping(mapping)


def cmd_track(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    sequence = load_sequence(args.seq)
    gt = read_box_file(args.gt)
    if len(gt) not in (1, len(sequence)):
        raise ValueError(
            f"ground truth must have 1 or {len(sequence)} boxes, has {len(gt)}"
        )

    tracker = CoTracker(cfg, mode=args.sampler)
    tracker.start(sequence.load_frame(0), gt[0])
    rows = [(0, gt[0], 1.0)]
    timings = []
    diagnostics = []
    failures = 0
    for i in range(1, len(sequence)):
        t0 = time.perf_counter()
        frame = read_pgm(sequence.frame_paths[i])
        result = tracker.step(frame)
        timings.append((time.perf_counter() - t0) * 1000.0)
        rows.append((i, result.box, result.confidence))
        ctx = result.context
        failures += int(ctx.failed)
        diagnostics.append(
            f"{ctx.tau:.6f},{ctx.e1},{ctx.e2},{ctx.weights[0]:.6f},"
            f"{ctx.weights[1]:.6f},{ctx.critic_accept_rate:.6f}"
        )

    outputs = [args.out]
    try:
        write_trajectory(args.out, rows)
        if args.diagnostics:
            outputs.append(args.diagnostics)
            _atomic_write(args.diagnostics,
                          "\n".join([DIAGNOSTICS_HEADER] + diagnostics) + "\n")
        manifest_path = args.out + ".manifest.json"
        outputs.append(manifest_path)
        total_s = sum(timings) / 1000.0
        manifest = {
            "version": __version__,
            "sequence": {"directory": os.path.abspath(args.seq),
                         "frames": len(sequence)},
            "ground_truth": os.path.abspath(args.gt),
            "sampler_mode": args.sampler,
            "seed": cfg.seed,
            "config": cfg.to_mapping(),
            "trajectory": os.path.abspath(args.out),
            "frame_timings_ms": [round(t, 3) for t in timings],
            "fps": round(len(timings) / total_s, 3) if total_s > 0 else None,
            "frame_failures": failures,
        }
        _atomic_write(manifest_path, json.dumps(manifest, indent=2) + "\n")
    except BaseException:
        for path in outputs:
            if os.path.exists(path):
                os.remove(path)
        raise
    return 0


def _parse_size(text: str) -> tuple[int, int]:
    w, _, h = text.partition("x")
    return int(w), int(h)


def cmd_synth(args: argparse.Namespace) -> int:
    width, height = _parse_size(args.size)
    target_w, target_h = _parse_size(args.target_size)
    scenario = Scenario(
        kind=args.scenario,
        frame_count=args.frames,
        width=width,
        height=height,
        target_w=target_w,
        target_h=target_h,
        seed=args.seed,
    )
    paths, gt_path = generate(scenario, args.out)
    print(f"wrote {len(paths)} frames and {os.path.basename(gt_path)} to {args.out}")
    return 0


def _load_eval_pair(traj_path: str, gt_path: str):
    trajectory = [row[1] for row in read_trajectory(traj_path)]
    gt = read_box_file(gt_path)
    if len(trajectory) != len(gt):
        raise ValueError(
            f"trajectory has {len(trajectory)} frames, ground truth {len(gt)}"
        )
    return trajectory, gt


def _write_curves(out_dir: str, labeled) -> None:
    from . import report

    os.makedirs(out_dir, exist_ok=True)
    for label, curves in labeled.items():
        prefix = f"{label}_" if len(labeled) > 1 else ""
        _atomic_write(os.path.join(out_dir, f"{prefix}success.csv"),
                      "\n".join(curve_csv_lines(SUCCESS_THRESHOLDS, curves.success)) + "\n")
        _atomic_write(os.path.join(out_dir, f"{prefix}precision.csv"),
                      "\n".join(curve_csv_lines(PRECISION_THRESHOLDS, curves.precision)) + "\n")
    report.plot_success(labeled, os.path.join(out_dir, "success.png"))
    report.plot_precision(labeled, os.path.join(out_dir, "precision.png"))


def cmd_eval(args: argparse.Namespace) -> int:
    trajectory, gt = _load_eval_pair(args.traj, args.gt)
    curves = evaluate(trajectory, gt)
    for line in summary_lines(curves):
        print(line)
    if args.out:
        _write_curves(args.out, {"run": curves})
        _atomic_write(os.path.join(args.out, "summary.txt"),
                      "\n".join(summary_lines(curves)) + "\n")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    traj_a, gt = _load_eval_pair(args.traj_a, args.gt)
    traj_b, _ = _load_eval_pair(args.traj_b, args.gt)
    curves_a = evaluate(traj_a, gt)
    curves_b = evaluate(traj_b, gt)
    rows = compare(curves_a, curves_b)
    print(f"{'metric':<18}{'a':>12}{'b':>12}{'delta':>12}")
    for row in rows:
        print(f"{row.metric:<18}{row.value_a:>12.6f}{row.value_b:>12.6f}"
              f"{row.delta:>+12.6f}")
    if args.out:
        _write_curves(args.out, {"a": curves_a, "b": curves_b})
        lines = ["metric,a,b,delta"]
        lines += [f"{r.metric},{r.value_a:.6f},{r.value_b:.6f},{r.delta:.6f}"
                  for r in rows]
        _atomic_write(os.path.join(args.out, "comparison.csv"),
                      "\n".join(lines) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="infotrack",
        description="Co-trained tracking-by-detection with critic-guided sampling",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("track", help="run the tracker over a PGM sequence")
    p.add_argument("--seq", required=True, help="directory of PGM frames")
    p.add_argument("--gt", required=True,
                   help="ground-truth box file (at least the first frame)")
    p.add_argument("--out", required=True, help="trajectory CSV to write")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--seed", type=int, default=None,
                   help="override the config seed")
    p.add_argument("--sampler", choices=(HYBRID, GAUSSIAN_ONLY), default=HYBRID,
                   help="candidate sampler (gaussian disables the critic half)")
    p.add_argument("--diagnostics", help="optional per-frame diagnostics CSV")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("synth", help="render a synthetic sequence")
    p.add_argument("--scenario", required=True, choices=KINDS)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--frames", type=int, default=50)
    p.add_argument("--size", default="320x240", help="frame size WxH")
    p.add_argument("--target-size", default="40x40", help="target size WxH")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="score a trajectory against ground truth")
    p.add_argument("--traj", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--out", help="directory for curves, summary, and figures")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="compare two trajectories")
    p.add_argument("--traj-a", required=True)
    p.add_argument("--traj-b", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--out", help="directory for curves, table, and figures")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # argparse handles its own usage errors
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
