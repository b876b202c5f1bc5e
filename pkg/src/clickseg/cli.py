"""Command-line front door: segment, eval, simulate, bootstrap, serve.

Exit codes: 0 success, 1 runtime failure, 2 usage or missing input. Every
segmentation run writes a single-record manifest (same line-delimited JSON
format as click logs) with the full parameter set, seed and input digests,
enough to reproduce the run exactly.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__
from .errors import ClicksegError
from .params import Params

logger = logging.getLogger("clickseg")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _configure_logging() -> None:
    level_name = os.environ.get("CLICKSEG_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level_name, logging.WARNING))


def _add_param_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha1", type=float, default=None)
    parser.add_argument("--alpha2", type=float, default=None)
    parser.add_argument("--beta1", type=float, default=None)
    parser.add_argument("--u-s", dest="u_s", type=float, default=None)
    parser.add_argument("--t-window", dest="t_window", type=int, default=None)
    parser.add_argument("--gamma1", type=float, default=None)
    parser.add_argument("--gamma2", type=float, default=None)
    parser.add_argument("--delay", dest="click_delay", type=int, default=None)
    parser.add_argument("--slic-target", dest="slic_target", type=int, default=None)
    parser.add_argument(
        "--slic-compactness", dest="slic_compactness", type=float, default=None
    )
    parser.add_argument("--bins", dest="histogram_bins", type=int, default=None)


_PARAM_FLAG_NAMES = (
    "alpha1",
    "alpha2",
    "beta1",
    "u_s",
    "t_window",
    "gamma1",
    "gamma2",
    "click_delay",
    "slic_target",
    "slic_compactness",
    "histogram_bins",
)


def params_from_args(args: argparse.Namespace) -> Params:
    overrides = {
        name: getattr(args, name)
        for name in _PARAM_FLAG_NAMES
        if getattr(args, name, None) is not None
    }
    return Params(**overrides)


def _digest_directory(path: Path) -> str:
    digest = hashlib.sha256()
    for p in sorted(path.glob("*")):
        if p.is_file():
            digest.update(p.name.encode("utf-8"))
            digest.update(p.read_bytes())
    return digest.hexdigest()


def _digest_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(path: Path, record: dict) -> None:
    path.write_text(json.dumps(record, separators=(",", ":")) + "\n", encoding="utf-8")


def cmd_segment(args: argparse.Namespace) -> int:
    from . import media, temporal

    frames_dir = Path(args.frames)
    clicks_path = Path(args.clicks)
    if not frames_dir.is_dir():
        print(f"error: frames directory {frames_dir} does not exist", file=sys.stderr)
        return EXIT_USAGE
    if not clicks_path.is_file():
        print(f"error: click log {clicks_path} does not exist", file=sys.stderr)
        return EXIT_USAGE
    params = params_from_args(args)
    start = time.perf_counter()
    sequence = media.load_frame_sequence(frames_dir)
    clicklog = media.read_click_log(clicks_path)
    artifacts = temporal.compute_artifacts(sequence, params, jobs=args.jobs)
    masks = temporal.smooth_segment(sequence, clicklog, params, artifacts=artifacts)
    media.write_mask_sequence(masks, args.out)
    if args.diagnostics:
        from .superclick import diagnostics_csv

        stage1 = temporal.stage1_labelings(sequence, clicklog, params, artifacts)
        diag_dir = Path(args.out) / "diagnostics"
        diag_dir.mkdir(parents=True, exist_ok=True)
        for t, labeling in enumerate(stage1):
            (diag_dir / f"{t:03d}.csv").write_text(diagnostics_csv(labeling))
    elapsed = time.perf_counter() - start
    import numpy

    _write_manifest(
        Path(args.out) / "manifest.jsonl",
        {
            "command": "segment",
            "params": dataclasses.asdict(params),
            "seed": args.seed,
            "frames": str(frames_dir),
            "clicks": str(clicks_path),
            "frames_digest": _digest_directory(frames_dir),
            "clicks_digest": _digest_file(clicks_path),
            "n_frames": len(sequence),
            "wall_seconds": elapsed,
            "versions": {"clickseg": __version__, "numpy": numpy.__version__},
        },
    )
    logger.info("segmented %d frames in %.1fs", len(sequence), elapsed)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    from . import evaluation, media

    out_dir = Path(args.output)
    gt_dir = Path(args.gt)
    if not out_dir.is_dir() or not gt_dir.is_dir():
        print("error: both --output and --gt directories must exist", file=sys.stderr)
        return EXIT_USAGE
    output = media.read_mask_sequence(out_dir)
    gt = media.read_mask_sequence(gt_dir)
    pr, rec, f1 = evaluation.prf(output, gt)
    overlap = evaluation.pom(output, gt)
    print(f"Pr={pr:.4f} Rec={rec:.4f} F1={f1:.4f} POM={overlap:.4f}")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write("pr,rec,f1,pom\n")
            fh.write(f"{pr},{rec},{f1},{overlap}\n")
    return EXIT_OK


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def cmd_simulate(args: argparse.Namespace) -> int:
    from . import evaluation, media

    gt_dir = Path(args.gt)
    if not gt_dir.is_dir():
        print(f"error: gt directory {gt_dir} does not exist", file=sys.stderr)
        return EXIT_USAGE
    gt = media.read_mask_sequence(gt_dir)
    profile = evaluation.ClickerProfile(
        clicks_per_frame_rate=args.rate,
        spatial_sigma=args.sigma,
        reaction_delay=args.reaction_delay,
        miss_rate=args.miss_rate,
        target_bias=args.bias,
        seed=args.seed,
    )

    if args.ablation_csv:
        # Sweep mode: run each cell through the full pipeline, one CSV row
        # per cell.
        if not args.frames:
            print("error: --frames is required for an ablation sweep", file=sys.stderr)
            return EXIT_USAGE
        sequence = media.load_frame_sequence(args.frames)
        config = evaluation.AblationConfig(
            sequence=sequence,
            gt=gt,
            params=params_from_args(args),
            profile=profile,
            fractions=_parse_float_list(args.fractions or ""),
            user_counts=_parse_int_list(args.user_counts or ""),
            delays=_parse_int_list(args.delays or ""),
            seeds=_parse_int_list(args.seeds) or (args.seed,),
            n_users=args.users,
            out_csv=args.ablation_csv,
        )
        rows = evaluation.ablation_run(config)
        print(f"wrote {len(rows)} cells to {args.ablation_csv}")
        return EXIT_OK

    log = evaluation.simulate_users(
        gt, profile, args.users, level_id=args.level, seed=args.seed
    )
    out = Path(args.out)
    if out.exists():
        out.unlink()
    media.append_clicks(out, log.clicks)
    print(f"wrote {len(log)} clicks to {out}")
    return EXIT_OK


def cmd_bootstrap(args: argparse.Namespace) -> int:
    from . import game, media

    frames_dir = Path(args.frames)
    if not frames_dir.is_dir():
        print(f"error: frames directory {frames_dir} does not exist", file=sys.stderr)
        return EXIT_USAGE
    sequence = media.load_frame_sequence(frames_dir)
    seg = game.bootstrap_segmentation(sequence)
    media.write_mask_sequence(seg.masks, args.out)
    print(f"wrote {len(seg.masks)} bootstrap masks to {args.out}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import build_service, create_app

    levels_root = Path(args.levels)
    if not levels_root.is_dir():
        print(f"error: levels directory {levels_root} does not exist", file=sys.stderr)
        return EXIT_USAGE
    service = build_service(levels_root, args.clicks)
    app = create_app(service, static_dir=args.static if args.static else None)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clickseg",
        description="Click-driven video object segmentation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_seg = sub.add_parser("segment", help="segment a frame directory from clicks")
    p_seg.add_argument("--frames", required=True)
    p_seg.add_argument("--clicks", required=True)
    p_seg.add_argument("--out", required=True)
    p_seg.add_argument("--seed", type=int, default=0)
    p_seg.add_argument("--jobs", type=int, default=os.cpu_count())
    p_seg.add_argument(
        "--diagnostics",
        action="store_true",
        help="write per-frame CSVs of superclick cue values",
    )
    _add_param_flags(p_seg)
    p_seg.set_defaults(func=cmd_segment)

    p_eval = sub.add_parser("eval", help="compare output masks against ground truth")
    p_eval.add_argument("--output", required=True)
    p_eval.add_argument("--gt", required=True)
    p_eval.add_argument("--csv", default=None)
    p_eval.set_defaults(func=cmd_eval)

    p_sim = sub.add_parser("simulate", help="generate synthetic clicks from gt masks")
    p_sim.add_argument("--gt", required=True)
    p_sim.add_argument("--out", default="clicks.jsonl")
    p_sim.add_argument("--rate", type=float, default=2.0)
    p_sim.add_argument("--sigma", type=float, default=0.0)
    p_sim.add_argument("--reaction-delay", dest="reaction_delay", type=int, default=0)
    p_sim.add_argument("--miss-rate", dest="miss_rate", type=float, default=0.0)
    p_sim.add_argument("--bias", type=float, default=0.0)
    p_sim.add_argument("--users", type=int, default=1)
    p_sim.add_argument("--level", default="level0")
    p_sim.add_argument("--seed", type=int, default=0)
    # sweep mode: run cells through the pipeline and emit one CSV row each
    p_sim.add_argument("--ablation-csv", dest="ablation_csv", default=None)
    p_sim.add_argument("--frames", default=None)
    p_sim.add_argument("--delays", default=None, help="comma-separated, e.g. 0,1,2,3")
    p_sim.add_argument("--fractions", default=None, help="comma-separated, e.g. 0.25,0.5,1")
    p_sim.add_argument("--user-counts", dest="user_counts", default=None)
    p_sim.add_argument("--seeds", default="", help="comma-separated cell seeds")
    _add_param_flags(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_boot = sub.add_parser("bootstrap", help="motion-based score segmentation")
    p_boot.add_argument("--frames", required=True)
    p_boot.add_argument("--out", required=True)
    p_boot.set_defaults(func=cmd_bootstrap)

    p_srv = sub.add_parser("serve", help="run the game HTTP service")
    p_srv.add_argument("--levels", required=True)
    p_srv.add_argument("--clicks", required=True)
    p_srv.add_argument("--static", default=None)
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ClicksegError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
