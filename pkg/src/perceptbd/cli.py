"""Command line interface: ``perceptbd <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import codec, scc
from .frames import load_frame, save_frame
from .perception import DisplayGeometry, GazePoint, provider_from_spec
from .pipeline import SWEEP_COLUMNS, TILE_SIZES, PipelineConfig, run_pipeline, sweep_rows, tile_sweep, workers_from_env


def read_gaze_trace(path, frame_index: int) -> GazePoint:
    """Gaze trace: one ``x y`` pair per line, line k is frame k; ``#`` starts a comment."""
    rows = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].split()
        if line:
            rows.append(line)
    if not 0 <= frame_index < len(rows):
        raise SystemExit(f"gaze trace {path} has no entry for frame {frame_index}")
    x, y = rows[frame_index][:2]
    return GazePoint(float(x), float(y))


def _add_config_args(p):
    p.add_argument("--tile-size", type=int, default=4, choices=TILE_SIZES)
    p.add_argument("--gaze", type=float, nargs=2, metavar=("X", "Y"),
                   help="gaze point in pixels (default: frame center)")
    p.add_argument("--gaze-trace", help="file with one 'x y' gaze point per frame")
    p.add_argument("--frame-index", type=int, default=0, help="row of --gaze-trace to use")
    p.add_argument("--fov", type=float, nargs=2, metavar=("H", "V"),
                   help="display field of view in degrees (default: 100 horizontal)")
    p.add_argument("--display-size", type=int, nargs=2, metavar=("W", "H"),
                   help="display size in pixels (default: frame size)")
    p.add_argument("--foveal-radius", type=float, default=10.0, help="degrees left untouched")
    p.add_argument("--provider", default="default",
                   help="default | constant:a,b,c | linear:a0,b0,c0,sa,sb,sc | table:PATH")
    p.add_argument("--energy-per-pixel", type=float, default=3477.0, help="DRAM energy, pJ/pixel")
    p.add_argument("--workers", type=int, default=None,
                   help="worker threads (default: $PBD_THREADS or 1)")


def _config(args, frame) -> PipelineConfig:
    h, w = frame.shape[:2]
    gaze = None
    if args.gaze_trace:
        gaze = read_gaze_trace(args.gaze_trace, args.frame_index)
    elif args.gaze:
        gaze = GazePoint(*args.gaze)
    display = None
    if args.fov or args.display_size:
        dw, dh = args.display_size or (w, h)
        hf, vf = args.fov or (100.0, min(179.0, 100.0 * dh / dw))
        display = DisplayGeometry(dw, dh, hf, vf)
    return PipelineConfig(
        tile_size=args.tile_size,
        gaze=gaze,
        display=display,
        foveal_radius_deg=args.foveal_radius,
        provider=provider_from_spec(args.provider),
        energy_per_pixel_pj=args.energy_per_pixel,
        workers=args.workers if args.workers else workers_from_env(),
    )


def cmd_compress(args):
    frame = load_frame(args.input)
    result = run_pipeline(frame, _config(args, frame))
    Path(args.output).write_bytes(result.bitstream.to_bytes())
    if args.decoded:
        save_frame(args.decoded, result.decoded)
    if args.report:
        Path(args.report).write_text(result.report.to_json() + "\n")
    r = result.report
    print(f"{args.output}: {r.ours_bits // 8} bytes, {r.ours_bits / r.pixels:.3f} bpp "
          f"({100 * r.reduction_vs_bd:.1f}% below BD, {100 * r.reduction_vs_nocom:.1f}% below raw)")


def cmd_decompress(args):
    frame = codec.decode_frame(Path(args.input).read_bytes())
    save_frame(args.output, frame)


def cmd_report(args):
    frame = load_frame(args.input)
    text = run_pipeline(frame, _config(args, frame)).report.to_json()
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)


def cmd_sweep(args):
    frame = load_frame(args.input)
    cfg = _config(args, frame)
    reports = tile_sweep(frame, cfg, sizes=args.sizes)
    rows = sweep_rows(reports)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
            writer.writeheader()
            writer.writerows(rows)
    if args.json:
        doc = {str(k): r.to_dict() for k, r in reports.items()}
        Path(args.json).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    for row in rows:
        print(f"T{row['tile_size']:<3d} BD {row['bd_bpp']:7.3f} bpp  ours {row['ours_bpp']:7.3f} bpp  "
              f"C2 {100 * row['c2']:5.1f}%")


def cmd_scc_build(args):
    provider = provider_from_spec(args.provider)
    cover = scc.build_cover(args.depth, provider, args.eccentricity)
    cover.save(args.output)
    print(f"{args.output}: {len(cover.chosen)} colors of {1 << (3 * args.depth)}, "
          f"{cover.code_bits} bits/pixel")


def cmd_scc_encode(args):
    cover = scc.ColorCover.load(args.cover)
    frame = load_frame(args.input)
    stream = scc.scc_encode(frame, cover)
    data = stream.to_bytes()
    Path(args.output).write_bytes(data)
    if args.decoded:
        save_frame(args.decoded, scc.scc_decode(stream, cover))
    print(f"{args.output}: {len(data)} bytes, {stream.code_bits} bpp")


def cmd_scc_decode(args):
    cover = scc.ColorCover.load(args.cover)
    stream = scc.SccStream.from_bytes(Path(args.input).read_bytes())
    save_frame(args.output, scc.scc_decode(stream, cover))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="perceptbd", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", help="adjust colors and BD-encode a frame")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True, help="bitstream file")
    p.add_argument("--decoded", help="also write the decoded frame (PPM or PNG)")
    p.add_argument("--report", help="also write the JSON report")
    _add_config_args(p)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help="decode a PBD1 bitstream")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("report", help="print compression statistics for a frame")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    _add_config_args(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("sweep", help="compare tile sizes")
    p.add_argument("input")
    p.add_argument("--sizes", type=int, nargs="+", default=list(TILE_SIZES), choices=TILE_SIZES)
    p.add_argument("--csv")
    p.add_argument("--json")
    _add_config_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("scc-build", help="build a set-cover color table")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--depth", type=int, default=5)
    p.add_argument("--eccentricity", type=float, default=25.0)
    p.add_argument("--provider", default="default")
    p.set_defaults(func=cmd_scc_build)

    p = sub.add_parser("scc-encode", help="encode a frame with a set-cover table")
    p.add_argument("input")
    p.add_argument("--cover", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--decoded")
    p.set_defaults(func=cmd_scc_encode)

    p = sub.add_parser("scc-decode", help="decode an SCC stream")
    p.add_argument("input")
    p.add_argument("--cover", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_scc_decode)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (OSError, ValueError) as exc:
        print(f"perceptbd: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
