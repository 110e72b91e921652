"""Command line entry points.

Batch subcommands run the core pipeline in-process (no server needed):

    cityviz ingest spans.jsonl -o structure.json
    cityviz gen --seed 7 --apps 6 -o structure.json
    cityviz layout structure.json -o layout.json
    cityviz snapshot structure.json --pose 10,40,60,0,0,0 -o view.svg
    cityviz serve --port 8000

Files default to stdin/stdout ("-"), so subcommands compose in pipes.
Identical inputs and seeds always reproduce identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys

from .collab import RoomState, UserState
from .ingest import (
    SyntheticParams,
    aggregate_communication,
    generate_synthetic,
    merge_structure,
    parse_spans,
    reconstruct_structure,
)
from .layout import LayoutConfig, compute_layout
from .minimap import MinimapConfig, compute_frame, marker_positions
from .model import CameraPose, LandscapeStructure, ValidationError, canonical_json
from .semzoom import ZoomConfig, build_clusters, build_entity_table, entity_levels, resolve_appearance
from .svgrender import render_svg


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _write_bytes(path: str, data: bytes) -> None:
    if path == "-":
        sys.stdout.buffer.write(data)
    else:
        with open(path, "wb") as handle:
            handle.write(data)


def _load_structure(path: str) -> LandscapeStructure:
    return LandscapeStructure.from_dict(json.loads(_read_text(path)))


def _load_configs(path: str | None) -> tuple[ZoomConfig, MinimapConfig, LayoutConfig]:
    doc = json.loads(_read_text(path)) if path else {}
    return (
        ZoomConfig.from_dict(doc.get("zoom", {})),
        MinimapConfig.from_dict(doc.get("minimap", {})),
        LayoutConfig.from_dict(doc.get("layout", {})),
    )


def _parse_pose(text: str) -> CameraPose:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 6:
        raise ValidationError("pose must be 6 comma-separated numbers: x,y,z,tx,ty,tz")
    return CameraPose(tuple(parts[:3]), tuple(parts[3:]))


def cmd_ingest(args: argparse.Namespace) -> int:
    spans = parse_spans(_read_text(args.spans))
    structure = reconstruct_structure(spans)
    aggregate = aggregate_communication(spans, structure)
    structure.communications = aggregate.links
    if args.merge:
        structure = merge_structure(structure, _load_structure(args.merge))
    _write_bytes(args.output, structure.canonical_bytes() + b"\n")
    diagnostics = aggregate.diagnostics()
    if any(diagnostics.values()):
        print(f"diagnostics: {diagnostics}", file=sys.stderr)
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    params = SyntheticParams(
        apps=args.apps,
        packages_per_app=args.packages_per_app,
        depth=args.depth,
        classes_per_package=args.classes_per_package,
        methods_per_class=args.methods_per_class,
        link_density=args.link_density,
    )
    structure = generate_synthetic(args.seed, params)
    _write_bytes(args.output, structure.canonical_bytes() + b"\n")
    return 0


def cmd_layout(args: argparse.Namespace) -> int:
    structure = _load_structure(args.structure)
    _, _, layout_config = _load_configs(args.config)
    layout = compute_layout(structure, layout_config)
    _write_bytes(args.output, canonical_json(layout.to_dict()).encode("utf-8") + b"\n")
    return 0


def cmd_snapshot(args: argparse.Namespace) -> int:
    structure = _load_structure(args.structure)
    zoom_config, minimap_config, layout_config = _load_configs(args.config)
    pose = _parse_pose(args.pose)
    width, height = (float(v) for v in args.screen.split("x"))

    layout = compute_layout(structure, layout_config)
    table = build_entity_table(structure, layout)
    clusters = build_clusters(table, zoom_config)
    levels = entity_levels(pose, clusters, zoom_config.level_thresholds)
    appearance = resolve_appearance(structure, layout, levels, zoom_config, table)
    frame = compute_frame(layout, minimap_config, (width, height), enlarged=True)
    room = RoomState(room_id="snapshot", users={"you": UserState(name="you", color="#808080", pose=pose)})
    markers = marker_positions(room, "you", minimap_config, frame)
    svg = render_svg(layout, appearance, frame, markers, hidden_layers=minimap_config.hidden_layers)
    _write_bytes(args.output, svg)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cityviz", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="parse spans and emit a structure document")
    p_ingest.add_argument("spans", nargs="?", default="-", help="span JSONL file or - for stdin")
    p_ingest.add_argument("-o", "--output", default="-")
    p_ingest.add_argument("--merge", help="structure file with loc/instance overrides")
    p_ingest.set_defaults(func=cmd_ingest)

    p_gen = sub.add_parser("gen", help="generate a deterministic synthetic landscape")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--apps", type=int, default=6)
    p_gen.add_argument("--packages-per-app", type=int, default=2)
    p_gen.add_argument("--depth", type=int, default=2)
    p_gen.add_argument("--classes-per-package", type=int, default=3)
    p_gen.add_argument("--methods-per-class", type=int, default=3)
    p_gen.add_argument("--link-density", type=float, default=0.05)
    p_gen.add_argument("-o", "--output", default="-")
    p_gen.set_defaults(func=cmd_gen)

    p_layout = sub.add_parser("layout", help="compute the city layout for a structure")
    p_layout.add_argument("structure", nargs="?", default="-")
    p_layout.add_argument("--config", help="JSON config file ({layout: {...}})")
    p_layout.add_argument("-o", "--output", default="-")
    p_layout.set_defaults(func=cmd_layout)

    p_snap = sub.add_parser(
        "snapshot",
        help="run the full cluster/levels/appearance/top-view pipeline headlessly",
    )
    p_snap.add_argument("structure", nargs="?", default="-")
    p_snap.add_argument("--pose", required=True, help="x,y,z,tx,ty,tz")
    p_snap.add_argument("--config", help="JSON config file ({zoom, minimap, layout})")
    p_snap.add_argument("--screen", default="1920x1080")
    p_snap.add_argument("-o", "--output", default="-")
    p_snap.set_defaults(func=cmd_snapshot)

    p_serve = sub.add_parser("serve", help="run the HTTP/WebSocket service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
