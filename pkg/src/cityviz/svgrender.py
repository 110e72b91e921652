"""Headless SVG top view of the city.

Renders the same content the mini-map shows: foundations, districts,
buildings, method strips, communication curves with direction arrows,
labels and user markers, honoring the resolved appearance (closed
packages, hidden communication, label truncation) and layer filtering.
Output is byte-deterministic for identical inputs, so snapshots serve as
golden files in tests.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

from .layout import CityLayout, EntityBox
from .minimap import Marker, MinimapFrame, project
from .semzoom import AppearanceState, truncate_label

METHOD_COLORS = ("#ef6c00", "#8e24aa", "#00897b", "#c0ca33")
CLOSED_PACKAGE_COLOR = "#7a8ba6"
MARKER_STROKE = "#ffffff"
BASE_STROKE = "#10141c"
BASE_FONT_PX = 0.8  # at font scale 1, in world units before projection


def _fmt(value: float) -> str:
    return f"{value:.2f}"


class _Svg:
    def __init__(self, width: float, height: float):
        self.parts: list[str] = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
            f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        ]

    def open_layer(self, name: str) -> None:
        self.parts.append(f'<g id="{name}">')

    def close_layer(self) -> None:
        self.parts.append("</g>")

    def rect(self, x: float, y: float, w: float, h: float, fill: str,
             opacity: float | None = None) -> None:
        extra = f' fill-opacity="{_fmt(opacity)}"' if opacity is not None else ""
        self.parts.append(
            f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" height="{_fmt(h)}" '
            f'fill="{fill}" stroke="{BASE_STROKE}" stroke-width="0.30"{extra}/>'
        )

    def path(self, d: str, stroke: str, width: float) -> None:
        self.parts.append(
            f'<path d="{d}" fill="none" stroke="{stroke}" stroke-width="{_fmt(width)}"/>'
        )

    def polygon(self, points: list[tuple[float, float]], fill: str) -> None:
        joined = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
        self.parts.append(f'<polygon points="{joined}" fill="{fill}"/>')

    def circle(self, cx: float, cy: float, r: float, fill: str) -> None:
        self.parts.append(
            f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r)}" fill="{fill}" '
            f'stroke="{MARKER_STROKE}" stroke-width="1.00"/>'
        )

    def text(self, x: float, y: float, size: float, content: str) -> None:
        self.parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-family="monospace" '
            f'font-size="{_fmt(size)}" text-anchor="middle" fill="{BASE_STROKE}">'
            f"{escape(content)}</text>"
        )

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def render_svg(
    layout: CityLayout,
    appearance: AppearanceState,
    frame: MinimapFrame,
    markers: list[Marker],
    hidden_layers: frozenset[str] | set[str] = frozenset(),
) -> bytes:
    """Render the top view to SVG bytes. Markers always draw last."""
    side = frame.viewport.width
    svg = _Svg(side, side)
    config = layout.config

    def px(world_x: float, world_z: float) -> tuple[float, float]:
        u, v = project((world_x, world_z), frame)
        return (u * side, v * side)

    def box_rect(box: EntityBox) -> tuple[float, float, float, float]:
        x0, y0 = px(box.min_corner[0], box.max_corner[2])
        x1, y1 = px(box.max_corner[0], box.min_corner[2])
        return (x0, y0, x1 - x0, y1 - y0)

    table = appearance.table
    closed = set(appearance.closed_packages)

    def visible(entity_id: str) -> bool:
        return not appearance.hidden[table.index[entity_id]]

    boxes = layout.boxes

    if "foundation" not in hidden_layers:
        svg.open_layer("foundation")
        for eid, box in boxes.items():
            if box.kind == "application":
                svg.rect(*box_rect(box), fill=config.foundation_color)
        svg.close_layer()

    if "districts" not in hidden_layers:
        svg.open_layer("districts")
        for eid, box in boxes.items():
            if box.kind != "package" or not visible(eid):
                continue
            if eid in closed:
                fill = CLOSED_PACKAGE_COLOR
            else:
                fill = config.color_depth_palette[(box.depth - 1) % len(config.color_depth_palette)]
            svg.rect(*box_rect(box), fill=fill)
        svg.close_layer()

    if "buildings" not in hidden_layers:
        svg.open_layer("buildings")
        for eid, box in boxes.items():
            if box.kind == "class" and visible(eid):
                svg.rect(*box_rect(box), fill=config.building_color)
        svg.close_layer()

    if "methods" not in hidden_layers:
        svg.open_layer("methods")
        for eid, box in boxes.items():
            if box.kind != "class" or not visible(eid):
                continue
            row = table.index[eid]
            if not appearance.methods_visible[row]:
                continue
            heights = appearance.method_heights[table.method_slice(row)]
            total = float(heights.sum())
            if total <= 0:
                continue
            x, y, w, h = box_rect(box)
            offset = 0.0
            for i, segment in enumerate(heights):
                frac = float(segment) / total
                svg.rect(x, y + offset * h, w, frac * h,
                         fill=METHOD_COLORS[i % len(METHOD_COLORS)], opacity=0.85)
                offset += frac
        svg.close_layer()

    if "communication" not in hidden_layers:
        svg.open_layer("communication")
        for link in sorted(appearance.links.values(), key=lambda l: l.link_id):
            if not link.visible:
                continue
            src = boxes[link.source_id]
            tgt = boxes[link.target_id]
            x0, y0 = px(src.center[0], src.center[2])
            x1, y1 = px(tgt.center[0], tgt.center[2])
            chord = math.hypot(x1 - x0, y1 - y0)
            if chord <= 0:
                continue
            # Curvature bends the map projection sideways, scaled like the
            # 3D arc apex (factor * 0.3 * distance), halved for the flat view.
            bend = link.curvature_factor * 0.15 * chord
            nx, ny = -(y1 - y0) / chord, (x1 - x0) / chord
            cx_, cy_ = (x0 + x1) / 2 + nx * bend, (y0 + y1) / 2 + ny * bend
            width = (0.8 + 0.6 * math.log10(1 + link.request_count)) * link.thickness_scale
            svg.path(
                f"M {_fmt(x0)} {_fmt(y0)} Q {_fmt(cx_)} {_fmt(cy_)} {_fmt(x1)} {_fmt(y1)}",
                stroke=config.arc_color,
                width=width,
            )
            if link.arrows_visible:
                mx = 0.25 * x0 + 0.5 * cx_ + 0.25 * x1
                my = 0.25 * y0 + 0.5 * cy_ + 0.25 * y1
                dx, dy = (x1 - x0) / chord, (y1 - y0) / chord
                size = 3.0 + width
                svg.polygon(
                    [
                        (mx + dx * size, my + dy * size),
                        (mx - dx * size * 0.5 + nx * size * 0.6,
                         my - dy * size * 0.5 + ny * size * 0.6),
                        (mx - dx * size * 0.5 - nx * size * 0.6,
                         my - dy * size * 0.5 - ny * size * 0.6),
                    ],
                    fill=BASE_STROKE,
                )
        svg.close_layer()

    if "labels" not in hidden_layers:
        svg.open_layer("labels")
        px_per_world = side / (2 * frame.half_extents[0])
        for eid, slot in layout.labels.items():
            if not visible(eid):
                continue
            row = table.index[eid]
            scale = float(appearance.label_font_scale[row])
            budget = int(appearance.label_max_chars[row])
            x, y = px(slot.anchor[0], slot.anchor[2])
            svg.text(x, y, max(BASE_FONT_PX * scale * px_per_world, 2.0),
                     truncate_label(slot.text, budget))
        svg.close_layer()

    if "markers" not in hidden_layers:
        svg.open_layer("markers")
        radius = max(0.03 * side, 6.0)
        for marker in sorted(markers, key=lambda m: (m.is_self, m.user_id)):
            svg.circle(marker.uv[0] * side, marker.uv[1] * side, radius, marker.color)
        svg.close_layer()

    return svg.render().encode("utf-8")
