from __future__ import annotations

import numpy as np

from cityviz.collab import PALETTE, RoomState, UserState
from cityviz.minimap import MinimapConfig, compute_frame, marker_positions
from cityviz.model import CameraPose
from cityviz.semzoom import resolve_appearance
from cityviz.svgrender import render_svg


def _render(scene, level, hidden=frozenset(), markers=None):
    structure, layout, table, clusters, config = scene
    levels = np.full(len(table), level, dtype=np.int64)
    state = resolve_appearance(structure, layout, levels, config, table)
    frame = compute_frame(layout, MinimapConfig(), (1920, 1080), enlarged=True)
    return render_svg(layout, state, frame, markers or [], hidden_layers=hidden), state


class TestRenderSvg:
    def test_deterministic_bytes(self, small_scene):
        a, _ = _render(small_scene, 0)
        b, _ = _render(small_scene, 0)
        assert a == b

    def test_valid_xml_shape(self, small_scene):
        svg, _ = _render(small_scene, 0)
        text = svg.decode("utf-8")
        assert text.startswith('<?xml version="1.0" encoding="UTF-8"?>')
        assert text.rstrip().endswith("</svg>")
        for layer in ("foundation", "districts", "buildings", "methods", "communication", "labels", "markers"):
            assert f'<g id="{layer}">' in text

    def test_hidden_layer_absent(self, small_scene):
        svg, _ = _render(small_scene, 0, hidden=frozenset({"communication", "labels"}))
        text = svg.decode("utf-8")
        assert '<g id="communication">' not in text
        assert "<text" not in text
        assert '<g id="buildings">' in text

    def test_methods_render_near_but_not_far(self, small_scene):
        near, _ = _render(small_scene, 0)
        far, _ = _render(small_scene, 2)
        assert near.decode("utf-8").count("fill-opacity") > 0
        assert far.decode("utf-8").count("fill-opacity") == 0

    def test_closed_package_single_rect_no_descendants(self, small_scene):
        structure, layout, table, clusters, config = small_scene
        svg, state = _render(small_scene, 4)
        text = svg.decode("utf-8")
        assert state.closed_packages
        closed = state.closed_packages[0]
        hidden_children = [
            eid for i, eid in enumerate(table.ids) if state.hidden[i]
        ]
        assert hidden_children
        # Closed district still drawn (one rect in the districts layer),
        # hidden descendants contribute neither rects nor labels.
        districts = text.split('<g id="districts">')[1].split("</g>")[0]
        assert districts.count("<rect") == sum(
            1 for i, eid in enumerate(table.ids)
            if table.kinds[i] == 1 and not state.hidden[i]
        )
        buildings = text.split('<g id="buildings">')[1].split("</g>")[0]
        visible_classes = sum(
            1 for i in range(len(table)) if table.kinds[i] == 2 and not state.hidden[i]
        )
        assert buildings.count("<rect") == visible_classes

    def test_hidden_links_not_rendered(self, small_scene):
        svg, state = _render(small_scene, 3)
        text = svg.decode("utf-8")
        visible = sum(1 for l in state.links.values() if l.visible)
        comm = text.split('<g id="communication">')[1].split("</g>")[0]
        assert comm.count("<path") == visible
        assert comm.count("<polygon") == 0  # arrows hidden at level 3

    def test_arrows_rendered_near(self, small_scene):
        svg, state = _render(small_scene, 1)
        comm = svg.decode("utf-8").split('<g id="communication">')[1].split("</g>")[0]
        assert comm.count("<polygon") == len(state.links)

    def test_markers_drawn_last_self_on_top(self, small_scene):
        structure, layout, table, clusters, config = small_scene
        room = RoomState(room_id="r", users={
            "me": UserState(name="me", color=PALETTE[0], pose=CameraPose((5, 20, 5), (0, 0, 0))),
            "other": UserState(name="other", color=PALETTE[1], pose=CameraPose((9, 20, 9), (0, 0, 0))),
        })
        frame = compute_frame(layout, MinimapConfig(), (1920, 1080), enlarged=True)
        markers = marker_positions(room, "me", MinimapConfig(), frame)
        svg, _ = _render(small_scene, 0, markers=markers)
        text = svg.decode("utf-8")
        markers_part = text.split('<g id="markers">')[1]
        assert markers_part.index(PALETTE[1]) < markers_part.index("#808080")
        assert text.rfind("<circle") > text.rfind("<rect")

    def test_label_budget_shrinks_as_font_grows(self, small_scene):
        # Levels 0 and 3 render the same entities (no closures yet), but the
        # grown font at level 3 leaves a smaller character budget.
        near, near_state = _render(small_scene, 0)
        far, far_state = _render(small_scene, 3)
        assert (far_state.label_max_chars <= near_state.label_max_chars).all()
        assert far.decode("utf-8").count("…") >= near.decode("utf-8").count("…")
        # labels never disappear with distance, they only shorten
        assert far.decode("utf-8").count("<text") == near.decode("utf-8").count("<text")
