"""In-memory landscape store.

Each landscape becomes an immutable Scene snapshot: structure, layout,
entity table and clusters. Settings updates produce a new snapshot;
clusters are recomputed only when the zoom configuration changes, never
on camera motion.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from ..clustering import ClusterSet
from ..layout import CityLayout, LayoutConfig, compute_layout
from ..minimap import MinimapConfig
from ..model import LandscapeStructure
from ..semzoom import EntityTable, ZoomConfig, build_clusters, build_entity_table


@dataclass
class Scene:
    landscape_id: str
    structure: LandscapeStructure
    layout: CityLayout
    table: EntityTable
    clusters: ClusterSet
    zoom: ZoomConfig
    minimap: MinimapConfig
    version: int = 0
    diagnostics: dict[str, int] = field(default_factory=dict)


def build_scene(
    landscape_id: str,
    structure: LandscapeStructure,
    zoom: ZoomConfig | None = None,
    minimap: MinimapConfig | None = None,
    layout_config: LayoutConfig | None = None,
    diagnostics: dict[str, int] | None = None,
) -> Scene:
    layout = compute_layout(structure, layout_config)
    table = build_entity_table(structure, layout)
    zoom = (zoom or ZoomConfig()).validate()
    return Scene(
        landscape_id=landscape_id,
        structure=structure,
        layout=layout,
        table=table,
        clusters=build_clusters(table, zoom),
        zoom=zoom,
        minimap=(minimap or MinimapConfig()).validate(),
        diagnostics=diagnostics or {},
    )


class LandscapeStore:
    def __init__(self):
        self._scenes: dict[str, Scene] = {}
        self._lock = threading.Lock()
        self._counter = 0

    def create(
        self,
        structure: LandscapeStructure,
        diagnostics: dict[str, int] | None = None,
    ) -> Scene:
        with self._lock:
            self._counter += 1
            landscape_id = f"ls{self._counter:04d}"
        scene = build_scene(landscape_id, structure, diagnostics=diagnostics)
        with self._lock:
            self._scenes[landscape_id] = scene
        return scene

    def get(self, landscape_id: str) -> Scene | None:
        return self._scenes.get(landscape_id)

    def update_settings(
        self, landscape_id: str, zoom: ZoomConfig, minimap: MinimapConfig
    ) -> Scene:
        with self._lock:
            scene = self._scenes[landscape_id]
            zoom_changed = zoom.to_dict() != scene.zoom.to_dict()
            clusters = build_clusters(scene.table, zoom) if zoom_changed else scene.clusters
            updated = Scene(
                landscape_id=scene.landscape_id,
                structure=scene.structure,
                layout=scene.layout,
                table=scene.table,
                clusters=clusters,
                zoom=zoom,
                minimap=minimap,
                version=scene.version + 1 if zoom_changed else scene.version,
                diagnostics=scene.diagnostics,
            )
            self._scenes[landscape_id] = updated
            return updated
