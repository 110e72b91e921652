"""City visualization engine: ingestion, layout, semantic zoom, mini-map,
collaborative sessions, and the HTTP/WebSocket service around them."""

__version__ = "0.1.0"

from .model import (
    CameraPose,
    CommunicationLink,
    LandscapeStructure,
    ValidationError,
)
from .ingest import (
    Span,
    SpanParseError,
    SyntheticParams,
    aggregate_communication,
    generate_synthetic,
    parse_spans,
    reconstruct_structure,
    spans_from_structure,
)
from .layout import CityLayout, LayoutConfig, arc_geometry, compute_layout
from .clustering import ClusterSet, cluster_kmeans, cluster_meanshift
from .semzoom import (
    AppearanceState,
    ZoomConfig,
    appearance_diff,
    apply_delta,
    assign_levels,
    build_clusters,
    build_entity_table,
    close_packages,
    entity_levels,
    resolve_appearance,
)
from .minimap import MinimapConfig, MinimapFrame, compute_frame, hit_test, marker_positions
from .svgrender import render_svg
from .collab import RoomState, apply_message, assign_color, parse_message

__all__ = [
    "CameraPose",
    "CommunicationLink",
    "LandscapeStructure",
    "ValidationError",
    "Span",
    "SpanParseError",
    "SyntheticParams",
    "aggregate_communication",
    "generate_synthetic",
    "parse_spans",
    "reconstruct_structure",
    "spans_from_structure",
    "CityLayout",
    "LayoutConfig",
    "arc_geometry",
    "compute_layout",
    "ClusterSet",
    "cluster_kmeans",
    "cluster_meanshift",
    "AppearanceState",
    "ZoomConfig",
    "appearance_diff",
    "apply_delta",
    "assign_levels",
    "build_clusters",
    "build_entity_table",
    "close_packages",
    "entity_levels",
    "resolve_appearance",
    "MinimapConfig",
    "MinimapFrame",
    "compute_frame",
    "hit_test",
    "marker_positions",
    "render_svg",
    "RoomState",
    "apply_message",
    "assign_color",
    "parse_message",
]
