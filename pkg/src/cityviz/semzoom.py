"""Distance-driven semantic zoom.

Entities are clustered once per landscape/config; every camera move then
costs one distance computation per cluster centroid. The distance maps
through ascending thresholds to a discrete appearance level (0 = nearest,
most detail), and the level drives nine appearance rules:

  1. class height scaled by instance count (near levels)
  2. method meshes stacked on the class, heights proportional to LoC
  3. method meshes hidden at far levels
  4. label font scale grows with distance
  5. labels truncated to fit their slot at the grown font
  6. communication thickness scaled by level
  7. communication curvature scaled by level
  8. low-traffic communication and direction arrows hidden when far
  9. deep packages closed at the farthest level, with their
     communication aggregated onto the closed package

Every rule can be toggled via feature flags; thresholds, cluster count
and the quantile for rule 8 are user configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .clustering import ClusterSet, cluster_kmeans, cluster_meanshift
from .layout import CityLayout
from .model import (
    CameraPose,
    CommunicationLink,
    LandscapeStructure,
    ValidationError,
    class_entity_id,
    link_entity_id,
)

DEFAULT_THRESHOLDS: tuple[float, ...] = (25.0, 60.0, 120.0, 250.0)
LEVEL_COUNT = 5

LABEL_FONT_SCALE = np.array([1.0, 1.0, 1.3, 1.6, 2.0])
COMM_THICKNESS_SCALE = np.array([0.6, 0.8, 1.0, 1.3, 1.6])
COMM_CURVATURE_FACTOR = np.array([0.5, 0.75, 1.0, 1.3, 1.6])
CHAR_WIDTH = 0.6  # world units per character at font scale 1 (monospace estimate)
MAX_CLUSTER_COUNT = 64

RULE_NAMES = (
    "classHeight",
    "methodStacks",
    "methodHide",
    "labelSize",
    "labelTruncate",
    "commThickness",
    "commCurvature",
    "commHide",
    "packageClose",
)

KIND_APP, KIND_PACKAGE, KIND_CLASS = 0, 1, 2
_KIND_CODES = {"application": KIND_APP, "package": KIND_PACKAGE, "class": KIND_CLASS}


@dataclass
class ZoomConfig:
    algorithm: str = "kmeans"
    cluster_count: int | None = None  # None: ceil(sqrt(N)) clamped to 64
    bandwidth: float = 25.0
    level_thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    seed: int = 7
    feature_flags: dict[str, bool] = field(default_factory=dict)
    comm_hide_quantile: float = 0.5
    auto_close_depth: int = 1

    def validate(self) -> "ZoomConfig":
        if self.algorithm not in ("kmeans", "meanshift"):
            raise ValidationError(f"unknown clustering algorithm: {self.algorithm}")
        if self.cluster_count is not None and self.cluster_count < 1:
            raise ValidationError("cluster count must be >= 1")
        if self.bandwidth <= 0:
            raise ValidationError("bandwidth must be positive")
        thresholds = tuple(float(t) for t in self.level_thresholds)
        if len(thresholds) != LEVEL_COUNT - 1:
            raise ValidationError(f"exactly {LEVEL_COUNT - 1} level thresholds are required")
        if any(b <= a for a, b in zip(thresholds, thresholds[1:])) or thresholds[0] <= 0:
            raise ValidationError("level thresholds must be positive and strictly ascending")
        self.level_thresholds = thresholds
        for name in self.feature_flags:
            if name not in RULE_NAMES:
                raise ValidationError(f"unknown feature flag: {name}")
        if not 0.0 <= self.comm_hide_quantile <= 1.0:
            raise ValidationError("commHideQuantile must lie in [0, 1]")
        if self.auto_close_depth < 1:
            raise ValidationError("autoCloseDepth must be >= 1")
        return self

    def rule(self, name: str) -> bool:
        return self.feature_flags.get(name, True)

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "clusterCount": self.cluster_count,
            "bandwidth": self.bandwidth,
            "levelThresholds": list(self.level_thresholds),
            "seed": self.seed,
            "featureFlags": dict(sorted(self.feature_flags.items())),
            "commHideQuantile": self.comm_hide_quantile,
            "autoCloseDepth": self.auto_close_depth,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ZoomConfig":
        cfg = cls(
            algorithm=doc.get("algorithm", "kmeans"),
            cluster_count=doc.get("clusterCount"),
            bandwidth=doc.get("bandwidth", 25.0),
            level_thresholds=tuple(doc.get("levelThresholds", DEFAULT_THRESHOLDS)),
            seed=int(doc.get("seed", 7)),
            feature_flags=dict(doc.get("featureFlags", {})),
            comm_hide_quantile=doc.get("commHideQuantile", 0.5),
            auto_close_depth=int(doc.get("autoCloseDepth", 1)),
        )
        return cfg.validate()


def default_cluster_count(entity_count: int) -> int:
    return max(1, min(math.ceil(math.sqrt(entity_count)), MAX_CLUSTER_COUNT, entity_count))


# ---------------------------------------------------------------------------
# Entity table: array-backed view of structure + layout
# ---------------------------------------------------------------------------

@dataclass
class EntityTable:
    """Flat arrays over every laid-out entity, in layout order.

    Built once per landscape; all per-pose computations index into it.
    """

    ids: tuple[str, ...]
    index: dict[str, int]
    kinds: np.ndarray
    centers: np.ndarray
    depths: np.ndarray
    names: tuple[str, ...]
    label_width: np.ndarray
    inst_log: np.ndarray
    class_height: np.ndarray
    method_entity: np.ndarray
    method_frac: np.ndarray
    method_start: np.ndarray
    method_count: np.ndarray
    ancestors: np.ndarray  # (n, max_depth) package rows, -1 padded, outermost first
    class_chains: dict[str, tuple[str, ...]]
    base_links: list[CommunicationLink]
    package_ids: frozenset[str] = frozenset()
    base_topology: "LinkTopology | None" = None
    _topology_cache: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.ids)

    def method_slice(self, row: int) -> slice:
        start = int(self.method_start[row])
        return slice(start, start + int(self.method_count[row]))

    def topology_for(self, antichain: tuple[str, ...]) -> "LinkTopology":
        """Routed link topology for a closed-package antichain, memoized.

        Vectorized fast path of close_packages over the base topology;
        the test suite holds the two exactly equivalent.
        """
        if not antichain:
            return self.base_topology
        cached = self._topology_cache.get(antichain)
        if cached is not None:
            return cached
        topology = self._route(antichain)
        if len(self._topology_cache) >= 64:
            self._topology_cache.clear()
        self._topology_cache[antichain] = topology
        return topology

    def _route(self, antichain: tuple[str, ...]) -> "LinkTopology":
        n = len(self.ids)
        closed = np.zeros(n, dtype=bool)
        closed[[self.index[pid] for pid in antichain]] = True
        in_closed = closed[np.clip(self.ancestors, 0, None)] & (self.ancestors >= 0)
        has_owner = in_closed.any(axis=1)
        first = in_closed.argmax(axis=1)
        owner = np.where(has_owner, self.ancestors[np.arange(n), first], -1)

        base = self.base_topology
        src = np.where(owner[base.source_rows] >= 0, owner[base.source_rows], base.source_rows)
        tgt = np.where(owner[base.target_rows] >= 0, owner[base.target_rows], base.target_rows)
        keep = src != tgt  # both endpoints folded into the same closed package
        src, tgt = src[keep], tgt[keep]
        keys, inverse = np.unique(src * n + tgt, return_inverse=True)
        counts = np.bincount(inverse, weights=base.request_counts[keep]).astype(np.int64)
        rows_s, rows_t = keys // n, keys % n
        source_ids = [self.ids[int(r)] for r in rows_s]
        target_ids = [self.ids[int(r)] for r in rows_t]
        order = sorted(range(len(keys)), key=lambda i: (source_ids[i], target_ids[i]))
        return LinkTopology(
            ids=tuple(link_entity_id(source_ids[i], target_ids[i]) for i in order),
            source_ids=tuple(source_ids[i] for i in order),
            target_ids=tuple(target_ids[i] for i in order),
            source_rows=rows_s[order].astype(np.int64),
            target_rows=rows_t[order].astype(np.int64),
            request_counts=counts[order],
        )


@dataclass(frozen=True)
class LinkTopology:
    """Routed link endpoints as table rows; appearance-independent."""

    ids: tuple[str, ...]
    source_ids: tuple[str, ...]
    target_ids: tuple[str, ...]
    source_rows: np.ndarray
    target_rows: np.ndarray
    request_counts: np.ndarray


def _topology_from_routed(routed: list["RoutedLink"], index: dict[str, int]) -> LinkTopology:
    return LinkTopology(
        ids=tuple(r.link_id for r in routed),
        source_ids=tuple(r.source_id for r in routed),
        target_ids=tuple(r.target_id for r in routed),
        source_rows=np.asarray([index[r.source_id] for r in routed], dtype=np.int64),
        target_rows=np.asarray([index[r.target_id] for r in routed], dtype=np.int64),
        request_counts=np.asarray([r.request_count for r in routed], dtype=np.int64),
    )


def build_entity_table(structure: LandscapeStructure, layout: CityLayout) -> EntityTable:
    classes = {fqn: cls for fqn, (_, _, cls) in structure.class_index().items()}
    chains = structure.package_chain_index()

    ids = tuple(layout.boxes)
    index = {eid: i for i, eid in enumerate(ids)}
    n = len(ids)
    kinds = np.zeros(n, dtype=np.int8)
    centers = np.zeros((n, 3), dtype=np.float64)
    depths = np.zeros(n, dtype=np.int32)
    label_width = np.zeros(n, dtype=np.float64)
    inst_log = np.zeros(n, dtype=np.float64)
    class_height = np.zeros(n, dtype=np.float64)
    names = []

    method_entity: list[int] = []
    method_frac: list[float] = []
    method_start = np.zeros(n, dtype=np.int64)
    method_count = np.zeros(n, dtype=np.int64)

    ancestor_rows: list[list[int]] = []
    for i, (eid, box) in enumerate(layout.boxes.items()):
        kinds[i] = _KIND_CODES[box.kind]
        centers[i] = box.center
        depths[i] = box.depth
        label_width[i] = layout.labels[eid].max_width
        names.append(layout.labels[eid].text)
        chain: list[int] = []
        if box.kind == "class":
            fqn = eid[len("cls:"):]
            cls = classes[fqn]
            inst_log[i] = math.log2(1 + cls.instance_count)
            class_height[i] = box.max_corner[1] - box.min_corner[1]
            method_start[i] = len(method_entity)
            method_count[i] = len(cls.methods)
            total_loc = sum(m.loc for m in cls.methods)
            for m in cls.methods:
                method_entity.append(i)
                method_frac.append(
                    m.loc / total_loc if total_loc > 0 else 1.0 / len(cls.methods)
                )
            chain = [index[pid] for pid in chains[fqn]]
        elif box.kind == "package":
            app_name, _, path = eid[len("pkg:"):].partition(":")
            segments = path.split(".")
            chain = [
                index[f"pkg:{app_name}:{'.'.join(segments[:d + 1])}"]
                for d in range(len(segments) - 1)
            ]
        ancestor_rows.append(chain)

    max_depth = max((len(c) for c in ancestor_rows), default=0) or 1
    ancestors = np.full((n, max_depth), -1, dtype=np.int32)
    for i, chain in enumerate(ancestor_rows):
        ancestors[i, : len(chain)] = chain

    table = EntityTable(
        ids=ids,
        index=index,
        kinds=kinds,
        centers=centers,
        depths=depths,
        names=tuple(names),
        label_width=label_width,
        inst_log=inst_log,
        class_height=class_height,
        method_entity=np.asarray(method_entity, dtype=np.int64),
        method_frac=np.asarray(method_frac, dtype=np.float64),
        method_start=method_start,
        method_count=method_count,
        ancestors=ancestors,
        class_chains=chains,
        base_links=list(structure.communications),
        package_ids=frozenset(eid for eid in ids if eid.startswith("pkg:")),
    )
    identity = [
        RoutedLink(
            source_id=class_entity_id(l.source_fqn),
            target_id=class_entity_id(l.target_fqn),
            request_count=l.request_count,
        )
        for l in table.base_links
    ]
    identity.sort(key=lambda r: (r.source_id, r.target_id))
    table.base_topology = _topology_from_routed(identity, index)
    return table


def build_clusters(table: EntityTable, config: ZoomConfig) -> ClusterSet:
    """Cluster all entity box centers per the configured algorithm."""
    config.validate()
    if config.algorithm == "meanshift":
        return cluster_meanshift(table.centers, config.bandwidth, ids=table.ids)
    if config.cluster_count is None:
        k = default_cluster_count(len(table))
    else:
        k = config.cluster_count
    return cluster_kmeans(table.centers, k, config.seed, ids=table.ids)


# ---------------------------------------------------------------------------
# Level assignment
# ---------------------------------------------------------------------------

def entity_levels(
    pose: CameraPose, clusters: ClusterSet, thresholds: tuple[float, ...]
) -> np.ndarray:
    """Per-entity levels (aligned with clusters.ids), via centroid distance.

    Levels use half-open bands [t_i, t_{i+1}) with t_0 = 0 and the last
    band unbounded, so a distance exactly on a threshold takes the higher
    level.
    """
    t = np.asarray(thresholds, dtype=np.float64)
    if (np.diff(t) <= 0).any():
        raise ValidationError("level thresholds must be strictly ascending")
    position = np.asarray(pose.position, dtype=np.float64)
    distances = np.linalg.norm(clusters.centroids - position, axis=1)
    cluster_levels = np.searchsorted(t, distances, side="right")
    return cluster_levels[clusters.labels]


def assign_levels(
    pose: CameraPose, clusters: ClusterSet, thresholds: tuple[float, ...]
) -> dict[str, int]:
    """Map every entity id to its discrete appearance level."""
    levels = entity_levels(pose, clusters, thresholds)
    return {eid: int(lv) for eid, lv in zip(clusters.ids, levels)}


# ---------------------------------------------------------------------------
# Package closing (rule 9 aggregation)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RoutedLink:
    """A communication link after closed-package aggregation.

    Endpoints are entity ids: a class id, or the closed package id the
    original class endpoint was folded into.
    """

    source_id: str
    target_id: str
    request_count: int

    @property
    def link_id(self) -> str:
        return link_entity_id(self.source_id, self.target_id)


def _parse_package_id(entity_id: str) -> tuple[str, tuple[str, ...]]:
    if not entity_id.startswith("pkg:"):
        raise ValidationError(f"not a package entity id: {entity_id}")
    app, _, path = entity_id[len("pkg:"):].partition(":")
    return app, tuple(path.split("."))


def close_packages(
    links: list[CommunicationLink],
    closed_packages: tuple[str, ...] | list[str] | set[str],
    structure: LandscapeStructure,
    chains: dict[str, tuple[str, ...]] | None = None,
    known_packages: frozenset[str] | set[str] | None = None,
) -> list[RoutedLink]:
    """Re-target links whose endpoints sit inside closed packages.

    The closed set must be an antichain: no closed package may contain
    another. Links that collapse onto a single closed package vanish;
    parallel links merge with summed request counts. Output is sorted by
    (source, target).
    """
    closed_set = set(closed_packages)
    for c in sorted(closed_set):
        app, path = _parse_package_id(c)
        for depth in range(1, len(path)):
            if f"pkg:{app}:{'.'.join(path[:depth])}" in closed_set:
                raise ValidationError(
                    f"closed packages must form an antichain: an ancestor of {c} is closed"
                )
    chains = chains if chains is not None else structure.package_chain_index()
    if known_packages is None:
        known_packages = {pid for chain in chains.values() for pid in chain}
    for c in sorted(closed_set):
        if c not in known_packages:
            raise ValidationError(f"closed package is not part of the landscape: {c}")

    def route(fqn: str) -> str:
        for pid in chains[fqn]:
            if pid in closed_set:
                return pid
        return class_entity_id(fqn)

    counts: dict[tuple[str, str], int] = {}
    for link in links:
        source = route(link.source_fqn)
        target = route(link.target_fqn)
        if source == target and source in closed_set:
            continue
        key = (source, target)
        counts[key] = counts.get(key, 0) + link.request_count
    return [
        RoutedLink(source_id=s, target_id=t, request_count=c)
        for (s, t), c in sorted(counts.items())
    ]


def lower_quantile(values: np.ndarray, q: float) -> float:
    """Smallest value v such that at least q*n of the values are <= v."""
    ordered = np.sort(values)
    idx = max(0, min(len(ordered) - 1, math.ceil(q * len(ordered)) - 1))
    return float(ordered[idx])


# ---------------------------------------------------------------------------
# Appearance resolution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinkAppearance:
    link_id: str
    source_id: str
    target_id: str
    request_count: int
    level: int
    thickness_scale: float
    curvature_factor: float
    visible: bool
    arrows_visible: bool

    def to_dict(self) -> dict:
        return {
            "sourceId": self.source_id,
            "targetId": self.target_id,
            "requestCount": self.request_count,
            "level": self.level,
            "thicknessScale": self.thickness_scale,
            "curvatureFactor": self.curvature_factor,
            "visible": self.visible,
            "arrowsVisible": self.arrows_visible,
        }


@dataclass
class LinkStates:
    """Appearance of every routed link, stored as parallel arrays.

    Quacks like a mapping of link id to LinkAppearance where convenient;
    the arrays keep per-pose recomputation off the Python object heap.
    """

    topology: LinkTopology
    levels: np.ndarray
    thickness: np.ndarray
    curvature: np.ndarray
    visible: np.ndarray
    arrows: np.ndarray

    @property
    def ids(self) -> tuple[str, ...]:
        return self.topology.ids

    def __len__(self) -> int:
        return len(self.topology.ids)

    def __contains__(self, link_id: str) -> bool:
        return link_id in self.topology.ids

    def __iter__(self):
        return iter(self.topology.ids)

    def keys(self) -> tuple[str, ...]:
        return self.topology.ids

    def view(self, i: int) -> LinkAppearance:
        t = self.topology
        return LinkAppearance(
            link_id=t.ids[i],
            source_id=t.source_ids[i],
            target_id=t.target_ids[i],
            request_count=int(t.request_counts[i]),
            level=int(self.levels[i]),
            thickness_scale=float(self.thickness[i]),
            curvature_factor=float(self.curvature[i]),
            visible=bool(self.visible[i]),
            arrows_visible=bool(self.arrows[i]),
        )

    def __getitem__(self, link_id: str) -> LinkAppearance:
        return self.view(self.topology.ids.index(link_id))

    def values(self) -> list[LinkAppearance]:
        return [self.view(i) for i in range(len(self))]

    def record(self, i: int) -> dict:
        return self.view(i).to_dict()

    def as_records(self) -> dict[str, dict]:
        return {self.topology.ids[i]: self.record(i) for i in range(len(self))}

    @classmethod
    def from_records(cls, records: dict[str, dict], index: dict[str, int]) -> "LinkStates":
        ordered = sorted(records.items(), key=lambda kv: (kv[1]["sourceId"], kv[1]["targetId"]))
        routed = [
            RoutedLink(rec["sourceId"], rec["targetId"], int(rec["requestCount"]))
            for _, rec in ordered
        ]
        return cls(
            topology=_topology_from_routed(routed, index),
            levels=np.asarray([rec["level"] for _, rec in ordered], dtype=np.int64),
            thickness=np.asarray([rec["thicknessScale"] for _, rec in ordered]),
            curvature=np.asarray([rec["curvatureFactor"] for _, rec in ordered]),
            visible=np.asarray([rec["visible"] for _, rec in ordered], dtype=bool),
            arrows=np.asarray([rec["arrowsVisible"] for _, rec in ordered], dtype=bool),
        )


@dataclass(frozen=True)
class EntityAppearance:
    entity_id: str
    level: int
    hidden: bool
    label_font_scale: float
    label_max_chars: int
    class_height_scale: float = 1.0
    methods_visible: bool = False
    method_segments: tuple[float, ...] = ()
    package_open: bool = True


@dataclass
class AppearanceState:
    """Resolved appearance attributes for every entity and link."""

    table: EntityTable
    levels: np.ndarray
    class_height_scale: np.ndarray
    methods_visible: np.ndarray
    method_heights: np.ndarray
    label_font_scale: np.ndarray
    label_max_chars: np.ndarray
    package_open: np.ndarray
    hidden: np.ndarray
    closed_packages: tuple[str, ...]
    links: LinkStates

    def for_entity(self, entity_id: str) -> EntityAppearance:
        row = self.table.index[entity_id]
        segments: tuple[float, ...] = ()
        if self.methods_visible[row]:
            segments = tuple(float(h) for h in self.method_heights[self.table.method_slice(row)])
        return EntityAppearance(
            entity_id=entity_id,
            level=int(self.levels[row]),
            hidden=bool(self.hidden[row]),
            label_font_scale=float(self.label_font_scale[row]),
            label_max_chars=int(self.label_max_chars[row]),
            class_height_scale=float(self.class_height_scale[row]),
            methods_visible=bool(self.methods_visible[row]),
            method_segments=segments,
            package_open=bool(self.package_open[row]),
        )

    def levels_dict(self) -> dict[str, int]:
        return {eid: int(lv) for eid, lv in zip(self.table.ids, self.levels)}


def resolve_appearance(
    structure: LandscapeStructure,
    layout: CityLayout,
    levels,
    config: ZoomConfig,
    table: EntityTable | None = None,
) -> AppearanceState:
    """Apply the nine appearance rules for one level assignment.

    `levels` is either the dict produced by assign_levels or the array
    from entity_levels (aligned with the table); both must cover every
    entity. Pure: identical inputs produce identical states.
    """
    config.validate()
    if table is None:
        table = build_entity_table(structure, layout)
    n = len(table)

    if isinstance(levels, dict):
        try:
            lv = np.asarray([levels[eid] for eid in table.ids], dtype=np.int64)
        except KeyError as exc:
            raise ValidationError(f"levels must cover every entity, missing {exc.args[0]!r}")
    else:
        lv = np.asarray(levels, dtype=np.int64)
        if lv.shape != (n,):
            raise ValidationError("level array does not match the entity table")
    if lv.min(initial=0) < 0 or lv.max(initial=0) >= LEVEL_COUNT:
        raise ValidationError(f"levels must lie in [0, {LEVEL_COUNT - 1}]")

    is_class = table.kinds == KIND_CLASS
    is_package = table.kinds == KIND_PACKAGE
    near = lv <= 1

    # Rule 1: instance count raises class height at near levels.
    class_height_scale = np.ones(n)
    if config.rule("classHeight"):
        mask = is_class & near
        class_height_scale[mask] = 1.0 + 0.2 * table.inst_log[mask]

    # Rules 2 and 3: method stacks exist near, disappear far.
    methods_visible = np.zeros(n, dtype=bool)
    if config.rule("methodStacks"):
        methods_visible = is_class & (table.method_count > 0)
        if config.rule("methodHide"):
            methods_visible = methods_visible & near

    effective_height = table.class_height * class_height_scale
    method_heights = (
        table.method_frac
        * effective_height[table.method_entity]
        * methods_visible[table.method_entity]
    )

    # Rules 4 and 5: label font grows with level; text budget shrinks.
    if config.rule("labelSize"):
        label_font_scale = LABEL_FONT_SCALE[lv]
    else:
        label_font_scale = np.ones(n)
    if config.rule("labelTruncate"):
        label_max_chars = np.maximum(
            1, np.floor(table.label_width / (label_font_scale * CHAR_WIDTH))
        ).astype(np.int64)
    else:
        label_max_chars = np.full(n, 10**6, dtype=np.int64)

    # Rule 9: close deep packages at the farthest level.
    closed_mask = np.zeros(n, dtype=bool)
    if config.rule("packageClose"):
        closed_mask = is_package & (lv == LEVEL_COUNT - 1) & (table.depths > config.auto_close_depth)
    package_open = ~closed_mask
    valid_anc = table.ancestors >= 0
    hidden = (closed_mask[np.clip(table.ancestors, 0, None)] & valid_anc).any(axis=1)
    outermost = closed_mask & ~hidden
    antichain = tuple(sorted(table.ids[i] for i in np.flatnonzero(outermost)))

    topology = table.topology_for(antichain)

    # Rules 6-8: communication thickness, curvature, and hiding. A link's
    # level is the more detailed (lower) of its endpoint levels.
    m = len(topology.ids)
    link_levels = (
        np.minimum(lv[topology.source_rows], lv[topology.target_rows])
        if m else np.zeros(0, dtype=np.int64)
    )
    thickness = COMM_THICKNESS_SCALE[link_levels] if config.rule("commThickness") else np.ones(m)
    curvature = COMM_CURVATURE_FACTOR[link_levels] if config.rule("commCurvature") else np.ones(m)
    if config.rule("commHide") and m:
        threshold = lower_quantile(topology.request_counts, config.comm_hide_quantile)
        visible = (link_levels < 3) | (topology.request_counts >= threshold)
        arrows = visible & (link_levels <= 2)
    else:
        visible = np.ones(m, dtype=bool)
        arrows = np.ones(m, dtype=bool)
    links = LinkStates(
        topology=topology,
        levels=link_levels,
        thickness=np.asarray(thickness, dtype=np.float64),
        curvature=np.asarray(curvature, dtype=np.float64),
        visible=visible,
        arrows=arrows,
    )

    return AppearanceState(
        table=table,
        levels=lv,
        class_height_scale=class_height_scale,
        methods_visible=methods_visible,
        method_heights=method_heights,
        label_font_scale=np.asarray(label_font_scale, dtype=np.float64),
        label_max_chars=label_max_chars,
        package_open=package_open,
        hidden=hidden,
        closed_packages=antichain,
        links=links,
    )


def truncate_label(text: str, max_chars: int) -> str:
    """Shorten to the budget, keeping a prefix plus an ellipsis."""
    if max_chars < 1:
        raise ValidationError("label budget must be >= 1")
    if len(text) <= max_chars:
        return text
    if max_chars == 1:
        return "…"
    return text[: max_chars - 1] + "…"


# ---------------------------------------------------------------------------
# Appearance deltas
# ---------------------------------------------------------------------------

@dataclass
class AppearanceDelta:
    """Minimal change set between two appearance states over one landscape."""

    entities: dict[str, dict] = field(default_factory=dict)
    links_upsert: dict[str, dict] = field(default_factory=dict)
    links_removed: tuple[str, ...] = ()
    closed_packages: tuple[str, ...] | None = None
    full: bool = False

    def is_empty(self) -> bool:
        return not (self.entities or self.links_upsert or self.links_removed
                    or self.closed_packages is not None)

    def to_dict(self) -> dict:
        doc: dict = {
            "full": self.full,
            "entities": self.entities,
            "linksUpsert": self.links_upsert,
            "linksRemoved": list(self.links_removed),
        }
        if self.closed_packages is not None:
            doc["closedPackages"] = list(self.closed_packages)
        return doc


_ENTITY_FIELDS = (
    ("level", "levels", int),
    ("hidden", "hidden", bool),
    ("labelFontScale", "label_font_scale", float),
    ("labelMaxChars", "label_max_chars", int),
    ("classHeightScale", "class_height_scale", float),
    ("methodsVisible", "methods_visible", bool),
    ("packageOpen", "package_open", bool),
)


def _entity_record(state: AppearanceState, row: int) -> dict:
    record = {
        wire: cast(getattr(state, attr)[row]) for wire, attr, cast in _ENTITY_FIELDS
    }
    if state.table.kinds[row] == KIND_CLASS:
        record["methodSegments"] = (
            [float(h) for h in state.method_heights[state.table.method_slice(row)]]
            if state.methods_visible[row]
            else []
        )
    return record


def appearance_diff(prev: AppearanceState | None, next_state: AppearanceState) -> AppearanceDelta:
    """Changed attributes between two states; prev=None yields a full delta.

    Applying the result to prev with apply_delta reproduces next_state
    exactly.
    """
    table = next_state.table
    if prev is None:
        return AppearanceDelta(
            entities={eid: _entity_record(next_state, i) for i, eid in enumerate(table.ids)},
            links_upsert=next_state.links.as_records(),
            links_removed=(),
            closed_packages=next_state.closed_packages,
            full=True,
        )
    if prev.table.ids != table.ids:
        raise ValidationError("appearance states cover different landscapes")

    changed = np.flatnonzero(
        (prev.levels != next_state.levels)
        | (prev.hidden != next_state.hidden)
        | (prev.label_font_scale != next_state.label_font_scale)
        | (prev.label_max_chars != next_state.label_max_chars)
        | (prev.class_height_scale != next_state.class_height_scale)
        | (prev.methods_visible != next_state.methods_visible)
        | (prev.package_open != next_state.package_open)
    )
    method_changed = set()
    if len(prev.method_heights):
        diff_rows = np.flatnonzero(prev.method_heights != next_state.method_heights)
        method_changed = {int(table.method_entity[i]) for i in diff_rows}

    entities: dict[str, dict] = {}
    for row in sorted(set(changed.tolist()) | method_changed):
        record: dict = {}
        for wire, attr, cast in _ENTITY_FIELDS:
            a, b = getattr(prev, attr)[row], getattr(next_state, attr)[row]
            if a != b:
                record[wire] = cast(b)
        if row in method_changed or (
            table.kinds[row] == KIND_CLASS
            and prev.methods_visible[row] != next_state.methods_visible[row]
        ):
            record["methodSegments"] = (
                [float(h) for h in next_state.method_heights[table.method_slice(row)]]
                if next_state.methods_visible[row]
                else []
            )
        if record:
            entities[table.ids[row]] = record

    links_upsert: dict[str, dict] = {}
    links_removed: tuple[str, ...] = ()
    a, b = prev.links, next_state.links
    if a.topology.ids == b.topology.ids:
        changed_links = np.flatnonzero(
            (a.levels != b.levels)
            | (a.thickness != b.thickness)
            | (a.curvature != b.curvature)
            | (a.visible != b.visible)
            | (a.arrows != b.arrows)
        )
        links_upsert = {b.topology.ids[i]: b.record(i) for i in changed_links.tolist()}
    else:
        prev_records = a.as_records()
        next_records = b.as_records()
        links_upsert = {
            lid: rec for lid, rec in next_records.items() if prev_records.get(lid) != rec
        }
        links_removed = tuple(sorted(set(prev_records) - set(next_records)))
    closed = (
        next_state.closed_packages
        if prev.closed_packages != next_state.closed_packages
        else None
    )
    return AppearanceDelta(
        entities=entities,
        links_upsert=links_upsert,
        links_removed=links_removed,
        closed_packages=closed,
    )


def _empty_links() -> LinkStates:
    empty = np.zeros(0)
    return LinkStates(
        topology=LinkTopology((), (), (), np.zeros(0, dtype=np.int64),
                              np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)),
        levels=np.zeros(0, dtype=np.int64),
        thickness=empty,
        curvature=empty,
        visible=np.zeros(0, dtype=bool),
        arrows=np.zeros(0, dtype=bool),
    )


def blank_state(table: EntityTable) -> AppearanceState:
    """Neutral baseline; a full delta applied to it rebuilds any state."""
    n = len(table)
    return AppearanceState(
        table=table,
        levels=np.zeros(n, dtype=np.int64),
        class_height_scale=np.ones(n),
        methods_visible=np.zeros(n, dtype=bool),
        method_heights=np.zeros(len(table.method_entity)),
        label_font_scale=np.ones(n),
        label_max_chars=np.ones(n, dtype=np.int64),
        package_open=np.ones(n, dtype=bool),
        hidden=np.zeros(n, dtype=bool),
        closed_packages=(),
        links=_empty_links(),
    )


def apply_delta(prev: AppearanceState, delta: AppearanceDelta) -> AppearanceState:
    """Reconstruct the next state from a previous state plus a delta."""
    table = prev.table
    state = AppearanceState(
        table=table,
        levels=prev.levels.copy(),
        class_height_scale=prev.class_height_scale.copy(),
        methods_visible=prev.methods_visible.copy(),
        method_heights=prev.method_heights.copy(),
        label_font_scale=prev.label_font_scale.copy(),
        label_max_chars=prev.label_max_chars.copy(),
        package_open=prev.package_open.copy(),
        hidden=prev.hidden.copy(),
        closed_packages=(
            delta.closed_packages if delta.closed_packages is not None else prev.closed_packages
        ),
        links=prev.links,  # replaced below only when the delta touches links
    )
    setters = {
        "level": ("levels", int),
        "hidden": ("hidden", bool),
        "labelFontScale": ("label_font_scale", float),
        "labelMaxChars": ("label_max_chars", int),
        "classHeightScale": ("class_height_scale", float),
        "methodsVisible": ("methods_visible", bool),
        "packageOpen": ("package_open", bool),
    }
    for eid, record in delta.entities.items():
        row = table.index.get(eid)
        if row is None:
            raise ValidationError(f"delta references unknown entity {eid}")
        for wire, value in record.items():
            if wire == "methodSegments":
                sl = table.method_slice(row)
                if value:
                    if len(value) != sl.stop - sl.start:
                        raise ValidationError(f"method segment count mismatch for {eid}")
                    state.method_heights[sl] = value
                else:
                    state.method_heights[sl] = 0.0
            else:
                attr, cast = setters[wire]
                getattr(state, attr)[row] = cast(value)
    if delta.links_removed or delta.links_upsert:
        records = prev.links.as_records()
        for lid in delta.links_removed:
            records.pop(lid, None)
        records.update(delta.links_upsert)
        state.links = LinkStates.from_records(records, table.index)
    return state
