"""Acceptance suite: one test per criterion, each at its stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to get one line per
criterion (the PASS lines print on stdout; pytest -v adds its own
verdict per test either way).
"""

from __future__ import annotations

import math
import random
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from cityviz.clustering import cluster_kmeans, cluster_meanshift, kmeans_with_history
from cityviz.collab import (
    CameraUpdate,
    Envelope,
    Highlight,
    Join,
    Leave,
    RoomState,
    SpectateStart,
    SpectateStop,
    apply_message,
    spectators_of,
)
from cityviz.ingest import (
    SyntheticParams,
    generate_synthetic,
    parse_spans,
    reconstruct_structure,
    spans_from_structure,
)
from cityviz.layout import compute_layout
from cityviz.minimap import MinimapConfig, compute_frame, project, unproject
from cityviz.model import CameraPose
from cityviz.semzoom import (
    ZoomConfig,
    build_entity_table,
    close_packages,
    default_cluster_count,
    entity_levels,
    resolve_appearance,
)

GOLDEN = Path(__file__).parent / "golden"
FIXTURES = Path(__file__).parent / "fixtures"


def _report(name: str, detail: str) -> None:
    print(f"[acceptance] PASS {name}: {detail}")


def _random_poses(rng, bounds, count):
    min_x, min_z, max_x, max_z = bounds
    span = max(max_x - min_x, max_z - min_z)
    center = ((min_x + max_x) / 2, 0.0, (min_z + max_z) / 2)
    poses = []
    for _ in range(count):
        position = (
            rng.uniform(min_x - span * 0.5, max_x + span * 0.5),
            float(np.exp(rng.uniform(np.log(5.0), np.log(400.0)))),
            rng.uniform(min_z - span * 0.5, max_z + span * 0.5),
        )
        poses.append(CameraPose(position, center))
    return poses


@pytest.fixture(scope="module")
def landscape_500():
    # 5 apps x (1 app + 1 root + 7*2 packages + 7*2*6 classes) = 500 entities
    structure = generate_synthetic(
        11,
        SyntheticParams(apps=5, packages_per_app=7, depth=2,
                        classes_per_package=6, methods_per_class=3, link_density=0.01),
    )
    layout = compute_layout(structure)
    table = build_entity_table(structure, layout)
    assert len(table) == 500
    return structure, layout, table


def test_criterion_oracle_equivalence(landscape_500):
    """assign_levels with one entity per cluster matches the brute-force oracle."""
    structure, layout, table = landscape_500
    config = ZoomConfig(cluster_count=len(table))
    started = time.perf_counter()
    clusters = cluster_kmeans(table.centers, k=len(table), seed=config.seed, ids=table.ids)
    thresholds = np.asarray(config.level_thresholds)
    rng = np.random.default_rng(2024)
    total = agree = 0
    for pose in _random_poses(rng, layout.bounds_xz(), 100):
        levels = entity_levels(pose, clusters, config.level_thresholds)
        distances = np.linalg.norm(table.centers - np.asarray(pose.position), axis=1)
        oracle = np.searchsorted(thresholds, distances, side="right")
        agree += int((levels == oracle).sum())
        total += len(levels)
    elapsed = time.perf_counter() - started
    assert agree == total, f"only {agree}/{total} levels matched the oracle"
    assert elapsed < 5.0, f"oracle equivalence took {elapsed:.2f}s (budget 5s)"
    _report("oracle-equivalence", f"{agree}/{total} exact across 100 poses in {elapsed:.2f}s")


def test_criterion_clustered_approximation(landscape_500):
    """Default k = ceil(sqrt(N)) agrees with the oracle for >= 90% of entities."""
    structure, layout, table = landscape_500
    k = default_cluster_count(len(table))
    assert k == math.ceil(math.sqrt(len(table)))
    clusters = cluster_kmeans(table.centers, k=k, seed=7, ids=table.ids)
    thresholds = np.asarray(ZoomConfig().level_thresholds)
    rng = np.random.default_rng(99)
    total = agree = 0
    for pose in _random_poses(rng, layout.bounds_xz(), 100):
        levels = entity_levels(pose, clusters, ZoomConfig().level_thresholds)
        distances = np.linalg.norm(table.centers - np.asarray(pose.position), axis=1)
        oracle = np.searchsorted(thresholds, distances, side="right")
        agree += int((levels == oracle).sum())
        total += len(levels)
    rate = agree / total
    assert rate >= 0.90, f"agreement {rate:.4f} below the 0.90 target"
    _report("clustered-approximation", f"k={k}, agreement {rate:.4f} over 100 poses")


def test_criterion_close_packages_conservation():
    """Boundary-crossing request counts survive closing; internal ones vanish."""
    rng = random.Random(4242)
    pairs = 0
    landscapes = []
    for seed in range(100):
        landscapes.append(
            generate_synthetic(
                seed,
                SyntheticParams(
                    apps=rng.randint(1, 3), packages_per_app=rng.randint(1, 3),
                    depth=rng.randint(1, 3), classes_per_package=rng.randint(1, 3),
                    methods_per_class=2, link_density=0.2,
                ),
            )
        )
    while pairs < 1000:
        structure = landscapes[pairs % len(landscapes)]
        chains = structure.package_chain_index()
        all_packages = sorted({pid for chain in chains.values() for pid in chain})
        chosen = {p for p in all_packages if rng.random() < rng.uniform(0.05, 0.6)}
        antichain = {
            p for p in chosen
            if not any(q != p and p.startswith(q + ".") for q in chosen)
        }
        routed = close_packages(structure.communications, antichain, structure)

        def owner(fqn: str) -> str | None:
            for pid in chains[fqn]:
                if pid in antichain:
                    return pid
            return None

        internal = sum(
            link.request_count
            for link in structure.communications
            if owner(link.source_fqn) is not None
            and owner(link.source_fqn) == owner(link.target_fqn)
        )
        total = sum(link.request_count for link in structure.communications)
        assert sum(r.request_count for r in routed) == total - internal
        pairs += 1
    _report("close-packages-conservation", f"{pairs} (landscape, closed-set) pairs exact")


def test_criterion_method_stacks():
    """Per class: segment heights sum to the class height; ratios equal LoC ratios."""
    structure = generate_synthetic(
        3, SyntheticParams(apps=3, packages_per_app=2, depth=2,
                           classes_per_package=4, methods_per_class=6, link_density=0),
    )
    layout = compute_layout(structure)
    table = build_entity_table(structure, layout)
    config = ZoomConfig()
    state = resolve_appearance(
        structure, layout, np.zeros(len(table), dtype=np.int64), config, table
    )
    classes = {fqn: cls for fqn, (_, _, cls) in structure.class_index().items()}
    checked = 0
    for i, eid in enumerate(table.ids):
        if not eid.startswith("cls:"):
            continue
        assert state.methods_visible[i]
        segments = state.method_heights[table.method_slice(i)]
        height = table.class_height[i] * state.class_height_scale[i]
        assert abs(segments.sum() - height) <= 1e-9 * height
        locs = np.asarray([m.loc for m in classes[eid[4:]].methods], dtype=np.float64)
        expected = locs / locs.sum()
        np.testing.assert_allclose(segments / segments.sum(), expected, rtol=1e-9)
        checked += 1
    assert checked == len(list(structure.iter_classes()))
    _report("method-stacks", f"{checked} classes, sums within 1e-9 rel, ratios = LoC ratios")


def test_criterion_minimap_geometry():
    structure = generate_synthetic(8, SyntheticParams(apps=4, link_density=0))
    layout = compute_layout(structure)
    frame = compute_frame(layout, MinimapConfig(), (1920, 1080))
    ratio = frame.viewport.width * frame.viewport.height / (1920 * 1080)
    assert 0.035 <= ratio <= 0.045

    rng = random.Random(31)
    worst = 0.0
    for _ in range(10_000):
        point = (rng.uniform(-1000, 1000), rng.uniform(-1000, 1000))
        back = unproject(project(point, frame), frame)
        worst = max(worst, math.dist(point, back))
    assert worst < 1e-9

    min_x, min_z, max_x, max_z = layout.bounds_xz()
    for _ in range(10_000):
        config = MinimapConfig(zoom=rng.uniform(0.5, 10.0))
        focus = (rng.uniform(-5000, 5000), rng.uniform(-5000, 5000))
        panned = compute_frame(layout, config, (1920, 1080), focus_world=focus)
        cx, cz = panned.world_center
        hx, hz = panned.half_extents
        assert min(cx + hx, max_x) - max(cx - hx, min_x) > 0
        assert min(cz + hz, max_z) - max(cz - hz, min_z) > 0
    _report(
        "minimap-geometry",
        f"area ratio {ratio:.4f}, round-trip worst {worst:.2e}, 10k whiteout checks",
    )


def test_criterion_ingestion():
    spans = parse_spans((FIXTURES / "six_services.jsonl").read_text())
    structure = reconstruct_structure(spans)
    assert len(structure.applications) == 6
    chains = {fqn: path for fqn, (_, path, _) in structure.class_index().items()}
    assert chains["net.shop.catalog.web.ProductController"] == ("net", "shop", "catalog", "web")
    assert chains["net.shop.orders.data.OrderRepo"] == ("net", "shop", "orders", "data")
    assert chains["net.shop.directory.Registry"] == ("net", "shop", "directory")

    rng = random.Random(17)
    for trial in range(100):
        synthetic = generate_synthetic(
            trial,
            SyntheticParams(
                apps=rng.randint(1, 4), packages_per_app=rng.randint(1, 3),
                depth=rng.randint(1, 3), classes_per_package=rng.randint(1, 3),
                methods_per_class=rng.randint(1, 3), link_density=0.1,
            ),
        )
        rebuilt = reconstruct_structure(spans_from_structure(synthetic))
        assert [a.name for a in rebuilt.applications] == [a.name for a in synthetic.applications]
        original_names = {
            (a.name, path, cls.name) for a, path, cls in synthetic.iter_classes()
        }
        rebuilt_names = {
            (a.name, path, cls.name) for a, path, cls in rebuilt.iter_classes()
        }
        assert original_names == rebuilt_names
        original_packages = {(a.name, path) for a, path, _ in synthetic.walk_packages()}
        rebuilt_packages = {(a.name, path) for a, path, _ in rebuilt.walk_packages()}
        assert original_packages == rebuilt_packages
    _report("ingestion", "6-service fixture exact; 100 structure<->spans round-trips")


def test_criterion_kmeans_and_meanshift():
    rng = np.random.default_rng(1234)
    runs = 0
    for _ in range(1000):
        n = int(rng.integers(5, 60))
        points = rng.uniform(-50, 50, size=(n, 3))
        k = int(rng.integers(1, min(8, n) + 1))
        _, history = kmeans_with_history(points, k=k, seed=int(rng.integers(0, 10_000)))
        assert all(b <= a + 1e-9 for a, b in zip(history, history[1:])), "objective increased"
        runs += 1

    points = rng.uniform(-50, 50, size=(80, 3))
    assert (
        cluster_kmeans(points, 8, seed=5).canonical_bytes()
        == cluster_kmeans(points, 8, seed=5).canonical_bytes()
    )

    stationary_checked = 0
    for trial in range(20):
        blob_count = int(rng.integers(1, 4))
        blobs = [
            rng.normal(loc=rng.uniform(-60, 60, size=3), scale=2.0, size=(12, 3))
            for _ in range(blob_count)
        ]
        points = np.vstack(blobs)
        bandwidth = 8.0
        clusters = cluster_meanshift(points, bandwidth)
        for mode in clusters.centroids:
            members = points[((points - mode) ** 2).sum(axis=1) <= bandwidth**2]
            shift = float(np.linalg.norm(members.mean(axis=0) - mode))
            assert shift < 1e-3, f"mode not stationary: shift {shift}"
            stationary_checked += 1
    _report(
        "kmeans-meanshift",
        f"{runs} monotone k-means runs, seeded bytes identical, "
        f"{stationary_checked} stationary mean-shift modes",
    )


def _pose_for(value: float) -> CameraPose:
    return CameraPose((value, 25.0, -value), (0.0, 0.0, 0.0))


def _random_log(seed: int, messages: int = 1000):
    rng = random.Random(seed)
    clients = [f"u{i}" for i in range(rng.randint(2, 8))]
    seqs = {uid: 0 for uid in clients}
    joined: set[str] = set()
    log = []
    while len(log) < messages:
        uid = rng.choice(clients)
        seqs[uid] += 1
        if uid not in joined:
            log.append((uid, Envelope("r", seqs[uid], Join(name=uid))))
            joined.add(uid)
            continue
        roll = rng.random()
        if roll < 0.55:
            msg = CameraUpdate(_pose_for(rng.uniform(-500, 500)))
        elif roll < 0.7:
            msg = Highlight(f"cls:c{rng.randint(0, 9)}", rng.choice(["#123", "#456", None]))
        elif roll < 0.82:
            msg = SpectateStart(rng.choice(sorted(joined)))
        elif roll < 0.92:
            msg = SpectateStop()
        else:
            msg = Leave()
            joined.discard(uid)
        log.append((uid, Envelope("r", seqs[uid], msg)))
    return log


def _replay(log, check_spectators: bool) -> RoomState:
    state = RoomState(room_id="r")
    for sender, envelope in log:
        followers = (
            spectators_of(state, sender)
            if check_spectators and isinstance(envelope.message, CameraUpdate)
            else set()
        )
        fresh = envelope.seq > state.last_seq.get(sender, -1)
        state, broadcasts = apply_message(state, sender, envelope)
        if followers and fresh and sender in state.users:
            delivered = {
                recipient for recipient, msg in broadcasts
                if isinstance(msg, CameraUpdate) and msg.pose == envelope.message.pose
            }
            missing = followers - delivered
            assert not missing, f"spectators missed a followed pose: {missing}"
        # spectate graph stays acyclic after every transition
        for uid in state.users:
            seen = set()
            cursor = uid
            while cursor is not None:
                assert cursor not in seen, "spectate cycle"
                seen.add(cursor)
                user = state.users.get(cursor)
                cursor = user.spectating if user else None
    return state


def test_criterion_collab_replay():
    for seed in range(5):
        log = _random_log(seed)
        assert len(log) == 1000
        first = _replay(log, check_spectators=True)
        second = _replay(log, check_spectators=False)
        assert first.canonical_bytes() == second.canonical_bytes()

    # teleport: adopting an observed pose stores bit-identical coordinates
    state = RoomState(room_id="r")
    state, _ = apply_message(state, "a", Envelope("r", 0, Join(name="a")))
    state, _ = apply_message(state, "b", Envelope("r", 0, Join(name="b")))
    pose = CameraPose((0.1 + 0.2, math.pi, -1.0000000001), (1e-17, 2.5, 0.0))
    state, _ = apply_message(state, "b", Envelope("r", 1, CameraUpdate(pose)))
    observed = state.users["b"].pose
    state, _ = apply_message(state, "a", Envelope("r", 1, CameraUpdate(observed)))
    assert state.users["a"].pose == state.users["b"].pose
    assert state.users["a"].pose.position == pose.position
    _report("collab-replay", "5x1000-message logs deterministic, spectators complete, teleport exact")


def test_criterion_golden_svgs():
    structure_path = GOLDEN / "landscape.json"
    matched = []
    for height in (12, 80, 150, 400):
        result = subprocess.run(
            [sys.executable, "-m", "cityviz.cli", "snapshot", str(structure_path),
             "--pose", f"9.79,{height},8.79,9.79,0,8.79"],
            capture_output=True, timeout=120,
        )
        assert result.returncode == 0, result.stderr.decode()
        expected = (GOLDEN / f"snapshot_h{height}.svg").read_bytes()
        assert result.stdout == expected, f"snapshot at height {height} diverged from golden"
        matched.append(height)

    near = (GOLDEN / "snapshot_h12.svg").read_text()
    mid = (GOLDEN / "snapshot_h80.svg").read_text()
    far = (GOLDEN / "snapshot_h150.svg").read_text()
    farthest = (GOLDEN / "snapshot_h400.svg").read_text()
    comm = lambda s: s.split('<g id="communication">')[1].split("</g>")[0]
    assert near.count("fill-opacity") > 0 and mid.count("fill-opacity") == 0
    assert mid.count("…") >= near.count("…")
    assert comm(far).count("<path") < comm(near).count("<path")
    assert "#7a8ba6" in farthest
    assert "<rect" not in farthest.split('<g id="buildings">')[1].split("</g>")[0]
    _report("golden-svgs", f"4 snapshots byte-identical at heights {matched}")


def test_criterion_performance_budget():
    structure = generate_synthetic(
        5,
        SyntheticParams(apps=10, packages_per_app=6, depth=4,
                        classes_per_package=41, methods_per_class=4, link_density=0.00002),
    )
    layout = compute_layout(structure)
    table = build_entity_table(structure, layout)
    assert len(table) >= 10_000
    config = ZoomConfig(cluster_count=64)
    clusters = cluster_kmeans(table.centers, 64, config.seed, ids=table.ids)
    rng = np.random.default_rng(1)
    timings = []
    for pose in _random_poses(rng, layout.bounds_xz(), 100):
        started = time.perf_counter()
        levels = entity_levels(pose, clusters, config.level_thresholds)
        resolve_appearance(structure, layout, levels, config, table)
        timings.append(time.perf_counter() - started)
    median_ms = float(np.median(timings) * 1000)
    assert median_ms < 10.0, f"median {median_ms:.2f}ms over budget"
    _report(
        "performance-budget",
        f"{len(table)} entities / 64 clusters: median {median_ms:.2f}ms, "
        f"p90 {np.percentile(timings, 90) * 1000:.2f}ms over 100 poses",
    )
