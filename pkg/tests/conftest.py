from __future__ import annotations

from pathlib import Path

import pytest

from cityviz.ingest import SyntheticParams, generate_synthetic
from cityviz.layout import compute_layout
from cityviz.semzoom import ZoomConfig, build_clusters, build_entity_table

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def six_services_jsonl() -> str:
    return (FIXTURES / "six_services.jsonl").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def small_structure():
    return generate_synthetic(
        7,
        SyntheticParams(
            apps=3, packages_per_app=2, depth=2, classes_per_package=2,
            methods_per_class=3, link_density=0.05,
        ),
    )


@pytest.fixture(scope="session")
def small_scene(small_structure):
    """(structure, layout, table, clusters, config) for the small landscape."""
    layout = compute_layout(small_structure)
    table = build_entity_table(small_structure, layout)
    config = ZoomConfig()
    clusters = build_clusters(table, config)
    return small_structure, layout, table, clusters, config
