from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from geonorm.enrichment import Enrichment, load_as_registry, load_geo_table, load_origin_table
from geonorm.world import load_world

settings.register_profile(
    "geonorm", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("geonorm")

TESTS = Path(__file__).parent
REPO = TESTS.parent
SMALLWORLD = TESTS / "data" / "smallworld"
PIPELINE12 = TESTS / "data" / "pipeline12"
WORLD_DATA = REPO / "data" / "world"


@pytest.fixture(scope="session")
def small_world():
    return load_world(
        SMALLWORLD / "cities.csv", SMALLWORLD / "borders.geojson", SMALLWORLD / "regions.csv"
    )


@pytest.fixture(scope="session")
def real_world():
    return load_world(
        WORLD_DATA / "cities.csv", WORLD_DATA / "borders.geojson", WORLD_DATA / "regions.csv"
    )


@pytest.fixture(scope="session")
def small_enrichment():
    return Enrichment(
        geo=load_geo_table(SMALLWORLD / "geo.csv"),
        origin=load_origin_table(SMALLWORLD / "origin.csv"),
        registry=load_as_registry(SMALLWORLD / "as_registry.csv"),
    )


def world_args(base=SMALLWORLD):
    return [
        "--cities", str(base / "cities.csv"),
        "--borders", str(base / "borders.geojson"),
        "--regions", str(base / "regions.csv"),
    ]


def table_args(base=SMALLWORLD):
    return [
        "--geo-table", str(base / "geo.csv"),
        "--origin-table", str(base / "origin.csv"),
        "--as-registry", str(base / "as_registry.csv"),
    ]
