"""Shared fixtures: the bundled manifests and small charts."""

from pathlib import Path

import pytest
from click.testing import CliRunner

from gradedconn.config import EngineConfig
from gradedconn.connections import LeviCivitaLift, SemiSymmetric
from gradedconn.distributions import Split
from gradedconn.expr import Chart
from gradedconn.manifest import load_manifest

MANIFEST_DIR = Path(__file__).parent.parent / "config" / "manifests"


@pytest.fixture(scope="session")
def manifest_dir():
    return MANIFEST_DIR


@pytest.fixture(scope="session")
def engine_config():
    return EngineConfig()


@pytest.fixture(scope="session")
def flat(engine_config):
    return load_manifest(MANIFEST_DIR / "flat.yml", engine_config)


@pytest.fixture(scope="session")
def sphere(engine_config):
    return load_manifest(MANIFEST_DIR / "sphere.yml", engine_config)


@pytest.fixture(scope="session")
def sphere_normal(engine_config):
    """Sphere split along E2, with U sticking out of D on both sides."""
    return load_manifest(MANIFEST_DIR / "sphere_normal.yml", engine_config)


@pytest.fixture(scope="session")
def so3(engine_config):
    return load_manifest(MANIFEST_DIR / "so3.toml", engine_config)


@pytest.fixture(scope="session")
def nonconstant(engine_config):
    return load_manifest(MANIFEST_DIR / "nonconstant.yml", engine_config)


@pytest.fixture(scope="session")
def flat_omega(engine_config):
    return load_manifest(MANIFEST_DIR / "flat_omega.yml", engine_config)


@pytest.fixture
def plane():
    """Bare 2-dimensional chart."""
    return Chart(("x1", "x2"))


@pytest.fixture
def space():
    """Bare 3-dimensional chart."""
    return Chart(("x1", "x2", "x3"))


@pytest.fixture
def runner():
    """Create a CLI test runner."""
    return CliRunner()


@pytest.fixture(scope="session")
def split_of():
    """Build the manifest's distribution split on its semi-symmetric connection."""
    cache = {}

    def build(manifest):
        if manifest.name not in cache:
            conn = SemiSymmetric(manifest.graded, manifest.p, LeviCivitaLift(manifest.graded))
            declared = manifest.distribution
            frame = manifest.frame_named(declared.frame)
            cache[manifest.name] = Split(conn, frame, declared.indices)
        return cache[manifest.name]

    return build
