import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tilesim.geometry import TileGrid
from tilesim.manifest import synthesize


@pytest.fixture(scope="session")
def flat_manifest():
    """40 s, 4x4, three qualities, no size jitter: every tile-segment is
    234375 / 937500 / 3750000 bytes at levels 0 / 1 / 2."""
    return synthesize(
        "flat",
        duration=40.0,
        segment_length=1.5,
        grid=TileGrid(4, 4),
        quality_count=3,
        base_bitrate_bps=20e6,
        variability=0.0,
    )


@pytest.fixture
def grid44():
    return TileGrid(4, 4)
