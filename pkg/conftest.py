import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from integrate import QuadratureSpec  # noqa: E402


@pytest.fixture
def quick_spec():
    """Small, seeded run: 64 chunks of 1000 samples"""
    return QuadratureSpec(seed=7, samples=64000, chunks=64)
