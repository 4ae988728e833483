from __future__ import annotations

import sys
from pathlib import Path

import pytest

_REPO_ROOT = Path(__file__).resolve().parents[1]
if str(_REPO_ROOT) not in sys.path:
    sys.path.insert(0, str(_REPO_ROOT))

from marginal_metrics.services.inequalities import MonotoneStep
from marginal_metrics.services.measure import DiscreteMeasure, make_measure

SAMPLE_DATA = _REPO_ROOT / "sample_data"


@pytest.fixture
def p_co() -> DiscreteMeasure:
    return make_measure([[0, 0], [1, 1]], [0.5, 0.5])


@pytest.fixture
def p_ind() -> DiscreteMeasure:
    return make_measure([[0, 0], [0, 1], [1, 0], [1, 1]])


@pytest.fixture
def p_anti() -> DiscreteMeasure:
    return make_measure([[0, 1], [1, 0]])


@pytest.fixture
def bernoulli() -> DiscreteMeasure:
    return make_measure([0.0, 1.0])


@pytest.fixture
def identity() -> MonotoneStep:
    return MonotoneStep.make_identity()


@pytest.fixture
def sample_data() -> Path:
    return SAMPLE_DATA
