"""Hypothesis strategies shared by the property tests."""
from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from marginal_metrics.services.inequalities import MonotoneStep
from marginal_metrics.services.measure import DiscreteMeasure, make_measure

seeds = st.integers(min_value=0, max_value=2**63 - 1)


@st.composite
def lattice_measures(draw, dim: int = 2, max_atoms: int = 6, side: int = 4) -> DiscreteMeasure:
    """Measures on {0..side-1}^dim with positive integer-proportional weights."""

    n = draw(st.integers(min_value=1, max_value=max_atoms))
    atoms = draw(
        st.lists(
            st.tuples(*[st.integers(min_value=0, max_value=side - 1)] * dim),
            min_size=n,
            max_size=n,
        )
    )
    raw = np.array(draw(st.lists(st.integers(min_value=1, max_value=9), min_size=n, max_size=n)), dtype=float)
    return make_measure(np.array(atoms, dtype=float), raw / raw.sum())


@st.composite
def monotone_steps(draw, low: float = -0.5, high: float = 3.5, max_pieces: int = 4) -> MonotoneStep:
    """Nonnegative nondecreasing step functions with breakpoints in [low, high]."""

    m = draw(st.integers(min_value=0, max_value=max_pieces))
    breakpoints = sorted(
        set(draw(st.lists(st.floats(min_value=low, max_value=high, allow_nan=False), min_size=m, max_size=m)))
    )
    increments = draw(
        st.lists(
            st.floats(min_value=0.0, max_value=2.0, allow_nan=False),
            min_size=len(breakpoints) + 1,
            max_size=len(breakpoints) + 1,
        )
    )
    return MonotoneStep(breakpoints=np.array(breakpoints), values=np.cumsum(increments))
