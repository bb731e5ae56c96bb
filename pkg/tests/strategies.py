"""Hypothesis strategies shared by the property tests."""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

finite = st.floats(-10.0, 10.0, allow_nan=False, allow_infinity=False)
rates = st.tuples(finite, finite, finite).map(np.array)
dts = st.floats(1e-4, 0.05)


@st.composite
def unit_quats(draw):
    v = np.array(draw(st.tuples(finite, finite, finite, finite)))
    n = np.linalg.norm(v)
    if n < 1e-3:
        v, n = np.array([1.0, 0.0, 0.0, 0.0]), 1.0
    return v / n


@st.composite
def spd4(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    scale = draw(st.floats(1e-6, 10.0))
    r = np.random.default_rng(seed)
    A = r.standard_normal((4, 4))
    return scale * (A @ A.T / 4 + 0.05 * np.eye(4))
