"""Hypothesis strategies for points and sequences of the disc."""
import math

import numpy as np
from hypothesis import strategies as st

from ultrasep.harness import gen_random_separated
from ultrasep.sequences import PointSequence


def disc_points(max_modulus: float = 0.999):
    return st.builds(
        lambda r, t: r * complex(math.cos(t), math.sin(t)),
        st.floats(0.0, max_modulus),
        st.floats(0.0, 2 * math.pi),
    )


def gammas():
    return st.floats(0.05, 0.95)


@st.composite
def point_sequences(draw, min_size=1, max_size=12, max_modulus=0.99):
    pts = draw(st.lists(disc_points(max_modulus), min_size=min_size, max_size=max_size))
    # keep distinct points, well apart so metrics are not ill-conditioned
    kept = []
    for p in pts:
        if all(abs(p - q) > 1e-6 for q in kept):
            kept.append(p)
    return PointSequence(kept)


@st.composite
def separated_sequences(draw, max_size=30):
    n = draw(st.integers(1, max_size))
    delta = draw(st.floats(0.05, 0.4))
    seed = draw(st.integers(0, 2**16))
    return gen_random_separated(n, delta, seed)


def random_disc(rng: np.random.Generator, n: int, max_modulus: float = 0.999) -> np.ndarray:
    return max_modulus * np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))
