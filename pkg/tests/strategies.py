import math

import numpy as np
from hypothesis import strategies as st

from kanequbit import ModelParams

unit = st.floats(0.0, 1.0, allow_nan=False)


@st.composite
def bloch_vectors(draw, max_norm=1.0):
    """Points in the closed ball, including the surface."""
    theta = draw(st.floats(0.0, math.pi))
    phi = draw(st.floats(0.0, 2 * math.pi))
    r = draw(st.one_of(st.just(max_norm), st.floats(0.0, max_norm)))
    return np.array(
        [r * math.sin(theta) * math.cos(phi), r * math.sin(theta) * math.sin(phi), r * math.cos(theta)]
    )


@st.composite
def model_params(draw, max_rate=1.0):
    theta = draw(st.floats(0.0, 2 * math.pi, exclude_max=True))
    omega = draw(st.floats(0.0, max_rate))
    gamma_d = draw(st.floats(0.0, max_rate))
    return ModelParams(theta, omega, gamma_d)
