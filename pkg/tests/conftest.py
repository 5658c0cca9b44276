import numpy as np
import pytest

from knads.geometry import BlackHoleParams, extremal_mass


SEED = 20260815


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


def draw_nonextremal(rng, l_lo=0.7, l_hi=1.4, margin=1.05):
    """Random background safely above the extremal mass."""
    l = rng.uniform(l_lo, l_hi)
    a = rng.uniform(0.0, 0.6) * l
    q_e = rng.uniform(-0.4, 0.4)
    q_m = 0.0
    m_ext = extremal_mass(a, q_e * q_e + q_m * q_m, l)
    m = m_ext * margin + rng.uniform(0.05, 1.5)
    return BlackHoleParams(m=m, a=a, q_e=q_e, q_m=q_m, l=l)


def draw_near_extremal(rng, offset):
    """Background at m = m_ext * (1 + offset); offset may be negative."""
    l = rng.uniform(0.8, 1.2)
    a = rng.uniform(0.1, 0.5) * l
    q_e = rng.uniform(0.05, 0.3)
    m_ext = extremal_mass(a, q_e * q_e, l)
    return BlackHoleParams(m=m_ext * (1.0 + offset), a=a, q_e=q_e, q_m=0.0, l=l)
