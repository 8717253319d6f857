import numpy as np
import pytest

from qdeflect import AngularGrid, ChannelHeader, SMatrixBlock


def make_block(entries, k=1.0, j=0, jp=0, j_max=None):
    """Block from a {(J, Omega, OmegaPrime): amplitude} dict."""
    if j_max is None:
        j_max = max(key[0] for key in entries)
    header = ChannelHeader(k=k, j=j, j_final=jp, J_max=j_max)
    return SMatrixBlock(header, entries)


def random_block(rng, j_max=None, j=None, jp=None, k=None, density=0.8):
    """Random flux-conserving block with helicity structure."""
    if j_max is None:
        j_max = int(rng.integers(4, 61))
    if j is None:
        j = int(rng.integers(0, 3))
    if jp is None:
        jp = int(rng.integers(0, 3))
    if k is None:
        k = float(rng.uniform(0.4, 4.0))
    entries = {}
    for J in range(j_max + 1):
        for omega in range(-min(J, j), min(J, j) + 1):
            for omega_p in range(-min(J, jp), min(J, jp) + 1):
                if rng.random() < density:
                    r = rng.uniform(0.0, 1.0)
                    phi = rng.uniform(0.0, 2.0 * np.pi)
                    entries[(J, omega, omega_p)] = r * np.exp(1j * phi)
    if not entries:
        entries[(0, 0, 0)] = 0.5 + 0.1j
    return make_block(entries, k=k, j=j, jp=jp, j_max=j_max)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def grid181():
    return AngularGrid.uniform(1.0)
