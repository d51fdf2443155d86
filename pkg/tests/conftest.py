import os
from pathlib import Path

import numpy as np
import pytest

from phzero import MultiSpeedSystem, PHSystem, RationalSpeed

CORPUS_DIR = Path(__file__).resolve().parent.parent / "corpus"

GLOBAL_SEED = int(os.environ.get("PHZERO_SEED", 20240901))


def build_two_speed() -> MultiSpeedSystem:
    return MultiSpeedSystem(
        speeds=(RationalSpeed(1, 1, -1), RationalSpeed(1, 2, -1)),
        K=[[1, 1], [0, 1]], L=[[1, 0], [0, 0]],
        Ky=[[0, 0]], Ly=[[1, 1]], m=1,
    )


def build_split() -> PHSystem:
    return PHSystem(
        p=1.0,
        K0=[[1, 0, 1], [0, 1, 0]], L0=[[1, 0, 0], [0, 0, -1]],
        Ku=[[0, 0, 1]], Lu=[[0, 0, 0]],
        Ky=[[0, 0, 0]], Ly=[[1, 1, 0]],
    )


def build_ring() -> PHSystem:
    return PHSystem(
        p=1.0,
        K0=[[0, 0, -1], [-1, 0, 0]], L0=[[1, 0, 0], [0, 1, 0]],
        Ku=[[0, -1, 0]], Lu=[[0, 0, 1]],
        Ky=[[0, 0, 0]], Ly=[[1, 0, 0]],
    )


def build_sparse_ten() -> PHSystem:
    k0 = np.zeros((9, 10))
    for i, j, v in [
        (1, 2, 1), (1, 9, -3), (2, 3, 1), (2, 2, -1), (3, 6, 1), (3, 10, 2),
        (4, 1, -5), (4, 6, 2), (5, 10, 6), (5, 9, -4), (6, 8, 4), (6, 1, -2),
        (7, 6, 1), (7, 7, 3), (8, 3, -2), (8, 8, 1), (8, 5, -5),
        (9, 1, 1), (9, 6, 5), (9, 9, -1),
    ]:
        k0[i - 1, j - 1] = v
    ku = np.zeros((1, 10))
    ku[0, 3] = 1.0
    ly = np.zeros((1, 10))
    ly[0, 1] = 1.0
    ly[0, 3] = -2.0
    return PHSystem(p=1.0, K0=k0, L0=np.zeros((9, 10)), Ku=ku,
                    Lu=np.zeros((1, 10)), Ky=np.zeros((1, 10)), Ly=ly)


@pytest.fixture
def two_speed():
    return build_two_speed()


@pytest.fixture
def split_sys():
    return build_split()


@pytest.fixture
def ring_sys():
    return build_ring()


@pytest.fixture
def sparse_ten():
    return build_sparse_ten()


@pytest.fixture
def rng():
    return np.random.default_rng(GLOBAL_SEED)


@pytest.fixture
def corpus_dir():
    return CORPUS_DIR
