import numpy as np
import pytest

from capspectra.eigenbasis import eigendecompose, build_h0_dense, load_or_build
from capspectra.grids import PotentialSpec, build_grid


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    return str(tmp_path_factory.mktemp("cache"))


@pytest.fixture(scope="session")
def well_grid():
    # wide enough for the bound states; smaller than the shipped preset box
    return build_grid(L=42.0, n=336)


@pytest.fixture(scope="session")
def well_pot():
    return PotentialSpec("gaussian-well", V0=4.0, width=3.0 / (2.0 * np.sqrt(2.0)))


@pytest.fixture(scope="session")
def well_basis(well_grid, well_pot, cache_dir):
    return load_or_build(well_grid, well_pot, cache_dir=cache_dir)


@pytest.fixture(scope="session")
def tiny_basis():
    """Free-particle basis on an 8-point grid, enough for oracle checks."""
    grid = build_grid(L=4.0, n=8)
    pot = PotentialSpec("none", V0=0.0, width=1.0)
    return grid, eigendecompose(build_h0_dense(grid, pot), grid)
