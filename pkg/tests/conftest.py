"""Session-scoped fixtures shared across test modules.

The small basis and surrogate take a few seconds to build, so they are
built once per session.  They are deterministic (fixed seeds), so
sharing them does not couple tests.
"""

import pytest

from turbsim import psf
from turbsim.optics import TurbulenceProtocol

SMALL_BASIS_K = 40
SMALL_BASIS_S = 21


@pytest.fixture(scope="session")
def small_reference_protocol() -> TurbulenceProtocol:
    return TurbulenceProtocol(distance_m=400.0, focal_length_m=1.2,
                              f_number=8.0, scene_width_m=0.5, cn2=6e-15)


@pytest.fixture(scope="session")
def small_basis(small_reference_protocol) -> psf.PsfBasis:
    return psf.build_psf_basis(small_reference_protocol,
                               dr0_range=(0.05, 4.0), n_samples=700,
                               k=SMALL_BASIS_K, s=SMALL_BASIS_S, seed=7)


@pytest.fixture(scope="session")
def small_p2s(small_basis) -> psf.P2sMap:
    return psf.fit_p2s_surrogate(small_basis, n_train=1600, n_heldout=400,
                                 seed=3)
