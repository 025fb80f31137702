"""Shared grids and helpers for the test suite.

The "standard grid" below is the package's reference validation lattice:
every closed form is compared against its oracle on these cells, and the
committed accuracy report in reports/ is generated from the same lattice.
"""

from __future__ import annotations

import math

import pytest

from fbrelay import HypoexpParams

SNR_DBS = tuple(float(db) for db in range(0, 31, 2))
BLOCKLENGTHS = (100, 200, 500, 1000)
RATES = (0.1, 0.5, 1.0, 2.0)
UNEQUAL_OFFSET = 10.0 ** -0.6  # second branch mean 6 dB below the first


def standard_cells():
    """(kind, n, rate, omega_z, omega_y) over the full validation lattice."""
    for db in SNR_DBS:
        omega = 10.0 ** (db / 10.0)
        for n in BLOCKLENGTHS:
            for rate in RATES:
                yield ("single", n, rate, omega, math.nan)
                yield ("pair_equal", n, rate, omega, omega)
                yield ("pair_unequal", n, rate, omega, omega * UNEQUAL_OFFSET)


def pair_params(omega_z: float, omega_y: float) -> HypoexpParams:
    return HypoexpParams(omega_z, omega_y)


@pytest.fixture(scope="session")
def standard_grid():
    return list(standard_cells())
