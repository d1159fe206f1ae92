"""Forward scattering amplitude and total cross section from a phase table.

    f(k, 0) = (1/2ik) sum_l (2l+1) (e^{2i delta_l} - 1)
    sigma   = (4 pi / k^2) sum_l (2l+1) sin^2(delta_l)

Both sums run in ascending l with exact compensated accumulation
(math.fsum), so results are deterministic and reproducible bit for bit
regardless of how the per-l work was scheduled.  Phases enter only through
e^{2i delta}, so the mod-pi convention of the table is immaterial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .table import PhaseShiftTable


@dataclass(frozen=True)
class ForwardAmplitude:
    """Complex forward amplitude f(k, 0) in meters."""

    k_rel: float
    f_re: float
    f_im: float

    def __post_init__(self):
        if self.f_im < 0.0:
            raise ValueError("Im f(0) must be >= 0 for elastic scattering")


def forward_amplitude(table: PhaseShiftTable) -> ForwardAmplitude:
    two_l_plus_1 = 2.0 * table.l + 1.0
    sin_d = np.sin(table.delta)
    re_terms = two_l_plus_1 * sin_d * np.cos(table.delta)
    im_terms = two_l_plus_1 * sin_d * sin_d
    k = table.k_rel
    f_re = math.fsum(re_terms) / k
    f_im = math.fsum(im_terms) / k
    return ForwardAmplitude(k, f_re, max(f_im, 0.0))


def total_cross_section(table: PhaseShiftTable) -> float:
    """Total elastic cross section (m^2)."""
    two_l_plus_1 = 2.0 * table.l + 1.0
    sin2 = np.sin(table.delta) ** 2
    k = table.k_rel
    return 4.0 * math.pi / (k * k) * math.fsum(two_l_plus_1 * sin2)
