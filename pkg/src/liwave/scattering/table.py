"""Phase-shift tables: numeric core plus analytic dispersion tail.

Low l is integrated numerically; beyond the crossover the phase shift is the
straight-line (Born/JWKB) phase of the long-range attraction,

    delta_l = 3 pi mu C6 k^4 / (16 hbar^2 nu^5)
            + 5 pi mu C8 k^6 / (32 hbar^2 nu^7)
            + 35 pi mu C10 k^8 / (256 hbar^2 nu^9),    nu = l + 1/2.

The C6 term is the leading law; the C8/C10 terms keep the tail consistent
with the numeric side at the crossover when the potential carries them.
The table terminates once |delta_l| stays below ``tail_cut`` for five
consecutive l.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..constants import HBAR
from ..errors import ConvergenceError
from .radial import DEFAULT_POLICY, RadialPolicy, numeric_phase_shifts

METHOD_NUMERIC = "numeric"
METHOD_BORN = "born_tail"


@dataclass(frozen=True)
class PhaseShiftTable:
    """Elastic phase shifts delta_l (radians, mod pi) for l = 0..l_max."""

    k_rel: float
    l: np.ndarray        # contiguous integers 0..l_max
    delta: np.ndarray    # radians
    method: np.ndarray   # METHOD_NUMERIC or METHOD_BORN per l

    def __post_init__(self):
        if self.l.size != self.delta.size or self.l.size != self.method.size:
            raise ValueError("table columns must have equal length")
        if self.l.size and (self.l[0] != 0 or np.any(np.diff(self.l) != 1)):
            raise ValueError("l values must be contiguous from 0")
        if not np.all(np.isfinite(self.delta)):
            raise ValueError("phase shifts must be finite")

    @property
    def l_max(self) -> int:
        return int(self.l[-1])


def _tail_amplitudes(system, k_rel: float):
    c6, c8, c10 = system.potential.dispersion_coefficients()
    mu = system.mu
    a6 = 3.0 * math.pi * mu * c6 * k_rel**4 / (16.0 * HBAR**2)
    a8 = 5.0 * math.pi * mu * c8 * k_rel**6 / (32.0 * HBAR**2)
    a10 = 35.0 * math.pi * mu * c10 * k_rel**8 / (256.0 * HBAR**2)
    return a6, a8, a10


def _born_raw(system, k_rel: float, l):
    a6, a8, a10 = _tail_amplitudes(system, k_rel)
    nu = np.asarray(l, dtype=float) + 0.5
    return a6 / nu**5 + a8 / nu**7 + a10 / nu**9


def crossover_l(system, k_rel: float, policy: RadialPolicy = DEFAULT_POLICY) -> int:
    """Smallest l where the dispersion tail takes over from the integrator.

    Geometric rule: (l + 1/2) > 4 k r_core, i.e. the centrifugal turning
    point sits well outside the core region.  Additionally the tail phase
    itself must already be small enough (< born_delta_max) for the
    straight-line formula to be trusted.
    """
    l_geo = max(1, int(math.ceil(4.0 * k_rel * system.potential.core_scale() - 0.5)))
    l = l_geo
    if _born_raw(system, k_rel, l) <= policy.born_delta_max:
        return l
    hi = l
    while _born_raw(system, k_rel, hi) > policy.born_delta_max:
        hi = int(hi * 1.4) + 1
        if hi > 10_000_000:
            raise ConvergenceError("crossover search ran away", {"k": k_rel})
    lo = l
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _born_raw(system, k_rel, mid) > policy.born_delta_max:
            lo = mid
        else:
            hi = mid
    return hi


def phase_shift_born_tail(system, k_rel: float, l: int,
                          policy: RadialPolicy = DEFAULT_POLICY) -> float:
    """Dispersion-tail phase shift; valid only at or beyond the crossover."""
    if k_rel <= 0.0:
        raise ValueError("k_rel must be > 0")
    if l < crossover_l(system, k_rel, policy):
        raise ValueError(
            f"l={l} is below the Born-tail validity threshold "
            f"(crossover at l={crossover_l(system, k_rel, policy)})"
        )
    return float(_born_raw(system, k_rel, l))


def _first_run_below(values: np.ndarray, cut: float, run: int = 5):
    """Index starting the first run of ``run`` consecutive |values| < cut."""
    below = np.abs(values) < cut
    count = 0
    for i, b in enumerate(below):
        count = count + 1 if b else 0
        if count == run:
            return i - run + 1
    return None


def build_table(system, k_rel: float, policy: RadialPolicy = DEFAULT_POLICY) -> PhaseShiftTable:
    """Assemble the full phase-shift table at one relative wavevector."""
    if k_rel <= 0.0 or not math.isfinite(k_rel):
        raise ValueError("k_rel must be finite and > 0")
    l_cross = crossover_l(system, k_rel, policy)
    cut = policy.tail_cut
    c6, c8, c10 = system.potential.dispersion_coefficients()

    if c6 == 0.0 and c8 == 0.0 and c10 == 0.0:
        # No long-range tail: extend the numeric region until the phases die.
        l_hi = l_cross
        for _ in range(60):
            ls = np.arange(0, l_hi + 1)
            deltas = numeric_phase_shifts(system, k_rel, ls, policy)
            start = _first_run_below(deltas, cut)
            if start is not None:
                stop = start + 5
                return PhaseShiftTable(
                    k_rel,
                    ls[:stop],
                    deltas[:stop],
                    np.array([METHOD_NUMERIC] * stop),
                )
            l_hi += max(8, l_hi // 2)
        raise ConvergenceError(
            "short-range phase shifts never fell below the tail cut",
            {"k": k_rel, "l_hi": l_hi},
        )

    ls_num = np.arange(0, l_cross + 1)
    deltas_num = numeric_phase_shifts(system, k_rel, ls_num, policy)

    # The tail is monotone decreasing in l, so termination is immediate:
    # first l with delta below the cut, plus four more below it.
    l_end = l_cross + 1
    while _born_raw(system, k_rel, l_end) >= cut:
        l_end = int(l_end * 1.3) + 1
    lo = l_cross + 1
    hi = l_end
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _born_raw(system, k_rel, mid) >= cut:
            lo = mid
        else:
            hi = mid
    first_below = hi if _born_raw(system, k_rel, lo) >= cut else lo
    l_last = first_below + 4

    ls_tail = np.arange(l_cross + 1, l_last + 1)
    deltas_tail = _born_raw(system, k_rel, ls_tail)

    return PhaseShiftTable(
        k_rel,
        np.concatenate([ls_num, ls_tail]),
        np.concatenate([deltas_num, deltas_tail]),
        np.concatenate([
            np.array([METHOD_NUMERIC] * ls_num.size),
            np.array([METHOD_BORN] * ls_tail.size),
        ]),
    )
