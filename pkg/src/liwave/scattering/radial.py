"""Radial-equation solver for elastic phase shifts.

Integrates u'' = [2 mu (V - E)/hbar^2 + l(l+1)/r^2] u outward with the
Numerov scheme on a piecewise-uniform grid (the step doubles outward as the
local wavelength allows; doubling transitions reuse existing grid points, so
no interpolation is ever needed).  The regular solution is matched against
free spherical Bessel/Neumann solutions at two outer radii where the
potential is negligible, giving delta_l modulo pi.

Accuracy is enforced by step halving: the whole grid is refined until every
requested delta_l changes by less than ``delta_tol`` between consecutive
levels (circular distance mod pi, since the matching branch may hop).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange
from scipy.special import spherical_jn, spherical_yn

from ..constants import HBAR
from ..errors import ConvergenceError


@dataclass(frozen=True)
class RadialPolicy:
    """Grid and convergence controls for the radial integration.

    wavelength_fraction: base step as a fraction of the local wavelength.
    delta_tol:           per-l convergence target under step halving (rad).
    max_refinements:     halvings allowed before giving up.
    forbidden_depth:     start integration where V - E >= forbidden_depth * E.
    match_threshold:     match where |V| <= match_threshold * E.
    born_delta_max:      largest tail phase the Born formula is trusted for.
    tail_cut:            table termination threshold on |delta_l|.
    max_points:          hard cap on grid points per refinement level.
    """

    wavelength_fraction: float = 0.05
    delta_tol: float = 1e-8
    max_refinements: int = 6
    forbidden_depth: float = 1e3
    match_threshold: float = 1e-8
    born_delta_max: float = 0.05
    tail_cut: float = 1e-8
    max_points: int = 40_000_000


DEFAULT_POLICY = RadialPolicy()

# Centrifugal contribution to the step-size bound is capped at this multiple
# of k^2: deep inside the centrifugal barrier the solution is a power law and
# needs no wavelength-level resolution (the halving ladder still verifies).
_CENT_CAP = 25.0

_RESCALE_LIMIT = 1e250


@dataclass(frozen=True)
class GridDesign:
    """Base-level grid: start radius plus (step, count) segments.

    Level j divides every step by 2**j and multiplies counts accordingly,
    keeping all base-level points (so matching radii are identical across
    levels).  ``n_match`` trailing points of the last segment separate the
    two matching radii.
    """

    r_start: float
    seg_h: tuple
    seg_n: tuple
    n_match: int
    break_index: int  # base-level point index pinned to a potential breakpoint, or -1

    def n_points(self, level: int) -> int:
        f = 2**level
        return 1 + f * sum(self.seg_n)


def _bisect_radius(f, lo, hi, increasing: bool, iters: int = 200):
    """Robust bisection for sign change of f (tolerates inf at one end)."""
    flo, fhi = f(lo), f(hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fm = f(mid)
        if (fm > 0.0) == increasing:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _start_radius(potential, energy: float, policy: RadialPolicy):
    """Innermost grid radius and whether the grid begins at the origin."""
    wall = potential.hard_wall()
    if wall is not None:
        return wall, False
    target = (1.0 + policy.forbidden_depth) * energy
    core = potential.core_scale()
    r_lo = 1e-3 * core
    if not potential(r_lo) >= target:
        # Repulsion too weak to reach the requested depth; integrate from the
        # origin with the regular boundary condition instead.
        return 0.0, True
    r0 = _bisect_radius(lambda r: potential(r) - target, r_lo, core, increasing=False)
    return r0, False


def _match_radius(potential, energy: float, k: float, l_max: int, policy: RadialPolicy) -> float:
    """Outer radius where |V| <= threshold * E, beyond every turning point."""
    r_turn = (l_max + 0.5) / k
    base = max(potential.core_scale(), 1.1 * r_turn)
    cut = policy.match_threshold * energy
    r = base
    for _ in range(400):
        if abs(potential(r)) <= cut:
            break
        r *= 1.25
    else:
        raise ConvergenceError(
            "potential tail never falls below the matching threshold",
            {"r_last": r, "E": energy},
        )
    if r > base:
        r = _bisect_radius(lambda x: abs(potential(x)) - cut, r / 1.25, r, increasing=False)
    # Leave at least two free wavelengths between the core region and the
    # matching radii so the asymptotic form is clean.
    return max(r, base) + 4.0 * math.pi / k


def design_grid(system, k: float, l_max: int, policy: RadialPolicy = DEFAULT_POLICY) -> GridDesign:
    potential = system.potential
    mu = system.mu
    energy = (HBAR * k) ** 2 / (2.0 * mu)
    k2 = k * k
    u_scale = 2.0 * mu / HBAR**2

    r_start, _ = _start_radius(potential, energy, policy)
    r_end = _match_radius(potential, energy, k, l_max, policy)
    breaks = [b for b in potential.breakpoints() if r_start < b < r_end]
    if len(breaks) > 1:
        raise ConvergenceError("at most one potential breakpoint is supported",
                               {"breaks": len(breaks)})

    # Step-size requirement probed on a log grid, then turned into a
    # monotone bound via a suffix minimum (steps may only grow outward).
    lo = r_start if r_start > 0.0 else r_end * 1e-7
    probe = np.geomspace(lo, r_end, 8000)
    v = np.asarray(potential(probe), dtype=float)
    cl_max = l_max * (l_max + 1.0)
    w_bound = (
        np.abs(u_scale * v - k2)
        + k2
        + np.minimum(cl_max / probe**2, _CENT_CAP * k2)
    )
    h_req = 2.0 * math.pi * policy.wavelength_fraction / np.sqrt(w_bound)
    h_allow = np.minimum.accumulate(h_req[::-1])[::-1]

    gamma = 0.92  # safety margin under the wavelength criterion

    if breaks:
        # Uniform grid whose points hit the breakpoint exactly; breakpoint
        # potentials ship with cheap grids, so no step doubling is needed.
        h0 = gamma * float(h_allow[0])
        span = breaks[0] - r_start
        n1 = max(4, int(math.ceil(span / h0)))
        h = span / n1
        n_out = int(math.ceil((r_end - breaks[0]) / h))
        n_match = max(3, int(round(math.pi / (2.0 * k * h))))
        return GridDesign(r_start, (h,), (n1 + n_out + n_match,), n_match, n1)

    seg_h, seg_n = [], []
    h = gamma * float(h_allow[0])
    r_cur = r_start
    while r_cur < r_end:
        # Furthest radius before the doubled step becomes admissible.
        idx = int(np.searchsorted(h_allow, 2.0 * h / gamma))
        r_dbl = probe[idx] if idx < probe.size else r_end
        span_end = min(max(r_dbl, r_cur + 4.0 * h), r_end)
        n = max(4, int(math.ceil((span_end - r_cur) / h)))
        seg_h.append(h)
        seg_n.append(n)
        r_cur += n * h
        h *= 2.0
    h_last = seg_h[-1]
    n_match = max(3, int(round(math.pi / (2.0 * k * h_last))))
    seg_n[-1] += n_match
    return GridDesign(r_start, tuple(seg_h), tuple(seg_n), n_match, -1)


def _realize(design: GridDesign, system, k: float, level: int):
    """Materialize grid arrays for one refinement level."""
    f = 2**level
    mu = system.mu
    u_scale = 2.0 * mu / HBAR**2
    k2 = k * k

    r_parts = [np.array([design.r_start])]
    h_parts = [np.array([0.0])]
    left3 = [np.array([0], dtype=np.uint8)]
    r_cur = design.r_start
    for s, (h, n) in enumerate(zip(design.seg_h, design.seg_n)):
        hh = h / f
        nn = n * f
        r_parts.append(r_cur + hh * np.arange(1, nn + 1))
        h_parts.append(np.full(nn, hh * hh / 12.0))
        mark = np.zeros(nn, dtype=np.uint8)
        if s > 0:
            mark[0] = 1
        left3.append(mark)
        r_cur += n * h
    r = np.concatenate(r_parts)
    h2_12 = np.concatenate(h_parts)
    left3 = np.concatenate(left3)

    if design.break_index >= 0:
        bi = design.break_index * f
        brk = system.potential.breakpoints()[0]
        r[bi] = brk

    v = np.asarray(system.potential(r), dtype=float)
    if design.break_index >= 0:
        # Mean of the one-sided limits keeps the Numerov stencil clean at a
        # potential jump pinned on a grid point.
        bi = design.break_index * f
        eps = 1e-6 * (r[bi + 1] - r[bi])
        v[bi] = 0.5 * (float(system.potential(r[bi] - eps)) + float(system.potential(r[bi] + eps)))

    w_free = u_scale * v - k2
    inv_r2 = np.empty_like(r)
    if r[0] == 0.0:
        inv_r2[0] = 0.0
        inv_r2[1:] = 1.0 / r[1:] ** 2
        w_free[0] = 0.0 if not np.isfinite(w_free[0]) else w_free[0]
    else:
        inv_r2[:] = 1.0 / r**2

    icap2 = r.size - 1
    icap1 = icap2 - design.n_match * f
    if icap1 < 2:
        raise ConvergenceError("grid too short for two-radius matching",
                               {"points": r.size, "n_match": design.n_match})
    return r, w_free, inv_r2, h2_12, left3, icap1, icap2


@njit(cache=True, parallel=True)
def _sweep_kernel(w_free, inv_r2, h2_12, left3, l_vals, icap1, icap2):  # pragma: no cover
    # Numerov in summed-difference form: with t = h^2/12 and
    # y_i = u_i (1 - t w_i), the step is y_{i+1} = 2 y_i - y_{i-1} + h^2 w_i u_i.
    # Unlike the coefficient form, the update adds a small physics term to an
    # exact second difference, so rounding bias does not grow as the step
    # shrinks (essential for the step-halving convergence criterion).
    # Each l is independent; per-l results do not depend on the schedule, so
    # the parallel loop stays bit-reproducible.
    n = w_free.shape[0]
    m = l_vals.shape[0]
    out1 = np.empty(m)
    out2 = np.empty(m)
    for j in prange(m):
        cl = l_vals[j] * (l_vals[j] + 1.0)
        um3 = 0.0
        um2 = 0.0   # u at grid point 0
        um1 = 1.0   # u at grid point 1
        t = h2_12[2]
        y_m2 = um2 * (1.0 - t * (w_free[0] + cl * inv_r2[0]))
        y_m1 = um1 * (1.0 - t * (w_free[1] + cl * inv_r2[1]))
        c1 = 0.0
        got1 = False
        for i in range(2, n):
            w_m = w_free[i - 1] + cl * inv_r2[i - 1]
            if left3[i] == 1:
                # step doubled: rebuild the y pair for the new t from the
                # points one and three indices back (spacing 2h_old = h_new)
                t = h2_12[i]
                w_l = w_free[i - 3] + cl * inv_r2[i - 3]
                y_m2 = um3 * (1.0 - t * w_l)
                y_m1 = um1 * (1.0 - t * w_m)
            w_i = w_free[i] + cl * inv_r2[i]
            y_i = 2.0 * y_m1 - y_m2 + (12.0 * t) * w_m * um1
            u_i = y_i / (1.0 - t * w_i)
            um3 = um2
            um2 = um1
            um1 = u_i
            y_m2 = y_m1
            y_m1 = y_i
            au = abs(u_i)
            if au > _RESCALE_LIMIT:
                s = 1.0 / au
                um3 *= s
                um2 *= s
                um1 *= s
                y_m2 *= s
                y_m1 *= s
                if got1:
                    c1 *= s
            if i == icap1:
                c1 = um1
                got1 = True
        out1[j] = c1
        out2[j] = um1
    return out1, out2


def _phases_from_matching(k, r1, r2, u1, u2, l_vals):
    x1, x2 = k * r1, k * r2
    ls = np.asarray(l_vals, dtype=int)
    j1 = spherical_jn(ls, x1)
    y1 = spherical_yn(ls, x1)
    j2 = spherical_jn(ls, x2)
    y2 = spherical_yn(ls, x2)
    num = u1 * r2 * j2 - u2 * r1 * j1
    den = u1 * r2 * y2 - u2 * r1 * y1
    delta = np.arctan2(num, den)
    # Fold to the principal branch (-pi/2, pi/2]; phases are defined mod pi.
    return delta - np.pi * np.floor(delta / np.pi + 0.5)


def circular_mod_pi(a, b):
    """Distance between two phases defined modulo pi."""
    d = np.asarray(a) - np.asarray(b)
    return np.abs(d - np.pi * np.round(d / np.pi))


def numeric_phase_shifts(system, k_rel: float, l_values, policy: RadialPolicy = DEFAULT_POLICY):
    """Converged numeric phase shifts for all requested l on a shared grid.

    Returns an array aligned with ``l_values``.  Each l is refined until its
    own step-halving change drops below ``delta_tol``; converged l are frozen
    and excluded from the remaining (finer, more expensive) levels.  Raises
    ConvergenceError with diagnostics if the halving ladder is exhausted.
    """
    if k_rel <= 0.0 or not math.isfinite(k_rel):
        raise ValueError("k_rel must be finite and > 0")
    l_values = np.asarray(l_values, dtype=int)
    if l_values.size == 0:
        return np.zeros(0)
    if np.any(l_values < 0):
        raise ValueError("l must be >= 0")
    design = design_grid(system, k_rel, int(l_values.max()), policy)

    result = np.full(l_values.size, np.nan)
    remaining = np.arange(l_values.size)
    prev = None
    last_err = math.inf
    for level in range(policy.max_refinements + 1):
        n_pts = design.n_points(level)
        if n_pts > policy.max_points:
            raise ConvergenceError(
                "radial grid exceeded the point budget before converging",
                {"level": level, "points": n_pts, "k": k_rel},
            )
        ls = l_values[remaining]
        r, w_free, inv_r2, h2_12, left3, icap1, icap2 = _realize(design, system, k_rel, level)
        u1, u2 = _sweep_kernel(w_free, inv_r2, h2_12, left3, ls.astype(float), icap1, icap2)
        deltas = _phases_from_matching(k_rel, r[icap1], r[icap2], u1, u2, ls)
        if prev is not None:
            diffs = circular_mod_pi(deltas, prev)
            last_err = float(diffs.max())
            done = diffs < policy.delta_tol
            result[remaining[done]] = deltas[done]
            remaining = remaining[~done]
            if remaining.size == 0:
                return result
            prev = deltas[~done]
        else:
            prev = deltas
    raise ConvergenceError(
        "phase shifts did not converge under step halving",
        {
            "k": k_rel,
            "refinements": policy.max_refinements,
            "last_max_change": last_err,
            "worst_l": int(l_values[remaining[0]]) if remaining.size else -1,
            "unconverged": remaining.size,
            "points": design.n_points(policy.max_refinements),
        },
    )


def phase_shift_numeric(system, k_rel: float, l: int,
                        policy: RadialPolicy = DEFAULT_POLICY) -> float:
    """Numeric delta_l (radians, mod pi) for a single angular momentum."""
    return float(numeric_phase_shifts(system, k_rel, [int(l)], policy)[0])
