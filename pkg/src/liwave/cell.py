"""Gas cell model: pressure gauge correction, density, interaction length.

The cell is filled through a long pipe (gauge side) and leaks into the
vacuum chamber through narrow slit channels, all in the molecular flow
regime.  The steady state gives

    p_cell / p_meas = C_pipe / (C_pipe + C_slits).

Conductances use the Knudsen long-duct formula C = (4/3) vbar A^2 / (B L)
with cross-section area A and perimeter B, which reduces to the familiar
pi vbar d^3 / (12 L) for a circular pipe and to (2/3) vbar w^2 h^2 /
((w+h) L) for a rectangular channel.  The gas density inside the cell
follows the ideal gas law at the cell temperature, and the effective
interaction length integrates the normalized density profile: flat across
the inner section, falling linearly to zero along each slit channel,

    L_eff = L_inner + (sum of slit lengths) / 2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .constants import KB, target_mass
from .errors import ConfigError
from .thermal import TargetGasSpec


@dataclass(frozen=True)
class SlitChannel:
    width: float   # m, narrow dimension
    height: float  # m
    length: float  # m, along the beam axis

    def __post_init__(self):
        if self.width <= 0.0 or self.height <= 0.0:
            raise ValueError("slit width and height must be > 0")
        if self.length < 0.0:
            raise ValueError("slit length must be >= 0")


@dataclass(frozen=True)
class PipeSpec:
    diameter: float  # m
    length: float    # m

    def __post_init__(self):
        if self.diameter <= 0.0 or self.length <= 0.0:
            raise ValueError("pipe dimensions must be > 0")


@dataclass(frozen=True)
class CellGeometry:
    inner_length: float  # m
    slit_channels: tuple[SlitChannel, ...]
    pipe: PipeSpec
    temperature: float = 298.0  # K

    def __post_init__(self):
        if self.inner_length <= 0.0:
            raise ValueError("inner_length must be > 0")
        if self.temperature <= 0.0:
            raise ValueError("temperature must be > 0")


@dataclass(frozen=True)
class GasState:
    p_meas: float  # Pa
    p_cell: float  # Pa
    n_gas: float   # 1/m^3
    species: str

    def __post_init__(self):
        if self.p_cell > self.p_meas:
            raise ValueError("p_cell cannot exceed p_meas")


def mean_speed(mass: float, temperature: float) -> float:
    """Mean thermal speed sqrt(8 k_B T / (pi m)) (m/s)."""
    return math.sqrt(8.0 * KB * temperature / (math.pi * mass))


def conductance_pipe(diameter: float, length: float, gas: TargetGasSpec,
                     temperature: float) -> float:
    """Molecular-flow conductance of a long circular pipe (m^3/s)."""
    if diameter <= 0.0 or length <= 0.0:
        raise ValueError("pipe dimensions must be > 0")
    if length < diameter:
        raise ValueError("long-duct formula invalid near the orifice limit "
                         f"(length {length} < diameter {diameter})")
    vbar = mean_speed(gas.m_target, temperature)
    return math.pi * vbar * diameter**3 / (12.0 * length)


def conductance_slit(width: float, height: float, length: float,
                     gas: TargetGasSpec, temperature: float) -> float:
    """Molecular-flow conductance of a long rectangular channel (m^3/s)."""
    if width <= 0.0 or height <= 0.0 or length <= 0.0:
        raise ValueError("slit dimensions must be > 0")
    if length < width:
        raise ValueError("long-duct formula invalid near the orifice limit "
                         f"(length {length} < width {width})")
    vbar = mean_speed(gas.m_target, temperature)
    area = width * height
    perimeter = 2.0 * (width + height)
    return (4.0 / 3.0) * vbar * area * area / (perimeter * length)


def correction_ratio(c_pipe: float, c_slits: float) -> float:
    """p_cell / p_meas from the two conductances."""
    if c_pipe <= 0.0 or c_slits < 0.0:
        raise ValueError("conductances must be positive (slits may be absent)")
    return c_pipe / (c_pipe + c_slits)


def pressure_correction(geom: CellGeometry, gas: TargetGasSpec) -> float:
    """Gauge-to-cell pressure ratio for this geometry, in (0, 1]."""
    c_pipe = conductance_pipe(geom.pipe.diameter, geom.pipe.length, gas, geom.temperature)
    c_slits = sum(
        conductance_slit(s.width, s.height, s.length, gas, geom.temperature)
        for s in geom.slit_channels
    )
    return correction_ratio(c_pipe, c_slits)


def effective_length(geom: CellGeometry) -> float:
    """Density-weighted interaction length (m), closed form."""
    return geom.inner_length + 0.5 * sum(s.length for s in geom.slit_channels)


def effective_length_profile(geom: CellGeometry, points_per_piece: int = 2001) -> float:
    """Same length by explicit quadrature of the density profile.

    Kept as an independent route for verification; trapezoid integration is
    exact for the piecewise-linear profile.
    """
    total = 0.0
    pieces = [s.length for s in geom.slit_channels]
    # inner section: density 1
    z = np.linspace(0.0, geom.inner_length, points_per_piece)
    total += float(np.trapezoid(np.ones_like(z), z))
    # each slit: linear ramp from 1 at the cell side to 0 at the exit
    for ell in pieces:
        if ell == 0.0:
            continue
        z = np.linspace(0.0, ell, points_per_piece)
        total += float(np.trapezoid(1.0 - z / ell, z))
    return total


def density(p_meas: float, geom: CellGeometry, gas: TargetGasSpec) -> GasState:
    """Cell pressure and number density from the measured pressure (Pa)."""
    if p_meas < 0.0 or not math.isfinite(p_meas):
        raise ValueError("p_meas must be finite and >= 0")
    ratio = pressure_correction(geom, gas)
    p_cell = ratio * p_meas
    n_gas = p_cell / (KB * geom.temperature)
    return GasState(p_meas=p_meas, p_cell=p_cell, n_gas=n_gas, species=gas.species)


# ---------------------------------------------------------------------------
# Geometry config files

def load_geometry(path) -> CellGeometry:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"geometry config not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"geometry config {path} is not valid JSON: {exc}") from None
    try:
        slits = tuple(
            SlitChannel(s["width"], s["height"], s["length"])
            for s in raw["slit_channels"]
        )
        pipe = PipeSpec(raw["pipe"]["diameter"], raw["pipe"]["length"])
        return CellGeometry(
            inner_length=raw["inner_length"],
            slit_channels=slits,
            pipe=pipe,
            temperature=raw.get("temperature", 298.0),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"geometry config {path}: {exc}") from None


def gas_spec(species: str, temperature: float = 298.0) -> TargetGasSpec:
    """TargetGasSpec for a named species at the given temperature."""
    return TargetGasSpec(species=species, m_target=target_mass(species),
                         temperature=temperature)
