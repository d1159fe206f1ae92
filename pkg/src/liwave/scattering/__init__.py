"""Elastic partial-wave scattering: phase shifts and forward amplitudes."""

from .amplitude import ForwardAmplitude, forward_amplitude, total_cross_section
from .radial import (
    DEFAULT_POLICY,
    RadialPolicy,
    circular_mod_pi,
    numeric_phase_shifts,
    phase_shift_numeric,
)
from .table import (
    METHOD_BORN,
    METHOD_NUMERIC,
    PhaseShiftTable,
    build_table,
    crossover_l,
    phase_shift_born_tail,
)

__all__ = [
    "DEFAULT_POLICY",
    "ForwardAmplitude",
    "METHOD_BORN",
    "METHOD_NUMERIC",
    "PhaseShiftTable",
    "RadialPolicy",
    "build_table",
    "circular_mod_pi",
    "crossover_l",
    "forward_amplitude",
    "numeric_phase_shifts",
    "phase_shift_born_tail",
    "phase_shift_numeric",
    "total_cross_section",
]
