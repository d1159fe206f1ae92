"""Synthetic interferometer runs: three phase sweeps plus a background record.

One run is (empty, gas, empty) fringe sweeps at a fixed cell pressure.  The
expected rate in channel n of sweep j is

    lambda_j(n) = dwell * { I_B + I0_j [1 + V_j cos(a_j + b_j n + c_j n^2)] },

the quadratic term modelling piezo nonlinearity.  The gas sweep sees the
balanced-arm transformation

    I0' = I0 (1 + t^2) / 2,   V' = V 2t / (1 + t^2),   phase offset +phi,

whose product identity I0' V' = t I0 V is what makes the transmission
estimator of the analysis stage unbiased.  Counts are Poisson; every run is
bit-reproducible for a fixed seed.

Count-rate magnitudes below are plausible defaults, not measured values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError

SCHEMA_VERSION = 1

# Plausible defaults (order-of-magnitude signal levels only).
DEFAULT_I0 = 3.0e4          # counts/s mean intensity
DEFAULT_VISIBILITY = 0.70
DEFAULT_I_BG = 400.0        # counts/s detector background
DEFAULT_B = 2.0 * math.pi * 6.0 / 300.0   # rad/channel, six fringes per sweep
DEFAULT_C = 3.3e-6          # rad/channel^2 piezo nonlinearity
DEFAULT_DRIFT_SIGMA = 0.1   # rad/sweep linear drift rate scale


@dataclass(frozen=True)
class SweepConfig:
    """Phase ramp and acquisition settings for one sweep."""

    a: float                 # rad
    b: float = DEFAULT_B     # rad/channel
    c: float = DEFAULT_C     # rad/channel^2
    n_points: int = 300
    dwell: float = 0.3       # s

    def __post_init__(self):
        if self.n_points < 10:
            raise ValueError("n_points must be >= 10")
        if self.dwell <= 0.0:
            raise ValueError("dwell must be > 0")

    def phase(self, channels: np.ndarray) -> np.ndarray:
        return self.a + self.b * channels + self.c * channels**2


@dataclass(frozen=True)
class FringeScan:
    counts: np.ndarray  # non-negative integers per channel
    label: str

    def __post_init__(self):
        if np.any(self.counts < 0):
            raise ValueError("counts must be >= 0")


@dataclass(frozen=True)
class ExperimentRun:
    """Three sweeps (empty, gas, empty), background, and the injected truth."""

    scans: tuple[FringeScan, FringeScan, FringeScan]
    background: FringeScan
    sweep_configs: tuple[SweepConfig, SweepConfig, SweepConfig]
    p_meas: float  # Pa
    truth: dict = field(default_factory=dict)

    def __post_init__(self):
        n = {s.counts.size for s in self.scans}
        if len(n) != 1:
            raise ValueError("all sweeps must share n_points")


def gas_effect(re_per_density: float, im_per_density: float, n_gas: float,
               length: float, k_lab: float) -> tuple[float, float]:
    """Phase shift and amplitude transmission of the gas cell.

    phi = Re[(n-1)/n_gas] n_gas k L,  t = exp(-Im[(n-1)/n_gas] n_gas k L).
    """
    if n_gas < 0.0 or length <= 0.0 or k_lab <= 0.0:
        raise ValueError("need n_gas >= 0, length > 0, k_lab > 0")
    phi = re_per_density * n_gas * k_lab * length
    t = math.exp(-im_per_density * n_gas * k_lab * length)
    return phi, t


def balanced_arm(i0: float, visibility: float, t: float,
                 imbalance: float = 1.0) -> tuple[float, float]:
    """Mean intensity and visibility of the gas sweep.

    ``imbalance`` is the upper/lower arm amplitude ratio; the product
    identity I0' V' = t I0 V holds for any value of it.
    """
    q2 = imbalance * imbalance
    i0p = i0 * (1.0 + q2 * t * t) / (1.0 + q2)
    vp = visibility * t * (1.0 + q2) / (1.0 + q2 * t * t)
    return i0p, vp


def make_sweep_configs(a_base: float, *, b: float = DEFAULT_B, c: float = DEFAULT_C,
                       n_points: int = 300, dwell: float = 0.3,
                       drift_rate: float = 0.0,
                       walk_sigma: float = 0.0,
                       rng: np.random.Generator | None = None):
    """Three sweep configs with a linear phase drift across sweeps.

    The three-sweep estimator a2 - (a1 + a3)/2 cancels the linear drift
    exactly.  ``walk_sigma`` adds an optional random-walk component (default
    off) for robustness studies; it is NOT cancelled by the estimator.
    """
    steps = np.zeros(3)
    if walk_sigma > 0.0:
        if rng is None:
            raise ValueError("walk_sigma > 0 requires an rng")
        steps = np.cumsum(np.concatenate([[0.0], rng.normal(0.0, walk_sigma, 2)]))
    return tuple(
        SweepConfig(a=a_base + drift_rate * j + steps[j], b=b, c=c,
                    n_points=n_points, dwell=dwell)
        for j in range(3)
    )


def expected_rates(config: SweepConfig, i_bg: float, i0: float, visibility: float,
                   phase_offset: float = 0.0) -> np.ndarray:
    """Expected counts per channel for one sweep."""
    n = np.arange(config.n_points, dtype=float)
    lam = config.dwell * (
        i_bg + i0 * (1.0 + visibility * np.cos(config.phase(n) + phase_offset))
    )
    if np.any(lam < 0.0):
        raise ValueError("negative expected rate; check I_B, I0, V inputs")
    return lam


def simulate_run(truth: tuple[float, float, float],
                 sweeps: tuple[SweepConfig, SweepConfig, SweepConfig],
                 effect: tuple[float, float],
                 rng_seed,
                 p_meas: float = 0.0,
                 imbalance: float = 1.0,
                 extra_truth: dict | None = None) -> ExperimentRun:
    """Simulate one three-sweep experiment.

    truth = (I_B, I0, V) in counts/s and dimensionless visibility;
    effect = (phi, t) of the gas; sweep j = 1 is index 0 (empty).
    """
    i_bg, i0, visibility = truth
    phi, t = effect
    if not (0.0 <= visibility <= 1.0):
        raise ValueError("visibility must be in [0, 1]")
    if i0 <= 0.0 or i_bg < 0.0:
        raise ValueError("need I0 > 0 and I_B >= 0")
    if not (0.0 < t <= 1.0):
        raise ValueError("transmission must be in (0, 1]")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)

    scans = []
    for j, cfg in enumerate(sweeps):
        if j == 1:
            i0p, vp = balanced_arm(i0, visibility, t, imbalance)
            lam = expected_rates(cfg, i_bg, i0p, vp, phase_offset=phi)
            label = "gas"
        else:
            lam = expected_rates(cfg, i_bg, i0, visibility)
            label = f"empty{j + 1}"
        scans.append(FringeScan(rng.poisson(lam).astype(np.int64), label))
    n_bg = sweeps[0].n_points
    bg_lam = np.full(n_bg, sweeps[0].dwell * i_bg)
    background = FringeScan(rng.poisson(bg_lam).astype(np.int64), "background")

    truth_block = {
        "phi": phi, "t": t, "i_bg": i_bg, "i0": i0, "visibility": visibility,
        "a": [cfg.a for cfg in sweeps], "imbalance": imbalance,
    }
    truth_block.update(extra_truth or {})
    return ExperimentRun(
        scans=tuple(scans),
        background=background,
        sweep_configs=tuple(sweeps),
        p_meas=p_meas,
        truth=truth_block,
    )


# ---------------------------------------------------------------------------
# Run file envelope

def run_to_dict(run: ExperimentRun) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "config": {
            "sweeps": [
                {"a": c.a, "b": c.b, "c": c.c, "n_points": c.n_points, "dwell": c.dwell}
                for c in run.sweep_configs
            ],
        },
        "scans": [s.counts.tolist() for s in run.scans],
        "background": run.background.counts.tolist(),
        "p_meas": run.p_meas,
        "truth": run.truth,
    }


def run_from_dict(raw: dict, origin: str = "<dict>") -> ExperimentRun:
    try:
        cfgs = tuple(
            SweepConfig(a=c["a"], b=c["b"], c=c["c"],
                        n_points=c["n_points"], dwell=c["dwell"])
            for c in raw["config"]["sweeps"]
        )
        labels = ("empty1", "gas", "empty3")
        scans = tuple(
            FringeScan(np.asarray(counts, dtype=np.int64), label)
            for counts, label in zip(raw["scans"], labels)
        )
        background = FringeScan(np.asarray(raw["background"], dtype=np.int64), "background")
        return ExperimentRun(
            scans=scans,
            background=background,
            sweep_configs=cfgs,
            p_meas=float(raw["p_meas"]),
            truth=dict(raw.get("truth", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"run file {origin}: {exc}") from None


def save_run(run: ExperimentRun, path):
    Path(path).write_text(json.dumps(run_to_dict(run), sort_keys=True))


def load_run(path) -> ExperimentRun:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"run file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"run file {path} is not valid JSON: {exc}") from None
    return run_from_dict(raw, origin=str(path))
