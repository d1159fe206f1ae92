"""Command line interface.

Subcommands cover the forward path (potential, phaseshifts, amplitude,
index, scan, cell), the synthetic-experiment path (simulate, analyze), and
report generation (table1, fig3, fig4, fig5, endtoend).  Data is emitted as
CSV or JSON (always carrying a schema_version); report commands also render
PNG figures next to the delimited output unless --no-plot is given.

Exit codes: 0 success, 2 usage, 3 configuration problem, 4 numerical
failure, 5 tolerance failure (endtoend).  Errors go to stderr; data goes to
files or stdout only.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from importlib import resources
from pathlib import Path

import numpy as np

from . import analysis, cell, fringes, potentials, refraction
from .constants import HBAR, M_LI7, canonical_species, target_mass
from .errors import ConfigError, ConvergenceError
from .scattering import RadialPolicy, build_table, forward_amplitude, total_cross_section
from .thermal import BeamSpec
from .units import MBAR

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_NUMERIC = 4
EXIT_TOLERANCE = 5


def builtin_config(name: str) -> Path:
    """Path of a packaged config file (e.g. 'li_xe_buckingham_corner.json')."""
    return Path(str(resources.files("liwave.data").joinpath(name)))


def _resolve(path_str: str) -> Path:
    """Accept a filesystem path or the bare name of a packaged config."""
    p = Path(path_str)
    if p.exists():
        return p
    candidate = builtin_config(path_str if path_str.endswith(".json") else path_str + ".json")
    if candidate.exists():
        return candidate
    raise ConfigError(f"config not found: {path_str}")


def _write_csv(path, header_cols, rows, fmt="%.12e"):
    lines = [f"# schema_version,{SCHEMA_VERSION}", ",".join(header_cols)]
    for row in rows:
        lines.append(",".join(
            (c if isinstance(c, str) else fmt % c) for c in row
        ))
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _write_json(path, payload: dict):
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _length_in(value: float, units: str) -> float:
    return value * 1e-10 if units == "mbar-angstrom" else value


def _pressure_in(value: float, units: str) -> float:
    return value * MBAR if units == "mbar-angstrom" else value


def _system(args, gas: str):
    spec, meta = potentials.load_potential(_resolve(args.config))
    return potentials.CollisionSystem(M_LI7, target_mass(gas), spec), meta


def _k_rel(args, system) -> float:
    if getattr(args, "k", None):
        return args.k
    return system.mu * args.velocity / HBAR


def _radial_policy(args) -> RadialPolicy:
    return RadialPolicy(delta_tol=args.delta_tol)


def _index_policy(args, include_beam: bool = False) -> refraction.IndexPolicy:
    return refraction.IndexPolicy(
        target_nodes=args.nodes,
        include_beam_spread=include_beam,
        radial=_radial_policy(args),
    )


# ---------------------------------------------------------------------------
# Subcommand implementations

def cmd_potential(args) -> int:
    spec, _ = potentials.load_potential(_resolve(args.config))
    r_min = _length_in(args.r_min, args.units)
    r_max = _length_in(args.r_max, args.units)
    if not (0.0 < r_min < r_max):
        raise ConfigError("need 0 < r-min < r-max")
    r = np.linspace(r_min, r_max, args.points)
    v = spec(r)
    _write_csv(args.out, ["r", "V"], zip(r, v))
    return EXIT_OK


def cmd_phaseshifts(args) -> int:
    system, _ = _system(args, args.gas)
    k = _k_rel(args, system)
    table = build_table(system, k, _radial_policy(args))
    _write_csv(args.out, ["l", "delta", "method"],
               ((str(int(l)), d, str(m)) for l, d, m in zip(table.l, table.delta, table.method)),
               fmt="%.10e")
    return EXIT_OK


def cmd_amplitude(args) -> int:
    system, _ = _system(args, args.gas)
    k = _k_rel(args, system)
    table = build_table(system, k, _radial_policy(args))
    f = forward_amplitude(table)
    sigma = total_cross_section(table)
    _write_csv(args.out, ["k", "f_re", "f_im", "sigma"], [(k, f.f_re, f.f_im, sigma)])
    return EXIT_OK


def cmd_index(args) -> int:
    system, meta = _system(args, args.gas)
    gas = cell.gas_spec(args.gas, args.temperature)
    beam = BeamSpec(M_LI7, args.velocity, args.beam_fwhm)
    policy = _index_policy(args, include_beam=args.beam_fwhm > 0.0)
    res = refraction.index_per_density(system, beam, gas, policy)
    _write_json(args.out, {
        "pair": meta["pair"],
        "gas": canonical_species(args.gas),
        "u_mean": res.u_mean,
        "re_per_density": res.re_per_density,
        "im_per_density": res.im_per_density,
        "rho": res.rho,
        "k_lab": res.k_lab,
        "sigma_eff": refraction.sigma_eff(res),
    })
    return EXIT_OK


def _run_scan(args):
    system, _ = _system(args, args.gas)
    gas = cell.gas_spec(args.gas, args.temperature)
    return refraction.glory_scan(system, gas, args.u_min, args.u_max,
                                 args.points, _index_policy(args))


def cmd_scan(args) -> int:
    scan = _run_scan(args)
    _write_csv(args.out, ["u", "re_scaled", "im_scaled", "rho", "sigma"], scan.rows())
    return EXIT_OK


def cmd_cell(args) -> int:
    geom = cell.load_geometry(_resolve(args.geom))
    gas = cell.gas_spec(args.gas, geom.temperature)
    if args.pressure_mbar is None and args.pressure is None:
        raise ConfigError("give --pressure or --pressure-mbar")
    p_meas = args.pressure_mbar * MBAR if args.pressure_mbar is not None \
        else _pressure_in(args.pressure, args.units)
    state = cell.density(p_meas, geom, gas)
    _write_json(args.out, {
        "species": state.species,
        "p_meas": state.p_meas,
        "p_cell": state.p_cell,
        "n_gas": state.n_gas,
        "pressure_correction": cell.pressure_correction(geom, gas),
        "effective_length": cell.effective_length(geom),
    })
    return EXIT_OK


def _parse_pressures(text: str, units: str):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad pressure list: {text!r}") from None
    if len(vals) < 2:
        raise ConfigError("need at least two pressures")
    return [_pressure_in(v, units) for v in vals]


def cmd_simulate(args) -> int:
    geom = cell.load_geometry(_resolve(args.geom))
    gas = cell.gas_spec(args.gas, geom.temperature)
    beam = BeamSpec(M_LI7, args.velocity, args.beam_fwhm)
    if args.index_from == "values":
        if args.re_per_density is None or args.im_per_density is None:
            raise ConfigError("--index-from values requires --re-per-density and --im-per-density")
        re_pd, im_pd = args.re_per_density, args.im_per_density
    else:
        system, _ = _system(args, args.gas)
        res = refraction.index_per_density(system, beam, gas, _index_policy(args))
        re_pd, im_pd = res.re_per_density, res.im_per_density

    pressures = _parse_pressures(args.pressure_list, args.units)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    k_lab = beam.m_projectile * beam.u_mean / HBAR
    length = cell.effective_length(geom)
    seeds = np.random.SeedSequence(args.seed).spawn(len(pressures))
    written = []
    for i, (p_meas, seed) in enumerate(zip(pressures, seeds), start=1):
        rng = np.random.default_rng(seed)
        state = cell.density(p_meas, geom, gas)
        phi, t = fringes.gas_effect(re_pd, im_pd, state.n_gas, length, k_lab)
        drift = rng.normal(0.0, fringes.DEFAULT_DRIFT_SIGMA)
        sweeps = fringes.make_sweep_configs(
            a_base=rng.uniform(-math.pi, math.pi), drift_rate=drift)
        run = fringes.simulate_run(
            (fringes.DEFAULT_I_BG, fringes.DEFAULT_I0, fringes.DEFAULT_VISIBILITY),
            sweeps, (phi, t), rng, p_meas=p_meas,
            extra_truth={"re_per_density": re_pd, "im_per_density": im_pd,
                         "n_gas": state.n_gas},
        )
        path = out_dir / f"run_{i:03d}.json"
        fringes.save_run(run, path)
        written.append(str(path))
    _write_json(None, {"written": written, "seed": args.seed})
    return EXIT_OK


def cmd_analyze(args) -> int:
    geom = cell.load_geometry(_resolve(args.geom))
    gas = cell.gas_spec(args.gas, geom.temperature)
    beam = BeamSpec(M_LI7, args.beam_velocity, 0.25)
    paths = analysis.find_run_files(args.runs)
    measured, series = analysis.analyze_run_files(paths, geom, gas, beam)
    out = Path(args.out) if args.out else None
    _write_json(out, _measured_payload(measured))
    if out is not None:
        series_csv = out.with_suffix(".series.csv")
        _write_csv(series_csv, ["n_gas", "phi", "phi_err", "minus_ln_t", "minus_ln_t_err"],
                   zip(series.n_gas, series.phi, series.phi_err,
                       series.minus_ln_t, series.minus_ln_t_err))
        if args.plot:
            from . import plotting
            kl = series.k_lab * series.length
            plotting.plot_density_series(
                series.n_gas, series.phi, series.phi_err,
                series.minus_ln_t, series.minus_ln_t_err,
                ((measured.re_per_density * kl, measured.phi_intercept),
                 (measured.im_per_density * kl, measured.lnt_intercept)),
                out.with_suffix(".png"),
            )
    return EXIT_OK


def _measured_payload(m: analysis.MeasuredIndex) -> dict:
    return {
        "u_mean": m.u_mean,
        "re_per_density": m.re_per_density, "re_err": m.re_err,
        "im_per_density": m.im_per_density, "im_err": m.im_err,
        "rho": m.rho, "rho_err": m.rho_err,
        "k_lab": m.k_lab, "length": m.length, "n_runs": m.n_runs,
        "phi_intercept": m.phi_intercept, "phi_intercept_err": m.phi_intercept_err,
        "lnt_intercept": m.lnt_intercept, "lnt_intercept_err": m.lnt_intercept_err,
        "r2_phi": m.r2_phi, "r2_lnt": m.r2_lnt,
    }


_TABLE1_CONFIGS = {
    "argon": "li_ar_buckingham_corner.json",
    "krypton": "li_kr_buckingham_corner.json",
    "xenon": "li_xe_buckingham_corner.json",
}


def cmd_table1(args) -> int:
    rows = []
    payload = {}
    for gas_name, default_cfg in _TABLE1_CONFIGS.items():
        cfg = getattr(args, f"config_{gas_name}") or default_cfg
        spec, _ = potentials.load_potential(_resolve(cfg))
        system = potentials.CollisionSystem(M_LI7, target_mass(gas_name), spec)
        gas = cell.gas_spec(gas_name, args.temperature)
        beam = BeamSpec(M_LI7, args.velocity, 0.25)
        res = refraction.index_per_density(system, beam, gas, _index_policy(args))
        entry = {
            "re_per_density": res.re_per_density,
            "im_per_density": res.im_per_density,
            "rho": res.rho,
            "sigma_eff": refraction.sigma_eff(res),
        }
        runs_dir = getattr(args, f"runs_{gas_name}")
        if runs_dir:
            geom = cell.load_geometry(_resolve(args.geom))
            measured, _ = analysis.analyze_run_files(
                analysis.find_run_files(runs_dir), geom, gas, beam)
            entry["measured"] = _measured_payload(measured)
        payload[gas_name] = entry
        rows.append((gas_name, res.re_per_density, res.im_per_density, res.rho))
    _write_json(args.out, {"u_mean": args.velocity, "gases": payload})
    if args.out:
        _write_csv(Path(args.out).with_suffix(".csv"),
                   ["gas", "re_per_density", "im_per_density", "rho"], rows)
    return EXIT_OK


def _fig_common(args, columns, rows, plot_fn, plot_args) -> int:
    out = Path(args.out)
    _write_csv(out, columns, rows)
    if args.plot:
        plot_fn(*plot_args, out.with_suffix(".png"))
    return EXIT_OK


def cmd_fig3(args) -> int:
    scan = _run_scan(args)
    from . import plotting
    return _fig_common(args, ["u", "sigma"], zip(scan.u, scan.sigma),
                       plotting.plot_cross_section, (scan.u, scan.sigma))


def cmd_fig4(args) -> int:
    scan = _run_scan(args)
    from . import plotting
    return _fig_common(args, ["u", "re_scaled", "im_scaled"],
                       zip(scan.u, scan.re_scaled, scan.im_scaled),
                       plotting.plot_scaled_index, (scan.u, scan.re_scaled, scan.im_scaled))


def cmd_fig5(args) -> int:
    scan = _run_scan(args)
    from . import plotting
    return _fig_common(args, ["u", "rho"], zip(scan.u, scan.rho),
                       plotting.plot_rho, (scan.u, scan.rho))


def cmd_endtoend(args) -> int:
    """Theory -> simulate -> analyze -> compare, self-consistency gate."""
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    system, _ = _system(args, args.gas)
    geom = cell.load_geometry(_resolve(args.geom))
    gas = cell.gas_spec(args.gas, geom.temperature)
    beam = BeamSpec(M_LI7, args.velocity, 0.25)
    res = refraction.index_per_density(system, beam, gas, _index_policy(args))

    run_dir = out_dir / "runs"
    sim_args = argparse.Namespace(
        geom=args.geom, gas=args.gas, velocity=args.velocity, beam_fwhm=0.25,
        index_from="values", re_per_density=res.re_per_density,
        im_per_density=res.im_per_density, pressure_list=args.pressure_list,
        units=args.units, out=str(run_dir), seed=args.seed,
        config=args.config, nodes=args.nodes, delta_tol=args.delta_tol,
        temperature=geom.temperature,
    )
    stdout, sys.stdout = sys.stdout, open(Path(out_dir, "simulate.log"), "w")
    try:
        cmd_simulate(sim_args)
    finally:
        sys.stdout.close()
        sys.stdout = stdout

    measured, series = analysis.analyze_run_files(
        analysis.find_run_files(run_dir), geom, gas, beam)

    checks = {}
    for name, injected, got, err in (
        ("re_per_density", res.re_per_density, measured.re_per_density, measured.re_err),
        ("im_per_density", res.im_per_density, measured.im_per_density, measured.im_err),
    ):
        tol = max(4.0 * err, 0.02 * abs(injected))
        checks[name] = {
            "injected": injected, "recovered": got, "tolerance": tol,
            "pass": bool(abs(got - injected) <= tol),
        }
    checks["r2_phi"] = {"value": measured.r2_phi, "pass": bool(measured.r2_phi > 0.99)}
    checks["r2_lnt"] = {"value": measured.r2_lnt, "pass": bool(measured.r2_lnt > 0.99)}
    ok = all(c["pass"] for c in checks.values())
    _write_json(out_dir / "report.json", {
        "checks": checks, "ok": ok, "seed": args.seed,
        "measured": _measured_payload(measured),
    })
    _write_json(None, {"ok": ok, "report": str(out_dir / "report.json")})
    return EXIT_OK if ok else EXIT_TOLERANCE


# ---------------------------------------------------------------------------
# Parser

def _add_radial_flags(p):
    p.add_argument("--delta-tol", type=float, default=1e-6,
                   help="phase-shift convergence tolerance (rad)")


def _add_index_flags(p):
    p.add_argument("--nodes", type=int, default=48, help="thermal quadrature nodes")
    p.add_argument("--temperature", type=float, default=298.0, help="target gas temperature (K)")
    _add_radial_flags(p)


def _add_scan_flags(p):
    p.add_argument("--u-min", type=float, default=700.0)
    p.add_argument("--u-max", type=float, default=3300.0)
    p.add_argument("--points", type=int, default=60)
    p.add_argument("--gas", default="xenon")
    p.add_argument("--config", required=True, help="potential config (path or packaged name)")
    _add_index_flags(p)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="liwave",
        description="Index of refraction of dilute gases for lithium matter waves",
        epilog="exit codes: 0 ok, 2 usage, 3 config, 4 numeric, 5 tolerance",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--units", choices=["si", "mbar-angstrom"], default="si",
                        help="units of CLI length/pressure inputs (outputs are always SI)")
    common.add_argument("--seed", type=int, default=20260810,
                        help="master seed; per-run seeds derive from it by spawn index")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=lambda **kw: argparse.ArgumentParser(parents=[common], **kw))

    p = sub.add_parser("potential", help="evaluate a potential on a radial grid")
    psub = p.add_subparsers(dest="potential_command", required=True)
    pe = psub.add_parser("eval", help="emit CSV of r,V", parents=[common])
    pe.add_argument("--config", required=True)
    pe.add_argument("--r-min", type=float, required=True)
    pe.add_argument("--r-max", type=float, required=True)
    pe.add_argument("--points", type=int, default=200)
    pe.add_argument("--out", default=None)
    pe.set_defaults(func=cmd_potential)

    p = sub.add_parser("phaseshifts", help="phase-shift table at one wavevector")
    p.add_argument("--config", required=True)
    p.add_argument("--gas", default="xenon")
    p.add_argument("--velocity", type=float, default=1075.0,
                   help="relative collision velocity (m/s); k = mu v / hbar")
    p.add_argument("--k", type=float, default=None, help="override k_rel directly (1/m)")
    p.add_argument("--out", default=None)
    _add_radial_flags(p)
    p.set_defaults(func=cmd_phaseshifts)

    p = sub.add_parser("amplitude", help="forward amplitude and cross section")
    p.add_argument("--config", required=True)
    p.add_argument("--gas", default="xenon")
    p.add_argument("--velocity", type=float, default=1075.0)
    p.add_argument("--k", type=float, default=None)
    p.add_argument("--out", default=None)
    _add_radial_flags(p)
    p.set_defaults(func=cmd_amplitude)

    p = sub.add_parser("index", help="thermally averaged index per density")
    p.add_argument("--config", required=True)
    p.add_argument("--gas", default="xenon")
    p.add_argument("--velocity", type=float, default=1075.0)
    p.add_argument("--beam-fwhm", type=float, default=0.0,
                   help="fractional beam FWHM; > 0 adds the beam-speed average")
    p.add_argument("--out", default=None)
    _add_index_flags(p)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("scan", help="velocity scan (u, scaled parts, rho, sigma)")
    _add_scan_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("cell", help="gas cell state from a measured pressure")
    p.add_argument("--geom", required=True)
    p.add_argument("--gas", default="xenon")
    p.add_argument("--pressure", type=float, default=None, help="measured pressure (per --units)")
    p.add_argument("--pressure-mbar", type=float, default=None, help="measured pressure in mbar")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_cell)

    p = sub.add_parser("simulate", help="simulate a pressure series of fringe runs")
    p.add_argument("--index-from", choices=["theory", "values"], default="theory")
    p.add_argument("--config", default="li_xe_buckingham_corner.json")
    p.add_argument("--gas", default="xenon")
    p.add_argument("--geom", default="cell_default.json")
    p.add_argument("--velocity", type=float, default=1075.0)
    p.add_argument("--beam-fwhm", type=float, default=0.25)
    p.add_argument("--re-per-density", type=float, default=None, help="m^3 (values mode)")
    p.add_argument("--im-per-density", type=float, default=None, help="m^3 (values mode)")
    p.add_argument("--pressure-list", required=True,
                   help="comma-separated measured pressures (per --units)")
    p.add_argument("--out", required=True, help="output directory for run_*.json")
    _add_index_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="fit runs, regress against density")
    p.add_argument("--runs", required=True, help="directory of run_*.json")
    p.add_argument("--geom", default="cell_default.json")
    p.add_argument("--gas", default="xenon")
    p.add_argument("--beam-velocity", type=float, required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--plot", action="store_true", help="render the series figure")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("table1", help="theory index for Ar, Kr, Xe at one velocity")
    p.add_argument("--velocity", type=float, default=1075.0)
    p.add_argument("--geom", default="cell_default.json")
    for g in ("argon", "krypton", "xenon"):
        p.add_argument(f"--config-{g}", default=None)
        p.add_argument(f"--runs-{g}", default=None,
                       help=f"optional run directory for measured {g} side-by-side")
    p.add_argument("--out", default=None)
    _add_index_flags(p)
    p.set_defaults(func=cmd_table1)

    for name, helptext, fn in (
        ("fig3", "cross section vs velocity (CSV + PNG)", cmd_fig3),
        ("fig4", "u^(7/5)-scaled index parts vs velocity (CSV + PNG)", cmd_fig4),
        ("fig5", "rho vs velocity (CSV + PNG)", cmd_fig5),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_scan_flags(p)
        p.add_argument("--out", required=True)
        p.add_argument("--plot", dest="plot", action="store_true", default=True)
        p.add_argument("--no-plot", dest="plot", action="store_false")
        p.set_defaults(func=fn)

    p = sub.add_parser("endtoend", help="theory -> simulate -> analyze round trip")
    p.add_argument("--config", default="li_xe_buckingham_corner.json")
    p.add_argument("--gas", default="xenon")
    p.add_argument("--geom", default="cell_default.json")
    p.add_argument("--velocity", type=float, default=1075.0)
    p.add_argument("--pressure-list", default="0.006,0.012,0.018,0.024,0.030",
                   help="measured pressures (per --units; defaults are Pa)")
    p.add_argument("--out", required=True, help="output directory")
    _add_index_flags(p)
    p.set_defaults(func=cmd_endtoend)

    return ap


def main(argv=None) -> int:
    warnings.filterwarnings("ignore", message=".*TBB.*")
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"liwave: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"liwave: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"liwave: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
