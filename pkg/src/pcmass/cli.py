"""
Command-line interface.

    pcmass bands  --config run.json [--out bands.csv]
    pcmass mass   --config run.json [--out report.json] [--threads N]
    pcmass ionize --config run.json [--out table.csv]
    pcmass sweep  --config run.json [--out sweep.csv]
    pcmass check  --config run.json

Exit codes: 0 success, 2 configuration or I/O problem, 3 numerical
non-convergence (the best estimate is still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bands import BandSolverError, LayerStack, Polarization, band_surface, dispersion_residual, solve_bands
from .config import ConfigError, RunConfig, load_config
from .dispersion import Constant, gold_hfo2_metamaterial
from .fields import fourier_coefficients, mode_profile, unit_cell_transfer_matrix
from .ionization import (ionization_correction_closed_form, ionization_correction_general,
                         pc_ionization_table, table_to_csv)
from .mass import QuadratureError, ab_coefficients
from .units import ALKALI_IONIZATION, atoms_by_symbol

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _emit(text: str, out):
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _threads(n):
    return os.cpu_count() or 1 if n == 0 else n


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    reg = dict(cfg.regularization)
    if getattr(args, "omega_max", None) is not None:
        reg["omega_max"] = args.omega_max
    if getattr(args, "scheme", None) is not None:
        reg["scheme"] = args.scheme
    cfg.regularization = reg
    cfg.validate()
    return cfg


def _check_csv(text: str, header: list):
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != header or any(len(r) != len(header) for r in rows[1:]):
        raise RuntimeError("emitted CSV does not match its schema")


# --- subcommands ---------------------------------------------------------

def cmd_bands(cfg: RunConfig, out=None, threads=1) -> int:
    stack = cfg.layer_stack()
    reg = cfg.regularization_config()
    spec = cfg.bands
    pols = [Polarization[p] for p in spec.get("polarizations", ["TE", "TM"])]
    k_rho = spec.get("k_rho", [0.0])
    nkz = int(spec.get("k_z_points", 21))
    k_z = np.linspace(0.0, stack.zone_edge, nkz)
    pieces = []
    for pol in pols:
        pieces.append(band_surface(stack, pol, k_rho, k_z, reg.omega_max, threads=threads).to_csv())
    text = pieces[0] + "".join(p.split("\n", 1)[1] for p in pieces[1:])
    _check_csv(text, ["k_rho_invnm", "k_z_invnm", "pol", "band", "omega_eV"])
    _emit(text, out)
    return EXIT_OK


def _report_json(mc, converged: bool) -> str:
    rep = mc.report()
    rep["converged"] = converged
    rep["delta_E_ion_eV"] = ionization_correction_general(mc).delta_E_ion
    return json.dumps(rep, indent=2, sort_keys=True) + "\n"


def cmd_mass(cfg: RunConfig, out=None, threads=1) -> int:
    stack = cfg.layer_stack()
    quad = cfg.quadrature_config(threads)
    reg = cfg.regularization_config()
    try:
        mc = ab_coefficients(stack, quad, reg)
    except QuadratureError as exc:
        _emit(_report_json(exc.best, False), out)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _emit(_report_json(mc, True), out)
    return EXIT_OK


def cmd_ionize(cfg: RunConfig, out=None, threads=1) -> int:
    atoms = atoms_by_symbol(cfg.atoms, ALKALI_IONIZATION)
    status = EXIT_OK
    if "delta_E_ion" in cfg.ionize:
        delta = float(cfg.ionize["delta_E_ion"])
        summary = f"delta_E_ion = {delta:.4f} eV (given)"
    else:
        stack = cfg.layer_stack()
        try:
            mc = ab_coefficients(stack, cfg.quadrature_config(threads), cfg.regularization_config())
        except QuadratureError as exc:
            mc = exc.best
            status = EXIT_NUMERIC
            print(f"error: {exc}", file=sys.stderr)
        res = ionization_correction_general(mc)
        if res.B_sign == "negative":
            res = ionization_correction_closed_form(stack, mc=mc)
        delta = res.delta_E_ion
        summary = f"delta_E_ion = {delta:.4f} eV (route {res.route}, B {res.B_sign})"
    rows = pc_ionization_table(atoms, delta)
    text = table_to_csv(rows)
    _check_csv(text, ["symbol", "I_vac_eV", "delta_eV", "I_pc_eV", "flag"])
    _emit(text, out)
    print(summary, file=sys.stderr if out in (None, "-") else sys.stdout)
    return status


def cmd_sweep(cfg: RunConfig, out=None, threads=1) -> int:
    spec = cfg.sweep_spec()
    quad = cfg.quadrature_config(threads)
    reg = cfg.regularization_config()
    period = float(cfg.stack["d_h"]) + float(cfg.stack["d_l"])
    d_h = spec.d_h_fraction * period
    points = [("constant", n, "", "", Constant(n)) for n in spec.n_values]
    points += [("metamaterial", "", a, g, None) for a, g in spec.metamaterial]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["kind", "n_h", "a_nm", "g_nm", "A_eV", "B_eV", "abs_delta_E_ion_eV", "error"]
    w.writerow(header)
    status = EXIT_OK
    for kind, n, a, g, model in points:
        try:
            if model is None:
                model = gold_hfo2_metamaterial(g, a)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                mc = ab_coefficients(LayerStack(d_h, period - d_h, model), quad, reg)
            d = ionization_correction_general(mc).delta_E_ion
            w.writerow([kind, n, a, g, repr(mc.A), repr(mc.B), repr(abs(d)), ""])
        except (QuadratureError, BandSolverError, ValueError) as exc:
            status = EXIT_NUMERIC
            w.writerow([kind, n, a, g, "", "", "", str(exc).replace("\n", " ")])
    text = buf.getvalue()
    _check_csv(text, header)
    _emit(text, out)
    return status


def cmd_check(cfg: RunConfig, out=None, threads=1) -> int:
    """Invariant suite on the configured stack at a few sample points."""
    stack = cfg.layer_stack()
    reg = cfg.regularization_config()
    kmax = stack.model_h.max_index(reg.omega_max) * reg.omega_max / 197.3269804
    results = {"max_residual": 0.0, "max_det_error": 0.0, "max_interface_mismatch": 0.0,
               "max_norm_error": 0.0, "points": 0}
    for pol in Polarization:
        for kr in (0.05 * kmax, 0.3 * kmax):
            for frac in (0.0, 0.37, 1.0):
                for bp in solve_bands(stack, pol, kr, frac * stack.zone_edge, reg.omega_max)[:6]:
                    results["points"] += 1
                    r = abs(dispersion_residual(stack, pol, bp.omega, kr, bp.k_z))
                    tm = unit_cell_transfer_matrix(stack, pol, bp.omega, kr)
                    scale = float(np.abs(tm.matrix).max()) ** 2
                    prof = mode_profile(stack, bp, tol=1e-6)
                    results["max_residual"] = max(results["max_residual"], r)
                    results["max_det_error"] = max(results["max_det_error"], abs(tm.det - 1) / max(1.0, scale))
                    results["max_interface_mismatch"] = max(results["max_interface_mismatch"], prof.interface_mismatch())
                    results["max_norm_error"] = max(results["max_norm_error"], abs(prof.normalization - 0.5))
    ok = (results["max_residual"] < 1e-8 and results["max_det_error"] < 1e-10
          and results["max_interface_mismatch"] < 1e-8 and results["max_norm_error"] < 1e-10)
    results["ok"] = ok
    _emit(json.dumps(results, indent=2, sort_keys=True) + "\n", out)
    return EXIT_OK if ok else EXIT_NUMERIC


COMMANDS = {"bands": cmd_bands, "mass": cmd_mass, "ionize": cmd_ionize, "sweep": cmd_sweep, "check": cmd_check}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pcmass", description="Photonic-crystal electron mass corrections.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        s = sub.add_parser(name, help=fn.__doc__.strip().splitlines()[0] if fn.__doc__ else name)
        s.add_argument("--config", required=True, help="JSON run configuration")
        s.add_argument("--out", default=None, help="output path (default: standard output)")
        s.add_argument("--threads", type=int, default=1, help="worker threads (0 = all cores)")
        s.add_argument("--omega-max", type=float, default=None, help="band cutoff in eV")
        s.add_argument("--scheme", choices=["mode", "freq"], default=None, help="vacuum subtraction")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        threads = _threads(args.threads)
        if threads < 1:
            raise ConfigError("--threads must be >= 0")
        return COMMANDS[args.command](cfg, args.out, threads)
    except (ConfigError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BandSolverError, QuadratureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
