"""Batch front door: subcommands wiring the library, JSON config ingestion,
and deterministic report emission.

Every command is a pure function of its resolved configuration (seeds
included); outputs are written atomically and each file is paired with a
manifest embedding the full resolved config.  Errors exit nonzero with a
machine-readable JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import cocycle, induction, lyapunov, surface, thermo
from .core import IntMatrix3, char_poly, discriminant
from .induction import PathStep, word as make_word


DEFAULTS = {
    "precision": 256,
    "seed": 1,
    "nmax": 20,
    "depth": 12,
    "resolution": 512,
    "length": 100000,
    "level": None,
    "out": ".",
    "parameters": None,
    "words": None,
    "kappa_grid": [1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0, 10.0],
    "seeds": None,
    "streams": 4,
}


@dataclass
class RunConfig:
    values: dict

    def __getattr__(self, key):
        try:
            return self.values[key]
        except KeyError as exc:
            raise AttributeError(key) from exc

    def to_dict(self) -> dict:
        out = {}
        for k, v in sorted(self.values.items()):
            out[k] = v
        return out


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = dict(DEFAULTS)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            values.update(json.load(fh))
    for key in ("out", "seed", "precision", "nmax", "depth", "resolution",
                "length", "level"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    values["command"] = args.command
    return RunConfig(values)


def _atomic_write(path: str, data) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data if isinstance(data, bytes) else data.encode())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str, obj) -> None:
    _atomic_write(path, json.dumps(obj, sort_keys=True, indent=1) + "\n")


def write_manifest(path: str, config: RunConfig, extra: Optional[dict] = None) -> None:
    manifest = {"config": config.to_dict()}
    if extra:
        manifest.update(extra)
    write_json(path, manifest)


def resolve_parameters(config: RunConfig) -> Tuple[Fraction, Fraction, Fraction]:
    """Exact (a, b, c): decimal/fraction strings, or derived from a word."""
    params = config.parameters
    if params is None:
        raise ValueError("config must set 'parameters' (three strings or a word spec)")
    if isinstance(params, (list, tuple)) and len(params) == 3:
        vals = sorted((Fraction(str(p)) for p in params), reverse=True)
        total = sum(vals)
        return tuple(v / total for v in vals)  # type: ignore[return-value]
    if isinstance(params, dict) and "word" in params:
        w = make_word(params["word"])
        return _word_parameters(w, int(params.get("precision", config.precision)))
    if isinstance(params, dict) and "word_seed" in params:
        seed = int(params["word_seed"])
        depth = int(params.get("word_depth", 200))
        nmax = int(params.get("nmax", config.nmax))
        k0 = thermo.solve_kappa0(nmax)
        chain = thermo.gibbs_chain(thermo.build_transfer(nmax, k0))
        w = thermo.sample_word(chain, depth, seed=seed)
        bar = induction.cylinder_barycenter(w)
        return tuple(sorted(bar, reverse=True))  # type: ignore[return-value]
    raise ValueError(f"cannot parse parameters {params!r}")


def _word_parameters(w, precision: int) -> Tuple[Fraction, Fraction, Fraction]:
    """Perron direction of the cylinder matrix, as dyadic rationals."""
    import mpmath

    m, _ = induction.cylinder(w)
    with mpmath.workprec(precision + 16):
        rows = [[mpmath.mpf(x) for x in r] for r in m.rows]
        v = [mpmath.mpf(1) / 3] * 3
        for _ in range(4 * precision):
            nv = [sum(rows[i][j] * v[j] for j in range(3)) for i in range(3)]
            t = sum(nv)
            nv = [x / t for x in nv]
            if max(abs(nv[i] - v[i]) for i in range(3)) < mpmath.mpf(2) ** (-precision - 8):
                break
            v = nv
        scale = 2 ** precision
        vals = sorted((Fraction(int(x * scale), scale) for x in v), reverse=True)
    total = sum(vals)
    return tuple(x / total for x in vals)  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# Subcommands


def cmd_gasket(config: RunConfig) -> int:
    res, depth = int(config.resolution), int(config.depth)
    precision = min(int(config.precision), 53)
    grid = induction.render_gasket(res, depth, precision)
    out = config.out
    ppm = os.path.join(out, "gasket.ppm")
    os.makedirs(out, exist_ok=True)
    induction.write_ppm(grid, depth, ppm)
    induction.write_depth_csv(grid, os.path.join(out, "gasket_depth.csv"))
    fracs = induction.survival_fractions(grid, depth)
    write_manifest(os.path.join(out, "gasket.manifest.json"), config,
                   {"survival_fractions": fracs,
                    "exhausted_pixels": int((grid == induction.EXHAUSTED).sum())})
    return 0


def cmd_certify(config: RunConfig) -> int:
    reports = {}
    _, c1 = cocycle.is_galois_pinching(cocycle.B1_MATRIX)
    _, c2 = cocycle.is_galois_pinching(cocycle.B2_MATRIX)
    twisting, tw_cert = cocycle.is_twisting_pair(cocycle.B1_MATRIX, cocycle.B2_MATRIX)
    reports["B1"] = c1.to_dict()
    reports["B2"] = c2.to_dict()
    reports["pair"] = tw_cert.to_dict()
    if config.words:
        user = []
        for pairs in config.words:
            w = make_word(pairs)
            prod = cocycle.path_cocycle(w, "B").product
            _, cert = cocycle.is_galois_pinching(prod)
            entry = cert.to_dict()
            entry["word"] = [list(s) for s in w]
            entry["positive"] = cocycle.is_positive_path(w)
            user.append(entry)
        reports["words"] = user
    out = os.path.join(config.out, "certificates.json")
    write_json(out, reports)
    write_manifest(os.path.join(config.out, "certificates.manifest.json"), config)
    return 0


def _spectrum_report(config: RunConfig):
    nmax = int(config.nmax)
    k0 = thermo.solve_kappa0(nmax)
    chain = thermo.gibbs_chain(thermo.build_transfer(nmax, k0))
    seeds = config.seeds or [int(config.seed) + i for i in range(int(config.streams))]
    length = int(config.length)
    spectra = []
    for sd in seeds:
        stream = thermo.sample_step_arrays(chain, length, seed=int(sd))
        sp = lyapunov.lyapunov_spectrum(stream, variant="B", source="gibbs", seed=int(sd))
        spectra.append(sp)
    lams = np.array([s.lam for s in spectra])
    mean = lams.mean(axis=0)
    spread = lams.max(axis=0) - lams.min(axis=0)
    ratios = [lyapunov.diffusion_rate(s) for s in spectra]
    rvals = np.array([r for r, _ in ratios])
    report = {
        "kappa0": k0,
        "n_max": nmax,
        "length": length,
        "seeds": [int(s) for s in seeds],
        "spectra": [s.to_dict() for s in spectra],
        "lambda_mean": [float(x) for x in mean],
        "lambda_spread": [float(x) for x in spread],
        "ratio_mean": float(rvals.mean()),
        "ratio_spread": float(rvals.max() - rvals.min()),
        "ratio_stderr": float(rvals.std(ddof=1) / math.sqrt(len(rvals))) if len(rvals) > 1 else None,
    }
    return report


def cmd_spectrum(config: RunConfig) -> int:
    report = _spectrum_report(config)
    write_json(os.path.join(config.out, "spectrum.json"), report)
    write_manifest(os.path.join(config.out, "spectrum.manifest.json"), config)
    return 0


def cmd_pressure(config: RunConfig) -> int:
    nmax = int(config.nmax)
    rows = []
    for nm in (nmax, 2 * nmax):
        for kappa in config.kappa_grid:
            rows.append((float(kappa), thermo.pressure(thermo.build_transfer(nm, float(kappa))), nm))
    k0_a = thermo.solve_kappa0(nmax)
    k0_b = thermo.solve_kappa0(2 * nmax)
    chain = thermo.gibbs_chain(thermo.build_transfer(nmax, k0_a))
    csv_lines = ["kappa,pressure,n_max"]
    csv_lines += [f"{k!r},{p!r},{nm}" for k, p, nm in rows]
    _atomic_write(os.path.join(config.out, "pressure.csv"), "\n".join(csv_lines) + "\n")
    report = {
        "kappa0": k0_a,
        "kappa0_double_truncation": k0_b,
        "kappa0_shift": abs(k0_a - k0_b),
        "abramov_entropy_ratio": thermo.abramov_entropy_ratio(chain),
        "n_max": nmax,
        "representative_rule": chain.model.representative_rule,
        "tail_bound": chain.model.tail_bound(),
    }
    write_json(os.path.join(config.out, "kappa0.json"), report)
    write_manifest(os.path.join(config.out, "pressure.manifest.json"), config)
    return 0


def _traced_levels(config: RunConfig, model, rng, n_levels: int = 2):
    """Draw generic levels, trace both directions, retry on anomalies."""
    results = []
    length = float(config.length)
    attempts = 0
    while len(results) < n_levels and attempts < 5 * n_levels:
        attempts += 1
        s = float(config.level) if config.level is not None and not results else float(rng.uniform(0.05, 0.95))
        try:
            tr = surface.trace(model, s, (0.5, 0.25), max_arclength=length)
            nu, diag = surface.diffusion_exponent(tr)
            results.append((s, tr, nu, diag, attempts - len(results)))
        except (surface.JunctionAnomaly, surface.DegenerateLevel, ValueError):
            continue
    if len(results) < n_levels:
        raise surface.ToleranceFailure(f"only {len(results)} usable levels in {attempts} draws")
    return results


def cmd_trace(config: RunConfig) -> int:
    a, b, c = resolve_parameters(config)
    model = surface.build_surface(a, b, c)
    rng = np.random.default_rng(int(config.seed))
    results = _traced_levels(config, model, rng, n_levels=1)
    s, tr, nu, diag, retries = results[0]
    out = config.out
    os.makedirs(out, exist_ok=True)
    surface.export_trace(tr, os.path.join(out, "trace.csv"), "csv")
    surface.export_trace(tr, os.path.join(out, "trace.svg"), "svg")
    manifest = surface.trace_manifest(tr, model, seed=int(config.seed), retries=retries)
    manifest["nu_hat"] = nu
    manifest["fit"] = {k: v for k, v in diag.items() if k != "running_max"}
    write_manifest(os.path.join(out, "trace.manifest.json"), config, manifest)
    return 0


def cmd_pipeline(config: RunConfig) -> int:
    report = _spectrum_report(config)
    ratio, ratio_err = report["ratio_mean"], report["ratio_stderr"] or 0.0
    a, b, c = resolve_parameters(config)
    model = surface.build_surface(a, b, c)
    rng = np.random.default_rng(int(config.seed))
    traced = _traced_levels(config, model, rng, n_levels=2)
    trace_rows = []
    for s, tr, nu, diag, retries in traced:
        trace_rows.append({
            "level": s,
            "nu_hat": nu,
            "status": tr.status,
            "arclength": float(tr.arclengths[-1]),
            "within_tolerance": bool(abs(nu - ratio) < 0.1),
            "rms_residual": diag["rms_residual"],
            "retries": retries,
        })
    combined = {
        "parameters": {"a": str(a), "b": str(b), "c": str(c)},
        "spectrum": report,
        "ratio": {"value": ratio, "stderr": ratio_err,
                  "interval_ok": bool(0.5 < ratio < 1.0)},
        "traces": trace_rows,
    }
    write_json(os.path.join(config.out, "pipeline.json"), combined)
    write_manifest(os.path.join(config.out, "pipeline.manifest.json"), config)
    return 0


COMMANDS = {
    "gasket": cmd_gasket,
    "certify": cmd_certify,
    "spectrum": cmd_spectrum,
    "pressure": cmd_pressure,
    "trace": cmd_trace,
    "pipeline": cmd_pipeline,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rauzy-gasket",
        description="Rauzy induction, cocycle certificates, pressure, Lyapunov "
                    "spectra and plane-section tracing for special systems of isometries.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int)
        p.add_argument("--precision", type=int)
        p.add_argument("--nmax", type=int)
        p.add_argument("--depth", type=int)
        p.add_argument("--resolution", type=int)
        p.add_argument("--length", type=float)
        p.add_argument("--level", type=float)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    config = resolve_config(args)
    try:
        return COMMANDS[args.command](config)
    except Exception as exc:  # surfaced as machine-readable JSON
        err = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(err, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
