"""Command-line front end: datasets for dispersion, cross-talk, correlations and dynamics.

Every dataset is a UTF-8 CSV whose leading comment lines carry the run's
configuration as canonical JSON, so ``--config <dataset.csv>`` re-runs it.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from crosstalk import __version__
from crosstalk.correlation import correlation, correlation_map
from crosstalk.damping import (BROADENED_GRID, MANIFOLD, Contact, ProbeConfig,
                               analytic_isotropic, analytic_special_2d, crosstalk_finite_time,
                               crosstalk_long_time, resonant_wavenumber)
from crosstalk.disorder import (EnsembleParams, build_chain, choose_reference_site,
                                clean_self_damping, cross_talk_disordered, diagonalize,
                                self_damping)
from crosstalk.dynamics import (GaussianState, antisymmetric_block, build_generators,
                                default_step, log_negativity, symmetric_block, trajectory)
from crosstalk.errors import (CrosstalkError, DomainError, InvalidCoefficientsError,
                              InvariantViolation, OutOfBandError, ResolutionError, StepSizeError)
from crosstalk.lattice import (CUBIC, TRIANGULAR, LatticeSpec, band_range_scan, bz_domain,
                               critical_frequencies, dispersion, resonant_manifold)
from crosstalk.quadrature import default_threads

EXIT_OK, EXIT_CONFIG, EXIT_RESOLUTION, EXIT_INVARIANT = 0, 2, 3, 4
CONFIG_PREFIX = "# config: "


class ConfigError(CrosstalkError, ValueError):
    """Malformed or inconsistent run configuration."""


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


def _opt_float(text):
    if text is None or (isinstance(text, str) and text.lower() in ("", "none", "inf")):
        return None
    return float(text)


def _opt_int(text):
    if text is None or (isinstance(text, str) and text.lower() in ("", "none")):
        return None
    return int(text)


# name -> (parser, default, help); shared lattice fields first
_LATTICE = {
    "dimension": (int, 2, "lattice dimension D"),
    "symmetry": (str, CUBIC, "cubic or triangular"),
    "omega0": (float, 1.0, "on-site frequency"),
    "g": (float, 3 / 16, "nearest-neighbour coupling"),
}
PARAMS = {
    "dispersion": {
        **_LATTICE,
        "resolution": (int, 64, "zone grid nodes per axis for the band surface"),
        "omegas": (_floats, [], "comma-separated frequencies for iso-frequency contours"),
        "contour_resolution": (int, 256, "contour extraction grid"),
    },
    "crosstalk": {
        **_LATTICE,
        "omega": (float, 1.01, "probe frequency"),
        "coupling": (float, 0.05, "system-bath coupling lambda"),
        "temperature": (float, 0.0, "bath temperature"),
        "sigma": (float, 0.0, "Gaussian contact width"),
        "time": (_opt_float, None, "evaluation time; omit for the long-time limit"),
        "method": (str, MANIFOLD, "long-time estimator: manifold or broadened_grid"),
        "resolution": (_opt_int, None, "grid or contour resolution"),
        "mode": (str, "line", "line (first lattice axis) or map (first quadrant)"),
        "r_max": (float, 20.0, "largest separation"),
        "step": (float, 1.0, "spacing of line samples"),
        "analytic": (str, "auto", "overlay: auto, none, cos, j0, sinc, diagonal, eggcrate"),
        "delta": (_opt_float, None, "disorder width; switches to a finite chain"),
        "n_sites": (int, 2500, "chain length"),
        "seed": (int, 1, "disorder seed"),
        "boundary": (str, "fixed", "chain boundary: fixed or periodic"),
        "law": (str, "one_sided", "disorder law: one_sided or symmetric"),
        "n0": (_opt_int, None, "reference site (default: random central site)"),
    },
    "correlation": {
        **_LATTICE,
        "temperature": (float, 0.0, "bath temperature"),
        "mode": (str, "line", "line (first lattice axis) or map"),
        "r_max": (int, 10, "largest offset (line) or map half-width in lattice units"),
        "level": (float, 0.01, "iso-level traced on maps"),
        "resolution": (_opt_int, None, "starting grid nodes per axis"),
        "crosstalk_omega": (_opt_float, None, "also emit long-time cross-talk at this frequency"),
    },
    "dynamics": {
        **_LATTICE,
        "omega": (float, 1.01, "probe frequency"),
        "coupling": (float, 0.05, "system-bath coupling lambda"),
        "temperature": (float, 0.0, "bath temperature"),
        "mode": (str, "scan", "scan (distances at t_final) or trace (one distance over time)"),
        "regime": (str, "crystal", "crystal rates, cb (Gamma13=Gamma11) or sb (Gamma13=0)"),
        "distances": (_floats, [0.0, 10.0, 20.0], "separations along the first lattice axis"),
        "t_final": (float, 2000.0, "final time"),
        "n_times": (int, 50, "trace samples"),
        "squeezing": (float, 1.0, "two-mode squeezing r of the initial state"),
        "alpha": (float, 1.0, "coherent amplitude of probe 1 in the initial state"),
        "method": (str, MANIFOLD, "long-time estimator"),
        "dt": (_opt_float, None, "RK4 step (default 0.01/max(Omega, Gamma11))"),
    },
}

COLUMNS = {
    "dispersion": {
        "kind": "surface (zone grid), contour (resonant element) or band_min/band_max",
        "target": "contour frequency (empty for surface rows)",
        "k_1": "wave-vector component 1", "k_2": "component 2", "k_3": "component 3",
        "omega": "frequency at k",
        "measure": "contour element length/area (contour rows)",
        "speed": "|grad omega| (contour rows)",
    },
    "crosstalk": {
        "omega": "probe frequency", "time": "evaluation time (inf: long-time limit)",
        "delta": "disorder width (empty: crystal)", "seed": "disorder seed",
        "n0": "reference site (chains)",
        "r_1": "separation component 1", "r_2": "component 2", "r_3": "component 3",
        "gamma13": "cross-damping", "gamma11": "self-damping",
        "normalized": "gamma13 / gamma11", "analytic": "closed-form overlay",
    },
    "correlation": {
        "kind": "value or contour (segment midpoint of the iso-level)",
        "temperature": "bath temperature",
        "r_1": "separation component 1", "r_2": "component 2", "r_3": "component 3",
        "raw": "C(R)", "normalized": "C(R)/C(0)",
        "crosstalk_omega": "frequency of the cross-talk column",
        "crosstalk": "long-time normalized cross-talk at R",
    },
    "dynamics": {
        "regime": "crystal, cb or sb", "distance": "probe separation", "time": "time",
        "normalized": "gamma13 / gamma11 used", "log_negativity": "E_N",
        "abs_a1": "|<a1>|", "abs_a2": "|<a2>|",
        "anti_xx": "antisymmetric-mode x variance", "anti_pp": "antisymmetric-mode p variance",
        "sym_xx": "symmetric-mode x variance", "sym_pp": "symmetric-mode p variance",
        "min_symplectic": "smallest symplectic eigenvalue",
    },
}

_SQRT52 = math.sqrt(2.5)
PRESETS = {
    "fig1b": [
        ("clean", "crosstalk", dict(dimension=1, g=0.75, omega=None, time=1e4, r_max=600,
                                    analytic="cos")),
        ("disordered", "crosstalk", dict(dimension=1, g=0.75, omega=None, time=1e4, r_max=600,
                                         delta=0.1, seed=1)),
    ],
    "fig2": [
        ("a_band", "dispersion", dict(omegas=[1.01, _SQRT52, 1.95])),
        ("b_isotropic", "crosstalk", dict(omega=1.01, mode="map", r_max=20)),
        ("c_diagonal", "crosstalk", dict(omega=_SQRT52, mode="map", r_max=20)),
        ("d_eggcrate", "crosstalk", dict(omega=1.95, mode="map", r_max=20)),
    ],
    "fig3-triangular": [
        ("a_band", "dispersion", dict(symmetry=TRIANGULAR, g=0.165,
                                      omegas=[1.01, 1.905, 1.99])),
        ("b_isotropic", "crosstalk", dict(symmetry=TRIANGULAR, g=0.165, omega=1.01,
                                          mode="map", r_max=15)),
        ("c_directional", "crosstalk", dict(symmetry=TRIANGULAR, g=0.165, omega=1.905,
                                            mode="map", r_max=15)),
        ("d_nondecay", "crosstalk", dict(symmetry=TRIANGULAR, g=0.165, omega=1.99,
                                         mode="map", r_max=15)),
    ],
    "fig4": [
        ("a_1d", "correlation", dict(dimension=1, g=0.75, r_max=30, crosstalk_omega=2.0)),
        ("b_isotropic", "correlation", dict(r_max=20, crosstalk_omega=1.01)),
        ("b_high", "correlation", dict(r_max=20, crosstalk_omega=1.95)),
        ("c_map", "correlation", dict(mode="map", r_max=10)),
    ],
    "appxB": [
        (f"{name}_t{t:g}", "crosstalk", dict(omega=om, time=t, mode="map", r_max=15))
        for name, om, times in (("isotropic", 1.01, (50, 100, 200, 1000)),
                                ("diagonal", _SQRT52, (10, 30, 70, 10000)),
                                ("eggcrate", 1.95, (10, 30, 70, 10000)))
        for t in times
    ],
    "appxC": [
        (f"T{T:g}", "correlation", dict(mode="map", r_max=10, temperature=T))
        for T in (0.0, 1.0, 100.0)
    ],
    "appxD": [
        ("triangular", "correlation", dict(symmetry=TRIANGULAR, g=0.165, mode="map", r_max=10)),
    ],
}


# -- configuration -----------------------------------------------------------

def resolve_preset(name):
    """Panels of a preset; ``fig2c`` selects the panels of ``fig2`` labelled ``c``."""
    if name in PRESETS:
        return name, PRESETS[name]
    base, letter = name[:-1], name[-1:]
    panels = [e for e in PRESETS.get(base, []) if e[0].split("_")[0] == letter]
    if not panels:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return base, panels


def defaults(subcommand):
    return {k: (list(v[1]) if isinstance(v[1], list) else v[1])
            for k, v in PARAMS[subcommand].items()}


def normalize_config(subcommand, params):
    """Validate keys, coerce types and fill defaults."""
    if subcommand not in PARAMS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    table = PARAMS[subcommand]
    unknown = set(params) - set(table)
    if unknown:
        raise ConfigError(f"unknown {subcommand} parameters: {sorted(unknown)}")
    out = defaults(subcommand)
    for key, value in params.items():
        parse = table[key][0]
        try:
            out[key] = None if value is None else parse(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r}") from exc
    if subcommand in ("crosstalk", "dynamics") and out.get("omega") is None:
        out["omega"] = float(dispersion(_spec(out), 0.164)) if out["dimension"] == 1 else None
        if out["omega"] is None:
            raise ConfigError("omega is required")
    return out


def canonical(subcommand, params):
    return json.dumps({"subcommand": subcommand, "params": params}, sort_keys=True,
                      separators=(",", ":"))


def load_config(path):
    """Read a JSON config or the embedded config of a dataset."""
    text = Path(path).read_text(encoding="utf-8")
    for line in text.splitlines():
        if line.startswith(CONFIG_PREFIX):
            return json.loads(line[len(CONFIG_PREFIX):])
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is neither JSON nor a dataset with an embedded config") from exc


def _spec(p):
    try:
        return LatticeSpec(p["dimension"], p["symmetry"], p["omega0"], p["g"])
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


# -- datasets ----------------------------------------------------------------

def _pad(v, n=3):
    v = list(np.atleast_1d(v).astype(float))
    return v + [None] * (n - len(v))


def run_dispersion(p, threads):
    spec = _spec(p)
    rows = []
    lo, hi = band_range_scan(spec)
    rows.append(["band_min", None] + [None] * 3 + [lo, None, None])
    rows.append(["band_max", None] + [None] * 3 + [hi, None, None])
    nodes, _ = bz_domain(spec, p["resolution"])
    for k, w in zip(nodes, dispersion(spec, nodes, check=False)):
        rows.append(["surface", None] + _pad(k) + [float(w), None, None])
    for om in p["omegas"]:
        m = resonant_manifold(spec, om, p["contour_resolution"])
        pts, _ = m.expand()
        reps = m.ops.shape[0]
        measure = np.tile(m.measure, reps)
        speed = np.tile(m.speed, reps)
        for k, a, s in zip(pts, measure, speed):
            rows.append(["contour", float(om)] + _pad(k) + [float(om), float(a), float(s)])
    return rows


def _separations(spec, p):
    r_max = p["r_max"]
    if p["mode"] == "line":
        x = np.arange(0.0, r_max + 1e-9, p["step"])
        if spec.symmetry == TRIANGULAR:
            x = np.round(x)
            x = np.unique(x)
        return np.outer(x, spec.direct_basis[0])
    if p["mode"] != "map":
        raise ConfigError(f"unknown mode {p['mode']!r}")
    if spec.dimension == 1:
        raise ConfigError("maps need D >= 2")
    n = int(math.floor(r_max))
    if spec.symmetry == CUBIC:
        ax = np.arange(n + 1, dtype=float)
        pts = np.stack(np.meshgrid(ax, ax, indexing="ij"), -1).reshape(-1, 2)
        return np.hstack([pts, np.zeros((pts.shape[0], spec.dimension - 2))])
    m = np.arange(-2 * n, 2 * n + 1, dtype=float)
    mm = np.stack(np.meshgrid(m, m, indexing="ij"), -1).reshape(-1, 2)
    pts = mm @ spec.direct_basis
    keep = (np.abs(pts[:, 0]) <= r_max + 1e-9) & (np.abs(pts[:, 1]) <= r_max + 1e-9)
    return pts[keep]


def _overlay(spec, p, r):
    kind = p["analytic"]
    if kind == "none" or spec.symmetry == TRIANGULAR:
        return [None] * r.shape[0]
    om, D = p["omega"], spec.dimension
    if kind == "auto":
        crit = critical_frequencies(spec)
        if D == 1:
            kind = "cos"
        elif D == 2 and abs(om - crit[1]) < 1e-9:
            kind = "diagonal"
        elif om > crit[-2]:
            kind = "eggcrate"
        else:
            kind = {2: "j0", 3: "sinc"}[D]
    if kind in ("diagonal", "eggcrate"):
        if kind == "eggcrate":
            return list(np.prod(np.cos(np.pi * r), axis=1))
        if D != 2:
            raise ConfigError("the diagonal overlay is two-dimensional")
        return list(analytic_special_2d("diagonal", r))
    dim = {"cos": 1, "j0": 2, "sinc": 3}.get(kind)
    if dim is None:
        raise ConfigError(f"unknown analytic overlay {kind!r}")
    try:
        k = resonant_wavenumber(spec, om)
    except OutOfBandError:
        return [None] * r.shape[0]
    return list(analytic_isotropic(dim, k, np.linalg.norm(r, axis=1)))


def run_crosstalk(p, threads):
    spec = _spec(p)
    if p["delta"] is not None:
        return _run_chain(p)
    probes = ProbeConfig(p["omega"], p["coupling"], None, p["temperature"],
                         Contact.gaussian(p["sigma"]))
    r = _separations(spec, p)
    if p["time"] is None:
        if p["method"] not in (MANIFOLD, BROADENED_GRID):
            raise ConfigError(f"unknown method {p['method']!r}")
        prof = crosstalk_long_time(spec, probes, r, p["method"], p["resolution"], lamb=False,
                                   threads=threads)
    else:
        prof = crosstalk_finite_time(spec, probes, p["time"], r, p["resolution"], threads)
    overlay = _overlay(spec, p, r)
    rows = []
    for i in range(len(prof)):
        rows.append([p["omega"], prof.time, None, None, None] + _pad(r[i])
                    + [float(prof.gamma13[i]), prof.gamma11, float(prof.normalized[i]), overlay[i]])
    return rows


def _run_chain(p):
    if p["dimension"] != 1:
        raise ConfigError("disordered chains are one-dimensional")
    t = p["time"] if p["time"] is not None else 1e4
    params = EnsembleParams(n_sites=p["n_sites"], omega0=p["omega0"], g=p["g"],
                            delta=p["delta"], omega=p["omega"], time=t, boundary=p["boundary"],
                            law=p["law"], coupling=p["coupling"], seed=p["seed"])
    x = np.arange(0, int(p["r_max"]) + 1)
    chain = build_chain(params.n_sites, params.omega0, params.g, params.delta, params.seed,
                        params.boundary, params.law)
    basis = diagonalize(chain)
    n0 = p["n0"]
    if n0 is None:
        rates = self_damping(basis, p["omega"], t, p["coupling"])
        clean = clean_self_damping(params)
        thr = None if clean is None else params.min_self_fraction * clean
        n0 = choose_reference_site(rates, params.n_sites, x[-1],
                                   np.random.default_rng([params.seed, 1]), thr)
    ct = cross_talk_disordered(basis, p["omega"], n0, x, t, p["coupling"], p["temperature"])
    return [[p["omega"], t, p["delta"], p["seed"], n0] + _pad(float(xi))
            + [float(g), ct.gamma11, float(g / ct.gamma11), None]
            for xi, g in zip(x, ct.gamma13)]


def run_correlation(p, threads):
    spec = _spec(p)
    rows = []
    T = p["temperature"]
    if p["mode"] == "map":
        cmap = correlation_map(spec, p["r_max"], T, p["level"], p["resolution"], threads)
        pts = cmap.points.reshape(-1, 2)
        vals = cmap.values.reshape(-1)
        c0 = correlation(spec, np.zeros((1, 2)), T, p["resolution"], threads).c0
        seps = pts
        raw = vals * c0
        norm = vals
    elif p["mode"] == "line":
        x = np.arange(p["r_max"] + 1, dtype=float)
        seps = np.outer(x, spec.direct_basis[0])
        prof = correlation(spec, seps, T, p["resolution"], threads)
        raw, norm = prof.raw, prof.values
        cmap = None
    else:
        raise ConfigError(f"unknown mode {p['mode']!r}")
    ct = [None] * seps.shape[0]
    om = p["crosstalk_omega"]
    if om is not None:
        probes = ProbeConfig(om, temperature=T)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ct = list(crosstalk_long_time(spec, probes, seps, lamb=False).normalized)
    for i in range(seps.shape[0]):
        rows.append(["value", T] + _pad(seps[i]) + [float(raw[i]), float(norm[i]), om,
                                                     None if ct[i] is None else float(ct[i])])
    if cmap is not None:
        pp, qq = cmap.contour
        for mid in 0.5 * (pp + qq):
            rows.append(["contour", T] + _pad(mid) + [None, cmap.level, None, None])
    return rows


def run_dynamics(p, threads):
    spec = _spec(p)
    probes = ProbeConfig(p["omega"], p["coupling"], None, p["temperature"])
    if p["regime"] not in ("crystal", "cb", "sb"):
        raise ConfigError(f"unknown regime {p['regime']!r}")
    dist = np.asarray(p["distances"], dtype=float)
    if p["mode"] == "trace":
        dist = dist[:1]
    prof = crosstalk_long_time(spec, probes, np.outer(dist, spec.direct_basis[0]), p["method"],
                               threads=threads)
    init = GaussianState.two_mode_squeezed(p["squeezing"])
    init = GaussianState(init.mean + np.array([p["alpha"] * math.sqrt(2), 0, 0, 0]), init.cov)
    rows = []
    for i, d in enumerate(dist):
        m = prof.matrix(i)
        if p["regime"] == "cb":
            m = type(m).from_rates(m.gamma11, m.gamma11, m.gamma22, m.gamma22, m.delta_omega,
                                   m.delta_omega, m.time, m.method)
        elif p["regime"] == "sb":
            m = type(m).from_rates(m.gamma11, 0.0, m.gamma22, 0.0, m.delta_omega, 0.0,
                                   m.time, m.method)
        gen = build_generators(m, p["omega"])
        dt = p["dt"] or default_step(p["omega"], m.gamma11)
        if p["mode"] == "trace":
            times = np.linspace(0.0, p["t_final"], p["n_times"])
        elif p["mode"] == "scan":
            times = np.array([p["t_final"]])
        else:
            raise ConfigError(f"unknown mode {p['mode']!r}")
        for t, s in zip(times, trajectory(init, gen, times, dt)):
            if s.min_symplectic() < 0.5 - 1e-8:
                raise InvariantViolation(f"uncertainty relation violated at t={t}")
            a = np.abs(s.amplitudes)
            anti, sym = antisymmetric_block(s), symmetric_block(s)
            rows.append([p["regime"], float(d), float(t), m.normalized, log_negativity(s),
                         float(a[0]), float(a[1]), float(anti[0, 0]), float(anti[1, 1]),
                         float(sym[0, 0]), float(sym[1, 1]), s.min_symplectic()])
    return rows


RUNNERS = {"dispersion": run_dispersion, "crosstalk": run_crosstalk,
           "correlation": run_correlation, "dynamics": run_dynamics}


# -- output ------------------------------------------------------------------

def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def render(subcommand, params, rows):
    """CSV text with the commented config header."""
    buf = io.StringIO()
    buf.write(f"# crosstalk {__version__} dataset\n")
    buf.write(CONFIG_PREFIX + canonical(subcommand, params) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(COLUMNS[subcommand]))
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def sidecar(subcommand, params, rows):
    return json.dumps({"version": __version__, "subcommand": subcommand, "params": params,
                       "columns": COLUMNS[subcommand], "n_rows": len(rows)},
                      sort_keys=True, indent=2) + "\n"


def execute(subcommand, params, threads=None):
    """Run one dataset and return ``(normalized params, rows)``."""
    p = normalize_config(subcommand, params)
    with warnings.catch_warnings():
        warnings.simplefilter("default")
        rows = RUNNERS[subcommand](p, threads)
    return p, rows


def _emit(subcommand, p, rows, output, with_sidecar):
    text = render(subcommand, p, rows)
    if output is None:
        sys.stdout.write(text)
        return
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    if with_sidecar:
        path.with_suffix(path.suffix + ".json").write_text(sidecar(subcommand, p, rows),
                                                           encoding="utf-8")


def build_parser():
    parser = argparse.ArgumentParser(prog="crosstalk",
                                     description="Collective dissipation of two probes in a crystal bath.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, table in PARAMS.items():
        sp = sub.add_parser(name, help=f"{name} dataset")
        for key, (_, default, text) in table.items():
            sp.add_argument("--" + key.replace("_", "-"), dest=key, default=None,
                            help=f"{text} (default: {default})")
        _common(sp)
    sp = sub.add_parser("preset", help="figure-reproduction presets")
    sp.add_argument("name", help="one of " + ", ".join(sorted(PRESETS))
                    + "; a trailing panel letter (e.g. fig2c) selects one panel")
    _common(sp)
    return parser


def _common(sp):
    sp.add_argument("--config", help="JSON config or dataset whose embedded config is reused")
    sp.add_argument("--output", help="CSV path (preset: directory); default stdout")
    sp.add_argument("--sidecar", action="store_true", help="also write a JSON metadata file")
    sp.add_argument("--threads", type=int, default=None,
                    help="worker threads (default: CROSSTALK_THREADS or CPU count)")
    sp.add_argument("--schema", action="store_true", help="print the dataset columns and exit")


def _run(args):
    threads = args.threads or default_threads()
    if args.subcommand == "preset":
        base, panels = resolve_preset(args.name)
        if args.schema:
            used = sorted({sc for _, sc, _ in panels})
            print(json.dumps({sc: COLUMNS[sc] for sc in used}, indent=2))
            return EXIT_OK
        for panel, sc, params in panels:
            p, rows = execute(sc, params, threads)
            out = None if args.output is None else Path(args.output) / f"{base}_{panel}.csv"
            _emit(sc, p, rows, out, args.sidecar)
        return EXIT_OK
    if args.schema:
        print(json.dumps(COLUMNS[args.subcommand], indent=2))
        return EXIT_OK
    params = {}
    if args.config:
        cfg = load_config(args.config)
        if "params" in cfg:
            if cfg.get("subcommand", args.subcommand) != args.subcommand:
                raise ConfigError(f"config is for {cfg['subcommand']!r}, not {args.subcommand!r}")
            cfg = cfg["params"]
        params.update(cfg)
    for key in PARAMS[args.subcommand]:
        value = getattr(args, key)
        if value is not None:
            params[key] = value
    p, rows = execute(args.subcommand, params, threads)
    _emit(args.subcommand, p, rows, args.output, args.sidecar)
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except ResolutionError as exc:
        msg = f"resolution error: {exc}"
        if exc.suggested:
            msg += f" (try resolution {exc.suggested})"
        print(msg, file=sys.stderr)
        return EXIT_RESOLUTION
    except (InvariantViolation, InvalidCoefficientsError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ConfigError, DomainError, OutOfBandError, StepSizeError, OSError,
            json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CrosstalkError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_RESOLUTION


if __name__ == "__main__":
    sys.exit(main())
