"""Command-line entry point: ``python -m elastolab <subcommand> [options]``.

Configuration is a JSON object (see ``DEFAULT_CONFIG``); ``--set a.b=value``
overrides single entries with a JSON value.  Every output file starts with a
``# config: {...}`` line holding the resolved configuration, and such a file
is itself accepted by ``--config``.

Exit status: 0 success, 2 invalid configuration, 3 numerical failure.
"""

import argparse
import copy
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, ElastoError, SweepAborted
from .geometry import RegularityParams, check_contained, distances, make_curve
from .media import ElasticMedium, IncidentPlaneWave, closeness_constant

SUBCOMMANDS = ("solve", "farfield", "sweep", "verify", "distances")
SEED_ENV = "ELASTO_SEED"

DEFAULT_CONFIG = {
    "medium": {"lambda": 2.0, "mu": 1.0, "rho": 1.0, "omega": 2.0},
    "incident": {"kind": "longitudinal", "angle": 0.0, "phase": 0.0, "amplitude": 1.0},
    "geometry": {
        "family": "radial_perturbation", "radius": 1.0, "delta": 0.0, "m": 3, "phase": 0.0,
        "R": 2.0, "r": 0.1, "L": 10.0, "alpha": 0.5, "H0": 0.09,
    },
    "geometry2": {"family": "radial_perturbation", "radius": 1.0, "delta": 0.01, "m": 3, "phase": 0.0},
    "discretization": {
        "n": 128, "M": 360, "probes": 400, "annulus_probes": 4000,
        "distance_samples": 1024, "fd_step": None,
    },
    "sweep": {
        "amplitudes": [0.0, 0.0025, 0.005, 0.0075, 0.01, 0.0125, 0.015, 0.0175],
        "x0": [3.5, 0.0], "s_tilde": 0.5, "area_method": "quadrature",
    },
    "verify": {"random_draws": 50, "korn_draws": 100},
    "seed": 0,
    "output": "elasto_out",
}

_CURVE_KEYS = {
    "disc": {"radius", "center"},
    "ellipse": {"a", "b", "rotation", "center"},
    "kite": {"scale", "center"},
    "radial_perturbation": {"radius", "delta", "m", "phase", "center"},
}
_APRIORI = ("R", "r", "L", "alpha", "H0")


def _merge(base, over, path=""):
    out = copy.deepcopy(base)
    for k, v in over.items():
        key = f"{path}{k}"
        if k not in base:
            raise ConfigError(f"unknown configuration key {key!r}", key)
        if isinstance(base[k], dict) and k not in ("geometry", "geometry2"):
            if not isinstance(v, dict):
                raise ConfigError(f"{key} must be an object", key)
            out[k] = _merge(base[k], v, key + ".")
        elif k in ("geometry", "geometry2"):
            if not isinstance(v, dict):
                raise ConfigError(f"{key} must be an object", key)
            if "family" in v and v["family"] != base[k].get("family"):
                keep = {a: base[k][a] for a in _APRIORI if a in base[k]}
                out[k] = {**keep, **v}
            else:
                out[k] = {**base[k], **v}
        else:
            out[k] = v
    return out


def _number(cfg, path, positive=False, integer=False, allow_none=False):
    node = cfg
    for p in path.split("."):
        node = node[p]
    if node is None and allow_none:
        return None
    if isinstance(node, bool) or not isinstance(node, (int, float)) or not math.isfinite(node):
        raise ConfigError(f"{path} must be a finite number", path)
    if integer and int(node) != node:
        raise ConfigError(f"{path} must be an integer", path)
    if positive and node <= 0:
        raise ConfigError(f"{path} must be > 0", path)
    return int(node) if integer else float(node)


def load_config(path=None, overrides=(), env=None):
    """Resolve defaults < config file < ELASTO_SEED < ``--set``/flag overrides."""
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}", "config") from exc
        for line in text.splitlines():
            if line.startswith("# config: "):
                text = line[len("# config: "):]
                break
        try:
            user = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}", "config") from exc
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object", "config")
        cfg = _merge(cfg, user)
    env = os.environ if env is None else env
    if env.get(SEED_ENV):
        try:
            cfg["seed"] = int(env[SEED_ENV])
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV} must be an integer", SEED_ENV) from exc
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like key.path=value", item)
        key, raw = item.split("=", 1)
        try:
            val = json.loads(raw)
        except json.JSONDecodeError:
            val = raw
        nested = val
        for part in reversed(key.split(".")):
            nested = {part: nested}
        cfg = _merge(cfg, nested)
    validate(cfg)
    return cfg


def _curve(g, name):
    fam = g.get("family")
    if fam not in _CURVE_KEYS:
        raise ConfigError(f"{name}.family must be one of {sorted(_CURVE_KEYS)}", f"{name}.family")
    extra = set(g) - _CURVE_KEYS[fam] - {"family"} - (set(_APRIORI) if name == "geometry" else set())
    if extra:
        key = sorted(extra)[0]
        raise ConfigError(f"unknown key {name}.{key} for family {fam}", f"{name}.{key}")
    params = {k: v for k, v in g.items() if k in _CURVE_KEYS[fam]}
    try:
        return make_curve(fam, **params)
    except (ElastoError, TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}", name) from exc


def validate(cfg):
    """Build every object once so that all module preconditions are checked up front."""
    for k in ("lambda", "mu", "rho", "omega"):
        _number(cfg, f"medium.{k}")
    try:
        med = medium_of(cfg)
    except ElastoError as exc:
        raise ConfigError(f"medium: {exc}", "medium") from exc
    for k in ("angle", "phase", "amplitude"):
        _number(cfg, f"incident.{k}")
    try:
        incident_of(cfg)
    except ElastoError as exc:
        raise ConfigError(f"incident: {exc}", "incident") from exc
    for k in _APRIORI:
        if k not in cfg["geometry"]:
            raise ConfigError(f"geometry.{k} is required", f"geometry.{k}")
        _number(cfg, f"geometry.{k}")
    try:
        params = apriori_of(cfg)
    except ElastoError as exc:
        raise ConfigError(f"geometry: {exc}", "geometry") from exc
    if params.H0 >= closeness_constant(med):
        raise ConfigError(
            f"geometry.H0 = {params.H0} must be < H1 = {closeness_constant(med):.17g}", "geometry.H0")
    for name in ("geometry", "geometry2"):
        c = _curve(cfg[name], name)
        try:
            check_contained(c, params.R)
        except ElastoError as exc:
            raise ConfigError(f"{name}: {exc}", name) from exc
    d = "discretization"
    n = _number(cfg, f"{d}.n", positive=True, integer=True)
    if n < 32 or n % 2:
        raise ConfigError(f"{d}.n must be even and >= 32", f"{d}.n")
    if _number(cfg, f"{d}.M", positive=True, integer=True) < 64:
        raise ConfigError(f"{d}.M must be >= 64", f"{d}.M")
    _number(cfg, f"{d}.probes", positive=True, integer=True)
    _number(cfg, f"{d}.annulus_probes", positive=True, integer=True)
    if _number(cfg, f"{d}.distance_samples", positive=True, integer=True) < 256:
        raise ConfigError(f"{d}.distance_samples must be >= 256", f"{d}.distance_samples")
    _number(cfg, f"{d}.fd_step", positive=True, allow_none=True)
    amps = cfg["sweep"]["amplitudes"]
    if not isinstance(amps, list) or not amps or not all(
            isinstance(a, (int, float)) and not isinstance(a, bool) for a in amps):
        raise ConfigError("sweep.amplitudes must be a nonempty list of numbers", "sweep.amplitudes")
    if amps[0] < 0 or any(b <= a for a, b in zip(amps, amps[1:])):
        raise ConfigError("sweep.amplitudes must be nonnegative and strictly ascending", "sweep.amplitudes")
    x0 = cfg["sweep"]["x0"]
    if not (isinstance(x0, list) and len(x0) == 2):
        raise ConfigError("sweep.x0 must be a list of two numbers", "sweep.x0")
    s = _number(cfg, "sweep.s_tilde", positive=True)
    if math.hypot(*x0) < params.R + 1 + s - 1e-12:
        raise ConfigError("sweep.x0 must satisfy |x0| >= R + 1 + s_tilde", "sweep.x0")
    if cfg["sweep"]["area_method"] not in ("quadrature", "monte_carlo"):
        raise ConfigError("sweep.area_method must be quadrature or monte_carlo", "sweep.area_method")
    _number(cfg, "verify.random_draws", integer=True)
    _number(cfg, "verify.korn_draws", integer=True)
    seed = _number(cfg, "seed", integer=True)
    if not 0 <= seed < 2 ** 64:
        raise ConfigError("seed must be a 64-bit unsigned integer", "seed")
    if not isinstance(cfg["output"], str) or not cfg["output"]:
        raise ConfigError("output must be a nonempty path", "output")


def medium_of(cfg):
    m = cfg["medium"]
    return ElasticMedium(float(m["lambda"]), float(m["mu"]), float(m["rho"]), float(m["omega"]))


def incident_of(cfg):
    i = cfg["incident"]
    return IncidentPlaneWave(i["kind"], float(i["angle"]), float(i["phase"]), float(i["amplitude"]))


def apriori_of(cfg):
    g = cfg["geometry"]
    return RegularityParams(r=float(g["r"]), L=float(g["L"]), R=float(g["R"]),
                            alpha=float(g["alpha"]), H0=float(g["H0"]))


def curve_of(cfg, name="geometry"):
    return _curve(cfg[name], name)


def validate_sweep(cfg):
    """Checks that only concern the sweep (the base curve is a radial family)."""
    if cfg["geometry"]["family"] != "radial_perturbation":
        raise ConfigError("the sweep base family must be radial_perturbation", "geometry.family")
    m = cfg["geometry"]["m"]
    if max(cfg["sweep"]["amplitudes"]) >= 1.0 / (1 + m * m):
        raise ConfigError(f"sweep.amplitudes must stay below 1/(1+m^2) for m = {m}", "sweep.amplitudes")


def sweep_config_of(cfg):
    from .experiments import SweepConfig

    validate_sweep(cfg)
    g, d, s = cfg["geometry"], cfg["discretization"], cfg["sweep"]
    return SweepConfig(
        medium=medium_of(cfg), incident=incident_of(cfg), radius=float(g.get("radius", 1.0)),
        m=int(g.get("m", 3)), phase=float(g.get("phase", 0.0)),
        amplitudes=tuple(float(a) for a in s["amplitudes"]), params=apriori_of(cfg),
        n=int(d["n"]), M=int(d["M"]), x0=tuple(float(v) for v in s["x0"]),
        s_tilde=float(s["s_tilde"]), probes=int(d["probes"]),
        annulus_probes=int(d["annulus_probes"]), distance_samples=int(d["distance_samples"]),
        area_method=s["area_method"], seed=int(cfg["seed"]),
    )


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def config_header(cfg):
    return "config: " + json.dumps(cfg, sort_keys=True, separators=(",", ":"))


def _write_table(path, header, cols, rows):
    with open(path, "w", newline="") as fh:
        fh.write(f"# {header}\n")
        wr = csv.writer(fh)
        wr.writerow(cols)
        for r in rows:
            wr.writerow([_fmt(v) for v in r])


def run_solve(cfg, out):
    from .solver import solve_dirichlet

    sol = solve_dirichlet(medium_of(cfg), curve_of(cfg), incident_of(cfg),
                          int(cfg["discretization"]["n"]))
    rows = [
        ("n", sol.n), ("eta", sol.eta), ("condition", sol.condition),
        ("boundary_residual", sol.residual), ("residual_probes", 4 * sol.n),
        ("density_max_abs", float(np.abs(sol.density).max())),
    ]
    path = out / "solve.csv"
    _write_table(path, config_header(cfg), ("quantity", "value"), rows)
    return path, rows


def run_farfield(cfg, out):
    from .farfield import far_field, write_farfield_csv
    from .solver import solve_dirichlet

    sol = solve_dirichlet(medium_of(cfg), curve_of(cfg), incident_of(cfg),
                          int(cfg["discretization"]["n"]))
    U = far_field(sol, int(cfg["discretization"]["M"]))
    path = out / "farfield.csv"
    write_farfield_csv(U, path, header=(config_header(cfg),))
    return path, [("M", U.M), ("boundary_residual", sol.residual)]


def run_sweep(cfg, out):
    from .experiments import far_to_near_comparison, stability_sweep, write_sweep_csv

    path = out / "sweep.csv"
    try:
        res = stability_sweep(sweep_config_of(cfg))
    except SweepAborted as exc:
        write_sweep_csv(exc.partial, path, header=(config_header(cfg), "status: aborted"))
        raise
    write_sweep_csv(res, path, header=(config_header(cfg),))
    _, ordered = far_to_near_comparison(res.records)
    rows = [
        ("records", len(res.records)), ("fit_count", res.fit_count), ("status", res.status),
        ("C_fit", res.C_fit), ("beta_fit", res.beta_fit),
        ("fit_residual", math.nan if res.fit is None else res.fit.residual),
        ("eps_le_eps1", ordered),
    ]
    _write_table(out / "sweep_fit.csv", config_header(cfg), ("quantity", "value"), rows)
    return path, rows


def run_verify(cfg, out):
    from .analysis import run_verify_suite

    v = cfg["verify"]
    k = medium_of(cfg).k_p
    rows = run_verify_suite(k=k, random_draws=int(v["random_draws"]),
                            korn_draws=int(v["korn_draws"]), seed=int(cfg["seed"]))
    path = out / "verify.csv"
    _write_table(path, config_header(cfg), ("check_name", "lhs", "rhs", "holds"),
                 [(r.check_name, r.lhs, r.rhs, r.holds) for r in rows])
    failed = sum(not r.holds for r in rows)
    return path, [("checks", len(rows)), ("failed", failed), ("all_hold", failed == 0)]


def run_distances(cfg, out):
    from .geometry import area_symmetric_difference

    K, K2 = curve_of(cfg), curve_of(cfg, "geometry2")
    t = distances(K, K2, int(cfg["discretization"]["distance_samples"]))
    area = area_symmetric_difference(K, K2, cfg["sweep"]["area_method"], seed=int(cfg["seed"]))
    rows = [("d", t.d), ("d_hat", t.d_hat), ("d_tilde", t.d_tilde), ("sym_diff_area", area)]
    path = out / "distances.csv"
    _write_table(path, config_header(cfg), ("quantity", "value"), rows)
    return path, rows


RUNNERS = {
    "solve": run_solve, "farfield": run_farfield, "sweep": run_sweep,
    "verify": run_verify, "distances": run_distances,
}


def _error_line(kind, exc, field=None):
    payload = {"error": kind, "type": type(exc).__name__, "message": str(exc)}
    if field is not None:
        payload["field"] = field
    return "error: " + json.dumps(payload, sort_keys=True)


def build_parser():
    p = argparse.ArgumentParser(prog="elastolab", description=__doc__.splitlines()[0])
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", help="JSON config file (or any output file with a config header)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one entry, e.g. --set discretization.n=256")
    p.add_argument("--output", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, help="cap on BLAS/OpenMP worker threads")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = list(args.set)
    if args.output is not None:
        overrides.append("output=" + json.dumps(args.output))
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(_error_line("config", exc, exc.field), file=sys.stderr)
        return 2
    out = Path(cfg["output"])
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(_error_line("config", exc, "output"), file=sys.stderr)
        return 2
    try:
        if args.threads is not None:
            from threadpoolctl import threadpool_limits

            with threadpool_limits(limits=max(1, args.threads)):
                path, rows = RUNNERS[args.subcommand](cfg, out)
        else:
            path, rows = RUNNERS[args.subcommand](cfg, out)
    except ConfigError as exc:
        print(_error_line("config", exc, exc.field), file=sys.stderr)
        return 2
    except ElastoError as exc:
        print(_error_line("numerical", exc), file=sys.stderr)
        return 3
    for k, v in rows:
        print(f"{k}: {_fmt(v)}")
    print(f"output: {path}")
    return 0
