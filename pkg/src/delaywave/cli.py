"""Batch command-line front end.

Every command reads an optional JSON config (``--config``), lets individual
flags override it, validates all keys before computing anything, and writes
its results into ``--out``. Exit codes: 0 success, 2 invalid input,
3 solver failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from typing import Any, Callable

import numpy as np

from . import __version__
from .birth import (
    BirthFunction,
    ModelParams,
    check_corollary_conditions,
    check_gsc,
    check_oscillation_criterion,
    find_positive_fixed_point,
    rescale_nicholson,
)
from .charroots import (
    check_K_hyperbolicity,
    count_roots_in_strip,
    epsilon_max,
    limit_consistency,
    multiplicity_threshold,
    solve_lambda,
    solve_perturbed,
)
from .dde import fit_tail_exponent, heteroclinic, hump_report, validate_envelopes
from .errors import DelayWaveError, HypothesisNotMet, NoConvergence, ValidationError, WindowTooShort
from .io import ensure_dir, load_config, write_columns, write_csv, write_json
from .pdesim import compare_with_profile, run_front_experiment
from .regions import CSV_HEADER, classify_region, sweep
from .waveprofile import (
    default_grid,
    epsilon_continuation,
    profile_from_trajectory,
    solve_profile,
    verify_theorem1_structure,
)

log = logging.getLogger("delaywave")

_BIRTH_DEFAULT = {"kind": "nicholson", "p": math.exp(2.0)}

# command -> {key: (type, default, help)}; "birth" is handled separately
_KEYS: dict[str, dict[str, tuple[Callable, Any, str]]] = {
    "analyze": {
        "h": (float, 0.5, "delay"),
        "u_max": (float, 10.0, "upper end of the sampled range for g"),
        "epsilon": (float, 0.0, "wave-speed parameter for the hyperbolicity scan"),
    },
    "roots": {
        "h": (float, 1.0, "delay"),
        "epsilon": (float, 0.1, "wave-speed parameter 1/c"),
        "samples": (int, 500, "random (p, h, eps) triples for the ordering check"),
        "limit_epsilons": (list, [0.2, 0.1, 0.05, 0.025], "epsilons for the limit table"),
    },
    "hetero": {
        "h": (float, 0.5, "delay"),
        "seed_amplitude": (float, None, "initial amplitude (default 1e-6 K)"),
        "dt": (float, None, "step (default h/100)"),
        "t_span": (float, 600.0, "maximal integration time"),
        "p1_factor": (float, 0.95, "lower slope factor for the envelope check"),
        "p2_factor": (float, 1.05, "upper slope factor for the envelope check"),
        "override": (bool, False, "skip the global-attractivity precondition"),
    },
    "wave": {
        "h": (float, 0.5, "delay"),
        "d": (float, 1.0, "diffusion"),
        "epsilon": (float, 0.05, "wave-speed parameter 1/c"),
        "c": (float, None, "wave speed (overrides epsilon when given)"),
        "m": (int, 20, "grid points per delay interval"),
        "omega": (float, None, "step damping"),
        "tol": (float, 1e-10, "stopping tolerance on the update"),
        "max_iter": (int, None, "iteration limit"),
        "method": (str, "newton", "newton or picard"),
    },
    "pde": {
        "h": (float, 0.5, "delay"),
        "d": (float, 1.0, "diffusion"),
        "domain": (list, [0.0, 400.0], "spatial interval"),
        "nx": (int, 2001, "grid points"),
        "t_end": (float, 150.0, "final time"),
        "x0": (float, 20.0, "initial front position"),
        "boundary": (str, "dirichlet", "dirichlet or neumann"),
        "snapshot_times": (list, [], "times at which to write the field"),
        "compare": (bool, True, "compare with the integral-equation profile"),
    },
    "sweep": {
        "family": (str, "nicholson", "nicholson or mackey_glass"),
        "n": (float, 1.0, "Mackey-Glass exponent"),
        "p_axis": (list, [1.1, 12.0, 50], "[min, max, count]"),
        "h_axis": (list, [0.0, 3.0, 50], "[min, max, count]"),
    },
    "continuation": {
        "h": (float, 0.5, "delay"),
        "epsilons": (list, [0.01, 0.02, 0.05, 0.1], "increasing epsilons"),
        "m": (int, 20, "grid points per delay interval"),
    },
    "rescale": {
        "p": (float, None, "raw birth rate"),
        "delta": (float, None, "raw death rate"),
        "b": (float, None, "raw crowding coefficient"),
        "h": (float, None, "raw delay"),
        "d": (float, 1.0, "raw diffusion"),
    },
}
_USES_BIRTH = {"analyze", "roots", "hetero", "wave", "pde", "continuation"}


def _coerce(name: str, kind: Callable, value):
    if value is None:
        return None
    try:
        if kind is bool:
            if isinstance(value, str):
                if value.lower() in ("1", "true", "yes"):
                    return True
                if value.lower() in ("0", "false", "no"):
                    return False
                raise ValueError(value)
            return bool(value)
        if kind is list:
            if isinstance(value, str):
                return [float(v) for v in value.strip().strip("[]").split(",") if v.strip()]
            return list(value)
        if kind is int and isinstance(value, float) and not value.is_integer():
            raise ValueError(value)
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"invalid value for {name}: {value!r}") from exc


def resolve_config(command: str, cfg: dict, overrides: dict) -> dict:
    """Merge defaults, config file and flags; reject unknown keys."""
    table = _KEYS[command]
    allowed = set(table) | ({"birth"} if command in _USES_BIRTH else set())
    unknown = sorted(set(cfg) - allowed)
    if unknown:
        raise ValidationError(f"unknown config keys for {command!r}: {unknown}")
    out = {k: _coerce(k, t, cfg.get(k, d)) for k, (t, d, _) in table.items()}
    for k, v in overrides.items():
        if v is not None and k in table:
            out[k] = _coerce(k, table[k][0], v)
    if command in _USES_BIRTH:
        spec = dict(_BIRTH_DEFAULT)
        if "birth" in cfg:
            if not isinstance(cfg["birth"], dict):
                raise ValidationError("birth must be an object")
            spec = dict(cfg["birth"])
        for k in ("kind", "p", "n"):
            v = overrides.get(f"birth_{k}")
            if v is not None:
                spec[k] = v
        if spec.get("kind") == "nicholson":
            spec.pop("n", None)
        out["birth"] = BirthFunction.from_dict(spec)
    return out


# commands -----------------------------------------------------------------
def cmd_analyze(c: dict, ctx: dict) -> dict:
    g = c["birth"]
    eq = find_positive_fixed_point(g)
    h = c["h"]
    ModelParams(h)
    rep = check_corollary_conditions(g, eq, h, max(c["u_max"], 1.5 * eq.K))
    out = {
        "birth": g.to_dict(),
        "equilibria": eq.to_dict(),
        "hypothesis_H": eq.hypothesis_h,
        "h": h,
        "gsc": check_gsc(eq, h).to_dict(),
        "oscillation": {"lhs": eq.Gamma * h * math.exp(h + 1.0), "holds": check_oscillation_criterion(eq, h)},
        "corollary": rep.to_dict(),
        "g_max": g.max_value(),
        "region": classify_region(g.p, h, g.kind, g.n) if g.kind != "custom" else None,
        "monotone_speed_bound": 2.0 * math.sqrt(eq.p - 1.0),
    }
    if eq.p > 1:
        out["multiplicity_threshold"] = multiplicity_threshold(eq.p, h)
    try:
        out["hyperbolicity"] = check_K_hyperbolicity(eq.Gamma, h, c["epsilon"]).to_dict()
    except HypothesisNotMet as exc:
        out["hyperbolicity"] = {"skipped": str(exc)}
    if out["region"] is not None:
        out["region"] = out["region"].value
    return {"analyze.json": out}


def cmd_roots(c: dict, ctx: dict) -> dict:
    p, h, eps = c["birth"].p, c["h"], c["epsilon"]
    lam = solve_lambda(p, h)
    pr = solve_perturbed(p, h, eps, lam)
    ib = 3.0 * p * math.exp(-0.5 * lam.value * h)
    strips = {
        "left_strip": count_roots_in_strip(p, h, eps, (0.5 * lam.value, 2 * (p - 1), ib)).to_dict(),
        # |eps^2 z^2 - z - 1| > p + 1 >= |p e^(-zh) - ...| once |Im z| exceeds this bound
        "right_half_plane": count_roots_in_strip(
            p, h, eps, (2 * (p - 1), eps ** -2 + 2, (math.sqrt(p + 2) + 1) / eps)).to_dict(),
    }
    rng = np.random.default_rng(ctx["seed"])
    n = c["samples"]
    ok = 0
    worst = 0.0
    first_bad = None
    for k in range(n):
        pp = 1.0 + 9.0 * (1.0 - rng.random())
        hh = 3.0 * rng.random()
        ee = epsilon_max(pp) * (1.0 - rng.random())
        if ee >= epsilon_max(pp):
            ee = math.nextafter(epsilon_max(pp), 0.0)
        r = solve_perturbed(pp, hh, ee)
        worst = max(worst, abs(r.residuals[0]), abs(r.residuals[1]))
        if r.bounds_ok:
            ok += 1
        elif first_bad is None:
            first_bad = [pp, hh, ee]
    out = {
        "p": p, "h": h, "epsilon": eps,
        "lambda": lam.value,
        "lambda1": pr.lambda1,
        "lambda_inf": pr.lambda_inf,
        "residuals": [lam.residual, *pr.residuals],
        "lemma12_bounds_ok": pr.bounds_ok,
        "strip_counts": strips,
        "multiplicity_threshold": multiplicity_threshold(p, h),
        "limit_table": limit_consistency(p, h, [e for e in c["limit_epsilons"] if e < epsilon_max(p)]).to_dict(),
        "random_check": {"samples": n, "ordered": ok, "max_residual": worst, "first_failure": first_bad,
                         "seed": ctx["seed"]},
    }
    return {"roots.json": out}


def cmd_hetero(c: dict, ctx: dict) -> dict:
    g = c["birth"]
    eq = find_positive_fixed_point(g)
    params = ModelParams(c["h"])
    tr = heteroclinic(g, params, c["seed_amplitude"], c["t_span"], c["dt"], override=c["override"], eq=eq)
    diag: dict = {"K": eq.K, "lambda": tr.lam, "dt": tr.dt, "t0": tr.t0, "t_end": tr.t_end,
                  "n_clamped": tr.n_clamped, "x_end": float(tr.values[-1])}
    try:
        diag["tail_fit"] = fit_tail_exponent(tr).to_dict()
    except WindowTooShort as exc:
        diag["tail_fit"] = {"error": str(exc)}
    diag["envelopes"] = validate_envelopes(tr, g, params, c["p1_factor"] * g.p, c["p2_factor"] * g.p).to_dict()
    diag.update(hump_report(tr.values, g, eq.K))
    csv = ("hetero.csv", ("t", "x", "xprime"), (tr.t, tr.values, tr.derivative_samples))
    return {"hetero.json": diag, "_csv": [csv]}


def cmd_wave(c: dict, ctx: dict) -> dict:
    g = c["birth"]
    eq = find_positive_fixed_point(g)
    eps = c["epsilon"] if c["c"] is None else math.sqrt(c["d"]) / c["c"]
    params = ModelParams(c["h"], c["d"], eps)
    base = heteroclinic(g, ModelParams(c["h"], c["d"]), eq=eq, override=True)
    t_min, t_max, s = default_grid(g, params, eq, c["m"], base)
    init = profile_from_trajectory(base, t_min, t_max, s, eq.K)
    try:
        prof, diag = solve_profile(g, params, init, c["omega"], c["max_iter"], c["tol"], eq.K, base,
                                   c["method"])
    except NoConvergence as exc:
        prof, diag = exc.profile
        _write_wave(ctx, prof, diag, eq, g, params, eps)
        raise
    return _write_wave(ctx, prof, diag, eq, g, params, eps)


def _write_wave(ctx, prof, diag, eq, g, params, eps) -> dict:
    rep = verify_theorem1_structure(prof, diag, g, params, eq)
    out = {"epsilon": eps, "speed": 1.0 / eps, "K": eq.K, "grid": {"t_min": prof.t_min, "t_max": prof.t_max,
           "n": prof.n, "spacing": prof.spacing}, "diagnostics": diag.to_dict(), "structure": rep.to_dict(),
           "monotone_speed_bound": 2.0 * math.sqrt(eq.p - 1.0)}
    csv = ("wave.csv", ("t", "x", "x_minus_K"), (prof.t, prof.values, prof.values - eq.K))
    res = {"wave.json": out, "_csv": [csv]}
    if ctx.get("partial"):
        _emit(ctx, res)
    return res


def cmd_pde(c: dict, ctx: dict) -> dict:
    g = c["birth"]
    eq = find_positive_fixed_point(g)
    params = ModelParams(c["h"], c["d"])
    dom = c["domain"]
    if len(dom) != 2:
        raise ValidationError("domain must be [x_min, x_max]")
    if c["nx"] < 3:
        raise ValidationError("nx must be at least 3")
    dx = (dom[1] - dom[0]) / (c["nx"] - 1)
    ex = run_front_experiment(g, params, tuple(dom), dx, c["t_end"], x0=c["x0"], boundary=c["boundary"],
                              snapshot_times=c["snapshot_times"], eq=eq)
    out = {"experiment": ex.to_dict(), "dx": dx, "dt": ex.state.dt}
    if c["compare"] and ex.profile is not None:
        out["comparison"] = compare_with_profile(ex.profile, ex.track.speed_estimate, g, c["h"], c["d"],
                                                 eq=eq).to_dict()
    csvs = [("front.csv", ("t", "position"), (ex.track.times, ex.track.positions))]
    x = ex.state.x
    for t, u in sorted(ex.snapshots.items()):
        csvs.append((f"snapshot_t{t!r}.csv", ("x", "u"), (x, u)))
    return {"pde.json": out, "_csv": csvs}


def _axis(v: list, name: str) -> np.ndarray:
    if len(v) == 3 and float(v[2]).is_integer() and v[2] >= 1:
        n = int(v[2])
        if n == 1:
            return np.array([float(v[0])])
        return np.linspace(float(v[0]), float(v[1]), n)
    raise ValidationError(f"{name} must be [min, max, count] with count >= 1")


def cmd_sweep(c: dict, ctx: dict) -> dict:
    ps, hs = _axis(c["p_axis"], "p_axis"), _axis(c["h_axis"], "h_axis")
    rm = sweep(ps, hs, c["family"], c["n"], ctx["threads"])
    summary = {"family": c["family"], "n": c["n"], "p_axis": ps, "h_axis": hs, "counts": rm.counts(),
               "rows": len(rm.cells)}
    return {"regions.json": summary, "_rows": [("regions.csv", CSV_HEADER, rm.rows())]}


def cmd_continuation(c: dict, ctx: dict) -> dict:
    g = c["birth"]
    rep = epsilon_continuation(g, ModelParams(c["h"]), c["epsilons"], m=c["m"])
    out = rep.to_dict()
    csv = ("continuation.csv", ("epsilon", "distance_to_base"), (rep.epsilons, rep.distances_to_base))
    return {"continuation.json": out, "_csv": [csv]}


def cmd_rescale(c: dict, ctx: dict) -> dict:
    missing = [k for k in ("p", "delta", "b", "h") if c[k] is None]
    if missing:
        raise ValidationError(f"rescale needs {missing}")
    return {"rescale.json": rescale_nicholson(c["p"], c["delta"], c["b"], c["h"], c["d"])}


COMMANDS = {
    "analyze": (cmd_analyze, "scalar criteria for a birth function"),
    "roots": (cmd_roots, "characteristic roots at the zero equilibrium"),
    "hetero": (cmd_hetero, "heteroclinic solution of the delay equation"),
    "wave": (cmd_wave, "travelling-wave profile at finite speed"),
    "pde": (cmd_pde, "front simulation of the reaction-diffusion equation"),
    "sweep": (cmd_sweep, "classify a (p, h) rectangle"),
    "continuation": (cmd_continuation, "profiles along increasing epsilon"),
    "rescale": (cmd_rescale, "rescale raw blowflies parameters"),
}


def _emit(ctx: dict, res: dict) -> list:
    out = ctx["out"]
    written = []
    for name, body in res.items():
        if name == "_csv":
            for fname, header, cols in body:
                written.append(write_columns(os.path.join(out, fname), header, *cols))
        elif name == "_rows":
            for fname, header, rows in body:
                written.append(write_csv(os.path.join(out, fname), header, rows))
        else:
            written.append(write_json(os.path.join(out, name), body))
    return written


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="delaywave", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--config", help="JSON config file")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized checks (u64)")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, helptext) in COMMANDS.items():
        sp = sub.add_parser(name, help=helptext)
        if name in _USES_BIRTH:
            sp.add_argument("--kind", dest="birth_kind", choices=["nicholson", "mackey_glass"])
            sp.add_argument("--p", dest="birth_p", type=float)
            sp.add_argument("--n", dest="birth_n", type=float)
        for key, (kind, default, helptext) in _KEYS[name].items():
            flag = "--" + key.replace("_", "-")
            if name == "rescale" and key in ("p",):
                flag = "--p"
            if name == "sweep" and key == "n":
                flag = "--n"
            t = str if kind in (list, bool) else kind
            sp.add_argument(flag, dest=key, type=t, default=None, help=f"{helptext} (default {default!r})")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.threads < 1:
            raise ValidationError("--threads must be >= 1")
        if not 0 <= args.seed < 2 ** 64:
            raise ValidationError("--seed must be an unsigned 64-bit integer")
        cfg = load_config(args.config)
        conf = resolve_config(args.command, cfg, vars(args))
        ctx = {"out": args.out, "threads": args.threads, "seed": args.seed, "partial": False}
        ensure_dir(args.out)
        fn = COMMANDS[args.command][0]
        if args.command == "wave":
            ctx["partial"] = True
            fn(conf, ctx)
            return 0
        for path in _emit(ctx, fn(conf, ctx)):
            log.info("wrote %s", path)
        return 0
    except DelayWaveError as exc:
        print(f"delaywave {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
