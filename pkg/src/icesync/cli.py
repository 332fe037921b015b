"""Command-line front end: ``icesync <subcommand> ...``.

Exit codes: 0 ok, 2 configuration error, 3 numerical divergence,
4 saturated or degenerate result. Every CSV/JSON artifact carries a
provenance header; a PNG figure is written next to it unless --no-figure.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .attractors import (NSaturated, count_clusters, default_t0, evolve_section, grid_ics,
                         locate_attractors, random_ics)
from .basins import (DegenerateAttractors, GridSpec, basin_areas, basin_sequence, jump_detect,
                     track_path)
from .config import ConfigError, RunConfig
from .forcing import dump_csv, insolation, parse_forcing, spectrum_table
from .integrator import (DivergedError, TangentBundle, Trajectory, integrate,
                         integrate_with_tangent, sde_path, trajectory)
from .lyapunov import NotConverged, desync_episodes, long_term_spectrum, short_term_lle
from .oscillator import SystemState, instantaneous_lle
from .provenance import make_provenance, read_csv, write_csv, write_json
from .sweep import parse_axis, sweep_count, sweep_lle

log = logging.getLogger("icesync")

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_DEGENERATE = 0, 2, 3, 4


# ---------------------------------------------------------------- helpers

def _pair(text: str, kind=float) -> tuple:
    parts = text.replace("x", ",").split(",")
    if len(parts) != 2:
        raise ConfigError(f"expected two comma separated values, got {text!r}")
    return kind(parts[0]), kind(parts[1])


def _resolve(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    model = {k: getattr(args, k) for k in ("alpha", "beta", "gamma", "tau", "potential")
             if getattr(args, k, None) is not None}
    integ = {}
    for flag, key in (("h", "h"), ("gsr_interval", "gsr_interval"), ("noise_b", "noise_b"),
                      ("seed", "seed")):
        if getattr(args, flag, None) is not None:
            integ[key] = getattr(args, flag)
    try:
        params = cfg.params.with_(**model)
    except ValueError as e:
        raise ConfigError(f"model: {e}", "model") from None
    try:
        ic = replace(cfg.integrator, **integ)
    except ValueError as e:
        raise ConfigError(f"integrator: {e}", "integrator") from None
    forcing = args.forcing if getattr(args, "forcing", None) is not None else cfg.forcing
    return RunConfig(params=params, forcing=forcing, integrator=ic, options=cfg.options,
                     outputs=cfg.outputs)


def _prov(cfg: RunConfig, args, **extra) -> dict:
    # output locations do not change results, so they stay out of the hash
    skip = ("func", "out", "no_figure", "verbose", "config")
    opts = {k: v for k, v in vars(args).items() if k not in skip and not callable(v)}
    return make_provenance({"run": cfg.to_dict(), "args": opts}, seed=cfg.seed,
                           command=args.command, run=cfg.to_dict(), **extra)


def _figure(args, out: Path, fn, *a, **kw):
    if getattr(args, "no_figure", False):
        return
    from . import plotting
    getattr(plotting, fn)(*a, out.with_suffix(".png") if out.suffix != ".png" else out, **kw)


def _out(args, default: str) -> Path:
    p = Path(args.out or default)
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


# ------------------------------------------------------------ subcommands

def cmd_forcing(args, cfg: RunConfig) -> int:
    model = parse_forcing(args.model or cfg.forcing)
    out = _out(args, "forcing.csv")
    prov = _prov(cfg, args, forcing=model.describe())
    if args.table:
        if model.kind != "series":
            raise ConfigError("--table needs a series forcing", "model")
        dump_csv(model.terms, out, prov)
        return EXIT_OK
    if args.spectrum:
        rows = spectrum_table(model)
        write_csv(out, ("period_kyr", "power_W2_per_m4"), rows, prov)
        return EXIT_OK
    if not args.dt > 0 or not args.to > args.from_:
        raise ConfigError("need --to > --from and --dt > 0", "dt")
    n = int(round((args.to - args.from_) / args.dt))
    t = args.from_ + args.dt * np.arange(n + 1)
    f = model.eval(t)
    write_csv(out, ("t", "F"), zip(t, f), prov)
    _figure(args, out, "plot_forcing", t, f)
    return EXIT_OK


def _read_overlay(path):
    header, rows = read_csv(path)
    a = np.array([[float(v) for v in r[:2]] for r in rows])
    return header[1] if len(header) > 1 else "proxy", a[np.argsort(a[:, 0])]


def cmd_trajectory(args, cfg: RunConfig) -> int:
    F = cfg.forcing_model()
    p, ic = cfg.params, cfg.integrator
    s0 = SystemState(args.x0, args.y0, args.t0)
    out = _out(args, "trajectory.csv")
    if args.tangent:
        b = integrate_with_tangent(TangentBundle.start(s0), p, F, args.t1, ic)
        tr = Trajectory(np.r_[s0.t, b.gsr_times], np.r_[s0.x, b.gsr_x], np.r_[s0.y, b.gsr_y],
                        np.vstack([np.zeros((1, 2)), b.gsr_log_norms]))
    elif ic.noise_b > 0:
        tr = sde_path(s0, p, F, args.t1, ic)
        sel = np.r_[np.arange(0, len(tr.t), args.every), len(tr.t) - 1]
        sel = np.unique(sel)
        tr = Trajectory(tr.t[sel], tr.x[sel], tr.y[sel])
    else:
        tr = trajectory(s0, p, F, args.t1, ic, every=args.every)
    header, rows = tr.header, list(tr.rows())
    overlay = None
    if args.overlay:
        name, a = _read_overlay(args.overlay)
        v = np.interp(tr.t, a[:, 0], a[:, 1], left=np.nan, right=np.nan)
        header = header + [name]
        rows = [tuple(r) + (float(x),) for r, x in zip(rows, v)]
        overlay = (a[:, 0], a[:, 1])
    write_csv(out, header, rows, _prov(cfg, args))
    ft = np.linspace(tr.t[0], tr.t[-1], 2000)
    _figure(args, out, "plot_trajectory", tr, forcing_t=ft if F.kind != "zero" else None,
            forcing_f=F.eval(ft), overlay=overlay)
    return EXIT_OK


def _attracting_states(cfg, F, t_at: float, args) -> list[SystemState]:
    if args.use_ic:
        start = t_at - args.settle
        s = integrate(SystemState(args.x0, args.y0, start), cfg.params, F, t_at, cfg.integrator)
        return [s]
    ats = locate_attractors(cfg.params, F, t0=t_at - args.locate_gap, t_section=t_at,
                            d_T=args.dT, config=cfg.integrator)
    return [SystemState(float(a[0]), float(a[1]), t_at) for a in ats.points]


def cmd_lyapunov(args, cfg: RunConfig) -> int:
    F = cfg.forcing_model()
    out = _out(args, "record.json" if args.horizon is None else "short_term.csv")
    if args.horizon is None:
        with warnings.catch_warnings(record=True) as w:
            warnings.simplefilter("always", NotConverged)
            rec = long_term_spectrum(cfg.params, F, ic=(args.x0, args.y0), t_total=args.t_total,
                                     transient=args.transient, config=cfg.integrator)
        for m in w:
            log.warning("%s", m.message)
        write_json(out, {"record": rec.to_dict(), "config": cfg.to_dict()}, _prov(cfg, args))
        tr = np.array(rec.convergence_trace)
        if len(tr):
            _figure(args, out, "plot_series", tr[:, 0], tr[:, 1], ylabel="running lambda_1 [1/kyr]",
                    hline=0.0)
        print(f"spectrum: {', '.join(f'{v:.6g}' for v in rec.spectrum)} 1/kyr")
        return EXIT_OK
    w0, w1 = _pair(args.window)
    spin = args.spinup
    states = _attracting_states(cfg, F, w0 - spin, args)
    rows, summary = [], []
    for k, s in enumerate(states):
        ser = short_term_lle(cfg.params, F, s, (w0, w1), args.horizon, cfg.integrator, spinup=spin)
        tr = trajectory(s, cfg.params, F, w1, cfg.integrator)
        xs = np.interp(ser.t, tr.t, tr.x)
        ys = np.interp(ser.t, tr.t, tr.y)
        rows += [(k, t, x, y, lam) for t, x, y, lam in zip(ser.t, xs, ys, ser.lam)]
        eps = desync_episodes(ser)
        summary.append({"at": k, "start": [s.x, s.y, s.t], "episodes": eps,
                        "mean": float(ser.lam.mean())})
        _figure(args, out.with_name(f"{out.stem}_at{k}.png"), "plot_colored_path", xs, ys, ser.lam,
                title=f"AT {k}, H = {args.horizon:g} kyr", clabel="lambda^H [1/kyr]")
    write_csv(out, ("at", "t", "x", "y", "lambda_H"), rows, _prov(cfg, args))
    write_json(out.with_suffix(".json"), {"H": args.horizon, "window": [w0, w1], "ats": summary},
               _prov(cfg, args))
    if args.instantaneous:
        yv = np.linspace(-2.5, 2.5, 501)
        lam = instantaneous_lle(yv, cfg.params)
        ip = out.with_name(out.stem + "_instantaneous.csv")
        write_csv(ip, ("y", "lambda_inst"), zip(yv, lam), _prov(cfg, args))
        _figure(args, ip, "plot_series", yv, 10 * lam, xlabel="y", ylabel="10 x lambda_inst", hline=0.0)
    for s in summary:
        print(f"AT {s['at']}: {len(s['episodes'])} episodes with lambda^H > 0")
    return EXIT_OK


def _ics(args, cfg):
    if args.random:
        return random_ics(args.random, cfg.seed)
    nx, ny = _pair(args.grid, int)
    return grid_ics(nx, -2.2, 2.2, ny=ny)


def cmd_clusters(args, cfg: RunConfig) -> int:
    F = cfg.forcing_model()
    t0 = default_t0(F, args.t) if args.t0 is None else args.t0
    sec = evolve_section(_ics(args, cfg), t0, args.t, cfg.params, F, cfg.integrator)
    rep = count_clusters(sec.points, args.dT, min_size=args.min_size, index=sec.index)
    out = _out(args, "report.json")
    payload = {"t0": t0, "t_section": args.t, "n_ics": len(sec.points) + len(sec.diverged),
               "diverged": sec.diverged.tolist(), **rep.to_dict(),
               "points": sec.points.tolist()}
    write_json(out, payload, _prov(cfg, args))
    lab = np.full(len(sec.points), -1)
    pos = {int(i): n for n, i in enumerate(sec.index)}
    for k, c in enumerate(rep.clusters):
        for m in c.members:
            lab[pos[int(m)]] = k
    _figure(args, out, "plot_section", sec.points, lab, title=f"N = {rep.N}")
    print(f"N = {rep.N}" + (" (saturated)" if rep.saturated else ""))
    return EXIT_DEGENERATE if rep.saturated else EXIT_OK


def cmd_basins(args, cfg: RunConfig) -> int:
    F = cfg.forcing_model()
    nx, ny = _pair(args.grid, int)
    grid = GridSpec(nx, ny, _pair(args.xlim), _pair(args.ylim))
    t0s = [args.t0 + i * args.t0_step for i in range(args.frames)]
    gap = args.locate_gap
    maps = basin_sequence(cfg.params, F, grid, t0s, cfg.integrator, horizon=args.horizon,
                          locate_gap=gap, d_T=args.dT)
    outdir = Path(args.out or "basins")
    outdir.mkdir(parents=True, exist_ok=True)
    prov = _prov(cfg, args)
    for m in maps:
        path = outdir / f"basin_t0_{m.t0:+09.2f}.csv"
        m.save(path, prov)
        _figure(args, path, "plot_basin_map", m)
        print(f"t0 = {m.t0:g}: areas {np.round(basin_areas(m), 4).tolist()}, "
              f"unresolved {1 - m.resolved_fraction:.4f}")
    return EXIT_OK


def cmd_sweep(args, cfg: RunConfig) -> int:
    F = cfg.forcing_model()
    xa, ya = parse_axis(args.x), parse_axis(args.y)
    out = _out(args, f"sweep_{args.kind}.csv")

    def progress(i, n):
        if i == n or i % max(1, n // 10) == 0:
            log.info("sweep %d/%d", i, n)

    if args.kind == "lle":
        g = sweep_lle(xa, ya, cfg.params, F, cfg.integrator, t_total=args.t_total,
                      transient=args.transient, seed=cfg.seed, gamma_scale=args.gamma_scale,
                      workers=args.workers, progress=progress)
    else:
        g = sweep_count(xa, ya, cfg.params, F, cfg.integrator, d_T=args.dT, seed=cfg.seed,
                        gamma_scale=args.gamma_scale, workers=args.workers, progress=progress)
    g.save(out, _prov(cfg, args))
    _figure(args, out, "plot_sweep", g, title=f"{args.kind}: {F.describe().get('label', F.kind)}")
    bad = int(np.sum(g.status == "diverged"))
    print(f"{g.values.size} cells, {bad} diverged, {int(np.sum(g.status == 'saturated'))} saturated")
    return EXIT_OK


def cmd_jumps(args, cfg: RunConfig) -> int:
    F = cfg.forcing_model()
    ic = cfg.integrator
    if args.b is not None:
        b = args.b
    else:
        om = insolation().coefficients()[0][0]
        b = args.b_factor * math.sqrt(om)
    ic = replace(ic, noise_b=b)
    ats = locate_attractors(cfg.params, F, t0=args.locate_from, t_section=args.t0, d_T=args.dT,
                            config=ic)
    if len(ats.points) < 2:
        raise DegenerateAttractors("jump detection needs at least two ATs")
    tracks = track_path(ats.points, args.t0, args.t1, cfg.params, F, ic)
    start = ats.points[args.start_at]
    s0 = SystemState(float(start[0]), float(start[1]), args.t0)
    rows, shown = [], []
    n_jumping = 0
    for i in range(args.paths):
        js = jump_detect(cfg.params, F, ic, s0, args.t1, ats.points, dwell=args.dwell, stream=i,
                         tracks=tracks)
        n_jumping += bool(js)
        rows += [(i, j.t, j.from_at, j.to_at) for j in js]
        if js and len(shown) < 3:
            shown.append(sde_path(s0, cfg.params, F, args.t1, ic, stream=i))
    out = _out(args, "jumps.csv")
    prov = _prov(cfg, args, noise_b=b)
    write_csv(out, ("path", "t_jump", "from_at", "to_at"), rows, prov)
    write_json(out.with_suffix(".json"), {"noise_b": b, "paths": args.paths,
                                          "paths_with_jump": n_jumping, "n_jumps": len(rows),
                                          "at_points_t0": ats.points.tolist(),
                                          "dwell": args.dwell}, prov)
    if not shown:
        shown.append(sde_path(s0, cfg.params, F, args.t1, ic, stream=0))
    _figure(args, out, "plot_jump_paths", tracks[0], tracks[1], tracks[2], shown,
            title=f"{n_jumping}/{args.paths} paths jump")
    print(f"{n_jumping} of {args.paths} paths jump ({len(rows)} jumps), b = {b:.4g}")
    return EXIT_OK


# ------------------------------------------------------------- repro

def _recipes(out: str, quick: bool) -> dict:
    sw = "20" if quick else "40"
    bgrid = "101x61" if quick else "201x121"
    tt = "1000" if quick else "3000"
    tr = "200" if quick else "500"
    astro_fig4 = ["--forcing", "insol", "--gamma", "0.75", "--tau", "43.86"]
    fit = ["--forcing", "insol", "--gamma", "0.75", "--tau", "35.09"]
    sine = ["--forcing", "sine:41", "--gamma", "3.33", "--tau", "35.09"]
    burst = ["--forcing", "insol-wm2", "--gamma", "0.033"]
    return {
        "fig3": [(["trajectory", *fit, "--x0", "-0.24", "--y0", "-0.27", "--t0", "-500", "--t1", "0",
                   "--h", "0.01", "--every", "10", "--out", f"{out}/fig3_trajectory.csv"], {0}),
                 (["forcing", "--model", "insol", "--from", "-500", "--to", "0", "--dt", "0.5",
                   "--out", f"{out}/fig3_forcing.csv"], {0})],
        "fig4": [(["clusters", "--gamma", "0", "--forcing", "zero", "--random", "70", "--t0", "0",
                   "--t", "550", "--h", "0.01", "--out", f"{out}/fig4_unforced.json"], {4}),
                 (["clusters", *sine, "--random", "70", "--t0", "0", "--t", "550", "--h", "0.01",
                   "--out", f"{out}/fig4_sine.json"], {0}),
                 (["clusters", *astro_fig4, "--random", "70", "--t0", "0", "--t", "550", "--h", "0.01",
                   "--out", f"{out}/fig4_astro.json"], {0})],
        "fig5a": [(["sweep", "lle", "--forcing", "sine:41", "--x", f"tulc:40:200:{sw}",
                    "--y", f"gamma:0:6:{sw}", "--t-total", tt, "--transient", tr,
                    "--out", f"{out}/fig5a_lle_sine.csv"], {0})],
        "fig5b": [(["sweep", "lle", "--forcing", "insol", "--x", f"tulc:40:200:{sw}",
                    "--y", f"gamma:0:1.5:{sw}", "--t-total", tt, "--transient", tr,
                    "--out", f"{out}/fig5b_lle_insol.csv"], {0})],
        "fig5c": [(["sweep", "count", "--forcing", "sine:41", "--x", f"tulc:40:200:{sw}",
                    "--y", f"gamma:0:6:{sw}", "--out", f"{out}/fig5c_count_sine.csv"], {0})],
        "fig5d": [(["sweep", "count", "--forcing", "insol", "--x", f"tulc:40:200:{sw}",
                    "--y", f"gamma:0:1.5:{sw}", "--out", f"{out}/fig5d_count_insol.csv"], {0})],
        "fig7": [(["sweep", "count", "--forcing", "insol", "--x", f"tulc:40:200:{sw}",
                   "--y", f"gamma:0:0.3:{sw}", "--out", f"{out}/fig7_count_insol_lowgamma.csv"], {0})],
        "fig8": [(["basins", *sine, "--t0", "0", "--t0-step", "20.5", "--frames", "5",
                   "--grid", bgrid, "--out", f"{out}/fig8_basins_sine"], {0})],
        "fig9": [(["basins", *astro_fig4, "--t0", "0", "--t0-step", "10", "--frames", "10",
                   "--grid", bgrid, "--out", f"{out}/fig9_basins_insol"], {0})],
        "fig10": [(["sweep", "count", "--forcing", "sine:41", "--x", f"beta:-1.2:1.2:{sw}",
                    "--y", f"gamma:0:6:{sw}", "--out", f"{out}/fig10_count_beta_sine.csv"], {0}),
                  (["sweep", "count", "--forcing", "insol", "--x", f"beta:-1.2:1.2:{sw}",
                    "--y", f"gamma:0:1.5:{sw}", "--out", f"{out}/fig10_count_beta_insol.csv"], {0})],
        "fig12": [(["lyapunov", *burst, "--tau", "33.33", "--horizon", "50", "--window", "0,800",
                    "--h", "0.01", "--out", f"{out}/fig12_short_term.csv"], {0})],
        "fig14": [(["basins", *astro_fig4, "--t0", "0", "--frames", "1", "--grid", bgrid,
                    "--out", f"{out}/fig14_basins_t0"], {0})],
        "fig15": [(["jumps", *fit, "--paths", "100", "--t0", "-700", "--t1", "0",
                    "--locate-from", "-2300", "--h", "0.01", "--out", f"{out}/fig15_jumps.csv"], {0})],
        "appE": [(["lyapunov", *burst, "--tau", "35.09", "--horizon", "1", "--window", "0,800",
                   "--use-ic", "--instantaneous", "--h", "0.01",
                   "--out", f"{out}/appE_short_term_H1.csv"], {0})],
    }


RECIPE_IDS = tuple(_recipes(".", True).keys())


def cmd_repro(args, cfg: RunConfig) -> int:
    recipes = _recipes(args.out or "repro", args.quick)
    status = EXIT_OK
    for argv, expected in recipes[args.figure]:
        if args.no_figure:
            argv = argv + ["--no-figure"]
        log.info("repro %s: icesync %s", args.figure, " ".join(argv))
        code = main(argv)
        if code not in expected:
            log.error("step %s exited with %d (expected %s)", argv[0], code, sorted(expected))
            status = code or 1
    return status


# ------------------------------------------------------------- parser

def _common(p: argparse.ArgumentParser, forcing=True, dt_alias=True):
    g = p.add_argument_group("model and integrator (override --config)")
    g.add_argument("--config", help="INI run configuration")
    g.add_argument("--alpha", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--gamma", type=float)
    g.add_argument("--tau", type=float)
    g.add_argument("--potential", choices=("cubic", "quintic"))
    if forcing:
        g.add_argument("--forcing", help="insol | insol-wm2 | sine[:T[:A]] | zero")
    g.add_argument("--h", *(("--dt",) if dt_alias else ()), dest="h", type=float,
                   help="integration step [kyr]")
    g.add_argument("--gsr-interval", type=float)
    g.add_argument("--noise-b", type=float)
    g.add_argument("--seed", type=int)
    p.add_argument("--out", help="output path")
    p.add_argument("--no-figure", action="store_true", help="skip the PNG figure")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="icesync", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"icesync {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("forcing", help="sample a forcing model to CSV")
    _common(p, forcing=False, dt_alias=False)
    p.add_argument("--model", help="insol | insol-wm2 | sine[:T[:A]] | zero")
    p.add_argument("--from", dest="from_", type=float, default=-1000.0)
    p.add_argument("--to", type=float, default=0.0)
    p.add_argument("--dt", dest="dt", type=float, default=0.1)
    p.add_argument("--table", action="store_true", help="write the coefficient table instead")
    p.add_argument("--spectrum", action="store_true", help="write (period, power) rows instead")
    p.set_defaults(func=cmd_forcing)

    p = sub.add_parser("trajectory", help="integrate one trajectory to CSV")
    _common(p)
    p.add_argument("--x0", type=float, default=-0.24)
    p.add_argument("--y0", type=float, default=-0.27)
    p.add_argument("--t0", type=float, default=-500.0)
    p.add_argument("--t1", type=float, default=0.0)
    p.add_argument("--every", type=int, default=1, help="keep every n-th step")
    p.add_argument("--tangent", action="store_true", help="add lognorm1,lognorm2 columns")
    p.add_argument("--overlay", help="proxy CSV (t,value) joined onto the output")
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser("lyapunov", help="long-term spectrum or short-term exponents")
    _common(p)
    p.add_argument("--x0", type=float, default=-0.24)
    p.add_argument("--y0", type=float, default=-0.27)
    p.add_argument("--t-total", type=float, default=3000.0)
    p.add_argument("--transient", type=float, default=500.0)
    p.add_argument("--horizon", type=float, help="H [kyr]; switches to short-term mode")
    p.add_argument("--window", default="0,800", help="short-term window t0,t1")
    p.add_argument("--spinup", type=float, default=20.0)
    p.add_argument("--use-ic", action="store_true",
                   help="follow the trajectory from (x0, y0) instead of located ATs")
    p.add_argument("--settle", type=float, default=500.0,
                   help="with --use-ic: kyr integrated before the spin-up")
    p.add_argument("--locate-gap", type=float, default=1600.0)
    p.add_argument("--dT", type=float, default=0.1)
    p.add_argument("--instantaneous", action="store_true",
                   help="also write the closed-form instantaneous exponent against y")
    p.set_defaults(func=cmd_lyapunov)

    p = sub.add_parser("clusters", help="count attracting trajectories")
    _common(p)
    p.add_argument("--t0", type=float, help="release time (default: convention)")
    p.add_argument("--t", type=float, default=0.0, help="section time")
    p.add_argument("--grid", default="7x7")
    p.add_argument("--random", type=int, help="use N uniform random ICs instead of the grid")
    p.add_argument("--dT", type=float, default=0.1, help="clustering threshold")
    p.add_argument("--min-size", type=int, default=2)
    p.set_defaults(func=cmd_clusters)

    p = sub.add_parser("basins", help="basin maps for one or more release times")
    _common(p)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t0-step", type=float, default=10.0)
    p.add_argument("--frames", type=int, default=1)
    p.add_argument("--horizon", type=float, default=600.0)
    p.add_argument("--grid", default="201x121")
    p.add_argument("--xlim", default="-1.5,1.5")
    p.add_argument("--ylim", default="-2.5,2.5")
    p.add_argument("--locate-gap", type=float)
    p.add_argument("--dT", type=float, default=0.1)
    p.set_defaults(func=cmd_basins)

    p = sub.add_parser("sweep", help="parameter maps of lambda_max or N")
    _common(p)
    p.add_argument("kind", choices=("lle", "count"))
    p.add_argument("--x", default="tulc:80:180:40")
    p.add_argument("--y", default="gamma:0:2:40")
    p.add_argument("--t-total", type=float, default=3000.0)
    p.add_argument("--transient", type=float, default=500.0)
    p.add_argument("--dT", type=float, default=0.1)
    p.add_argument("--gamma-scale", type=float, default=1.0,
                   help="model gamma = axis value x this factor")
    p.add_argument("--workers", type=int, help="process count (default: ICESYNC_WORKERS or cores)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("jumps", help="noise-induced jumps between ATs")
    _common(p)
    p.add_argument("--paths", type=int, default=100)
    p.add_argument("--b", type=float, help="noise amplitude (overrides --b-factor)")
    p.add_argument("--b-factor", type=float, default=0.5,
                   help="b = factor x sqrt(omega of the leading obliquity term)")
    p.add_argument("--t0", type=float, default=-700.0)
    p.add_argument("--t1", type=float, default=0.0)
    p.add_argument("--locate-from", type=float, default=-2300.0)
    p.add_argument("--start-at", type=int, default=0, help="index of the starting AT")
    p.add_argument("--dwell", type=float, default=50.0)
    p.add_argument("--dT", type=float, default=0.1)
    p.set_defaults(func=cmd_jumps)

    p = sub.add_parser("repro", help="run a bundled figure recipe")
    p.add_argument("figure", choices=RECIPE_IDS)
    p.add_argument("--out", default="repro")
    p.add_argument("--quick", action="store_true", help="coarser grids and shorter runs")
    p.add_argument("--no-figure", action="store_true")
    p.set_defaults(func=cmd_repro)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig() if args.command == "repro" else _resolve(args)
        return args.func(args, cfg)
    except ConfigError as e:
        print(f"icesync: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergedError as e:
        print(f"icesync: numerical divergence: {e}", file=sys.stderr)
        return EXIT_DIVERGED
    except (NSaturated, DegenerateAttractors) as e:
        print(f"icesync: degenerate result: {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ValueError as e:
        print(f"icesync: invalid input: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
