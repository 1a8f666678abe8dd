"""Command-line entry point: ``python -m qwtsim <subcommand>``.

Subcommands write CSV files, optional SVG plots, ``config.ini`` and
``manifest.json`` into the output directory.  Exit codes: 0 success,
2 configuration error, 3 resource guard exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import svg
from .analysis import NoisyLaw, StaticLaw, fidelity_decay_shape, local_maxima, momentum_profile
from .gates import format_circuit
from .harness import (
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_RESOURCE,
    ConfigError,
    ExperimentConfig,
    ResourceError,
    Timer,
    load_config,
    run_pool,
    write_csv,
    write_manifest,
)

FIGURES = ("fig1", "fig2", "fig3", "fig4", "fig5", "a1", "a2", "a3", "a4", "a5")


def _common(p: argparse.ArgumentParser, defaults: dict):
    p.add_argument("--config", help="INI config file; flags override it")
    p.add_argument("--out", dest="dir", help="output directory")
    p.add_argument("--nq", help="system qubits: N, 'lo..hi' or 'a,b'")
    p.add_argument("--T", type=float)
    p.add_argument("--k", type=float)
    p.add_argument("--noise", dest="model", help="ideal | noisy | static | pseudo-static")
    p.add_argument("--eps", help="value, list, or log range 'lo..hi[:points]'")
    p.add_argument("--mu", help="static coupling amplitude, or 'eps'")
    p.add_argument("--seeds", help="seed list or range")
    p.add_argument("--steps", type=int)
    p.add_argument("--record-every", dest="record_every", type=int)
    p.add_argument("--snapshots")
    p.add_argument("--window", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--max-steps", dest="max_steps", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--no-svg", dest="svg", action="store_false", default=None)
    p.set_defaults(_defaults=defaults)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qwtsim", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="IPR and fidelity versus time")
    _common(p, {"nq": "10", "steps": 1000})

    p = sub.add_parser("fidelity-scan", help="t_f versus eps")
    _common(p, {"nq": "6", "model": "noisy", "eps": "1e-3..1e-2:4"})

    p = sub.add_parser("spectrum", help="quasi-energies and level spacings")
    _common(p, {"nq": "10"})

    p = sub.add_parser("matrix-elements", help="<|U_nn'|^2> versus |n-n'|")
    _common(p, {"nq": "10"})

    p = sub.add_parser("export-circuit", help="write the map circuit in text format")
    _common(p, {"nq": "4"})
    p.add_argument("--which", choices=("map", "qwt", "ut", "uk"), default="map")

    p = sub.add_parser("gate-counts", help="gates per map iteration versus n_q")
    _common(p, {"nq": "6..12"})

    p = sub.add_parser("qwt", help="wavelet-transform circuit utilities")
    p.add_argument("--export", type=int, metavar="NQ", required=True, help="write the QWT circuit for NQ qubits")
    p.add_argument("--out", dest="dir", default=None, help="output file (default: stdout)")

    p = sub.add_parser("reproduce", help="desk-scale reproduction of a figure")
    p.add_argument("figure", choices=FIGURES)
    p.add_argument("--full", action="store_true", help="use the original (large) sizes")
    _common(p, {})
    return ap


_KEYS = ("nq", "T", "k", "model", "eps", "mu", "seeds", "steps", "record_every", "snapshots",
         "window", "threshold", "max_steps", "dir", "workers", "svg")


def _config(args) -> ExperimentConfig:
    overrides = dict(getattr(args, "_defaults", {}))
    if "dir" not in overrides:
        overrides["dir"] = os.path.join("out", args.command)
    file_cfg = load_config(args.config) if getattr(args, "config", None) else None
    if file_cfg is not None:
        # file values beat subcommand defaults; flags beat both
        overrides = {"dir": overrides["dir"]} if file_cfg.dir == "out" else {}
    cfg = load_config(None, overrides, base=file_cfg)
    flags = {k: getattr(args, k) for k in _KEYS if getattr(args, k, None) is not None}
    return load_config(None, flags, base=cfg)


def _outdir(cfg) -> str:
    os.makedirs(cfg.dir, exist_ok=True)
    return cfg.dir


# --------------------------------------------------------------------------
# subcommands


def cmd_gate_counts(cfg, out):
    from .experiments import cubic_fit, gate_count_table

    rows = gate_count_table(cfg.nq)
    write_csv(os.path.join(out, "gate_counts.csv"), ["nq", "n_g", "qwt", "phase_gates", "paper_n_g", "deviation"],
              [(r.nq, r.n_g, r.qwt, r.phases, "" if r.paper is None else r.paper,
                "" if r.deviation is None else round(r.deviation, 4)) for r in rows])
    info = {}
    lines = [f"{'nq':>3} {'n_g':>7} {'paper':>7} {'dev':>7}"]
    for r in rows:
        dev = "" if r.deviation is None else f"{100 * r.deviation:+.1f}%"
        lines.append(f"{r.nq:>3} {r.n_g:>7} {r.paper or '':>7} {dev:>7}")
    if len(rows) >= 4:
        coef, rel = cubic_fit([r.nq for r in rows], [r.n_g for r in rows])
        info = {"cubic_coefficients": list(coef), "cubic_max_rel_residual": rel}
        lines.append(f"cubic fit: {' '.join(f'{c:.4g}' for c in coef)}; max relative residual {rel:.2%}")
    print("\n".join(lines))
    if cfg.svg:
        x = [r.nq for r in rows]
        series = [svg.Series(x, [r.n_g for r in rows], "this circuit", "points")]
        paper = [(r.nq, r.paper) for r in rows if r.paper]
        if paper:
            series.append(svg.Series(*zip(*paper), label="reported", style="points"))
        svg.plot(series, os.path.join(out, "gate_counts.svg"), "gates per iteration", "n_q", "n_g", logy=True)
    return info


def cmd_evolve(cfg, out):
    from .experiments import ipr_run

    nq = cfg.nq[0]
    eps = cfg.eps[0]
    info = {}
    series = []
    for seed in cfg.seeds[:1] if cfg.model == "ideal" else cfg.seeds:
        rec, wt, wx, trend = ipr_run(nq, cfg.k, cfg.steps, cfg.model, eps, cfg.mu_for(eps), seed, cfg.T,
                                     cfg.window, cfg.record_every, gate_level=cfg.model != "ideal",
                                     snapshot_times=cfg.snapshots)
        tag = f"_seed{seed}" if cfg.model != "ideal" else ""
        write_csv(os.path.join(out, f"evolution{tag}.csv"), ["t", "f", "xi"],
                  zip(rec.times, rec.fidelity, rec.ipr))
        write_csv(os.path.join(out, f"evolution_windowed{tag}.csv"), ["t", "xi"], zip(wt, wx))
        for t, p in sorted(rec.snapshots.items()):
            write_csv(os.path.join(out, f"probability_t{t}{tag}.csv"), ["n", "p"],
                      zip(np.arange(len(p)) - len(p) // 2, p))
        if trend is not None:
            info[f"trend{tag or '_ideal'}"] = {"slope": trend.slope, "stderr": trend.stderr,
                                               "pvalue": trend.pvalue, "mean_xi": trend.mean}
        tf = rec.tf(cfg.threshold) if cfg.model != "ideal" else math.inf
        info[f"t_f{tag or '_ideal'}"] = tf
        series.append(svg.Series(wt, wx, f"seed {seed}" if tag else "ideal"))
        print(f"seed {seed}: final xi = {rec.ipr[-1]:.2f}, t_f = {tf}")
    if cfg.svg:
        svg.plot(series, os.path.join(out, "ipr.svg"), f"IPR, n_q={nq}, k={cfg.k}", "t", "xi")
    return info


def _scan(cfg, model=None, mu=None, eps=None, nqs=None):
    from .experiments import run_scan_task, scan_tasks

    tasks = scan_tasks(nqs or cfg.nq, model or cfg.model, eps or cfg.eps, cfg.seeds,
                       cfg.mu if mu is None else mu, cfg.T, cfg.k, cfg.max_steps, cfg.threshold)
    return run_pool(run_scan_task, tasks, cfg.workers)


def _scan_rows(results):
    return [(r.task.eps, r.task.nq, r.n_g, r.task.seed, r.task.model, r.task.mu, r.t_f, r.N_g, r.t_f_iter)
            for r in results]


_SCAN_HEADER = ["eps", "nq", "n_g", "seed", "model", "mu", "t_f", "N_g", "t_f_iter"]


def cmd_fidelity_scan(cfg, out):
    from .experiments import summarise_scan

    results = _scan(cfg)
    write_csv(os.path.join(out, "scan.csv"), _SCAN_HEADER, _scan_rows(results))
    law = NoisyLaw() if cfg.model in ("noisy", "noisy-gates", "pseudo-static", "pseudo") else StaticLaw()
    pts, fit = summarise_scan(results, law)
    write_csv(os.path.join(out, "scan_mean.csv"), ["eps", "nq", "n_g", "t_f"],
              [(p.eps, p.nq, p.n_g, p.t_f) for p in pts])
    info = {}
    if fit is not None:
        info = {"law": fit.law, "constant": fit.constant, "exponent": fit.exponent,
                "exponent_stderr": fit.exponent_stderr}
        print(f"{fit.law} law: constant = {fit.constant:.3g}, free exponent = {fit.exponent:.3f}")
    if cfg.svg:
        series = []
        for nq in sorted({p.nq for p in pts}):
            sel = [p for p in pts if p.nq == nq]
            series.append(svg.Series([p.eps for p in sel], [p.t_f for p in sel], f"n_q={nq}", "points"))
        p0 = pts[0]
        svg.plot(series, os.path.join(out, "scan.svg"), f"t_f vs eps ({cfg.model})", "eps", "t_f",
                 logx=True, logy=True, ref_slopes=[(-law.power, p0.eps, p0.t_f, f"slope -{law.power}")])
    return info


def cmd_spectrum(cfg, out):
    from .experiments import spectrum_run

    spec, st = spectrum_run(cfg.nq[0], cfg.k, cfg.T)
    write_csv(os.path.join(out, "quasienergies.csv"), ["omega"], ((w,) for w in spec.omega))
    write_csv(os.path.join(out, "spacing.csv"), ["s", "P"], zip(spec.centers, spec.density))
    info = {"fraction_below_0.1": st.fraction_below, "poisson_fraction": st.poisson_fraction,
            "ratio": st.ratio, "ks_statistic": st.ks_statistic, "ks_pvalue": st.ks_pvalue}
    print(f"P(s<0.1) = {st.fraction_below:.4f} (Poisson {st.poisson_fraction:.4f}), KS p = {st.ks_pvalue:.3g}")
    if cfg.svg:
        s = spec.centers
        svg.plot([svg.Series(s, spec.density, "P(s)"), svg.Series(s, np.exp(-s), "exp(-s)", dashed=True)],
                 os.path.join(out, "spacing.svg"), f"level spacings, k={cfg.k}", "s", "P(s)")
    return info


def cmd_matrix_elements(cfg, out):
    from .experiments import decay_run

    res = decay_run(cfg.nq[0], cfg.k, cfg.T)
    write_csv(os.path.join(out, "matrix_elements.csv"), ["d", "mean_abs2"], zip(res.d, res.mean_sq))
    info = {"notes": res.notes}
    for name, f in (("asymptotic", res.asymptotic), ("intermediate", res.intermediate)):
        if f is not None:
            info[name] = {"alpha": f.exponent, "stderr": f.stderr, "window": list(f.window),
                          "rms_residual": float(np.sqrt(np.mean(f.residuals**2)))}
            print(f"{name}: alpha = {f.exponent:.3f} over d in [{f.window[0]:g}, {f.window[1]:g}]")
    if cfg.svg:
        svg.plot([svg.Series(res.d[1:], res.mean_sq[1:], f"k={cfg.k}")], os.path.join(out, "matrix_elements.svg"),
                 "<|U|^2> vs |n-n'|", "|n-n'|", "<|U|^2>", logx=True, logy=True,
                 ref_slopes=[(-2, 1, res.mean_sq[1], "1/d^2"), (-4, 1, res.mean_sq[1], "1/d^4")])
    return info


def cmd_export_circuit(cfg, out, which="map"):
    from .rotor import MapParams, build_map_circuit, build_qwt_cached, build_uk_circuit, build_ut_circuit

    p = MapParams(cfg.nq[0], cfg.T, cfg.k)
    c = {"map": build_map_circuit, "ut": build_ut_circuit, "uk": build_uk_circuit,
         "qwt": lambda q: build_qwt_cached(q.nq)}[which](p)
    path = os.path.join(out, f"{which}_nq{p.nq}.txt")
    with open(path, "w") as fh:
        fh.write(format_circuit(c))
    print(f"wrote {len(c)} gates to {path}")
    return {"gates": len(c)}


# --------------------------------------------------------------------------
# figure reproduction


def _reproduce(fig: str, cfg, out, full: bool):
    from .experiments import (coarse_grain, decay_run, gate_count_table, ipr_run, probability_run,
                              summarise_scan)
    from .analysis import build_full_unitary
    from .rotor import MapParams

    info = {}
    if fig in ("fig1", "a1"):
        nq = 12 if full else 10
        ks = (100, 1000) if fig == "fig1" else (1, 10, 100, 1000)
        for k in ks:
            z = coarse_grain(np.abs(build_full_unitary(MapParams(nq, cfg.T, k))) ** 2, 128)
            np.savetxt(os.path.join(out, f"density_k{k}.csv"), z, delimiter=",")
            if cfg.svg:
                svg.heatmap(z, os.path.join(out, f"density_k{k}.svg"), f"|U|^2, N=2^{nq}, k={k}")
    elif fig == "fig2":
        nq = 15 if full else 11
        series = []
        for k in (1, 10, 100, 1000):
            res = decay_run(nq, k, cfg.T)
            write_csv(os.path.join(out, f"matrix_elements_k{k}.csv"), ["d", "mean_abs2"], zip(res.d, res.mean_sq))
            info[f"k{k}"] = {n: (None if f is None else f.exponent)
                             for n, f in (("asymptotic", res.asymptotic), ("intermediate", res.intermediate))}
            series.append(svg.Series(res.d[1:], res.mean_sq[1:], f"k={k}"))
        if cfg.svg:
            svg.plot(series, os.path.join(out, "fig2.svg"), f"N=2^{nq}", "|n-n'|", "<|U|^2>", logx=True, logy=True,
                     ref_slopes=[(-2, 1, 1e-1, "1/d^2"), (-4, 1, 1e-1, "1/d^4")])
    elif fig == "fig3":
        nq, steps = (12, 10000) if full else (10, 5000)
        for k in (1, 1000):
            series = []
            for label, model, eps in (("ideal", "ideal", 0.0), ("static", "static", 1e-4), ("noisy", "noisy", 5e-4)):
                rec, wt, wx, trend = ipr_run(nq, k, steps, model, eps, 0.0, cfg.seeds[0], cfg.T, 50)
                write_csv(os.path.join(out, f"ipr_k{k}_{label}.csv"), ["t", "xi"], zip(wt, wx))
                info[f"k{k}_{label}"] = {"mean_xi": trend.mean, "slope": trend.slope, "pvalue": trend.pvalue}
                series.append(svg.Series(wt, wx, label))
            if cfg.svg:
                svg.plot(series, os.path.join(out, f"fig3_k{k}.svg"), f"IPR, n_q={nq}, k={k}", "t", "xi")
    elif fig in ("fig4", "a4"):
        nq = 12 if full else 10
        k, times = (1, (10000 if full else 1000,)) if fig == "fig4" else (1000, (1000, 10000) if full else (1000,))
        for t in times:
            series = []
            runs = [("ideal", "ideal", 0.0), ("noisy", "noisy", 5e-4)]
            if fig == "a4":
                runs.append(("static", "static", 1e-4))
            for label, model, eps in runs:
                p = probability_run(nq, k, t, model, eps, 0.0, cfg.seeds[0], cfg.T)
                n, w = momentum_profile(p)
                write_csv(os.path.join(out, f"probability_k{k}_t{t}_{label}.csv"), ["n", "p"],
                          zip(np.arange(len(p)) - len(p) // 2, p))
                info[f"t{t}_{label}_peaks"] = [int(i) for i in local_maxima(np.log(w + 1e-300), 8)[:20]]
                series.append(svg.Series(n[1:], w[1:], label))
            if cfg.svg:
                svg.plot(series, os.path.join(out, f"{fig}_t{t}.svg"), f"|psi_n|^2, k={k}, t={t}", "|n|", "p",
                         logx=True, logy=True, ref_slopes=[(-4, 1, series[0].y[0], "1/n^4")])
    elif fig == "fig5":
        nq = 12 if full else 8
        from .experiments import ipr_run as _run
        for label, model, eps in (("noisy", "noisy", 5e-4), ("static", "static", 1e-4)):
            steps = 2000 if model == "noisy" else 200
            rec, *_ = _run(nq, 1.0, steps, model, eps, 0.0, cfg.seeds[0], cfg.T, 50)
            write_csv(os.path.join(out, f"fidelity_{label}.csv"), ["t", "f"], zip(rec.times, rec.fidelity))
            try:
                shape = fidelity_decay_shape(rec.fidelity, rec.times)
                info[f"shape_{label}"] = shape.kind
            except ValueError:
                info[f"shape_{label}"] = "insufficient decay"
        eps = cfg.eps if cfg.eps != (0.0,) else tuple(np.logspace(-3.5, -1.5, 5))
        nqs = (6, 8, 10) if full else (6, 8)
        for label, model, mu in (("noisy", "noisy", "0"), ("static_mu0", "static", "0"),
                                 ("static_mueps", "static", "eps")):
            res = _scan(cfg, model, mu, eps, nqs)
            write_csv(os.path.join(out, f"scan_{label}.csv"), _SCAN_HEADER, _scan_rows(res))
            _, fit = summarise_scan(res, NoisyLaw() if model == "noisy" else StaticLaw())
            if fit is not None:
                info[label] = {"constant": fit.constant, "exponent": fit.exponent}
    elif fig == "a2":
        from .experiments import spectrum_run

        nq = 11 if full else 10
        for k in (0.1, 1000):
            spec, st = spectrum_run(nq, k, cfg.T)
            write_csv(os.path.join(out, f"spacing_k{k:g}.csv"), ["s", "P"], zip(spec.centers, spec.density))
            info[f"k{k:g}"] = {"ratio_below_0.1": st.ratio, "ks_pvalue": st.ks_pvalue}
    elif fig == "a3":
        rows = gate_count_table(range(6, 13))
        write_csv(os.path.join(out, "gate_counts.csv"), ["nq", "n_g", "paper_n_g"],
                  [(r.nq, r.n_g, r.paper) for r in rows])
    elif fig == "a5":
        nq = 12 if full else 6
        eps = tuple(np.logspace(-4, -0.5, 8))
        for label, model in (("noisy", "noisy"), ("pseudo", "pseudo-static")):
            e = eps if model != "noisy" else tuple(v for v in eps if v >= 1e-3)
            res = _scan(cfg, model, "0", e, (nq,))
            write_csv(os.path.join(out, f"scan_{label}.csv"), _SCAN_HEADER, _scan_rows(res))
    return info


# --------------------------------------------------------------------------


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "qwt":
            from .rotor import build_qwt_cached

            if args.export < 2:
                raise ConfigError("qwt --export needs NQ >= 2")
            if args.export > 24:
                raise ResourceError("qwt --export: NQ exceeds the guard 24")
            text = format_circuit(build_qwt_cached(args.export))
            if args.dir:
                with open(args.dir, "w") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
            return EXIT_OK
        cfg = _config(args)
        out = _outdir(cfg)
        timer = Timer()
        if args.command == "gate-counts":
            info = cmd_gate_counts(cfg, out)
        elif args.command == "evolve":
            info = cmd_evolve(cfg, out)
        elif args.command == "fidelity-scan":
            info = cmd_fidelity_scan(cfg, out)
        elif args.command == "spectrum":
            info = cmd_spectrum(cfg, out)
        elif args.command == "matrix-elements":
            info = cmd_matrix_elements(cfg, out)
        elif args.command == "export-circuit":
            info = cmd_export_circuit(cfg, out, args.which)
        else:
            info = _reproduce(args.figure, cfg, out, args.full)
            print(json.dumps(info, indent=1, default=float))
        write_manifest(out, cfg, " ".join([args.command] + ([args.figure] if args.command == "reproduce" else [])),
                       timer.elapsed, {"results": info})
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceError as e:
        print(f"resource guard: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
