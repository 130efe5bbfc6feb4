"""Command-line entry point.

Every subcommand calls library functions, writes its data files and
figures into ``--out`` and records a ``manifest.json`` next to them.
Exit codes: 0 success, 1 numerical or verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import sys
import tempfile
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import analysis, deposition, heap_words, hyperbolic_walk, matrix_growth, plotting
from .errors import InputDomainError, InvariantViolation, NumericalFailure
from .integrable import anderson, exact, lie, painleve, tau, toda
from .io import dumps_json, write_csv, write_dat, write_json, write_table
from .manifest import MANIFEST_NAME, RunManifest, check_files, compare_rerun
from .rng import RngStream

# stream indices keep the subcommands' random numbers disjoint
_STREAM = {"deposit": 1, "collapse": 2, "gamma": 3, "lyapunov": 4, "words": 5,
           "toda": 6, "lax": 7, "anderson": 8}

# keys that describe where output goes rather than what is computed
_NON_PARAMS = {"command", "out", "config", "handler", "manifest"}


class UsageError(Exception):
    pass


@dataclass
class Result:
    summary: dict
    files: list = field(default_factory=list)
    figures: list = field(default_factory=list)
    failed: bool = False


# ------------------------------------------------------------------ commands


def cmd_deposit(a, out: Path) -> Result:
    rng = RngStream(a.seed, _STREAM["deposit"])
    res = Result({})
    t_final, final_profiles = [], []
    for r in range(a.trials):
        prof, seq = deposition.simulate(a.n, a.t, rng.child(r), a.bc)
        final_profiles.append(prof.heights)
        if r == 0:
            t, cols, hmax, w2 = deposition.trajectory(a.n, seq, a.bc)
            stride = max(1, a.t // 1000)
            keep = slice(stride - 1, None, stride)
            res.files.append(write_table(out / "trajectory", ["T", "column", "h_max", "width2"],
                                         zip(t[keep], cols[keep], hmax[keep], w2[keep]), a.format))
            res.figures.append(plotting.trajectory_plot(out / "trajectory.png", t[keep], hmax[keep], w2[keep]))
            res.figures.append(plotting.profile_plot(out / "profile.png", prof.heights))
        t_final.append(int(prof.h_max))
    hs = np.array(final_profiles)
    rows = [[r, i + 1, int(h)] for r in range(hs.shape[0]) for i, h in enumerate(hs[r])]
    res.files.append(write_table(out / "profiles", ["run", "column", "height"], rows, a.format))
    res.summary = {"n_columns": a.n, "events": a.t, "runs": a.trials, "bc": a.bc,
                   "h_max": t_final, "mean_height": float(hs.mean())}
    if a.trials >= 2:
        var = hs.var(axis=0).mean()
        res.summary["ensemble_width"] = math.sqrt(float(var))
    return res


def _ints(text: str) -> list[int]:
    return [int(x) for x in str(text).split(",") if x.strip()]


def cmd_collapse(a, out: Path) -> Result:
    sizes = _ints(a.sizes)
    us = np.geomspace(a.umin, a.umax, a.points)
    rng = RngStream(a.seed, _STREAM["collapse"])
    series = []
    growth = {}
    for n in sizes:
        s, _ = analysis.simulate_widths(n, us * n ** 1.5, a.trials, rng.child(n), a.bc)
        series.append(s)
        try:
            with warnings.catch_warnings():
                # fit-quality notes are kept in the report instead
                warnings.simplefilter("ignore")
                f = analysis.growth_exponent(s, (a.window_lo, a.window_hi))
            growth[n] = {"exponent": f.exponent, "stderr": f.stderr, "points": f.n_points,
                         "warnings": f.warnings}
        except InputDomainError as exc:
            growth[n] = {"error": str(exc)}
    rep = analysis.collapse(series, saturation_u=a.saturation_u)
    rows = [[s.n_columns, t, u, w, w / math.sqrt(s.n_columns)]
            for s in series for t, u, w in zip(s.tau, s.u, s.width)]
    res = Result({})
    res.files.append(write_table(out / "widths", ["N", "tau", "u", "width", "width_rescaled"], rows, a.format))
    res.files.append(write_dat(out / "collapse.dat", ["u", "width/N^0.5"],
                               [list(zip(*rep.curves[n])) for n in sizes]))
    res.summary = {
        "sizes": sizes, "runs": a.trials, "mismatch": rep.mismatch, "comparable": rep.comparable,
        "saturated_width": rep.saturation,
        "roughness_exponent": None if rep.roughness is None else rep.roughness.exponent,
        "roughness_stderr": None if rep.roughness is None else rep.roughness.stderr,
        "growth_exponent": growth,
    }
    res.files.append(write_json(out / "collapse.json", res.summary))
    res.figures.append(plotting.collapse_plot(out / "collapse.png", rep.curves))
    return res


def cmd_gamma(a, out: Path) -> Result:
    measure = matrix_growth.BlockMeasure(a.r0, a.x0)
    est = matrix_growth.gamma_estimator(a.n, a.t, a.trials, measure,
                                        RngStream(a.seed, _STREAM["gamma"]).child(a.n), a.mode)
    res = Result({"n_columns": a.n, "t_max": a.t, "trials": a.trials, "mode": a.mode,
                  "measure": measure.as_dict(), "gamma0": est.gamma0,
                  "gamma0_stderr": est.gamma0_stderr, "discarded": est.discarded})
    res.files.append(write_table(out / "gamma", ["T", "mean", "stderr", "trials"], est.rows(), a.format))
    res.files.append(write_json(out / "gamma_summary.json", res.summary))
    res.figures.append(plotting.gamma_plot(out / "gamma.png", est.checkpoints, est.mean, est.stderr, est.gamma0))
    return res


def cmd_lyapunov(a, out: Path) -> Result:
    rng = RngStream(a.seed, _STREAM["lyapunov"])
    methods = ["montecarlo", "measure_integral"] if a.method == "both" else [a.method]
    res = Result({"steps": a.steps, "trials": a.trials})
    ests = {}
    for m in methods:
        e = hyperbolic_walk.lyapunov_gamma(a.steps, a.trials, rng, m, bins=a.bins)
        ests[m] = e
        res.summary[m] = {"gamma": e.gamma, "stderr": e.stderr, "warnings": e.warnings}
    if len(ests) == 2:
        g1, g2 = ests["montecarlo"], ests["measure_integral"]
        joint = math.hypot(g1.stderr, g2.stderr)
        res.summary["difference"] = abs(g1.gamma - g2.gamma)
        res.summary["joint_stderr"] = joint
    hist = ests.get("measure_integral")
    if hist is not None and hist.histogram is not None:
        h = hist.histogram
        rows = zip(h.edges[:-1], h.edges[1:], h.counts, h.density())
        res.files.append(write_table(out / "measure", ["theta_lo", "theta_hi", "count", "density"], rows, a.format))
        res.figures.append(plotting.measure_plot(out / "measure.png", h.centers(), h.density()))
    res.files.append(write_json(out / "lyapunov.json", res.summary))
    return res


def cmd_words(a, out: Path) -> Result:
    if a.word:
        word = heap_words.Word.parse(a.word.replace(",", " "), a.n)
    else:
        cols = RngStream(a.seed, _STREAM["words"]).columns(a.n, a.t) + 1
        word = heap_words.Word.of(cols.tolist(), a.n)
    summary = {"word": word.serialize(), "reduced": heap_words.reduce_colored(word).serialize()}
    res = Result(summary)
    if word.is_positive():
        nf = heap_words.normal_form_fast(word)
        heap = heap_words.word_to_heap(word)
        summary["normal_form"] = nf.serialize()
        summary["profile"] = heap.profile(a.n)
        summary["heap_word"] = heap_words.heap_to_word(heap).serialize()
        rows = [[c.column, c.level, c.timestamp] for c in heap.cells]
        res.files.append(write_table(out / "heap", ["column", "level", "timestamp"], rows, a.format))
        res.figures.append(plotting.profile_plot(out / "heap_profile.png", np.array(summary["profile"])))
    res.files.append(write_json(out / "words.json", summary))
    return res


def cmd_toda(a, out: Path) -> Result:
    rng = RngStream(a.seed, _STREAM["toda"])
    state = toda.TodaState.random(a.n, rng, a.kappa, a.bc)
    steps = int(round(a.time / a.dt))
    sample = max(1, steps // 500)
    traj = toda.toda_integrate(state, a.dt, steps, sample_every=sample)
    energies = traj.energies()
    rows = [[t, e, *m, *p] for t, e, m, p in zip(traj.times, energies, traj.mu, traj.p)]
    header = ["t", "H"] + [f"mu{j + 1}" for j in range(a.n)] + [f"p{j + 1}" for j in range(a.n)]
    res = Result({})
    res.files.append(write_table(out / "trajectory", header, rows, a.format))
    rel = (energies - energies[0]) / abs(energies[0])
    end = traj.state(-1)
    summary = {"n": a.n, "dt": a.dt, "time": a.time, "kappa": a.kappa, "bc": a.bc,
               "energy_drift": float(np.max(np.abs(rel)))}
    if a.bc == "periodic" and a.n >= 3:
        e0 = np.linalg.eigvalsh(toda.lax_matrix(state))
        e1 = np.linalg.eigvalsh(toda.lax_matrix(end))
        summary["spectrum_initial"] = e0
        summary["spectrum_final"] = e1
        summary["spectrum_drift"] = float(np.max(np.abs(e1 - e0)))
        res.figures.append(plotting.spectrum_plot(out / "spectrum.png", e0, e1))
    summary["time_reversal_error"] = toda.time_reversal_error(state, a.dt, min(steps, 2000))
    res.summary = summary
    res.files.append(write_json(out / "toda.json", summary))
    res.figures.append(plotting.energy_plot(out / "energy.png", traj.times, rel))
    return res


def cmd_lax(a, out: Path) -> Result:
    state = toda.TodaState.random(a.n, RngStream(a.seed, _STREAM["lax"]), 1.0, "periodic")
    w = complex(a.w)
    w = w.real if w.imag == 0 else w
    m = toda.lax_matrix(state, w, a.convention)
    ev = np.linalg.eigvals(m)
    ev = ev[np.lexsort((ev.imag, ev.real))]
    res = Result({"n": a.n, "w": str(a.w), "convention": a.convention,
                  "matrix": [[str(x) if isinstance(x, complex) else float(x) for x in row] for row in m.tolist()]})
    res.files.append(write_table(out / "spectrum", ["index", "re", "im"],
                                 [[k, z.real, z.imag] for k, z in enumerate(ev)], a.format))
    res.files.append(write_json(out / "lax.json", res.summary))
    return res


def _parse_phi(text: str) -> exact.ExpPoly:
    """``"a:c,a:c"`` pairs (exponent, coefficient), rationals allowed."""
    phi = exact.ExpPoly()
    for part in str(text).split(","):
        a_s, _, c_s = part.partition(":")
        phi = phi + exact.ExpPoly.exp(Fraction(a_s.strip()), Fraction(c_s.strip() or "1"))
    return phi


def _exppoly_json(e: exact.ExpPoly) -> dict:
    return {exact.fraction_str(k): v.as_dict() for k, v in sorted(e.terms.items())}


def cmd_tau(a, out: Path) -> Result:
    table = tau.tau_from_phi(_parse_phi(a.phi), a.jmax)
    residuals = {j: tau.bilinear_residual(table, j).is_zero() for j in range(1, a.jmax)}
    res = Result({"phi": a.phi, "rank": table.rank(),
                  "taus": {j: _exppoly_json(t) for j, t in enumerate(table.taus)},
                  "bilinear_zero": residuals})
    res.failed = not all(residuals.values())
    res.files.append(write_json(out / "tau.json", res.summary))
    return res


def _monomial(power: int) -> str:
    return "1" if power == 0 else ("z" if power == 1 else f"z^{power}")


def cmd_yv(a, out: Path) -> Result:
    qs = painleve.yablonskii(a.jmax)
    coeffs = {f"Q_{j}": {_monomial(p): c for p, c in q.as_dict().items()} for j, q in enumerate(qs)}
    res = Result({"jmax": a.jmax, "coefficients": coeffs,
                  "degrees": {f"Q_{j}": q.degree for j, q in enumerate(qs)},
                  "integral": all(q.is_integral() for q in qs)})
    rows = [[j, p, exact.fraction_str(c)] for j, q in enumerate(qs) for p, c in enumerate(q.coeffs) if c != 0]
    res.files.append(write_json(out / "yv.json", res.summary))
    if a.format == "csv":
        res.files.append(write_csv(out / "yv.csv", ["j", "power", "coefficient"], rows))
    return res


def cmd_pii(a, out: Path) -> Result:
    qs = painleve.yablonskii(a.jmax)
    residual = {j: painleve.painleve2_check(j, qs).is_zero() for j in range(0, a.jmax + 1)}
    gauge = painleve.sigma_gauge_check(a.jmax - 1, qs=qs)
    res = Result({"jmax": a.jmax, "painleve2_zero": residual,
                  "gauge_amplitude": exact.fraction_str(gauge.amplitude),
                  "gauge_boundary_ok": gauge.boundary_ok, "gauge_passed": gauge.passed})
    res.failed = not (all(residual.values()) and gauge.passed)
    res.files.append(write_json(out / "pii.json", res.summary))
    return res


def cmd_algebra(a, out: Path) -> Result:
    rep = lie.lie_checks()
    res = Result({"checks": rep.checks, "casimir_scalar": rep.casimir_scalar, "passed": rep.passed})
    res.failed = not rep.passed
    res.files.append(write_json(out / "algebra.json", res.summary))
    return res


def cmd_anderson(a, out: Path) -> Result:
    rng = RngStream(a.seed, _STREAM["anderson"])
    rows, worst = [], []
    for k in range(a.trials):
        u = anderson.random_potential(a.n, rng.child(k), a.width)
        rep = anderson.anderson_duality_check(u, a.precision, a.dps)
        worst.append(rep.max_residual)
        rows.append([k, rep.max_residual, float(rep.energies.min()), float(rep.energies.max())])
    worst = np.array(worst)
    res = Result({"n": a.n, "potentials": a.trials, "width": a.width, "precision": a.precision,
                  "max_residual": float(worst.max()), "tolerance": a.tol})
    res.failed = bool(worst.max() >= a.tol)
    res.files.append(write_table(out / "residuals", ["potential", "max_residual", "e_min", "e_max"], rows, a.format))
    res.files.append(write_json(out / "anderson.json", res.summary))
    res.figures.append(plotting.residual_plot(out / "residuals.png", worst))
    return res


# ------------------------------------------------------------------ parser


def _common(p: argparse.ArgumentParser, n=None, t=None, trials=None):
    if n is not None:
        p.add_argument("--n", type=int, default=n, help="number of columns / sites")
    if t is not None:
        p.add_argument("--t", type=int, default=t, help="number of events")
    if trials is not None:
        p.add_argument("--trials", type=int, default=trials, help="independent runs")
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--out", default="results")
    p.add_argument("--config", default=None, help="flat key = value file; flags override it")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _bc(p):
    p.add_argument("--bc", choices=("free", "periodic"), default="free")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heapgrowth", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("deposit", help="ballistic deposition run")
    _common(p, n=64, t=4096, trials=1)
    _bc(p)
    p.set_defaults(handler=cmd_deposit)

    p = sub.add_parser("collapse", help="width series and scaling collapse")
    _common(p, trials=200)
    _bc(p)
    p.add_argument("--sizes", default="16,32,64,128")
    p.add_argument("--points", type=int, default=16)
    p.add_argument("--umin", type=float, default=0.01)
    p.add_argument("--umax", type=float, default=10.0)
    p.add_argument("--window-lo", type=float, default=0.01)
    p.add_argument("--window-hi", type=float, default=0.1)
    p.add_argument("--saturation-u", type=float, default=3.0)
    p.set_defaults(handler=cmd_collapse)

    p = sub.add_parser("gamma", help="h_max / mu_max ratio and its T -> inf limit")
    _common(p, n=10, t=10_000, trials=16)
    p.add_argument("--mode", choices=("coupled", "independent"), default="coupled")
    p.add_argument("--r0", type=float, default=matrix_growth.GAMMA_REFERENCE_SCALE)
    p.add_argument("--x0", type=float, default=matrix_growth.GAMMA_REFERENCE_SCALE)
    p.set_defaults(handler=cmd_gamma)

    p = sub.add_parser("lyapunov", help="Lyapunov exponent of the three-involution walk")
    _common(p, trials=1)
    p.add_argument("--steps", type=int, default=1_000_000)
    p.add_argument("--method", choices=("both", "montecarlo", "measure_integral"), default="both")
    p.add_argument("--bins", type=int, default=1024)
    p.set_defaults(handler=cmd_lyapunov)

    p = sub.add_parser("words", help="normal form and heap of a word")
    _common(p, n=8, t=32)
    p.add_argument("--word", default=None, help='signed letters, e.g. "3 6 1 -2"')
    p.set_defaults(handler=cmd_words)

    p = sub.add_parser("toda", help="integrate a Toda chain")
    _common(p, n=8)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--time", type=float, default=10.0)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--bc", choices=("open", "periodic"), default="periodic")
    p.set_defaults(handler=cmd_toda)

    p = sub.add_parser("lax", help="Lax matrix spectrum of a random periodic chain")
    _common(p, n=6)
    p.add_argument("--w", default="1")
    p.add_argument("--convention", choices=("symmetric", "skew"), default="symmetric")
    p.set_defaults(handler=cmd_lax)

    p = sub.add_parser("tau", help="Hankel tau functions of a sum of exponentials")
    _common(p)
    p.add_argument("--phi", default="1:1,2:1", help="exponent:coefficient pairs")
    p.add_argument("--jmax", type=int, default=4)
    p.set_defaults(handler=cmd_tau)

    p = sub.add_parser("yv", help="Yablonskii-Vorob'ev polynomials")
    _common(p)
    p.add_argument("--jmax", type=int, default=10)
    p.set_defaults(handler=cmd_yv)

    p = sub.add_parser("pii", help="exact Painleve II and gauge checks")
    _common(p)
    p.add_argument("--jmax", type=int, default=10)
    p.set_defaults(handler=cmd_pii)

    p = sub.add_parser("algebra", help="sl_2 / sl_3 relations and the Casimir")
    _common(p)
    p.set_defaults(handler=cmd_algebra)

    p = sub.add_parser("anderson", help="eigenvalues versus transfer-matrix boundary residual")
    _common(p, n=50, trials=100)
    p.add_argument("--width", type=float, default=2.0)
    p.add_argument("--precision", choices=("mp", "double"), default="mp")
    p.add_argument("--dps", type=int, default=32)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(handler=cmd_anderson)

    p = sub.add_parser("verify", help="re-run a manifest and compare digests")
    p.add_argument("manifest")
    p.set_defaults(handler=None)
    return parser


def read_config(path: Path) -> dict:
    """``key = value`` lines; ``#`` starts a comment; dashes in keys map to underscores."""
    cfg = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        cfg[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return cfg


def _parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            cfg = read_config(args.config)
        except OSError as exc:
            parser.error(f"cannot read config: {exc}")
        except UsageError as exc:
            parser.error(str(exc))
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        known = {act.dest for act in subparser._actions} - _NON_PARAMS
        unknown = sorted(set(cfg) - known)
        if unknown:
            parser.error(f"unknown config keys: {', '.join(unknown)}")
        # string defaults go through each option's type converter
        subparser.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def params_of(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NON_PARAMS}


def execute(command: str, params: dict, out: Path) -> Result:
    """Run one subcommand with an explicit parameter set (no argv parsing)."""
    parser = build_parser()
    sub = parser._subparsers._group_actions[0].choices[command]
    ns = sub.parse_args([])
    for k, v in params.items():
        setattr(ns, k, v)
    out.mkdir(parents=True, exist_ok=True)
    return sub.get_default("handler")(ns, out)


def _run(args: argparse.Namespace) -> int:
    out = Path(args.out)
    params = params_of(args)
    try:
        result = execute(args.command, params, out)
    except (NumericalFailure, InvariantViolation) as exc:
        diag = {"command": args.command, "error": type(exc).__name__, "message": str(exc),
                "diagnostics": getattr(exc, "diagnostics", None) or {}}
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "error.json", diag)
        sys.stderr.write(dumps_json(diag))
        return 1
    except (InputDomainError, UsageError) as exc:
        sys.stderr.write(f"heapgrowth {args.command}: error: {exc}\n")
        return 2
    manifest = RunManifest.record(args.command, params, args.seed, out, result.files, result.figures)
    manifest.save(out)
    sys.stdout.write(dumps_json(result.summary))
    return 1 if result.failed else 0


def _verify(path: str) -> int:
    mpath = Path(path)
    if mpath.is_dir():
        mpath = mpath / MANIFEST_NAME
    if not mpath.exists():
        sys.stderr.write(f"missing: {mpath}\n")
        return 1
    manifest = RunManifest.load(mpath)
    report = check_files(manifest, mpath.parent)
    with tempfile.TemporaryDirectory() as tmp:
        try:
            execute(manifest.command, {**manifest.params, "seed": manifest.seed}, Path(tmp))
        except (NumericalFailure, InvariantViolation, InputDomainError) as exc:
            sys.stderr.write(f"rerun failed: {exc}\n")
            return 1
        compare_rerun(manifest, Path(tmp), report)
    for line in report.lines():
        print(line)
    print("PASS" if report.passed else "FAIL")
    return 0 if report.passed else 1


def main(argv=None) -> int:
    try:
        args = _parse(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "verify":
        return _verify(args.manifest)
    return _run(args)


if __name__ == "__main__":
    sys.exit(main())
