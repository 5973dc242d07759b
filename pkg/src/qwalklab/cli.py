"""Command surface: reproducible experiments emitting CSV/JSON.

Every subcommand writes its outputs plus a manifest.json into the
--out directory; `qwalklab replay manifest.json --out DIR` re-runs the
recorded subcommand and reproduces the outputs byte for byte (the
manifest stores only relative paths and no timestamps).  Decimal
renderings are fixed at 12 significant digits and exact rationals are
printed alongside.  Errors go to stderr with an `error:` prefix and a
nonzero exit code.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import __version__, cayley, graphlab, qcalc, sector

MAX_D_DEFAULT = 10


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _rat(fr: Fraction) -> str:
    fr = Fraction(fr)
    return str(fr.numerator) if fr.denominator == 1 else f"{fr.numerator}/{fr.denominator}"


def _rat_json(fr: Fraction) -> dict:
    return {"rational": _rat(fr), "decimal": _fmt(float(fr))}


def _parse_rational(text: str) -> Fraction:
    return Fraction(text)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path: Path, rows: list[tuple[str, str]], header: tuple[str, str] = ("key", "value")) -> None:
    lines = [",".join(header)]
    lines.extend(f"{k},{v}" for k, v in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_manifest(out_dir: Path, subcommand: str, params: dict, outputs: list[str]) -> None:
    manifest = {
        "tool": "qwalklab",
        "version": __version__,
        "subcommand": subcommand,
        "seed": params.get("seed"),
        "parameters": params,
        "outputs": sorted(outputs),
    }
    _write_json(out_dir / "manifest.json", manifest)


def _poly_json(p) -> dict:
    return {"coeffs": list(p.coeffs), "text": str(p)}


# ---------------------------------------------------------------------------
# constants


def run_constants(params: dict, out_dir: Path) -> list[str]:
    d = params["d"]
    max_d = params.get("max_d", MAX_D_DEFAULT)
    if not 2 <= d <= max_d:
        raise ValueError(f"d must lie in 2..{max_d}")
    doc: dict = {
        "d": d,
        "drift_polynomial": _poly_json(qcalc.drift_polynomial(d)),
        "degree_polynomial": _poly_json(qcalc.vertex_degree(d)),
    }
    print(f"{qcalc.drift_polynomial(d)} | {qcalc.vertex_degree(d)}")
    if params.get("q") is not None:
        q = Fraction(params["q"])
        c = qcalc.drift_constants(d, q)
        sigma = math.sqrt(float(c.variance))
        doc["at_q"] = {
            "q": _rat(q),
            "degree": _rat_json(c.degree),
            "drift": _rat_json(c.drift),
            "variance": _rat_json(c.variance),
            "sigma_decimal": _fmt(sigma),
            "cutoff_constant": _rat_json(c.cutoff_constant),
            "c_constant_decimal": _fmt(c.c_constant),
            "prime_power": c.prime_power,
        }
        print(
            f"E_{d} = {_rat(c.drift)} ({_fmt(float(c.drift))})  "
            f"sigma^2 = {_rat(c.variance)}  C = {_rat(c.cutoff_constant)} "
            f"({_fmt(float(c.cutoff_constant))})  c = {_fmt(c.c_constant)}"
        )
    if params.get("table"):
        doc["table"] = [
            {
                "d": dd,
                "drift_polynomial": _poly_json(qcalc.drift_polynomial(dd)),
                "degree_polynomial": _poly_json(qcalc.vertex_degree(dd)),
            }
            for dd in range(2, 8)
        ]
        for row in doc["table"]:
            print(f"d={row['d']}: {row['drift_polynomial']['text']} | {row['degree_polynomial']['text']}")
    _write_json(out_dir / "constants.json", doc)
    return ["constants.json"]


# ---------------------------------------------------------------------------
# sector-sim


def run_sector_sim(params: dict, out_dir: Path) -> list[str]:
    d, q = params["d"], Fraction(params["q"])
    stats = sector.simulate(
        d, q, params["horizon"], params["trajectories"], params["seed"],
        backend=params.get("backend"),
    )
    consts = qcalc.drift_constants(d, q)
    rows: list[tuple[str, str]] = [
        ("d", str(d)),
        ("q", _rat(q)),
        ("horizon", str(params["horizon"])),
        ("trajectories", str(params["trajectories"])),
        ("seed", str(params["seed"])),
        ("backend", stats.backend),
        ("exact_drift", _rat(consts.drift)),
        ("exact_variance", _rat(consts.variance)),
    ]
    if stats.interior_step_count():
        rows += [
            ("interior_steps", str(stats.interior_step_count())),
            ("interior_mean", _fmt(stats.interior_mean())),
            ("interior_stderr", _fmt(stats.interior_stderr())),
        ]
    if params["horizon"] > 0:
        xi_mean, xi_var = sector.clt_summary(stats, consts)
        rows += [("xi_mean", _fmt(xi_mean)), ("xi_variance", _fmt(xi_var))]
    half = params["horizon"] // 2
    frac = float((stats.last_boundary_step < half).mean())
    rows += [
        ("boundary_visits_mean", _fmt(float(stats.boundary_visits.mean()))),
        ("frac_last_boundary_before_half", _fmt(frac)),
    ]
    for r, cnt in sorted(stats.rho_histogram().items()):
        rows.append((f"rho_hist[{r}]", str(cnt)))
    for r, cnt in sorted(stats.interior_increment_histogram.items()):
        rows.append((f"interior_increment[{r}]", str(cnt)))
    if params.get("n") is not None:
        tail = sector.tail_experiment(
            d, q, params["n"], params["s"], params["trajectories"],
            params["seed"], backend=params.get("backend"),
        )
        rows += [
            ("tail_t0_step", str(tail.t0_step)),
            ("tail_t1_step", str(tail.t1_step)),
            ("tail_r0", _fmt(tail.schedule.r_0)),
            ("tail_r1", _fmt(tail.schedule.r_1)),
            ("tail_p_exceed_r0_at_t0", _fmt(tail.p_exceed_r0_at_t0)),
            ("tail_p_below_r1_at_t1", _fmt(tail.p_below_r1_at_t1)),
            ("tail_normal_reference", _fmt(tail.normal_tail_reference)),
            ("tail_pre_asymptotic", str(tail.pre_asymptotic).lower()),
        ]
    _write_csv(out_dir / "walkstats.csv", rows)
    print(f"simulated {params['trajectories']} x {params['horizon']} steps (backend {stats.backend})")
    return ["walkstats.csv"]


# ---------------------------------------------------------------------------
# sector-evolve


def run_sector_evolve(params: dict, out_dir: Path) -> list[str]:
    d, q = params["d"], Fraction(params["q"])
    start = sector.SectorPoint.origin(d)
    if params.get("start"):
        start = sector.SectorPoint.from_x(tuple(int(v) for v in params["start"].split(";")))
    res = sector.evolve_exact(d, q, start, params["horizon"], r_max=params.get("r_max"))
    rows = [
        ("d", str(d)),
        ("q", _rat(q)),
        ("horizon", str(params["horizon"])),
        ("r_max", "" if params.get("r_max") is None else str(params["r_max"])),
        ("truncated_mass", _rat(res.truncated_mass)),
    ]
    for x, mass in sorted(res.distribution.items()):
        key = "x=" + ";".join(str(v) for v in x)
        rows.append((key, _rat(mass)))
    _write_csv(out_dir / "evolve.csv", rows)
    print(f"evolved to horizon {params['horizon']}: {len(res.distribution)} states")
    return ["evolve.csv"]


# ---------------------------------------------------------------------------
# analyze


def _spectral_json(rep: graphlab.SpectralReport) -> dict:
    eig = rep.eigenvalues
    if eig.dtype.kind == "c":
        values = [[_fmt(z.real), _fmt(z.imag)] for z in sorted(eig, key=lambda z: (abs(z), z.real))]
    else:
        values = [_fmt(v) for v in sorted(eig.tolist())]
    return {
        "n": rep.n,
        "k": rep.k,
        "eigenvalues": values,
        "trivial_count": rep.trivial_count,
        "lambda_nontrivial": _fmt(rep.lambda_nontrivial),
        "bound": _fmt(rep.bound),
        "is_ramanujan": rep.is_ramanujan,
        "method": rep.method,
    }


def run_analyze(params: dict, out_dir: Path) -> list[str]:
    graph_files = params["graphs"]
    eps = [float(e) for e in params.get("eps", "0.25").split(",")]
    outputs = []
    report: dict = {"graphs": []}
    for gi, gf in enumerate(graph_files):
        g = graphlab.load_graph(gf)
        if params.get("coloring") and not g.directed:
            g.coloring = graphlab.load_coloring(params["coloring"], g.n)
            g.validate()
        prof = graphlab.tv_profile(
            g, params.get("v0", 0), params["horizon"], eps=eps,
            lazy=params.get("lazy", False), worst=params.get("worst", False),
        )
        name = "profile.csv" if len(graph_files) == 1 else f"profile_{gi:03d}.csv"
        lines = ["t,tv_total,tv_trivial,tv_orth"]
        for t in prof.times:
            lines.append(
                f"{t},{_fmt(prof.tv_total[t])},{_fmt(prof.tv_trivial[t])},{_fmt(prof.tv_orth[t])}"
            )
        (out_dir / name).write_text("\n".join(lines) + "\n", encoding="utf-8")
        outputs.append(name)
        entry: dict = {
            "file": os.path.basename(str(gf)),
            "n": g.n,
            "k": g.k,
            "mode": prof.mode,
            "lazy": prof.lazy,
            "t_mix": {str(e): prof.t_mix[e] for e in eps},
        }
        if not params.get("no_spectral") and g.n <= graphlab._dense_cap():
            entry["spectral"] = _spectral_json(graphlab.spectral_report(g))
            print(f"{entry['file']}: n={g.n} k={g.k} ramanujan={entry['spectral']['is_ramanujan']}")
        else:
            print(f"{entry['file']}: n={g.n} k={g.k}")
        for e in eps:
            print(f"  t_mix({e}) = {prof.t_mix[e]}")
        report["graphs"].append(entry)
    if len(graph_files) > 1:
        family = []
        for gf in graph_files:
            g = graphlab.load_graph(gf)
            family.append((g, params.get("v0", 0)))
        ratios = graphlab.cutoff_ratio(family, eps[0], lazy=params.get("lazy", False))
        report["cutoff_ratios"] = [_fmt(r) for r in ratios]
        print("cutoff ratios:", " ".join(_fmt(r) for r in ratios))
    _write_json(out_dir / "report.json", report)
    outputs.append("report.json")
    return outputs


# ---------------------------------------------------------------------------
# cayley


def run_cayley(params: dict, out_dir: Path) -> list[str]:
    gens = cayley.load_generators(params["gens"])
    closure = cayley.cayley_graph(
        gens, cap=params.get("cap", 1_000_000),
        auto_symmetrize=params.get("auto_symmetrize", False),
    )
    outputs = []
    doc = {
        "order": closure.order,
        "degree": closure.graph.k,
        "in_psl": closure.in_psl,
        "d": gens.group.d,
        "q": gens.group.field.q,
    }
    if params.get("emit"):
        graphlab.save_graph(closure.graph, out_dir / params["emit"])
        outputs.append(params["emit"])
        doc["graph_file"] = params["emit"]
    _write_json(out_dir / "cayley.json", doc)
    outputs.append("cayley.json")
    print(f"group order {closure.order}, degree {closure.graph.k}, in_psl={closure.in_psl}")
    return outputs


# ---------------------------------------------------------------------------
# predict


def run_predict(params: dict, out_dir: Path) -> list[str]:
    d, q = params["d"], Fraction(params["q"])
    sched = qcalc.mixing_schedule(d, q, params["n"], params["s"])
    doc = {
        "d": d,
        "q": _rat(q),
        "n": params["n"],
        "s": sched.s,
        "cutoff_constant": _rat_json(sched.cutoff_constant),
        "t_cutoff": _fmt(sched.t_cutoff),
        "t_0": _fmt(sched.t_0),
        "t_1": _fmt(sched.t_1),
        "r_0": _fmt(sched.r_0),
        "r_1": _fmt(sched.r_1),
        "window": _fmt(sched.window),
        "pre_asymptotic": sched.pre_asymptotic,
    }
    if sched.section3 is not None:
        s3 = dict(sched.section3)
        s3["coefficient"] = _rat_json(s3["coefficient"])
        for key in ("t_cutoff", "t_0", "t_1", "r_0", "r_1", "window", "c_q"):
            s3[key] = _fmt(s3[key])
        doc["section3"] = s3
    if sched.srw_graph is not None:
        s2 = dict(sched.srw_graph)
        s2["k"] = _rat(s2["k"])
        s2["coefficient"] = _rat_json(s2["coefficient"])
        s2["log_base"] = _rat(s2["log_base"])
        s2["t_cutoff"] = _fmt(s2["t_cutoff"])
        doc["srw_graph"] = s2
    _write_json(out_dir / "schedule.json", doc)
    print(
        f"cutoff at {_fmt(sched.t_cutoff)} steps, window {_fmt(sched.window)}, "
        f"t0={_fmt(sched.t_0)} t1={_fmt(sched.t_1)}"
        + (" [pre-asymptotic]" if sched.pre_asymptotic else "")
    )
    return ["schedule.json"]


# ---------------------------------------------------------------------------
# dispatch and replay

_RUNNERS = {
    "constants": run_constants,
    "sector-sim": run_sector_sim,
    "sector-evolve": run_sector_evolve,
    "analyze": run_analyze,
    "cayley": run_cayley,
    "predict": run_predict,
}


def _execute(subcommand: str, params: dict, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = _RUNNERS[subcommand](params, out_dir)
    _write_manifest(out_dir, subcommand, params, outputs)


def run_replay(manifest_path: str, out_dir: Path) -> None:
    with open(manifest_path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    sub = manifest["subcommand"]
    if sub not in _RUNNERS:
        raise ValueError(f"manifest names unknown subcommand {sub!r}")
    _execute(sub, manifest["parameters"], out_dir)


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qwalklab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"qwalklab {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True)

    c = sub.add_parser("constants", help="drift/degree polynomials and exact constants")
    c.add_argument("d", type=int)
    c.add_argument("--q", type=str, default=None, help="evaluate constants at this rational q")
    c.add_argument("--table", action="store_true", help="print rows d=2..7")
    c.add_argument("--max-d", type=int, default=MAX_D_DEFAULT)
    c.add_argument("--out", type=str, default=".")

    s = sub.add_parser("sector-sim", help="Monte Carlo sector walk")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--q", type=str, required=True)
    s.add_argument("--horizon", type=int, required=True)
    s.add_argument("--trajectories", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--n", type=int, default=None, help="run the schedule tail experiment for this n")
    s.add_argument("--s", type=float, default=0.0)
    s.add_argument("--backend", choices=("cython", "python"), default=None)
    s.add_argument("--out", type=str, default=".")

    e = sub.add_parser("sector-evolve", help="exact distribution evolution")
    e.add_argument("--d", type=int, required=True)
    e.add_argument("--q", type=str, required=True)
    e.add_argument("--horizon", type=int, required=True)
    e.add_argument("--r-max", type=int, default=None)
    e.add_argument("--start", type=str, default=None, help="difference vector, e.g. '1;0'")
    e.add_argument("--out", type=str, default=".")

    a = sub.add_parser("analyze", help="TV mixing profile and spectral report")
    a.add_argument("--graph", action="append", required=True, dest="graphs")
    a.add_argument("--coloring", type=str, default=None)
    a.add_argument("--v0", type=int, default=0)
    a.add_argument("--worst", action="store_true", help="worst starting vertex (costly)")
    a.add_argument("--horizon", type=int, required=True)
    a.add_argument("--eps", type=str, default="0.25")
    a.add_argument("--lazy", action="store_true")
    a.add_argument("--no-spectral", action="store_true")
    a.add_argument("--out", type=str, default=".")

    y = sub.add_parser("cayley", help="BFS closure of a generator file")
    y.add_argument("--gens", type=str, required=True)
    y.add_argument("--cap", type=int, default=1_000_000)
    y.add_argument("--auto-symmetrize", action="store_true")
    y.add_argument("--emit", type=str, default=None, help="write the Cayley graph to this file")
    y.add_argument("--out", type=str, default=".")

    d = sub.add_parser("predict", help="cutoff schedule for given d, q, n, s")
    d.add_argument("--d", type=int, required=True)
    d.add_argument("--q", type=str, required=True)
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--s", type=float, default=0.0)
    d.add_argument("--out", type=str, default=".")

    r = sub.add_parser("replay", help="re-run a manifest, reproducing outputs byte for byte")
    r.add_argument("manifest", type=str)
    r.add_argument("--out", type=str, default=".")
    return p


def _namespace_params(args: argparse.Namespace) -> dict:
    drop = {"subcommand", "out"}
    params = {k: v for k, v in vars(args).items() if k not in drop and v is not None}
    # normalize flags so manifests replay identically
    for key in ("table", "worst", "lazy", "no_spectral", "auto_symmetrize"):
        if key in vars(args):
            params[key] = bool(vars(args).get(key))
    return params


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.subcommand == "replay":
            run_replay(args.manifest, Path(args.out))
        else:
            _execute(args.subcommand, _namespace_params(args), Path(args.out))
    except (ValueError, RuntimeError, OSError, graphlab.GraphFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
