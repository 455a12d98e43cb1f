"""Command-line front end: parse descriptor files, dispatch operations,
run batch suites, and emit JSON reports with CSV plot data and rendered
figures alongside.

Exit codes: 0 success, 2 precondition / parse error, 3 solver
non-convergence (an operation finished without a decisive bracket).
Reports are canonical JSON (sorted keys); identical argv + seed give a
byte-identical payload (wall time is stored outside the hashed payload).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import charact, coding, embed, extend, maps, szlenk
from .amalgam import (amalgamated_sum, gurarii_battery,
                      gurarii_extension_search, verify_pushout)
from .serialize import (code_from_dict, dumps_canonical, metric_from_dict,
                        spec_from_dict, spec_to_dict, tail_budget_from_dict,
                        tail_budget_to_dict)
from .spaces import eps_net, eval_norm

SCHEMA = "bwb-report/1"


class SolverUndecided(RuntimeError):
    """An operation completed without reaching a decisive answer."""


def _threads() -> int:
    env = os.environ.get("BWB_THREADS")
    if env:
        n = int(env)
        if n < 1:
            raise ValueError("BWB_THREADS must be a positive integer")
        return n
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# input parsing helpers


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ValueError(f"descriptor file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed descriptor {path}: line {exc.lineno} col {exc.colno}")


def _load_spec(path: str):
    return spec_from_dict(_load_json(path))


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in text.split(",")], dtype=float)
    except ValueError:
        raise ValueError(f"cannot parse vector {text!r} (expected comma-separated reals)")


def _parse_matrix(text: str) -> np.ndarray:
    if os.path.exists(text):
        data = _load_json(text)
        rows = data["matrix"] if isinstance(data, dict) else data
        return np.array(rows, dtype=float)
    try:
        return np.array([[float(x) for x in row.split(",")]
                         for row in text.split(";")], dtype=float)
    except ValueError:
        raise ValueError(f"cannot parse matrix {text!r} (rows ';'-separated, entries ','-separated)")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isinf(v):
            return "inf"
        if math.isnan(v):
            return None
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


# ---------------------------------------------------------------------------
# report emission


def _emit(args, results: dict, plot_rows=None, plot_header=None,
          figure_fn=None) -> None:
    """Write the JSON report (and CSV + figure next to it when data exists)."""
    payload = {
        "schema": SCHEMA,
        "command": args._command_echo,
        "config": args._config,
        "results": _jsonable(results),
    }
    payload["config_hash"] = hashlib.sha256(
        dumps_canonical({"command": payload["command"],
                         "config": payload["config"]}).encode()).hexdigest()
    text = dumps_canonical(payload)
    out = getattr(args, "out", None)
    report = dict(payload)
    report["wall_time_s"] = round(time.time() - args._t0, 6)
    if out:
        base = Path(out)
        base.parent.mkdir(parents=True, exist_ok=True)
        base.write_text(dumps_canonical(report) + "\n")
        if plot_rows:
            csv_path = base.with_suffix(".csv")
            with open(csv_path, "w", newline="") as fh:
                writer = csv.writer(fh)
                if plot_header:
                    writer.writerow(plot_header)
                writer.writerows(plot_rows)
            if figure_fn is not None:
                figure_fn(base.with_suffix(".png"))
    else:
        print(text)


def _scatter_figure(points: np.ndarray, title: str):
    def render(path):
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(5, 5))
        ax.plot(points[:, 0], points[:, 1], ".", markersize=3)
        ax.set_aspect("equal")
        ax.set_title(title)
        fig.savefig(path, dpi=120)
        plt.close(fig)

    return render


def _bar_figure(labels, values, title: str, ylabel: str):
    def render(path):
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(7, 4))
        ax.bar(range(len(labels)), values)
        ax.set_xticks(range(len(labels)))
        ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=7)
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)

    return render


def _line_figure(xs, ys, title: str, xlabel: str, ylabel: str):
    def render(path):
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(xs, ys, lw=1)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        fig.savefig(path, dpi=120)
        plt.close(fig)

    return render


# ---------------------------------------------------------------------------
# command handlers


def _cmd_space_eval(args):
    spec = _load_spec(args.space)
    v = _parse_vector(args.vector)
    _emit(args, {"value": eval_norm(spec, v)})
    return 0


def _cmd_space_net(args):
    spec = _load_spec(args.space)
    net = eps_net(spec, args.mesh)
    pts = np.asarray(net.points)
    fig = _scatter_figure(pts, f"sphere net, mesh {net.mesh:.4g}") if spec.dim == 2 else None
    _emit(args, {"mesh": net.mesh, "count": len(pts)},
          plot_rows=[[f"{x:.17g}" for x in p] for p in pts],
          plot_header=[f"x{i}" for i in range(spec.dim)],
          figure_fn=fig)
    return 0


def _cmd_map_norm(args):
    T = _parse_matrix(args.matrix)
    src, tgt = _load_spec(args.source), _load_spec(args.target)
    up, lo = maps.op_norm(T, src, tgt, mesh=args.mesh)
    _emit(args, {"upper": up, "lower": lo})
    return 0


def _cmd_map_bm(args):
    a, b = _load_spec(args.a), _load_spec(args.b)
    res = maps.banach_mazur(a, b, seed=args.seed, n_starts=args.starts)
    rows = [[i, f"{v:.17g}"] for i, v in enumerate(res.get("start_values", []))]
    fig = None
    if rows:
        fig = _line_figure(range(len(rows)), [float(r[1]) for r in rows],
                           "multistart upper bounds", "start", "upper")
    _emit(args, {"upper": res["upper"], "lower": res["lower"],
                 "witness": res["witness"], "starts": res["starts"]},
          plot_rows=rows or None, plot_header=["start", "upper"], figure_fn=fig)
    return 0


def _cmd_map_approx(args):
    src, tgt = _load_spec(args.source), _load_spec(args.target)
    X = _parse_matrix(args.tuple)
    res = maps.approximates(X, src, tgt, args.k, mesh=args.mesh)
    _emit(args, res)
    return 0 if res["verdict"] is not None else 3


def _cmd_map_bc(args):
    spec = _load_spec(args.space)
    basis = _parse_matrix(args.basis) if args.basis else np.eye(spec.dim)
    up, lo = maps.basis_constant(spec, basis, mesh=args.mesh)
    _emit(args, {"upper": up, "lower": lo})
    return 0


def _cmd_embed_search(args):
    E, F = _load_spec(args.source), _load_spec(args.target)
    res = embed.embed_search(E, F, args.eps, seed=args.seed, budget=args.budget)
    out = {"found": res["found"]}
    if res["found"]:
        cert = res["certificate"]
        out["distortion"] = cert.distortion
        out["map"] = cert.data
    else:
        out["best_distortion"] = res.get("best_distortion")
    _emit(args, out)
    return 0


def _cmd_embed_metric(args):
    metric = metric_from_dict(_load_json(args.metric))
    X = _load_spec(args.target)
    res = embed.bilipschitz_embed(metric, X, args.c, seed=args.seed)
    out = {"found": res["found"], "verdict": res["verdict"]}
    if res["found"]:
        out["distortion"] = res["certificate"].distortion
        out["points"] = res["certificate"].data
    elif "best_distortion" in res:
        out["best_distortion"] = res["best_distortion"]
    _emit(args, out)
    return 0


def _cmd_charact_pl(args):
    spec = _load_spec(args.space)
    res = charact.parallelogram_defect(spec, budget=args.budget, seed=args.seed)
    _emit(args, res)
    return 0


def _cmd_charact_clarkson(args):
    grid = np.linspace(-args.range, args.range, args.grid)
    rows, worst_sign = [], 0.0
    sign = -1.0 if args.p < 2 else 1.0
    for z in grid:
        for w in grid:
            gap = charact.clarkson_gap(z, w, args.p)
            rows.append([f"{z:.17g}", f"{w:.17g}", f"{gap:.17g}"])
            worst_sign = min(worst_sign, sign * gap)
    diag = [charact.clarkson_gap(z, z, args.p) for z in grid]
    fig = _line_figure(grid, diag, f"gap on the diagonal, p={args.p}", "z", "gap")
    _emit(args, {"p": args.p, "grid": args.grid, "range": args.range,
                 "worst_signed_gap": worst_sign,
                 "sign_ok": bool(worst_sign >= -1e-10)},
          plot_rows=rows, plot_header=["z", "w", "gap"], figure_fn=fig)
    return 0


def _cmd_charact_lpsplit(args):
    x = _parse_vector(args.vector)
    weights = _parse_vector(args.weights) if args.weights else np.ones(len(x))
    res = charact.lp_split(x, weights, args.p, args.n)
    _emit(args, {"residual": res.residual, "pieces": res.pieces,
                 "piece_norms": res.piece_norms})
    return 0


def _cmd_charact_lpobstruct(args):
    res = charact.lp_atom_obstruction_check(args.p, args.eps, seed=args.seed,
                                            budget=args.budget)
    _emit(args, res)
    return 0


def _cmd_charact_qsl(args):
    M = _parse_matrix(args.matrix)
    vectors = _parse_matrix(args.vectors)
    spec = _load_spec(args.space)
    res = charact.qsl_check(M, vectors, spec, args.p, seed=args.seed)
    _emit(args, res)
    return 0


def _cmd_szlenk_derive(args):
    K = tail_budget_from_dict(_load_json(args.model))
    D = szlenk.szlenk_derivative(K, Fraction(args.eps).limit_denominator(10 ** 9))
    _emit(args, {"derived": tail_budget_to_dict(D), "is_empty": D.is_empty()})
    return 0


def _cmd_szlenk_index(args):
    K = tail_budget_from_dict(_load_json(args.model))
    idx = szlenk.szlenk_index_at(K, Fraction(args.eps).limit_denominator(10 ** 9))
    _emit(args, {"index": idx})
    return 0


def _cmd_szlenk_summable(args):
    K = tail_budget_from_dict(_load_json(args.model))
    res = szlenk.summable_check(K, grid_pow=args.grid_pow)
    _emit(args, res)
    return 0


def _cmd_szlenk_c0(args):
    K = tail_budget_from_dict(_load_json(args.model))
    res = szlenk.c0_predicate(K, Fraction(args.eps).limit_denominator(10 ** 9))
    _emit(args, res)
    return 0


def _cmd_code_eval(args):
    code = code_from_dict(_load_json(args.code))
    v = _parse_vector(args.vector)
    _emit(args, {"value": coding.pseudonorm_eval(code, v)})
    return 0


def _cmd_code_reduce(args):
    code = code_from_dict(_load_json(args.code))
    res = coding.reduce_to_B(code)
    _emit(args, {"selection": res["selection"],
                 "truncation_incomplete": res["truncation_incomplete"]})
    return 0


def _cmd_code_rho(args):
    data = _load_json(args.input)
    code = coding.rho_of_K(data["points"], data["tables"])
    from .serialize import code_to_dict
    _emit(args, {"code": code_to_dict(code)})
    return 0


def _cmd_code_sigma(args):
    data = _load_json(args.input)
    code = coding.sigma_of_lambda(data["weights"], data["tables"], float(data["p"]))
    from .serialize import code_to_dict
    _emit(args, {"code": code_to_dict(code)})
    return 0


def _cmd_code_rationalize(args):
    code = code_from_dict(_load_json(args.code))
    probes = _parse_matrix(args.probes)
    res = coding.rationalize_norm(code, probes, args.eps)
    _emit(args, {"values": res["values"], "max_probe_error": res["max_probe_error"],
                 "eps": res["eps"], "m": res["m"]})
    return 0


def _cmd_extend_run(args):
    data = _load_json(args.problem)
    problem = extend.ExtensionProblem(
        n=int(data["n"]), nu=spec_from_dict(data["nu"]),
        zstar=np.array(data["zstar"], dtype=float), eta=float(data["eta"]),
        kappa=[float(k) for k in data.get("kappa", [])])
    mu = spec_from_dict(data["mu"]) if "mu" in data else problem.nu
    table = extend.gamma_extend(problem, mu)
    res2 = [extend.check_cond2(problem, mu, table, k)
            for k in range(1, problem.n + 1)]
    lam = spec_from_dict(data["lambda"]) if "lambda" in data else mu
    table_lam = extend.gamma_extend(problem, lam) if "lambda" in data else table
    res3 = [extend.check_cond3(problem, mu, lam, table, table_lam, k)
            for k in range(1, problem.n + 1)]
    _emit(args, {"gamma": table.values, "u": table.u_values, "v": table.v_values,
                 "pq": table.pq, "residual_cond1": table.residual_cond1,
                 "residual_cond2": res2, "residual_cond3": res3})
    return 0


def _cmd_amalgam_sum(args):
    G, Y = _load_spec(args.g_space), _load_spec(args.y_space)
    XG, XY = _parse_matrix(args.x_in_g), _parse_matrix(args.x_in_y)
    po = amalgamated_sum(G, Y, XG, XY)
    rep = verify_pushout(po, None, seed=args.seed, n_probes=args.probes)
    _emit(args, rep)
    return 0


def _cmd_amalgam_probe(args):
    X = _load_spec(args.x_space)
    B = _load_spec(args.b_space)
    A = _parse_matrix(args.a_basis)
    g = _parse_matrix(args.g_matrix)
    res = gurarii_extension_search(X, A, B, g, args.eps, seed=args.seed)
    _emit(args, {"found": res["found"], "distortion": res["distortion"],
                 "commutation": res["commutation"], "map": res["map"],
                 "eps": args.eps})
    return 0


def _cmd_amalgam_battery(args):
    X = _load_spec(args.x_space)
    res = gurarii_battery(X, args.eps, seed=args.seed)
    _emit(args, res)
    return 0


# ---------------------------------------------------------------------------
# batch suite


def _suite_tasks(seed: int):
    from .spaces import DiscreteLp, Lp, Pullback

    def t_clarkson():
        for p in (1.0, 1.5, 3.0, 4.0):
            sign = -1.0 if p < 2 else 1.0
            for z in np.linspace(-2, 2, 21):
                for w in np.linspace(-2, 2, 21):
                    if sign * charact.clarkson_gap(z, w, p) < -1e-10:
                        return False
        return True

    def t_parallelogram():
        if charact.parallelogram_defect(Lp(2, 3), seed=seed)["max_residual"] > 1e-12:
            return False
        return abs(charact.parallelogram_residual(Lp(1, 2), [1, 0], [0, 1]) - 4) < 1e-12

    def t_szlenk():
        B = szlenk.TailBudgetSet.unit_ball()
        for eps in (Fraction(1, 8), Fraction(1, 4), Fraction(1, 2)):
            if not szlenk.c0_predicate(B, eps)["holds"]:
                return False
        return szlenk.szlenk_index_at(B, 1) == 3

    def t_lpsplit():
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(32)
        res = charact.lp_split(x / np.linalg.norm(x, 1), np.ones(32), 1.0, 2)
        return res.residual <= 1e-12

    def t_serialize():
        from .serialize import spec_dumps, spec_loads
        s = DiscreteLp(2.0, (1.0, 0.5, 2.0))
        return spec_dumps(spec_loads(spec_dumps(s))) == spec_dumps(s)

    def t_bm():
        res = maps.banach_mazur(Lp(1, 2), Lp(math.inf, 2), seed=seed, n_starts=8)
        return res["upper"] <= 1 + 1e-6

    def t_pushout():
        po = amalgamated_sum(Lp(math.inf, 2), Lp(1, 2), [[1.0, 1.0]], [[0.5, 0.5]])
        return verify_pushout(po, None, seed=seed, n_probes=5)["passed"]

    def t_reduce():
        code = coding.PseudonormCode(Lp(1, 2), ((1.0, 0.0), (0.0, 1.0), (1.0, 1.0)))
        return coding.reduce_to_B(code)["selection"] == [1, 2]

    def t_embed_identity():
        res = embed.embed_search(Lp(1, 2), Lp(1, 2), 1e-6, seed=seed)
        return res["found"] and res["certificate"].distortion <= 1 + 1e-9

    def t_coefficient():
        basis = np.eye(2)
        return maps.coefficient_l1_lower(Lp(1, 2), basis) > 0

    return [("clarkson_signs", t_clarkson), ("parallelogram", t_parallelogram),
            ("szlenk_identities", t_szlenk), ("lp_split", t_lpsplit),
            ("serialization", t_serialize), ("banach_mazur", t_bm),
            ("pushout", t_pushout), ("code_reduce", t_reduce),
            ("embed_identity", t_embed_identity),
            ("coefficient_norm", t_coefficient)]


def _cmd_suite(args):
    tasks = _suite_tasks(args.seed)

    def timed(fn):
        t0 = time.time()
        ok = bool(fn())
        return ok, time.time() - t0

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        futures = [(name, pool.submit(timed, fn)) for name, fn in tasks]
        results = [(name, *f.result()) for name, f in futures]
    rows = [(name, int(ok), round(secs, 4)) for name, ok, secs in results]
    names = [r[0] for r in rows]
    secs = [r[2] for r in rows]
    _emit(args, {"tasks": {name: ok for name, ok, _ in results},
                 "passed": sum(ok for _, ok, _ in results),
                 "total": len(results),
                 "all_ok": all(ok for _, ok, _ in results)},
          plot_rows=rows, plot_header=["task", "ok", "seconds"],
          figure_fn=_bar_figure(names, secs, "self-check task wall time",
                                "seconds"))
    return 0 if all(ok for _, ok, _ in results) else 3


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bwb",
                                 description="finite-dimensional normed-space workbench")
    top = ap.add_subparsers(dest="group", required=True)

    def sub(parent, name, fn, seeded=False):
        p = parent.add_parser(name)
        p.set_defaults(_fn=fn, _seeded=seeded)
        p.add_argument("--out", help="report path (JSON; CSV/PNG written alongside)")
        if seeded:
            p.add_argument("--seed", type=int, required=True,
                           help="seed (mandatory for randomized commands)")
        return p

    g = top.add_parser("space").add_subparsers(dest="op", required=True)
    p = sub(g, "eval", _cmd_space_eval)
    p.add_argument("--space", required=True)
    p.add_argument("--vector", required=True)
    p = sub(g, "net", _cmd_space_net)
    p.add_argument("--space", required=True)
    p.add_argument("--mesh", type=float, default=0.1)

    g = top.add_parser("map").add_subparsers(dest="op", required=True)
    p = sub(g, "norm", _cmd_map_norm)
    p.add_argument("--matrix", required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--mesh", type=float, default=0.01)
    p = sub(g, "bm", _cmd_map_bm, seeded=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--starts", type=int, default=64)
    p = sub(g, "approx", _cmd_map_approx)
    p.add_argument("--tuple", required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--mesh", type=float, default=0.005)
    p = sub(g, "bc", _cmd_map_bc)
    p.add_argument("--space", required=True)
    p.add_argument("--basis")
    p.add_argument("--mesh", type=float, default=0.01)

    g = top.add_parser("embed").add_subparsers(dest="op", required=True)
    p = sub(g, "search", _cmd_embed_search, seeded=True)
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--budget", type=int, default=10 ** 5)
    p = sub(g, "metric", _cmd_embed_metric, seeded=True)
    p.add_argument("--metric", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--c", type=float, required=True)

    g = top.add_parser("charact").add_subparsers(dest="op", required=True)
    p = sub(g, "pl", _cmd_charact_pl, seeded=True)
    p.add_argument("--space", required=True)
    p.add_argument("--budget", type=int, default=200)
    p = sub(g, "clarkson", _cmd_charact_clarkson)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--range", type=float, default=2.0)
    p = sub(g, "lpsplit", _cmd_charact_lpsplit)
    p.add_argument("--vector", required=True)
    p.add_argument("--weights")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p = sub(g, "lpobstruct", _cmd_charact_lpobstruct, seeded=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--budget", type=int, default=2000)
    p = sub(g, "qsl", _cmd_charact_qsl, seeded=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--vectors", required=True)
    p.add_argument("--space", required=True)
    p.add_argument("--p", type=float, required=True)

    g = top.add_parser("szlenk").add_subparsers(dest="op", required=True)
    p = sub(g, "derive", _cmd_szlenk_derive)
    p.add_argument("--model", required=True)
    p.add_argument("--eps", type=float, required=True)
    p = sub(g, "index", _cmd_szlenk_index)
    p.add_argument("--model", required=True)
    p.add_argument("--eps", type=float, required=True)
    p = sub(g, "summable", _cmd_szlenk_summable)
    p.add_argument("--model", required=True)
    p.add_argument("--grid-pow", type=int, default=10)
    p = sub(g, "c0", _cmd_szlenk_c0)
    p.add_argument("--model", required=True)
    p.add_argument("--eps", type=float, required=True)

    g = top.add_parser("code").add_subparsers(dest="op", required=True)
    p = sub(g, "eval", _cmd_code_eval)
    p.add_argument("--code", required=True)
    p.add_argument("--vector", required=True)
    p = sub(g, "reduce", _cmd_code_reduce)
    p.add_argument("--code", required=True)
    p = sub(g, "rho", _cmd_code_rho)
    p.add_argument("--input", required=True)
    p = sub(g, "sigma", _cmd_code_sigma)
    p.add_argument("--input", required=True)
    p = sub(g, "rationalize", _cmd_code_rationalize)
    p.add_argument("--code", required=True)
    p.add_argument("--probes", required=True)
    p.add_argument("--eps", type=float, required=True)

    g = top.add_parser("extend").add_subparsers(dest="op", required=True)
    p = sub(g, "run", _cmd_extend_run)
    p.add_argument("--problem", required=True)

    g = top.add_parser("amalgam").add_subparsers(dest="op", required=True)
    p = sub(g, "sum", _cmd_amalgam_sum, seeded=True)
    p.add_argument("--g-space", required=True)
    p.add_argument("--y-space", required=True)
    p.add_argument("--x-in-g", required=True)
    p.add_argument("--x-in-y", required=True)
    p.add_argument("--probes", type=int, default=20)
    p = sub(g, "probe", _cmd_amalgam_probe, seeded=True)
    p.add_argument("--x-space", required=True)
    p.add_argument("--a-basis", required=True)
    p.add_argument("--b-space", required=True)
    p.add_argument("--g-matrix", required=True)
    p.add_argument("--eps", type=float, required=True)
    p = sub(g, "battery", _cmd_amalgam_battery, seeded=True)
    p.add_argument("--x-space", required=True)
    p.add_argument("--eps", type=float, required=True)

    p = sub(top, "suite", _cmd_suite, seeded=True)
    p.add_argument("--all", action="store_true", default=True)

    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    args._t0 = time.time()
    args._command_echo = " ".join(["bwb"] + argv)
    skip = {"_fn", "_seeded", "group", "op", "out"}
    args._config = {k: _jsonable(v) for k, v in sorted(vars(args).items())
                    if not k.startswith("_t") and k not in skip
                    and not k.startswith("_c")}
    try:
        return args._fn(args)
    except SolverUndecided as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main(argv=sys.argv[1:]))
