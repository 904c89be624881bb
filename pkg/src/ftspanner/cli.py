"""ftspan: build, verify and benchmark fault-tolerant spanners from the shell.

Exit codes: 0 success, 2 bad configuration or input, 3 construction invariant
breach, 4 verification failure.
"""
from __future__ import annotations

import csv
import logging
import os
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import verify as V
from .construct import ConstructionError, build_spanner
from .instances import FAMILIES, make_instance
from .io import read_edges, write_edges, write_json
from .metric import MetricError, load_points, normalize

EXIT_CONFIG = 2
EXIT_CONSTRUCTION = 3
EXIT_VERIFY = 4

BENCH_COLUMNS = ["n", "k", "max_degree", "edges", "lightness", "hop_diameter", "build_seconds"]

log = logging.getLogger("ftspanner")


def _setup_logging() -> None:
    level = os.environ.get("FTSPAN_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def _fail(code: int, msg: str):
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


def _load(input_path, matrix_path):
    if bool(input_path) == bool(matrix_path):
        _fail(EXIT_CONFIG, "give exactly one of --input or --matrix")
    try:
        if input_path:
            m = load_points(input_path, "euclidean")
        else:
            m = load_points(matrix_path, "matrix")
    except (OSError, MetricError) as exc:
        _fail(EXIT_CONFIG, str(exc))
    return normalize(m)


def _check_k(k: int, n: int) -> None:
    if k < 0:
        _fail(EXIT_CONFIG, "k must be >= 0")
    if n >= 2 and k > n - 2:
        _fail(EXIT_CONFIG, f"k must be ≤ n−2 (got k={k}, n={n})")


def _check_eps(eps: float) -> None:
    if not eps > 0:
        _fail(EXIT_CONFIG, "eps must be > 0")


def _parse_faults(value: str):
    if value in ("exhaustive", "targeted"):
        return value, 0
    if value.startswith("random:"):
        try:
            trials = int(value.split(":", 1)[1])
        except ValueError:
            trials = -1
        if trials > 0:
            return "random", trials
    _fail(EXIT_CONFIG, f"bad --faults value {value!r} (exhaustive, random:N or targeted)")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        _fail(EXIT_CONFIG, f"expected comma-separated integers, got {text!r}")


input_opt = click.option("--input", "input_path", type=click.Path(), help="points file, one point per line")
matrix_opt = click.option("--matrix", "matrix_path", type=click.Path(), help="distance matrix file (first line n)")
eps_opt = click.option("--eps", type=float, default=0.5, show_default=True)
k_opt = click.option("--k", type=int, default=1, show_default=True)
gamma_opt = click.option("--gamma", type=float, default=None, help="override the cross-edge parameter")
seed_opt = click.option("--seed", type=int, default=0, show_default=True)


@click.group()
def main():
    """Fault-tolerant (1+eps)-spanners for finite metrics."""
    _setup_logging()


@main.command()
@input_opt
@matrix_opt
@eps_opt
@k_opt
@gamma_opt
@click.option("--mode", type=click.Choice(["clique-only", "matching", "full"]), default="full", show_default=True)
@seed_opt
@click.option("--out", type=click.Path(), default="edges.jsonl", show_default=True)
@click.option("--stats", type=click.Path(), default="stats.json", show_default=True)
def build(input_path, matrix_path, eps, k, gamma, mode, seed, out, stats):
    """Build a spanner and write its edges and a stats report."""
    _check_eps(eps)
    m = _load(input_path, matrix_path)
    _check_k(k, m.n)
    t0 = time.perf_counter()
    try:
        sp, tree, table, extras = build_spanner(m, k, eps, gamma=gamma, mode=mode)
    except ConstructionError as exc:
        _fail(EXIT_CONSTRUCTION, f"construction failed: {exc}")
    elapsed = time.perf_counter() - t0
    findings = V.structural_audit(table)
    write_edges(sp, out, m)
    report = {
        "n": m.n,
        "k": k,
        "eps": eps,
        "gamma": tree.gamma,
        "mode": mode,
        "seed": seed,
        "levels": tree.top + 1,
        "xi": table.params.xi,
        "tau": table.params.tau,
        "degree_threshold": table.params.D,
        "edges": len(sp),
        "max_degree": int(sp.degrees().max(initial=0)),
        "lightness": V.lightness(sp, m),
        "kinds": sp.kind_counts(),
        "dirty_nodes": sum(1 for s in table.states.values() if s.dirty),
        "terms": len(table.terms),
        "construction_warnings": table.violations,
        "audit_findings": [str(f) for f in findings],
        "build_seconds": elapsed,
    }
    write_json(report, stats)
    if findings:
        _fail(EXIT_CONSTRUCTION, f"{len(findings)} audit findings, first: {findings[0]}")
    click.echo(f"wrote {len(sp)} edges to {out}")


@main.command("verify")
@input_opt
@matrix_opt
@click.option("--edges", "edges_path", type=click.Path(), default="edges.jsonl", show_default=True)
@eps_opt
@k_opt
@click.option("--faults", default="exhaustive", show_default=True, help="exhaustive, random:N or targeted")
@seed_opt
@click.option("--out", type=click.Path(), default="report.json", show_default=True)
@click.option("--max-degree", type=int, default=None)
@click.option("--max-lightness", type=float, default=None)
@click.option("--max-hops", type=int, default=None)
def verify_cmd(input_path, matrix_path, edges_path, eps, k, faults, seed, out, max_degree, max_lightness, max_hops):
    """Check fault-tolerant stretch (and optional ceilings) of an edge list."""
    _check_eps(eps)
    m = _load(input_path, matrix_path)
    _check_k(k, m.n)
    strategy, trials = _parse_faults(faults)
    try:
        sp = read_edges(edges_path, m.n, m)
    except (OSError, ValueError) as exc:
        _fail(EXIT_CONFIG, str(exc))
    t0 = time.perf_counter()
    try:
        res = V.fault_suite(sp, m, eps, k, strategy, trials=trials or 500, seed=seed)
    except ValueError as exc:
        _fail(EXIT_CONFIG, str(exc))
    rep = V.summarize(sp, m, eps)
    w = res.worst
    rep.worst_stretch = {
        "value": w.worst if np.isfinite(w.worst) else "inf",
        "pair": list(w.pair) if w.pair else None,
        "faults": sorted(w.faults.points),
    }
    rep.timings["faults"] = time.perf_counter() - t0
    problems = []
    if not res.passed:
        problems.append(f"stretch {w.worst} > 1+eps with faults {sorted(w.faults.points)} on pair {w.pair}")
    if max_degree is not None and rep.max_degree > max_degree:
        problems.append(f"max degree {rep.max_degree} > {max_degree}")
    if max_lightness is not None and rep.lightness > max_lightness:
        problems.append(f"lightness {rep.lightness:.3f} > {max_lightness}")
    if max_hops is not None and rep.hop_diameter > max_hops:
        problems.append(f"hop diameter {rep.hop_diameter} > {max_hops}")
    doc = rep.as_dict()
    doc.update(strategy=strategy, fault_sets_tested=res.tested, passed=not problems, problems=problems)
    write_json(doc, out)
    click.echo(f"{res.tested} fault sets tested, worst stretch {w.worst:.6g}")
    if problems:
        _fail(EXIT_VERIFY, "; ".join(problems))


@main.command()
@input_opt
@matrix_opt
@eps_opt
@k_opt
@gamma_opt
def audit(input_path, matrix_path, eps, k, gamma):
    """Run the construction and print every invariant finding."""
    _check_eps(eps)
    m = _load(input_path, matrix_path)
    _check_k(k, m.n)
    try:
        _, _, table, _ = build_spanner(m, k, eps, gamma=gamma, mode="matching")
    except ConstructionError as exc:
        _fail(EXIT_CONSTRUCTION, f"construction failed: {exc}")
    findings = V.structural_audit(table)
    for f in findings:
        click.echo(str(f))
    for w in table.violations:
        click.echo(f"warning: {w}")
    click.echo(f"{len(findings)} findings")
    if findings:
        sys.exit(EXIT_CONSTRUCTION)


@main.command()
@click.option("--sizes", default="64,128,256", show_default=True)
@click.option("--ks", default="1,4", show_default=True)
@eps_opt
@click.option("--family", type=click.Choice(sorted(FAMILIES)), default="uniform", show_default=True)
@seed_opt
@click.option("--out", type=click.Path(), default="bench.csv", show_default=True)
def bench(sizes, ks, eps, family, seed, out):
    """Scaling table: one CSV row per (n, k), appended to --out."""
    _check_eps(eps)
    path = Path(out)
    new = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="") as fh:
        wr = csv.writer(fh)
        if new:
            wr.writerow(BENCH_COLUMNS)
        for n in _int_list(sizes):
            m = make_instance(family, n, seed)
            for k in _int_list(ks):
                _check_k(k, n)
                t0 = time.perf_counter()
                sp, *_ = build_spanner(m, k, eps, mode="full")
                elapsed = time.perf_counter() - t0
                lam, _ = V.measure_hop_diameter(sp, m, eps)
                row = [n, k, int(sp.degrees().max(initial=0)), len(sp), f"{V.lightness(sp, m):.6g}", lam, f"{elapsed:.4f}"]
                wr.writerow(row)
                click.echo(",".join(map(str, row)))


@main.command()
@input_opt
@matrix_opt
@eps_opt
@k_opt
@click.option("--out", type=click.Path(), default="oracle.jsonl", show_default=True)
def oracle(input_path, matrix_path, eps, k, out):
    """Greedy k-FT (1+eps)-spanner baseline (small n only)."""
    _check_eps(eps)
    m = _load(input_path, matrix_path)
    _check_k(k, m.n)
    if m.n > 150:
        _fail(EXIT_CONFIG, f"oracle is limited to n <= 150 (got {m.n})")
    sp = V.greedy_ft_oracle(m, 1.0 + eps, k)
    write_edges(sp, out, m)
    click.echo(f"wrote {len(sp)} edges to {out}")


if __name__ == "__main__":
    main()
