"""Command-line harness: ``netlotto {gamma,simulate,ratio-sweep,greedy,bipartite-check,gen-graph}``.

CSV goes to stdout unless ``--out`` is given. Every option can also come from
a JSON file passed with ``--config``; explicit flags override it.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import graph as gr
from .deterministic import brute_force_response, degree_proportional, greedy_response, ratio_row
from .payoff import TieRule, gamma, gamma_n, monte_carlo_payoff, random_capped_allocations
from .strategy import attacker_equilibrium, attacker_upper_bound, defender_equilibrium

log = logging.getLogger("netlotto")

CSV_VERSION = 1
SIMULATE_COLUMNS = [
    "graph_id", "n", "|E|", "X", "Y", "strategy_x", "strategy_y",
    "tie_rule", "samples", "seed", "mean", "std_error",
]
SWEEP_COLUMNS = [
    "graph_id", "n", "|E|", "X", "Y", "tie_rule", "replicates",
    "u_det_mean", "u_det_std", "gamma", "ratio_mean", "ratio_std", "flagged",
]
DEFAULT_SWEEP_GRAPHS = (
    "star:100", "ring:100", "line:100", "complete:100",
    *(f"er:100:{p / 10:g}" for p in range(1, 9)),
)
DEFAULT_Y_GRID = "0.2:4.0:0.2"


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    graphs: list[str] = field(default_factory=lambda: ["star:6"])
    x: float = 6.0
    y: float | None = 6.0
    y_grid: list[float] | None = None
    samples: int = 100_000
    seed: int = 0
    tie: TieRule = TieRule.DEFENDER
    replicates: int = 1
    workers: int = 1
    pair: str = "equilibrium"
    deviations: int = 0
    out: str | None = None

    def validate(self) -> "ExperimentConfig":
        if not self.graphs:
            raise UsageError("at least one graph is required")
        if not self.x > 0:
            raise UsageError("--x must be positive")
        if self.y is not None and not self.y > 0:
            raise UsageError("--y must be positive")
        if self.y_grid is not None and (not self.y_grid or min(self.y_grid) <= 0):
            raise UsageError("--y-grid must be a nonempty grid of positive budgets")
        if self.samples < 1 or self.replicates < 1 or self.workers < 1:
            raise UsageError("--samples, --replicates and --workers must be >= 1")
        return self


def parse_grid(text: str) -> list[float]:
    """``a:b:step`` (inclusive) or a comma-separated list."""
    if ":" in text:
        try:
            a, b, step = (float(t) for t in text.split(":"))
        except ValueError as exc:
            raise UsageError(f"bad grid {text!r}; expected a:b:step") from exc
        if step <= 0 or b < a:
            raise UsageError(f"bad grid {text!r}")
        count = int(np.floor((b - a) / step + 1e-9)) + 1
        return [round(a + k * step, 12) for k in range(count)]
    return [float(t) for t in text.split(",") if t.strip()]


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def write_csv(rows: list[dict], columns: list[str], kind: str, out) -> None:
    buf = io.StringIO()
    buf.write(f"# netlotto {kind} csv v{CSV_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    if out is None:
        sys.stdout.write(buf.getvalue())
    else:
        Path(out).write_text(buf.getvalue())


def _graph_seed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


def _load_graph(spec: str, seed: int, graph_index: int, replicate: int) -> gr.Graph:
    if spec.startswith("er:"):
        seed = _graph_seed(seed, graph_index, replicate)
    return gr.parse_graph_spec(spec, seed)


# simulate -----------------------------------------------------------------

def run_simulate(cfg: ExperimentConfig, dump_strategies: str | None = None) -> list[dict]:
    """Monte Carlo payoff rows for the configured strategy pair."""
    cfg.validate()
    if cfg.y is None:
        raise UsageError("simulate needs --y")
    X, Y = cfg.x, cfg.y
    rows, dumps = [], []
    for gi, spec in enumerate(cfg.graphs):
        reps = cfg.replicates if spec.startswith("er:") else 1
        for r in range(reps):
            g = _load_graph(spec, cfg.seed, gi, r)
            fx = defender_equilibrium(g, X, Y)
            if cfg.pair == "equilibrium":
                part = gr.bipartite_partition(g)
                if part is None:
                    cycle = gr.find_odd_cycle(g)
                    raise UsageError(
                        f"{g.name} is not bipartite (odd cycle {'-'.join(map(str, cycle))}); "
                        "attacker_equilibrium needs a bipartite graph, try --pair upper-bound"
                    )
                fy = attacker_equilibrium(g, part, X, Y)
            elif cfg.pair == "upper-bound":
                fy = attacker_upper_bound(g, X, Y)
            else:
                raise UsageError(f"unknown --pair {cfg.pair!r}")
            dumps.append({"graph_id": g.name, "x": fx.to_dict(), "y": fy.to_dict()})

            base = {"graph_id": g.name, "n": g.n, "|E|": g.num_edges, "X": X, "Y": Y,
                    "tie_rule": cfg.tie.value, "samples": cfg.samples}
            est = monte_carlo_payoff(fx, fy, g, cfg.tie, cfg.samples, cfg.seed, cfg.workers)
            rows.append({**base, "strategy_x": fx.name, "strategy_y": fy.name, "seed": cfg.seed,
                         "mean": est.mean, "std_error": est.std_error})
            if cfg.deviations:
                rng = np.random.default_rng([cfg.seed, gi, r, 1])
                caps = fy.support_cap
                for k, x in enumerate(random_capped_allocations(rng, caps, X, cfg.deviations)):
                    sub_seed = _graph_seed(cfg.seed, gi, r, k + 1)
                    est = monte_carlo_payoff(x, fy, g, cfg.tie, cfg.samples, sub_seed, cfg.workers)
                    rows.append({**base, "strategy_x": f"pure_deviation_{k}", "strategy_y": fy.name,
                                 "seed": sub_seed, "mean": est.mean, "std_error": est.std_error})
    if dump_strategies:
        Path(dump_strategies).write_text(json.dumps(dumps, indent=1) + "\n")
    return rows


# ratio sweep --------------------------------------------------------------

def _sweep_job(args):
    spec, gi, r, seed, X, grid, tie = args
    g = _load_graph(spec, seed, gi, r)
    res = []
    for Y in grid:
        row = ratio_row(g, X, Y, tie)
        res.append((g.name, g.n, g.num_edges, row.u_det, row.gamma, row.ratio, row.flagged))
    return res


def run_ratio_sweep(cfg: ExperimentConfig, traces: str | None = None) -> list[dict]:
    """Deterministic-vs-randomized ratio rows, averaged over ER replicates."""
    cfg.validate()
    grid = cfg.y_grid if cfg.y_grid is not None else parse_grid(DEFAULT_Y_GRID)
    jobs = []
    for gi, spec in enumerate(cfg.graphs):
        reps = cfg.replicates if spec.startswith("er:") else 1
        jobs.extend((spec, gi, r, cfg.seed, cfg.x, grid, cfg.tie) for r in range(reps))
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_sweep_job, jobs, chunksize=4))
    else:
        results = [_sweep_job(j) for j in jobs]

    rows = []
    for gi, spec in enumerate(cfg.graphs):
        mine = [res for job, res in zip(jobs, results) if job[1] == gi]
        graph_id = spec if spec.startswith("er:") else mine[0][0][0]
        for yi, Y in enumerate(grid):
            cells = [m[yi] for m in mine]
            u = np.array([c[3] for c in cells])
            ratio = np.array([c[5] for c in cells])
            k = len(cells)
            rows.append({
                "graph_id": graph_id, "n": cells[0][1],
                "|E|": float(np.mean([c[2] for c in cells])) if k > 1 else cells[0][2],
                "X": cfg.x, "Y": Y, "tie_rule": cfg.tie.value, "replicates": k,
                "u_det_mean": float(u.mean()), "u_det_std": float(u.std(ddof=1)) if k > 1 else 0.0,
                "gamma": cells[0][4],
                "ratio_mean": float(ratio.mean()), "ratio_std": float(ratio.std(ddof=1)) if k > 1 else 0.0,
                "flagged": any(c[6] for c in cells),
            })
    if traces:
        _write_traces(cfg, grid, traces)
    return rows


def _write_traces(cfg: ExperimentConfig, grid, path: str) -> None:
    with open(path, "w") as fh:
        for gi, spec in enumerate(cfg.graphs):
            reps = cfg.replicates if spec.startswith("er:") else 1
            for r in range(reps):
                g = _load_graph(spec, cfg.seed, gi, r)
                x = degree_proportional(g, cfg.x)
                for Y in grid:
                    t = greedy_response(x, Y, g)
                    fh.write(json.dumps({"graph_id": g.name, "replicate": r, "Y": Y, **t.to_dict()}) + "\n")


# argument handling --------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, *, grid=False, sampling=False) -> None:
    p.add_argument("--config", help="JSON file with option defaults; flags win")
    p.add_argument("--graph", action="append", dest="graphs",
                   help="star:N | ring:N | line:N | complete:N | er:N:P | file:PATH (repeatable)")
    p.add_argument("--x", type=float, help="defender budget X")
    p.add_argument("--y", type=float, help="attacker budget Y")
    p.add_argument("--seed", type=int)
    p.add_argument("--tie", choices=["defender", "attacker"])
    p.add_argument("--replicates", type=int, help="ER graph replicates")
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    if grid:
        p.add_argument("--y-grid", help="a:b:step, inclusive")
    if sampling:
        p.add_argument("--samples", type=int)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="netlotto", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gamma", help="closed-form equilibrium payoff and upper bound")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--n", type=int)

    p = sub.add_parser("simulate", help="Monte Carlo payoff of a strategy pair")
    _add_common(p, sampling=True)
    p.add_argument("--pair", choices=["equilibrium", "upper-bound"])
    p.add_argument("--deviations", type=int, help="extra rows for random pure defender deviations")
    p.add_argument("--dump-strategies", help="write the strategies as JSON to this path")

    p = sub.add_parser("ratio-sweep", help="deterministic-to-randomized ratio over a Y grid")
    _add_common(p, grid=True)
    p.add_argument("--traces", help="write greedy traces as JSON lines to this path")

    p = sub.add_parser("greedy", help="greedy attacker response to the degree-proportional defense")
    p.add_argument("--graph", required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact", action="store_true", help="also solve exactly by enumeration (n <= 24)")

    p = sub.add_parser("bipartite-check", help="report a bipartition or an odd cycle")
    p.add_argument("--graph", required=True)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("gen-graph", help="write a generated graph as an edge list")
    p.add_argument("--graph", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    return ap


def config_from_args(args: argparse.Namespace, command: str) -> ExperimentConfig:
    merged: dict = {}
    if getattr(args, "config", None):
        merged.update(json.loads(Path(args.config).read_text()))
    for key, val in vars(args).items():
        if val is not None and key not in ("config", "command", "verbose"):
            merged[key] = val
    if isinstance(merged.get("y_grid"), str):
        merged["y_grid"] = parse_grid(merged["y_grid"])
    if isinstance(merged.get("graphs"), str):
        merged["graphs"] = [merged["graphs"]]
    if command == "ratio-sweep":
        merged.setdefault("graphs", list(DEFAULT_SWEEP_GRAPHS))
        merged.setdefault("x", 2.0)
        merged.setdefault("tie", "attacker")
        merged.setdefault("replicates", 100)
        merged.setdefault("y_grid", parse_grid(DEFAULT_Y_GRID))
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(merged) - known - {"dump_strategies", "traces"}
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    kw = {k: v for k, v in merged.items() if k in known}
    if "tie" in kw:
        kw["tie"] = TieRule.parse(kw["tie"])
    return ExperimentConfig(**kw).validate()


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _dispatch(args)
    except (UsageError, ValueError) as exc:
        print(f"netlotto {args.command}: error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.command == "gamma":
        if not (args.x > 0 and args.y > 0):
            raise UsageError("budgets must be positive")
        g0 = gamma(args.x, args.y)
        print(f"gamma = {g0:.12g}")
        if args.n is not None:
            gn = gamma_n(args.n, args.x, args.y)
            print(f"gamma_n = {gn:.12g}")
            print(f"gap = {gn - g0:.12g}")
        return 0

    if args.command == "simulate":
        cfg = config_from_args(args, "simulate")
        rows = run_simulate(cfg, args.dump_strategies)
        write_csv(rows, SIMULATE_COLUMNS, "simulate", cfg.out)
        return 0

    if args.command == "ratio-sweep":
        cfg = config_from_args(args, "ratio-sweep")
        rows = run_ratio_sweep(cfg, args.traces)
        write_csv(rows, SWEEP_COLUMNS, "ratio-sweep", cfg.out)
        return 0

    if args.command == "greedy":
        g = gr.parse_graph_spec(args.graph, args.seed)
        x = degree_proportional(g, args.x)
        trace = greedy_response(x, args.y, g)
        out = {"graph_id": g.name, "X": args.x, "Y": args.y, "x": x.tolist(), **trace.to_dict()}
        if args.exact:
            best, subset = brute_force_response(x, args.y, g)
            out["optimal_covered_edges"] = best
            out["optimal_subset"] = sorted(subset)
        print(json.dumps(out))
        return 0

    if args.command == "bipartite-check":
        g = gr.parse_graph_spec(args.graph, args.seed)
        part = gr.bipartite_partition(g)
        if part is None:
            cycle = gr.find_odd_cycle(g)
            print(f"not bipartite: odd cycle {' '.join(map(str, cycle))}")
            return 1
        print(f"bipartite\npart1: {' '.join(map(str, sorted(part.part1)))}"
              f"\npart2: {' '.join(map(str, sorted(part.part2)))}")
        return 0

    if args.command == "gen-graph":
        g = gr.parse_graph_spec(args.graph, args.seed)
        text = f"# {g.name}\n" + gr.format_edge_list(g)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return 0
    raise UsageError(f"unknown command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
