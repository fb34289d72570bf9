"""Batch experiment runner.

Usage::

    perconet <experiment> [--config FILE] [--seed N] [--out DIR] [--threads N]

The experiment is one of ``sample``, ``events``, ``blockScaling``,
``extract``, ``verifyRules``, ``entPerc``, ``squareDouble``,
``subcriticalScaling``.  Configuration is a single JSON document; command
line flags override the scalar fields of the same name (flag wins).  A seed
is mandatory, either in the file or via ``--seed``.

Each run writes ``<out>/<experiment>.csv`` (one row per result record) and
``<out>/<experiment>.json`` (the same records plus config echo, version and
wall times).  The ``extract`` experiment can also dump the last successful
renormalized graph as ``<out>/extract.dot`` (config key ``dot``).  CSV
content is a pure function of (config, seed): wall times and other
run-varying data live in the JSON only, so reruns are byte-identical for
any thread count.

Every experiment's CSV schema is versioned; rows carry the version in the
``schema`` column.  Current schemas:

* ``sample-1``: per-trial cluster statistics of one lattice sample.
* ``events-1``: MC probability of the block family of crossing events plus
  a corner-to-corner connection, on the [1,2kL]^2 x [1,2k]^(d-2) slab.
* ``blockScaling-1``: block size found by ``find_block_size`` per lattice
  size L (the per-k search tables go to the JSON).
* ``extract-1``: per-trial success/failure stage of resource extraction.
* ``verifyRules-1``: certification counts of the Z/Y/X graph rewrite rules
  against the statevector oracle over all connected graphs up to a size.
* ``entPerc-1``: CEP vs swapping strategy sweep over lambda1.
* ``squareDouble-1``: both sides of the doubled-square comparison.
* ``subcriticalScaling-1``: mean largest cluster per L (fits in the JSON).

Exit status: 0 on success, 2 on config validation errors (each reported
with its field path), 1 on runtime failure (diagnostics in the JSON).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .entanglement import hex_to_tri_sweep, square_double_compare
from .events import (BlockSizeSearchError, block_size_search,
                     estimate_event_probability, u_subevents)
from .graphstate import GraphState, measure_x, measure_y, measure_z
from .lattice import KINDS, Lattice, geometry, slab_lattice
from .oracle import verify_rewrite
from .percolation import (crossing_exists, label_clusters,
                          largest_cluster_scaling, sample)
from .renorm import ExtractionError, extract

REQUIRED = object()


# -- config schema -------------------------------------------------------------

@dataclass
class Field_:
    name: str
    kind: str                 # int | number | bool | str | list[int] | list[number] | list[str]
    default: object = REQUIRED
    lo: float | None = None
    hi: float | None = None
    choices: tuple | None = None
    optional: bool = False    # value may be null


COMMON_FIELDS = (
    Field_("seed", "int", lo=0),
    Field_("threads", "int", 1, lo=1),
    Field_("out", "str", "results"),
)

EXPERIMENT_FIELDS = {
    "sample": (
        Field_("kind", "str", "square", choices=KINDS),
        Field_("dims", "list[int]", [32, 32], lo=1),
        Field_("p_bond", "number", lo=0.0, hi=1.0),
        Field_("p_site", "number", 1.0, lo=0.0, hi=1.0),
        Field_("trials", "int", 100, lo=1),
    ),
    "events": (
        Field_("L", "int", 3, lo=1),
        Field_("k", "int", 2, lo=1),
        Field_("d", "int", 2, lo=2),
        Field_("p_bond", "number", lo=0.0, hi=1.0),
        Field_("p_site", "number", 1.0, lo=0.0, hi=1.0),
        Field_("trials", "int", 200, lo=1),
    ),
    "blockScaling": (
        Field_("kind", "str", "diamond", choices=KINDS),
        Field_("p_site", "number", lo=0.0, hi=1.0),
        Field_("p_bond", "number", lo=0.0, hi=1.0),
        Field_("sizes", "list[int]", [4, 8], lo=1),
        Field_("target_prob", "number", 0.5, lo=1e-9, hi=1.0 - 1e-9),
        Field_("trials", "int", 100, lo=1),
        Field_("n_blocks", "int", None, lo=1, optional=True),
        Field_("k_max", "int", 16, lo=1),
    ),
    "extract": (
        Field_("pipeline", "str", "supercritical", choices=("supercritical", "fixedBlock")),
        Field_("L", "int", 3, lo=1),
        Field_("k", "int", None, lo=1, optional=True),
        Field_("n", "int", None, lo=2, optional=True),
        Field_("p_bond", "number", lo=0.0, hi=1.0),
        Field_("p_site", "number", 1.0, lo=0.0, hi=1.0),
        Field_("trials", "int", 50, lo=1),
        Field_("dot", "bool", False),
    ),
    "verifyRules": (
        Field_("max_vertices", "int", 5, lo=1, hi=7),
        Field_("bases", "list[str]", ["z", "y"], choices=("z", "y", "x")),
    ),
    "entPerc": (
        Field_("lambda1_start", "number", 0.5, lo=0.5, hi=1.0),
        Field_("lambda1_stop", "number", 1.0, lo=0.5, hi=1.0),
        Field_("lambda1_count", "int", 51, lo=1),
    ),
    "squareDouble": (
        Field_("p", "number", 0.52, lo=0.0, hi=1.0),
        Field_("L", "int", 128, lo=16),
        Field_("trials", "int", 10_000, lo=1),
    ),
    "subcriticalScaling": (
        Field_("kind", "str", "square", choices=("square", "hexagonal", "triangular")),
        Field_("p", "number", 0.3, lo=0.0, hi=1.0),
        Field_("sizes", "list[int]", [16, 32, 64, 128], lo=2),
        Field_("trials", "int", 200, lo=1),
    ),
}

EXPERIMENTS = tuple(EXPERIMENT_FIELDS)


def _check_extract(params: dict, errors: list):
    if params.get("pipeline") == "fixedBlock":
        if params.get("k") is None:
            errors.append("k: required when pipeline is fixedBlock")
    elif params.get("pipeline") == "supercritical":
        if params.get("n") is None:
            errors.append("n: required when pipeline is supercritical")
        elif params.get("L", 0) < 2:
            errors.append("L: supercritical extraction needs L >= 2")


def _check_ent_perc(params: dict, errors: list):
    if (isinstance(params.get("lambda1_start"), (int, float))
            and isinstance(params.get("lambda1_stop"), (int, float))
            and params["lambda1_stop"] < params["lambda1_start"]):
        errors.append("lambda1_stop: must be >= lambda1_start")


EXTRA_CHECKS = {"extract": _check_extract, "entPerc": _check_ent_perc}


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict

    @property
    def seed(self) -> int:
        return self.params["seed"]

    @property
    def threads(self) -> int:
        return self.params["threads"]

    @property
    def out(self) -> str:
        return self.params["out"]

    def to_json(self) -> str:
        doc = {"experiment": self.experiment, **self.params}
        return json.dumps(doc, indent=2, sort_keys=True)


def _check_value(f: Field_, value, errors: list, path: str | None = None):
    path = path or f.name
    base = f.kind[5:-1] if f.kind.startswith("list[") else f.kind
    if f.kind.startswith("list["):
        if not isinstance(value, list) or not value:
            errors.append(f"{path}: must be a nonempty list")
            return None
        out = []
        for i, item in enumerate(value):
            out.append(_check_value(Field_(f.name, base, lo=f.lo, hi=f.hi,
                                           choices=f.choices),
                                    item, errors, path=f"{path}[{i}]"))
        return out
    if base == "int":
        if not isinstance(value, int) or isinstance(value, bool):
            errors.append(f"{path}: must be an integer")
            return None
    elif base == "number":
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            errors.append(f"{path}: must be a number")
            return None
        value = float(value)
    elif base == "bool":
        if not isinstance(value, bool):
            errors.append(f"{path}: must be a boolean")
            return None
    elif base == "str":
        if not isinstance(value, str):
            errors.append(f"{path}: must be a string")
            return None
    if f.choices is not None and value not in f.choices:
        errors.append(f"{path}: must be one of {', '.join(map(str, f.choices))}")
        return None
    if f.lo is not None and isinstance(value, (int, float)) and value < f.lo:
        errors.append(f"{path}: must be >= {f.lo}")
        return None
    if f.hi is not None and isinstance(value, (int, float)) and value > f.hi:
        errors.append(f"{path}: must be <= {f.hi}")
        return None
    return value


def validate(config_text, experiment: str | None = None):
    """Parse and validate a JSON config; returns (config, errors).

    ``config`` is None when errors is nonempty.  All problems are reported
    at once, each prefixed with the offending field path.
    """
    errors: list[str] = []
    if isinstance(config_text, (str, bytes)):
        try:
            doc = json.loads(config_text)
        except json.JSONDecodeError as e:
            return None, [f"config: invalid JSON: {e}"]
    else:
        doc = dict(config_text)
    if not isinstance(doc, dict):
        return None, ["config: top level must be a JSON object"]

    doc = dict(doc)
    declared = doc.pop("experiment", None)
    if declared is not None and experiment is not None and declared != experiment:
        errors.append(f"experiment: config says {declared!r}, command line says {experiment!r}")
    experiment = experiment or declared
    if experiment is None:
        return None, ["experiment: required"]
    if experiment not in EXPERIMENT_FIELDS:
        return None, [f"experiment: unknown experiment {experiment!r}; "
                      f"expected one of {', '.join(EXPERIMENTS)}"]

    fields = EXPERIMENT_FIELDS[experiment] + COMMON_FIELDS
    params: dict = {}
    for f in fields:
        if f.name in doc:
            value = doc.pop(f.name)
            if value is None:
                if f.optional:
                    params[f.name] = None
                else:
                    errors.append(f"{f.name}: must not be null")
            else:
                checked = _check_value(f, value, errors)
                if checked is not None:
                    params[f.name] = checked
        elif f.default is REQUIRED:
            errors.append(f"{f.name}: required")
        else:
            params[f.name] = f.default
    for key in sorted(doc):
        errors.append(f"{key}: unknown field for experiment {experiment!r}")
    if not errors:
        EXTRA_CHECKS.get(experiment, lambda p, e: None)(params, errors)
    if errors:
        return None, sorted(errors)
    return ExperimentConfig(experiment, params), []


# -- result records ------------------------------------------------------------

@dataclass
class ResultRecord:
    experiment: str
    params: dict
    estimates: dict
    ci95: float | None = None
    wall_time_s: float = 0.0
    seed: int = 0
    schema: str = ""
    version: str = __version__

    def as_json(self) -> dict:
        return {"experiment": self.experiment, "schema": self.schema,
                "params": _plain(self.params), "estimates": _plain(self.estimates),
                "ci95": self.ci95, "wall_time_s": round(self.wall_time_s, 6),
                "seed": self.seed, "version": self.version}


def _plain(obj):
    """JSON-safe copy (tuples to lists, numpy scalars to python)."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return "x".join(_fmt(v) for v in value)
    return str(value)


def _records_to_csv(records: list[ResultRecord], columns: list[str]) -> str:
    lines = [",".join(columns)]
    for r in records:
        row = {"schema": r.schema, "seed": r.seed, "ci95": r.ci95,
               **r.params, **r.estimates}
        lines.append(",".join(_fmt(row.get(c)) for c in columns))
    return "\n".join(lines) + "\n"


def _pool_map(fn, items, threads: int):
    """Order-preserving map; results identical for any thread count."""
    if threads <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# -- experiment runners ---------------------------------------------------------

def _run_sample(cfg: ExperimentConfig):
    p = cfg.params
    lattice = Lattice(p["kind"], tuple(p["dims"]))
    geometry(lattice)

    def one(i: int) -> ResultRecord:
        t0 = time.perf_counter()
        s = sample(lattice, p["p_bond"], p["p_site"], cfg.seed, path=("cli", i))
        labeling = label_clusters(s)
        est = {"occupied_sites": int(s.occupied_sites.sum()),
               "open_bonds": int(s.open_bonds.sum()),
               "clusters": len(labeling.cluster_sizes),
               "largest_cluster": labeling.largest_cluster_size(),
               "crossing": crossing_exists(s, 0)}
        params = {"kind": p["kind"], "dims": p["dims"], "p_bond": p["p_bond"],
                  "p_site": p["p_site"], "trial": i}
        return ResultRecord(cfg.experiment, params, est,
                            wall_time_s=time.perf_counter() - t0)

    records = _pool_map(one, range(p["trials"]), cfg.threads)
    columns = ["schema", "kind", "dims", "p_bond", "p_site", "trial",
               "occupied_sites", "open_bonds", "clusters", "largest_cluster",
               "crossing", "seed"]
    return records, columns, {}, None


def _run_events(cfg: ExperimentConfig):
    p = cfg.params
    L, k, d = p["L"], p["k"], p["d"]
    lattice = slab_lattice(L, k, d)
    targets = [("U_full", {"k": k, "L": L})]
    targets += u_subevents(L, k, d)
    targets.append(("H_pairConnect",
                    {"k": k, "L": L,
                     "sites": [(1,) * d, tuple(lattice.dims)]}))
    records = []
    for event, ev_params in targets:
        t0 = time.perf_counter()
        est = estimate_event_probability(
            event, {**ev_params, "lattice": lattice, "p_site": p["p_site"]},
            p["p_bond"], p["trials"], seed=cfg.seed, threads=cfg.threads)
        shown = {key: val for key, val in ev_params.items()
                 if key not in ("k", "L", "lattice")}
        params = {"event": event,
                  "params": json.dumps(_plain(shown), sort_keys=True,
                                       separators=(";", ":")),
                  "L": L, "k": k, "d": d, "p_bond": p["p_bond"],
                  "p_site": p["p_site"], "trials": p["trials"]}
        records.append(ResultRecord(cfg.experiment, params,
                                    {"hits": est.hits, "estimate": est.estimate},
                                    ci95=est.ci95,
                                    wall_time_s=time.perf_counter() - t0))
    columns = ["schema", "event", "params", "L", "k", "d", "p_bond", "p_site",
               "trials", "hits", "estimate", "ci95", "seed"]
    return records, columns, {}, None


def _run_block_scaling(cfg: ExperimentConfig):
    p = cfg.params
    records, tables, failures = [], {}, {}
    for L in p["sizes"]:
        t0 = time.perf_counter()
        params = {"kind": p["kind"], "p_site": p["p_site"], "p_bond": p["p_bond"],
                  "L": L, "target_prob": p["target_prob"], "trials": p["trials"],
                  "n_blocks": p["n_blocks"]}
        try:
            res = block_size_search(
                p["kind"], p["p_site"], p["p_bond"], L, p["target_prob"],
                p["trials"], n_blocks=p["n_blocks"], seed=cfg.seed,
                k_max=p["k_max"], threads=cfg.threads)
            est = {"k": res.k, "success_rate": res.table[-1]["estimate"]}
            tables[str(L)] = res.table
        except BlockSizeSearchError as e:
            est = {"k": None, "success_rate": None}
            tables[str(L)] = e.table
            failures[str(L)] = str(e)
        records.append(ResultRecord(cfg.experiment, params, est,
                                    wall_time_s=time.perf_counter() - t0))
    columns = ["schema", "kind", "p_site", "p_bond", "L", "target_prob",
               "trials", "n_blocks", "k", "success_rate", "seed"]
    meta = {"tables": tables}
    if failures:
        meta["failures"] = failures
    return records, columns, meta, None


def _run_extract(cfg: ExperimentConfig):
    p = cfg.params
    pipeline, L, k = p["pipeline"], p["L"], p["k"]
    if pipeline == "fixedBlock":
        lattice = Lattice("square", (2 * k * L, 2 * k * L))
        target = {"L": L, "pipeline": pipeline, "k": k}
    else:
        lattice = Lattice("square", (p["n"], p["n"]))
        target = {"L": L, "pipeline": pipeline}
    geometry(lattice)

    def one(i: int):
        t0 = time.perf_counter()
        s = sample(lattice, p["p_bond"], p["p_site"], cfg.seed, path=("extract", i))
        try:
            res = extract(s, target)
            est = {"success": True, "stage": "",
                   "vertices": res.renormalized_graph.n_vertices,
                   "measured": len(res.schedule)}
            graph = res.renormalized_graph
            plan = res.path_plan
        except ExtractionError as e:
            est = {"success": False, "stage": e.stage, "vertices": None,
                   "measured": None}
            graph = plan = None
        params = {"pipeline": pipeline, "L": L, "k": k, "n": p["n"],
                  "p_bond": p["p_bond"], "p_site": p["p_site"], "trial": i}
        return (ResultRecord(cfg.experiment, params, est,
                             wall_time_s=time.perf_counter() - t0), graph, plan)

    results = _pool_map(one, range(p["trials"]), cfg.threads)
    records = [r for r, _, _ in results]
    dot = None
    if p["dot"]:
        for _, graph, plan in reversed(results):
            if graph is not None:
                names = {}
                if plan is not None:
                    names = {site: str(lab) for lab, site in plan.mid_qubits.items()}
                dot = _to_dot(graph, names)
                break
    n_ok = sum(r.estimates["success"] for r in records)
    meta = {"successes": n_ok, "success_rate": n_ok / len(records)}
    columns = ["schema", "pipeline", "L", "k", "n", "p_bond", "p_site", "trial",
               "success", "stage", "vertices", "measured", "seed"]
    return records, columns, meta, dot


def _to_dot(g: GraphState, names: dict | None = None) -> str:
    names = names or {}
    lines = ["graph G {"]
    for v in sorted(g.vertices):
        label = names.get(v)
        lines.append(f'  {v} [label="{label}"];' if label else f"  {v};")
    for a, b in sorted(g.edges):
        lines.append(f"  {a} -- {b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _run_verify_rules(cfg: ExperimentConfig):
    import networkx as nx
    from networkx.generators.atlas import graph_atlas_g

    p = cfg.params
    rewrites = {"z": measure_z, "y": measure_y, "x": measure_x}
    counts: dict[tuple[int, str], list[int]] = {}
    for G in graph_atlas_g()[1:]:
        n = G.number_of_nodes()
        if n > p["max_vertices"]:
            break
        if n == 0 or not nx.is_connected(G):
            continue
        g = GraphState(range(n), G.edges())
        for basis in p["bases"]:
            tally = counts.setdefault((n, basis), [0, 0, 0])
            tally[0] += 1
            for v in range(n):
                expected = rewrites[basis](g, v)
                tally[1] += 1
                tally[2] += verify_rewrite(g, v, basis.upper(), expected)
    records = []
    for (n, basis), (graphs, checks, passed) in sorted(counts.items()):
        records.append(ResultRecord(
            cfg.experiment,
            {"n_vertices": n, "basis": basis},
            {"graphs": graphs, "checks": checks, "passed": passed,
             "all_ok": passed == checks}))
    columns = ["schema", "n_vertices", "basis", "graphs", "checks", "passed",
               "all_ok", "seed"]
    return records, columns, {}, None


def _run_ent_perc(cfg: ExperimentConfig):
    p = cfg.params
    values = np.linspace(p["lambda1_start"], p["lambda1_stop"], p["lambda1_count"])
    records = []
    for row in hex_to_tri_sweep(values):
        lam = row.pop("lambda1")
        records.append(ResultRecord(cfg.experiment, {"lambda1": lam}, row))
    columns = ["schema", "lambda1", "cep_probability", "cep_threshold",
               "cep_percolates", "quantum_probability", "quantum_threshold",
               "quantum_percolates", "seed"]
    return records, columns, {}, None


def _run_square_double(cfg: ExperimentConfig):
    p = cfg.params
    t0 = time.perf_counter()
    rep = square_double_compare(p["p"], p["L"], p["trials"], seed=cfg.seed,
                                threads=cfg.threads)
    q = rep.pair_probability
    ci = 1.96 * (q * (1.0 - q) / p["trials"]) ** 0.5
    rec = ResultRecord(cfg.experiment,
                       {"p": rep.p, "L": rep.L, "trials": rep.trials},
                       {"theta": rep.theta, "pair_probability": q,
                        "lhs_estimate": rep.lhs_estimate,
                        "rhs_bound_estimate": rep.rhs_bound_estimate,
                        "aa_prime_factor": rep.aa_prime_factor,
                        "reference_factor": rep.reference_factor},
                       ci95=ci, wall_time_s=time.perf_counter() - t0)
    columns = ["schema", "p", "L", "trials", "theta", "pair_probability",
               "lhs_estimate", "rhs_bound_estimate", "aa_prime_factor",
               "reference_factor", "ci95", "seed"]
    return [rec], columns, {}, None


def _run_subcritical(cfg: ExperimentConfig):
    p = cfg.params
    t0 = time.perf_counter()
    rep = largest_cluster_scaling(p["kind"], p["p"], list(p["sizes"]),
                                  p["trials"], seed=cfg.seed,
                                  threads=cfg.threads)
    dt = time.perf_counter() - t0
    records = []
    for L, mean in zip(rep.sizes, rep.mean_largest):
        records.append(ResultRecord(
            cfg.experiment,
            {"kind": p["kind"], "p": p["p"], "L": L, "trials": p["trials"]},
            {"mean_largest": mean}, wall_time_s=dt / len(rep.sizes)))
    meta = {"log_fit": vars(rep.log_fit), "linear_fit": vars(rep.linear_fit)}
    columns = ["schema", "kind", "p", "L", "trials", "mean_largest", "seed"]
    return records, columns, meta, None


RUNNERS = {
    "sample": _run_sample,
    "events": _run_events,
    "blockScaling": _run_block_scaling,
    "extract": _run_extract,
    "verifyRules": _run_verify_rules,
    "entPerc": _run_ent_perc,
    "squareDouble": _run_square_double,
    "subcriticalScaling": _run_subcritical,
}

SCHEMA_VERSIONS = {name: f"{name}-1" for name in EXPERIMENTS}


def run(cfg: ExperimentConfig):
    """Execute one experiment; returns (records, columns, meta, dot_text)."""
    records, columns, meta, dot = RUNNERS[cfg.experiment](cfg)
    schema = SCHEMA_VERSIONS[cfg.experiment]
    for r in records:
        r.schema = schema
        r.seed = cfg.seed
    return records, columns, meta, dot


# -- entry point ----------------------------------------------------------------

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="perconet",
        description="Percolation/graph-state experiment runner "
                    "(see module docstring for schemas)")
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, help="RNG seed (overrides config)")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--threads", type=int, help="worker threads (overrides config)")
    args = parser.parse_args(argv)

    doc: dict = {}
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as e:
            print(f"config error - cannot read {args.config}: {e}", file=sys.stderr)
            return 2
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            print(f"config error - config: invalid JSON: {e}", file=sys.stderr)
            return 2
        if not isinstance(doc, dict):
            print("config error - config: top level must be a JSON object",
                  file=sys.stderr)
            return 2
    for flag in ("seed", "out", "threads"):
        if getattr(args, flag) is not None:
            doc[flag] = getattr(args, flag)
    cfg, errors = validate(doc, args.experiment)
    if errors:
        for err in errors:
            print(f"config error - {err}", file=sys.stderr)
        return 2

    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        records, columns, meta, dot = run(cfg)
    except Exception as e:  # runtime failure: diagnostics, nonzero exit
        failure = {"experiment": cfg.experiment, "version": __version__,
                   "config": _plain(cfg.params), "status": "failed",
                   "error": {"type": type(e).__name__, "message": str(e)}}
        (out_dir / f"{cfg.experiment}.json").write_text(
            json.dumps(failure, indent=2, sort_keys=True) + "\n")
        print(f"{cfg.experiment} failed: {e}", file=sys.stderr)
        return 1
    wall = time.perf_counter() - t0

    csv_path = out_dir / f"{cfg.experiment}.csv"
    csv_path.write_text(_records_to_csv(records, columns))
    doc_out = {"experiment": cfg.experiment, "version": __version__,
               "schema": SCHEMA_VERSIONS[cfg.experiment], "status": "ok",
               "config": _plain(cfg.params), "wall_time_s": round(wall, 6),
               "records": [r.as_json() for r in records], **_plain(meta)}
    (out_dir / f"{cfg.experiment}.json").write_text(
        json.dumps(doc_out, indent=2, sort_keys=True) + "\n")
    if dot is not None:
        (out_dir / f"{cfg.experiment}.dot").write_text(dot)
    print(f"{cfg.experiment}: {len(records)} records -> {csv_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
