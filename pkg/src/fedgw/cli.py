"""Command-line experiment runner.

Every command writes CSV/JSON outputs plus ``manifest.json`` into ``--out``.
Exit codes: 0 success, 2 configuration error, 3 data error, 4 non-convergence
under ``--strict``.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import experiment as ex
from .datasets import khop_bundle, load_edge_list_graph, load_tu_dataset, planted_citation_graph, two_class_graphs
from .errors import ConfigError, FedGWError, FormatError, LoadError
from .graph import DatasetBundle, apsp, one_hot
from .ldp import EmbeddingMatrix, derive_seed, multibit_encode, optimal_m

logger = logging.getLogger("fedgw")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_STRICT = 0, 2, 3, 4


class NotConverged(FedGWError):
    pass


# ---------------------------------------------------------------- data

GENERATORS = {"two_class": two_class_graphs, "planted_citation": planted_citation_graph}


def load_dataset(cfg):
    """Returns a DatasetBundle or a single Graph, depending on the dataset format."""
    ds = cfg["dataset"]
    fmt = ds["format"]
    if fmt == "synthetic":
        gen = GENERATORS.get(ds["generator"])
        if gen is None:
            raise ConfigError(f"dataset.generator: must be one of {', '.join(GENERATORS)}")
        params = dict(ds["params"])
        params.setdefault("seed", cfg["seed"])
        try:
            return gen(**params)
        except TypeError as exc:
            raise ConfigError(f"dataset.params: {exc}") from None
    if fmt == "tu":
        if not ds["path"] or not ds["name"]:
            raise ConfigError("dataset.path and dataset.name are required for TU datasets")
        if not Path(ds["path"]).is_dir():
            raise ConfigError(f"dataset.path: not a directory: {ds['path']}")
        return load_tu_dataset(ds["path"], ds["name"])
    if fmt == "edgelist":
        if not ds["edges"]:
            raise ConfigError("dataset.edges is required for edge-list datasets")
        if not Path(ds["edges"]).is_file():
            raise ConfigError(f"dataset.edges: not a file: {ds['edges']}")
        return load_edge_list_graph(ds["edges"], ds["features"], ds["labels"])
    raise ConfigError("dataset.format: must be tu, edgelist or synthetic")


def as_bundle(data, cfg, hops: int, limit: int, name="subgraphs") -> DatasetBundle:
    """Multi-graph bundles pass through (capped); a single graph is cut into k-hop subgraphs."""
    rng = np.random.default_rng(derive_seed(cfg["seed"], 7))
    if isinstance(data, DatasetBundle):
        if len(data) <= limit:
            return data
        keep = np.sort(rng.choice(len(data), limit, replace=False))
        graphs = [data.graphs[i] for i in keep]
        labelled = [g.node_labels for g in graphs if g.node_labels is not None]
        d = 1 + max(int(l.max()) for l in labelled) if labelled else 0
        return DatasetBundle(graphs, data.name, max(d, data.num_node_classes) if labelled else 0)
    if data.node_labels is None:
        raise FormatError("a single-graph dataset needs node labels for pseudo-labelling")
    centers = np.sort(rng.choice(data.node_count, min(limit, data.node_count), replace=False))
    return khop_bundle(data, centers, hops, name)


def node_features(bundle):
    d = bundle.num_node_classes
    out = []
    for g in bundle.graphs:
        if g.features.shape[1]:
            out.append(np.asarray(g.features))
        elif g.node_labels is not None:
            out.append(one_hot(g.node_labels, d))
        else:
            out.append(np.zeros((g.node_count, 1)))
    return out


# ---------------------------------------------------------------- io

def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if header:
            w.writerow(header)
        w.writerows(rows)


def write_matrix(path, M):
    np.savetxt(path, np.asarray(M), delimiter=",", fmt="%.17g")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.generic):
        return x.item()
    return x


def write_json(path, obj):
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- pipelines

def federated_run(bundle, cfg, compute_distances=True, **fed_extra):
    from .federated import run_federation

    return run_federation(bundle, ex.fed_cfg(cfg, **fed_extra), ex.train_cfg(cfg), ex.solver_cfg(cfg),
                          compute_distances=compute_distances, workers=cfg["workers"])


def _check_converged(cfg, flags, what):
    if not bool(np.all(flags)):
        msg = f"{what}: some solves did not converge"
        if cfg["strict"]:
            raise NotConverged(msg)
        logger.warning(msg)


def cmd_classify(cfg, out: Path) -> dict:
    from .downstream import C_GRID, GAMMA_GRID, cross_validate, knn_classify, stratified_split
    from .ot import pairwise_gw_matrix, save_distance_matrix

    data = load_dataset(cfg)
    if not isinstance(data, DatasetBundle):
        raise ConfigError("classify needs a multi-graph dataset with graph labels")
    c = cfg["classify"]
    extra = {}
    if cfg["raw_mode"]:
        spaces = [apsp(g) for g in data.graphs]
        res = pairwise_gw_matrix(spaces, ex.solver_cfg(cfg), features=node_features(data),
                                 trade_off=c["trade_off"], workers=cfg["workers"])
    else:
        fed = federated_run(data, cfg)
        res = fed.distances
        extra["federation"] = fed.manifest
    save_distance_matrix(out / "distances.csv", res, ex.solver_cfg(cfg), raw_mode=cfg["raw_mode"])
    _check_converged(cfg, res.converged, "distance matrix")
    labels = data.graph_labels
    cv = cross_validate(res.matrix, labels, c["c_grid"] or C_GRID, c["gamma_grid"] or GAMMA_GRID,
                        folds=c["folds"], seed=cfg["seed"])
    _check_converged(cfg, [cv.all_converged], "SVM training")
    knn_acc = []
    for f in range(c["folds"]):
        tr, va, te = stratified_split(labels, seed=cfg["seed"] * 1_000_003 + f)
        trv = np.concatenate([tr, va])
        k = min(c["knn_k"], trv.size)
        pred = knn_classify(res.matrix, trv, labels[trv], te, k)
        knn_acc.append(float(np.mean(pred == labels[te])))
    write_csv(out / "accuracy.csv", ["split", "svm_test_accuracy", "knn_test_accuracy", "C", "gamma"],
              [[i, a, b, cg[0], cg[1]] for i, (a, b, cg) in enumerate(zip(cv.accuracies, knn_acc, cv.choices))])
    report = {"svm_mean": cv.mean_accuracy, "svm_std": cv.std, "best_c": cv.best_c,
              "best_gamma": cv.best_gamma, "knn_mean": float(np.mean(knn_acc)), "knn_std": float(np.std(knn_acc)),
              "graphs": len(data), "all_pairs_converged": res.all_converged}
    logger.info("SVM accuracy %.2f +- %.2f %%", 100 * cv.mean_accuracy, 100 * cv.std)
    return {"report": report, **extra}


def cmd_cluster(cfg, out: Path) -> dict:
    from .downstream import adjusted_rand_index, classical_mds, gw_kmeans
    from .ot import cost_from_embedding, pairwise_gw_matrix, save_distance_matrix

    c = cfg["cluster"]
    data = load_dataset(cfg)
    bundle = as_bundle(data, cfg, c["hops"], c["max_subgraphs"])
    truth = bundle.graph_labels
    extra = {}
    if cfg["raw_mode"]:
        spaces = [apsp(g) for g in bundle.graphs]
        res = pairwise_gw_matrix(spaces, ex.solver_cfg(cfg), workers=cfg["workers"])
    else:
        fed = federated_run(bundle, cfg, partition="one_per_graph")
        spaces = [cost_from_embedding(e, cfg["fed"]["embedding_metric"]) for e in fed.embeddings]
        res = fed.distances
        extra["federation"] = fed.manifest
    save_distance_matrix(out / "distances.csv", res, ex.solver_cfg(cfg))
    _check_converged(cfg, res.converged, "distance matrix")
    k = c["k"] or bundle.num_node_classes or len(np.unique(truth))
    k = min(k, len(spaces))
    km = gw_kmeans(spaces, k, ex.solver_cfg(cfg), max_iters=c["max_iters"], seed=cfg["seed"], n_init=c["n_init"],
                   distances=res.matrix)
    ari = adjusted_rand_index(truth, km.labels)
    write_csv(out / "assignments.csv", ["index", "cluster", "pseudo_label"],
              [[i, int(a), int(t)] for i, (a, t) in enumerate(zip(km.labels, truth))])
    xy = classical_mds(res.matrix, 2)
    write_csv(out / "coordinates.csv", ["index", "x", "y", "pseudo_label"],
              [[i, repr(float(p[0])), repr(float(p[1])), int(t)] for i, (p, t) in enumerate(zip(xy, truth))])
    report = {"ari": ari, "k": k, "inertia": km.inertia, "inertia_history": km.inertia_history,
              "iterations": km.iterations, "subgraphs": len(spaces),
              "mean_nodes": bundle.mean_node_count}
    return {"report": report, **extra}


def _study_graphs(cfg, section):
    s = cfg[section]
    return as_bundle(load_dataset(cfg), cfg, s.get("hops", 1), s.get("num_subgraphs", s.get("num_graphs")))


def cmd_sweep(cfg, out: Path) -> dict:
    from .downstream import epsilon_sweep, write_sweep_csv

    s = cfg["sweep"]
    bundle = _study_graphs(cfg, "sweep")
    fed = federated_run(bundle, cfg, compute_distances=False, partition="one_per_graph")
    rows = epsilon_sweep(bundle.graphs, fed.global_params, s["eps_list"], s["repeats"], ex.solver_cfg(cfg),
                         seed=cfg["seed"], num_node_classes=bundle.num_node_classes, m=cfg["ldp"]["m"],
                         metric=cfg["fed"]["embedding_metric"], workers=cfg["workers"])
    write_sweep_csv(rows, out / "sweep.csv")
    return {"report": {"rows": [r.__dict__ for r in rows], "graphs": len(bundle)}}


def cmd_sensitivity(cfg, out: Path) -> dict:
    from .downstream import neighbor_sensitivity

    s = cfg["sensitivity"]
    data = load_dataset(cfg)
    bundle = as_bundle(data, cfg, 1, s["num_graphs"]) if isinstance(data, DatasetBundle) else None
    graphs = bundle.graphs if bundle is not None else [data]
    modes = ("edge", "node") if s["mode"] == "both" else (s["mode"],)
    rows, report = [], {}
    for mode in modes:
        vals, skipped = [], 0
        for i, g in enumerate(graphs):
            if (mode == "edge" and g.edge_count < 1) or (mode == "node" and g.node_count < 2):
                skipped += s["trials"]
                continue
            r = neighbor_sensitivity(g, mode, apsp, ex.solver_cfg(cfg), s["trials"], derive_seed(cfg["seed"], i))
            vals += r.values
            skipped += r.skipped
            rows += [[mode, i, repr(v)] for v in r.values]
        report[mode] = {"count": len(vals), "skipped": skipped,
                        "mean": float(np.mean(vals)) if vals else None,
                        "variance": float(np.var(vals)) if vals else None}
    write_csv(out / "sensitivity.csv", ["mode", "graph", "gw"], rows)
    return {"report": report}


def cmd_metric_compare(cfg, out: Path) -> dict:
    from .downstream import ged_bruteforce
    from .errors import SizeCapError
    from .ot import cost_from_embedding, pairwise_gw_matrix

    s = cfg["metric_compare"]
    data = load_dataset(cfg)
    pool = as_bundle(data, cfg, s["hops"], 10 * s["num_subgraphs"])
    small = [i for i, g in enumerate(pool.graphs) if g.node_count <= s["ged_cap"]]
    if len(small) < s["num_subgraphs"]:
        logger.warning("only %d subgraphs fit the GED cap", len(small))
    pick = small[: s["num_subgraphs"]] or list(range(min(s["num_subgraphs"], len(pool))))
    graphs = [pool.graphs[i] for i in pick]
    bundle = DatasetBundle(graphs, pool.name, pool.num_node_classes)
    scfg = ex.solver_cfg(cfg)
    N = len(graphs)
    ged = np.full((N, N), np.nan)
    for i in range(N):
        ged[i, i] = 0.0
        for j in range(i + 1, N):
            try:
                ged[i, j] = ged[j, i] = ged_bruteforce(graphs[i], graphs[j], s["ged_cap"])
            except SizeCapError:
                pass
    spaces = [apsp(g) for g in graphs]
    gw_a = pairwise_gw_matrix(spaces, scfg).matrix
    fgw_ax = pairwise_gw_matrix(spaces, scfg, features=node_features(bundle), trade_off=s["trade_off"]).matrix
    fed = federated_run(bundle, cfg, compute_distances=False, partition="one_per_graph")
    gw_h = pairwise_gw_matrix([cost_from_embedding(e) for e in fed.embeddings], scfg).matrix
    for name, M in (("ged", ged), ("gw_a", gw_a), ("fgw_ax", fgw_ax), ("gw_h", gw_h)):
        write_matrix(out / f"{name}.csv", M)
    return {"report": {"subgraphs": pick, "node_counts": [g.node_count for g in graphs]}}


def cmd_encode(cfg, out: Path) -> dict:
    e = cfg["encode"]
    if not e["input"]:
        raise ConfigError("encode.input: path to a CSV embedding is required")
    if not Path(e["input"]).is_file():
        raise ConfigError(f"encode.input: not a file: {e['input']}")
    try:
        H = np.atleast_2d(np.loadtxt(e["input"], delimiter=",", comments="#", ndmin=2))
    except ValueError as exc:
        raise FormatError(f"{e['input']}: {exc}") from None
    emb = EmbeddingMatrix(H, e["alpha"], e["beta"])
    eps = cfg["ldp"]["epsilon"]
    eps = 1.0 / H.shape[0] if eps == "default" else float(eps)
    m = cfg["ldp"]["m"] or optimal_m(eps, H.shape[1])
    enc = multibit_encode(emb, eps, m, cfg["seed"])
    enc.to_csv(out / "encoded.csv")
    return {"report": {"n": H.shape[0], "h": H.shape[1], "epsilon": eps, "m": m}}


COMMANDS = {"classify": cmd_classify, "cluster": cmd_cluster, "sweep": cmd_sweep,
            "sensitivity": cmd_sensitivity, "metric-compare": cmd_metric_compare, "encode": cmd_encode}


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fedgw", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="task", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="YAML/JSON config file or a previous manifest.json")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--workers", type=int)
        p.add_argument("--strict", action="store_true", default=None,
                       help="treat solver non-convergence as fatal (exit 4)")
        p.add_argument("--epsilon", help="LDP budget: a number or 'default' (1/|V|)")
        p.add_argument("--m", type=int, help="released columns per row")
        p.add_argument("--solver", choices=("cg", "ppa"))
        p.add_argument("--raw-mode", action="store_true", default=None,
                       help="skip GNN/LDP and use APSP (+ node labels) directly")
        if name == "encode":
            p.add_argument("--input", help="CSV embedding to encode (one row per node)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _epsilon_flag(text):
    if text is None or text == "default":
        return text
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"--epsilon: expected a number or 'default', got {text!r}") from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        file_cfg = ex.read_config_file(args.config) if args.config else {}
        cfg = ex.resolve(file_cfg, {
            "task": args.task, "seed": args.seed, "out": args.out, "workers": args.workers,
            "strict": args.strict, "raw_mode": args.raw_mode, "ldp.epsilon": _epsilon_flag(args.epsilon),
            "ldp.m": args.m, "solver.method": args.solver, "encode.input": getattr(args, "input", None),
        })
        out = Path(cfg["out"])
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"out: cannot create {out} ({exc})") from None
        t0 = time.time()
        result = COMMANDS[args.task](cfg, out)
        manifest = {"command": args.task, "config": cfg, "resolved": ex.describe(cfg)["resolved"],
                    "seed": cfg["seed"], "elapsed_seconds": time.time() - t0, **result}
        write_json(out / "manifest.json", manifest)
        print(json.dumps(_jsonable(result["report"]), sort_keys=True))
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LoadError, FormatError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NotConverged as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_STRICT


if __name__ == "__main__":
    sys.exit(main())
