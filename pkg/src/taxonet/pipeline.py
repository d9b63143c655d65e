"""End-to-end run: load counts, filter, run every enabled method, vote,
and write the artifact set.

Artifacts written to the output directory:

- ``consensus_matrix.tsv``    integer agreement counts, taxa-labeled
- ``edge_list.tsv``           positive-weight edges with supporting methods
- ``adjacency_<method>.tsv``  each method's binary vote
- ``threshold_sweep.tsv``     nodes/edges at every threshold
- ``hamming_matrix.tsv``      pairwise edge disagreements between methods
- ``network_t<k>.svg``        one rendering per threshold
- ``consensus_network.svg``   the union network (weight >= 1)
- ``hamming_heatmap.svg``     the disagreement matrix as a heatmap
- ``config_echo.txt``         the effective configuration, fully spelled out
- ``manifest.json``           run record (seeds, timings, selections, failures)

A failing method is dropped with a warning and recorded in the manifest;
the consensus is built from the survivors.  Everything except the manifest
(which carries wall-clock timings) is byte-identical across reruns with the
same config and seed.
"""

from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import PipelineConfig, config_to_text
from .consensus import (
    SweepRow,
    WeightedConsensus,
    binarize,
    build_consensus,
    hamming_matrix,
    threshold_network,
    threshold_sweep,
)
from .data import (
    CountTable,
    clr_transform,
    degenerate_taxa,
    drop_taxa,
    filter_taxa,
    load_count_table,
    to_composition,
)
from .errors import ConsensusError, FilterError, TaxonetError
from .exports import export_graph
from .methods import method_seed, run_method
from .network import BinaryNetwork, MethodResult
from .render import render_hamming_heatmap, render_network_svg, render_threshold_panel

log = logging.getLogger("taxonet")

MANIFEST_NAME = "manifest.json"


@dataclass
class MethodRun:
    method: str
    seed: int
    status: str = "ok"            # "ok" or "failed"
    error: str | None = None
    seconds: float = 0.0
    result: MethodResult | None = None
    vote: BinaryNetwork | None = None
    rule: str = ""


@dataclass
class PipelineRun:
    config: PipelineConfig
    table: CountTable
    dropped_taxa: list[str]
    runs: dict[str, MethodRun]
    consensus: WeightedConsensus | None
    sweep: list[SweepRow] = field(default_factory=list)
    hamming: np.ndarray | None = None
    out_dir: str = ""

    @property
    def failed(self) -> list[str]:
        return [m for m, r in self.runs.items() if r.status == "failed"]

    @property
    def succeeded(self) -> list[str]:
        return [m for m, r in self.runs.items() if r.status == "ok"]


def _execute_method(method: str, table: CountTable, params, seed: int):
    start = time.perf_counter()
    result = run_method(method, table, params, seed=seed)
    return result, time.perf_counter() - start


def prepare_table(cfg: PipelineConfig, table: CountTable | None = None):
    """Load, filter, and strip taxa that carry no usable signal.

    Returns the working table and the list of dropped degenerate taxa.
    """
    if table is None:
        if cfg.input_path is None:
            raise FilterError("no input table: set 'input' in the config or pass a table")
        table = load_count_table(cfg.input_path, orientation=cfg.orientation)
    table = filter_taxa(table, min_prevalence=cfg.min_prevalence, min_total=cfg.min_total)
    if table.n_taxa < 3:
        raise FilterError(f"only {table.n_taxa} taxa left after filtering; need at least 3")
    if table.n_samples < 4:
        raise FilterError(f"only {table.n_samples} samples; need at least 4")
    transformed = clr_transform(to_composition(table, pseudo=0.5))
    degenerate = degenerate_taxa(transformed)
    if degenerate:
        log.warning(
            "dropping %d degenerate taxa (no variation after transform): %s",
            len(degenerate),
            ", ".join(degenerate),
        )
        table = drop_taxa(table, degenerate)
        if table.n_taxa < 3:
            raise FilterError("fewer than 3 taxa left after dropping degenerate ones")
    return table, degenerate


def run_methods(cfg: PipelineConfig, table: CountTable) -> dict[str, MethodRun]:
    """Run every enabled method, serially or across worker processes."""
    runs: dict[str, MethodRun] = {}
    jobs = []
    for m in cfg.methods:
        runs[m] = MethodRun(
            method=m, seed=method_seed(cfg.seed, m), rule=cfg.rule_for(m).describe()
        )
        jobs.append((m, table, cfg.params_for(m), runs[m].seed))

    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futures = {m: pool.submit(_execute_method, m, t, p, s) for m, t, p, s in jobs}
            for m, fut in futures.items():
                try:
                    runs[m].result, runs[m].seconds = fut.result()
                except Exception as exc:
                    runs[m].status = "failed"
                    runs[m].error = f"{type(exc).__name__}: {exc}"
    else:
        for m, t, p, s in jobs:
            try:
                runs[m].result, runs[m].seconds = _execute_method(m, t, p, s)
            except Exception as exc:
                runs[m].status = "failed"
                runs[m].error = f"{type(exc).__name__}: {exc}"

    for m, run in runs.items():
        if run.status != "ok":
            log.warning("method %s failed and is dropped from the consensus: %s", m, run.error)
            continue
        try:
            run.vote = binarize(run.result, cfg.rule_for(m))
        except TaxonetError as exc:
            run.status = "failed"
            run.error = f"{type(exc).__name__}: {exc}"
            log.warning("binarization failed for %s: %s", m, exc)
    return runs


def _write_labeled_matrix(path, labels: list[str], values: np.ndarray, corner: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(corner + "\t" + "\t".join(labels) + "\n")
        for lab, row in zip(labels, values):
            fh.write(lab + "\t" + "\t".join(str(int(v)) for v in row) + "\n")


def read_labeled_matrix(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        labels = header[1:]
        rows = []
        row_labels = []
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            row_labels.append(parts[0])
            rows.append([int(v) for v in parts[1:]])
    if row_labels != labels:
        raise ConsensusError(f"{path}: row and column labels disagree")
    return labels, np.array(rows, dtype=np.int64)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_artifacts(run: PipelineRun) -> list[str]:
    out = run.out_dir
    os.makedirs(out, exist_ok=True)
    written: list[str] = []

    def record(name: str) -> str:
        written.append(name)
        return os.path.join(out, name)

    for m in run.succeeded:
        vote = run.runs[m].vote
        _write_labeled_matrix(
            record(f"adjacency_{m}.tsv"), list(vote.taxa), vote.adj, "taxon"
        )

    c = run.consensus
    if c is not None:
        _write_labeled_matrix(
            record("consensus_matrix.tsv"), list(c.taxa), c.weights, "taxon"
        )
        export_graph(c, "edgelist_tsv", record("edge_list.tsv"))
        with open(record("threshold_sweep.tsv"), "w", encoding="utf-8", newline="") as fh:
            fh.write("t\tconnected_node_count\tedge_count\n")
            for row in run.sweep:
                fh.write(f"{row.t}\t{row.connected_node_count}\t{row.edge_count}\n")
        _write_labeled_matrix(
            record("hamming_matrix.tsv"), list(c.methods), run.hamming, "method"
        )
        panel_paths, _ = render_threshold_panel(c, out, layout_seed=run.config.seed)
        written.extend(os.path.basename(p) for p in panel_paths)
        render_network_svg(
            threshold_network(c, 0),
            run.config.seed,
            record("consensus_network.svg"),
            title=f"consensus union: {threshold_network(c, 0).n_edges} edges",
        )
        render_hamming_heatmap(
            run.hamming, list(c.methods), record("hamming_heatmap.svg")
        )

    with open(record("config_echo.txt"), "w", encoding="utf-8", newline="") as fh:
        fh.write(config_to_text(run.config))

    manifest = {
        "seed": run.config.seed,
        "n_samples": run.table.n_samples,
        "taxa": list(run.table.taxa),
        "dropped_taxa": run.dropped_taxa,
        "enabled_methods": list(run.config.methods),
        "consensus_methods": run.succeeded if c is not None else [],
        "failed_methods": run.failed,
        "methods": {
            m: {
                "status": r.status,
                "error": r.error,
                "seed": r.seed,
                "seconds": round(r.seconds, 6),
                "rule": r.rule,
                "params": _jsonable(r.result.params) if r.result else None,
                "selection": _jsonable(r.result.selection) if r.result else None,
            }
            for m, r in run.runs.items()
        },
        "config": config_to_text(run.config),
        "artifacts": sorted(written + [MANIFEST_NAME]),
    }
    with open(os.path.join(out, MANIFEST_NAME), "w", encoding="utf-8", newline="") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(MANIFEST_NAME)
    return written


def run_pipeline(cfg: PipelineConfig, table: CountTable | None = None) -> PipelineRun:
    """Full pipeline; artifacts land in ``cfg.output_dir``.

    Raises only on configuration/input problems.  Individual method
    failures are recorded in the run and reflected in the CLI exit code,
    not raised, unless fewer than two methods survive.
    """
    table, dropped = prepare_table(cfg, table)
    runs = run_methods(cfg, table)
    survivors = [m for m in cfg.methods if runs[m].status == "ok"]

    consensus = None
    sweep: list[SweepRow] = []
    ham = None
    if len(survivors) >= 2:
        consensus = build_consensus([runs[m].vote for m in survivors], survivors)
        sweep = threshold_sweep(consensus)
        ham = hamming_matrix([runs[m].vote for m in survivors])

    run = PipelineRun(
        config=cfg,
        table=table,
        dropped_taxa=dropped,
        runs=runs,
        consensus=consensus,
        sweep=sweep,
        hamming=ham,
        out_dir=cfg.output_dir,
    )
    write_artifacts(run)
    if consensus is None:
        failures = "; ".join(f"{m}: {runs[m].error}" for m in run.failed)
        raise ConsensusError(
            f"fewer than 2 methods succeeded, no consensus possible ({failures})"
        )
    return run


def load_consensus(out_dir) -> WeightedConsensus:
    """Rebuild the consensus of a finished run from its artifact directory."""
    manifest_path = os.path.join(out_dir, MANIFEST_NAME)
    try:
        with open(manifest_path, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
    except OSError as exc:
        raise ConsensusError(f"cannot read run manifest {manifest_path}: {exc}") from exc
    methods = manifest.get("consensus_methods") or []
    if len(methods) < 2:
        raise ConsensusError(f"run in {out_dir} has no consensus (methods: {methods})")
    nets = []
    for m in methods:
        labels, adj = read_labeled_matrix(os.path.join(out_dir, f"adjacency_{m}.tsv"))
        nets.append(
            BinaryNetwork(adj=adj.astype(np.int8), taxa=labels, provenance={"method": m})
        )
    return build_consensus(nets, methods)
