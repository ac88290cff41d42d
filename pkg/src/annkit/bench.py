"""The evaluation protocol: seeded query sampling, timing, metrics, reports.

A protocol run samples distinct query ids from the indexed set itself,
searches each with the query excluded (families without native exclusion
search k+1 and drop the query id), and scores the retrieved lists both
against the class labels (precision/recall/F1/accuracy via majority-vote
prediction, plus precision@k) and against an exact-oracle neighbor set
(recall@n). Query timing uses a monotonic clock around the pure search call,
after a discarded 10-query warm-up pass; everything except the timing fields
is deterministic in the seed.
"""

from __future__ import annotations

import csv as _csv
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .base import SearchResult, VectorIndex
from .data import EmbeddingSet
from .distances import Metric
from .evaluation import label_metrics, precision_at_k, recall_at_n
from .flat import FlatIPIndex, FlatL2Index, _FlatIndex, ground_truth
from .hnsw import HnswIndex, HnswParams
from .ivf import ivf_build
from .lsh import lsh_build
from .persist import dump_index
from .pq import PqIndex
from .rpforest import rp_build

WARMUP_QUERIES = 10

# Report rows for `bench --family all`, one per benchmarked configuration.
ALL_FAMILIES = (
    "flat-l2",
    "flat-ip",
    "hnsw",
    "pq",
    "ivf-sq",
    "ivf-pq",
    "lsh",
    "rpforest-angular",
    "rpforest-l2",
    "rpforest-manhattan",
)

KNOWN_FAMILIES = ALL_FAMILIES + ("ivf-flat", "rpforest")


@dataclass
class ProtocolConfig:
    n_queries: int = 1000
    k: int = 6  # neighbors retrieved per query, the query itself excluded
    recall_n: int = 5  # oracle depth for recall@n
    seed: int = 0
    metric: Metric = Metric.L2
    params: dict[str, dict] = field(default_factory=dict)  # per-family overrides

    def __post_init__(self) -> None:
        if self.n_queries < 1 or self.k < 1 or self.recall_n < 1:
            raise ValueError("n_queries, k and recall_n must be >= 1")


@dataclass
class BenchReport:
    family: str
    memory_estimate_mb: float
    precision: float
    recall: float
    f1: float
    recall_at_5: float
    index_size_mb: float
    indexing_time_ms: float
    avg_query_time_us: float
    qps: float
    accuracy: float
    precision_at_k: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    config: dict

    TIMING_FIELDS = ("indexing_time_ms", "avg_query_time_us", "qps")

    def to_dict(self) -> dict:
        # Field order is the CSV column order; the leading columns mirror the
        # classic results-table layout (memory, P/R/F1, recall@5, index size,
        # indexing time, query time), the rest are extras.
        return asdict(self)


def sample_query_rows(n: int, n_queries: int, seed: int) -> np.ndarray:
    """Distinct query rows, seeded, without replacement."""
    if n_queries > n:
        raise ValueError(f"n_queries={n_queries} exceeds the set size {n}")
    return np.random.default_rng(seed).choice(n, size=n_queries, replace=False)


def search_excluding(
    index: VectorIndex, query: np.ndarray, k: int, exclude: int
) -> SearchResult:
    """Top-k with the query id excluded.

    Flat families exclude natively; every other family searches k+1 and drops
    the query id if present.
    """
    if isinstance(index, _FlatIndex):
        return index.search(query, k, exclude=exclude)
    res = index.search(query, k + 1)
    kept = [(nid, score) for nid, score in res.neighbors if nid != exclude]
    return SearchResult(kept[:k])


def run_protocol(
    index: VectorIndex,
    emb_set: EmbeddingSet,
    config: ProtocolConfig,
    indexing_time_ms: float = 0.0,
    truth: dict[int, list[int]] | None = None,
) -> BenchReport:
    """Benchmark one built index over the set it was built from."""
    n = len(emb_set)
    if config.n_queries > n:
        raise ValueError(f"n_queries={config.n_queries} exceeds the set size {n}")
    rows = sample_query_rows(n, config.n_queries, config.seed)
    query_ids = emb_set.ids[rows]
    if truth is None:
        truth = ground_truth(emb_set, query_ids, config.recall_n, config.metric)

    for row in rows[:WARMUP_QUERIES]:  # warm-up pass, discarded
        search_excluding(index, emb_set.vectors[row], config.k, int(emb_set.ids[row]))

    outcomes: list[tuple[int, list[int]]] = []
    p_at_k: list[float] = []
    r_at_n: list[float] = []
    elapsed_ns: list[int] = []
    for row in rows:
        qid = int(emb_set.ids[row])
        query = emb_set.vectors[row]
        start = time.perf_counter_ns()
        res = search_excluding(index, query, config.k, qid)
        elapsed_ns.append(time.perf_counter_ns() - start)
        ids = res.ids
        assert qid not in ids, "query id leaked into its own result list"
        labels = [emb_set.label_of(i) for i in ids]
        outcomes.append((emb_set.label_of(qid), labels))
        p_at_k.append(precision_at_k(emb_set.label_of(qid), labels))
        r_at_n.append(recall_at_n(ids, truth[qid]))

    metrics = label_metrics(outcomes)
    avg_us = float(np.mean(elapsed_ns)) / 1_000.0
    config_echo = {
        "n_queries": config.n_queries,
        "k": config.k,
        "recall_n": config.recall_n,
        "seed": config.seed,
        "metric": config.metric.value,
        "index": index.config(),
    }
    return BenchReport(
        family=index.label,
        memory_estimate_mb=index.memory_bytes() / 2**20,
        precision=metrics.precision,
        recall=metrics.recall,
        f1=metrics.f1,
        recall_at_5=float(np.mean(r_at_n)),
        index_size_mb=len(dump_index(index)) / 2**20,
        indexing_time_ms=indexing_time_ms,
        avg_query_time_us=avg_us,
        qps=1e6 / avg_us if avg_us > 0 else 0.0,
        accuracy=metrics.accuracy,
        precision_at_k=float(np.mean(p_at_k)),
        macro_precision=metrics.macro_precision,
        macro_recall=metrics.macro_recall,
        macro_f1=metrics.macro_f1,
        config=config_echo,
    )


# --------------------------------------------------------------------- build

def family_metric(family: str, default: Metric = Metric.L2) -> Metric:
    """Effective query metric for a benchmark family."""
    if family == "flat-ip":
        return Metric.INNER_PRODUCT
    if family == "rpforest":
        return Metric.ANGULAR
    if family.startswith("rpforest-"):
        return Metric(family.removeprefix("rpforest-"))
    return default


def build_index(
    emb_set: EmbeddingSet, family: str, seed: int = 0, **overrides
) -> VectorIndex:
    """Construct any benchmark family over a set; overrides are family knobs."""
    if family == "flat-l2":
        return FlatL2Index.build(emb_set)
    if family == "flat-ip":
        return FlatIPIndex.build(emb_set)
    if family == "pq":
        return PqIndex.build(emb_set, seed=seed, **overrides)
    if family in ("ivf-flat", "ivf-pq", "ivf-sq"):
        return ivf_build(emb_set, encoding=family.removeprefix("ivf-"), seed=seed, **overrides)
    if family == "lsh":
        return lsh_build(emb_set, seed=seed, **overrides)
    if family == "hnsw":
        params = HnswParams(
            M=overrides.pop("M", 32),
            ef_construction=overrides.pop("ef_construction", 40),
            ef_search=overrides.pop("ef_search", 64),
        )
        if overrides:
            raise ValueError(f"unknown hnsw options: {sorted(overrides)}")
        return HnswIndex.build(emb_set, params, seed=seed)
    if family == "rpforest" or family.startswith("rpforest-"):
        metric = overrides.pop("metric", family_metric(family, Metric.ANGULAR))
        return rp_build(emb_set, metric=Metric(metric), seed=seed, **overrides)
    raise ValueError(f"unknown index family {family!r}")


def run_benchmark(
    emb_set: EmbeddingSet,
    families: Sequence[str],
    config: ProtocolConfig,
    progress: Callable[[str], None] | None = None,
) -> list[BenchReport]:
    """Build and benchmark each family; ground truth is cached per metric."""
    reports = []
    truth_cache: dict[tuple[Metric, bool], dict[int, list[int]]] = {}
    normalized: EmbeddingSet | None = None
    for family in families:
        if family not in KNOWN_FAMILIES:
            raise ValueError(f"unknown index family {family!r}")
        if progress:
            progress(f"benchmarking {family}")
        overrides = dict(config.params.get(family, {}))
        metric = family_metric(family, config.metric)
        if family.startswith("rpforest") and "metric" in overrides:
            metric = Metric(overrides["metric"])
        if family == "flat-ip":
            if normalized is None:
                normalized = emb_set.normalized()
            data = normalized
        else:
            data = emb_set
        start = time.perf_counter_ns()
        index = build_index(data, family, seed=config.seed, **overrides)
        indexing_ms = (time.perf_counter_ns() - start) / 1e6

        key = (metric, family == "flat-ip")
        if key not in truth_cache:
            rows = sample_query_rows(len(data), config.n_queries, config.seed)
            truth_cache[key] = ground_truth(
                data, data.ids[rows], config.recall_n, metric
            )
        run_cfg = ProtocolConfig(
            n_queries=config.n_queries,
            k=config.k,
            recall_n=config.recall_n,
            seed=config.seed,
            metric=metric,
            params=config.params,
        )
        reports.append(
            run_protocol(index, data, run_cfg, indexing_ms, truth=truth_cache[key])
        )
    return reports


# ------------------------------------------------------------------- reports

def write_report(reports: Sequence[BenchReport], path: str | Path, fmt: str = "json") -> None:
    """Serialize reports; JSON round-trips losslessly for non-timing fields."""
    if not reports:
        raise ValueError("cannot write an empty report list")
    rows = [r.to_dict() for r in reports]
    path = Path(path)
    if fmt == "json":
        path.write_text(json.dumps(rows, indent=2) + "\n")
    elif fmt == "csv":
        columns = list(rows[0].keys())
        with open(path, "w", newline="") as fh:
            writer = _csv.writer(fh)
            writer.writerow(columns)
            for row in rows:
                writer.writerow(
                    [json.dumps(v) if isinstance(v, dict) else v for v in row.values()]
                )
    else:
        raise ValueError(f"unknown report format {fmt!r}")


def read_report(path: str | Path) -> list[dict]:
    """Load a JSON report file back into dictionaries."""
    with open(path) as fh:
        return json.load(fh)
