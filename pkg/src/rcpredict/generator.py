"""Random DFG corpora built by rank-layered construction."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .dfg import Dfg, save_dfg

# (rng, low, high) -> integer in [low, high]; swap to change the distribution.
IntSampler = Callable[[np.random.Generator, int, int], int]
FloatSampler = Callable[[np.random.Generator, float, float], float]


def uniform_int(rng: np.random.Generator, low: int, high: int) -> int:
    return int(rng.integers(low, high + 1))


def uniform_float(rng: np.random.Generator, low: float, high: float) -> float:
    return float(rng.uniform(low, high)) if high > low else float(low)


MAX_PARENTS = 2


@dataclass(frozen=True)
class GenParams:
    """Generator settings; defaults follow the published corpus statistics.

    ``edges_per_node_target`` is either a single target or a ``(low, high)``
    range from which each graph draws its own target.
    """

    node_count_range: tuple[int, int] = (5, 1000)
    edges_per_node_target: float | tuple[float, float] = (0.0, 2.0)
    task_type_count_range: tuple[int, int] = (3, 16)
    seed: int = 0
    corpus_size: int = 258
    type_pool: tuple[int, ...] = tuple(range(1, 17))
    int_sampler: IntSampler = field(default=uniform_int, compare=False, repr=False)
    float_sampler: FloatSampler = field(default=uniform_float, compare=False, repr=False)

    def __post_init__(self):
        lo, hi = self.node_count_range
        if not 1 <= lo <= hi:
            raise ValueError(f"bad node_count_range {self.node_count_range}")
        tlo, thi = self.task_type_count_range
        if not 1 <= tlo <= thi:
            raise ValueError(f"bad task_type_count_range {self.task_type_count_range}")
        if thi > len(self.type_pool):
            raise ValueError("task_type_count_range exceeds the type pool")
        elo, ehi = self.epn_range
        if not 0 <= elo <= ehi <= MAX_PARENTS:
            raise ValueError(f"edges_per_node_target must lie in [0, {MAX_PARENTS}]")
        if self.corpus_size < 1:
            raise ValueError("corpus_size must be >= 1")

    @property
    def epn_range(self) -> tuple[float, float]:
        t = self.edges_per_node_target
        if isinstance(t, (tuple, list)):
            return float(t[0]), float(t[1])
        return float(t), float(t)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("int_sampler", "float_sampler"):
            d.pop(k)
        return d


def generate_dfg(params: GenParams, index: int) -> Dfg:
    rng = np.random.default_rng([params.seed & 0xFFFFFFFFFFFFFFFF, index])
    n = params.int_sampler(rng, *params.node_count_range)
    n_types = min(params.int_sampler(rng, *params.task_type_count_range), len(params.type_pool))
    epn = params.float_sampler(rng, *params.epn_range)

    chosen = sorted(rng.choice(np.array(params.type_pool), size=n_types, replace=False).tolist())
    # every chosen type appears when the graph is large enough
    types = list(chosen[: min(n, n_types)])
    types += [chosen[int(i)] for i in rng.integers(0, n_types, size=n - len(types))]
    types = [types[int(i)] for i in rng.permutation(n)]

    # rank[node] is a random permutation; edges only run from lower to higher rank
    by_rank = rng.permutation(n)
    base, frac = int(epn), epn - int(epn)
    edges = []
    for r in range(1, n):
        k = base + (1 if rng.random() < frac else 0)
        k = min(k, MAX_PARENTS, r)
        if k == 0:
            continue
        parent_ranks = rng.choice(r, size=k, replace=False)
        child = int(by_rank[r])
        for pr in sorted(parent_ranks.tolist()):
            edges.append((int(by_rank[pr]), child))
    return Dfg(f"g{index:04d}", tuple((i, types[i]) for i in range(n)), tuple(edges))


def generate_corpus(params: GenParams, out_dir: str | Path | None = None) -> list[Dfg]:
    corpus = [generate_dfg(params, i) for i in range(params.corpus_size)]
    if out_dir is not None:
        write_corpus(corpus, out_dir, params)
    return corpus


def write_corpus(corpus: Sequence[Dfg], out_dir: str | Path, params: GenParams | None = None) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"output directory {out} not writable: {exc}") from exc
    entries = []
    for i, g in enumerate(corpus):
        name = f"{g.id}.dfg"
        save_dfg(g, out / name)
        entries.append({"id": g.id, "file": name,
                        "seed": params.seed if params else None, "index": i})
    manifest = {"params": params.to_dict() if params else None, "graphs": entries}
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return path
