"""Fixed-length numeric feature vectors for a (DFG, task library) pair."""
from __future__ import annotations

from collections import Counter
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .dfg import Dfg, asap_alap_slack, graph_metrics
from .library import TaskLibrary

TYPE_FREQ_SLOTS = 16

_STRUCTURAL = [
    "nodes", "root_nodes", "internal_nodes", "leaf_nodes", "isolated_nodes", "edges",
    "edges_per_node", "max_parents", "max_children", "sharable_resources", "subgraphs",
    "critical_path_avg", "critical_path_min", "critical_path_longest", "task_type_count",
]
_TYPE_FREQ = [f"task_type_freq_{i}" for i in range(1, TYPE_FREQ_SLOTS + 1)]
_MIX = ["hw_task_types", "sw_task_types", "migratable_tasks", "avg_slack"]
_AGG_GROUPS = ["hw_latency", "sw_latency", "hw_exec_power", "sw_exec_power",
               "hw_config_time", "hw_config_power", "hw_area"]
_AGG = [f"{g}_{s}" for g in _AGG_GROUPS for s in ("avg", "min", "max")]

_SCHEMA = tuple(_STRUCTURAL + _TYPE_FREQ + _MIX + _AGG)


def feature_schema() -> list[str]:
    return list(_SCHEMA)


def _agg(values: list[Fraction]) -> tuple[Fraction, Fraction, Fraction]:
    if not values:
        return Fraction(0), Fraction(0), Fraction(0)
    return Fraction(sum(values), len(values)), min(values), max(values)


def extract_features(dfg: Dfg, lib: TaskLibrary) -> dict[str, Fraction]:
    """Ordered mapping feature name -> exact rational value."""
    gm = graph_metrics(dfg)
    slack = asap_alap_slack(dfg, lib)
    type_counts = Counter(t for _, t in dfg.nodes)
    specs = [lib[t] for t in sorted(type_counts)]
    node_specs = [lib[t] for _, t in dfg.nodes]

    f: dict[str, Fraction] = {}
    F = Fraction
    f["nodes"] = F(gm.node_count)
    f["root_nodes"] = F(gm.root_count)
    f["internal_nodes"] = F(gm.internal_count)
    f["leaf_nodes"] = F(gm.leaf_count)
    f["isolated_nodes"] = F(gm.isolated_count)
    f["edges"] = F(gm.edge_count)
    f["edges_per_node"] = gm.edges_per_node
    f["max_parents"] = F(gm.max_parents)
    f["max_children"] = F(gm.max_children)
    f["sharable_resources"] = F(sum(c for c in type_counts.values() if c >= 2))
    f["subgraphs"] = F(gm.subgraph_count)
    cps = gm.per_subgraph_critical_paths
    f["critical_path_avg"] = F(sum(cps), len(cps)) if cps else F(0)
    f["critical_path_min"] = F(min(cps, default=0))
    f["critical_path_longest"] = F(gm.critical_path_len_nodes)
    f["task_type_count"] = F(len(type_counts))

    ranked = sorted(type_counts.values(), reverse=True)[:TYPE_FREQ_SLOTS]
    ranked += [0] * (TYPE_FREQ_SLOTS - len(ranked))
    for name, c in zip(_TYPE_FREQ, ranked):
        f[name] = F(c)

    f["hw_task_types"] = F(sum(1 for s in node_specs if s.mode == "hardware"))
    f["sw_task_types"] = F(sum(1 for s in node_specs if s.mode == "software"))
    f["migratable_tasks"] = F(sum(1 for s in node_specs if s.mode == "hybrid"))
    f["avg_slack"] = slack.avg_slack

    hw = [s for s in specs if s.hw_capable]
    sw = [s for s in specs if s.sw_capable]
    groups = {
        "hw_latency": [F(s.hw_exec) for s in hw],
        "sw_latency": [F(s.sw_exec) for s in sw],
        "hw_exec_power": [s.hw_exec * s.hw_dyn_power for s in hw],
        "sw_exec_power": [s.sw_exec * s.sw_dyn_power for s in sw],
        "hw_config_time": [F(s.reconfig_time) for s in hw],
        "hw_config_power": [s.reconfig_power for s in hw],
        "hw_area": [F(s.hw_area) for s in hw],
    }
    for g in _AGG_GROUPS:
        avg, lo, hi = _agg(groups[g])
        f[f"{g}_avg"], f[f"{g}_min"], f[f"{g}_max"] = avg, lo, hi
    assert tuple(f) == _SCHEMA
    return f


def feature_row(features: dict[str, Fraction]) -> list[float]:
    return [float(features[name]) for name in _SCHEMA]


def format_value(value: Fraction | float) -> str:
    """Shortest text that reads back to the same float."""
    x = float(value)
    if x.is_integer():
        return str(int(x))
    return repr(x)


def write_feature_matrix(rows: Iterable[tuple[str, dict[str, Fraction]]], path: str | Path) -> None:
    lines = [",".join(["dfg_id"] + list(_SCHEMA))]
    for dfg_id, feats in rows:
        lines.append(",".join([dfg_id] + [format_value(feats[n]) for n in _SCHEMA]))
    Path(path).write_text("\n".join(lines) + "\n")
