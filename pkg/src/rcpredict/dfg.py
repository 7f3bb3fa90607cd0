"""Data-flow graphs: model, text format, structural metrics and slack analysis."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Sequence

from .library import TaskLibrary


class DfgError(ValueError):
    pass


class DfgSyntaxError(DfgError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class DfgCycleError(DfgError):
    def __init__(self, edge: tuple[int, int]):
        super().__init__(f"cycle detected via back-edge {edge[0]} -> {edge[1]}")
        self.edge = edge


@dataclass(frozen=True)
class Dfg:
    """A validated directed acyclic task graph.

    ``nodes`` holds ``(node_id, task_type_id)`` pairs and ``edges`` holds
    ``(parent, child)`` pairs; both keep their declaration order.
    """

    id: str
    nodes: tuple[tuple[int, int], ...]
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple((int(n), int(t)) for n, t in self.nodes))
        object.__setattr__(self, "edges", tuple((int(p), int(c)) for p, c in self.edges))
        seen = set()
        for n, _ in self.nodes:
            if n in seen:
                raise DfgError(f"duplicate node id {n}")
            seen.add(n)
        edge_set = set()
        for p, c in self.edges:
            if p not in seen or c not in seen:
                missing = p if p not in seen else c
                raise DfgError(f"edge {p} -> {c} names unknown node {missing}")
            if p == c:
                raise DfgError(f"self-loop on node {p}")
            if (p, c) in edge_set:
                raise DfgError(f"duplicate edge {p} -> {c}")
            edge_set.add((p, c))
        _ = self.topo_order  # raises DfgCycleError

    @property
    def node_ids(self) -> list[int]:
        return [n for n, _ in self.nodes]

    @cached_property
    def types(self) -> dict[int, int]:
        return dict(self.nodes)

    @cached_property
    def parents(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {n: [] for n, _ in self.nodes}
        for p, c in self.edges:
            out[c].append(p)
        return out

    @cached_property
    def children(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {n: [] for n, _ in self.nodes}
        for p, c in self.edges:
            out[p].append(c)
        return out

    @cached_property
    def topo_order(self) -> tuple[int, ...]:
        indeg = {n: 0 for n, _ in self.nodes}
        for _, c in self.edges:
            indeg[c] += 1
        queue = deque(n for n, _ in self.nodes if indeg[n] == 0)
        order = []
        while queue:
            n = queue.popleft()
            order.append(n)
            for c in self.children[n]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    queue.append(c)
        if len(order) != len(self.nodes):
            raise DfgCycleError(self._find_back_edge())
        return tuple(order)

    def _find_back_edge(self) -> tuple[int, int]:
        state = {n: 0 for n, _ in self.nodes}  # 0 new, 1 on stack, 2 done
        for root, _ in self.nodes:
            if state[root]:
                continue
            stack = [(root, iter(self.children[root]))]
            state[root] = 1
            while stack:
                node, it = stack[-1]
                for c in it:
                    if state[c] == 1:
                        return (node, c)
                    if state[c] == 0:
                        state[c] = 1
                        stack.append((c, iter(self.children[c])))
                        break
                else:
                    state[node] = 2
                    stack.pop()
        raise AssertionError("no back-edge in a graph flagged cyclic")

    def relabel(self, mapping: dict[int, int], new_id: str | None = None) -> "Dfg":
        return Dfg(
            new_id or self.id,
            tuple((mapping[n], t) for n, t in self.nodes),
            tuple((mapping[p], mapping[c]) for p, c in self.edges),
        )


def parse_dfg(text: str) -> Dfg:
    """Parse the line-oriented DFG format (``dfg``/``node``/``edge`` records)."""
    dfg_id = None
    nodes: list[tuple[int, int]] = []
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        col = len(line) - len(line.lstrip()) + 1
        parts = line.split()
        kind = parts[0]
        if kind == "dfg":
            if dfg_id is not None:
                raise DfgSyntaxError("second 'dfg' header", lineno, col)
            if len(parts) != 2:
                raise DfgSyntaxError("expected 'dfg <id>'", lineno, col)
            dfg_id = parts[1]
            continue
        if dfg_id is None:
            raise DfgSyntaxError("missing 'dfg <id>' header", lineno, col)
        if kind not in ("node", "edge"):
            raise DfgSyntaxError(f"unknown record {kind!r}", lineno, col)
        if len(parts) != 3:
            raise DfgSyntaxError(f"expected '{kind} <int> <int>'", lineno, col)
        try:
            a, b = int(parts[1]), int(parts[2])
        except ValueError:
            raise DfgSyntaxError(f"non-integer field in {kind!r} record", lineno, col) from None
        (nodes if kind == "node" else edges).append((a, b))
    if dfg_id is None:
        raise DfgSyntaxError("empty document", 1)
    return Dfg(dfg_id, tuple(nodes), tuple(edges))


def serialize_dfg(dfg: Dfg) -> str:
    lines = [f"dfg {dfg.id}"]
    lines += [f"node {n} {t}" for n, t in dfg.nodes]
    lines += [f"edge {p} {c}" for p, c in dfg.edges]
    return "\n".join(lines) + "\n"


def load_dfg(path: str | Path) -> Dfg:
    return parse_dfg(Path(path).read_text())


def save_dfg(dfg: Dfg, path: str | Path) -> None:
    Path(path).write_text(serialize_dfg(dfg))


def load_corpus(directory: str | Path) -> list[Dfg]:
    return [load_dfg(p) for p in sorted(Path(directory).glob("*.dfg"))]


@dataclass(frozen=True)
class GraphMetrics:
    node_count: int
    edge_count: int
    root_count: int
    internal_count: int
    leaf_count: int
    isolated_count: int
    subgraph_count: int
    max_parents: int
    max_children: int
    edges_per_node: Fraction
    critical_path_len_nodes: int
    per_subgraph_critical_paths: tuple[int, ...]
    parallelism: Fraction


def _components(dfg: Dfg) -> list[list[int]]:
    parent = {n: n for n, _ in dfg.nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p, c in dfg.edges:
        rp, rc = find(p), find(c)
        if rp != rc:
            parent[rc] = rp
    groups: dict[int, list[int]] = {}
    for n, _ in dfg.nodes:
        groups.setdefault(find(n), []).append(n)
    return list(groups.values())


def longest_path_nodes(dfg: Dfg) -> dict[int, int]:
    """Number of nodes on the longest path ending at each node."""
    depth: dict[int, int] = {}
    for n in dfg.topo_order:
        ps = dfg.parents[n]
        depth[n] = 1 + max((depth[p] for p in ps), default=0)
    return depth


def graph_metrics(dfg: Dfg) -> GraphMetrics:
    n = len(dfg.nodes)
    roots = internal = leaves = isolated = 0
    for node, _ in dfg.nodes:
        np_, nc = len(dfg.parents[node]), len(dfg.children[node])
        if np_ == 0 and nc == 0:
            isolated += 1
        elif np_ == 0:
            roots += 1
        elif nc == 0:
            leaves += 1
        else:
            internal += 1
    depth = longest_path_nodes(dfg)
    comps = _components(dfg)
    per_comp = tuple(max(depth[v] for v in comp) for comp in comps)
    cp = max(per_comp, default=0)
    return GraphMetrics(
        node_count=n,
        edge_count=len(dfg.edges),
        root_count=roots,
        internal_count=internal,
        leaf_count=leaves,
        isolated_count=isolated,
        subgraph_count=len(comps),
        max_parents=max((len(v) for v in dfg.parents.values()), default=0),
        max_children=max((len(v) for v in dfg.children.values()), default=0),
        edges_per_node=Fraction(len(dfg.edges), n) if n else Fraction(0),
        critical_path_len_nodes=cp,
        per_subgraph_critical_paths=per_comp,
        parallelism=Fraction(n, cp) if cp else Fraction(0),
    )


@dataclass(frozen=True)
class SlackTable:
    asap: dict[int, int]
    alap: dict[int, int]
    slack: dict[int, int]
    avg_slack: Fraction
    makespan: int


def asap_alap_slack(dfg: Dfg, lib: TaskLibrary, weights: dict[int, int] | None = None) -> SlackTable:
    """ASAP/ALAP start times with node weight = nominal execution cycles of its type.

    ``weights`` overrides the per-type weights (keyed by task type id).
    """
    if weights is None:
        weights = {t: lib[t].nominal_exec for t in set(dfg.types.values())}
    w = {n: weights[t] for n, t in dfg.nodes}
    asap: dict[int, int] = {}
    for n in dfg.topo_order:
        asap[n] = max((asap[p] + w[p] for p in dfg.parents[n]), default=0)
    makespan = max((asap[n] + w[n] for n in asap), default=0)
    alap: dict[int, int] = {}
    for n in reversed(dfg.topo_order):
        finish = min((alap[c] for c in dfg.children[n]), default=makespan)
        alap[n] = finish - w[n]
    slack = {n: alap[n] - asap[n] for n in asap}
    avg = Fraction(sum(slack.values()), len(slack)) if slack else Fraction(0)
    return SlackTable(asap, alap, slack, avg, makespan)


def weighted_critical_path(dfg: Dfg, weight_of_type: dict[int, int]) -> int:
    return asap_alap_slack(dfg, None, weights=weight_of_type).makespan  # type: ignore[arg-type]
