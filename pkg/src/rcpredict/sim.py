"""Discrete-event simulation of a DFG on a partially reconfigurable platform.

The platform has a set of slot-style PRRs (one task each), a number of GPPs and
a single reconfiguration port shared by all PRRs. Three online schedulers are
provided:

``S1``  no reuse: always reconfigure, lowest-index idle fitting PRR.
``S2``  reuse: a PRR already holding the task type is used without
        reconfiguration; otherwise the least recently used idle fitting PRR.
``S3``  reuse plus HW/SW migration: hybrid tasks go to whichever resource
        gives the earliest estimated finish. Candidates are idle fitting
        PRRs, idle GPPs, and busy PRRs already holding the task type; when a
        busy PRR wins, the task waits for it.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import NamedTuple, Sequence

from .dfg import Dfg
from .library import TaskLibrary

SCHEDULERS = ("S1", "S2", "S3")
SCHEDULER_NAMES = {"S1": "S1-NoReuse", "S2": "S2-Reuse", "S3": "S3-ReuseMigrate"}


class SimError(ValueError):
    pass


class InfeasibleError(SimError):
    def __init__(self, message: str, node_ids: Sequence[int] = ()):
        super().__init__(message)
        self.node_ids = tuple(node_ids)


def canonical_scheduler(name: str) -> str:
    key = str(name).strip().upper().split("-")[0]
    if key not in SCHEDULERS:
        raise SimError(f"unknown scheduler {name!r}")
    return key


@dataclass(frozen=True)
class Layout:
    fabric_area: int
    prr_sizes: tuple[int, ...]
    shape_tag: str = "uniform"

    def __post_init__(self):
        object.__setattr__(self, "prr_sizes", tuple(int(s) for s in self.prr_sizes))
        if any(s < 1 for s in self.prr_sizes):
            raise SimError("PRR sizes must be >= 1")
        if sum(self.prr_sizes) > self.fabric_area:
            raise SimError(f"PRRs ({sum(self.prr_sizes)}) exceed fabric area {self.fabric_area}")
        if self.shape_tag not in ("uniform", "skewed"):
            raise SimError(f"unknown shape tag {self.shape_tag!r}")

    @property
    def id(self) -> str:
        return f"{len(self.prr_sizes)}{'U' if self.shape_tag == 'uniform' else 'S'}"


@dataclass(frozen=True)
class PlatformConfig:
    layout: Layout
    gpp_count: int = 0
    scheduler: str = "S2"

    def __post_init__(self):
        object.__setattr__(self, "scheduler", canonical_scheduler(self.scheduler))
        if self.gpp_count < 0:
            raise SimError("gpp_count must be >= 0")
        if self.gpp_count + len(self.layout.prr_sizes) < 1:
            raise SimError("platform needs at least one PRR or GPP")

    @property
    def key(self) -> tuple:
        return (self.layout.fabric_area, self.layout.prr_sizes, self.gpp_count, self.scheduler)

    def describe(self) -> str:
        return f"{self.gpp_count}GPP-{self.layout.id}@{self.layout.fabric_area}-{self.scheduler}"


class Placement(NamedTuple):
    node_id: int
    resource: tuple[str, int]  # ("PRR", i) or ("GPP", i)
    reconfig_start: int | None
    reconfig_end: int | None
    exec_start: int
    finish: int

    @property
    def start(self) -> int:
        return self.reconfig_start if self.reconfig_start is not None else self.exec_start


@dataclass(frozen=True)
class SimResult:
    makespan: int
    total_energy: Fraction
    schedule: tuple[Placement, ...]
    reconfigurations: int
    reuses: int
    migrations_to_sw: int
    prr_sizes: tuple[int, ...] = field(default=(), repr=False)

    @property
    def avg_power(self) -> Fraction:
        return self.total_energy / self.makespan if self.makespan else Fraction(0)

    @property
    def fabric_area_used(self) -> int:
        used = {p.resource[1] for p in self.schedule
                if p.resource[0] == "PRR" and p.reconfig_start is not None}
        return sum(self.prr_sizes[i] for i in used)


def _check_feasible(dfg: Dfg, lib: TaskLibrary, cfg: PlatformConfig) -> None:
    max_prr = max(cfg.layout.prr_sizes, default=0)
    bad = []
    for n, t in dfg.nodes:
        spec = lib[t]
        hw_ok = spec.hw_capable and spec.hw_area <= max_prr
        sw_ok = spec.sw_capable and cfg.gpp_count >= 1
        if not (hw_ok or sw_ok):
            bad.append(n)
    if bad:
        raise InfeasibleError(f"{len(bad)} node(s) fit no resource under {cfg.describe()}", bad)


def simulate(dfg: Dfg, lib: TaskLibrary, cfg: PlatformConfig) -> SimResult:
    _check_feasible(dfg, lib, cfg)
    sizes = cfg.layout.prr_sizes
    n_prr, n_gpp = len(sizes), cfg.gpp_count
    sched = cfg.scheduler
    reuse = sched != "S1"

    # per type: fitting PRRs and whether it may use a GPP / a PRR under this policy
    used_types = sorted(set(dfg.types.values()))
    fits: dict[int, list[int]] = {}
    to_gpp: dict[int, bool] = {}
    to_prr: dict[int, bool] = {}
    by_finish: dict[int, bool] = {}
    for t in used_types:
        s = lib[t]
        fits[t] = [i for i in range(n_prr) if s.hw_capable and sizes[i] >= s.hw_area]
        if s.mode == "hardware":
            to_prr[t], to_gpp[t] = True, False
        elif s.mode == "software":
            to_prr[t], to_gpp[t] = False, True
        elif sched == "S3":
            to_prr[t], to_gpp[t] = bool(fits[t]), n_gpp > 0
        else:
            # S1/S2 keep hybrids in hardware unless no PRR can ever host them
            to_prr[t], to_gpp[t] = (True, False) if fits[t] else (False, True)
        by_finish[t] = sched == "S3" and s.mode == "hybrid"

    specs = {t: lib[t] for t in used_types}
    prr_idle = [True] * n_prr
    prr_conf = [None] * n_prr
    prr_last = [-1] * n_prr
    prr_until = [0] * n_prr
    gpp_idle = [True] * n_gpp
    port_free = 0

    pending = {n: len(ps) for n, ps in dfg.parents.items()}
    ready: dict[int, list[tuple[int, int]]] = {t: [] for t in used_types}
    types = dfg.types
    for n, _ in dfg.nodes:
        if pending[n] == 0:
            ready[types[n]].append((0, n))
    for h in ready.values():
        heapq.heapify(h)

    events: list[tuple[int, int, str, int, int]] = []
    records: dict[int, Placement] = {}
    n_reconf = n_reuse = n_migr = 0
    cnt_hw = dict.fromkeys(used_types, 0)
    cnt_rc = dict.fromkeys(used_types, 0)
    cnt_sw = dict.fromkeys(used_types, 0)
    now = 0
    seq = 0

    def decide(t: int):
        """Resource for the next node of type ``t`` now, or None to keep it waiting.

        Returns ("PRR", i, reused) or ("GPP", g).
        """
        spec = specs[t]
        if by_finish[t]:
            # earliest estimated finish; a busy PRR already holding the type counts
            # as an option, and winning with it means waiting for that PRR
            best = None
            for i in fits[t]:
                if prr_conf[i] == t:
                    start = now if prr_idle[i] else prr_until[i]
                    key = (start + spec.hw_exec, 0, 0 if prr_idle[i] else 1, 0, prr_last[i], i)
                elif prr_idle[i]:
                    fin = max(now, port_free) + spec.reconfig_time + spec.hw_exec
                    key = (fin, 0, 0, 1, prr_last[i], i)
                else:
                    continue
                if best is None or key < best[0]:
                    best = (key, ("PRR", i, prr_conf[i] == t), prr_idle[i])
            if to_gpp[t]:
                for g in range(n_gpp):
                    if gpp_idle[g]:
                        key = (now + spec.sw_exec, 1, 0, 0, 0, g)
                        if best is None or key < best[0]:
                            best = (key, ("GPP", g), True)
                        break
            if best is None or not best[2]:
                return None
            return best[1]
        if to_prr[t]:
            idle = [i for i in fits[t] if prr_idle[i]]
            if idle:
                if reuse:
                    for i in idle:
                        if prr_conf[i] == t:
                            return ("PRR", i, True)
                    return ("PRR", min(idle, key=lambda i: (prr_last[i], i)), False)
                return ("PRR", idle[0], False)
        if to_gpp[t] and True in gpp_idle:
            return ("GPP", gpp_idle.index(True))
        return None

    n_idle = n_prr + n_gpp
    while True:
        # dispatch every ready node that can be placed now, FIFO by (ready time, id)
        while n_idle:
            best = None
            for head, t in sorted((ready[t][0], t) for t in used_types if ready[t]):
                choice = decide(t)
                if choice is not None:
                    best = (head, t, choice)
                    break
            if best is None:
                break
            (_, node), t, choice = best
            heapq.heappop(ready[t])
            n_idle -= 1
            spec = specs[t]
            if choice[0] == "PRR":
                i, reused = choice[1], choice[2]
                prr_idle[i] = False
                prr_last[i] = now
                if reused:
                    rs = re = None
                    es = now
                    n_reuse += 1
                else:
                    rs = max(now, port_free)
                    re = rs + spec.reconfig_time
                    port_free = re
                    es = re
                    prr_conf[i] = t
                    n_reconf += 1
                    cnt_rc[t] += 1
                fin = es + spec.hw_exec
                prr_until[i] = fin
                cnt_hw[t] += 1
                records[node] = Placement(node, ("PRR", i), rs, re, es, fin)
                heapq.heappush(events, (fin, seq, "PRR", i, node))
            else:
                g = choice[1]
                gpp_idle[g] = False
                fin = now + spec.sw_exec
                cnt_sw[t] += 1
                if spec.mode == "hybrid":
                    n_migr += 1
                records[node] = Placement(node, ("GPP", g), None, None, now, fin)
                heapq.heappush(events, (fin, seq, "GPP", g, node))
            seq += 1

        if not events:
            break
        now = events[0][0]
        while events and events[0][0] == now:
            _, _, kind, idx, node = heapq.heappop(events)
            n_idle += 1
            if kind == "PRR":
                prr_idle[idx] = True
            else:
                gpp_idle[idx] = True
            for c in dfg.children[node]:
                pending[c] -= 1
                if pending[c] == 0:
                    heapq.heappush(ready[types[c]], (now, c))

    if len(records) != len(dfg.nodes):
        raise SimError("simulation stalled with unscheduled nodes")  # unreachable when feasible

    energy = Fraction(0)
    for t in used_types:
        s = lib[t]
        energy += (cnt_hw[t] * s.hw_exec * s.hw_dyn_power
                   + cnt_rc[t] * s.reconfig_time * s.reconfig_power
                   + cnt_sw[t] * s.sw_exec * s.sw_dyn_power)
    schedule = tuple(records[n] for n, _ in dfg.nodes)
    makespan = max((p.finish for p in schedule), default=0)
    return SimResult(makespan, energy, schedule, n_reconf, n_reuse, n_migr, sizes)


@dataclass
class Violation:
    constraint: str
    node_ids: tuple[int, ...]
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, constraint: str, nodes, message: str) -> None:
        self.violations.append(Violation(constraint, tuple(nodes), message))

    def constraints(self) -> set[str]:
        return {v.constraint for v in self.violations}


def _overlaps(intervals: list[tuple[int, int, int]]) -> list[tuple[int, int]]:
    out = []
    intervals = sorted(intervals)
    for (s0, e0, n0), (s1, e1, n1) in zip(intervals, intervals[1:]):
        if s1 < e0:
            out.append((n0, n1))
    return out


def validate_schedule(result: SimResult, dfg: Dfg, lib: TaskLibrary, cfg: PlatformConfig) -> ValidationReport:
    """Check a schedule against precedence, exclusivity, port, area and makespan rules."""
    rep = ValidationReport()
    by_node: dict[int, Placement] = {}
    for p in result.schedule:
        if p.node_id in by_node:
            rep.add("coverage", [p.node_id], "node scheduled more than once")
        by_node[p.node_id] = p
    missing = [n for n, _ in dfg.nodes if n not in by_node]
    if missing:
        rep.add("coverage", missing, "node(s) missing from schedule")
    unknown = [n for n in by_node if n not in dfg.types]
    if unknown:
        rep.add("coverage", unknown, "schedule names unknown node(s)")

    for p_id, c_id in dfg.edges:
        if p_id in by_node and c_id in by_node and by_node[c_id].exec_start < by_node[p_id].finish:
            rep.add("precedence", [p_id, c_id],
                    f"node {c_id} starts at {by_node[c_id].exec_start} before parent {p_id} finishes at {by_node[p_id].finish}")

    per_res: dict[tuple[str, int], list[tuple[int, int, int]]] = {}
    port: list[tuple[int, int, int]] = []
    sizes = cfg.layout.prr_sizes
    for p in by_node.values():
        kind, idx = p.resource
        per_res.setdefault(p.resource, []).append((p.start, p.finish, p.node_id))
        if p.reconfig_start is not None:
            port.append((p.reconfig_start, p.reconfig_end, p.node_id))
        if p.node_id not in dfg.types:
            continue
        spec = lib[dfg.types[p.node_id]]
        if kind == "PRR":
            if not 0 <= idx < len(sizes):
                rep.add("area", [p.node_id], f"unknown PRR {idx}")
                continue
            if not spec.hw_capable:
                rep.add("mode", [p.node_id], "software-only task placed on a PRR")
            elif sizes[idx] < spec.hw_area:
                rep.add("area", [p.node_id], f"task area {spec.hw_area} exceeds PRR {idx} size {sizes[idx]}")
            if p.finish - p.exec_start != spec.hw_exec:
                rep.add("duration", [p.node_id], "hardware execution length mismatch")
            if p.reconfig_start is not None and p.reconfig_end - p.reconfig_start != spec.reconfig_time:
                rep.add("duration", [p.node_id], "reconfiguration length mismatch")
        else:
            if not 0 <= idx < cfg.gpp_count:
                rep.add("mode", [p.node_id], f"unknown GPP {idx}")
            elif not spec.sw_capable:
                rep.add("mode", [p.node_id], "hardware-only task placed on a GPP")
            if p.finish - p.exec_start != spec.sw_exec:
                rep.add("duration", [p.node_id], "software execution length mismatch")

    for res, ivals in per_res.items():
        for a, b in _overlaps(ivals):
            rep.add("exclusivity", [a, b], f"overlapping intervals on {res[0]} {res[1]}")
    for a, b in _overlaps(port):
        rep.add("port", [a, b], "overlapping reconfigurations on the single port")

    max_finish = max((p.finish for p in result.schedule), default=0)
    if result.makespan != max_finish:
        rep.add("makespan", [], f"makespan {result.makespan} != max finish {max_finish}")
    return rep


def enumerate_layouts(fabric_area: int, prr_counts: Sequence[int]) -> list[Layout]:
    """Uniform and 1.5x-growth layouts for each PRR count, duplicates removed."""
    out: list[Layout] = []
    seen = set()
    for n in prr_counts:
        if n < 1:
            raise SimError("PRR count must be >= 1")
        if n > fabric_area:
            raise SimError(f"cannot split fabric {fabric_area} into {n} PRRs")
        for layout in (uniform_layout(fabric_area, n), skewed_layout(fabric_area, n)):
            if layout.prr_sizes not in seen:
                seen.add(layout.prr_sizes)
                out.append(layout)
    return out


def uniform_layout(fabric_area: int, n: int) -> Layout:
    base = fabric_area // n
    sizes = [base] * n
    sizes[-1] += fabric_area - base * n
    return Layout(fabric_area, tuple(sizes), "uniform")


def skewed_layout(fabric_area: int, n: int, growth: Fraction = Fraction(3, 2)) -> Layout:
    weights = [growth ** i for i in range(n)]
    total = sum(weights)
    sizes = [max(1, int(fabric_area * w / total)) for w in weights[:-1]]
    sizes.append(fabric_area - sum(sizes))
    if sizes[-1] < 1:
        raise SimError(f"fabric {fabric_area} too small for a skewed {n}-PRR layout")
    tag = "uniform" if len(set(sizes)) == 1 else "skewed"
    return Layout(fabric_area, tuple(sizes), tag)


# ---- text formats ------------------------------------------------------------

def derive_shape_tag(fabric_area: int, sizes: Sequence[int]) -> str:
    if not sizes:
        return "uniform"
    head = sizes[:-1]
    if len(set(head)) <= 1 and sizes[-1] >= sizes[0] and sizes[-1] - sizes[0] < len(sizes):
        return "uniform"
    return "skewed"


def parse_layout(text: str) -> tuple[Layout, int]:
    fabric = None
    prrs: list[int] = []
    gpp = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or parts[0] not in ("fabric", "prr", "gpp"):
            raise SimError(f"layout line {lineno}: expected 'fabric|prr|gpp <int>'")
        try:
            value = int(parts[1])
        except ValueError:
            raise SimError(f"layout line {lineno}: non-integer value") from None
        if parts[0] == "fabric":
            fabric = value
        elif parts[0] == "prr":
            prrs.append(value)
        else:
            gpp = value
    if fabric is None:
        raise SimError("layout file missing 'fabric' line")
    return Layout(fabric, tuple(prrs), derive_shape_tag(fabric, prrs)), gpp


def serialize_layout(layout: Layout, gpp_count: int = 0) -> str:
    lines = [f"fabric {layout.fabric_area}"]
    lines += [f"prr {s}" for s in layout.prr_sizes]
    lines.append(f"gpp {gpp_count}")
    return "\n".join(lines) + "\n"


def parse_keyvalue(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SimError(f"config line {lineno}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def load_platform(layout_path: str | Path, config_path: str | Path | None = None) -> PlatformConfig:
    layout, gpp = parse_layout(Path(layout_path).read_text())
    settings = parse_keyvalue(Path(config_path).read_text()) if config_path else {}
    if "gpp" in settings:
        gpp = int(settings["gpp"])
    return PlatformConfig(layout, gpp, settings.get("scheduler", "S2"))


def export_trace(result: SimResult) -> str:
    lines = ["node resource reconfig_start reconfig_end exec_start finish"]
    for p in result.schedule:
        rs = "-" if p.reconfig_start is None else str(p.reconfig_start)
        re = "-" if p.reconfig_end is None else str(p.reconfig_end)
        lines.append(f"{p.node_id} {p.resource[0]}{p.resource[1]} {rs} {re} {p.exec_start} {p.finish}")
    return "\n".join(lines) + "\n"
