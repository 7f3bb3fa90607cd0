"""Sweeps over candidate platforms, fittest-record labelling and dataset files."""
from __future__ import annotations

import csv
import io
import json
import logging
import os
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .dfg import Dfg
from .features import extract_features, feature_row, feature_schema, format_value
from .library import TaskLibrary
from .sim import (InfeasibleError, Layout, PlatformConfig, SimError, simulate, skewed_layout,
                  uniform_layout, validate_schedule)

log = logging.getLogger(__name__)

OBJECTIVES = ("min_power", "min_time", "min_time_power", "min_time_area")
CLASS_BY = ("scheduler", "gpp_prr", "layout")


@dataclass(frozen=True)
class CaseSpec:
    case_id: str
    candidates: tuple[PlatformConfig, ...]
    objective: str
    class_by: str

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if self.objective not in OBJECTIVES:
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.class_by not in CLASS_BY:
            raise ValueError(f"unknown class projection {self.class_by!r}")
        if not self.candidates:
            raise ValueError("empty candidate set")
        if len(self.class_names) < 2:
            raise ValueError(f"case {self.case_id}: candidates span fewer than 2 classes")

    def class_of(self, cfg: PlatformConfig) -> str:
        if self.class_by == "scheduler":
            return cfg.scheduler
        if self.class_by == "gpp_prr":
            return f"{cfg.gpp_count}GPP-{len(cfg.layout.prr_sizes)}PRR"
        return cfg.layout.id

    @property
    def class_names(self) -> list[str]:
        names: list[str] = []
        for c in self.candidates:
            name = self.class_of(c)
            if name not in names:
                names.append(name)
        return names

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id, "objective": self.objective, "class_by": self.class_by,
            "candidates": [config_to_dict(c) for c in self.candidates],
            "class_names": self.class_names,
        }


def config_to_dict(cfg: PlatformConfig) -> dict:
    return {"fabric": cfg.layout.fabric_area, "prr_sizes": list(cfg.layout.prr_sizes),
            "shape": cfg.layout.shape_tag, "gpp": cfg.gpp_count, "scheduler": cfg.scheduler}


SCHED_FABRIC = 200
LAYOUT_FABRIC = 100
# small enough that the largest hybrid types only fit the 2-PRR layouts
COMBO_FABRIC = 140
GPP_FOOTPRINT = 20  # fabric area taken by one soft-core GPP


def platform(fabric: int, n_prr: int, gpp: int, scheduler: str, shape: str = "uniform",
             gpp_footprint: int = GPP_FOOTPRINT) -> PlatformConfig:
    """PRRs partition whatever fabric the soft-core GPPs leave free."""
    free = fabric - gpp * gpp_footprint
    lay = uniform_layout(free, n_prr) if shape == "uniform" else skewed_layout(free, n_prr)
    lay = Layout(fabric, lay.prr_sizes, lay.shape_tag)
    return PlatformConfig(lay, gpp, scheduler)


def default_cases() -> dict[str, CaseSpec]:
    combos = tuple(platform(COMBO_FABRIC, n, gpp, "S3") for gpp in (0, 1) for n in (2, 4))
    return {
        "I": CaseSpec("I", tuple(platform(SCHED_FABRIC, 4, 1, s) for s in ("S2", "S3")),
                      "min_power", "scheduler"),
        "II": CaseSpec("II", tuple(platform(SCHED_FABRIC, 4, 0, s) for s in ("S2", "S3")),
                       "min_power", "scheduler"),
        "III": CaseSpec("III", combos, "min_time", "gpp_prr"),
        "IV": CaseSpec("IV", combos, "min_time_power", "gpp_prr"),
        "V": CaseSpec("V", tuple(platform(LAYOUT_FABRIC, n, 1, "S3", shape)
                                 for n, shape in ((2, "uniform"), (4, "uniform"), (4, "skewed"))),
                      "min_time_area", "layout"),
    }


@dataclass(frozen=True)
class SweepRow:
    dfg_id: str
    config_index: int
    makespan: int | None  # None marks an infeasible pair
    total_energy: Fraction | None
    fabric_area_used: int | None

    @property
    def feasible(self) -> bool:
        return self.makespan is not None


@dataclass
class SweepTable:
    case_id: str
    rows: list[SweepRow]
    excluded: list[str] = field(default_factory=list)  # DFGs infeasible under every candidate

    def by_dfg(self) -> dict[str, list[SweepRow]]:
        out: dict[str, list[SweepRow]] = {}
        for r in self.rows:
            out.setdefault(r.dfg_id, []).append(r)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dfg_id", "config_index", "makespan", "total_energy", "fabric_area_used"])
        for r in self.rows:
            if r.feasible:
                w.writerow([r.dfg_id, r.config_index, r.makespan, format_value(r.total_energy),
                            r.fabric_area_used])
            else:
                w.writerow([r.dfg_id, r.config_index, "infeasible", "infeasible", "infeasible"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, case_id: str, text: str) -> "SweepTable":
        rows = []
        for rec in csv.DictReader(io.StringIO(text)):
            if rec["makespan"] == "infeasible":
                rows.append(SweepRow(rec["dfg_id"], int(rec["config_index"]), None, None, None))
            else:
                rows.append(SweepRow(rec["dfg_id"], int(rec["config_index"]), int(rec["makespan"]),
                                     Fraction(rec["total_energy"]), int(rec["fabric_area_used"])))
        table = cls(case_id, rows)
        table.excluded = [d for d, rs in table.by_dfg().items() if not any(r.feasible for r in rs)]
        return table


def run_config(dfg: Dfg, lib: TaskLibrary, cfg: PlatformConfig, validate: bool = True):
    """Simulate one pair; returns ``(makespan, energy, area_used)`` or ``None`` if infeasible."""
    try:
        res = simulate(dfg, lib, cfg)
    except InfeasibleError:
        return None
    if validate:
        report = validate_schedule(res, dfg, lib, cfg)
        if not report.ok:
            raise SimError(f"{dfg.id} under {cfg.describe()}: invalid schedule {report.violations[:3]}")
    return res.makespan, res.total_energy, res.fabric_area_used


def _sweep_one(args):
    dfg, lib, configs, validate = args
    return [run_config(dfg, lib, c, validate) for c in configs]


def _jobs() -> int:
    try:
        return max(1, int(os.environ.get("RCPREDICT_JOBS", "1")))
    except ValueError:
        return 1


def sweep(corpus: Sequence[Dfg], lib: TaskLibrary, case: CaseSpec,
          cache: dict | None = None, validate: bool = True) -> SweepTable:
    """Simulate every DFG under every candidate of ``case``.

    ``cache`` maps ``(dfg.id, config.key)`` to results and may be shared between
    cases whose candidate sets overlap.
    """
    cache = {} if cache is None else cache
    todo = []
    for g in corpus:
        missing = [c for c in case.candidates if (g.id, c.key) not in cache]
        if missing:
            todo.append((g, lib, missing, validate))
    if todo:
        jobs = _jobs()
        if jobs > 1 and len(todo) > 1:
            from multiprocessing import Pool
            with Pool(jobs) as pool:
                results = pool.map(_sweep_one, todo, chunksize=max(1, len(todo) // (4 * jobs)))
        else:
            results = [_sweep_one(t) for t in todo]
        for (g, _, configs, _), res in zip(todo, results):
            for c, r in zip(configs, res):
                cache[(g.id, c.key)] = r
    rows, excluded = [], []
    for g in corpus:
        feasible = False
        for i, c in enumerate(case.candidates):
            r = cache[(g.id, c.key)]
            if r is None:
                rows.append(SweepRow(g.id, i, None, None, None))
            else:
                feasible = True
                rows.append(SweepRow(g.id, i, r[0], r[1], r[2]))
        if not feasible:
            excluded.append(g.id)
            log.warning("DFG %s infeasible under every candidate of case %s; excluded", g.id, case.case_id)
    return SweepTable(case.case_id, rows, excluded)


def _normalise(values: list[Fraction]) -> list[Fraction]:
    lo, hi = min(values), max(values)
    if hi == lo:
        return [Fraction(0)] * len(values)
    return [(v - lo) / (hi - lo) for v in values]


def fitness_keys(rows: Sequence[SweepRow], objective: str) -> list[tuple]:
    """Sort keys for the feasible rows of one DFG; smaller is fitter."""
    if objective == "min_power":
        return [(r.total_energy, r.config_index) for r in rows]
    if objective == "min_time":
        return [(Fraction(r.makespan), r.config_index) for r in rows]
    if objective == "min_time_area":
        return [(Fraction(r.makespan), r.fabric_area_used, r.config_index) for r in rows]
    t = _normalise([Fraction(r.makespan) for r in rows])
    e = _normalise([r.total_energy for r in rows])
    return [(a + b, r.config_index) for a, b, r in zip(t, e, rows)]


def objective_value(row: SweepRow, objective: str) -> Fraction:
    """Scalar reported for a row in baseline tables (energy for power cases, else cycles)."""
    return row.total_energy if objective == "min_power" else Fraction(row.makespan)


@dataclass(frozen=True)
class Winner:
    dfg_id: str
    config_index: int
    label: str
    makespan: int
    total_energy: Fraction
    fabric_area_used: int


def select_fittest(table: SweepTable, case: CaseSpec) -> dict[str, Winner]:
    if not case.candidates:
        raise ValueError("empty candidate set")
    out = {}
    for dfg_id, rows in table.by_dfg().items():
        feasible = [r for r in rows if r.feasible]
        if not feasible:
            continue
        keys = fitness_keys(feasible, case.objective)
        best = feasible[min(range(len(feasible)), key=lambda i: keys[i])]
        out[dfg_id] = Winner(dfg_id, best.config_index,
                             case.class_of(case.candidates[best.config_index]),
                             best.makespan, best.total_energy, best.fabric_area_used)
    return out


@dataclass
class DatasetRecord:
    dfg_id: str
    features: list[float]
    label_index: int
    winning_metrics: dict | None = None


@dataclass
class Dataset:
    case_id: str
    class_names: list[str]
    feature_names: list[str]
    records: list[DatasetRecord]
    manifest: dict = field(default_factory=dict)

    def __post_init__(self):
        for r in self.records:
            if not 0 <= r.label_index < len(self.class_names):
                raise ValueError(f"record {r.dfg_id}: label index out of range")

    @property
    def X(self) -> np.ndarray:
        return np.array([r.features for r in self.records], dtype=float).reshape(
            len(self.records), len(self.feature_names))

    @property
    def y(self) -> np.ndarray:
        return np.array([r.label_index for r in self.records], dtype=int)

    @property
    def ids(self) -> list[str]:
        return [r.dfg_id for r in self.records]

    def subset(self, indices) -> "Dataset":
        return Dataset(self.case_id, list(self.class_names), list(self.feature_names),
                       [self.records[i] for i in indices], dict(self.manifest))

    def class_counts(self) -> list[int]:
        counts = Counter(r.label_index for r in self.records)
        return [counts.get(i, 0) for i in range(len(self.class_names))]

    def to_csv(self) -> str:
        lines = [",".join(["dfg_id"] + self.feature_names + ["label"])]
        for r in self.records:
            lines.append(",".join([r.dfg_id] + [format_value(v) for v in r.features]
                                  + [self.class_names[r.label_index]]))
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.write_text(self.to_csv())
        manifest = dict(self.manifest)
        manifest.update(case_id=self.case_id, class_names=self.class_names,
                        n_records=len(self.records))
        manifest["winners"] = {r.dfg_id: r.winning_metrics for r in self.records if r.winning_metrics}
        path.with_suffix(".manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Dataset":
        path = Path(path)
        mpath = path.with_suffix(".manifest.json")
        manifest = json.loads(mpath.read_text()) if mpath.exists() else {}
        rows = list(csv.reader(io.StringIO(path.read_text())))
        header, body = rows[0], rows[1:]
        if header[0] != "dfg_id" or header[-1] != "label":
            raise ValueError(f"{path}: not a dataset file")
        feature_names = header[1:-1]
        class_names = manifest.get("class_names") or sorted({r[-1] for r in body})
        winners = manifest.get("winners", {})
        records = [DatasetRecord(r[0], [float(v) for v in r[1:-1]], class_names.index(r[-1]),
                                 winners.get(r[0])) for r in body]
        return cls(manifest.get("case_id", path.stem), list(class_names), feature_names, records,
                   {k: v for k, v in manifest.items() if k != "winners"})


def build_dataset(corpus: Sequence[Dfg], lib: TaskLibrary, case: CaseSpec,
                  cache: dict | None = None, table: SweepTable | None = None) -> Dataset:
    if not corpus:
        raise ValueError("corpus is empty")
    table = table if table is not None else sweep(corpus, lib, case, cache)
    winners = select_fittest(table, case)
    records = []
    for g in corpus:
        w = winners.get(g.id)
        if w is None:
            continue
        feats = extract_features(g, lib)
        records.append(DatasetRecord(g.id, feature_row(feats), case.class_names.index(w.label), {
            "config_index": w.config_index, "makespan": w.makespan,
            "total_energy": format_value(w.total_energy), "fabric_area_used": w.fabric_area_used}))
    manifest = {"case": case.to_dict(), "excluded": list(table.excluded)}
    return Dataset(case.case_id, case.class_names, feature_schema(), records, manifest)


@dataclass(frozen=True)
class Imbalance:
    ratio: Fraction | None
    degenerate: bool
    counts: dict[str, int]
    empty_classes: tuple[str, ...]


def imbalance_ratio(ds: Dataset) -> Imbalance:
    """Majority over minority count among represented classes."""
    if not ds.records:
        raise ValueError("dataset has no records")
    counts = dict(zip(ds.class_names, ds.class_counts()))
    present = [c for c in counts.values() if c > 0]
    empty = tuple(n for n, c in counts.items() if c == 0)
    if len(present) < 2:
        return Imbalance(None, True, counts, empty)
    return Imbalance(Fraction(max(present), min(present)), False, counts, empty)
