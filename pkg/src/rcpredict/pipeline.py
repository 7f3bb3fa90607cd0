"""End-to-end pipeline: corpus, sweeps, datasets, evaluation, baseline and reports.

Every stage reads the artifacts of the previous one from the output directory
and writes its own next to a ``.manifest.json`` sidecar holding the digests of
its inputs. Nothing here depends on wall-clock time, so unchanged inputs give
byte-identical artifacts. Training times are the one exception and live in
their own ``timings_*.csv`` files.
"""
from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import logging
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import (CLASS_BY, OBJECTIVES, CaseSpec, Dataset, SweepTable, build_dataset,
                      default_cases, fitness_keys, platform, sweep)
from .dfg import Dfg, DfgError, load_corpus, load_dfg, serialize_dfg
from .features import extract_features, feature_row
from .generator import GenParams, generate_corpus
from .library import TaskLibrary, TaskLibraryError, default_library, load_library, save_library
from .ml import (KINDS, ClassifierSpec, FoldScores, ModelError, TrainedModel, corrected_t_test,
                 cross_validate, stratified_folds, train_arrays)
from .ml.base import DEFAULTS, make_rng

log = logging.getLogger(__name__)

ENV_OUTPUT = "RCPREDICT_OUTPUT"
SPLIT_STREAM = 0x5917
BASELINE_STREAM = 0xBA5E


class PipelineError(Exception):
    exit_code = 1


class MissingInputError(PipelineError):
    exit_code = 2


class ValidationFailure(PipelineError):
    exit_code = 3


# -- digests and artifact helpers ---------------------------------------------

def digest_text(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode()).hexdigest()


def digest_file(path: Path) -> str:
    try:
        return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except FileNotFoundError as exc:
        raise MissingInputError(f"missing input {path}") from exc


def dfg_digests(corpus: Sequence[Dfg]) -> dict[str, str]:
    return {g.id: digest_text(serialize_dfg(g)) for g in corpus}


def corpus_digest(corpus: Sequence[Dfg]) -> str:
    return digest_text(json.dumps(dfg_digests(corpus), sort_keys=True))


def manifest_path(path: Path) -> Path:
    return path.with_suffix(".manifest.json")


def write_artifact(path: Path, text: str, manifest: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    manifest_path(path).write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return path


def read_manifest(path: Path) -> dict:
    p = manifest_path(path)
    if not p.exists():
        raise MissingInputError(f"missing manifest {p}")
    return json.loads(p.read_text())


def fmt(x) -> str:
    if x is None:
        return "NA"
    if isinstance(x, Fraction) and x.denominator == 1:
        return str(x.numerator)
    if isinstance(x, int):
        return str(x)
    return f"{float(x):.6f}"


def _csv(rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


# -- configuration ------------------------------------------------------------

def _range(text: str, cast=int) -> tuple:
    lo, _, hi = text.partition("-")
    return cast(lo), cast(hi or lo)


def _list(text: str) -> list[str]:
    return [t.strip() for t in text.replace(";", ",").split(",") if t.strip()]


def _value(text: str):
    t = text.strip()
    if t.lower() in ("none", "null", ""):
        return None
    if t.lower() in ("true", "yes"):
        return True
    if t.lower() in ("false", "no"):
        return False
    for cast in (int, float):
        try:
            return cast(t)
        except ValueError:
            pass
    return t


def parse_candidate(text: str) -> "PlatformConfig":
    """``gpp:layout@fabric:scheduler``, e.g. ``1:4S@100:S3`` (U uniform, S skewed)."""
    try:
        gpp, rest, sched = text.strip().split(":")
        lay, fabric = rest.split("@")
        shape = {"U": "uniform", "S": "skewed"}[lay[-1].upper()]
        return platform(int(fabric), int(lay[:-1]), int(gpp), sched, shape)
    except (ValueError, KeyError) as exc:
        raise ValidationFailure(f"bad candidate {text!r}: expected <gpp>:<prrs>U|S@<fabric>:<scheduler>, e.g. 1:4S@100:S3") from exc


@dataclass
class PipelineConfig:
    output: Path
    corpus_dir: Path
    library_path: Path
    library_seed: int = 0
    gen: GenParams = field(default_factory=GenParams)
    cases: dict[str, CaseSpec] = field(default_factory=default_cases)
    case_ids: list[str] = field(default_factory=lambda: list(default_cases()))
    classifiers: list[ClassifierSpec] = field(default_factory=list)
    folds: int = 10
    seeds: list[int] = field(default_factory=lambda: [0])
    alpha: Fraction = Fraction(1, 20)
    holdout_folds: int = 3
    baseline_cases: list[str] = field(default_factory=lambda: ["III"])
    baseline_classifier: str = "RandomForest"
    baseline_seed: int = 0
    figures: bool = True

    def specs(self, seed: int) -> list[ClassifierSpec]:
        return [ClassifierSpec(s.kind, s.hyperparameters, seed) for s in self.classifiers]

    def spec_for(self, kind: str, seed: int) -> ClassifierSpec:
        for s in self.classifiers:
            if s.kind == kind:
                return ClassifierSpec(kind, s.hyperparameters, seed)
        return ClassifierSpec(kind, {}, seed)

    def case(self, case_id: str) -> CaseSpec:
        if case_id not in self.cases:
            raise ValidationFailure(f"unknown case {case_id!r}; known: {sorted(self.cases)}")
        return self.cases[case_id]

    def path(self, *parts: str) -> Path:
        return self.output.joinpath(*parts)


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> PipelineConfig:
    """Read an INI-style config; relative paths resolve against the config's directory.

    ``overrides`` maps ``"section.key"`` to a string value and wins over the file.
    The output directory can also be set through the RCPREDICT_OUTPUT variable.
    """
    cp = configparser.ConfigParser(interpolation=None)
    base = Path.cwd()
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise MissingInputError(f"config file {path} not found")
        cp.read_string(path.read_text())
        base = path.resolve().parent
    for key, value in (overrides or {}).items():
        section, _, name = key.rpartition(".")
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, name, str(value))

    def get(section, key, default):
        return cp.get(section, key, fallback=default)

    def resolve(p: str) -> Path:
        q = Path(p)
        return q if q.is_absolute() else base / q

    try:
        output = Path(os.environ[ENV_OUTPUT]) if os.environ.get(ENV_OUTPUT) else resolve(get("paths", "output", "out"))
        corpus = get("paths", "corpus", "")
        library = get("paths", "library", "")
        gen = GenParams(
            node_count_range=_range(get("generator", "nodes", "5-1000")),
            edges_per_node_target=_range(get("generator", "edges_per_node", "0.0-2.0"), float),
            task_type_count_range=_range(get("generator", "task_types", "3-16")),
            seed=int(get("generator", "seed", "0")),
            corpus_size=int(get("generator", "corpus_size", "258")),
        )
        cases = default_cases()
        for section in cp.sections():
            if not section.startswith("case."):
                continue
            cid = section[5:]
            old = cases.get(cid)
            cands = cp.get(section, "candidates", fallback=None)
            objective = cp.get(section, "objective", fallback=old.objective if old else None)
            class_by = cp.get(section, "class_by", fallback=old.class_by if old else None)
            if objective not in OBJECTIVES or class_by not in CLASS_BY:
                raise ValidationFailure(f"[{section}]: objective must be one of {OBJECTIVES}, "
                                        f"class_by one of {CLASS_BY}")
            candidates = tuple(parse_candidate(c) for c in _list(cands)) if cands else old.candidates
            cases[cid] = CaseSpec(cid, candidates, objective, class_by)
        kinds = _list(get("evaluation", "classifiers", "all"))
        kinds = list(KINDS) if kinds == ["all"] else kinds
        specs = []
        for kind in kinds:
            sec = f"classifier.{kind}"
            hp = {k: _value(v) for k, v in cp.items(sec)} if cp.has_section(sec) else {}
            specs.append(ClassifierSpec(kind, hp, 0))
        cfg = PipelineConfig(
            output=output,
            corpus_dir=resolve(corpus) if corpus else output / "corpus",
            library_path=resolve(library) if library else output / "library.txt",
            library_seed=int(get("library", "seed", "0")),
            gen=gen,
            cases=cases,
            case_ids=_list(get("evaluation", "cases", ",".join(cases))),
            classifiers=specs,
            folds=int(get("evaluation", "folds", "10")),
            seeds=[int(s) for s in _list(get("evaluation", "seeds", "0"))],
            alpha=Fraction(get("evaluation", "alpha", "0.05")),
            holdout_folds=int(get("baseline", "holdout_folds", "3")),
            baseline_cases=_list(get("baseline", "cases", "III")),
            baseline_classifier=get("baseline", "classifier", "RandomForest"),
            baseline_seed=int(get("baseline", "seed", "0")),
            figures=cp.getboolean("report", "figures", fallback=True),
        )
    except (ValueError, ModelError) as exc:
        raise ValidationFailure(f"bad configuration: {exc}") from exc
    for cid in cfg.case_ids + cfg.baseline_cases:
        cfg.case(cid)
    if cfg.baseline_classifier not in KINDS:
        raise ValidationFailure(f"unknown baseline classifier {cfg.baseline_classifier!r}")
    if cfg.holdout_folds < 2:
        raise ValidationFailure("holdout_folds must be >= 2")
    return cfg


# -- phase 1: data preparation ------------------------------------------------

def run_generate(cfg: PipelineConfig) -> list[Dfg]:
    """Write the synthetic corpus and, unless one is supplied, the default task library."""
    corpus = generate_corpus(cfg.gen, cfg.corpus_dir)
    if not cfg.library_path.exists():
        cfg.library_path.parent.mkdir(parents=True, exist_ok=True)
        save_library(default_library(cfg.library_seed), cfg.library_path)
    return corpus


def load_inputs(cfg: PipelineConfig) -> tuple[list[Dfg], TaskLibrary]:
    if not cfg.library_path.exists():
        raise MissingInputError(f"task library {cfg.library_path} not found (run generate)")
    if not cfg.corpus_dir.is_dir():
        raise MissingInputError(f"corpus directory {cfg.corpus_dir} not found (run generate)")
    try:
        lib = load_library(cfg.library_path)
        corpus = load_corpus(cfg.corpus_dir)
    except (DfgError, TaskLibraryError) as exc:
        raise ValidationFailure(str(exc)) from exc
    if not corpus:
        raise MissingInputError(f"no .dfg files in {cfg.corpus_dir}")
    return corpus, lib


def _inputs(corpus, cfg) -> dict:
    return {"corpus": corpus_digest(corpus), "library": digest_file(cfg.library_path)}


def sweep_path(cfg, cid) -> Path:
    return cfg.path("sweep", f"case_{cid}.csv")


def dataset_path(cfg, cid) -> Path:
    return cfg.path("datasets", f"case_{cid}.csv")


def run_sweep(cfg: PipelineConfig, case_ids: Sequence[str] | None = None) -> dict[str, SweepTable]:
    corpus, lib = load_inputs(cfg)
    inputs = _inputs(corpus, cfg)
    cache: dict = {}
    out = {}
    for cid in case_ids or cfg.case_ids:
        case = cfg.case(cid)
        try:
            table = sweep(corpus, lib, case, cache)
        except ValueError as exc:
            raise ValidationFailure(str(exc)) from exc
        write_artifact(sweep_path(cfg, cid), table.to_csv(),
                       {"artifact": "sweep", "case": case.to_dict(), "inputs": inputs,
                        "excluded": table.excluded})
        out[cid] = table
    return out


def run_dataset(cfg: PipelineConfig, case_ids: Sequence[str] | None = None) -> dict[str, Dataset]:
    corpus, lib = load_inputs(cfg)
    inputs = _inputs(corpus, cfg)
    out = {}
    for cid in case_ids or cfg.case_ids:
        case = cfg.case(cid)
        spath = sweep_path(cfg, cid)
        if not spath.exists():
            raise MissingInputError(f"sweep table {spath} not found (run sweep)")
        table = SweepTable.from_csv(cid, spath.read_text())
        ds = build_dataset(corpus, lib, case, table=table)
        ds.manifest.update(artifact="dataset", inputs={**inputs, "sweep": digest_file(spath)})
        path = dataset_path(cfg, cid)
        path.parent.mkdir(parents=True, exist_ok=True)
        ds.save(path)
        out[cid] = ds
    return out


def load_dataset(cfg: PipelineConfig, cid: str) -> Dataset:
    path = dataset_path(cfg, cid)
    if not path.exists():
        raise MissingInputError(f"dataset {path} not found (run dataset)")
    return Dataset.load(path)


# -- phase 2: training and testing ----------------------------------------------

@dataclass
class CaseEvaluation:
    case_id: str
    kinds: list[str]
    scores: dict[str, list[FoldScores]]  # kind -> one FoldScores per seed

    def mean_accuracy(self, kind: str) -> float:
        return float(np.mean([fs.mean_accuracy for fs in self.scores[kind]]))

    def mean_auc(self, kind: str) -> float | None:
        vals = [fs.mean_auc for fs in self.scores[kind] if fs.mean_auc is not None]
        return float(np.mean(vals)) if vals else None

    def overall_accuracy(self) -> float:
        return float(np.mean([self.mean_accuracy(k) for k in self.kinds]))

    def significance(self, alpha) -> list[list[str]]:
        """Cell (i, j) is the verdict for classifier j against baseline i on the first seed."""
        first = {k: self.scores[k][0] for k in self.kinds}
        return [["-" if a == b else corrected_t_test(first[a], first[b], alpha).verdict
                 for b in self.kinds] for a in self.kinds]


def holdout_split(ds: Dataset, folds: int, seed: int) -> tuple[list[int], list[int]]:
    """Stratified split: one of ``folds`` parts is held out for the baseline."""
    assign = stratified_folds(ds.y, min(folds, len(ds.records)), make_rng(seed, SPLIT_STREAM))
    return ([i for i in range(len(assign)) if assign[i] != 0],
            [i for i in range(len(assign)) if assign[i] == 0])


def model_path(cfg, cid, kind) -> Path:
    return cfg.path("models", f"case_{cid}", f"{kind}.json")


def evaluate_case(cfg: PipelineConfig, cid: str, ds: Dataset) -> CaseEvaluation:
    kinds = [s.kind for s in cfg.classifiers]
    scores = {k: [] for k in kinds}
    for seed in cfg.seeds:
        for spec in cfg.specs(seed):
            try:
                scores[spec.kind].append(
                    cross_validate(ds.X, ds.y, ds.class_names, spec, cfg.folds, seed))
            except ModelError as exc:
                raise ValidationFailure(f"case {cid}, {spec.kind}: {exc}") from exc
    return CaseEvaluation(cid, kinds, scores)


def write_evaluation(cfg: PipelineConfig, ev: CaseEvaluation, inputs: dict) -> None:
    cid = ev.case_id
    folds = [["seed", "classifier", "fold", "accuracy", "auc"]]
    timings = [["seed", "classifier", "train_seconds"]]
    for kind in ev.kinds:
        for seed, fs in zip(cfg.seeds, ev.scores[kind]):
            for f, (acc, a) in enumerate(zip(fs.accuracies, fs.aucs)):
                folds.append([seed, kind, f, fmt(acc), fmt(a)])
            timings.append([seed, kind, f"{fs.train_seconds:.4f}"])
    summary = [["classifier", "mean_accuracy", "mean_auc"]]
    summary += [[k, fmt(ev.mean_accuracy(k)), fmt(ev.mean_auc(k))] for k in ev.kinds]
    sig = [["baseline"] + ev.kinds]
    sig += [[k] + row for k, row in zip(ev.kinds, ev.significance(cfg.alpha))]
    manifest = {"artifact": "evaluation", "case_id": cid, "inputs": inputs, "folds": cfg.folds,
                "seeds": cfg.seeds, "alpha": str(cfg.alpha),
                "classifiers": [s.to_dict() for s in cfg.specs(cfg.seeds[0])]}
    rep = cfg.path("reports")
    write_artifact(rep / f"folds_case_{cid}.csv", _csv(folds), manifest)
    write_artifact(rep / f"summary_case_{cid}.csv", _csv(summary), manifest)
    write_artifact(rep / f"significance_case_{cid}.csv", _csv(sig), manifest)
    rep.joinpath(f"timings_case_{cid}.csv").write_text(_csv(timings))


def train_models(cfg: PipelineConfig, cid: str, ds: Dataset, corpus_digests: dict[str, str],
                 inputs: dict) -> dict[str, TrainedModel]:
    """Fit every classifier on the training part of the holdout split."""
    train_idx, test_idx = holdout_split(ds, cfg.holdout_folds, cfg.baseline_seed)
    tr = ds.subset(train_idx)
    out = {}
    for spec in cfg.specs(cfg.seeds[0]):
        try:
            model = train_arrays(tr.X, tr.y, ds.class_names, spec, ds.feature_names)
        except ModelError as exc:
            raise ValidationFailure(f"case {cid}, {spec.kind}: {exc}") from exc
        path = model_path(cfg, cid, spec.kind)
        write_artifact(path, model.dumps(), {
            "artifact": "model", "case_id": cid, "inputs": inputs,
            "training_dfgs": {i: corpus_digests[i] for i in tr.ids},
            "heldout_dfgs": [ds.records[i].dfg_id for i in test_idx]})
        out[spec.kind] = model
    return out


def run_evaluate(cfg: PipelineConfig, case_ids: Sequence[str] | None = None) -> dict[str, CaseEvaluation]:
    corpus, _ = load_inputs(cfg)
    digests = dfg_digests(corpus)
    out = {}
    for cid in case_ids or cfg.case_ids:
        ds = load_dataset(cfg, cid)
        inputs = {"dataset": digest_file(dataset_path(cfg, cid))}
        ev = evaluate_case(cfg, cid, ds)
        write_evaluation(cfg, ev, inputs)
        train_models(cfg, cid, ds, digests, inputs)
        out[cid] = ev
    return out


def predict_dfgs(model: TrainedModel, lib: TaskLibrary, dfgs: Sequence[Dfg]) -> list[str]:
    """One line per DFG: id, predicted class, then class=probability pairs."""
    lines = []
    for g in dfgs:
        proba = model.predict_proba(np.array([feature_row(extract_features(g, lib))]))[0]
        label = model.class_names[int(np.argmax(proba))]
        dist = ";".join(f"{c}={p:.6f}" for c, p in zip(model.class_names, proba))
        lines.append(f"{g.id},{label},{dist}")
    return lines


# -- phase 3: baseline against random selection --------------------------------

def baseline_metrics(rows, objective: str) -> list[Fraction]:
    """Per feasible row, the scalar the baseline compares (smaller is better).

    Energy for min_power, makespan for min_time and min_time_area, and the
    normalised time+energy score for min_time_power.
    """
    if objective == "min_power":
        return [r.total_energy for r in rows]
    if objective in ("min_time", "min_time_area"):
        return [Fraction(r.makespan) for r in rows]
    return [k[0] for k in fitness_keys(rows, objective)]


@dataclass
class BaselineRow:
    dfg_id: str
    random: Fraction
    random_expected: Fraction
    best: Fraction
    ml: Fraction | None
    best_class: str
    ml_class: str

    @property
    def mismatch(self) -> bool:
        return self.ml != self.best


@dataclass
class BaselineTable:
    case_id: str
    objective: str
    rows: list[BaselineRow]

    def averages(self) -> dict[str, float]:
        def avg(xs):
            xs = [x for x in xs if x is not None]
            return float(sum(xs) / len(xs)) if xs else float("nan")
        return {"random": avg([r.random for r in self.rows]),
                "random_expected": avg([r.random_expected for r in self.rows]),
                "best": avg([r.best for r in self.rows]),
                "ml": avg([r.ml for r in self.rows])}

    def ml_beats_random_share(self) -> float:
        wins = sum(1 for r in self.rows if r.ml is not None and r.ml < r.random_expected)
        return wins / len(self.rows)

    def check(self) -> None:
        for r in self.rows:
            others = [r.random, r.random_expected] + ([r.ml] if r.ml is not None else [])
            if any(r.best > o for o in others):
                raise ValidationFailure(f"baseline row {r.dfg_id}: best exceeds another column")

    def to_csv(self) -> str:
        rows = [["dfg_id", "random", "random_expected", "best", "ml", "best_class", "ml_class", "mark"]]
        for r in self.rows:
            rows.append([r.dfg_id, fmt(r.random), fmt(r.random_expected), fmt(r.best),
                         fmt(r.ml) if r.ml is not None else "infeasible", r.best_class,
                         r.ml_class, "*" if r.mismatch else ""])
        a = self.averages()
        rows.append(["average", fmt(a["random"]), fmt(a["random_expected"]), fmt(a["best"]),
                     fmt(a["ml"]), "", "", ""])
        return _csv(rows)


def baseline(corpus: Sequence[Dfg], lib: TaskLibrary, case: CaseSpec, model: TrainedModel,
             seed: int = 0) -> BaselineTable:
    """Random, exhaustive-best and model-chosen candidates for each DFG.

    The random candidate is drawn uniformly from the feasible candidates; its
    expectation is the plain mean over them. The model's class maps to the
    fittest feasible candidate carrying that class.
    """
    rng = make_rng(seed, BASELINE_STREAM)
    table = sweep(corpus, lib, case)
    by_dfg = table.by_dfg()
    rows = []
    for g in corpus:
        feasible = [r for r in by_dfg[g.id] if r.feasible]
        if not feasible:
            continue
        metric = baseline_metrics(feasible, case.objective)
        keys = fitness_keys(feasible, case.objective)
        best = min(range(len(feasible)), key=lambda i: keys[i])
        pick = int(rng.integers(len(feasible)))
        label, _ = _predict_one(model, lib, g)
        in_class = [i for i, r in enumerate(feasible)
                    if case.class_of(case.candidates[r.config_index]) == label]
        ml = metric[min(in_class, key=lambda i: keys[i])] if in_class else None
        rows.append(BaselineRow(
            g.id, metric[pick], sum(metric) / len(metric), min(metric),
            ml, case.class_of(case.candidates[feasible[best].config_index]), label))
    out = BaselineTable(case.case_id, case.objective, rows)
    out.check()
    return out


def _predict_one(model, lib, g):
    proba = model.predict_proba(np.array([feature_row(extract_features(g, lib))]))[0]
    return model.class_names[int(np.argmax(proba))], proba


def run_baseline(cfg: PipelineConfig, case_ids: Sequence[str] | None = None,
                 model_file: Path | None = None, dfg_files: Sequence[Path] = ()) -> dict[str, BaselineTable]:
    """Baseline on held-out DFGs; refuses any DFG the model was trained on."""
    corpus, lib = load_inputs(cfg)
    out = {}
    for cid in case_ids or cfg.baseline_cases:
        case = cfg.case(cid)
        mpath = Path(model_file) if model_file else model_path(cfg, cid, cfg.baseline_classifier)
        if not mpath.exists():
            raise MissingInputError(f"model {mpath} not found (run evaluate)")
        meta = read_manifest(mpath)
        if "training_dfgs" not in meta:
            raise ValidationFailure(f"{mpath}: manifest lacks training DFG digests; cannot verify a held-out baseline")
        model = TrainedModel.load(mpath)
        if list(model.class_names) != case.class_names:
            raise ValidationFailure(f"model classes {model.class_names} do not match case {cid}")
        if dfg_files:
            try:
                dfgs = [load_dfg(p) for p in dfg_files]
            except FileNotFoundError as exc:
                raise MissingInputError(str(exc)) from exc
        else:
            held = set(meta.get("heldout_dfgs", []))
            dfgs = [g for g in corpus if g.id in held]
        trained = set(meta["training_dfgs"].values())
        overlap = [g.id for g in dfgs if digest_text(serialize_dfg(g)) in trained]
        if overlap:
            raise ValidationFailure(f"refusing baseline: {len(overlap)} DFG(s) were used in training "
                                    f"(e.g. {overlap[0]})")
        if not dfgs:
            raise MissingInputError("no held-out DFGs to evaluate")
        table = baseline(dfgs, lib, case, model, cfg.baseline_seed)
        write_artifact(cfg.path("baseline", f"case_{cid}.csv"), table.to_csv(), {
            "artifact": "baseline", "case_id": cid, "seed": cfg.baseline_seed,
            "inputs": {"model": digest_file(mpath), "library": digest_file(cfg.library_path),
                       "dfgs": dfg_digests(dfgs)},
            "ml_beats_random_share": fmt(table.ml_beats_random_share())})
        out[cid] = table
    return out


# -- reports ----------------------------------------------------------------------

def _read_csv(path: Path) -> list[list[str]]:
    return list(csv.reader(io.StringIO(path.read_text())))


def run_report(cfg: PipelineConfig) -> list[Path]:
    """Cross-case tables, plot series and, if enabled, PNG figures."""
    rep = cfg.path("report")
    written = []
    cases = [c for c in cfg.case_ids if cfg.path("reports", f"summary_case_{c}.csv").exists()]
    if not cases:
        raise MissingInputError("no evaluation summaries found (run evaluate)")
    acc: dict[str, dict[str, float]] = {}
    inputs = {}
    for cid in cases:
        path = cfg.path("reports", f"summary_case_{cid}.csv")
        inputs[path.name] = digest_file(path)
        for kind, a, _ in _read_csv(path)[1:]:
            acc.setdefault(kind, {})[cid] = float(a)
    kinds = list(acc)
    table = [["classifier"] + cases]
    table += [[k] + [fmt(acc[k].get(c)) for c in cases] for k in kinds]
    table.append(["mean"] + [fmt(np.mean([acc[k][c] for k in kinds if c in acc[k]])) for c in cases])
    series = [["series", "x", "y"]]
    series += [[k, c, fmt(acc[k][c])] for k in kinds for c in cases if c in acc[k]]
    counts = [["case", "class", "count"]]
    class_counts = {}
    for cid in cases:
        path = dataset_path(cfg, cid)
        if path.exists():
            ds = Dataset.load(path)
            inputs[path.name] = digest_file(path)
            class_counts[cid] = list(zip(ds.class_names, ds.class_counts()))
            counts += [[cid, n, c] for n, c in class_counts[cid]]
    baselines = {}
    for cid in cfg.baseline_cases:
        path = cfg.path("baseline", f"case_{cid}.csv")
        if path.exists():
            inputs[path.name] = digest_file(path)
            baselines[cid] = _read_csv(path)
    manifest = {"artifact": "report", "inputs": inputs}
    written.append(write_artifact(rep / "accuracy_by_case.csv", _csv(table), manifest))
    written.append(write_artifact(rep / "plot_accuracy.csv", _csv(series), manifest))
    written.append(write_artifact(rep / "class_counts.csv", _csv(counts), manifest))
    if cfg.figures:
        from . import plots
        written.append(plots.accuracy_bars(acc, cases, rep / "accuracy_by_case.png"))
        if class_counts:
            written.append(plots.class_distribution(class_counts, rep / "class_distribution.png"))
        for cid, rows in baselines.items():
            written.append(plots.baseline_bars(cid, rows, rep / f"baseline_case_{cid}.png"))
    return written


def run_all(cfg: PipelineConfig) -> None:
    run_generate(cfg)
    run_sweep(cfg)
    run_dataset(cfg)
    run_evaluate(cfg)
    run_baseline(cfg)
    run_report(cfg)
