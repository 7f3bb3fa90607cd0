from fractions import Fraction

import pytest

from rcpredict.dataset import (CaseSpec, Dataset, DatasetRecord, SweepRow, SweepTable,
                               build_dataset, default_cases, imbalance_ratio, platform,
                               select_fittest, sweep)
from rcpredict.dfg import Dfg
from rcpredict.generator import GenParams, generate_corpus, generate_dfg
from rcpredict.library import default_library
from rcpredict.sim import simulate

from conftest import make_lib, spec


@pytest.fixture(scope="module")
def corpus():
    return generate_corpus(GenParams(corpus_size=12, node_count_range=(5, 80), seed=3))


@pytest.fixture(scope="module")
def lib():
    return default_library()


def two_candidate_case(objective="min_time"):
    return CaseSpec("T", (platform(200, 4, 1, "S2"), platform(200, 4, 1, "S3")), objective, "scheduler")


def table(rows):
    return SweepTable("T", [SweepRow(d, i, m, Fraction(e), a) for d, i, m, e, a in rows])


def test_default_case_class_counts():
    cases = default_cases()
    assert [len(cases[c].class_names) for c in ("I", "II", "III", "IV", "V")] == [2, 2, 4, 4, 3]


def test_sweep_cardinality_and_determinism(corpus, lib):
    one = sweep(corpus[:1], lib, default_cases()["V"])
    assert len(one.rows) == 3
    case = default_cases()["III"]
    assert sweep(corpus, lib, case).to_csv() == sweep(corpus, lib, case).to_csv()


def test_sweep_rows_match_direct_simulation(corpus, lib):
    case = default_cases()["I"]
    t = sweep(corpus[:3], lib, case)
    for r in t.rows:
        g = next(g for g in corpus if g.id == r.dfg_id)
        res = simulate(g, lib, case.candidates[r.config_index])
        assert (r.makespan, r.total_energy) == (res.makespan, res.total_energy)


def test_select_fittest_examples():
    case = two_candidate_case("min_time")
    w = select_fittest(table([("a", 0, 10, 1, 5), ("a", 1, 7, 1, 5)]), case)
    assert w["a"].label == "S3"
    w = select_fittest(table([("a", 0, 7, 1, 5), ("a", 1, 7, 1, 5)]), case)
    assert w["a"].label == "S2"


def test_min_time_power_normalised_tie():
    case = two_candidate_case("min_time_power")
    w = select_fittest(table([("a", 0, 100, 2, 5), ("a", 1, 200, 1, 5)]), case)
    # normalised sums are 0 + 1 and 1 + 0: a tie resolved by candidate index
    assert w["a"].config_index == 0


def test_min_time_area_tie_uses_area():
    case = CaseSpec("V", (platform(100, 2, 1, "S3"), platform(100, 4, 1, "S3")), "min_time_area", "layout")
    w = select_fittest(table([("a", 0, 50, 9, 80), ("a", 1, 50, 9, 40)]), case)
    assert w["a"].label == "4U"


def test_winner_is_optimal_on_full_table(corpus, lib):
    for case in default_cases().values():
        t = sweep(corpus, lib, case)
        winners = select_fittest(t, case)
        for dfg_id, rows in t.by_dfg().items():
            feasible = [r for r in rows if r.feasible]
            win = winners[dfg_id]
            if case.objective == "min_power":
                assert all(win.total_energy <= r.total_energy for r in feasible)
            elif case.objective in ("min_time", "min_time_area"):
                assert all(win.makespan <= r.makespan for r in feasible)


def test_infeasible_rows_are_excluded():
    lib = make_lib(spec(1, area=90))
    g = Dfg("big", ((0, 1),), ())
    case = CaseSpec("X", (platform(100, 4, 0, "S2"), platform(100, 4, 0, "S3")), "min_time", "scheduler")
    t = sweep([g], lib, case)
    assert t.excluded == ["big"] and all(not r.feasible for r in t.rows)
    assert build_dataset([g], lib, case, table=t).records == []
    back = SweepTable.from_csv("X", t.to_csv())
    assert back.excluded == ["big"]


def test_build_dataset_round_trip(tmp_path, corpus, lib):
    case = default_cases()["IV"]
    ds = build_dataset(corpus, lib, case)
    assert len(ds.records) == len(corpus) and ds.class_names == case.class_names
    ds.save(tmp_path / "d.csv")
    back = Dataset.load(tmp_path / "d.csv")
    assert back.to_csv() == ds.to_csv() and back.class_names == ds.class_names
    assert (tmp_path / "d.csv").read_text() == build_dataset(corpus, lib, case).to_csv()


def test_identical_corpus_gives_identical_labels(lib):
    g = generate_dfg(GenParams(node_count_range=(30, 30)), 0)
    copies = [Dfg(f"c{i}", g.nodes, g.edges) for i in range(4)]
    ds = build_dataset(copies, lib, default_cases()["III"])
    assert len(set(ds.y.tolist())) == 1


def test_imbalance_ratio():
    def ds(counts):
        recs = [DatasetRecord(str(i), [0.0], c) for i, c in enumerate(
            c for c, n in enumerate(counts) for _ in range(n))]
        return Dataset("T", [f"k{i}" for i in range(len(counts))], ["f"], recs)
    assert imbalance_ratio(ds([5, 5])).ratio == 1
    assert imbalance_ratio(ds([9, 1])).ratio == 9
    assert imbalance_ratio(ds([4, 2, 2])).ratio == 2
    r = imbalance_ratio(ds([4, 0, 2]))
    assert r.ratio == 2 and r.empty_classes == ("k1",)
    assert imbalance_ratio(ds([3, 0])).degenerate


def test_case_validation():
    with pytest.raises(ValueError):
        CaseSpec("bad", (platform(200, 4, 1, "S3"),), "min_time", "scheduler")
    with pytest.raises(ValueError):
        CaseSpec("bad", (platform(200, 4, 1, "S2"), platform(200, 4, 1, "S3")), "max_fun", "scheduler")
