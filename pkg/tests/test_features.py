import math
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from rcpredict.dfg import Dfg, graph_metrics
from rcpredict.features import (extract_features, feature_row, feature_schema, format_value,
                                write_feature_matrix)
from rcpredict.generator import GenParams, generate_dfg
from rcpredict.library import default_library

from conftest import chain, make_lib, spec


def test_schema_is_stable_and_starts_with_nodes():
    s = feature_schema()
    assert s[0] == "nodes" and s == feature_schema()
    assert len(s) == 15 + 16 + 4 + 21 == len(set(s))


def test_chain_of_one_hybrid_type():
    lib = make_lib(spec(1, "hybrid", hw=10, sw=25, area=5))
    f = extract_features(chain(3), lib)
    assert f["sharable_resources"] == 3 and f["task_type_count"] == 1 and f["migratable_tasks"] == 3
    assert f["task_type_freq_1"] == 3 and f["task_type_freq_2"] == 0


def test_isolated_nodes():
    lib = make_lib(spec(1))
    f = extract_features(Dfg("iso", ((0, 1), (1, 1), (2, 1)), ()), lib)
    assert (f["isolated_nodes"], f["subgraphs"], f["critical_path_longest"]) == (3, 3, 1)


def test_edges_per_node_106_88():
    # 106 nodes, 88 edges: a chain of 89 nodes plus 17 isolated nodes
    nodes = tuple((i, 1) for i in range(106))
    edges = tuple((i, i + 1) for i in range(88))
    f = extract_features(Dfg("bmp", nodes, edges), make_lib(spec(1)))
    assert f["edges_per_node"] == Fraction(88, 106)
    assert round(float(f["edges_per_node"]), 2) == 0.83


def test_aggregates_over_distinct_types():
    lib = make_lib(spec(1, hw=10, rt=4, area=3, hwp=2), spec(2, "hybrid", hw=20, sw=50, area=9, rt=7, hwp=3, swp=5),
                   spec(3, "software", sw=30, swp=4))
    d = Dfg("mix", ((0, 1), (1, 1), (2, 2), (3, 3)), ((0, 2),))
    f = extract_features(d, lib)
    assert (f["hw_latency_min"], f["hw_latency_max"], f["hw_latency_avg"]) == (10, 20, 15)
    assert (f["sw_latency_min"], f["sw_latency_max"]) == (30, 50)
    assert f["hw_exec_power_max"] == 60 and f["sw_exec_power_min"] == 120
    assert (f["hw_task_types"], f["sw_task_types"], f["migratable_tasks"]) == (2, 1, 1)
    assert f["sharable_resources"] == 2


def test_software_only_graph_has_zero_hw_aggregates():
    f = extract_features(chain(2), make_lib(spec(1, "software", sw=9)))
    assert f["hw_area_avg"] == f["hw_area_min"] == f["hw_area_max"] == 0
    assert all(math.isfinite(float(v)) for v in f.values())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.randoms(use_true_random=False))
def test_relabeling_invariance(index, rnd):
    lib = default_library()
    d = generate_dfg(GenParams(node_count_range=(5, 40)), index)
    ids = [n for n, _ in d.nodes]
    shuffled = ids[:]
    rnd.shuffle(shuffled)
    relabeled = d.relabel({a: b + 1000 for a, b in zip(ids, shuffled)})
    assert extract_features(relabeled, lib) == extract_features(d, lib)


def test_structural_features_agree_with_metrics():
    lib = default_library()
    for i in range(20):
        d = generate_dfg(GenParams(node_count_range=(2, 10)), i)
        f, m = extract_features(d, lib), graph_metrics(d)
        assert f["nodes"] == m.node_count and f["edges"] == m.edge_count
        assert f["critical_path_longest"] == m.critical_path_len_nodes
        assert f["root_nodes"] + f["internal_nodes"] + f["leaf_nodes"] + f["isolated_nodes"] == f["nodes"]


def test_feature_matrix_export(tmp_path):
    lib = default_library()
    d = generate_dfg(GenParams(node_count_range=(5, 20)), 0)
    f = extract_features(d, lib)
    write_feature_matrix([(d.id, f)], tmp_path / "m.csv")
    header, row = (tmp_path / "m.csv").read_text().splitlines()
    assert header.split(",") == ["dfg_id"] + feature_schema()
    values = [float(v) for v in row.split(",")[1:]]
    assert values == feature_row(f)
    assert format_value(Fraction(1, 3)) == repr(1 / 3) and format_value(Fraction(4)) == "4"
