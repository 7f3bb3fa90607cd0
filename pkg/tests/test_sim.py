from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given, settings, strategies as st

from rcpredict.dfg import Dfg, weighted_critical_path
from rcpredict.generator import GenParams, generate_dfg
from rcpredict.library import default_library
from rcpredict.sim import (InfeasibleError, Layout, PlatformConfig, SimError, canonical_scheduler,
                           enumerate_layouts, export_trace, load_platform, parse_layout,
                           serialize_layout, simulate, skewed_layout, uniform_layout,
                           validate_schedule)

from conftest import chain, make_lib, spec


def one_prr(size=50, gpp=0, sched="S2"):
    return PlatformConfig(Layout(size, (size,)), gpp, sched)


def serial_cost(order, dfg, lib):
    """Makespan of running ``order`` back to back on a single PRR with reuse."""
    t, loaded = 0, None
    for n in order:
        s = lib[dfg.types[n]]
        if dfg.types[n] != loaded:
            t += s.reconfig_time
            loaded = dfg.types[n]
        t += s.hw_exec
    return t


def topo_orders(dfg):
    for perm in permutations([n for n, _ in dfg.nodes]):
        pos = {n: i for i, n in enumerate(perm)}
        if all(pos[p] < pos[c] for p, c in dfg.edges):
            yield perm


def reaccumulate_energy(res, dfg, lib):
    total = Fraction(0)
    for p in res.schedule:
        s = lib[dfg.types[p.node_id]]
        power = s.hw_dyn_power if p.resource[0] == "PRR" else s.sw_dyn_power
        total += (p.finish - p.exec_start) * power
        if p.reconfig_start is not None:
            total += (p.reconfig_end - p.reconfig_start) * s.reconfig_power
    return total


def test_single_node_s1():
    lib = make_lib(spec(1, hw=10, rt=5))
    r = simulate(chain(1), lib, one_prr(sched="S1"))
    assert (r.makespan, r.reconfigurations, r.reuses) == (15, 1, 0)


def test_two_independent_same_type_s2():
    lib = make_lib(spec(1, hw=10, rt=5))
    d = Dfg("two", ((0, 1), (1, 1)), ())
    r = simulate(d, lib, one_prr())
    assert r.makespan == 25 and r.reuses == 1
    oracle = {serial_cost(o, d, lib) for o in topo_orders(d)}
    assert oracle == {25}


def test_infeasible_hardware_node():
    lib = make_lib(spec(1, area=80))
    with pytest.raises(InfeasibleError) as exc:
        simulate(chain(2), lib, one_prr(50))
    assert exc.value.node_ids == (0, 1)


def test_hybrid_too_big_runs_on_gpp():
    lib = make_lib(spec(1, "hybrid", hw=10, sw=40, area=80))
    r = simulate(chain(2), lib, one_prr(50, gpp=1, sched="S1"))
    assert r.makespan == 80 and r.migrations_to_sw == 2 and r.fabric_area_used == 0


def test_software_only_tasks_need_gpp():
    lib = make_lib(spec(1, "software", sw=30))
    with pytest.raises(InfeasibleError):
        simulate(chain(1), lib, one_prr())
    assert simulate(chain(2), lib, one_prr(gpp=1)).makespan == 60


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.data())
def test_single_prr_matches_event_order_oracle(n, data):
    lib = make_lib(spec(1, hw=7, rt=4), spec(2, hw=3, rt=9))
    types = data.draw(st.lists(st.sampled_from([1, 2]), min_size=n, max_size=n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    edges = data.draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    d = Dfg("o", tuple(enumerate(types)), tuple(edges))
    r = simulate(d, lib, one_prr())
    costs = [serial_cost(o, d, lib) for o in topo_orders(d)]
    assert min(costs) <= r.makespan <= max(costs)
    used = [p.node_id for p in sorted(r.schedule, key=lambda p: p.start)]
    assert r.makespan == serial_cost(used, d, lib)
    if len(set(types)) == 1:
        assert r.makespan == min(costs)


@pytest.mark.parametrize("sched", ["S1", "S2", "S3"])
def test_generated_runs_validate_and_energy_reaccumulates(sched):
    lib = default_library()
    cfg = PlatformConfig(uniform_layout(120, 3), 1, sched)
    for i in range(15):
        d = generate_dfg(GenParams(node_count_range=(5, 150)), i)
        r = simulate(d, lib, cfg)
        assert validate_schedule(r, d, lib, cfg).ok
        assert r.total_energy == reaccumulate_energy(r, d, lib)
        assert r.avg_power * r.makespan == r.total_energy
        assert sorted(p.node_id for p in r.schedule) == sorted(n for n, _ in d.nodes)


def test_makespan_lower_bound_and_exact_unlimited_case():
    lib = default_library()
    for i in range(10):
        d = generate_dfg(GenParams(node_count_range=(5, 60)), i)
        cfg = PlatformConfig(uniform_layout(200, 4), 1, "S3")
        lb = weighted_critical_path(d, {t: lib[t].min_exec for t in lib})
        assert simulate(d, lib, cfg).makespan >= lb
        # unlimited identical PRRs and free reconfiguration: makespan is the critical path
        free = make_lib(*(spec(t, "hardware", hw=lib[t].hw_exec, area=1, rt=0) for t in lib))
        n = len(d.nodes)
        big = PlatformConfig(Layout(n, (1,) * n), 0, "S1")
        hw = {t: free[t].hw_exec for t in free}
        assert simulate(d, free, big).makespan == weighted_critical_path(d, hw)


def test_reuse_monotonicity_single_type():
    lib = make_lib(spec(1, hw=6, rt=8))
    d = generate_dfg(GenParams(node_count_range=(40, 40), task_type_count_range=(1, 1),
                               type_pool=(1,)), 0)
    cfg = PlatformConfig(uniform_layout(40, 2), 0, "S1")
    r1 = simulate(d, lib, cfg)
    r2 = simulate(d, lib, PlatformConfig(cfg.layout, 0, "S2"))
    assert r1.reuses == 0 and r2.reuses >= r1.reuses
    assert r2.makespan <= r1.makespan


def test_simulation_is_deterministic():
    lib = default_library()
    d = generate_dfg(GenParams(node_count_range=(100, 100)), 2)
    cfg = PlatformConfig(skewed_layout(150, 3), 1, "S3")
    assert simulate(d, lib, cfg) == simulate(d, lib, cfg)


def test_tampered_traces_are_caught():
    lib = make_lib(spec(1, hw=10, rt=5))
    d = chain(2)
    cfg = PlatformConfig(Layout(20, (10, 10)), 0, "S1")
    r = simulate(d, lib, cfg)
    sched = list(r.schedule)
    early = sched[1]._replace(exec_start=sched[0].finish - 3, finish=sched[0].finish + 7)
    bad = type(r)(r.makespan, r.total_energy, (sched[0], early), r.reconfigurations, r.reuses,
                  r.migrations_to_sw, r.prr_sizes)
    assert "precedence" in validate_schedule(bad, d, lib, cfg).constraints()

    d2 = Dfg("par", ((0, 1), (1, 1)), ())
    r2 = simulate(d2, lib, cfg)
    a, b = r2.schedule
    moved = b._replace(resource=a.resource)
    bad2 = type(r2)(r2.makespan, r2.total_energy, (a, moved), 2, 0, 0, r2.prr_sizes)
    assert "exclusivity" in validate_schedule(bad2, d2, lib, cfg).constraints()


def test_port_and_area_violations():
    lib = make_lib(spec(1, hw=10, rt=5, area=8))
    d = Dfg("par", ((0, 1), (1, 1)), ())
    cfg = PlatformConfig(Layout(20, (10, 10)), 0, "S1")
    r = simulate(d, lib, cfg)
    a, b = r.schedule
    overlap = b._replace(reconfig_start=a.reconfig_start, reconfig_end=a.reconfig_end,
                         exec_start=a.exec_start, finish=a.finish)
    bad = type(r)(r.makespan, r.total_energy, (a, overlap), 2, 0, 0, r.prr_sizes)
    assert "port" in validate_schedule(bad, d, lib, cfg).constraints()
    small = PlatformConfig(Layout(20, (10, 4)), 0, "S1")
    assert "area" in validate_schedule(bad, d, lib, small).constraints()


def test_layout_enumeration():
    assert uniform_layout(100, 4).prr_sizes == (25, 25, 25, 25)
    assert skewed_layout(100, 2).prr_sizes == (40, 60)
    assert len(enumerate_layouts(100, [1])) == 1
    assert uniform_layout(10, 3).prr_sizes == (3, 3, 4)
    with pytest.raises(SimError):
        enumerate_layouts(100, [0])


def test_layout_rejects_oversubscription():
    with pytest.raises(SimError):
        Layout(10, (6, 6))


def test_layout_and_config_files(tmp_path):
    lay = skewed_layout(100, 3)
    (tmp_path / "l.txt").write_text(serialize_layout(lay, 2))
    (tmp_path / "c.txt").write_text("# settings\nscheduler = S3-ReuseMigrate\nseed = 4\n")
    cfg = load_platform(tmp_path / "l.txt", tmp_path / "c.txt")
    assert cfg.layout == lay and cfg.gpp_count == 2 and cfg.scheduler == "S3"
    assert parse_layout(serialize_layout(uniform_layout(100, 4)))[0].shape_tag == "uniform"


def test_scheduler_names():
    assert canonical_scheduler("s2-reuse") == "S2"
    with pytest.raises(SimError):
        canonical_scheduler("S9")


def test_trace_export_lists_every_node():
    lib = make_lib(spec(1))
    r = simulate(chain(4), lib, one_prr())
    lines = export_trace(r).splitlines()
    assert len(lines) == 5 and lines[1].startswith("0 PRR0 0 5 5 15")
