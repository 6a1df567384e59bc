import json
import math

import numpy as np
import pytest

from robinflow.attractor import (build_attractor, classify_regime, critical_values,
                                 shadowing_experiment, thread_count)
from robinflow.errors import NonHyperbolic, TransientNotObserved
from robinflow.grid import Grid
from robinflow.nonlinearity import builtin
from robinflow.pde import energy, initial_field
from robinflow.spectrum import spectrum_at_infinity
from robinflow.steklov import SIGMA1, SIGMA2

G = Grid(200)

COUNTS = {-1.0: ("R1", 1, 0), 0.0: ("R2", 3, 2), 1.0: ("R3", 3, 2), 1.5: ("R4", 5, 8), 3.0: ("R5", 5, 8)}
MORSE_AT_ZERO = {"R1": 0, "R2": 1, "R3": 1, "R4": 2, "R5": 2}


@pytest.fixture(scope="module")
def verified(arctan_module):
    return {lam: build_attractor(lam, arctan_module, G, verify=True) for lam in (0.0, 1.0, 1.5, 3.0)}


@pytest.fixture(scope="module")
def arctan_module():
    return builtin("arctan")


@pytest.mark.parametrize("lam,regime", [(-1.0, "R1"), (0.0, "R2"), (1.0, "R3"), (1.5, "R4"), (3.0, "R5")])
def test_classify_regime(lam, regime, arctan):
    assert classify_regime(lam, arctan) == regime


def test_critical_values(arctan):
    s1s, s1, s2s, s2 = critical_values(arctan)
    assert s1s == pytest.approx(SIGMA1 - 1, abs=1e-12) and s2s == pytest.approx(SIGMA2 - 1, abs=1e-12)
    assert (s1, s2) == (SIGMA1, SIGMA2)
    for c in critical_values(arctan):
        with pytest.raises(NonHyperbolic, match="non-hyperbolic parameter"):
            classify_regime(c + 1e-11, arctan)
    with pytest.raises(ValueError):
        classify_regime(1.0, builtin("sqrt_sin"))  # g'(0) = 0 collapses the table


@pytest.mark.parametrize("lam", sorted(COUNTS))
def test_graph_shape(lam, arctan):
    regime, n_nodes, n_edges = COUNTS[lam]
    graph = build_attractor(lam, arctan, G)
    assert (graph.regime, len(graph.nodes), len(graph.edges)) == (regime, n_nodes, n_edges)
    assert all(e.evidence == "asserted" for e in graph.edges)
    assert graph.node("0").morse_index == MORSE_AT_ZERO[regime]
    ids = {n.id for n in graph.nodes}
    for e in graph.edges:
        assert e.source in ids and e.target in ids
        src, tgt = graph.node(e.source), graph.node(e.target)
        if e.kind == "blowup":
            assert (src.kind, tgt.kind) == ("bounded", "infinity")
        elif e.kind == "bounded":
            assert tgt.kind == "bounded"
        else:
            assert (src.kind, tgt.kind) == ("infinity", "infinity")
    for n in graph.nodes:
        assert (n.morse_index is None) == (n.kind == "infinity")


def test_equilibrium_morse_indices(arctan):
    assert build_attractor(0.0, arctan, G).node("+u1").morse_index == 0
    g2 = build_attractor(1.5, arctan, G)
    assert g2.node("+u2").morse_index == g2.node("-u2").morse_index == 1


def test_bounded_edges_descend_in_energy(arctan):
    for lam in (0.0, 1.5):
        graph = build_attractor(lam, arctan, G)
        for e in graph.edges:
            if e.kind != "bounded":
                continue
            e_src, e_tgt = (energy(initial_field(graph.node(i).profile, lam, arctan, G), lam, arctan, G)
                            for i in (e.source, e.target))
            assert e_tgt < e_src


@pytest.mark.parametrize("lam", [0.0, 1.0, 1.5, 3.0])
def test_verified_edges(lam, verified):
    graph = verified[lam]
    assert len(graph.edges) == COUNTS[lam][2]
    for e in graph.edges:
        assert e.status == "verified", e
        assert e.evidence["final_distance"] < 1e-2
        assert 0 < e.evidence["sim_time"] <= 400


def test_r4_saddles_reach_both_signs(verified):
    out = {(e.source, e.target) for e in verified[1.5].edges if e.source in ("+u2", "-u2")}
    assert out == {(s, t) for s in ("+u2", "-u2") for t in ("+phi1", "-phi1")}


def test_json_schema(verified):
    doc = json.loads(verified[3.0].to_json())
    assert set(doc) == {"lambda", "regime", "nodes", "edges"}
    assert doc["regime"] == "R5" and doc["lambda"] == 3.0
    for n in doc["nodes"]:
        assert set(n) == {"id", "kind", "label", "morse_index"}
    for e in doc["edges"]:
        assert {"source", "target", "kind", "evidence"} <= set(e)
        assert set(e["evidence"]) == {"final_distance", "sim_time"}


def test_thread_count_does_not_change_results(arctan, monkeypatch):
    monkeypatch.setenv("STEKLOV_THREADS", "3")
    assert thread_count() == 3
    one = build_attractor(1.0, arctan, G, verify=True, threads=1).to_json()
    many = build_attractor(1.0, arctan, G, verify=True).to_json()
    assert one == many
    monkeypatch.setenv("STEKLOV_THREADS", "lots")
    with pytest.raises(ValueError):
        thread_count()


def test_shadowing_transient(arctan):
    reports = {eps: shadowing_experiment(3.0, eps, arctan, G) for eps in (0.1, 0.01, 0.001)}
    for r in reports.values():
        assert r.t_switch is not None and r.t_near2 < r.t_switch
    # linear theory: each decade of epsilon delays the switch by ln 10 / (mu_1 - mu_2)
    sp = spectrum_at_infinity(3.0, 2, G)
    delay = math.log(10) / (sp.mu(1) - sp.mu(2))
    for a, b in ((0.1, 0.01), (0.01, 0.001)):
        assert reports[b].t_switch - reports[a].t_switch == pytest.approx(delay, rel=0.1)
    never = shadowing_experiment(3.0, 0.0, arctan, G)
    assert never.t_switch is None and never.min_distance_phi2 < 0.1


def test_shadowing_errors(arctan):
    with pytest.raises(ValueError):
        shadowing_experiment(1.0, 0.1, arctan, G)
    with pytest.raises(TransientNotObserved, match="transient not observed"):
        shadowing_experiment(3.0, 0.1, arctan, G, radius=1e-9)
