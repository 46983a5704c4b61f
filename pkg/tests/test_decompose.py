"""Cancellation removal, adjacency swaps, layer peeling, full decomposition."""

import math
import random

import pytest

from mslift.currents import GraphCombination, current_equal, graph, slice_profile
from mslift.decompose import (
    decompose,
    has_cancellation,
    peel_layers,
    remove_cancellation,
    swap_adjacent_block,
)
from mslift.errors import ValidationError
from mslift.lift import LiftParams, evaluate
from mslift.sbv import (
    Domain,
    MsParams,
    Piece,
    SbvFunction,
    constant,
    jump_set,
    ms_energy,
    piecewise_constant,
)

D01 = Domain(0.0, 1.0)
PARAMS = LiftParams(MsParams(1.0, 0.0), constant(D01, 0.0))


def step(x, lo, hi):
    return piecewise_constant(D01, [x], [lo, hi])


def counterexample_combination():
    u1 = SbvFunction(D01, (Piece((0.0, 0.5), (0.0, 0.0)), Piece((0.5, 1.0), (0.5, 1.0))))
    u2 = SbvFunction(D01, (Piece((0.0, 0.5), (0.0, 0.5)), Piece((0.5, 1.0), (1.0, 1.0))))
    return GraphCombination(((0.5, u1), (0.5, u2)))


# -- cancellation removal -------------------------------------------------------

def test_no_cancellation_is_identity():
    T = GraphCombination(((1.0, step(0.3, 0.0, 1.0)), (1.0, step(0.7, 2.0, 3.0))))
    out = remove_cancellation(T)
    assert out.terms == T.terms


def test_opposite_full_jumps_cancel_to_continuous():
    up = step(0.5, 0.0, 2.0)
    down = step(0.5, 2.0, 0.0)
    T = GraphCombination(((1.0, up), (1.0, down)))
    assert has_cancellation(T)
    out = remove_cancellation(T)
    assert not has_cancellation(out)
    assert all(len(jump_set(u)) == 0 for _, u in out.terms)
    assert current_equal(out, T)
    assert slice_profile(out, 0.5).is_empty


def test_unequal_weights_leave_residual():
    up = step(0.5, 0.0, 2.0)
    down = step(0.5, 2.0, 0.0)
    T = GraphCombination(((2.0, up), (1.0, down)))
    out = remove_cancellation(T)
    assert len(out.terms) == 3
    weights = sorted(w for w, _ in out.terms)
    assert weights == [1.0, 1.0, 1.0]
    # the residual keeps the original up jump
    residual = [u for _, u in out.terms if jump_set(u)]
    assert len(residual) == 1
    assert jump_set(residual[0]) == ((0.5, 0.0, 2.0),)
    assert current_equal(out, T)


def test_partial_overlap_cancellation():
    up = step(0.5, 0.0, 2.0)       # up through (0, 2)
    down = step(0.5, 3.0, 1.0)     # down through (1, 3): crossing overlap
    T = GraphCombination(((1.0, up), (1.0, down)))
    assert has_cancellation(T)
    out = remove_cancellation(T)
    assert not has_cancellation(out)
    assert current_equal(out, T)


def test_containment_is_not_cancellation():
    up = step(0.5, 0.0, 3.0)
    down = step(0.5, 2.9, 0.1)     # strictly inside the up interval
    T = GraphCombination(((1.0, up), (1.0, down)))
    assert not has_cancellation(T)


# -- adjacency swaps -------------------------------------------------------------

def test_figure_style_swap():
    u1 = step(0.5, 2.0, 3.0)
    u2 = step(0.5, 3.0, 4.0)
    out = swap_adjacent_block(GraphCombination(((1.0, u1), (1.0, u2))))
    jumps = sorted((jump_set(u) for _, u in out.terms), key=len)
    assert jumps[0] == ()                       # one function became continuous
    assert jumps[1] == ((0.5, 2.0, 4.0),)       # the other carries the full rise
    assert current_equal(out, GraphCombination(((1.0, u1), (1.0, u2))))


def test_counterexample_swap_gives_step_and_ramp():
    T = counterexample_combination()
    out = swap_adjacent_block(T)
    by_jumps = sorted(out.terms, key=lambda t: len(jump_set(t[1])))
    ramp, stepf = by_jumps[0][1], by_jumps[1][1]
    assert jump_set(ramp) == ()
    assert jump_set(stepf) == ((0.5, 0.0, 1.0),)
    g = constant(D01, 0.0)
    assert ms_energy(stepf, g, PARAMS.ms) == pytest.approx(1.0, abs=1e-12)
    assert ms_energy(ramp, g, PARAMS.ms) == pytest.approx(1.0, abs=1e-12)


def test_no_adjacency_is_identity():
    T = GraphCombination(((1.0, step(0.3, 0.0, 1.0)), (1.0, step(0.3, 2.0, 3.5))))
    out = swap_adjacent_block(T)
    assert out.terms == T.terms


def test_swap_preconditions():
    with pytest.raises(ValidationError):
        swap_adjacent_block(GraphCombination(((1.0, step(0.3, 0, 1)), (2.0, step(0.3, 1, 2)))))
    up = step(0.5, 0.0, 2.0)
    down = step(0.5, 2.0, 0.0)
    with pytest.raises(ValidationError):
        swap_adjacent_block(GraphCombination(((1.0, up), (1.0, down))))


def test_chained_adjacency_resolves_to_fixpoint():
    # three stacked steps chaining 0->1->2->3 at one point
    T = GraphCombination(tuple(
        (1.0, step(0.5, float(k), float(k + 1))) for k in range(3)
    ))
    out = swap_adjacent_block(T)
    jumps = [j for _, u in out.terms for j in jump_set(u)]
    assert len(jumps) == 1
    assert jumps[0] == (0.5, 0.0, 3.0)
    assert current_equal(out, T)


# -- peeling ------------------------------------------------------------------------

def test_equal_weights_one_layer():
    T = GraphCombination(((1.5, step(0.3, 0, 1)), (1.5, step(0.6, 0, 1))))
    layers = peel_layers(T)
    assert len(layers) == 1
    assert layers[0].terms[0][0] == pytest.approx(1.5)


def test_peel_two_layers():
    u1 = step(0.3, 0.0, 1.0)
    u2 = step(0.6, 0.0, 1.0)
    T = GraphCombination(((2.0, u1), (1.0, u2)))
    layers = peel_layers(T)
    assert len(layers) == 2
    assert [round(w, 12) for w, _ in layers[0].terms] == [1.0, 1.0]
    assert [round(w, 12) for w, _ in layers[1].terms] == [1.0]
    assert layers[1].terms[0][1] == u1
    # layer weights sum back to the originals
    total = {}
    for L in layers:
        for w, u in L.terms:
            total[id(u)] = total.get(id(u), 0.0) + w
    assert sorted(total.values()) == [1.0, 2.0]


def test_peel_three_graphs_two_levels():
    u = [step(0.2, 0, 1), step(0.5, 0, 1), step(0.8, 0, 1)]
    T = GraphCombination(((3.0, u[0]), (3.0, u[1]), (1.0, u[2])))
    layers = peel_layers(T)
    assert len(layers) == 2
    assert len(layers[0].terms) == 3 and layers[0].terms[0][0] == pytest.approx(1.0)
    assert len(layers[1].terms) == 2 and layers[1].terms[0][0] == pytest.approx(2.0)


# -- decompose -----------------------------------------------------------------------

def g0():
    return constant(D01, 0.0)


def test_zero_current_decomposes_to_nothing():
    dec = decompose(GraphCombination(()), PARAMS)
    assert dec.parts == ()
    assert dec.checks == {"current_equal": True, "energy_gap": 0.0}


def test_single_graph_decomposes_to_itself():
    u = step(0.5, 0.0, 1.0)
    dec = decompose(graph(u, 2.5), PARAMS)
    assert len(dec.parts) == 1
    assert dec.parts[0][0] == pytest.approx(2.5)
    assert dec.parts[0][1] == u


def test_counterexample_decomposition_golden():
    T = counterexample_combination()
    dec = decompose(T, PARAMS)
    assert len(dec.parts) == 2
    assert sorted(round(mu, 12) for mu, _ in dec.parts) == [0.5, 0.5]
    energies = sorted(ms_energy(w, g0(), PARAMS.ms) for _, w in dec.parts)
    assert energies == pytest.approx([1.0, 1.0], abs=1e-12)
    assert evaluate(T, PARAMS).total == pytest.approx(1.0, abs=1e-12)
    assert dec.checks["energy_gap"] <= 1e-12


def test_cross_weight_adjacency_regression():
    # heavy jump (1,2) chained to two light jumps ending at 1: layer peeling
    # alone would overcount by alpha; the mixed-weight pass must fix it
    heavy = step(0.5, 1.0, 2.0)
    light1 = step(0.5, 0.0, 1.0)
    light2 = SbvFunction(
        D01, (Piece((0.0, 0.5), (-1.0, -1.0)), Piece((0.5, 1.0), (1.0, 1.0)))
    )
    T = GraphCombination(((10.0, heavy), (1.0, light1), (1.0, light2)))
    lifted = evaluate(T, PARAMS).total
    # column profile stacks to (1, 2, 10): positive variation 10, while the
    # per-graph count would charge 12 and a per-layer split would charge 11
    assert lifted == pytest.approx(10.0, abs=1e-12)
    dec = decompose(T, PARAMS)
    parts_sum = math.fsum(mu * ms_energy(w, g0(), PARAMS.ms) for mu, w in dec.parts)
    assert parts_sum == pytest.approx(lifted, rel=1e-12)
    assert current_equal(dec.as_combination(), T)


def test_random_decompositions_hold_invariants():
    rng = random.Random(1234)
    from helpers import random_combination, random_sbv

    for trial in range(40):
        T = random_combination(rng, max_terms=4)
        g = random_sbv(rng, max_pieces=2)
        params = LiftParams(MsParams(rng.uniform(0.3, 2.0), rng.uniform(0.0, 1.0)), g)
        dec = decompose(T, params)
        assert current_equal(dec.as_combination(), T)
        assert dec.total_weight() == pytest.approx(T.total_weight(), rel=1e-12)
        lifted = evaluate(T, params).total
        parts_sum = math.fsum(mu * ms_energy(u, g, params.ms) for mu, u in dec.parts)
        assert abs(lifted - parts_sum) <= 1e-8 * (1 + abs(lifted))
        # rearranging a fixed current never increases the energy
        naive = math.fsum(w * ms_energy(u, g, params.ms) for w, u in T.terms)
        assert parts_sum <= naive + 1e-9


def test_decomposition_json_shape():
    dec = decompose(counterexample_combination(), PARAMS)
    data = dec.to_dict()
    assert set(data) == {"parts", "provenance", "checks"}
    assert all(set(p) == {"mu", "func"} for p in data["parts"])
    assert data["checks"]["current_equal"] is True
    assert any(e["stage"] == "adjacency_swap" for e in data["provenance"])
