"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines. Every
tolerance is pinned here; nothing is deferred to later calibration.
"""

import math
import random

from mslift.currents import GraphCombination, current_equal, graph
from mslift.decompose import decompose
from mslift.lift import (
    LiftParams,
    build_column_calibration,
    certify_minimality,
    column_energy,
    column_energy_oracle,
    evaluate,
)
from mslift.sbv import Domain, MsParams, constant, jump_set, ms_energy
from mslift.solver import DirichletSpec, brute_force_minimize, minimize, perturb_inside

from helpers import (
    adversarial_combination,
    random_profile,
    random_sbv,
)

D01 = Domain(0.0, 1.0)


def _report(name: str, ok: bool, detail: str = "") -> None:
    print(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def test_criterion_1_lift_consistency():
    rng = random.Random(1001)
    worst = 0.0
    for _ in range(500):
        u = random_sbv(rng, max_pieces=8)
        g = random_sbv(rng, max_pieces=4)
        params = LiftParams(
            MsParams(rng.uniform(0.1, 3.0), rng.uniform(0.0, 2.0)), g
        )
        lifted = evaluate(graph(u), params).total
        direct = ms_energy(u, g, params.ms)
        worst = max(worst, abs(lifted - direct))
    _report("criterion 1: lift equals Mumford-Shah on 500 single graphs",
            worst <= 1e-9, f"worst gap {worst:.3e}")


def test_criterion_2_column_oracle_equivalence():
    rng = random.Random(1002)
    worst = 0.0
    checked_maxmin = 0
    exact_maxmin = True
    for trial in range(1000):
        nonneg = trial % 3 == 0
        p = random_profile(rng, max_intervals=12, dyadic=nonneg, nonnegative=nonneg)
        alpha = rng.uniform(0.2, 2.5)
        closed = column_energy(p, alpha)
        lp = column_energy_oracle(p, alpha)
        worst = max(worst, abs(closed - lp))
        if p.levels and min(p.levels) >= 0.0:
            checked_maxmin += 1
            lam = [0.0, *p.levels, 0.0]
            maxima = [i for i in range(1, len(lam) - 1)
                      if lam[i] > lam[i - 1] and lam[i] > lam[i + 1]]
            value = math.fsum(lam[i] for i in maxima) - math.fsum(
                min(lam[a:b + 1]) for a, b in zip(maxima, maxima[1:])
            )
            if column_energy(p, 1.0) != value:
                exact_maxmin = False
    _report("criterion 2a: closed form equals LP oracle on 1000 profiles",
            worst <= 1e-9, f"worst gap {worst:.3e}")
    _report("criterion 2b: single-orientation profiles match the max-minus-min formula",
            exact_maxmin and checked_maxmin >= 200, f"{checked_maxmin} profiles checked")


def test_criterion_3_calibration_attainment():
    rng = random.Random(1003)
    g = constant(D01, 0.0)
    worst_gap = 0.0
    worst_osc = 0.0
    for _ in range(1000):
        p = random_profile(rng, max_intervals=12)
        alpha = rng.uniform(0.2, 2.5)
        params = LiftParams(MsParams(alpha, 0.0), g)
        cal = build_column_calibration(p, params)
        target = column_energy(p, alpha)
        worst_gap = max(worst_gap, abs(cal.attained_flux(p) - target))
        worst_osc = max(worst_osc, cal.oscillation() - alpha)
    _report("criterion 3: calibrations admissible and attaining on 1000 profiles",
            worst_gap <= 1e-12 * 10 and worst_osc <= 1e-12,
            f"worst attainment gap {worst_gap:.3e}, worst excess oscillation {worst_osc:.3e}")


def test_criterion_4_convex_decomposition():
    rng = random.Random(1004)
    worst_gap = 0.0
    for trial in range(300):
        T = adversarial_combination(rng, max_terms=6, max_columns=10)
        g = random_sbv(rng, max_pieces=2)
        params = LiftParams(
            MsParams(rng.uniform(0.2, 2.0), rng.uniform(0.0, 1.0)), g
        )
        dec = decompose(T, params)
        assert current_equal(dec.as_combination(), T), f"trial {trial}: current changed"
        w_in, w_out = T.total_weight(), dec.total_weight()
        assert abs(w_out - w_in) <= 1e-12 * max(1.0, w_in), f"trial {trial}: weights"
        lifted = evaluate(T, params).total
        parts = math.fsum(mu * ms_energy(u, g, params.ms) for mu, u in dec.parts)
        gap = abs(lifted - parts) / (1.0 + abs(lifted))
        worst_gap = max(worst_gap, gap)
    _report("criterion 4: 300 random decompositions preserve current, weight, energy",
            worst_gap <= 1e-8, f"worst relative energy gap {worst_gap:.3e}")


def test_criterion_5_golden_counterexample():
    from mslift.sbv import Piece, SbvFunction

    u1 = SbvFunction(D01, (Piece((0.0, 0.5), (0.0, 0.0)), Piece((0.5, 1.0), (0.5, 1.0))))
    u2 = SbvFunction(D01, (Piece((0.0, 0.5), (0.0, 0.5)), Piece((0.5, 1.0), (1.0, 1.0))))
    T = GraphCombination(((0.5, u1), (0.5, u2)))
    g = constant(D01, 0.0)
    params = LiftParams(MsParams(1.0, 0.0), g)
    lifted = evaluate(T, params).total
    naive = 0.5 * ms_energy(u1, g, params.ms) + 0.5 * ms_energy(u2, g, params.ms)
    dec = decompose(T, params)
    energies = sorted(ms_energy(w, g, params.ms) for _, w in dec.parts)
    weights = sorted(mu for mu, _ in dec.parts)
    ok = (
        abs(lifted - 1.0) <= 1e-9
        and abs(naive - 1.5) <= 1e-12
        and len(dec.parts) == 2
        and max(abs(e - 1.0) for e in energies) <= 1e-9
        and max(abs(w - 0.5) for w in weights) <= 1e-12
    )
    _report("criterion 5: counterexample column lifts to 1.0 against naive 1.5",
            ok, f"lifted {lifted!r}, parts {energies}")


def test_criterion_6_dp_solver_correctness():
    rng = random.Random(1006)
    worst = 0.0
    for _ in range(50):
        g = random_sbv(rng, max_pieces=3, value_scale=1.5)
        p = MsParams(rng.uniform(0.05, 1.5), rng.uniform(0.0, 3.0))
        n = rng.randint(5, 12)
        spec = None
        if rng.random() < 0.4:
            d = Domain(0.0, 1.0, rng.uniform(0.1, 0.3), rng.uniform(0.7, 0.9))
            spec = DirichletSpec.constant_collars(d, rng.uniform(-1, 1), rng.uniform(-1, 1))
        e_dp = ms_energy(minimize(g, p, spec, n), g, p)
        e_bf = ms_energy(brute_force_minimize(g, p, spec, n), g, p)
        worst = max(worst, abs(e_dp - e_bf))
    monotone = True
    for _ in range(4):
        g = random_sbv(rng, max_pieces=3, value_scale=1.5)
        beta = rng.uniform(0.5, 2.5)
        counts = [
            len(jump_set(minimize(g, MsParams(alpha, beta), None, 14)))
            for alpha in (0.01, 0.03, 0.1, 0.3, 0.8, 1.5, 3.0, 6.0)
        ]
        monotone = monotone and all(a >= b for a, b in zip(counts, counts[1:]))
    _report("criterion 6a: DP equals brute force on 50 instances",
            worst <= 1e-10, f"worst gap {worst:.3e}")
    _report("criterion 6b: jump count non-increasing on the alpha grid", monotone)


def test_criterion_7_minimality_certification():
    rng = random.Random(1007)
    g = constant(D01, 0.0)
    worst_margin = math.inf
    worst_weight = 0.0
    for trial in range(20):
        ia = rng.uniform(0.12, 0.3)
        ib = rng.uniform(0.7, 0.88)
        d = Domain(0.0, 1.0, ia, ib)
        spec = DirichletSpec.constant_collars(d, rng.uniform(-1, 1), rng.uniform(-1, 1))
        params = LiftParams(MsParams(rng.uniform(0.3, 2.0), 0.0), g)
        u = minimize(g, params.ms, spec, 15)
        competitors = perturb_inside(u, d, seed=7000 + trial, count=50)
        report = certify_minimality(u, params, d, competitors)
        for cert in report.certificates:
            assert cert.verdict == "certified", f"trial {trial}: {cert}"
            worst_margin = min(worst_margin, cert.margin)
            worst_weight = max(worst_weight, abs(cert.weight_sum - 1.0))
    ok = worst_margin >= -1e-8 and worst_weight <= 1e-9
    _report("criterion 7: 20 minimizers certified against 50 competitors each",
            ok, f"worst margin {worst_margin:.3e}, worst weight error {worst_weight:.3e}")


def test_criterion_8_convexity_homogeneity():
    rng = random.Random(1008)
    worst_sub = -math.inf
    worst_hom = 0.0
    for _ in range(500):
        g = random_sbv(rng, max_pieces=2)
        params = LiftParams(
            MsParams(rng.uniform(0.2, 2.0), rng.uniform(0.0, 1.0)), g
        )
        T1 = adversarial_combination(rng, max_terms=3, max_columns=4)
        T2 = adversarial_combination(rng, max_terms=3, max_columns=4)
        v1 = evaluate(T1, params).total
        v2 = evaluate(T2, params).total
        v12 = evaluate(T1 + T2, params).total
        worst_sub = max(worst_sub, v12 - (v1 + v2))
        c = rng.uniform(0.2, 4.0)
        scaled = evaluate(T1.scaled(c), params).total
        worst_hom = max(worst_hom, abs(scaled - c * v1) / (1.0 + abs(c * v1)))
    ok = worst_sub <= 1e-9 and worst_hom <= 1e-9
    _report("criterion 8: sub-additivity and positive homogeneity on 500 pairs",
            ok, f"worst excess {worst_sub:.3e}, worst homogeneity error {worst_hom:.3e}")
