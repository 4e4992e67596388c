"""Acceptance suite: one test per acceptance criterion, at full scale.

Each criterion prints one PASS/FAIL line (visible with ``pytest -s``) and
asserts at its stated tolerance. Statistical criteria run under pinned
master seeds; the package's determinism contract makes them stable.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from sqe_lab.cli import main
from sqe_lab.ensemble import EnsembleState, init_eigenstate, is_equilibrium
from sqe_lab.evolution import chain_flip_counts, detect_improper, unitary_step
from sqe_lab.experiments import ExperimentConfig, run_experiment
from sqe_lab.grid import AlphaGrid
from sqe_lab.measurement import HiddenSeeds, hidden_uniform_batch, ideal_measure
from sqe_lab.model_a import (
    ModelAConfig,
    ModelASpecies,
    effective_hbar,
    estimate_n,
    simulate_species_spread,
    sweep_splits,
)
from sqe_lab.relaxation import RelaxationParams, relax_time_samples, relax_to_equilibrium
from sqe_lab.seeding import derive_seed, uniform_window
from sqe_lab.coupling import coupling_for_eigenstate

PI = math.pi


def report(num: int, name: str, passed: bool, detail: str = "") -> None:
    line = f"ACCEPTANCE {num:02d} {name}: {'PASS' if passed else 'FAIL'}"
    if detail:
        line += f"  [{detail}]"
    print(line)
    assert passed, line


def test_criterion_01_spread_inequality_exhaustive():
    t0 = time.perf_counter()
    rows = sweep_splits(10_000)
    elapsed = time.perf_counter() - t0
    all_hold = all(r["holds"] for r in rows)
    equality = [r["n_a"] for r in rows if r["lhs"] == r["bound"]]
    ok = all_hold and equality == [5000] and elapsed < 1.0
    report(1, "spread inequality over every split", ok,
           f"splits={len(rows)}, equality at {equality}, {elapsed:.2f}s")


def test_criterion_02_action_scale_emergence():
    t0 = time.perf_counter()
    worst_rel = 0.0
    for k in range(1, 101):
        target = 1.0 / k
        n_star = estimate_n(target, a=1.0, b=1.0, j_a=1.0, j_b=1.0, ext_a=1.0, ext_b=1.0)
        n = round(n_star)
        assert n == 4 * k
        cfg = ModelAConfig(
            total_n=n,
            species_a=ModelASpecies(n // 2, 1.0, 1.0, 1.0, 1.0),
            species_b=ModelASpecies(n - n // 2, 1.0, 1.0, 1.0, 1.0),
            hbar=target,
        )
        worst_rel = max(worst_rel, abs(effective_hbar(cfg) - target) / target)
    spread = simulate_species_spread(10_000, 1.0, 1.0, trials=10_000,
                                     seed=derive_seed(2026, ("accept-2",)))
    oracle = 1.0 / math.sqrt(10_000)
    mc_rel = abs(spread - oracle) / oracle
    elapsed = time.perf_counter() - t0
    ok = worst_rel <= 1e-12 and mc_rel <= 0.10 and elapsed < 10.0
    report(2, "action scale and sqrt-N spreads", ok,
           f"hbar rel={worst_rel:.2e}, mc rel={mc_rel:.3f}, {elapsed:.1f}s")


def test_criterion_03_born_rule_full_scale():
    t0 = time.perf_counter()
    cfg = ExperimentConfig(experiment="born", master_seed=20_260_809,
                           n_sqe=1000, grid_size=360, trials=100_000)
    result = run_experiment(cfg)
    elapsed = time.perf_counter() - t0
    endpoint_rows = [r for r in result.files["born.csv"][1] if r[3] in (0.0, 1.0)]
    endpoints_exact = all(r[2] == r[3] for r in endpoint_rows)
    ok = result.passed and endpoints_exact and elapsed < 60.0
    worst = max(r[4] / r[5] for r in result.files["born.csv"][1] if r[5] > 0)
    report(3, "Born frequencies at 1e5 trials/angle", ok,
           f"worst err={worst:.2f} sigma, endpoints exact, {elapsed:.1f}s")


def test_criterion_04_measurement_idempotence():
    grid = AlphaGrid(16)
    params = RelaxationParams(eta=0.9)
    lam_m = derive_seed(404, ("idem", "apparatus"))
    lam_sp = derive_seed(404, ("idem", "space"))
    setting_stream = uniform_window(derive_seed(404, ("idem", "settings")), 0, 10_000)
    repeats = 0
    trials = 10_000
    for t in range(trials):
        alpha = grid.angle(int(setting_stream[t] * 16))
        state = init_eigenstate(1000, grid, 0.0, 1,
                                seed=derive_seed(404, ("idem", "u")), window=t)
        rec1, post = ideal_measure(state, alpha, HiddenSeeds(lam_m, lam_sp, 2 * t), params)
        rec2, _ = ideal_measure(post, alpha, HiddenSeeds(lam_m, lam_sp, 2 * t + 1), params)
        repeats += int(rec1.outcome == rec2.outcome)
    ok = repeats == trials
    report(4, "repeated measurement repeats the outcome", ok, f"{repeats}/{trials}")


def test_criterion_05_relaxation_law():
    delta_worst = 0.0
    for eta, g_peak in ((0.05, 1.0), (0.1, 1.0), (0.3, 1.0), (0.1, 0.5), (0.2, 0.25)):
        params = RelaxationParams(eta=eta)
        samples = relax_time_samples(g_peak, params, trials=3,
                                     seed=derive_seed(505, ("law", str(eta), str(g_peak))))
        exact = math.log(2.0 / params.eps_eq) / -math.log(1.0 - eta * g_peak)
        delta_worst = max(delta_worst, float(np.abs(samples - exact).max()))
    params = RelaxationParams(eta=0.1)
    t_full = relax_time_samples(1.0, params, trials=100, seed=derive_seed(505, ("d1",))).mean()
    t_half = relax_time_samples(0.5, params, trials=100, seed=derive_seed(505, ("d2",))).mean()
    ratio = t_half / t_full
    ok = delta_worst <= 1.0 and abs(ratio - 2.0) <= 0.4
    report(5, "relaxation time law", ok,
           f"worst |tau - closed form|={delta_worst:.2f}, halving ratio={ratio:.3f}")


def test_criterion_06_unitary_continuity():
    grid = AlphaGrid(256)
    arc = 64  # pi/2
    chains = 1000
    n = 400
    law_devs = []
    means = {}
    for k in (4, 8, 16, 32):
        flips = chain_flip_counts(
            derive_seed(606, ("flips", 4, k, "u")),
            derive_seed(606, ("flips", 4, k, "m")),
            derive_seed(606, ("flips", 4, k, "sp")),
            grid, 0, arc, k, n, chains,
        )
        means[k] = flips.mean()
        law = k * math.sin(PI / 2 / (2 * k)) ** 2
        law_devs.append(abs(means[k] / law - 1.0))
    inverse_k = all(
        1 / 1.5 <= (means[k] / means[2 * k]) / 2.0 <= 1.5 for k in (4, 8, 16)
    )
    law_ok = max(law_devs) <= 0.30

    # adiabatic path consistency
    params = RelaxationParams(eta=0.5)
    g16 = AlphaGrid(16)
    state = init_eigenstate(1000, g16, 0.0, 1, seed=derive_seed(606, ("adiabatic",)))
    from sqe_lab.evolution import EvolutionPlan, evolve

    direct, _, _ = evolve(
        state, EvolutionPlan(0.0, PI / 2, steps=4, dt_sweeps=2000, mode="adiabatic"),
        seed=1, params=params,
    )
    mid, _, _ = evolve(
        state, EvolutionPlan(0.0, PI / 4, steps=2, dt_sweeps=2000, mode="adiabatic"),
        seed=2, params=params,
    )
    two_leg, _, _ = evolve(
        mid, EvolutionPlan(PI / 4, PI / 2, steps=2, dt_sweeps=2000, mode="adiabatic"),
        seed=3, params=params,
    )
    tags_equal = direct.equilibrium == two_leg.equilibrium == (4, 1)
    tables_equal = np.array_equal(direct.values, two_leg.values)
    # downstream statistics at a probe angle, 1e4 fresh hidden draws each
    probe = g16.index_of(PI / 4)
    va = float((direct.values[:, probe] > 0).mean())
    vb = float((two_leg.values[:, probe] > 0).mean())
    fa = (hidden_uniform_batch(derive_seed(606, ("probe", "a")), 1, 0, 10_000) < va).mean()
    fb = (hidden_uniform_batch(derive_seed(606, ("probe", "b")), 2, 0, 10_000) < vb).mean()
    three_sigma = 3 * math.sqrt(2 * 0.85 * 0.15 / 10_000)
    downstream_ok = abs(fa - fb) <= three_sigma

    ok = inverse_k and law_ok and tags_equal and tables_equal and downstream_ok
    report(6, "evolution continuity", ok,
           f"flip means={[round(means[k], 4) for k in (4, 8, 16, 32)]}, "
           f"law dev max={max(law_devs):.2f}, paths consistent={tags_equal and tables_equal}")


def test_criterion_07_regime_dichotomy():
    grid = AlphaGrid(16)
    params = RelaxationParams(eta=0.1)
    offsets = uniform_window(derive_seed(707, ("regime", "offsets")), 0, 100)
    # distant targets, excluding the antipode: the antipodal family is the
    # same observable, so its eigenstate is already an equilibrium
    arcs = (4, 5, 6, 7, 9, 10, 11, 12)
    improper_hits = 0
    equilibrium_hits = 0
    for t in range(100):
        start = int(offsets[t] * 16)
        target_arc = arcs[int(offsets[t] * 1e6) % len(arcs)]
        state = init_eigenstate(500, grid, grid.angle(start), 1,
                                seed=derive_seed(707, ("regime", "u")), window=t)
        d_alpha = target_arc * 2 * PI / 16
        below, _, rep_below = unitary_step(
            state, d_alpha, dt_sweeps=2, mode="adiabatic",
            seeds=HiddenSeeds(1, 2, t), params=params,
        )
        if (not rep_below.pure_state_valid) and detect_improper(below, params.eps_eq):
            improper_hits += 1
        above, _, rep_above = unitary_step(
            state, d_alpha, dt_sweeps=730, mode="adiabatic",
            seeds=HiddenSeeds(1, 2, t), params=params,
        )
        target_idx = (start + target_arc) % 16
        if rep_above.pure_state_valid and is_equilibrium(above, grid.angle(target_idx),
                                                         params.eps_eq):
            equilibrium_hits += 1
    ok = improper_hits == 100 and equilibrium_hits == 100
    report(7, "regime dichotomy", ok,
           f"improper {improper_hits}/100, equilibrium {equilibrium_hits}/100")


def test_criterion_08_singlet_full_scale():
    t0 = time.perf_counter()
    corr_cfg = ExperimentConfig(experiment="corr", master_seed=808,
                                n_sqe=1000, grid_size=360, trials=100_000)
    corr_res = run_experiment(corr_cfg)
    corr_rows = corr_res.files["corr.csv"][1]
    equal_setting_exact = corr_rows[0][1] == -1.0  # delta = 0 point
    worst = corr_res.summary["max_abs_deviation"]

    chsh_cfg = ExperimentConfig(experiment="chsh", master_seed=808,
                                n_sqe=1000, grid_size=360, trials=100_000)
    chsh_res = run_experiment(chsh_cfg)
    s = chsh_res.summary["S"]
    above = chsh_res.summary["sigmas_above_classical"]
    elapsed = time.perf_counter() - t0
    ok = (equal_setting_exact and worst <= 0.03
          and abs(s - 2 * math.sqrt(2)) <= 0.05 and above >= 16.0
          and elapsed < 300.0)
    report(8, "singlet correlations and CHSH", ok,
           f"E dev={worst:.4f}, S={s:.4f} ({above:.0f} sigma above 2), {elapsed:.0f}s")


def test_criterion_09_parameter_independence():
    cfg = ExperimentConfig(experiment="marginals", master_seed=909,
                           n_sqe=1000, grid_size=360, trials=20_000)
    result = run_experiment(cfg)
    marginal_checks = [c for c in result.checks if c["name"].startswith("marginal_")]
    conditional = next(c for c in result.checks
                       if c["name"] == "equal_setting_outcomes_anticorrelate")
    ok = result.passed and len(marginal_checks) == 16
    worst = max(c["dev"] / c["sigma"] for c in marginal_checks)
    report(9, "parameter independence with outcome dependence", ok,
           f"worst marginal dev={worst:.2f} sigma, "
           f"same-sign count={conditional['same_sign_count']}")


def test_criterion_10_byte_reproducibility(tmp_path):
    runs = {}
    for label, workers in (("a", 1), ("b", 1), ("w3", 3)):
        out = tmp_path / label
        code = main(["born", "--trials", "20000", "--n-sqe", "300",
                     "--seed", "1010", "--workers", str(workers), "--out", str(out)])
        assert code == 0
        runs[label] = {p.name: p.read_bytes() for p in sorted(out.iterdir())}
    rerun_same = runs["a"] == runs["b"]
    workers_same = runs["a"] == runs["w3"]

    for label, workers in (("c1", 1), ("c2", 2)):
        out = tmp_path / label
        code = main(["corr", "--trials", "4000", "--n-sqe", "300",
                     "--seed", "1010", "--workers", str(workers), "--out", str(out)])
        assert code == 0
        runs[label] = {p.name: p.read_bytes() for p in sorted(out.iterdir())}
    corr_same = runs["c1"] == runs["c2"]
    ok = rerun_same and workers_same and corr_same
    report(10, "byte-identical reruns across worker counts", ok,
           f"rerun={rerun_same}, workers={workers_same}, corr workers={corr_same}")
