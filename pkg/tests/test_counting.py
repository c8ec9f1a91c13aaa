import numpy as np
import pytest

from zeno_ifm.analysis import EvConfig, ev_efficiency, zeno_probabilities
from zeno_ifm.counting import (
    CountingRecord,
    EstimatorError,
    ExperimentConfig,
    estimate_eta_conclusive,
    estimate_eta_ev,
    estimate_eta_zeno,
    expected_rates,
    run_counting,
    summarize,
)
from zeno_ifm.optics import build_ev_circuit, build_zeno_circuit

ZENO10 = build_zeno_circuit(10, absorbers=True)


def rec(c_T=0, c_L=0, c_U=0, gates=10**9):
    return CountingRecord(c_T, c_L, c_U, 0, 0, gates, 0)


def test_dark_source():
    r = run_counting(ExperimentConfig(ZENO10, gates=100_000, mu=0.0))
    assert (r.c_T, r.c_L, r.c_U, r.explosions, r.multi_photon_gates) == (0, 0, 0, 0, 0)


def test_reproducible_and_shard_independent():
    cfg = ExperimentConfig(ZENO10, gates=3_000_000, rng_seed=11)
    a = run_counting(cfg)
    assert a == run_counting(cfg)
    assert a == run_counting(cfg, workers=3)
    assert a != run_counting(ExperimentConfig(ZENO10, gates=3_000_000, rng_seed=12))


def test_counts_bounded_by_gates():
    r = run_counting(ExperimentConfig(ZENO10, gates=10_000, mu=5.0))
    assert max(r.c_T, r.c_L, r.c_U) <= r.gates


@pytest.fixture(scope="module")
def zeno_run():
    cfg = ExperimentConfig(ZENO10, gates=10_000_000, rng_seed=3)
    return cfg, run_counting(cfg)


def test_lower_click_rate(zeno_run):
    cfg, r = zeno_run
    p = expected_rates(cfg)["c_L"]
    # exact Poisson-thinned click probability, 1 - exp(-0.05 * 0.78055)
    assert p == pytest.approx(1 - np.exp(-0.05 * 0.7805460697811408), rel=1e-12)
    se = np.sqrt(p * (1 - p) / r.gates)
    assert abs(r.c_L / r.gates - p) < 3 * se


def test_multi_photon_fraction(zeno_run):
    _, r = zeno_run
    p = 1 - 1.1 * np.exp(-0.1)
    assert p == pytest.approx(0.0047, abs=5e-5)
    assert abs(r.multi_photon_gates / r.gates - p) < 3 * np.sqrt(p * (1 - p) / r.gates)
    assert r.multi_photon_gates / r.gates < 0.05


def test_explosion_rate(zeno_run):
    cfg, r = zeno_run
    expected = (1 - cfg.tap_ratio) * cfg.mu * zeno_probabilities(10).p_abs
    assert abs(r.explosions / r.gates - expected) < 3 * np.sqrt(expected / r.gates)


def test_ev_estimator_examples():
    assert estimate_eta_ev(rec(c_L=1000, c_U=1000))[0] == pytest.approx(1 / 3)
    # complementary couplers: C_L/C_U = T1/R1 with R1 = T_DC2 = 0.852
    eta, _ = estimate_eta_ev(rec(c_L=148_000, c_U=852_000))
    assert eta == pytest.approx(0.46004319654427644, abs=1e-12)
    with pytest.raises(EstimatorError):
        estimate_eta_ev(rec(c_L=10, c_U=0))


def test_zeno_estimator_examples():
    assert estimate_eta_zeno(rec(c_T=2000, c_L=1000, c_U=0))[0] == 0.5
    with pytest.raises(EstimatorError):
        estimate_eta_zeno(rec(c_T=100, c_L=10, c_U=200))


def test_sigma_includes_ratio_uncertainty():
    r = rec(c_T=20000, c_L=5000, c_U=2000)
    _, s0 = estimate_eta_zeno(r, 1.0, 0.0)
    _, s1 = estimate_eta_zeno(r, 1.0, 0.05)
    assert s1 > s0
    _, e0 = estimate_eta_ev(r, 1.0, 0.0)
    _, e1 = estimate_eta_ev(r, 1.0, 0.05)
    assert e1 > e0


def test_sigma_matches_replica_spread():
    cfg = ExperimentConfig(build_zeno_circuit(5, True, 0.074), gates=200_000)
    runs = [run_counting(ExperimentConfig(cfg.circuit, gates=cfg.gates, rng_seed=s)) for s in range(40)]
    etas = np.array([estimate_eta_zeno(r)[0] for r in runs])
    sigmas = np.array([estimate_eta_zeno(r)[1] for r in runs])
    assert np.std(etas, ddof=1) == pytest.approx(np.mean(sigmas), rel=0.35)


def test_ev_device_end_to_end():
    cfg = ExperimentConfig(build_ev_circuit(0.852, 0.148, absorber_alpha=1.0), gates=10_000_000, rng_seed=5)
    eta, sigma = estimate_eta_ev(run_counting(cfg), correct_saturation=True)
    analytic = ev_efficiency(EvConfig.matched(0.852)).eta
    assert abs(eta - analytic) < 3 * sigma


def test_zeno_estimator_converges_to_count_normalized(zeno_run):
    cfg = ExperimentConfig(build_zeno_circuit(10, True, 0.074), gates=10_000_000, rng_seed=9)
    eta, sigma = estimate_eta_zeno(run_counting(cfg), correct_saturation=True)
    assert abs(eta - zeno_probabilities(10, 0.074).count_normalized_eta) < 3 * sigma


def test_conclusive_estimator(zeno_run):
    _, r = zeno_run
    eta, sigma = estimate_eta_conclusive(r)
    assert abs(eta - zeno_probabilities(10).eta) < 3 * sigma


def test_no_bomb_no_false_claims():
    cfg = ExperimentConfig(build_ev_circuit(0.852, 0.148), gates=2_000_000, rng_seed=2)
    r = run_counting(cfg)
    assert r.c_L / r.gates < 10 * r.multi_photon_gates / r.gates
    assert r.explosions == 0


def test_dark_counts_and_efficiencies():
    cfg = ExperimentConfig(ZENO10, gates=2_000_000, a_L=0.3, a_U=0.6, a_T=0.7, dark_count_prob=1e-3, rng_seed=4)
    r = run_counting(cfg)
    exp = expected_rates(cfg)
    for name in ("c_T", "c_L", "c_U"):
        p = exp[name]
        assert abs(getattr(r, name) / r.gates - p) < 4 * np.sqrt(p * (1 - p) / r.gates), name


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(ZENO10, mu=-1)
    with pytest.raises(ValueError):
        ExperimentConfig(ZENO10, gates=0)
    with pytest.raises(ValueError):
        ExperimentConfig(ZENO10, a_L=1.5)
    with pytest.raises(ValueError):
        ExperimentConfig(build_zeno_circuit(3, delta_l_um=100.0))


def test_summarize_reports_undefined_estimates():
    cfg = ExperimentConfig(build_zeno_circuit(3), gates=10)
    out = summarize(rec(c_T=10, c_L=0, c_U=0, gates=10), cfg).to_dict()
    assert out["estimates"]["eta_ev"]["eta"] is None
    assert "error" in out["estimates"]["eta_ev"]
    assert out["estimates"]["eta_zeno"]["eta"] == 0.0
