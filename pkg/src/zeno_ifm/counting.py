"""Monte Carlo photon counting with an attenuated-laser source.

Each detector gate carries a Poisson number of photons. Every photon is routed
independently: a fraction ``tap_ratio`` goes to the input monitor T, the rest
enters the device and exits at U or L, is absorbed, or is scattered, with
probabilities from the transfer-matrix engine. Detectors are binary (at most
one click per gate) with efficiencies ``a_T``, ``a_U``, ``a_L`` and an
optional per-gate dark-click probability.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .analysis import IfmReport
from .optics import CircuitSpec, PhotonState, propagate

BLOCK_GATES = 1 << 20


class EstimatorError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    circuit: CircuitSpec
    gates: int = 1_000_000
    mu: float = 0.1
    a_L: float = 1.0
    a_U: float = 1.0
    a_T: float = 1.0
    tap_ratio: float = 0.5
    rng_seed: int = 0
    dark_count_prob: float = 0.0
    gate_rate_hz: float = 100e3

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError("mu must be non-negative")
        if int(self.gates) != self.gates or self.gates < 1:
            raise ValueError("gates must be a positive integer")
        for name in ("a_L", "a_U", "a_T", "tap_ratio", "dark_count_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
        if self.circuit.has_delays:
            raise ValueError("circuit has unresolved Delay elements; resolve them at a wavelength first")

    def outcome_probabilities(self) -> IfmReport:
        return IfmReport.from_state(propagate(PhotonState.lower_input(), self.circuit))


@dataclass(frozen=True)
class CountingRecord:
    c_T: int
    c_L: int
    c_U: int
    explosions: int
    multi_photon_gates: int
    gates: int
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)


def _simulate_block(cfg: ExperimentConfig, probs: np.ndarray, block: int, size: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(cfg.rng_seed, spawn_key=(block,)))
    k = rng.poisson(cfg.mu, size)
    gate = np.repeat(np.arange(size), k)
    m = gate.size
    to_tap = rng.random(m) < cfg.tap_ratio
    # device outcomes: 0=U, 1=L, 2=absorbed, 3=lost
    outcome = np.searchsorted(np.cumsum(probs)[:-1], rng.random(m), side="right")
    detect_u = rng.random(m)

    def clicks(mask, eff):
        hit = np.zeros(size, dtype=bool)
        hit[gate[mask & (detect_u < eff)]] = True
        if cfg.dark_count_prob > 0:
            hit |= rng.random(size) < cfg.dark_count_prob
        return int(hit.sum())

    in_dev = ~to_tap
    c_T = clicks(to_tap, cfg.a_T)
    c_L = clicks(in_dev & (outcome == 1), cfg.a_L)
    c_U = clicks(in_dev & (outcome == 0), cfg.a_U)
    explosions = int(np.count_nonzero(in_dev & (outcome == 2)))
    return np.array([c_T, c_L, c_U, explosions, np.count_nonzero(k >= 2)], dtype=np.int64)


def run_counting(cfg: ExperimentConfig, workers: int = 1) -> CountingRecord:
    """Simulate ``cfg.gates`` detector gates.

    Gates are processed in blocks of ``BLOCK_GATES`` whose seeds derive from
    ``(rng_seed, block index)``, so the record does not depend on ``workers``.
    """
    rep = cfg.outcome_probabilities()
    probs = np.clip([rep.p_U, rep.p_L, rep.p_abs, rep.p_loss], 0.0, None)
    probs = probs / probs.sum()
    sizes = [min(BLOCK_GATES, cfg.gates - s) for s in range(0, cfg.gates, BLOCK_GATES)]
    jobs = list(enumerate(sizes))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(lambda j: _simulate_block(cfg, probs, *j), jobs))
    else:
        parts = [_simulate_block(cfg, probs, b, s) for b, s in jobs]
    tot = np.sum(parts, axis=0)
    return CountingRecord(*(int(x) for x in tot), gates=cfg.gates, seed=cfg.rng_seed)


def expected_rates(cfg: ExperimentConfig) -> dict[str, float]:
    """Exact per-gate expectations of every record field divided by ``gates``."""
    rep = cfg.outcome_probabilities()
    mu, tap, d = cfg.mu, cfg.tap_ratio, cfg.dark_count_prob

    def click(flux):
        return 1.0 - (1.0 - d) * np.exp(-flux)

    return {
        "c_T": click(mu * tap * cfg.a_T),
        "c_L": click(mu * (1 - tap) * rep.p_L * cfg.a_L),
        "c_U": click(mu * (1 - tap) * rep.p_U * cfg.a_U),
        "explosions": mu * (1 - tap) * rep.p_abs,
        "multi_photon_gates": 1.0 - (1.0 + mu) * np.exp(-mu),
    }


def _counts(rec: CountingRecord, correct_saturation: bool):
    """Counts and their variances, optionally mapped to mean detected photons.

    A binary detector clicking in a fraction ``c/G`` of gates saw on average
    ``-ln(1 - c/G)`` detected photons per gate.
    """
    g = rec.gates
    out = {}
    for name in ("c_T", "c_L", "c_U"):
        c = getattr(rec, name)
        if correct_saturation:
            frac = c / g
            if frac >= 1.0:
                raise EstimatorError(f"{name} saturated in every gate")
            out[name] = (-g * np.log1p(-frac), c / (1.0 - frac))
        else:
            out[name] = (float(c), float(c))
    return out


def estimate_eta_ev(
    rec: CountingRecord, a_ratio: float = 1.0, a_ratio_sigma: float = 0.0, *, correct_saturation: bool = False
) -> tuple[float, float]:
    """Two-stage estimate ``1 / (2 + (C_L/C_U)(a_U/a_L))``.

    ``a_ratio`` is ``a_U/a_L``. Sigma combines Poisson errors on both counts and
    the ratio uncertainty to first order.
    """
    n = _counts(rec, correct_saturation)
    (cl, vl), (cu, vu) = n["c_L"], n["c_U"]
    if cu <= 0:
        raise EstimatorError("C_U = 0: two-stage estimate undefined")
    x = cl / cu * a_ratio
    eta = 1.0 / (2.0 + x)
    rel2 = (vl / cl**2 if cl > 0 else 0.0) + vu / cu**2 + (a_ratio_sigma / a_ratio) ** 2
    return float(eta), float(eta**2 * x * np.sqrt(rel2))


def estimate_eta_zeno(
    rec: CountingRecord, a_ratio: float = 1.0, a_ratio_sigma: float = 0.0, *, correct_saturation: bool = False
) -> tuple[float, float]:
    """Multi-stage estimate ``C_L / (C_T - C_U a_L/a_U)``; ``a_ratio`` is ``a_L/a_U``."""
    n = _counts(rec, correct_saturation)
    (cl, vl), (ct, vt), (cu, vu) = n["c_L"], n["c_T"], n["c_U"]
    q = a_ratio
    den = ct - cu * q
    if den <= 0:
        raise EstimatorError(f"non-positive denominator C_T - C_U*a_L/a_U = {den:.6g}; check efficiency calibration")
    eta = cl / den
    var = vl / den**2 + (cl**2 / den**4) * (vt + q**2 * vu) + (cl * cu * a_ratio_sigma / den**2) ** 2
    return float(eta), float(np.sqrt(var))


def estimate_eta_conclusive(rec: CountingRecord, a_L: float = 1.0) -> tuple[float, float]:
    """``p_L / (p_L + p_abs)`` from simulated counts, using the explosion tally.

    Only a simulation knows the explosion count, so this estimator has no
    laboratory counterpart; it reads out exactly the ``eta`` of
    :class:`zeno_ifm.analysis.IfmReport`, scattering excluded.
    """
    (nl, vl) = _counts(rec, True)["c_L"]
    nl, vl = nl / a_L, vl / a_L**2
    e = float(rec.explosions)
    tot = nl + e
    if tot <= 0:
        raise EstimatorError("no conclusive events")
    eta = nl / tot
    sigma = np.sqrt(e**2 * vl + nl**2 * e) / tot**2
    return float(eta), float(sigma)


@dataclass
class CountResult:
    """JSON payload of the ``count`` command."""

    record: CountingRecord
    estimates: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {**self.record.to_dict(), "estimates": self.estimates}


def summarize(rec: CountingRecord, cfg: ExperimentConfig, a_ratio_sigma: float = 0.0) -> CountResult:
    """Record plus every estimator that is defined for it."""
    est = {}
    for name, fn, ratio in (
        ("eta_ev", estimate_eta_ev, cfg.a_U / cfg.a_L if cfg.a_L > 0 else np.nan),
        ("eta_zeno", estimate_eta_zeno, cfg.a_L / cfg.a_U if cfg.a_U > 0 else np.nan),
    ):
        try:
            eta, sigma = fn(rec, ratio, a_ratio_sigma)
            est[name] = {"eta": eta, "sigma": sigma}
        except (EstimatorError, ZeroDivisionError) as exc:
            est[name] = {"eta": None, "sigma": None, "error": str(exc)}
    try:
        eta, sigma = estimate_eta_conclusive(rec, cfg.a_L)
        est["eta_conclusive"] = {"eta": eta, "sigma": sigma}
    except (EstimatorError, ZeroDivisionError) as exc:
        est["eta_conclusive"] = {"eta": None, "sigma": None, "error": str(exc)}
    return CountResult(rec, est)
