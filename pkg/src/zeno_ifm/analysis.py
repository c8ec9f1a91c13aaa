"""Closed-form efficiencies for the two-stage and N-stage (Zeno) schemes.

``eta`` throughout is the fraction of conclusive outcomes that are
interaction free, ``p_L / (p_L + p_abs)``. Scattered photons are neither
conclusive nor explosions, so ``p_loss`` stays out of the denominator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .optics import (
    LOSS_ARMS,
    PhotonState,
    build_ev_circuit,
    build_zeno_circuit,
    propagate,
    zeno_reflectivity,
)


@dataclass(frozen=True)
class EvConfig:
    r_bs1: float
    r_bs2: float

    def __post_init__(self):
        for name in ("r_bs1", "r_bs2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")

    @property
    def complementary(self) -> bool:
        """True when the couplers satisfy T_BS1 = R_BS2."""
        return abs((1.0 - self.r_bs1) - self.r_bs2) <= 1e-12

    @classmethod
    def matched(cls, r_bs1: float) -> "EvConfig":
        return cls(r_bs1, 1.0 - r_bs1)


@dataclass(frozen=True)
class IfmReport:
    p_L: float
    p_U: float
    p_abs: float
    p_loss: float = 0.0

    @property
    def eta(self) -> float:
        conclusive = self.p_L + self.p_abs
        return self.p_L / conclusive if conclusive > 0 else float("nan")

    @property
    def p_ifm(self) -> float:
        return self.p_L

    @property
    def count_normalized_eta(self) -> float:
        """What ``C_L / (C_T - C_U a_L/a_U)`` converges to with a 50/50 input tap.

        The monitor counts every photon entering the device, so scattered
        photons end up in the denominator: ``p_L / (1 - p_U)``.
        """
        return self.p_L / (1.0 - self.p_U) if self.p_U < 1.0 else float("nan")

    @property
    def total(self) -> float:
        return self.p_L + self.p_U + self.p_abs + self.p_loss

    @classmethod
    def from_state(cls, state: PhotonState) -> "IfmReport":
        return cls(state.p_lower, state.p_upper, state.p_absorbed, state.p_lost)


def ev_efficiency(cfg: EvConfig) -> IfmReport:
    """Bomb-present outcome probabilities of the two-coupler interferometer.

    The photon enters the lower port. Transmission at BS1 sends it into the
    upper arm and the bomb (``p_abs = T1``); reflection keeps it in the lower
    arm, after which BS2 reflects it to L with ``R2`` or transmits it to U.
    """
    r1, r2 = cfg.r_bs1, cfg.r_bs2
    return IfmReport(p_L=r1 * r2, p_U=r1 * (1.0 - r2), p_abs=1.0 - r1)


def ev_efficiency_matched(r_bs1: float) -> float:
    """``R/(1+R)`` for complementary couplers."""
    return r_bs1 / (1.0 + r_bs1)


def zeno_closed_form(n: int, loss_per_stage: float = 0.0, loss_arms: str = "both") -> IfmReport:
    """Outcome probabilities of the absorber chain summed analytically.

    Loss is applied after each coupler (and after that stage's absorber), as in
    :func:`zeno_ifm.optics.build_zeno_circuit`.
    """
    if n < 2:
        raise ValueError(f"N must be >= 2, got {n!r}")
    if loss_arms not in LOSS_ARMS:
        raise ValueError(f"loss_arms must be one of {LOSS_ARMS}")
    r = zeno_reflectivity(n)
    t = 1.0 - r
    ell = loss_per_stage
    keep_low = 1.0 - ell if loss_arms in ("both", "lower") else 1.0
    keep_up = 1.0 - ell if loss_arms in ("both", "upper") else 1.0
    # lower-arm probability entering coupler k+1 is (r*keep_low)^k
    q = r * keep_low
    k = np.arange(n - 1)
    p_abs = float(np.sum(t * q**k))
    p_L = q ** (n - 1) * r * keep_low
    p_U = q ** (n - 1) * t * keep_up
    p_loss = 1.0 - p_L - p_U - p_abs
    if ell == 0.0:
        p_loss = 0.0
    return IfmReport(p_L=p_L, p_U=p_U, p_abs=p_abs, p_loss=p_loss)


def zeno_probabilities(n: int, loss_per_stage: float = 0.0, loss_arms: str = "both") -> IfmReport:
    """Bomb-present probabilities of the N-coupler chain.

    Lossless chains use the textbook closed form; lossy chains are propagated
    through the transfer-matrix engine.
    """
    if int(n) != n or n < 2:
        raise ValueError(f"N must be an integer >= 2, got {n!r}")
    n = int(n)
    if loss_per_stage == 0.0:
        c2 = zeno_reflectivity(n)
        p_L = c2**n
        p_U = c2 ** (n - 1) * (1.0 - c2)
        return IfmReport(p_L=p_L, p_U=p_U, p_abs=1.0 - p_L - p_U)
    circuit = build_zeno_circuit(n, absorbers=True, loss_per_stage=loss_per_stage, loss_arms=loss_arms)
    return IfmReport.from_state(propagate(PhotonState.lower_input(), circuit))


def zeno_probabilities_matrix(n: int, loss_per_stage: float = 0.0, loss_arms: str = "both") -> IfmReport:
    """Same quantity as :func:`zeno_probabilities`, always via propagation."""
    circuit = build_zeno_circuit(n, absorbers=True, loss_per_stage=loss_per_stage, loss_arms=loss_arms)
    return IfmReport.from_state(propagate(PhotonState.lower_input(), circuit))


def ev_probabilities_matrix(cfg: EvConfig) -> IfmReport:
    circuit = build_ev_circuit(cfg.r_bs1, cfg.r_bs2, absorber_alpha=1.0)
    return IfmReport.from_state(propagate(PhotonState.lower_input(), circuit))


def efficiency_curve(
    n_list: Iterable[int], loss_per_stage: float = 0.0, loss_arms: str = "both"
) -> list[tuple[int, IfmReport]]:
    return [(n, zeno_probabilities(n, loss_per_stage, loss_arms)) for n in sorted(n_list)]


def ev_curve(r_grid: Iterable[float]) -> list[tuple[float, IfmReport]]:
    """Matched-coupler curve over the first coupler's reflectivity."""
    return [(float(r), ev_efficiency(EvConfig.matched(float(r)))) for r in r_grid]
