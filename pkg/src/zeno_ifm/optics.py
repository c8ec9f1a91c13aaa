"""Two-mode transfer-matrix engine for single-photon path states.

A photon in a chain of coupled Mach-Zehnder interferometers is described by
two complex amplitudes (upper and lower waveguide) plus the probability that
has already left the coherent state, either absorbed by a "bomb" or lost to
scattering. Every element of a circuit acts on that state; the sum of all four
probabilities is conserved.

Coupler convention: ``[[sqrt(R), i sqrt(T)], [i sqrt(T), sqrt(R)]]`` acting on
``(upper, lower)``, so reflection keeps the photon in its waveguide.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np

NORM_TOL = 1e-10
LOSS_ARMS = ("both", "upper", "lower")


class ContractError(ValueError):
    """Raised when a state or circuit violates its invariants."""


def _check_fraction(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0 or np.isnan(value):
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return value


@dataclass(frozen=True)
class PhotonState:
    """Path state of a single photon.

    Attributes
    ----------
    upper, lower : complex
        Amplitudes in the upper and lower waveguide.
    p_absorbed : float
        Probability already absorbed by absorbers.
    p_lost : float
        Probability already scattered out of the circuit.
    """

    upper: complex = 0j
    lower: complex = 1 + 0j
    p_absorbed: float = 0.0
    p_lost: float = 0.0

    @property
    def p_upper(self) -> float:
        return abs(self.upper) ** 2

    @property
    def p_lower(self) -> float:
        return abs(self.lower) ** 2

    @property
    def total(self) -> float:
        return self.p_upper + self.p_lower + self.p_absorbed + self.p_lost

    def check(self, tol: float = NORM_TOL) -> None:
        if abs(self.total - 1.0) > tol:
            raise ContractError(f"state is not normalized: total probability {self.total!r}")
        if self.p_absorbed < -tol or self.p_lost < -tol:
            raise ContractError("negative absorbed/lost probability")

    @classmethod
    def lower_input(cls) -> "PhotonState":
        """Photon injected into the lower port."""
        return cls(0j, 1 + 0j)

    @classmethod
    def upper_input(cls) -> "PhotonState":
        return cls(1 + 0j, 0j)


# -- stage elements ----------------------------------------------------------


@dataclass(frozen=True)
class Coupler:
    """Lossless directional coupler (beam splitter).

    ``transmissivity`` may be given explicitly when the caller knows T to full
    precision; otherwise it is ``1 - reflectivity``.
    """

    reflectivity: float
    transmissivity: float | None = None

    def __post_init__(self):
        r = _check_fraction("reflectivity", self.reflectivity)
        object.__setattr__(self, "reflectivity", r)
        if self.transmissivity is None:
            object.__setattr__(self, "transmissivity", 1.0 - r)
        else:
            t = _check_fraction("transmissivity", self.transmissivity)
            if abs(r + t - 1.0) > 1e-12:
                raise ValueError(f"R + T must equal 1, got {r} + {t}")
            object.__setattr__(self, "transmissivity", t)

    @classmethod
    def from_transmissivity(cls, t: float) -> "Coupler":
        t = _check_fraction("transmissivity", t)
        return cls(1.0 - t, t)


@dataclass(frozen=True)
class Phase:
    """Phase delay ``exp(i delta_phi)`` on the upper arm."""

    delta_phi: float


@dataclass(frozen=True)
class Delay:
    """Unresolved dispersive section of extra length ``delta_l_um`` in the upper arm.

    Its phase depends on wavelength, so it must be replaced by a :class:`Phase`
    (see :func:`zeno_ifm.spectrum.resolve_delays`) before propagation.
    """

    delta_l_um: float


@dataclass(frozen=True)
class Absorber:
    """Absorbs a fraction ``alpha`` of the upper-arm probability."""

    alpha: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", _check_fraction("alpha", self.alpha))


@dataclass(frozen=True)
class Loss:
    """Scatters a fraction ``fraction`` of the probability in the selected arms."""

    fraction: float
    arms: str = "both"

    def __post_init__(self):
        object.__setattr__(self, "fraction", _check_fraction("loss fraction", self.fraction))
        if self.arms not in LOSS_ARMS:
            raise ValueError(f"arms must be one of {LOSS_ARMS}, got {self.arms!r}")


StageElement = Union[Coupler, Phase, Delay, Absorber, Loss]


@dataclass(frozen=True)
class CircuitSpec:
    stages: tuple[StageElement, ...] = ()
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))

    @property
    def n_couplers(self) -> int:
        return sum(isinstance(s, Coupler) for s in self.stages)

    @property
    def n_absorbers(self) -> int:
        return sum(isinstance(s, Absorber) for s in self.stages)

    @property
    def has_delays(self) -> bool:
        return any(isinstance(s, Delay) for s in self.stages)

    def with_stages(self, stages: Sequence[StageElement]) -> "CircuitSpec":
        return replace(self, stages=tuple(stages))


# -- operations --------------------------------------------------------------


def coupler_matrix(reflectivity: float, transmissivity: float | None = None) -> np.ndarray:
    """2x2 unitary of a symmetric lossless coupler.

    >>> coupler_matrix(1.0)
    array([[1.+0.j, 0.+0.j],
           [0.+0.j, 1.+0.j]])
    """
    c = Coupler(reflectivity, transmissivity)
    r, t = np.sqrt(c.reflectivity), np.sqrt(c.transmissivity)
    return np.array([[r, 1j * t], [1j * t, r]], dtype=np.complex128)


def apply_stage(state: PhotonState, element: StageElement, *, check: bool = True) -> PhotonState:
    if check:
        state.check()
    u, l = state.upper, state.lower
    if isinstance(element, Coupler):
        m = coupler_matrix(element.reflectivity, element.transmissivity)
        return replace(state, upper=m[0, 0] * u + m[0, 1] * l, lower=m[1, 0] * u + m[1, 1] * l)
    if isinstance(element, Phase):
        return replace(state, upper=u * np.exp(1j * element.delta_phi))
    if isinstance(element, Absorber):
        a = element.alpha
        return replace(
            state,
            upper=u * np.sqrt(1.0 - a),
            p_absorbed=state.p_absorbed + a * abs(u) ** 2,
        )
    if isinstance(element, Loss):
        f = element.fraction
        keep = np.sqrt(1.0 - f)
        lost = 0.0
        if element.arms in ("both", "upper"):
            lost += f * abs(u) ** 2
            u = u * keep
        if element.arms in ("both", "lower"):
            lost += f * abs(l) ** 2
            l = l * keep
        return replace(state, upper=u, lower=l, p_lost=state.p_lost + lost)
    if isinstance(element, Delay):
        raise ContractError("circuit contains an unresolved Delay; resolve it to a Phase at a wavelength first")
    raise TypeError(f"unknown stage element {element!r}")


def propagate(state: PhotonState, circuit: CircuitSpec) -> PhotonState:
    """Fold :func:`apply_stage` over the circuit, checking conservation at every step."""
    state.check()
    for element in circuit.stages:
        state = apply_stage(state, element, check=False)
        state.check()
    return state


def zeno_reflectivity(n: int) -> float:
    """Per-coupler reflectivity ``cos^2(pi / 2N)`` that walks the photon across in N steps."""
    return float(np.cos(np.pi / (2 * n)) ** 2)


def build_zeno_circuit(
    n: int,
    absorbers: bool = False,
    loss_per_stage: float = 0.0,
    *,
    loss_arms: str = "both",
    absorber_alpha: float = 1.0,
    delta_l_um: float | None = None,
) -> CircuitSpec:
    """N-coupler chain of connected interferometers.

    Stage k is: coupler, then (for k < N) an optional upper-arm delay and an
    optional absorber, then an optional loss element. With ``n=2`` this is the
    two-beam-splitter interferometer.
    """
    if int(n) != n or n < 2:
        raise ValueError(f"N must be an integer >= 2, got {n!r}")
    n = int(n)
    if not 0.0 <= loss_per_stage < 1.0:
        raise ValueError(f"loss_per_stage must lie in [0, 1), got {loss_per_stage!r}")
    r = zeno_reflectivity(n)
    stages: list[StageElement] = []
    for k in range(n):
        stages.append(Coupler(r))
        if k < n - 1:
            if delta_l_um is not None:
                stages.append(Delay(delta_l_um))
            if absorbers:
                stages.append(Absorber(absorber_alpha))
        if loss_per_stage > 0:
            stages.append(Loss(loss_per_stage, loss_arms))
    meta = {"kind": "zeno", "N": n, "absorbers": absorbers, "loss_per_stage": loss_per_stage, "loss_arms": loss_arms}
    return CircuitSpec(tuple(stages), meta)


def build_ev_circuit(
    r_bs1: float,
    r_bs2: float,
    absorber_alpha: float = 0.0,
    *,
    phase: float = 0.0,
    delta_l_um: float | None = None,
) -> CircuitSpec:
    """Two-coupler interferometer with an optional absorber in the upper arm."""
    stages: list[StageElement] = [Coupler(r_bs1)]
    stages.append(Delay(delta_l_um) if delta_l_um is not None else Phase(phase))
    if absorber_alpha > 0:
        stages.append(Absorber(absorber_alpha))
    stages.append(Coupler(r_bs2))
    meta = {"kind": "ev", "r_bs1": r_bs1, "r_bs2": r_bs2, "absorber_alpha": absorber_alpha}
    return CircuitSpec(tuple(stages), meta)
