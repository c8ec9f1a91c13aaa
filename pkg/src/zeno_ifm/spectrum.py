"""Wavelength sweeps of imbalanced interferometer chains.

Lengths are in micrometres, wavelengths in nanometres.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence, TextIO

import numpy as np

from .optics import (
    CircuitSpec,
    Coupler,
    Delay,
    Phase,
    PhotonState,
    build_ev_circuit,
    propagate,
)

CSV_HEADER = ("lambda_nm", "p_upper", "p_lower", "p_absorbed", "p_lost")


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class DispersionModel:
    """Linear effective index ``n_eff(lam) = n_eff0 + dn_dlambda * (lam - lambda0)``.

    ``dn_dlambda`` is per nanometre. Build from a group index with
    :meth:`from_group_index`.
    """

    n_eff0: float = 2.1129
    dn_dlambda: float = (2.1129 - 4.7) / 1550.0
    lambda0: float = 1550.0

    def __post_init__(self):
        if self.n_eff0 <= 1.0:
            raise ValueError(f"n_eff0 must exceed 1, got {self.n_eff0}")
        if self.n_g <= 0.0:
            raise ValueError(f"group index must be positive, got {self.n_g}")

    @classmethod
    def from_group_index(cls, n_eff0: float = 2.1129, n_g: float = 4.7, lambda0: float = 1550.0) -> "DispersionModel":
        return cls(n_eff0, (n_eff0 - n_g) / lambda0, lambda0)

    @property
    def n_g(self) -> float:
        return self.n_eff0 - self.lambda0 * self.dn_dlambda

    def n_eff(self, lam):
        return self.n_eff0 + self.dn_dlambda * (np.asarray(lam) - self.lambda0)


def phase_at(model: DispersionModel, delta_l_um: float, lam_nm):
    """Arm phase difference ``2 pi dL n_eff(lam) / lam`` in radians."""
    lam = np.asarray(lam_nm, dtype=float)
    if np.any(lam <= 0):
        raise ValueError("wavelength must be positive")
    if delta_l_um < 0:
        raise ValueError("delta_L must be non-negative")
    out = 2 * np.pi * (delta_l_um * 1e3) * model.n_eff(lam) / lam
    return float(out) if out.ndim == 0 else out


def fsr(model: DispersionModel, delta_l_um: float, lam_nm: float, exact: bool = False) -> float:
    """Free spectral range in nm.

    The default is the first-order ``lam^2 / (n_g dL)``. With ``exact=True``
    returns the spacing from ``lam`` to the next fringe at longer wavelength,
    solving ``1/lam1 - 1/lam2 = 1/(n_g dL)`` for ``lam2``.
    """
    opd = model.n_g * delta_l_um * 1e3
    if opd == 0:
        raise ValueError("n_g * delta_L must be non-zero")
    if exact:
        if opd <= lam_nm:
            raise ValueError("no next fringe: n_g * delta_L must exceed the wavelength")
        return lam_nm**2 / (opd - lam_nm)
    return lam_nm**2 / opd


def constructive_wavelength(model: DispersionModel, delta_l_um: float, near_nm: float) -> float:
    """Wavelength closest to ``near_nm`` where the arm phase is a multiple of 2 pi."""
    # phase = 2 pi dL n_g / lam + const for the linear index model
    opd = model.n_g * delta_l_um * 1e3
    const = phase_at(model, delta_l_um, near_nm) / (2 * np.pi) - opd / near_nm
    m = np.round(phase_at(model, delta_l_um, near_nm) / (2 * np.pi))
    return float(opd / (m - const))


def resolve_delays(circuit: CircuitSpec, model: DispersionModel, lam_nm: float) -> CircuitSpec:
    """Replace every :class:`Delay` by the :class:`Phase` it produces at ``lam_nm``."""
    stages = [
        Phase(phase_at(model, s.delta_l_um, lam_nm)) if isinstance(s, Delay) else s
        for s in circuit.stages
    ]
    return circuit.with_stages(stages)


@dataclass(frozen=True)
class SpectrumResult:
    """Rows of ``(lambda_nm, p_U, p_L, p_abs, p_loss)``, strictly increasing in wavelength."""

    rows: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def lam(self) -> np.ndarray:
        return self.rows[:, 0]

    @property
    def p_upper(self) -> np.ndarray:
        return self.rows[:, 1]

    @property
    def p_lower(self) -> np.ndarray:
        return self.rows[:, 2]

    @property
    def p_absorbed(self) -> np.ndarray:
        return self.rows[:, 3]

    @property
    def p_lost(self) -> np.ndarray:
        return self.rows[:, 4]

    def __len__(self) -> int:
        return len(self.rows)

    def write_csv(self, fh: TextIO) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in self.rows:
            w.writerow([f"{v:.15g}" for v in row])


def wavelength_grid(lam_min: float, lam_max: float, step: float) -> np.ndarray:
    if step <= 0:
        raise ValueError("step must be positive")
    if lam_min > lam_max:
        raise ValueError("lambda_min must not exceed lambda_max")
    n = int(np.floor((lam_max - lam_min) / step + 1e-9)) + 1
    return lam_min + step * np.arange(n)


def _row(circuit: CircuitSpec, model: DispersionModel, lam: float, state: PhotonState) -> tuple:
    out = propagate(state, resolve_delays(circuit, model, lam))
    return (lam, out.p_upper, out.p_lower, out.p_absorbed, out.p_lost)


def sweep_spectrum(
    circuit: CircuitSpec,
    model: DispersionModel,
    lam_range: tuple[float, float],
    step: float = 0.01,
    *,
    state: PhotonState | None = None,
    workers: int = 1,
) -> SpectrumResult:
    """Propagate ``state`` (lower-port input by default) at every wavelength of the grid.

    The circuit must contain at least one :class:`Delay`; each one's length is
    taken from the element itself.
    """
    if not circuit.has_delays:
        raise ConfigurationError("circuit has no Delay elements; the sweep would be flat")
    state = state or PhotonState.lower_input()
    grid = wavelength_grid(lam_range[0], lam_range[1], step)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            rows = list(ex.map(lambda lam: _row(circuit, model, lam, state), grid))
    else:
        rows = [_row(circuit, model, lam, state) for lam in grid]
    meta = {"lambda_min_nm": lam_range[0], "lambda_max_nm": lam_range[1], "step_nm": step, **circuit.metadata}
    return SpectrumResult(np.array(rows, dtype=float).reshape(-1, 5), meta)


def visibility(result: SpectrumResult) -> float:
    """``(P_U - P_L)/(P_U + P_L)`` at the wavelength where ``P_U`` peaks."""
    if len(result) == 0:
        raise ValueError("empty spectrum")
    i = int(np.argmax(result.p_upper))
    pu, pl = result.p_upper[i], result.p_lower[i]
    if pu + pl <= 0:
        raise ValueError("visibility undefined: no output power at the peak row")
    return float((pu - pl) / (pu + pl))


def dip_positions(result: SpectrumResult, column: str = "p_lower", depth: float = 0.5) -> np.ndarray:
    """Wavelengths of interior local minima deeper than ``depth`` times the signal range."""
    y = getattr(result, column)
    lo, hi = y.min(), y.max()
    interior = (y[1:-1] < y[:-2]) & (y[1:-1] <= y[2:])
    deep = y[1:-1] <= lo + (1.0 - depth) * (hi - lo)
    idx = np.nonzero(interior & deep)[0] + 1
    return result.lam[idx]


def _harmonic(fn, phases=(0.0, np.pi / 2, np.pi)):
    """Fit ``a + b cos(phi) + c sin(phi)`` to a first-harmonic function of phase."""
    f0, f1, f2 = (fn(p) for p in phases)
    a = (f0 + f2) / 2
    b = (f0 - f2) / 2
    c = f1 - a
    return a, b, c


def _two_coupler_outputs(r_in: float, t_out: float, phi: float) -> tuple[float, float]:
    circuit = CircuitSpec((Coupler(r_in), Phase(phi), Coupler.from_transmissivity(t_out)))
    out = propagate(PhotonState.lower_input(), circuit)
    return out.p_lower, out.p_upper


def contrast(r_in: float, t_out: float) -> float:
    """``min_phi P_L / max_phi P_U`` for a two-coupler interferometer.

    Both outputs are first harmonics in the arm phase, so each extremum is
    located from three samples and then evaluated by direct propagation.
    """
    _, b, c = _harmonic(lambda p: _two_coupler_outputs(r_in, t_out, p)[0])
    phi_min = float(np.arctan2(-c, -b))
    _, b, c = _harmonic(lambda p: _two_coupler_outputs(r_in, t_out, p)[1])
    phi_max = float(np.arctan2(c, b))
    return _two_coupler_outputs(r_in, t_out, phi_min)[0] / _two_coupler_outputs(r_in, t_out, phi_max)[1]


def contrast_vs_mismatch(r_in: float, t_out_list: Sequence[float]) -> list[tuple[float, float]]:
    """Contrast for each output transmissivity, keyed by mismatch ``r_in - t_out``."""
    return [(r_in - t, contrast(r_in, t)) for t in t_out_list]


def ev_spectrum_circuit(r_bs1: float, r_bs2: float, delta_l_um: float = 100.0, absorber_alpha: float = 0.0) -> CircuitSpec:
    return build_ev_circuit(r_bs1, r_bs2, absorber_alpha, delta_l_um=delta_l_um)
