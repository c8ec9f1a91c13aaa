"""INI-style run configuration.

Every physical quantity carries its unit in the key name. Example::

    [circuit]
    kind = zeno            ; or: ev
    n = 10
    absorbers = true
    loss_per_stage = 0.074
    loss_arms = both
    delta_l_um = 100

    [dispersion]
    n_eff0 = 2.1129
    n_g = 4.7
    lambda0_nm = 1550

    [sweep]
    lambda_min_nm = 1520
    lambda_max_nm = 1560
    step_nm = 0.01

    [source]
    mu = 0.1
    tap_ratio = 0.5
    gates = 10000000
    seed = 1

    [detectors]
    a_l = 1.0
    a_u = 1.0
    a_t = 1.0
    a_ratio_sigma = 0.0
    dark_count_prob = 0.0
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

from .counting import ExperimentConfig
from .optics import CircuitSpec, build_ev_circuit, build_zeno_circuit
from .spectrum import DispersionModel, resolve_delays


class ConfigError(ValueError):
    pass


def read_config(path: str | Path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    cp.read(path)
    return cp


def snapshot(cp: configparser.ConfigParser) -> dict:
    return {s: dict(cp[s]) for s in cp.sections()}


def _get(cp, section, key, conv=float, default=None):
    if not cp.has_option(section, key):
        if default is None:
            raise ConfigError(f"missing [{section}] {key}")
        return default
    raw = cp.get(section, key)
    try:
        if conv is bool:
            return cp.getboolean(section, key)
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from exc


def circuit_from_config(cp, with_delays: bool) -> CircuitSpec:
    """Build the circuit; with ``with_delays`` each imbalanced arm gets a Delay element."""
    if not cp.has_section("circuit"):
        raise ConfigError("missing [circuit] section")
    kind = cp.get("circuit", "kind", fallback="zeno").strip().lower()
    dl = _get(cp, "circuit", "delta_l_um", default=100.0) if with_delays else None
    if kind == "ev":
        r1 = _get(cp, "circuit", "r_bs1")
        r2 = _get(cp, "circuit", "r_bs2", default=1.0 - r1)
        alpha = _get(cp, "circuit", "absorber_alpha", default=0.0)
        return build_ev_circuit(r1, r2, alpha, delta_l_um=dl)
    if kind == "zeno":
        return build_zeno_circuit(
            _get(cp, "circuit", "n", int),
            absorbers=_get(cp, "circuit", "absorbers", bool, default=False),
            loss_per_stage=_get(cp, "circuit", "loss_per_stage", default=0.0),
            loss_arms=cp.get("circuit", "loss_arms", fallback="both").strip(),
            absorber_alpha=_get(cp, "circuit", "absorber_alpha", default=1.0),
            delta_l_um=dl,
        )
    raise ConfigError(f"unknown circuit kind {kind!r} (expected 'ev' or 'zeno')")


def dispersion_from_config(cp) -> DispersionModel:
    s = "dispersion"
    return DispersionModel.from_group_index(
        n_eff0=_get(cp, s, "n_eff0", default=2.1129),
        n_g=_get(cp, s, "n_g", default=4.7),
        lambda0=_get(cp, s, "lambda0_nm", default=1550.0),
    )


@dataclass(frozen=True)
class SweepSettings:
    lambda_min_nm: float = 1520.0
    lambda_max_nm: float = 1560.0
    step_nm: float = 0.01


def sweep_from_config(cp) -> SweepSettings:
    s = "sweep"
    d = SweepSettings()
    return SweepSettings(
        _get(cp, s, "lambda_min_nm", default=d.lambda_min_nm),
        _get(cp, s, "lambda_max_nm", default=d.lambda_max_nm),
        _get(cp, s, "step_nm", default=d.step_nm),
    )


def experiment_from_config(cp, gates: int | None = None, seed: int | None = None) -> tuple[ExperimentConfig, float]:
    """Experiment settings and the a-ratio uncertainty.

    If ``[circuit] lambda_nm`` is set the arm phases are those at that
    wavelength; otherwise the arms are phase-balanced.
    """
    if cp.has_option("circuit", "lambda_nm"):
        circuit = resolve_delays(circuit_from_config(cp, True), dispersion_from_config(cp), _get(cp, "circuit", "lambda_nm"))
    else:
        circuit = circuit_from_config(cp, False)
    src, det = "source", "detectors"
    cfg = ExperimentConfig(
        circuit=circuit,
        gates=gates if gates is not None else _get(cp, src, "gates", int, default=1_000_000),
        mu=_get(cp, src, "mu", default=0.1),
        tap_ratio=_get(cp, src, "tap_ratio", default=0.5),
        rng_seed=seed if seed is not None else _get(cp, src, "seed", int, default=0),
        a_L=_get(cp, det, "a_l", default=1.0),
        a_U=_get(cp, det, "a_u", default=1.0),
        a_T=_get(cp, det, "a_t", default=1.0),
        dark_count_prob=_get(cp, det, "dark_count_prob", default=0.0),
    )
    return cfg, _get(cp, det, "a_ratio_sigma", default=0.0)
