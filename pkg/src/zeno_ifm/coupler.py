"""Directional-coupler design from supermode effective-index tables.

The table maps waveguide gap (nm) to the symmetric and antisymmetric supermode
indices at one wavelength. Coupling length follows from the index splitting,
and reflectivity (power staying in the input waveguide) from the ratio of the
effective interaction length to that coupling length.
"""

from __future__ import annotations

import csv
import io
import os
import re
from dataclasses import asdict, dataclass
from importlib import resources
from typing import TextIO, Union

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import bisect


class TableError(ValueError):
    pass


class UnreachableTarget(ValueError):
    pass


_LAMBDA_RE = re.compile(r"^#\s*lambda_nm\s*=\s*([0-9.eE+-]+)")


@dataclass(frozen=True)
class CouplerIndexTable:
    gap_nm: np.ndarray
    n_s: np.ndarray
    n_a: np.ndarray
    lambda_nm: float

    def __post_init__(self):
        gap, ns, na = (np.asarray(a, dtype=float) for a in (self.gap_nm, self.n_s, self.n_a))
        object.__setattr__(self, "gap_nm", gap)
        object.__setattr__(self, "n_s", ns)
        object.__setattr__(self, "n_a", na)
        if not (gap.shape == ns.shape == na.shape) or gap.ndim != 1:
            raise TableError("gap_nm, n_s and n_a must be 1-D arrays of equal length")
        if gap.size < 2:
            raise TableError("index table needs at least 2 samples")
        bad = np.nonzero(np.diff(gap) <= 0)[0]
        if bad.size:
            raise TableError(f"gaps must be strictly increasing (row {bad[0] + 2})")
        bad = np.nonzero(~((ns > na) & (na > 1.0)))[0]
        if bad.size:
            raise TableError(f"need n_s > n_a > 1 (row {bad[0] + 1})")
        if not self.lambda_nm > 0:
            raise TableError("lambda_nm must be positive")
        object.__setattr__(self, "_interp_s", PchipInterpolator(gap, ns, extrapolate=False))
        object.__setattr__(self, "_interp_a", PchipInterpolator(gap, na, extrapolate=False))

    @property
    def gap_range(self) -> tuple[float, float]:
        return float(self.gap_nm[0]), float(self.gap_nm[-1])

    def indices(self, gap_nm: float) -> tuple[float, float]:
        lo, hi = self.gap_range
        if not lo <= gap_nm <= hi:
            raise ValueError(f"gap {gap_nm} nm outside table range [{lo}, {hi}] nm")
        return float(self._interp_s(gap_nm)), float(self._interp_a(gap_nm))


def _parse(fh: TextIO, lambda_nm: float | None) -> CouplerIndexTable:
    rows = []
    header = None
    for lineno, line in enumerate(fh, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            m = _LAMBDA_RE.match(stripped)
            if m and lambda_nm is None:
                lambda_nm = float(m.group(1))
            continue
        fields = next(csv.reader([stripped]))
        if header is None:
            header = [f.strip() for f in fields]
            missing = {"gap_nm", "n_s", "n_a"} - set(header)
            if missing:
                raise TableError(f"line {lineno}: missing column(s) {sorted(missing)}")
            cols = [header.index(c) for c in ("gap_nm", "n_s", "n_a")]
            continue
        try:
            rows.append([float(fields[c]) for c in cols])
        except (ValueError, IndexError) as exc:
            raise TableError(f"line {lineno}: cannot parse row {stripped!r}") from exc
    if header is None:
        raise TableError("no header line found")
    if lambda_nm is None:
        raise TableError("wavelength missing: add a '# lambda_nm=...' line or pass lambda_nm")
    if not rows:
        raise TableError("table has no data rows")
    arr = np.array(rows)
    return CouplerIndexTable(arr[:, 0], arr[:, 1], arr[:, 2], lambda_nm)


def load_index_table(source: Union[str, os.PathLike, TextIO], lambda_nm: float | None = None) -> CouplerIndexTable:
    """Read a ``gap_nm,n_s,n_a`` CSV.

    The wavelength comes from a ``# lambda_nm=...`` comment line unless given
    explicitly. Row numbers in error messages count data rows from 1.
    """
    if hasattr(source, "read"):
        return _parse(source, lambda_nm)
    with open(source, newline="") as fh:
        return _parse(fh, lambda_nm)


def synthetic_index_table() -> CouplerIndexTable:
    """The bundled synthetic 400 nm x 220 nm silicon-wire table (not solver output)."""
    text = resources.files("zeno_ifm.data").joinpath("synthetic_index_table.csv").read_text()
    return load_index_table(io.StringIO(text))


def coupling_length(table: CouplerIndexTable, gap_nm: float) -> float:
    """Full-transfer length ``lam / (2 |n_s - n_a|)`` in micrometres."""
    n_s, n_a = table.indices(gap_nm)
    return table.lambda_nm / (2.0 * abs(n_s - n_a)) * 1e-3


def coupler_rt(l_c_um: float, length_um: float, bend_correction_um: float = 0.0) -> tuple[float, float]:
    if not l_c_um > 0:
        raise ValueError(f"coupling length must be positive, got {l_c_um!r}")
    l_eff = length_um + bend_correction_um
    r = float(np.cos(np.pi * l_eff / (2.0 * l_c_um)) ** 2)
    return r, 1.0 - r


@dataclass(frozen=True)
class CouplerDesign:
    gap_nm: float
    length_um: float
    bend_correction_um: float
    l_c_um: float
    R: float
    T: float

    def to_dict(self) -> dict:
        return asdict(self)


def design_at_gap(table: CouplerIndexTable, gap_nm: float, length_um: float, bend_correction_um: float = 0.0) -> CouplerDesign:
    l_c = coupling_length(table, gap_nm)
    r, t = coupler_rt(l_c, length_um, bend_correction_um)
    return CouplerDesign(float(gap_nm), length_um, bend_correction_um, l_c, r, t)


def _first_lobe_start(table: CouplerIndexTable, l_eff: float) -> float:
    """Smallest gap whose coupling length is at least ``l_eff``."""
    lo, hi = table.gap_range
    if coupling_length(table, lo) >= l_eff:
        return lo
    if coupling_length(table, hi) < l_eff:
        raise UnreachableTarget(
            f"effective length {l_eff} um exceeds the coupling length at every tabulated gap; "
            "no first-lobe design exists"
        )
    return bisect(lambda g: coupling_length(table, g) - l_eff, lo, hi, xtol=1e-12)


def solve_gap_for_reflectivity(
    table: CouplerIndexTable, target_r: float, length_um: float, bend_correction_um: float = 0.0
) -> float:
    """Gap (nm) giving reflectivity ``target_r`` on the first coupling lobe.

    Along the first lobe (effective length below the coupling length) R rises
    monotonically with gap, so the inversion is a bisection.
    """
    if not 0.0 < target_r < 1.0:
        raise ValueError(f"target reflectivity must lie in (0, 1), got {target_r!r}")
    l_eff = length_um + bend_correction_um
    g_lo = _first_lobe_start(table, l_eff)
    g_hi = table.gap_range[1]

    def r_at(g):
        return coupler_rt(coupling_length(table, g), length_um, bend_correction_um)[0]

    r_lo, r_hi = r_at(g_lo), r_at(g_hi)
    if abs(target_r - r_lo) <= 1e-12:
        return g_lo
    if abs(target_r - r_hi) <= 1e-12:
        return g_hi
    if not r_lo < target_r < r_hi:
        raise UnreachableTarget(
            f"target R={target_r} unreachable; achievable R in [{r_lo:.6g}, {r_hi:.6g}] "
            f"for gaps [{g_lo:.6g}, {g_hi:.6g}] nm"
        )
    return float(bisect(lambda g: r_at(g) - target_r, g_lo, g_hi, xtol=1e-10, maxiter=200))
