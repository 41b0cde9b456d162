"""Filterbanks over an exponential frequency-place map, and multiband
filters built by parallel summation of designed single-band filters.

A channel at place x evaluates the shared normalized prototype at
beta = f / CF(x), so a constant-Q bank needs one design for all channels.
Multiband responses are complex sums of per-band responses, each
peak-normalized to 1 before its user gain is applied; that convention makes
the crosstalk matrix have an exactly zero diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import FilterConstants, eval_gef, peak_beta
from .design import CharacteristicSpec, SolverConfig, DEFAULT_SOLVER, design
from .errors import OutOfRange


@dataclass(frozen=True)
class CfMap:
    """Exponential characteristic-frequency map CF(x) = cf0 * e**(-x/l)."""

    cf0: float
    l: float
    x_max: float

    def __post_init__(self):
        if self.cf0 <= 0.0 or self.l <= 0.0 or self.x_max < 0.0:
            raise ValueError("need cf0 > 0, l > 0, x_max >= 0")


def cf_at(cf_map: CfMap, x: float) -> float:
    """Characteristic frequency at place x (Hz)."""
    if not 0.0 <= x <= cf_map.x_max:
        raise OutOfRange(f"x = {x:g} outside [0, {cf_map.x_max:g}]")
    return cf_map.cf0 * math.exp(-x / cf_map.l)


@dataclass(frozen=True)
class BankChannel:
    """One filterbank channel: place, peak frequency, shared constants, gain."""

    x: float
    f_peak: float
    theta: FilterConstants
    gain: float = 1.0


def build_constant_q_bank(
    cf_map: CfMap,
    channel_xs: Sequence[float],
    spec: CharacteristicSpec,
    cfg: SolverConfig = DEFAULT_SOLVER,
    gains: Sequence[float] | None = None,
) -> list[BankChannel]:
    """Design one normalized prototype and place it at each channel.

    The spec must be normalized (beta_peak == 1); the channel peak
    frequencies come from the map, so all channels share the same quality
    factors while bandwidths scale with CF(x).
    """
    if abs(spec.beta_peak - 1.0) > 1e-12:
        raise ValueError("constant-Q banks need a normalized spec (beta_peak = 1)")
    if gains is not None and len(gains) != len(channel_xs):
        raise ValueError("gains must match channel_xs in length")
    theta = design(spec, cfg)
    channels = []
    for i, x in enumerate(channel_xs):
        channels.append(
            BankChannel(
                x=float(x),
                f_peak=cf_at(cf_map, float(x)),
                theta=theta,
                gain=1.0 if gains is None else float(gains[i]),
            )
        )
    return channels


def uniform_places(cf_map: CfMap, n_channels: int) -> np.ndarray:
    """Channel places uniform in x, i.e. log-uniform in CF."""
    if n_channels < 1:
        raise ValueError("need at least one channel")
    if n_channels == 1:
        return np.array([0.0])
    return np.linspace(0.0, cf_map.x_max, n_channels)


def channel_response(channel: BankChannel, f_hz):
    """Channel output for input frequency f (Hz): gain * P(f / f_peak)."""
    beta = np.asarray(f_hz, dtype=float) / channel.f_peak
    return channel.gain * eval_gef(channel.theta, beta)


@dataclass(frozen=True)
class MultibandBand:
    """One band of a multiband filter: peak frequency in Hz, a normalized
    shape spec (beta_peak must be 1), and a linear gain."""

    f_peak_hz: float
    spec: CharacteristicSpec
    gain: float = 1.0

    def __post_init__(self):
        if self.f_peak_hz <= 0.0:
            raise ValueError("f_peak_hz must be > 0")
        if abs(self.spec.beta_peak - 1.0) > 1e-12:
            raise ValueError("band specs must be normalized (beta_peak = 1)")
        if self.gain <= 0.0:
            raise ValueError("gain must be > 0")


@dataclass(frozen=True)
class MultibandSpec:
    """Bands with strictly increasing peak frequencies."""

    bands: tuple

    def __post_init__(self):
        bands = tuple(self.bands)
        object.__setattr__(self, "bands", bands)
        if len(bands) < 1:
            raise ValueError("need at least one band")
        peaks = [band.f_peak_hz for band in bands]
        if any(f2 <= f1 for f1, f2 in zip(peaks, peaks[1:])):
            raise ValueError("band peak frequencies must be strictly increasing")


def _designed_bands(spec: MultibandSpec, cfg: SolverConfig):
    """Per-band (f_peak, theta, normalized gain): each band's own peak
    magnitude is scaled to 1 before the user gain applies."""
    out = []
    for band in spec.bands:
        theta = design(band.spec, cfg)
        norm = 1.0 / abs(eval_gef(theta, peak_beta(theta)))
        out.append((band.f_peak_hz, theta, band.gain * norm))
    return out


def multiband_response(
    spec: MultibandSpec, f_hz, cfg: SolverConfig = DEFAULT_SOLVER
):
    """Complex response at f (Hz): the sum over bands of

        gain_i * P_i(f / f_peak_i) / peak_magnitude_i
    """
    f = np.asarray(f_hz, dtype=float)
    total = np.zeros(f.shape, dtype=complex)
    for f_peak, theta, gain in _designed_bands(spec, cfg):
        total = total + gain * np.asarray(eval_gef(theta, f / f_peak))
    if total.ndim == 0:
        return complex(total[()])
    return total


def crosstalk_report(
    spec: MultibandSpec, cfg: SolverConfig = DEFAULT_SOLVER
) -> np.ndarray:
    """Matrix of dB levels: entry (i, j) is band j's level at band i's peak
    frequency, relative to band i's own peak level.  Diagonal is 0 dB by
    the peak-normalization convention."""
    if len(spec.bands) < 2:
        raise ValueError("crosstalk needs at least two bands")
    designed = _designed_bands(spec, cfg)

    def band_level(j, f_hz):
        f_peak_j, theta_j, gain_j = designed[j]
        return 20.0 * math.log10(gain_j * abs(eval_gef(theta_j, f_hz / f_peak_j)))

    # true per-band peak frequency: the prototype peaks slightly below beta = 1
    peak_freqs = [f_peak * peak_beta(theta) for f_peak, theta, _ in designed]
    n = len(designed)
    out = np.empty((n, n))
    for i in range(n):
        own_level = band_level(i, peak_freqs[i])
        for j in range(n):
            out[i, j] = band_level(j, peak_freqs[i]) - own_level
    return out


def bank_to_dict(cf_map: CfMap, channels: Sequence[BankChannel]) -> dict:
    return {
        "cf_map": {"cf0": cf_map.cf0, "l": cf_map.l, "x_max": cf_map.x_max},
        "channels": [
            {
                "x": ch.x,
                "f_peak_hz": ch.f_peak,
                "theta": ch.theta.as_dict(),
                "gain": ch.gain,
            }
            for ch in channels
        ],
    }


def bank_from_dict(data: dict) -> tuple[CfMap, list[BankChannel]]:
    m = data["cf_map"]
    cf_map = CfMap(cf0=float(m["cf0"]), l=float(m["l"]), x_max=float(m["x_max"]))
    channels = [
        BankChannel(
            x=float(ch["x"]),
            f_peak=float(ch["f_peak_hz"]),
            theta=FilterConstants.from_dict(ch["theta"]),
            gain=float(ch.get("gain", 1.0)),
        )
        for ch in data["channels"]
    ]
    return cf_map, channels


def multiband_to_dict(spec: MultibandSpec) -> dict:
    return {
        "bands": [
            {"f_peak_hz": band.f_peak_hz, "gain": band.gain, "spec": band.spec.as_dict()}
            for band in spec.bands
        ]
    }


def multiband_from_dict(data: dict) -> MultibandSpec:
    bands = tuple(
        MultibandBand(
            f_peak_hz=float(entry["f_peak_hz"]),
            spec=CharacteristicSpec.from_dict(entry["spec"]),
            gain=float(entry.get("gain", 1.0)),
        )
        for entry in data["bands"]
    )
    return MultibandSpec(bands=bands)


def bank_response_rows(
    channels: Sequence[BankChannel], freqs_hz: Sequence[float]
) -> list[tuple]:
    """Rows (f_hz, re, im, level_db, phase_rad, channel_id) for CSV export.

    Phase is unwrapped along frequency within each channel.
    """
    rows = []
    freqs = np.asarray(freqs_hz, dtype=float)
    for idx, channel in enumerate(channels):
        values = np.asarray(channel_response(channel, freqs))
        levels = 20.0 * np.log10(np.abs(values))
        phases = np.unwrap(np.angle(values))
        for f, v, lvl, ph in zip(freqs, values, levels, phases):
            rows.append((float(f), float(v.real), float(v.imag), float(lvl), float(ph), idx))
    return rows
