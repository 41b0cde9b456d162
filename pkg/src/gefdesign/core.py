"""Exact evaluation of generalized-exponent bandpass filters.

The filter class is a conjugate pole pair raised to a positive real
exponent,

    P(beta) = C * ((s - p)(s - conj(p)))**(-b_u),   s = i*beta,
    p = -a_p + i*b_p,

together with two relatives: the one-sided "sharp" form (s - p)**(-b_u)
and the single-zero variant V(beta) = (s + a_p) * P(beta) / C.  Everything
is expressed in normalized frequency beta = omega / omega_peak, beta >= 0.

Magnitude in dB and phase in radians come from closed forms built on the
per-pole logarithms, so they stay finite and continuous for exponents where
the linear magnitude would overflow.  Because the real part of both pole
factors is a_p > 0, the per-factor arctangent angle is already continuous
in beta and no branch unwrapping is needed, even for non-integer b_u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .errors import NonPositiveConstant, ZeroOrderTooLarge

# dB per unit natural log of magnitude: level = (20/ln 10) * ln|H|
DB_PER_LOG = 20.0 / math.log(10.0)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class FilterConstants:
    """Pole geometry and exponent of a generalized-exponent filter.

    Attributes
    ----------
    a_p : float
        Magnitude of the pole pair's real part (> 0).
    b_p : float
        Pole imaginary part, i.e. the normalized peak location (> 0).
    b_u : float
        Exponent applied to the second-order base (> 0, real; integer
        values admit a cascaded digital realization).
    gain : float
        Linear gain constant C (> 0), 1 by default.
    """

    a_p: float
    b_p: float
    b_u: float
    gain: float = 1.0

    def __post_init__(self):
        for name in ("a_p", "b_p", "b_u", "gain"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value <= 0.0:
                raise NonPositiveConstant(
                    f"{name} must be finite and > 0, got {value!r}"
                )
            object.__setattr__(self, name, value)

    @property
    def pole(self) -> complex:
        return complex(-self.a_p, self.b_p)

    @property
    def pole_conjugate(self) -> complex:
        return complex(-self.a_p, -self.b_p)

    @property
    def is_integer_exponent(self) -> bool:
        return abs(self.b_u - round(self.b_u)) <= 1e-12

    def with_gain(self, gain: float) -> "FilterConstants":
        return replace(self, gain=gain)

    def as_dict(self) -> dict:
        return {"a_p": self.a_p, "b_p": self.b_p, "b_u": self.b_u, "gain": self.gain}

    @classmethod
    def from_dict(cls, data) -> "FilterConstants":
        return cls(
            a_p=float(data["a_p"]),
            b_p=float(data["b_p"]),
            b_u=float(data["b_u"]),
            gain=float(data.get("gain", 1.0)),
        )


@dataclass(frozen=True)
class SharpnessReport:
    """Whether the one-sided approximation of the filter is trustworthy.

    alpha_at_peak is a_p / (2*b_p); the approximation drops the conjugate
    pole factor, which is legitimate when that ratio is small.  The
    practical cutoff is a_p < 0.2 * b_p (exclusive).
    """

    a_p: float
    alpha_at_peak: float
    satisfied: bool


def _as_beta_array(beta):
    return np.asarray(beta, dtype=float)


def _maybe_scalar(values):
    arr = np.asarray(values)
    if arr.ndim == 0:
        return arr[()].item()
    return values


def _log_pole_factors(theta: FilterConstants, beta):
    """Complex logs of (s - p) and (s - conj(p)) at s = i*beta.

    Both factors have real part a_p > 0, so arctan(imag/real) is the
    continuous angle for any real beta; exponentiating -b_u times the sum
    therefore evaluates the complex power without branch jumps.
    """
    beta = _as_beta_array(beta)
    a = theta.a_p
    u = beta - theta.b_p
    v = beta + theta.b_p
    log_p = 0.5 * np.log(a * a + u * u) + 1j * np.arctan(u / a)
    log_c = 0.5 * np.log(a * a + v * v) + 1j * np.arctan(v / a)
    return log_p, log_c


def eval_gef(theta: FilterConstants, beta):
    """Evaluate C * ((s - p)(s - conj(p)))**(-b_u) at s = i*beta.

    Accepts a scalar or an array of normalized frequencies and returns
    complex values of matching shape.
    """
    log_p, log_c = _log_pole_factors(theta, beta)
    return _maybe_scalar(theta.gain * np.exp(-theta.b_u * (log_p + log_c)))


def eval_sharp(theta: FilterConstants, beta):
    """Evaluate the one-sided form (s - p)**(-b_u) at s = i*beta.

    The magnitude is exactly symmetric about b_p; the form is not
    realizable but underpins every closed-form characteristic.
    """
    log_p, _ = _log_pole_factors(theta, beta)
    return _maybe_scalar(np.exp(-theta.b_u * log_p))


def eval_v(theta: FilterConstants, beta):
    """Evaluate the single-zero variant (s + a_p) * ((s-p)(s-conj(p)))**(-b_u).

    The proportionality constant is taken as 1.
    """
    beta = _as_beta_array(beta)
    log_p, log_c = _log_pole_factors(theta, beta)
    return _maybe_scalar((theta.a_p + 1j * beta) * np.exp(-theta.b_u * (log_p + log_c)))


def eval_zero_variant(theta: FilterConstants, c: int, beta):
    """Evaluate s**c * ((s - p)(s - conj(p)))**(-b_u) with an origin zero of
    integer order c, 0 <= c < b_u.  Proportionality constant 1.
    """
    if int(c) != c or c < 0:
        raise ValueError(f"zero order must be a non-negative integer, got {c!r}")
    c = int(c)
    if c >= theta.b_u:
        raise ZeroOrderTooLarge(f"zero order {c} must be < b_u = {theta.b_u:g}")
    beta = _as_beta_array(beta)
    log_p, log_c = _log_pole_factors(theta, beta)
    return _maybe_scalar((1j * beta) ** c * np.exp(-theta.b_u * (log_p + log_c)))


def wavenumber(theta: FilterConstants, beta):
    """The log-derivative variable k(beta) = i * d log(P) / d beta.

    Evaluates b_u * (1/(s-p) + 1/(s-conj(p))), identical to the single-term
    form 2*b_u*(s + a_p)/((s-p)(s-conj(p))).  Its real part is the phase
    slope (negated) and its imaginary part the log-magnitude slope.
    """
    beta = _as_beta_array(beta)
    s = 1j * beta
    out = theta.b_u * (1.0 / (s - theta.pole) + 1.0 / (s - theta.pole_conjugate))
    return _maybe_scalar(out)


def level_db(theta: FilterConstants, beta):
    """Magnitude of the filter in dB from the two-log closed form.

    level = -(10 b_u / ln 10) * [ln(a^2 + (beta-b)^2) + ln(a^2 + (beta+b)^2)]
            + 20 log10(C)

    Numerically safe for large b_u where |P| itself overflows.
    """
    beta = _as_beta_array(beta)
    a2 = theta.a_p * theta.a_p
    u = beta - theta.b_p
    v = beta + theta.b_p
    out = -0.5 * DB_PER_LOG * theta.b_u * (np.log(a2 + u * u) + np.log(a2 + v * v))
    out = out + DB_PER_LOG * math.log(theta.gain)
    return _maybe_scalar(out)


def phase_rad(theta: FilterConstants, beta):
    """Continuous phase in radians from the two-arctangent closed form.

    phase = -b_u * [atan((beta-b)/a) + atan((beta+b)/a)]

    The terms cancel at beta = 0 and the total tends to -b_u*pi as
    beta -> infinity, i.e. the accumulated phase is b_u/2 cycles.
    """
    beta = _as_beta_array(beta)
    a = theta.a_p
    out = -theta.b_u * (
        np.arctan((beta - theta.b_p) / a) + np.arctan((beta + theta.b_p) / a)
    )
    return _maybe_scalar(out)


def group_delay_cycles(theta: FilterConstants, beta):
    """Group delay in cycles per unit beta: Re{k(beta)} / (2*pi)."""
    return _maybe_scalar(np.real(wavenumber(theta, beta)) / TWO_PI)


def sharpness_check(theta: FilterConstants) -> SharpnessReport:
    """Report whether the one-sided approximation condition holds.

    The threshold is exclusive: satisfied iff a_p < 0.2 * b_p.
    """
    return SharpnessReport(
        a_p=theta.a_p,
        alpha_at_peak=theta.a_p / (2.0 * theta.b_p),
        satisfied=theta.a_p < 0.2 * theta.b_p,
    )


def peak_beta(theta: FilterConstants) -> float:
    """Normalized frequency of the exact magnitude maximum of the filter.

    The peak sits slightly below b_p (by about a_p**2 / (2 b_p)) because of
    the conjugate pole factor; it is the zero crossing of the magnitude
    slope Im{k}, found by bracketed root finding.  Degenerate constants
    whose magnitude decreases from beta = 0 (no bandpass peak) return 0.
    """
    b = theta.b_p

    def slope(beta):
        return wavenumber(theta, beta).imag

    # slope(b) < 0 always; search a lower bracket edge with positive slope
    for lo in (b - theta.a_p, 0.5 * b, 1e-3 * b):
        if lo > 0.0 and slope(lo) > 0.0:
            return float(brentq(slope, lo, b, xtol=1e-15 * max(1.0, b), maxiter=200))
    return 0.0


def normalized_to_peak(theta: FilterConstants) -> FilterConstants:
    """Return constants with gain set so the exact peak magnitude is 1."""
    peak_mag = abs(eval_gef(theta, peak_beta(theta)))
    return theta.with_gain(theta.gain / peak_mag)
