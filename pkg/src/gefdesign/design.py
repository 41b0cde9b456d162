"""Inverse maps: filter constants from a named trio of desired characteristics.

Every mode fixes b_p = beta_peak and derives (a_p, b_u) from the remaining
two characteristics.  Five modes are pure closed forms; the delay+Q modes
solve a one-dimensional implicit equation by bracketed root finding.  All
positive specifications land the pole pair strictly in the left half-plane,
so the designs are inherently stable.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.optimize import brentq

from .core import DB_PER_LOG, TWO_PI, FilterConstants, sharpness_check
from .characteristics import QERB_FIT_A, QERB_FIT_B
from .errors import BracketFailure, ErbRequiresBu, InfeasibleSpec

LN10 = math.log(10.0)


class DesignRow(enum.Enum):
    """Supported characteristic trios; values are the wire codes."""

    PEAK_DELAY_PHASE = "II.1"
    PEAK_DELAY_QERB = "II.2"
    PEAK_QERB_PHASE = "II.3"
    PEAK_QN_PHASE = "II.4"
    PEAK_CONVEXITY_DELAY = "II.5"
    PEAK_CONVEXITY_PHASE = "II.6"
    PEAK_QN_DELAY = "II.7"

    @classmethod
    def from_code(cls, code: str) -> "DesignRow":
        for row in cls:
            if row.value == code:
                return row
        raise ValueError(f"unknown design row code {code!r}")


ROW_VALUE_KEYS = {
    DesignRow.PEAK_DELAY_PHASE: frozenset({"n_cycles", "phi_accum"}),
    DesignRow.PEAK_DELAY_QERB: frozenset({"n_cycles", "q_erb"}),
    DesignRow.PEAK_QERB_PHASE: frozenset({"q_erb", "phi_accum"}),
    DesignRow.PEAK_QN_PHASE: frozenset({"q_n", "phi_accum"}),
    DesignRow.PEAK_CONVEXITY_DELAY: frozenset({"s_beta", "n_cycles"}),
    DesignRow.PEAK_CONVEXITY_PHASE: frozenset({"s_beta", "phi_accum"}),
    DesignRow.PEAK_QN_DELAY: frozenset({"q_n", "n_cycles"}),
}

ROWS_WITH_LEVEL = {DesignRow.PEAK_QN_PHASE, DesignRow.PEAK_QN_DELAY}

# only the delay+Q_erb trio has a printed approximate inverse
ROWS_WITH_MODE = {DesignRow.PEAK_DELAY_QERB}


class SharpnessWarning(UserWarning):
    """Designed constants violate the sharp-approximation condition."""


@dataclass(frozen=True)
class SolverConfig:
    """Bracket and tolerances for the implicit b_u solves."""

    b_u_min: float = 1.0
    b_u_max: float = 64.0
    rel_tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        if not (0.0 < self.b_u_min < self.b_u_max):
            raise ValueError("need 0 < b_u_min < b_u_max")
        if self.rel_tol <= 0.0:
            raise ValueError("rel_tol must be > 0")


DEFAULT_SOLVER = SolverConfig()


@dataclass(frozen=True)
class CharacteristicSpec:
    """A design request: which trio, and the desired values.

    values holds exactly the two non-peak characteristics of the chosen
    row, keyed by n_cycles / phi_accum / q_erb / q_n / s_beta.  n_level is
    the dB level for Q_n rows.  mode selects the exact implicit solve or
    the printed power-law approximation (delay+Q_erb row only).
    """

    row: DesignRow
    beta_peak: float
    values: Mapping[str, float]
    n_level: float | None = None
    mode: str = "exact"

    def __post_init__(self):
        object.__setattr__(self, "values", dict(self.values))
        if not (math.isfinite(self.beta_peak) and self.beta_peak > 0.0):
            raise InfeasibleSpec(f"beta_peak must be > 0, got {self.beta_peak!r}")
        required = ROW_VALUE_KEYS[self.row]
        if set(self.values) != set(required):
            raise InfeasibleSpec(
                f"row {self.row.value} needs exactly {sorted(required)}, "
                f"got {sorted(self.values)}"
            )
        for key, value in self.values.items():
            if not (math.isfinite(value) and value > 0.0):
                raise InfeasibleSpec(f"{key} must be > 0, got {value!r}")
        if self.row in ROWS_WITH_LEVEL:
            if self.n_level is None or self.n_level <= 0.0:
                raise InfeasibleSpec(
                    f"row {self.row.value} needs a positive n_level in dB"
                )
        elif self.n_level is not None:
            raise InfeasibleSpec(f"row {self.row.value} takes no n_level")
        if self.mode not in ("exact", "approx"):
            raise InfeasibleSpec(f"mode must be 'exact' or 'approx', got {self.mode!r}")
        if self.mode == "approx" and self.row not in ROWS_WITH_MODE:
            raise InfeasibleSpec(
                f"row {self.row.value} has no printed approximation; use mode='exact'"
            )

    def as_dict(self) -> dict:
        out = {"row": self.row.value, "beta_peak": self.beta_peak}
        out.update(self.values)
        if self.n_level is not None:
            out["n_level"] = self.n_level
        if self.row in ROWS_WITH_MODE:
            out["mode"] = self.mode
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "CharacteristicSpec":
        data = dict(data)
        row = DesignRow.from_code(str(data.pop("row")))
        beta_peak = float(data.pop("beta_peak"))
        n_level = data.pop("n_level", None)
        mode = str(data.pop("mode", "exact"))
        values = {key: float(value) for key, value in data.items()}
        return cls(
            row=row,
            beta_peak=beta_peak,
            values=values,
            n_level=None if n_level is None else float(n_level),
            mode=mode,
        )


def _gamma_ratio(b_u: float) -> float:
    """Gamma(b_u) / Gamma(b_u - 1/2) via log-gamma."""
    return math.exp(math.lgamma(b_u) - math.lgamma(b_u - 0.5))


def qerb_over_delay(b_u: float) -> float:
    """Q_erb / (beta_peak * N) as a function of b_u alone.

    With a_p tied to N, 2 sqrt(pi) Gamma(b_u) / (b_u Gamma(b_u - 1/2)).
    Decreasing for b_u beyond ~1.4 and ~ 2 sqrt(pi/b_u) asymptotically.
    """
    return 2.0 * math.sqrt(math.pi) * _gamma_ratio(b_u) / b_u


def qn_over_delay(b_u: float, n_level: float) -> float:
    """Q_n / (beta_peak * N) as a function of b_u alone:
    (pi / b_u) * (10**(n/(10 b_u)) - 1)**(-1/2)."""
    return math.pi / (b_u * math.sqrt(10.0 ** (n_level / (10.0 * b_u)) - 1.0))


def qerb_delay_approx_exponent(ratio: float) -> float:
    """Printed power-law inverse: b_u ~ e**(b/a) * ratio**(-1/a)."""
    return math.exp(QERB_FIT_B / QERB_FIT_A) * ratio ** (-1.0 / QERB_FIT_A)


def _solve_decreasing(fn, target: float, cfg: SolverConfig, seed: float | None = None):
    """Solve fn(b_u) == target on the decreasing branch of a rise-then-fall
    residual, returning the largest root inside the bracket.

    A seed (e.g. the power-law estimate) is tried first as a local bracket;
    otherwise the bracket is scanned geometrically from the residual's
    maximum outward.  Raises BracketFailure when the target is above the
    branch maximum or below fn(b_u_max).
    """
    lo, hi = cfg.b_u_min, cfg.b_u_max
    rtol = max(cfg.rel_tol, 4.0 * np.finfo(float).eps)

    def residual(x):
        return fn(x) - target

    if seed is not None and math.isfinite(seed):
        a = max(lo, 0.5 * seed)
        b = min(hi, 2.0 * seed)
        if a < b:
            fa, fb = residual(a), residual(b)
            if fa == 0.0:
                return a
            if fb == 0.0:
                return b
            if (fa > 0.0) != (fb > 0.0):
                return float(
                    brentq(residual, a, b, rtol=rtol, maxiter=cfg.max_iter)
                )

    grid = np.geomspace(lo, hi, 257)
    vals = np.array([fn(x) for x in grid])
    i_max = int(np.argmax(vals))
    if vals[i_max] < target:
        raise BracketFailure(
            f"target {target:g} exceeds the achievable maximum "
            f"{vals[i_max]:g} on [{lo:g}, {hi:g}]"
        )
    for j in range(i_max, grid.size - 1):
        f_a, f_b = vals[j] - target, vals[j + 1] - target
        if f_a == 0.0:
            return float(grid[j])
        if f_b == 0.0:
            return float(grid[j + 1])
        if (f_a > 0.0) != (f_b > 0.0):
            return float(
                brentq(residual, grid[j], grid[j + 1], rtol=rtol, maxiter=cfg.max_iter)
            )
    raise BracketFailure(
        f"target {target:g} below fn(b_u_max) = {vals[-1]:g}; "
        f"no root on [{lo:g}, {hi:g}]"
    )


def _achieved_value(theta: FilterConstants, key: str, n_level: float | None) -> float:
    if key == "n_cycles":
        return theta.b_u / (TWO_PI * theta.a_p)
    if key == "phi_accum":
        return 0.5 * theta.b_u
    if key == "q_erb":
        return theta.b_p * _gamma_ratio(theta.b_u) / (math.sqrt(math.pi) * theta.a_p)
    if key == "q_n":
        half = theta.a_p * math.sqrt(10.0 ** (n_level / (10.0 * theta.b_u)) - 1.0)
        return theta.b_p / (2.0 * half)
    if key == "s_beta":
        return DB_PER_LOG * theta.b_u / (theta.a_p * theta.a_p)
    raise KeyError(key)


def _snap_exponent(
    row: DesignRow, spec: CharacteristicSpec, b_u: float
) -> tuple[float, float]:
    """Round b_u to the nearest integer and re-derive a_p from the row's
    delay equation when available (else its bandwidth/convexity equation),
    preserving the most critical characteristic."""
    b_snap = max(1.0, float(round(b_u)))
    v = spec.values
    b = spec.beta_peak
    if "n_cycles" in v:
        a_p = b_snap / (TWO_PI * v["n_cycles"])
    elif row is DesignRow.PEAK_QERB_PHASE:
        a_p = b / (math.sqrt(math.pi) * v["q_erb"]) * _gamma_ratio(b_snap)
    elif row is DesignRow.PEAK_QN_PHASE:
        a_p = b / (
            2.0 * v["q_n"] * math.sqrt(10.0 ** (spec.n_level / (10.0 * b_snap)) - 1.0)
        )
    else:  # convexity + phase
        a_p = math.sqrt(DB_PER_LOG * b_snap / v["s_beta"])
    return a_p, b_snap


def design(
    spec: CharacteristicSpec,
    cfg: SolverConfig = DEFAULT_SOLVER,
    integer_snap: bool = False,
) -> FilterConstants:
    """Construct filter constants realizing the specified trio.

    b_p = beta_peak always.  The closed-form rows recover their trio to
    machine precision; the implicit rows (delay + Q_erb exact, delay + Q_n)
    solve a monotone residual by bracketed bisection refined with secant
    steps and reproduce the trio to the solver tolerance.  mode='approx'
    applies the printed power-law exponent instead of the exact solve.

    integer_snap rounds b_u to the nearest integer afterwards, re-deriving
    a_p to preserve the delay (or, failing that, the bandwidth) value.

    Emits SharpnessWarning when the result violates a_p < 0.2 * b_p.
    """
    v = spec.values
    b = spec.beta_peak
    row = spec.row

    if row is DesignRow.PEAK_DELAY_PHASE:
        a_p = v["phi_accum"] / (math.pi * v["n_cycles"])
        b_u = 2.0 * v["phi_accum"]
    elif row is DesignRow.PEAK_QERB_PHASE:
        b_u = 2.0 * v["phi_accum"]
        if b_u <= 0.5:
            raise ErbRequiresBu(
                f"phi_accum = {v['phi_accum']:g} gives b_u = {b_u:g} <= 1/2"
            )
        a_p = b * _gamma_ratio(b_u) / (math.sqrt(math.pi) * v["q_erb"])
    elif row is DesignRow.PEAK_QN_PHASE:
        b_u = 2.0 * v["phi_accum"]
        a_p = b / (
            2.0
            * v["q_n"]
            * math.sqrt(10.0 ** (spec.n_level / (20.0 * v["phi_accum"])) - 1.0)
        )
    elif row is DesignRow.PEAK_CONVEXITY_DELAY:
        a_p = (40.0 * math.pi / LN10) * v["n_cycles"] / v["s_beta"]
        b_u = (80.0 * math.pi**2 / LN10) * v["n_cycles"] ** 2 / v["s_beta"]
    elif row is DesignRow.PEAK_CONVEXITY_PHASE:
        b_u = 2.0 * v["phi_accum"]
        # inverting S = (20/ln10) b_u / a_p**2 with b_u = 2 phi_accum
        a_p = math.sqrt((40.0 / LN10) * v["phi_accum"] / v["s_beta"])
    elif row is DesignRow.PEAK_DELAY_QERB:
        ratio = v["q_erb"] / (b * v["n_cycles"])
        seed = qerb_delay_approx_exponent(ratio)
        if spec.mode == "approx":
            b_u = seed
        else:
            b_u = _solve_decreasing(qerb_over_delay, ratio, cfg, seed=seed)
        a_p = b_u / (TWO_PI * v["n_cycles"])
    elif row is DesignRow.PEAK_QN_DELAY:
        ratio = v["q_n"] / (b * v["n_cycles"])
        b_u = _solve_decreasing(
            lambda x: qn_over_delay(x, spec.n_level), ratio, cfg
        )
        a_p = b_u / (TWO_PI * v["n_cycles"])
    else:  # pragma: no cover - enum is exhaustive
        raise InfeasibleSpec(f"unhandled row {row!r}")

    if not (math.isfinite(a_p) and a_p > 0.0 and math.isfinite(b_u) and b_u > 0.0):
        raise InfeasibleSpec(
            f"row {row.value} produced a_p = {a_p!r}, b_u = {b_u!r}"
        )
    if integer_snap:
        a_p, b_u = _snap_exponent(row, spec, b_u)

    theta = FilterConstants(a_p=a_p, b_p=b, b_u=b_u)

    if not sharpness_check(theta).satisfied:
        warnings.warn(
            f"designed a_p = {a_p:g} is not sharp relative to b_p = {b:g} "
            f"(condition a_p < 0.2 b_p); closed-form characteristics degrade",
            SharpnessWarning,
            stacklevel=2,
        )

    if not integer_snap and spec.mode != "approx":
        tol = 1e-9 if row not in (DesignRow.PEAK_DELAY_QERB, DesignRow.PEAK_QN_DELAY) else 1e-6
        for key, want in v.items():
            got = _achieved_value(theta, key, spec.n_level)
            if abs(got - want) > tol * abs(want):
                raise InfeasibleSpec(
                    f"round-trip check failed for {key}: wanted {want:g}, "
                    f"designed constants give {got:g}"
                )
    return theta


def ap_options_for_delay_qerb(
    spec: CharacteristicSpec, cfg: SolverConfig = DEFAULT_SOLVER
) -> tuple[float, float]:
    """Diagnostic: both printed a_p options for the delay + Q_erb trio.

    Returns (from_delay, from_qerb).  design() always uses the first; under
    the approximate exponent the two disagree, which measures the
    power-law fit error.
    """
    if spec.row is not DesignRow.PEAK_DELAY_QERB:
        raise InfeasibleSpec("a_p options exist only for the delay + Q_erb trio")
    theta = design(spec, cfg)
    from_delay = theta.a_p
    from_qerb = (
        spec.beta_peak
        * _gamma_ratio(theta.b_u)
        / (math.sqrt(math.pi) * spec.values["q_erb"])
    )
    return from_delay, from_qerb


@dataclass(frozen=True)
class QuadraticPower:
    """Base quadratic and exponent: (s**2 + c1*s + c0)**exponent, c2 = 1."""

    c1: float
    c0: float
    exponent: float


def parameterized_tf(
    spec: CharacteristicSpec, cfg: SolverConfig = DEFAULT_SOLVER
) -> QuadraticPower:
    """Transfer function of the designed filter as a quadratic raised to a
    power: c1 = 2 a_p, c0 = beta_peak**2 + a_p**2, exponent = -b_u."""
    theta = design(spec, cfg)
    return QuadraticPower(
        c1=2.0 * theta.a_p,
        c0=theta.b_p * theta.b_p + theta.a_p * theta.a_p,
        exponent=-theta.b_u,
    )
