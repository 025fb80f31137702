"""Clipped-linear surrogate for the Gaussian tail of the outage integrand.

The conditional error probability, viewed as a function of the channel
realization t, is a smooth sigmoid dropping from 1 to 0 around the
threshold theta where capacity meets the coding rate.  Replacing it with a
clipped ramp

    K(t) = 1                      for t <= rho_lo,
    K(t) = 1/2 - slope*(t-theta)  for rho_lo < t < rho_hi,
    K(t) = 0                      for t >= rho_hi,

makes the fading average integrable in closed form against exponential and
sum-of-exponential densities.  Any continuous such ramp satisfies
slope * half_width = 1/2.

Two independent knobs are kept explicit rather than silently resolved:

* convention — how the rate enters the slope parameter mu.  NATS uses
  (e^(2R) - 1)^(-1/2); BITS uses (2^(2R) - 1)^(-1/2), which makes the ramp
  the exact tangent of the true outage curve at theta when R is in bits
  per channel use.  The quadrature oracle arbitrates which tracks the true
  Gaussian-tail average better; neither is silently "fixed".

* ramp slope family — "zeta" uses slope zeta/sqrt(2*pi) with half-width
  sqrt(pi/2)/zeta (the family the closed forms in closed_form.py integrate
  exactly, and the one consistent with the tangent construction in every
  integration domain); "mu" uses slope mu/sqrt(2*pi) with half-width
  sqrt(pi/2)/mu, which is what k_eval evaluates.  The stored breakpoints
  rho_lo/rho_hi are the "mu" family's; the "zeta" breakpoints are derived
  on demand.  The two coincide only when power*sqrt(2*pi) = 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Literal

from .errors import DomainError, NumericError
from .finite_blocklength import SnrValue, _as_snr

SQRT_2PI = math.sqrt(2.0 * math.pi)
SQRT_HALF_PI = math.sqrt(0.5 * math.pi)


class LinConvention(enum.Enum):
    """How the coding rate enters the ramp slope parameter mu."""

    NATS = "nats"  # slope factor (e^(2R) - 1)^(-1/2)
    BITS = "bits"  # slope factor (2^(2R) - 1)^(-1/2); exact tangent for R in bits

    @classmethod
    def parse(cls, name: "str | LinConvention") -> "LinConvention":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise DomainError(
                f"unknown convention {name!r}; expected one of "
                f"{[c.value for c in cls]}"
            ) from None


#: Which coefficient supplies the ramp slope: the power-scaled "zeta" family
#: (default; matches the closed forms) or the plain "mu" family (the k_eval
#: contract, kept for cross-checks).
RampSlope = Literal["zeta", "mu"]

_RAMP_CHOICES = ("zeta", "mu")


@dataclass(frozen=True)
class LinearizationParams:
    """Frozen parameter set of one clipped-linear surrogate.

    theta is the threshold in the integration variable's own units (channel
    gain when power > 1 absorbs the transmit SNR, instantaneous SNR when
    power == 1).  rho_lo/rho_hi are the stored "mu"-family breakpoints,
    theta -/+ sqrt(pi/2)/mu.  zeta = power * sqrt(2*pi) * mu exactly.
    """

    theta: float
    mu: float
    rho_lo: float
    rho_hi: float
    zeta: float
    convention: LinConvention
    n: int
    rate: float
    power: SnrValue

    def __post_init__(self) -> None:
        if not (self.mu > 0.0 and math.isfinite(self.mu)):
            raise DomainError(f"slope parameter mu must be positive and finite, got {self.mu!r}")
        if not (self.rho_lo < self.theta < self.rho_hi):
            raise DomainError(
                f"breakpoints must straddle the threshold: "
                f"{self.rho_lo!r} < {self.theta!r} < {self.rho_hi!r} fails"
            )
        half = SQRT_HALF_PI / self.mu
        scale = max(abs(self.theta), half)
        if abs((self.rho_hi - self.theta) - half) > 1e-12 * scale or abs(
            (self.theta - self.rho_lo) - half
        ) > 1e-12 * scale:
            raise DomainError("breakpoints are not symmetric at sqrt(pi/2)/mu about theta")
        if self.zeta != self.power.value * SQRT_2PI * self.mu:
            raise DomainError("zeta must equal power * sqrt(2*pi) * mu exactly")


def linearize(
    n: int,
    rate: float,
    power: "SnrValue | float",
    convention: "LinConvention | str" = LinConvention.NATS,
) -> LinearizationParams:
    """Build the surrogate's parameter set for one (n, rate, power) point.

    theta = (2^rate - 1)/power; mu carries the convention-dependent rate
    factor and grows like sqrt(n).  Pass power = 1 to work in the
    instantaneous-SNR domain (combined-branch integrals); pass the average
    SNR to work in the unit-mean channel-gain domain (single links).
    """
    convention = LinConvention.parse(convention)
    if n < 1:
        raise DomainError(f"blocklength must be >= 1, got {n!r}")
    if not (rate > 0.0) or not math.isfinite(rate):
        raise DomainError(f"rate must be a positive finite number, got {rate!r}")
    p = _as_snr(power, positive=True)

    theta = (2.0 ** rate - 1.0) / p
    if convention is LinConvention.NATS:
        spread = math.expm1(2.0 * rate)  # e^(2R) - 1
    else:
        spread = math.expm1(2.0 * rate * math.log(2.0))  # 2^(2R) - 1
    mu = math.sqrt(n / (2.0 * math.pi)) / math.sqrt(spread)
    half = SQRT_HALF_PI / mu
    if theta - half == theta or theta + half == theta:
        # the ramp window is narrower than one ulp of the threshold; the
        # surrogate cannot be represented at this scale, which is a numeric
        # breakdown of a well-formed request, not a bad input
        raise NumericError(
            f"ramp window collapsed: half-width {half!r} is absorbed by "
            f"threshold {theta!r} in double precision"
        )
    return LinearizationParams(
        theta=theta,
        mu=mu,
        rho_lo=theta - half,
        rho_hi=theta + half,
        zeta=p * SQRT_2PI * mu,
        convention=convention,
        n=n,
        rate=rate,
        power=SnrValue(p),
    )


def ramp_coefficients(
    params: LinearizationParams, slope: RampSlope = "zeta"
) -> tuple[float, float, float]:
    """Return (slope m, lower breakpoint, upper breakpoint) of the chosen family.

    Both families keep m * half_width = 1/2, so the ramp is continuous and
    hits 1 and 0 exactly at its breakpoints.
    """
    if slope not in _RAMP_CHOICES:
        raise DomainError(f"ramp slope must be one of {_RAMP_CHOICES}, got {slope!r}")
    coeff = params.zeta if slope == "zeta" else params.mu
    m = coeff / SQRT_2PI
    half = SQRT_HALF_PI / coeff
    return m, params.theta - half, params.theta + half


def ramp_eval(t: float, params: LinearizationParams, slope: RampSlope = "zeta") -> float:
    """Evaluate the chosen ramp family at t; always in [0, 1]."""
    m, lo, hi = ramp_coefficients(params, slope)
    if t <= lo:
        return 1.0
    if t >= hi:
        return 0.0
    return 0.5 - m * (t - params.theta)


def k_eval(t: float, params: LinearizationParams) -> float:
    """The surrogate in its defining form: slope mu/sqrt(2*pi), the stored
    breakpoints.  Returns 1 below rho_lo, 0 above rho_hi, and the linear
    segment 1/2 - (mu/sqrt(2*pi))*(t - theta) between them."""
    return ramp_eval(t, params, "mu")
