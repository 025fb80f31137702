"""Closed-form fading-averaged outage probabilities.

Both results here are exact integrals of the clipped-linear surrogate from
the linearization module — not of the true Gaussian tail — so each one is
testable to near machine precision against direct quadrature of that ramp
(see oracles.linearized_outage_quadrature). Agreement with the true-tail
average is a separate, measured question (the convention report).

* rayleigh_outage: a single link whose channel gain is unit-mean
  exponential (Rayleigh envelope), transmit SNR absorbed into theta.
* mrc_pair_outage: the sum of two independent exponential SNRs (the
  combined two-branch receiver), whose density is hypoexponential.

Default ramp family is "zeta" — the one the single-link form integrates —
so the two functions are mutually consistent; the "mu" family is kept
behind a flag for cross-checking only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError, NumericError
from .finite_blocklength import SnrValue, _as_snr
from .linearization import LinConvention, RampSlope, linearize, ramp_coefficients

#: Relative tolerance under which two branch means are treated as equal.
TIE_TOLERANCE = 1e-9

#: Relative window in which the difference branch is rerouted to the
#: equal-means branch: it divides by (omega_z - omega_y) and loses all
#: precision near equality, while the underlying integral is continuous.
CANCELLATION_GUARD = 1e-6

#: Probabilities may leave [0, 1] by at most this much before it is treated
#: as a formula/parameter bug rather than round-off.
ROUNDOFF_SLACK = 1e-12


@dataclass(frozen=True)
class HypoexpParams:
    """Means of two independent exponential summands (average branch SNRs).

    equal_means is derived, not chosen: true iff the means agree within
    TIE_TOLERANCE relative.  It selects the density branch; the outage
    evaluation additionally reroutes near-ties within CANCELLATION_GUARD.
    """

    omega_z: float
    omega_y: float
    equal_means: bool = field(init=False, compare=False)

    def __post_init__(self) -> None:
        for name in ("omega_z", "omega_y"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be a positive finite mean, got {v!r}")
            object.__setattr__(self, name, float(v))
        tie = abs(self.omega_z - self.omega_y) <= TIE_TOLERANCE * max(
            self.omega_z, self.omega_y
        )
        object.__setattr__(self, "equal_means", tie)


def hypoexp_pdf(w: float, params: HypoexpParams) -> float:
    """Density of the sum of the two exponentials at w >= 0."""
    if w < 0.0 or not math.isfinite(w):
        raise DomainError(f"hypoexponential support is [0, inf), got {w!r}")
    oz, oy = params.omega_z, params.omega_y
    if params.equal_means:
        return (w / (oz * oz)) * math.exp(-w / oz)
    return (math.exp(-w / oz) - math.exp(-w / oy)) / (oz - oy)


def hypoexp_cdf(w: float, params: HypoexpParams) -> float:
    """P[sum <= w]; the closed tail used by the linearized quadrature."""
    if w < 0.0 or not math.isfinite(w):
        raise DomainError(f"hypoexponential support is [0, inf), got {w!r}")
    oz, oy = params.omega_z, params.omega_y
    if params.equal_means:
        return -math.expm1(-w / oz) - (w / oz) * math.exp(-w / oz)
    return 1.0 - (oz * math.exp(-w / oz) - oy * math.exp(-w / oy)) / (oz - oy)


def _finalize(eps: float, what: str) -> float:
    """Clamp round-off excursions outside [0, 1]; reject anything larger."""
    if math.isnan(eps):
        raise NumericError(f"{what} produced NaN")
    if eps < 0.0:
        if eps >= -ROUNDOFF_SLACK:
            return 0.0
        raise NumericError(f"{what} left [0, 1]: got {eps!r}")
    if eps > 1.0:
        if eps <= 1.0 + ROUNDOFF_SLACK:
            return 1.0
        raise NumericError(f"{what} left [0, 1]: got {eps!r}")
    return eps


def rayleigh_outage(
    n: int,
    rate: float,
    avg_snr: "SnrValue | float",
    convention: "LinConvention | str" = LinConvention.NATS,
) -> float:
    """Outage of one Rayleigh-faded link at blocklength n and the given rate.

    Averaging the ramp against the unit-mean exponential gain gives

        eps = 1 - exp(-theta) * sinh(delta)/delta,   delta = sqrt(pi/2)/zeta,

    since slope * (e^delta - e^(-delta)) == 2*slope*delta * sinh(delta)/delta
    and 2*slope*delta = 1 for any continuous ramp.  Evaluated in log space;
    the sinh form avoids the cancellation of the raw exponential difference
    at large zeta.
    """
    params = linearize(n, rate, avg_snr, convention)
    delta = math.sqrt(0.5 * math.pi) / params.zeta
    if delta > 20.0:
        # sinh(x)/x = e^x/(2x) to double precision once e^(-2x) vanishes
        log_sinhc = delta - math.log(2.0 * delta)
    else:
        log_sinhc = math.log(math.sinh(delta) / delta)
    log_term = log_sinhc - params.theta
    if log_term > 700.0:  # exp would overflow; the surrogate has no meaning here
        raise NumericError(
            "rayleigh_outage: surrogate average diverged "
            f"(n={n}, rate={rate}, avg_snr={float(avg_snr)!r})"
        )
    eps = -math.expm1(log_term)
    return _finalize(eps, "rayleigh_outage")


def _unequal_lambdas(
    m: float, lo: float, hi: float, theta: float, omega_z: float, omega_y: float
) -> tuple[float, float, float, float]:
    """Corner coefficients of the distinct-means branch.

    Kept in their raw printed-out arithmetic (not the simplified
    lam1 = m*omega_z = -lam2 identities) so a sign slip in any term is
    observable by the quadrature cross-check.
    """
    lam1 = m * (hi + omega_z - theta) - 0.5
    lam2 = m * (theta - lo - omega_z) - 0.5
    lam3 = 0.5 - m * (hi + omega_y - theta)
    lam4 = 0.5 + m * (lo + omega_y - theta)
    return lam1, lam2, lam3, lam4


def _pair_outage_equal(m: float, lo: float, hi: float, theta: float, omega: float) -> float:
    """Ramp averaged against the equal-means density (w/omega^2)e^(-w/omega)."""
    e_lo = math.exp(-lo / omega)
    e_hi = math.exp(-hi / omega)
    tau = hi * hi * e_hi - lo * lo * e_lo - theta * hi * e_hi + theta * lo * e_lo
    xi = hi * e_hi - lo * e_lo + omega * e_hi - omega * e_lo
    return (
        1.0
        - 0.5 * (e_lo + e_hi)
        - (lo / omega) * e_lo
        + (lo * e_lo - hi * e_hi) / (2.0 * omega)
        + m * theta * (e_lo - e_hi)
        + 2.0 * m * xi
        + m * tau / omega
    )


def _pair_outage_unequal(
    m: float, lo: float, hi: float, theta: float, omega_z: float, omega_y: float
) -> float:
    """Ramp averaged against the distinct-means hypoexponential density."""
    lam1, lam2, lam3, lam4 = _unequal_lambdas(m, lo, hi, theta, omega_z, omega_y)
    oz, oy = omega_z, omega_y
    bracket = (
        oz
        - oy
        + oz * math.exp(-hi / oz) * lam1
        + oz * math.exp(-lo / oz) * lam2
        + oy * math.exp(-hi / oy) * lam3
        + oy * math.exp(-lo / oy) * lam4
    )
    return bracket / (oz - oy)


def mrc_pair_outage(
    n: int,
    rate: float,
    params: HypoexpParams,
    convention: "LinConvention | str" = LinConvention.NATS,
    ramp: RampSlope = "zeta",
) -> float:
    """Outage of the combined two-branch link at blocklength n and the given rate.

    The integration variable is the combined instantaneous SNR, so the
    surrogate is built with power = 1 (theta = 2^rate - 1) and averaged
    against the hypoexponential density of the branch-SNR sum.  The default
    "zeta" ramp keeps this consistent with rayleigh_outage — in particular
    the combined link can never be worse than its stronger branch alone.
    The "mu" ramp evaluates the same algebra on the wider, shallower family
    for cross-checking; it is meaningful only while its lower breakpoint
    stays nonnegative.
    """
    lin = linearize(n, rate, SnrValue(1.0), convention)
    m, lo, hi = ramp_coefficients(lin, ramp)
    oz, oy = params.omega_z, params.omega_y
    spread = abs(oz - oy) / max(oz, oy)
    if spread <= CANCELLATION_GUARD:
        # The difference branch divides by (oz - oy); inside the guard band
        # evaluate the equal-means branch at the midpoint instead.
        eps = _pair_outage_equal(m, lo, hi, lin.theta, 0.5 * (oz + oy))
    else:
        eps = _pair_outage_unequal(m, lo, hi, lin.theta, oz, oy)
    return _finalize(eps, "mrc_pair_outage")
