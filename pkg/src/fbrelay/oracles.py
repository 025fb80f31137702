"""Independent evaluation backends: quadrature and seeded Monte Carlo.

Three ways to evaluate a fading-averaged error probability, none of which
share code with the closed forms they validate:

* fading_outage_quadrature — adaptive quadrature of the true Gaussian-tail
  conditional error against the channel's SNR density.  The axis is split
  at the argument's sign change and the saturated head (where the
  conditional error is 1 to double precision) is taken from the CDF.
* linearized_outage_quadrature — the same machinery applied to the
  clipped-linear surrogate; by construction this must match the closed
  forms to near machine precision, which is the central correctness check.
* fading_outage_mc — a seeded, partitioned Monte Carlo average.  The
  default estimator averages the smooth per-draw conditional error (the
  quantity the fading expectation is actually taken of), which has strictly
  smaller variance than thresholded packet outcomes; a Bernoulli mode is
  available for packet-level realism.

Monte Carlo reproducibility contract: the estimate is a pure function of
(seed, trials, partitions, stream).  Each partition owns a counter-based
generator keyed by (seed, stream, partition index), and partial sums are
combined in partition order, so the result is bit-identical regardless of
how many threads actually ran.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import erfc

from .closed_form import HypoexpParams, hypoexp_cdf, hypoexp_pdf
from .errors import ConvergenceError, DomainError, NumericError
from .finite_blocklength import LN2, SnrValue, outage_given_snr
from .linearization import LinearizationParams, RampSlope, ramp_coefficients

#: Environment variable capping worker threads for partitioned sampling.
MAX_WORKERS_ENV = "FBRELAY_MAX_WORKERS"

#: Beyond this many sigmas the Gaussian tail is exactly 0 or 1 in doubles.
_SATURATION_SIGMAS = 42.0

_ABS_TOL_RANGE = (1e-13, 1e-6)

_MIN_TRIALS = 10_000


class EstimateMethod(enum.Enum):
    CLOSED_FORM = "closed_form"
    QUAD_TRUE_Q = "quad_true_q"
    QUAD_LINEARIZED = "quad_linearized"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class OutageEstimate:
    """A probability plus the method that produced it.

    std_error, trials and seed are present exactly when the method is
    MONTE_CARLO.
    """

    value: float
    method: EstimateMethod
    std_error: "float | None" = None
    trials: "int | None" = None
    seed: "int | None" = None

    def __post_init__(self) -> None:
        if not (0.0 <= self.value <= 1.0):
            raise NumericError(f"estimate {self.value!r} lies outside [0, 1]")
        is_mc = self.method is EstimateMethod.MONTE_CARLO
        if is_mc:
            if self.std_error is None or self.trials is None or self.seed is None:
                raise DomainError("Monte Carlo estimates must carry std_error, trials and seed")
            if not (0.0 <= self.std_error <= 0.5):
                raise NumericError(f"std_error {self.std_error!r} outside [0, 0.5]")
        elif self.std_error is not None or self.trials is not None or self.seed is not None:
            raise DomainError(f"{self.method.value} estimates carry no sampling metadata")


@dataclass(frozen=True)
class ExponentialDensity:
    """Exponential SNR density with the given mean (one Rayleigh link)."""

    mean: float

    def __post_init__(self) -> None:
        if not (isinstance(self.mean, (int, float)) and math.isfinite(self.mean) and self.mean > 0):
            raise DomainError(f"exponential mean must be positive and finite, got {self.mean!r}")
        object.__setattr__(self, "mean", float(self.mean))

    def pdf(self, w: float) -> float:
        if w < 0.0:
            raise DomainError(f"exponential support is [0, inf), got {w!r}")
        return math.exp(-w / self.mean) / self.mean

    def cdf(self, w: float) -> float:
        if w < 0.0:
            raise DomainError(f"exponential support is [0, inf), got {w!r}")
        return -math.expm1(-w / self.mean)


#: Channel descriptions accepted by the oracle backends: a single Rayleigh
#: link (exponential SNR) or a combined two-branch link (hypoexponential).
Density = "ExponentialDensity | HypoexpParams"


def _as_density(channel) -> "ExponentialDensity | HypoexpParams":
    if isinstance(channel, (ExponentialDensity, HypoexpParams)):
        return channel
    if isinstance(channel, SnrValue):
        return ExponentialDensity(channel.value)
    if isinstance(channel, (int, float)):
        return ExponentialDensity(float(channel))
    raise DomainError(f"cannot interpret {channel!r} as a channel density")


def _density_pdf(density, w: float) -> float:
    if isinstance(density, ExponentialDensity):
        return density.pdf(w)
    return hypoexp_pdf(w, density)


def _density_cdf(density, w: float) -> float:
    if isinstance(density, ExponentialDensity):
        return density.cdf(w)
    return hypoexp_cdf(w, density)


def _density_scale(density) -> float:
    if isinstance(density, ExponentialDensity):
        return density.mean
    return max(density.omega_z, density.omega_y)


def _check_abs_tol(abs_tol: float) -> float:
    lo, hi = _ABS_TOL_RANGE
    if not (lo <= abs_tol <= hi):
        raise DomainError(f"abs_tol must lie in [{lo}, {hi}], got {abs_tol!r}")
    return float(abs_tol)


def _integrate_pieces(integrand, cuts: "list[float]", abs_tol: float) -> float:
    """Adaptive quadrature over consecutive [cuts[i], cuts[i+1]] intervals."""
    spans = [(a, b) for a, b in zip(cuts, cuts[1:]) if b > a]
    if not spans:
        return 0.0
    per_piece = abs_tol / len(spans)
    total = 0.0
    for a, b in spans:
        value, _abserr, info, *tail = quad(
            integrand, a, b, epsabs=per_piece, epsrel=0.0, limit=400, full_output=1
        )
        if tail:  # a message element is appended exactly when QUADPACK gave up
            raise ConvergenceError(
                f"quadrature failed on [{a!r}, {b!r}]: {tail[0]}"
            )
        total += value
    return total


def _transition_window(n: int, rate: float) -> "tuple[float, float, float]":
    """(w0, w_lo, w_hi): the SNR where the conditional error crosses 1/2 and
    the points where its Gaussian argument saturates at ±42 sigma."""
    w0 = math.expm1(rate * LN2)  # 2^rate - 1
    slope = math.sqrt(n / math.expm1(2.0 * rate * LN2))  # d(argument)/dw at w0
    width = _SATURATION_SIGMAS / slope
    return w0, max(0.0, w0 - width), w0 + width


def fading_outage_quadrature(
    n: int,
    rate: float,
    channel,
    abs_tol: float = 1e-10,
) -> OutageEstimate:
    """Average the true conditional error over the channel's SNR density.

    channel may be an average SNR (float or SnrValue, meaning one Rayleigh
    link), an ExponentialDensity, or HypoexpParams for the combined link.
    """
    abs_tol = _check_abs_tol(abs_tol)
    if n < 1:
        raise DomainError(f"blocklength must be >= 1, got {n!r}")
    if not (rate > 0.0) or not math.isfinite(rate):
        raise DomainError(f"rate must be a positive finite number, got {rate!r}")
    density = _as_density(channel)

    w0, w_lo, w_hi = _transition_window(n, rate)
    head = _density_cdf(density, w_lo) if w_lo > 0.0 else 0.0

    cuts = [w_lo, w0, w_hi]
    # If the density decays long before the transition, hint the mass scale
    # so the subdivision does not have to discover it on a huge interval.
    scale = 50.0 * _density_scale(density)
    if w_lo + scale < w0:
        cuts.insert(1, w_lo + scale)

    def integrand(w: float) -> float:
        return outage_given_snr(n, rate, w) * _density_pdf(density, w)

    value = head + _integrate_pieces(integrand, cuts, abs_tol)
    value = min(max(value, 0.0), 1.0)  # round-off at the saturated ends
    return OutageEstimate(value=value, method=EstimateMethod.QUAD_TRUE_Q)


def fading_outage_quadrature_fixed(
    n: int,
    rate: float,
    channel,
    panels: int = 96,
    order: int = 16,
) -> float:
    """Fixed-rule cross-check for fading_outage_quadrature.

    Composite Gauss-Legendre on the same axis splits, with a deterministic
    panel layout and no adaptivity — an independent scheme used to pin
    regression constants (two schemes agreeing is the freeze criterion).
    """
    if panels < 1 or order < 2:
        raise DomainError(f"need panels >= 1 and order >= 2, got {panels!r}, {order!r}")
    density = _as_density(channel)
    w0, w_lo, w_hi = _transition_window(n, rate)
    head = _density_cdf(density, w_lo) if w_lo > 0.0 else 0.0

    cuts = [w_lo, w0, w_hi]
    scale = 50.0 * _density_scale(density)
    if w_lo + scale < w0:
        cuts.insert(1, w_lo + scale)

    nodes, weights = np.polynomial.legendre.leggauss(order)
    total = head
    for a, b in zip(cuts, cuts[1:]):
        if b <= a:
            continue
        edges = np.linspace(a, b, panels + 1)
        for left, right in zip(edges, edges[1:]):
            mid = 0.5 * (left + right)
            half = 0.5 * (right - left)
            for t, w in zip(nodes, weights):
                x = mid + half * t
                total += half * w * outage_given_snr(n, rate, x) * _density_pdf(density, x)
    return float(min(max(total, 0.0), 1.0))


def linearized_outage_quadrature(
    params: LinearizationParams,
    density,
    abs_tol: float = 1e-10,
    slope: RampSlope = "zeta",
) -> OutageEstimate:
    """Integrate the clipped-linear surrogate against the given density.

    The saturated head is the CDF at the lower breakpoint (clipped to the
    support); only the linear segment is integrated numerically.  This is
    the defining oracle for the closed forms: they must agree with it to
    1e-8 absolute everywhere they are claimed valid.
    """
    abs_tol = _check_abs_tol(abs_tol)
    density = _as_density(density)
    m, lo, hi = ramp_coefficients(params, slope)
    a = max(lo, 0.0)
    head = _density_cdf(density, a) if a > 0.0 else 0.0

    theta = params.theta
    cuts = [a, theta, hi] if a < theta else [a, hi]

    def integrand(t: float) -> float:
        return (0.5 - m * (t - theta)) * _density_pdf(density, t)

    value = head + _integrate_pieces(integrand, cuts, abs_tol)
    value = min(max(value, 0.0), 1.0)
    return OutageEstimate(value=value, method=EstimateMethod.QUAD_LINEARIZED)


def _conditional_outage_np(n: int, rate: float, w: np.ndarray) -> np.ndarray:
    """Vectorized conditional error probability at instantaneous SNR w > 0."""
    arg = np.sqrt(n) * (np.log1p(w) - rate * LN2) * (1.0 + w) / np.sqrt(w * (2.0 + w))
    return 0.5 * erfc(arg / math.sqrt(2.0))


def _worker_count(partitions: int) -> int:
    cap = os.environ.get(MAX_WORKERS_ENV)
    available = os.cpu_count() or 1
    if cap is not None:
        try:
            available = max(1, min(available, int(cap)))
        except ValueError:
            raise DomainError(f"{MAX_WORKERS_ENV} must be an integer, got {cap!r}") from None
    return max(1, min(partitions, available))


def fading_outage_mc(
    n: int,
    rate: float,
    channel,
    trials: int,
    seed: int,
    *,
    partitions: int = 16,
    stream: int = 0,
    bernoulli: bool = False,
) -> OutageEstimate:
    """Seeded Monte Carlo estimate of the fading-averaged error probability.

    Draws instantaneous SNRs from the channel density (summing the two
    branch draws for a combined link) and averages the conditional error.
    std_error is the sample standard deviation of the per-draw values over
    sqrt(trials).  Distinct `stream` values give statistically independent
    runs from the same seed — the per-link streams of the protocol layer.
    """
    if trials < _MIN_TRIALS:
        raise DomainError(f"trials must be >= {_MIN_TRIALS}, got {trials!r}")
    if partitions < 1:
        raise DomainError(f"partitions must be >= 1, got {partitions!r}")
    if n < 1:
        raise DomainError(f"blocklength must be >= 1, got {n!r}")
    if not (rate > 0.0) or not math.isfinite(rate):
        raise DomainError(f"rate must be a positive finite number, got {rate!r}")
    density = _as_density(channel)

    base, extra = divmod(trials, partitions)
    chunk_sizes = [base + (1 if i < extra else 0) for i in range(partitions)]

    def run_partition(index: int) -> "tuple[float, float]":
        size = chunk_sizes[index]
        if size == 0:
            return 0.0, 0.0
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(stream, index))
        gen = np.random.Generator(np.random.Philox(ss))
        if isinstance(density, ExponentialDensity):
            w = gen.exponential(density.mean, size=size)
        else:
            w = gen.exponential(density.omega_z, size=size)
            w = w + gen.exponential(density.omega_y, size=size)
        values = _conditional_outage_np(n, rate, w)
        if bernoulli:
            values = (gen.random(size) < values).astype(float)
        return float(np.sum(values)), float(np.dot(values, values))

    workers = _worker_count(partitions)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(run_partition, range(partitions)))
    else:
        partials = [run_partition(i) for i in range(partitions)]

    # Fixed-order combination: bit-identical for a fixed partition count.
    total = 0.0
    total_sq = 0.0
    for s1, s2 in partials:
        total += s1
        total_sq += s2

    mean = total / trials
    var = max(total_sq - total * total / trials, 0.0) / max(trials - 1, 1)
    std_error = math.sqrt(var / trials)
    return OutageEstimate(
        value=min(max(mean, 0.0), 1.0),
        method=EstimateMethod.MONTE_CARLO,
        std_error=min(std_error, 0.5),
        trials=trials,
        seed=seed,
    )
