"""Topology bookkeeping and the four transmission-scheme compositions.

A relay sits between source and destination at normalized distance beta
(direct hop distance 1), and the total transmit SNR budget P is split as
eta*P for the source and (1-eta)*P for the relay.  Average link SNRs follow
as

    direct        omega_sd = eta*P * 1^(-alpha)
    source-relay  omega_sr = eta*P * beta^(-alpha)
    relay-dest    omega_rd = (1-eta)*P * (1-beta)^(-alpha)

with path-loss exponent alpha (default 0: position-independent gains, the
baseline configuration).  The combined two-branch receiver adds the direct
and relayed instantaneous SNRs.

Compositions of per-link outages:

    DT   single link at full power P
    DF   eps_sr + (1 - eps_sr) * eps_rd          (relay always forwards)
    SC   eps_sd * (eps_sr + (1 - eps_sr)*eps_rd) (relayed copy used on miss)
    MRC  eps_sd*eps_sr + (1 - eps_sr)*eps_srd    (branch SNRs added)

Every composition is available through three backends — closed form,
true-tail quadrature, and seeded Monte Carlo — so each number can always be
cross-examined by a slower, independent one.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .closed_form import HypoexpParams, mrc_pair_outage, rayleigh_outage
from .errors import DomainError
from .finite_blocklength import RateSpec, SnrValue, _as_snr
from .linearization import LinConvention
from .oracles import (
    EstimateMethod,
    ExponentialDensity,
    OutageEstimate,
    fading_outage_mc,
    fading_outage_quadrature,
)

#: Per-link sampling streams: the Monte Carlo backend gives each link its
#: own generator family so composed estimates use independent draws.
_STREAM_SD, _STREAM_SR, _STREAM_RD, _STREAM_SRD = 0, 1, 2, 3


class ProtocolKind(enum.Enum):
    DT = "dt"
    DF = "df"
    SC = "sc"
    MRC = "mrc"

    @classmethod
    def parse(cls, name: "str | ProtocolKind") -> "ProtocolKind":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise DomainError(
                f"unknown protocol {name!r}; expected one of {[p.value for p in cls]}"
            ) from None


class BackendKind(enum.Enum):
    CLOSED_FORM = "closed"
    QUAD_TRUE_Q = "quad"
    MONTE_CARLO = "mc"


@dataclass(frozen=True)
class Backend:
    """Evaluation backend selector; Monte Carlo carries its trials and seed."""

    kind: BackendKind
    trials: "int | None" = None
    seed: "int | None" = None

    def __post_init__(self) -> None:
        if self.kind is BackendKind.MONTE_CARLO:
            if self.trials is None or self.seed is None:
                raise DomainError("Monte Carlo backend requires trials and seed")
            if self.trials < 1:
                raise DomainError(f"trials must be positive, got {self.trials!r}")
        elif self.trials is not None or self.seed is not None:
            raise DomainError(f"{self.kind.value} backend takes no trials/seed")

    @classmethod
    def closed_form(cls) -> "Backend":
        return cls(BackendKind.CLOSED_FORM)

    @classmethod
    def quadrature(cls) -> "Backend":
        return cls(BackendKind.QUAD_TRUE_Q)

    @classmethod
    def monte_carlo(cls, trials: int, seed: int) -> "Backend":
        return cls(BackendKind.MONTE_CARLO, trials=int(trials), seed=int(seed))

    @property
    def label(self) -> str:
        return self.kind.value


@dataclass(frozen=True)
class TopologyConfig:
    """One relay topology: SNR budget, power split, relay position, framing.

    total_snr is the full budget P (linear).  eta in (0, 1] is the source's
    share; eta = 1 silences the relay.  beta in (0, 1) places the relay.
    n_s/n_r are the per-hop blocklengths (each hop sends a full codeword of
    its own), and k the information bits carried by either hop.
    """

    total_snr: SnrValue
    eta: float
    beta: float = 0.5
    path_loss_exp: float = 0.0
    n_s: int = 500
    n_r: int = 500
    k: int = 250
    allow_short: bool = False

    def __post_init__(self) -> None:
        snr = self.total_snr if isinstance(self.total_snr, SnrValue) else SnrValue(
            _as_snr(self.total_snr)
        )
        object.__setattr__(self, "total_snr", snr)
        if snr.value <= 0.0:
            raise DomainError("total_snr must be strictly positive")
        if not (0.0 < self.eta <= 1.0):
            raise DomainError(f"eta must lie in (0, 1], got {self.eta!r}")
        if not (0.0 < self.beta < 1.0):
            raise DomainError(f"beta must lie in (0, 1), got {self.beta!r}")
        if not (self.path_loss_exp >= 0.0 and math.isfinite(self.path_loss_exp)):
            raise DomainError(f"path_loss_exp must be finite and >= 0, got {self.path_loss_exp!r}")
        # RateSpec enforces positive integers and the short-blocklength gate
        RateSpec(self.k, self.n_s, allow_short=self.allow_short)
        RateSpec(self.k, self.n_r, allow_short=self.allow_short)

    @property
    def rate_s(self) -> float:
        return self.k / self.n_s

    @property
    def rate_r(self) -> float:
        return self.k / self.n_r

    @property
    def omega_sd(self) -> float:
        return self.eta * self.total_snr.value  # d_sd = 1, so no distance gain

    @property
    def omega_sr(self) -> float:
        return self.eta * self.total_snr.value * self.beta ** -self.path_loss_exp

    @property
    def omega_rd(self) -> float:
        return (1.0 - self.eta) * self.total_snr.value * (1.0 - self.beta) ** -self.path_loss_exp

    @property
    def relay_silent(self) -> bool:
        return self.omega_rd == 0.0


@dataclass(frozen=True)
class LinkOutages:
    """Per-link estimates for one topology: direct, broadcast, forward, combined."""

    sd: OutageEstimate
    sr: OutageEstimate
    rd: OutageEstimate
    srd: OutageEstimate

    @property
    def eps_sd(self) -> float:
        return self.sd.value

    @property
    def eps_sr(self) -> float:
        return self.sr.value

    @property
    def eps_rd(self) -> float:
        return self.rd.value

    @property
    def eps_srd(self) -> float:
        return self.srd.value


def _single_link(
    backend: Backend,
    convention: LinConvention,
    n: int,
    rate: float,
    omega: float,
    stream: int,
) -> OutageEstimate:
    if backend.kind is BackendKind.CLOSED_FORM:
        value = rayleigh_outage(n, rate, omega, convention)
        return OutageEstimate(value=value, method=EstimateMethod.CLOSED_FORM)
    if backend.kind is BackendKind.QUAD_TRUE_Q:
        return fading_outage_quadrature(n, rate, ExponentialDensity(omega))
    return fading_outage_mc(
        n, rate, ExponentialDensity(omega), backend.trials, backend.seed, stream=stream
    )


def _pair_link(
    backend: Backend,
    convention: LinConvention,
    cfg: TopologyConfig,
) -> OutageEstimate:
    # The combined-branch decode is framed by the source codeword: the relayed
    # copy contributes SNR, not extra channel uses, so (n_s, k/n_s) governs.
    # The closed form was derived for matched hops only and refuses anything
    # else; the integral and sampling backends accept the mixed case under
    # the source-framing reading.
    pair = HypoexpParams(cfg.omega_sd, cfg.omega_rd)
    if backend.kind is BackendKind.CLOSED_FORM:
        if cfg.n_s != cfg.n_r:
            raise DomainError(
                "closed-form combined-branch outage is defined only for equal hop "
                f"blocklengths; got n_s={cfg.n_s}, n_r={cfg.n_r} — use the quadrature "
                "or Monte Carlo backend for mixed framing"
            )
        value = mrc_pair_outage(cfg.n_s, cfg.rate_s, pair, convention)
        return OutageEstimate(value=value, method=EstimateMethod.CLOSED_FORM)
    if backend.kind is BackendKind.QUAD_TRUE_Q:
        return fading_outage_quadrature(cfg.n_s, cfg.rate_s, pair)
    return fading_outage_mc(
        cfg.n_s,
        cfg.rate_s,
        pair,
        backend.trials,
        backend.seed,
        stream=_STREAM_SRD,
    )


def link_outages(
    cfg: TopologyConfig,
    backend: Backend,
    convention: "LinConvention | str" = LinConvention.NATS,
) -> LinkOutages:
    """Evaluate all four constituent links of one topology.

    With a silent relay (eta = 1) the forward hop is a certain outage and
    the combined link degenerates to the direct one — by the continuity
    rule, not by evaluating a zero-SNR density.
    """
    convention = LinConvention.parse(convention)
    sd = _single_link(backend, convention, cfg.n_s, cfg.rate_s, cfg.omega_sd, _STREAM_SD)
    sr = _single_link(backend, convention, cfg.n_s, cfg.rate_s, cfg.omega_sr, _STREAM_SR)
    if cfg.relay_silent:
        rd = OutageEstimate(
            value=1.0,
            method=sd.method,
            std_error=0.0 if sd.method is EstimateMethod.MONTE_CARLO else None,
            trials=sd.trials,
            seed=sd.seed,
        )
        srd = sd
    else:
        rd = _single_link(backend, convention, cfg.n_r, cfg.rate_r, cfg.omega_rd, _STREAM_RD)
        srd = _pair_link(backend, convention, cfg)
    return LinkOutages(sd=sd, sr=sr, rd=rd, srd=srd)


def _se(estimate: OutageEstimate) -> float:
    return estimate.std_error or 0.0


def protocol_outage(
    protocol: "ProtocolKind | str",
    cfg: TopologyConfig,
    backend: Backend,
    convention: "LinConvention | str" = LinConvention.NATS,
) -> OutageEstimate:
    """Overall outage of one scheme, with first-order error propagation.

    For Monte Carlo backends the composition's std_error is the delta-method
    combination of the per-link standard errors; links use independent
    sampling streams, so the cross terms vanish (the eta = 1 degeneracy
    shares the direct-link estimate, making the combined figure slightly
    conservative there).
    """
    protocol = ProtocolKind.parse(protocol)
    convention = LinConvention.parse(convention)

    if protocol is ProtocolKind.DT:
        omega = cfg.total_snr.value  # full budget, relay idle
        return _single_link(backend, convention, cfg.n_s, cfg.rate_s, omega, _STREAM_SD)

    # Evaluate only the links this composition reads.  The combined branch
    # belongs to MRC alone, so DF and SC stay available wherever the
    # single-link forms are — mixed per-hop framings included.
    sr = _single_link(backend, convention, cfg.n_s, cfg.rate_s, cfg.omega_sr, _STREAM_SR)
    sd = None
    if protocol is not ProtocolKind.DF:
        sd = _single_link(backend, convention, cfg.n_s, cfg.rate_s, cfg.omega_sd, _STREAM_SD)

    if protocol is ProtocolKind.MRC:
        srd = sd if cfg.relay_silent else _pair_link(backend, convention, cfg)
        value = sd.value * sr.value + (1.0 - sr.value) * srd.value
        grads = (
            (sd, sr.value),
            (sr, sd.value - srd.value),
            (srd, 1.0 - sr.value),
        )
    else:
        if cfg.relay_silent:
            rd = OutageEstimate(
                value=1.0,
                method=sr.method,
                std_error=0.0 if sr.method is EstimateMethod.MONTE_CARLO else None,
                trials=sr.trials,
                seed=sr.seed,
            )
        else:
            rd = _single_link(
                backend, convention, cfg.n_r, cfg.rate_r, cfg.omega_rd, _STREAM_RD
            )
        if protocol is ProtocolKind.DF:
            value = sr.value + (1.0 - sr.value) * rd.value
            grads = ((sr, 1.0 - rd.value), (rd, 1.0 - sr.value))
        else:  # SC
            value = sd.value * sr.value + (1.0 - sr.value) * sd.value * rd.value
            grads = (
                (sd, sr.value + (1.0 - sr.value) * rd.value),
                (sr, sd.value * (1.0 - rd.value)),
                (rd, sd.value * (1.0 - sr.value)),
            )

    value = min(max(value, 0.0), 1.0)
    if backend.kind is BackendKind.MONTE_CARLO:
        var = sum((g * _se(est)) ** 2 for est, g in grads)
        return OutageEstimate(
            value=value,
            method=EstimateMethod.MONTE_CARLO,
            std_error=min(math.sqrt(var), 0.5),
            trials=backend.trials,
            seed=backend.seed,
        )
    method = (
        EstimateMethod.CLOSED_FORM
        if backend.kind is BackendKind.CLOSED_FORM
        else EstimateMethod.QUAD_TRUE_Q
    )
    return OutageEstimate(value=value, method=method)


def dt_outage(cfg, backend, convention=LinConvention.NATS) -> float:
    """Direct transmission: one link at the full SNR budget; eta is ignored."""
    return protocol_outage(ProtocolKind.DT, cfg, backend, convention).value


def df_outage(cfg, backend, convention=LinConvention.NATS) -> float:
    """Always-forward relaying: fails iff either hop fails."""
    return protocol_outage(ProtocolKind.DF, cfg, backend, convention).value


def sc_outage(cfg, backend, convention=LinConvention.NATS) -> float:
    """Selection combining: the relayed copy rescues a failed direct copy."""
    return protocol_outage(ProtocolKind.SC, cfg, backend, convention).value


def mrc_outage(cfg, backend, convention=LinConvention.NATS) -> float:
    """Ratio combining: direct and relayed branch SNRs add at the receiver."""
    return protocol_outage(ProtocolKind.MRC, cfg, backend, convention).value
