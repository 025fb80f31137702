"""Topology bookkeeping, backend plumbing, and the four scheme compositions."""

from __future__ import annotations

import math

import pytest
from hypothesis import given, settings, strategies as st

from fbrelay import (
    Backend,
    BackendKind,
    DomainError,
    EstimateMethod,
    ProtocolKind,
    SnrValue,
    TopologyConfig,
    df_outage,
    dt_outage,
    link_outages,
    mrc_outage,
    protocol_outage,
    rayleigh_outage,
    sc_outage,
)

TEN_DB = SnrValue.from_db(10.0)


def cfg(**kw) -> TopologyConfig:
    base = dict(total_snr=TEN_DB, eta=0.5, beta=0.5, path_loss_exp=0.0)
    base.update(kw)
    return TopologyConfig(**base)


class TestTopologyConfig:
    def test_snr_budget_split(self):
        c = cfg(eta=0.3)
        assert c.omega_sd == pytest.approx(3.0, rel=1e-12)
        assert c.omega_sr == pytest.approx(3.0, rel=1e-12)  # alpha = 0: no geometry
        assert c.omega_rd == pytest.approx(7.0, rel=1e-12)

    def test_path_loss_shortens_both_hops(self):
        c = cfg(eta=0.5, beta=0.5, path_loss_exp=3.0)
        # half distance at exponent 3: each hop sees an 8x SNR gain
        assert c.omega_sr == pytest.approx(8.0 * c.omega_sd, rel=1e-12)
        assert c.omega_rd == pytest.approx(8.0 * (1.0 - c.eta) * float(TEN_DB), rel=1e-12)

    def test_relay_silent_detection(self):
        assert cfg(eta=1.0).relay_silent
        assert not cfg(eta=0.999).relay_silent

    def test_rates_follow_framing(self):
        c = cfg(n_s=500, n_r=250, k=125)
        assert c.rate_s == 0.25
        assert c.rate_r == 0.5

    @pytest.mark.parametrize(
        "kw",
        [dict(eta=0.0), dict(eta=1.2), dict(beta=0.0), dict(beta=1.0),
         dict(path_loss_exp=-1.0), dict(path_loss_exp=math.inf),
         dict(total_snr=0.0), dict(n_s=50), dict(k=0)],
    )
    def test_validation(self, kw):
        with pytest.raises(DomainError):
            cfg(**kw)

    def test_short_blocklength_override(self):
        with pytest.warns(UserWarning):
            c = cfg(n_s=80, n_r=80, k=40, allow_short=True)
        assert c.rate_s == 0.5


class TestBackend:
    def test_factories(self):
        assert Backend.closed_form().kind is BackendKind.CLOSED_FORM
        assert Backend.quadrature().label == "quad"
        mc = Backend.monte_carlo(100_000, 42)
        assert (mc.trials, mc.seed) == (100_000, 42)

    def test_mc_requires_sampling_parameters(self):
        with pytest.raises(DomainError):
            Backend(BackendKind.MONTE_CARLO)
        with pytest.raises(DomainError):
            Backend(BackendKind.MONTE_CARLO, trials=0, seed=1)

    def test_deterministic_backends_take_none(self):
        with pytest.raises(DomainError):
            Backend(BackendKind.CLOSED_FORM, trials=1000)
        with pytest.raises(DomainError):
            Backend(BackendKind.QUAD_TRUE_Q, seed=3)


class TestProtocolKind:
    def test_parse(self):
        assert ProtocolKind.parse("MRC") is ProtocolKind.MRC
        assert ProtocolKind.parse(" dt ") is ProtocolKind.DT
        assert ProtocolKind.parse(ProtocolKind.SC) is ProtocolKind.SC
        with pytest.raises(DomainError):
            ProtocolKind.parse("amplify")


class TestLinkOutages:
    """Reference topology: 10 dB budget, even split, no geometry."""

    def test_frozen_closed_quadruple(self):
        links = link_outages(cfg(), Backend.closed_form(), "nats")
        # all three single links see mean 5.0 here
        for eps in (links.eps_sd, links.eps_sr, links.eps_rd):
            assert eps == pytest.approx(0.07947095483421393, rel=1e-13)
        assert links.eps_srd == pytest.approx(0.003278086148669243, rel=1e-13)

    def test_frozen_quad_quadruple(self):
        links = link_outages(cfg(), Backend.quadrature(), "nats")
        for eps in (links.eps_sd, links.eps_sr, links.eps_rd):
            assert eps == pytest.approx(0.07985683730813627, rel=1e-12)
        assert links.eps_srd == pytest.approx(0.0033140488521273023, rel=1e-12)

    def test_combined_link_beats_direct_link(self):
        for backend in (Backend.closed_form(), Backend.quadrature()):
            links = link_outages(cfg(), backend, "nats")
            assert links.eps_srd <= links.eps_sd

    def test_method_tags(self):
        links = link_outages(cfg(), Backend.quadrature())
        assert links.sd.method is EstimateMethod.QUAD_TRUE_Q
        links_mc = link_outages(cfg(), Backend.monte_carlo(50_000, 3))
        assert links_mc.srd.method is EstimateMethod.MONTE_CARLO
        assert links_mc.srd.std_error is not None


class TestCompositions:
    def test_frozen_protocol_values(self):
        backend = Backend.closed_form()
        assert dt_outage(cfg(), backend) == pytest.approx(0.0405665829756156, rel=1e-13)
        assert df_outage(cfg(), backend) == pytest.approx(0.15262627700616618, rel=1e-13)
        assert sc_outage(cfg(), backend) == pytest.approx(0.012129355966471257, rel=1e-13)
        assert mrc_outage(cfg(), backend) == pytest.approx(0.009333206174667357, rel=1e-13)

    def test_compositions_reconstruct_from_links(self):
        c = cfg(eta=0.35, beta=0.6, path_loss_exp=2.0)
        backend = Backend.closed_form()
        links = link_outages(c, backend)
        sd, sr, rd, srd = links.eps_sd, links.eps_sr, links.eps_rd, links.eps_srd
        assert df_outage(c, backend) == pytest.approx(sr + (1 - sr) * rd, rel=1e-14)
        assert sc_outage(c, backend) == pytest.approx(sd * sr + (1 - sr) * sd * rd, rel=1e-14)
        assert mrc_outage(c, backend) == pytest.approx(sd * sr + (1 - sr) * srd, rel=1e-14)

    def test_dt_uses_the_full_budget_and_ignores_eta(self):
        backend = Backend.closed_form()
        assert dt_outage(cfg(eta=0.2), backend) == dt_outage(cfg(eta=0.9), backend)
        assert dt_outage(cfg(), backend) == pytest.approx(
            rayleigh_outage(500, 0.5, float(TEN_DB)), rel=1e-15
        )

    def test_df_symmetric_under_mirrored_topology(self):
        # a + b - a*b is symmetric, so swapping (eta, beta) -> (1-eta, 1-beta)
        # swaps the two hop SNRs and leaves DF unchanged
        backend = Backend.closed_form()
        a = df_outage(cfg(eta=0.3, beta=0.4, path_loss_exp=3.0), backend)
        b = df_outage(cfg(eta=0.7, beta=0.6, path_loss_exp=3.0), backend)
        assert a == pytest.approx(b, rel=1e-12)

    def test_mrc_never_behind_sc(self):
        for eta in (0.3, 0.5, 0.8):
            c = cfg(eta=eta, path_loss_exp=3.0)
            assert mrc_outage(c, Backend.quadrature()) <= sc_outage(
                c, Backend.quadrature()
            ) + 1e-12
            assert mrc_outage(c, Backend.closed_form()) <= sc_outage(
                c, Backend.closed_form()
            ) + 1e-6

    def test_protocol_ordering_with_geometry(self):
        c = cfg(path_loss_exp=3.0)
        backend = Backend.closed_form()
        vals = {p: protocol_outage(p, c, backend).value for p in ("dt", "df", "sc", "mrc")}
        assert vals["mrc"] < vals["sc"] < vals["df"]


class TestSilentRelay:
    """eta = 1 sends the whole budget through the source."""

    @pytest.mark.parametrize(
        "backend",
        [Backend.closed_form(), Backend.quadrature(), Backend.monte_carlo(50_000, 17)],
        ids=["closed", "quad", "mc"],
    )
    def test_degeneracy_across_backends(self, backend):
        links = link_outages(cfg(eta=1.0), backend)
        assert links.eps_rd == 1.0
        assert links.eps_srd == links.eps_sd
        assert df_outage(cfg(eta=1.0), backend) == pytest.approx(1.0, abs=1e-12)
        assert sc_outage(cfg(eta=1.0), backend) == pytest.approx(links.eps_sd, rel=1e-12)
        assert mrc_outage(cfg(eta=1.0), backend) == pytest.approx(links.eps_sd, rel=1e-12)

    def test_mc_silent_forward_hop_has_zero_spread(self):
        links = link_outages(cfg(eta=1.0), Backend.monte_carlo(50_000, 17))
        assert links.rd.std_error == 0.0
        assert links.rd.method is EstimateMethod.MONTE_CARLO


class TestMixedFraming:
    def test_closed_form_refuses(self):
        c = cfg(n_s=500, n_r=250, k=125)
        with pytest.raises(DomainError, match="blocklength"):
            mrc_outage(c, Backend.closed_form())

    def test_oracles_accept_at_source_framing(self):
        from fbrelay import HypoexpParams, fading_outage_quadrature

        c = cfg(n_s=500, n_r=250, k=125)
        links = link_outages(c, Backend.quadrature())
        direct = fading_outage_quadrature(
            c.n_s, c.rate_s, HypoexpParams(c.omega_sd, c.omega_rd)
        ).value
        assert links.eps_srd == direct
        mc = link_outages(c, Backend.monte_carlo(50_000, 23))
        assert 0.0 <= mc.eps_srd <= 1.0

    def test_df_and_sc_still_use_their_own_framings(self):
        # DF has no combined link, so mixed framing is fine closed-form
        c = cfg(n_s=500, n_r=250, k=125)
        val = df_outage(c, Backend.closed_form())
        assert 0.0 < val < 1.0


class TestMonteCarloProtocols:
    def test_pinned_protocol_estimate(self):
        est = protocol_outage("df", cfg(), Backend.monte_carlo(100_000, 42), "nats")
        assert est.value == 0.15362646991270612
        assert est.std_error == 0.0010799786337094685

    def test_tracks_closed_form(self):
        closed = df_outage(cfg(), Backend.closed_form())
        est = protocol_outage("df", cfg(), Backend.monte_carlo(100_000, 42))
        assert abs(est.value - closed) <= 4.0 * est.std_error

    def test_composition_spread_never_exceeds_link_sum(self):
        links = link_outages(cfg(), Backend.monte_carlo(100_000, 42))
        est = protocol_outage("mrc", cfg(), Backend.monte_carlo(100_000, 42))
        bound = sum(x.std_error for x in (links.sd, links.sr, links.srd))
        assert 0.0 < est.std_error <= bound


@settings(max_examples=25, deadline=None)
@given(
    st.floats(min_value=0.05, max_value=0.95),
    st.floats(min_value=0.1, max_value=0.9),
    st.sampled_from([0.0, 2.0, 3.0]),
)
def test_compositions_land_in_unit_interval(eta, beta, alpha):
    c = cfg(eta=eta, beta=beta, path_loss_exp=alpha)
    for proto in ("dt", "df", "sc", "mrc"):
        v = protocol_outage(proto, c, Backend.closed_form()).value
        assert 0.0 <= v <= 1.0
