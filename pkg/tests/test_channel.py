import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from cskct.channel import (ChannelParams, Topology, averaged_cir, build_cir_table, cir,
                           cum_hit, hit_rate)
from cskct.errors import DegenerateIntervalError, DomainError

# 50-digit mpmath evaluations of the closed forms at D=79.4, r=5, t_sym=21.12
HIT_RATE_6_1S = 0.077087871098001087003
CUM_HIT_6 = 0.41703778904045965418
CUM_HIT_17 = 0.17479649112394252182
H_6_17 = [0.26823000686832901, 0.013596328799476451, 0.0060664029011045498,
          0.0036261746138735115, 0.0024782516943253659, 0.0018310512166583298,
          0.0014239907700822823, 0.0011483749324358047, 0.0009515500202078914,
          0.00080520587728648283, 0.00069289726342698262, 0.00060448236368703217]


def test_params_validation():
    with pytest.raises(DomainError):
        ChannelParams(D=0)
    with pytest.raises(DomainError):
        ChannelParams(t_sym=-1)


def test_hit_rate_closed_form(params):
    assert hit_rate(params, 6, 1.0) == pytest.approx(HIT_RATE_6_1S, rel=1e-13)


@pytest.mark.parametrize("t", [1e-4, 1e-3])
def test_hit_rate_vanishes_at_zero(params, t):
    assert hit_rate(params, 6, t) < 1e-30


def test_hit_rate_vanishes_at_infinity(params):
    assert hit_rate(params, 6, 1e9) < 1e-12


@pytest.mark.parametrize("T", [1.0, 10.0, 100.0])
def test_hit_rate_integrates_to_cum_hit(params, T):
    total, _ = integrate.quad(lambda t: hit_rate(params, 6.0, t), 0, T,
                              epsabs=1e-13, epsrel=1e-13, limit=200)
    assert abs(total - cum_hit(params, 6.0, T)) < 1e-6


def test_hit_rate_domain(params):
    with pytest.raises(DomainError):
        hit_rate(params, 6, 0.0)
    with pytest.raises(DomainError):
        hit_rate(params, -1, 1.0)


def test_cum_hit_values(params):
    assert cum_hit(params, 6, 0.0) == 0.0
    assert cum_hit(params, 6, 21.12) == pytest.approx(CUM_HIT_6, rel=1e-13)
    assert cum_hit(params, 17, 21.12) == pytest.approx(CUM_HIT_17, rel=1e-13)
    assert cum_hit(params, 17, 1e12) == pytest.approx(5 / 22, abs=1e-4)


def test_cum_hit_domain(params):
    with pytest.raises(DomainError):
        cum_hit(params, 0.0, 1.0)
    with pytest.raises(DomainError):
        cum_hit(params, 6.0, -1.0)


def test_cum_hit_monotone_grid(params):
    ys = np.linspace(1, 30, 30)[:, None]
    ts = np.concatenate([[0.0], np.geomspace(1e-3, 1e4, 80)])[None, :]
    F = cum_hit(params, ys, ts)
    assert np.all(np.diff(F, axis=1) >= 0)
    assert np.all(np.diff(F, axis=0) <= 0)
    assert np.all(F <= params.r / (ys + params.r))


def test_cir_first_period_equals_cum_hit(params):
    assert cir(params, 6, 1) == pytest.approx(CUM_HIT_6, rel=1e-13)


def test_cir_telescopes_to_asymptote(params):
    total = sum(cir(params, 6, i) for i in range(1, 200_001))
    # remaining tail after n periods is ~ r/(y+r) * y / sqrt(pi D n t_sym)
    assert total == pytest.approx(5 / 11, abs=2e-3)
    assert total < 5 / 11


def test_cir_decays_after_first_period(params):
    vals = [cir(params, 6, i) for i in range(2, 13)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_cir_domain(params):
    with pytest.raises(DomainError):
        cir(params, 6, 0)
    with pytest.raises(DomainError):
        cir(params, 6, 1.5)


@given(y=st.floats(0.5, 50), t1=st.floats(0, 1e4), dt=st.floats(0, 1e4))
@settings(max_examples=200, deadline=None)
def test_cum_hit_bounded_monotone(y, t1, dt):
    p = ChannelParams()
    a, b = cum_hit(p, y, t1), cum_hit(p, y, t1 + dt)
    assert 0 <= a <= b <= p.r / (y + p.r)


def test_averaged_cir_matches_mpmath(params):
    for i, ref in enumerate(H_6_17, start=1):
        assert averaged_cir(params, 6, 17, i) == pytest.approx(ref, abs=1e-10)


@pytest.mark.parametrize("i", [1, 2, 7])
def test_averaged_cir_matches_midpoint_rule(params, i):
    n = 10**6
    mid = 6 + (np.arange(n) + 0.5) * (11 / n)
    brute = np.mean(cir(params, mid, i))
    assert abs(averaged_cir(params, 6, 17, i) - brute) < 1e-8


def test_averaged_cir_bracketed(params):
    H1 = averaged_cir(params, 6, 17, 1)
    assert cir(params, 17, 1) < H1 < cir(params, 6, 1)


def test_averaged_cir_degenerate(params):
    with pytest.raises(DegenerateIntervalError):
        averaged_cir(params, 6, 6, 1)
    # point topology falls back to the point value
    table = build_cir_table(params, Topology(6, 6, (6.0,)))
    assert table.averaged[0] == pytest.approx(CUM_HIT_6, rel=1e-13)


def test_topology_validation():
    with pytest.raises(DomainError):
        Topology(6, 17, (5.0,))
    with pytest.raises(DomainError):
        Topology(6, 17, (6.0, 7.0), isi_memory=2)
    with pytest.raises(DomainError):
        Topology(6, 6, (6.0,), isi_memory=1)
    assert Topology(6, 17, (6.0, 6.0)).isi_memory == 1


def test_topology_from_d_bar():
    topo = Topology.from_d_bar(13.5)
    assert topo.y_max == 21 and topo.K == 16 and topo.isi_memory == 15
    assert topo.distances[:3] == (6.0, 7.0, 8.0)


def test_table_single_transmitter(params):
    table = build_cir_table(params, Topology(6, 6, (6.0,)))
    assert table.per_tx.shape == (1, 1)
    assert table.per_tx[0, 0] == pytest.approx(cir(params, 6, 1))


def test_table_shapes_and_bounds(params, table_17):
    assert table_17.per_tx.shape == (12, 12)
    assert table_17.averaged.shape == (12,)
    assert np.all((table_17.per_tx >= 0) & (table_17.per_tx <= 1))
    ys = np.array(table_17.topology.distances)
    assert np.all(table_17.per_tx.sum(axis=1) <= params.r / (ys + params.r))
    assert np.all(np.diff(table_17.averaged) < 0)


def test_table_average_close_to_discrete_mean(table_17):
    discrete = table_17.per_tx.mean(axis=0)
    np.testing.assert_allclose(table_17.averaged, discrete, rtol=0.01)


def test_table_is_read_only(table_17):
    with pytest.raises(ValueError):
        table_17.per_tx[0, 0] = 1.0
