import random

import pytest

from fittsim.apps import (FAKE_DETECTED, AttackSpec, Client, ConsumerConfig, Producer,
                          ProducerConfig, attacker_next_name, consumer_next_name)
from fittsim.engine import Simulator, US_PER_S, connect, seconds
from fittsim.metrics import Recorder
from fittsim.names import Data, FittNackPayload, Interest, Nack, Reason, parse_name

from conftest import Sink

P = parse_name("/univ1/cs/server/email")


def producer(**kw):
    return Producer("server", Simulator(), Recorder(100.0), ProducerConfig(P, **kw))


def client(*flows, seed=1):
    return Client("c", Simulator(), Recorder(100.0), list(flows), seed=seed)


# ------------------------------------------------------------------ producer


def test_static_name_answered_with_freshness():
    out = producer().producer_on_interest(Interest(P.append("7"), 1), 0)
    assert isinstance(out, Data) and out.freshness_ms == 4000


def test_random_suffix_is_fake():
    p = producer()
    assert p.producer_on_interest(Interest(P.append("zx9Qk"), 1), 0) == FAKE_DETECTED


@pytest.mark.parametrize("suffix", ["500", "007", "-1", "1.5"])
def test_names_outside_static_universe_are_fake(suffix):
    assert producer().producer_on_interest(Interest(P.append(suffix), 1), 0) == FAKE_DETECTED


def test_dynamic_interest_gets_uncacheable_data():
    out = producer().producer_on_interest(Interest(P.append("c-1"), 1, dynamic_flag=True), 0)
    assert isinstance(out, Data) and out.freshness_ms == 0


def test_foreign_prefix_counts_routing_error():
    p = producer()
    assert p.producer_on_interest(Interest(parse_name("/other/1"), 1), 0) is None
    assert p.routing_errors == 1


def _flood(p, n, make, t_end=US_PER_S):
    for k in range(n):
        p.producer_on_interest(make(k), k * t_end // n)


def test_valid_overload_reports_capacity():
    p = producer(capacity=1500.0)
    _flood(p, 6480, lambda k: Interest(P.append(f"d-{k}"), k, dynamic_flag=True))
    (n,) = p.producer_tick(US_PER_S)
    assert n.payload.rsn is Reason.VALID and n.payload.capacity == 1500.0


def test_fake_window_reports_collected_names():
    p = producer()
    _flood(p, 6000, lambda k: Interest(P.append(f"fake{k}"), k))
    (n,) = p.producer_tick(US_PER_S)
    assert n.payload.rsn is Reason.FAKE
    assert len(n.payload.fake_list) == 6000
    # the window resets after each report
    assert p.producer_tick(US_PER_S + 1) == []


def test_mixed_attack_reports_both():
    p = producer(capacity=1500.0)
    _flood(p, 3000, lambda k: Interest(P.append(f"fake{k}"), k))
    _flood(p, 3000, lambda k: Interest(P.append(f"d-{k}"), 10**6 + k, dynamic_flag=True))
    out = p.producer_tick(US_PER_S)
    assert sorted(n.payload.rsn.value for n in out) == ["FAKE", "VALID"]


def test_quiet_window_no_report():
    p = producer(capacity=1500.0)
    _flood(p, 1000, lambda k: Interest(P.append(f"d-{k}"), k, dynamic_flag=True))
    assert p.producer_tick(US_PER_S) == []


def test_alarm_refresh_then_expiry():
    p = producer(capacity=10.0, alarm_hold=3.0)
    _flood(p, 50, lambda k: Interest(P.append(f"d-{k}"), k, dynamic_flag=True))
    assert len(p.producer_tick(seconds(1))) == 1
    # attack has stopped: the last report is repeated for alarm_hold seconds
    assert len(p.producer_tick(seconds(2))) == 1
    assert len(p.producer_tick(seconds(4))) == 1
    assert p.producer_tick(seconds(5)) == []


def test_producer_rejects_bad_capacity():
    with pytest.raises(ValueError):
        ProducerConfig(P, capacity=0)


# ------------------------------------------------------------------ consumer


def _nack(rsn, cap=None):
    if rsn is Reason.VALID:
        return Nack(FittNackPayload(rsn, P, capacity=cap))
    return Nack(FittNackPayload(rsn, P, fake_list=(P.append("zz"),)))


@pytest.mark.parametrize("cap,expected", [(30.0, 30.0), (125.0, 40.0)])
def test_consumer_min_rule(cap, expected):
    c = client(ConsumerConfig(P, 40.0))
    c.consumer_on_nack(_nack(Reason.VALID, cap), 0)
    assert c.flows[0].rate(0) == expected


def test_consumer_ignores_fake_report():
    c = client(ConsumerConfig(P, 40.0))
    c.consumer_on_nack(_nack(Reason.FAKE), 0)
    assert c.flows[0].rate(0) == 40.0


def test_consumer_ignores_other_prefix():
    c = client(ConsumerConfig(parse_name("/univ2/service/email"), 40.0))
    c.consumer_on_nack(_nack(Reason.VALID, 5.0), 0)
    assert c.flows[0].rate(0) == 40.0


def test_attacker_and_noncompliant_ignore_nacks():
    c = client(AttackSpec("I3", 100.0, P), ConsumerConfig(P, 100.0, compliant=False))
    c.consumer_on_nack(_nack(Reason.VALID, 1.0), 0)
    assert [f.rate(0) for f in c.flows] == [100.0, 100.0]


def test_ramp_back_after_throttle_lifted():
    c = client(ConsumerConfig(P, 40.0))
    c.consumer_on_nack(_nack(Reason.VALID, 10.0), 0)
    c.on_throttle_lifted(P, seconds(1))
    assert c.flows[0].rate(seconds(2.5)) == pytest.approx(25.0)
    assert c.flows[0].rate(seconds(4)) == 40.0


def test_client_send_rate_and_jitter():
    sim = Simulator()
    rec = Recorder(10.0)
    c = Client("c", sim, rec, [ConsumerConfig(P, 40.0)], seed=3)
    connect(c, Sink("edge", sim))
    c.start()
    sim.run_until(seconds(10))
    sent = rec.series_values("c", str(P), "sent")
    assert all(36 <= v <= 44 for v in sent)


@pytest.mark.parametrize("bad", [
    lambda: ConsumerConfig(P, 0.0),
    lambda: ConsumerConfig(P, 1.0, traffic_class="I2"),
    lambda: AttackSpec("I4", 1.0, P),
    lambda: AttackSpec("I1", -1.0, P),
])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        bad()


# ------------------------------------------------------------------ attack name streams


def test_i1_names_repeat_like_coupon_collector():
    spec = AttackSpec("I1", 100.0, P, name_universe=500)
    rng = random.Random("1/atk0/0")
    names = [attacker_next_name(spec, rng, "atk0", k).name for k in range(6000)]
    assert len(set(names)) <= 500
    assert len(set(names)) < len(names)
    # oracle: expected distinct after m uniform draws over N is N(1-(1-1/N)^m)
    trials = []
    for s in range(20):
        r = random.Random(s)
        trials.append(len({attacker_next_name(spec, r, "a", k).name for k in range(500)}))
    expected = 500 * (1 - (1 - 1 / 500) ** 500)
    assert abs(sum(trials) / len(trials) - expected) <= 0.02 * expected


def test_i2_names_unique_across_sixty_attackers():
    spec = AttackSpec("I2", 100.0, P)
    seen = set()
    total = 0
    for i in range(60):
        rng = random.Random(f"1/atk{i}/0")
        for k in range(1700):
            seen.add(attacker_next_name(spec, rng, f"atk{i}", k).name)
            total += 1
    assert len(seen) == total


def test_i2_names_are_never_static():
    p = producer()
    rng = random.Random(9)
    spec = AttackSpec("I2", 100.0, P)
    for k in range(2000):
        assert p.producer_on_interest(attacker_next_name(spec, rng, "a", k), 0) == FAKE_DETECTED


def test_mixed_is_half_fake_half_valid():
    p = producer()
    spec = AttackSpec("MIXED", 100.0, P)
    rng = random.Random(4)
    kinds = [p.producer_on_interest(attacker_next_name(spec, rng, "a", k), 0) for k in range(1000)]
    fakes = sum(k == FAKE_DETECTED for k in kinds)
    assert fakes == 500


def test_i3_consumer_names_unique_and_dynamic():
    cfg = ConsumerConfig(P, 40.0)
    rng = random.Random(0)
    interests = [consumer_next_name(cfg, rng, "legit0", k) for k in range(100)]
    assert all(i.dynamic_flag for i in interests)
    assert len({i.name for i in interests}) == 100
