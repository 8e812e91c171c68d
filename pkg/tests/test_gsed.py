from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from gsedtiles import gsed, robinson, tm
from gsedtiles.dyadic import Dyadic
from gsedtiles.errors import ProtocolError, ResourceError

from conftest import compiled, tileset


def F(d):
    return d.to_fraction()


def test_series_value_examples():
    lo, hi = gsed.series_value(gsed.OutcomeSeries.constant(0), 3)
    assert lo == Dyadic(0) and hi == 0  # closed series: exact
    lo, hi = gsed.series_value(gsed.OutcomeSeries(lambda n: 0), 3)
    assert hi == gsed.tail_bound(3) == Fraction(1, 4 * 15 * 16 ** 3)
    ones = gsed.OutcomeSeries.constant(1)
    lo, hi = gsed.series_value(ones, 20)
    assert F(lo) < Fraction(1, 60) == hi
    first = gsed.OutcomeSeries.from_bits([1])
    assert gsed.exact_value(first) == Fraction(1, 64)


def test_decide_examples():
    t = gsed.ThresholdPair(Dyadic(1, 9), Dyadic(1, 6))  # a_1 = 1/512, beta_1 = 1/64
    assert gsed.decide(gsed.OutcomeSeries.constant(1), t) == gsed.NO
    assert gsed.decide(gsed.OutcomeSeries.constant(0), t) == gsed.YES
    between = gsed.OutcomeSeries.from_bits([0, 1])  # E = 1/1024
    assert gsed.decide(between, gsed.ThresholdPair(Dyadic(1, 11), Dyadic(1, 9))) == gsed.VIOLATED
    assert gsed.decide(between, gsed.ThresholdPair(Dyadic(1, 11), Dyadic(1, 10))) == gsed.NO
    with pytest.raises(ValueError):
        gsed.ThresholdPair(Dyadic(1, 6), Dyadic(1, 6))


def test_decide_from_machines():
    idx = tm.InstanceIndexer(2)
    t = gsed.thresholds_for(1, [])
    rej = gsed.OutcomeSeries.from_machine(tm.always_reject(), idx)
    acc = gsed.OutcomeSeries.from_machine(tm.always_accept(), idx)
    # i_1 = 0 below n0, so the first nonzero term sits at n = 2
    assert gsed.decide(rej, gsed.thresholds_for(2, [0])) == gsed.NO
    assert gsed.decide(acc, t) == gsed.YES


def test_decide_budget():
    s = gsed.OutcomeSeries(lambda n: 1, budget=3)
    with pytest.raises(ResourceError):
        s[10]
    between = gsed.OutcomeSeries(lambda n: 1 if n == 1 else 0)
    exact = Dyadic(1, 6)
    with pytest.raises(ResourceError):
        gsed.decide(between, gsed.ThresholdPair(exact, exact + Dyadic(1, 200)), max_depth=5)


def test_thresholds_examples():
    t = gsed.thresholds_for(1, [])
    assert F(t.beta) == Fraction(1, 64) and F(t.alpha) == Fraction(1, 512)
    assert F(t.alpha) > Fraction(1, 960)
    t2 = gsed.thresholds_for(2, [1])
    assert F(t2.beta) == Fraction(1, 4) * (Fraction(1, 16) + Fraction(1, 256))
    with pytest.raises(ValueError):
        gsed.thresholds_for(2, [])


@given(st.lists(st.integers(0, 1), min_size=0, max_size=11))
def test_surrogate_between_alpha_and_beta(prefix):
    m = len(prefix) + 1
    t = gsed.thresholds_for(m, prefix)
    assert gsed.alpha_exact(m, prefix) < F(t.alpha) < F(t.beta)
    assert max(t.alpha.exponent, t.beta.exponent) == 4 * m + 5


def test_extract_examples():
    def oracle_for(s):
        return lambda t: gsed.decide(s, t)

    tr = gsed.extract(5, oracle_for(gsed.OutcomeSeries.from_bits([1, 0, 1, 1, 0, 1, 1], closed=False)))
    assert tr.recovered == [1, 0, 1, 1, 0] and len(tr.queries) == 5
    assert gsed.extract(4, oracle_for(gsed.OutcomeSeries.constant(0))).recovered == [0, 0, 0, 0]
    assert gsed.extract(0, oracle_for(gsed.OutcomeSeries.constant(0))).recovered == []
    with pytest.raises(ProtocolError):
        gsed.extract(1, lambda t: gsed.VIOLATED)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=10), st.booleans())
def test_extract_round_trip(bits, closed):
    s = gsed.OutcomeSeries.from_bits(bits, closed=closed)
    assert gsed.extract(len(bits), lambda t: gsed.decide(s, t)).recovered == bits


@pytest.mark.parametrize("name", ["parity", "accept", "reject", "branch"])
def test_extract_matches_direct_simulation(name):
    m = tm.TOY_MACHINES[name]()
    idx = tm.InstanceIndexer(2)
    s = gsed.OutcomeSeries.from_machine(m, idx)
    want = [0 if n < 2 else int(not tm.run_reference(m, idx.string(n), 4096).accepted) for n in range(1, 9)]
    assert gsed.extract(8, lambda t: gsed.decide(s, t)).recovered == want


@pytest.mark.parametrize("name", ["accept", "reject", "parity"])
def test_square_series_matches_direct_blank_runs(name):
    cm = compiled(name, 1)
    s = gsed.OutcomeSeries.from_squares(cm, tileset(robinson.LAYERS, name))
    for n in (1, 2):
        run = tm.run_reference(cm.spec, "", 2 ** n, tape_width=2 ** n + 1)
        assert s[n] == (0 if run.accepted else 1)


def test_fgsed_examples():
    ones = gsed.OutcomeSeries.constant(1)
    assert abs(F(gsed.fgsed(ones, Fraction(1, 60))) - 0) <= Fraction(1, 60)
    s = gsed.OutcomeSeries.from_bits([1, 1, 0, 1], closed=False)
    v = gsed.fgsed(s, Dyadic(1, 20))
    assert v == gsed.partial_sum(s, 5)
    assert gsed.fgsed(s, 1) == gsed.partial_sum(s, 1)
    with pytest.raises(ValueError):
        gsed.fgsed(s, 0)
    with pytest.raises(ResourceError):
        gsed.fgsed(gsed.OutcomeSeries(lambda n: 1, budget=4), Fraction(1, 2 ** 200))


@given(st.lists(st.integers(0, 1), max_size=8), st.integers(4, 60))
def test_fgsed_within_epsilon(bits, k):
    s = gsed.OutcomeSeries.from_bits(bits)
    eps = Dyadic(1, k)
    assert abs(F(gsed.fgsed(s, eps)) - gsed.exact_value(s)) <= F(eps)


def test_monotone_decide():
    s = gsed.OutcomeSeries.from_bits([0, 1, 1])
    t = gsed.thresholds_for(2, [0])
    assert gsed.decide(s, t) == gsed.NO
    assert gsed.decide(s, gsed.ThresholdPair(t.alpha, t.alpha + Dyadic(1, 40))) == gsed.NO


def test_concurrent_memo():
    calls = []

    def provider(n):
        calls.append(n)
        return n % 2

    s = gsed.OutcomeSeries(provider)
    with ThreadPoolExecutor(8) as ex:
        vals = list(ex.map(lambda n: s[n], [1, 2, 3] * 20))
    assert vals == [1, 0, 1] * 20
    assert set(calls) == {1, 2, 3}
