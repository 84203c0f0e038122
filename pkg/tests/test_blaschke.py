import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nymanlab.blaschke import (
    LOG_SPACE_THRESHOLD,
    OffLineZero,
    ZeroMultiset,
    b_at_one,
    blaschke_factor,
    blaschke_product,
    bsy_sum,
    load_multiset,
    parse_inline_zeros,
)
from nymanlab.errors import InputParseError, PoleError, PreconditionError

zeros = st.builds(complex, st.floats(0.52, 3.0), st.floats(-30, 30)).filter(lambda r: r != 1)


def test_hand_values():
    assert blaschke_product(ZeroMultiset.of(0.75), 1) == pytest.approx(1 / 3, abs=1e-15)
    assert b_at_one(ZeroMultiset.of(0.6)) == pytest.approx(2 / 3, abs=1e-15)
    assert b_at_one(ZeroMultiset.of((0.6, 2))) == pytest.approx(4 / 9, abs=1e-15)
    assert b_at_one(ZeroMultiset.of(0.6, 0.6)) == pytest.approx(4 / 9, abs=1e-15)
    assert bsy_sum(ZeroMultiset.of(0.75)) == pytest.approx(math.log(3), abs=1e-15)
    # B(1) for 5/7: |(1 - 5/7)/(5/7)| = 2/5.
    assert b_at_one(ZeroMultiset.of(5 / 7)) == pytest.approx(2 / 5, abs=1e-15)


def test_factor_at_one_is_positive_real():
    z = OffLineZero(0.7 + 3j)
    v = blaschke_factor(z, 1)
    assert v.imag == pytest.approx(0, abs=1e-15)
    assert v.real == pytest.approx(abs((1 - z.rho) / z.rho), abs=1e-15)


def test_empty_multiset():
    ms = ZeroMultiset()
    assert blaschke_product(ms, 2 + 1j) == 1
    assert b_at_one(ms) == 1.0 and bsy_sum(ms) == 0.0
    assert not ms and len(ms) == 0


def test_validation_and_merging():
    with pytest.raises(PreconditionError):
        OffLineZero(0.5 + 1j)
    with pytest.raises(PreconditionError):
        OffLineZero(0.7, 0)
    with pytest.raises(PreconditionError):
        OffLineZero(complex(math.nan, 1))
    ms = ZeroMultiset.of(0.7, (0.7, 2), 0.8)
    assert {z.rho.real: z.multiplicity for z in ms.zeros} == {0.7: 3, 0.8: 1}
    assert ms.total_multiplicity == 4
    assert ms.add(0.8).total_multiplicity == 5


def test_pole_reported():
    ms = ZeroMultiset.of(0.75 + 2j)
    with pytest.raises(PoleError) as info:
        blaschke_product(ms, 0.25 + 2j)
    assert "0.75" in str(info.value)


@settings(max_examples=60)
@given(st.lists(zeros, min_size=1, max_size=5), st.floats(-200, 200))
def test_unit_modulus_on_line(rs, tau):
    ms = ZeroMultiset(tuple(OffLineZero(r) for r in rs))
    assert abs(blaschke_product(ms, complex(0.5, tau))) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=60)
@given(st.lists(zeros, min_size=1, max_size=5), st.floats(0.51, 5), st.floats(-40, 40))
def test_contraction_inside(rs, sigma, t):
    ms = ZeroMultiset(tuple(OffLineZero(r) for r in rs))
    assert abs(blaschke_product(ms, complex(sigma, t))) <= 1 + 1e-12


@settings(max_examples=40)
@given(st.lists(zeros, min_size=1, max_size=6))
def test_b_at_one_and_bsy_sum_agree(rs):
    ms = ZeroMultiset(tuple(OffLineZero(r) for r in rs))
    assert b_at_one(ms) == pytest.approx(math.exp(-bsy_sum(ms)), rel=1e-12)
    assert blaschke_product(ms, 1) == pytest.approx(b_at_one(ms), rel=1e-12, abs=1e-300)


def test_vanishes_at_zeros():
    ms = ZeroMultiset.of(0.8 + 5j, (0.6 - 1j, 2))
    assert blaschke_product(ms, 0.8 + 5j) == 0
    assert abs(blaschke_product(ms, 0.6 - 1j + 1e-4)) < 1e-6


def test_log_space_matches_direct_product():
    rng = np.random.default_rng(7)
    rs = [complex(0.55 + rng.random(), 40 * rng.standard_normal()) for _ in range(LOG_SPACE_THRESHOLD + 8)]
    big = ZeroMultiset(tuple(OffLineZero(r) for r in rs))
    s = np.array([2 + 1j, 0.9 - 3j, 0.5 + 7j])
    direct = np.ones(3, dtype=complex)
    for r in rs:
        direct *= blaschke_factor(OffLineZero(r), s)
    assert np.allclose(blaschke_product(big, s), direct, rtol=1e-10, atol=1e-300)
    assert b_at_one(big) == pytest.approx(abs(np.prod([(1 - r) / r for r in rs])), rel=1e-10)


def test_rho_one_limit():
    ms = ZeroMultiset.of(1.0)
    assert b_at_one(ms) == 0.0
    assert abs(blaschke_product(ms, 0.5 + 3j)) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(PreconditionError):
        bsy_sum(ms)


def test_conjugate_closed():
    assert ZeroMultiset.of(0.7 + 1j, 0.7 - 1j).is_conjugate_closed()
    assert ZeroMultiset.of(0.75).is_conjugate_closed()
    assert not ZeroMultiset.of(0.7 + 1j).is_conjugate_closed()


def test_inline_parser():
    ms = parse_inline_zeros("0.75:1, 0.6+2.5i:2 0.6-2.5i")
    got = {z.rho: z.multiplicity for z in ms.zeros}
    assert got == {0.75: 1, 0.6 + 2.5j: 2, 0.6 - 2.5j: 1}
    with pytest.raises(InputParseError):
        parse_inline_zeros("0.75:x")
    with pytest.raises(PreconditionError):
        parse_inline_zeros("0.25")


def test_json_loader(tmp_path):
    p = tmp_path / "ms.json"
    p.write_text(json.dumps([{"re": 0.75, "im": 0, "multiplicity": 1}, {"re": 0.6, "im": 2}]))
    ms = load_multiset(p)
    assert ms.total_multiplicity == 2
    assert load_multiset(p).to_json()[0] == {"re": 0.75, "im": 0.0, "multiplicity": 1}
    p.write_text("{not json")
    with pytest.raises(InputParseError):
        load_multiset(p)
    p.write_text(json.dumps([{"im": 1}]))
    with pytest.raises(InputParseError):
        load_multiset(p)
