import numpy as np
import pytest

from lobsim.book import (
    LobState,
    best_ask_index,
    best_bid_index,
    in_state_space,
    index_of,
    mid_and_spread,
    pos_of,
    price_of_index,
    validate_state,
)
from lobsim.errors import SignPatternViolation


def test_position_index_roundtrip():
    for K in (1, 2, 3, 5):
        idx = [i for i in range(-K, K + 1) if i != 0]
        assert [index_of(pos_of(i, K), K) for i in idx] == idx
        assert [pos_of(i, K) for i in idx] == list(range(2 * K))


def test_best_bid_empty_book():
    assert best_bid_index([0, 0], 1) == -2
    assert best_ask_index([0, 0], 1) == 2


def test_best_bid_ask_direct():
    assert best_bid_index([-3, 5], 1) == -1
    assert best_ask_index([-3, 5], 1) == 1
    assert best_bid_index([0, -2, 4, 7], 2) == -1
    # zero entries at the touch are skipped
    assert best_ask_index([-5, -1, 0, 6], 2) == 2


def test_validate_state_accepts_valid():
    assert validate_state([-4, 0, 0, 2], 2) is not None
    assert validate_state([0, 0], 1) is not None


def test_validate_state_rejects_interleaving_violation():
    with pytest.raises(SignPatternViolation):
        validate_state([-1, 3, -2, 4], 2)
    assert not in_state_space([-1, 3, -2, 4], 2)


def test_validate_state_reports_offending_index():
    # ask entry sitting at or below the best bid
    try:
        validate_state([3, -1], 1)
    except SignPatternViolation as exc:
        assert exc.index in (-1, 1)
    else:
        pytest.fail("expected SignPatternViolation")


def test_price_of_index():
    assert price_of_index(100.5, 1, 1.0) == 101.0
    assert price_of_index(100.5, -1, 1.0) == 100.0
    assert price_of_index(100.5, -3, 0.5) == pytest.approx(99.25)


def test_price_of_index_rejects_zero():
    with pytest.raises(ValueError):
        price_of_index(100.5, 0, 1.0)


def test_mid_and_spread_one_tick_book():
    ms = mid_and_spread([0, -2, 4, 7], 10.5, 1.0)
    assert ms.i_mid == 0
    assert ms.p_mid == 10.5
    assert ms.spread == 1.0
    assert not ms.saturated


def test_mid_and_spread_wide_book():
    ms = mid_and_spread([-1, 0, 0, 3], 10.5, 1.0)
    assert ms.i_mid == 0
    assert ms.spread == 3.0


def test_mid_and_spread_saturated():
    ms = mid_and_spread([0, 0], 10.5, 1.0)
    assert ms.i_mid == 0
    assert ms.saturated


def test_lob_state_price_grid():
    s = LobState(q=np.array([-1, 1]), p_ref_half=201, tick=1.0)
    assert s.p_ref == 100.5
    assert s.price_of(1) == 101.0
    assert s.price_of(-1) == 100.0
    with pytest.raises(ValueError):
        LobState(q=np.array([-1, 1]), p_ref_half=200)


def test_lob_state_from_price():
    s = LobState.from_price([-1, 1], 100.5, 1.0)
    assert s.p_ref_half == 201
    with pytest.raises(ValueError):
        LobState.from_price([-1, 1], 100.0, 1.0)
