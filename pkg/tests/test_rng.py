from __future__ import annotations

import random

import pytest

from normgame.rng import GameRng


def test_same_seed_same_stream():
    a = GameRng(42)
    b = GameRng(42)
    assert [a.uniform() for _ in range(50)] == [b.uniform() for _ in range(50)]


def test_different_seeds_diverge():
    a = GameRng(1)
    b = GameRng(2)
    assert [a.uniform() for _ in range(10)] != [b.uniform() for _ in range(10)]


def test_draw_counter_tracks_every_draw():
    rng = GameRng(7)
    assert rng.draws == 0
    rng.uniform()
    rng.pick_weighted(["x", "y"], [1.0, 1.0])
    rng.pick_distinct(["a", "b", "c"], 2)
    assert rng.draws == 1 + 1 + 2


def test_fast_forward_resumes_stream():
    rng = GameRng(99)
    for _ in range(17):
        rng.uniform()
    resumed = GameRng(99, draws=17)
    assert resumed.draws == 17
    assert [rng.uniform() for _ in range(5)] == [resumed.uniform() for _ in range(5)]


def test_state_round_trips():
    rng = GameRng(5)
    for _ in range(9):
        rng.uniform()
    seed, draws = rng.state()
    twin = GameRng(seed, draws)
    assert twin.state() == rng.state()
    assert twin.uniform() == rng.uniform()


def test_copy_is_independent():
    rng = GameRng(3)
    rng.uniform()
    twin = rng.copy()
    assert twin == rng
    value = rng.uniform()
    assert twin != rng
    assert twin.uniform() == value


def test_copy_is_cheap_after_many_draws():
    # copy must not replay the whole history draw by draw
    rng = GameRng(4)
    for _ in range(20000):
        rng.uniform()
    import time

    start = time.perf_counter()
    for _ in range(100):
        rng.copy()
    assert time.perf_counter() - start < 0.5


def test_pick_weighted_counts_one_draw_and_respects_weights():
    rng = GameRng(11)
    before = rng.draws
    rng.pick_weighted(["a", "b"], [1.0, 3.0])
    assert rng.draws == before + 1

    counts = {"a": 0, "b": 0}
    rng = GameRng(12)
    for _ in range(20000):
        counts[rng.pick_weighted(["a", "b"], [1.0, 3.0])] += 1
    share = counts["b"] / 20000
    assert 0.72 < share < 0.78


def test_pick_weighted_zero_weight_never_chosen():
    rng = GameRng(13)
    for _ in range(2000):
        assert rng.pick_weighted(["a", "b", "c"], [1.0, 0.0, 2.0]) != "b"


def test_pick_weighted_rejects_bad_input():
    rng = GameRng(1)
    with pytest.raises(ValueError):
        rng.pick_weighted([], [])
    with pytest.raises(ValueError):
        rng.pick_weighted(["a"], [1.0, 2.0])
    with pytest.raises(ValueError):
        rng.pick_weighted(["a", "b"], [0.0, 0.0])


def test_pick_distinct_draws_exactly_k_and_returns_distinct():
    check = random.Random(2024)
    for trial in range(200):
        seed = check.randrange(10**6)
        pool = [f"item{i}" for i in range(check.randint(1, 8))]
        k = check.randint(0, len(pool))
        rng = GameRng(seed)
        before = rng.draws
        picked = rng.pick_distinct(pool, k)
        assert rng.draws == before + k
        assert len(picked) == k
        assert len(set(picked)) == k
        assert set(picked) <= set(pool)


def test_pick_distinct_full_pool_is_permutation():
    rng = GameRng(8)
    pool = list(range(6))
    assert sorted(rng.pick_distinct(pool, 6)) == pool


def test_pick_distinct_rejects_overdraw():
    rng = GameRng(1)
    with pytest.raises(ValueError):
        rng.pick_distinct([1, 2], 3)


def test_equality_is_positional_not_historical():
    # two streams at the same seed and draw count are interchangeable
    a = GameRng(77)
    a.pick_weighted(["x", "y"], [1, 1])
    a.uniform()
    b = GameRng(77)
    b.uniform()
    b.uniform()
    assert a == b
    assert a.uniform() == b.uniform()
