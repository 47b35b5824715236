"""The rng streams must be bit-stable, independent, and uniform enough."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from runecrawl.rng import RngStream, stream_for, stream_id_for


def test_same_seed_and_stream_reproduce_exactly():
    a = RngStream(42, 7)
    b = RngStream(42, 7)
    assert [a.next_u64() for _ in range(100)] == [b.next_u64() for _ in range(100)]


def test_pinned_outputs_for_cross_platform_stability():
    # frozen reference values; a change here breaks every recorded replay
    stream = RngStream(seed=1, stream_id=2)
    assert [stream.next_u64() for _ in range(4)] == [
        3146198967091939431,
        5196188657185181188,
        5005007431957806747,
        13825384577461178096,
    ]


def test_streams_are_independent_of_draw_order():
    a1 = RngStream(5, stream_id=1)
    b1 = RngStream(5, stream_id=2)
    first = [a1.next_u64() for _ in range(10)], [b1.next_u64() for _ in range(10)]

    # interleave the draws this time
    a2 = RngStream(5, stream_id=1)
    b2 = RngStream(5, stream_id=2)
    second_a, second_b = [], []
    for _ in range(10):
        second_a.append(a2.next_u64())
        second_b.append(b2.next_u64())
    assert first == (second_a, second_b)


def test_distinct_stream_ids_differ():
    values = {RngStream(9, stream_id=sid).next_u64() for sid in range(50)}
    assert len(values) == 50


def test_counter_resume():
    # a stream restored at counter=n continues exactly where the original was
    original = RngStream(3, 4)
    for _ in range(10):
        original.next_u64()
    resumed = RngStream(3, 4, counter=10)
    assert [original.next_u64() for _ in range(5)] == \
        [resumed.next_u64() for _ in range(5)]


def test_randrange_bounds_and_determinism():
    stream = stream_for(11, "test")
    values = [stream.randrange(6) for _ in range(1000)]
    assert all(0 <= v < 6 for v in values)
    replay = stream_for(11, "test")
    assert values == [replay.randrange(6) for _ in range(1000)]


def test_uniform_in_unit_interval():
    stream = stream_for(13, "uniform")
    values = [stream.uniform() for _ in range(10000)]
    assert all(0.0 <= v < 1.0 for v in values)
    mean = sum(values) / len(values)
    assert abs(mean - 0.5) < 0.02


def test_randrange_is_roughly_uniform():
    stream = stream_for(17, "chi")
    n, k = 60000, 6
    counts = [0] * k
    for _ in range(n):
        counts[stream.randrange(k)] += 1
    expected = n / k
    chi2 = sum((c - expected) ** 2 / expected for c in counts)
    # 5 dof; 20.5 is the 0.1% quantile
    assert chi2 < 20.5, counts


def test_spawn_children_do_not_disturb_parent():
    parent = stream_for(23, "parent")
    before = [parent.next_u64() for _ in range(5)]
    parent2 = stream_for(23, "parent")
    child = parent2.spawn("child")
    child_values = [child.next_u64() for _ in range(100)]
    after = [parent2.next_u64() for _ in range(5)]
    assert before == after
    assert child_values != [parent2.next_u64() for _ in range(100)]


def test_stream_id_for_is_stable():
    assert stream_id_for("worldgen", "D:1") == stream_id_for("worldgen", "D:1")
    assert stream_id_for("worldgen", "D:1") != stream_id_for("worldgen", "D:2")
    assert stream_id_for("a", "bc") != stream_id_for("ab", "c")


@given(st.integers(min_value=0, max_value=2**64 - 1),
       st.integers(min_value=0, max_value=2**64 - 1))
@settings(max_examples=50)
def test_any_seed_stream_pair_replays(seed, stream_id):
    a = RngStream(seed, stream_id)
    b = RngStream(seed, stream_id)
    assert [a.next_u64() for _ in range(8)] == [b.next_u64() for _ in range(8)]


def test_randrange_rejects_nonpositive():
    with pytest.raises(ValueError):
        stream_for(1, "x").randrange(0)
