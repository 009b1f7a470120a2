import numpy as np
import pytest

from extremal_limit.rng import THREADS_ENV, RngSpec, block_sizes, run_blocks, stream_tag, thread_count


def test_same_spec_same_stream():
    a = RngSpec(42, 3, (1, 2)).generator().random(5)
    b = RngSpec(42, 3, (1, 2)).generator().random(5)
    assert np.array_equal(a, b)


def test_distinct_replicates_and_streams_differ():
    base = RngSpec(42, 0).generator().random(4)
    assert not np.array_equal(base, RngSpec(42, 1).generator().random(4))
    assert not np.array_equal(base, RngSpec(42, 0, (stream_tag("x"),)).generator().random(4))


@pytest.mark.parametrize("seed", [-1, 2**64, 1.5])
def test_bad_seed_rejected(seed):
    with pytest.raises(ValueError):
        RngSpec(seed)


def test_block_sizes_cover_n():
    assert block_sizes(20000, 8192) == [8192, 8192, 3616]
    assert block_sizes(0) == []


def test_results_independent_of_thread_count():
    fn = lambda gen, size: gen.standard_normal(size)
    one = np.concatenate(run_blocks(fn, 30000, 9, (5,), threads=1, block_size=4096))
    four = np.concatenate(run_blocks(fn, 30000, 9, (5,), threads=4, block_size=4096))
    assert one.tobytes() == four.tobytes()


def test_thread_env(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert thread_count() == 3
    monkeypatch.setenv(THREADS_ENV, "zero")
    with pytest.raises(ValueError):
        thread_count()
