"""Stream RNG: determinism, independence, and stable stream naming."""

import numpy as np

from mzembed.rng import stream_rng


class TestStreamRng:
    def test_same_stream_is_reproducible(self):
        a = stream_rng(7, "dropout", 3).random(100)
        b = stream_rng(7, "dropout", 3).random(100)
        assert np.array_equal(a, b)

    def test_distinct_streams_differ(self):
        base = stream_rng(7, "dropout", 3).random(50)
        for other in [
            stream_rng(8, "dropout", 3),
            stream_rng(7, "pairs", 3),
            stream_rng(7, "dropout", 4),
            stream_rng(7, "dropout"),
        ]:
            assert not np.array_equal(base, other.random(50))

    def test_named_and_numbered_streams_coexist(self):
        named = stream_rng(0, "init")
        numbered = stream_rng(0, 1)
        # "init" maps to tag 1 by design; the two spellings agree.
        assert np.array_equal(named.random(10), numbered.random(10))

    def test_uncommon_names_are_stable(self):
        a = stream_rng(0, "known").random(10)
        b = stream_rng(0, "known").random(10)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, stream_rng(0, "novel").random(10))

    def test_negative_and_large_seeds_are_accepted(self):
        stream_rng(-1, "init").random(3)
        stream_rng(2**70, "init").random(3)

    def test_is_philox(self):
        assert isinstance(stream_rng(0).bit_generator, np.random.Philox)
