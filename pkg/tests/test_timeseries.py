import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rumor_ts import (
    DataError,
    IntervalConfig,
    ReactionCountVectorizer,
    TimeSeriesDataset,
    build_matrix,
    conversation_length,
    interval_count,
    vectorize,
)
from rumor_ts.errors import ConfigError
from rumor_ts.synthetic import generate_synthetic_corpus
from rumor_ts.timeseries import (
    dataset_fingerprint,
    load_cache,
    load_csv,
    save_cache,
    save_csv,
)

from conftest import bucket_by_scan, make_conv

T120 = IntervalConfig(120)


conversation_strategy = st.builds(
    lambda source, offsets: make_conv([source + o for o in offsets], source=source),
    st.integers(min_value=1, max_value=10**6),
    st.lists(st.integers(min_value=0, max_value=5000), max_size=50),
)
interval_strategy = st.sampled_from([7, 60, 120, 300, 600, 1800, 3600])


class TestConversationLength:
    def test_spans_two_intervals(self):
        conv = make_conv([1030, 1090, 1200])
        assert conversation_length(conv, T120) == 2

    def test_empty_reactions(self):
        assert conversation_length(make_conv([]), T120) == 0

    def test_exact_boundary(self):
        assert conversation_length(make_conv([1120]), T120) == 1

    def test_reaction_at_source_instant(self):
        assert conversation_length(make_conv([1000]), T120) == 0


class TestIntervalCount:
    def test_first_interval(self):
        conv = make_conv([1030, 1090, 1200])
        assert interval_count(conv, T120, 1) == 2

    def test_second_interval(self):
        conv = make_conv([1030, 1090, 1200])
        assert interval_count(conv, T120, 2) == 1

    def test_boundary_belongs_to_lower_interval(self):
        conv = make_conv([1120, 1200])
        assert interval_count(conv, T120, 1) == 1
        assert interval_count(conv, T120, 2) == 1

    def test_out_of_range_index(self):
        conv = make_conv([1030])
        with pytest.raises(IndexError):
            interval_count(conv, T120, 2)
        with pytest.raises(IndexError):
            interval_count(conv, T120, 0)


class TestVectorize:
    def test_basic(self):
        assert vectorize(make_conv([1030, 1090, 1200]), T120).tolist() == [2, 1]

    def test_empty(self):
        assert vectorize(make_conv([]), T120).tolist() == []

    def test_leading_zero_bucket(self):
        conv = make_conv([1000 + 3601])
        assert vectorize(conv, IntervalConfig(3600)).tolist() == [0, 1]

    def test_source_instant_uncounted(self):
        conv = make_conv([1000, 1030])
        assert vectorize(conv, T120).sum() == 1

    @settings(max_examples=200)
    @given(conversation_strategy, interval_strategy)
    def test_matches_scan_oracle(self, conv, t):
        got = vectorize(conv, IntervalConfig(t)).tolist()
        assert got == bucket_by_scan(conv.source_time, conv.reaction_times, t)

    @settings(max_examples=100)
    @given(conversation_strategy, interval_strategy)
    def test_sum_counts_retained_reactions(self, conv, t):
        total = vectorize(conv, IntervalConfig(t)).sum()
        assert total == sum(1 for x in conv.reaction_times if x > conv.source_time)

    @settings(max_examples=100)
    @given(conversation_strategy, interval_strategy)
    def test_halving_interval_never_shortens(self, conv, t):
        long_v = vectorize(conv, IntervalConfig(2 * t))
        short_v = vectorize(conv, IntervalConfig(t))
        assert len(short_v) >= len(long_v)
        assert short_v.sum() == long_v.sum()

    @settings(max_examples=100)
    @given(conversation_strategy, interval_strategy)
    def test_length_bounds(self, conv, t):
        kept = [x for x in conv.reaction_times if x > conv.source_time]
        n = conversation_length(conv, IntervalConfig(t))
        if kept:
            span = max(kept) - conv.source_time
            assert n * t >= span > (n - 1) * t
        else:
            assert n == 0


class TestBuildMatrix:
    def test_padding(self):
        convs = [make_conv([1030, 1090, 1200], cid="a"),
                 make_conv([1010, 1020, 1030, 1040], cid="b")]
        ds = build_matrix(convs, T120)
        assert ds.matrix.tolist() == [[2.0, 1.0], [4.0, 0.0]]
        assert ds.seq_len == 2
        assert ds.ids == ("a", "b")

    def test_single_row(self):
        ds = build_matrix([make_conv([1010, 1250, 1300])], T120)
        assert ds.matrix.shape == (1, 3)

    def test_degenerate_dataset(self):
        with pytest.raises(DataError, match="degenerate"):
            build_matrix([make_conv([]), make_conv([], cid="c2")], T120)

    def test_empty_input(self):
        with pytest.raises(DataError):
            build_matrix([], T120)

    def test_padding_preserves_prefix(self, rng):
        convs = [make_conv(sorted(rng.integers(1001, 9000, size=rng.integers(0, 30)).tolist()),
                           cid=f"c{i}") for i in range(40)]
        if all(len(c.reaction_times) == 0 for c in convs):
            convs.append(make_conv([2000], cid="extra"))
        ds = build_matrix(convs, T120)
        for i, conv in enumerate(convs):
            v = vectorize(conv, T120)
            assert np.array_equal(ds.matrix[i, :len(v)], v)
            assert not ds.matrix[i, len(v):].any()

    def test_row_sums_match_oracle(self, rng):
        raw = generate_synthetic_corpus(n_events=2, conversations_per_event=50, seed=3)
        ds = build_matrix(list(raw.conversations), T120)
        for i, conv in enumerate(raw.conversations):
            oracle = bucket_by_scan(conv.source_time, conv.reaction_times, 120)
            assert ds.matrix[i].sum() == sum(oracle)


class TestIntervalConfig:
    def test_from_minutes(self):
        assert IntervalConfig.from_minutes(2).interval_seconds == 120

    def test_rejects_nonpositive(self):
        with pytest.raises(ConfigError):
            IntervalConfig(0)


class TestVectorizerEstimator:
    def test_fit_transform_matches_build_matrix(self):
        convs = [make_conv([1030, 1090, 1200], cid="a"),
                 make_conv([1010], cid="b")]
        vec = ReactionCountVectorizer(interval_seconds=120).fit(convs)
        assert vec.seq_len_ == 2
        assert np.array_equal(vec.transform(convs), build_matrix(convs, T120).matrix)

    def test_get_params_round_trip(self):
        vec = ReactionCountVectorizer(interval_seconds=300)
        assert vec.get_params() == {"interval_seconds": 300}

    def test_transform_rejects_longer_conversation(self):
        vec = ReactionCountVectorizer(interval_seconds=120).fit([make_conv([1030])])
        with pytest.raises(ValueError, match="fitted width"):
            vec.transform([make_conv([9000])])


class TestSerialization:
    def _dataset(self):
        raw = generate_synthetic_corpus(n_events=1, conversations_per_event=8, seed=4)
        return build_matrix(list(raw.conversations), T120), raw

    def test_csv_round_trip(self, tmp_path):
        ds, _ = self._dataset()
        path = tmp_path / "counts.csv"
        save_csv(ds, path)
        loaded = load_csv(path)
        assert np.array_equal(loaded.matrix, ds.matrix)
        assert loaded.ids == ds.ids
        assert loaded.events == ds.events
        assert np.array_equal(loaded.labels, ds.labels)

    def test_cache_round_trip(self, tmp_path):
        ds, raw = self._dataset()
        fp = dataset_fingerprint(raw)
        save_cache(ds, tmp_path, fp, T120)
        loaded = load_cache(tmp_path, fp, T120)
        assert loaded is not None
        assert np.array_equal(loaded.matrix, ds.matrix)
        assert load_cache(tmp_path, fp, IntervalConfig(300)) is None

    def test_fingerprint_tracks_content(self):
        a = generate_synthetic_corpus(n_events=1, conversations_per_event=4, seed=1)
        b = generate_synthetic_corpus(n_events=1, conversations_per_event=4, seed=2)
        assert dataset_fingerprint(a) == dataset_fingerprint(a)
        assert dataset_fingerprint(a) != dataset_fingerprint(b)


class TestDatasetContainer:
    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            TimeSeriesDataset(matrix=np.zeros((2, 3)), labels=np.array([0]),
                              events=("e", "e"), ids=("a", "b"))

    def test_select_boolean_mask(self):
        ds = TimeSeriesDataset(matrix=np.arange(6.0).reshape(3, 2),
                               labels=np.array([0, 1, 0]),
                               events=("e1", "e2", "e1"), ids=("a", "b", "c"))
        sub = ds.select(np.array([True, False, True]))
        assert sub.ids == ("a", "c")
        assert sub.matrix.tolist() == [[0.0, 1.0], [4.0, 5.0]]
