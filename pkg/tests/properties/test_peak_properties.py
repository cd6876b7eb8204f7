# Irregularity Profiler - Peak Property Tests
# Propriedades da varredura delta/IPPD verificadas com hypothesis

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irregularity.peaks import PeakParams, billauer_peaks, ippd_peaks
from tests.conftest import make_series
from tests.oracles import (
    alternates,
    fall_points,
    greedy_chain,
    literal_scan,
    longest_alternation,
    window_points,
)

pytestmark = pytest.mark.properties

PROPERTY_SETTINGS = settings(max_examples=200, deadline=None)

# small integers with dyadic deltas keep every comparison exact
signals = st.lists(st.integers(min_value=-20, max_value=20), min_size=6, max_size=120)
deltas = st.sampled_from([0.5, 1.0, 1.5, 2.5, 4.0])
lookaheads = st.integers(min_value=1, max_value=5)


def _indices(extrema):
    return [index for index, _ in extrema]


class TestPeakProperties:
    """Equivalência com a definição literal e simetrias da varredura"""

    @PROPERTY_SETTINGS
    @given(values=signals, delta=deltas, lookahead=lookaheads)
    def test_matches_window_definition(self, values, delta, lookahead):
        peaks = ippd_peaks(make_series(values), PeakParams(delta=delta, lookahead=lookahead)).peaks
        points = window_points(values, delta, lookahead)

        assert (_indices(peaks.maxima), _indices(peaks.minima)) == greedy_chain(values, points, delta, strict=False)
        assert peaks.peak_count == longest_alternation(values, points, delta, strict=False)

    @PROPERTY_SETTINGS
    @given(values=signals, delta=deltas)
    def test_classic_scan_matches_literal_definition(self, values, delta):
        peaks = billauer_peaks(make_series(values), delta)

        assert (_indices(peaks.maxima), _indices(peaks.minima)) == literal_scan(values, delta)
        assert peaks.peak_count == longest_alternation(values, fall_points(values, delta), delta, strict=True)

    @PROPERTY_SETTINGS
    @given(values=signals, delta=deltas, lookahead=lookaheads)
    def test_extrema_alternate_and_exceed_delta(self, values, delta, lookahead):
        peaks = ippd_peaks(make_series(values), PeakParams(delta=delta, lookahead=lookahead)).peaks
        merged = sorted(peaks.maxima + peaks.minima)

        assert alternates(_indices(peaks.maxima), _indices(peaks.minima))
        for (_, a), (_, b) in zip(merged, merged[1:]):
            assert abs(a - b) >= delta
        assert 0 not in _indices(merged)
        assert all(index < len(values) - lookahead for index, _ in merged)

    @PROPERTY_SETTINGS
    @given(values=signals, delta=deltas, lookahead=lookaheads)
    def test_negation_swaps_maxima_and_minima(self, values, delta, lookahead):
        params = PeakParams(delta=delta, lookahead=lookahead)

        direct = ippd_peaks(make_series(values), params).peaks
        mirrored = ippd_peaks(make_series([-v for v in values]), params).peaks

        assert _indices(direct.maxima) == _indices(mirrored.minima)
        assert _indices(direct.minima) == _indices(mirrored.maxima)

    @PROPERTY_SETTINGS
    @given(values=signals, delta=deltas, lookahead=lookaheads, shift=st.integers(min_value=-100, max_value=100))
    def test_vertical_shift_keeps_positions(self, values, delta, lookahead, shift):
        params = PeakParams(delta=delta, lookahead=lookahead)

        base = ippd_peaks(make_series(values), params).peaks
        shifted = ippd_peaks(make_series([v + shift for v in values]), params).peaks

        assert _indices(base.maxima) == _indices(shifted.maxima)
        assert _indices(base.minima) == _indices(shifted.minima)

    @PROPERTY_SETTINGS
    @given(values=signals, low=deltas, high=deltas)
    def test_larger_delta_never_adds_peaks(self, values, low, high):
        """
        Teste: Varredura clássica com dois deltas
        Critério: O delta maior não encontra mais extremos
        """
        low, high = sorted((low, high))
        series = make_series(values)

        assert billauer_peaks(series, high).peak_count <= billauer_peaks(series, low).peak_count

    @PROPERTY_SETTINGS
    @given(values=signals, low=deltas, high=deltas, lookahead=lookaheads)
    def test_larger_delta_never_adds_windowed_peaks(self, values, low, high, lookahead):
        low, high = sorted((low, high))
        series = make_series(values)

        count_high = ippd_peaks(series, PeakParams(delta=high, lookahead=lookahead)).peak_count
        count_low = ippd_peaks(series, PeakParams(delta=low, lookahead=lookahead)).peak_count
        assert count_high <= count_low

    @PROPERTY_SETTINGS
    @given(
        values=st.lists(st.integers(min_value=-20, max_value=20), min_size=6, max_size=120),
        descending=st.booleans(),
        delta=deltas,
        lookahead=lookaheads,
    )
    def test_monotone_series_has_no_extrema(self, values, descending, delta, lookahead):
        ordered = sorted(values, reverse=descending)
        result = ippd_peaks(make_series(ordered), PeakParams(delta=delta, lookahead=lookahead))
        assert result.peak_count == 0

    @PROPERTY_SETTINGS
    @given(level=st.integers(min_value=-1000, max_value=1000), length=st.integers(min_value=6, max_value=120), delta=deltas)
    def test_constant_series_has_no_extrema(self, level, length, delta):
        assert billauer_peaks(make_series([level] * length), delta).peak_count == 0
