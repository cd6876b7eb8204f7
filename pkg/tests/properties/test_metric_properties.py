# Irregularity Profiler - Metric Property Tests
# Propriedades das métricas de erro verificadas com hypothesis

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from irregularity.metrics import EvalReport, PredictionPair, evaluate, rank_reports

pytestmark = pytest.mark.properties

PROPERTY_SETTINGS = settings(max_examples=200, deadline=None)

pairs = st.integers(min_value=2, max_value=60).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(min_value=-1000, max_value=1000), min_size=n, max_size=n),
        st.lists(st.integers(min_value=-1000, max_value=1000), min_size=n, max_size=n),
    )
)


class TestMetricProperties:
    """Relações entre MAE, MSE, RMSE e R²"""

    @PROPERTY_SETTINGS
    @given(data=pairs)
    def test_error_relations(self, data):
        actuals, predictions = data
        assume(len(set(actuals)) > 1)

        report = evaluate(PredictionPair(actuals=actuals, predictions=predictions))

        assert report.mae <= report.rmse * (1 + 1e-12) + 1e-12
        assert report.rmse == pytest.approx(math.sqrt(report.mse))
        assert report.r2 <= 1.0

    @PROPERTY_SETTINGS
    @given(actuals=st.lists(st.integers(min_value=-1000, max_value=1000), min_size=2, max_size=60))
    def test_perfect_prediction(self, actuals):
        assume(len(set(actuals)) > 1)

        report = evaluate(PredictionPair(actuals=actuals, predictions=actuals))

        assert (report.mae, report.mse, report.rmse, report.r2) == (0.0, 0.0, 0.0, 1.0)

    @PROPERTY_SETTINGS
    @given(actuals=st.lists(st.integers(min_value=-1000, max_value=1000), min_size=2, max_size=60))
    def test_mean_predictor_scores_zero_r2(self, actuals):
        assume(len(set(actuals)) > 1)
        mean = float(np.mean(np.asarray(actuals, dtype=float)))

        report = evaluate(PredictionPair(actuals=actuals, predictions=[mean] * len(actuals)))

        assert report.r2 == pytest.approx(0.0, abs=1e-9)

    @PROPERTY_SETTINGS
    @given(
        errors=st.lists(st.integers(min_value=0, max_value=50), min_size=1, max_size=8, unique=True),
        seed=st.randoms(use_true_random=False),
    )
    def test_ranking_ignores_input_order(self, errors, seed):
        reports = [
            (f"model-{error}", EvalReport(mae=error, mse=error**2, rmse=error, r2=None, n=5)) for error in errors
        ]
        shuffled = reports[:]
        seed.shuffle(shuffled)

        assert rank_reports(shuffled) == rank_reports(reports)
        assert rank_reports(reports) == [f"model-{error}" for error in sorted(errors)]

    @PROPERTY_SETTINGS
    @given(data=pairs, scale=st.sampled_from([0.25, 2, 8, 1024]))
    def test_scale_equivariance(self, data, scale):
        """
        Teste: Reais e previstos multiplicados por c > 0
        Critério: mae e rmse escalam por c, mse por c², r2 inalterado
        """
        actuals, predictions = data
        assume(len(set(actuals)) > 1)

        base = evaluate(PredictionPair(actuals=actuals, predictions=predictions))
        scaled = evaluate(
            PredictionPair(actuals=[scale * v for v in actuals], predictions=[scale * v for v in predictions])
        )

        assert scaled.mae == pytest.approx(scale * base.mae)
        assert scaled.rmse == pytest.approx(scale * base.rmse)
        assert scaled.mse == pytest.approx(scale**2 * base.mse)
        assert scaled.r2 == pytest.approx(base.r2, abs=1e-12)
