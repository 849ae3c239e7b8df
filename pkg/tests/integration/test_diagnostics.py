"""
Integration Tests for trajectory diagnostics

Tests focused on specific functionality:
1. Band aggregation per N
2. Captured series and their columns
3. Convergence of the normalized indexes
"""

import numpy as np
import pandas as pd
import pytest

from anchored_bai.harness import (
    ExperimentConfig,
    band_frame,
    diag_capture,
    normalized_index_spread,
    read_header,
    write_diag,
)
from anchored_bai.utils.errors import ConfigError


@pytest.fixture
def config():
    return ExperimentConfig(
        name="diag",
        means=[10.0, 8.0, 7.0, 6.5],
        runs=20,
        seed=1,
        horizon=2000,
        trajectory_stride=50,
    )


class TestBandFrame:
    def test_mean_and_two_sigma(self):
        raw = pd.DataFrame({"N": [10, 10, 20, 20], "anchor": [1.0, 3.0, 0.5, 0.5]})
        out = band_frame(raw, ["anchor"])
        assert list(out.columns) == ["N", "anchor_mean", "anchor_lo", "anchor_hi"]
        assert out["N"].tolist() == [10, 20]
        std = np.std([1.0, 3.0], ddof=1)
        assert out["anchor_mean"].tolist() == [2.0, 0.5]
        assert out["anchor_lo"].iloc[0] == pytest.approx(2.0 - 2 * std)
        assert out["anchor_hi"].iloc[1] == 0.5

    def test_single_run_has_zero_width(self):
        raw = pd.DataFrame({"N": [10, 20], "anchor": [1.0, 2.0]})
        out = band_frame(raw, ["anchor"])
        assert (out["anchor_lo"] == out["anchor_mean"]).all()


class TestDiagCapture:
    def test_series_columns(self, config):
        capture = diag_capture(config, workers=1)
        assert list(capture.frames) == ["AT2"]
        anchor = capture.series("AT2", "anchor")
        assert anchor["N"].tolist() == list(range(50, 2001, 50))
        indexes = capture.series("AT2", "indexes")
        assert [c for c in indexes.columns if c.endswith("_mean")] == [
            "index_1_mean",
            "index_2_mean",
            "index_3_mean",
        ]
        proportions = capture.series("AT2", "proportions")
        means = proportions[[c for c in proportions.columns if c.endswith("_mean")]]
        np.testing.assert_allclose(means.sum(axis=1), 1.0)

    @pytest.mark.slow
    def test_normalized_indexes_draw_together(self, config):
        config = config.model_copy(
            update={"runs": 200, "horizon": 4000, "trajectory_stride": 500, "series": ["indexes"]}
        )
        capture = diag_capture(config)
        spread = normalized_index_spread(capture.series("AT2", "indexes"))
        assert spread.loc[4000] < spread.loc[500]

    def test_series_subset_and_writer(self, config, tmp_path):
        config = config.model_copy(update={"series": ["anchor"], "runs": 3})
        paths = write_diag(diag_capture(config, workers=1), tmp_path)
        assert list(paths) == ["AT2_anchor"]
        assert paths["AT2_anchor"].name == "diag_AT2_anchor.csv"
        assert read_header(paths["AT2_anchor"])["horizon"] == 2000

    def test_horizon_required(self, config):
        config = config.model_copy(update={"horizon": None})
        with pytest.raises(ConfigError):
            diag_capture(config)
        with pytest.raises(ConfigError):
            diag_capture(config, horizon=3)
