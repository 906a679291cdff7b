import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ridgepoly.dataset import (MgParams, NormParams, Series, build_patterns,
                               denormalize, generate_mackey_glass,
                               load_series_csv, normalize, save_patterns_csv,
                               save_series_csv, split_patterns)
from ridgepoly.errors import DegenerateRangeError


class TestMgParams:
    def test_non_integer_delay_ratio_rejected(self):
        with pytest.raises(ValueError):
            MgParams(tau=17.05, dt=0.1)

    def test_basic_bounds(self):
        with pytest.raises(ValueError):
            MgParams(dt=0.0)
        with pytest.raises(ValueError):
            MgParams(n_points=0)
        with pytest.raises(ValueError):
            MgParams(sample_every=0)


class TestGenerator:
    def test_equilibrium_stays_put(self):
        # beta*x + alpha*x/(1+x^10) = 0 has the solution x = 1 for
        # alpha = 0.2, beta = -0.1, so the trajectory from x0 = 1 is constant
        s = generate_mackey_glass(MgParams(x0=1.0))
        assert np.abs(s.values - 1.0).max() <= 1e-9

    def test_pure_decay_matches_closed_form(self):
        s = generate_mackey_glass(MgParams(alpha=0.0, x0=1.2, n_points=1000))
        t = np.arange(1000.0)
        exact = 1.2 * np.exp(-0.1 * t)
        rel = np.abs(s.values - exact) / np.abs(exact)
        assert rel.max() <= 1e-6

    def test_chaotic_regime_sane(self):
        s = generate_mackey_glass(MgParams())
        v = s.values
        assert v.size == 1000
        assert np.all(np.isfinite(v))
        assert 0.2 < v.min() < 1.0 < v.max() < 1.5
        # visits both sides of 1.0 and shows no short exact period
        assert (v > 1.0).sum() > 100 and (v < 1.0).sum() > 100
        for period in (1, 2, 5, 10, 17, 50, 100):
            assert np.abs(v[period:] - v[:-period]).max() > 1e-3

    def test_deterministic(self):
        a = generate_mackey_glass(MgParams())
        b = generate_mackey_glass(MgParams())
        assert a.values.tobytes() == b.values.tobytes()

    def test_transient_skip_is_a_shift(self):
        full = generate_mackey_glass(MgParams(n_points=120))
        skipped = generate_mackey_glass(MgParams(n_points=100, transient_skip=20))
        assert skipped.values.tobytes() == full.values[20:].tobytes()

    def test_step_refinement_converges(self):
        # non-chaotic setting at the default step
        a = generate_mackey_glass(MgParams(alpha=0.0, n_points=1000))
        b = generate_mackey_glass(MgParams(alpha=0.0, dt=0.05, sample_every=20,
                                           n_points=1000))
        assert (np.abs(a.values - b.values) / np.abs(b.values)).max() < 1e-5
        # chaotic setting at a refined step, before trajectory divergence
        # amplifies the difference
        c = generate_mackey_glass(MgParams(dt=0.025, sample_every=40, n_points=100))
        d = generate_mackey_glass(MgParams(dt=0.0125, sample_every=80, n_points=100))
        assert (np.abs(c.values - d.values) / np.abs(d.values)).max() < 1e-5


class TestNormalization:
    def test_endpoints_map_exactly(self):
        np_ = NormParams(min1=0.4, max1=1.3)
        out = normalize([0.4, 1.3], np_)
        assert out[0] == 0.2
        assert out[1] == 0.8

    def test_midpoint(self):
        np_ = NormParams(min1=0.4, max1=1.3)
        mid = normalize([(0.4 + 1.3) / 2], np_)[0]
        assert mid == pytest.approx(0.5, abs=1e-12)

    def test_round_trip(self):
        rng = np.random.default_rng(0)
        np_ = NormParams(min1=0.37, max1=1.29)
        x = rng.uniform(0.37, 1.29, 1000)
        back = denormalize(normalize(x, np_), np_)
        assert np.abs(back - x).max() <= 1e-12

    def test_degenerate_range(self):
        with pytest.raises(DegenerateRangeError):
            NormParams(min1=1.0, max1=1.0)

    def test_full_series_lands_in_target_interval(self):
        s = generate_mackey_glass(MgParams(n_points=400))
        np_ = NormParams.from_values(s.values)
        scaled = normalize(s, np_)
        assert scaled.min() >= 0.2 - 1e-15
        assert scaled.max() <= 0.8 + 1e-15


class TestPatterns:
    def test_default_count(self):
        s = np.arange(1000.0)
        pats = build_patterns(s)
        assert len(pats) == 1000 - 18 - 6

    def test_first_pattern_indices(self):
        s = np.arange(1000.0)
        pats = build_patterns(s)
        first = pats[0]
        assert first.t_index == 18
        assert first.inputs.tolist() == [s[18], s[12], s[6], s[0]]
        assert first.target == s[24]

    def test_points_split(self):
        s = np.arange(1000.0)
        train, test = split_patterns(build_patterns(s), train_points=500)
        assert len(train) == 482 and len(test) == 494
        assert train[0].t_index == 18 and train[-1].t_index == 499
        assert test[0].t_index == 500 and test[-1].t_index == 993

    def test_pattern_count_split(self):
        s = np.arange(1000.0)
        train, test = split_patterns(build_patterns(s), train_points=500,
                                     split_mode="patterns")
        assert len(train) == 500 and len(test) == 476

    def test_too_short_series(self):
        with pytest.raises(ValueError):
            build_patterns(np.arange(24.0))

    @settings(max_examples=40, deadline=None)
    @given(n=st.integers(30, 200),
           lags=st.lists(st.integers(0, 12), min_size=1, max_size=5),
           horizon=st.integers(1, 10))
    def test_count_formula(self, n, lags, horizon):
        if n <= max(lags) + horizon:
            with pytest.raises(ValueError):
                build_patterns(np.arange(float(n)), lags, horizon)
        else:
            pats = build_patterns(np.arange(float(n)), lags, horizon)
            assert len(pats) == n - max(lags) - horizon


class TestCsv:
    def test_series_round_trip(self, tmp_path):
        s = generate_mackey_glass(MgParams(n_points=50))
        path = tmp_path / "series.csv"
        save_series_csv(s, path)
        back = load_series_csv(path)
        assert back.values.tobytes() == s.values.tobytes()
        assert back.params is None

    def test_pattern_header(self, tmp_path):
        pats = build_patterns(np.arange(40.0), lags=(0, 3), horizon=2)
        path = tmp_path / "patterns.csv"
        save_patterns_csv(pats, (0, 3), path)
        header = path.read_text().splitlines()[0]
        assert header == "t,x0,x3,target"

    def test_load_rejects_garbage(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("nope\n1,2\n")
        with pytest.raises(ValueError):
            load_series_csv(path)

    def test_series_requires_finite(self):
        with pytest.raises(ValueError):
            Series(values=np.array([1.0, np.inf]))
