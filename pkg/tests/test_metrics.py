import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from browkit import (
    BrowkitError,
    BrowTrace,
    HeadPose,
    ScalingError,
    SequenceMeta,
    aggregate_condition,
    build_deviation_report,
    deviation,
    deviation_series,
    extract_trace,
    normalize_time,
    scale_traces,
    scale_unit,
)
from browkit.metrics import fit_scale
from conftest import FACE_POINTS, constant_sequence, dropout_frame, make_sequence, role_frame
from oracles import triangle_wave


def make_trace(values, present=None, t=None, pitch=None, meta=None, name="trace", outer=None):
    values = np.asarray(values, dtype=float)
    n = values.size
    present = np.ones(n, dtype=bool) if present is None else np.asarray(present, dtype=bool)
    vals = values.copy()
    vals[~present] = np.nan
    outer_vals = vals.copy() if outer is None else np.where(present, np.asarray(outer, float), np.nan)
    zeros = np.where(present, 0.0, np.nan)
    return BrowTrace(
        frame_index=np.arange(n),
        t=np.arange(n) / 30.0 if t is None else np.asarray(t, dtype=float),
        inner=vals,
        outer=outer_vals,
        pitch=np.where(present, pitch, np.nan) if pitch is not None else zeros.copy(),
        yaw=zeros.copy(),
        roll=zeros.copy(),
        present=present,
        meta=meta or SequenceMeta(tracker="synthetic", camera_distance="close"),
        name=name,
    )


class TestExtractTrace:
    def test_all_dropout_errors(self):
        seq = make_sequence([dropout_frame(0), dropout_frame(1, 0.1)])
        with pytest.raises(BrowkitError):
            extract_trace(seq)

    def test_constant_face_gives_constant_trace(self):
        seq = constant_sequence(n=10)
        tr = extract_trace(seq)
        assert len(tr) == 10
        assert np.ptp(tr.inner) == 0.0
        assert np.all(tr.present)

    def test_pitch_ramp_recovered_by_rigid_estimate(self):
        from browkit import euler_to_matrix

        frames = []
        planted = np.linspace(0.0, 0.4, 12)
        for i, pitch in enumerate(planted):
            rot = euler_to_matrix(HeadPose(pitch, 0.0, 0.0))
            pts = {k: rot @ np.array(v, dtype=float) for k, v in FACE_POINTS.items()}
            frames.append(role_frame(points=pts, index=i, t=i / 30))
        seq = make_sequence(frames)
        tr = extract_trace(seq, pose_source="rigid_estimate")
        np.testing.assert_allclose(tr.pitch, planted, atol=1e-6)

    def test_from_file_without_pose_errors(self):
        seq = make_sequence([role_frame(index=0)])
        with pytest.raises(BrowkitError, match="pose"):
            extract_trace(seq, pose_source="from_file")

    def test_dropouts_carry_nan(self):
        seq = make_sequence(
            [role_frame(index=0, pose=HeadPose(0, 0, 0)),
             dropout_frame(1, 0.1),
             role_frame(index=2, t=0.2, pose=HeadPose(0, 0, 0))]
        )
        tr = extract_trace(seq)
        assert np.isnan(tr.inner[1]) and not tr.present[1]


class TestScaleUnit:
    def test_basic_map(self):
        out = scale_unit(np.array([2.0, 4.0, 6.0]), [np.array([2.0, 4.0, 6.0])])
        np.testing.assert_allclose(out, [0.0, 0.5, 1.0])

    def test_idempotent_on_attained_bounds(self):
        values = np.array([0.0, 0.25, 1.0])
        np.testing.assert_allclose(scale_unit(values, [values]), values)

    def test_shared_group_preserves_order_and_difference_ratios(self, rng):
        a = rng.uniform(0, 10, 50)
        b = rng.uniform(0, 10, 50)
        lo = min(a.min(), b.min())
        hi = max(a.max(), b.max())
        sa = scale_unit(a, [a, b])
        sb = scale_unit(b, [a, b])
        np.testing.assert_allclose(sa, (a - lo) / (hi - lo), atol=1e-12)
        np.testing.assert_allclose(sb, (b - lo) / (hi - lo), atol=1e-12)
        # ratios of differences are preserved by any affine map
        d_orig = (a[0] - b[0]) / (a[1] - b[1])
        d_scaled = (sa[0] - sb[0]) / (sa[1] - sb[1])
        assert d_scaled == pytest.approx(d_orig, rel=1e-9)

    def test_constant_group_raises(self):
        with pytest.raises(ScalingError):
            scale_unit(np.array([3.0, 3.0]), [np.array([3.0, 3.0, 3.0])])

    def test_near_constant_group_raises(self):
        vals = 5.0 + np.array([0.0, 1e-13, -1e-13])
        with pytest.raises(ScalingError):
            fit_scale([vals])

    def test_nan_values_ignored_for_range(self):
        group = [np.array([np.nan, 1.0, 3.0])]
        out = scale_unit(np.array([1.0, 2.0, 3.0]), group)
        np.testing.assert_allclose(out, [0.0, 0.5, 1.0])

    def test_scale_traces_groups_by_camera_distance(self):
        close = SequenceMeta(tracker="a", camera_distance="close")
        far = SequenceMeta(tracker="a", camera_distance="far")
        t1 = make_trace([0.0, 1.0, 2.0], meta=close, name="c1")
        t2 = make_trace([2.0, 3.0, 4.0], meta=close, name="c2")
        t3 = make_trace([10.0, 30.0, 20.0], meta=far, name="f1")
        scaled, params = scale_traces([t1, t2, t3])
        np.testing.assert_allclose(scaled[0].inner, [0.0, 0.25, 0.5])
        np.testing.assert_allclose(scaled[1].inner, [0.5, 0.75, 1.0])
        np.testing.assert_allclose(scaled[2].inner, [0.0, 1.0, 0.5])
        assert params[("a:close", "inner")].lo == 0.0
        assert params[("a:close", "inner")].hi == 4.0

    def test_scale_traces_constant_channel_passthrough(self):
        tr = make_trace([5.0, 5.0, 5.0])
        scaled, params = scale_traces([tr])
        np.testing.assert_allclose(scaled[0].inner, [5.0, 5.0, 5.0])
        assert params[("synthetic:close", "inner")] is None


class TestNormalizeTime:
    def test_identity_when_already_uniform(self):
        values = np.linspace(3.0, 4.0, 70) ** 2
        tr = make_trace(values, t=np.linspace(0, 1, 70))
        out = normalize_time(tr, n=70)
        np.testing.assert_allclose(out.inner, values, atol=1e-12)

    def test_linear_ramp_reproduced(self):
        tr = make_trace(np.linspace(0, 1, 23), t=np.linspace(0, 2.2, 23))
        out = normalize_time(tr, n=70)
        np.testing.assert_allclose(out.inner, np.linspace(0, 1, 70), atol=1e-12)
        assert len(out) == 70

    def test_sawtooth_matches_analytic_oracle(self):
        # Triangle wave with corners on the frame grid: linear interpolation
        # between frames equals the analytic wave everywhere.
        fps = 30.0
        period_frames = 10
        n_src = 61
        t = np.arange(n_src) / fps
        values = triangle_wave(t, period_frames / fps)
        tr = make_trace(values, t=t)
        out = normalize_time(tr, n=70)
        np.testing.assert_allclose(out.inner, triangle_wave(out.t, period_frames / fps), atol=1e-9)

    def test_too_few_present_frames(self):
        tr = make_trace([1.0, 2.0, 3.0], present=[True, False, False])
        with pytest.raises(BrowkitError):
            normalize_time(tr, n=10)

    def test_gap_longer_than_max_gap_left_absent(self):
        present = np.array([True, True, False, False, False, True, True])
        tr = make_trace(np.arange(7.0), present=present)
        out = normalize_time(tr, n=7, max_gap=2)
        # the resampled grid coincides with the source frames here
        assert not out.present[2] and not out.present[3] and not out.present[4]
        assert out.present[0] and out.present[1] and out.present[5] and out.present[6]
        out_all = normalize_time(tr, n=7)
        assert out_all.present.all()
        np.testing.assert_allclose(out_all.inner, np.arange(7.0), atol=1e-12)

    def test_monotone_channel_preserves_min_max(self, rng):
        values = np.sort(rng.uniform(0, 5, 41))
        tr = make_trace(values, t=np.linspace(0, 3, 41))
        out = normalize_time(tr, n=70)
        assert out.inner.min() == pytest.approx(values.min(), abs=1e-9)
        assert out.inner.max() == pytest.approx(values.max(), abs=1e-9)


class TestDeviation:
    def test_constant_trace_is_zero(self):
        assert deviation(make_trace([0.4] * 8)) == 0.0

    def test_hand_computed_rms(self):
        tr = make_trace([0.0, 0.0, 1.0, 1.0])
        assert deviation(tr, baseline_window=2) == pytest.approx(math.sqrt(0.5), abs=1e-12)
        assert deviation(tr, baseline_window=2) == pytest.approx(0.7071067811865476, abs=1e-12)

    def test_variants(self):
        tr = make_trace([0.0, 0.0, 1.0, 1.0])
        diffs = np.array([0.0, 0.0, 1.0, 1.0])
        assert deviation(tr, baseline_window=2, variant="mean_abs") == pytest.approx(0.5)
        assert deviation(tr, baseline_window=2, variant="sd") == pytest.approx(
            np.std(diffs, ddof=1)
        )

    def test_zero_iff_constant_at_baseline(self):
        tr = make_trace([0.3, 0.3, 0.300001])
        assert deviation(tr) > 0.0
        tr2 = make_trace([0.3, 0.3, 0.3])
        assert deviation(tr2) == 0.0

    def test_dropouts_do_not_contribute(self):
        with_gaps = make_trace(
            [0.1, 0.9, 0.2, 0.9, 0.3], present=[True, False, True, False, True]
        )
        without = make_trace([0.1, 0.2, 0.3])
        assert deviation(with_gaps) == pytest.approx(deviation(without), abs=1e-15)

    def test_empty_baseline_errors(self):
        tr = make_trace([0.5, 0.4], present=[False, False])
        with pytest.raises(BrowkitError):
            deviation(tr)
        with pytest.raises(BrowkitError):
            deviation(make_trace([0.5]), baseline_window=3)

    def test_series_interface(self):
        tr = make_trace([0.2, 0.5, 0.1])
        np.testing.assert_allclose(deviation_series(tr), [0.0, 0.3, 0.1], atol=1e-15)

    @given(
        shift=st.floats(min_value=-10, max_value=10, allow_nan=False),
        scale=st.floats(min_value=0.5, max_value=5.0, allow_nan=False),
    )
    @settings(max_examples=40, deadline=None)
    def test_affine_pipeline_invariance(self, shift, scale):
        # Shifting the raw signal and its scaling group together leaves the
        # scale-then-deviate pipeline's answer unchanged.
        raw = np.array([1.0, 1.4, 2.2, 3.0, 2.6])
        group = [raw]
        a = deviation(make_trace(scale_unit(raw, group)))
        shifted = raw + shift
        b = deviation(make_trace(scale_unit(shifted, [shifted])))
        assert a == pytest.approx(b, abs=1e-9)


class TestAggregate:
    def test_single_trace_mean_is_trace(self):
        tr = make_trace([0.1, 0.2, 0.3], meta=SequenceMeta(tracker="x", condition="statement"))
        aggs = aggregate_condition([tr])
        agg = aggs["statement"]
        np.testing.assert_allclose(agg.mean, [0.1, 0.2, 0.3])
        np.testing.assert_allclose(agg.sd, 0.0, atol=1e-15)
        assert agg.n_traces == 1

    def test_two_flat_traces(self):
        meta = SequenceMeta(tracker="x", condition="polar_q")
        t0 = make_trace([0.0] * 5, meta=meta, name="a")
        t1 = make_trace([1.0] * 5, meta=meta, name="b")
        agg = aggregate_condition([t0, t1])["polar_q"]
        np.testing.assert_allclose(agg.mean, 0.5)
        np.testing.assert_allclose(agg.sd, 0.5)

    def test_mismatched_lengths_error(self):
        meta = SequenceMeta(tracker="x", condition="polar_q")
        with pytest.raises(BrowkitError, match="length"):
            aggregate_condition([make_trace([1.0, 2.0], meta=meta), make_trace([1.0], meta=meta)])

    def test_empty_group_errors(self):
        with pytest.raises(BrowkitError):
            aggregate_condition([])

    def test_planted_raise_separates_conditions(self):
        statement = SequenceMeta(tracker="x", condition="statement")
        polar = SequenceMeta(tracker="x", condition="polar_q")
        traces = []
        for signer in range(9):
            base = 0.2 + 0.01 * signer
            traces.append(make_trace([base] * 70, meta=statement, name=f"s{signer}"))
            traces.append(make_trace([base + 0.5] * 70, meta=polar, name=f"p{signer}"))
        aggs = aggregate_condition(traces)
        assert np.all(aggs["polar_q"].mean > aggs["statement"].mean)


class TestDeviationReport:
    def test_rows_and_pairwise(self):
        meta_a = SequenceMeta(
            tracker="mediapipe", camera_distance="close", condition="pitch_up",
            eyebrows_raised=False, subject="s1",
        )
        meta_b = SequenceMeta(
            tracker="openface", camera_distance="close", condition="pitch_up",
            eyebrows_raised=False, subject="s1",
        )
        rng = np.random.default_rng(7)
        base = rng.uniform(0.2, 0.8, 40)
        tr_a = make_trace(base + rng.normal(0, 0.05, 40), meta=meta_a, name="v1_mph")
        tr_b = make_trace(base + rng.normal(0, 0.01, 40), meta=meta_b, name="v1_of")
        rows = build_deviation_report([tr_a, tr_b])
        plain = [r for r in rows if "_vs_" not in r.tracker]
        pairs = [r for r in rows if "_vs_" in r.tracker]
        assert len(plain) == 4  # 2 traces x 2 brow kinds
        assert len(pairs) == 2  # inner and outer comparison
        assert pairs[0].tracker == "mediapipe_vs_openface"
        assert all(r.p_value is not None for r in plain)

    def test_constant_series_gets_blank_test_fields(self):
        tr = make_trace([0.5] * 6)
        rows = build_deviation_report([tr])
        assert rows[0].deviation == 0.0
        assert rows[0].t_stat is None and rows[0].p_value is None
