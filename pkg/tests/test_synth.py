import json
import math

import numpy as np
import pytest

from browkit import (
    BrowRamp,
    DistortionSpec,
    MotionScript,
    ParseError,
    SequenceMeta,
    default_template,
    extract_trace,
    generate,
    load_scenario,
    score_correction,
    write_interchange,
)
from browkit.metrics import deviation, scale_traces


def pitch_script(peak, frames=60, eyebrows="neutral"):
    return MotionScript(
        frames=frames,
        fps=30.0,
        peak_pitch=peak,
        pitch_start=5,
        pitch_peak=frames // 2,
        pitch_end=frames - 5,
        eyebrows=eyebrows,
    )


UP = -0.45  # head-up peak, stored down-positive convention
DOWN = 0.45


def observed_trace(distortion, peak=UP, eyebrows="neutral", seed=0):
    truth, observed = generate(default_template(), pitch_script(peak, eyebrows=eyebrows),
                               distortion, seed=seed)
    return extract_trace(truth, name="truth"), extract_trace(observed, name="observed")


class TestGenerate:
    def test_none_distortion_is_exact(self):
        truth, observed = generate(
            default_template(), pitch_script(UP), DistortionSpec(kind="none"), seed=3
        )
        for tf, of in zip(truth.frames, observed.frames):
            assert of.present
            for i in tf.raw:
                np.testing.assert_array_equal(tf.raw[i], of.raw[i])

    def test_deterministic_for_fixed_seed(self, tmp_path):
        spec = DistortionSpec(kind="mph_like", noise_sigma=0.02,
                              dropout_pitch_up=0.3, dropout_prob=0.5)
        a = generate(default_template(), pitch_script(UP), spec, seed=11)
        b = generate(default_template(), pitch_script(UP), spec, seed=11)
        pa, pb = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        write_interchange(a[1], pa)
        write_interchange(b[1], pb)
        assert pa.read_bytes() == pb.read_bytes()
        c = generate(default_template(), pitch_script(UP), spec, seed=12)
        pc = tmp_path / "c.jsonl"
        write_interchange(c[1], pc)
        assert pa.read_bytes() != pc.read_bytes()

    def test_truth_poses_recorded(self):
        truth, _ = generate(default_template(), pitch_script(DOWN),
                            DistortionSpec(kind="none"), seed=0)
        peak = pitch_script(DOWN).pitch_peak
        assert truth.frames[peak].pose.pitch == pytest.approx(DOWN)
        assert truth.frames[0].pose.pitch == 0.0

    def test_mph_like_pitch_up_squishes(self):
        t, o = observed_trace(DistortionSpec(kind="mph_like"), peak=UP)
        peak = int(np.argmax(np.abs(o.pitch)))
        assert o.inner[peak] < o.inner[0]
        assert o.outer[peak] < o.outer[0]
        assert t.inner[peak] == pytest.approx(t.inner[0], abs=1e-9)

    def test_mph_like_pitch_down_stretches(self):
        _, o = observed_trace(DistortionSpec(kind="mph_like"), peak=DOWN)
        peak = int(np.argmax(np.abs(o.pitch)))
        assert o.inner[peak] > o.inner[0]

    def test_of_like_is_opposite(self):
        _, up = observed_trace(DistortionSpec(kind="of_like"), peak=UP)
        peak = int(np.argmax(np.abs(up.pitch)))
        assert up.inner[peak] > up.inner[0]
        _, down = observed_trace(DistortionSpec(kind="of_like"), peak=DOWN)
        peak = int(np.argmax(np.abs(down.pitch)))
        assert down.inner[peak] < down.inner[0]

    def test_scale_factor_applies_exactly_to_distance(self):
        spec = DistortionSpec(kind="mph_like", k=0.4)
        t, o = observed_trace(spec, peak=UP)
        peak = int(np.argmax(np.abs(o.pitch)))
        s = spec.scale_at(UP, 0.0)
        assert s == pytest.approx(1.0 - 0.4 * 0.45)
        assert o.inner[peak] == pytest.approx(s * t.inner[peak], rel=1e-9)

    def test_raise_interaction_only_under_pitch_up(self):
        base = DistortionSpec(kind="mph_like", k=0.4)
        strong = DistortionSpec(kind="mph_like", k=0.4, raise_interaction=0.6)
        assert strong.scale_at(UP, 1.0) < base.scale_at(UP, 1.0)
        assert strong.scale_at(DOWN, 1.0) == base.scale_at(DOWN, 1.0)
        t_n, o_n = observed_trace(strong, peak=UP, eyebrows="neutral")
        t_r, o_r = observed_trace(strong, peak=UP, eyebrows="raised")
        peak = int(np.argmax(np.abs(o_n.pitch)))
        loss_neutral = t_n.inner[peak] - o_n.inner[peak]
        loss_raised = t_r.inner[peak] - o_r.inner[peak]
        assert loss_raised > loss_neutral

    def test_custom_additive_offset(self):
        spec = DistortionSpec(kind="custom", coeffs={"pitch": 0.5})
        t, o = observed_trace(spec, peak=DOWN)
        peak = int(np.argmax(np.abs(o.pitch)))
        assert o.inner[peak] - t.inner[peak] == pytest.approx(0.5 * DOWN, abs=1e-9)
        assert o.inner[0] == pytest.approx(t.inner[0], abs=1e-12)

    def test_dropout_rule_fires_exactly_on_threshold(self):
        spec = DistortionSpec(kind="mph_like", dropout_pitch_up=0.3, dropout_prob=1.0)
        truth, observed = generate(default_template(), pitch_script(UP), spec, seed=5)
        for tf, of in zip(truth.frames, observed.frames):
            should_drop = -tf.pose.pitch > 0.3
            assert of.present == (not should_drop)
        assert any(not f.present for f in observed.frames)

    def test_dropout_probability_zero_never_fires(self):
        spec = DistortionSpec(kind="mph_like", dropout_pitch_up=0.1, dropout_prob=0.0)
        _, observed = generate(default_template(), pitch_script(UP), spec, seed=5)
        assert all(f.present for f in observed.frames)

    def test_eyebrow_ramp_moves_brows_only(self):
        script = MotionScript(frames=30, eyebrows=BrowRamp(start=5, peak=15, end=25))
        truth, _ = generate(default_template(), script, DistortionSpec(), seed=0)
        t0, t15 = truth.frames[0], truth.frames[15]
        np.testing.assert_allclose(
            t15.points["inner_eye_L"], t0.points["inner_eye_L"], atol=1e-12
        )
        assert t15.points["inner_brow_L"][1] > t0.points["inner_brow_L"][1]

    def test_bad_script_rejected(self):
        with pytest.raises(ValueError):
            MotionScript(frames=0)
        with pytest.raises(ValueError):
            MotionScript(frames=10, peak_pitch=2.0)
        with pytest.raises(ValueError):
            MotionScript(frames=10, pitch_start=8, pitch_peak=4, pitch_end=9)


class TestPipelineInvariance:
    def test_rigid_motion_yields_zero_deviation(self):
        # A perfect tracker: any pitch profile, neutral brows, no distortion.
        for peak in (UP, DOWN, -0.2, 0.3):
            truth, observed = generate(
                default_template(), pitch_script(peak), DistortionSpec(kind="none"), seed=1
            )
            tr = extract_trace(observed, name="perfect")
            scaled, _ = scale_traces([tr])
            for kind in ("inner", "outer"):
                assert deviation(scaled[0], kind) < 1e-9


class TestScoreCorrection:
    def test_corrected_equals_truth(self):
        t, o = observed_trace(DistortionSpec(kind="mph_like"), peak=UP)
        card = score_correction(t, o, corrected=t, brow_kind="inner")
        assert card.rmse_corrected == 0.0
        assert card.rmse_uncorrected > 0.0
        assert card.improvement_ratio == 0.0

    def test_corrected_equals_observed(self):
        t, o = observed_trace(DistortionSpec(kind="mph_like"), peak=UP)
        card = score_correction(t, o, corrected=o, brow_kind="inner")
        assert card.improvement_ratio == pytest.approx(1.0)

    def test_perfect_tracker_scorecard(self):
        t, o = observed_trace(DistortionSpec(kind="none"), peak=UP)
        card = score_correction(t, o, brow_kind="inner")
        assert card.rmse_uncorrected == 0.0
        assert card.rmse_corrected is None

    def test_length_mismatch(self):
        t, o = observed_trace(DistortionSpec(kind="none"), peak=UP)
        import dataclasses

        shorter = dataclasses.replace(
            t,
            frame_index=t.frame_index[:-1], t=t.t[:-1], inner=t.inner[:-1],
            outer=t.outer[:-1], pitch=t.pitch[:-1], yaw=t.yaw[:-1],
            roll=t.roll[:-1], present=t.present[:-1],
        )
        with pytest.raises(ValueError):
            score_correction(shorter, o)


class TestScenario:
    def test_load_and_generate(self, tmp_path):
        scenario = {
            "name": "up_raised",
            "template": {"scale": 1.2},
            "script": {
                "frames": 40,
                "fps": 25,
                "pitch": {"direction": "up", "magnitude": 0.4, "start": 4, "peak": 20, "end": 36},
                "eyebrows": "raised",
            },
            "distortion": {"kind": "mph_like", "k": 0.4, "raise_interaction": 0.5},
            "meta": {"camera_distance": "close", "condition": "pitch_up",
                     "subject": "s1", "eyebrows_raised": True, "tracker": "synthetic"},
        }
        path = tmp_path / "scn.json"
        path.write_text(json.dumps(scenario))
        scn = load_scenario(path)
        assert scn.name == "up_raised"
        assert scn.script.peak_pitch == pytest.approx(-0.4)
        assert scn.meta.camera_distance == "close"
        truth, observed = generate(scn.template, scn.script, scn.distortion, seed=0, meta=scn.meta)
        assert len(truth.frames) == 40
        assert observed.meta.eyebrows_raised is True
        assert truth.meta.tracker == "truth"

    def test_down_direction_and_defaults(self, tmp_path):
        path = tmp_path / "scn.json"
        path.write_text(json.dumps({
            "script": {"frames": 10,
                       "pitch": {"direction": "down", "magnitude": 0.2,
                                 "start": 0, "peak": 5, "end": 9}},
        }))
        scn = load_scenario(path)
        assert scn.script.peak_pitch == pytest.approx(0.2)
        assert scn.distortion.kind == "none"
        assert scn.name == "scn"

    def test_invalid_json_reports(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{nope")
        with pytest.raises(ParseError):
            load_scenario(path)

    def test_missing_script_rejected(self, tmp_path):
        path = tmp_path / "noscript.json"
        path.write_text(json.dumps({"name": "x"}))
        with pytest.raises(ParseError, match="script"):
            load_scenario(path)

    def test_bad_pitch_direction(self, tmp_path):
        path = tmp_path / "dir.json"
        path.write_text(json.dumps({
            "script": {"frames": 10, "pitch": {"direction": "sideways", "magnitude": 0.1}}
        }))
        with pytest.raises(ParseError, match="direction"):
            load_scenario(path)
