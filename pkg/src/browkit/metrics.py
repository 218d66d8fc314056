"""Brow-distance traces and the statistics computed from them.

A BrowTrace is the per-frame record downstream analysis runs on: mean inner
and outer brow distance plus the head pose, with NaN in every numeric channel
at dropout frames (the ``present`` mask is authoritative). The module covers:

* extracting traces from a LandmarkSequence (pose taken from the file or
  estimated rigidly against a reference frame),
* joint unit-scaling of channels within a camera-distance group,
* resampling onto a fixed number of points by linear interpolation,
* the baseline-deviation statistic and its variants, and
* per-condition aggregation (pointwise mean and dispersion band).

Deviation statistic: with b the mean of the first ``baseline_window`` present
values, the default is sqrt(mean((d_i - b)^2)) over present frames. The
"sd" variant is the sample standard deviation of (d_i - b) and "mean_abs"
the mean absolute difference; all three are kept because published numbers
rarely say which was meant.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import BrowkitError, ScalingError, SchemaError, StatsError
from .geometry import brow_measures, estimate_pose_rigid
from .landmark_io import LandmarkSequence, SequenceMeta
from .stats import TTestResult, t_one_sample, t_welch

TRACE_CHANNELS = ("inner", "outer", "pitch", "yaw", "roll")
DISTANCE_CHANNELS = ("inner", "outer")
DEVIATION_VARIANTS = ("rms", "sd", "mean_abs")

DEFAULT_NORMALIZED_LENGTH = 70

# A scaling group narrower than this is degenerate: the signal is constant up
# to float noise and dividing by the span would amplify that noise to O(1).
_SPAN_ATOL = 1e-12
_SPAN_RTOL = 1e-9


@dataclass(frozen=True)
class ScaleParams:
    """The affine map sending a group's min to 0 and max to 1."""

    lo: float
    hi: float

    def apply(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=float) - self.lo) / (self.hi - self.lo)

    def invert(self, values: np.ndarray) -> np.ndarray:
        return self.lo + np.asarray(values, dtype=float) * (self.hi - self.lo)


@dataclass
class BrowTrace:
    """Per-frame brow distances and head pose for one recording."""

    frame_index: np.ndarray
    t: np.ndarray
    inner: np.ndarray
    outer: np.ndarray
    pitch: np.ndarray
    yaw: np.ndarray
    roll: np.ndarray
    present: np.ndarray
    meta: SequenceMeta
    name: str = ""
    scaling: dict[str, ScaleParams | None] = field(default_factory=dict)

    def __len__(self) -> int:
        return int(self.t.size)

    def channel(self, name: str) -> np.ndarray:
        if name not in TRACE_CHANNELS:
            raise KeyError(f"unknown channel {name!r}; expected one of {TRACE_CHANNELS}")
        return getattr(self, name)

    def with_channel(self, name: str, values: np.ndarray) -> "BrowTrace":
        if name not in TRACE_CHANNELS:
            raise KeyError(f"unknown channel {name!r}")
        values = np.asarray(values, dtype=float)
        if values.shape != self.channel(name).shape:
            raise ValueError("replacement channel has wrong length")
        return replace(self, **{name: values})

    def present_values(self, channel: str) -> np.ndarray:
        return self.channel(channel)[self.present]


def extract_trace(
    seq: LandmarkSequence,
    pose_source: str = "from_file",
    reference_index: int | None = None,
    signed: bool = False,
    drop_z: bool = False,
    name: str = "",
) -> BrowTrace:
    """Measure brow distances and head pose for every present frame.

    ``pose_source`` is "from_file" (the tracker reported angles, e.g.
    OpenFace) or "rigid_estimate" (Procrustes against a neutral reference
    frame, the only option for trackers that report no pose). The reference
    defaults to the first present frame; pass ``reference_index`` (a
    frame_index) to use another.
    """
    n = len(seq.frames)
    if n == 0:
        raise BrowkitError("sequence has no frames")
    present = np.array([f.present for f in seq.frames], dtype=bool)
    if not present.any():
        raise BrowkitError(f"{name or 'sequence'}: no present frames")

    if pose_source not in ("from_file", "rigid_estimate"):
        raise ValueError(f"unknown pose_source {pose_source!r}")
    reference = None
    if pose_source == "rigid_estimate":
        if reference_index is None:
            reference = next(f for f in seq.frames if f.present)
        else:
            matches = [f for f in seq.frames if f.frame_index == reference_index]
            if not matches or not matches[0].present:
                raise BrowkitError(
                    f"reference frame {reference_index} missing or not present"
                )
            reference = matches[0]

    cols = {ch: np.full(n, np.nan) for ch in TRACE_CHANNELS}
    for i, f in enumerate(seq.frames):
        if not f.present:
            continue
        m = brow_measures(f, signed=signed, drop_z=drop_z)
        cols["inner"][i] = m.inner_mean
        cols["outer"][i] = m.outer_mean
        if pose_source == "from_file":
            if f.pose is None:
                raise BrowkitError(
                    f"frame {f.frame_index} has no pose; use pose_source='rigid_estimate'"
                )
            pose = f.pose
        else:
            pose = estimate_pose_rigid(f, reference)
        cols["pitch"][i] = pose.pitch
        cols["yaw"][i] = pose.yaw
        cols["roll"][i] = pose.roll

    return BrowTrace(
        frame_index=np.array([f.frame_index for f in seq.frames]),
        t=np.array([f.time_s for f in seq.frames]),
        inner=cols["inner"],
        outer=cols["outer"],
        pitch=cols["pitch"],
        yaw=cols["yaw"],
        roll=cols["roll"],
        present=present,
        meta=seq.meta,
        name=name,
    )


# ---------------------------------------------------------------------------
# Unit scaling

def fit_scale(group) -> ScaleParams:
    """Min/max over a collection of series (NaNs ignored).

    Raises ScalingError when the group is (numerically) constant or has no
    finite values.
    """
    finite = [v[np.isfinite(v)] for v in (np.asarray(g, dtype=float) for g in group)]
    values = np.concatenate([v for v in finite if v.size]) if finite else np.array([])
    if values.size < 2:
        raise ScalingError("scaling group needs at least 2 finite values")
    lo, hi = float(values.min()), float(values.max())
    if hi - lo <= _SPAN_ATOL + _SPAN_RTOL * max(abs(lo), abs(hi)):
        raise ScalingError(f"scaling group is constant (min={lo!r}, max={hi!r})")
    return ScaleParams(lo, hi)


def scale_unit(values, group) -> np.ndarray:
    """Map ``values`` with the affine transform sending the group's range to [0, 1]."""
    return fit_scale(group).apply(values)


def scale_traces(
    traces: list[BrowTrace],
    channels: tuple[str, ...] = DISTANCE_CHANNELS,
    scope: str = "group",
) -> tuple[list[BrowTrace], dict[tuple[str, str], ScaleParams | None]]:
    """Unit-scale channels jointly within per-tracker camera-distance groups.

    ``scope`` "group" pools, per channel, every trace sharing a tracker and a
    camera-distance label (the cross-video comparison convention; trackers
    never share a range because their native units differ); "video" scales
    each trace by its own range. A degenerate (constant) channel is passed
    through unscaled with params None; a constant channel has zero deviation
    under any affine map, so this keeps perfect-tracker runs alive.
    """
    if scope not in ("group", "video"):
        raise ValueError(f"unknown scaling scope {scope!r}")
    if scope == "group":
        def key(tr):
            return f"{tr.meta.tracker}:{tr.meta.camera_distance}"
    else:
        def key(tr):
            return tr.name
    groups: dict[str, list[int]] = {}
    for i, tr in enumerate(traces):
        groups.setdefault(key(tr), []).append(i)

    out = list(traces)
    params: dict[tuple[str, str], ScaleParams | None] = {}
    for gname, idxs in groups.items():
        for ch in channels:
            series = [traces[i].channel(ch) for i in idxs]
            try:
                sp = fit_scale(series)
            except ScalingError:
                sp = None
            params[(gname, ch)] = sp
            for i in idxs:
                tr = out[i]
                scaled = sp.apply(tr.channel(ch)) if sp is not None else tr.channel(ch)
                tr = tr.with_channel(ch, scaled)
                tr.scaling = {**tr.scaling, ch: sp}
                out[i] = tr
    return out, params


# ---------------------------------------------------------------------------
# Time normalization

def normalize_time(
    trace: BrowTrace, n: int = DEFAULT_NORMALIZED_LENGTH, max_gap: int | None = None
) -> BrowTrace:
    """Resample every channel onto ``n`` uniform time points by linear interpolation.

    Interpolation runs between present frames only. Points outside the
    present range are emitted absent, as are points that would bridge more
    than ``max_gap`` consecutive missing source frames (default: any gap is
    interpolated).
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    pos = np.flatnonzero(trace.present)
    if pos.size < 2:
        raise BrowkitError("time normalization needs >= 2 present frames")
    tp = trace.t[pos]
    t_new = np.linspace(trace.t[0], trace.t[-1], n)

    present_new = (t_new >= tp[0]) & (t_new <= tp[-1])
    if max_gap is not None:
        right = np.searchsorted(tp, t_new, side="left")
        for j in np.flatnonzero(present_new):
            r = right[j]
            if r < tp.size and t_new[j] == tp[r]:
                continue  # exactly on a present node
            missing = pos[r] - pos[r - 1] - 1
            if missing > max_gap:
                present_new[j] = False

    kwargs = {}
    for ch in TRACE_CHANNELS:
        vals = np.interp(t_new, tp, trace.channel(ch)[pos])
        vals[~present_new] = np.nan
        kwargs[ch] = vals
    return BrowTrace(
        frame_index=np.arange(n),
        t=t_new,
        present=present_new,
        meta=trace.meta,
        name=trace.name,
        scaling=dict(trace.scaling),
        **kwargs,
    )


# ---------------------------------------------------------------------------
# Baseline deviation

def deviation_series(
    trace: BrowTrace, brow_kind: str = "inner", baseline_window: int = 1
) -> np.ndarray:
    """Per-present-frame absolute deviation |d_i - b| from the initial baseline."""
    if brow_kind not in DISTANCE_CHANNELS:
        raise ValueError(f"brow_kind must be one of {DISTANCE_CHANNELS}")
    if baseline_window < 1:
        raise ValueError("baseline_window must be >= 1")
    values = trace.present_values(brow_kind)
    if values.size < baseline_window or values.size == 0:
        raise BrowkitError(
            f"baseline needs {baseline_window} present frames, trace has {values.size}"
        )
    b = float(values[:baseline_window].mean())
    return np.abs(values - b)


def deviation(
    trace: BrowTrace,
    brow_kind: str = "inner",
    baseline_window: int = 1,
    variant: str = "rms",
) -> float:
    """Baseline-deviation statistic over present frames; in [0, 1] for unit-scaled input."""
    if variant not in DEVIATION_VARIANTS:
        raise ValueError(f"variant must be one of {DEVIATION_VARIANTS}")
    values = trace.present_values(brow_kind)
    if baseline_window < 1:
        raise ValueError("baseline_window must be >= 1")
    if values.size < baseline_window or values.size == 0:
        raise BrowkitError(
            f"baseline needs {baseline_window} present frames, trace has {values.size}"
        )
    diffs = values - float(values[:baseline_window].mean())
    if variant == "rms":
        return float(np.sqrt(np.mean(diffs**2)))
    if variant == "sd":
        if diffs.size < 2:
            raise BrowkitError("sd variant needs >= 2 present frames")
        return float(np.std(diffs, ddof=1))
    return float(np.mean(np.abs(diffs)))


def baseline_value(trace: BrowTrace, brow_kind: str, baseline_window: int = 1) -> float:
    values = trace.present_values(brow_kind)
    if values.size < baseline_window or values.size == 0:
        raise BrowkitError("empty baseline")
    return float(values[:baseline_window].mean())


# ---------------------------------------------------------------------------
# Condition aggregation

@dataclass
class AggregateTrace:
    condition: str
    brow_kind: str
    n_traces: int
    x: np.ndarray
    mean: np.ndarray
    sd: np.ndarray


def aggregate_condition(
    traces: list[BrowTrace], brow_kind: str = "inner", key=None
) -> dict[str, AggregateTrace]:
    """Pointwise mean and standard deviation of a channel per condition group.

    All traces must share one length (normalize_time them first). Points
    where a trace is absent are left out of that point's statistics.
    """
    if not traces:
        raise BrowkitError("no traces to aggregate")
    if brow_kind not in DISTANCE_CHANNELS:
        raise ValueError(f"brow_kind must be one of {DISTANCE_CHANNELS}")
    key = key or (lambda tr: tr.meta.condition)
    groups: dict[str, list[BrowTrace]] = {}
    for tr in traces:
        groups.setdefault(key(tr), []).append(tr)

    out: dict[str, AggregateTrace] = {}
    for cond, members in groups.items():
        lengths = {len(m) for m in members}
        if len(lengths) != 1:
            raise BrowkitError(
                f"condition {cond!r}: mismatched trace lengths {sorted(lengths)}"
            )
        stack = np.vstack([m.channel(brow_kind) for m in members])
        with np.errstate(invalid="ignore"):
            mean = np.nanmean(stack, axis=0)
            sd = np.nanstd(stack, axis=0, ddof=0)
        out[cond] = AggregateTrace(
            condition=cond,
            brow_kind=brow_kind,
            n_traces=len(members),
            x=np.arange(stack.shape[1]),
            mean=mean,
            sd=sd,
        )
    return out


# ---------------------------------------------------------------------------
# Deviation report

@dataclass
class DeviationRow:
    video: str
    tracker: str
    distance_group: str
    condition: str
    brow_kind: str
    deviation: float
    n: int
    baseline: float | None
    t_stat: float | None
    df: float | None
    p_value: float | None


REPORT_COLUMNS = (
    "video",
    "tracker",
    "distance_group",
    "condition",
    "brow_kind",
    "deviation",
    "n",
    "baseline",
    "t_stat",
    "df",
    "p_value",
)


def _video_key(tr: BrowTrace) -> tuple:
    m = tr.meta
    return (m.subject, m.camera_distance, m.condition, m.eyebrows_raised)


def build_deviation_report(
    traces: list[BrowTrace],
    baseline_window: int = 1,
    variant: str = "rms",
    brow_kinds: tuple[str, ...] = DISTANCE_CHANNELS,
) -> list[DeviationRow]:
    """One row per (trace, brow kind), plus Welch comparison rows for videos
    covered by two trackers.

    The t-vs-zero test runs on the per-frame absolute deviations; a constant
    series (zero variance, e.g. a perfect tracker) gets blank test fields.
    Comparison rows put "A_vs_B" in the tracker column and the deviation
    difference (A - B) in the deviation column, with n the pooled count.
    """
    rows: list[DeviationRow] = []
    # video key -> brow kind -> tracker -> [(abs-dev series, deviation, name), ...]
    series_by: dict[tuple, dict[str, dict[str, list]]] = {}
    for tr in traces:
        for kind in brow_kinds:
            devs = deviation_series(tr, kind, baseline_window)
            dev = deviation(tr, kind, baseline_window, variant)
            base = baseline_value(tr, kind, baseline_window)
            try:
                tt: TTestResult | None = t_one_sample(devs, 0.0)
            except StatsError:
                tt = None
            rows.append(
                DeviationRow(
                    video=tr.name,
                    tracker=tr.meta.tracker,
                    distance_group=tr.meta.camera_distance,
                    condition=tr.meta.condition,
                    brow_kind=kind,
                    deviation=dev,
                    n=int(devs.size),
                    baseline=base,
                    t_stat=tt.t if tt else None,
                    df=tt.df if tt else None,
                    p_value=tt.p if tt else None,
                )
            )
            series_by.setdefault(_video_key(tr), {}).setdefault(kind, {}).setdefault(
                tr.meta.tracker, []
            ).append((devs, dev, tr.name))

    for key, kinds in sorted(series_by.items(), key=lambda kv: str(kv[0])):
        for kind, by_tracker in kinds.items():
            trackers = sorted(by_tracker)
            for i in range(len(trackers)):
                for j in range(i + 1, len(trackers)):
                    for xs, dev_a, name_a in by_tracker[trackers[i]]:
                        for ys, dev_b, name_b in by_tracker[trackers[j]]:
                            try:
                                tt = t_welch(xs, ys)
                            except StatsError:
                                tt = None
                            rows.append(
                                DeviationRow(
                                    video=(name_a if name_a == name_b
                                           else f"{name_a}|{name_b}"),
                                    tracker=f"{trackers[i]}_vs_{trackers[j]}",
                                    distance_group=key[1],
                                    condition=key[2],
                                    brow_kind=kind,
                                    deviation=dev_a - dev_b,
                                    n=int(xs.size + ys.size),
                                    baseline=None,
                                    t_stat=tt.t if tt else None,
                                    df=tt.df if tt else None,
                                    p_value=tt.p if tt else None,
                                )
                            )
    return rows


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_deviation_csv(rows: list[DeviationRow], path: str | Path) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS)
        for r in rows:
            writer.writerow([_fmt(getattr(r, col)) for col in REPORT_COLUMNS])
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# Trace CSV

TRACE_COLUMNS = ("frame", "t", "inner", "outer", "pitch", "yaw", "roll", "present")


def write_trace_csv(trace: BrowTrace, path: str | Path) -> None:
    """Per-frame trace table; absent frames keep empty numeric cells."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for i in range(len(trace)):
            ok = bool(trace.present[i])
            cells = [str(int(trace.frame_index[i])), repr(float(trace.t[i]))]
            for ch in TRACE_CHANNELS:
                v = trace.channel(ch)[i]
                cells.append(repr(float(v)) if ok and np.isfinite(v) else "")
            cells.append("true" if ok else "false")
            writer.writerow(cells)
    os.replace(tmp, path)
