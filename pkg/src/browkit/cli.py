"""Command-line pipeline: extract, deviations, correct, aggregate, synth, plot-data.

Every command is deterministic given inputs, flags, and seed; outputs are
written to a temp file and renamed into place, so an interrupted run never
clobbers a previous complete one. A ``run_config.json`` with the resolved
parameters lands next to each command's outputs so runs can be reproduced.

Flags win over the optional ``--config`` JSON file, which wins over defaults.
"""

from __future__ import annotations

import glob
import json
import os
import sys
from pathlib import Path

import click
import numpy as np
from click.core import ParameterSource

from . import correction, metrics, plotting, synth
from .errors import BrowkitError
from .geometry import derotate_and_center, estimate_pose_rigid
from .landmark_io import (
    DEFAULT_CONFIDENCE_THRESHOLD,
    CAMERA_DISTANCES,
    CONDITIONS,
    LandmarkSequence,
    SequenceMeta,
    parse_interchange,
    parse_openface_csv,
    write_interchange,
)
from .schema import load_schema, schema_for_tracker

STATS_CAVEAT = (
    "note: p-values treat frames within a video as independent observations; "
    "frames are autocorrelated, so significance is optimistic."
)


def _expand_inputs(inputs: tuple[str, ...]) -> list[Path]:
    paths: list[Path] = []
    for item in inputs:
        if any(c in item for c in "*?["):
            matches = sorted(glob.glob(item))
            paths.extend(Path(m) for m in matches)
        else:
            paths.append(Path(item))
    if not paths:
        raise click.ClickException("no inputs")
    return paths


def _merge_config(ctx: click.Context, config: str | None, params: dict) -> dict:
    if not config:
        return params
    try:
        with open(config, encoding="utf-8") as fh:
            file_params = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise click.ClickException(f"cannot read config {config}: {exc}")
    unknown = sorted(set(file_params) - set(params))
    if unknown:
        raise click.ClickException(f"config {config}: unknown key(s) {unknown}")
    out = dict(params)
    for key, value in file_params.items():
        if ctx.get_parameter_source(key) == ParameterSource.DEFAULT:
            out[key] = value
    return out


def _write_run_config(out_dir: Path, command: str, params: dict) -> None:
    record = {"command": command}
    for k, v in params.items():
        record[k] = list(v) if isinstance(v, tuple) else v
    path = out_dir / "run_config.json"
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(record, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def _auto_pose_source(seq: LandmarkSequence, pose_source: str) -> str:
    if pose_source in ("file", "from_file"):
        return "from_file"
    if pose_source in ("rigid", "rigid_estimate"):
        return "rigid_estimate"
    first = next((f for f in seq.frames if f.present), None)
    return "from_file" if first is not None and first.pose is not None else "rigid_estimate"


def _load_trace(
    path: Path, pose_source: str, signed: bool, two_d: bool
) -> metrics.BrowTrace:
    seq = parse_interchange(path)
    return metrics.extract_trace(
        seq,
        pose_source=_auto_pose_source(seq, pose_source),
        signed=signed,
        drop_z=two_d,
        name=path.stem,
    )


def _load_traces(paths, pose_source, signed, two_d) -> list[metrics.BrowTrace]:
    traces = []
    for p in paths:
        try:
            traces.append(_load_trace(p, pose_source, signed, two_d))
        except (BrowkitError, OSError, ValueError) as exc:
            raise click.ClickException(f"{p}: {exc}")
    return traces


@click.group()
@click.version_option(package_name="browkit")
def main():
    """Eyebrow-position measurement, tracker-distortion benchmarking, and correction."""


# ---------------------------------------------------------------------------
# extract

@main.command()
@click.argument("inputs", nargs=-1, required=True)
@click.option("--out-dir", "-o", required=True, type=click.Path(file_okay=False))
@click.option("--tracker", type=click.Choice(["auto", "openface", "interchange"]), default="auto")
@click.option("--schema", "schema_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--confidence-threshold", type=float, default=DEFAULT_CONFIDENCE_THRESHOLD,
              show_default=True)
@click.option("--camera-distance", type=click.Choice(CAMERA_DISTANCES), default="unknown")
@click.option("--condition", type=click.Choice(CONDITIONS), default="custom")
@click.option("--subject", default="")
@click.option("--eyebrows", type=click.Choice(["raised", "neutral", "unknown"]), default="unknown")
@click.option("--meta-manifest", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON: basename -> {camera_distance, condition, subject, eyebrows_raised}.")
@click.option("--pose-source", type=click.Choice(["auto", "file", "rigid"]), default="auto")
@click.option("--signed/--unsigned", default=False)
@click.option("--two-d/--three-d", default=False)
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None)
@click.pass_context
def extract(ctx, inputs, out_dir, tracker, schema_path, confidence_threshold,
            camera_distance, condition, subject, eyebrows, meta_manifest,
            pose_source, signed, two_d, config):
    """Convert tracker outputs to interchange files and per-frame trace CSVs."""
    params = _merge_config(ctx, config, dict(
        tracker=tracker, schema_path=schema_path,
        confidence_threshold=confidence_threshold, camera_distance=camera_distance,
        condition=condition, subject=subject, eyebrows=eyebrows,
        meta_manifest=meta_manifest, pose_source=pose_source, signed=signed,
        two_d=two_d,
    ))
    paths = _expand_inputs(inputs)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    manifest = {}
    if params["meta_manifest"]:
        with open(params["meta_manifest"], encoding="utf-8") as fh:
            manifest = json.load(fh)

    raised = {"raised": True, "neutral": False, "unknown": None}[params["eyebrows"]]
    failures = 0
    for path in paths:
        try:
            kind = params["tracker"]
            if kind == "auto":
                kind = "openface" if path.suffix.lower() == ".csv" else "interchange"
            if kind == "openface":
                schema = (
                    load_schema(params["schema_path"])
                    if params["schema_path"]
                    else schema_for_tracker("openface")
                )
                entry = manifest.get(path.name, {})
                meta = SequenceMeta(
                    tracker="openface",
                    camera_distance=entry.get("camera_distance", params["camera_distance"]),
                    condition=entry.get("condition", params["condition"]),
                    eyebrows_raised=entry.get("eyebrows_raised", raised),
                    subject=entry.get("subject", params["subject"]),
                )
                seq = parse_openface_csv(
                    path, schema,
                    confidence_threshold=params["confidence_threshold"],
                    meta=meta,
                )
            else:
                seq = parse_interchange(path)
            write_interchange(seq, out / f"{path.stem}.jsonl")
            trace = metrics.extract_trace(
                seq,
                pose_source=_auto_pose_source(seq, params["pose_source"]),
                signed=params["signed"],
                drop_z=params["two_d"],
                name=path.stem,
            )
            metrics.write_trace_csv(trace, out / f"{path.stem}_trace.csv")
        except (BrowkitError, OSError, ValueError) as exc:
            failures += 1
            click.echo(f"error: {path}: {exc}", err=True)
    _write_run_config(out, "extract", params)
    if failures:
        sys.exit(1)


# ---------------------------------------------------------------------------
# deviations

@main.command()
@click.argument("inputs", nargs=-1, required=True)
@click.option("--out-dir", "-o", required=True, type=click.Path(file_okay=False))
@click.option("--variant", type=click.Choice(metrics.DEVIATION_VARIANTS), default="rms",
              show_default=True)
@click.option("--baseline-window", type=int, default=1, show_default=True)
@click.option("--scale-scope", type=click.Choice(["group", "video"]), default="group")
@click.option("--pose-source", type=click.Choice(["auto", "file", "rigid"]), default="auto")
@click.option("--signed/--unsigned", default=False)
@click.option("--two-d/--three-d", default=False)
@click.option("--figures/--no-figures", default=True)
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None)
@click.pass_context
def deviations(ctx, inputs, out_dir, variant, baseline_window, scale_scope,
               pose_source, signed, two_d, figures, config):
    """Baseline-deviation report per video and brow kind, with t-tests."""
    params = _merge_config(ctx, config, dict(
        variant=variant, baseline_window=baseline_window, scale_scope=scale_scope,
        pose_source=pose_source, signed=signed, two_d=two_d, figures=figures,
    ))
    paths = _expand_inputs(inputs)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    traces = _load_traces(paths, params["pose_source"], params["signed"], params["two_d"])
    ungrouped = [tr.name for tr in traces if tr.meta.camera_distance == "unknown"]
    if ungrouped:
        raise click.ClickException(
            f"inputs without a camera-distance group: {ungrouped}; "
            "set camera_distance in the interchange header (extract --camera-distance)"
        )
    scaled, _ = metrics.scale_traces(traces, scope=params["scale_scope"])
    rows = metrics.build_deviation_report(
        scaled, baseline_window=params["baseline_window"], variant=params["variant"]
    )
    metrics.write_deviation_csv(rows, out / "deviations.csv")
    if params["figures"]:
        plotting.save_deviation_figure(rows, out / "deviations.png",
                                       title=f"baseline deviation ({params['variant']})")
    _write_run_config(out, "deviations", params)
    click.echo(STATS_CAVEAT, err=True)


# ---------------------------------------------------------------------------
# correct

@main.command()
@click.argument("inputs", nargs=-1, required=True)
@click.option("--out-dir", "-o", required=True, type=click.Path(file_okay=False))
@click.option("--fit-from", multiple=True, type=click.Path(exists=True, dir_okay=False),
              help="Neutral-eyebrow interchange file(s) to fit the model on.")
@click.option("--model", "model_paths", multiple=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Previously fitted model JSON(s) to apply instead of fitting.")
@click.option("--features", default="linear", show_default=True,
              help="'linear', 'quadratic', or a comma list (e.g. 'pitch,pitch2').")
@click.option("--brow-kind", type=click.Choice(["inner", "outer", "both"]), default="both")
@click.option("--scale-scope", type=click.Choice(["group", "video"]), default="group")
@click.option("--pose-source", type=click.Choice(["auto", "file", "rigid"]), default="auto")
@click.option("--signed/--unsigned", default=False)
@click.option("--two-d/--three-d", default=False)
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None)
@click.pass_context
def correct(ctx, inputs, out_dir, fit_from, model_paths, features, brow_kind,
            scale_scope, pose_source, signed, two_d, config):
    """Remove pose-attributable distortion from traces.

    Either fit models on neutral-eyebrow recordings (--fit-from, one model
    per tracker, camera-distance group, and brow kind) or apply saved models
    (--model). Corrected trace CSVs are written in the input's raw units.
    """
    params = _merge_config(ctx, config, dict(
        fit_from=fit_from, model_paths=model_paths, features=features,
        brow_kind=brow_kind, scale_scope=scale_scope, pose_source=pose_source,
        signed=signed, two_d=two_d,
    ))
    if bool(params["fit_from"]) == bool(params["model_paths"]):
        raise click.ClickException("pass exactly one of --fit-from or --model")
    kinds = ("inner", "outer") if params["brow_kind"] == "both" else (params["brow_kind"],)
    paths = _expand_inputs(inputs)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    targets_raw = _load_traces(paths, params["pose_source"], params["signed"], params["two_d"])

    if params["model_paths"]:
        try:
            models = [correction.load_model(p) for p in params["model_paths"]]
            for tr_raw, path in zip(targets_raw, paths):
                corrected = tr_raw
                for model in models:
                    if model.brow_kind not in kinds:
                        continue
                    corrected = _apply_with_scaling(model, corrected)
                metrics.write_trace_csv(corrected, out / f"{path.stem}_corrected_trace.csv")
        except BrowkitError as exc:
            raise click.ClickException(str(exc))
        _write_run_config(out, "correct", params)
        return

    fit_paths = [Path(p) for p in params["fit_from"]]
    neutral_raw = _load_traces(fit_paths, params["pose_source"], params["signed"], params["two_d"])

    everything = targets_raw + neutral_raw
    scaled, _ = metrics.scale_traces(everything, scope=params["scale_scope"])
    targets = scaled[: len(targets_raw)]
    neutral = scaled[len(targets_raw):]

    def group_key(tr):
        return (tr.meta.tracker, tr.meta.camera_distance)

    models: dict[tuple, dict[str, correction.CorrectionModel]] = {}
    try:
        for key in sorted({group_key(tr) for tr in neutral}):
            group_neutral = [tr for tr in neutral if group_key(tr) == key]
            models[key] = {}
            for kind in kinds:
                ts = correction.build_training_set(group_neutral, kind, params["features"])
                model = correction.fit(ts)
                models[key][kind] = model
                correction.save_model(
                    model, out / f"model_{key[0]}_{key[1]}_{kind}.json"
                )

        for tr_raw, tr_scaled, path in zip(targets_raw, targets, paths):
            key = group_key(tr_scaled)
            if key not in models:
                raise click.ClickException(
                    f"{path}: no neutral-eyebrow recordings for tracker/group {key}"
                )
            corrected = tr_raw
            for kind in kinds:
                fixed = correction.apply(models[key][kind], tr_scaled)
                sp = tr_scaled.scaling.get(kind)
                values = fixed.channel(kind)
                corrected = corrected.with_channel(
                    kind, sp.invert(values) if sp is not None else values
                )
            metrics.write_trace_csv(corrected, out / f"{path.stem}_corrected_trace.csv")
    except BrowkitError as exc:
        raise click.ClickException(str(exc))
    _write_run_config(out, "correct", params)


def _apply_with_scaling(
    model: correction.CorrectionModel, trace_raw: metrics.BrowTrace
) -> metrics.BrowTrace:
    """Scale with the model's recorded parameters, correct, and unscale."""
    kind = model.brow_kind
    if model.scaling is not None:
        scaled = trace_raw.with_channel(kind, model.scaling.apply(trace_raw.channel(kind)))
        scaled.scaling = {**scaled.scaling, kind: model.scaling}
    else:
        scaled = trace_raw
    fixed = correction.apply(model, scaled)
    values = fixed.channel(kind)
    if model.scaling is not None:
        values = model.scaling.invert(values)
    return trace_raw.with_channel(kind, values)


# ---------------------------------------------------------------------------
# aggregate

@main.command()
@click.argument("inputs", nargs=-1, required=True)
@click.option("--out-dir", "-o", required=True, type=click.Path(file_okay=False))
@click.option("--n", "n_points", type=int, default=metrics.DEFAULT_NORMALIZED_LENGTH,
              show_default=True, help="Resample every trace to this many points.")
@click.option("--max-gap", type=int, default=None,
              help="Longest dropout gap (source frames) to interpolate across.")
@click.option("--brow-kind", type=click.Choice(["inner", "outer", "both"]), default="both")
@click.option("--key", "group_field",
              type=click.Choice(["condition", "subject", "camera_distance", "tracker"]),
              default="condition", show_default=True,
              help="Metadata field that defines the aggregation groups.")
@click.option("--scale-scope", type=click.Choice(["group", "video"]), default="group")
@click.option("--pose-source", type=click.Choice(["auto", "file", "rigid"]), default="auto")
@click.option("--signed/--unsigned", default=False)
@click.option("--two-d/--three-d", default=False)
@click.option("--figures/--no-figures", default=True)
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None)
@click.pass_context
def aggregate(ctx, inputs, out_dir, n_points, max_gap, brow_kind, group_field,
              scale_scope, pose_source, signed, two_d, figures, config):
    """Per-condition mean trace with a pointwise dispersion band."""
    params = _merge_config(ctx, config, dict(
        n_points=n_points, max_gap=max_gap, brow_kind=brow_kind,
        group_field=group_field, scale_scope=scale_scope,
        pose_source=pose_source, signed=signed, two_d=two_d, figures=figures,
    ))
    kinds = ("inner", "outer") if params["brow_kind"] == "both" else (params["brow_kind"],)
    paths = _expand_inputs(inputs)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    traces = _load_traces(paths, params["pose_source"], params["signed"], params["two_d"])
    try:
        normalized = [
            metrics.normalize_time(tr, n=params["n_points"], max_gap=params["max_gap"])
            for tr in traces
        ]
        scaled, _ = metrics.scale_traces(normalized, scope=params["scale_scope"])
    except (BrowkitError, ValueError) as exc:
        raise click.ClickException(str(exc))

    field = params["group_field"]
    rows = []
    for kind in kinds:
        aggs = metrics.aggregate_condition(
            scaled, brow_kind=kind, key=lambda tr: getattr(tr.meta, field)
        )
        for cond in sorted(aggs):
            agg = aggs[cond]
            for i in range(agg.x.size):
                rows.append((cond, kind, int(agg.x[i]), agg.mean[i], agg.sd[i], agg.n_traces))
        if params["figures"]:
            plotting.save_aggregate_figure(
                aggs, out / f"aggregate_{kind}.png", title=f"{kind} brow distance"
            )

    path = out / "aggregate.csv"
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write("condition,brow_kind,x,mean,sd,n_traces\n")
        for cond, kind, x, mean, sd, n in rows:
            mean_s = repr(float(mean)) if np.isfinite(mean) else ""
            sd_s = repr(float(sd)) if np.isfinite(sd) else ""
            fh.write(f"{cond},{kind},{x},{mean_s},{sd_s},{n}\n")
    os.replace(tmp, path)
    _write_run_config(out, "aggregate", params)


# ---------------------------------------------------------------------------
# synth

@main.command()
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", "-o", required=True, type=click.Path(file_okay=False))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--model", "model_paths", multiple=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Correction model(s) to score against the ground truth.")
@click.option("--figures/--no-figures", default=True)
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None)
@click.pass_context
def synth_cmd(ctx, scenario, out_dir, seed, model_paths, figures, config):
    """Generate a ground-truth/observed pair from a scenario file and score it."""
    params = _merge_config(ctx, config, dict(
        seed=seed, model_paths=model_paths, figures=figures,
    ))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    scn = synth.load_scenario(scenario)
    truth_seq, observed_seq = synth.generate(
        scn.template, scn.script, scn.distortion, seed=params["seed"], meta=scn.meta
    )
    write_interchange(truth_seq, out / f"{scn.name}_truth.jsonl")
    write_interchange(observed_seq, out / f"{scn.name}_observed.jsonl")

    truth_tr = metrics.extract_trace(truth_seq, name=f"{scn.name}_truth")
    observed_tr = metrics.extract_trace(observed_seq, name=f"{scn.name}_observed")

    models = [correction.load_model(p) for p in params["model_paths"]]
    card = {}
    for kind in ("inner", "outer"):
        corrected_tr = None
        for model in models:
            if model.brow_kind == kind:
                corrected_tr = _apply_with_scaling(model, observed_tr)
        card[kind] = synth.score_correction(truth_tr, observed_tr, corrected_tr, kind).to_dict()

    path = out / f"{scn.name}_scorecard.json"
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(card, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    os.replace(tmp, path)

    if params["figures"]:
        series = {
            "truth inner": (truth_tr.frame_index, truth_tr.inner),
            "observed inner": (observed_tr.frame_index, observed_tr.inner),
            "truth outer": (truth_tr.frame_index, truth_tr.outer),
            "observed outer": (observed_tr.frame_index, observed_tr.outer),
        }
        plotting.save_series_figure(
            series, out / f"{scn.name}_traces.png",
            title=scn.name, ylabel="brow distance (template units)",
        )
    _write_run_config(out, "synth", params)


# ---------------------------------------------------------------------------
# plot-data

@main.command("plot-data")
@click.argument("inputs", nargs=-1, required=True)
@click.option("--out-dir", "-o", required=True, type=click.Path(file_okay=False))
@click.option("--channels", default="inner,outer", show_default=True,
              help=f"Comma list from {metrics.TRACE_CHANNELS}.")
@click.option("--scale/--no-scale", "do_scale", default=False,
              help="Unit-scale channels within camera-distance groups first.")
@click.option("--head-model", is_flag=True, default=False,
              help="Emit derotated face snapshots (first / mid / peak pitch) instead of traces.")
@click.option("--name", "stem", default="plot_data", show_default=True)
@click.option("--pose-source", type=click.Choice(["auto", "file", "rigid"]), default="auto")
@click.option("--signed/--unsigned", default=False)
@click.option("--two-d/--three-d", default=False)
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None)
@click.pass_context
def plot_data(ctx, inputs, out_dir, channels, do_scale, head_model, stem,
              pose_source, signed, two_d, config):
    """Long-format plot CSV plus SVG/PNG line charts (gaps stay gaps)."""
    params = _merge_config(ctx, config, dict(
        channels=channels, do_scale=do_scale, head_model=head_model, stem=stem,
        pose_source=pose_source, signed=signed, two_d=two_d,
    ))
    paths = _expand_inputs(inputs)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = params["stem"]

    if params["head_model"]:
        series_pts, csv_rows = _head_model_series(paths, params["pose_source"])
        svg_series = {}
        for label, pts in series_pts.items():
            for j, (x, y) in enumerate(plotting.face_outline_series(pts)):
                svg_series[f"{label}#{j}" if j else label] = (x, y)
        plotting.write_svg_chart(svg_series, out / f"{stem}.svg", title="derotated head model")
        plotting.save_head_model_figure(series_pts, out / f"{stem}.png",
                                        title="derotated head model")
    else:
        wanted = tuple(c.strip() for c in params["channels"].split(",") if c.strip())
        for c in wanted:
            if c not in metrics.TRACE_CHANNELS:
                raise click.ClickException(
                    f"unknown channel {c!r}; choose from {metrics.TRACE_CHANNELS}"
                )
        traces = _load_traces(paths, params["pose_source"], params["signed"], params["two_d"])
        if params["do_scale"]:
            traces, _ = metrics.scale_traces(traces, channels=wanted)
        series = {}
        csv_rows = []
        for tr in traces:
            for ch in wanted:
                label = f"{tr.name}:{ch}"
                x = tr.frame_index.astype(float)
                y = tr.channel(ch)
                series[label] = (x, y)
                for i in range(len(tr)):
                    if tr.present[i] and np.isfinite(y[i]):
                        csv_rows.append((label, float(x[i]), float(y[i])))
        plotting.write_svg_chart(series, out / f"{stem}.svg")
        plotting.save_series_figure(series, out / f"{stem}.png", ylabel="value")

    path = out / f"{stem}.csv"
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write("series,x,y\n")
        for label, x, y in csv_rows:
            fh.write(f"{label},{x!r},{y!r}\n")
    os.replace(tmp, path)
    _write_run_config(out, "plot-data", params)


def _head_model_series(paths: list[Path], pose_source: str):
    """Derotated role points at the first, mid-pitch, and peak-pitch frames."""
    snapshots: dict[str, dict[str, np.ndarray]] = {}
    csv_rows: list[tuple[str, float, float]] = []
    for path in paths:
        try:
            seq = parse_interchange(path)
            source = _auto_pose_source(seq, pose_source)
            present = [f for f in seq.frames if f.present]
            if not present:
                raise BrowkitError("no present frames")
            reference = present[0]

            def pose_of(frame):
                if source == "from_file":
                    if frame.pose is None:
                        raise BrowkitError(f"frame {frame.frame_index} has no pose")
                    return frame.pose
                return estimate_pose_rigid(frame, reference)

            poses = [pose_of(f) for f in present]
            peak_i = int(np.argmax([abs(p.pitch) for p in poses]))
            mid_i = peak_i // 2
            for label, idx in (("start", 0), ("mid", mid_i), ("peak", peak_i)):
                frame = derotate_and_center(present[idx], poses[idx])
                key = f"{path.stem}:{label}"
                snapshots[key] = frame.points
                for role in sorted(frame.points):
                    p = frame.points[role]
                    csv_rows.append((f"{key}:{role}", float(p[0]), float(p[1])))
        except (BrowkitError, OSError, ValueError) as exc:
            raise click.ClickException(f"{path}: {exc}")
    return snapshots, csv_rows


if __name__ == "__main__":
    main()
