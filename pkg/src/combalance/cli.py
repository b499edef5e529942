"""Command-line front end.

Subcommands: ``compare``, ``fit``, ``correct``, ``simulate``, ``plot``, ``bfp``.
Exit codes: 0 success, 2 configuration error, 3 data error, 4 pipeline error.
"""

import argparse
import json
import logging
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .anthro import BMI_VARIANTS, SEXES, SubjectProfile, profile_bfp
from .config import CONFIG_ENV, load_config
from .correction import BUILTIN_MODELS, MODES, apply_correction, fit_correction, load_model
from .errors import (
    EXIT_PIPELINE,
    CombalanceError,
    ConfigError,
    DataFileError,
    ImplausibleBodyFatWarning,
)
from .io import (
    MANIFEST_VERSION,
    RESULTS_VERSION,
    dump_json,
    file_checksum,
    fmt,
    read_manifest,
    read_results,
    read_trajectory,
    write_results,
    write_text,
    write_trajectory,
)
from .pipeline import calibration_set, compare_prepared, prepare_session
from .plot import pixel_table, render_svg
from .signal import NORMALIZATION_MODES
from .sim import RNG_ALGORITHM, Scenario, write_session

MODEL_VERSION = "1.0.0"
SEGMENT_TABLE_VERSION = "1.0.0"
SCHEMA_VERSIONS = {
    "manifest": MANIFEST_VERSION,
    "results": RESULTS_VERSION,
    "model": MODEL_VERSION,
    "segment_table": SEGMENT_TABLE_VERSION,
}


def _pipeline_overrides(args):
    keys = ("resample_rate_hz", "max_lag_s", "normalization", "quality_threshold", "lag_correction",
            "model", "correction_mode", "ridge", "output_dir", "bmi_variant")
    return {k: getattr(args, k, None) for k in keys}


def _map(fn, items, jobs):
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def _model_info(source):
    if source is None:
        return None
    if source in BUILTIN_MODELS:
        return {"source": source, "sha256": None}
    return {"source": Path(source).name, "sha256": file_checksum(source)}


def cmd_compare(args):
    config = load_config(args.config, _pipeline_overrides(args))
    model = load_model(config.model) if config.model else None
    model_info = _model_info(config.model)
    out_root = Path(config.output_dir)

    def run(manifest_path):
        manifest = read_manifest(manifest_path)
        prep = prepare_session(manifest, config)
        stats, curves = compare_prepared(prep, model)
        run_meta = {
            "command": "compare",
            "versions": SCHEMA_VERSIONS,
            "config": config.to_dict(),
            "session_id": manifest.session_id,
            "manifest": Path(manifest_path).name,
            "manifest_sha256": file_checksum(manifest_path),
            "inputs": prep.inputs,
            "model": model_info,
            "profile": manifest.profile.to_dict(),
            "lag_s": prep.lag_s,
            "frames": {"total": prep.frames_total, "used": prep.frames_used},
        }
        write_results(stats, curves, out_root / manifest.session_id, run_meta)
        return manifest.session_id, stats

    for session_id, stats in _map(run, args.manifests, args.jobs):
        by_axis = {s.axis: s for s in stats}
        print(f"{session_id}: lag={by_axis['y'].lag_applied_s:g}s "
              f"mean_x={by_axis['x'].mean:.6g} mean_y={by_axis['y'].mean:.6g} "
              f"sd_y={by_axis['y'].sd:.6g} n={by_axis['y'].n}")
    return 0


def cmd_fit(args):
    config = load_config(args.config, _pipeline_overrides(args))
    preps = _map(lambda p: prepare_session(read_manifest(p), config), args.manifests, args.jobs)
    model = fit_correction([calibration_set(p) for p in preps], ridge=config.ridge,
                           mode=config.correction_mode)
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    write_text(out, dump_json(model.to_dict()))
    d = model.diagnostics
    print(f"rmse={d.rmse:.6g} condition_number={d.condition_number:.6g} n={d.n_samples}")
    return 0


def cmd_correct(args):
    model = load_model(args.model)
    if args.manifest:
        profile = read_manifest(args.manifest).profile
    else:
        try:
            doc = json.loads(Path(args.profile).read_text("utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise DataFileError(f"cannot read profile: {exc}", args.profile) from exc
        profile = SubjectProfile.from_dict(doc)
    if profile.bfp is None:
        profile_bfp(profile, profile.bmi_variant)
    traj = read_trajectory(args.trajectory)
    write_trajectory(apply_correction(traj, profile, model), args.out)
    return 0


def cmd_simulate(args):
    try:
        doc = json.loads(Path(args.scenario).read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataFileError(f"cannot read scenario: {exc}", args.scenario) from exc
    manifest = write_session(Scenario.from_dict(doc), args.out)
    print(f"wrote {manifest} (rng {RNG_ALGORITHM})")
    return 0


def cmd_plot(args):
    results = Path(args.results)
    _, curves, _ = read_results(results)
    out = Path(args.out) if args.out else results
    out.mkdir(parents=True, exist_ok=True)
    write_text(out / "error_curves.svg", render_svg(curves))
    rows = [",".join(fmt(v) for v in r) for r in pixel_table(curves)]
    write_text(out / "error_curves.csv", "\n".join(["t,err_x,err_y,px,py_x,py_y", *rows]) + "\n")
    return 0


def cmd_bfp(args):
    if args.profile:
        try:
            doc = json.loads(Path(args.profile).read_text("utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise DataFileError(f"cannot read profile: {exc}", args.profile) from exc
        doc.pop("bmi", None)
        doc.pop("bfp", None)
        profile = SubjectProfile.from_dict(doc)
    else:
        missing = [n for n in ("weight", "height", "age", "sex") if getattr(args, n) is None]
        if missing:
            raise ConfigError(f"bfp needs --profile or --weight/--height/--age/--sex (missing {missing})")
        profile = SubjectProfile("cli", args.weight, args.height, args.age, args.sex)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ImplausibleBodyFatWarning)
        profile_bfp(profile, args.bmi_variant)
    print(dump_json({
        "id": profile.id,
        "bmi_variant": profile.bmi_variant,
        "bmi": profile.bmi,
        "bfp": profile.bfp,
        "plausible": not caught,
    }), end="")
    return 0


def _add_pipeline_flags(p):
    p.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")
    p.add_argument("--rate", dest="resample_rate_hz", type=float, help="resampling rate in Hz (30)")
    p.add_argument("--max-lag", dest="max_lag_s", type=float, help="lag search window in s (1.0)")
    p.add_argument("--normalization", choices=NORMALIZATION_MODES)
    p.add_argument("--quality-threshold", type=float, help="minimum frame quality (0.9)")
    p.add_argument("--no-lag-correction", dest="lag_correction", action="store_false", default=None)
    p.add_argument("--bmi-variant", choices=BMI_VARIANTS)
    p.add_argument("--jobs", type=int, default=1, help="sessions processed in parallel")


def build_parser():
    parser = argparse.ArgumentParser(prog="combalance", description=__doc__.splitlines()[0])
    versions = ", ".join(f"{k} {v}" for k, v in SCHEMA_VERSIONS.items())
    parser.add_argument("--version", action="version", version=f"combalance {__version__} ({versions})")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compare", help="compare Kinect CoM with board CoP for sessions")
    p.add_argument("manifests", nargs="+")
    p.add_argument("--out", dest="output_dir", help="results directory (results)")
    p.add_argument("--model", help=f"correction model file or one of {sorted(BUILTIN_MODELS)}")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("fit", help="fit a correction model from calibration sessions")
    p.add_argument("manifests", nargs="+")
    p.add_argument("--out", required=True, help="model JSON to write")
    p.add_argument("--mode", dest="correction_mode", choices=MODES)
    p.add_argument("--ridge", type=float)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("correct", help="apply a correction model to a t,x,y trajectory")
    p.add_argument("trajectory")
    p.add_argument("--model", required=True)
    who = p.add_mutually_exclusive_group(required=True)
    who.add_argument("--profile", help="subject profile JSON")
    who.add_argument("--manifest", help="take the profile from a session manifest")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("simulate", help="generate a synthetic session directory")
    p.add_argument("scenario")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("plot", help="render error curves of a results directory")
    p.add_argument("results")
    p.add_argument("--out")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("bfp", help="print BMI and body-fat percentage")
    p.add_argument("--profile")
    p.add_argument("--weight", type=float, help="kg")
    p.add_argument("--height", type=float, help="m")
    p.add_argument("--age", type=float, help="years")
    p.add_argument("--sex", choices=SEXES)
    p.add_argument("--bmi-variant", choices=BMI_VARIANTS, default="new_bmi")
    p.set_defaults(func=cmd_bfp)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except CombalanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: pipeline: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
