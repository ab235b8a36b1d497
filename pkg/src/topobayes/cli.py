"""Batch command-line surface for the signal classification pipeline.

Subcommands: generate, pd, fit, classify, cv, heatmap, pipeline. Structured
artifacts are JSON; signals and heatmap grids are CSV. Exit codes are stable
for scripting: 0 success, 1 validation error, 2 I/O or data-file error.
Within a subcommand, file-level work may run on a thread pool capped by the
TOPOBAYES_THREADS environment variable (default 1); outputs are assembled in
input order either way.
"""

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .classifier import (
    LabeledDataset,
    classify,
    cross_validate,
    fit_class_model,
    model_from_json,
    model_to_json,
)
from .errors import DataFileError, ValidationError
from .filtration import diagram_from_json, diagram_to_json, sublevel_pd, tilt
from .intensity import grid_axes, intensity_grid, mixture_from_json
from .posterior import PosteriorConfig, default_clutter, default_prior
from .signals import ALPHA_BAND, BETA_BAND, generate_band_signal, add_noise, load_signal

_BANDS = {"alpha": ALPHA_BAND, "beta": BETA_BAND}


def _thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("TOPOBAYES_THREADS", "1")))
    except ValueError:
        return 1


def _write_json(path, obj):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(_json_safe(obj), indent=2, sort_keys=True) + "\n")


def _json_safe(obj):
    # strict JSON: non-finite floats become strings
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def _read_json(path):
    p = Path(path)
    if not p.exists():
        raise DataFileError(f"{p}: no such file")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise DataFileError(f"{p}: malformed JSON ({e})") from None


def _write_signal_csv(path, signal):
    lines = [format(v, ".17g") for v in signal.samples]
    Path(path).write_text("\n".join(lines) + "\n")


def _load_manifest(path):
    obj = _read_json(path)
    if not isinstance(obj, dict) or "entries" not in obj:
        raise DataFileError(f"{path}: manifest needs an 'entries' list")
    return obj, Path(path).parent


def _load_mixture_file(path):
    try:
        return mixture_from_json(_read_json(path))
    except ValidationError as e:
        raise DataFileError(f"{path}: {e}") from None


def _posterior_config(args):
    clutter = _load_mixture_file(args.clutter) if args.clutter else default_clutter()
    return PosteriorConfig(alpha=args.alpha, sigma_obs=args.sigma_obs, clutter=clutter)


def _prior(args):
    return _load_mixture_file(args.prior) if args.prior else default_prior()


def cmd_generate(args) -> int:
    """Write n band-limited signals as CSV plus a merged dataset manifest."""
    band = _BANDS[args.band]
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    entries = []
    for i in range(args.n):
        sig = generate_band_signal(band, args.duration, args.rate, args.seed + 2 * i)
        if args.snr is not None:
            sig = add_noise(sig, args.snr, args.seed + 2 * i + 1)
        name = f"{args.band}_{i:03d}.csv"
        _write_signal_csv(outdir / name, sig)
        entries.append({"signal": name, "label": args.band})

    manifest_path = outdir / "manifest.json"
    manifest = {"rate": args.rate, "entries": []}
    if manifest_path.exists():
        previous = _read_json(manifest_path)
        if previous.get("rate") not in (None, args.rate):
            raise ValidationError(
                f"manifest {manifest_path} has rate {previous.get('rate')}, "
                f"refusing to mix with {args.rate}"
            )
        manifest["entries"] = [
            e for e in previous.get("entries", []) if e.get("label") != args.band
        ]
    manifest["entries"].extend(entries)
    manifest["entries"].sort(key=lambda e: (e["label"], e.get("signal", "")))
    _write_json(manifest_path, manifest)
    return 0


def _signal_tasks(args):
    if args.manifest:
        manifest, base = _load_manifest(args.manifest)
        rate = args.rate if args.rate is not None else manifest.get("rate")
        tasks = []
        for e in manifest["entries"]:
            if "signal" not in e:
                raise DataFileError(f"{args.manifest}: entry without a 'signal' path")
            tasks.append((base / e["signal"], e.get("label"), rate))
        return tasks
    if not args.inputs:
        raise ValidationError("pd needs --manifest or signal files")
    return [(Path(p), None, args.rate) for p in args.inputs]


def _pd_one(task):
    path, label, rate = task
    fmt = "json" if path.suffix == ".json" else "csv"
    sig = load_signal(path, format=fmt, rate=rate if fmt == "csv" else None)
    return tilt(sublevel_pd(sig)), label


def cmd_pd(args) -> int:
    """Convert signals to tilted persistence diagram JSON files."""
    tasks = _signal_tasks(args)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    threads = _thread_cap()
    results = []
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_pd_one, t) for t in tasks]
            for task, fut in zip(tasks, futures):
                try:
                    results.append((task, fut.result(), None))
                except (DataFileError, ValidationError, OSError) as e:
                    results.append((task, None, e))
    else:
        for task in tasks:
            try:
                results.append((task, _pd_one(task), None))
            except (DataFileError, ValidationError, OSError) as e:
                results.append((task, None, e))

    entries = []
    failures = 0
    for (path, _, _), result, err in results:
        if err is not None:
            failures += 1
            print(f"error: {path}: {err}", file=sys.stderr)
            continue
        diagram, label = result
        name = path.stem + ".pd.json"
        _write_json(outdir / name, diagram_to_json(diagram))
        entry = {"diagram": name}
        if label is not None:
            entry["label"] = label
        entries.append(entry)
    _write_json(outdir / "manifest.json", {"entries": entries})
    return 2 if failures else 0


def _load_diagram_entries(manifest_path):
    manifest, base = _load_manifest(manifest_path)
    entries = []
    for e in manifest["entries"]:
        if "diagram" not in e:
            raise DataFileError(f"{manifest_path}: entry without a 'diagram' path")
        try:
            diagram = diagram_from_json(_read_json(base / e["diagram"]))
        except ValidationError as err:
            raise DataFileError(f"{base / e['diagram']}: {err}") from None
        entries.append((diagram, e.get("label")))
    return manifest, entries


def cmd_fit(args) -> int:
    """Fit one class model from the labeled diagrams in a manifest."""
    _, entries = _load_diagram_entries(args.manifest)
    training = [d for d, lab in entries if lab == args.label]
    if not training:
        raise ValidationError(f"no diagrams labeled {args.label!r} in manifest")
    model = fit_class_model(training, _prior(args), _posterior_config(args), args.label)
    _write_json(args.out, model_to_json(model))
    return 0


def cmd_classify(args) -> int:
    """Classify one diagram against two or more fitted models."""
    models = [model_from_json(_read_json(p)) for p in args.models]
    try:
        diagram = diagram_from_json(_read_json(args.diagram))
    except ValidationError as e:
        raise DataFileError(f"{args.diagram}: {e}") from None
    result = classify(diagram, models, args.threshold)
    report = {
        "label": result.label,
        "votes": result.votes,
        "log_densities": result.log_densities,
        "threshold": args.threshold,
    }
    if args.out:
        _write_json(args.out, report)
    else:
        print(json.dumps(_json_safe(report), indent=2, sort_keys=True))
    return 0


def cmd_cv(args) -> int:
    """Cross-validate the classifier on a labeled diagram manifest."""
    manifest, entries = _load_diagram_entries(args.manifest)
    if any(lab is None for _, lab in entries):
        raise ValidationError("cv needs a label on every manifest entry")
    k = args.k_folds if args.k_folds is not None else manifest.get("k_folds", 10)
    data = LabeledDataset(tuple(entries), k)
    report = cross_validate(
        data, _prior(args), _posterior_config(args), args.threshold, args.seed
    )
    if args.out:
        _write_json(args.out, report)
    else:
        print(json.dumps(_json_safe(report), indent=2, sort_keys=True))
    return 0


def cmd_heatmap(args) -> int:
    """Export a scaled intensity grid for a fitted model."""
    model = model_from_json(_read_json(args.model))
    bounds = _parse_bounds(args.bounds)
    resolution = _parse_res(args.res)
    grid = intensity_grid(model.posterior, bounds, resolution)
    b_axis, p_axis = grid_axes(bounds, resolution)

    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    csv_path = prefix.with_suffix(".csv")
    rows = [",".join(format(v, ".17g") for v in row) for row in grid]
    csv_path.write_text("\n".join(rows) + "\n")
    _write_json(
        prefix.with_suffix(".json"),
        {
            "bounds": list(bounds),
            "resolution": [len(b_axis), len(p_axis)],
            "rows": "birth",
            "cols": "persistence",
            "model": str(args.model),
        },
    )
    return 0


def cmd_pipeline(args) -> int:
    """Generate both bands, extract diagrams, and cross-validate, in one go."""
    out = Path(args.out)
    sig_dir = out / "signals"
    for band, seed_offset in (("alpha", 0), ("beta", 1_000_000)):
        cmd_generate(
            argparse.Namespace(
                band=band, n=args.n, duration=args.duration, rate=args.rate,
                snr=args.snr, seed=args.seed + seed_offset, out=str(sig_dir),
            )
        )
    code = cmd_pd(
        argparse.Namespace(
            manifest=str(sig_dir / "manifest.json"), inputs=[], rate=None,
            out=str(out / "diagrams"),
        )
    )
    if code != 0:
        return code
    report_path = out / "cv_report.json"
    cmd_cv(
        argparse.Namespace(
            manifest=str(out / "diagrams" / "manifest.json"), k_folds=args.k_folds,
            alpha=args.alpha, sigma_obs=args.sigma_obs, prior=args.prior,
            clutter=args.clutter, threshold=args.threshold, seed=args.seed,
            out=str(report_path),
        )
    )
    report = _read_json(report_path)
    print(f"cv accuracy: {report['accuracy']:.4f} ({report_path})")
    return 0


def _parse_bounds(text):
    parts = text.split(",")
    if len(parts) != 4:
        raise ValidationError("--bounds expects bmin,pmin,bmax,pmax")
    try:
        return tuple(float(v) for v in parts)
    except ValueError:
        raise ValidationError(f"malformed --bounds {text!r}") from None


def _parse_res(text):
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise ValidationError("--res expects NxM, e.g. 128x128")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise ValidationError(f"malformed --res {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on bad arguments, per the exit-code contract
        raise ValidationError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="topobayes", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write synthetic band-limited signals")
    p.add_argument("--band", choices=sorted(_BANDS), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--duration", type=float, default=2.0)
    p.add_argument("--rate", type=float, default=256.0)
    p.add_argument("--snr", type=float, default=None, help="SNR in dB; omit for clean signals")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("pd", help="convert signals to persistence diagrams")
    p.add_argument("inputs", nargs="*", help="signal files (alternative to --manifest)")
    p.add_argument("--manifest")
    p.add_argument("--rate", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pd)

    p = sub.add_parser("fit", help="fit one class model from labeled diagrams")
    p.add_argument("--manifest", required=True)
    p.add_argument("--label", required=True)
    p.add_argument("--alpha", type=float, default=0.7)
    p.add_argument("--sigma-obs", dest="sigma_obs", type=float, default=0.2)
    p.add_argument("--prior", default=None)
    p.add_argument("--clutter", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("classify", help="classify one diagram against fitted models")
    p.add_argument("--models", nargs="+", required=True)
    p.add_argument("--diagram", required=True)
    p.add_argument("--threshold", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("cv", help="k-fold cross validation on a labeled manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--k-folds", dest="k_folds", type=int, default=None)
    p.add_argument("--alpha", type=float, default=0.7)
    p.add_argument("--sigma-obs", dest="sigma_obs", type=float, default=0.2)
    p.add_argument("--prior", default=None)
    p.add_argument("--clutter", default=None)
    p.add_argument("--threshold", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("heatmap", help="export a scaled intensity grid as CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--bounds", required=True, help="bmin,pmin,bmax,pmax")
    p.add_argument("--res", required=True, help="NxM grid resolution")
    p.add_argument("--out", required=True, help="output path prefix")
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("pipeline", help="generate -> pd -> cv in one command")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--duration", type=float, default=2.0)
    p.add_argument("--rate", type=float, default=256.0)
    p.add_argument("--snr", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.7)
    p.add_argument("--sigma-obs", dest="sigma_obs", type=float, default=0.2)
    p.add_argument("--prior", default=None)
    p.add_argument("--clutter", default=None)
    p.add_argument("--k-folds", dest="k_folds", type=int, default=10)
    p.add_argument("--threshold", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except DataFileError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def entrypoint():
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
