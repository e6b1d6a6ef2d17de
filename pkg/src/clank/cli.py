"""Command-line interface wiring the modules into batch workflows.

Subcommands: ``library validate``, ``synth``, ``features``, ``fuse-demo``,
``eval``. Machine-readable results go to stdout as JSON; diagnostics and
tables go to stderr. Exit codes: 0 success, 1 input or validation error,
2 internal error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
import traceback
from pathlib import Path

import numpy as np

from . import evaluation, figures, fusion, spectral
from .errors import ClankError, MissingFileError, SchemaViolationError
from .events import DEFAULT_CONTROL_PERIOD, coalesce_contacts, parse_events
from .library import load_library, validate_manifest
from .render import RenderConfig, chunk_stream, render
from .wav import read_wav, write_wav

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; bad flags are input errors here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="clank", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=None, help="override the RNG seed")
    parser.add_argument(
        "--config", default=None, metavar="JSON",
        help="JSON file overriding render defaults (keys match RenderConfig fields)",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_library = sub.add_parser("library", help="sound library maintenance")
    library_sub = p_library.add_subparsers(dest="library_command", required=True)
    p_validate = library_sub.add_parser("validate", help="check a manifest and its clips")
    p_validate.add_argument("manifest")
    p_validate.set_defaults(func=cmd_library_validate)

    p_synth = sub.add_parser("synth", help="render an event stream to audio")
    p_synth.add_argument("events", help="collision events (JSONL)")
    p_synth.add_argument("manifest", help="sound library manifest (JSON)")
    p_synth.add_argument("out", help="output WAV (32-bit float mono)")
    p_synth.add_argument("--skip-unknown", action="store_true",
                         help="drop events with no library match instead of failing")
    p_synth.add_argument("--coalesce", action="store_true",
                         help="merge per-frame contact bursts before rendering")
    p_synth.add_argument("--gap-threshold", type=float, default=DEFAULT_CONTROL_PERIOD,
                         help="max gap (s) bridged by --coalesce (default: one control period)")
    p_synth.add_argument("--workers", type=int, default=1,
                         help="parallel event modulation (output is identical)")
    chunk_mode = p_synth.add_mutually_exclusive_group()
    chunk_mode.add_argument("--chunk-dir", default=None,
                            help="also write one WAV per control timestep into this directory")
    chunk_mode.add_argument("--chunk-sidecar", default=None,
                            help="also write a chunk-geometry JSON next to the single WAV")
    p_synth.set_defaults(func=cmd_synth)

    p_features = sub.add_parser("features", help="log-power spectrogram of a WAV")
    p_features.add_argument("input", help="input WAV")
    p_features.add_argument("out", help="output spectrogram (SPG1 binary)")
    p_features.add_argument("--csv", default=None, help="also export values as CSV")
    p_features.add_argument("--png", default=None, help="also render a spectrogram figure")
    p_features.set_defaults(func=cmd_features)

    p_fuse = sub.add_parser("fuse-demo", help="seeded synthetic fusion episode")
    p_fuse.set_defaults(func=cmd_fuse_demo)

    p_eval = sub.add_parser("eval", help="score an episode log")
    p_eval.add_argument("episodes", help="episode results (JSONL)")
    p_eval.add_argument("--report-dir", default=None,
                        help="write report.json, report.csv, and report.png here")
    p_eval.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except ClankError as exc:
        print(f"error [{exc.kind}]: {exc}", file=sys.stderr)
        return 1
    except Exception:  # noqa: BLE001 - anything else is a bug
        traceback.print_exc()
        return 2


def cmd_library_validate(args) -> int:
    problems = validate_manifest(args.manifest)
    if problems:
        for problem in problems:
            where = "" if problem["entry"] is None else f" (entry {problem['entry']})"
            print(f"{problem['kind']}{where}: {problem['detail']}", file=sys.stderr)
        _emit({"valid": False, "errors": problems})
        return 1
    library = load_library(args.manifest)
    _emit({"valid": True, "clips": library.clip_count})
    return 0


def cmd_synth(args) -> int:
    cfg = _render_config(args)
    stream = parse_events(_read_text(args.events))
    if args.coalesce:
        stream = coalesce_contacts(stream, args.gap_threshold)
    library = load_library(args.manifest)
    result = render(stream, library, cfg, workers=max(1, args.workers))
    write_wav(args.out, result.buffer.samples, result.buffer.sample_rate)

    stats = {
        "out": args.out,
        "sample_rate": result.buffer.sample_rate,
        "samples": len(result.buffer.samples),
        "duration_s": result.buffer.duration,
        "events": len(stream.events),
        "rendered_events": result.rendered_events,
        "skipped_events": result.skipped_events,
        "clipped_samples": result.clipped_samples,
    }
    if args.chunk_dir or args.chunk_sidecar:
        chunked = chunk_stream(result.buffer, cfg.control_rate)
        stats["chunks"] = chunked.sidecar()
        if args.chunk_dir:
            out_dir = Path(args.chunk_dir)
            out_dir.mkdir(parents=True, exist_ok=True)
            for index, chunk in enumerate(chunked.chunks):
                write_wav(out_dir / f"chunk_{index:06d}.wav", chunk, result.buffer.sample_rate)
            (out_dir / "chunks.json").write_text(json.dumps(chunked.sidecar(), indent=2))
        else:
            Path(args.chunk_sidecar).write_text(json.dumps(chunked.sidecar(), indent=2))
    _emit(stats)
    return 0


def cmd_features(args) -> int:
    if not Path(args.input).is_file():
        raise MissingFileError(f"input WAV not found: {args.input}")
    samples, sample_rate, channels = read_wav(args.input)
    if channels > 1:
        print(f"notice: {channels}-channel input mixed down to mono", file=sys.stderr)
    spec = spectral.log_power(spectral.fbsp_transform(samples))
    spectral.write_spg(args.out, spec)
    if args.csv:
        spectral.write_spectrogram_csv(args.csv, spec)
    if args.png:
        figures.save_spectrogram_figure(spec, args.png, sample_rate=sample_rate)
    _emit({"num_bins": spec.num_bins, "N_f": spec.num_frames})
    return 0


def cmd_fuse_demo(args) -> int:
    seed = args.seed if args.seed is not None else 0
    rng = np.random.default_rng(seed)
    dims = fusion.ModelDims()
    params = fusion.init_params(dims, seed=seed)

    third_rows = dims.n_visual // 2
    third = fusion.FeatureBlock(
        rng.standard_normal((third_rows, dims.d_vis)), fusion.Modality.VISUAL
    )
    wrist = fusion.FeatureBlock(
        rng.standard_normal((dims.n_visual - third_rows, dims.d_vis)), fusion.Modality.VISUAL
    )
    audio = fusion.FeatureBlock(
        rng.standard_normal((dims.n_audio, dims.d_aud)), fusion.Modality.AUDIO
    )
    lang = fusion.FeatureBlock(
        rng.standard_normal((dims.n_lang, dims.d_llm)), fusion.Modality.LANGUAGE
    )
    state = rng.standard_normal(dims.d_prop)

    modal = fusion.concat_modalities(
        fusion.project_visual(fusion.concat_views(third, wrist), params.visual),
        fusion.project_audio(audio, params.audio),
        fusion.project_proprio(state, params.proprio),
    )
    sequence = fusion.assemble_sequence(lang, modal, dims, params.empty_action)
    decoded = fusion.backbone_stub(sequence, seed=seed)
    actions = fusion.action_head(
        fusion.extract_action_hidden(decoded, dims), params.action_head, dims
    )

    truth = fusion.ActionBlock(rng.uniform(-1.0, 1.0, size=actions.values.shape))
    loss, grad = fusion.l1_loss(actions, truth)
    grad_check = _finite_difference_check(actions.values, truth.values, grad)

    _emit(
        {
            "sequence": {
                "rows": sequence.rows,
                "expected_rows": dims.sequence_rows,
                "width": sequence.dim,
            },
            "action_block": actions.values.tolist(),
            "loss": loss,
            "grad_check": grad_check,
        }
    )
    return 0


def cmd_eval(args) -> int:
    episodes = evaluation.read_episodes(_read_text(args.episodes))
    report = evaluation.aggregate(episodes)
    print(evaluation.format_table(report), file=sys.stderr)
    _emit(report.to_json_dict())
    if args.report_dir:
        out_dir = Path(args.report_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.json").write_text(json.dumps(report.to_json_dict(), indent=2))
        with open(out_dir / "report.csv", "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["task", "episodes", "success_rate", "mean_tcr"])
            writer.writerows(evaluation.report_rows(report))
        figures.save_eval_figure(report, out_dir / "report.png")
    return 0


def _finite_difference_check(pred, truth, grad, step=1e-6, tie_margin=1e-4):
    """Central-difference check of the analytic L1 gradient, skipping ties."""

    def loss_at(values):
        return float(np.mean(np.abs(values - truth)))

    checked = 0
    skipped = 0
    worst = 0.0
    flat_pred = pred.ravel()
    flat_grad = grad.ravel()
    for index in range(flat_pred.size):
        if abs(flat_pred[index] - truth.ravel()[index]) <= tie_margin:
            skipped += 1
            continue
        bumped = flat_pred.copy()
        bumped[index] += step
        dipped = flat_pred.copy()
        dipped[index] -= step
        numeric = (loss_at(bumped.reshape(pred.shape)) - loss_at(dipped.reshape(pred.shape))) / (
            2 * step
        )
        worst = max(worst, abs(numeric - flat_grad[index]))
        checked += 1
    return {
        "checked": checked,
        "skipped_ties": skipped,
        "max_abs_diff": worst,
        "ok": bool(worst < 1e-6),
    }


def _render_config(args) -> RenderConfig:
    overrides = {}
    if args.config:
        doc = json.loads(_read_text(args.config))
        if not isinstance(doc, dict):
            raise SchemaViolationError(f"{args.config}: config must be a JSON object")
        field_names = {f.name for f in dataclasses.fields(RenderConfig)}
        unknown = sorted(set(doc) - field_names)
        if unknown:
            raise SchemaViolationError(f"{args.config}: unknown config keys {unknown}")
        for key in ("gain_clamp", "pitch_ratio_clamp"):
            if key in doc:
                doc[key] = tuple(doc[key])
        overrides.update(doc)
    if args.seed is not None:
        overrides["rng_seed"] = args.seed
    if getattr(args, "skip_unknown", False):
        overrides["skip_unresolvable"] = True
    try:
        return RenderConfig(**overrides)
    except (TypeError, ValueError) as exc:
        raise SchemaViolationError(f"invalid render config: {exc}") from exc


def _read_text(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise MissingFileError(f"file not found: {path}")
    return p.read_text()


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=2))


if __name__ == "__main__":
    sys.exit(main())
