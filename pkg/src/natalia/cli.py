"""Command-line surface.

Subcommands: process, dataset build, eval [agreement|tlx], serve,
simulate-sweep. Exit codes: 0 ok, 2 input error, 3 backend error,
64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_BACKEND = 3
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _size_arg(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None


def build_parser() -> Parser:
    parser = Parser(prog="natalia", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("process", help="classify one sweep and extract key frames")
    p.add_argument("video", help="frame directory, .zip, or .mp4")
    p.add_argument("--backend", default="mock", help="mock | mock:<W>x<H> | model:<path>")
    p.add_argument("--tau", type=float, default=0.5, help="min confidence for detections")
    p.add_argument("--gap", type=int, default=2, help="max bridged gap inside a run")
    p.add_argument("--max-per-label", type=int, default=12)
    p.add_argument("--dedup-ssim", type=float, default=0.90)
    p.add_argument("--batch", type=int, default=16)
    p.add_argument("--out", default=None, help="output directory (default <video>.result)")
    p.add_argument("--no-figures", action="store_true", help="skip the timeline figure")

    p = sub.add_parser("dataset", help="dataset expansion commands")
    dsub = p.add_subparsers(dest="dataset_command", required=True)
    b = dsub.add_parser("build", help="propagate seeds, subsample negatives, write manifest")
    b.add_argument("--seeds", required=True, help="CSV: source_id,frame_index,label")
    b.add_argument("--frames", required=True,
                   help="frame directory, or a directory of frame directories")
    b.add_argument("--ssim-min", type=float, default=0.90)
    b.add_argument("--ncc-min", type=float, default=0.90)
    b.add_argument("--neg-fraction", type=float, required=True)
    b.add_argument("--seed", type=int, required=True)
    b.add_argument("--train-fraction", type=float, default=None,
                   help="when set, also assign a stratified TRAIN/VAL split")
    b.add_argument("--similarity-size", type=_size_arg, default=(224, 224),
                   help="resolution for similarity math (WxH), or 0x0 for native")
    b.add_argument("--out", required=True, help="manifest output path")

    p = sub.add_parser("eval", help="evaluation reports")
    p.add_argument("--pairs", default=None, help="CSV of true,pred label pairs")
    p.add_argument("--out", default="eval-report")
    esub = p.add_subparsers(dest="eval_command")
    a = esub.add_parser("agreement", help="system vs specialist agreement")
    a.add_argument("--rows", required=True,
                   help="CSV: study_id,sys_AC..sys_FL,spec_AC..spec_FL")
    a.add_argument("--out", default="agreement-report")
    t = esub.add_parser("tlx", help="NASA-TLX aggregation")
    t.add_argument("--responses", required=True,
                   help="CSV: participant,mental,physical,temporal,performance,effort,frustration")
    t.add_argument("--out", default="tlx-report")

    p = sub.add_parser("serve", help="run the review service")
    p.add_argument("--config", default=None, help="KEY=VALUE file merged over the environment")

    p = sub.add_parser("simulate-sweep", help="generate a synthetic fixture with ground truth")
    p.add_argument("--labels", required=True, help="spans like AC@10-14,FL@40-42")
    p.add_argument("--frames", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--size", type=_size_arg, default=(224, 224))
    p.add_argument("--fps", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=7)

    return parser


# --- subcommand bodies --------------------------------------------------------


def cmd_process(args) -> int:
    from .classifier import ClassifierError, load_backend
    from .keyframes import SelectionConfig, process_sweep
    from .media import MediaError, decode_video, frame_png_bytes

    try:
        cfg = SelectionConfig(min_confidence=args.tau, max_gap=args.gap,
                              max_per_label=args.max_per_label, dedup_ssim=args.dedup_ssim)
        if args.batch < 1:
            raise ValueError("batch must be >= 1")
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    try:
        backend = load_backend(args.backend)
    except ClassifierError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND

    try:
        video = decode_video(args.video)
    except MediaError as exc:
        print(f"decode error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    try:
        result = process_sweep(video, backend, cfg, batch=args.batch)
    except (ClassifierError, ValueError) as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND

    out = Path(args.out) if args.out else Path(str(Path(args.video)).rstrip("/") + ".result")
    out.mkdir(parents=True, exist_ok=True)
    (out / "result.json").write_text(result.to_json(), encoding="utf-8")
    for keyframe in result.keyframes:
        name = f"keyframe_{keyframe.frame_index:05d}_{keyframe.label.name}.png"
        (out / name).write_bytes(frame_png_bytes(video[keyframe.frame_index]))
    if not args.no_figures:
        from .reports import write_timeline_figure

        write_timeline_figure(result, out / "timeline.png")
    counts = " ".join(f"{k}={v}" for k, v in result.label_counts.items())
    print(f"{result.source_id}: {len(result.keyframes)} key frame(s) [{counts}] -> {out}")
    return EXIT_OK


def _discover_sequences(frames_root: Path):
    from .media.video import FRAME_NAME

    if not frames_root.is_dir():
        raise FileNotFoundError(f"{frames_root}: not a directory")
    if any(FRAME_NAME.search(p.name) for p in frames_root.iterdir()):
        return [frames_root]
    subdirs = sorted(p for p in frames_root.iterdir() if p.is_dir())
    if not subdirs:
        raise FileNotFoundError(f"{frames_root}: no frame directories found")
    return subdirs


def cmd_dataset_build(args) -> int:
    from .dataset import (
        DatasetError,
        DatasetManifest,
        Provenance,
        propagate_labels,
        read_seeds_csv,
        split_dataset,
        subsample_negatives,
        write_manifest,
    )
    from .media import MediaError, decode_video

    if not 0.0 < args.neg_fraction <= 1.0:
        raise UsageError("--neg-fraction must lie in (0, 1]")
    if not (0.0 < args.ssim_min <= 1.0 and 0.0 < args.ncc_min <= 1.0):
        raise UsageError("similarity thresholds must lie in (0, 1]")
    if args.train_fraction is not None and not 0.0 < args.train_fraction < 1.0:
        raise UsageError("--train-fraction must lie in (0, 1)")
    target = None if args.similarity_size == (0, 0) else args.similarity_size

    try:
        seeds = read_seeds_csv(args.seeds)
        sequence_dirs = _discover_sequences(Path(args.frames))
        by_source = {}
        for seed in seeds:
            by_source.setdefault(seed.source_id, []).append(seed)

        entries = []
        positive_keys = set()
        negative_candidates = []
        known_sources = set()
        for seq_dir in sequence_dirs:
            seq = decode_video(seq_dir, target=target)
            known_sources.add(seq.source_id)
            seq_entries = propagate_labels(seq, by_source.get(seq.source_id, []),
                                           ssim_min=args.ssim_min, ncc_min=args.ncc_min)
            entries.extend(seq_entries)
            positive_keys.update(e.key for e in seq_entries)
            negative_candidates.extend(
                (seq.source_id, i) for i in range(len(seq))
                if (seq.source_id, i) not in positive_keys
            )
        unknown = sorted(set(by_source) - known_sources)
        if unknown:
            raise DatasetError(f"seeds reference unknown sequences: {unknown}")

        entries.extend(subsample_negatives(negative_candidates, args.neg_fraction, args.seed))
        entries.sort(key=lambda e: e.key)
        manifest = DatasetManifest(entries=tuple(entries), ssim_min=args.ssim_min,
                                   ncc_min=args.ncc_min, rng_seed=args.seed)
        if args.train_fraction is not None:
            manifest = split_dataset(manifest, args.train_fraction, args.seed)
        write_manifest(manifest, args.out)
    except (DatasetError, MediaError, FileNotFoundError, ValueError) as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    print(f"manifest: {args.out}")
    print(f"{'label':<10}{'total':>8}{'seed':>8}{'prop':>8}{'neg':>8}")
    by_prov = {}
    for e in manifest.entries:
        by_prov.setdefault((e.label.name, e.provenance), 0)
        by_prov[(e.label.name, e.provenance)] += 1
    for label, total in manifest.class_counts.items():
        seed_n = by_prov.get((label, Provenance.SEED), 0)
        prop_n = by_prov.get((label, Provenance.PROPAGATED), 0)
        neg_n = by_prov.get((label, Provenance.NEGATIVE_SAMPLED), 0)
        print(f"{label:<10}{total:>8}{seed_n:>8}{prop_n:>8}{neg_n:>8}")
    return EXIT_OK


def cmd_eval(args) -> int:
    from .metrics import MetricsError

    try:
        if getattr(args, "eval_command", None) == "agreement":
            from .metrics import agreement_report, read_agreement_csv
            from .reports import render_agreement_text, write_agreement_bundle

            report = agreement_report(read_agreement_csv(args.rows))
            write_agreement_bundle(report, args.out)
            print(render_agreement_text(report))
        elif getattr(args, "eval_command", None) == "tlx":
            from .metrics import aggregate_tlx, read_tlx_csv
            from .reports import render_tlx_text, write_tlx_bundle

            summary = aggregate_tlx(read_tlx_csv(args.responses))
            write_tlx_bundle(summary, args.out)
            print(render_tlx_text(summary))
        else:
            if not args.pairs:
                raise UsageError("eval needs --pairs, or the agreement/tlx subcommand")
            from .metrics import confusion, read_pairs_csv
            from .reports import render_confusion_text, write_classification_bundle

            cm = confusion(read_pairs_csv(args.pairs))
            write_classification_bundle(cm, args.out)
            print(render_confusion_text(cm))
    except (MetricsError, FileNotFoundError) as exc:
        print(f"eval error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(f"reports -> {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .simulate import parse_spans, write_sweep_fixture

    try:
        spans = parse_spans(args.labels)
        if args.frames < 1:
            raise ValueError("--frames must be >= 1")
        out = write_sweep_fixture(args.frames, spans, args.out, size=args.size,
                                  fps=args.fps, rng_seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"fixture: {out} ({args.frames} frames, {len(spans)} span(s))")
    return EXIT_OK


def cmd_serve(args) -> int:
    import os

    import uvicorn

    from .classifier import ClassifierError, load_backend
    from .service import (
        FileBlobStore,
        FileDocumentStore,
        FileOutboxSender,
        Janitor,
        NotificationDispatcher,
        ServiceConfig,
        SmtpSender,
        StudyService,
        Worker,
        create_app,
        load_credentials,
    )

    env = dict(os.environ)
    if args.config:
        try:
            for line in Path(args.config).read_text(encoding="utf-8").splitlines():
                line = line.strip()
                if line and not line.startswith("#") and "=" in line:
                    key, _, value = line.partition("=")
                    env[key.strip()] = value.strip()
        except OSError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_INPUT
    cfg = ServiceConfig.from_env(env)

    try:
        backends = [load_backend(cfg.model) for _ in range(max(1, cfg.workers))]
    except ClassifierError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND

    docs = FileDocumentStore(cfg.docstore_path())
    blobs = FileBlobStore(cfg.data_dir / "blobs")
    service = StudyService(docs, blobs, payload_cap=cfg.payload_cap,
                           lease_seconds=cfg.lease_seconds)

    tokens = {}
    if cfg.credentials_path:
        try:
            for entry in load_credentials(cfg.credentials_path):
                service.register_user(entry["user_id"], entry["role"], entry["email"],
                                      entry.get("display_name", ""))
                tokens[entry["token"]] = {"user_id": entry["user_id"], "role": entry["role"]}
        except (OSError, ValueError, json.JSONDecodeError) as exc:
            print(f"credentials error: {exc}", file=sys.stderr)
            return EXIT_INPUT

    sender = (SmtpSender(**cfg.smtp) if cfg.smtp
              else FileOutboxSender(cfg.data_dir / "outbox"))
    workers = [Worker(service, backend, worker_id=f"worker-{i}")
               for i, backend in enumerate(backends)]
    dispatcher = NotificationDispatcher(service, sender)
    janitor = Janitor(service, interval=max(1.0, cfg.lease_seconds / 4))
    for thread in (*workers, dispatcher, janitor):
        thread.start()

    app = create_app(service, tokens, worker_count=len(workers))
    uvicorn.run(app, host=cfg.bind_host, port=cfg.bind_port, log_level="warning")

    for worker in workers:
        worker.stop()
    dispatcher.stop()
    janitor.stop()
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "process":
            return cmd_process(args)
        if args.command == "dataset":
            return cmd_dataset_build(args)
        if args.command == "eval":
            return cmd_eval(args)
        if args.command == "simulate-sweep":
            return cmd_simulate(args)
        if args.command == "serve":
            return cmd_serve(args)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
