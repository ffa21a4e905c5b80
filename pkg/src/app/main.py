"""
Main Entry Point for the synthetic-data efficiency harness.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import argparse
import logging
import shlex
import sys
from pathlib import Path

import pandas as pd
from pydantic import ValidationError

from .adapters.stubs import stub_command
from .annotations.labels import box_to_polygon, emit_label_file, parse_label_file, records_to_instances
from .annotations.masks import extract_masked_crop, read_rgb, write_mask_png, write_rgb
from .annotations.types import TARGET_CLASSES, Provenance
from .detection.io import read_detections_file, truths_from_labels, write_metric_csv
from .detection.metrics import evaluate_detections
from .detection.types import EvalConfig
from .errors import EXIT_CONFIG_ERROR, EXIT_OK, HarnessError, IoFailure
from .iqa.brisque import load_brisque_model
from .iqa.images import load_gray
from .iqa.niqe import DEFAULT_PATCH_SIZE, load_niqe_model, niqe_fit, save_niqe_model
from .iqa.scores import (
    attach_provenance,
    compare_groups,
    comparison_frame,
    load_external_scores,
    score_images,
    write_score_csv,
)
from .manifest import (
    Manifest,
    dump_json,
    load_labeled_images,
    load_manifest,
    rebase_entry,
    resolve,
    save_manifest,
    write_subset_manifest,
)
from .pipeline import run_experiment
from .report.boxplot import boxplot_export, write_boxplot_csv
from .report.efficiency import data_efficiency, write_efficiency_csv
from .report.tables import build_result_table, samples_from_frame, write_table_files
from .sampling.mixtures import BaselineMode, build_mixture_plans, emit_mixture_manifest, evaluated_plan
from .sampling.splitter import SplitSpec, split_dataset
from .services.adapter_service import AdapterService
from .settings import AdapterRole, AdapterSpec, GenerationConfig, parse_experiment, settings
from .stages import STAGE_NAMES, annotate_images, generate_images, generation_requests
from .stages.ingest_stage import persist_labeled
from .stats.pipeline import (
    read_long_csv,
    read_stat_reports,
    run_long_format,
    write_letters_csv,
    write_stat_reports,
)

logging.basicConfig(level=logging.INFO, format="%(asctime)s [%(levelname)s] %(message)s")
logger = logging.getLogger(__name__)


def _adapter(role: AdapterRole, command: str | None, timeout: float) -> AdapterService:
    cmd = shlex.split(command) if command else stub_command(str(role))
    return AdapterService(AdapterSpec(role=role, command=cmd, timeout=timeout))


def _class_names(args) -> list[str]:
    return args.class_names.split(",") if args.class_names else list(TARGET_CLASSES)


# --- Subcommands ---


def cmd_convert(args):
    """Rewrites label files as polygons (boxes become rectangles) or as boxes."""
    files = sorted(args.input.glob("*.txt")) if args.input.is_dir() else [args.input]
    for path in files:
        try:
            text = path.read_text()
        except OSError as e:
            raise IoFailure(f"cannot read label file '{path}': {e}") from e
        instances = records_to_instances(parse_label_file(text, args.class_count))
        if args.to == "polygons":
            records = [(i.class_id, i.polygon or box_to_polygon(i.class_id, i.box)) for i in instances]
        else:
            records = [(i.class_id, i.box) for i in instances]
        target = args.output / path.name if args.input.is_dir() else args.output
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(emit_label_file(records))
        except OSError as e:
            raise IoFailure(f"cannot write label file '{target}': {e}") from e
    logger.info(f"🔁 Converted {len(files)} label file(s) to {args.to}.")


def cmd_mask(args):
    """Cuts every polygon instance out of its image and pads tile and mask to a square."""
    manifest = load_manifest(args.manifest)
    count = 0
    for labeled in load_labeled_images(manifest, args.manifest.parent, args.class_count):
        rgb = read_rgb(resolve(args.manifest.parent, labeled.image.path))
        for k, inst in enumerate(labeled.instances):
            polygon = inst.polygon or box_to_polygon(inst.class_id, inst.box)
            tile, mask = extract_masked_crop(rgb, polygon, args.target)
            stem = f"{labeled.image.id}_{k:03d}_c{inst.class_id}"
            write_rgb(tile, args.output / "tiles" / f"{stem}.png")
            write_mask_png(mask, args.output / "masks" / f"{stem}.png")
            count += 1
    logger.info(f"🎭 Extracted {count} masked tiles into {args.output}.")


def cmd_split(args):
    manifest = load_manifest(args.manifest)
    spec = SplitSpec(args.train, args.val, args.test, args.seed)
    split = split_dataset([e.id for e in manifest.images], spec)
    entries = manifest.by_id()
    for subset in ("train", "val", "test"):
        ids = getattr(split, subset)
        write_subset_manifest(entries, ids, args.manifest.parent, args.output / f"{subset}.json", {"subset": subset})
    record = {"seed": args.seed, "train": split.train, "val": split.val, "test": split.test}
    dump_json(record, args.output / "split.json")


def cmd_mix(args):
    train = load_manifest(args.train)
    synthetic = load_manifest(args.synthetic)
    held_out = [e.id for path in args.held_out for e in load_manifest(path).images]
    plans = build_mixture_plans(
        [e.id for e in train.images],
        [e.id for e in synthetic.images],
        [0.0, *args.p],
        args.replicates,
        args.seed,
        args.n_training,
        held_out,
    )
    entries = {}
    for manifest, base in ((train, args.train.parent), (synthetic, args.synthetic.parent)):
        entries |= {e.id: rebase_entry(e, base, args.output) for e in manifest.images}
    for plan in plans:
        emit_mixture_manifest(plan, entries, args.output, args.output / f"{plan.plan_id}.json")
    mode = BaselineMode(args.baseline_mode)
    dump_json(
        [{"plan_id": p.plan_id, "evaluated_by": evaluated_plan(p, plans, mode).plan_id} for p in plans],
        args.output / "plans.json",
    )


def cmd_generate(args):
    config = GenerationConfig(
        prompts=args.prompt,
        images_per_prompt=args.count,
        steps=args.steps,
        guidance=args.guidance,
        scheduler=args.scheduler,
        width=args.width,
        height=args.height,
        seed=args.seed,
    )
    service = _adapter(AdapterRole.GENERATOR, args.command, args.timeout)
    entries = generate_images(generation_requests(config), service, args.output, args.workers)
    save_manifest(Manifest(images=entries), args.output / "manifest.json")


def cmd_annotate(args):
    manifest = load_manifest(args.manifest)
    class_names = _class_names(args)
    service = _adapter(AdapterRole.ANNOTATOR, args.command, args.timeout)
    labeled = annotate_images(
        manifest.images, args.manifest.parent, service, args.output / "annotator", class_names, args.threshold
    )
    entries = [e.model_copy(update={"annotated_by": "model"}) for e in manifest.images]
    persist_labeled(entries, {li.image.id: li for li in labeled}, args.manifest.parent, args.output)


def cmd_eval_det(args):
    class_names = _class_names(args)
    manifest = load_manifest(args.manifest)
    truths = truths_from_labels(load_labeled_images(manifest, args.manifest.parent, len(class_names)))
    config = EvalConfig(apply_nms=args.nms, confidence_threshold=args.conf)
    rows = evaluate_detections(read_detections_file(args.detections), truths, config, class_names)
    write_metric_csv(rows, args.output)
    for row in rows[:2]:
        logger.info(f"🎯 {row.metric} = {row.value:.4f}")


def cmd_eval_iqa(args):
    manifest = load_manifest(args.manifest)
    base = args.manifest.parent
    images = [(e.id, resolve(base, e.path), e.provenance) for e in manifest.images]

    if args.niqe_model:
        niqe = load_niqe_model(args.niqe_model)
    else:
        corpus = [load_gray(path) for _, path, prov in images if prov is Provenance.REAL]
        niqe = niqe_fit(corpus, args.patch_size)
        save_niqe_model(niqe, args.output / "niqe_model.json")

    scores = score_images(images, load_brisque_model(args.brisque_model), niqe)
    if args.external:
        provenance = {e.id: e.provenance for e in manifest.images}
        scores += attach_provenance(load_external_scores(args.external), provenance)

    write_score_csv(scores, args.output / "scores.csv")
    frame = comparison_frame(compare_groups(scores, args.alpha))
    try:
        frame.to_csv(args.output / "comparison.csv", index=False, lineterminator="\n", float_format="%.6f")
    except OSError as e:
        raise IoFailure(f"cannot write '{args.output / 'comparison.csv'}': {e}") from e

    long = pd.DataFrame(
        [(s.metric, str(s.provenance), s.value) for s in scores], columns=["metric", "provenance", "value"]
    )
    write_boxplot_csv(boxplot_export(long, ["metric", "provenance"]), args.output / "boxplot.csv")


def cmd_stats(args):
    reports = run_long_format(read_long_csv(args.input), args.alpha)
    write_stat_reports(reports, args.output / "stat_reports.json")
    write_letters_csv(reports, args.output / "letters.csv")


def cmd_report(args):
    frame = read_long_csv(args.input)
    reports = read_stat_reports(args.stats) if args.stats else []
    samples = samples_from_frame(frame)
    for metric in dict.fromkeys(frame["metric"]):
        letters = {r.model: r.letters for r in reports if r.metric == metric}
        write_table_files(build_result_table(samples, metric, letters), args.output / "tables")
    if reports:
        write_efficiency_csv(data_efficiency(reports), args.output / "efficiency.csv")
    summary = boxplot_export(frame, ["model", "metric", "dataset_combination"])
    write_boxplot_csv(summary, args.output / "boxplot.csv")


def cmd_run(args):
    config = settings.load_experiment_file(args.config)
    if args.offline:
        config = parse_experiment({**config.model_dump(), "offline": True})
    run_experiment(config, args.output, resume=args.resume, from_stage=args.from_stage)


# --- Parser ---


def _with_adapter(p: argparse.ArgumentParser):
    p.add_argument("--command", help="Adapter command line; {python}, {request}, {output_dir} are substituted")
    p.add_argument("--timeout", type=float, default=600.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="syneff", description="Synthetic-vs-real training data experiments")
    sub = parser.add_subparsers(dest="command_name", required=True)

    p = sub.add_parser("convert", help="Convert label files between boxes and polygons")
    p.add_argument("input", type=Path, help="Label file or directory of label files")
    p.add_argument("output", type=Path)
    p.add_argument("--to", choices=["polygons", "boxes"], default="polygons")
    p.add_argument("--class-count", type=int, default=len(TARGET_CLASSES))
    p.set_defaults(handler=cmd_convert)

    p = sub.add_parser("mask", help="Extract masked, square-padded instance tiles")
    p.add_argument("manifest", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("--target", type=int, default=512)
    p.add_argument("--class-count", type=int, default=len(TARGET_CLASSES))
    p.set_defaults(handler=cmd_mask)

    p = sub.add_parser("split", help="Split a manifest into train/val/test")
    p.add_argument("manifest", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("--train", type=float, default=0.70)
    p.add_argument("--val", type=float, default=0.15)
    p.add_argument("--test", type=float, default=0.15)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_split)

    p = sub.add_parser("mix", help="Draw real/synthetic training mixtures")
    p.add_argument("train", type=Path, help="Real training manifest")
    p.add_argument("synthetic", type=Path, help="Synthetic pool manifest")
    p.add_argument("output", type=Path)
    p.add_argument("--p", type=float, nargs="+", default=[round(0.1 * i, 1) for i in range(1, 10)])
    p.add_argument("--replicates", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-training", type=int)
    p.add_argument("--held-out", type=Path, nargs="*", default=[], help="Val/test manifests to keep out")
    p.add_argument("--baseline-mode", choices=[m.value for m in BaselineMode], default=BaselineMode.SINGLE.value)
    p.set_defaults(handler=cmd_mix)

    p = sub.add_parser("generate", help="Generate synthetic images through the generator adapter")
    p.add_argument("output", type=Path)
    p.add_argument("--prompt", nargs="+", default=GenerationConfig().prompts)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--guidance", type=float, default=7.5)
    p.add_argument("--scheduler", default="euler-ancestral")
    p.add_argument("--width", type=int, default=640)
    p.add_argument("--height", type=int, default=640)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    _with_adapter(p)
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("annotate", help="Label images through the annotator adapter")
    p.add_argument("manifest", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("--threshold", type=float, default=0.25)
    p.add_argument("--class-names", help="Comma-separated class names")
    _with_adapter(p)
    p.set_defaults(handler=cmd_annotate)

    p = sub.add_parser("eval-det", help="Score a detections file against a labeled manifest")
    p.add_argument("detections", type=Path)
    p.add_argument("manifest", type=Path)
    p.add_argument("output", type=Path, help="Metric CSV")
    p.add_argument("--conf", type=float, default=0.25)
    p.add_argument("--nms", action="store_true")
    p.add_argument("--class-names", help="Comma-separated class names")
    p.set_defaults(handler=cmd_eval_det)

    p = sub.add_parser("eval-iqa", help="No-reference quality scores and the real-vs-synthetic comparison")
    p.add_argument("manifest", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("--brisque-model", type=Path)
    p.add_argument("--niqe-model", type=Path, help="Fitted model; default fits on the manifest's real images")
    p.add_argument("--patch-size", type=int, default=DEFAULT_PATCH_SIZE)
    p.add_argument("--external", type=Path, help="CSV of DBCNN / HyperIQA / CLIP-IQA scores")
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(handler=cmd_eval_iqa)

    p = sub.add_parser("stats", help="Normality-branched tests and letter groups on a long-format table")
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(handler=cmd_stats)

    p = sub.add_parser("report", help="Render result tables, efficiency and boxplot data")
    p.add_argument("input", type=Path, help="Long-format metric table")
    p.add_argument("output", type=Path)
    p.add_argument("--stats", type=Path, help="stat_reports.json with letter groups")
    p.set_defaults(handler=cmd_report)

    p = sub.add_parser("run", help="Run the whole experiment")
    p.add_argument("-c", "--config", type=Path, default=Path(settings.EXPERIMENT_CONFIG))
    p.add_argument("-o", "--output", type=Path, default=Path("experiments/run"))
    p.add_argument("--offline", action="store_true", help="Use pre-computed detections; never invoke adapters")
    p.add_argument("--resume", action="store_true", help="Reuse completed stages")
    p.add_argument("--from-stage", choices=STAGE_NAMES, help="Recompute this stage and every later one")
    p.set_defaults(handler=cmd_run)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.handler(args)
    except HarnessError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return e.exit_code
    except ValidationError as e:
        logger.error(f"❌ Invalid arguments: {e}")
        return EXIT_CONFIG_ERROR
    except KeyboardInterrupt:
        logger.info("Stopping...")
        return 130
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
