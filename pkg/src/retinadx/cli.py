"""Command line: ``retinadx {synth,run,train,eval}``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .classifier import ModelSet, train_per_class
from .config import PipelineConfig, load_config
from .errors import ConfigError, DataError, NumericError
from .evaluation import CLASSES, confusion_counts
from .image_core import load_image, save_gray, save_image
from .labels import ClassLabel
from .pipeline import ImageResult, overlay, process_image
from .synth import generate_fundus

log = logging.getLogger("retinadx")

REPORT_VERSION = "retinadx-report/1"
MANIFEST_VERSION = "retinadx-manifest/1"
TRUTH_VERSION = "retinadx-truth/1"
PREDICTIONS_VERSION = "retinadx-predictions/1"
EVAL_VERSION = "retinadx-eval/1"
CURVE_VERSION = "retinadx-curves/1"

_SLUG = {
    ClassLabel.NORMAL: "normal",
    ClassLabel.DIABETIC_RETINOPATHY: "dr",
    ClassLabel.DRUSEN: "drusen",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n")


def read_json(path: Path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from exc


def config_digest(cfg: PipelineConfig) -> str:
    text = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


# --------------------------------------------------------------------------
# manifests

def load_manifest(path: Path) -> list[dict]:
    doc = read_json(path)
    if not isinstance(doc, dict) or doc.get("schema_version") != MANIFEST_VERSION:
        raise DataError(f"{path}: not a {MANIFEST_VERSION} manifest")
    entries = doc.get("entries")
    if not isinstance(entries, list):
        raise DataError(f"{path}: manifest has no entry list")
    base = Path(path).parent
    out = []
    seen = set()
    for e in entries:
        try:
            eid = e["id"]
            label = ClassLabel.parse(e["label"])
            image = base / e["image"]
        except (KeyError, TypeError) as exc:
            raise DataError(f"{path}: malformed entry {e!r}") from exc
        if eid in seen:
            raise DataError(f"{path}: duplicate id {eid}")
        seen.add(eid)
        out.append({"id": eid, "label": label, "image": image})
    return out


# --------------------------------------------------------------------------
# synth

def cmd_synth(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.count < 1:
        raise ConfigError("--count must be >= 1")
    entries = []
    for label in CLASSES:
        for seed in range(args.start_seed, args.start_seed + args.count):
            params = cfg.synth_params(label, seed)
            img, truth = generate_fundus(params)
            eid = f"{_SLUG[label]}_{seed:04d}"
            files = {
                "image": f"{eid}.ppm",
                "vessel_mask": f"{eid}.vessels.pgm",
                "lesion_mask": f"{eid}.lesions.pgm",
                "truth": f"{eid}.truth.json",
            }
            save_image(out / files["image"], img)
            save_gray(out / files["vessel_mask"], truth.vessel_mask)
            save_gray(out / files["lesion_mask"], truth.lesion_mask)
            write_json(out / files["truth"], {
                "schema_version": TRUTH_VERSION,
                "id": eid,
                "seed": seed,
                "class": label.display,
                "code": int(label),
                "lesion_count": truth.lesion_count,
            })
            entries.append({"id": eid, "label": label.display, "code": int(label), "seed": seed, **files})
    write_json(out / "manifest.json", {"schema_version": MANIFEST_VERSION, "entries": entries})
    print(f"wrote {len(entries)} images to {out}")
    return 0


# --------------------------------------------------------------------------
# run

def _load_models(path) -> ModelSet | None:
    if path is None:
        return None
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read model {path}: {exc}") from exc
    return ModelSet.loads(text)


def build_report(image_id: str, image_name: str, cfg: PipelineConfig, res: ImageResult) -> dict:
    seg = res.segmentation
    report = {
        "schema_version": REPORT_VERSION,
        "image_id": image_id,
        "image": image_name,
        "config_digest": config_digest(cfg),
        "feature_schema": {"schema_id": cfg.features.schema_id, "names": cfg.features.names},
        "features": {
            "schema_id": cfg.features.schema_id,
            "image_id": image_id,
            "values": res.features.tolist(),
        },
        "segmentation": {
            "fov_pixels": int(seg.fov.sum()),
            "marker_pixels": int(seg.marker.sum()),
            "mask_pixels": int(seg.mask.sum()),
            "vessel_pixels": int(seg.vessels.sum()),
            "vessel_fraction": float(seg.vessels.sum() / max(int(seg.fov.sum()), 1)),
        },
        "edges": {
            "dbded_edge_pixels": int(res.edges.sum()),
            "lesion_candidate_pixels": int(res.lesion_candidates.sum()),
        },
    }
    if res.classification is not None:
        c = res.classification
        report["classification"] = {
            "label": c.label.display,
            "code": int(c.label),
            "errors": {lab.display: float(e) for lab, e in c.errors.items()},
            "tie": c.tie,
        }
    return report


def _run_one(job):
    image_id, image_path, cfg, models, out, figures = job
    try:
        img = load_image(image_path)
    except OSError as exc:
        raise DataError(f"cannot read image {image_path}: {exc}") from exc
    res = process_image(img, cfg, models)
    report = build_report(image_id, Path(image_path).name, cfg, res)
    write_json(out / f"{image_id}.report.json", report)
    write_json(out / f"{image_id}.timings.json",
               {"image_id": image_id, "seconds": {k: round(v, 6) for k, v in res.timings.items()}})
    save_image(out / f"{image_id}.overlay.ppm", overlay(img, res.vessels, res.lesion_candidates))
    if figures:
        from .plotting import plot_segmentation
        plot_segmentation(img, res.segmentation.vesselness, res.vessels,
                          out / f"{image_id}.segmentation.png")
    return image_id, report.get("classification")


def _map(fn, jobs, n_jobs):
    if n_jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    models = _load_models(args.model)
    if models is not None and models.schema_id != cfg.features.schema_id:
        raise ConfigError(f"model expects feature schema {models.schema_id}, "
                          f"config gives {cfg.features.schema_id}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.image:
        path = Path(args.image)
        items = [(path.stem, path)]
    else:
        items = [(e["id"], e["image"]) for e in load_manifest(Path(args.manifest))]
    jobs = [(eid, p, cfg, models, out, args.figures) for eid, p in items]
    results = _map(_run_one, jobs, args.jobs)

    if models is not None:
        preds = {eid: cls["label"] for eid, cls in results}
        write_json(out / "predictions.json", {
            "schema_version": PREDICTIONS_VERSION,
            "schema_id": models.schema_id,
            "predictions": preds,
        })
        names = [c.display for c in CLASSES]
        print("\t".join(["id", "predicted"] + [f"error_{n}" for n in names]))
        for eid, cls in results:
            print("\t".join([eid, cls["label"]] + [f"{cls['errors'][n]:.6g}" for n in names]))
    else:
        print(f"processed {len(results)} image(s) into {out} (no model: classification skipped)")
    return 0


# --------------------------------------------------------------------------
# train

def cmd_train(args) -> int:
    cfg = load_config(args.config)
    entries = load_manifest(Path(args.manifest))
    if not entries:
        raise DataError("manifest is empty")

    def features_of(entry):
        try:
            img = load_image(entry["image"])
        except OSError as exc:
            raise DataError(f"cannot read image {entry['image']}: {exc}") from exc
        return process_image(img, cfg).features

    vectors = np.stack([features_of(e) for e in entries])
    labels = [e["label"] for e in entries]
    models = train_per_class(vectors, labels, cfg.classifier, schema_id=cfg.features.schema_id)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(models.dumps())
    stem = out.with_suffix("")
    curves = {lab.display: m.curve for lab, m in sorted(models.models.items())}
    write_json(stem.with_name(stem.name + ".curves.json"),
               {"schema_version": CURVE_VERSION, "curves": curves})
    for name, curve in curves.items():
        lines = "".join(f"{k},{e!r}\n" for k, e in enumerate(curve))
        stem.with_name(f"{stem.name}.{name}.curve.txt").write_text(lines)
    from .plotting import plot_training_curves
    plot_training_curves(curves, stem.with_name(stem.name + ".curves.png"))

    print("class\tsamples\tinitial_error\tfinal_error")
    for lab, m in sorted(models.models.items()):
        n = sum(1 for y in labels if y == lab)
        print(f"{lab.display}\t{n}\t{m.curve[0]:.6g}\t{m.curve[-1]:.6g}")
    return 0


# --------------------------------------------------------------------------
# eval

def load_predictions(path: Path) -> dict[str, ClassLabel]:
    doc = read_json(path)
    if not isinstance(doc, dict) or doc.get("schema_version") != PREDICTIONS_VERSION:
        raise DataError(f"{path}: not a {PREDICTIONS_VERSION} document")
    preds = doc.get("predictions")
    if not isinstance(preds, dict):
        raise DataError(f"{path}: no predictions mapping")
    return {k: ClassLabel.parse(v) for k, v in preds.items()}


def cmd_eval(args) -> int:
    preds = load_predictions(Path(args.predictions))
    truth = {e["id"]: e["label"] for e in load_manifest(Path(args.manifest))}
    counts = confusion_counts(truth, preds)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "eval.json", {"schema_version": EVAL_VERSION, **counts.to_dict()})

    names = [c.display for c in CLASSES]
    rows = ["true\\predicted," + ",".join(names)]
    rows += [names[i] + "," + ",".join(str(int(v)) for v in counts.matrix[i]) for i in range(len(names))]
    (out / "confusion.csv").write_text("\n".join(rows) + "\n")
    from .plotting import plot_confusion
    plot_confusion(counts, out / "confusion.png")

    print("class\tTP\tTN\tFP\tFN")
    for c in CLASSES:
        o = counts.one_vs_rest(c)
        print(f"{c.display}\t{o.tp}\t{o.tn}\t{o.fp}\t{o.fn}")
    print(f"accuracy\t{counts.accuracy:.4f}\t(n={counts.total})")
    return 0


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="retinadx", description="Fundus image analysis pipeline.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="generate a synthetic labelled dataset")
    s.add_argument("--config")
    s.add_argument("--count", type=int, required=True, help="images per class")
    s.add_argument("--start-seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    r = sub.add_parser("run", help="process images and write reports and overlays")
    r.add_argument("--config")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--image")
    src.add_argument("--manifest")
    r.add_argument("--model")
    r.add_argument("--out", required=True)
    r.add_argument("--figures", action="store_true", help="also render segmentation panels")
    r.add_argument("--jobs", type=int, default=1)
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("train", help="train one AANN per class")
    t.add_argument("--config")
    t.add_argument("--manifest", required=True)
    t.add_argument("--out", required=True, help="model file (JSON)")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="confusion matrix and TP/TN/FP/FN per class")
    e.add_argument("--predictions", required=True)
    e.add_argument("--manifest", required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_eval)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
