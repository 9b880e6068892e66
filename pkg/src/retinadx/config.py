"""Pipeline configuration: one JSON document, strictly parsed."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

from .classifier import TrainConfig
from .errors import ConfigError
from .features import FeatureSchema, WindowSpec
from .preprocess import PreprocessConfig
from .synth import SynthParams
from .vessel_seg import DbdedConfig, SegmentConfig, VesselnessConfig

_SYNTH_FIXED = ("class_label", "seed")


@dataclass(frozen=True)
class PipelineConfig:
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    segmentation: SegmentConfig = field(default_factory=SegmentConfig)
    dbded: DbdedConfig = field(default_factory=DbdedConfig)
    features: FeatureSchema = field(default_factory=FeatureSchema)
    classifier: TrainConfig = field(default_factory=TrainConfig)
    synth: dict = field(default_factory=dict)  # SynthParams fields except class_label, seed

    def __post_init__(self):
        full = {k: v for k, v in asdict(SynthParams()).items() if k not in _SYNTH_FIXED}
        full.update(self.synth)
        object.__setattr__(self, "synth", full)

    def synth_params(self, label, seed: int) -> SynthParams:
        return _build(SynthParams, dict(self.synth, class_label=label, seed=seed), "synth")

    def to_dict(self) -> dict[str, Any]:
        seg = asdict(self.segmentation)
        vess = seg.pop("vesselness")
        feats = {"window": [self.features.window.m, self.features.window.n],
                 "grid": self.features.grid, "n_max": self.features.n_max}
        return _jsonable({
            "preprocess": asdict(self.preprocess),
            "vesselness": vess,
            "segmentation": seg,
            "dbded": asdict(self.dbded),
            "features": feats,
            "classifier": asdict(self.classifier),
            "synth": self.synth,
        })

    @classmethod
    def from_dict(cls, doc: dict) -> "PipelineConfig":
        if not isinstance(doc, dict):
            raise ConfigError("configuration must be a JSON object")
        known = {"preprocess", "vesselness", "segmentation", "dbded", "features", "classifier", "synth"}
        _reject_unknown(doc, known, "")
        vess = _build(VesselnessConfig, doc.get("vesselness", {}), "vesselness")
        seg_doc = doc.get("segmentation", {})
        _reject_unknown(seg_doc, {f.name for f in fields(SegmentConfig)} - {"vesselness"}, "segmentation")
        seg = _build(SegmentConfig, dict(seg_doc, vesselness=vess), "segmentation")

        feat_doc = dict(doc.get("features", {}))
        _reject_unknown(feat_doc, {"window", "grid", "n_max"}, "features")
        window = feat_doc.pop("window", [15, 15])
        if not (isinstance(window, list) and len(window) == 2):
            raise ConfigError("features.window must be [M, N]")
        features = _build(FeatureSchema, dict(feat_doc, window=WindowSpec(*window)), "features")

        synth_doc = doc.get("synth", {})
        _reject_unknown(synth_doc, {f.name for f in fields(SynthParams)} - set(_SYNTH_FIXED), "synth")
        synth = {k: tuple(v) if isinstance(v, list) else v for k, v in synth_doc.items()}
        _build(SynthParams, synth, "synth")  # validate now, not at first use
        return cls(
            preprocess=_build(PreprocessConfig, doc.get("preprocess", {}), "preprocess"),
            segmentation=seg,
            dbded=_build(DbdedConfig, doc.get("dbded", {}), "dbded"),
            features=features,
            classifier=_build(TrainConfig, doc.get("classifier", {}), "classifier"),
            synth=synth,
        )


def load_config(path: str | Path | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return PipelineConfig.from_dict(doc)


def _reject_unknown(doc, known, where):
    if not isinstance(doc, dict):
        raise ConfigError(f"section {where or '<root>'} must be an object")
    extra = sorted(set(doc) - set(known))
    if extra:
        raise ConfigError(f"unknown key(s) in {where or '<root>'}: {', '.join(extra)}")


def _build(cls, doc, where):
    _reject_unknown(doc, {f.name for f in fields(cls)}, where)
    kwargs = {k: tuple(v) if isinstance(v, list) else v for k, v in doc.items()}
    try:
        return cls(**kwargs)
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj
