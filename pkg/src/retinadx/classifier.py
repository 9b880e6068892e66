"""Auto-associative neural network (AANN) classifier.

Each class gets its own bottleneck network trained to reproduce its input.
An unknown vector goes through every network and takes the label of the one
that reconstructs it with the smallest squared error.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DataError, DimensionMismatchError, NumericError
from .labels import ClassLabel

MODEL_FORMAT = "aann-set/1"


@dataclass
class AannModel:
    """Layered network ``d -> hidden... -> d``, tanh hidden units, linear output.

    ``weights[k]`` has shape ``(out, in)``.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    label: ClassLabel = ClassLabel.NORMAL
    curve: list[float] = field(default_factory=list)

    @property
    def dims(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    def copy(self) -> "AannModel":
        return AannModel([w.copy() for w in self.weights], [b.copy() for b in self.biases],
                         self.label, list(self.curve))


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    epochs: int = 2000
    seed: int = 0
    init_scale: float = 0.1
    hidden: tuple[int, ...] | None = None  # default: one layer of ceil(d / 2)

    def __post_init__(self):
        if not self.learning_rate >= 0:
            raise ConfigError("learning_rate must be >= 0")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.init_scale < 0:
            raise ConfigError("init_scale must be >= 0")


def default_hidden(d: int) -> list[int]:
    return [math.ceil(d / 2)]


def aann_init(d: int, hidden: Sequence[int], seed: int = 0, init_scale: float = 0.1,
              label: ClassLabel = ClassLabel.NORMAL) -> AannModel:
    """Uniform ``[-init_scale, init_scale]`` weights, zero biases."""
    if d < 2:
        raise ConfigError("input dimension must be >= 2")
    hidden = list(hidden)
    if not hidden:
        raise ConfigError("at least one hidden layer is required")
    if any(h < 1 or h >= d for h in hidden):
        raise ConfigError(f"hidden widths must lie in [1, {d - 1}], got {hidden}")
    rng = np.random.default_rng(seed)
    dims = [d] + hidden + [d]
    weights = [rng.uniform(-init_scale, init_scale, size=(o, i)) for i, o in zip(dims, dims[1:])]
    biases = [np.zeros(o) for o in dims[1:]]
    return AannModel(weights, biases, ClassLabel.parse(label))


def _as_batch(model: AannModel, x) -> tuple[np.ndarray, bool]:
    a = np.asarray(x, dtype=np.float64)
    single = a.ndim == 1
    a = np.atleast_2d(a)
    if a.ndim != 2 or a.shape[1] != model.input_dim:
        raise DimensionMismatchError(f"expected vectors of length {model.input_dim}, got {a.shape}")
    return a, single


def _forward(model: AannModel, xb: np.ndarray) -> list[np.ndarray]:
    acts = [xb]
    last = len(model.weights) - 1
    for k, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = acts[-1] @ w.T + b
        acts.append(z if k == last else np.tanh(z))
    return acts


def aann_forward(model: AannModel, x) -> np.ndarray:
    """Reconstruction of a vector (or of each row of a batch)."""
    xb, single = _as_batch(model, x)
    out = _forward(model, xb)[-1]
    return out[0] if single else out


def reconstruction_error(model: AannModel, x) -> float | np.ndarray:
    """``sum_k (xhat_k - x_k)^2`` per vector."""
    xb, single = _as_batch(model, x)
    err = ((_forward(model, xb)[-1] - xb) ** 2).sum(axis=1)
    return float(err[0]) if single else err


def loss_and_gradients(model: AannModel, xb: np.ndarray):
    """Mean squared reconstruction error of a batch and its parameter gradients."""
    xb, _ = _as_batch(model, xb)
    # overflow shows up as a non-finite loss, which the trainer reports
    with np.errstate(over="ignore", invalid="ignore"):
        return _loss_and_gradients(model, xb)


def _loss_and_gradients(model: AannModel, xb: np.ndarray):
    n = xb.shape[0]
    acts = _forward(model, xb)
    diff = acts[-1] - xb
    loss = float((diff ** 2).sum() / n)
    delta = 2.0 * diff / n
    gw: list[np.ndarray] = [None] * len(model.weights)  # type: ignore[list-item]
    gb: list[np.ndarray] = [None] * len(model.weights)  # type: ignore[list-item]
    for k in range(len(model.weights) - 1, -1, -1):
        gw[k] = delta.T @ acts[k]
        gb[k] = delta.sum(axis=0)
        if k:
            delta = (delta @ model.weights[k]) * (1.0 - acts[k] ** 2)
    return loss, gw, gb


def aann_train(model: AannModel, samples, cfg: TrainConfig = TrainConfig()) -> AannModel:
    """Full-batch gradient descent on the mean squared reconstruction error.

    The returned model carries the per-epoch loss curve (loss before each
    update, plus the final loss). If the last iterate is worse than an
    earlier one, the best parameters seen are returned instead.
    """
    xb = np.asarray(samples, dtype=np.float64)
    if xb.ndim != 2 or xb.shape[0] == 0:
        raise DataError("training needs a non-empty (n, d) sample array")
    xb, _ = _as_batch(model, xb)
    m = model.copy()
    curve: list[float] = []
    best_loss, best = math.inf, None
    for epoch in range(cfg.epochs):
        loss, gw, gb = loss_and_gradients(m, xb)
        if not math.isfinite(loss):
            raise NumericError(f"training diverged at epoch {epoch} (loss={loss})")
        curve.append(loss)
        if loss < best_loss:
            best_loss, best = loss, ([w.copy() for w in m.weights], [b.copy() for b in m.biases])
        for k in range(len(m.weights)):
            m.weights[k] -= cfg.learning_rate * gw[k]
            m.biases[k] -= cfg.learning_rate * gb[k]
    final, _, _ = loss_and_gradients(m, xb)
    if not math.isfinite(final):
        raise NumericError(f"training diverged at epoch {cfg.epochs} (loss={final})")
    curve.append(final)
    if final > best_loss:
        m.weights, m.biases = best
    m.curve = curve
    return m


# --------------------------------------------------------------------------
# model sets

@dataclass
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray) -> "Standardizer":
        x = np.asarray(x, dtype=np.float64)
        std = x.std(axis=0)
        return cls(x.mean(axis=0), np.where(std > 0, std, 1.0))

    def __call__(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.mean) / self.std


@dataclass
class Classification:
    label: ClassLabel
    errors: dict[ClassLabel, float]
    tie: bool


@dataclass
class ModelSet:
    schema_id: str
    scaler: Standardizer
    models: dict[ClassLabel, AannModel]

    def classify(self, x) -> Classification:
        return classify(self, x)

    # -- persistence -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "schema_id": self.schema_id,
            "standardization": {"mean": self.scaler.mean.tolist(), "std": self.scaler.std.tolist()},
            "models": [
                {
                    "label": lab.display,
                    "code": int(lab),
                    "layer_dims": mdl.dims,
                    "weights": [w.ravel().tolist() for w in mdl.weights],
                    "biases": [b.tolist() for b in mdl.biases],
                }
                for lab, mdl in sorted(self.models.items())
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, doc: Mapping) -> "ModelSet":
        try:
            if doc["format"] != MODEL_FORMAT:
                raise DataError(f"unsupported model format {doc['format']!r}")
            scaler = Standardizer(np.asarray(doc["standardization"]["mean"], dtype=np.float64),
                                  np.asarray(doc["standardization"]["std"], dtype=np.float64))
            models = {}
            for entry in doc["models"]:
                label = ClassLabel.parse(entry["code"])
                dims = entry["layer_dims"]
                weights = [np.asarray(w, dtype=np.float64).reshape(o, i)
                           for w, i, o in zip(entry["weights"], dims, dims[1:])]
                biases = [np.asarray(b, dtype=np.float64) for b in entry["biases"]]
                models[label] = AannModel(weights, biases, label)
            return cls(doc["schema_id"], scaler, models)
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed model document: {exc}") from exc

    @classmethod
    def loads(cls, text: str) -> "ModelSet":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"model file is not JSON: {exc}") from exc
        return cls.from_dict(doc)


def train_per_class(
    vectors: np.ndarray,
    labels: Iterable,
    cfg: TrainConfig = TrainConfig(),
    schema_id: str = "",
    classes: Iterable[ClassLabel] = tuple(ClassLabel),
) -> ModelSet:
    """One AANN per class, each fitted only to its own class's vectors.

    Standardisation statistics come from the whole training set so all
    class networks see the same scale.
    """
    x = np.asarray(vectors, dtype=np.float64)
    y = [ClassLabel.parse(v) for v in labels]
    if x.ndim != 2 or x.shape[0] != len(y):
        raise DimensionMismatchError("vectors and labels disagree in count")
    classes = list(classes)
    missing = [c.display for c in classes if c not in y]
    if missing:
        raise DataError(f"no training samples for class(es): {', '.join(missing)}")
    scaler = Standardizer.fit(x)
    z = scaler(x)
    d = x.shape[1]
    hidden = list(cfg.hidden) if cfg.hidden else default_hidden(d)
    ya = np.asarray([int(v) for v in y])
    models = {}
    for c in classes:
        init = aann_init(d, hidden, seed=cfg.seed + int(c), init_scale=cfg.init_scale, label=c)
        models[c] = aann_train(init, z[ya == int(c)], cfg)
    return ModelSet(schema_id, scaler, models)


def classify(models: ModelSet | Mapping[ClassLabel, AannModel], x) -> Classification:
    """Label of the network with the smallest reconstruction error.

    Ties go to the lowest class code and set ``tie``. A bare mapping of
    models is used on ``x`` as given; a :class:`ModelSet` standardises first.
    """
    if isinstance(models, ModelSet):
        x = models.scaler(x)
        models = models.models
    if not models:
        raise DataError("no models to classify with")
    errors = {lab: reconstruction_error(m, x) for lab, m in sorted(models.items())}
    return pick_label(errors)


def pick_label(errors: Mapping[ClassLabel, float]) -> Classification:
    ordered = sorted(errors.items())
    best = min(e for _, e in ordered)
    winners = [lab for lab, e in ordered if e == best]
    return Classification(winners[0], dict(ordered), len(winners) > 1)
