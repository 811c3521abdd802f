"""Domain labelling of sentences with a linear classifier over bigram vectors.

Each training instance pairs a sentence with its predecessor inside the same
manifesto; the instance key "<prev-id>|<id>" (or "<BOS>|<id>" at manifesto
start) addresses a row in a bigram embedding file, and the target is the
policy domain of the second sentence. Training is plain full-batch gradient
descent on a softmax cross-entropy with L2 on the weights, which keeps runs
reproducible to the byte.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from .corpus import Corpus, DomainScheme
from .embeddings import EmbeddingStore
from .errors import TrainingError, ValidationError
from .util import json_ready

BOS_TOKEN = "<BOS>"


@dataclass(frozen=True)
class BigramInstance:
    """One sentence with its context key and optional gold domain label."""

    key: str
    sentence_id: str
    party: str
    election_date: str
    position: int
    label: str | None


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 300
    learning_rate: float = 0.1
    l2: float = 1e-4

    def validate(self) -> None:
        if self.epochs < 1:
            raise ValidationError("epochs must be positive")
        if self.learning_rate <= 0:
            raise ValidationError("learning rate must be positive")
        if self.l2 < 0:
            raise ValidationError("l2 strength must be non-negative")


@dataclass(frozen=True)
class ClassifierModel:
    """Linear softmax classifier; also covers the constant-majority baseline."""

    classes: tuple[str, ...]
    weights: np.ndarray
    bias: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != len(self.classes) or b.shape != (len(self.classes),):
            raise ValidationError("model weight shapes do not match class list")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def scores(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.dim:
            raise ValidationError(
                f"feature dimension {x.shape[1]} does not match model dimension {self.dim}"
            )
        return x @ self.weights.T + self.bias

    def predict(self, x: np.ndarray) -> list[str]:
        # argmax takes the first maximum, so ties resolve to the
        # alphabetically first class.
        return [self.classes[i] for i in self.scores(x).argmax(axis=1)]

    def save(self, path: str | Path) -> None:
        obj = {
            "classes": list(self.classes),
            "n_classes": len(self.classes),
            "dim": self.dim,
            "weights": json_ready(self.weights.ravel()),
            "bias": json_ready(self.bias),
            "metadata": json_ready(self.metadata),
        }
        Path(path).write_text(
            json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: str | Path) -> "ClassifierModel":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        classes = tuple(obj["classes"])
        dim = int(obj["dim"])
        weights = np.array(obj["weights"], dtype=np.float64).reshape(len(classes), dim)
        return cls(
            classes=classes,
            weights=weights,
            bias=np.array(obj["bias"], dtype=np.float64),
            metadata=obj.get("metadata", {}),
        )


def make_bigrams(corpus: Corpus, scheme: DomainScheme | None = None) -> list[BigramInstance]:
    """Sentence/predecessor instances for every sentence, manifesto by manifesto.

    Pairs never cross a manifesto boundary; the first sentence of each
    manifesto is paired with a begin marker. Labels are domain names under
    the scheme ("other" for codes outside every domain) and None for uncoded
    sentences or when no scheme is given.
    """
    instances = []
    for (party, date), sentences in corpus.manifestos():
        prev = BOS_TOKEN
        for s in sentences:
            label = None
            if scheme is not None and s.code is not None:
                label = scheme.label_of(s.code)
            instances.append(
                BigramInstance(
                    key=f"{prev}|{s.id}",
                    sentence_id=s.id,
                    party=party,
                    election_date=date,
                    position=s.position,
                    label=label,
                )
            )
            prev = s.id
    return instances


def split_validation(
    instances: list[BigramInstance], holdout: float = 0.1
) -> tuple[list[BigramInstance], list[BigramInstance]]:
    """Hold out the tail of every manifesto, in document order.

    The boundary is floor(n * (1 - holdout)) per manifesto, so the held-out
    part is the final stretch of each document rather than a random sample.
    """
    if not 0.0 < holdout < 1.0:
        raise ValidationError("holdout fraction must be in (0, 1)")
    groups: dict[tuple[str, str], list[BigramInstance]] = {}
    for inst in instances:
        groups.setdefault((inst.party, inst.election_date), []).append(inst)
    train: list[BigramInstance] = []
    val: list[BigramInstance] = []
    for key in sorted(groups):
        chunk = sorted(groups[key], key=lambda i: i.position)
        cut = int(len(chunk) * (1.0 - holdout))
        train.extend(chunk[:cut])
        val.extend(chunk[cut:])
    return train, val


def feature_matrix(
    instances: list[BigramInstance], store: EmbeddingStore, source: str = "bigram"
) -> np.ndarray:
    """Stack feature vectors for instances, keyed by bigram key or sentence id."""
    if source == "bigram":
        keys = [inst.key for inst in instances]
    elif source == "sentence":
        keys = [inst.sentence_id for inst in instances]
    else:
        raise ValidationError(f"unknown feature source {source!r}")
    return store.vectors(keys)


def _one_hot(labels: list[str], classes: tuple[str, ...]) -> np.ndarray:
    index = {c: i for i, c in enumerate(classes)}
    y = np.zeros((len(labels), len(classes)))
    for row, label in enumerate(labels):
        try:
            y[row, index[label]] = 1.0
        except KeyError:
            raise ValidationError(f"label {label!r} not in class list") from None
    return y


def logreg_loss_and_grad(
    weights: np.ndarray,
    bias: np.ndarray,
    x: np.ndarray,
    y_onehot: np.ndarray,
    l2: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean softmax cross-entropy with L2 on weights, and its gradients."""
    z = x @ weights.T + bias
    lse = logsumexp(z, axis=1)
    n = x.shape[0]
    loss = float((lse - (z * y_onehot).sum(axis=1)).mean())
    loss += 0.5 * l2 * float((weights * weights).sum())
    p = np.exp(z - lse[:, None])
    g = (p - y_onehot) / n
    grad_w = g.T @ x + l2 * weights
    grad_b = g.sum(axis=0)
    return loss, grad_w, grad_b


def train_logreg(
    x: np.ndarray,
    labels: list[str],
    config: TrainConfig = TrainConfig(),
    classes: tuple[str, ...] | None = None,
) -> ClassifierModel:
    """Fit the softmax classifier by deterministic full-batch descent.

    Parameters start at zero, so no seed is involved. If a step increases the
    loss it is rolled back and the learning rate halved; a warning is issued
    the first time this happens.
    """
    config.validate()
    if len(labels) != x.shape[0]:
        raise ValidationError("feature rows and labels differ in length")
    if x.shape[0] == 0:
        raise TrainingError("no training instances")
    if classes is None:
        classes = tuple(sorted(set(labels)))
    y = _one_hot(labels, classes)
    dim = x.shape[1]
    weights = np.zeros((len(classes), dim))
    bias = np.zeros(len(classes))

    lr = config.learning_rate
    loss, grad_w, grad_b = logreg_loss_and_grad(weights, bias, x, y, config.l2)
    halved = False
    for _ in range(config.epochs):
        new_w = weights - lr * grad_w
        new_b = bias - lr * grad_b
        new_loss, new_gw, new_gb = logreg_loss_and_grad(new_w, new_b, x, y, config.l2)
        if new_loss > loss:
            if not halved:
                warnings.warn(
                    "training loss increased; halving the learning rate",
                    RuntimeWarning,
                    stacklevel=2,
                )
                halved = True
            lr /= 2.0
            if lr < 1e-12:
                break
            continue
        weights, bias = new_w, new_b
        loss, grad_w, grad_b = new_loss, new_gw, new_gb

    return ClassifierModel(
        classes=classes,
        weights=weights,
        bias=bias,
        metadata={
            "trainer": "logreg",
            "epochs": config.epochs,
            "learning_rate": config.learning_rate,
            "l2": config.l2,
            "final_loss": loss,
            "n_train": x.shape[0],
        },
    )


def train_majority(
    labels: list[str], dim: int, classes: tuple[str, ...] | None = None
) -> ClassifierModel:
    """Constant classifier that always predicts the most frequent label.

    Ties between equally frequent labels break alphabetically. Expressed as
    a linear model with zero weights and a one-hot bias so it shares the
    model format with the trained classifier.
    """
    if not labels:
        raise TrainingError("no training instances")
    if classes is None:
        classes = tuple(sorted(set(labels)))
    counts = {c: 0 for c in classes}
    for label in labels:
        if label not in counts:
            raise ValidationError(f"label {label!r} not in class list")
        counts[label] += 1
    # classes are sorted and max keeps the earliest winner on ties
    best = max(counts.values())
    majority = next(c for c in classes if counts[c] == best)
    bias = np.zeros(len(classes))
    bias[classes.index(majority)] = 1.0
    return ClassifierModel(
        classes=classes,
        weights=np.zeros((len(classes), dim)),
        bias=bias,
        metadata={"trainer": "majority", "majority_class": majority, "n_train": len(labels)},
    )


def accuracy(predicted: list[str], gold: list[str]) -> float:
    if len(predicted) != len(gold):
        raise ValidationError("prediction and gold lists differ in length")
    if not gold:
        raise ValidationError("cannot score an empty set")
    return sum(p == g for p, g in zip(predicted, gold)) / len(gold)


def per_label_accuracy(predicted: list[str], gold: list[str]) -> dict[str, float]:
    """Accuracy restricted to the instances whose gold label is each class."""
    if len(predicted) != len(gold):
        raise ValidationError("prediction and gold lists differ in length")
    hits: dict[str, int] = {}
    totals: dict[str, int] = {}
    for p, g in zip(predicted, gold):
        totals[g] = totals.get(g, 0) + 1
        hits[g] = hits.get(g, 0) + (1 if p == g else 0)
    return {label: hits[label] / totals[label] for label in sorted(totals)}


def write_predictions(
    path: str | Path, instances: list[BigramInstance], predicted: list[str]
) -> None:
    """Predictions JSONL, one {"id", "predicted_domain"} object per sentence."""
    if len(instances) != len(predicted):
        raise ValidationError("instances and predictions differ in length")
    with Path(path).open("w", encoding="utf-8") as fh:
        for inst, label in zip(instances, predicted):
            fh.write(
                json.dumps(
                    {"id": inst.sentence_id, "predicted_domain": label},
                    sort_keys=True,
                    ensure_ascii=False,
                )
                + "\n"
            )
