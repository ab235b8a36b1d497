"""Poisson-density scoring of diagrams and Bayes-factor classification.

A fitted class model is a posterior intensity together with its total mass.
A diagram D is scored by the Poisson point-process log density

    log p(D) = -lambda - log(|D|!) + sum_{x in D} log intensity(x)

and two classes are compared through the log Bayes factor, the difference of
their log densities. Multiclass decisions use one vote per unordered pair of
classes; evaluation is by stratified k-fold cross validation.
"""

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from .errors import ValidationError
from .filtration import PersistenceDiagram
from .intensity import (
    GaussianMixtureIntensity,
    log_eval_intensity,
    mixture_from_json,
    mixture_to_json,
    total_mass,
)
from .posterior import PosteriorConfig, posterior_intensity


@dataclass(frozen=True, eq=False)
class ClassModel:
    """A fitted class: posterior intensity plus its cached total mass."""

    label: str
    posterior: GaussianMixtureIntensity
    lam: float

    def __post_init__(self):
        lam = float(self.lam)
        if abs(lam - total_mass(self.posterior)) > 1e-12 * max(1.0, abs(lam)):
            raise ValidationError("lam must equal the posterior's total mass")
        object.__setattr__(self, "lam", lam)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Labeled diagrams plus the fold count used for cross validation."""

    entries: tuple
    k_folds: int

    def __post_init__(self):
        entries = tuple((d, str(lab)) for d, lab in self.entries)
        if self.k_folds < 1:
            raise ValidationError("k_folds must be a positive integer")
        counts = {}
        for _, lab in entries:
            counts[lab] = counts.get(lab, 0) + 1
        for lab, n in counts.items():
            if n < self.k_folds:
                raise ValidationError(
                    f"class {lab!r} has {n} entries, fewer than k_folds={self.k_folds}"
                )
        object.__setattr__(self, "entries", entries)

    @property
    def labels(self) -> list:
        return sorted({lab for _, lab in self.entries})


def fit_class_model(training, prior: GaussianMixtureIntensity,
                    cfg: PosteriorConfig, label) -> ClassModel:
    """Fit one class by conditioning the prior on its training diagrams."""
    if len(training) == 0:
        raise ValidationError("training set is empty")
    post = posterior_intensity(prior, training, cfg)
    return ClassModel(label=str(label), posterior=post, lam=total_mass(post))


def diagram_log_density(d: PersistenceDiagram, model: ClassModel) -> float:
    """Log Poisson-process density of a diagram under a fitted model.

    Returns -inf when any point falls where the intensity vanishes (outside
    the wedge, or under an empty mixture). The factorial term uses log-gamma
    so diagrams with hundreds of points stay in range.
    """
    pts = d.points
    if len(pts) == 0:
        return -model.lam
    logs = log_eval_intensity(model.posterior, pts)
    if np.any(np.isneginf(logs)):
        return float("-inf")
    return float(-model.lam - gammaln(len(pts) + 1) + logs.sum())


def log_bayes_factor(d: PersistenceDiagram, model_i: ClassModel,
                     model_j: ClassModel) -> float:
    """log of the ratio of posterior predictive densities, i over j.

    When both densities are zero there is no evidence either way and the
    result is defined as 0.
    """
    li = diagram_log_density(d, model_i)
    lj = diagram_log_density(d, model_j)
    if li == float("-inf") and lj == float("-inf"):
        return 0.0
    return li - lj


class ClassifyResult(NamedTuple):
    label: str
    votes: dict
    log_densities: dict


def classify(d: PersistenceDiagram, models, threshold_c: float = 1.0) -> ClassifyResult:
    """Assign a diagram to a class by pairwise Bayes-factor voting.

    For every unordered pair of classes, the class with the larger evidence
    gets one vote: i when log BF(i, j) exceeds log(threshold_c), j when it
    falls below, no vote on an exact tie. The label with most votes wins;
    vote ties break toward the larger total log density, then toward the
    lexicographically smallest label. The full evidence trail is returned.
    Invariant under permutation of the models list.
    """
    if len(models) < 2:
        raise ValidationError("need at least 2 class models")
    if threshold_c <= 0:
        raise ValidationError("threshold_c must be positive")
    labels = [m.label for m in models]
    if len(set(labels)) != len(labels):
        raise ValidationError("class labels must be distinct")
    by_label = {m.label: m for m in models}
    order = sorted(labels)
    log_c = math.log(threshold_c)

    ld = {lab: diagram_log_density(d, by_label[lab]) for lab in order}
    votes = {lab: 0 for lab in order}
    for a, b in itertools.combinations(order, 2):
        la, lb = ld[a], ld[b]
        if la == float("-inf") and lb == float("-inf"):
            lbf = 0.0
        else:
            lbf = la - lb
        if lbf > log_c:
            votes[a] += 1
        elif lbf < log_c:
            votes[b] += 1
    winner = min(order, key=lambda lab: (-votes[lab], -ld[lab], lab))
    return ClassifyResult(winner, votes, ld)


def stratified_folds(data: LabeledDataset, seed: int = 0) -> list:
    """Seeded per-class partition into data.k_folds folds.

    Each class's entries are shuffled once and split into k nearly equal
    chunks; fold f tests on every class's chunk f. Returns a list of
    (train_indices, test_indices) pairs of sorted global indices. Every
    entry appears in exactly one test fold.
    """
    rng = np.random.default_rng(seed)
    k = data.k_folds
    by_label = {lab: [] for lab in data.labels}
    for i, (_, lab) in enumerate(data.entries):
        by_label[lab].append(i)
    chunks = {
        lab: np.array_split(rng.permutation(np.asarray(idx)), k)
        for lab, idx in by_label.items()
    }
    folds = []
    for f in range(k):
        test = np.concatenate([chunks[lab][f] for lab in data.labels])
        train = np.concatenate(
            [chunks[lab][g] for lab in data.labels for g in range(k) if g != f]
        )
        folds.append((np.sort(train), np.sort(test)))
    return folds


def cross_validate(data: LabeledDataset, prior: GaussianMixtureIntensity,
                   cfg: PosteriorConfig, threshold_c: float = 1.0,
                   seed: int = 0) -> dict:
    """Stratified k-fold cross validation of the Bayes-factor classifier.

    Per fold, one model per class is fitted on the training portion and the
    held-out diagrams are classified; the reported accuracy is the average
    of the fold accuracies. The confusion matrix has true labels on rows and
    predicted labels on columns, both in sorted label order, aggregated over
    folds. Deterministic given the split seed.
    """
    labels = data.labels
    if len(labels) < 2:
        raise ValidationError("cross validation needs at least two classes")
    lab_pos = {lab: i for i, lab in enumerate(labels)}
    per_fold = []
    confusion = np.zeros((len(labels), len(labels)), dtype=int)
    for train_idx, test_idx in stratified_folds(data, seed):
        models = []
        for lab in labels:
            training = [data.entries[i][0] for i in train_idx if data.entries[i][1] == lab]
            models.append(fit_class_model(training, prior, cfg, lab))
        correct = 0
        for i in test_idx:
            diagram, true_lab = data.entries[i]
            result = classify(diagram, models, threshold_c)
            confusion[lab_pos[true_lab], lab_pos[result.label]] += 1
            correct += result.label == true_lab
        per_fold.append(correct / len(test_idx))
    return {
        "accuracy": float(np.mean(per_fold)),
        "per_fold": [float(a) for a in per_fold],
        "labels": labels,
        "confusion": confusion.tolist(),
        "k_folds": data.k_folds,
        "seed": int(seed),
        "config": {
            "alpha": float(cfg.alpha),
            "sigma_obs": float(cfg.sigma_obs),
            "threshold_c": float(threshold_c),
        },
    }


def model_to_json(model: ClassModel) -> dict:
    return {
        "label": model.label,
        "lambda": float(model.lam),
        "posterior": mixture_to_json(model.posterior),
    }


def model_from_json(obj) -> ClassModel:
    if not isinstance(obj, dict) or "label" not in obj or "posterior" not in obj:
        raise ValidationError("model JSON needs 'label' and 'posterior'")
    posterior = mixture_from_json(obj["posterior"])
    lam = float(obj.get("lambda", total_mass(posterior)))
    return ClassModel(label=str(obj["label"]), posterior=posterior, lam=lam)
