"""Vote aggregation: majority voting and a generative label model.

The generative model treats the unknown true class Y and each rule's vote as
jointly distributed. Its parameter grid mu has one row per (rule, voted
class) and one column per true class y, holding the joint probability
P(vote, Y=y). Rules are assumed conditionally independent given Y, so for
two different rules j and j' the observable second moment of their one-hot
vote indicators factors through mu:

    E[psi_j psi_j'^T] = mu_j diag(1/p) mu_j'^T

where p is the class prior. Fitting minimizes the squared mismatch between
that factorization and the empirical second moment over all off-diagonal
rule pairs, with an l2 penalty, by mini-batch Adam. Posteriors then follow
the naive-Bayes form over non-abstaining rules.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .runtime import ABSTAIN, LabelMatrix
from .schema import MULTI_CLASS, MULTI_LABEL, TaskSchema

PROB_FLOOR = 1e-6
MU_EPS = 1e-6


class ModelUnidentifiableError(ValueError):
    """The generative model cannot be fit on this matrix; fall back to majority_vote."""


class ModelMismatchError(ValueError):
    """Params were fitted on a matrix with different rules or schema."""


@dataclass(frozen=True)
class ClassPrior:
    p: np.ndarray  # (k,), each >= PROB_FLOOR, sums to 1

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("prior must be a non-empty vector")
        p = np.maximum(p, PROB_FLOOR)
        p = p / p.sum()
        object.__setattr__(self, "p", p)

    @property
    def k(self) -> int:
        return self.p.size

    @classmethod
    def uniform(cls, k: int) -> "ClassPrior":
        return cls(np.full(k, 1.0 / k))

    @classmethod
    def from_counts(cls, counts) -> "ClassPrior":
        return cls(np.asarray(counts, dtype=np.float64))


@dataclass(frozen=True)
class TrainConfig:
    optimizer: str = "adam"
    learning_rate: float = 0.01
    l2: float = 0.01
    epochs: int = 2
    batch_size: int = 5000
    seed: int = 0
    init_accuracy: float = 0.7
    init_noise: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.optimizer != "adam":
            raise ValueError(f"unsupported optimizer '{self.optimizer}'")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")


@dataclass
class LabelModelParams:
    """Fitted generative-model parameters plus everything predict needs."""

    mu: np.ndarray  # (len(kept)*k, k)
    prior: ClassPrior
    lf_names: tuple[str, ...]
    labels: tuple[str, ...]
    task: str
    kept: tuple[int, ...]  # matrix columns that actually vote; the rest were pruned
    train_log: list[tuple[int, float]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "mu": self.mu.tolist(),
            "prior": self.prior.p.tolist(),
            "lf_names": list(self.lf_names),
            "labels": list(self.labels),
            "task": self.task,
            "kept": list(self.kept),
            "train_log": [[step, loss] for step, loss in self.train_log],
        }

    @classmethod
    def from_json(cls, data: dict) -> "LabelModelParams":
        return cls(
            mu=np.asarray(data["mu"], dtype=np.float64),
            prior=ClassPrior(np.asarray(data["prior"], dtype=np.float64)),
            lf_names=tuple(data["lf_names"]),
            labels=tuple(data["labels"]),
            task=data["task"],
            kept=tuple(int(j) for j in data["kept"]),
            train_log=[(int(s), float(l)) for s, l in data.get("train_log", [])],
        )


def majority_vote(matrix: LabelMatrix, prior: ClassPrior | None = None) -> np.ndarray:
    """Per row: vote shares over non-abstaining rules; the prior when all abstain."""
    k = matrix.schema.k
    if prior is None:
        prior = ClassPrior.uniform(k)
    if prior.k != k:
        raise ValueError(f"prior has {prior.k} classes, schema has {k}")
    n = matrix.n
    counts = np.zeros((n, k), dtype=np.float64)
    mask = matrix.votes != ABSTAIN
    rows, cols = np.nonzero(mask)
    np.add.at(counts, (rows, matrix.votes[rows, cols].astype(np.int64)), 1.0)
    totals = counts.sum(axis=1, keepdims=True)
    probs = np.where(totals > 0, counts / np.maximum(totals, 1.0), prior.p[None, :])
    return probs


def mv_prior(matrix: LabelMatrix) -> ClassPrior:
    """Empirical class distribution of hardened majority votes."""
    probs = majority_vote(matrix, ClassPrior.uniform(matrix.schema.k))
    hard = probs.argmax(axis=1)
    counts = np.bincount(hard, minlength=matrix.schema.k).astype(np.float64)
    if counts.sum() == 0:
        return ClassPrior.uniform(matrix.schema.k)
    return ClassPrior.from_counts(counts)


def _one_hot_votes(votes: np.ndarray, k: int) -> np.ndarray:
    """Indicator matrix Psi: column block j holds one-hot of rule j's vote (zero row on abstain)."""
    n, m = votes.shape
    psi = np.zeros((n, m * k), dtype=np.float64)
    for c in range(k):
        rows, cols = np.nonzero(votes == c)
        psi[rows, cols * k + c] = 1.0
    return psi


def _block_mask(m: int, k: int) -> np.ndarray:
    mask = np.ones((m * k, m * k), dtype=np.float64)
    for j in range(m):
        mask[j * k : (j + 1) * k, j * k : (j + 1) * k] = 0.0
    return mask


def pairwise_loss(mu: np.ndarray, second_moment: np.ndarray, p: np.ndarray, l2: float) -> float:
    """Squared off-diagonal-block mismatch plus l2 penalty."""
    m_times_k = mu.shape[0]
    k = mu.shape[1]
    mask = _block_mask(m_times_k // k, k)
    residual = ((mu / p) @ mu.T - second_moment) * mask
    return float((residual * residual).sum() + l2 * (mu * mu).sum())


def pairwise_grad(mu: np.ndarray, second_moment: np.ndarray, p: np.ndarray, l2: float) -> np.ndarray:
    """Analytic gradient of pairwise_loss in mu."""
    m_times_k = mu.shape[0]
    k = mu.shape[1]
    mask = _block_mask(m_times_k // k, k)
    scaled = mu / p
    residual = (scaled @ mu.T - second_moment) * mask
    return 4.0 * (residual @ scaled) + 2.0 * l2 * mu


def _init_mu(
    coverage: np.ndarray, prior: ClassPrior, k: int, config: TrainConfig, rng: np.random.Generator
) -> np.ndarray:
    """Start from 'each rule votes its class with accuracy init_accuracy'."""
    m_eff = coverage.size
    a0 = config.init_accuracy
    off = (1.0 - a0) / (k - 1) if k > 1 else 0.0
    mu = np.empty((m_eff * k, k), dtype=np.float64)
    for j in range(m_eff):
        for c in range(k):
            row = prior.p * off
            row[c] = prior.p[c] * a0
            mu[j * k + c] = coverage[j] * row
    mu = mu + rng.normal(0.0, config.init_noise, size=mu.shape)
    return _project_mu(mu, prior.p, k)


def _project_mu(mu: np.ndarray, p: np.ndarray, k: int) -> np.ndarray:
    """Clamp into (0, 1) and rescale each (rule, y) group so its mass stays under p[y]."""
    mu = np.clip(mu, MU_EPS, 1.0 - MU_EPS)
    m_eff = mu.shape[0] // k
    grouped = mu.reshape(m_eff, k, k)
    sums = grouped.sum(axis=1)  # (m_eff, k): total joint mass per (rule, y)
    scale = np.minimum(1.0, p[None, :] / np.maximum(sums, 1e-300))
    return (grouped * scale[:, None, :]).reshape(m_eff * k, k)


def fit_covariance_model(
    matrix: LabelMatrix,
    config: TrainConfig | None = None,
    prior: ClassPrior | None = None,
    uniform_prior: bool = False,
) -> LabelModelParams:
    """Fit mu by mini-batch Adam on the pairwise factorization objective.

    Always-abstaining rules carry no signal and are pruned before fitting.
    Fewer than two voting rules leave no off-diagonal pairs, which makes the
    model unidentifiable; that raises instead of fitting garbage.
    """
    if config is None:
        config = TrainConfig()
    schema = matrix.schema
    k = schema.k
    if k < 2:
        raise ModelUnidentifiableError("the schema has a single class; nothing to disambiguate")
    if matrix.m < 2:
        raise ModelUnidentifiableError(
            f"{matrix.m} rule(s) give no rule pairs to fit on; use majority_vote instead"
        )
    kept = tuple(
        int(j) for j in range(matrix.m) if bool((matrix.votes[:, j] != ABSTAIN).any())
    )
    if len(kept) < 2:
        raise ModelUnidentifiableError(
            f"only {len(kept)} rule(s) ever vote; use majority_vote instead"
        )
    if prior is None:
        prior = ClassPrior.uniform(k) if uniform_prior else mv_prior(matrix)
    if prior.k != k:
        raise ValueError(f"prior has {prior.k} classes, schema has {k}")

    votes = matrix.votes[:, kept]
    n = votes.shape[0]
    psi = _one_hot_votes(votes, k)
    coverage = (votes != ABSTAIN).mean(axis=0)

    rng = np.random.default_rng(config.seed)
    mu = _init_mu(coverage, prior, k, config, rng)

    full_moment = psi.T @ psi / n
    train_log: list[tuple[int, float]] = [(0, pairwise_loss(mu, full_moment, prior.p, config.l2))]

    adam_m = np.zeros_like(mu)
    adam_v = np.zeros_like(mu)
    step = 0
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            moment = psi[batch].T @ psi[batch] / batch.size
            grad = pairwise_grad(mu, moment, prior.p, config.l2)
            step += 1
            adam_m = config.beta1 * adam_m + (1.0 - config.beta1) * grad
            adam_v = config.beta2 * adam_v + (1.0 - config.beta2) * grad * grad
            m_hat = adam_m / (1.0 - config.beta1**step)
            v_hat = adam_v / (1.0 - config.beta2**step)
            mu = mu - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_eps)
            mu = _project_mu(mu, prior.p, k)
            train_log.append((step, pairwise_loss(mu, moment, prior.p, config.l2)))

    return LabelModelParams(
        mu=mu,
        prior=prior,
        lf_names=matrix.lf_names,
        labels=schema.labels,
        task=schema.name,
        kept=kept,
        train_log=train_log,
    )


def predict_proba(matrix: LabelMatrix, params: LabelModelParams) -> np.ndarray:
    """Naive-Bayes posterior over classes given each row's non-abstaining votes.

    Rows where every rule abstains fall back to the prior. Computed in log
    space so long products cannot underflow.
    """
    if matrix.lf_names != params.lf_names:
        raise ModelMismatchError("matrix rules differ from the ones the model was fitted on")
    if matrix.schema.labels != tuple(params.labels) or matrix.schema.name != params.task:
        raise ModelMismatchError("matrix schema differs from the one the model was fitted on")
    k = matrix.schema.k
    p = params.prior.p
    n = matrix.n
    log_probs = np.tile(np.log(p), (n, 1))
    log_factor = np.log(params.mu) - np.log(p)[None, :]
    for jj, j in enumerate(params.kept):
        col = matrix.votes[:, j]
        for c in range(k):
            rows = np.nonzero(col == c)[0]
            if rows.size:
                log_probs[rows] += log_factor[jj * k + c]
    log_probs -= log_probs.max(axis=1, keepdims=True)
    probs = np.exp(log_probs)
    probs /= probs.sum(axis=1, keepdims=True)
    return probs


def harden(probs: np.ndarray, schema: TaskSchema, threshold: float = 0.5):
    """Soft to hard: argmax label names (ties to the lowest index), or per-tag thresholding."""
    if schema.mode == MULTI_CLASS:
        return [schema.labels[i] for i in probs.argmax(axis=1)]
    return [
        {label: bool(row[t] >= threshold) for t, label in enumerate(schema.labels)}
        for row in probs
    ]


# ---------------------------------------------------------------------------
# Multi-label aggregation: one binary subproblem per tag.

_BINARY_LABELS = ("absent", "present")


@dataclass
class TagVoteModel:
    """Per-tag aggregation state: enough to turn a tag matrix into presence probabilities."""

    kind: str  # "mv" | "cm"
    labels: tuple[str, ...]
    lf_names: tuple[str, ...]
    lf_targets: tuple[int, ...]
    a_fire: float
    base_rates: np.ndarray  # (T,) fraction of docs where some rule for the tag fired
    per_tag: dict[int, LabelModelParams] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "labels": list(self.labels),
            "lf_names": list(self.lf_names),
            "lf_targets": list(self.lf_targets),
            "a_fire": self.a_fire,
            "base_rates": self.base_rates.tolist(),
            "per_tag": {str(t): params.to_json() for t, params in self.per_tag.items()},
        }

    @classmethod
    def from_json(cls, data: dict) -> "TagVoteModel":
        return cls(
            kind=data["kind"],
            labels=tuple(data["labels"]),
            lf_names=tuple(data["lf_names"]),
            lf_targets=tuple(int(t) for t in data["lf_targets"]),
            a_fire=float(data["a_fire"]),
            base_rates=np.asarray(data["base_rates"], dtype=np.float64),
            per_tag={
                int(t): LabelModelParams.from_json(p) for t, p in data.get("per_tag", {}).items()
            },
        )


def _require_tag_matrix(matrix: LabelMatrix) -> None:
    if matrix.schema.mode != MULTI_LABEL:
        raise ValueError("tag aggregation needs a multi-label matrix")
    if matrix.lf_targets is None:
        raise ValueError("tag aggregation needs per-rule target tags on the matrix")


def _binary_submatrix(matrix: LabelMatrix, cols: list[int], tag_label: str) -> LabelMatrix:
    fired = matrix.votes[:, cols] != ABSTAIN
    sub_votes = np.where(fired, np.int16(1), np.int16(ABSTAIN))
    sub_schema = TaskSchema(name=f"tag:{tag_label}", labels=_BINARY_LABELS, mode=MULTI_CLASS)
    return LabelMatrix(
        doc_ids=matrix.doc_ids,
        lf_names=tuple(matrix.lf_names[j] for j in cols),
        votes=sub_votes,
        schema=sub_schema,
    )


def fit_tag_model(
    matrix: LabelMatrix,
    model: str = "mv",
    a_fire: float = 0.9,
    train_config: TrainConfig | None = None,
    seed: int = 0,
) -> TagVoteModel:
    """Fit per-tag binary aggregation.

    mv needs no fitting. cm fits a binary generative model for every tag with
    at least two rules; tags with a single rule use a calibrated fallback:
    p(present | rule fired) = a_fire, p(present | silent) = the tag's fired
    fraction over this corpus.
    """
    _require_tag_matrix(matrix)
    if model not in ("mv", "cm"):
        raise ValueError(f"unknown tag aggregation model '{model}'")
    schema = matrix.schema
    t_count = schema.k
    base_rates = np.zeros(t_count, dtype=np.float64)
    per_tag: dict[int, LabelModelParams] = {}
    for t in range(t_count):
        cols = [j for j, target in enumerate(matrix.lf_targets) if target == t]
        if not cols:
            continue
        fired = matrix.votes[:, cols] != ABSTAIN
        base_rates[t] = fired.any(axis=1).mean()
        if model == "cm" and len(cols) >= 2:
            sub = _binary_submatrix(matrix, cols, schema.labels[t])
            config = train_config if train_config is not None else TrainConfig(seed=seed)
            mv_share = fired.sum(axis=1) / len(cols)
            p_present = float(np.clip((mv_share >= 0.5).mean(), PROB_FLOOR, 1.0 - PROB_FLOOR))
            prior = ClassPrior(np.array([1.0 - p_present, p_present]))
            try:
                per_tag[t] = fit_covariance_model(sub, config=config, prior=prior)
            except ModelUnidentifiableError:
                # all but one rule silent for the whole corpus: fall back like 1-rule tags
                pass
    return TagVoteModel(
        kind=model,
        labels=schema.labels,
        lf_names=matrix.lf_names,
        lf_targets=matrix.lf_targets,
        a_fire=a_fire,
        base_rates=base_rates,
        per_tag=per_tag,
    )


def predict_tag_probs(matrix: LabelMatrix, tag_model: TagVoteModel) -> np.ndarray:
    """Presence probability per (document, tag), columns in schema order."""
    _require_tag_matrix(matrix)
    if matrix.lf_names != tag_model.lf_names or matrix.lf_targets != tag_model.lf_targets:
        raise ModelMismatchError("matrix rules differ from the ones the tag model was fitted on")
    if matrix.schema.labels != tuple(tag_model.labels):
        raise ModelMismatchError("matrix schema differs from the tag model's")
    n = matrix.n
    t_count = matrix.schema.k
    probs = np.zeros((n, t_count), dtype=np.float64)
    for t in range(t_count):
        cols = [j for j, target in enumerate(matrix.lf_targets) if target == t]
        if not cols:
            continue
        fired = matrix.votes[:, cols] != ABSTAIN
        if tag_model.kind == "mv":
            probs[:, t] = fired.sum(axis=1) / len(cols)
        elif t in tag_model.per_tag:
            sub = _binary_submatrix(matrix, cols, matrix.schema.labels[t])
            probs[:, t] = predict_proba(sub, tag_model.per_tag[t])[:, 1]
        else:
            any_fired = fired.any(axis=1)
            probs[:, t] = np.where(any_fired, tag_model.a_fire, tag_model.base_rates[t])
    return probs


def tag_vote(
    matrix: LabelMatrix,
    model: str = "mv",
    a_fire: float = 0.9,
    train_config: TrainConfig | None = None,
    seed: int = 0,
) -> np.ndarray:
    """One-shot fit-and-predict for tag presence probabilities."""
    fitted = fit_tag_model(matrix, model=model, a_fire=a_fire, train_config=train_config, seed=seed)
    return predict_tag_probs(matrix, fitted)
