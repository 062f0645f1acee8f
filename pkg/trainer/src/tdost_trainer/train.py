"""Source-side training with the published grid, frozen evaluation at the
target.

Every random choice is derived from the run seed, so two runs with equal
seeds match to float32 exactness. Grid cells are independent of each
other; they can run sequentially or as separate processes, and the merge
is a pure argmax over validation weighted F1 (earlier cell wins ties).
"""

from __future__ import annotations

import hashlib
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from multiprocessing import get_context

import numpy as np
import torch

from .data import DatasetError, FoldSplit, Window, split_fold
from .encoders import encode_windows
from .metrics import accuracy, weighted_f1
from .models import (
    BaselineIdsClassifier,
    BiLstmClassifier,
    ConvBiLstmClassifier,
    build_vocab,
    encode_tokens,
    pad_feature_batch,
    pad_token_batch,
)

N_FOLDS = 3

KIND_BILSTM = "bilstm"
KIND_CONVBILSTM = "convbilstm"
KIND_BASELINE_IDS = "baseline_ids"
KINDS = (KIND_BILSTM, KIND_CONVBILSTM, KIND_BASELINE_IDS)


@dataclass(frozen=True, slots=True)
class ClassifierSpec:
    kind: str = KIND_BILSTM
    hidden: int = 64

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown classifier kind {self.kind!r}")
        if self.hidden < 1:
            raise ValueError("hidden units must be positive")


@dataclass(frozen=True, slots=True)
class TrainPlan:
    epochs: int = 75
    learning_rates: tuple[float, ...] = (1e-3, 1e-4, 5e-4)
    weight_decays: tuple[float, ...] = (0.0, 1e-4, 1e-5)
    batch_size: int = 16

    @staticmethod
    def paper() -> "TrainPlan":
        """The published grid: 75 epochs, Adam, 3 rates x 3 decays."""
        return TrainPlan()

    @staticmethod
    def baseline() -> "TrainPlan":
        """Raw-token runs use a single fixed cell: lr 0.001, no decay."""
        return TrainPlan(learning_rates=(1e-3,), weight_decays=(0.0,))

    @staticmethod
    def fast() -> "TrainPlan":
        """One short cell for tests and smoke runs."""
        return TrainPlan(epochs=10, learning_rates=(1e-3,), weight_decays=(0.0,))

    def cells(self) -> list[tuple[float, float]]:
        return [(lr, wd) for lr in self.learning_rates for wd in self.weight_decays]


def plan_for(spec: ClassifierSpec, plan: TrainPlan | None) -> TrainPlan:
    if plan is not None:
        return plan
    return TrainPlan.baseline() if spec.kind == KIND_BASELINE_IDS else TrainPlan.paper()


def param_hash(model: torch.nn.Module) -> str:
    digest = hashlib.sha256()
    state = model.state_dict()
    for name in sorted(state):
        digest.update(name.encode("utf-8"))
        digest.update(state[name].cpu().contiguous().numpy().tobytes())
    return digest.hexdigest()


@dataclass(slots=True)
class Prepared:
    """Windows turned into model inputs, order-aligned with `y`."""

    kind: str
    inputs: list
    y: list[str]
    labels: tuple[str, ...]

    @property
    def y_idx(self) -> list[int]:
        index = {label: i for i, label in enumerate(self.labels)}
        return [index[label] for label in self.y]


def prepare(windows: list[Window], labels: tuple[str, ...], kind: str,
            encoder=None, vocab: dict[str, int] | None = None,
            features: dict[str, np.ndarray] | None = None) -> Prepared:
    if kind == KIND_BASELINE_IDS:
        if vocab is None:
            raise ValueError("baseline_ids preparation needs a vocabulary")
        inputs = [encode_tokens(w.texts, vocab) for w in windows]
    else:
        if features is not None:
            inputs = [features[w.window_id] for w in windows]
        else:
            if encoder is None:
                raise ValueError("embedding preparation needs an encoder")
            inputs = encode_windows(windows, encoder)
    return Prepared(kind=kind, inputs=inputs, y=[w.label for w in windows],
                    labels=labels)


def _pad(kind: str, inputs: list):
    if kind == KIND_BASELINE_IDS:
        return pad_token_batch(inputs)
    return pad_feature_batch(inputs)


def _make_model(spec: ClassifierSpec, n_classes: int, input_dim: int,
                vocab_size: int) -> torch.nn.Module:
    if spec.kind == KIND_BILSTM:
        return BiLstmClassifier(input_dim, n_classes, hidden=spec.hidden)
    if spec.kind == KIND_CONVBILSTM:
        return ConvBiLstmClassifier(input_dim, n_classes, hidden=spec.hidden)
    return BaselineIdsClassifier(vocab_size, n_classes, hidden=spec.hidden)


def predict(model: torch.nn.Module, prepared: Prepared,
            batch_size: int = 64) -> list[str]:
    model.eval()
    out: list[str] = []
    with torch.no_grad():
        for start in range(0, len(prepared.inputs), batch_size):
            chunk = prepared.inputs[start:start + batch_size]
            x, lengths = _pad(prepared.kind, chunk)
            logits = model(x, lengths)
            for i in logits.argmax(dim=1).tolist():
                out.append(prepared.labels[i])
    return out


@dataclass(slots=True)
class CellResult:
    lr: float
    weight_decay: float
    val_wf1: float
    curves: list[float]
    optimizer_steps: int
    state_blob: bytes


def _cell_seed(seed: int, cell_index: int) -> int:
    return (seed * 1_000_003 + cell_index * 7919 + 17) % (2**31 - 1)


def _run_cell(payload: dict) -> CellResult:
    """Train one grid cell from plain arrays; safe to run in a subprocess."""
    torch.set_num_threads(max(1, torch.get_num_threads()))
    spec = ClassifierSpec(**payload["spec"])
    train = Prepared(**payload["train"])
    val = Prepared(**payload["val"])
    lr, wd = payload["lr"], payload["weight_decay"]
    torch.manual_seed(payload["torch_seed"])
    model = _make_model(spec, len(train.labels), payload["input_dim"],
                        payload["vocab_size"])
    optimizer = torch.optim.Adam(model.parameters(), lr=lr, weight_decay=wd)
    loss_fn = torch.nn.CrossEntropyLoss()
    order_rng = torch.Generator().manual_seed(payload["torch_seed"] + 1)
    y_idx = torch.tensor(train.y_idx, dtype=torch.long)
    curves: list[float] = []
    steps = 0
    batch_size = payload["batch_size"]
    for _ in range(payload["epochs"]):
        model.train()
        order = torch.randperm(len(train.inputs), generator=order_rng).tolist()
        total, seen = 0.0, 0
        for start in range(0, len(order), batch_size):
            idx = order[start:start + batch_size]
            x, lengths = _pad(train.kind, [train.inputs[i] for i in idx])
            logits = model(x, lengths)
            loss = loss_fn(logits, y_idx[idx])
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            steps += 1
            total += float(loss.detach()) * len(idx)
            seen += len(idx)
        curves.append(total / seen)
    val_wf1 = weighted_f1(val.y, predict(model, val), list(val.labels))
    buffer = io.BytesIO()
    torch.save(model.state_dict(), buffer)
    return CellResult(lr=lr, weight_decay=wd, val_wf1=val_wf1, curves=curves,
                      optimizer_steps=steps, state_blob=buffer.getvalue())


@dataclass(slots=True)
class FitResult:
    spec: ClassifierSpec
    labels: tuple[str, ...]
    fold: int
    model: torch.nn.Module
    vocab: dict[str, int] | None
    acc: float
    wf1: float
    val_wf1: float
    chosen_lr: float
    chosen_weight_decay: float
    curves: list[float]
    optimizer_steps: int
    param_digest: str
    input_dim: int

    def summary(self) -> dict:
        return {
            "fold": self.fold,
            "acc": self.acc,
            "wf1": self.wf1,
            "val_wf1": self.val_wf1,
            "lr": self.chosen_lr,
            "weight_decay": self.chosen_weight_decay,
            "optimizer_steps": self.optimizer_steps,
            "params": self.param_digest,
        }


def fit_eval(windows: list[Window], labels: tuple[str, ...],
             spec: ClassifierSpec, plan: TrainPlan | None, fold: int,
             encoder=None, seed: int = 0, workers: int = 1,
             features: dict[str, np.ndarray] | None = None,
             split: FoldSplit | None = None) -> FitResult:
    """Grid-train on the fold's train split, select on val, score on test."""
    if not 0 <= fold < N_FOLDS:
        raise ValueError(f"fold must be 0..{N_FOLDS - 1}")
    plan = plan_for(spec, plan)
    if split is None:
        split = split_fold(windows, fold, labels)
    vocab = None
    if spec.kind == KIND_BASELINE_IDS:
        vocab = build_vocab([w.texts for w in split.train])
    train = prepare(split.train, labels, spec.kind, encoder, vocab, features)
    val = prepare(split.val, labels, spec.kind, encoder, vocab, features)
    test = prepare(split.test, labels, spec.kind, encoder, vocab, features)
    input_dim = 0 if spec.kind == KIND_BASELINE_IDS else train.inputs[0].shape[1]

    payloads = [
        {
            "spec": {"kind": spec.kind, "hidden": spec.hidden},
            "train": {"kind": train.kind, "inputs": train.inputs,
                      "y": train.y, "labels": train.labels},
            "val": {"kind": val.kind, "inputs": val.inputs,
                    "y": val.y, "labels": val.labels},
            "lr": lr,
            "weight_decay": wd,
            "epochs": plan.epochs,
            "batch_size": plan.batch_size,
            "torch_seed": _cell_seed(seed, i),
            "input_dim": input_dim,
            "vocab_size": len(vocab) if vocab else 0,
        }
        for i, (lr, wd) in enumerate(plan.cells())
    ]
    if workers > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(
            max_workers=workers, mp_context=get_context("spawn")
        ) as pool:
            results = list(pool.map(_run_cell, payloads))
    else:
        results = [_run_cell(p) for p in payloads]

    best = max(range(len(results)), key=lambda i: (results[i].val_wf1, -i))
    winner = results[best]
    model = _make_model(spec, len(labels), input_dim,
                        len(vocab) if vocab else 0)
    model.load_state_dict(torch.load(io.BytesIO(winner.state_blob)))
    model.eval()
    predictions = predict(model, test)
    return FitResult(
        spec=spec,
        labels=labels,
        fold=fold,
        model=model,
        vocab=vocab,
        acc=accuracy(test.y, predictions),
        wf1=weighted_f1(test.y, predictions, list(labels)),
        val_wf1=winner.val_wf1,
        chosen_lr=winner.lr,
        chosen_weight_decay=winner.weight_decay,
        curves=winner.curves,
        optimizer_steps=winner.optimizer_steps,
        param_digest=param_hash(model),
        input_dim=input_dim,
    )


def evaluate_frozen(fit: FitResult, target_windows: list[Window],
                    encoder=None,
                    features: dict[str, np.ndarray] | None = None) -> dict:
    """Score the trained model on target windows without any update.

    The parameter digest is recomputed after the forward passes and must
    match the one taken at fit time.
    """
    target_labels = {w.label for w in target_windows}
    if target_labels != set(fit.labels):
        raise DatasetError(
            f"target label set {sorted(target_labels)} differs from the "
            f"model's training labels {sorted(fit.labels)}"
        )
    before = param_hash(fit.model)
    if before != fit.param_digest:
        raise DatasetError("model parameters changed since fit_eval")
    prepared = prepare(target_windows, fit.labels, fit.spec.kind,
                       encoder, fit.vocab, features)
    predictions = predict(fit.model, prepared)
    after = param_hash(fit.model)
    if after != before:
        raise DatasetError("frozen evaluation modified the model parameters")
    return {
        "acc": accuracy(prepared.y, predictions),
        "wf1": weighted_f1(prepared.y, predictions, list(fit.labels)),
        "param_digest_before": before,
        "param_digest_after": after,
        "target_optimizer_steps": 0,
    }


@dataclass(slots=True)
class TransferResult:
    classifier: str
    encoder_name: str
    labels: tuple[str, ...]
    folds: list[dict] = field(default_factory=list)
    fits: list[dict] = field(default_factory=list)
    target_optimizer_steps: int = 0

    def to_json(self) -> str:
        return json.dumps(
            {
                "classifier": self.classifier,
                "encoder": self.encoder_name,
                "labels": list(self.labels),
                "folds": [
                    {"acc": f["acc"], "wf1": f["wf1"]} for f in self.folds
                ],
                "target_optimizer_steps": self.target_optimizer_steps,
                "fits": self.fits,
            },
            indent=2,
            sort_keys=True,
        ) + "\n"


def transfer_run(source_windows: list[Window], target_windows: list[Window],
                 labels: tuple[str, ...], spec: ClassifierSpec,
                 plan: TrainPlan | None, encoder, seed: int = 0,
                 workers: int = 1) -> TransferResult:
    """Train on source per fold, evaluate frozen on the target's fold slice."""
    source = [w for w in source_windows if w.label in set(labels)]
    target = [w for w in target_windows if w.label in set(labels)]
    if not source or not target:
        raise DatasetError("no windows left after restricting to shared labels")
    features = None
    if spec.kind != KIND_BASELINE_IDS:
        features = {
            w.window_id: m
            for group in (source, target)
            for w, m in zip(group, encode_windows(group, encoder))
        }
    result = TransferResult(
        classifier=spec.kind,
        encoder_name="tokens" if spec.kind == KIND_BASELINE_IDS else encoder.name,
        labels=labels,
    )
    for fold in range(N_FOLDS):
        fit = fit_eval(source, labels, spec, plan, fold, encoder=encoder,
                       seed=seed, workers=workers, features=features)
        fold_target = [w for w in target if w.fold == fold]
        if not fold_target:
            raise DatasetError(f"target has no windows in fold {fold}")
        prepared = prepare(fold_target, labels, spec.kind, encoder,
                           fit.vocab, features)
        before = param_hash(fit.model)
        predictions = predict(fit.model, prepared)
        after = param_hash(fit.model)
        if before != after or before != fit.param_digest:
            raise DatasetError("target evaluation modified the model parameters")
        result.folds.append(
            {
                "acc": accuracy(prepared.y, predictions),
                "wf1": weighted_f1(prepared.y, predictions, list(labels)),
                "param_digest": before,
            }
        )
        result.fits.append(fit.summary())
    return result
