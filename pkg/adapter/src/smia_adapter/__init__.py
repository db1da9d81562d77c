"""Toy white-box audit-feature extractor.

Trains a small feed-forward classifier on synthetic two-moons data and
exports, for every sample of one target class, the gradient of that class's
pre-softmax logit with respect to the last-layer weight row:

    f(x) = d logit_c(x) / d W[c, :]

a vector with one entry per hidden unit. Training samples of the target
class become the member set, held-out samples the non-member set, and an
audit set is composed by mixing the two feature pools at a chosen rate.
The three sets are written in the audit toolkit's feature CSV format
(header ``f0..f{d-1}``, 17-significant-digit decimals), so they feed
directly into ``smia audit``.

The data recipe deliberately includes a slice of flipped training labels:
a small network fits clean two-moons so smoothly that training and held-out
gradients are statistically indistinguishable, whereas flipped points force
it to distort its decision surface around specific training samples, which
is the memorization signature the audit looks for. Even so, the member vs
non-member gradient gap of a toy model is modest; audits on these exports
carry wide confidence intervals.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from torch import nn

__version__ = "0.1.0"

#: Coordinate noise of the two-moons clouds.
MOON_NOISE = 0.05

#: Fraction of training labels flipped to force per-sample memorization.
LABEL_FLIP_FRACTION = 0.15

#: Learning-rate schedule: (rate, fraction of total epochs) phases.
LR_SCHEDULE = ((0.1, 2 / 7), (0.01, 3 / 7), (0.001, 2 / 7))


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite during training."""


@dataclass(frozen=True)
class AdapterConfig:
    """Extraction knobs: network width, training length, data sizes, seed.

    ``train_n`` and ``holdout_n`` are per-class sample counts.
    """

    hidden_width: int = 192
    epochs: int = 7000
    train_n: int = 300
    holdout_n: int = 300
    target_class: int = 0
    seed: int = 42

    def __post_init__(self):
        if self.hidden_width < 1:
            raise ValueError(f"hidden_width must be positive, got {self.hidden_width}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be positive, got {self.epochs}")
        if self.train_n < 10 or self.holdout_n < 10:
            raise ValueError("train_n and holdout_n must both be at least 10")
        if self.target_class not in (0, 1):
            raise ValueError(f"target_class must be 0 or 1, got {self.target_class}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


def two_moons(n_per_class: int, rng: np.random.Generator, noise: float = MOON_NOISE):
    """Two interleaved half circles with Gaussian jitter."""
    t = rng.uniform(0.0, math.pi, size=n_per_class)
    upper = np.column_stack([np.cos(t), np.sin(t)])
    t = rng.uniform(0.0, math.pi, size=n_per_class)
    lower = np.column_stack([1.0 - np.cos(t), 0.5 - np.sin(t)])
    x = np.vstack([upper, lower]) + rng.normal(scale=noise, size=(2 * n_per_class, 2))
    y = np.repeat([0, 1], n_per_class)
    perm = rng.permutation(2 * n_per_class)
    return x[perm], y[perm]


class TinyClassifier(nn.Module):
    def __init__(self, hidden_width: int):
        super().__init__()
        self.hidden = nn.Linear(2, hidden_width)
        self.out = nn.Linear(hidden_width, 2)

    def forward(self, x):
        return self.out(torch.relu(self.hidden(x)))


def _check_loss_finite(loss: torch.Tensor) -> None:
    if not torch.isfinite(loss):
        raise TrainingDivergedError("training loss became non-finite")


def train_model(config: AdapterConfig):
    """Train the classifier; returns (model, train_x, train_y, hold_x, hold_y).

    ``train_y`` carries the observed (partially flipped) labels the model
    was fit to; membership is defined against those.
    """
    rng = np.random.default_rng(config.seed)
    train_x, train_y = two_moons(config.train_n, rng)
    n_flip = round(LABEL_FLIP_FRACTION * train_y.size)
    flip_idx = rng.choice(train_y.size, size=n_flip, replace=False)
    train_y = train_y.copy()
    train_y[flip_idx] = 1 - train_y[flip_idx]
    hold_x, hold_y = two_moons(config.holdout_n, rng)

    torch.manual_seed(config.seed)
    model = TinyClassifier(config.hidden_width)
    loss_fn = nn.CrossEntropyLoss()
    inputs = torch.from_numpy(train_x).float()
    labels = torch.from_numpy(train_y).long()
    for rate, fraction in LR_SCHEDULE:
        optimizer = torch.optim.Adam(model.parameters(), lr=rate)
        for _ in range(round(config.epochs * fraction)):
            optimizer.zero_grad()
            loss = loss_fn(model(inputs), labels)
            _check_loss_finite(loss)
            loss.backward()
            optimizer.step()
    model.eval()
    return model, train_x, train_y, hold_x, hold_y


def gradient_features(model: TinyClassifier, x: np.ndarray, target_class: int) -> np.ndarray:
    """Per-sample gradient of the target-class logit w.r.t. its weight row."""
    rows = []
    for sample in x:
        inp = torch.from_numpy(sample).float().unsqueeze(0)
        logit = model(inp)[0, target_class]
        (grad,) = torch.autograd.grad(logit, model.out.weight)
        rows.append(grad[target_class].detach().numpy().astype(float).copy())
    return np.vstack(rows)


def write_feature_csv(x: np.ndarray, path) -> None:
    """Write the audit toolkit's feature CSV format."""
    lines = [",".join(f"f{j}" for j in range(x.shape[1]))]
    for row in x:
        lines.append(",".join(f"{v:.17g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def mix_feature_rows(
    member: np.ndarray,
    nonmember: np.ndarray,
    alpha: float,
    n: int,
    rng: np.random.Generator,
):
    """Compose an audit matrix: round-half-up non-member count, shuffled."""
    n_from_nonmember = int(math.floor(alpha * n + 0.5))
    n_from_member = n - n_from_nonmember
    parts = []
    if n_from_member:
        parts.append(member[rng.integers(0, member.shape[0], size=n_from_member)])
    if n_from_nonmember:
        parts.append(nonmember[rng.integers(0, nonmember.shape[0], size=n_from_nonmember)])
    mixed = np.vstack(parts)[rng.permutation(n)]
    return mixed, (n_from_member, n_from_nonmember)


def extract_features(config: AdapterConfig, alpha: float, outdir) -> dict:
    """Train, extract gradients, and write member/nonmember/audit CSVs.

    Members are the target-class training samples, non-members the
    target-class held-out samples; the audit set mixes the two feature
    pools at ``alpha`` with as many rows as the non-member set. Returns
    the manifest that is also written to ``truth.json``.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    model, train_x, train_y, hold_x, hold_y = train_model(config)
    with torch.no_grad():
        train_acc = float(
            (model(torch.from_numpy(train_x).float()).argmax(1).numpy() == train_y).mean()
        )
        hold_acc = float(
            (model(torch.from_numpy(hold_x).float()).argmax(1).numpy() == hold_y).mean()
        )
    member_feats = gradient_features(
        model, train_x[train_y == config.target_class], config.target_class
    )
    nonmember_feats = gradient_features(
        model, hold_x[hold_y == config.target_class], config.target_class
    )
    n_audit = nonmember_feats.shape[0]
    rng = np.random.default_rng(config.seed + 1)
    audit_feats, (n_from_member, n_from_nonmember) = mix_feature_rows(
        member_feats, nonmember_feats, alpha, n_audit, rng
    )

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_feature_csv(member_feats, outdir / "member.csv")
    write_feature_csv(nonmember_feats, outdir / "nonmember.csv")
    write_feature_csv(audit_feats, outdir / "audit.csv")
    manifest = {
        "alpha": alpha,
        "n_member": int(member_feats.shape[0]),
        "n_nonmember": int(nonmember_feats.shape[0]),
        "n_audit": int(n_audit),
        "n_from_member": int(n_from_member),
        "n_from_nonmember": int(n_from_nonmember),
        "feature_dim": int(member_feats.shape[1]),
        "train_accuracy": train_acc,
        "holdout_accuracy": hold_acc,
        "hidden_width": config.hidden_width,
        "epochs": config.epochs,
        "train_n": config.train_n,
        "holdout_n": config.holdout_n,
        "target_class": config.target_class,
        "seed": config.seed,
    }
    (outdir / "truth.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest
