"""Losses and intrinsic rewards for curiosity-driven exploration.

The dynamics losses (forward and inverse prediction) train the encoder to
capture controllable structure; the crossmodal loss additionally trains it
to predict what the scene sounds like. Per-sample losses double as the
exploration signal: the intrinsic reward is a log-compressed mixture of the
crossmodal and dynamics prediction errors, so the agent is drawn toward
transitions its models cannot yet explain.

All functions accept a single sample (trailing feature dim only) or a
batch (leading batch dim); losses are per-sample, objectives are batch
means.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch

from .errors import ConfigurationError

PROBABILITY_CLAMP = 1e-6


@dataclass(frozen=True)
class CuriosityConfig:
    omega: float = 100.0  # positive-class weight in the discrimination loss
    alpha: float = 0.2  # crossmodal share of the encoder objective
    beta: float = 0.5  # forward share of the dynamics loss
    lam: float = 0.8  # crossmodal share of the intrinsic reward
    epsilon: float = 1.0  # log offset in the intrinsic reward
    horizon: int = 1  # forward prediction distance, in control steps
    mode: str = "discriminator"

    def __post_init__(self):
        for name in ("alpha", "beta", "lam"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigurationError(f"{name} must be in [0, 1], got {v}")
        if self.omega <= 0:
            raise ConfigurationError("omega must be > 0")
        if self.epsilon <= 0:
            raise ConfigurationError("epsilon must be > 0")
        if self.horizon < 1:
            raise ConfigurationError("horizon must be >= 1")
        if self.mode not in ("discriminator", "regressor"):
            raise ConfigurationError(f"mode must be discriminator or regressor, got {self.mode!r}")


@dataclass(frozen=True)
class LossBreakdown:
    """Scalar loss summary for one batch."""

    forward: float
    inverse: float
    dynamics: float
    crossmodal: float | None

    @classmethod
    def build(cls, forward: float, inverse: float, beta: float, crossmodal: float | None):
        return cls(
            forward=forward,
            inverse=inverse,
            dynamics=beta * forward + (1.0 - beta) * inverse,
            crossmodal=crossmodal,
        )


@dataclass(frozen=True)
class IntrinsicReward:
    r_c: torch.Tensor
    r_d: torch.Tensor
    total: torch.Tensor


def _as_tensor(x) -> torch.Tensor:
    if isinstance(x, torch.Tensor):
        return x
    return torch.as_tensor(x, dtype=torch.float64)


def _squared_error(pred, target, what: str) -> torch.Tensor:
    pred, target = _as_tensor(pred), _as_tensor(target)
    if pred.shape != target.shape:
        raise ValueError(f"{what}: shape mismatch {tuple(pred.shape)} vs {tuple(target.shape)}")
    return ((pred - target) ** 2).sum(dim=-1)


def forward_loss(pred_latent, target_latent) -> torch.Tensor:
    """Squared Euclidean distance between predicted and observed latents."""
    return _squared_error(pred_latent, target_latent, "forward_loss")


def inverse_loss(pred_action, true_action) -> torch.Tensor:
    """Squared Euclidean distance between predicted and taken actions."""
    return _squared_error(pred_action, true_action, "inverse_loss")


def crossmodal_regression_loss(pred_feature, target_feature) -> torch.Tensor:
    """Unweighted squared error against the frozen auditory feature."""
    return _squared_error(pred_feature, target_feature, "crossmodal_regression_loss")


def crossmodal_discrimination_loss(pred_prob, label, omega: float) -> torch.Tensor:
    """Cross entropy against the silence/event label, positives scaled by omega.

    Impacts are rare in pushing scenes, so without the positive-class weight
    the head would collapse to predicting silence everywhere.
    """
    p, y = _as_tensor(pred_prob), _as_tensor(label)
    if p.shape != y.shape:
        raise ValueError(f"discrimination loss: shape mismatch {p.shape} vs {y.shape}")
    if bool((p <= 0).any()) or bool((p >= 1).any()):
        raise ValueError("predicted probability must lie strictly inside (0, 1)")
    return -omega * y * torch.log(p) - (1.0 - y) * torch.log(1.0 - p)


def clamp_probability(p: torch.Tensor, eps: float = PROBABILITY_CLAMP) -> torch.Tensor:
    """Squash predictions into the open interval the loss is defined on."""
    return p.clamp(eps, 1.0 - eps)


def dynamics_loss(forward, inverse, beta: float) -> torch.Tensor:
    """Convex mix of forward and inverse prediction errors."""
    if not 0.0 <= beta <= 1.0:
        raise ConfigurationError(f"beta must be in [0, 1], got {beta}")
    return beta * _as_tensor(forward) + (1.0 - beta) * _as_tensor(inverse)


def _require_batch(losses: torch.Tensor, what: str) -> torch.Tensor:
    losses = _as_tensor(losses)
    if losses.numel() == 0:
        raise ValueError(f"{what}: empty batch")
    return losses


def icm_objective(dynamics_losses) -> torch.Tensor:
    """Vision-only encoder objective: mean per-sample dynamics loss."""
    return _require_batch(dynamics_losses, "icm_objective").mean()


def iscm_objective(dynamics_losses, crossmodal_losses, alpha: float) -> torch.Tensor:
    """Sound-augmented encoder objective: (1 - alpha) dynamics + alpha crossmodal."""
    if not 0.0 <= alpha <= 1.0:
        raise ConfigurationError(f"alpha must be in [0, 1], got {alpha}")
    d = _require_batch(dynamics_losses, "iscm_objective")
    c = _require_batch(crossmodal_losses, "iscm_objective")
    if d.shape != c.shape:
        raise ValueError(f"iscm_objective: shape mismatch {d.shape} vs {c.shape}")
    return ((1.0 - alpha) * d + alpha * c).mean()


def intrinsic_reward(crossmodal_losses, dynamics_losses, lam: float, epsilon: float) -> IntrinsicReward:
    """Log-compressed mixture of the two prediction errors.

    Computed per sample from current models; no gradient flows back (the
    reward is a training signal for the policy, not for the models).
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    if not 0.0 <= lam <= 1.0:
        raise ConfigurationError(f"lam must be in [0, 1], got {lam}")
    l_c = _as_tensor(crossmodal_losses).detach()
    l_d = _as_tensor(dynamics_losses).detach()
    if bool((l_c < 0).any()) or bool((l_d < 0).any()):
        raise ValueError("losses must be non-negative")
    r_c = torch.log(l_c + epsilon)
    r_d = torch.log(l_d + epsilon)
    return IntrinsicReward(r_c=r_c, r_d=r_d, total=lam * r_c + (1.0 - lam) * r_d)
