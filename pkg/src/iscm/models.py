"""Trainable networks: visual encoder, dynamics heads, crossmodal head, DDPG.

All networks are plain feed-forward torch modules. The encoder consumes a
stack of three RGB frames (9 channels, 84x84, values already scaled to
[0, 1]) and produces a compact latent; everything downstream operates on
latents only.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn as nn

LATENT_DIM = 50
ACTION_DIM = 2
FRAME_CHANNELS = 9
FRAME_SIZE = 84
HIDDEN_DIM = 256
AUDITORY_DIM = 36

# Four 3x3 conv layers, stride 2 then 1, no padding: 84 -> 41 -> 39 -> 37 -> 35.
CONV_CHANNELS = 32
CONV_OUT_SIZE = 35


def _check_shape(x: torch.Tensor, trailing: tuple[int, ...], what: str) -> None:
    if x.shape[-len(trailing) :] != trailing:
        raise ValueError(f"{what}: expected trailing shape {trailing}, got {tuple(x.shape)}")


class VisualEncoder(nn.Module):
    """Conv stack over the frame stack, projected to a latent vector."""

    def __init__(self, latent_dim: int = LATENT_DIM):
        super().__init__()
        self.latent_dim = latent_dim
        self.convs = nn.Sequential(
            nn.Conv2d(FRAME_CHANNELS, CONV_CHANNELS, 3, stride=2),
            nn.ReLU(),
            nn.Conv2d(CONV_CHANNELS, CONV_CHANNELS, 3, stride=1),
            nn.ReLU(),
            nn.Conv2d(CONV_CHANNELS, CONV_CHANNELS, 3, stride=1),
            nn.ReLU(),
            nn.Conv2d(CONV_CHANNELS, CONV_CHANNELS, 3, stride=1),
            nn.ReLU(),
        )
        self.project = nn.Linear(CONV_CHANNELS * CONV_OUT_SIZE * CONV_OUT_SIZE, latent_dim)

    def forward(self, frames: torch.Tensor) -> torch.Tensor:
        _check_shape(frames, (FRAME_CHANNELS, FRAME_SIZE, FRAME_SIZE), "encoder input")
        squeeze = frames.dim() == 3
        if squeeze:
            frames = frames.unsqueeze(0)
        h = self.convs(frames)
        z = self.project(h.flatten(1))
        return z.squeeze(0) if squeeze else z


def _mlp(in_dim: int, out_dim: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Linear(in_dim, HIDDEN_DIM),
        nn.ReLU(),
        nn.Linear(HIDDEN_DIM, HIDDEN_DIM),
        nn.ReLU(),
        nn.Linear(HIDDEN_DIM, out_dim),
    )


class ForwardModel(nn.Module):
    """Predicts the next latent from (latent, action)."""

    def __init__(self, latent_dim: int = LATENT_DIM, action_dim: int = ACTION_DIM):
        super().__init__()
        self.net = _mlp(latent_dim + action_dim, latent_dim)
        self.latent_dim = latent_dim
        self.action_dim = action_dim

    def forward(self, latent: torch.Tensor, action: torch.Tensor) -> torch.Tensor:
        _check_shape(latent, (self.latent_dim,), "forward-model latent")
        _check_shape(action, (self.action_dim,), "forward-model action")
        return self.net(torch.cat([latent, action], dim=-1))


class InverseModel(nn.Module):
    """Predicts the action that connects two consecutive latents."""

    def __init__(self, latent_dim: int = LATENT_DIM, action_dim: int = ACTION_DIM):
        super().__init__()
        self.net = _mlp(2 * latent_dim, action_dim)
        self.latent_dim = latent_dim

    def forward(self, latent: torch.Tensor, next_latent: torch.Tensor) -> torch.Tensor:
        _check_shape(latent, (self.latent_dim,), "inverse-model latent")
        _check_shape(next_latent, (self.latent_dim,), "inverse-model next latent")
        return self.net(torch.cat([latent, next_latent], dim=-1))


class CrossmodalHead(nn.Module):
    """Predicts the auditory feature from the visual latent.

    In "discriminator" mode the output is a probability in (0, 1) that the
    paired audio contains an impact; in "regressor" mode it is the 36-dim
    frozen-encoder feature.
    """

    def __init__(self, mode: str, latent_dim: int = LATENT_DIM):
        super().__init__()
        if mode not in ("discriminator", "regressor"):
            raise ValueError(f"unknown crossmodal mode {mode!r}")
        self.mode = mode
        out_dim = 1 if mode == "discriminator" else AUDITORY_DIM
        self.net = nn.Sequential(
            nn.Linear(latent_dim, HIDDEN_DIM),
            nn.ReLU(),
            nn.Linear(HIDDEN_DIM, out_dim),
        )
        self.latent_dim = latent_dim

    def forward(self, latent: torch.Tensor) -> torch.Tensor:
        _check_shape(latent, (self.latent_dim,), "crossmodal latent")
        out = self.net(latent)
        if self.mode == "discriminator":
            return torch.sigmoid(out).squeeze(-1)
        return out


class Actor(nn.Module):
    """Deterministic policy; outputs are tanh-squashed into [-1, 1]^2."""

    def __init__(self, latent_dim: int = LATENT_DIM, action_dim: int = ACTION_DIM):
        super().__init__()
        self.net = _mlp(latent_dim, action_dim)
        self.latent_dim = latent_dim

    def forward(self, latent: torch.Tensor) -> torch.Tensor:
        _check_shape(latent, (self.latent_dim,), "actor latent")
        return torch.tanh(self.net(latent))


class Critic(nn.Module):
    """State-action value; latent and action are concatenated at the input."""

    def __init__(self, latent_dim: int = LATENT_DIM, action_dim: int = ACTION_DIM):
        super().__init__()
        self.net = _mlp(latent_dim + action_dim, 1)
        self.latent_dim = latent_dim
        self.action_dim = action_dim

    def forward(self, latent: torch.Tensor, action: torch.Tensor) -> torch.Tensor:
        _check_shape(latent, (self.latent_dim,), "critic latent")
        _check_shape(action, (self.action_dim,), "critic action")
        return self.net(torch.cat([latent, action], dim=-1)).squeeze(-1)


@dataclass
class ModelBundle:
    """Everything trainable, built together under one seed."""

    encoder: VisualEncoder
    forward_model: ForwardModel
    inverse_model: InverseModel
    crossmodal: CrossmodalHead | None
    actor: Actor
    critic: Critic
    latent_dim: int
    crossmodal_mode: str | None

    def named_modules_dict(self) -> dict[str, nn.Module]:
        out = {
            "encoder": self.encoder,
            "forward_model": self.forward_model,
            "inverse_model": self.inverse_model,
            "actor": self.actor,
            "critic": self.critic,
        }
        if self.crossmodal is not None:
            out["crossmodal"] = self.crossmodal
        return out


def build_models(
    seed: int,
    latent_dim: int = LATENT_DIM,
    crossmodal_mode: str | None = "discriminator",
) -> ModelBundle:
    """Construct all networks with initialization fixed by the seed."""
    torch.manual_seed(seed)
    return ModelBundle(
        encoder=VisualEncoder(latent_dim),
        forward_model=ForwardModel(latent_dim),
        inverse_model=InverseModel(latent_dim),
        crossmodal=CrossmodalHead(crossmodal_mode, latent_dim) if crossmodal_mode else None,
        actor=Actor(latent_dim),
        critic=Critic(latent_dim),
        latent_dim=latent_dim,
        crossmodal_mode=crossmodal_mode,
    )


def parameter_count(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())


def parameter_fingerprint(module: nn.Module) -> bytes:
    """Stable byte-level digest of all parameters, for freeze assertions."""
    import hashlib

    digest = hashlib.sha256()
    for name, p in sorted(module.state_dict().items()):
        digest.update(name.encode())
        digest.update(p.detach().cpu().numpy().tobytes())
    return digest.digest()


def save_checkpoint(path, bundle: ModelBundle, manifest: dict) -> None:
    """Single-file archive: every parameter array plus a manifest."""
    payload = {
        "manifest": dict(manifest),
        "arch": {"latent_dim": bundle.latent_dim, "crossmodal_mode": bundle.crossmodal_mode},
        "params": {name: m.state_dict() for name, m in bundle.named_modules_dict().items()},
    }
    torch.save(payload, path)


def load_checkpoint(path) -> tuple[ModelBundle, dict]:
    """Rebuild a ModelBundle bit-exactly from a checkpoint file."""
    payload = torch.load(path, map_location="cpu", weights_only=True)
    arch = payload["arch"]
    bundle = build_models(
        seed=0, latent_dim=arch["latent_dim"], crossmodal_mode=arch["crossmodal_mode"]
    )
    for name, module in bundle.named_modules_dict().items():
        module.load_state_dict(payload["params"][name])
    return bundle, payload["manifest"]
