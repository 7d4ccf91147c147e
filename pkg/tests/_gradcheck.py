"""Central finite-difference gradient checking against autograd.

Comparisons use the combined tolerance |fd - analytic| <= atol + rtol*|analytic|.
The absolute floor absorbs the noise injected when a probe step crosses a
ReLU kink (some preactivation always sits within h of zero in a net with
10^5 units); a wrong gradient formula produces deviations orders of
magnitude above it.
"""

import numpy as np
import torch


def check_parameter_gradients(
    scalar_fn,
    modules,
    rng: np.random.Generator,
    h: float = 1e-5,
    rtol: float = 1e-4,
    atol: float = 1e-5,
    samples_per_module: int = 8,
):
    """Compare autograd parameter gradients with central differences.

    scalar_fn must rebuild its graph on every call and return a scalar
    tensor. All parameters are expected to be float64. For each module a
    random subset of parameter entries is probed.
    """
    params = [p for m in modules for p in m.parameters()]
    for p in params:
        assert p.dtype == torch.float64, "gradient checks require float64 parameters"
        p.grad = None
    scalar_fn().backward()
    analytic = [p.grad.detach().clone() if p.grad is not None else torch.zeros_like(p) for p in params]

    checked = 0
    with torch.no_grad():
        for p, grad in zip(params, analytic):
            flat = p.view(-1)
            n = min(samples_per_module, flat.numel())
            idxs = rng.choice(flat.numel(), size=n, replace=False)
            for idx in idxs:
                original = flat[idx].item()
                flat[idx] = original + h
                up = scalar_fn().item()
                flat[idx] = original - h
                down = scalar_fn().item()
                flat[idx] = original
                fd = (up - down) / (2.0 * h)
                an = grad.view(-1)[idx].item()
                assert abs(fd - an) <= atol + rtol * abs(an), (
                    f"gradient mismatch: fd={fd} an={an} diff={abs(fd - an)}"
                )
                checked += 1
    assert checked > 0


def check_input_gradient(scalar_fn, inputs, h=1e-5, rtol=1e-4, atol=1e-5, n_samples=10, rng=None):
    """Same check, but with respect to input tensors rather than parameters."""
    rng = rng or np.random.default_rng(0)
    for x in inputs:
        x.grad = None
    scalar_fn().backward()
    for x in inputs:
        grad = x.grad.detach().clone()
        flat = x.data.view(-1)
        idxs = rng.choice(flat.numel(), size=min(n_samples, flat.numel()), replace=False)
        with torch.no_grad():
            for idx in idxs:
                original = flat[idx].item()
                flat[idx] = original + h
                up = scalar_fn().item()
                flat[idx] = original - h
                down = scalar_fn().item()
                flat[idx] = original
                fd = (up - down) / (2.0 * h)
                an = grad.view(-1)[idx].item()
                assert abs(fd - an) <= atol + rtol * abs(an)
