from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from capteamcli.tensorcore.tensor import GradientError, Tensor

DEFAULT_LR = 0.0005


@dataclass(frozen=True)
class AdamState:
    first_moment: Dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: Dict[str, np.ndarray] = field(default_factory=dict)
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_params(
        cls,
        params: Mapping[str, Tensor],
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
    ) -> "AdamState":
        return cls(
            first_moment={k: np.zeros_like(p.data) for k, p in params.items()},
            second_moment={k: np.zeros_like(p.data) for k, p in params.items()},
            beta1=beta1,
            beta2=beta2,
            epsilon=epsilon,
        )


def adam_step(
    params: Mapping[str, Tensor],
    grads: Mapping[str, Optional[np.ndarray]],
    state: AdamState,
    lr: float = DEFAULT_LR,
) -> Tuple[Dict[str, Tensor], AdamState]:
    """One bias-corrected Adam update.

    Parameters without a gradient entry are treated as having zero gradient.
    Returns fresh parameter tensors; the inputs are left untouched.
    """
    if lr <= 0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    for name, grad in grads.items():
        if grad is not None and not np.all(np.isfinite(grad)):
            raise GradientError(f"non-finite gradient for parameter {name!r}")

    step = state.step_count + 1
    b1, b2 = state.beta1, state.beta2
    first: Dict[str, np.ndarray] = {}
    second: Dict[str, np.ndarray] = {}
    updated: Dict[str, Tensor] = {}
    for name, param in params.items():
        grad = grads.get(name)
        if grad is None:
            grad = np.zeros_like(param.data)
        if grad.shape != param.shape:
            raise GradientError(
                f"gradient shape {grad.shape} does not match parameter {name!r} {param.shape}"
            )
        m = state.first_moment.get(name, np.zeros_like(param.data))
        v = state.second_moment.get(name, np.zeros_like(param.data))
        m = b1 * m + (1 - b1) * grad
        v = b2 * v + (1 - b2) * grad * grad
        m_hat = m / (1 - b1**step)
        v_hat = v / (1 - b2**step)
        value = param.data - lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
        first[name] = m.astype(param.dtype)
        second[name] = v.astype(param.dtype)
        updated[name] = Tensor(
            value.astype(param.dtype), name=name, requires_grad=param.requires_grad
        )
    new_state = AdamState(
        first_moment=first,
        second_moment=second,
        step_count=step,
        beta1=b1,
        beta2=b2,
        epsilon=state.epsilon,
    )
    return updated, new_state
