from __future__ import annotations

import logging
from typing import Callable, Mapping, Optional, Tuple

import numpy as np

from capteamcli.tensorcore.rng import RngStream
from capteamcli.tensorcore.tensor import GradientError, Tape, Tensor

logger = logging.getLogger(__name__)

LossFn = Callable[[Tape, Mapping[str, Tensor]], Tensor]
KINK_RETRY_THRESHOLD = 1e-6
KINK_RETRY_FACTOR = 100.0
# One-sided slopes this far apart (relative) mean a kink lies inside [x - h, x + h].
KINK_SLOPE_GAP = 1e-2


def finite_diff_check(
    loss_fn: LossFn,
    params: Mapping[str, Tensor],
    step: float = 1e-5,
    elements_per_param: Optional[int] = None,
    rng: Optional[RngStream] = None,
) -> float:
    """Compare tape gradients against central finite differences.

    ``loss_fn(tape, params)`` must build a scalar loss on ``tape`` from the
    given parameters. The numeric side never touches the tape's backward, only
    forward values. Returns the maximum over the probed parameter elements of
    ``|analytic - numeric| / max(|analytic|, |numeric|, 1e-8)``.

    An element that fails at ``step`` is re-estimated with a step
    ``KINK_RETRY_FACTOR`` times finer only when its forward and backward
    slopes disagree, which is how a ReLU kink inside the stencil shows up.
    Elsewhere the first estimate stands.

    With ``elements_per_param`` set, only that many elements of each parameter
    are probed, chosen from ``rng``; otherwise every element is.
    """
    if step <= 0:
        raise ValueError(f"finite-difference step must be positive, got {step}")
    params = dict(params)
    dtype = next(iter(params.values())).dtype if params else np.float64

    def evaluate(values: Mapping[str, Tensor]) -> float:
        tape = Tape(dtype)
        value = float(loss_fn(tape, values).data)
        if not np.isfinite(value):
            raise GradientError(f"loss is not finite: {value}")
        return value

    tape = Tape(dtype)
    live = {
        name: Tensor(p.data, name=name, requires_grad=True)
        for name, p in params.items()
    }
    loss = loss_fn(tape, live)
    if not np.isfinite(float(loss.data)):
        raise GradientError(f"loss is not finite: {float(loss.data)}")
    tape.backward(loss)
    center = evaluate({name: _as_param(p.data, p) for name, p in live.items()})

    worst = 0.0
    for name, param in live.items():
        analytic = (
            param.grad if param.grad is not None else np.zeros_like(param.data)
        ).reshape(-1)
        base = np.array(param.data, dtype=np.float64).reshape(-1)
        probes = np.arange(base.size)
        if elements_per_param is not None and elements_per_param < base.size:
            if rng is None:
                raise ValueError("elements_per_param needs an rng stream")
            probes = np.sort(
                rng.generator.choice(base.size, elements_per_param, replace=False)
            )
        for k in probes:

            def stencil(h: float, k: int = k) -> Tuple[float, float]:
                probe = base.copy()
                probe[k] = base[k] + h
                plus = evaluate({**live, name: _as_param(probe, param)})
                probe[k] = base[k] - h
                minus = evaluate({**live, name: _as_param(probe, param)})
                return plus, minus

            a = float(analytic[k])
            plus, minus = stencil(step)
            numeric = (plus - minus) / (2 * step)
            error = _relative_error(a, numeric)
            if error > KINK_RETRY_THRESHOLD and _straddles_kink(
                plus, center, minus, step
            ):
                fine_step = step / KINK_RETRY_FACTOR
                fine_plus, fine_minus = stencil(fine_step)
                fine = (fine_plus - fine_minus) / (2 * fine_step)
                fine_error = _relative_error(a, fine)
                logger.debug(
                    "gradcheck %s[%d]: kink in stencil, error %g at h=%g, %g at h=%g",
                    name,
                    k,
                    error,
                    step,
                    fine_error,
                    fine_step,
                )
                if fine_error < error:
                    numeric, error = fine, fine_error
            if error > worst:
                worst = error
                logger.debug("gradcheck %s[%d]: analytic=%g numeric=%g", name, k, a, numeric)
    return worst


def _as_param(flat: np.ndarray, like: Tensor) -> Tensor:
    return Tensor(flat.reshape(like.shape), dtype=like.dtype, name=like.name)


def _straddles_kink(plus: float, center: float, minus: float, h: float) -> bool:
    forward = (plus - center) / h
    backward = (center - minus) / h
    return _relative_error(forward, backward) > KINK_SLOPE_GAP


def _relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)
