"""Gradient and invariant self-checks behind `ittt check`."""
from dataclasses import asdict, dataclass
from typing import Callable, List, Optional

import numpy as np

from ..adapt.anchor import ema_update, make_ema_anchor, make_frozen_anchor
from ..adapt.episodes import ttt_loss
from ..config import settings
from ..constants.status import Activation, LossNorm, TaskKind
from ..diffcore import (
    Node,
    ParamStore,
    add,
    add_bias,
    backward,
    concat,
    constant,
    elu,
    finite_diff_check,
    l1,
    matmul,
    mean_rows,
    mse,
    mul,
    norm_loss,
    relu,
    softmax,
    softmax_ce,
    sub,
    sum_all,
    var_rows
)
from ..dualnet.model import DualInputModel, predict_y0
from ..training.losses import composite_loss
from ..utils.logging import get_logger, log_execution_time
from ..utils.seeding import make_rng

logger = get_logger("bench.checks")

EMA_TOLERANCE = 1e-12


@dataclass
class CheckResult:
    name: str
    passed: bool
    max_error: float
    detail: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _store(**arrays: np.ndarray) -> ParamStore:
    params = ParamStore()
    for name, value in arrays.items():
        params.add(name, value)
    return params


def _weighted(node: Node, weights: np.ndarray) -> Node:
    """Scalar Σ w·node; random weights keep every output element in play."""
    return sum_all(mul(node, constant(weights)))


def _away_from_zero(rng: np.random.Generator, shape: tuple) -> np.ndarray:
    return rng.uniform(0.2, 1.0, size=shape) * rng.choice([-1.0, 1.0], size=shape)


def _op_cases(rng: np.random.Generator) -> List[tuple]:
    w34 = rng.standard_normal((3, 4))
    one_hot = np.eye(4)[rng.integers(0, 4, size=3)]
    a = rng.standard_normal((3, 4))

    return [
        ("matmul", _store(a=rng.standard_normal((3, 5)), b=rng.standard_normal((5, 4))),
         lambda p: _weighted(matmul(p.node("a"), p.node("b")), w34)),
        ("add", _store(a=rng.standard_normal((3, 4)), b=rng.standard_normal((3, 4))),
         lambda p: _weighted(add(p.node("a"), p.node("b")), w34)),
        ("sub", _store(a=rng.standard_normal((3, 4)), b=rng.standard_normal((3, 4))),
         lambda p: _weighted(sub(p.node("a"), p.node("b")), w34)),
        ("mul", _store(a=rng.standard_normal((3, 4)), b=rng.standard_normal((3, 4))),
         lambda p: _weighted(mul(p.node("a"), p.node("b")), w34)),
        ("add_bias", _store(a=rng.standard_normal((3, 4)), bias=rng.standard_normal(4)),
         lambda p: _weighted(add_bias(p.node("a"), p.node("bias")), w34)),
        ("relu", _store(a=_away_from_zero(rng, (3, 4))),
         lambda p: _weighted(relu(p.node("a")), w34)),
        ("elu", _store(a=_away_from_zero(rng, (3, 4))),
         lambda p: _weighted(elu(p.node("a")), w34)),
        ("concat", _store(a=rng.standard_normal((3, 1)), b=rng.standard_normal((3, 3))),
         lambda p: _weighted(concat(p.node("a"), p.node("b"), axis=1), w34)),
        ("mse", _store(a=rng.standard_normal((3, 4)), b=rng.standard_normal((3, 4))),
         lambda p: mse(p.node("a"), p.node("b"))),
        ("l1", _store(a=a, b=a + _away_from_zero(rng, (3, 4))),
         lambda p: l1(p.node("a"), p.node("b"))),
        ("softmax_ce", _store(logits=rng.standard_normal((3, 4))),
         lambda p: softmax_ce(p.node("logits"), constant(one_hot))),
        ("softmax", _store(a=rng.standard_normal((3, 4))),
         lambda p: _weighted(softmax(p.node("a")), w34)),
        ("mean_rows", _store(a=rng.standard_normal((5, 4))),
         lambda p: _weighted(mean_rows(p.node("a")), w34[0])),
        ("var_rows", _store(a=rng.standard_normal((5, 4))),
         lambda p: _weighted(var_rows(p.node("a")), w34[0])),
    ]


def _toy_model(seed: int, task: TaskKind = TaskKind.REGRESSION) -> DualInputModel:
    return DualInputModel(3, 2, hidden=[6, 5], activation=Activation.ELU, task=task, seed=seed)


def _gradient_result(
    name: str,
    fn: Callable[[ParamStore], Node],
    params: ParamStore,
    tolerance: float,
    h: float,
    grad_fn: Optional[Callable[[ParamStore], Node]] = None
) -> CheckResult:
    report = finite_diff_check(fn, params, h=h, tol=tolerance, grad_fn=grad_fn)
    detail = f"failed: {', '.join(report.failures)}" if report.failures else ""
    return CheckResult(name=name, passed=report.passed, max_error=report.max_error, detail=detail)


def _model_cases(rng: np.random.Generator, tolerance: float, h: float) -> List[CheckResult]:
    results = []
    x = rng.standard_normal((4, 3))
    y = rng.standard_normal((4, 2))

    model = _toy_model(11)
    results.append(_gradient_result(
        "composite_loss", lambda p: composite_loss(model, x, y), model.params, tolerance, h
    ))

    model = _toy_model(12)
    anchor = make_frozen_anchor(model)
    for entry in model.params:
        entry.tensor += 0.05 * rng.standard_normal(entry.tensor.shape)
    # reduced objective: the anchor's output at the current y0 is a constant
    target = anchor.model.forward(x, model.readout_value(predict_y0(model, x))).value.copy()
    results.append(_gradient_result(
        "ttt_offline",
        lambda p: norm_loss(constant(target), model.forward(x, model.neutral_like(x))),
        model.params,
        tolerance,
        h,
        grad_fn=lambda p: ttt_loss(model, x, anchor.model, LossNorm.L2)[0]
    ))

    model = _toy_model(13)
    results.append(_gradient_result(
        "ttt_naive", lambda p: ttt_loss(model, x, naive=True)[0], model.params, tolerance, h
    ))
    return results


def _snapshot_round_trip(rng: np.random.Generator) -> CheckResult:
    model = _toy_model(21)
    snap = model.params.snapshot()
    for entry in model.params:
        entry.tensor += rng.standard_normal(entry.tensor.shape)
    perturbed = not snap.matches(model.params)
    model.params.restore(snap)
    restored = snap.matches(model.params) and model.params.snapshot().checksum == snap.checksum
    return CheckResult(
        name="snapshot_round_trip",
        passed=perturbed and restored,
        max_error=0.0 if restored else 1.0,
        detail="" if restored else "restore did not reproduce the snapshot bitwise"
    )


def _anchor_zero_gradient(rng: np.random.Generator) -> CheckResult:
    model = _toy_model(31)
    anchor = make_frozen_anchor(model)
    before = anchor.snapshot()
    x = rng.standard_normal((4, 3))

    model.params.zero_grad()
    backward(ttt_loss(model, x, anchor.model)[0])
    anchor_grad = max(float(np.max(np.abs(entry.grad))) for entry in anchor.params)
    model_grad = max(float(np.max(np.abs(entry.grad))) for entry in model.params)
    model.params.zero_grad()

    unchanged = before.matches(anchor.params)
    passed = anchor_grad == 0.0 and model_grad > 0.0 and unchanged
    return CheckResult(
        name="anchor_zero_gradient",
        passed=passed,
        max_error=anchor_grad,
        detail="" if passed else f"anchor grad {anchor_grad:.3g}, model grad {model_grad:.3g}, unchanged={unchanged}"
    )


def _ema_closed_form(rng: np.random.Generator, updates: int = 7, decay: float = 0.9) -> CheckResult:
    model = _toy_model(41)
    anchor = make_ema_anchor(model, decay)
    for entry in anchor.params:
        anchor.params.assign(entry.name, rng.standard_normal(entry.tensor.shape))
    start = anchor.snapshot()

    for _ in range(updates):
        ema_update(anchor, model)

    weight = decay ** updates
    error = max(
        float(np.max(np.abs(entry.tensor - (weight * start.get(entry.name) + (1.0 - weight) * source.tensor))))
        for entry, source in zip(anchor.params, model.params)
    )
    return CheckResult(name="ema_closed_form", passed=error <= EMA_TOLERANCE, max_error=error)


@log_execution_time
def run_self_checks(tolerance: Optional[float] = None, h: Optional[float] = None) -> List[CheckResult]:
    """
    Central-difference checks for every differentiable op and both
    test-time losses, followed by the snapshot, anchor and EMA checks.

    Args:
        tolerance: Maximum relative error; defaults to ITTT_CHECK_TOLERANCE
        h: Finite-difference step; defaults to ITTT_CHECK_STEP

    Returns:
        One CheckResult per check, in a fixed order
    """
    tolerance = settings.check_tolerance if tolerance is None else tolerance
    h = settings.check_step if h is None else h
    rng = make_rng(0, "checks")

    results = [
        _gradient_result(name, fn, params, tolerance, h)
        for name, params, fn in _op_cases(rng)
    ]
    results.extend(_model_cases(rng, tolerance, h))
    results.append(_snapshot_round_trip(rng))
    results.append(_anchor_zero_gradient(rng))
    results.append(_ema_closed_form(rng))

    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.warning(f"Self-checks failed: {', '.join(failed)}")
    else:
        logger.info(f"All {len(results)} self-checks passed")
    return results
