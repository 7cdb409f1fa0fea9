from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from ..utils.validation import validate_range
from .node import Node, backward
from .params import ParamStore


@dataclass
class GradCheckReport:
    tolerance: float
    errors: Dict[str, float] = field(default_factory=dict)

    @property
    def failures(self) -> List[str]:
        return [name for name, error in self.errors.items() if not error <= self.tolerance]

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def max_error(self) -> float:
        return max(self.errors.values(), default=0.0)


def finite_diff_check(
    fn: Callable[[ParamStore], Node],
    params: ParamStore,
    h: float = 1e-5,
    tol: float = 1e-4,
    floor: float = 1e-4,
    grad_fn: Optional[Callable[[ParamStore], Node]] = None
) -> GradCheckReport:
    """
    Compare analytic gradients with central differences, per parameter.

    The relative error of one element is |a − n| / max(|a|, |n|, floor);
    the floor keeps near-zero gradients from turning round-off into
    huge ratios. Parameter values are restored bitwise afterwards.

    Args:
        fn: Builds a scalar loss node from the current parameter values
        params: Store whose entries are perturbed in place
        h: Central-difference step
        tol: Maximum accepted relative error
        floor: Denominator floor for the relative error
        grad_fn: Loss whose backward supplies the analytic gradient; defaults
            to fn. Lets a stop-gradient objective be checked against the
            finite differences of its reduced form.

    Returns:
        GradCheckReport with the max relative error per parameter
    """
    validate_range(h, "h", min_val=np.finfo(float).tiny)

    params.zero_grad()
    backward((grad_fn or fn)(params))
    analytic = {entry.name: entry.grad.copy() for entry in params}
    params.zero_grad()

    report = GradCheckReport(tolerance=tol)
    for entry in params:
        flat = entry.tensor.reshape(-1)
        numeric = np.empty_like(flat)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + h
            plus = float(fn(params).value)
            flat[i] = original - h
            minus = float(fn(params).value)
            flat[i] = original
            numeric[i] = (plus - minus) / (2.0 * h)

        exact = analytic[entry.name].reshape(-1)
        denominator = np.maximum(np.maximum(np.abs(exact), np.abs(numeric)), floor)
        errors = np.abs(exact - numeric) / denominator
        report.errors[entry.name] = float(errors.max()) if errors.size else 0.0

    params.zero_grad()
    return report
