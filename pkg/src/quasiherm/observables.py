"""The compatible second observable and the triple-domain membership test."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import numerics
from .errors import ParameterError
from .metric import positivity, residual
from .models import SecondObservableParams, build_second_observable

#: residual bound for Theta to count as Hermitizing both H and Q
DOMAIN_RESIDUAL = 1e-8


@dataclass(frozen=True)
class QConstraintParams:
    alpha_H: float
    beta_m: float
    s: float

    def __post_init__(self):
        half = math.pi / 2
        if not (-half < self.alpha_H < half):
            raise ParameterError(f"alpha_H must lie in (-pi/2, pi/2), got {self.alpha_H}")
        if not (-half < self.beta_m < half):
            raise ParameterError(f"beta_m must lie in (-pi/2, pi/2), got {self.beta_m}")
        if not math.isfinite(self.s):
            raise ParameterError(f"s must be finite, got {self.s}")


def q_offdiagonals(p: QConstraintParams):
    """Off-diagonal pair ``(x, y)`` of Q with ``x + y = s``."""
    a, b, s = p.alpha_H, p.beta_m, p.s
    x = 0.5 * (s + 2.0 * math.sin(a) - s * math.cos(a) * math.cos(b))
    return x, s - x


def q_from_s(p: QConstraintParams) -> np.ndarray:
    """Second observable compatible with the two-level metric at ``(alpha_H, beta_m)``."""
    x, y = q_offdiagonals(p)
    return build_second_observable(SecondObservableParams(x, y))


@dataclass(frozen=True)
class DomainFlags:
    in_DH: bool
    in_DTheta: bool
    in_DQ: bool

    @property
    def in_D(self) -> bool:
        return self.in_DH and self.in_DTheta and self.in_DQ


def observable_spectrum_ok(M) -> bool:
    """Real and nondegenerate spectrum under the shared numerics thresholds."""
    spec = numerics.eig(M)
    return spec.is_real() and not spec.is_degenerate()


def triple_check(H, Q: Optional[np.ndarray], Theta: Optional[np.ndarray]) -> DomainFlags:
    """Membership of one parameter point in D_H, D_Theta and D_Q.

    ``Q=None`` means no second observable is imposed (D_Q holds trivially);
    ``Theta=None`` means no metric is available (D_Theta fails).
    """
    H = numerics.as_matrix(H)
    n = H.shape[0]
    for name, M in (("Q", Q), ("Theta", Theta)):
        if M is not None and np.shape(M) != (n, n):
            raise ParameterError(f"dimension mismatch: H is {H.shape}, {name} is {np.shape(M)}")
    in_DH = observable_spectrum_ok(H)
    in_DQ = True if Q is None else observable_spectrum_ok(Q)
    in_DTheta = False
    if Theta is not None:
        in_DTheta = positivity(Theta).is_pd and residual(H, Theta) <= DOMAIN_RESIDUAL
        if in_DTheta and Q is not None:
            in_DTheta = residual(Q, Theta) <= DOMAIN_RESIDUAL
    return DomainFlags(in_DH, in_DTheta, in_DQ)
