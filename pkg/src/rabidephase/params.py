"""Physical parameters of the dephased Rabi model and derived rates.

All quantities are dimensionless with hbar = 1; presets use the cavity
frequency as the unit of frequency.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError


@dataclass(frozen=True)
class ModelParams:
    """Cavity frequency ``omega``, atomic frequency ``Omega``, coupling ``g``
    and the atomic / cavity dephasing rates.

    ``gamma`` (total dephasing) is derived and not accepted as an argument.
    """

    omega: float
    Omega: float
    g: float
    gamma_a: float = 0.0
    gamma_c: float = 0.0
    gamma: float = field(init=False)

    def __post_init__(self):
        for name in ("omega", "Omega", "g", "gamma_a", "gamma_c"):
            value = getattr(self, name)
            if isinstance(value, complex) or not math.isfinite(value):
                raise DomainError(f"{name} must be a finite real number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.omega <= 0 or self.Omega <= 0:
            raise DomainError("omega and Omega must be strictly positive")
        if self.gamma_a < 0 or self.gamma_c < 0:
            raise DomainError("dephasing rates must be non-negative")
        object.__setattr__(self, "gamma", self.gamma_a + self.gamma_c)

    @property
    def denominator(self) -> float:
        """omega**2 + Omega**2 + gamma**2, the scale in the moment formulas."""
        return self.omega**2 + self.Omega**2 + self.gamma**2

    def replace(self, **changes) -> "ModelParams":
        kw = dict(omega=self.omega, Omega=self.Omega, g=self.g,
                  gamma_a=self.gamma_a, gamma_c=self.gamma_c)
        kw.update(changes)
        return ModelParams(**kw)


def new_model_params(omega, Omega, g, gamma_a=0.0, gamma_c=0.0) -> ModelParams:
    return ModelParams(omega, Omega, g, gamma_a, gamma_c)


def _rate(params: ModelParams, detuning: float) -> float:
    num = 2.0 * params.gamma * params.g**2
    if num == 0.0:
        # gamma = 0 with omega = Omega would otherwise be 0/0
        return 0.0
    # hypot keeps tiny gamma from underflowing to a zero denominator
    h = math.hypot(detuning, params.gamma)
    return 2.0 * params.g**2 * (params.gamma / h) / h


def dephasing_rates(params: ModelParams) -> tuple[float, float]:
    """Effective transition rates ``(v1, v2)``.

    ``v1`` belongs to the rotating channel (detuning omega - Omega) and
    ``v2`` to the anti-rotating channel (detuning omega + Omega).
    """
    return (_rate(params, params.omega - params.Omega),
            _rate(params, params.omega + params.Omega))


def f_coefficient(params: ModelParams, n, m):
    """Complex coherence frequency for c_{n,m}.

    Returns ``omega*(m-n) + Omega + 1j*(gamma_a + gamma_c*(n-m)**2)``.
    Broadcasts over array-valued ``n`` and ``m``.
    """
    d = m - n
    return params.omega * d + params.Omega + 1j * (params.gamma_a + params.gamma_c * d * d)
