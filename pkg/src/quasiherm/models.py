"""Parameter records and matrix builders for every model family.

All builders validate eagerly and raise :class:`ParameterError`; none of
them lets a NaN through.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from .errors import ParameterError


def _finite(name, value):
    value = float(value)
    if not math.isfinite(value):
        raise ParameterError(f"{name} must be finite, got {value}")
    return value


@dataclass(frozen=True)
class TwoLevelParams:
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "lam", _finite("lambda", self.lam))

    @property
    def alpha_H(self) -> Optional[float]:
        """Hamiltonian angle ``arcsin(lambda)``; ``None`` outside ``|lambda| <= 1``."""
        if abs(self.lam) > 1.0:
            return None
        return math.asin(self.lam)


@dataclass(frozen=True)
class ThreeLevelParams:
    z: float
    g: float

    def __post_init__(self):
        object.__setattr__(self, "z", _finite("z", self.z))
        object.__setattr__(self, "g", _finite("g", self.g))


def _chain_radicands(N, t, G):
    J = N // 2
    base = 1.0 - sum(t**j for j in range(1, J))
    out = []
    for k in range(1, N):
        # up-down symmetry: bond k and bond N-k share the same G
        Gk = G[min(k, N - k) - 1]
        out.append(k * (N - k) * (base - Gk * t**J))
    return out


@dataclass(frozen=True)
class ChainParams:
    """Tridiagonal N-level chain; ``G`` holds ``floor(N/2)`` shape parameters."""

    N: int
    t: float
    G: tuple

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ParameterError(f"chain dimension N must be an integer >= 2, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        t = _finite("t", self.t)
        if t < 0:
            raise ParameterError(f"chain parameter t must be >= 0, got {t}")
        object.__setattr__(self, "t", t)
        G = tuple(_finite(f"G{k + 1}", g) for k, g in enumerate(self.G))
        if len(G) != self.N // 2:
            raise ParameterError(f"chain of dimension {self.N} needs {self.N // 2} G values, got {len(G)}")
        object.__setattr__(self, "G", G)
        for k, r in enumerate(_chain_radicands(self.N, t, G), start=1):
            if r < 0:
                raise ParameterError(f"negative coupling radicand {r:.6g} at bond k={k}")

    def radicands(self):
        return _chain_radicands(self.N, self.t, self.G)


@dataclass(frozen=True)
class NineLevelParams:
    """Raw couplings of the nine-level chain.

    Use :meth:`family` for the one-parameter family with central coupling
    ``beta_env * t``.
    """

    b: float
    c: float
    d: float
    a_c: float

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, _finite(f.name, getattr(self, f.name)))

    @classmethod
    def family(cls, t, beta_env=1.0):
        t = _finite("t", t)
        beta_env = _finite("beta_env", beta_env)
        if t <= -1.0:
            raise ParameterError(f"nine-level family needs t > -1 for real couplings, got {t}")
        return cls(
            b=math.sqrt(3 + 3 * t),
            c=2 * math.sqrt(1 + t),
            d=math.sqrt(3 + 3 * t),
            a_c=beta_env * t,
        )


@dataclass(frozen=True)
class RobinLatticeParams:
    N: int
    lam: float
    mu: Optional[float] = None

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ParameterError(f"lattice dimension N must be an integer >= 2, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "lam", _finite("lambda", self.lam))
        if self.mu is not None:
            if self.N < 4:
                raise ParameterError(f"second-site strength mu needs N >= 4, got N={self.N}")
            object.__setattr__(self, "mu", _finite("mu", self.mu))


@dataclass(frozen=True)
class SecondObservableParams:
    x: float
    y: float

    def __post_init__(self):
        x = _finite("x", self.x)
        y = _finite("y", self.y)
        if not x * y > -1.0:
            raise ParameterError(
                f"second observable needs x*y > -1 for a real simple spectrum, got x*y = {x * y:.6g}"
            )
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


def build_two_level(p: TwoLevelParams) -> np.ndarray:
    lam = p.lam
    return np.array([[-1.0, lam], [-lam, 1.0]])


def build_three_level(p: ThreeLevelParams) -> np.ndarray:
    z, g = p.z, p.g
    return np.array(
        [
            [-1.0, 1.0 + z, 0.0],
            [-1.0 - z, 1.0, g],
            [0.0, -g, 3.0],
        ]
    )


def _signed_tridiagonal(diagonal, couplings):
    H = np.diag(np.asarray(diagonal, dtype=float))
    for k, v in enumerate(couplings):
        H[k, k + 1] = v
        H[k + 1, k] = -v
    return H


def build_chain(p: ChainParams) -> np.ndarray:
    N = p.N
    diagonal = [2 * k - N - 1 for k in range(1, N + 1)]
    return _signed_tridiagonal(diagonal, [math.sqrt(r) for r in p.radicands()])


def build_nine(p: NineLevelParams) -> np.ndarray:
    b, c, d, a = p.b, p.c, p.d, p.a_c
    diagonal = [-8, -6, -4, -2, 0, 2, 4, 6, 8]
    return _signed_tridiagonal(diagonal, [b, c, d, a, a, d, c, b])


def build_discrete_robin(p: RobinLatticeParams) -> np.ndarray:
    """Negative discrete Laplacian plus antisymmetric end-point perturbation.

    The Laplacian part carries no diagonal, only -1 on the two neighbouring
    diagonals. When a mirrored bond coincides with the original one (the
    ``lambda`` bond at N=2, the ``mu`` bond at N=4) the perturbation is
    applied once.
    """
    N = p.N
    H = np.zeros((N, N))
    for k in range(N - 1):
        H[k, k + 1] = H[k + 1, k] = -1.0

    def corner(k, value):
        H[k, k + 1] += value
        H[k + 1, k] -= value

    bonds = {0: -p.lam}
    bonds.setdefault(N - 2, p.lam)
    if p.mu is not None:
        bonds[1] = p.mu
        bonds.setdefault(N - 3, -p.mu)
    for k, value in bonds.items():
        corner(k, value)
    return H


def laplacian_spectrum(N: int) -> np.ndarray:
    """Eigenvalues ``-2 cos(k pi / (N+1))`` of the unperturbed lattice, ascending."""
    k = np.arange(1, N + 1)
    return np.sort(-2.0 * np.cos(k * np.pi / (N + 1)))


def robin_continuum_spectrum(alpha_R: float, L: float, n_max: int) -> list:
    """Energies of the interval with complex Robin end conditions.

    Returns ``[alpha_R**2, (pi/2L)**2, ..., (n_max*pi/2L)**2]``.
    """
    alpha_R = _finite("alpha_R", alpha_R)
    L = _finite("L", L)
    if alpha_R <= 0 or L <= 0:
        raise ParameterError("alpha_R and L must be positive")
    if int(n_max) != n_max or n_max < 0:
        raise ParameterError(f"n_max must be a nonnegative integer, got {n_max}")
    ratio = 2 * L * alpha_R / math.pi
    hit = round(ratio)
    if hit >= 1 and math.isclose(ratio, hit, rel_tol=1e-12, abs_tol=1e-12):
        raise ParameterError(f"excluded resonance: 2*L*alpha_R/pi equals the integer {hit}")
    return [alpha_R**2] + [(n * math.pi / (2 * L)) ** 2 for n in range(1, int(n_max) + 1)]


def build_second_observable(p: SecondObservableParams) -> np.ndarray:
    return np.array([[-1.0, p.x], [p.y, 1.0]])


# -- flat key/value model records -------------------------------------------

FAMILIES = ("two_level", "three_level", "chain", "nine_level", "robin_lattice", "second_observable")

# numeric fields accepted per family, with defaults (None = required)
MODEL_FIELDS = {
    "two_level": {"lambda": None},
    "three_level": {"z": None, "g": None},
    "chain": {"N": None, "t": None, "G": None},
    "nine_level": {"t": None, "beta_env": 1.0, "b": None, "c": None, "d": None, "a_c": None},
    "robin_lattice": {"N": None, "lambda": None, "mu": None},
    "second_observable": {"x": None, "y": None},
}


@dataclass(frozen=True)
class ModelSpec:
    """A family discriminator plus its flat numeric fields.

    ``G`` for chains is a tuple; every other value is a float. The nine-level
    family accepts either ``t`` (with optional ``beta_env``) or the raw
    ``b, c, d, a_c`` quadruple.
    """

    family: str
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in MODEL_FIELDS:
            raise ParameterError(f"unknown model family {self.family!r}; expected one of {', '.join(FAMILIES)}")
        allowed = MODEL_FIELDS[self.family]
        unknown = set(self.values) - set(allowed)
        if unknown:
            raise ParameterError(f"unknown field(s) for {self.family}: {', '.join(sorted(unknown))}")

    def missing(self):
        """Required fields not yet supplied."""
        have = set(self.values)
        if self.family == "nine_level":
            if "t" in have or {"b", "c", "d", "a_c"} <= have:
                return []
            return ["t"]
        if self.family == "robin_lattice":
            return [k for k in ("N", "lambda") if k not in have]
        return [k for k, default in MODEL_FIELDS[self.family].items() if default is None and k not in have]

    def with_values(self, **updates) -> "ModelSpec":
        merged = dict(self.values)
        merged.update(updates)
        return ModelSpec(self.family, merged)

    def params(self):
        missing = self.missing()
        if missing:
            raise ParameterError(f"{self.family} model is missing field(s): {', '.join(missing)}")
        v = self.values
        if self.family == "two_level":
            return TwoLevelParams(v["lambda"])
        if self.family == "three_level":
            return ThreeLevelParams(v["z"], v["g"])
        if self.family == "chain":
            G = v["G"]
            if not isinstance(G, (tuple, list)):
                G = (G,)
            return ChainParams(v["N"], v["t"], tuple(G))
        if self.family == "nine_level":
            if "t" in v:
                return NineLevelParams.family(v["t"], v.get("beta_env", 1.0))
            return NineLevelParams(v["b"], v["c"], v["d"], v["a_c"])
        if self.family == "robin_lattice":
            return RobinLatticeParams(v["N"], v["lambda"], v.get("mu"))
        return SecondObservableParams(v["x"], v["y"])

    def build(self) -> np.ndarray:
        return BUILDERS[self.family](self.params())

    def to_record(self) -> dict:
        rec = {"family": self.family}
        rec.update(self.values)
        return rec

    @classmethod
    def from_record(cls, record: dict) -> "ModelSpec":
        record = dict(record)
        try:
            family = record.pop("family")
        except KeyError:
            raise ParameterError("model record has no 'family' discriminator") from None
        return cls(family, record)


BUILDERS = {
    "two_level": build_two_level,
    "three_level": build_three_level,
    "chain": build_chain,
    "nine_level": build_nine,
    "robin_lattice": build_discrete_robin,
    "second_observable": build_second_observable,
}
