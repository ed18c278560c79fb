"""Spectral classification, boundary polynomials, zero-line tracing and
parameter scans.

The nine-level model is analysed through the integer ``reality_count``
along the coupling path ``a_c = beta_env * t``; the degree-9 discriminant is
not used there because its sign does not isolate a single pair.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import numerics
from .errors import NotFoundError, ParameterError, QuasiHermError, SpectrumError
from .metric import metric_basis, positivity, three_level_metric, two_level_metric
from .models import MODEL_FIELDS, ModelSpec, NineLevelParams, build_nine
from .numerics import PolyCoeffs, Spectrum
from .observables import DomainFlags, QConstraintParams, q_from_s, triple_check

DEFAULT_RESOLUTION = 201
BISECTION_DEPTH = 60


# -- spectra ----------------------------------------------------------------

@dataclass(frozen=True)
class SpectrumClass:
    kind: str  # "real_nondegenerate" | "degenerate" | "complex"
    real_count: int
    min_gap: float
    max_abs_imag: float


def classify_spectrum(s: Spectrum) -> SpectrumClass:
    """Degeneracy is checked first: a numerically split exceptional point
    shows up as a tiny complex pair and must still read as degenerate."""
    if s.is_degenerate():
        kind = "degenerate"
    elif not s.is_real():
        kind = "complex"
    else:
        kind = "real_nondegenerate"
    return SpectrumClass(kind, s.real_count(), s.min_pair_gap, s.max_abs_imag)


def reality_count(H) -> int:
    """Number of eigenvalues of ``H`` whose imaginary part is below threshold."""
    return numerics.eig(numerics.as_matrix(H, require_real=True)).real_count()


# -- three-level boundary polynomial ----------------------------------------

def evaluate_G(z, g, truncated=False):
    """Boundary polynomial of the three-level model (works on arrays).

    Its zero line bounds the region of real spectrum; ``truncated`` selects
    the low-order approximation valid near the origin.
    """
    z = np.asarray(z, dtype=float)
    g = np.asarray(g, dtype=float)
    g2 = g * g
    g4 = g2 * g2
    g6 = g4 * g2
    G0 = 27 * g2 - 162 * z - 18 * g4 + 144 * z * g2 - g6 - 153 * z**2 - 6 * z * g4
    if truncated:
        return G0
    return (
        G0
        + 60 * g2 * z**2
        - 12 * g2 * z**3
        - z**6
        - 3 * g4 * z**2
        - 3 * g2 * z**4
        - 6 * z**5
        - 30 * z**4
        - 80 * z**3
    )


def G_scale(z, g):
    """Sum of absolute monomial values of the full polynomial at ``(z, g)``."""
    za = np.abs(np.asarray(z, dtype=float))
    ga = np.abs(np.asarray(g, dtype=float))
    g2, g4 = ga**2, ga**4
    return (
        60 * g2 * za**2 + 6 * za * g4 + 12 * g2 * za**3 + za**6 + 162 * za + 27 * g2
        + 18 * g4 + ga**6 + 153 * za**2 + 3 * g4 * za**2 + 3 * g2 * za**4
        + 6 * za**5 + 30 * za**4 + 80 * za**3 + 144 * za * g2
    )


# -- zero-line tracing --------------------------------------------------------

@dataclass(frozen=True)
class BoundaryTrace:
    points: list  # tuples of parameter values, one per zero crossing
    field_name: str
    values: list  # field value at each point
    scales: list  # local scale the tolerance was measured against
    rtol: float = 1e-9

    def __len__(self):
        return len(self.points)

    def is_within_tolerance(self) -> bool:
        return all(abs(v) <= self.rtol * s for v, s in zip(self.values, self.scales))


def bisect_sign_change(f: Callable[[float], float], lo, hi, flo=None, fhi=None,
                       rtol=1e-9, depth=BISECTION_DEPTH):
    """Refine a bracketed sign change of ``f`` on ``[lo, hi]``.

    Stops when ``|f| <= rtol * max(|f(lo)|, |f(hi)|)``. Returns
    ``(x, f(x), scale)`` for the best point seen.
    """
    flo = f(lo) if flo is None else flo
    fhi = f(hi) if fhi is None else fhi
    scale = max(abs(flo), abs(fhi))
    best = (lo, flo) if abs(flo) <= abs(fhi) else (hi, fhi)
    for _ in range(depth):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) < abs(best[1]):
            best = (mid, fm)
        if abs(fm) <= rtol * scale or mid in (lo, hi):
            break
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return best[0], best[1], scale


def _scan_line(f1, xs, rtol):
    """Zero crossings of a 1-D function sampled on ``xs``."""
    try:
        fx = np.asarray(f1(xs), dtype=float)
        if fx.shape != xs.shape:
            raise ValueError
    except (TypeError, ValueError):
        fx = np.array([float(f1(x)) for x in xs])
    found = []
    for i in range(len(xs)):
        if fx[i] == 0.0:
            scale = max(abs(fx[max(i - 1, 0)]), abs(fx[min(i + 1, len(xs) - 1)]))
            found.append((float(xs[i]), 0.0, scale))
        elif i + 1 < len(xs) and fx[i + 1] != 0.0 and (fx[i] < 0) != (fx[i + 1] < 0):
            x, v, scale = bisect_sign_change(
                lambda u: float(f1(u)), float(xs[i]), float(xs[i + 1]), fx[i], fx[i + 1], rtol=rtol
            )
            if abs(v) <= rtol * scale:
                found.append((float(x), float(v), scale))
    return found


def trace_zero_line(field: Callable, window, resolution=DEFAULT_RESOLUTION,
                    field_name="field", rtol=1e-9) -> BoundaryTrace:
    """Locate the zero set of a scalar field by scanlines and bisection.

    ``window`` is one ``(lo, hi)`` range for a function of one variable or
    two ranges for a function of two variables. In 2-D every row (fixed
    second parameter) is scanned along the first axis, then every column
    along the second axis. Crossings whose refined value does not reach the
    tolerance (poles, jumps) are dropped; no crossing gives an empty trace.
    """
    window = [tuple(map(float, r)) for r in np.atleast_2d(np.asarray(window, dtype=float))]
    if len(window) not in (1, 2):
        raise ParameterError("window must contain one or two ranges")
    axes = [np.linspace(lo, hi, resolution) for lo, hi in window]
    points, values, scales = [], [], []
    if len(window) == 1:
        for x, v, s in _scan_line(field, axes[0], rtol):
            points.append((x,))
            values.append(v)
            scales.append(s)
    else:
        xs, ys = axes
        for y in ys:
            for x, v, s in _scan_line(lambda x: field(x, y), xs, rtol):
                points.append((x, float(y)))
                values.append(v)
                scales.append(s)
        for x in xs:
            for y, v, s in _scan_line(lambda y: field(x, y), ys, rtol):
                points.append((float(x), y))
                values.append(v)
                scales.append(s)
    return BoundaryTrace(points, field_name, values, scales, rtol)


# -- nine-level secular equation ---------------------------------------------

# ascending-in-t coefficient lists of z^3, z^2, z^1, z^0 at beta_env = 1
_SECULAR_T_COEFFS = (
    (-100, 20, 2),
    (3750, -500, -80, 34),
    (-62500, -12500, 4810, -360, 158),
    (390625, 312500, -23500, -22450, -3221, 126),
)


def _horner(coeffs, t):
    acc = 0
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def secular_quartic(t) -> PolyCoeffs:
    """Quartic in ``z = E**2`` whose roots are the squared nonzero energies
    of the nine-level family at ``beta_env = 1``.

    Integer arithmetic is preserved for integer ``t``, so ``t = 0`` gives
    exactly ``(z - 25)**4``.
    """
    z3, z2, z1, z0 = (_horner(c, t) for c in _SECULAR_T_COEFFS)
    return PolyCoeffs((z0, z1, z2, z3, 1))


def nine_quartic(t, beta_env=1.0) -> PolyCoeffs:
    """Secular quartic for any ``beta_env`` from the numerical characteristic
    polynomial ``E * q(E**2)`` of the nine-level matrix."""
    p = numerics.char_poly(build_nine(NineLevelParams.family(t, beta_env)))
    odd = p.coeffs[1::2]  # coefficients of E^1, E^3, ..., E^9
    return PolyCoeffs(tuple(odd[:-1]) + (1.0,))


def secular_roots(t, beta_env=1.0) -> np.ndarray:
    if beta_env == 1.0:
        return secular_quartic(t).roots()
    return nine_quartic(t, beta_env).roots()


def real_roots(roots, rtol=1e-9):
    roots = np.asarray(roots)
    scale = max(1.0, float(np.abs(roots).max())) if roots.size else 1.0
    return np.sort(roots[np.abs(roots.imag) <= rtol * scale].real)


# -- exceptional-point events along t -----------------------------------------

class Transition(NamedTuple):
    t: float
    count_before: int
    count_after: int

    @property
    def is_drop(self) -> bool:
        return self.count_after < self.count_before


def nine_reality_count(t, beta_env) -> int:
    return reality_count(build_nine(NineLevelParams.family(t, beta_env)))


def ep_events(beta_env, window=(-0.05, 0.05), resolution=DEFAULT_RESOLUTION, tol=1e-6):
    """Changes of the real-eigenvalue count along ``t`` for fixed ``beta_env``.

    A single grid node whose count differs from two equal neighbours is an
    isolated exceptional point (eigenvalues touch without changing reality)
    and is not reported.
    """
    lo, hi = map(float, window)
    if not (lo < hi) or lo <= -1.0:
        raise ParameterError(f"t window must be an increasing interval above -1, got {window}")
    ts = np.linspace(lo, hi, resolution)
    counts = [nine_reality_count(t, beta_env) for t in ts]
    keep = list(range(resolution))
    for i in range(1, resolution - 1):
        if counts[i - 1] == counts[i + 1] != counts[i]:
            keep.remove(i)
    events = []
    for i, j in zip(keep, keep[1:]):
        if counts[i] == counts[j]:
            continue
        a, b = float(ts[i]), float(ts[j])
        ca = counts[i]
        while b - a > tol:
            mid = 0.5 * (a + b)
            if nine_reality_count(mid, beta_env) == ca:
                a = mid
            else:
                b = mid
        events.append(Transition(0.5 * (a + b), counts[i], counts[j]))
    return events


def t_crit(beta_env, window=(-0.05, 0.05), resolution=DEFAULT_RESOLUTION, tol=1e-6) -> float:
    """Largest ``t`` in ``window`` where the real-eigenvalue count drops."""
    drops = [e.t for e in ep_events(beta_env, window, resolution, tol) if e.is_drop]
    if not drops:
        raise NotFoundError(f"no complexification in t window {tuple(window)} at beta_env={beta_env}")
    return max(drops)


FUSION_WINDOW = (-0.2, 0.2)
FUSION_RESOLUTION = 401


def fusion_offset(beta_env, window=FUSION_WINDOW, resolution=FUSION_RESOLUTION, tol=1e-6) -> float:
    """Signed distance of the collapse-breaking event from ``t = 0``.

    Negative: ``t_crit`` has left the origin (the degeneracy has decoupled).
    Positive: the collapse still sits at the origin; the value is the first
    positive de-complexification instant, or ``inf`` if none is in ``window``.
    """
    zero_tol = 10 * tol
    events = ep_events(beta_env, window, resolution, tol)
    drops = [e.t for e in events if e.is_drop]
    if drops and max(drops) < -zero_tol:
        return max(drops)
    rises = [e.t for e in events if not e.is_drop and e.t > zero_tol]
    return min(rises) if rises else math.inf


def beta_critical(bracket=(2.6, 2.9), tol=1e-3, window=FUSION_WINDOW,
                  resolution=FUSION_RESOLUTION) -> float:
    """Coupling at which the two exceptional-point instants fuse at ``t = 0``."""
    lo, hi = map(float, bracket)
    f_lo = fusion_offset(lo, window, resolution)
    f_hi = fusion_offset(hi, window, resolution)
    if (f_lo < 0) == (f_hi < 0):
        raise NotFoundError(f"bracket {tuple(bracket)} does not contain the fusion point")
    neg_lo = f_lo < 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if (fusion_offset(mid, window, resolution) < 0) == neg_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- grid scans ---------------------------------------------------------------

METRIC_RULES = ("closed-form", "fixed-weights")
# parameters consumed by the metric / observable rather than the Hamiltonian
EXTRA_FIELDS = {"beta_m": math.pi / 4, "s": 0.0, "a": 1.0, "f": 1.0, "m": 1.0}


class Axis(NamedTuple):
    name: str
    lo: float
    hi: float
    n: int

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n)


@dataclass(frozen=True)
class ScanCell:
    p1: float
    p2: float
    flags: DomainFlags
    spectrum_class: Optional[SpectrumClass]
    min_theta_eig: float
    valid: bool = True

    @property
    def real_count(self) -> int:
        return self.spectrum_class.real_count if self.spectrum_class else -1


@dataclass(frozen=True)
class DomainScanResult:
    axes: tuple
    cells: tuple  # row-major: index = i1 * n2 + i2

    def cell(self, i1, i2) -> ScanCell:
        return self.cells[i1 * self.axes[1].n + i2]

    def flag_grid(self, name) -> np.ndarray:
        n1, n2 = self.axes[0].n, self.axes[1].n
        return np.array([getattr(c.flags, name) for c in self.cells]).reshape(n1, n2)


_INVALID = DomainFlags(False, False, False)


def _metric_and_observable(spec: ModelSpec, H, extras, rule, weights):
    family = spec.family
    Theta = Q = None
    if family == "two_level":
        lam = spec.values["lambda"]
        alpha = math.asin(lam) if abs(lam) < 1.0 else None
        if alpha is not None:
            if rule == "closed-form":
                try:
                    Theta = two_level_metric(alpha, extras["beta_m"])
                except ParameterError:
                    Theta = None
            try:
                Q = q_from_s(QConstraintParams(alpha, extras["beta_m"], extras["s"]))
            except ParameterError:
                Q = None
        else:
            Q = np.full((2, 2), np.nan)  # no compatible observable outside D_H
    elif family == "three_level" and rule == "closed-form":
        v = spec.values
        Theta = three_level_metric(v["z"], v["g"], extras["a"], extras["f"], extras["m"])
    if rule == "fixed-weights":
        try:
            Theta = metric_basis(H).assemble(weights)
        except (SpectrumError, ParameterError):
            Theta = None
    return Theta, Q


def _evaluate_cell(template, axes, extras, rule, weights, v1, v2) -> ScanCell:
    values = {}
    ex = dict(extras)
    for axis, v in zip(axes, (v1, v2)):
        if axis.name in MODEL_FIELDS[template.family]:
            values[axis.name] = float(v)
        else:
            ex[axis.name] = float(v)
    try:
        spec = template.with_values(**values)
        H = spec.build()
        spec_class = classify_spectrum(numerics.eig(H))
        Theta, Q = _metric_and_observable(spec, H, ex, rule, weights)
    except QuasiHermError:
        return ScanCell(float(v1), float(v2), _INVALID, None, math.nan, valid=False)
    q_missing = Q is not None and not np.all(np.isfinite(Q))
    flags = triple_check(H, None if q_missing else Q, Theta)
    if q_missing:
        flags = DomainFlags(flags.in_DH, flags.in_DTheta, False)
    min_eig = positivity(Theta).min_eigenvalue if Theta is not None else math.nan
    return ScanCell(float(v1), float(v2), flags, spec_class, min_eig)


def scan_grid(template: ModelSpec, axes, metric_rule="closed-form", weights=None,
              extras=None, threads=1) -> DomainScanResult:
    """Evaluate the domain flags on a two-axis grid.

    ``axes`` are two :class:`Axis` records naming either Hamiltonian fields
    of ``template`` or metric/observable parameters (``beta_m``, ``s``,
    ``a``, ``f``, ``m``). Rows are computed independently and written into
    fixed slots, so the result does not depend on ``threads``.
    """
    axes = tuple(Axis(a.name, float(a.lo), float(a.hi), int(a.n)) for a in axes)
    if len(axes) != 2:
        raise ParameterError("scan needs exactly two axes")
    if axes[0].name == axes[1].name:
        raise ParameterError("scan axes must name two different parameters")
    allowed = set(MODEL_FIELDS[template.family]) | set(EXTRA_FIELDS)
    for a in axes:
        if a.name not in allowed:
            raise ParameterError(f"axis {a.name!r} is not a parameter of {template.family}")
        if a.n < 1:
            raise ParameterError(f"axis {a.name!r} needs a positive resolution")
    if metric_rule not in METRIC_RULES:
        raise ParameterError(f"unknown metric rule {metric_rule!r}; expected one of {', '.join(METRIC_RULES)}")
    if metric_rule == "closed-form" and template.family not in ("two_level", "three_level"):
        raise ParameterError(f"no closed-form metric for family {template.family}")
    if metric_rule == "fixed-weights" and weights is None:
        raise ParameterError("fixed-weights metric rule needs weights")
    ex = dict(EXTRA_FIELDS)
    ex.update(extras or {})

    xs, ys = axes[0].values(), axes[1].values()

    def row(i):
        return [_evaluate_cell(template, axes, ex, metric_rule, weights, xs[i], y) for y in ys]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, range(len(xs))))
    else:
        rows = [row(i) for i in range(len(xs))]
    return DomainScanResult(axes, tuple(c for r in rows for c in r))
