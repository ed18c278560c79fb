"""Hermitizing metrics: solution families of H^T Theta = Theta H.

Two independent constructions are provided. :func:`metric_basis` builds
the family from dyads of left eigenvectors and needs a real simple
spectrum; :func:`metric_nullspace_oracle` takes the null space of the
linear map ``Theta -> H^T Theta - Theta H`` on symmetric matrices and works
for any real H.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg
import scipy.optimize

from . import numerics
from .errors import NotFoundError, ParameterError, QuasiHermError, SpectrumError

#: residual bound for basis elements, relative to |H|_F |B|_F
BASIS_RTOL = 1e-10
#: singular values below this fraction of the largest count as zero
NULLSPACE_RTOL = 1e-10
#: residual accepted by :func:`hermitize`
HERMITIZE_RESIDUAL = 1e-8


@dataclass(frozen=True)
class MetricFamily:
    dim: int
    basis: tuple
    source_hamiltonian: np.ndarray
    construction: str

    def __len__(self):
        return len(self.basis)

    @property
    def size(self) -> int:
        return len(self.basis)

    def vectors(self) -> np.ndarray:
        """Basis elements flattened into the columns of an (dim*dim, size) array."""
        if not self.basis:
            return np.zeros((self.dim * self.dim, 0))
        return np.column_stack([B.ravel() for B in self.basis])

    def assemble(self, weights) -> np.ndarray:
        return assemble_metric(self, weights)


def residual(H, Theta) -> float:
    """Relative defect ``|H^+ Theta - Theta H|_F / (|H|_F |Theta|_F)``."""
    H = numerics.as_matrix(H)
    Theta = numerics.as_matrix(Theta)
    if H.shape != Theta.shape:
        raise ParameterError(f"dimension mismatch: H is {H.shape}, Theta is {Theta.shape}")
    defect = numerics.frobenius(H.conj().T @ Theta - Theta @ H)
    scale = numerics.frobenius(H) * numerics.frobenius(Theta)
    if scale == 0.0:
        return 0.0 if defect == 0.0 else math.inf
    return defect / scale


def _orient(B: np.ndarray) -> np.ndarray:
    tr = np.trace(B)
    if abs(tr) > 1e-12 * max(1.0, numerics.frobenius(B)):
        return B if tr > 0 else -B
    flat = B.ravel()
    lead = flat[np.argmax(np.abs(flat) > 1e-12)]
    return B if lead >= 0 else -B


def _orthonormal_family(candidates, n):
    """Frobenius-orthonormal, sign-oriented basis spanning ``candidates``."""
    if not candidates:
        return ()
    X = np.column_stack([0.5 * (C + C.T).ravel() for C in candidates])
    Q, R = np.linalg.qr(X)
    keep = np.abs(np.diag(R)) > 1e-12 * max(1.0, np.abs(R).max())
    out = []
    for q in Q[:, keep].T:
        B = q.reshape(n, n)
        out.append(_orient(0.5 * (B + B.T)))
    return tuple(out)


def metric_basis(H) -> MetricFamily:
    """Metric family from dyads ``w w^T`` of the left eigenvectors of ``H``.

    Each left eigenvector solves ``H^T w = E w``; for real ``E`` the dyad
    satisfies the metric equation, and the ``dim`` dyads of a simple real
    spectrum span the whole solution space.
    """
    H = numerics.as_matrix(H, require_real=True)
    n = H.shape[0]
    spec = numerics.eig(H)
    if not spec.is_real():
        k = int(np.argmax(np.abs(spec.eigenvalues.imag)))
        ev = spec.eigenvalues[k]
        raise SpectrumError(
            f"complex spectrum: eigenvalue pair {ev.real:.12g} +/- {abs(ev.imag):.6g}i",
            pair=(ev, ev.conjugate()),
        )
    if spec.is_degenerate():
        i, j = spec.closest_pair()
        ei, ej = spec.eigenvalues[i], spec.eigenvalues[j]
        raise SpectrumError(
            f"degenerate spectrum: eigenvalues {ei.real:.12g} and {ej.real:.12g} "
            f"differ by {spec.min_pair_gap:.3e}",
            pair=(ei, ej),
        )
    _, W = numerics.eig_with_vectors(H.T)
    W = np.real_if_close(W, tol=1e6).real
    dyads = [np.outer(w, w) / (w @ w) for w in W.T]
    basis = _orthonormal_family(dyads, n)
    for B in basis:
        if residual(H, B) > BASIS_RTOL:
            raise QuasiHermError("dyadic metric construction lost accuracy")
    return MetricFamily(n, basis, H, "dyadic")


def symmetric_unit_basis(n: int):
    """Frobenius-orthonormal basis of the n(n+1)/2-dimensional symmetric space."""
    out = []
    for i in range(n):
        for j in range(i, n):
            E = np.zeros((n, n))
            if i == j:
                E[i, i] = 1.0
            else:
                E[i, j] = E[j, i] = 1.0 / math.sqrt(2.0)
            out.append(E)
    return out


def metric_nullspace_oracle(H) -> MetricFamily:
    """All symmetric solutions of ``H^T Theta = Theta H`` by SVD thresholding."""
    H = numerics.as_matrix(H, require_real=True)
    n = H.shape[0]
    units = symmetric_unit_basis(n)
    L = np.column_stack([(H.T @ E - E @ H).ravel() for E in units])
    _, s, Vt = scipy.linalg.svd(L)
    cutoff = NULLSPACE_RTOL * max(s[0] if s.size else 0.0, numerics.frobenius(H), 1e-300)
    rank = int(np.sum(s > cutoff))
    null = Vt[rank:]
    candidates = [sum(c * E for c, E in zip(v, units)) for v in null]
    return MetricFamily(n, _orthonormal_family(candidates, n), H, "nullspace")


def assemble_metric(fam: MetricFamily, weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float).ravel()
    if w.size != fam.size:
        raise ParameterError(f"got {w.size} weights for a family of size {fam.size}")
    if not np.any(w != 0.0):
        raise ParameterError("metric weights must contain at least one nonzero entry")
    Theta = sum(k * B for k, B in zip(w, fam.basis))
    return 0.5 * (Theta + Theta.T)


def fit_weights(fam: MetricFamily, Theta):
    """Least-squares weights of ``Theta`` in the family and the relative misfit."""
    Theta = numerics.as_matrix(Theta, require_real=True)
    X = fam.vectors()
    w, *_ = np.linalg.lstsq(X, Theta.ravel(), rcond=None)
    misfit = numerics.frobenius((X @ w).reshape(Theta.shape) - Theta)
    return w, misfit / max(numerics.frobenius(Theta), 1e-300)


def subspace_angle(fam_a: MetricFamily, fam_b: MetricFamily) -> float:
    """Largest principal angle between the spans of two families."""
    if fam_a.size != fam_b.size:
        return math.pi / 2
    if fam_a.size == 0:
        return 0.0
    return float(np.max(scipy.linalg.subspace_angles(fam_a.vectors(), fam_b.vectors())))


class Positivity(NamedTuple):
    is_pd: bool
    min_eigenvalue: float


def positivity(Theta) -> Positivity:
    spec = numerics.sym_eig(Theta)
    lo = float(spec.eigenvalues[0].real)
    return Positivity(lo > numerics.pd_tolerance(Theta), lo)


def find_pd_weights(fam: MetricFamily, *, restarts=8, seed=0):
    """Search weights making the assembled metric positive definite.

    Maximises ``lambda_min(sum w_k B_k) / |w|`` from several seeded starts.
    Returns ``(weights, min_eigenvalue)`` normalised to ``|w| = 1``; raises
    :class:`NotFoundError` when every start ends on a non-positive metric.
    """
    if fam.size == 0:
        raise NotFoundError("empty metric family has no positive member")

    def objective(w):
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        Theta = sum(k * B for k, B in zip(w / norm, fam.basis))
        return -scipy.linalg.eigvalsh(0.5 * (Theta + Theta.T), subset_by_index=[0, 0])[0]

    rng = np.random.default_rng(seed)
    starts = [np.eye(fam.size)[0]] + [rng.normal(size=fam.size) for _ in range(restarts)]
    best = None
    for w0 in starts:
        res = scipy.optimize.minimize(
            objective, w0, method="Nelder-Mead",
            options={"maxiter": 2000 * fam.size, "xatol": 1e-8, "fatol": 1e-12},
        )
        if best is None or res.fun < best.fun:
            best = res
        if -best.fun > 1e-6:
            break  # a comfortably positive member is enough
    w = best.x / np.linalg.norm(best.x)
    Theta = assemble_metric(fam, w)
    check = positivity(Theta)
    if not check.is_pd:
        raise NotFoundError(f"no positive definite member found; best minimal eigenvalue {check.min_eigenvalue:.3e}")
    return w, check.min_eigenvalue


def two_level_metric(alpha_H: float, beta_m: float) -> np.ndarray:
    """Closed-form metric family of the two-level Hamiltonian.

    ``alpha_H`` is the Hamiltonian angle (``lambda = sin alpha_H``) and
    ``beta_m`` numbers the metrics. ``beta_m = 0`` gives a singular matrix
    and is rejected; ``beta_m = +-pi/2`` is allowed (eigenvalues
    ``1 -/+ sin alpha_H``).
    """
    half = math.pi / 2
    if not (-half < alpha_H < half):
        raise ParameterError(f"alpha_H must lie in (-pi/2, pi/2), got {alpha_H}")
    if not (-half <= beta_m <= half) or beta_m == 0.0:
        raise ParameterError(f"beta_m must lie in [-pi/2, 0) or (0, pi/2], got {beta_m}")
    delta = math.cos(alpha_H) * math.cos(beta_m)
    s = math.sin(alpha_H)
    return np.array([[1.0 + delta, -s], [-s, 1.0 - delta]])


def two_level_metric_eigenvalues(alpha_H: float, beta_m: float):
    """``1 -/+ sqrt(1 - cos^2 alpha sin^2 beta)``, ascending."""
    root = math.sqrt(1.0 - (math.cos(alpha_H) * math.sin(beta_m)) ** 2)
    return (1.0 - root, 1.0 + root)


def three_level_metric(z, g, a, f, m) -> np.ndarray:
    """Metric of the three-level model with diagonal ``(a, f, m)``.

    Off-diagonal entries follow by elimination: first the (2,3) entry,
    then (1,2), then (1,3). At ``g = 0`` the third level decouples and the
    two-level relation ``b = -(1+z)(a+f)/2`` is used with ``c = h = 0``.
    """
    z, g, a, f, m = (float(v) for v in (z, g, a, f, m))
    if g == 0.0:
        b = -0.5 * (1.0 + z) * (a + f)
        return np.array([[a, b, 0.0], [b, f, 0.0], [0.0, 0.0, m]])
    denom = 9.0 + 2.0 * z + z * z + g * g
    rhs = -2 * a * z - a * z * z + 7 * f - 2 * f * z - f * z * z - a + 8 * m + m * g * g + f * g * g
    h = -0.5 * g * rhs / denom
    b = -(4 * a * z + 4 * f + 4 * f * z + 4 * a + h * g + g * h * z) / (8.0 + g * g)
    c = (-h - h * z - b * g) / 4.0
    return np.array([[a, b, c], [b, f, h], [c, h, m]])


def hermitize(H, Theta) -> np.ndarray:
    """Equivalent symmetric matrix ``Theta^(1/2) H Theta^(-1/2)``."""
    H = numerics.as_matrix(H)
    r = residual(H, Theta)
    if r > HERMITIZE_RESIDUAL:
        raise QuasiHermError(f"Theta does not Hermitize H: residual {r:.3e} > {HERMITIZE_RESIDUAL:g}")
    R = numerics.spd_sqrt(Theta)
    h = R @ scipy.linalg.solve(R.T, H.T, assume_a="sym").T
    return h
