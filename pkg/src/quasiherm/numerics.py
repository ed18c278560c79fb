"""Dense linear-algebra substrate.

Matrices are plain ``numpy.ndarray`` objects; :func:`as_matrix` validates
them and decides whether they are real (float64) or complex (complex128).
Eigenvalues are always returned in lexicographic (Re, Im) order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    AsymmetryError,
    ConvergenceError,
    NotPositiveDefiniteError,
    ParameterError,
)

#: relative gap below which two eigenvalues count as degenerate
DEGENERACY_RTOL = 1e-8
#: relative imaginary part below which an eigenvalue counts as real
IMAG_RTOL = 1e-9
#: relative asymmetry accepted by the symmetric routines
SYMMETRY_RTOL = 1e-12
#: relative positivity threshold for metric admissibility
PD_RTOL = 1e-10


def as_matrix(M, *, require_real=False) -> np.ndarray:
    """Validate ``M`` as a finite square matrix.

    Complex input whose imaginary parts are all exactly zero is demoted to
    float64, so the real/complex tag is simply the array dtype.
    """
    A = np.asarray(M)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ParameterError(f"expected a non-empty square matrix, got shape {A.shape}")
    if np.iscomplexobj(A):
        if np.all(A.imag == 0):
            A = A.real
        elif require_real:
            raise ParameterError("complex-tagged matrix where a real one is required")
    A = np.array(A, dtype=np.complex128 if np.iscomplexobj(A) else np.float64)
    if not np.all(np.isfinite(A)):
        raise ParameterError("matrix has non-finite entries")
    return A


def is_real(M) -> bool:
    return not np.iscomplexobj(as_matrix(M))


def frobenius(M) -> float:
    return float(np.linalg.norm(M, "fro"))


def pd_tolerance(S) -> float:
    """Positivity threshold ``1e-10 * max(1, |S|_F)``."""
    return PD_RTOL * max(1.0, frobenius(S))


def _min_pair_gap(values: np.ndarray) -> float:
    if values.size < 2:
        return math.inf
    diff = np.abs(values[:, None] - values[None, :])
    diff[np.diag_indices_from(diff)] = np.inf
    return float(diff.min())


@dataclass(frozen=True)
class Spectrum:
    """Sorted eigenvalues plus the metadata used for classification.

    ``scale`` is the reference magnitude for the relative thresholds. It is
    the larger of the spectral radius and the RMS entry size of the source
    matrix, so that an exceptional point sitting at E = 0 is still measured
    against a nonzero scale.
    """

    eigenvalues: np.ndarray
    min_pair_gap: float = field(init=False)
    max_abs_imag: float = field(init=False)
    scale: float = 0.0

    def __post_init__(self):
        ev = np.sort_complex(np.asarray(self.eigenvalues, dtype=np.complex128).ravel())
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "min_pair_gap", _min_pair_gap(ev))
        object.__setattr__(
            self, "max_abs_imag", float(np.abs(ev.imag).max()) if ev.size else 0.0
        )
        object.__setattr__(self, "scale", max(float(self.scale), self.spectral_radius))

    def __len__(self):
        return self.eigenvalues.size

    @property
    def spectral_radius(self) -> float:
        return float(np.abs(self.eigenvalues).max()) if self.eigenvalues.size else 0.0

    @property
    def imag_tolerance(self) -> float:
        return IMAG_RTOL * self.scale

    @property
    def degeneracy_tolerance(self) -> float:
        return DEGENERACY_RTOL * self.scale

    def is_degenerate(self) -> bool:
        gap = self.min_pair_gap
        return gap == 0.0 or gap < self.degeneracy_tolerance

    def is_real(self) -> bool:
        return self.max_abs_imag <= self.imag_tolerance

    def real_count(self) -> int:
        return int(np.sum(np.abs(self.eigenvalues.imag) <= self.imag_tolerance))

    def closest_pair(self):
        """Indices of the two eigenvalues realising ``min_pair_gap``."""
        ev = self.eigenvalues
        diff = np.abs(ev[:, None] - ev[None, :])
        diff[np.diag_indices_from(diff)] = np.inf
        i, j = np.unravel_index(np.argmin(diff), diff.shape)
        return (int(min(i, j)), int(max(i, j)))

    def clusters(self, radius: float):
        """Group eigenvalues closer than ``radius`` (single linkage).

        Returns ``(centroid, multiplicity)`` pairs. The centroid of a cluster
        produced by a defective eigenvalue is accurate to working precision
        even though the individual members are not.
        """
        ev = self.eigenvalues
        n = ev.size
        parent = list(range(n))

        def root(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i in range(n):
            for j in range(i + 1, n):
                if abs(ev[i] - ev[j]) < radius:
                    parent[root(i)] = root(j)
        groups = {}
        for i in range(n):
            groups.setdefault(root(i), []).append(ev[i])
        out = [(complex(np.mean(g)), len(g)) for g in groups.values()]
        out.sort(key=lambda c: (c[0].real, c[0].imag))
        return out


def _matrix_scale(A: np.ndarray) -> float:
    return frobenius(A) / math.sqrt(A.shape[0])


def eig(M) -> Spectrum:
    """General dense eigenvalues of ``M``."""
    A = as_matrix(M)
    try:
        values = scipy.linalg.eigvals(A, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(values)):
        raise ConvergenceError("eigensolver returned non-finite eigenvalues")
    return Spectrum(values, scale=_matrix_scale(A))


def eig_with_vectors(M):
    """Eigenvalues and right eigenvectors, columns sorted like :func:`eig`."""
    A = as_matrix(M)
    try:
        values, vectors = scipy.linalg.eig(A, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigensolver failed: {exc}") from exc
    order = np.lexsort((values.imag, values.real))
    return values[order], vectors[:, order]


def check_symmetric(S) -> np.ndarray:
    A = as_matrix(S)
    asym = frobenius(A - A.T)
    tol = SYMMETRY_RTOL * frobenius(A)
    if asym > tol:
        raise AsymmetryError(asym, tol)
    return 0.5 * (A + A.T)


def sym_eig(S) -> Spectrum:
    """Ascending real spectrum of a (numerically) symmetric real matrix."""
    A = check_symmetric(as_matrix(S, require_real=True))
    try:
        values = scipy.linalg.eigvalsh(A, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"symmetric eigensolver failed: {exc}") from exc
    return Spectrum(values.astype(np.complex128), scale=_matrix_scale(A))


def spd_sqrt(S) -> np.ndarray:
    """Symmetric positive-definite square root via the spectral decomposition."""
    A = check_symmetric(as_matrix(S, require_real=True))
    w, V = scipy.linalg.eigh(A, check_finite=False)
    tol = pd_tolerance(A)
    if w[0] <= tol:
        raise NotPositiveDefiniteError(w[0], tol)
    R = (V * np.sqrt(w)) @ V.T
    return 0.5 * (R + R.T)


@dataclass(frozen=True)
class PolyCoeffs:
    """Monic real polynomial, coefficients in ascending order of power.

    Python integers are kept exact; everything else is stored as float.
    """

    coeffs: tuple

    def __post_init__(self):
        c = tuple(x if type(x) is int else float(x) for x in self.coeffs)
        if not c or c[-1] != 1.0:
            raise ParameterError("polynomial must be monic (leading coefficient exactly 1)")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_descending(cls, coeffs):
        return cls(tuple(reversed(list(coeffs))))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def descending(self) -> np.ndarray:
        return np.array(self.coeffs[::-1], dtype=float)

    def __call__(self, x):
        return np.polyval(self.descending(), x)

    def roots(self) -> np.ndarray:
        if self.degree == 0:
            return np.empty(0, dtype=np.complex128)
        return np.sort_complex(np.roots(self.descending()).astype(np.complex128))

    def derivative(self) -> np.ndarray:
        """Ascending coefficients of p' (not monic in general)."""
        return np.array([k * c for k, c in enumerate(self.coeffs)][1:])


def char_poly(M) -> PolyCoeffs:
    """Coefficients of det(E*I - M) by the Hessenberg determinant recursion."""
    A = as_matrix(M, require_real=True)
    n = A.shape[0]
    Hs = scipy.linalg.hessenberg(A) if n > 2 else A.copy()
    # p[k] holds ascending coefficients of the leading k-by-k principal minor
    p = [np.array([1.0])]
    for k in range(n):
        cur = np.zeros(k + 2)
        cur[1:] += p[k]
        cur[:-1] -= Hs[k, k] * p[k]
        sub = 1.0
        for i in range(k - 1, -1, -1):
            sub *= Hs[i + 1, i]
            if sub == 0.0:
                break
            cur[: i + 1] -= Hs[i, k] * sub * p[i]
        p.append(cur)
    coeffs = p[n]
    coeffs[-1] = 1.0
    return PolyCoeffs(tuple(coeffs))


def sylvester_matrix(f, g) -> np.ndarray:
    """Sylvester matrix of two polynomials given in ascending order."""
    f = np.asarray(f, dtype=float)[::-1]
    g = np.asarray(g, dtype=float)[::-1]
    m, n = f.size - 1, g.size - 1
    S = np.zeros((m + n, m + n))
    for i in range(n):
        S[i, i : i + m + 1] = f
    for i in range(m):
        S[n + i, i : i + n + 1] = g
    return S


def sylvester_discriminant(p: PolyCoeffs) -> float:
    """(-1)^(n(n-1)/2) Res(p, p') for monic p, via the Sylvester determinant."""
    n = p.degree
    if n < 2:
        raise ParameterError(f"discriminant needs degree >= 2, got {n}")
    res = float(np.linalg.det(sylvester_matrix(p.coeffs, p.derivative())))
    return (-1) ** (n * (n - 1) // 2) * res


def poly_discriminant(p: PolyCoeffs) -> float:
    """Discriminant of a monic polynomial.

    Degrees 2 to 4 use the closed-form expressions in the coefficients;
    higher degrees fall back to the Sylvester determinant.
    """
    n = p.degree
    if n < 2:
        raise ParameterError(f"discriminant needs degree >= 2, got {n}")
    if n == 2:
        c, b, _ = p.coeffs
        return b * b - 4 * c
    if n == 3:
        d, c, b, _ = p.coeffs
        return b * b * c * c - 4 * c**3 - 4 * b**3 * d - 27 * d * d + 18 * b * c * d
    if n == 4:
        e, d, c, b, _ = p.coeffs
        return (
            256 * e**3
            - 192 * b * d * e**2
            - 128 * c**2 * e**2
            + 144 * c * d**2 * e
            - 27 * d**4
            + 144 * b**2 * c * e**2
            - 6 * b**2 * d**2 * e
            - 80 * b * c**2 * d * e
            + 18 * b * c * d**3
            + 16 * c**4 * e
            - 4 * c**3 * d**2
            - 27 * b**4 * e**2
            + 18 * b**3 * c * d * e
            - 4 * b**3 * d**3
            - 4 * b**2 * c**3 * e
            + b**2 * c**2 * d**2
        )
    return sylvester_discriminant(p)
