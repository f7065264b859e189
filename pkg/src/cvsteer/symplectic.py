"""Covariance matrices, the symplectic form, and the kernels built on them.

Conventions used throughout the package:

* Quadratures are ordered interleaved, ``(x1, p1, x2, p2, ...)``.
* Vacuum normalisation: every quadrature of the vacuum has variance 1, so
  ``x = a + a^dag`` and ``p = (a - a^dag)/i``. Physical states have all
  symplectic eigenvalues >= 1.
* States are zero-mean; only second moments are modelled.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from scipy import linalg as sla

from .errors import DomainError, SingularBlockError, SymplecticPairingError

ORDERING = "interleaved-xp"

SYMMETRY_TOL = 1e-12
PHYSICAL_TOL = 1e-9
PAIRING_RTOL = 1e-9
SINGULAR_CUTOFF = 1e-10
SYMPLECTIC_TOL = 1e-10


def default_labels(n_modes: int) -> tuple[str, ...]:
    if n_modes <= len(string.ascii_uppercase):
        return tuple(string.ascii_uppercase[:n_modes])
    return tuple(f"m{i}" for i in range(n_modes))


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Second moments of a zero-mean Gaussian state.

    ``data`` is symmetrised and frozen on construction. Physicality is not
    enforced here because Schur complements share this type and may violate
    the uncertainty principle; use :func:`is_physical` to check.
    """

    data: np.ndarray
    labels: tuple[str, ...] | None = field(default=None)

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] % 2:
            raise DomainError(f"covariance matrix must be 2n x 2n, got shape {arr.shape}")
        if arr.shape[0] == 0:
            raise DomainError("covariance matrix must describe at least one mode")
        arr = 0.5 * (arr + arr.T)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        n = arr.shape[0] // 2
        labels = default_labels(n) if self.labels is None else tuple(str(l) for l in self.labels)
        if len(labels) != n:
            raise DomainError(f"{len(labels)} labels given for {n} modes")
        object.__setattr__(self, "labels", labels)

    @property
    def n_modes(self) -> int:
        return self.data.shape[0] // 2

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def __repr__(self):
        return f"CovarianceMatrix(n_modes={self.n_modes}, labels={self.labels})"

    def mode_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DomainError(f"unknown mode label {label!r}; have {self.labels}") from None

    def transformed(self, S: "SymplecticTransform | np.ndarray") -> "CovarianceMatrix":
        """Return ``S @ sigma @ S.T``."""
        mat = S.matrix if isinstance(S, SymplecticTransform) else np.asarray(S)
        return CovarianceMatrix(mat @ self.data @ mat.T, self.labels)


def as_matrix(cm) -> np.ndarray:
    if isinstance(cm, CovarianceMatrix):
        return cm.data
    return np.asarray(cm, dtype=np.float64)


def symplectic_form(n_modes: int) -> np.ndarray:
    """Omega = direct sum of [[0, 1], [-1, 0]] over ``n_modes`` modes."""
    if n_modes < 1:
        raise DomainError("n_modes must be positive")
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True, eq=False)
class SymplecticTransform:
    """A real 2n x 2n matrix S with S Omega S^T = Omega."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=np.float64)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] % 2:
            raise DomainError(f"symplectic matrix must be 2n x 2n, got shape {mat.shape}")
        omega = symplectic_form(mat.shape[0] // 2)
        defect = np.max(np.abs(mat @ omega @ mat.T - omega))
        if defect > SYMPLECTIC_TOL:
            raise DomainError(f"matrix is not symplectic: |S W S^T - W|_max = {defect:.3e}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    def __matmul__(self, other):
        if isinstance(other, SymplecticTransform):
            return SymplecticTransform(self.matrix @ other.matrix)
        return NotImplemented

    def apply(self, cm: CovarianceMatrix) -> CovarianceMatrix:
        return cm.transformed(self)


@dataclass(frozen=True)
class ModePartition:
    """Ordered pair of disjoint mode sets: (steering party, steered party)."""

    steering: tuple[int, ...]
    steered: tuple[int, ...]

    def __post_init__(self):
        steering = tuple(int(i) for i in self.steering)
        steered = tuple(int(i) for i in self.steered)
        if not steering or not steered:
            raise DomainError("both parties of a partition must be nonempty")
        if len(set(steering)) != len(steering) or len(set(steered)) != len(steered):
            raise DomainError("repeated mode inside a party")
        if set(steering) & set(steered):
            raise DomainError(f"parties overlap: {sorted(set(steering) & set(steered))}")
        if min(steering + steered) < 0:
            raise DomainError("mode indices must be non-negative")
        object.__setattr__(self, "steering", steering)
        object.__setattr__(self, "steered", steered)

    @property
    def modes(self) -> tuple[int, ...]:
        return self.steering + self.steered

    def reversed(self) -> "ModePartition":
        return ModePartition(self.steered, self.steering)

    def check(self, n_modes: int) -> None:
        bad = [i for i in self.modes if i >= n_modes]
        if bad:
            raise DomainError(f"mode indices {bad} out of range for {n_modes} modes")

    def label(self, labels: Sequence[str]) -> str:
        return "".join(labels[i] for i in self.steering) + "->" + "".join(labels[i] for i in self.steered)


def quadrature_indices(modes: Sequence[int]) -> np.ndarray:
    return np.array([q for m in modes for q in (2 * m, 2 * m + 1)], dtype=np.intp)


def restrict(cm: CovarianceMatrix, modes: Sequence[int]) -> CovarianceMatrix:
    """Reduced state on ``modes`` (partial trace of a Gaussian state)."""
    modes = [int(m) for m in modes]
    if not modes:
        raise DomainError("cannot restrict to an empty set of modes")
    if len(set(modes)) != len(modes):
        raise DomainError(f"repeated modes in {modes}")
    bad = [m for m in modes if not 0 <= m < cm.n_modes]
    if bad:
        raise DomainError(f"mode indices {bad} out of range for {cm.n_modes} modes")
    idx = quadrature_indices(modes)
    return CovarianceMatrix(cm.data[np.ix_(idx, idx)], tuple(cm.labels[m] for m in modes))


def schur_complement(cm: CovarianceMatrix, part: ModePartition) -> CovarianceMatrix:
    """Conditional covariance ``B - C^T A^{-1} C`` of the steered party.

    A is the steering party's block, B the steered party's and C their
    correlations. Modes outside the partition play no role. Raises
    :class:`SingularBlockError` if A's smallest eigenvalue is at or below
    ``SINGULAR_CUTOFF``.
    """
    part.check(cm.n_modes)
    ia = quadrature_indices(part.steering)
    ib = quadrature_indices(part.steered)
    A = cm.data[np.ix_(ia, ia)]
    B = cm.data[np.ix_(ib, ib)]
    C = cm.data[np.ix_(ia, ib)]
    lam_min = float(np.linalg.eigvalsh(A)[0])
    if lam_min <= SINGULAR_CUTOFF:
        raise SingularBlockError(lam_min, SINGULAR_CUTOFF)
    factor = sla.cho_factor(A, lower=True, check_finite=False)
    out = B - C.T @ sla.cho_solve(factor, C, check_finite=False)
    return CovarianceMatrix(out, tuple(cm.labels[m] for m in part.steered))


def symplectic_eigenvalues(cm) -> np.ndarray:
    """Ascending symplectic eigenvalues of a symmetric 2n x 2n matrix.

    Computed as the moduli of the eigenvalues of Omega @ sigma, which come
    in pairs (+/- i nu for positive matrices, +/- nu otherwise). Works for
    indefinite input such as Schur complements of unphysical data.
    """
    mat = as_matrix(cm)
    if not np.all(np.isfinite(mat)):
        raise DomainError("covariance matrix has non-finite entries")
    mat = 0.5 * (mat + mat.T)
    n = mat.shape[0] // 2
    moduli = np.sort(np.abs(np.linalg.eigvals(symplectic_form(n) @ mat)))
    lo, hi = moduli[0::2], moduli[1::2]
    gap = np.abs(hi - lo)
    scale = np.maximum(np.maximum(hi, lo), 1.0)
    if np.any(gap > PAIRING_RTOL * scale):
        worst = int(np.argmax(gap / scale))
        raise SymplecticPairingError(
            f"unpaired symplectic spectrum: {lo[worst]!r} vs {hi[worst]!r}"
        )
    return 0.5 * (lo + hi)


class PhysicalityCheck(NamedTuple):
    physical: bool
    nu_min: float


def is_physical(cm, tol: float = PHYSICAL_TOL) -> PhysicalityCheck:
    """Uncertainty-principle check: all symplectic eigenvalues >= 1 - tol."""
    nu_min = float(symplectic_eigenvalues(cm)[0])
    return PhysicalityCheck(nu_min >= 1.0 - tol, nu_min)


# ---------------------------------------------------------------------------
# ordering conversion and serialisation
# ---------------------------------------------------------------------------

def _block_permutation(n_modes: int) -> np.ndarray:
    # perm[k] = interleaved index that lands at block position k
    return np.concatenate([np.arange(0, 2 * n_modes, 2), np.arange(1, 2 * n_modes, 2)])


def to_block_ordering(matrix) -> np.ndarray:
    """Reorder an interleaved (x1,p1,x2,p2,..) matrix to (x1,x2,..,p1,p2,..)."""
    mat = as_matrix(matrix)
    perm = _block_permutation(mat.shape[0] // 2)
    return mat[np.ix_(perm, perm)]


def from_block_ordering(matrix) -> np.ndarray:
    """Inverse of :func:`to_block_ordering`."""
    mat = np.asarray(matrix, dtype=np.float64)
    inv = np.argsort(_block_permutation(mat.shape[0] // 2))
    return mat[np.ix_(inv, inv)]


def cm_to_dict(cm: CovarianceMatrix) -> dict:
    return {
        "n_modes": cm.n_modes,
        "ordering": ORDERING,
        "labels": list(cm.labels),
        "matrix": cm.data.tolist(),
    }


def cm_from_dict(doc: dict) -> CovarianceMatrix:
    try:
        n = int(doc["n_modes"])
        ordering = doc["ordering"]
        raw = doc["matrix"]
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed covariance document: missing {exc}") from None
    if ordering != ORDERING:
        raise DomainError(f"unsupported quadrature ordering {ordering!r}; expected {ORDERING!r}")
    mat = np.asarray(raw, dtype=np.float64)
    if mat.ndim == 1:
        if mat.size != 4 * n * n:
            raise DomainError(f"flat matrix has {mat.size} entries, expected {4 * n * n}")
        mat = mat.reshape(2 * n, 2 * n)
    if mat.shape != (2 * n, 2 * n):
        raise DomainError(f"matrix shape {mat.shape} does not match n_modes={n}")
    if not np.allclose(mat, mat.T, atol=1e-9, rtol=0):
        raise DomainError("covariance matrix in document is not symmetric")
    return CovarianceMatrix(mat, doc.get("labels"))


def save_json(cm: CovarianceMatrix, path) -> None:
    Path(path).write_text(json.dumps(cm_to_dict(cm), indent=2) + "\n")


def load_json(path) -> CovarianceMatrix:
    return cm_from_dict(json.loads(Path(path).read_text()))
