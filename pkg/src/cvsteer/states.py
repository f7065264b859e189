"""Squeezed inputs, linear-optics symplectics, the square cluster and loss."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import linalg as sla

from .errors import DomainError
from .symplectic import CovarianceMatrix, SymplecticTransform

DEFAULT_R = 0.345
UNITARITY_TOL = 1e-10
CLUSTER_LABELS = ("A", "B", "C", "D")

_h = np.sqrt(0.5)
_q = np.sqrt(0.4)
_t = np.sqrt(0.1)

#: Beam-splitter network producing the square cluster; row j gives output
#: mode (A, B, C, D)[j] in terms of the four squeezed inputs.
CLUSTER_NETWORK = np.array([
    [-_h, -_q, -1j * _t, 0.0],
    [_h, -_q, -1j * _t, 0.0],
    [0.0, 1j * _t, _q, -_h],
    [0.0, 1j * _t, _q, _h],
])


class Quadrature(str, enum.Enum):
    AMPLITUDE = "amplitude"
    PHASE = "phase"


@dataclass(frozen=True)
class SqueezedInputSpec:
    """One squeezed vacuum input.

    ``squeezed_quadrature`` names the quadrature whose noise is *reduced*:
    an amplitude-squeezed state has Var(x) = e^{-2r}.
    """

    r: float
    squeezed_quadrature: Quadrature = Quadrature.AMPLITUDE

    def __post_init__(self):
        r = float(self.r)
        if not np.isfinite(r) or r < 0:
            raise DomainError(f"squeezing parameter must be finite and >= 0, got {self.r!r}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "squeezed_quadrature", Quadrature(self.squeezed_quadrature))


def squeezed_vacuum(spec: SqueezedInputSpec) -> CovarianceMatrix:
    g = np.exp(2.0 * spec.r)
    if spec.squeezed_quadrature is Quadrature.AMPLITUDE:
        return CovarianceMatrix(np.diag([1.0 / g, g]))
    return CovarianceMatrix(np.diag([g, 1.0 / g]))


def tensor(states: Sequence[CovarianceMatrix]) -> CovarianceMatrix:
    """Direct sum of independent states."""
    states = list(states)
    if not states:
        raise DomainError("tensor() needs at least one state")
    labels = tuple(l for s in states for l in s.labels)
    if len(set(labels)) != len(labels):
        labels = None
    return CovarianceMatrix(sla.block_diag(*(s.data for s in states)), labels)


def _check_mode(n: int, k: int) -> None:
    if not 0 <= k < n:
        raise DomainError(f"mode index {k} out of range for {n} modes")


def unitary_to_symplectic(U) -> SymplecticTransform:
    """Quadrature map of the passive transformation a -> U a.

    In interleaved ordering the 2x2 block linking output j to input k is
    [[Re U_jk, -Im U_jk], [Im U_jk, Re U_jk]].
    """
    U = np.atleast_2d(np.asarray(U, dtype=np.complex128))
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise DomainError(f"U must be square, got shape {U.shape}")
    defect = float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))
    if defect > UNITARITY_TOL:
        raise DomainError(f"matrix is not unitary: |U^dag U - I|_max = {defect:.3e}")
    re, im = U.real, U.imag
    n = U.shape[0]
    S = np.empty((2 * n, 2 * n))
    S[0::2, 0::2] = re
    S[0::2, 1::2] = -im
    S[1::2, 0::2] = im
    S[1::2, 1::2] = re
    return SymplecticTransform(S)


def beamsplitter_unitary(n: int, k: int, l: int, T: float) -> np.ndarray:
    """n x n mode-mixing matrix of a beam splitter of transmittance T on (k, l)."""
    _check_mode(n, k)
    _check_mode(n, l)
    if k == l:
        raise DomainError("beam splitter needs two distinct modes")
    if not 0.0 <= T <= 1.0:
        raise DomainError(f"transmittance must lie in [0, 1], got {T!r}")
    M = np.eye(n, dtype=np.complex128)
    M[k, k] = np.sqrt(1.0 - T)
    M[k, l] = M[l, k] = np.sqrt(T)
    M[l, l] = -np.sqrt(1.0 - T)
    return M


def beamsplitter(n: int, k: int, l: int, T: float) -> SymplecticTransform:
    return unitary_to_symplectic(beamsplitter_unitary(n, k, l, T))


def phase_rotation_unitary(n: int, k: int, theta: float) -> np.ndarray:
    _check_mode(n, k)
    M = np.eye(n, dtype=np.complex128)
    M[k, k] = np.exp(1j * theta)
    return M


def phase_rotation(n: int, k: int, theta: float) -> SymplecticTransform:
    """Rotation a_k -> e^{i theta} a_k. theta = pi/2 is the 90 degree turn F_k."""
    return unitary_to_symplectic(phase_rotation_unitary(n, k, theta))


def cluster_inputs(rs: Sequence[float] | float = DEFAULT_R) -> CovarianceMatrix:
    """The four squeezed inputs: modes 1 and 4 phase-squeezed, 2 and 3 amplitude-squeezed."""
    rs = [float(rs)] * 4 if np.isscalar(rs) else [float(r) for r in rs]
    if len(rs) != 4:
        raise DomainError(f"expected 4 squeezing parameters, got {len(rs)}")
    kinds = (Quadrature.PHASE, Quadrature.AMPLITUDE, Quadrature.AMPLITUDE, Quadrature.PHASE)
    return tensor([squeezed_vacuum(SqueezedInputSpec(r, q)) for r, q in zip(rs, kinds)])


def square_cluster(r: float = DEFAULT_R) -> CovarianceMatrix:
    """Four-mode square cluster state with modes labelled A, B, C, D."""
    return square_cluster_from_inputs([r] * 4)


def square_cluster_from_inputs(rs: Sequence[float]) -> CovarianceMatrix:
    """Square cluster from unequal input squeezing, for robustness studies."""
    inputs = cluster_inputs(rs)
    if not np.any(inputs.data - np.eye(8)):
        # vacuum is invariant under passive optics; skip the rounding
        return CovarianceMatrix(np.eye(8), CLUSTER_LABELS)
    out = inputs.transformed(unitary_to_symplectic(CLUSTER_NETWORK))
    return CovarianceMatrix(out.data, CLUSTER_LABELS)


@dataclass(frozen=True)
class LossChannel:
    """Pure-loss channel of transmission ``eta`` on one mode.

    Acts as sigma -> X sigma X^T + Y with X = sqrt(eta) and
    Y = (1 - eta) I on the lossy mode, identity and zero elsewhere.
    """

    mode: int = 0
    eta: float = 1.0

    def __post_init__(self):
        eta = float(self.eta)
        if not 0.0 <= eta <= 1.0:
            raise DomainError(f"transmission must lie in [0, 1], got {self.eta!r}")
        if int(self.mode) < 0:
            raise DomainError(f"mode index must be non-negative, got {self.mode}")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "mode", int(self.mode))

    def matrices(self, n_modes: int) -> tuple[np.ndarray, np.ndarray]:
        _check_mode(n_modes, self.mode)
        X = np.eye(2 * n_modes)
        Y = np.zeros((2 * n_modes, 2 * n_modes))
        sl = slice(2 * self.mode, 2 * self.mode + 2)
        X[sl, sl] *= np.sqrt(self.eta)
        Y[sl, sl] = (1.0 - self.eta) * np.eye(2)
        return X, Y


def apply_loss(cm: CovarianceMatrix, ch: LossChannel) -> CovarianceMatrix:
    X, Y = ch.matrices(cm.n_modes)
    return CovarianceMatrix(X @ cm.data @ X.T + Y, cm.labels)


def lossy_cluster(r: float = DEFAULT_R, eta: float = 1.0, mode: int = 0) -> CovarianceMatrix:
    """Square cluster with mode ``mode`` sent through a channel of transmission eta."""
    return apply_loss(square_cluster(r), LossChannel(mode, eta))


def network_decomposition_unitary(T1=0.2, T2=0.5, T3=0.5) -> np.ndarray:
    """Compose F4 F3 I1(-1) B34(T3) F4 B12(T2) B23(T1) F3 as a matrix product.

    Mode numbers are 1-based in the name and 0-based in the code; the
    rightmost factor acts first on the inputs.
    """
    n = 4
    F = lambda k: phase_rotation_unitary(n, k - 1, np.pi / 2)  # noqa: E731
    I = lambda k: phase_rotation_unitary(n, k - 1, np.pi)  # noqa: E731
    B = lambda k, l, T: beamsplitter_unitary(n, k - 1, l - 1, T)  # noqa: E731
    # I1(-1) is a -1 on mode 1; exp(i pi) carries a 1e-16 imaginary residue
    I1 = I(1).real.astype(np.complex128)
    return F(4) @ F(3) @ I1 @ B(3, 4, T3) @ F(4) @ B(1, 2, T2) @ B(2, 3, T1) @ F(3)


def verify_network_decomposition(T1=0.2, T2=0.5, T3=0.5) -> float:
    """Max elementwise gap between the composed network and CLUSTER_NETWORK symplectics."""
    composed = unitary_to_symplectic(network_decomposition_unitary(T1, T2, T3))
    direct = unitary_to_symplectic(CLUSTER_NETWORK)
    return float(np.max(np.abs(composed.matrix - direct.matrix)))
