"""
Moment matrices
===============

Whitening of the input covariance and assembly of the NLMS moment matrices

    A = 2 E[u* u / ||u||^2],   B = E[(u* u)^T o (u* u) / ||u||^4],
    C = E[u* u / ||u||^4],     F = I - mu A + mu^2 B

in the eigenbasis of the input covariance, where ``A`` and ``C`` are diagonal.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eigmoments import derived_moments
from .errors import ValidationError
from .spectrum import Spectrum

__all__ = [
    "InputCovariance",
    "Whitening",
    "MomentMatrices",
    "toeplitz_covariance",
    "whiten",
    "build_whitened",
    "build_scaled",
    "build_F",
    "spectral_radius",
]

HERMITIAN_TOLERANCE = 1e-12


@dataclass(frozen=True)
class InputCovariance:
    """
    Hermitian positive-definite covariance ``R(i, j) = E[u_i conj(u_j)]`` of
    the regressor entries.
    """

    matrix: np.ndarray

    def __post_init__(self):
        R = np.array(self.matrix, dtype=complex)
        if R.ndim != 2 or R.shape[0] != R.shape[1] or R.shape[0] == 0:
            raise ValidationError(f"covariance must be a square matrix, got shape {R.shape}")
        if not np.all(np.isfinite(R)):
            raise ValidationError("covariance has non-finite entries")
        scale = max(np.max(np.abs(R)), 1e-300)
        if np.max(np.abs(R - R.conj().T)) > HERMITIAN_TOLERANCE * scale:
            raise ValidationError("covariance is not Hermitian")
        R = 0.5 * (R + R.conj().T)
        if np.min(np.linalg.eigvalsh(R)) <= 0:
            raise ValidationError("covariance is not positive definite")
        if np.all(R.imag == 0):
            R = R.real
        R.setflags(write=False)
        object.__setattr__(self, "matrix", R)

    @property
    def M(self):
        return self.matrix.shape[0]


def toeplitz_covariance(M, alpha):
    """``R(i, j) = alpha^|i - j|``, the usual AR(1)-type correlated input."""
    if M < 1:
        raise ValidationError("M must be positive")
    if not 0 <= alpha < 1:
        raise ValidationError("toeplitz alpha must lie in [0, 1)")
    idx = np.arange(M)
    return InputCovariance(float(alpha) ** np.abs(idx[:, None] - idx[None, :]))


@dataclass(frozen=True)
class Whitening:
    """Eigen-decomposition ``R = U diag(eigenvalues) U^H``, eigenvalues descending."""

    eigenvalues: np.ndarray
    basis: np.ndarray

    def spectrum(self, **kwargs):
        return Spectrum(self.eigenvalues, **kwargs)

    def rotate_vector(self, w):
        """Coordinates of a weight vector in the eigenbasis: ``U^T w``."""
        return self.basis.T @ np.asarray(w)

    def rotate_covariance(self, Rq):
        """Covariance of ``U^T q`` for ``q`` with covariance ``Rq``."""
        U = self.basis
        return U.T @ np.asarray(Rq) @ U.conj()


def whiten(cov: InputCovariance) -> Whitening:
    """
    Eigen-decompose the input covariance.

    Eigenvalues come back sorted descending with the matching unitary basis
    in the columns of ``basis``. Degenerate spectra are returned as-is; the
    gap rule is enforced only when a :class:`Spectrum` is built from them.
    """
    if not isinstance(cov, InputCovariance):
        cov = InputCovariance(cov)
    vals, vecs = np.linalg.eigh(cov.matrix)
    order = np.argsort(vals)[::-1]
    vals = vals[order].copy()
    vecs = vecs[:, order].copy()
    vals.setflags(write=False)
    vecs.setflags(write=False)
    return Whitening(vals, vecs)


def build_whitened(s: Spectrum):
    """
    Whitened moment matrices ``(A_bar, B_bar, C_bar)``.

    ``A_bar = diag(2 E[s_k])``, ``B_bar`` is the fourth-order matrix
    ``E[|u_k|^2 |u_l|^2 / (||u||^2_L)^2]`` and
    ``C_bar = diag(E[|u_k|^2 / (||u||^2_L)^2])``.
    """

    def compute():
        ms = derived_moments(s)
        out = (
            np.diag(2.0 * ms.mean_sk),
            np.array(ms.cross_fourth),
            np.diag(ms.self_weighted),
        )
        for a in out:
            a.setflags(write=False)
        return out

    return s.memo(("whitened_matrices",), compute)


def build_scaled(s: Spectrum, bars=None):
    """``A = L A_bar``, ``B = L B_bar L``, ``C = L C_bar``."""
    if bars is None:
        bars = build_whitened(s)
    A_bar, B_bar, C_bar = bars
    lam = s.values
    if A_bar.shape != (s.M, s.M) or B_bar.shape != (s.M, s.M) or C_bar.shape != (s.M, s.M):
        raise ValidationError("moment matrices do not conform to the spectrum")
    A = lam[:, None] * A_bar
    # outer product first so B stays exactly symmetric
    B = (lam[:, None] * lam[None, :]) * B_bar
    C = lam[:, None] * C_bar
    return A, B, C


def spectral_radius(F):
    return float(np.max(np.abs(np.linalg.eigvals(F))))


@dataclass(frozen=True)
class MomentMatrices:
    """Whitened and scaled moment matrices together with ``F`` at one step size."""

    A_bar: np.ndarray
    B_bar: np.ndarray
    C_bar: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    F: np.ndarray
    mu: float
    rho_F: float = field(default=np.nan)


def build_F(s: Spectrum, mu) -> MomentMatrices:
    """Form ``F = I - mu A + mu^2 B`` and its spectral radius."""
    mu = float(mu)
    if not mu >= 0:
        raise ValidationError("step size must be nonnegative")
    bars = build_whitened(s)
    A, B, C = s.memo(("scaled_matrices",), lambda: build_scaled(s, bars))
    F = np.eye(s.M) - mu * A + mu * mu * B
    return MomentMatrices(*bars, A, B, C, F, mu, spectral_radius(F))
