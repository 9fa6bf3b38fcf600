"""
Theoretical mean-square performance of NLMS.

All quantities are computed in the eigenbasis of the input covariance. The
plant vector (and the random-walk covariance for tracking) is rotated into
that basis on entry.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InstabilityError, ValidationError
from .momentmat import InputCovariance, MomentMatrices, build_F, whiten
from .spectrum import DEFAULT_GAP_TOLERANCE

__all__ = [
    "FilterScenario",
    "LearningCurve",
    "StabilityReport",
    "learning_curve",
    "steady_state",
    "tracking_emse",
    "stability",
]

KINDS = ("emse", "msd", "mse")


@dataclass(frozen=True)
class FilterScenario:
    """
    A system-identification experiment.

    Parameters
    ----------
    w_opt: array_like of complex
        Plant weights ``w^o`` (initial plant for tracking scenarios).
    mu: float
        NLMS step size.
    noise_var: float
        Measurement noise variance ``sigma_v^2``.
    input_cov: InputCovariance or array_like
        Regressor covariance.
    walk_cov: array_like, optional
        Covariance of the plant random-walk increments; None means stationary.
    gap_tolerance, spread:
        Passed to :class:`~nlmsmoments.spectrum.Spectrum`.
    """

    w_opt: np.ndarray
    mu: float
    noise_var: float
    input_cov: InputCovariance
    walk_cov: np.ndarray | None = None
    gap_tolerance: float = DEFAULT_GAP_TOLERANCE
    spread: bool = False

    def __post_init__(self):
        cov = self.input_cov
        if not isinstance(cov, InputCovariance):
            cov = InputCovariance(cov)
        w = np.array(self.w_opt, dtype=complex).reshape(-1)
        if w.size != cov.M:
            raise ValidationError(f"w_opt has length {w.size} but covariance is {cov.M}x{cov.M}")
        if not np.isfinite(self.mu) or self.mu < 0:
            raise ValidationError("mu must be a finite nonnegative number")
        if not np.isfinite(self.noise_var) or self.noise_var < 0:
            raise ValidationError("noise_var must be nonnegative")
        w.setflags(write=False)
        walk = self.walk_cov
        if walk is not None:
            walk = np.array(walk, dtype=complex)
            if walk.shape != (cov.M, cov.M):
                raise ValidationError("walk_cov shape does not match the filter length")
            if np.max(np.abs(walk - walk.conj().T)) > 1e-12 * max(np.max(np.abs(walk)), 1e-300):
                raise ValidationError("walk_cov is not Hermitian")
            if np.min(np.linalg.eigvalsh(0.5 * (walk + walk.conj().T))) < -1e-12 * max(
                np.max(np.abs(walk)), 1e-300
            ):
                raise ValidationError("walk_cov is not positive semidefinite")
            if np.all(walk.imag == 0):
                walk = walk.real
            walk.setflags(write=False)
        object.__setattr__(self, "input_cov", cov)
        object.__setattr__(self, "w_opt", w)
        object.__setattr__(self, "walk_cov", walk)
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "noise_var", float(self.noise_var))

    @property
    def M(self):
        return self.w_opt.size

    @property
    def stationary(self):
        return self.walk_cov is None or not np.any(self.walk_cov)

    def replace(self, **changes):
        kwargs = dict(
            w_opt=self.w_opt,
            mu=self.mu,
            noise_var=self.noise_var,
            input_cov=self.input_cov,
            walk_cov=self.walk_cov,
            gap_tolerance=self.gap_tolerance,
            spread=self.spread,
        )
        kwargs.update(changes)
        return FilterScenario(**kwargs)

    @cached_property
    def whitening(self):
        return whiten(self.input_cov)

    @cached_property
    def spectrum(self):
        return self.whitening.spectrum(gap_tolerance=self.gap_tolerance, spread=self.spread)

    @cached_property
    def rotated_w_opt(self):
        return self.whitening.rotate_vector(self.w_opt)

    @cached_property
    def matrices(self) -> MomentMatrices:
        return build_F(self.spectrum, self.mu)

    @property
    def signal_power(self):
        """``E|u w^o|^2`` for the initial plant."""
        return float(np.real(self.w_opt.conj() @ self.input_cov.matrix.T @ self.w_opt))


@dataclass
class LearningCurve:
    """Per-iteration EMSE, MSD or MSE values, theoretical or simulated."""

    values: np.ndarray
    kind: str
    source: str
    std_error: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown curve kind {self.kind!r}")
        self.values = np.asarray(self.values, dtype=float)

    def __len__(self):
        return self.values.size

    def db(self):
        return 10.0 * np.log10(self.values)


@dataclass(frozen=True)
class StabilityReport:
    mean_bound: float
    meansq_bound: float
    rho_F: float
    mu: float

    @property
    def stable(self):
        return self.rho_F < 1.0


def _seed(sc, kind):
    if kind == "emse":
        return np.array(sc.spectrum.values, dtype=float)
    return np.ones(sc.M)


def learning_curve(sc: FilterScenario, iterations, kind="emse") -> LearningCurve:
    """
    Theoretical learning curve for a stationary scenario.

    ``values[i]`` is ``E||w~_{i-1}||^2_sigma``, i.e. the a-priori excess error
    (``kind="emse"``) or the deviation (``kind="msd"``) seen by regressor
    ``u_i``; the filter starts from ``w_{-1} = 0``. ``kind="mse"`` adds the
    noise floor to the EMSE curve.
    """
    kind = kind.lower()
    if kind not in KINDS:
        raise ValidationError(f"unknown curve kind {kind!r}")
    if not sc.stationary:
        raise ValidationError("learning curves are only defined for stationary scenarios")
    iterations = int(iterations)
    if iterations < 0:
        raise ValidationError("iterations must be nonnegative")
    mats = sc.matrices
    F = mats.F
    c = np.diag(mats.C).copy()
    sigma0 = _seed(sc, "msd" if kind == "msd" else "emse")
    w2 = np.abs(sc.rotated_w_opt) ** 2
    drive = sc.mu**2 * sc.noise_var
    out = np.empty(iterations)
    h = sigma0.copy()
    g = np.zeros(sc.M)
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(iterations):
            out[i] = w2 @ h + drive * (c @ g)
            h = F @ h
            g = sigma0 + F @ g
    if kind == "mse":
        out = out + sc.noise_var
    return LearningCurve(
        out,
        kind,
        "theory",
        metadata={"basis": sc.whitening.basis, "rotated_w_opt": sc.rotated_w_opt, "rho_F": mats.rho_F},
    )


def _require_stable(sc):
    rho = sc.matrices.rho_F
    if not rho < 1.0:
        raise InstabilityError(f"rho(F) = {rho:.6g} >= 1 at mu = {sc.mu}; no steady state")


def steady_state(sc: FilterScenario, kind="emse"):
    """
    Steady-state EMSE, MSD or MSE: ``mu^2 sigma_v^2 Tr(C G)`` with
    ``diag(G) = (I - F)^-1 sigma``.
    """
    kind = kind.lower()
    if kind not in KINDS:
        raise ValidationError(f"unknown kind {kind!r}")
    _require_stable(sc)
    mats = sc.matrices
    sigma = _seed(sc, "msd" if kind == "msd" else "emse")
    G = np.linalg.solve(np.eye(sc.M) - mats.F, sigma)
    value = sc.mu**2 * sc.noise_var * float(np.diag(mats.C) @ G)
    if kind == "mse":
        value += sc.noise_var
    return value


def tracking_emse(sc: FilterScenario):
    """
    Steady-state EMSE with a random-walk plant:
    ``mu^2 sigma_v^2 Tr(C G) + Tr(R_q' G_q)``, ``diag(G_q) = F (I - F)^-1 lambda``,
    where ``R_q'`` is the walk covariance in the eigenbasis.
    """
    _require_stable(sc)
    mats = sc.matrices
    lam = np.array(sc.spectrum.values)
    G = np.linalg.solve(np.eye(sc.M) - mats.F, lam)
    noise_part = sc.mu**2 * sc.noise_var * float(np.diag(mats.C) @ G)
    if sc.walk_cov is None:
        return noise_part
    Gq = mats.F @ G
    Rq_rot = sc.whitening.rotate_covariance(sc.walk_cov)
    walk_part = float(np.real(np.diag(Rq_rot)) @ Gq)
    return noise_part + walk_part


def stability(sc: FilterScenario) -> StabilityReport:
    """Mean and mean-square step-size bounds plus ``rho(F)`` at the scenario's step size."""
    mats = sc.matrices
    a = np.diag(mats.A)
    mean_bound = 2.0 / float(np.max(a / 2.0))
    eig = np.linalg.eigvals(mats.B / a[:, None])
    meansq_bound = 1.0 / float(np.max(eig.real))
    return StabilityReport(mean_bound, meansq_bound, mats.rho_F, sc.mu)
