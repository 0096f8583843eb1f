"""Validated matrix representations and exact conversions among them.

A multivariate Gaussian system can be described interchangeably by its
covariance matrix C, its precision matrix Omega = C^-1, its marginal
(Pearson) correlation matrix P, or its partial correlation graph R.  The
graph form splits the precision into a diagonal scale and a coupling
pattern,

    Omega = Lambda (1 - R) Lambda,      Lambda = diag(sqrt(omega_ii)),

so that r_ij = -omega_ij / sqrt(omega_ii omega_jj) measures the direct
coupling of nodes i and j with everything else held fixed, while

    rho_ij = [(1 - R)^-1]_ij / sqrt([(1 - R)^-1]_ii [(1 - R)^-1]_jj)

recovers the marginal correlation.  The last identity is the
matrix-inversion oracle: every path-sum expansion elsewhere in this
package is tested against it.

All types are frozen dataclasses holding read-only arrays; every
operation is a pure function, so values can be shared freely across
threads.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    EntryOutOfRange,
    IllConditionedWarning,
    IndexOutOfRange,
    MissingScale,
    NotPositiveDefinite,
    NotSquare,
    NotSymmetric,
    ParamOutOfBound,
    SingularMatrix,
)

# Default tolerances.  Symmetry is judged relative to the largest entry
# magnitude, positive definiteness relative to the largest eigenvalue.
TOL_SYM = 1e-9
TOL_PD = 1e-12

# Condition number of (1 - R) beyond which oracle results are flagged.
COND_WARN = 1e8

__all__ = [
    "TOL_SYM",
    "TOL_PD",
    "COND_WARN",
    "CovarianceMatrix",
    "PrecisionMatrix",
    "MarginalCorrelationMatrix",
    "PartialCorrelationGraph",
    "SpectralReport",
    "validate_covariance",
    "validate_precision",
    "validate_marginal",
    "validate_partial_graph",
    "cov_to_marginal",
    "cov_to_precision",
    "precision_to_cov",
    "precision_to_partial",
    "partial_to_precision",
    "partial_to_marginal_oracle",
    "spectral_report",
]


def _as_square(raw) -> np.ndarray:
    m = np.asarray(raw, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise NotSquare(f"expected a square matrix, got shape {m.shape}")
    return m


def _symmetrize(m: np.ndarray, tol_sym: float, what: str) -> np.ndarray:
    """Average m with its transpose; reject asymmetry beyond tol_sym.

    The tolerance is relative to the largest entry magnitude (absolute
    for the zero matrix).
    """
    asym = float(np.max(np.abs(m - m.T)))
    scale = float(np.max(np.abs(m)))
    rel = asym / scale if scale > 0.0 else asym
    if rel > tol_sym:
        raise NotSymmetric(
            f"{what} asymmetric: relative asymmetry {rel:.3e} exceeds {tol_sym:.3e}"
        )
    return (m + m.T) / 2.0


def _check_pd(m: np.ndarray, tol_pd: float, what: str) -> None:
    w = np.linalg.eigvalsh(m)
    lo, hi = float(w[0]), float(w[-1])
    if hi <= 0.0 or lo <= tol_pd * hi:
        raise NotPositiveDefinite(
            f"{what} not positive definite: eigenvalue range [{lo:.6e}, {hi:.6e}]"
        )


def _freeze(m: np.ndarray) -> np.ndarray:
    out = np.array(m, dtype=float, copy=True)
    out.setflags(write=False)
    return out


def _coerce_labels(labels, dim: int):
    if labels is None:
        return None
    labels = tuple(str(x) for x in labels)
    if len(labels) != dim:
        raise IndexOutOfRange(
            f"got {len(labels)} labels for a {dim}-node system"
        )
    if len(set(labels)) != len(labels):
        raise IndexOutOfRange("node labels must be unique")
    return labels


def default_labels(dim: int) -> tuple:
    """Generated node names x1..xd, used when no labels are attached."""
    return tuple(f"x{k + 1}" for k in range(dim))


@dataclass(frozen=True)
class CovarianceMatrix:
    """Symmetric positive-definite covariance matrix.

    Construct through :func:`validate_covariance`; direct construction
    re-runs the same checks.
    """

    entries: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        m = _as_square(self.entries)
        m = _symmetrize(m, TOL_SYM, "covariance matrix")
        _check_pd(m, TOL_PD, "covariance matrix")
        object.__setattr__(self, "entries", _freeze(m))
        object.__setattr__(self, "labels", _coerce_labels(self.labels, m.shape[0]))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class PrecisionMatrix:
    """Symmetric positive-definite precision (inverse covariance) matrix."""

    entries: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        m = _as_square(self.entries)
        m = _symmetrize(m, TOL_SYM, "precision matrix")
        _check_pd(m, TOL_PD, "precision matrix")
        object.__setattr__(self, "entries", _freeze(m))
        object.__setattr__(self, "labels", _coerce_labels(self.labels, m.shape[0]))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class MarginalCorrelationMatrix:
    """Marginal (Pearson) correlation matrix: unit diagonal, PSD."""

    entries: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        m = _as_square(self.entries)
        m = _symmetrize(m, TOL_SYM, "correlation matrix")
        d = np.diag(m)
        if np.max(np.abs(d - 1.0)) > TOL_SYM:
            raise EntryOutOfRange("correlation matrix diagonal must be 1")
        off = m - np.diag(d)
        if np.max(np.abs(off)) > 1.0:
            raise EntryOutOfRange(
                "correlation magnitudes cannot exceed 1"
            )
        m = m.copy()
        np.fill_diagonal(m, 1.0)
        # Semi-definiteness only: perfectly correlated pairs are legal.
        w = np.linalg.eigvalsh(m)
        if float(w[0]) < -TOL_PD * max(float(w[-1]), 1.0):
            raise NotPositiveDefinite(
                f"correlation matrix has eigenvalue {float(w[0]):.6e} < 0"
            )
        object.__setattr__(self, "entries", _freeze(m))
        object.__setattr__(self, "labels", _coerce_labels(self.labels, m.shape[0]))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class PartialCorrelationGraph:
    """Partial correlation graph: couplings R with (1 - R) positive definite.

    Parameters
    ----------
    weights : array
        Symmetric matrix R with zero diagonal; entry r_ij is the partial
        correlation of nodes i and j.  Off-diagonal magnitudes must stay
        below 1 and (1 - R) must be positive definite.  Note that the
        latter does not bound the spectral radius of R away from 1: the
        most negative eigenvalue of R may be -1 or below, in which case
        path series on the graph require rescaling before truncation.
    scale : array, optional
        Node scales lambda_i = sqrt(omega_ii) of the underlying
        precision matrix.  Kept so precision round-trips are exact;
        graphs built from R alone carry no scale and cannot be turned
        back into a precision matrix.
    labels : sequence of str, optional
        Node names, unique.  Generated as x1..xd when absent.
    """

    weights: np.ndarray
    scale: np.ndarray | None = None
    labels: tuple | None = None

    def __post_init__(self):
        m = _as_square(self.weights)
        m = _symmetrize(m, TOL_SYM, "partial correlation matrix")
        d = np.diag(m)
        if np.max(np.abs(d)) > TOL_SYM:
            raise EntryOutOfRange("partial correlation diagonal must be 0")
        m = m.copy()
        np.fill_diagonal(m, 0.0)
        if np.max(np.abs(m)) >= 1.0:
            raise EntryOutOfRange(
                "partial correlation magnitudes must be below 1"
            )
        _check_pd(np.eye(m.shape[0]) - m, TOL_PD, "(1 - R)")
        object.__setattr__(self, "weights", _freeze(m))
        if self.scale is not None:
            s = np.asarray(self.scale, dtype=float).reshape(-1)
            if s.shape[0] != m.shape[0]:
                raise IndexOutOfRange(
                    f"scale vector has length {s.shape[0]}, expected {m.shape[0]}"
                )
            if np.any(s <= 0.0) or not np.all(np.isfinite(s)):
                raise ParamOutOfBound("scale entries must be finite and positive")
            object.__setattr__(self, "scale", _freeze(s))
        object.__setattr__(self, "labels", _coerce_labels(self.labels, m.shape[0]))

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    @property
    def node_labels(self) -> tuple:
        """Attached labels, or generated x1..xd."""
        return self.labels if self.labels is not None else default_labels(self.dim)

    def label_index(self, label: str) -> int:
        try:
            return self.node_labels.index(str(label))
        except ValueError:
            raise IndexOutOfRange(f"unknown node label {label!r}") from None


@dataclass(frozen=True)
class SpectralReport:
    """Spectral radii of R and of |R|, with the implied summation regime.

    regime is one of:

    - ``"absolute"``: nu(|R|) < 1, every path series converges absolutely
      and may be summed in any order;
    - ``"conditional"``: nu(R) < 1 <= nu(|R|), series converge only when
      paths are grouped by length, in ascending order;
    - ``"rescale-required"``: nu(R) >= 1, truncated series diverge and
      the graph must be rescaled before expansion.
    """

    nu_R: float
    nu_R_plus: float
    regime: str


def validate_covariance(raw, tol_sym: float = TOL_SYM, tol_pd: float = TOL_PD) -> CovarianceMatrix:
    """Validate a raw square array as a covariance matrix.

    Asymmetry up to ``tol_sym`` (relative to the largest entry) is
    repaired by averaging with the transpose; anything larger raises
    :class:`NotSymmetric`.  Positive definiteness requires the smallest
    eigenvalue to exceed ``tol_pd`` times the largest.
    """
    m = _as_square(raw)
    m = _symmetrize(m, tol_sym, "covariance matrix")
    _check_pd(m, tol_pd, "covariance matrix")
    return CovarianceMatrix(m)


def validate_precision(raw, tol_sym: float = TOL_SYM, tol_pd: float = TOL_PD) -> PrecisionMatrix:
    """Validate a raw square array as a precision matrix."""
    m = _as_square(raw)
    m = _symmetrize(m, tol_sym, "precision matrix")
    _check_pd(m, tol_pd, "precision matrix")
    return PrecisionMatrix(m)


def validate_marginal(raw, labels=None) -> MarginalCorrelationMatrix:
    """Validate a raw square array as a marginal correlation matrix."""
    return MarginalCorrelationMatrix(np.asarray(raw, dtype=float), labels=labels)


def validate_partial_graph(raw, scale=None, labels=None) -> PartialCorrelationGraph:
    """Validate a raw square array as a partial correlation graph."""
    return PartialCorrelationGraph(np.asarray(raw, dtype=float), scale=scale, labels=labels)


def cov_to_marginal(C: CovarianceMatrix) -> MarginalCorrelationMatrix:
    """Marginal correlations rho_ij = c_ij / sqrt(c_ii c_jj)."""
    if not isinstance(C, CovarianceMatrix):
        C = validate_covariance(C)
    c = C.entries
    s = np.sqrt(np.diag(c))
    p = c / np.outer(s, s)
    np.fill_diagonal(p, 1.0)
    return MarginalCorrelationMatrix(p, labels=C.labels)


def cov_to_precision(C: CovarianceMatrix) -> PrecisionMatrix:
    """Precision matrix Omega = C^-1 via a Cholesky solve."""
    if not isinstance(C, CovarianceMatrix):
        C = validate_covariance(C)
    try:
        cf = scipy.linalg.cho_factor(C.entries, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise SingularMatrix(f"covariance matrix is singular: {exc}") from exc
    omega = scipy.linalg.cho_solve(cf, np.eye(C.dim))
    return PrecisionMatrix((omega + omega.T) / 2.0, labels=C.labels)


def precision_to_cov(Omega: PrecisionMatrix) -> CovarianceMatrix:
    """Covariance matrix C = Omega^-1 via a Cholesky solve."""
    if not isinstance(Omega, PrecisionMatrix):
        Omega = validate_precision(Omega)
    try:
        cf = scipy.linalg.cho_factor(Omega.entries, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise SingularMatrix(f"precision matrix is singular: {exc}") from exc
    c = scipy.linalg.cho_solve(cf, np.eye(Omega.dim))
    return CovarianceMatrix((c + c.T) / 2.0, labels=Omega.labels)


def precision_to_partial(Omega: PrecisionMatrix) -> PartialCorrelationGraph:
    """Split a precision matrix into scales and a coupling graph.

    r_ij = -omega_ij / sqrt(omega_ii omega_jj) off the diagonal, zero on
    it; the scale vector sqrt(omega_ii) is stored on the graph so
    :func:`partial_to_precision` can reassemble Omega exactly.
    """
    if not isinstance(Omega, PrecisionMatrix):
        Omega = validate_precision(Omega)
    om = Omega.entries
    lam = np.sqrt(np.diag(om))
    r = -om / np.outer(lam, lam)
    np.fill_diagonal(r, 0.0)
    return PartialCorrelationGraph(r, scale=lam, labels=Omega.labels)


def partial_to_precision(g: PartialCorrelationGraph) -> PrecisionMatrix:
    """Reassemble Omega = Lambda (1 - R) Lambda from a scaled graph."""
    if g.scale is None:
        raise MissingScale(
            "graph carries no node scales; it cannot define a precision matrix"
        )
    lam = g.scale
    m = np.eye(g.dim) - g.weights
    omega = np.outer(lam, lam) * m
    return PrecisionMatrix(omega, labels=g.labels)


def partial_to_marginal_oracle(g: PartialCorrelationGraph) -> MarginalCorrelationMatrix:
    """Exact marginal correlations by inversion of (1 - R).

    This is the reference every path expansion is compared against:

        rho_ij = [(1-R)^-1]_ij / sqrt([(1-R)^-1]_ii [(1-R)^-1]_jj).

    The inverse is taken through a Cholesky solve of (1 - R); the
    node scales drop out, so unscaled graphs are fine.  When the
    condition number of (1 - R) exceeds ``COND_WARN`` an
    :class:`IllConditionedWarning` reports it alongside the result.
    """
    m = np.eye(g.dim) - g.weights
    w = np.linalg.eigvalsh(m)
    if float(w[0]) > 0.0:
        cond = float(w[-1]) / float(w[0])
        if cond > COND_WARN:
            warnings.warn(
                f"(1 - R) has condition number {cond:.3e}; "
                "oracle correlations may lose accuracy",
                IllConditionedWarning,
                stacklevel=2,
            )
    try:
        cf = scipy.linalg.cho_factor(m, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise SingularMatrix(f"(1 - R) is singular: {exc}") from exc
    minv = scipy.linalg.cho_solve(cf, np.eye(g.dim))
    s = np.sqrt(np.diag(minv))
    p = minv / np.outer(s, s)
    p = (p + p.T) / 2.0
    np.fill_diagonal(p, 1.0)
    return MarginalCorrelationMatrix(p, labels=g.labels)


def spectral_report(g: PartialCorrelationGraph) -> SpectralReport:
    """Spectral radii nu(R), nu(|R|) and the summation regime."""
    r = g.weights
    nu = float(np.max(np.abs(np.linalg.eigvalsh(r))))
    r_plus = np.abs(r)
    nu_plus = float(np.max(np.abs(np.linalg.eigvalsh(r_plus))))
    # Equal-matrix case aside, tiny eigensolver noise can leave
    # nu_plus a few ulp under nu although nu <= nu_plus holds exactly.
    nu_plus = max(nu_plus, nu)
    if nu >= 1.0:
        regime = "rescale-required"
    elif nu_plus >= 1.0:
        regime = "conditional"
    else:
        regime = "absolute"
    return SpectralReport(nu_R=nu, nu_R_plus=nu_plus, regime=regime)
