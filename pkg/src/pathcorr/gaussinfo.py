"""Gaussian conditional mutual information from the coupling graph.

For a Gaussian system split into disjoint node sets A, B and the
remainder Z, the conditional mutual information I(A; B | Z) is a log
determinant built from blocks of the coupling matrix R:

    T = R_AB (1 - R_BB)^-1 R_BA (1 - R_AA)^-1,
    I(A; B | Z) = -1/2 ln det(1 - T).

Conditioning on Z never appears explicitly: partial correlations
already hold everything else fixed, which is exactly the conditioning
the formula needs.  The same quantity expands into a trace series,

    I = sum_(n>=1) tr(T^n) / (2 n),

whose n-th term collects the closed paths that alternate n times
between A and B; the series converges whenever the spectral radius of
T is below 1, which every positive-definite system satisfies.  A
rescaled variant sums the series of T(q) = (1 - q) 1 + q T and adds
(d_A / 2) ln q, using that 1 - T(q) = q (1 - T).

Everything here interprets its input as a Gaussian density; the
information is returned in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    IndexOutOfRange,
    PathcorrError,
    QOutOfRange,
    SingularBlock,
    SpectralRadiusTooLarge,
)
from .matrices import PartialCorrelationGraph, PrecisionMatrix, precision_to_partial
from .pathsum import star_path_sum_closed

# Trace series defaults: hard cap on the number of terms, and the size
# below which a term ends the summation early.
N_MAX_DEFAULT = 1000
TERM_FLOOR = 1e-14

# The most negative value numerical roundoff may drive a mutual
# information to; anything lower signals an inconsistent input.
NEG_FLOOR = -1e-12

__all__ = [
    "N_MAX_DEFAULT",
    "TERM_FLOOR",
    "TriPartition",
    "InfoResult",
    "conditional_mi_closed",
    "conditional_mi_series",
    "loop_sum_mi_identity",
]


@dataclass(frozen=True)
class TriPartition:
    """Disjoint node sets A, B, Z covering a system; Z may be empty.

    Build with explicit sets, or through :meth:`complement`, which
    fills Z with every node outside A and B.
    """

    dim: int
    A: tuple
    B: tuple
    Z: tuple = ()

    def __post_init__(self):
        a = sorted(int(v) for v in self.A)
        b = sorted(int(v) for v in self.B)
        z = sorted(int(v) for v in self.Z)
        for v in a + b + z:
            if not 0 <= v < self.dim:
                raise IndexOutOfRange(f"node {v} outside 0..{self.dim - 1}")
        if not a or not b:
            raise IndexOutOfRange("A and B must both be nonempty")
        sa, sb, sz = set(a), set(b), set(z)
        if len(sa) != len(a) or len(sb) != len(b) or len(sz) != len(z):
            raise IndexOutOfRange("a node repeats within a part")
        if sa & sb or sa & sz or sb & sz:
            raise IndexOutOfRange("A, B, Z must be disjoint")
        if sa | sb | sz != set(range(self.dim)):
            raise IndexOutOfRange(
                "A, B, Z together must cover every node; "
                "use TriPartition.complement to fill Z"
            )
        object.__setattr__(self, "A", tuple(a))
        object.__setattr__(self, "B", tuple(b))
        object.__setattr__(self, "Z", tuple(z))

    @classmethod
    def complement(cls, dim: int, A, B) -> "TriPartition":
        a = {int(v) for v in A}
        b = {int(v) for v in B}
        z = set(range(dim)) - a - b
        return cls(dim=dim, A=tuple(a), B=tuple(b), Z=tuple(z))


@dataclass(frozen=True)
class InfoResult:
    """A conditional mutual information value, in nats.

    ``method`` records the route ("closed" or "trace-series");
    ``series_terms`` holds the per-order contributions tr(T^n)/(2n)
    when the series route produced the value (the q-offset, if any, is
    not part of the terms).
    """

    nats: float
    method: str
    series_terms: tuple | None = None

    def __post_init__(self):
        if self.nats < NEG_FLOOR:
            raise PathcorrError(
                f"mutual information came out {self.nats:.3e} < 0; "
                "the input system is not consistently positive definite"
            )


def _coupling_weights(system) -> np.ndarray:
    if isinstance(system, PartialCorrelationGraph):
        return system.weights
    if isinstance(system, PrecisionMatrix):
        return precision_to_partial(system).weights
    raise TypeError(
        "expected a PartialCorrelationGraph or PrecisionMatrix, "
        f"got {type(system).__name__}"
    )


def _logdet_spd(m: np.ndarray, what: str) -> float:
    try:
        cf, _ = scipy.linalg.cho_factor(m, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise SingularBlock(f"{what} is singular or indefinite: {exc}") from exc
    return 2.0 * float(np.sum(np.log(np.diag(cf))))


def _blocks(system, part: TriPartition) -> tuple:
    """(M_A, X) with M_A = 1 - R_AA and X = R_AB (1 - R_BB)^-1 R_BA."""
    r = _coupling_weights(system)
    if r.shape[0] != part.dim:
        raise IndexOutOfRange(
            f"partition is over {part.dim} nodes, system has {r.shape[0]}"
        )
    a = list(part.A)
    b = list(part.B)
    m_a = np.eye(len(a)) - r[np.ix_(a, a)]
    m_b = np.eye(len(b)) - r[np.ix_(b, b)]
    r_ab = r[np.ix_(a, b)]
    try:
        cf_b = scipy.linalg.cho_factor(m_b, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise SingularBlock(f"1 - R[B, B] is singular or indefinite: {exc}") from exc
    x = r_ab @ scipy.linalg.cho_solve(cf_b, r_ab.T)
    x = (x + x.T) / 2.0
    return m_a, x


def conditional_mi_closed(system, part: TriPartition) -> InfoResult:
    """I(A; B | Z) by the closed determinant form.

    Evaluated as 1/2 [ln det(1 - R_AA) - ln det(1 - R_AA - X)] with
    X = R_AB (1 - R_BB)^-1 R_BA, both determinants through Cholesky
    factors; this equals -1/2 ln det(1 - T) without ever forming the
    nonsymmetric T.  Accepts a coupling graph or a precision matrix.
    """
    m_a, x = _blocks(system, part)
    nats = 0.5 * (
        _logdet_spd(m_a, "1 - R[A, A]")
        - _logdet_spd(m_a - x, "the conditional covariance block")
    )
    return InfoResult(nats=nats, method="closed")


def conditional_mi_series(
    system,
    part: TriPartition,
    n_max: int = N_MAX_DEFAULT,
    q: float | None = None,
) -> InfoResult:
    """I(A; B | Z) by the trace series of T, truncated at n_max terms.

    Terms are added in ascending order n = 1, 2, ... and the sum stops
    early once a term drops below ``TERM_FLOOR`` in magnitude.  With a
    rescaling parameter q the series runs over T(q) = (1 - q) 1 + q T
    and the exact offset (d_A / 2) ln q is added; q must lie in
    (0, 2 / (1 + nu(T))).  Without q, a spectral radius of T at or
    above 1 raises :class:`SpectralRadiusTooLarge` (a valid
    positive-definite system never reaches it).
    """
    m_a, x = _blocks(system, part)
    d_a = m_a.shape[0]
    # Generalized symmetric eigenproblem X v = nu M_A v gives the
    # spectrum of T = X (M_A)^-1 without forming it.
    nu = float(np.max(np.abs(scipy.linalg.eigh(x, m_a, eigvals_only=True))))
    try:
        cf_a = scipy.linalg.cho_factor(m_a, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise SingularBlock(f"1 - R[A, A] is singular or indefinite: {exc}") from exc
    t = scipy.linalg.cho_solve(cf_a, x)
    offset = 0.0
    if q is not None:
        q = float(q)
        bound = 2.0 / (1.0 + nu)
        if not (0.0 < q < bound):
            raise QOutOfRange(
                f"q={q:.6g} outside the admissible interval (0, {bound:.6g})"
            )
        t = (1.0 - q) * np.eye(d_a) + q * t
        offset = 0.5 * d_a * math.log(q)
    elif nu >= 1.0:
        raise SpectralRadiusTooLarge(
            f"spectral radius of T is {nu:.6g} >= 1; rescale with q or "
            "use the closed form"
        )
    if n_max < 1:
        raise QOutOfRange(f"n_max must be at least 1, got {n_max}")
    terms = []
    total = 0.0
    power = t.copy()
    for n in range(1, n_max + 1):
        term = float(np.trace(power)) / (2.0 * n)
        terms.append(term)
        total += term
        if abs(term) < TERM_FLOOR:
            break
        if n < n_max:
            power = power @ t
    return InfoResult(
        nats=offset + total, method="trace-series", series_terms=tuple(terms)
    )


def loop_sum_mi_identity(system, i: int, j: int) -> tuple:
    """Closed loop sum at i avoiding j, and the information it encodes.

    Returns the pair (loop_sum, mi) with mi = I(X_i; rest | X_j), the
    conditional mutual information between node i and all nodes other
    than i and j, given j.  The two are locked together:

        loop_sum = 1 - exp(-2 mi),

    and the function checks that identity to 1e-10 before returning.
    Needs at least three nodes, else there is no "rest" to talk to.
    """
    r = _coupling_weights(system)
    dim = r.shape[0]
    i, j = int(i), int(j)
    if not (0 <= i < dim and 0 <= j < dim) or i == j:
        raise IndexOutOfRange(f"need two distinct nodes in 0..{dim - 1}")
    if dim < 3:
        raise IndexOutOfRange("identity needs at least 3 nodes")
    if isinstance(system, PrecisionMatrix):
        system = precision_to_partial(system)
    loop = star_path_sum_closed(system, i, i, avoid=(j,))
    rest = tuple(v for v in range(dim) if v not in (i, j))
    part = TriPartition(dim=dim, A=(i,), B=rest, Z=(j,))
    mi = conditional_mi_closed(system, part).nats
    residual = abs(loop - (1.0 - math.exp(-2.0 * mi)))
    if residual > 1e-10:
        raise PathcorrError(
            f"loop sum and information disagree by {residual:.3e}; "
            "the system is numerically inconsistent"
        )
    return float(loop), float(mi)
