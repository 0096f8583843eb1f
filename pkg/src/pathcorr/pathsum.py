"""Path families on the coupling graph and their weight sums.

A path is a walk i -> k -> ... -> j along nonzero couplings; its weight
is the product of the traversed entries, and vertices and edges may be
revisited.  Summing weights over constrained families of walks expands
the marginal correlation:

    rho_ij = (sum over ij*-paths) /
             sqrt((1 - closed loops at i avoiding j)
                  (1 - closed loops at j avoiding i)),

where an ij*-path visits its endpoints exclusively at the endpoints, and
a closed loop at i returns to i without touching i in between and
without touching j at all.  Truncating all three sums at a common
maximum length L gives a converging estimate rho_hat(L); replacing them
by their exact geometric limits (restricted block inverses) reproduces
the matrix-inversion oracle.

Truncated series are summed length by length, in ascending order.  That
ordering is mandatory: when couplings carry mixed signs the series may
converge only conditionally, and only the length-grouped order is
guaranteed to approach the oracle value.  When the spectral radius of R
reaches 1 the plain series diverges; the graph must then be rescaled,

    R(q) = (1 - q) 1 + q R,       0 < q < 2 / (1 + nu(R)),

which adds a self-loop of weight (1 - q) to every vertex, scales every
edge by q, and leaves the expanded correlations unchanged because
q (1 - R(q))^-1 = (1 - R)^-1 for every admissible q.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
import scipy.linalg

from .errors import (
    DenominatorNonPositive,
    IndexOutOfRange,
    ParamOutOfBound,
    QOutOfRange,
    SingularRestrictedBlock,
)
from .matrices import PartialCorrelationGraph, partial_to_marginal_oracle

# A truncated loop sum this close to 1 (or beyond) makes the
# denominator square root meaningless.
DENOM_GUARD = 1e-12

# Default fraction of the admissible upper bound used when rescaling
# without an explicit q; the bound should be approached, not hit.
Q_DEFAULT_FRACTION = 0.95

__all__ = [
    "PathQuery",
    "Path",
    "PathSumResult",
    "RescaledGraph",
    "ProfilePoint",
    "enumerate_paths",
    "path_sum_truncated",
    "star_path_sum_truncated",
    "star_path_sum_closed",
    "marginal_corr_expansion",
    "marginal_corr_closed",
    "rescale",
    "convergence_profile",
]


@dataclass(frozen=True)
class PathQuery:
    """Constraints of a path family.

    ``interior_forbidden`` lists nodes that may not occur strictly
    between the endpoints; ``interior_allowed``, when given, restricts
    interior nodes to that set.  Both constraints apply to interior
    positions only: the endpoints themselves are always exempt, so a
    query with ``source`` in the forbidden set still starts there.
    ``allow_self_loops`` permits steps v -> v; it only matters on
    rescaled graphs, whose vertices carry self-loops of weight 1 - q.
    """

    source: int
    target: int
    max_length: int
    interior_forbidden: frozenset = field(default_factory=frozenset)
    interior_allowed: frozenset | None = None
    allow_self_loops: bool = False

    def __post_init__(self):
        if self.max_length < 1:
            raise ParamOutOfBound(
                f"max_length must be at least 1, got {self.max_length}"
            )
        object.__setattr__(
            self, "interior_forbidden", frozenset(int(v) for v in self.interior_forbidden)
        )
        if self.interior_allowed is not None:
            object.__setattr__(
                self, "interior_allowed", frozenset(int(v) for v in self.interior_allowed)
            )


@dataclass(frozen=True)
class Path:
    """One walk, as its vertex sequence and accumulated weight."""

    vertices: tuple
    weight: float

    @property
    def length(self) -> int:
        """Number of edges traversed."""
        return len(self.vertices) - 1


@dataclass(frozen=True)
class PathSumResult:
    """Weight sums of a path family, truncated at a maximum length.

    ``per_length[l]`` is the summed weight of the family's paths of
    exactly l edges, for l = 1..truncation_length; ``cumulative[l]`` the
    running total through length l.  ``converged_estimate`` carries the
    closed-form limit when the caller computed one.
    """

    per_length: dict
    cumulative: dict
    truncation_length: int
    converged_estimate: float | None = None

    @property
    def total(self) -> float:
        """Cumulative sum at the truncation length."""
        return self.cumulative[self.truncation_length]


@dataclass(frozen=True)
class RescaledGraph:
    """A coupling graph with edge weights q r_ij and self-loops 1 - q.

    Admissible q lie strictly between 0 and 2 / (1 + nu(R)); within
    that range the rescaled graph's spectral radius is below 1, so
    truncated expansions on it converge even when the base graph's do
    not.  q = 1 reproduces the base graph unchanged.  Note the bound
    exceeds 1 whenever nu(R) < 1, so q itself may exceed 1, making the
    self-loop weight negative; that is harmless.
    """

    base: PartialCorrelationGraph
    q: float

    def __post_init__(self):
        q = float(self.q)
        nu = float(np.max(np.abs(np.linalg.eigvalsh(self.base.weights))))
        bound = 2.0 / (1.0 + nu)
        if not (0.0 < q < bound):
            raise QOutOfRange(
                f"q={q:.6g} outside the admissible interval (0, {bound:.6g})"
            )
        object.__setattr__(self, "q", q)

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def weights(self) -> np.ndarray:
        """Dense effective weights (1 - q) 1 + q R."""
        w = self.q * self.base.weights
        w = w + (1.0 - self.q) * np.eye(self.base.dim)
        return w

    @property
    def node_labels(self) -> tuple:
        return self.base.node_labels


@dataclass(frozen=True)
class ProfilePoint:
    """One row of a convergence profile."""

    L: int
    rho_hat: float
    abs_gap: float


def _weights_of(g) -> np.ndarray:
    if isinstance(g, RescaledGraph):
        return g.weights
    return g.weights


def _has_self_loops(g) -> bool:
    return isinstance(g, RescaledGraph)


def _base_graph(g) -> PartialCorrelationGraph:
    return g.base if isinstance(g, RescaledGraph) else g


def _check_node(v: int, dim: int, name: str) -> int:
    v = int(v)
    if not 0 <= v < dim:
        raise IndexOutOfRange(f"{name}={v} outside 0..{dim - 1}")
    return v


def _interior_indices(dim: int, endpoints, avoid, within) -> np.ndarray:
    """Sorted indices allowed strictly inside a path."""
    keep = np.ones(dim, dtype=bool)
    if within is not None:
        keep[:] = False
        for v in within:
            keep[_check_node(v, dim, "interior node")] = True
    for v in endpoints:
        keep[v] = False
    for v in avoid:
        keep[_check_node(v, dim, "avoided node")] = False
    return np.nonzero(keep)[0]


def enumerate_paths(g, query: PathQuery) -> Iterator[Path]:
    """Generate every path of a family, shortest first.

    Paths are emitted grouped by length in ascending order and, within
    one length, in lexicographic order of their vertex sequences; the
    stream is therefore deterministic.  Vertices and edges may repeat.
    An empty stream means the family has no members.

    The number of walks grows exponentially with length; use this for
    inspection and cross-checks, and the sum operations for numbers.
    """
    w = _weights_of(g)
    dim = w.shape[0]
    src = _check_node(query.source, dim, "source")
    tgt = _check_node(query.target, dim, "target")
    for v in query.interior_forbidden:
        _check_node(v, dim, "forbidden node")
    if query.interior_allowed is not None:
        for v in query.interior_allowed:
            _check_node(v, dim, "allowed node")

    ok_interior = np.ones(dim, dtype=bool)
    if query.interior_allowed is not None:
        ok_interior[:] = False
        ok_interior[list(query.interior_allowed)] = True
    if query.interior_forbidden:
        ok_interior[list(query.interior_forbidden)] = False

    neighbors = []
    for v in range(dim):
        nbr = np.nonzero(w[v] != 0.0)[0]
        if not query.allow_self_loops:
            nbr = nbr[nbr != v]
        neighbors.append(nbr)

    def walk(prefix: tuple, weight: float, steps_left: int):
        last = prefix[-1]
        if steps_left == 1:
            # Final hop: the target is exempt from interior constraints.
            if last == tgt and not query.allow_self_loops:
                return
            edge = w[last, tgt]
            if edge != 0.0:
                yield Path(prefix + (tgt,), weight * edge)
            return
        for u in neighbors[last]:
            if ok_interior[u]:
                yield from walk(prefix + (int(u),), weight * w[last, u], steps_left - 1)

    for length in range(1, query.max_length + 1):
        yield from walk((src,), 1.0, length)


def _per_length_restricted(
    w: np.ndarray, i: int, j: int, L: int, interior: np.ndarray, self_loops: bool
) -> np.ndarray:
    """Per-length sums of paths i -> j whose interiors lie in `interior`.

    interior must exclude i and j.  Entry [l-1] is the length-l sum.
    Matrix-free: the l-th term is W[i, K] W_K^(l-2) W[K, j], built by
    repeated vector-matrix products.
    """
    per = np.zeros(L)
    if i != j:
        per[0] = w[i, j]
    elif self_loops:
        per[0] = w[i, i]
    if L == 1 or interior.size == 0:
        return per
    wk = w[np.ix_(interior, interior)].copy()
    if not self_loops:
        np.fill_diagonal(wk, 0.0)
    head = w[i, interior].copy()
    tail = w[interior, j]
    per[1] = head @ tail
    for ell in range(3, L + 1):
        head = head @ wk
        per[ell - 1] = head @ tail
    return per


def _per_length_full(w: np.ndarray, i: int, j: int, L: int, self_loops: bool) -> np.ndarray:
    """Per-length sums of unrestricted paths i -> j: entry [l-1] = (W^l)_ij."""
    wf = w
    if not self_loops:
        wf = w.copy()
        np.fill_diagonal(wf, 0.0)
    per = np.zeros(L)
    row = wf[i].copy()
    per[0] = row[j]
    for ell in range(2, L + 1):
        row = row @ wf
        per[ell - 1] = row[j]
    return per


def _result_from_per_length(per: np.ndarray, closed: float | None = None) -> PathSumResult:
    cum = np.cumsum(per)
    L = per.shape[0]
    return PathSumResult(
        per_length={ell: float(per[ell - 1]) for ell in range(1, L + 1)},
        cumulative={ell: float(cum[ell - 1]) for ell in range(1, L + 1)},
        truncation_length=L,
        converged_estimate=closed,
    )


def path_sum_truncated(g, i: int, j: int, L: int) -> PathSumResult:
    """Sum of all i -> j path weights per length, no interior constraint.

    The length-l term is simply (W^l)_ij, so the cumulative sums are the
    partial Neumann series of (1 - W)^-1 - 1.
    """
    w = _weights_of(g)
    dim = w.shape[0]
    i = _check_node(i, dim, "i")
    j = _check_node(j, dim, "j")
    if L < 1:
        raise ParamOutOfBound(f"truncation length must be at least 1, got {L}")
    per = _per_length_full(w, i, j, L, _has_self_loops(g))
    return _result_from_per_length(per)


def star_path_sum_truncated(
    g, i: int, j: int, L: int, avoid=(), within=None
) -> PathSumResult:
    """Truncated weight sum of a star-path family.

    For i != j this is the ij*-family: paths whose endpoints occur only
    at the endpoints (interiors exclude both i and j), further excluding
    ``avoid`` and, when ``within`` is given, restricted to interiors in
    that set.  For i == j it is the closed-loop family at i: walks
    returning to i without touching i in between; pass ``avoid=(j,)``
    to exclude a node entirely, or ``within=S`` to confine the loop to a
    subnetwork.

    On rescaled graphs the self-loops participate: the single-step loop
    i -> i of weight 1 - q is a closed path of length 1, and interior
    vertices may linger via their own self-loops.
    """
    w = _weights_of(g)
    dim = w.shape[0]
    i = _check_node(i, dim, "i")
    j = _check_node(j, dim, "j")
    if L < 1:
        raise ParamOutOfBound(f"truncation length must be at least 1, got {L}")
    interior = _interior_indices(dim, {i, j}, avoid, within)
    per = _per_length_restricted(w, i, j, L, interior, _has_self_loops(g))
    return _result_from_per_length(per)


def star_path_sum_closed(g, i: int, j: int, avoid=(), within=None) -> float:
    """Exact infinite-sum value of a star-path family.

    The geometric tail over interior vertices K is resummed through the
    restricted block inverse:

        sum = W_ij + W[i, K] (1 - W_K)^-1 W[K, j],

    with K as in :func:`star_path_sum_truncated` (for i == j the first
    term is the self-loop weight, zero on unrescaled graphs).  For a
    valid graph 1 - W_K inherits positive definiteness from 1 - W, so
    the closed value exists even when the truncated series diverges.
    """
    w = _weights_of(g)
    dim = w.shape[0]
    i = _check_node(i, dim, "i")
    j = _check_node(j, dim, "j")
    interior = _interior_indices(dim, {i, j}, avoid, within)
    direct = float(w[i, j]) if i != j else (float(w[i, i]) if _has_self_loops(g) else 0.0)
    if interior.size == 0:
        return direct
    mk = np.eye(interior.size) - w[np.ix_(interior, interior)]
    try:
        cf = scipy.linalg.cho_factor(mk, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise SingularRestrictedBlock(
            f"1 - R restricted to {interior.size} interior nodes is singular: {exc}"
        ) from exc
    tail = scipy.linalg.cho_solve(cf, w[interior, j])
    return direct + float(w[i, interior] @ tail)


def marginal_corr_expansion(g, i: int, j: int, L: int) -> float:
    """Marginal correlation estimate from paths of length at most L.

    Numerator and both loop sums are truncated at the same L.  The
    caller must hand in a rescaled graph when nu(R) >= 1; on such a
    graph the plain truncation has no limit.
    """
    w = _weights_of(g)
    dim = w.shape[0]
    i = _check_node(i, dim, "i")
    j = _check_node(j, dim, "j")
    if i == j:
        raise IndexOutOfRange("marginal correlation needs two distinct nodes")
    if L < 1:
        raise ParamOutOfBound(f"truncation length must be at least 1, got {L}")
    self_loops = _has_self_loops(g)
    interior = _interior_indices(dim, {i, j}, (), None)
    num = float(np.sum(_per_length_restricted(w, i, j, L, interior, self_loops)))
    li = float(np.sum(_per_length_restricted(w, i, i, L, interior, self_loops)))
    lj = float(np.sum(_per_length_restricted(w, j, j, L, interior, self_loops)))
    for name, val in (("i", li), ("j", lj)):
        if val >= 1.0 - DENOM_GUARD:
            raise DenominatorNonPositive(
                f"truncated loop sum at node {name} is {val:.6g} >= 1; "
                "increase L or rescale the graph"
            )
    return num / np.sqrt((1.0 - li) * (1.0 - lj))


def marginal_corr_closed(g, i: int, j: int) -> float:
    """Marginal correlation from exact star and loop sums.

    Evaluates the star-path form with every sum replaced by its
    restricted block inverse limit; agrees with the matrix-inversion
    oracle to within roundoff.
    """
    w = _weights_of(g)
    dim = w.shape[0]
    i = _check_node(i, dim, "i")
    j = _check_node(j, dim, "j")
    if i == j:
        raise IndexOutOfRange("marginal correlation needs two distinct nodes")
    num = star_path_sum_closed(g, i, j)
    li = star_path_sum_closed(g, i, i, avoid=(j,))
    lj = star_path_sum_closed(g, j, j, avoid=(i,))
    den = (1.0 - li) * (1.0 - lj)
    if den <= 0.0:
        raise DenominatorNonPositive(
            f"closed loop sums {li:.6g}, {lj:.6g} leave no positive denominator"
        )
    return num / np.sqrt(den)


def rescale(g: PartialCorrelationGraph, q: float | None = None) -> RescaledGraph:
    """Rescaled graph with edges q r_ij and self-loops 1 - q.

    With q omitted, 0.95 of the admissible upper bound 2 / (1 + nu(R))
    is used; values must lie strictly inside (0, bound).  Expanded
    correlations are independent of the choice.
    """
    base = _base_graph(g)
    if q is None:
        nu = float(np.max(np.abs(np.linalg.eigvalsh(base.weights))))
        q = Q_DEFAULT_FRACTION * 2.0 / (1.0 + nu)
    return RescaledGraph(base=base, q=float(q))


def convergence_profile(g, i: int, j: int, L_max: int) -> tuple:
    """Truncated estimates rho_hat(L) for L = 1..L_max with oracle gaps.

    Per-length sums are accumulated once, so the whole profile costs as
    much as the single longest truncation.  The gap column compares
    against the matrix-inversion oracle of the (base) graph.
    """
    w = _weights_of(g)
    dim = w.shape[0]
    i = _check_node(i, dim, "i")
    j = _check_node(j, dim, "j")
    if i == j:
        raise IndexOutOfRange("marginal correlation needs two distinct nodes")
    if L_max < 1:
        raise ParamOutOfBound(f"L_max must be at least 1, got {L_max}")
    self_loops = _has_self_loops(g)
    interior = _interior_indices(dim, {i, j}, (), None)
    num = np.cumsum(_per_length_restricted(w, i, j, L_max, interior, self_loops))
    li = np.cumsum(_per_length_restricted(w, i, i, L_max, interior, self_loops))
    lj = np.cumsum(_per_length_restricted(w, j, j, L_max, interior, self_loops))
    oracle = float(partial_to_marginal_oracle(_base_graph(g)).entries[i, j])
    points = []
    for L in range(1, L_max + 1):
        a, b = float(li[L - 1]), float(lj[L - 1])
        if a >= 1.0 - DENOM_GUARD or b >= 1.0 - DENOM_GUARD:
            raise DenominatorNonPositive(
                f"truncated loop sum at L={L} reaches {max(a, b):.6g} >= 1; "
                "increase L or rescale the graph"
            )
        rho = float(num[L - 1]) / float(np.sqrt((1.0 - a) * (1.0 - b)))
        points.append(ProfilePoint(L=L, rho_hat=rho, abs_gap=abs(rho - oracle)))
    return tuple(points)
