"""Finite-dimensional inner-product-space primitives.

Rays, subspaces and operators over R or C, together with the handful of
operations everything else is built on: Born probabilities, Lueders
conditioning, subspace meet/join/orthocomplement, tensor embeddings of
local events, and non-contextual probability decompositions.

All values are immutable after construction; operations never mutate
their inputs.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DimensionMismatchError,
    IncompatibleEventError,
    InvalidContextError,
    NullConditioningError,
    QprobError,
)

# Construction-time normalization tolerance.
NORM_TOL = 1e-12
# Gram-matrix / basis orthonormality tolerance.
GRAM_TOL = 1e-10
# Relative singular-value threshold for rank decisions.
RANK_TOL = 1e-10
# Global tolerance on principal angles for subspace identity.
ANGLE_TOL = 1e-9


def _as_vector(v, field: str | None = None) -> np.ndarray:
    dtype = complex if field == "complex" else None
    a = np.asarray(v, dtype=dtype)
    if a.ndim != 1 or a.size == 0:
        raise QprobError("expected a nonempty 1-d vector")
    if not np.iscomplexobj(a):
        a = a.astype(float)
    return a


class Ray:
    """A one-dimensional subspace, stored as a unit vector along it."""

    __slots__ = ("vector", "dimension")

    def __init__(self, vector, field: str | None = None):
        v = _as_vector(vector, field)
        n = np.linalg.norm(v)
        if n < NORM_TOL:
            raise QprobError("cannot build a ray from the zero vector")
        v = v / n
        # renormalize once more so |<v,v>-1| <= 1e-12 holds even for
        # badly scaled input
        v = v / np.linalg.norm(v)
        self.vector = v
        self.vector.setflags(write=False)
        self.dimension = v.shape[0]

    @property
    def field(self) -> str:
        return "complex" if np.iscomplexobj(self.vector) else "real"

    def same_line(self, other: "Ray", tol: float = ANGLE_TOL) -> bool:
        """True iff the two rays span the same line (equality up to phase)."""
        if self.dimension != other.dimension:
            return False
        return abs(abs(np.vdot(self.vector, other.vector)) - 1.0) <= tol

    def is_orthogonal_to(self, other: "Ray", tol: float = GRAM_TOL) -> bool:
        return abs(np.vdot(self.vector, other.vector)) <= tol

    def subspace(self) -> "Subspace":
        return Subspace(self.vector.reshape(self.dimension, 1))

    def __eq__(self, other):
        if not isinstance(other, Ray):
            return NotImplemented
        return self.same_line(other)

    __hash__ = None  # tolerance-based equality

    def __repr__(self):
        return f"Ray({np.array2string(self.vector, precision=6)})"


class Subspace:
    """A closed subspace given by an orthonormal basis (columns of .basis)."""

    __slots__ = ("basis", "ambient")

    def __init__(self, basis: np.ndarray):
        b = np.asarray(basis)
        if b.ndim != 2:
            raise QprobError("basis must be a 2-d array of column vectors")
        if not np.iscomplexobj(b):
            b = b.astype(float)
        d, k = b.shape
        if k > d:
            raise QprobError("more basis vectors than ambient dimension")
        if k:
            gram = b.conj().T @ b
            if np.max(np.abs(gram - np.eye(k))) > GRAM_TOL:
                raise QprobError("basis is not orthonormal within tolerance")
        self.basis = b
        self.basis.setflags(write=False)
        self.ambient = d

    @classmethod
    def from_vectors(cls, vectors, dim: int | None = None, field: str | None = None) -> "Subspace":
        """Span of arbitrary (possibly dependent) vectors, orthonormalized."""
        vecs = [_as_vector(v, field) for v in vectors]
        if not vecs:
            if dim is None:
                raise QprobError("cannot infer ambient dimension of an empty span")
            return cls.zero(dim, field or "real")
        m = np.column_stack(vecs)
        if dim is not None and m.shape[0] != dim:
            raise DimensionMismatchError(f"vectors live in dim {m.shape[0]}, expected {dim}")
        u, s, _ = np.linalg.svd(m, full_matrices=False)
        cutoff = RANK_TOL * (s[0] if s.size else 0.0)
        rank = int(np.sum(s > cutoff))
        return cls(u[:, :rank])

    @classmethod
    def zero(cls, dim: int, field: str = "real") -> "Subspace":
        dtype = complex if field == "complex" else float
        return cls(np.zeros((dim, 0), dtype=dtype))

    @classmethod
    def full(cls, dim: int, field: str = "real") -> "Subspace":
        dtype = complex if field == "complex" else float
        return cls(np.eye(dim, dtype=dtype))

    @property
    def dim(self) -> int:
        """Dimension of the subspace itself (not the ambient space)."""
        return self.basis.shape[1]

    @property
    def field(self) -> str:
        return "complex" if np.iscomplexobj(self.basis) else "real"

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def is_zero(self) -> bool:
        return self.dim == 0

    def equals(self, other: "Subspace", tol: float = ANGLE_TOL) -> bool:
        """Identity of subspaces: equal dimension and principal angles ~ 0."""
        if self.ambient != other.ambient or self.dim != other.dim:
            return False
        if self.dim == 0:
            return True
        return float(np.linalg.norm(self.projector() - other.projector(), 2)) <= tol

    def contains(self, other, tol: float = ANGLE_TOL) -> bool:
        """Containment test for a Ray or Subspace."""
        if isinstance(other, Ray):
            other = other.subspace()
        if other.ambient != self.ambient:
            raise DimensionMismatchError("ambient dimensions differ")
        if other.dim == 0:
            return True
        if other.dim > self.dim:
            return False
        resid = other.basis - self.projector() @ other.basis
        return float(np.linalg.norm(resid, 2)) <= tol

    def is_orthogonal_to(self, other: "Subspace", tol: float = GRAM_TOL) -> bool:
        if self.dim == 0 or other.dim == 0:
            return True
        return float(np.max(np.abs(self.basis.conj().T @ other.basis))) <= tol

    def __repr__(self):
        return f"Subspace(ambient={self.ambient}, dim={self.dim})"


def _check_same_ambient(x: Subspace, y: Subspace):
    if x.ambient != y.ambient:
        raise DimensionMismatchError(f"ambient dimensions differ: {x.ambient} vs {y.ambient}")


def _null_space(m: np.ndarray, dim: int) -> Subspace:
    """Exact-rank null space of m (rows act on vectors of length dim)."""
    if m.shape[0] == 0:
        return Subspace.full(dim, "complex" if np.iscomplexobj(m) else "real")
    _, s, vh = np.linalg.svd(m)
    cutoff = RANK_TOL * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > cutoff))
    basis = vh[rank:].conj().T
    return Subspace(basis)


def ortho_complement(x: Subspace) -> Subspace:
    """Orthocomplement; its basis completes x's basis to a full one."""
    if x.dim == 0:
        return Subspace.full(x.ambient, x.field)
    return _null_space(x.basis.conj().T, x.ambient)


def meet(x: Subspace, y: Subspace) -> Subspace:
    """Subspace intersection via the null space of stacked complement projectors."""
    _check_same_ambient(x, y)
    d = x.ambient
    px = np.eye(d) - x.projector()
    py = np.eye(d) - y.projector()
    return _null_space(np.vstack([px, py]), d)


def join(x: Subspace, y: Subspace) -> Subspace:
    """Closed span, computed as (x^perp intersect y^perp)^perp."""
    _check_same_ambient(x, y)
    return ortho_complement(meet(ortho_complement(x), ortho_complement(y)))


class HermitianOperator:
    """A square operator equal to its conjugate transpose."""

    __slots__ = ("matrix", "dimension")

    _HERM_TOL = 1e-12

    def __init__(self, matrix):
        m = np.asarray(matrix)
        if not np.iscomplexobj(m):
            m = m.astype(float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise QprobError("operator matrix must be square")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.conj().T)) > self._HERM_TOL * scale:
            raise QprobError("matrix is not Hermitian within tolerance")
        # symmetrize to kill representation noise
        self.matrix = (m + m.conj().T) / 2
        self.matrix.setflags(write=False)
        self.dimension = m.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def operator_norm(self) -> float:
        return float(np.max(np.abs(self.eigenvalues())))

    def __repr__(self):
        return f"HermitianOperator(dim={self.dimension})"


class DensityOperator(HermitianOperator):
    """Hermitian, positive semi-definite, unit-trace operator."""

    __slots__ = ()

    _EIG_TOL = 1e-10
    _TRACE_TOL = 1e-10

    def __init__(self, matrix):
        super().__init__(matrix)
        ev = self.eigenvalues()
        if np.min(ev) < -self._EIG_TOL:
            raise QprobError(f"density operator has negative eigenvalue {np.min(ev):.3e}")
        tr = float(np.real(np.trace(self.matrix)))
        if abs(tr - 1.0) > self._TRACE_TOL:
            raise QprobError(f"density operator trace {tr} is not 1")

    @classmethod
    def pure(cls, x: Ray) -> "DensityOperator":
        v = x.vector.reshape(-1, 1)
        return cls(v @ v.conj().T)

    @classmethod
    def maximally_mixed(cls, dim: int, field: str = "real") -> "DensityOperator":
        dtype = complex if field == "complex" else float
        return cls(np.eye(dim, dtype=dtype) / dim)


def _event_subspace(x) -> Subspace:
    return x.subspace() if isinstance(x, Ray) else x


def born_probability(w: DensityOperator, x) -> float:
    """trace(W P_x), clamped to [0, 1]; x may be a Ray or Subspace."""
    return born_probability_raw(w, x)[0]


def born_probability_raw(w: DensityOperator, x) -> tuple[float, float]:
    """(clamped, raw) Born probability; the raw value is kept for diagnostics."""
    sub = _event_subspace(x)
    if sub.ambient != w.dimension:
        raise DimensionMismatchError("state and event dimensions differ")
    if sub.dim == 0:
        return 0.0, 0.0
    raw = float(np.real(np.einsum("ij,ji->", w.matrix, sub.projector())))
    return min(1.0, max(0.0, raw)), raw


def luders_update(w: DensityOperator, x) -> DensityOperator:
    """Conditionalization W -> P_x W P_x / tr(W P_x)."""
    sub = _event_subspace(x)
    if sub.ambient != w.dimension:
        raise DimensionMismatchError("state and event dimensions differ")
    _, raw = born_probability_raw(w, sub)
    if raw <= 1e-12:
        raise NullConditioningError("conditioning on an event of probability <= 1e-12")
    p = sub.projector()
    m = p @ w.matrix @ p
    return DensityOperator(m / np.real(np.trace(m)))


def tensor_ray(x: Ray, y: Ray) -> Ray:
    """Kronecker product ray x (x) y."""
    return Ray(np.kron(x.vector, y.vector))


def tensor_event(a, side: str, dims: tuple[int, int]) -> Subspace:
    """Embed a local event as a (x) 1 or 1 (x) a inside the bipartite space.

    dims gives the (left, right) factor dimensions; side says which slot the
    event occupies.
    """
    sub = _event_subspace(a)
    dl, dr = dims
    if side == "left":
        if sub.ambient != dl:
            raise DimensionMismatchError("event does not match the left factor dimension")
        dtype = complex if sub.field == "complex" else float
        other = np.eye(dr, dtype=dtype)
        cols = [np.kron(sub.basis[:, i], other[:, j]) for i in range(sub.dim) for j in range(dr)]
    elif side == "right":
        if sub.ambient != dr:
            raise DimensionMismatchError("event does not match the right factor dimension")
        dtype = complex if sub.field == "complex" else float
        other = np.eye(dl, dtype=dtype)
        cols = [np.kron(other[:, j], sub.basis[:, i]) for j in range(dl) for i in range(sub.dim)]
    else:
        raise QprobError(f"side must be 'left' or 'right', got {side!r}")
    if not cols:
        return Subspace.zero(dl * dr, sub.field)
    return Subspace(np.column_stack(cols))


def compatible(x: Subspace, y: Subspace, tol: float = ANGLE_TOL) -> bool:
    """Compatibility of two events: their projectors commute."""
    _check_same_ambient(x, y)
    px, py = x.projector(), y.projector()
    return float(np.linalg.norm(px @ py - py @ px, 2)) <= tol


def context_decomposition_probability(w: DensityOperator, y: Subspace, context) -> float:
    """Probability of y computed through a resolving context.

    The context is a list of mutually orthogonal subspaces joining to the
    full space; y must be compatible with every member.  The result equals
    born_probability(w, y) within 1e-9, which is exactly the
    non-contextuality of probability.
    """
    members = [_event_subspace(c) for c in context]
    if not members:
        raise InvalidContextError("empty context")
    d = w.dimension
    total = 0
    for i, c in enumerate(members):
        if c.ambient != d:
            raise DimensionMismatchError("context member dimension mismatch")
        total += c.dim
        for other in members[i + 1:]:
            if not c.is_orthogonal_to(other):
                raise InvalidContextError("context members are not pairwise orthogonal")
    if total != d:
        raise InvalidContextError("context does not resolve the identity")
    if y.ambient != d:
        raise DimensionMismatchError("event dimension mismatch")
    prob = 0.0
    for c in members:
        if not compatible(y, c):
            raise IncompatibleEventError("event incompatible with a context member")
        prob += born_probability(w, meet(y, c))
    return min(1.0, max(0.0, prob))
