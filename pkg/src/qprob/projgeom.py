"""Harmonic conjugation via lattice meets and joins, and the bisector check.

Projective points are rays in a 3-dimensional real or complex space; the
line through two points is the join of the rays, and incidence is subspace
membership.  The harmonic conjugate of z with respect to x and y is built
by the complete-quadrangle construction from an auxiliary point u off the
line and a point v on the line through x and u:

    s = (z v u) ^ (y v v),   t = (x v s) ^ (y v u),   w = (v v t) ^ (x v y)

The cross ratio serves as an independent oracle: the construction output
always sits at cross ratio -1 relative to (x, y; z).
"""

from __future__ import annotations

import numpy as np

from . import core
from .core import Ray, Subspace, join, meet
from .errors import (
    CoincidentPointsError,
    DegenerateUError,
    DegenerateVError,
    DegenerateZError,
    DimensionMismatchError,
    NonOrthogonalPairError,
    NotCollinearError,
    QprobError,
)

# working tolerance for incidence and identity of projective points
TOL = 1e-8


def ray_distance(a: Ray, b: Ray) -> float:
    """Sine of the principal angle between two rays (scale invariant)."""
    d = abs(np.vdot(a.vector, b.vector))
    return float(np.sqrt(max(0.0, 1.0 - min(1.0, d) ** 2)))


def _check_point(p: Ray):
    if p.dimension != 3:
        raise DimensionMismatchError("projective points here are rays in dimension 3")


def _line(x: Ray, y: Ray) -> Subspace:
    line = join(x.subspace(), y.subspace())
    if line.dim != 2:
        raise CoincidentPointsError("coincident points do not span a line")
    return line


def _on(sub: Subspace, p: Ray, tol: float = TOL) -> bool:
    resid = p.vector - sub.projector() @ p.vector
    return float(np.linalg.norm(resid)) <= tol


def _meet_point(a: Subspace, b: Subspace) -> Ray:
    m = meet(a, b)
    if m.dim != 1:
        raise QprobError("projective lines failed to meet in a single point")
    return Ray(m.basis[:, 0])


def default_u(x: Ray, y: Ray, seed: int = 0) -> Ray:
    """A seeded pseudo-random point kept well off the line through x and y."""
    rng = np.random.default_rng(seed)
    line = _line(x, y)
    cplx = x.field == "complex" or y.field == "complex"
    for _ in range(64):
        v = rng.standard_normal(3)
        if cplx:
            v = v + 1j * rng.standard_normal(3)
        cand = Ray(v)
        off = float(np.linalg.norm(cand.vector - line.projector() @ cand.vector))
        if off > 0.2:
            return cand
    raise QprobError("failed to sample an off-line auxiliary point")


def harmonic_conjugate(z: Ray, x: Ray, y: Ray, u: Ray | None = None,
                       v: Ray | None = None, seed: int = 0) -> Ray:
    """The fourth harmonic point w of z relative to x and y.

    u and v default to a seeded off-line choice and span{x+u}; the result
    is independent of any admissible choice.
    """
    for p in (z, x, y):
        _check_point(p)
    line = _line(x, y)
    if z.same_line(x, TOL) or z.same_line(y, TOL):
        raise DegenerateZError("z must differ from both x and y")
    if not _on(line, z):
        raise DegenerateZError("z does not lie on the line through x and y")
    if u is None:
        u = default_u(x, y, seed)
    else:
        _check_point(u)
        if _on(line, u):
            raise DegenerateUError("u must not lie on the line through x and y")
    line_xu = _line(x, u)
    if v is None:
        v = Ray(x.vector + u.vector)
    else:
        _check_point(v)
        if not _on(line_xu, v):
            raise DegenerateVError("v must lie on the line through x and u")
        if v.same_line(x, TOL) or v.same_line(u, TOL):
            raise DegenerateVError("v must differ from x and u")
    s = _meet_point(_line(z, u), _line(y, v))
    t = _meet_point(_line(x, s), _line(y, u))
    return _meet_point(_line(v, t), line)


def cross_ratio(x: Ray, y: Ray, z: Ray, w: Ray):
    """Cross ratio (x, y; z, w) of four collinear points.

    Computed from 2x2 determinants in line coordinates, so points at
    projective infinity of the chart need no special casing.  Harmonic
    quadruples give exactly -1.
    """
    pts = (x, y, z, w)
    for p in pts:
        _check_point(p)
    span = Subspace.from_vectors([p.vector for p in pts])
    if span.dim != 2:
        raise NotCollinearError("the four points do not share a projective line")
    basis = span.basis
    coords = [basis.conj().T @ p.vector for p in pts]

    def det(a, b):
        return a[0] * b[1] - a[1] * b[0]

    num = det(coords[0], coords[2]) * det(coords[1], coords[3])
    den = det(coords[0], coords[3]) * det(coords[1], coords[2])
    if abs(den) <= 1e-12:
        raise CoincidentPointsError("cross ratio undefined: denominator vanishes")
    r = num / den
    if not np.iscomplexobj(np.asarray(r)):
        return float(r)
    r = complex(r)
    return r.real if abs(r.imag) <= 1e-9 else r


def check_soler_pair(x: Ray, y: Ray, seed: int = 0):
    """Bisector test: z = span{x+y} must have its harmonic conjugate
    orthogonal to itself.  Over R and C this always holds; the return
    carries (z, holds)."""
    _check_point(x)
    _check_point(y)
    if abs(np.vdot(x.vector, y.vector)) > 1e-10:
        raise NonOrthogonalPairError("the pair must be orthogonal")
    z = Ray(x.vector + y.vector)
    w = harmonic_conjugate(z, x, y, seed=seed)
    holds = abs(np.vdot(w.vector, z.vector)) <= TOL
    return z, holds
