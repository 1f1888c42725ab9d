"""Classical correlation polytopes and their quantum violations.

A truth assignment to n basic events evaluates a list of monomials
(singletons and pair conjunctions) to a 0/1 vertex; the convex hull of all
such vertices is the correlation polytope, whose facets are the linear
"conditions of possible experience" (the Clauser-Horne inequalities, for
the two-observers-two-settings scheme).  Everything combinatorial here is
exact: vertices are integers, membership is an exact LP with a rational
separating hyperplane on the outside verdict, and facets come from an
exact double-description run.  Quantum points are Born-probability vectors
of bipartite event embeddings, and a seeded multi-start optimizer looks
for points outside the classical hull.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize

from .core import DensityOperator, Ray, Subspace, born_probability, meet, tensor_event, tensor_ray
from .errors import CapExceededError, DimensionMismatchError, QprobError
from .exactlp import ExactLP, frac

F0 = Fraction(0)
F1 = Fraction(1)

VERTEX_CAP_N = 20
FACET_VERTEX_CAP = 64
FACET_DIM_CAP = 12


@dataclass(frozen=True)
class EventScheme:
    """n basic events plus an ordered monomial list defining coordinates."""

    n: int
    monomials: tuple

    def __post_init__(self):
        mono = tuple(tuple(m) for m in self.monomials)
        object.__setattr__(self, "monomials", mono)
        seen = set()
        saw_pair = False
        for m in mono:
            if len(m) not in (1, 2):
                raise QprobError("monomials must be singletons or pairs")
            if any(not 0 <= i < self.n for i in m):
                raise QprobError("monomial index out of range")
            if m in seen:
                raise QprobError("duplicate monomial")
            seen.add(m)
            if len(m) == 2:
                saw_pair = True
            elif saw_pair:
                raise QprobError("singletons must be listed before pairs")

    @property
    def dim(self) -> int:
        return len(self.monomials)

    def evaluate(self, assignment) -> tuple:
        return tuple(
            int(all(assignment[i] for i in m)) for m in self.monomials)

    def to_dict(self) -> dict:
        return {"n": self.n, "monomials": [list(m) for m in self.monomials]}

    @classmethod
    def from_dict(cls, d: dict) -> "EventScheme":
        return cls(d["n"], tuple(tuple(m) for m in d["monomials"]))

    @classmethod
    def from_json(cls, text: str) -> "EventScheme":
        return cls.from_dict(json.loads(text))


# the two-observers, two-settings scheme behind the Clauser-Horne analysis:
# events x1, x2 (first side), y1, y2 (second side), and the four cross pairs
CH_SCHEME = EventScheme(4, ((0,), (1,), (2,), (3,), (0, 2), (0, 3), (1, 2), (1, 3)))


@dataclass
class CorrelationPolytope:
    scheme: EventScheme
    vertices: list  # 0/1 tuples, deduplicated, in truth-table order


def vertices(scheme: EventScheme) -> CorrelationPolytope:
    """All truth-table rows evaluated on the monomials, deduplicated."""
    if scheme.n > VERTEX_CAP_N:
        raise CapExceededError(f"truth-table enumeration capped at n = {VERTEX_CAP_N}")
    out = []
    seen = set()
    for bits in itertools.product((0, 1), repeat=scheme.n):
        v = scheme.evaluate(bits)
        if v not in seen:
            seen.add(v)
            out.append(v)
    return CorrelationPolytope(scheme, out)


@dataclass
class LinearInequality:
    """lo <= coeffs . p <= hi with integer coprime coefficients."""

    coeffs: tuple
    lo: Fraction | None
    hi: Fraction | None

    def value(self, point) -> Fraction:
        return sum((frac(c) * frac(x) for c, x in zip(self.coeffs, point)), F0)

    def satisfied_by(self, point) -> bool:
        v = self.value(point)
        if self.lo is not None and v < self.lo:
            return False
        if self.hi is not None and v > self.hi:
            return False
        return True

    def to_dict(self) -> dict:
        return {
            "coeffs": [str(c) for c in self.coeffs],
            "lo": None if self.lo is None else str(self.lo),
            "hi": None if self.hi is None else str(self.hi),
        }


def _canonical_direction(vec):
    """Scale to coprime integers with positive leading coefficient.

    Returns (coeffs, sign) where sign is +1 if the input direction was
    kept and -1 if it was negated.
    """
    den = math.lcm(*(c.denominator for c in vec if c != 0))
    ints = [int(c * den) for c in vec]
    g = math.gcd(*(abs(c) for c in ints if c)) or 1
    ints = [c // g for c in ints]
    for c in ints:
        if c != 0:
            if c < 0:
                return tuple(-x for x in ints), -1
            break
    return tuple(ints), 1


# -- membership ---------------------------------------------------------------

@dataclass
class MembershipVerdict:
    inside: bool
    separator: LinearInequality | None = None


def membership(point, poly: CorrelationPolytope) -> MembershipVerdict:
    """Exact convex-combination test; outside points get a verified separator."""
    p = [frac(x) for x in point]
    d = poly.scheme.dim
    if len(p) != d:
        raise DimensionMismatchError("point dimension does not match the scheme")
    nv = len(poly.vertices)
    lp = ExactLP(nv, lower=[F0] * nv, upper=[F1] * nv)
    lp.add_eq({j: F1 for j in range(nv)}, F1)
    for k in range(d):
        lp.add_eq({j: frac(poly.vertices[j][k]) for j in range(nv)}, p[k])
    res = lp.maximize({})
    if res.status == "optimal":
        return MembershipVerdict(True)
    # find a hyperplane with w.v + c <= 0 on vertices and = 1 at the point
    sep = ExactLP(d + 1, lower=[-F1 * 10 ** 6] * (d + 1), upper=[F1 * 10 ** 6] * (d + 1))
    for v in poly.vertices:
        sep.add_le({**{k: frac(v[k]) for k in range(d)}, d: F1}, F0)
    sep.add_eq({**{k: p[k] for k in range(d)}, d: F1}, F1)
    sres = sep.maximize({})
    if sres.status != "optimal":
        raise QprobError("separator construction failed (internal error)")
    w = sres.x[:d]
    c = sres.x[d]
    coeffs, sign = _canonical_direction(w)
    scale = None
    for ci, wi in zip(coeffs, w):
        if ci:
            scale = frac(ci) / wi
            break
    bound = -c * scale
    ineq = (LinearInequality(coeffs, None, bound) if scale > 0
            else LinearInequality(coeffs, bound, None))
    for v in poly.vertices:
        if not ineq.satisfied_by(v):
            raise QprobError("separator failed vertex verification (internal error)")
    if ineq.satisfied_by(p):
        raise QprobError("separator does not separate the point (internal error)")
    return MembershipVerdict(False, ineq)


# -- facet enumeration by double description -----------------------------------

class DegeneratePolytopeError(QprobError):
    """Polytope is not full-dimensional; carries a basis of its affine hull."""

    def __init__(self, message, affine_hull_directions):
        super().__init__(message)
        self.affine_hull_directions = affine_hull_directions


def _exact_rank_basis(rows):
    """Indices of a maximal independent subset of rows (exact Gauss)."""
    if not rows:
        return []
    width = len(rows[0])
    reduced = []
    picked = []
    for i, row in enumerate(rows):
        r = list(row)
        for lead, basis_row in reduced:
            if r[lead] != 0:
                f = r[lead]
                r = [a - f * b for a, b in zip(r, basis_row)]
        lead = next((k for k in range(width) if r[k] != 0), None)
        if lead is None:
            continue
        inv = F1 / r[lead]
        r = [a * inv for a in r]
        reduced.append((lead, r))
        picked.append(i)
        if len(picked) == width:
            break
    return picked


def _invert(mat):
    n = len(mat)
    aug = [list(row) + [F1 if i == j else F0 for j in range(n)] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise QprobError("singular matrix (internal error)")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = F1 / aug[col][col]
        aug[col] = [a * inv for a in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [[aug[i][n + j] for j in range(n)] for i in range(n)]


def facets(poly: CorrelationPolytope) -> list:
    """Irredundant facet list in canonical integer form, exactly.

    Double description on the polar side: the extreme rays of the cone
    dual to cone{(1, v_i)} are exactly the facets of the polytope when it
    is full-dimensional.  Facet pairs sharing a normal direction merge
    into one two-sided LinearInequality.
    """
    nv = len(poly.vertices)
    d = poly.scheme.dim
    if nv > FACET_VERTEX_CAP or d > FACET_DIM_CAP:
        raise CapExceededError("facet enumeration caps: 64 vertices, dimension 12")
    lifted = [[F1] + [frac(x) for x in v] for v in poly.vertices]
    picked = _exact_rank_basis(lifted)
    if len(picked) < d + 1:
        dirs = _affine_hull_directions(poly)
        raise DegeneratePolytopeError(
            f"polytope is {len(picked) - 1}-dimensional inside R^{d}", dirs)

    # initial simplicial cone from d+1 independent constraints
    binv = _invert([lifted[i] for i in picked])
    rays = []
    for j in range(d + 1):
        col = [binv[i][j] for i in range(d + 1)]
        rays.append(_normalize_ray(col))
    processed = list(picked)
    zero_sets = []
    for r in rays:
        zero_sets.append({i for i in processed if _dot(lifted[i], r) == 0})

    for i in range(nv):
        if i in picked:
            continue
        vals = [_dot(lifted[i], r) for r in rays]
        keep = [k for k, val in enumerate(vals) if val > 0]
        tight = [k for k, val in enumerate(vals) if val == 0]
        drop = [k for k, val in enumerate(vals) if val < 0]
        if not drop:
            for k in tight:
                zero_sets[k].add(i)
            processed.append(i)
            continue
        new_rays = []
        new_zero = []
        for kp in keep:
            for km in drop:
                z = zero_sets[kp] & zero_sets[km]
                # adjacency: no third ray's zero set contains the meet
                adjacent = True
                for kk in range(len(rays)):
                    if kk in (kp, km):
                        continue
                    if z <= zero_sets[kk]:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                comb = [vals[kp] * rays[km][t] - vals[km] * rays[kp][t]
                        for t in range(d + 1)]
                comb = _normalize_ray(comb)
                new_rays.append(comb)
                new_zero.append(z | {i})
        rays = [rays[k] for k in keep + tight] + new_rays
        zero_sets = [zero_sets[k] for k in keep + tight] + new_zero
        for k in range(len(keep), len(keep) + len(tight)):
            zero_sets[k] = zero_sets[k] | {i}
        processed.append(i)

    # each extreme ray y gives the valid inequality y0 + y.p >= 0
    grouped = {}
    for r in rays:
        y0, yv = r[0], r[1:]
        coeffs, sign = _canonical_direction(yv)
        scale = None
        for ci, wi in zip(coeffs, yv):
            if ci:
                scale = frac(ci) / wi
                break
        if scale is None:
            continue  # the far face y = (1, 0, ..., 0) cannot appear for bounded P
        bound = -y0 * scale
        key = coeffs
        lo, hi = grouped.get(key, (None, None))
        if scale > 0:
            lo = bound if lo is None else max(lo, bound)
        else:
            hi = bound if hi is None else min(hi, bound)
        grouped[key] = (lo, hi)
    out = [LinearInequality(k, lo, hi) for k, (lo, hi) in sorted(grouped.items())]
    for ineq in out:
        for v in poly.vertices:
            if not ineq.satisfied_by(v):
                raise QprobError("facet failed vertex verification (internal error)")
    return out


def _dot(a, b):
    return sum((x * y for x, y in zip(a, b)), F0)


def _normalize_ray(vec):
    den = math.lcm(*(c.denominator for c in vec if c != 0))
    ints = [frac(int(c * den)) for c in vec]
    g = math.gcd(*(abs(int(c)) for c in ints if c)) or 1
    return [c / g for c in ints]


def _affine_hull_directions(poly):
    base = [frac(x) for x in poly.vertices[0]]
    diffs = [[frac(x) - b for x, b in zip(v, base)] for v in poly.vertices[1:]]
    picked = _exact_rank_basis(diffs)
    return [diffs[i] for i in picked]


# -- quantum side ---------------------------------------------------------------

@dataclass
class QuantumSetup:
    """Local qubit events a1, a2 and b1, b2 plus a joint state."""

    a1: Ray
    a2: Ray
    b1: Ray
    b2: Ray
    w: DensityOperator

    def __post_init__(self):
        for r in (self.a1, self.a2, self.b1, self.b2):
            if r.dimension != 2:
                raise DimensionMismatchError("local events must be qubit rays")
        if self.w.dimension != 4:
            raise DimensionMismatchError("state must live on the 4-dimensional pair space")


def quantum_point(setup: QuantumSetup) -> list:
    """Born probabilities in the scheme order (a1, a2, b1, b2, four pairs)."""
    a = {0: setup.a1, 1: setup.a2}
    b = {2: setup.b1, 3: setup.b2}
    point = []
    for m in CH_SCHEME.monomials:
        if len(m) == 1:
            if m[0] in a:
                sub = tensor_event(a[m[0]], "left", (2, 2))
            else:
                sub = tensor_event(b[m[0]], "right", (2, 2))
        else:
            sub = tensor_ray(a[m[0]], b[m[1]]).subspace()
        point.append(born_probability(setup.w, sub))
    return point


def ch_value(point) -> float:
    """P(x1y1) + P(x1y2) + P(x2y2) - P(x2y1) - P(x1) - P(y2)."""
    if len(point) != 8:
        raise DimensionMismatchError("expected an 8-coordinate point in scheme order")
    p = [float(x) for x in point]
    return p[4] + p[5] + p[7] - p[6] - p[0] - p[3]


def ch_value_exact(point) -> Fraction:
    if len(point) != 8:
        raise DimensionMismatchError("expected an 8-coordinate point in scheme order")
    p = [frac(x) for x in point]
    return p[4] + p[5] + p[7] - p[6] - p[0] - p[3]


def _bloch_ray(theta, phi) -> Ray:
    return Ray([math.cos(theta / 2), complex(math.cos(phi), math.sin(phi)) * math.sin(theta / 2)],
               field="complex")


def _setup_from_params(params, product_state: bool) -> QuantumSetup:
    th = params
    rays = [_bloch_ray(th[2 * i], th[2 * i + 1]) for i in range(4)]
    if product_state:
        s1 = _bloch_ray(th[8], th[9])
        s2 = _bloch_ray(th[10], th[11])
        vec = np.kron(s1.vector, s2.vector)
    else:
        re = np.array(th[8:12])
        im = np.array(th[12:16])
        vec = re + 1j * im
        nrm = np.linalg.norm(vec)
        if nrm < 1e-9:
            vec = np.array([1.0, 0, 0, 1.0]) / np.sqrt(2) + 0j
        else:
            vec = vec / nrm
    w = DensityOperator(np.outer(vec, vec.conj()))
    return QuantumSetup(rays[0], rays[1], rays[2], rays[3], w)


def maximize_violation(product_state: bool = False, restarts: int = 64,
                       seed: int = 0):
    """Seeded multi-start search for the largest CH value.

    Over the full pure two-qubit template the optimum approaches
    (sqrt(2) - 1) / 2 ~ 0.2071; restricted to product states the value
    never exceeds 0.  Returns (best setup, best value).
    """
    rng = np.random.default_rng(seed)
    nparams = 12 if product_state else 16

    def objective(params):
        try:
            return -ch_value(quantum_point(_setup_from_params(params, product_state)))
        except QprobError:
            return 0.0

    starts = [rng.uniform(-np.pi, np.pi, nparams) for _ in range(restarts)]
    if not product_state:
        # deterministic educated start: singlet-type state and spread angles
        warm = np.zeros(16)
        warm[:8] = [0.0, 0.0, np.pi / 2, 0.0, np.pi / 4, 0.0, 3 * np.pi / 4, 0.0]
        warm[8:12] = [1.0, 0.0, 0.0, 1.0]
        starts[0] = warm
    best_val = -np.inf
    best_params = None
    for x0 in starts:
        res = minimize(objective, x0, method="Nelder-Mead",
                       options={"maxiter": 400, "xatol": 1e-8, "fatol": 1e-10})
        if -res.fun > best_val:
            best_val = -res.fun
            best_params = res.x
    res = minimize(objective, best_params, method="Nelder-Mead",
                   options={"maxiter": 4000, "xatol": 1e-10, "fatol": 1e-13})
    if -res.fun > best_val:
        best_val = -res.fun
        best_params = res.x
    setup = _setup_from_params(best_params, product_state)
    return setup, float(best_val)
