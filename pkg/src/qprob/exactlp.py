"""Exact rational linear programming.

A self-contained two-phase simplex over Fraction arithmetic with bounded
variables (upper bounds handled by the complementing trick, so boxes cost
no extra rows).  Bland's rule is used throughout, which rules out cycling.
Infeasible problems yield an exact Farkas certificate that can be
re-verified independently of the solver.

This is deliberately a dense, readable implementation: the problems in
this package are small (hundreds of variables at most) and exactness of
the optima matters more than raw speed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import UnboundedError, QprobError

F0 = Fraction(0)
F1 = Fraction(1)

_MAX_PIVOTS = 200_000


def frac(x) -> Fraction:
    """Coerce ints, strings like '3/2', floats and Fractions to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x)  # exact binary value
    return Fraction(x)


@dataclass
class FarkasCertificate:
    """Exact proof that a constraint system has no solution.

    multipliers[i] applies to constraint i (in the order they were added).
    Multipliers on '<=' rows are always <= 0 here, so for every x in the
    box, sum_i multipliers[i] * (row_i . x) >= combined_rhs, while the box
    bounds force sum_j g_j x_j <= bound_value < combined_rhs.
    """

    multipliers: list
    combined_rhs: Fraction
    bound_value: Fraction
    row_kinds: list  # "eq" | "le"

    def verify(self, lp: "ExactLP") -> bool:
        """Recompute the contradiction from the original problem data."""
        if len(self.multipliers) != len(lp.rows):
            return False
        g = [F0] * lp.n
        combined = F0
        for lam, (kind, coeffs, rhs) in zip(self.multipliers, lp.rows):
            if kind == "le" and lam > 0:
                return False
            combined += lam * rhs
            for j, a in coeffs.items():
                g[j] += lam * a
        upper = F0
        for j in range(lp.n):
            if g[j] == 0:
                continue
            bound = lp.upper[j] if g[j] > 0 else lp.lower[j]
            if bound is None:
                return False  # contribution unbounded, certificate void
            upper += g[j] * bound
        return combined == self.combined_rhs and upper == self.bound_value and combined > upper


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    objective: Fraction | None = None
    x: list | None = None
    certificate: FarkasCertificate | None = None


@dataclass
class ExactLP:
    """min/max of a linear objective over {x : rows hold, lower <= x <= upper}."""

    n: int
    lower: list = field(default_factory=list)
    upper: list = field(default_factory=list)
    rows: list = field(default_factory=list)  # (kind, {j: coeff}, rhs)

    def __post_init__(self):
        if not self.lower:
            self.lower = [F0] * self.n
        if not self.upper:
            self.upper = [None] * self.n
        self.lower = [None if b is None else frac(b) for b in self.lower]
        self.upper = [None if b is None else frac(b) for b in self.upper]
        if len(self.lower) != self.n or len(self.upper) != self.n:
            raise QprobError("bound lists must match the variable count")

    @staticmethod
    def _coeffs(coeffs) -> dict:
        if isinstance(coeffs, dict):
            return {int(j): frac(a) for j, a in coeffs.items() if frac(a) != 0}
        return {j: frac(a) for j, a in enumerate(coeffs) if frac(a) != 0}

    def add_eq(self, coeffs, rhs):
        self.rows.append(("eq", self._coeffs(coeffs), frac(rhs)))

    def add_le(self, coeffs, rhs):
        self.rows.append(("le", self._coeffs(coeffs), frac(rhs)))

    def add_ge(self, coeffs, rhs):
        neg = {j: -a for j, a in self._coeffs(coeffs).items()}
        self.rows.append(("le", neg, -frac(rhs)))

    def maximize(self, objective) -> LPResult:
        return self._solve(self._coeffs(objective), sense=-1)

    def minimize(self, objective) -> LPResult:
        return self._solve(self._coeffs(objective), sense=1)

    # -- internals ---------------------------------------------------------

    def _solve(self, obj: dict, sense: int) -> LPResult:
        tab = _Tableau(self, obj, sense)
        status, cert = tab.run()
        if status == "infeasible":
            return LPResult("infeasible", certificate=cert)
        if status == "unbounded":
            return LPResult("unbounded")
        x = tab.user_solution()
        val = sum((obj.get(j, F0) * x[j] for j in obj), F0)
        return LPResult("optimal", objective=val, x=x)


class _Tableau:
    """Simplex working state in standard form: A z = b, 0 <= z <= span."""

    def __init__(self, lp: ExactLP, obj: dict, sense: int):
        self.lp = lp
        # substitution user var j -> shift_j + sum(sign_c * z_c)
        self.shift = [F0] * lp.n
        self.var_cols: list[list[tuple[int, int]]] = [[] for _ in range(lp.n)]
        self.span: list = []      # per column, Fraction or None (= infinite)
        self.colmap: list = []    # bookkeeping label per column
        ncols = 0
        self.fixed = {}
        for j in range(lp.n):
            lo, hi = lp.lower[j], lp.upper[j]
            if lo is not None and hi is not None and lo == hi:
                self.fixed[j] = lo
                self.shift[j] = lo
                continue
            if lo is not None:
                self.shift[j] = lo
                self.var_cols[j] = [(ncols, 1)]
                self.span.append(None if hi is None else hi - lo)
                self.colmap.append(("var", j))
                ncols += 1
            elif hi is not None:
                self.shift[j] = hi
                self.var_cols[j] = [(ncols, -1)]
                self.span.append(None)
                self.colmap.append(("var", j))
                ncols += 1
            else:
                self.var_cols[j] = [(ncols, 1), (ncols + 1, -1)]
                self.span.extend([None, None])
                self.colmap.extend([("var", j), ("var", j)])
                ncols += 2

        rows = []          # dense rows over the z columns
        rhs = []
        self.row_sign = []
        self.slack_col_of_row = {}
        for i, (kind, coeffs, b) in enumerate(lp.rows):
            dense = [F0] * ncols
            b_eff = b
            for j, a in coeffs.items():
                b_eff -= a * self.shift[j]
                for col, sgn in self.var_cols[j]:
                    dense[col] += a * sgn
            if kind == "le":
                dense.append(F1)
                self.span.append(None)
                self.colmap.append(("slack", i))
                self.slack_col_of_row[i] = ncols
                for r in rows:
                    r.append(F0)
                ncols += 1
            rows.append(dense)
            rhs.append(b_eff)
        width = ncols
        for r in rows:
            r.extend([F0] * (width - len(r)))

        # original (unflipped) copy of the internal system, for certificates
        self.A0 = [list(r) for r in rows]
        self.b0 = list(rhs)

        # sign-normalize so rhs >= 0, then append an artificial per row
        m = len(rows)
        for i in range(m):
            if rhs[i] < 0:
                rows[i] = [-a for a in rows[i]]
                rhs[i] = -rhs[i]
                self.row_sign.append(-1)
            else:
                self.row_sign.append(1)
        self.art0 = ncols
        for i in range(m):
            for k, r in enumerate(rows):
                r.append(F1 if k == i else F0)
            self.span.append(None)
            self.colmap.append(("art", i))
        ncols += m

        self.m = m
        self.ncols = ncols
        self.rows = rows
        self.rhs = rhs
        self.basis = list(range(self.art0, self.art0 + m))
        self.in_basis = [False] * ncols
        for c in self.basis:
            self.in_basis[c] = True
        self.flipped = [False] * ncols
        self.allowed = [True] * ncols

        # phase-2 objective over internal columns (sense * user objective)
        c2 = [F0] * ncols
        for j, a in obj.items():
            if j in self.fixed:
                continue
            for col, sgn in self.var_cols[j]:
                c2[col] += sense * a * sgn
        self.obj2 = c2 + [F0]
        # phase-1 objective: sum of artificials, reduced against the basis
        o1 = [F0] * (ncols + 1)
        for i in range(m):
            for k in range(ncols):
                o1[k] -= rows[i][k]
            o1[ncols] -= rhs[i]
        for i in range(m):
            o1[self.art0 + i] += F1
        self.obj1 = o1

    # -- pivoting ----------------------------------------------------------

    def _flip(self, col):
        s = self.span[col]
        for i in range(self.m):
            a = self.rows[i][col]
            if a != 0:
                self.rhs[i] -= a * s
                self.rows[i][col] = -a
        for orow in (self.obj1, self.obj2):
            a = orow[col]
            if a != 0:
                orow[-1] -= a * s
                orow[col] = -a
        self.flipped[col] = not self.flipped[col]

    def _flip_basic_row(self, r):
        l = self.basis[r]
        s = self.span[l]
        row = self.rows[r]
        for k in range(self.ncols):
            if k != l:
                row[k] = -row[k]
        self.rhs[r] = s - self.rhs[r]
        self.flipped[l] = not self.flipped[l]

    def _pivot(self, r, col):
        row = self.rows[r]
        piv = row[col]
        if piv != 1:
            inv = F1 / piv
            self.rows[r] = row = [a * inv if a else a for a in row]
            self.rhs[r] *= inv
        rr = self.rhs[r]
        nz = [k for k, a in enumerate(row) if a]
        for i in range(self.m):
            if i == r:
                continue
            other = self.rows[i]
            f = other[col]
            if f:
                for k in nz:
                    other[k] -= f * row[k]
                self.rhs[i] -= f * rr
        for orow in (self.obj1, self.obj2):
            f = orow[col]
            if f:
                for k in nz:
                    orow[k] -= f * row[k]
                orow[-1] -= f * rr
        old = self.basis[r]
        self.in_basis[old] = False
        self.basis[r] = col
        self.in_basis[col] = True

    def _iterate(self, orow) -> str:
        pivots = 0
        stall = 0
        bland = False
        last_obj = orow[-1]
        while True:
            pivots += 1
            if pivots > _MAX_PIVOTS:
                raise QprobError("simplex pivot cap exceeded (internal error)")
            # Dantzig pricing while progress is made; Bland once degenerate
            # pivots stall, which restores the termination guarantee
            if not bland:
                if orow[-1] != last_obj:
                    stall = 0
                    last_obj = orow[-1]
                else:
                    stall += 1
                    if stall > 64:
                        bland = True
            enter = -1
            if bland:
                for k in range(self.ncols):
                    if self.allowed[k] and not self.in_basis[k] and orow[k] < 0:
                        enter = k  # Bland: first improving column
                        break
            else:
                best = F0
                for k in range(self.ncols):
                    if self.allowed[k] and not self.in_basis[k] and orow[k] < best:
                        best = orow[k]
                        enter = k
            if enter < 0:
                return "optimal"
            # ratio test; candidates are (t, tie_index, action)
            best_t = None
            best_tie = None
            best_action = None
            sp = self.span[enter]
            if sp is not None:
                best_t, best_tie, best_action = sp, enter, ("bound", -1)
            for i in range(self.m):
                a = self.rows[i][enter]
                if a > 0:
                    t = self.rhs[i] / a
                    action = ("lower", i)
                elif a < 0:
                    sb = self.span[self.basis[i]]
                    if sb is None:
                        continue
                    t = (sb - self.rhs[i]) / (-a)
                    action = ("upper", i)
                else:
                    continue
                tie = self.basis[i]
                if best_t is None or t < best_t or (t == best_t and tie < best_tie):
                    best_t, best_tie, best_action = t, tie, action
            if best_t is None:
                return "unbounded"
            kind, r = best_action
            if kind == "bound":
                self._flip(enter)
            elif kind == "lower":
                self._pivot(r, enter)
            else:  # leaving variable exits at its upper bound
                self._flip_basic_row(r)
                self._pivot(r, enter)

    def run(self):
        status = self._iterate(self.obj1)
        if status != "optimal":
            raise QprobError("phase 1 cannot be unbounded (internal error)")
        z1 = -self.obj1[-1]
        if z1 > 0:
            return "infeasible", self._farkas()
        # drive any artificial still in the basis out of it
        drop = []
        for r in range(self.m):
            c = self.basis[r]
            if self.colmap[c][0] != "art":
                continue
            target = -1
            for k in range(self.art0):
                if self.rows[r][k] != 0:
                    target = k
                    break
            if target >= 0:
                self._pivot(r, target)
            else:
                drop.append(r)
        for r in sorted(drop, reverse=True):
            del self.rows[r], self.rhs[r], self.basis[r]
            self.m -= 1
        # artificials are gone from the basis; drop their columns entirely
        a0 = self.art0
        for i in range(self.m):
            del self.rows[i][a0:]
        self.obj1 = self.obj1[:a0] + [self.obj1[-1]]
        self.obj2 = self.obj2[:a0] + [self.obj2[-1]]
        self.span = self.span[:a0]
        self.colmap = self.colmap[:a0]
        self.flipped = self.flipped[:a0]
        self.in_basis = self.in_basis[:a0]
        self.allowed = self.allowed[:a0]
        self.ncols = a0
        status = self._iterate(self.obj2)
        if status == "unbounded":
            return "unbounded", None
        return "optimal", None

    # -- extraction --------------------------------------------------------

    def _farkas(self) -> FarkasCertificate:
        y = [(F1 - self.obj1[self.art0 + i]) * self.row_sign[i] for i in range(self.m)]
        lams = list(y)
        combined = F0
        g = [F0] * self.lp.n
        for lam, (kind, coeffs, rhs) in zip(lams, self.lp.rows):
            combined += lam * rhs
            for j, a in coeffs.items():
                g[j] += lam * a
        bound = F0
        for j in range(self.lp.n):
            if g[j] == 0:
                continue
            b = self.lp.upper[j] if g[j] > 0 else self.lp.lower[j]
            if b is None:
                raise QprobError("Farkas certificate extraction failed (internal error)")
            bound += g[j] * b
        cert = FarkasCertificate(lams, combined, bound, [r[0] for r in self.lp.rows])
        if not cert.verify(self.lp):
            raise QprobError("Farkas certificate failed self-verification (internal error)")
        return cert

    def user_solution(self) -> list:
        zval = [F0] * self.ncols
        for r, c in enumerate(self.basis):
            zval[c] = self.rhs[r]
        for c in range(self.art0):
            if self.flipped[c]:
                zval[c] = self.span[c] - zval[c]
        x = []
        for j in range(self.lp.n):
            if j in self.fixed:
                x.append(self.fixed[j])
                continue
            v = self.shift[j]
            for col, sgn in self.var_cols[j]:
                v += sgn * zval[col]
            x.append(v)
        return x
