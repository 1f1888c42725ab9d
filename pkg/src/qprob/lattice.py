"""Brute-force axiom checking on explicitly enumerated finite ortholattices.

The checker takes a finite poset with a candidate orthocomplement and tests
the event-structure axioms one by one: the partial-order axioms S1-S6, the
orthocomplement axioms O1-O4 (plus the stronger modular law O4*), atomism
H1, the covering property H2, completeness H3 (automatic on finite input),
irreducibility H4, and the existence of an incompatible pair (the
reducibility witness).  Every failed verdict carries a counterexample that
can be re-substituted into the axiom body.

Meets and joins are derived from the order relation by exhaustive search;
a missing meet or join is reported as an S5/S6 failure rather than an
exception, so the checker stays total on arbitrary inputs.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

from .errors import CapExceededError, QprobError, UnknownAxiomError

AXIOM_ORDER = [
    "S1", "S2", "S3", "S4", "S5", "S6",
    "O1", "O2", "O3", "O4", "O4*",
    "H1", "H2", "H3", "H4",
    "EQ3-witness",
]


@dataclass
class AxiomReport:
    axiom_id: str
    holds: bool
    counterexample: tuple = ()
    witness: tuple = ()
    note: str = ""

    def to_dict(self) -> dict:
        d = {"axiom": self.axiom_id, "holds": self.holds,
             "counterexample": list(self.counterexample)}
        if self.witness:
            d["witness"] = list(self.witness)
        if self.note:
            d["note"] = self.note
        return d


class FiniteOrtholattice:
    """Finite poset with designated bounds and a candidate orthocomplement.

    Reflexivity and antisymmetry of the order are construction
    preconditions; everything else is up to the axiom checker.
    """

    def __init__(self, elements, leq_pairs, comp, zero, one):
        self.elements = list(elements)
        if len(set(self.elements)) != len(self.elements):
            raise QprobError("duplicate element labels")
        self.index = {e: i for i, e in enumerate(self.elements)}
        n = len(self.elements)
        if zero not in self.index or one not in self.index:
            raise QprobError("designated 0 and 1 must be elements")
        self.zero = zero
        self.one = one
        self._leq = [[False] * n for _ in range(n)]
        for i in range(n):
            self._leq[i][i] = True
        for a, b in leq_pairs:
            self._leq[self.index[a]][self.index[b]] = True
        for i in range(n):
            for j in range(n):
                if i != j and self._leq[i][j] and self._leq[j][i]:
                    raise QprobError(
                        f"order not antisymmetric: {self.elements[i]} and {self.elements[j]}")
        self._comp = [None] * n
        for e in self.elements:
            if e not in comp:
                raise QprobError(f"orthocomplement undefined on {e}")
            self._comp[self.index[e]] = self.index[comp[e]]
        self._meet_table = None
        self._join_table = None

    # -- raw relations, by index ------------------------------------------

    @property
    def n(self) -> int:
        return len(self.elements)

    def leq(self, a, b) -> bool:
        return self._leq[self.index[a]][self.index[b]]

    def comp(self, a):
        return self.elements[self._comp[self.index[a]]]

    def _glb(self, i, j):
        lower = [k for k in range(self.n) if self._leq[k][i] and self._leq[k][j]]
        for k0 in lower:
            if all(self._leq[k][k0] for k in lower):
                return k0
        return None

    def _lub(self, i, j):
        upper = [k for k in range(self.n) if self._leq[i][k] and self._leq[j][k]]
        for k0 in upper:
            if all(self._leq[k0][k] for k in upper):
                return k0
        return None

    def _tables(self):
        if self._meet_table is None:
            n = self.n
            self._meet_table = [[self._glb(i, j) for j in range(n)] for i in range(n)]
            self._join_table = [[self._lub(i, j) for j in range(n)] for i in range(n)]
        return self._meet_table, self._join_table

    def meet(self, a, b):
        """Greatest lower bound, or None when absent."""
        m, _ = self._tables()
        k = m[self.index[a]][self.index[b]]
        return None if k is None else self.elements[k]

    def join(self, a, b):
        _, j = self._tables()
        k = j[self.index[a]][self.index[b]]
        return None if k is None else self.elements[k]

    def atoms(self) -> list:
        out = []
        zi = self.index[self.zero]
        for p in range(self.n):
            if p == zi:
                continue
            if all(k in (zi, p) for k in range(self.n) if self._leq[k][p]):
                out.append(self.elements[p])
        return out

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        pairs = [[a, b] for a in self.elements for b in self.elements
                 if a != b and self.leq(a, b)]
        return {
            "elements": self.elements,
            "leq": pairs,
            "comp": {e: self.comp(e) for e in self.elements},
            "zero": self.zero,
            "one": self.one,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FiniteOrtholattice":
        return cls(d["elements"], [tuple(p) for p in d["leq"]], d["comp"],
                   d["zero"], d["one"])

    @classmethod
    def from_json(cls, text: str) -> "FiniteOrtholattice":
        return cls.from_dict(json.loads(text))


def compatibility(lat: FiniteOrtholattice, x, y) -> bool:
    """Both decomposition identities x=(x^y)v(x^y') and y=(y^x)v(y^x')."""
    for a, b in ((x, y), (y, x)):
        m1 = lat.meet(a, b)
        m2 = lat.meet(a, lat.comp(b))
        if m1 is None or m2 is None:
            return False
        if lat.join(m1, m2) != a:
            return False
    return True


def _decomposes(lat, x, z) -> bool:
    m1 = lat.meet(x, z)
    m2 = lat.meet(x, lat.comp(z))
    if m1 is None or m2 is None:
        return False
    return lat.join(m1, m2) == x


def check_axiom(lat: FiniteOrtholattice, axiom_id: str) -> AxiomReport:
    """Exhaustive check of one axiom; deterministic first counterexample."""
    els = lat.elements
    if axiom_id == "S1":
        for x in els:
            if not lat.leq(x, x):
                return AxiomReport("S1", False, (x,))
        return AxiomReport("S1", True)
    if axiom_id == "S2":
        for x, y, z in itertools.product(els, repeat=3):
            if lat.leq(x, y) and lat.leq(y, z) and not lat.leq(x, z):
                return AxiomReport("S2", False, (x, y, z))
        return AxiomReport("S2", True)
    if axiom_id == "S3":
        for x, y in itertools.product(els, repeat=2):
            if lat.leq(x, y) and lat.leq(y, x) and x != y:
                return AxiomReport("S3", False, (x, y))
        return AxiomReport("S3", True)
    if axiom_id == "S4":
        for x in els:
            if not (lat.leq(lat.zero, x) and lat.leq(x, lat.one)):
                return AxiomReport("S4", False, (x,))
        return AxiomReport("S4", True)
    if axiom_id == "S5":
        for x, y in itertools.product(els, repeat=2):
            if lat.meet(x, y) is None:
                return AxiomReport("S5", False, (x, y), note="no greatest lower bound")
        return AxiomReport("S5", True)
    if axiom_id == "S6":
        for x, y in itertools.product(els, repeat=2):
            if lat.join(x, y) is None:
                return AxiomReport("S6", False, (x, y), note="no least upper bound")
        return AxiomReport("S6", True)
    if axiom_id == "O1":
        for x in els:
            if lat.comp(lat.comp(x)) != x:
                return AxiomReport("O1", False, (x,))
        return AxiomReport("O1", True)
    if axiom_id == "O2":
        for x in els:
            if lat.meet(x, lat.comp(x)) != lat.zero or lat.join(x, lat.comp(x)) != lat.one:
                return AxiomReport("O2", False, (x,))
        return AxiomReport("O2", True)
    if axiom_id == "O3":
        for x, y in itertools.product(els, repeat=2):
            if lat.leq(x, y) and not lat.leq(lat.comp(y), lat.comp(x)):
                return AxiomReport("O3", False, (x, y))
        return AxiomReport("O3", True)
    if axiom_id == "O4":
        for x, y in itertools.product(els, repeat=2):
            if lat.leq(x, y):
                m = lat.meet(y, lat.comp(x))
                if m is None or lat.join(x, m) != y:
                    return AxiomReport("O4", False, (x, y))
        return AxiomReport("O4", True)
    if axiom_id == "O4*":
        for x, z, y in itertools.product(els, repeat=3):
            if lat.leq(x, z):
                m = lat.meet(y, z)
                j = lat.join(x, y)
                if m is None or j is None:
                    return AxiomReport("O4*", False, (x, y, z))
                lhs = lat.join(x, m)
                rhs = lat.meet(j, z)
                if lhs is None or rhs is None or lhs != rhs:
                    return AxiomReport("O4*", False, (x, y, z))
        return AxiomReport("O4*", True)
    if axiom_id == "H1":
        for x, y in itertools.product(els, repeat=2):
            if lat.leq(x, y) and x != y:
                if not any(lat.leq(p, y) and not lat.leq(p, x) for p in lat.atoms()):
                    return AxiomReport("H1", False, (x, y))
        return AxiomReport("H1", True)
    if axiom_id == "H2":
        for p in lat.atoms():
            for x in els:
                if lat.meet(x, p) != lat.zero:
                    continue
                top = lat.join(x, p)
                if top is None:
                    return AxiomReport("H2", False, (p, x), note="join with atom missing")
                for y in els:
                    if lat.leq(x, y) and lat.leq(y, top) and y not in (x, top):
                        return AxiomReport("H2", False, (p, x, y))
        return AxiomReport("H2", True)
    if axiom_id == "H3":
        r5 = check_axiom(lat, "S5")
        r6 = check_axiom(lat, "S6")
        if r5.holds and r6.holds:
            return AxiomReport("H3", True,
                               note="finite lattice with all meets and joins: automatic")
        bad = r5 if not r5.holds else r6
        return AxiomReport("H3", False, bad.counterexample,
                           note="a meet or join is missing")
    if axiom_id == "H4":
        for z in els:
            if z in (lat.zero, lat.one):
                continue
            if all(_decomposes(lat, x, z) for x in els):
                return AxiomReport("H4", False, (z,), note="central element")
        return AxiomReport("H4", True)
    if axiom_id == "EQ3-witness":
        for x, z in itertools.product(els, repeat=2):
            if not _decomposes(lat, x, z):
                return AxiomReport("EQ3-witness", True, witness=(x, z),
                                   note="incompatible pair found")
        return AxiomReport("EQ3-witness", False,
                           note="totally reducible: every pair decomposes")
    raise UnknownAxiomError(f"unknown axiom id {axiom_id!r}")


def check_all(lat: FiniteOrtholattice) -> list:
    return [check_axiom(lat, a) for a in AXIOM_ORDER]


def verify_counterexample(lat: FiniteOrtholattice, report: AxiomReport) -> bool:
    """Re-substitute a failure's counterexample and confirm it violates the axiom."""
    if report.holds:
        return not report.counterexample
    ce = report.counterexample
    a = report.axiom_id
    if a == "S1":
        (x,) = ce
        return not lat.leq(x, x)
    if a == "S2":
        x, y, z = ce
        return lat.leq(x, y) and lat.leq(y, z) and not lat.leq(x, z)
    if a == "S3":
        x, y = ce
        return lat.leq(x, y) and lat.leq(y, x) and x != y
    if a == "S4":
        (x,) = ce
        return not (lat.leq(lat.zero, x) and lat.leq(x, lat.one))
    if a in ("S5", "H3"):
        x, y = ce
        return lat.meet(x, y) is None or lat.join(x, y) is None
    if a == "S6":
        x, y = ce
        return lat.join(x, y) is None
    if a == "O1":
        (x,) = ce
        return lat.comp(lat.comp(x)) != x
    if a == "O2":
        (x,) = ce
        return lat.meet(x, lat.comp(x)) != lat.zero or lat.join(x, lat.comp(x)) != lat.one
    if a == "O3":
        x, y = ce
        return lat.leq(x, y) and not lat.leq(lat.comp(y), lat.comp(x))
    if a == "O4":
        x, y = ce
        m = lat.meet(y, lat.comp(x))
        return lat.leq(x, y) and (m is None or lat.join(x, m) != y)
    if a == "O4*":
        x, y, z = ce
        if not lat.leq(x, z):
            return False
        m = lat.meet(y, z)
        j = lat.join(x, y)
        if m is None or j is None:
            return True
        return lat.join(x, m) != lat.meet(j, z)
    if a == "H1":
        x, y = ce
        return (lat.leq(x, y) and x != y
                and not any(lat.leq(p, y) and not lat.leq(p, x) for p in lat.atoms()))
    if a == "H2":
        if len(ce) == 2:
            p, x = ce
            return lat.meet(x, p) == lat.zero and lat.join(x, p) is None
        p, x, y = ce
        top = lat.join(x, p)
        return (lat.meet(x, p) == lat.zero and top is not None
                and lat.leq(x, y) and lat.leq(y, top) and y not in (x, top))
    if a == "H4":
        (z,) = ce
        return z not in (lat.zero, lat.one) and all(_decomposes(lat, x, z) for x in lat.elements)
    if a == "EQ3-witness":
        return not ce  # no finite counterexample: the failure is universal
    raise UnknownAxiomError(f"unknown axiom id {a!r}")


# -- built-in constructions -------------------------------------------------

def boolean_lattice(nbits: int) -> FiniteOrtholattice:
    """The Boolean algebra 2^n, elements labelled by bitstrings."""
    if not 1 <= nbits <= 5:
        raise CapExceededError("boolean lattice supported for 1 <= n <= 5")
    els = [format(m, f"0{nbits}b") for m in range(2 ** nbits)]
    pairs = []
    for a in els:
        for b in els:
            if a != b and int(a, 2) & ~int(b, 2) == 0:
                pairs.append((a, b))
    comp = {a: format(~int(a, 2) & (2 ** nbits - 1), f"0{nbits}b") for a in els}
    return FiniteOrtholattice(els, pairs, comp, "0" * nbits, "1" * nbits)


def mo_lattice(npairs: int) -> FiniteOrtholattice:
    """The modular ortholattice MO_n: 0, 1 and n complementary atom pairs."""
    if not 1 <= npairs <= 8:
        raise CapExceededError("MO_n supported for 1 <= n <= 8")
    atoms = [f"a{i}" for i in range(1, npairs + 1)]
    coatoms = [f"a{i}'" for i in range(1, npairs + 1)]
    els = ["0"] + atoms + coatoms + ["1"]
    pairs = [("0", e) for e in els if e != "0"] + [(e, "1") for e in els if e != "1"]
    comp = {"0": "1", "1": "0"}
    for a, b in zip(atoms, coatoms):
        comp[a] = b
        comp[b] = a
    return FiniteOrtholattice(els, pairs, comp, "0", "1")


def subspace_lattice_over_prime_field(p: int) -> FiniteOrtholattice:
    """All subspaces of the 3-dimensional space over F_p, with dot-product
    orthocomplement.  A negative example: over small primes some lines are
    self-orthogonal, so O2 fails.
    """
    if p not in (2, 3, 5, 7):
        raise CapExceededError("prime must be one of 2, 3, 5, 7")
    lines = []
    seen = set()
    for v in itertools.product(range(p), repeat=3):
        if v == (0, 0, 0) or v in seen:
            continue
        ray = frozenset(tuple((k * c) % p for c in v) for k in range(1, p))
        seen.update(ray)
        rep = min(ray)
        lines.append(rep)
    lines.sort()
    if 2 + 2 * len(lines) > 10 ** 5:
        raise CapExceededError("element count cap exceeded")

    def dot(u, v):
        return sum(a * b for a, b in zip(u, v)) % p

    def pl(v):
        return f"P{v}"

    def hl(v):
        return f"H{v}"

    els = ["0"] + [pl(v) for v in lines] + [hl(v) for v in lines] + ["1"]
    pairs = [("0", e) for e in els if e != "0"] + [(e, "1") for e in els if e != "1"]
    for v in lines:
        for w in lines:
            if dot(v, w) == 0:
                pairs.append((pl(v), hl(w)))
    comp = {"0": "1", "1": "0"}
    for v in lines:
        comp[pl(v)] = hl(v)
        comp[hl(v)] = pl(v)
    return FiniteOrtholattice(els, pairs, comp, "0", "1")
