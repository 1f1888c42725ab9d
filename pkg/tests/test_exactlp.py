from fractions import Fraction as F

import numpy as np
import pytest
from scipy.optimize import linprog

from qprob.exactlp import ExactLP, frac
from qprob.errors import QprobError


class TestBasics:
    def test_box_only_maximum(self):
        lp = ExactLP(2, lower=[0, 0], upper=[1, F(1, 2)])
        res = lp.maximize({0: 1, 1: 2})
        assert res.status == "optimal"
        assert res.objective == F(2)
        assert res.x == [F(1), F(1, 2)]

    def test_single_equality(self):
        lp = ExactLP(3, lower=[0] * 3, upper=[1] * 3)
        lp.add_eq({0: 1, 1: 1, 2: 1}, 1)
        res = lp.maximize({0: 1})
        assert res.objective == F(1)
        res = lp.minimize({0: 1})
        assert res.objective == F(0)

    def test_inequalities(self):
        # max x + y s.t. x + 2y <= 4, 3x + y <= 6, x,y >= 0
        lp = ExactLP(2)
        lp.add_le({0: 1, 1: 2}, 4)
        lp.add_le({0: 3, 1: 1}, 6)
        res = lp.maximize({0: 1, 1: 1})
        assert res.objective == F(14, 5)
        assert res.x == [F(8, 5), F(6, 5)]

    def test_free_variable(self):
        lp = ExactLP(2, lower=[None, 0], upper=[None, None])
        lp.add_eq({0: 1, 1: 1}, 3)
        res = lp.minimize({0: 1})
        assert res.status == "unbounded"

    def test_negative_lower_bounds(self):
        lp = ExactLP(1, lower=[-1], upper=[1])
        lp.add_le({0: 2}, 1)
        res = lp.maximize({0: 1})
        assert res.objective == F(1, 2)
        res = lp.minimize({0: 1})
        assert res.objective == F(-1)

    def test_fixed_variable_substitution(self):
        lp = ExactLP(2, lower=[F(1, 3), 0], upper=[F(1, 3), 1])
        lp.add_eq({0: 1, 1: 1}, 1)
        res = lp.maximize({1: 1})
        assert res.objective == F(2, 3)
        assert res.x[0] == F(1, 3)

    def test_exact_rationals_survive(self):
        lp = ExactLP(2, lower=[0, 0], upper=[None, None])
        lp.add_eq({0: F(1, 3), 1: F(1, 7)}, F(22, 21))
        lp.add_eq({0: 1, 1: -1}, 1)
        res = lp.maximize({0: 1, 1: 1})
        # x - y = 1 and x/3 + y/7 = 22/21 -> x = 5/2, y = 3/2
        assert res.x == [F(5, 2), F(3, 2)]

    def test_infeasible_with_certificate(self):
        lp = ExactLP(2, lower=[0, 0], upper=[1, 1])
        lp.add_eq({0: 1, 1: 1}, 3)
        res = lp.minimize({0: 1})
        assert res.status == "infeasible"
        assert res.certificate is not None
        assert res.certificate.verify(lp)

    def test_infeasible_mixed_rows(self):
        lp = ExactLP(2, lower=[0, 0], upper=[None, None])
        lp.add_le({0: 1, 1: 1}, 1)
        lp.add_ge({0: 1, 1: 1}, 2)
        res = lp.maximize({0: 1})
        assert res.status == "infeasible"
        assert res.certificate.verify(lp)

    def test_degenerate_cycling_guard(self):
        # classic degenerate example; Bland must terminate
        lp = ExactLP(4)
        lp.add_le({0: F(1, 4), 1: -8, 2: -1, 3: 9}, 0)
        lp.add_le({0: F(1, 2), 1: -12, 2: F(-1, 2), 3: 3}, 0)
        lp.add_le({2: 1}, 1)
        res = lp.maximize({0: F(3, 4), 1: -20, 2: F(1, 2), 3: -6})
        assert res.status == "optimal"
        assert res.objective == F(5, 4)

    def test_redundant_rows(self):
        lp = ExactLP(2, lower=[0, 0], upper=[1, 1])
        lp.add_eq({0: 1, 1: 1}, 1)
        lp.add_eq({0: 2, 1: 2}, 2)
        res = lp.maximize({0: 1})
        assert res.objective == F(1)

    def test_equality_feasibility_only(self):
        lp = ExactLP(3, lower=[0] * 3, upper=[1] * 3)
        lp.add_eq({0: 1, 1: 1}, 1)
        lp.add_eq({1: 1, 2: 1}, 1)
        res = lp.maximize({})
        assert res.status == "optimal"
        for (kind, coeffs, rhs) in lp.rows:
            assert sum(coeffs[j] * res.x[j] for j in coeffs) == rhs


def random_lp(rng, n, m):
    lower = []
    upper = []
    for _ in range(n):
        lo = rng.integers(-3, 1)
        hi = lo + rng.integers(1, 5)
        lower.append(F(int(lo)))
        upper.append(F(int(hi)))
    lp = ExactLP(n, lower=lower, upper=upper)
    a_rows = []
    kinds = []
    rhs = []
    for _ in range(m):
        coeffs = {j: F(int(rng.integers(-4, 5))) for j in range(n)}
        b = F(int(rng.integers(-6, 7)))
        if rng.random() < 0.4:
            lp.add_eq(coeffs, b)
            kinds.append("eq")
        else:
            lp.add_le(coeffs, b)
            kinds.append("le")
        a_rows.append([coeffs.get(j, F(0)) for j in range(n)])
        rhs.append(b)
    c = [F(int(rng.integers(-5, 6))) for j in range(n)]
    return lp, a_rows, kinds, rhs, c, lower, upper


class TestAgainstScipy:
    def test_fuzz_small_lps(self):
        rng = np.random.default_rng(20240117)
        checked = 0
        for trial in range(160):
            n = int(rng.integers(1, 5))
            m = int(rng.integers(1, 5))
            lp, a_rows, kinds, rhs, c, lower, upper = random_lp(rng, n, m)
            res = lp.maximize({j: c[j] for j in range(n)})

            a_ub, b_ub, a_eq, b_eq = [], [], [], []
            for row, kind, b in zip(a_rows, kinds, rhs):
                if kind == "eq":
                    a_eq.append([float(v) for v in row])
                    b_eq.append(float(b))
                else:
                    a_ub.append([float(v) for v in row])
                    b_ub.append(float(b))
            ref = linprog(
                [-float(v) for v in c],
                A_ub=a_ub or None,
                b_ub=b_ub or None,
                A_eq=a_eq or None,
                b_eq=b_eq or None,
                bounds=[(float(lo), float(hi)) for lo, hi in zip(lower, upper)],
                method="highs",
            )
            if res.status == "infeasible":
                assert ref.status == 2, f"trial {trial}: scipy says {ref.status}"
                assert res.certificate.verify(lp)
            else:
                assert res.status == "optimal"
                assert ref.status == 0, f"trial {trial}"
                assert abs(float(res.objective) + ref.fun) < 1e-7, f"trial {trial}"
                # our claimed optimum must actually satisfy every row
                for row, kind, b in zip(a_rows, kinds, rhs):
                    val = sum(row[j] * res.x[j] for j in range(n))
                    if kind == "eq":
                        assert val == b
                    else:
                        assert val <= b
                for j in range(n):
                    assert lower[j] <= res.x[j] <= upper[j]
                checked += 1
        assert checked > 60


class TestFrac:
    def test_frac_parses_strings(self):
        assert frac("3/2") == F(3, 2)
        assert frac(2) == F(2)
        assert frac(0.5) == F(1, 2)

    def test_bad_bounds_rejected(self):
        with pytest.raises(QprobError):
            ExactLP(2, lower=[0], upper=[1, 1])
