import math

import numpy as np
import pytest

from qprob.core import HermitianOperator, Ray
from qprob.errors import (
    CapExceededError,
    DimensionMismatchError,
    NotAWitnessError,
    QprobError,
)
from qprob.witness import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    ConjectureReport,
    NQubitRay,
    ProductState,
    conjecture_experiment,
    default_family,
    entanglement_estimate,
    ghz,
    haar_sample,
    mk_operator,
    mk_optimized_settings,
    mk_standard_settings,
    normalize_witness,
    schmidt_sup_upper_bound,
    separable_sup,
    separable_sup_grid2,
    xy_setting,
)


def projector2(x: NQubitRay) -> HermitianOperator:
    return HermitianOperator(2.0 * np.outer(x.vector, x.vector.conj()))


class TestTypes:
    def test_nqubit_ray_dimension_check(self):
        with pytest.raises(DimensionMismatchError):
            NQubitRay(Ray([1.0, 0.0, 0.0]), 2)

    def test_product_state_assembles_to_unit_ray(self):
        s = ProductState((Ray([1.0, 1.0]), Ray([1.0, -1.0]), Ray([0.0, 1.0])))
        x = s.assemble()
        assert x.n == 3
        assert abs(np.vdot(x.vector, x.vector) - 1) <= 1e-12


class TestGhz:
    def test_bell_vector(self):
        g = ghz(2)
        assert np.allclose(g.vector, np.array([1, 0, 0, 1]) / np.sqrt(2))

    def test_unit_norm_up_to_twelve(self):
        for n in range(2, 13):
            g = ghz(n)
            assert abs(np.linalg.norm(g.vector) - 1.0) <= 1e-12

    def test_too_small(self):
        with pytest.raises(QprobError):
            ghz(1)


class TestSeparableSup:
    def test_identity(self):
        assert separable_sup(HermitianOperator(np.eye(4)), 2) == pytest.approx(1.0, abs=1e-12)

    def test_ghz_projector_half(self):
        # grid oracle agreement at n = 2
        a = projector2(ghz(2))
        alt = separable_sup(a, 2)
        grid = separable_sup_grid2(a)
        assert alt == pytest.approx(1.0, abs=1e-9)
        assert abs(alt - grid) <= 1e-3

    def test_ghz_projector_half_all_n(self):
        for n in range(2, 7):
            a = projector2(ghz(n))
            assert separable_sup(a, n) == pytest.approx(1.0, abs=1e-8)

    def test_zz_attained_by_product_eigenvectors(self):
        a = HermitianOperator(np.kron(PAULI_Z, PAULI_Z))
        assert separable_sup(a, 2) == pytest.approx(1.0, abs=1e-12)

    def test_never_exceeds_operator_norm(self):
        rng = np.random.default_rng(8)
        for n in (1, 2, 3):
            g = rng.standard_normal((2 ** n, 2 ** n)) + 1j * rng.standard_normal((2 ** n, 2 ** n))
            a = HermitianOperator(g + g.conj().T)
            sup = separable_sup(a, n, restarts=8)
            assert sup <= a.operator_norm() + 1e-9
            if n == 1:
                assert sup == pytest.approx(a.operator_norm(), abs=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            separable_sup(HermitianOperator(np.eye(3)), 2)

    def test_schmidt_upper_bound_sandwich(self):
        # for ghz the sandwich closes: lower meets upper at 1/2
        g = ghz(4)
        assert schmidt_sup_upper_bound(g) == pytest.approx(0.5, abs=1e-12)


class TestNormalizeWitness:
    def test_ghz_projector_is_a_norm2_witness(self):
        w = normalize_witness(projector2(ghz(2)), 2)
        assert w.operator_norm == pytest.approx(2.0, abs=1e-6)
        assert w.separable_sup == 1.0

    def test_identity_rejected(self):
        with pytest.raises(NotAWitnessError):
            normalize_witness(HermitianOperator(np.eye(4)), 2)

    def test_single_qubit_never_a_witness(self):
        rng = np.random.default_rng(2)
        g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        a = HermitianOperator(g + g.conj().T)
        with pytest.raises(NotAWitnessError):
            normalize_witness(a, 1)

    def test_product_expectation_bounded_by_one(self):
        # 10^4 seeded product states against the normalized ghz projector
        # and the optimally set MK witness
        rng = np.random.default_rng(77)
        for wit in (normalize_witness(projector2(ghz(2)), 2),
                    normalize_witness(mk_operator(mk_standard_settings(2)), 2, sup=1.0)):
            f = rng.standard_normal((10 ** 4, 2, 2)) + 1j * rng.standard_normal((10 ** 4, 2, 2))
            f = f / np.linalg.norm(f, axis=2, keepdims=True)
            vecs = np.einsum("ka,kb->kab", f[:, 0], f[:, 1]).reshape(-1, 4)
            vals = np.abs(np.einsum("ki,ij,kj->k", vecs.conj(), wit.operator.matrix, vecs).real)
            assert float(np.max(vals)) <= 1 + 1e-6


class TestMKOperator:
    def test_two_qubit_unfolding(self):
        a, ap = PAULI_X, PAULI_Y
        b, bp = PAULI_X, PAULI_Y
        direct = (np.kron(a, b + bp) + np.kron(ap, b - bp)) / 2
        rec = mk_operator([(a, ap), (b, bp)])
        assert np.allclose(rec.matrix, direct, atol=1e-12)

    def test_optimal_eigen_norm_is_sqrt2(self):
        b = mk_operator(mk_standard_settings(2))
        assert b.operator_norm() == pytest.approx(np.sqrt(2), abs=1e-9)

    def test_hermitian_for_random_settings(self):
        rng = np.random.default_rng(5)
        for n in range(1, 7):
            settings = []
            for _ in range(n):
                u = rng.standard_normal(3)
                u /= np.linalg.norm(u)
                v = rng.standard_normal(3)
                v /= np.linalg.norm(v)
                settings.append((
                    u[0] * PAULI_X + u[1] * PAULI_Y + u[2] * PAULI_Z,
                    v[0] * PAULI_X + v[1] * PAULI_Y + v[2] * PAULI_Z,
                ))
            b = mk_operator(settings)
            assert np.max(np.abs(b.matrix - b.matrix.conj().T)) <= 1e-10

    def test_rejects_non_involutions(self):
        with pytest.raises(QprobError):
            mk_operator([(PAULI_X, np.eye(2) * 2.0)])

    def test_mk_norm_caps_at_tsirelson_level(self):
        rng = np.random.default_rng(11)
        for n in (2, 3):
            angles = rng.uniform(0, 2 * np.pi, 2 * n)
            st = [(xy_setting(angles[2 * k]), xy_setting(angles[2 * k + 1]))
                  for k in range(n)]
            assert mk_operator(st).operator_norm() <= 2 ** ((n - 1) / 2) + 1e-9


class TestEstimates:
    def test_ghz2_projector_gives_two(self):
        est = entanglement_estimate(ghz(2))
        assert est.value == pytest.approx(2.0, abs=1e-3)
        assert est.contributions["projector"] == pytest.approx(2.0, abs=1e-3)

    def test_mk_family_sqrt2_ladder(self):
        vals = {}
        for n in (2, 3, 4):
            est = entanglement_estimate(ghz(n))
            vals[n] = est.contributions["mk-optimized"]
        for n in (3, 4):
            ratio = vals[n] / vals[n - 1]
            assert abs(ratio - math.sqrt(2)) <= 0.05 * math.sqrt(2)

    def test_family_estimate_never_below_projector_from_three(self):
        for n in (3, 4):
            est = entanglement_estimate(ghz(n))
            assert est.value >= est.contributions["projector"] - 1e-9

    def test_product_state_estimate_at_most_one(self):
        s = ProductState((Ray([1.0, 0.5 + 0.5j]), Ray([0.3, 1.0]))).assemble()
        est = entanglement_estimate(s)
        assert est.value <= 1 + 1e-6

    def test_monotone_in_family(self):
        g = ghz(3)
        fam = default_family(g)
        small = entanglement_estimate(g, family=fam[:1])
        big = entanglement_estimate(g, family=fam)
        assert big.value >= small.value - 1e-12

    def test_empty_family_rejected(self):
        with pytest.raises(QprobError):
            entanglement_estimate(ghz(2), family=[])


class TestHaarSample:
    def test_reproducible(self):
        a = haar_sample(3, 5, seed=11)
        b = haar_sample(3, 5, seed=11)
        for x, y in zip(a, b):
            assert np.array_equal(x.vector, y.vector)

    def test_mean_component_magnitude(self):
        n, count = 3, 10 ** 4
        xs = haar_sample(n, count, seed=1)
        mags = np.array([np.abs(x.vector) ** 2 for x in xs])
        mean = mags.mean()
        se = mags.std() / np.sqrt(mags.size)
        assert abs(mean - 1 / 2 ** n) <= 3 * se + 1e-12

    def test_pair_overlap_moment(self):
        n, count = 2, 4000
        xs = haar_sample(n, 2 * count, seed=3)
        ov = [abs(np.vdot(xs[2 * i].vector, xs[2 * i + 1].vector)) ** 2
              for i in range(count)]
        mean = float(np.mean(ov))
        se = float(np.std(ov) / np.sqrt(count))
        assert abs(mean - 1 / 2 ** n) <= 4 * se

    def test_unitary_invariance_spot_check(self):
        n, count = 2, 20000
        xs = np.array([x.vector for x in haar_sample(n, count, seed=9)])
        rng = np.random.default_rng(4)
        g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        q, _ = np.linalg.qr(g)
        ref = Ray([1.0, 0, 0, 0], field="complex")
        before = np.abs(xs @ np.conj(ref.vector)) ** 2
        after = np.abs((xs @ q.T) @ np.conj(ref.vector)) ** 2
        # same distribution: compare means within joint standard error
        se = np.hypot(before.std(), after.std()) / np.sqrt(count)
        assert abs(before.mean() - after.mean()) <= 4 * se

    def test_cap(self):
        with pytest.raises(CapExceededError):
            haar_sample(12, 10 ** 6, seed=0)


class TestConjecture:
    def test_huge_constant_never_exceeded(self):
        rep = conjecture_experiment([2, 3], 1000.0, 1000, seed=0)
        assert all(r["exceed_fraction"] == 0.0 for r in rep.runs)

    def test_zero_constant_always_exceeded(self):
        rep = conjecture_experiment([2, 3], 0.0, 1000, seed=0)
        assert all(r["exceed_fraction"] == 1.0 for r in rep.runs)

    def test_bit_reproducible(self):
        r1 = conjecture_experiment([2, 3, 4], 1.0, 1000, seed=5)
        r2 = conjecture_experiment([2, 3, 4], 1.0, 1000, seed=5)
        assert r1.to_json() == r2.to_json()

    def test_csv_layout(self):
        rep = conjecture_experiment([2], 1.0, 1000, seed=1)
        lines = rep.to_csv().strip().splitlines()
        assert lines[0] == "n,samples,C,threshold,exceed_fraction,mean_estimate,seed"
        assert len(lines) == 2

    def test_range_and_sample_caps(self):
        with pytest.raises(CapExceededError):
            conjecture_experiment([13], 1.0, 1000, seed=0)
        with pytest.raises(QprobError):
            conjecture_experiment([2], 1.0, 10, seed=0)
