import numpy as np
import pytest

from qprob import core
from qprob.core import (
    DensityOperator,
    HermitianOperator,
    Ray,
    Subspace,
    born_probability,
    born_probability_raw,
    compatible,
    context_decomposition_probability,
    join,
    luders_update,
    meet,
    ortho_complement,
    tensor_event,
    tensor_ray,
)
from qprob.errors import (
    DimensionMismatchError,
    IncompatibleEventError,
    InvalidContextError,
    NullConditioningError,
    QprobError,
)


def random_density(rng, d, field="real"):
    if field == "complex":
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    else:
        g = rng.standard_normal((d, d))
    m = g @ g.conj().T
    return DensityOperator(m / np.real(np.trace(m)))


def random_basis(rng, d, field="real"):
    if field == "complex":
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    else:
        g = rng.standard_normal((d, d))
    q, _ = np.linalg.qr(g)
    return q


class TestRay:
    def test_normalization(self):
        r = Ray([3.0, 4.0])
        assert abs(np.vdot(r.vector, r.vector) - 1.0) <= 1e-12

    def test_same_line_up_to_phase(self):
        r = Ray([1.0, 1.0])
        assert r == Ray([-2.0, -2.0])
        assert Ray([1j, 0], field="complex") == Ray([1.0, 0.0], field="complex")
        assert r != Ray([1.0, -1.0])

    def test_zero_vector_rejected(self):
        with pytest.raises(QprobError):
            Ray([0.0, 0.0])


class TestSubspace:
    def test_gram_identity(self):
        s = Subspace.from_vectors([[1.0, 1.0, 0.0], [1.0, -1.0, 0.0]])
        g = s.basis.conj().T @ s.basis
        assert np.max(np.abs(g - np.eye(2))) <= 1e-10

    def test_double_complement(self):
        s = Subspace.from_vectors([[1.0, 2.0, 3.0], [0.0, 1.0, 1.0]])
        assert ortho_complement(ortho_complement(s)).equals(s)

    def test_non_orthonormal_basis_rejected(self):
        with pytest.raises(QprobError):
            Subspace(np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_dependent_spanners_collapse(self):
        s = Subspace.from_vectors([[1.0, 0.0], [2.0, 0.0]])
        assert s.dim == 1


class TestBorn:
    def test_certain_event(self):
        x0 = Ray([1.0, 0.0])
        w = DensityOperator.pure(x0)
        assert born_probability(w, x0) == pytest.approx(1.0, abs=1e-12)

    def test_impossible_event(self):
        w = DensityOperator.pure(Ray([1.0, 0.0]))
        assert born_probability(w, Ray([0.0, 1.0])) == pytest.approx(0.0, abs=1e-12)

    def test_diagonal_ray(self):
        w = DensityOperator.pure(Ray([1.0, 0.0]))
        x = Subspace.from_vectors([[1.0, 1.0]])
        assert born_probability(w, x) == pytest.approx(0.5, abs=1e-12)

    def test_dimension_mismatch(self):
        w = DensityOperator.pure(Ray([1.0, 0.0]))
        with pytest.raises(DimensionMismatchError):
            born_probability(w, Ray([1.0, 0.0, 0.0]))

    def test_clamping_keeps_raw(self):
        w = DensityOperator.pure(Ray([1.0, 0.0, 0.0]))
        clamped, raw = born_probability_raw(w, Ray([0.0, 1.0, 0.0]))
        assert clamped >= 0.0
        assert abs(raw) <= 1e-12

    def test_basis_sums_to_one(self):
        rng = np.random.default_rng(7)
        for d in range(3, 9):
            for field in ("real", "complex"):
                w = random_density(rng, d, field)
                q = random_basis(rng, d, field)
                total = sum(born_probability(w, Ray(q[:, i])) for i in range(d))
                assert total == pytest.approx(1.0, abs=1e-9)

    def test_additive_over_orthogonal_subspaces(self):
        rng = np.random.default_rng(11)
        w = random_density(rng, 4)
        q = random_basis(rng, 4)
        a = Subspace(q[:, :1])
        b = Subspace(q[:, 1:3])
        both = Subspace(q[:, :3])
        assert born_probability(w, a) + born_probability(w, b) == pytest.approx(
            born_probability(w, both), abs=1e-9
        )


class TestLuders:
    def test_certain_event_leaves_state(self):
        x0 = Ray([1.0, 0.0, 0.0])
        w = DensityOperator.pure(x0)
        big = Subspace.from_vectors([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        w2 = luders_update(w, big)
        assert np.allclose(w2.matrix, w.matrix, atol=1e-12)

    def test_null_conditioning_raises(self):
        w = DensityOperator.pure(Ray([1.0, 0.0]))
        with pytest.raises(NullConditioningError):
            luders_update(w, Ray([0.0, 1.0]))

    def test_cat_case(self):
        # conditioning on z = (x + y)/sqrt(2) leaves complete uncertainty
        x = Ray([1.0, 0.0])
        y = Ray([0.0, 1.0])
        z = Ray([1.0, 1.0])
        w = luders_update(DensityOperator.maximally_mixed(2), z)
        assert born_probability(w, x) == pytest.approx(0.5, abs=1e-12)
        assert born_probability(w, y) == pytest.approx(0.5, abs=1e-12)

    def test_conditioned_probability_identity(self):
        rng = np.random.default_rng(3)
        w = random_density(rng, 4)
        q = random_basis(rng, 4)
        x = Subspace(q[:, :2])
        y = Subspace(q[:, :1])  # y <= x, hence compatible
        lhs = born_probability(luders_update(w, x), y) * born_probability(w, x)
        px = x.projector()
        rhs = float(np.real(np.trace(px @ w.matrix @ px @ y.projector())))
        assert lhs == pytest.approx(rhs, abs=1e-9)


class TestLatticeOps:
    def test_meet_of_skew_rays_is_zero(self):
        x = Subspace.from_vectors([[1.0, 0.0]])
        y = Subspace.from_vectors([[1.0, 1.0]])
        assert meet(x, y).is_zero()

    def test_join_of_axes_is_plane(self):
        e1 = Subspace.from_vectors([[1.0, 0.0, 0.0]])
        e2 = Subspace.from_vectors([[0.0, 1.0, 0.0]])
        plane = Subspace.from_vectors([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        assert join(e1, e2).equals(plane)

    def test_orthomodularity(self):
        rng = np.random.default_rng(5)
        q = random_basis(rng, 5)
        x = Subspace(q[:, :2])
        y = Subspace(q[:, :4])  # x <= y by construction
        rebuilt = join(x, meet(y, ortho_complement(x)))
        assert rebuilt.equals(y)

    def test_incompatibility_witness(self):
        # for non-orthogonal distinct rays the decomposition fails
        x = Subspace.from_vectors([[1.0, 0.0, 0.0]])
        z = Subspace.from_vectors([[1.0, 1.0, 0.0]])
        lhs = join(meet(x, z), meet(x, ortho_complement(z)))
        assert not lhs.equals(x)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            meet(Subspace.full(2), Subspace.full(3))


class TestTensor:
    def test_kron_ray(self):
        t = tensor_ray(Ray([1.0, 0.0]), Ray([0.0, 1.0]))
        assert np.allclose(t.vector, [0.0, 1.0, 0.0, 0.0])

    def test_local_event_dimension(self):
        a = Ray([1.0, 0.0])
        emb = tensor_event(a, "left", (2, 2))
        assert emb.dim == 2

    def test_meet_of_embeddings_is_product(self):
        rng = np.random.default_rng(9)
        for _ in range(5):
            a = Ray(rng.standard_normal(2) + 1j * rng.standard_normal(2))
            b = Ray(rng.standard_normal(2) + 1j * rng.standard_normal(2))
            lhs = meet(tensor_event(a, "left", (2, 2)), tensor_event(b, "right", (2, 2)))
            assert lhs.equals(tensor_ray(a, b).subspace(), tol=1e-8)


class TestContextDecomposition:
    def test_member_of_context(self):
        rng = np.random.default_rng(2)
        w = random_density(rng, 3)
        q = random_basis(rng, 3)
        ctx = [Subspace(q[:, i:i + 1]) for i in range(3)]
        y = ctx[1]
        p = context_decomposition_probability(w, y, ctx)
        assert p == pytest.approx(born_probability(w, y), abs=1e-9)

    def test_two_contexts_agree(self):
        rng = np.random.default_rng(4)
        w = random_density(rng, 4)
        q = random_basis(rng, 4)
        y = Subspace(q[:, :2])
        ctx_a = [Subspace(q[:, :2]), Subspace(q[:, 2:])]
        # a different refinement, still compatible with y
        ctx_c = [Subspace(q[:, :1]), Subspace(q[:, 1:2]), Subspace(q[:, 2:])]
        pa = context_decomposition_probability(w, y, ctx_a)
        pc = context_decomposition_probability(w, y, ctx_c)
        assert pa == pytest.approx(pc, abs=1e-9)
        assert pa == pytest.approx(born_probability(w, y), abs=1e-9)

    def test_full_space_is_certain(self):
        rng = np.random.default_rng(6)
        w = random_density(rng, 3)
        q = random_basis(rng, 3)
        ctx = [Subspace(q[:, i:i + 1]) for i in range(3)]
        assert context_decomposition_probability(w, Subspace.full(3), ctx) == pytest.approx(1.0, abs=1e-9)

    def test_incomplete_context_rejected(self):
        w = DensityOperator.maximally_mixed(3)
        ctx = [Subspace.from_vectors([[1.0, 0.0, 0.0]])]
        with pytest.raises(InvalidContextError):
            context_decomposition_probability(w, Subspace.full(3), ctx)

    def test_incompatible_event_rejected(self):
        w = DensityOperator.maximally_mixed(2)
        ctx = [Subspace.from_vectors([[1.0, 0.0]]), Subspace.from_vectors([[0.0, 1.0]])]
        y = Subspace.from_vectors([[1.0, 1.0]])
        with pytest.raises(IncompatibleEventError):
            context_decomposition_probability(w, y, ctx)


class TestOperators:
    def test_hermitian_rejects_asymmetric(self):
        with pytest.raises(QprobError):
            HermitianOperator(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_density_rejects_negative(self):
        with pytest.raises(QprobError):
            DensityOperator(np.diag([1.5, -0.5]))

    def test_density_rejects_wrong_trace(self):
        with pytest.raises(QprobError):
            DensityOperator(np.eye(2))

    def test_luders_output_is_density(self):
        rng = np.random.default_rng(12)
        w = random_density(rng, 4, "complex")
        x = Subspace.from_vectors([[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 0.0]])
        w2 = luders_update(w, x)
        assert isinstance(w2, DensityOperator)

    def test_compatible_commuting(self):
        q = np.eye(4)
        a = Subspace(q[:, :2])
        b = Subspace(q[:, 1:3])
        assert compatible(a, b)
