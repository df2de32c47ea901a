import numpy as np
import pytest

from temposim.bath import EtaTable
from temposim.errors import ClassConsistencyError
from temposim.liouville import (
    IndexClasses,
    SystemSpec,
    free_propagator,
    influence_table,
    liouville_basis,
    reduce_classes,
)
from temposim.propnet import (
    apply_grow,
    apply_step,
    build_bsite,
    build_grow_mpo,
    build_step_mpo,
)
from temposim.tensornet import MatrixProductState, TruncationPolicy

SZ = np.diag([0.5, -0.5]).astype(complex)
SX = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
EXACT = TruncationPolicy(relative_cutoff=0.0)
RNG = np.random.default_rng(99)


def make_table(memory=4, omega=1.0, delta=0.1, etas=None, coupling=SZ,
               rng=RNG):
    d = coupling.shape[0]
    spec = SystemSpec(hamiltonian=omega * (SX if d == 2 else np.zeros((d, d))),
                      coupling=coupling,
                      initial_state=np.eye(d) / d)
    basis = liouville_basis(coupling)
    prop = free_propagator(spec, delta, basis)
    if etas is None:
        etas = 0.1 * (rng.standard_normal(memory + 1)
                      + 1j * rng.standard_normal(memory + 1))
    table = influence_table(
        basis, EtaTable(delta=delta, memory=memory, values=np.asarray(etas)),
        prop)
    return table, basis


def dense_grow_tensor(n, table):
    """Direct dense construction of the n-step propagation tensor.

    Output legs (j_n .. j_1), input legs (i_{n-1} .. i_1); built from the
    influence matrices alone, independent of any MPO code.
    """
    d2 = table.basis.liouville_dim
    shape = (d2,) * (2 * n - 1)
    out = np.zeros(shape, dtype=complex)
    for idx in np.ndindex(*((d2,) * n)):
        j = idx  # (j_n, j_{n-1}, ..., j_1)
        val = table[0][j[0], j[0]]
        for k in range(1, n):
            val *= table[k][j[0], j[k]]
        out[j + j[1:]] = val
    return out


def dense_apply_grow(n, table, adt):
    """Dense oracle for one grow step on a dense (n-1)-leg state."""
    b = dense_grow_tensor(n, table)
    d2 = table.basis.liouville_dim
    mat = b.reshape(d2 ** n, d2 ** (n - 1))
    return (mat @ adt.reshape(-1)).reshape((d2,) * n)


class TestBSite:
    def test_beyond_memory_is_identity(self):
        table, _ = make_table(memory=3)
        site = build_bsite(7, table)
        d2 = 4
        expected = np.einsum("ab,ji->ajib", np.eye(d2), np.eye(d2))
        assert np.array_equal(site.tensor, expected.astype(complex))

    def test_class_bond_dimension(self):
        table, basis = make_table(memory=3)
        classes = reduce_classes(basis)
        site = build_bsite(2, table, classes)
        assert site.bond_dims == (3, 3)  # 2d - 1 for spin-1/2

    def test_bridge_site_shape(self):
        table, basis = make_table(memory=3)
        classes = reduce_classes(basis)
        site = build_bsite(1, table, classes)
        assert site.bond_dims == (4, 3)

    def test_delta_pattern_matches_formula(self):
        table, _ = make_table(memory=4)
        site = build_bsite(2, table)
        d2 = 4
        expected = np.zeros((d2, d2, d2, d2), dtype=complex)
        for a in range(d2):
            for j in range(d2):
                expected[a, j, j, a] = table[2][a, j]
        assert np.max(np.abs(site.tensor - expected)) == 0

    def test_inconsistent_classes_rejected(self):
        table, basis = make_table(memory=3)
        # bogus partition merging distinct Ominus values into one class
        bogus = IndexClasses(
            labels=np.zeros(4, dtype=int),
            representatives=np.array([0]),
            values=np.array([0.0]),
        )
        with pytest.raises(ClassConsistencyError):
            build_bsite(2, table, bogus)


class TestGrowMpo:
    def test_n2_dense_equivalent(self):
        table, _ = make_table(memory=3)
        mpo = build_grow_mpo(2, table)
        dense = mpo.to_dense()  # legs (j2, j1, in_dummy, i1)
        d2 = 4
        for j2 in range(d2):
            for j1 in range(d2):
                for i1 in range(d2):
                    expected = (table[0][j2, j2] * table[1][j2, j1]
                                * (1.0 if j1 == i1 else 0.0))
                    assert dense[j2, j1, 0, i1] == pytest.approx(expected,
                                                                 abs=1e-15)

    def test_n3_matches_dense_formula(self):
        table, _ = make_table(memory=4)
        mpo = build_grow_mpo(3, table)
        dense = mpo.to_dense()[:, :, :, 0, :, :]  # squeeze dummy input
        expected = dense_grow_tensor(3, table)
        assert np.max(np.abs(dense - expected)) <= 1e-12

    def test_n3_reduced_matches_dense_formula(self):
        table, basis = make_table(memory=4)
        classes = reduce_classes(basis)
        mpo = build_grow_mpo(3, table, classes)
        dense = mpo.to_dense()[:, :, :, 0, :, :]
        expected = dense_grow_tensor(3, table)
        assert np.max(np.abs(dense - expected)) <= 1e-12

    def test_grow_application_matches_dense(self):
        table, _ = make_table(memory=5)
        adt = MatrixProductState.from_product(
            [RNG.standard_normal(4) + 1j * RNG.standard_normal(4)
             for _ in range(3)])
        grown = apply_grow(adt, build_grow_mpo(4, table), EXACT)
        expected = dense_apply_grow(4, table, adt.to_dense())
        assert np.max(np.abs(grown.to_dense() - expected)) <= 1e-12

    def test_trivial_influence_preserves_sum(self):
        # eta = 0 and H0 = 0: growing must leave the total sum unchanged
        table, _ = make_table(memory=4, omega=0.0,
                              etas=np.zeros(5, dtype=complex))
        vec = RNG.standard_normal(4) + 1j * RNG.standard_normal(4)
        adt = MatrixProductState.from_product([vec, np.ones(4)])
        grown = apply_grow(adt, build_grow_mpo(3, table), EXACT)
        assert np.sum(grown.to_dense()) == pytest.approx(
            np.sum(adt.to_dense()), rel=1e-12)

    def test_out_of_range(self):
        table, _ = make_table(memory=3)
        with pytest.raises(ValueError):
            build_grow_mpo(1, table)
        with pytest.raises(ValueError):
            build_grow_mpo(6, table)


class TestStepMpo:
    def test_k1_transfer_matrix(self):
        table, _ = make_table(memory=2)
        mpo = build_step_mpo(1, table)
        dense = mpo.to_dense()  # (j1, out_dummy, in_dummy, i1)
        d2 = 4
        transfer = dense[:, 0, 0, :]
        expected = np.diag(np.diag(table[0])) @ np.ones((d2, d2))
        expected = np.diag(table[0]).reshape(-1, 1) * table[1]
        assert np.max(np.abs(transfer - expected)) <= 1e-14

    def test_k3_matches_summed_grow(self):
        table, _ = make_table(memory=4)
        step = build_step_mpo(3, table)
        dense_step = step.to_dense()[:, :, :, 0, 0, :, :, :]
        grow4 = dense_grow_tensor(4, table)
        expected = grow4.sum(axis=3)  # sum earliest output leg j1
        assert np.max(np.abs(dense_step - expected)) <= 1e-12

    def test_k3_reduced_matches_summed_grow(self):
        table, basis = make_table(memory=4)
        classes = reduce_classes(basis)
        step = build_step_mpo(3, table, classes)
        dense_step = step.to_dense()[:, :, :, 0, 0, :, :, :]
        expected = dense_grow_tensor(4, table).sum(axis=3)
        assert np.max(np.abs(dense_step - expected)) <= 1e-12

    def test_step_application_matches_dense(self):
        table, _ = make_table(memory=3)
        sites = [RNG.standard_normal((1, 4, 2)) + 0j,
                 RNG.standard_normal((2, 4, 2)) + 0j,
                 RNG.standard_normal((2, 4, 1)) + 0j]
        adt = MatrixProductState(sites)
        out = apply_step(adt, build_step_mpo(3, table), EXACT)
        assert out.physical_dims == [4, 4, 4]
        grow4 = dense_grow_tensor(4, table)
        d2 = 4
        mat = grow4.sum(axis=3).reshape(d2 ** 3, d2 ** 3)
        expected = (mat @ adt.to_dense().reshape(-1)).reshape(4, 4, 4)
        assert np.max(np.abs(out.to_dense() - expected)) <= 1e-12

    def test_trivial_influence_keeps_marginal(self):
        # eta = 0, H0 = 0: stepping keeps the extracted density vector
        table, _ = make_table(memory=3, omega=0.0,
                              etas=np.zeros(4, dtype=complex))
        vec = RNG.standard_normal(4) + 1j * RNG.standard_normal(4)
        adt = MatrixProductState.from_product([vec, np.ones(4), np.ones(4)])
        out = apply_step(adt, build_step_mpo(3, table), EXACT)
        before = adt.to_dense().sum(axis=(1, 2))
        after = out.to_dense().sum(axis=(1, 2))
        assert np.allclose(after, before, atol=1e-12)

    def test_out_of_range(self):
        table, _ = make_table(memory=3)
        with pytest.raises(ValueError):
            build_step_mpo(0, table)
        with pytest.raises(ValueError):
            build_step_mpo(4, table)


class TestBondStructure:
    def test_unreduced_bonds_are_d2(self):
        table, _ = make_table(memory=5)
        mpo = build_step_mpo(5, table)
        assert mpo.bond_dims == [4] * 5

    def test_reduced_bonds_after_first_are_class_count(self):
        table, basis = make_table(memory=5)
        classes = reduce_classes(basis)
        mpo = build_step_mpo(5, table, classes)
        assert mpo.bond_dims[0] == 4  # carries full index into I_1
        assert mpo.bond_dims[1:] == [3] * 4

    def test_reduced_spin1_bonds(self):
        sz1 = np.diag([1.0, 0.0, -1.0]).astype(complex)
        table, basis = make_table(memory=4, coupling=sz1, omega=0.0,
                                  delta=0.1)
        classes = reduce_classes(basis)
        mpo = build_step_mpo(4, table, classes)
        assert mpo.bond_dims[0] == 9
        assert mpo.bond_dims[1:] == [5] * 3  # 2d - 1 = 5
