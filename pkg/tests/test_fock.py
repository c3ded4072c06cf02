import numpy as np
import pytest

from vibronic import fock
from vibronic.fock import CutoffError, FockSpace, commutator, embed, identity_operator


def test_creation_l1():
    assert np.array_equal(fock.creation(1), np.array([[0, 0], [1, 0]], dtype=complex))


def test_creation_l2_entries():
    c = fock.creation(2)
    assert c[1, 0] == 1.0
    assert c[2, 1] == pytest.approx(np.sqrt(2))
    assert np.count_nonzero(c) == 2


def test_creation_is_annihilation_transpose():
    for l_max in (1, 3, 7):
        assert np.array_equal(fock.creation(l_max).T, fock.annihilation(l_max))


def test_invalid_cutoff():
    with pytest.raises(CutoffError):
        fock.creation(0)
    with pytest.raises(CutoffError):
        fock.position(-2)


def test_position_l1():
    q = fock.position(1)
    assert np.allclose(q, np.array([[0, 1], [1, 0]]) / np.sqrt(2))


def test_position_entry_formula():
    q = fock.position(3)
    assert q[2, 1] == pytest.approx(1.0)  # sqrt(2)/sqrt(2)
    assert np.allclose(q, q.conj().T)


@pytest.mark.parametrize("l_max", range(1, 11))
def test_momentum_hermitian_traceless_imaginary(l_max):
    p = fock.momentum(l_max)
    assert np.allclose(p, p.conj().T)
    assert abs(np.trace(p)) < 1e-14
    assert np.abs(p.real).max() < 1e-14


def test_number_operator_identity_on_all_levels():
    l_max = 6
    n = fock.creation(l_max) @ fock.annihilation(l_max)
    assert np.allclose(n, np.diag(np.arange(l_max + 1)))


def test_boundary_commutator_failure_location():
    # canonical [a, a^dag] = 1 fails exactly (and only) at l = L_max, where
    # the truncated product a a^dag is missing the value L_max + 1
    l_max = 5
    a = fock.annihilation(l_max)
    ad = fock.creation(l_max)
    comm = a @ ad - ad @ a
    expected = np.eye(l_max + 1)
    expected[l_max, l_max] = -l_max
    assert np.allclose(comm, expected, atol=1e-14)


@pytest.mark.parametrize("l_max", (2, 5, 9))
def test_q2_plus_p2_identity(l_max):
    q = fock.position(l_max)
    p = fock.momentum(l_max)
    a = fock.annihilation(l_max)
    ad = fock.creation(l_max)
    assert np.abs((q @ q + p @ p) - (a @ ad + ad @ a)).max() < 1e-12


def test_fockspace_indexing():
    space = FockSpace((3, 2, 4))
    assert space.dimension == 24
    assert space.flat_index((0, 0, 0)) == 0
    # mode 0 is the slowest index
    assert space.flat_index((1, 0, 0)) == 8
    assert space.flat_index((0, 1, 0)) == 4
    assert space.flat_index((0, 0, 1)) == 1
    for flat in range(space.dimension):
        assert space.flat_index(space.multi_index(flat)) == flat


def test_fockspace_vacuum():
    space = FockSpace((2, 2))
    vac = space.vacuum_state()
    assert vac[0] == 1.0
    assert np.linalg.norm(vac) == 1.0


def test_embed_identity():
    space = FockSpace((3, 4))
    op = embed(np.eye(3, dtype=complex), 0, space)
    assert np.allclose(op.to_dense(), np.eye(12))


def test_embed_dimension_mismatch():
    space = FockSpace((3, 4))
    with pytest.raises(ValueError):
        embed(np.eye(2, dtype=complex), 0, space)


def test_cross_mode_operators_commute_exactly():
    space = FockSpace((4, 4))
    q0 = embed(fock.position(3), 0, space)
    p1 = embed(fock.momentum(3), 1, space)
    assert np.abs(commutator(q0, p1).to_dense()).max() == 0.0


def test_same_mode_commutator_on_interior():
    space = FockSpace((5, 3))
    q = embed(fock.position(4), 0, space)
    p = embed(fock.momentum(4), 0, space)
    comm = commutator(q, p).to_dense()
    interior = [space.flat_index((n0, n1)) for n0 in range(4) for n1 in range(3)]
    sub = comm[np.ix_(interior, interior)]
    assert np.abs(sub - 1j * np.eye(len(interior))).max() < 1e-12


def test_operator_arithmetic_cancellation():
    space = FockSpace((4,))
    q = embed(fock.position(3), 0, space, hermitian=True)
    zero = q + (-1.0) * q
    assert np.abs(zero.to_dense()).max() == 0.0


def test_q_squared_vacuum_element():
    space = FockSpace((3,))
    q = embed(fock.position(2), 0, space)
    q2 = q @ q
    assert q2.element((0,), (0,)) == pytest.approx(0.5)


def test_multiply_associative():
    rng = np.random.default_rng(11)
    space = FockSpace((2, 3, 2))
    ops = []
    for _ in range(3):
        m = rng.normal(size=(space.dimension, space.dimension)) \
            + 1j * rng.normal(size=(space.dimension, space.dimension))
        ops.append(fock.ManyBodyOperator(space, m))
    a, b, c = ops
    left = ((a @ b) @ c).to_dense()
    right = (a @ (b @ c)).to_dense()
    assert np.abs(left - right).max() < 1e-12 * np.abs(left).max()


def test_hermiticity_flag_and_check():
    space = FockSpace((3,))
    q = embed(fock.position(2), 0, space, hermitian=True)
    assert q.verify_hermitian()
    prod = q @ q
    assert not prod.hermitian  # conservative flag
    assert prod.verify_hermitian()  # but numerically Hermitian
    skew = fock.ManyBodyOperator(space, np.diag([1j, 0, 0]))
    assert not skew.verify_hermitian()


def test_representation_independence():
    space = FockSpace((4, 3))
    q_dense = embed(fock.position(3), 0, space, representation="dense")
    q_sparse = embed(fock.position(3), 0, space, representation="sparse")
    assert q_sparse.is_sparse and not q_dense.is_sparse
    assert np.abs(q_dense.to_dense() - q_sparse.to_dense()).max() < 1e-15
    prod_d = (q_dense @ q_dense).to_dense()
    prod_s = (q_sparse @ q_sparse).to_dense()
    assert np.abs(prod_d - prod_s).max() < 1e-12


def test_space_mismatch_raises():
    a = identity_operator(FockSpace((3,)))
    b = identity_operator(FockSpace((4,)))
    with pytest.raises(ValueError):
        _ = a + b
