from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dgcoring.linalg import (
    GF,
    QQ,
    Matrix,
    invert,
    kernel_image,
    quotient_basis,
    rank,
    solve,
    solve_matrix,
)


def test_field_axioms_rationals():
    f = QQ
    a = f.of("3/7")
    assert f.add(a, f.neg(a)) == f.zero
    assert f.mul(a, f.inv(a)) == f.one


def test_field_axioms_prime():
    f = GF(5)
    for a in range(1, 5):
        assert f.add(a, f.neg(a)) == f.zero
        assert f.mul(a, f.inv(a)) == f.one


def test_non_prime_modulus_rejected():
    with pytest.raises(ValueError):
        GF(4)
    with pytest.raises(ValueError):
        GF(1)
    GF(2)
    GF(101)


def test_kernel_image_hand_example():
    # [[1,1],[1,1]] over Q: kernel spanned by (1,-1), rank 1
    m = Matrix.from_rows(QQ, [[1, 1], [1, 1]])
    ki = kernel_image(m)
    assert ki.rank == 1
    assert ki.kernel.ncols == 1
    k = ki.kernel.col(0)
    # echelon-normalized: leading 1 at row 0
    assert k == {0: Fraction(1), 1: Fraction(-1)}
    assert (m * ki.kernel).is_zero()


def test_kernel_image_identity_f5():
    m = Matrix.identity(GF(5), 3)
    ki = kernel_image(m)
    assert ki.rank == 3
    assert ki.kernel.ncols == 0


def test_kernel_image_zero_matrix():
    m = Matrix.zero(QQ, 2, 3)
    ki = kernel_image(m)
    assert ki.rank == 0
    assert ki.kernel.ncols == 3
    assert ki.kernel == Matrix.identity(QQ, 3)


def test_solve_scalar_inverse():
    m = Matrix.from_rows(QQ, [[2]])
    x = solve(m, {0: Fraction(1)})
    assert x == {0: Fraction(1, 2)}


def test_solve_inconsistent():
    m = Matrix.from_rows(QQ, [[1], [1]])
    assert solve(m, {0: Fraction(1)}) is None


def test_solve_f2_enumeration():
    # [[1,1]] x = [1] over F_2; echelon-canonical solution is (1,0).
    # Oracle: enumerate all four candidate vectors.
    f = GF(2)
    m = Matrix.from_rows(f, [[1, 1]])
    sols = []
    for x0 in (0, 1):
        for x1 in (0, 1):
            if (x0 + x1) % 2 == 1:
                sols.append({k: v for k, v in ((0, x0), (1, x1)) if v})
    x = solve(m, {0: 1})
    assert x in sols
    assert x == {0: 1}


def test_quotient_basis_hand_example():
    # dim 2, relations span (1,-1): quotient dim 1, representative index 0
    rel = Matrix.from_rows(QQ, [[1], [-1]])
    q = quotient_basis(2, rel)
    assert q.dim == 1
    assert q.representatives == [0]
    assert (q.projection * q.section) == Matrix.identity(QQ, 1)


def test_quotient_basis_no_relations():
    q = quotient_basis(3, Matrix.zero(QQ, 3, 0))
    assert q.projection == Matrix.identity(QQ, 3)
    assert q.section == Matrix.identity(QQ, 3)


def test_quotient_basis_full_collapse():
    q = quotient_basis(2, Matrix.identity(QQ, 2))
    assert q.dim == 0


def _rand_matrix(field, rows, cols, data):
    ent = {}
    it = iter(data)
    for i in range(rows):
        for j in range(cols):
            ent[(i, j)] = field.of(next(it))
    return Matrix(field, rows, cols, ent)


small_entries = st.integers(min_value=-4, max_value=4)


@settings(max_examples=60, deadline=None)
@given(
    rows=st.integers(1, 5),
    cols=st.integers(1, 5),
    data=st.lists(small_entries, min_size=25, max_size=25),
    use_f5=st.booleans(),
)
def test_kernel_rank_properties(rows, cols, data, use_f5):
    f = GF(5) if use_f5 else QQ
    m = _rand_matrix(f, rows, cols, data)
    ki = kernel_image(m)
    assert (m * ki.kernel).is_zero()
    assert ki.rank + ki.kernel.ncols == cols
    assert rank(m) == rank(m.transpose())
    # image columns really are in the column space
    assert solve_matrix(m, ki.image) is not None


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(1, 4),
    cols=st.integers(1, 4),
    data=st.lists(small_entries, min_size=16, max_size=16),
    bdata=st.lists(small_entries, min_size=4, max_size=4),
)
def test_solve_exact(n, cols, data, bdata):
    m = _rand_matrix(QQ, n, cols, data)
    b = {i: QQ.of(v) for i, v in enumerate(bdata[:n]) if v}
    x = solve(m, b)
    if x is not None:
        got = Matrix(QQ, cols, 1, {(i, 0): v for i, v in x.items()})
        want = Matrix(QQ, n, 1, {(i, 0): v for i, v in b.items()})
        assert m * got == want


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(1, 5),
    rels=st.integers(0, 3),
    data=st.lists(small_entries, min_size=15, max_size=15),
)
def test_quotient_projection_section(n, rels, data):
    rel = _rand_matrix(QQ, n, rels, data) if rels else Matrix.zero(QQ, n, 0)
    q = quotient_basis(n, rel)
    assert q.projection * q.section == Matrix.identity(QQ, q.dim)
    # section*projection - id has image inside the relation span
    delta = q.section * q.projection - Matrix.identity(QQ, n)
    if not delta.is_zero():
        assert solve_matrix(rel, delta) is not None


def test_invert():
    m = Matrix.from_rows(QQ, [[1, 2], [3, 4]])
    mi = invert(m)
    assert m * mi == Matrix.identity(QQ, 2)
    assert invert(Matrix.from_rows(QQ, [[1, 1], [1, 1]])) is None
