import pytest

from dgcoring.linalg import QQ, GF, Matrix
from dgcoring.complexes import ChainComplex, ChainMap, is_weak_equivalence, unit_complex
from dgcoring.dgalgebra import (
    AlgebraMorphism,
    DgAlgebra,
    DgModule,
    MapModule,
    WordModule,
    find_module_isomorphism,
    find_retract_of_algebra,
    is_module_map,
    is_pure_weak_equivalence,
    map_module,
    one_stage_filtration,
    path_module,
    path_module_projection,
    scalars_along,
    tensor_over_A,
    verify_cellular_filtration,
)


def ground(field=QQ, name="k"):
    cx = unit_complex(field, "1")
    return DgAlgebra(cx, {0: field.one}, {((0, 0), (0, 0)): {0: field.one}}, name=name)


def dual_numbers_sq_zero(field=QQ):
    """k[t]/t^2 with |t| = 0."""
    cx = ChainComplex(field, {0: ["1", "t"]})
    one = field.one
    mult = {
        ((0, 0), (0, 0)): {0: one},
        ((0, 0), (0, 1)): {1: one},
        ((0, 1), (0, 0)): {1: one},
        # t.t = 0
    }
    return DgAlgebra(cx, {0: one}, mult, name="B")


def k_times_k(field=QQ):
    cx = ChainComplex(field, {0: ["e1", "e2"]})
    one = field.one
    mult = {((0, 0), (0, 0)): {0: one}, ((0, 1), (0, 1)): {1: one}}
    return DgAlgebra(cx, {0: one, 1: one}, mult, name="kxk")


def matrix_algebra_2(field=QQ):
    """End(k^2): basis e11, e12, e21, e22 with e_ij e_kl = delta_jk e_il."""
    cx = ChainComplex(field, {0: ["e11", "e12", "e21", "e22"]})
    idx = {(1, 1): 0, (1, 2): 1, (2, 1): 2, (2, 2): 3}
    mult = {}
    for (i, j), a in idx.items():
        for (k, l), b in idx.items():
            if j == k:
                mult[((0, a), (0, b))] = {idx[(i, l)]: field.one}
    return DgAlgebra(cx, {0: field.one, 3: field.one}, mult, name="End")


def module_k2_over_ground(field=QQ):
    k = ground(field)
    cx = ChainComplex(field, {0: ["x1", "x2"]})
    right = {((0, i), (0, 0)): {i: field.one} for i in range(2)}
    return k, DgModule(cx, right=(k, right), name="k2")


def f3_bimodule(field=QQ):
    """X = k^2 as an End(k^2)-k bimodule."""
    k = ground(field)
    A = matrix_algebra_2(field)
    cx = ChainComplex(field, {0: ["x1", "x2"]})
    idx = {(1, 1): 0, (1, 2): 1, (2, 1): 2, (2, 2): 3}
    left = {}
    for (i, j), a in idx.items():
        # e_ij . x_k = delta_jk x_i
        left[((0, a), (0, j - 1))] = {i - 1: field.one}
    right = {((0, i), (0, 0)): {i: field.one} for i in range(2)}
    return A, k, DgModule(cx, left=(A, left), right=(k, right), name="X")


def phi_diag(field=QQ):
    """k -> k x k, the faithfully flat descent morphism."""
    k = ground(field)
    B = k_times_k(field)
    cmap = ChainMap(k.carrier, B.carrier, 0, {0: Matrix(field, 2, 1, {(0, 0): 1, (1, 0): 1})})
    return k, B, AlgebraMorphism(k, B, cmap, name="diag")


def test_f2_validates():
    assert dual_numbers_sq_zero().validate() == []


def test_f2_with_t_squared_one_still_validates():
    field = QQ
    cx = ChainComplex(field, {0: ["1", "t"]})
    one = field.one
    mult = {
        ((0, 0), (0, 0)): {0: one},
        ((0, 0), (0, 1)): {1: one},
        ((0, 1), (0, 0)): {1: one},
        ((0, 1), (0, 1)): {0: one},  # t.t = 1: the algebra k[t]/(t^2-1)
    }
    assert DgAlgebra(cx, {0: one}, mult).validate() == []


def test_unit_perturbation_fails():
    b = dual_numbers_sq_zero()
    b.mult[((0, 0), (0, 1))] = {1: QQ.of(2)}
    assert b.validate() != []


def test_dg_leibniz_perturbation_fails():
    # algebra k[e]/e^2 with |e| = 1 and a generator in degree 2 killing e... use
    # a two-term dg algebra: unit in degree 0, x in degree 1, dx = 0 forced;
    # instead check Leibniz by perturbing the differential of a valid dg algebra
    field = QQ
    cx = ChainComplex(field, {0: ["1", "u"], 1: ["v"]}, {1: Matrix(field, 2, 1, {(1, 0): 1})})
    one = field.one
    mult = {
        ((0, 0), (0, 0)): {0: one},
        ((0, 0), (0, 1)): {1: one},
        ((0, 1), (0, 0)): {1: one},
        ((0, 0), (1, 0)): {0: one},
        ((1, 0), (0, 0)): {0: one},
    }
    alg = DgAlgebra(cx, {0: one}, mult, name="E")
    assert alg.validate() == []  # dv = u, v.1 = v etc.
    bad = DgAlgebra(
        ChainComplex(field, {0: ["1", "u"], 1: ["v"]}, {1: Matrix(field, 2, 1, {(0, 0): 1, (1, 0): 1})}),
        {0: one},
        mult,
    )
    assert bad.validate() != []


def test_algebra_as_bimodule_validates():
    for alg in (ground(), dual_numbers_sq_zero(), k_times_k(), matrix_algebra_2()):
        assert alg.validate() == []
        assert alg.bimodule().validate() == []


def test_tensor_unit_law_of_modules():
    # M (x)_A A is isomorphic to M via the solver
    b = dual_numbers_sq_zero()
    m = b.bimodule()
    w = tensor_over_A(m, b.bimodule())
    assert w.module().validate() == []
    assert {n: w.dim(n) for n in w.complex.degrees()} == {0: 2}
    iso = find_module_isomorphism(w.module(), m)
    assert iso is not None


def test_b_tensor_b_over_b_dim():
    b = dual_numbers_sq_zero()
    w = tensor_over_A(b.bimodule(), b.bimodule())
    assert w.dim(0) == 2


def test_kxk_tensor_over_ground():
    _, B, phi = phi_diag()
    k = phi.src
    left = restricted = None
    from dgcoring.dgalgebra import restrict_left, restrict_right

    bl = restrict_left(B.bimodule(), phi)   # B as (k, B)-bimodule
    br = restrict_right(B.bimodule(), phi)  # B as (B, k)-bimodule
    w = WordModule([br, bl])
    assert w.dim(0) == 4
    assert w.module().validate() == []


def test_map_module_free_is_target():
    b = dual_numbers_sq_zero()
    mm = map_module(b.bimodule(), b.bimodule())
    # Map_B(B, N) = N
    assert {k: mm.dim(k) for k in mm.complex.degrees()} == {0: 2}
    assert mm.module().validate() == []


def test_map_k2_k2_is_matrix_algebra():
    k, m = module_k2_over_ground()
    mm = map_module(m, m)
    assert mm.dim(0) == 4


def test_map_module_with_t_acting_zero():
    # X = B, N = k with t acting by zero: Map_B(X, N) is 1-dimensional
    field = QQ
    b = dual_numbers_sq_zero(field)
    ncx = ChainComplex(field, {0: ["n"]})
    right = {((0, 0), (0, 0)): {0: field.one}}  # n.1 = n, n.t = 0
    nmod = DgModule(ncx, right=(b, right), name="k")
    assert nmod.validate() == []
    mm = map_module(b.bimodule(), nmod)
    assert mm.dim(0) == 1


def test_scalars_along_identity_and_extension():
    b = dual_numbers_sq_zero()
    ident = AlgebraMorphism.identity(b)
    m = b.bimodule()
    r = scalars_along(ident, m, "restrict")
    assert r.validate() == []
    # extend A along phi gives B as a right B-module
    k, B, phi = phi_diag()
    e = scalars_along(phi, k.bimodule(), "extend")
    assert e.dim(0) == 2
    iso = find_module_isomorphism(e.module(), restrict_left_for_test(B, phi))
    assert iso is not None


def restrict_left_for_test(Balg, phi):
    from dgcoring.dgalgebra import restrict_left

    return restrict_left(Balg.bimodule(), phi)


def test_pure_weak_equivalence_identity_and_zero():
    b = dual_numbers_sq_zero()
    m = b.bimodule()
    f = ChainMap.identity(m.carrier)
    v = is_pure_weak_equivalence(f, m, m, witnesses=[b.bimodule()])
    assert v["pure"] and v["weak_equivalence"]
    z = ChainMap.zero(m.carrier, m.carrier)
    v2 = is_pure_weak_equivalence(z, m, m, witnesses=[])
    assert not v2["pure"]


def test_path_module_validates_and_projection_is_we_iff():
    b = dual_numbers_sq_zero()
    m = b.bimodule()
    pm = path_module(m)
    assert pm.validate() == []
    proj = path_module_projection(m, pm)
    assert proj.is_strict()
    assert is_module_map(proj, pm, m)


def test_cellular_filtration_algebra_itself():
    b = dual_numbers_sq_zero()
    m = b.bimodule()
    stages, cells = one_stage_filtration(m, [(0, {0: QQ.one})])
    rep = verify_cellular_filtration(m, stages, cells, side="left")
    assert rep.ok and rep.flat_cofibrant


def test_cellular_filtration_free_rank_two():
    _, B, phi = phi_diag()
    from dgcoring.dgalgebra import restrict_left

    x = restrict_left(B.bimodule(), phi)  # B over k: free on e1, e2
    stages, cells = one_stage_filtration(x, [(0, {0: QQ.one}), (0, {1: QQ.one})])
    rep = verify_cellular_filtration(x, stages, cells, side="left")
    assert rep.ok


def test_cellular_filtration_two_stages_with_cell():
    # N = A + A.e, e a free degree-1 cell: d = 0, two stages
    field = QQ
    b = dual_numbers_sq_zero(field)
    cx = ChainComplex(field, {0: ["a1", "at"], 1: ["e1", "et"]})
    left = {}
    # two copies of the regular representation, one shifted to degree 1
    for (adeg, ai) in [(0, 0), (0, 1)]:
        for (md, mi) in [(0, 0), (0, 1), (1, 0), (1, 1)]:
            base = 0 if md == 0 else 2
            col_in_copy = mi
            prod = b.basis_product(0, ai, 0, col_in_copy)
            if prod:
                left[((adeg, ai), (md, mi))] = {k + (0 if md == 0 else 0): v for k, v in prod.items()}
    n = DgModule(cx, left=(b, left), name="AplusAe")
    assert n.validate() == []
    stage0 = {0: Matrix.identity(field, 2)}
    stage1 = {0: Matrix.identity(field, 2), 1: Matrix.identity(field, 2)}
    cells = [[(0, {0: field.one})], [(1, {0: field.one})]]
    rep = verify_cellular_filtration(n, [stage0, stage1], cells, side="left")
    assert rep.ok


def test_cellular_filtration_nonzero_cell_differential_fails():
    # contractible two-term module: quotient differential is not induced-free
    field = QQ
    b = ground(field)
    cx = ChainComplex(field, {0: ["x"], 1: ["y"]}, {1: Matrix(field, 1, 1, {(0, 0): 1})})
    left = {((0, 0), (0, 0)): {0: field.one}, ((0, 0), (1, 0)): {0: field.one}}
    # fix: left action of unit on y must be y
    left[((0, 0), (1, 0))] = {0: field.one}
    m = DgModule(cx, left=(b, left), name="cone")
    assert m.validate() == []
    stages, cells = one_stage_filtration(m, [(0, {0: field.one}), (1, {0: field.one})])
    rep = verify_cellular_filtration(m, stages, cells, side="left")
    assert not rep.ok


def test_retract_of_algebra_found_for_kxk():
    _, B, phi = phi_diag()
    from dgcoring.dgalgebra import restrict_left

    x = restrict_left(B.bimodule(), phi)
    found, _ = find_retract_of_algebra(x, side="left")
    assert found


def test_retract_not_found_for_zero_module():
    k = ground()
    zero = DgModule(ChainComplex(QQ, {}), left=(k, {}), name="0")
    found, _ = find_retract_of_algebra(zero, side="left")
    assert not found


def test_hom_tensor_adjunction_dims():
    # dim of degree-0 strict module maps: Map_B(M (x)_A X, N) vs Map_A(M, Map_B(X, N))
    from dgcoring.dgalgebra import module_map_space

    A, k, X = f3_bimodule()
    M = A.bimodule()  # right A-module
    ncx = ChainComplex(QQ, {0: ["n1", "n2"]})
    N = DgModule(ncx, right=(k, {((0, i), (0, 0)): {i: QQ.one} for i in range(2)}), name="N")
    w = WordModule([M, X])
    lhs_layout, lhs = module_map_space(w.module(), N, check_left=False, check_right=True)
    inner = map_module(X, N).module()
    rhs_layout, rhs = module_map_space(M, inner, check_left=False, check_right=True)
    # compare spaces of strict chain module maps that are also cycles
    assert lhs.ncols == rhs.ncols
