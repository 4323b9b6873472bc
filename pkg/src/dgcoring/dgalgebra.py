"""Dg algebras, dg modules, balanced tensor words and B-linear mapping complexes.

Structure constants are sparse tables over named bases.  Tensor products
over an algebra are presented as canonical quotients of the underlying
field tensor word; every stored structure map that targets such a quotient
is handled through the word's projection/section pair, so callers never
see the chosen representatives.
"""

from __future__ import annotations

from .linalg import Matrix, kernel_image, quotient_basis, solve, solve_matrix
from .complexes import (
    Block,
    ChainComplex,
    ChainMap,
    WordLayout,
    hom_complex,
    is_weak_equivalence,
    path_object,
    slot_map,
)


def vadd(field, u: dict, v: dict) -> dict:
    out = dict(u)
    for k, x in v.items():
        s = field.add(out.get(k, field.zero), x)
        if s == field.zero:
            out.pop(k, None)
        else:
            out[k] = s
    return out


def vscale(field, c, v: dict) -> dict:
    if c == field.zero:
        return {}
    return {k: field.mul(c, x) for k, x in v.items()}


def veq(u: dict, v: dict) -> bool:
    return u == v


class DgAlgebra:
    """Unital associative dg algebra given by structure constants.

    mult maps ((p, i), (q, j)) to the sparse product vector in degree p+q;
    missing keys mean the product is zero.
    """

    def __init__(self, carrier: ChainComplex, unit: dict, mult: dict, name="A"):
        self.carrier = carrier
        self.field = carrier.field
        self.unit = {k: carrier.field.of(v) for k, v in unit.items() if carrier.field.of(v) != carrier.field.zero}
        self.mult = {}
        for key, vec in mult.items():
            vec = {k: carrier.field.of(v) for k, v in vec.items()}
            vec = {k: v for k, v in vec.items() if v != carrier.field.zero}
            if vec:
                self.mult[key] = vec
        self.name = name

    def is_ground(self) -> bool:
        return self.carrier.degrees() == [0] and self.carrier.dim(0) == 1

    def mult_el(self, p: int, u: dict, q: int, v: dict) -> dict:
        f = self.field
        out = {}
        for i, a in u.items():
            for j, b in v.items():
                prod = self.mult.get(((p, i), (q, j)))
                if prod:
                    out = vadd(f, out, vscale(f, f.mul(a, b), prod))
        return out

    def basis_product(self, p, i, q, j) -> dict:
        return self.mult.get(((p, i), (q, j)), {})

    def bimodule(self):
        """The algebra as a bimodule over itself (cached)."""
        if not hasattr(self, "_bimod"):
            left = {}
            right = {}
            for ((p, i), (q, j)), vec in self.mult.items():
                left[((p, i), (q, j))] = dict(vec)
                right[((p, i), (q, j))] = dict(vec)
            self._bimod = DgModule(
                self.carrier, left=(self, left), right=(self, right), name=self.name
            )
        return self._bimod

    def validate(self):
        f = self.field
        fails = list(self.carrier.validate())
        degs = self.carrier.degrees()
        # two-sided unit
        for q in degs:
            for j in range(self.carrier.dim(q)):
                e = {j: f.one}
                if self.mult_el(0, self.unit, q, e) != e:
                    fails.append(f"unit fails on left of basis ({q},{j})")
                if self.mult_el(q, e, 0, self.unit) != e:
                    fails.append(f"unit fails on right of basis ({q},{j})")
        # associativity on basis triples
        for p in degs:
            for i in range(self.carrier.dim(p)):
                for q in degs:
                    for j in range(self.carrier.dim(q)):
                        ab = self.basis_product(p, i, q, j)
                        for r in degs:
                            for k in range(self.carrier.dim(r)):
                                bc = self.basis_product(q, j, r, k)
                                lhs = self.mult_el(p + q, ab, r, {k: f.one})
                                rhs = self.mult_el(p, {i: f.one}, q + r, bc)
                                if lhs != rhs:
                                    fails.append(
                                        f"associativity fails at ({p},{i}),({q},{j}),({r},{k})"
                                    )
        # Leibniz: d(ab) = da.b + (-1)^|a| a.db
        for p in degs:
            for i in range(self.carrier.dim(p)):
                da = self.carrier.d(p).col(i)
                for q in degs:
                    for j in range(self.carrier.dim(q)):
                        db = self.carrier.d(q).col(j)
                        ab = self.basis_product(p, i, q, j)
                        lhs = self.carrier.d(p + q).apply(ab)
                        rhs = self.mult_el(p - 1, da, q, {j: f.one})
                        term = self.mult_el(p, {i: f.one}, q - 1, db)
                        if p % 2:
                            term = vscale(f, f.neg(f.one), term)
                        rhs = vadd(f, rhs, term)
                        if lhs != rhs:
                            fails.append(f"Leibniz fails at ({p},{i}),({q},{j})")
        return fails


class DgModule:
    """One- or two-sided dg module, actions as sparse structure tables."""

    def __init__(self, carrier: ChainComplex, left=None, right=None, name="M"):
        self.carrier = carrier
        self.field = carrier.field
        self.left = left      # (DgAlgebra, table ((adeg,ai),(mdeg,mi)) -> vec)
        self.right = right    # (DgAlgebra, table ((mdeg,mi),(adeg,ai)) -> vec)
        self.name = name
        self._cache = {}

    @property
    def left_algebra(self):
        return self.left[0] if self.left else None

    @property
    def right_algebra(self):
        return self.right[0] if self.right else None

    def sidedness(self):
        if self.left and self.right:
            return "bimodule"
        return "left" if self.left else "right"

    def left_act(self, p, avec, q, mvec) -> dict:
        f = self.field
        table = self.left[1]
        out = {}
        for i, a in avec.items():
            for j, m in mvec.items():
                hit = table.get(((p, i), (q, j)))
                if hit:
                    out = vadd(f, out, vscale(f, f.mul(a, m), hit))
        return out

    def right_act(self, q, mvec, p, avec) -> dict:
        f = self.field
        table = self.right[1]
        out = {}
        for j, m in mvec.items():
            for i, a in avec.items():
                hit = table.get(((q, j), (p, i)))
                if hit:
                    out = vadd(f, out, vscale(f, f.mul(m, a), hit))
        return out

    def left_action_map(self) -> ChainMap:
        """The action as a strict chain map on the word complex A (x) M."""
        if "lmap" not in self._cache:
            alg = self.left[0]
            lay = WordLayout([alg.carrier, self.carrier])
            word = lay.complex()
            comp = {}
            for n in lay.degrees():
                m = Matrix.zero(self.field, self.carrier.dim(n), lay.dim(n))
                for col, ((p, i), (q, j)) in enumerate(lay.keys(n)):
                    hit = self.left[1].get(((p, i), (q, j)))
                    if hit:
                        for row, v in hit.items():
                            m.ent[(row, col)] = v
                comp[n] = m
            self._cache["lmap"] = ChainMap(word, self.carrier, 0, comp)
        return self._cache["lmap"]

    def right_action_map(self) -> ChainMap:
        if "rmap" not in self._cache:
            alg = self.right[0]
            lay = WordLayout([self.carrier, alg.carrier])
            word = lay.complex()
            comp = {}
            for n in lay.degrees():
                m = Matrix.zero(self.field, self.carrier.dim(n), lay.dim(n))
                for col, ((q, j), (p, i)) in enumerate(lay.keys(n)):
                    hit = self.right[1].get(((q, j), (p, i)))
                    if hit:
                        for row, v in hit.items():
                            m.ent[(row, col)] = v
                comp[n] = m
            self._cache["rmap"] = ChainMap(word, self.carrier, 0, comp)
        return self._cache["rmap"]

    def left_mult_map(self, p, avec) -> ChainMap:
        """m -> a.m as a graded map of degree p (no implicit signs)."""
        comp = {}
        for q in self.carrier.degrees():
            m = Matrix.zero(self.field, self.carrier.dim(q + p), self.carrier.dim(q))
            for j in range(self.carrier.dim(q)):
                out = self.left_act(p, avec, q, {j: self.field.one})
                for row, v in out.items():
                    m.ent[(row, j)] = v
            comp[q] = m
        return ChainMap(self.carrier, self.carrier, p, comp)

    def right_mult_map(self, p, avec) -> ChainMap:
        comp = {}
        for q in self.carrier.degrees():
            m = Matrix.zero(self.field, self.carrier.dim(q + p), self.carrier.dim(q))
            for j in range(self.carrier.dim(q)):
                out = self.right_act(q, {j: self.field.one}, p, avec)
                for row, v in out.items():
                    m.ent[(row, j)] = v
            comp[q] = m
        return ChainMap(self.carrier, self.carrier, p, comp)

    def validate(self):
        f = self.field
        fails = list(self.carrier.validate())
        mdegs = self.carrier.degrees()

        def check_side(side, act, alg):
            adegs = alg.carrier.degrees()
            for q in mdegs:
                for j in range(self.carrier.dim(q)):
                    e = {j: f.one}
                    got = act(0, alg.unit, q, e) if side == "left" else act(q, e, 0, alg.unit)
                    if got != e:
                        fails.append(f"{side} unit fails on basis ({q},{j})")
            for p1 in adegs:
                for i1 in range(alg.carrier.dim(p1)):
                    a1 = {i1: f.one}
                    for p2 in adegs:
                        for i2 in range(alg.carrier.dim(p2)):
                            a2 = {i2: f.one}
                            prod = alg.basis_product(p1, i1, p2, i2)
                            for q in mdegs:
                                for j in range(self.carrier.dim(q)):
                                    e = {j: f.one}
                                    if side == "left":
                                        lhs = act(p1 + p2, prod, q, e)
                                        rhs = act(p1, a1, p2 + q, act(p2, a2, q, e))
                                    else:
                                        lhs = act(q, e, p1 + p2, prod)
                                        rhs = act(p2 + q, act(q, e, p1, a1), p2, a2)
                                    if lhs != rhs:
                                        fails.append(
                                            f"{side} associativity fails at "
                                            f"a({p1},{i1}),a({p2},{i2}),m({q},{j})"
                                        )
            # Leibniz
            for p in adegs:
                for i in range(alg.carrier.dim(p)):
                    a = {i: f.one}
                    da = alg.carrier.d(p).col(i)
                    for q in mdegs:
                        for j in range(self.carrier.dim(q)):
                            e = {j: f.one}
                            dm = self.carrier.d(q).col(j)
                            if side == "left":
                                lhs = self.carrier.d(p + q).apply(act(p, a, q, e))
                                rhs = act(p - 1, da, q, e)
                                term = act(p, a, q - 1, dm)
                                if p % 2:
                                    term = vscale(f, f.neg(f.one), term)
                            else:
                                lhs = self.carrier.d(p + q).apply(act(q, e, p, a))
                                rhs = act(q - 1, dm, p, a)
                                term = act(q, e, p - 1, da)
                                if q % 2:
                                    term = vscale(f, f.neg(f.one), term)
                            rhs = vadd(f, rhs, term)
                            if lhs != rhs:
                                fails.append(
                                    f"{side} Leibniz fails at a({p},{i}),m({q},{j})"
                                )

        if self.left:
            check_side("left", self.left_act, self.left[0])
        if self.right:
            check_side("right", self.right_act, self.right[0])
        if self.left and self.right:
            for p1 in self.left[0].carrier.degrees():
                for i1 in range(self.left[0].carrier.dim(p1)):
                    a = {i1: f.one}
                    for q in mdegs:
                        for j in range(self.carrier.dim(q)):
                            e = {j: f.one}
                            for p2 in self.right[0].carrier.degrees():
                                for i2 in range(self.right[0].carrier.dim(p2)):
                                    b = {i2: f.one}
                                    lhs = self.right_act(p1 + q, self.left_act(p1, a, q, e), p2, b)
                                    rhs = self.left_act(p1, a, q + p2, self.right_act(q, e, p2, b))
                                    if lhs != rhs:
                                        fails.append(
                                            f"actions do not commute at a({p1},{i1}),"
                                            f"m({q},{j}),b({p2},{i2})"
                                        )
        return fails


class AlgebraMorphism:
    def __init__(self, src: DgAlgebra, tgt: DgAlgebra, cmap: ChainMap, name="phi"):
        self.src = src
        self.tgt = tgt
        self.cmap = cmap
        self.name = name

    def apply(self, p, vec) -> dict:
        return self.cmap.mat(p).apply(vec)

    def validate(self):
        fails = []
        if not self.cmap.is_strict():
            fails.append("morphism is not a chain map")
        if self.apply(0, self.src.unit) != self.tgt.unit:
            fails.append("morphism does not preserve the unit")
        for p in self.src.carrier.degrees():
            for i in range(self.src.carrier.dim(p)):
                for q in self.src.carrier.degrees():
                    for j in range(self.src.carrier.dim(q)):
                        lhs = self.apply(p + q, self.src.basis_product(p, i, q, j))
                        rhs = self.tgt.mult_el(
                            p, self.apply(p, {i: self.src.field.one}),
                            q, self.apply(q, {j: self.src.field.one}),
                        )
                        if lhs != rhs:
                            fails.append(f"multiplication not preserved at ({p},{i}),({q},{j})")
        return fails

    @staticmethod
    def identity(alg):
        return AlgebraMorphism(alg, alg, ChainMap.identity(alg.carrier), name="id")


def is_module_map(f: ChainMap, m: DgModule, n: DgModule, check_left=True, check_right=True) -> bool:
    """Strict degree-0 linearity over the shared algebra(s)."""
    fld = m.field
    if f.degree != 0 or not f.is_strict():
        return False
    if check_left and m.left and n.left:
        alg = m.left[0]
        for p in alg.carrier.degrees():
            for i in range(alg.carrier.dim(p)):
                a = {i: fld.one}
                for q in m.carrier.degrees():
                    for j in range(m.carrier.dim(q)):
                        e = {j: fld.one}
                        lhs = f.mat(p + q).apply(m.left_act(p, a, q, e))
                        rhs = n.left_act(p, a, q, f.mat(q).apply(e))
                        if lhs != rhs:
                            return False
    if check_right and m.right and n.right:
        alg = m.right[0]
        for p in alg.carrier.degrees():
            for i in range(alg.carrier.dim(p)):
                a = {i: fld.one}
                for q in m.carrier.degrees():
                    for j in range(m.carrier.dim(q)):
                        e = {j: fld.one}
                        lhs = f.mat(p + q).apply(m.right_act(q, e, p, a))
                        rhs = n.right_act(q, f.mat(q).apply(e), p, a)
                        if lhs != rhs:
                            return False
    return True


# ---------------------------------------------------------------------------
# balanced tensor words


class WordModule:
    """Canonical presentation of M1 (x)_B1 M2 (x)_B2 ... as a quotient.

    The plain complex is the field tensor word; relations identify
    (m.b) (x) m' with m (x) (b.m') in every adjacent slot.  proj/sect are
    the canonical projection and section; module() carries the residual
    outer actions.
    """

    def __init__(self, modules, window=None):
        if not modules:
            raise ValueError("empty word")
        self.modules = list(modules)
        self.window = window
        self.field = modules[0].field
        self.mids = []
        for s in range(len(modules) - 1):
            ra = modules[s].right_algebra
            la = modules[s + 1].left_algebra
            if ra is None or la is None or ra is not la:
                raise ValueError(f"word slots {s},{s+1} have mismatched algebras")
            self.mids.append(ra)
        lo, hi = (window if window else (None, None))
        self.layout = WordLayout([m.carrier for m in modules], lo, hi)
        self.plain = self.layout.complex()
        self.quot = {}
        self._build_quotient()

    def _relations(self, n):
        cols = []
        factors = [m.carrier for m in self.modules]
        for s, alg in enumerate(self.mids):
            if alg.is_ground():
                continue
            ext_factors = factors[: s + 1] + [alg.carrier] + factors[s + 1 :]
            lo, hi = (self.window if self.window else (None, None))
            ext = WordLayout(ext_factors, lo, hi)
            blocks_l = (
                [Block.identity(c) for c in factors[:s]]
                + [Block.from_chainmap(self.modules[s].right_action_map(),
                                       [factors[s], alg.carrier], [factors[s]])]
                + [Block.identity(c) for c in factors[s + 1 :]]
            )
            blocks_r = (
                [Block.identity(c) for c in factors[: s + 1]]
                + [Block.from_chainmap(self.modules[s + 1].left_action_map(),
                                       [alg.carrier, factors[s + 1]], [factors[s + 1]])]
                + [Block.identity(c) for c in factors[s + 2 :]]
            )
            ml = slot_map(ext, self.layout, blocks_l)
            mr = slot_map(ext, self.layout, blocks_r)
            diff = ml.get(n)
            if diff is None:
                continue
            diff = diff - mr[n]
            cols.append(diff)
        if not cols:
            return Matrix.zero(self.field, self.layout.dim(n), 0)
        out = cols[0]
        for c in cols[1:]:
            out = out.hstack(c)
        return out

    def _build_quotient(self):
        basis = {}
        reldata = {}
        for n in self.layout.degrees():
            rel = self._relations(n)
            q = quotient_basis(self.layout.dim(n), rel)
            reldata[n] = (rel, q)
            basis[n] = [self.plain.names(n)[r] for r in q.representatives]
        self.complex = ChainComplex(self.field, basis, window=self.window)
        self.quot = {n: q for n, (rel, q) in reldata.items()}
        # quotient differential; certify that d preserves the relation span
        for n in self.layout.degrees():
            rel, q = reldata[n]
            if n - 1 in self.quot:
                qprev = self.quot[n - 1]
                if rel.ncols:
                    leak = qprev.projection * (self.plain.d(n) * rel)
                    if not leak.is_zero():
                        raise ValueError(
                            f"differential does not descend to the quotient at degree {n}"
                        )
                dq = qprev.projection * (self.plain.d(n) * q.section)
                if not dq.is_zero():
                    self.complex.diff[n] = dq

    @property
    def proj(self) -> ChainMap:
        if not hasattr(self, "_proj"):
            self._proj = ChainMap(
                self.plain, self.complex, 0,
                {n: q.projection for n, q in self.quot.items()},
            )
        return self._proj

    @property
    def sect(self) -> ChainMap:
        if not hasattr(self, "_sect"):
            self._sect = ChainMap(
                self.complex, self.plain, 0,
                {n: q.section for n, q in self.quot.items()},
            )
        return self._sect

    def dim(self, n):
        return self.complex.dim(n)

    def module(self) -> DgModule:
        """The quotient as a module via the residual outer actions."""
        if hasattr(self, "_module"):
            return self._module
        factors = [m.carrier for m in self.modules]
        lo, hi = (self.window if self.window else (None, None))
        left = None
        if self.modules[0].left:
            alg = self.modules[0].left_algebra
            ext = WordLayout([alg.carrier] + factors, lo, hi)
            blocks = [
                Block.from_chainmap(self.modules[0].left_action_map(),
                                    [alg.carrier, factors[0]], [factors[0]])
            ] + [Block.identity(c) for c in factors[1:]]
            mats = slot_map(ext, self.layout, blocks)
            table = self._action_table(alg, ext, mats, side="left")
            left = (alg, table)
        right = None
        if self.modules[-1].right:
            alg = self.modules[-1].right_algebra
            ext = WordLayout(factors + [alg.carrier], lo, hi)
            blocks = [Block.identity(c) for c in factors[:-1]] + [
                Block.from_chainmap(self.modules[-1].right_action_map(),
                                    [factors[-1], alg.carrier], [factors[-1]])
            ]
            mats = slot_map(ext, self.layout, blocks)
            table = self._action_table(alg, ext, mats, side="right")
            right = (alg, table)
        name = "(" + "(x)".join(m.name for m in self.modules) + ")"
        self._module = DgModule(self.complex, left=left, right=right, name=name)
        return self._module

    def _action_table(self, alg, ext, mats, side):
        table = {}
        f = self.field
        for qd in self.complex.degrees():
            for qi in range(self.complex.dim(qd)):
                plain_vec = self.quot[qd].section.col(qi)
                for ad in alg.carrier.degrees():
                    for ai in range(alg.carrier.dim(ad)):
                        nd = qd + ad
                        if nd not in self.quot:
                            continue
                        acc = {}
                        for ppos, c in plain_vec.items():
                            key = self.layout.keys(qd)[ppos]
                            ekey = ((ad, ai),) + key if side == "left" else key + ((ad, ai),)
                            if nd not in ext._pos or ekey not in ext._pos[nd]:
                                continue
                            col = mats[nd].col(ext.pos(nd, ekey))
                            acc = vadd(f, acc, vscale(f, c, col))
                        out = self.quot[nd].projection.apply(acc)
                        if out:
                            if side == "left":
                                table[((ad, ai), (qd, qi))] = out
                            else:
                                table[((qd, qi), (ad, ai))] = out
        return table

    def map_to(self, other: "WordModule", blocks) -> ChainMap:
        """Descend a slotwise plain map to the quotients: proj o f o sect."""
        mats = slot_map(self.layout, other.layout, blocks)
        k = sum(b.degree for b in blocks)
        comp = {}
        for n in self.complex.degrees():
            if n + k not in other.quot:
                continue
            m = other.quot[n + k].projection * (mats[n] * self.quot[n].section)
            comp[n] = m
        return ChainMap(self.complex, other.complex, k, comp)


def tensor_over_A(m: DgModule, n: DgModule) -> WordModule:
    """Tensor product over the shared middle algebra, as a canonical quotient."""
    return WordModule([m, n])


# ---------------------------------------------------------------------------
# B-linear mapping complexes


class MapModule:
    """Map_B(X, N): the subcomplex of hom(X, N) of right B-linear maps.

    Right B-linearity of a graded map is the strict condition
    f(x.b) = f(x).b; in this hom convention no Koszul sign appears because
    b never moves past f.  The condition is closed under the hom
    differential, which validate() certifies.
    """

    def __init__(self, x: DgModule, n: DgModule):
        if x.right_algebra is not n.right_algebra or x.right_algebra is None:
            raise ValueError("map_module needs right modules over the same algebra")
        self.x = x
        self.n = n
        self.alg = x.right_algebra
        self.field = x.field
        self.hom, self.layout = hom_complex(x.carrier, n.carrier)
        self.incl = {}
        self._build()

    def _constraint_rows(self, k):
        f = self.field
        rows = []
        alg = self.alg
        if alg.is_ground():
            return rows
        for bd in alg.carrier.degrees():
            for bi in range(alg.carrier.dim(bd)):
                b = {bi: f.one}
                for md in self.x.carrier.degrees():
                    for mi in range(self.x.carrier.dim(md)):
                        mb = self.x.right_act(md, {mi: f.one}, bd, b)
                        td = md + bd + k
                        for out_i in range(self.n.carrier.dim(td)):
                            row = {}
                            # f(m.b) contribution
                            for i2, c in mb.items():
                                key = (md + bd, i2, out_i)
                                if key in self.layout._pos.get(k, {}):
                                    u = self.layout.pos(k, key)
                                    row[u] = f.add(row.get(u, f.zero), c)
                            # -f(m).b contribution
                            for j2 in range(self.n.carrier.dim(md + k)):
                                nb = self.n.right_act(md + k, {j2: f.one}, bd, b)
                                c = nb.get(out_i)
                                if c is not None:
                                    key = (md, mi, j2)
                                    u = self.layout.pos(k, key)
                                    row[u] = f.sub(row.get(u, f.zero), c)
                            row = {u: v for u, v in row.items() if v != f.zero}
                            if row:
                                rows.append(row)
        return rows

    def _build(self):
        f = self.field
        basis = {}
        for k in self.layout.degrees():
            dimk = self.layout.dim(k)
            rows = self._constraint_rows(k)
            if rows:
                m = Matrix(f, len(rows), dimk)
                for r, row in enumerate(rows):
                    for u, v in row.items():
                        m.ent[(r, u)] = v
                ker = kernel_image(m).kernel
            else:
                ker = Matrix.identity(f, dimk)
            if ker.ncols:
                self.incl[k] = ker
                basis[k] = [f"f{k}.{t}" for t in range(ker.ncols)]
        self.complex = ChainComplex(self.field, basis)
        for k in list(self.incl):
            if k - 1 not in self.incl:
                if not (self.hom.d(k) * self.incl[k]).is_zero():
                    raise ValueError("linearity constraints not closed under the differential")
                continue
            img = self.hom.d(k) * self.incl[k]
            coords = solve_matrix(self.incl[k - 1], img)
            if coords is None:
                raise ValueError("linearity constraints not closed under the differential")
            if not coords.is_zero():
                self.complex.diff[k] = coords

    def dim(self, k):
        return self.complex.dim(k)

    def chainmap_of_basis(self, k, t) -> ChainMap:
        return self.layout.chainmap_of_vector(k, self.incl[k].col(t))

    def chainmap_of_element(self, k, vec: dict) -> ChainMap:
        f = self.field
        total = {}
        for t, c in vec.items():
            total = vadd(f, total, vscale(f, c, self.incl[k].col(t)))
        return self.layout.chainmap_of_vector(k, total)

    def coords_of_chainmap(self, f: ChainMap):
        vec = self.layout.vector_of_chainmap(f)
        k = f.degree
        if k not in self.incl:
            return None if vec else {}
        return solve(self.incl[k], vec)

    def module(self) -> DgModule:
        """Residual actions: right over X's left algebra, left over N's left algebra."""
        if hasattr(self, "_module"):
            return self._module
        f = self.field
        right = None
        if self.x.left:
            alg = self.x.left_algebra
            table = {}
            for k in self.incl:
                for t in range(self.incl[k].ncols):
                    fm = self.chainmap_of_basis(k, t)
                    for ad in alg.carrier.degrees():
                        for ai in range(alg.carrier.dim(ad)):
                            lam = self.x.left_mult_map(ad, {ai: f.one})
                            comp = fm.compose(lam)  # f o (a.-): degree k+ad
                            coords = self.coords_of_chainmap(comp)
                            if coords is None:
                                raise ValueError("right action leaves the B-linear subspace")
                            if coords:
                                table[((k, t), (ad, ai))] = coords
            right = (alg, table)
        left = None
        if self.n.left:
            alg = self.n.left_algebra
            table = {}
            for k in self.incl:
                for t in range(self.incl[k].ncols):
                    fm = self.chainmap_of_basis(k, t)
                    for ad in alg.carrier.degrees():
                        for ai in range(alg.carrier.dim(ad)):
                            lam = self.n.left_mult_map(ad, {ai: f.one})
                            comp = lam.compose(fm)
                            coords = self.coords_of_chainmap(comp)
                            if coords is None:
                                raise ValueError("left action leaves the B-linear subspace")
                            if coords:
                                table[((ad, ai), (k, t))] = coords
            left = (alg, table)
        self._module = DgModule(
            self.complex, left=left, right=right,
            name=f"Map_{self.alg.name}({self.x.name},{self.n.name})",
        )
        return self._module


def map_module(x: DgModule, n: DgModule) -> MapModule:
    return MapModule(x, n)


# ---------------------------------------------------------------------------
# restriction and extension of scalars


def restrict_left(m: DgModule, phi: AlgebraMorphism) -> DgModule:
    """Pull the left action back along phi (target algebra acts on m)."""
    if m.left_algebra is not phi.tgt:
        raise ValueError("module is not a left module over the morphism target")
    f = m.field
    table = {}
    for ad in phi.src.carrier.degrees():
        for ai in range(phi.src.carrier.dim(ad)):
            img = phi.apply(ad, {ai: f.one})
            for qd in m.carrier.degrees():
                for qi in range(m.carrier.dim(qd)):
                    out = m.left_act(ad, img, qd, {qi: f.one})
                    if out:
                        table[((ad, ai), (qd, qi))] = out
    return DgModule(m.carrier, left=(phi.src, table), right=m.right, name=m.name)


def restrict_right(m: DgModule, phi: AlgebraMorphism) -> DgModule:
    if m.right_algebra is not phi.tgt:
        raise ValueError("module is not a right module over the morphism target")
    f = m.field
    table = {}
    for ad in phi.src.carrier.degrees():
        for ai in range(phi.src.carrier.dim(ad)):
            img = phi.apply(ad, {ai: f.one})
            for qd in m.carrier.degrees():
                for qi in range(m.carrier.dim(qd)):
                    out = m.right_act(qd, {qi: f.one}, ad, img)
                    if out:
                        table[((qd, qi), (ad, ai))] = out
    return DgModule(m.carrier, left=m.left, right=(phi.src, table), name=m.name)


def scalars_along(phi: AlgebraMorphism, m: DgModule, direction: str):
    """Restriction (same carrier) or extension (tensor with B) of scalars."""
    if direction == "restrict":
        return restrict_right(m, phi)
    if direction == "extend":
        b_as_ab = restrict_left(phi.tgt.bimodule(), phi)
        return WordModule([m, b_as_ab])
    raise ValueError(f"unknown direction {direction!r}")


def induced_tensor_map(w1: WordModule, w2: WordModule, slot: int, f: ChainMap) -> ChainMap:
    """1 (x) ... (x) f (x) ... (x) 1 between two balanced words."""
    blocks = []
    for s, mod in enumerate(w1.modules):
        if s == slot:
            blocks.append(Block.from_chainmap(f))
        else:
            blocks.append(Block.identity(mod.carrier))
    return w1.map_to(w2, blocks)


def is_pure_weak_equivalence(f: ChainMap, m: DgModule, m2: DgModule, witnesses=()):
    """Weak-equivalence verdict plus 1 (x) f spot checks on the witnesses.

    Over a field cofibrant modules are homotopy flat, so the weak
    equivalence verdict already decides purity; the witness checks are
    recorded alongside as per-instance evidence.
    """
    if not is_module_map(f, m, m2):
        raise ValueError("not a map of modules")
    we, bad = is_weak_equivalence(f)
    checks = []
    for w in witnesses:
        w1 = WordModule([w, m])
        w2 = WordModule([w, m2])
        g = induced_tensor_map(w1, w2, 1, f)
        ok, wit = is_weak_equivalence(g)
        checks.append({"witness": w.name, "weak_equivalence": ok, "failed_degree": wit})
    return {
        "weak_equivalence": we,
        "failed_degree": bad,
        "pure": we and all(c["weak_equivalence"] for c in checks),
        "witness_checks": checks,
    }


# ---------------------------------------------------------------------------
# sub- and quotient modules


def submodule_from_subspace(m: DgModule, incl: dict, name="S"):
    """Module structure on a d-closed, action-closed subspace.

    incl maps degree -> Matrix whose columns span the subspace in carrier
    coordinates.  Returns (module, inclusion chain map); raises if the
    subspace is not closed.
    """
    f = m.field
    basis = {n: [f"{name}{n}.{i}" for i in range(incl[n].ncols)] for n in incl if incl[n].ncols}
    carrier = ChainComplex(f, basis, window=m.carrier.window)
    inclm = {n: incl[n] for n in basis}

    def coords(n, vec):
        if not vec:
            return {}
        if n not in inclm:
            return None
        return solve(inclm[n], vec)

    for n in basis:
        img = m.carrier.d(n) * inclm[n]
        sub = solve_matrix(inclm.get(n - 1, Matrix.zero(f, m.carrier.dim(n - 1), 0)), img) \
            if not img.is_zero() else Matrix.zero(f, 0 if n - 1 not in inclm else inclm[n - 1].ncols, inclm[n].ncols)
        if sub is None:
            raise ValueError(f"subspace not closed under d at degree {n}")
        if not img.is_zero() and not sub.is_zero():
            carrier.diff[n] = sub

    def build_table(side, alg, act):
        table = {}
        for qd in basis:
            for qi in range(carrier.dim(qd)):
                vec = inclm[qd].col(qi)
                for ad in alg.carrier.degrees():
                    for ai in range(alg.carrier.dim(ad)):
                        a = {ai: f.one}
                        out = act(ad, a, qd, vec) if side == "left" else act(qd, vec, ad, a)
                        if not out:
                            continue
                        c = coords(qd + ad, out)
                        if c is None:
                            raise ValueError(f"subspace not closed under the {side} action")
                        if c:
                            key = ((ad, ai), (qd, qi)) if side == "left" else ((qd, qi), (ad, ai))
                            table[key] = c
        return table

    left = (m.left_algebra, build_table("left", m.left_algebra, m.left_act)) if m.left else None
    right = (m.right_algebra, build_table("right", m.right_algebra, m.right_act)) if m.right else None
    sub = DgModule(carrier, left=left, right=right, name=name)
    inc_map = ChainMap(carrier, m.carrier, 0, {n: inclm[n] for n in basis})
    return sub, inc_map


def quotient_module_by(m: DgModule, rel: dict, name="Q"):
    """Quotient by a sub-bimodule span; returns (module, proj, sect)."""
    f = m.field
    quots = {}
    basis = {}
    for n in m.carrier.degrees():
        r = rel.get(n, Matrix.zero(f, m.carrier.dim(n), 0))
        q = quotient_basis(m.carrier.dim(n), r)
        quots[n] = (r, q)
        if q.dim:
            basis[n] = [m.carrier.names(n)[t] for t in q.representatives]
    carrier = ChainComplex(f, basis, window=m.carrier.window)
    for n in basis:
        r, q = quots[n]
        if n - 1 not in quots:
            continue
        rp, qp = quots[n - 1]
        if r.ncols and not (qp.projection * (m.carrier.d(n) * r)).is_zero():
            raise ValueError(f"differential does not preserve the relation span at degree {n}")
        dq = qp.projection * (m.carrier.d(n) * q.section)
        if not dq.is_zero():
            carrier.diff[n] = dq

    def build_table(side, alg, act):
        table = {}
        for qd in basis:
            _, q = quots[qd]
            for qi in range(q.dim):
                vec = q.section.col(qi)
                for ad in alg.carrier.degrees():
                    for ai in range(alg.carrier.dim(ad)):
                        a = {ai: f.one}
                        out = act(ad, a, qd, vec) if side == "left" else act(qd, vec, ad, a)
                        nd = qd + ad
                        if nd not in quots or not out:
                            continue
                        c = quots[nd][1].projection.apply(out)
                        if c:
                            key = ((ad, ai), (qd, qi)) if side == "left" else ((qd, qi), (ad, ai))
                            table[key] = c
        return table

    # actions must preserve the span: certified by re-validating the quotient
    left = (m.left_algebra, build_table("left", m.left_algebra, m.left_act)) if m.left else None
    right = (m.right_algebra, build_table("right", m.right_algebra, m.right_act)) if m.right else None
    quo = DgModule(carrier, left=left, right=right, name=name)
    proj = ChainMap(m.carrier, carrier, 0, {n: quots[n][1].projection for n in basis})
    sect = ChainMap(carrier, m.carrier, 0, {n: quots[n][1].section for n in basis})
    return quo, proj, sect


def path_module(m: DgModule) -> DgModule:
    """Path(M) = M + s^-1 M as a module: a.s[x] = (-1)^|a| s[a.x], s[x].a = s[x.a]."""
    f = m.field
    pcx, _proj = path_object(m.carrier)

    def build(side, alg, act):
        table = {}
        for n in pcx.degrees():
            mdim = m.carrier.dim(n)
            for j in range(pcx.dim(n)):
                in_s = j >= mdim
                srcdeg = n + 1 if in_s else n
                srcidx = j - mdim if in_s else j
                for ad in alg.carrier.degrees():
                    for ai in range(alg.carrier.dim(ad)):
                        a = {ai: f.one}
                        out = (
                            act(ad, a, srcdeg, {srcidx: f.one})
                            if side == "left"
                            else act(srcdeg, {srcidx: f.one}, ad, a)
                        )
                        if not out:
                            continue
                        td = n + ad
                        shift = m.carrier.dim(td) if in_s else 0
                        if in_s and side == "left" and ad % 2:
                            out = vscale(f, f.neg(f.one), out)
                        val = {k + shift: v for k, v in out.items()}
                        key = ((ad, ai), (n, j)) if side == "left" else ((n, j), (ad, ai))
                        table[key] = val
        return table

    left = (m.left_algebra, build("left", m.left_algebra, m.left_act)) if m.left else None
    right = (m.right_algebra, build("right", m.right_algebra, m.right_act)) if m.right else None
    return DgModule(pcx, left=left, right=right, name=f"Path({m.name})")


def path_module_projection(m: DgModule, pm: DgModule) -> ChainMap:
    f = m.field
    comp = {}
    for n in pm.carrier.degrees():
        if m.carrier.dim(n):
            comp[n] = Matrix(
                f, m.carrier.dim(n), pm.carrier.dim(n),
                {(i, i): f.one for i in range(m.carrier.dim(n))},
            )
    return ChainMap(pm.carrier, m.carrier, 0, comp)


# ---------------------------------------------------------------------------
# cellular filtrations and retract certificates


class FiltrationReport:
    def __init__(self, failures, flat_cofibrant):
        self.failures = failures
        self.flat_cofibrant = flat_cofibrant

    @property
    def ok(self):
        return not self.failures

    def __repr__(self):
        return f"<FiltrationReport ok={self.ok} failures={self.failures}>"


def verify_cellular_filtration(m: DgModule, stages, cells, side="left") -> FiltrationReport:
    """Certify a cellular filtration with free subquotients on zero-differential cells.

    stages: increasing list of {degree: Matrix} column spans in carrier
    coordinates, the last of which must be everything.  cells[k] lists the
    (degree, vector) generators whose classes must freely generate
    stage k / stage k-1 over the algebra.
    """
    f = m.field
    alg = m.left_algebra if side == "left" else m.right_algebra
    if alg is None:
        return FiltrationReport([f"module has no {side} action"], False)
    fails = []
    act = m.left_act if side == "left" else None

    def full(stage, n):
        return stage.get(n, Matrix.zero(f, m.carrier.dim(n), 0))

    # nesting and exhaustiveness
    for k in range(1, len(stages)):
        for n in stages[k - 1]:
            if solve_matrix(full(stages[k], n), full(stages[k - 1], n)) is None:
                fails.append(f"stage {k-1} not contained in stage {k} at degree {n}")
    last = stages[-1] if stages else {}
    for n in m.carrier.degrees():
        got = kernel_image(full(last, n)).rank if n in last else 0
        if got != m.carrier.dim(n):
            fails.append(f"filtration not exhaustive at degree {n}")
    # closure of each stage under d and the action
    for k, st in enumerate(stages):
        for n in st:
            img = m.carrier.d(n) * full(st, n)
            if not img.is_zero() and solve_matrix(full(st, n - 1), img) is None:
                fails.append(f"stage {k} not closed under d at degree {n}")
        for n in st:
            for j in range(full(st, n).ncols):
                vec = full(st, n).col(j)
                for ad in alg.carrier.degrees():
                    for ai in range(alg.carrier.dim(ad)):
                        a = {ai: f.one}
                        out = m.left_act(ad, a, n, vec) if side == "left" else m.right_act(n, vec, ad, a)
                        if out and solve_matrix(full(st, n + ad), Matrix.from_cols(f, m.carrier.dim(n + ad), [out])) is None:
                            fails.append(f"stage {k} not closed under the action at degree {n}")
    if fails:
        return FiltrationReport(fails, False)
    # free subquotients on the supplied cells
    for k, st in enumerate(stages):
        prev = stages[k - 1] if k else {}
        degs = sorted(set(st) | set(prev))
        subdim = {n: full(st, n).ncols for n in degs}
        quots = {}
        for n in degs:
            pre = solve_matrix(full(st, n), full(prev, n)) if n in prev else Matrix.zero(f, subdim[n], 0)
            if pre is None:
                return FiltrationReport([f"stage nesting broke at degree {n}"], False)
            quots[n] = quotient_basis(subdim[n], pre)
        cell_list = cells[k] if k < len(cells) else []
        xbasis = {}
        for (cd, _vec) in cell_list:
            xbasis.setdefault(cd, []).append("x")
        xcx = ChainComplex(f, {d: [f"x{d}.{i}" for i in range(len(v))] for d, v in xbasis.items()})
        lay = WordLayout([alg.carrier, xcx] if side == "left" else [xcx, alg.carrier])
        free = lay.complex()
        # the comparison map: a (x) x_j -> class of a.g_j (or g_j.a on the right)
        cells_by_deg = {}
        for (cd, vec) in cell_list:
            cells_by_deg.setdefault(cd, []).append(vec)
        psi = {}
        for n in lay.degrees():
            rows = quots[n].dim if n in quots else 0
            mat = Matrix.zero(f, rows, lay.dim(n))
            for col, key in enumerate(lay.keys(n)):
                (ad, ai), (xd, xj) = key if side == "left" else (key[1], key[0])
                gvec = cells_by_deg[xd][xj]
                out = (
                    m.left_act(ad, {ai: f.one}, xd, gvec)
                    if side == "left"
                    else m.right_act(xd, gvec, ad, {ai: f.one})
                )
                if not out:
                    continue
                c = solve(full(st, n), out)
                if c is None:
                    fails.append(f"cell image leaves stage {k} at degree {n}")
                    continue
                cls = quots[n].projection.apply(c)
                for row, v in cls.items():
                    mat.ent[(row, col)] = v
            psi[n] = mat
        # chain map against the free differential (zero differential on cells)
        for n in lay.degrees():
            dq = None
            if n in quots and n - 1 in quots:
                dsub = solve_matrix(full(st, n - 1), m.carrier.d(n) * full(st, n))
                dq = quots[n - 1].projection * (dsub * quots[n].section)
            lhs = psi.get(n - 1, Matrix.zero(f, quots[n - 1].dim if n - 1 in quots else 0, lay.dim(n - 1))) * free.d(n)
            rhs = (dq * psi[n]) if dq is not None else Matrix.zero(f, lhs.nrows, lhs.ncols)
            if lhs != rhs:
                fails.append(f"stage {k}: subquotient differential is not induced-free at degree {n}")
        # isomorphism degreewise
        for n in sorted(set(lay.degrees()) | set(q for q in quots if quots[q].dim)):
            want = quots[n].dim if n in quots else 0
            have = lay.dim(n)
            if want != have:
                fails.append(f"stage {k}: subquotient dimension {want} != free dimension {have} at degree {n}")
            elif want:
                from .linalg import is_invertible

                if not is_invertible(psi[n]):
                    fails.append(f"stage {k}: cell witness is not an isomorphism at degree {n}")
    # over a field every graded piece is flat, so a verified filtration is flat
    return FiltrationReport(fails, not fails)


def one_stage_filtration(m: DgModule, cells):
    """Certificate for a module free on the given cells: a single full stage.

    cells: list of (degree, vector) generators, each with zero differential
    modulo nothing (stage -1 is zero).
    """
    f = m.field
    stage = {n: Matrix.identity(f, m.carrier.dim(n)) for n in m.carrier.degrees()}
    return [stage], [list(cells)]


def find_retract_of_algebra(m: DgModule, side="left"):
    """Search for maps exhibiting the algebra as a module retract of m.

    Returns (found, details).  Sufficient certificate for homotopy
    (co)faithfulness; a miss is recorded as certificate-absent, not as a
    refutation.
    """
    f = m.field
    alg = m.left_algebra if side == "left" else m.right_algebra
    if alg is None:
        return False, {"reason": f"no {side} action"}
    space = module_map_space(m, alg.bimodule(), check_left=(side == "left"), check_right=(side == "right"))
    if space is None or not space[1].ncols:
        return False, {"reason": "no linear module maps to the algebra"}
    layout, basis = space
    # candidate cycles of degree 0 in m
    z = kernel_image(m.carrier.d(0)).kernel
    cands = [z.col(j) for j in range(z.ncols)]
    total = {}
    for c in cands:
        total = vadd(f, total, c)
    if total:
        cands.append(total)
    for i in range(len(cands)):
        for j in range(i + 1, len(cands)):
            cands.append(vadd(f, cands[i], cands[j]))
            if len(cands) > 40:
                break
        if len(cands) > 40:
            break
    unit = alg.unit
    for m0 in cands:
        # want sum_t lam_t r_t(m0) = unit: solve in the algebra's degree 0
        cols = []
        for t in range(basis.ncols):
            rt = layout.chainmap_of_vector(0, basis.col(t))
            cols.append(rt.mat(0).apply(m0))
        mat = Matrix.from_cols(f, alg.carrier.dim(0), cols)
        lam = solve(mat, unit)
        if lam is None:
            continue
        rvec = {}
        for t, c in lam.items():
            rvec = vadd(f, rvec, vscale(f, c, basis.col(t)))
        return True, {"splitting_element": m0, "retraction": rvec}
    return False, {"reason": "search exhausted"}


def module_map_space(m: DgModule, n: DgModule, check_left=True, check_right=True, degree=0):
    """Solution space of strict module maps m -> n inside the hom complex.

    Returns (HomLayout, inclusion Matrix of degree-`degree` solutions).
    """
    f = m.field
    hom, layout = hom_complex(m.carrier, n.carrier)
    k = degree
    dimk = layout.dim(k)
    if dimk == 0:
        return layout, Matrix.zero(f, 0, 0)
    rows = []
    # strictness: the hom differential vanishes
    dmat = hom.d(k)
    for r in range(dmat.nrows):
        row = {u: v for (rr, u), v in dmat.ent.items() if rr == r}
        if row:
            rows.append(row)

    def linearity_rows(side, alg):
        out = []
        for ad in alg.carrier.degrees():
            for ai in range(alg.carrier.dim(ad)):
                a = {ai: f.one}
                for md in m.carrier.degrees():
                    for mi in range(m.carrier.dim(md)):
                        if side == "left":
                            am = m.left_act(ad, a, md, {mi: f.one})
                        else:
                            am = m.right_act(md, {mi: f.one}, ad, a)
                        td = md + ad + k
                        for oi in range(n.carrier.dim(td)):
                            row = {}
                            for i2, c in am.items():
                                key = (md + ad, i2, oi)
                                if key in layout._pos.get(k, {}):
                                    row[layout.pos(k, key)] = f.add(row.get(layout.pos(k, key), f.zero), c)
                            for j2 in range(n.carrier.dim(md + k)):
                                if side == "left":
                                    av = n.left_act(ad, a, md + k, {j2: f.one})
                                else:
                                    av = n.right_act(md + k, {j2: f.one}, ad, a)
                                c = av.get(oi)
                                if c is not None:
                                    key = (md, mi, j2)
                                    u = layout.pos(k, key)
                                    row[u] = f.sub(row.get(u, f.zero), c)
                            row = {u: v for u, v in row.items() if v != f.zero}
                            if row:
                                out.append(row)
        return out

    if check_left and m.left and n.left:
        rows += linearity_rows("left", m.left_algebra)
    if check_right and m.right and n.right:
        rows += linearity_rows("right", m.right_algebra)
    if rows:
        mat = Matrix(f, len(rows), dimk)
        for r, row in enumerate(rows):
            for u, v in row.items():
                mat.ent[(r, u)] = v
        ker = kernel_image(mat).kernel
    else:
        ker = Matrix.identity(f, dimk)
    return layout, ker


def find_module_isomorphism(m: DgModule, n: DgModule, seed=0, tries=200):
    """Solver-found isomorphism of modules, or None.

    Solves the linear constraints for a strict module map and searches the
    solution space for an invertible element (deterministic, seeded).
    """
    import random

    from .linalg import is_invertible

    f = m.field
    layout, basis = module_map_space(m, n)
    if basis.ncols == 0:
        return None
    degs = set(m.carrier.degrees()) | set(n.carrier.degrees())
    if any(m.carrier.dim(d) != n.carrier.dim(d) for d in degs):
        return None

    def as_map(vec):
        return layout.chainmap_of_vector(0, vec)

    def invertible(cm):
        return all(is_invertible(cm.mat(d)) for d in degs if m.carrier.dim(d))

    for t in range(basis.ncols):
        cm = as_map(basis.col(t))
        if invertible(cm):
            return cm
    rng = random.Random(seed)
    pool = [1, -1, 2, 3] if f.kind == "rationals" else list(range(1, min(f.p, 5)))
    for _ in range(tries):
        vec = {}
        for t in range(basis.ncols):
            c = f.of(rng.choice(pool + [0]))
            if c != f.zero:
                for k, v in vscale(f, c, basis.col(t)).items():
                    vec[k] = f.add(vec.get(k, f.zero), v)
        vec = {k: v for k, v in vec.items() if v != f.zero}
        if not vec:
            continue
        cm = as_map(vec)
        if invertible(cm):
            return cm
    return None
