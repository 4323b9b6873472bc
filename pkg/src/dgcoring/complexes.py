"""Chain complexes with named bases, homology, and signed tensor/hom calculus.

Conventions, fixed once for the whole package:
  * homological grading, the differential lowers degree by 1;
  * a graded map f of degree k is "strict" when d f = (-1)^k f d;
  * d(x (x) y) = dx (x) y + (-1)^|x| x (x) dy on tensor products;
  * (del f) = d f - (-1)^|f| f d on hom complexes;
  * (f (x) g)(x (x) y) = (-1)^(|g||x|) f(x) (x) g(y).
Every constructed complex is certified by the d.d = 0 check in validate().
"""

from __future__ import annotations

from itertools import product as iproduct

from .linalg import Matrix, kernel_image, quotient_basis, solve, solve_matrix


class ChainComplex:
    """Finite-total-dimension complex: named basis and differential per degree."""

    def __init__(self, field, basis, diff=None, window=None):
        self.field = field
        self.basis = {n: list(names) for n, names in basis.items() if names}
        self.diff = {}
        self.window = window  # (lo, hi) when degreewise truncated, else None
        if diff:
            for n, m in diff.items():
                if m is None or m.is_zero():
                    continue
                self.diff[n] = m
        for n, m in self.diff.items():
            if m.nrows != self.dim(n - 1) or m.ncols != self.dim(n):
                raise ValueError(f"differential at degree {n} has wrong shape")

    def dim(self, n) -> int:
        return len(self.basis.get(n, ()))

    def degrees(self):
        return sorted(self.basis)

    def total_dim(self) -> int:
        return sum(len(v) for v in self.basis.values())

    def min_degree(self):
        return min(self.basis) if self.basis else 0

    def max_degree(self):
        return max(self.basis) if self.basis else 0

    def d(self, n) -> Matrix:
        m = self.diff.get(n)
        if m is None:
            return Matrix.zero(self.field, self.dim(n - 1), self.dim(n))
        return m

    def names(self, n):
        return self.basis.get(n, [])

    def validate(self):
        """Returns a list of failure strings; empty means the complex is valid."""
        fails = []
        for n in self.basis:
            if len(set(self.basis[n])) != len(self.basis[n]):
                fails.append(f"duplicate basis names in degree {n}")
        for n in sorted(self.diff):
            if self.window and n - 2 < self.window[0]:
                continue
            comp = self.d(n - 1) * self.d(n)
            if not comp.is_zero():
                fails.append(f"d.d != 0 at degree {n}")
                break
        return fails

    def __repr__(self):
        dims = {n: self.dim(n) for n in self.degrees()}
        return f"<ChainComplex dims={dims}>"


def unit_complex(field, name="1"):
    return ChainComplex(field, {0: [name]})


def zero_complex(field):
    return ChainComplex(field, {})


class ChainMap:
    """Graded map of chain complexes; component at n maps X_n to Y_{n+degree}."""

    def __init__(self, src, tgt, degree=0, comp=None):
        self.src = src
        self.tgt = tgt
        self.degree = degree
        self.comp = {}
        if comp:
            for n, m in comp.items():
                if m is None or m.is_zero():
                    continue
                if m.nrows != tgt.dim(n + degree) or m.ncols != src.dim(n):
                    raise ValueError(f"component at degree {n} has wrong shape")
                self.comp[n] = m

    @staticmethod
    def identity(x):
        return ChainMap(
            x, x, 0, {n: Matrix.identity(x.field, x.dim(n)) for n in x.degrees()}
        )

    @staticmethod
    def zero(src, tgt, degree=0):
        return ChainMap(src, tgt, degree)

    def mat(self, n) -> Matrix:
        m = self.comp.get(n)
        if m is None:
            return Matrix.zero(self.src.field, self.tgt.dim(n + self.degree), self.src.dim(n))
        return m

    def is_strict(self, degrees=None) -> bool:
        """Check d f = (-1)^degree f d on the given degrees (default: all)."""
        k = self.degree
        sign = self.src.field.of(1 if k % 2 == 0 else -1)
        if degrees is None:
            degrees = set(self.src.degrees())
            if self.src.window:
                lo = self.src.window[0]
                degrees = {n for n in degrees if n - 1 >= lo}
            if self.tgt.window:
                lo = self.tgt.window[0]
                degrees = {n for n in degrees if n + k - 1 >= lo}
        for n in sorted(degrees):
            lhs = self.tgt.d(n + k) * self.mat(n)
            rhs = (self.mat(n - 1) * self.src.d(n)).scale(sign)
            if lhs != rhs:
                return False
        return True

    def compose(self, other):
        """self after other."""
        if other.tgt is not self.src and other.tgt.basis != self.src.basis:
            raise ValueError("compose: middle complexes disagree")
        comp = {}
        for n in other.src.degrees():
            m = self.mat(n + other.degree) * other.mat(n)
            if not m.is_zero():
                comp[n] = m
        return ChainMap(other.src, self.tgt, self.degree + other.degree, comp)

    def __add__(self, other):
        assert self.degree == other.degree
        comp = {}
        for n in set(self.comp) | set(other.comp):
            comp[n] = self.mat(n) + other.mat(n)
        return ChainMap(self.src, self.tgt, self.degree, comp)

    def scale(self, c):
        return ChainMap(
            self.src, self.tgt, self.degree, {n: m.scale(c) for n, m in self.comp.items()}
        )

    def __sub__(self, other):
        return self + other.scale(-1)

    def __eq__(self, other):
        if not isinstance(other, ChainMap) or self.degree != other.degree:
            return False
        for n in set(self.comp) | set(other.comp):
            if self.mat(n) != other.mat(n):
                return False
        return True

    def eq_on(self, other, degrees) -> bool:
        return all(self.mat(n) == other.mat(n) for n in degrees)

    def is_iso(self, degrees=None) -> bool:
        from .linalg import is_invertible

        if self.degree != 0:
            return False
        if degrees is None:
            degrees = set(self.src.degrees()) | set(self.tgt.degrees())
        for n in degrees:
            if self.src.dim(n) != self.tgt.dim(n):
                return False
            if self.src.dim(n) and not is_invertible(self.mat(n)):
                return False
        return True

    def __repr__(self):
        return f"<ChainMap degree={self.degree}>"


# ---------------------------------------------------------------------------
# homology


class HomologySpace:
    def __init__(self, cycles, quot, reps):
        self.cycles = cycles          # chain-coordinate cycle basis
        self.quot = quot              # quotient of cycles by boundaries
        self.reps = reps              # chain-level representatives, one column per class
        self.dim = quot.dim


def homology_data(x: ChainComplex):
    """Per degree: cycle basis, boundary quotient, chain-level representatives."""
    out = {}
    for n in x.degrees():
        z = kernel_image(x.d(n)).kernel
        bnd = kernel_image(x.d(n + 1)).image if x.dim(n + 1) else Matrix.zero(x.field, x.dim(n), 0)
        if bnd.ncols:
            coords = solve_matrix(z, bnd)
            if coords is None:
                raise ValueError("boundaries not contained in cycles (corrupt complex)")
        else:
            coords = Matrix.zero(x.field, z.ncols, 0)
        q = quotient_basis(z.ncols, coords)
        out[n] = HomologySpace(z, q, z * q.section)
    return out


def homology_dims(x: ChainComplex, degrees=None):
    hd = homology_data(x)
    if degrees is None:
        return {n: hs.dim for n, hs in hd.items() if hs.dim}
    return {n: (hd[n].dim if n in hd else 0) for n in degrees}


def homology_class(hs: HomologySpace, vec: dict):
    """Coordinates of a cycle's homology class; None if not a cycle."""
    coords = solve(hs.cycles, vec)
    if coords is None:
        return None
    return hs.quot.projection.apply(coords)


def induced_on_homology(f: ChainMap):
    """Matrices of H_n(f) for a strict degree-0 chain map."""
    hx = homology_data(f.src)
    hy = homology_data(f.tgt)
    out = {}
    for n in sorted(set(hx) | set(hy)):
        dx = hx[n].dim if n in hx else 0
        dy = hy[n].dim if n in hy else 0
        m = Matrix.zero(f.src.field, dy, dx)
        if dx and dy:
            for j in range(dx):
                img = f.mat(n).apply(hx[n].reps.col(j))
                cls = homology_class(hy[n], img)
                if cls is None:
                    raise ValueError(f"image of a cycle is not a cycle at degree {n}")
                for i, v in cls.items():
                    m.ent[(i, j)] = v
        elif dx:
            for j in range(dx):
                img = f.mat(n).apply(hx[n].reps.col(j))
                if n in hy and homology_class(hy[n], img) is None:
                    raise ValueError(f"image of a cycle is not a cycle at degree {n}")
        out[n] = m
    return out


def is_weak_equivalence(f: ChainMap, degrees=None):
    """True iff H_n(f) is an isomorphism for all n; witness = first bad degree.

    Over a field the chain homotopy equivalences are exactly the homology
    isomorphisms, so this is the weak-equivalence test for every model
    structure handled by this package.
    """
    from .linalg import is_invertible

    if f.degree != 0:
        raise ValueError("weak equivalence test needs a degree-0 map")
    if not f.is_strict(degrees):
        raise ValueError("weak equivalence test needs a strict chain map")
    hmaps = induced_on_homology(f)
    for n in sorted(hmaps):
        if degrees is not None and n not in degrees:
            continue
        m = hmaps[n]
        if m.nrows != m.ncols or not is_invertible(m):
            return False, n
    return True, None


def mapping_cone(f: ChainMap) -> ChainComplex:
    """cone(f)_n = Y_n + X_{n-1}, d = [[dY, f],[0, -dX]]."""
    if f.degree != 0 or not f.is_strict():
        raise ValueError("mapping cone needs a strict degree-0 map")
    x, y = f.src, f.tgt
    field = x.field
    basis, diff = {}, {}
    degs = sorted(set(y.degrees()) | {n + 1 for n in x.degrees()})
    for n in degs:
        basis[n] = list(y.names(n)) + [f"c[{s}]" for s in x.names(n - 1)]
    out = ChainComplex(field, basis)
    for n in degs:
        ycols, xcols = y.dim(n), x.dim(n - 1)
        yrows, xrows = y.dim(n - 1), x.dim(n - 2)
        m = Matrix.zero(field, yrows + xrows, ycols + xcols)
        for (i, j), v in y.d(n).ent.items():
            m.ent[(i, j)] = v
        for (i, j), v in f.mat(n - 1).ent.items():
            m.ent[(i, j + ycols)] = v
        for (i, j), v in x.d(n - 1).ent.items():
            m.ent[(i + yrows, j + ycols)] = field.neg(v)
        if not m.is_zero():
            out.diff[n] = m
    return out


def desuspend(x: ChainComplex) -> ChainComplex:
    """(s^-1 X)_n = X_{n+1} with d(s x) = -s(dx)."""
    basis = {n - 1: [f"s[{s}]" for s in x.names(n)] for n in x.degrees()}
    diff = {n - 1: x.d(n).scale(-1) for n in x.degrees() if not x.d(n).is_zero()}
    win = None
    if x.window:
        win = (x.window[0] - 1, x.window[1] - 1)
    return ChainComplex(x.field, basis, diff, window=win)


def path_object(m: ChainComplex):
    """Contractible path object M + s^-1 M, Dx = dx - sx, with its projection."""
    field = m.field
    degs = sorted(set(m.degrees()) | {n - 1 for n in m.degrees()})
    basis = {}
    for n in degs:
        basis[n] = list(m.names(n)) + [f"s[{s}]" for s in m.names(n + 1)]
    out = ChainComplex(field, basis)
    for n in degs:
        mc, sc = m.dim(n), m.dim(n + 1)
        mr, sr = m.dim(n - 1), m.dim(n)
        blk = Matrix.zero(field, mr + sr, mc + sc)
        for (i, j), v in m.d(n).ent.items():
            blk.ent[(i, j)] = v
        for i in range(m.dim(n)):  # D x = dx - s x
            blk.ent[(mr + i, i)] = field.neg(field.one)
        for (i, j), v in m.d(n + 1).ent.items():
            blk.ent[(mr + i, j + mc)] = field.neg(v)
        if not blk.is_zero():
            out.diff[n] = blk
    proj = ChainMap(
        out,
        m,
        0,
        {
            n: Matrix(
                field,
                m.dim(n),
                out.dim(n),
                {(i, i): field.one for i in range(m.dim(n))},
            )
            for n in degs
            if m.dim(n)
        },
    )
    return out, proj


# ---------------------------------------------------------------------------
# words: n-fold tensor products with positional bookkeeping


class WordLayout:
    """Basis bookkeeping for X1 (x) ... (x) Xk.

    Keys in degree n are tuples ((d1,i1),...,(dk,ik)) with sum(di) = n,
    enumerated factor-major (degrees ascending, then indices).  An optional
    window (lo, hi) restricts which total degrees are materialized.
    """

    def __init__(self, factors, lo=None, hi=None):
        self.factors = list(factors)
        self.lo = lo
        self.hi = hi
        self._keys = {}
        self._pos = {}
        if self.factors:
            mins = [f.min_degree() for f in self.factors]
            maxs = [f.max_degree() for f in self.factors]
            total_lo = sum(mins)
            total_hi = sum(maxs)
        else:
            total_lo = total_hi = 0
        if lo is not None:
            total_lo = max(total_lo, lo)
        if hi is not None:
            total_hi = min(total_hi, hi)
        for n in range(total_lo, total_hi + 1):
            keys = []
            self._enumerate(n, 0, [], keys)
            if keys:
                self._keys[n] = keys
                self._pos[n] = {k: t for t, k in enumerate(keys)}

    def _enumerate(self, remaining, slot, prefix, out):
        if slot == len(self.factors):
            if remaining == 0:
                out.append(tuple(prefix))
            return
        rest = self.factors[slot + 1 :]
        rest_min = sum(f.min_degree() for f in rest)
        rest_max = sum(f.max_degree() for f in rest)
        f = self.factors[slot]
        for d in f.degrees():
            if remaining - d < rest_min or remaining - d > rest_max:
                continue
            for i in range(f.dim(d)):
                prefix.append((d, i))
                self._enumerate(remaining - d, slot + 1, prefix, out)
                prefix.pop()

    def degrees(self):
        return sorted(self._keys)

    def keys(self, n):
        return self._keys.get(n, [])

    def dim(self, n):
        return len(self._keys.get(n, ()))

    def pos(self, n, key):
        return self._pos[n][key]

    def name(self, key, sep="⊗"):
        if not key:
            return "[]"
        return sep.join(self.factors[s].names(d)[i] for s, (d, i) in enumerate(key))

    def cx(self):
        if not hasattr(self, "_cx"):
            self._cx = self.complex()
        return self._cx

    def complex(self, sep="⊗"):
        """The word complex with the standard signed tensor differential."""
        field = self.factors[0].field if self.factors else None
        if field is None:
            raise ValueError("empty word needs an explicit field; use unit_complex")
        basis = {n: [self.name(k, sep) for k in self.keys(n)] for n in self.degrees()}
        cx = ChainComplex(field, basis, window=(self.lo, self.hi) if self.lo is not None else None)
        for n in self.degrees():
            m = Matrix.zero(field, self.dim(n - 1), self.dim(n))
            for col, key in enumerate(self.keys(n)):
                sign = field.one
                for s, (d, i) in enumerate(key):
                    dmat = self.factors[s].d(d)
                    for (i2, j2), v in dmat.ent.items():
                        if j2 != i:
                            continue
                        nk = key[:s] + ((d - 1, i2),) + key[s + 1 :]
                        if n - 1 in self._pos and nk in self._pos[n - 1]:
                            row = self._pos[n - 1][nk]
                            prev = m.ent.get((row, col), field.zero)
                            val = field.add(prev, field.mul(sign, v))
                            if val == field.zero:
                                m.ent.pop((row, col), None)
                            else:
                                m.ent[(row, col)] = val
                    if d % 2:
                        sign = field.neg(sign)
            if not m.is_zero():
                cx.diff[n] = m
        return cx


class Block:
    """One piece of a slotwise map: a graded map between two subwords."""

    def __init__(self, src_layout, tgt_layout, degree, mats):
        self.src = src_layout
        self.tgt = tgt_layout
        self.degree = degree
        self.mats = mats  # degree -> Matrix between the subword bases
        self._cols = {}  # (degree, idx) -> {(tgt_deg, tgt_key): scalar}

    @staticmethod
    def identity(factor):
        lay = WordLayout([factor])
        mats = {n: Matrix.identity(factor.field, factor.dim(n)) for n in factor.degrees()}
        return Block(lay, lay, 0, mats)

    @staticmethod
    def from_chainmap(f: ChainMap, src_factors=None, tgt_factors=None):
        """Wrap a map whose source/target are word complexes of the given factors."""
        src = WordLayout(src_factors if src_factors is not None else [f.src])
        tgt = WordLayout(tgt_factors if tgt_factors is not None else [f.tgt])
        return Block(src, tgt, f.degree, {n: f.mat(n) for n in src.degrees()})

    def arity(self):
        return len(self.src.factors)

    def apply_basis(self, d, idx):
        """Sparse output of the block on one basis element: {(deg, tgt_key): scalar}."""
        cached = self._cols.get((d, idx))
        if cached is not None:
            return cached
        m = self.mats.get(d)
        if m is not None and (d, 0) not in self._cols:
            # fill the whole degree at once
            td = d + self.degree
            tkeys = self.tgt.keys(td)
            for j in range(m.ncols):
                self._cols.setdefault((d, j), {})
            for (i, j), v in m.ent.items():
                self._cols[(d, j)][(td, tkeys[i])] = v
        return self._cols.get((d, idx), {})


def slot_map(src_layout: WordLayout, tgt_layout: WordLayout, blocks):
    """Assemble b1 (x) ... (x) bm as matrices between two word layouts.

    Koszul rule: applying a block of odd degree across the earlier source
    slots contributes (-1)^(degree of the source prefix).
    """
    field = (src_layout.factors or tgt_layout.factors)[0].field
    arities = [b.arity() for b in blocks]
    if sum(arities) != len(src_layout.factors):
        raise ValueError("blocks do not cover the source word")
    total_deg = sum(b.degree for b in blocks)
    mats = {}
    for n in src_layout.degrees():
        tn = n + total_deg
        rows = tgt_layout.dim(tn)
        cols = src_layout.dim(n)
        m = Matrix.zero(field, rows, cols)
        if rows == 0 or cols == 0:
            mats[n] = m
            continue
        for col, key in enumerate(src_layout.keys(n)):
            # split the key into per-block subkeys
            parts = []
            at = 0
            for a in arities:
                parts.append(key[at : at + a])
                at += a
            # block outputs with prefix signs
            choices = []
            prefix_deg = 0
            sign_total = 1
            ok = True
            for b, part in zip(blocks, parts):
                pdeg = sum(d for d, _ in part)
                if b.degree % 2 and prefix_deg % 2:
                    sign_total = -sign_total
                if b.arity() == 0:
                    outs = b.apply_basis(0, 0)
                else:
                    bl = b.src
                    outs = b.apply_basis(pdeg, bl.pos(pdeg, part))
                if not outs:
                    ok = False
                    break
                choices.append(list(outs.items()))
                prefix_deg += pdeg
            if not ok:
                continue
            base_sign = field.of(sign_total)
            for combo in iproduct(*choices):
                tkey = tuple(kk for (_, bk), _ in combo for kk in bk)
                val = base_sign
                for (_, _), v in combo:
                    val = field.mul(val, v)
                if tn not in tgt_layout._pos or tkey not in tgt_layout._pos[tn]:
                    continue
                row = tgt_layout.pos(tn, tkey)
                prev = m.ent.get((row, col), field.zero)
                s = field.add(prev, val)
                if s == field.zero:
                    m.ent.pop((row, col), None)
                else:
                    m.ent[(row, col)] = s
        mats[n] = m
    return mats


def slot_chainmap(src_layout, tgt_layout, blocks) -> ChainMap:
    """slot_map wrapped as a ChainMap between the two word complexes."""
    mats = slot_map(src_layout, tgt_layout, blocks)
    k = sum(b.degree for b in blocks)
    return ChainMap(src_layout.cx(), tgt_layout.cx(), k, mats)


def tensor_complexes(x: ChainComplex, y: ChainComplex):
    """Graded tensor product with positional bookkeeping for both factors."""
    if x.field != y.field:
        raise ValueError("tensor over different fields")
    layout = WordLayout([x, y])
    return layout.complex(), layout


# ---------------------------------------------------------------------------
# hom complexes


class HomLayout:
    """Basis bookkeeping for the hom complex: degree-k slot (n, i, j)
    is the elementary map X_n[i] -> Y_{n+k}[j]."""

    def __init__(self, x, y):
        self.x = x
        self.y = y
        self._keys = {}
        self._pos = {}
        for n in x.degrees():
            for m in y.degrees():
                k = m - n
                keys = self._keys.setdefault(k, [])
                for i in range(x.dim(n)):
                    for j in range(y.dim(m)):
                        keys.append((n, i, j))
        for k, keys in self._keys.items():
            keys.sort()
            self._pos[k] = {key: t for t, key in enumerate(keys)}

    def degrees(self):
        return sorted(self._keys)

    def keys(self, k):
        return self._keys.get(k, [])

    def dim(self, k):
        return len(self._keys.get(k, ()))

    def pos(self, k, key):
        return self._pos[k][key]

    def vector_of_chainmap(self, f: ChainMap) -> dict:
        """Hom-complex coordinates of a graded map."""
        out = {}
        k = f.degree
        for n in f.comp:
            for (j, i), v in f.comp[n].ent.items():
                out[self.pos(k, (n, i, j))] = v
        return out

    def chainmap_of_vector(self, k, vec: dict) -> ChainMap:
        comp = {}
        for idx, v in vec.items():
            n, i, j = self.keys(k)[idx]
            m = comp.setdefault(n, Matrix.zero(self.x.field, self.y.dim(n + k), self.x.dim(n)))
            m.ent[(j, i)] = v
        return ChainMap(self.x, self.y, k, comp)


def hom_complex(x: ChainComplex, y: ChainComplex):
    """The unbounded hom complex; finite because both supports are finite."""
    if x.field != y.field:
        raise ValueError("hom over different fields")
    field = x.field
    layout = HomLayout(x, y)
    basis = {
        k: [f"[{x.names(n)[i]}->{y.names(n + k)[j]}]" for (n, i, j) in layout.keys(k)]
        for k in layout.degrees()
    }
    cx = ChainComplex(field, basis)
    for k in layout.degrees():
        rows = layout.dim(k - 1)
        m = Matrix.zero(field, rows, layout.dim(k))
        sign = field.of(1 if k % 2 == 0 else -1)
        for col, (n, i, j) in enumerate(layout.keys(k)):
            # d_Y o f part
            for (j2, j1), v in y.d(n + k).ent.items():
                if j1 == j:
                    row = layout.pos(k - 1, (n, i, j2))
                    prev = m.ent.get((row, col), field.zero)
                    s = field.add(prev, v)
                    if s == field.zero:
                        m.ent.pop((row, col), None)
                    else:
                        m.ent[(row, col)] = s
            # -(-1)^k f o d_X part
            for (i1, i2), v in x.d(n + 1).ent.items():
                if i1 == i:
                    row = layout.pos(k - 1, (n + 1, i2, j))
                    prev = m.ent.get((row, col), field.zero)
                    s = field.sub(prev, field.mul(sign, v))
                    if s == field.zero:
                        m.ent.pop((row, col), None)
                    else:
                        m.ent[(row, col)] = s
        if not m.is_zero():
            cx.diff[k] = m
    return cx, layout
