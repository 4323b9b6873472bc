"""Exact sparse linear algebra over the rationals and prime fields.

Everything downstream (complexes, algebras, corings, the cobar complex)
reduces to the four primitives here: reduced column echelon forms,
kernel/image bases, solving, and canonical quotient bases.  All results
are deterministic: the same input always yields the same basis.
"""

from __future__ import annotations

from fractions import Fraction


def _is_prime(n: int) -> bool:
    # deterministic Miller-Rabin, valid far beyond any sane modulus
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class ScalarField:
    """An exact field of scalars: the rationals or F_p for a prime p."""

    def __init__(self, kind: str, p: int | None = None):
        if kind == "rationals":
            if p is not None:
                raise ValueError("rationals take no modulus")
        elif kind == "prime-field":
            if p is None or not _is_prime(p):
                raise ValueError(f"modulus {p!r} is not prime")
        else:
            raise ValueError(f"unknown field kind {kind!r}")
        self.kind = kind
        self.p = p

    def __repr__(self):
        return "QQ" if self.kind == "rationals" else f"GF({self.p})"

    def __eq__(self, other):
        return (
            isinstance(other, ScalarField)
            and self.kind == other.kind
            and self.p == other.p
        )

    def __hash__(self):
        return hash((self.kind, self.p))

    @property
    def zero(self):
        return 0 if self.kind == "prime-field" else Fraction(0)

    @property
    def one(self):
        return 1 if self.kind == "prime-field" else Fraction(1)

    def of(self, x):
        """Coerce an int, Fraction or 'a/b' string into this field."""
        if isinstance(x, str):
            x = Fraction(x)
        if self.kind == "rationals":
            return Fraction(x)
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise ZeroDivisionError(f"denominator divisible by {self.p}")
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        return int(x) % self.p

    def add(self, a, b):
        return (a + b) % self.p if self.kind == "prime-field" else a + b

    def sub(self, a, b):
        return (a - b) % self.p if self.kind == "prime-field" else a - b

    def mul(self, a, b):
        return (a * b) % self.p if self.kind == "prime-field" else a * b

    def neg(self, a):
        return (-a) % self.p if self.kind == "prime-field" else -a

    def inv(self, a):
        if self.kind == "prime-field":
            if a % self.p == 0:
                raise ZeroDivisionError("inverse of zero")
            return pow(a, -1, self.p)
        return Fraction(1) / a

    def format(self, a) -> str:
        return str(a)


QQ = ScalarField("rationals")


def GF(p: int) -> ScalarField:
    return ScalarField("prime-field", p)


class Matrix:
    """Sparse exact matrix: entries maps (row, col) to a nonzero scalar."""

    __slots__ = ("field", "nrows", "ncols", "ent")

    def __init__(self, field, nrows, ncols, ent=None):
        self.field = field
        self.nrows = nrows
        self.ncols = ncols
        self.ent = {}
        if ent:
            for (i, j), v in ent.items():
                if not (0 <= i < nrows and 0 <= j < ncols):
                    raise ValueError(f"entry ({i},{j}) out of bounds")
                v = field.of(v)
                if v != field.zero:
                    self.ent[(i, j)] = v

    @staticmethod
    def zero(field, nrows, ncols):
        return Matrix(field, nrows, ncols)

    @staticmethod
    def identity(field, n):
        one = field.one
        m = Matrix(field, n, n)
        for i in range(n):
            m.ent[(i, i)] = one
        return m

    @staticmethod
    def from_rows(field, rows):
        nrows = len(rows)
        ncols = len(rows[0]) if rows else 0
        ent = {}
        for i, row in enumerate(rows):
            for j, v in enumerate(row):
                ent[(i, j)] = v
        return Matrix(field, nrows, ncols, ent)

    @staticmethod
    def from_cols(field, nrows, cols):
        """Build from a list of sparse columns (dicts row -> scalar)."""
        m = Matrix(field, nrows, len(cols))
        z = field.zero
        for j, col in enumerate(cols):
            for i, v in col.items():
                v = field.of(v)
                if v != z:
                    m.ent[(i, j)] = v
        return m

    def copy(self):
        m = Matrix(self.field, self.nrows, self.ncols)
        m.ent = dict(self.ent)
        return m

    def __eq__(self, other):
        return (
            isinstance(other, Matrix)
            and self.nrows == other.nrows
            and self.ncols == other.ncols
            and self.ent == other.ent
        )

    def __hash__(self):
        return hash((self.nrows, self.ncols, tuple(sorted(self.ent.items()))))

    def is_zero(self):
        return not self.ent

    def get(self, i, j):
        return self.ent.get((i, j), self.field.zero)

    def col(self, j):
        """Column j as a sparse dict row -> scalar."""
        return {i: v for (i, jj), v in self.ent.items() if jj == j}

    def cols(self):
        out = [dict() for _ in range(self.ncols)]
        for (i, j), v in self.ent.items():
            out[j][i] = v
        return out

    def __add__(self, other):
        f = self.field
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch in add")
        m = self.copy()
        for k, v in other.ent.items():
            s = f.add(m.ent.get(k, f.zero), v)
            if s == f.zero:
                m.ent.pop(k, None)
            else:
                m.ent[k] = s
        return m

    def __sub__(self, other):
        return self + other.scale(self.field.neg(self.field.one))

    def scale(self, c):
        f = self.field
        c = f.of(c)
        m = Matrix(f, self.nrows, self.ncols)
        if c == f.zero:
            return m
        for k, v in self.ent.items():
            m.ent[k] = f.mul(c, v)
        return m

    def __neg__(self):
        return self.scale(self.field.neg(self.field.one))

    def __mul__(self, other):
        if isinstance(other, Matrix):
            return self.matmul(other)
        return self.scale(other)

    def matmul(self, other):
        f = self.field
        if self.ncols != other.nrows:
            raise ValueError(
                f"shape mismatch in mul: {self.nrows}x{self.ncols} * "
                f"{other.nrows}x{other.ncols}"
            )
        rows_of_other = {}
        for (k, j), v in other.ent.items():
            rows_of_other.setdefault(k, []).append((j, v))
        out = {}
        z = f.zero
        for (i, k), a in self.ent.items():
            for j, b in rows_of_other.get(k, ()):
                key = (i, j)
                s = f.add(out.get(key, z), f.mul(a, b))
                if s == z:
                    out.pop(key, None)
                else:
                    out[key] = s
        m = Matrix(f, self.nrows, other.ncols)
        m.ent = out
        return m

    def transpose(self):
        m = Matrix(self.field, self.ncols, self.nrows)
        m.ent = {(j, i): v for (i, j), v in self.ent.items()}
        return m

    def apply(self, vec: dict) -> dict:
        """Apply to a sparse column vector (dict idx -> scalar)."""
        f = self.field
        z = f.zero
        cols = {}
        for (i, j), v in self.ent.items():
            cols.setdefault(j, []).append((i, v))
        out = {}
        for j, c in vec.items():
            for i, v in cols.get(j, ()):
                s = f.add(out.get(i, z), f.mul(v, c))
                if s == z:
                    out.pop(i, None)
                else:
                    out[i] = s
        return out

    def hstack(self, other):
        if self.nrows != other.nrows:
            raise ValueError("hstack row mismatch")
        m = Matrix(self.field, self.nrows, self.ncols + other.ncols)
        m.ent = dict(self.ent)
        for (i, j), v in other.ent.items():
            m.ent[(i, j + self.ncols)] = v
        return m

    def submatrix_cols(self, js):
        m = Matrix(self.field, self.nrows, len(js))
        pos = {j: t for t, j in enumerate(js)}
        for (i, j), v in self.ent.items():
            if j in pos:
                m.ent[(i, pos[j])] = v
        return m

    def to_dense(self):
        return [
            [self.get(i, j) for j in range(self.ncols)] for i in range(self.nrows)
        ]

    def __repr__(self):
        if self.nrows * self.ncols > 100:
            return f"<Matrix {self.nrows}x{self.ncols}, {len(self.ent)} entries>"
        rows = []
        for i in range(self.nrows):
            rows.append(" ".join(str(self.get(i, j)) for j in range(self.ncols)))
        return "\n".join(rows) or f"<Matrix {self.nrows}x{self.ncols}>"


def _row_reduce(dense, field, augment=None):
    """In-place RREF on a dense row-list; returns pivot column list.

    `augment` is an optional list of extra rows entries... kept None here;
    augmented solving passes the widened matrix directly.
    """
    nrows = len(dense)
    ncols = len(dense[0]) if nrows else 0
    z, one = field.zero, field.one
    pivots = []
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, nrows):
            if dense[i][c] != z:
                pr = i
                break
        if pr is None:
            continue
        dense[r], dense[pr] = dense[pr], dense[r]
        pv = dense[r][c]
        if pv != one:
            inv = field.inv(pv)
            dense[r] = [field.mul(inv, x) for x in dense[r]]
        for i in range(nrows):
            if i != r and dense[i][c] != z:
                coef = dense[i][c]
                ri, rr = dense[i], dense[r]
                dense[i] = [field.sub(ri[k], field.mul(coef, rr[k])) for k in range(ncols)]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return pivots


def rref(m: Matrix):
    """Reduced row echelon form; returns (Matrix, pivot columns)."""
    dense = m.to_dense()
    pivots = _row_reduce(dense, m.field)
    out = Matrix(m.field, m.nrows, m.ncols)
    z = m.field.zero
    for i, row in enumerate(dense):
        for j, v in enumerate(row):
            if v != z:
                out.ent[(i, j)] = v
    return out, pivots


def column_echelon(m: Matrix):
    """Reduced column echelon form (transpose convention of rref).

    Zero columns are dropped; returns (Matrix, rank).  Leading entries sit
    at strictly increasing row indices, equal 1, and are alone in their row.
    """
    r, pivots = rref(m.transpose())
    out = r.transpose().submatrix_cols(list(range(len(pivots))))
    return out, len(pivots)


class KernelImage:
    def __init__(self, kernel, image, rank):
        self.kernel = kernel
        self.image = image
        self.rank = rank


def kernel_image(m: Matrix) -> KernelImage:
    """Kernel and image bases of m, both in reduced column echelon form."""
    f = m.field
    r, pivots = rref(m)
    rank = len(pivots)
    pivset = set(pivots)
    free = [j for j in range(m.ncols) if j not in pivset]
    # kernel column for each free variable: x_free = 1, pivots adjust
    kcols = []
    for fc in free:
        col = {fc: f.one}
        for row, pc in enumerate(pivots):
            v = r.get(row, fc)
            if v != f.zero:
                col[pc] = f.neg(v)
        kcols.append(col)
    kernel = Matrix.from_cols(f, m.ncols, kcols)
    kernel, _ = column_echelon(kernel)
    image, _ = column_echelon(m)
    return KernelImage(kernel, image, rank)


def solve(m: Matrix, b: dict):
    """One exact solution of m x = b (free variables zero), or None.

    b is a sparse column dict; the result is a sparse column dict.
    """
    f = m.field
    z = f.zero
    dense = m.to_dense()
    for i in range(m.nrows):
        dense[i].append(b.get(i, z))
    pivots = _row_reduce(dense, f)
    # inconsistent iff a pivot lands in the augmented column
    if pivots and pivots[-1] == m.ncols:
        return None
    x = {}
    for row, pc in enumerate(pivots):
        v = dense[row][m.ncols]
        if v != z:
            x[pc] = v
    return x


def solve_matrix(m: Matrix, b: Matrix):
    """Solve m X = B column by column; None if any column fails."""
    f = m.field
    z = f.zero
    dense = m.to_dense()
    bcols = b.cols()
    for i in range(m.nrows):
        row = dense[i]
        for col in bcols:
            row.append(col.get(i, z))
    pivots = _row_reduce(dense, f)
    if pivots and pivots[-1] >= m.ncols:
        return None
    out = Matrix(f, m.ncols, b.ncols)
    for row, pc in enumerate(pivots):
        for j in range(b.ncols):
            v = dense[row][m.ncols + j]
            if v != z:
                out.ent[(pc, j)] = v
    return out


def invert(m: Matrix):
    if m.nrows != m.ncols:
        return None
    inv = solve_matrix(m, Matrix.identity(m.field, m.nrows))
    if inv is None:
        return None
    if (m * inv) != Matrix.identity(m.field, m.nrows):
        return None
    return inv


def rank(m: Matrix) -> int:
    _, pivots = rref(m)
    return len(pivots)


def is_invertible(m: Matrix) -> bool:
    return m.nrows == m.ncols and rank(m) == m.nrows


class QuotientData:
    """Canonical presentation of V/span(relations).

    projection: dim -> q, section: q -> dim, projection*section = id,
    representatives = lexicographically first independent standard basis
    vectors modulo the relation span.
    """

    def __init__(self, projection, section, representatives):
        self.projection = projection
        self.section = section
        self.representatives = representatives

    @property
    def dim(self):
        return len(self.representatives)


class _Eliminator:
    """Incremental Gaussian elimination over sparse vectors."""

    def __init__(self, field):
        self.field = field
        self.rows = {}  # pivot index -> normalized sparse vector

    def reduce(self, vec: dict) -> dict:
        f = self.field
        z = f.zero
        vec = dict(vec)
        while vec:
            p = min(vec)
            row = self.rows.get(p)
            if row is None:
                return vec
            c = vec[p]
            for j, v in row.items():
                s = f.sub(vec.get(j, z), f.mul(c, v))
                if s == z:
                    vec.pop(j, None)
                else:
                    vec[j] = s
        return vec

    def insert(self, vec: dict) -> bool:
        """Reduce and insert; returns True if the vector was independent."""
        f = self.field
        vec = self.reduce(vec)
        if not vec:
            return False
        p = min(vec)
        inv = f.inv(vec[p])
        self.rows[p] = {j: f.mul(inv, v) for j, v in vec.items()}
        # keep fully reduced: clear column p from the other rows
        for q, row in self.rows.items():
            if q != p and p in row:
                c = row[p]
                for j, v in self.rows[p].items():
                    s = f.sub(row.get(j, f.zero), f.mul(c, v))
                    if s == f.zero:
                        row.pop(j, None)
                    else:
                        row[j] = s
        return True


def quotient_basis(total_dim: int, relations: Matrix) -> QuotientData:
    """Canonical quotient of the standard total_dim space by relation columns."""
    f = relations.field
    if relations.nrows != total_dim:
        raise ValueError("relations have the wrong number of rows")
    if relations.is_zero():
        ident = Matrix.identity(f, total_dim)
        return QuotientData(ident, ident.copy(), list(range(total_dim)))
    elim = _Eliminator(f)
    r = 0
    for col in relations.cols():
        if elim.insert(col):
            r += 1
    reps = []
    for i in range(total_dim):
        if len(reps) + r == total_dim:
            break
        if elim.insert({i: f.one}):
            reps.append(i)
    q = len(reps)
    rel_basis, _ = column_echelon(relations)
    section = Matrix(f, total_dim, q, {(rep, t): f.one for t, rep in enumerate(reps)})
    if q == 0:
        return QuotientData(Matrix(f, 0, total_dim), section, reps)
    # full basis [relations | reps] of the total space; projection reads off
    # the representative coordinates, i.e. the bottom q rows of its inverse
    full = rel_basis.hstack(section)
    finv = invert(full)
    if finv is None:
        raise ValueError("relations plus representatives do not span")
    proj = Matrix(f, q, total_dim)
    for (i, j), v in finv.ent.items():
        if i >= r:
            proj.ent[(i - r, j)] = v
    return QuotientData(proj, section, reps)
