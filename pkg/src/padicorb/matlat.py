"""Exact matrices over F and E, lattice normal forms, Cartan coordinates,
and the lattice-enumeration backends behind the orbital-integral engines.

Lattices are O-spans of matrix columns.  The unique Hermite normal form over
the DVR (upper triangular, diagonal pi^{a_i}, entries above a pivot reduced
mod that pivot) is the canonical representative used for dedup and equality.

Engines use n <= 2; normal forms are written for general n.
"""

from .errors import (
    NotStronglyRegular,
    PrecisionExhausted,
    SingularInput,
    ZeroInput,
)
from .locfield import PadicScalar, QuadExtScalar


class Matrix:
    """Immutable matrix over F (PadicScalar entries) or E (QuadExtScalar)."""

    __slots__ = ("rows", "n", "m")

    def __init__(self, rows):
        self.rows = tuple(tuple(r) for r in rows)
        self.n = len(self.rows)
        self.m = len(self.rows[0]) if self.rows else 0
        assert all(len(r) == self.m for r in self.rows)

    # -- constructors --------------------------------------------------------

    @classmethod
    def from_rational_rows(cls, cfg, rows, ring="F"):
        if ring == "F":
            return cls(
                [[PadicScalar.from_rational(cfg, x) for x in r] for r in rows]
            )
        out = []
        for r in rows:
            row = []
            for x in r:
                if isinstance(x, QuadExtScalar):
                    row.append(x)
                elif isinstance(x, tuple):
                    row.append(QuadExtScalar.from_pair(cfg, x[0], x[1]))
                else:
                    row.append(QuadExtScalar.from_pair(cfg, x, 0))
            out.append(row)
        return cls(out)

    @classmethod
    def identity(cls, cfg, n, ring="F"):
        one = PadicScalar.one(cfg) if ring == "F" else QuadExtScalar.one(cfg)
        zero = PadicScalar.zero(cfg) if ring == "F" else QuadExtScalar.zero(cfg)
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)])

    @property
    def ring(self):
        return "E" if isinstance(self.rows[0][0], QuadExtScalar) else "F"

    @property
    def cfg(self):
        x = self.rows[0][0]
        return x.cfg

    def _zero(self):
        return (
            PadicScalar.zero(self.cfg)
            if self.ring == "F"
            else QuadExtScalar.zero(self.cfg)
        )

    # -- algebra ---------------------------------------------------------------

    def __getitem__(self, ij):
        return self.rows[ij[0]][ij[1]]

    def __add__(self, o):
        return Matrix(
            [
                [self.rows[i][j] + o.rows[i][j] for j in range(self.m)]
                for i in range(self.n)
            ]
        )

    def __sub__(self, o):
        return Matrix(
            [
                [self.rows[i][j] - o.rows[i][j] for j in range(self.m)]
                for i in range(self.n)
            ]
        )

    def __neg__(self):
        return Matrix([[-x for x in r] for r in self.rows])

    def __mul__(self, o):
        if isinstance(o, (PadicScalar, QuadExtScalar)):
            return Matrix([[x * o for x in r] for r in self.rows])
        assert self.m == o.n
        out = []
        for i in range(self.n):
            row = []
            for j in range(o.m):
                acc = self.rows[i][0] * o.rows[0][j]
                for k in range(1, self.m):
                    acc = acc + self.rows[i][k] * o.rows[k][j]
                row.append(acc)
            out.append(row)
        return Matrix(out)

    def transpose(self):
        return Matrix(
            [[self.rows[i][j] for i in range(self.n)] for j in range(self.m)]
        )

    def conj(self):
        assert self.ring == "E"
        return Matrix([[x.conj() for x in r] for r in self.rows])

    def star(self):
        """g* = transpose of the Galois conjugate."""
        return self.conj().transpose()

    def scale_by_uniformizer(self, k):
        return Matrix([[x.scale_by_uniformizer(k) for x in r] for r in self.rows])

    def det(self):
        assert self.n == self.m
        if self.n == 1:
            return self.rows[0][0]
        if self.n == 2:
            return (
                self.rows[0][0] * self.rows[1][1]
                - self.rows[0][1] * self.rows[1][0]
            )
        # cofactor expansion along the first row (small n only)
        acc = None
        for j in range(self.m):
            minor = Matrix(
                [
                    [self.rows[i][k] for k in range(self.m) if k != j]
                    for i in range(1, self.n)
                ]
            )
            term = self.rows[0][j] * minor.det()
            if j % 2 == 1:
                term = -term
            acc = term if acc is None else acc + term
        return acc

    def inverse(self):
        assert self.n == self.m
        d = self.det()
        if d.is_exact_zero:
            raise SingularInput("matrix is singular")
        dinv = d.inverse()
        if self.n == 1:
            return Matrix([[dinv]])
        if self.n == 2:
            a, b = self.rows[0]
            c, e = self.rows[1]
            return Matrix([[e * dinv, -(b * dinv)], [-(c * dinv), a * dinv]])
        raise NotImplementedError("inverse only for n <= 2")

    def char_poly(self):
        """Monic characteristic polynomial, coefficients low-to-high."""
        assert self.n == self.m
        one = (
            PadicScalar.one(self.cfg)
            if self.ring == "F"
            else QuadExtScalar.one(self.cfg)
        )
        if self.n == 1:
            return [-self.rows[0][0], one]
        if self.n == 2:
            tr = self.rows[0][0] + self.rows[1][1]
            return [self.det(), -tr, one]
        raise NotImplementedError("char_poly only for n <= 2")

    def trace(self):
        acc = self.rows[0][0]
        for i in range(1, self.n):
            acc = acc + self.rows[i][i]
        return acc

    def is_integral(self):
        """Certified entry-wise membership in the integer ring."""
        for r in self.rows:
            for x in r:
                if x.is_exact_zero:
                    continue
                if _val_lower(x) >= 0:
                    continue
                _ = x.valuation()  # raises PrecisionExhausted if uncertain
                return False
        return True

    def same(self, o):
        return self.n == o.n and self.m == o.m and all(
            self.rows[i][j].same(o.rows[i][j])
            for i in range(self.n)
            for j in range(self.m)
        )

    def apply_entrywise(self, fn):
        return Matrix([[fn(x) for x in r] for r in self.rows])

    def to_text(self):
        return ";".join(",".join(x.to_text() for x in r) for r in self.rows)

    def __repr__(self):
        return "Matrix(%s)" % (self.to_text(),)


def _val_lower(x):
    if x.is_exact_zero:
        return x.cfg.N
    if isinstance(x, QuadExtScalar):
        return min(_val_lower(x.a), _val_lower(x.b))
    return x.v


def _is_uncertain(x):
    if isinstance(x, QuadExtScalar):
        try:
            x.valuation()
            return False
        except PrecisionExhausted:
            return True
        except ZeroInput:
            return False
    return x.is_uncertain


def _valuation(x):
    return x.valuation()


def row_vector(cfg, entries, ring="F"):
    return Matrix.from_rational_rows(cfg, [entries], ring)


def mat_val_ge(M, r):
    """Certified test: all entries have valuation >= r."""
    for row in M.rows:
        for x in row:
            if x.is_exact_zero:
                continue
            if _val_lower(x) >= r:
                continue
            v = x.valuation()  # may raise PrecisionExhausted
            if v < r:
                return False
    return True


# ---------------------------------------------------------------------------
# Signatures
# ---------------------------------------------------------------------------


class Signature:
    """Weakly decreasing integer vector; indexes Hecke double cosets and
    K_E-orbits on the Hermitian space."""

    __slots__ = ("parts",)

    def __init__(self, parts):
        parts = tuple(int(x) for x in parts)
        assert all(parts[i] >= parts[i + 1] for i in range(len(parts) - 1)), parts
        self.parts = parts

    @property
    def size(self):
        return sum(self.parts)

    def weighted_size(self):
        """n(lambda) = sum (i-1) * lambda_i."""
        return sum(i * x for i, x in enumerate(self.parts))

    def __len__(self):
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    def __eq__(self, o):
        return isinstance(o, Signature) and self.parts == o.parts

    def __hash__(self):
        return hash(self.parts)

    def __repr__(self):
        return "Signature%r" % (self.parts,)


def signatures_of_size(n, size, min_part=0):
    """All weakly decreasing n-tuples with given sum and parts >= min_part."""
    out = []

    def rec(prefix, remaining, cap):
        if len(prefix) == n - 1:
            last = remaining
            if min_part <= last <= cap:
                out.append(Signature(prefix + [last]))
            return
        slots = n - len(prefix)
        lo = max(min_part, -(-remaining // slots))  # ceil
        for part in range(min(cap, remaining - min_part * (slots - 1)), lo - 1, -1):
            rec(prefix + [part], remaining - part, part)

    if n == 0:
        return [Signature(())] if size == 0 else []
    rec([], size, size - min_part * (n - 1))
    return out


# ---------------------------------------------------------------------------
# Normal forms
# ---------------------------------------------------------------------------


def hnf_columns(M):
    """Column Hermite normal form over the DVR of M.ring.

    Returns the canonical upper-triangular basis matrix of the column span
    (which must be full rank n): diagonal pi^{a_i}, zeros below, and the
    entry in row i of a later column reduced mod pi^{a_i}.  Only right
    multiplication by GL_n(O) is used, so the output is a basis of the same
    lattice and is unique.

    Rows are processed bottom-up: the pivot column for row i has its rows
    below i already eliminated, which makes the pivot columns triangular.
    """
    n = M.n
    cols = [[M.rows[i][j] for i in range(n)] for j in range(M.m)]
    basis = [None] * n
    pivots = [None] * n
    for row in range(n - 1, -1, -1):
        best, bestv = None, None
        uncertain_bound = None
        for j, c in enumerate(cols):
            x = c[row]
            if x.is_exact_zero:
                continue
            if _is_uncertain(x):
                lb = _val_lower(x)
                if uncertain_bound is None or lb < uncertain_bound:
                    uncertain_bound = lb
                continue
            v = x.valuation()
            if bestv is None or v < bestv:
                best, bestv = j, v
        if uncertain_bound is not None and (bestv is None or uncertain_bound <= bestv):
            raise PrecisionExhausted("HNF pivot not determined at precision")
        if best is None:
            raise SingularInput("column span is not full rank")
        pivot_col = cols.pop(best)
        unit = pivot_col[row].scale_by_uniformizer(-bestv)
        uinv = unit.inverse()
        pivot_col = [x * uinv for x in pivot_col]
        piv = pivot_col[row]
        pinv = piv.inverse()
        for c in cols:
            x = c[row]
            if x.is_exact_zero:
                continue
            ratio = x * pinv
            for i in range(n):
                c[i] = c[i] - ratio * pivot_col[i]
        basis[row] = pivot_col
        pivots[row] = bestv
    # reduce the entry of column j in row i (i < j) modulo pi^{a_i};
    # descending i so a fixed row is never perturbed afterwards
    for j in range(1, n):
        for i in range(j - 1, -1, -1):
            x = basis[j][i]
            red = _residue_scalar(x, pivots[i])
            ratio = (x - red) * basis[i][i].inverse()
            for r in range(n):
                basis[j][r] = basis[j][r] - ratio * basis[i][r]
            basis[j][i] = red
    rows = []
    for i in range(n):
        row_entries = []
        for j in range(n):
            if i > j:
                row_entries.append(_exact_zero_like(M))
            elif i == j:
                row_entries.append(_exact_uniformizer_like(M, pivots[i]))
            else:
                row_entries.append(basis[j][i])
        rows.append(row_entries)
    return Matrix(rows)


def _exact_zero_like(M):
    return (
        PadicScalar.zero(M.cfg) if M.ring == "F" else QuadExtScalar.zero(M.cfg)
    )


def _exact_uniformizer_like(M, k):
    if M.ring == "F":
        return PadicScalar.uniformizer(M.cfg, k)
    return QuadExtScalar(
        PadicScalar.uniformizer(M.cfg, k), PadicScalar.zero(M.cfg)
    )


def _residue_scalar(x, k):
    """Canonical representative of x mod pi^k as an exact scalar."""
    if isinstance(x, QuadExtScalar):
        return QuadExtScalar(_residue_scalar(x.a, k), _residue_scalar(x.b, k))
    cfg = x.cfg
    if x.is_exact_zero or x.valuation_lower_bound() >= k:
        if x.is_uncertain and x.v < k:
            raise PrecisionExhausted("residue not determined at precision")
        return PadicScalar.zero(cfg)
    if x.is_uncertain:
        raise PrecisionExhausted("residue not determined at precision")
    if x.v + x.prec < k:
        raise PrecisionExhausted("residue not determined at precision")
    from fractions import Fraction

    if x.v >= 0:
        r = Fraction((x.unit * cfg.p**x.v) % cfg.p**k)
    else:
        # fractional residue: x = unit / p^{-v}; class mod pi^k lifts to
        # (unit mod p^{k-v}) / p^{-v}
        r = Fraction(x.unit % cfg.p ** (k - x.v), cfg.p ** (-x.v))
    return PadicScalar.from_rational(cfg, r)


class LatticeBasis:
    """A full O-lattice, held by its canonical HNF basis matrix."""

    __slots__ = ("basis", "_key")

    def __init__(self, basis_matrix, already_hnf=False):
        self.basis = basis_matrix if already_hnf else hnf_columns(basis_matrix)
        self._key = self.basis.to_text()

    @property
    def ring(self):
        return self.basis.ring

    def index_valuation(self):
        """v(L) = valuation of det(basis) relative to the standard lattice."""
        acc = 0
        for i in range(self.basis.n):
            acc += self.basis.rows[i][i].valuation()
        return acc

    def key(self):
        return self._key

    def __eq__(self, o):
        return isinstance(o, LatticeBasis) and self._key == o._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return "LatticeBasis(%s)" % self._key


def smith_valuations(M):
    """Valuations (a_1 <= ... <= a_n) of the Smith normal form over the DVR."""
    n = M.n
    work = [list(r) for r in M.rows]

    def find_pivot(k):
        best, bestv = None, None
        unc = None
        for i in range(k, n):
            for j in range(k, n):
                x = work[i][j]
                if x.is_exact_zero:
                    continue
                if _is_uncertain(x):
                    lb = _val_lower(x)
                    if unc is None or lb < unc:
                        unc = lb
                    continue
                v = x.valuation()
                if bestv is None or v < bestv:
                    best, bestv = (i, j), v
        if unc is not None and (bestv is None or unc <= bestv):
            raise PrecisionExhausted("Smith pivot not determined at precision")
        return best, bestv

    vals = []
    for k in range(n):
        pos, v = find_pivot(k)
        if pos is None:
            raise SingularInput("matrix is singular (Smith)")
        i0, j0 = pos
        work[k], work[i0] = work[i0], work[k]
        for r in work:
            r[k], r[j0] = r[j0], r[k]
        piv = work[k][k]
        pinv = piv.inverse()
        for i in range(k + 1, n):
            x = work[i][k]
            if x.is_exact_zero:
                continue
            ratio = x * pinv
            for j in range(k, n):
                work[i][j] = work[i][j] - ratio * work[k][j]
        for j in range(k + 1, n):
            x = work[k][j]
            if x.is_exact_zero:
                continue
            ratio = x * pinv
            for i in range(k, n):
                work[i][j] = work[i][j] - ratio * work[i][k]
        vals.append(v)
    assert all(vals[i] <= vals[i + 1] for i in range(len(vals) - 1))
    return vals


def cartan_coordinate(g):
    """lambda with g in K pi^lambda K, via Smith normal form over O."""
    d = g.det()
    if d.is_exact_zero:
        raise SingularInput("Cartan coordinate of singular matrix")
    _ = d.valuation()  # certify invertibility at precision
    vals = smith_valuations(g)
    return Signature(tuple(sorted(vals, reverse=True)))


def char_poly(M):
    return M.char_poly()


def star(g):
    return g.star()


# ---------------------------------------------------------------------------
# Mirabolic-side enumeration: A-stable lattices with w L <= pi^k O
# ---------------------------------------------------------------------------


def cyclic_matrix(A, w):
    """Rows w, wA, ..., wA^{n-1} (the strong-regularity matrix)."""
    n = A.n
    rows = [list(w.rows[0])]
    cur = w
    for _ in range(1, n):
        cur = cur * A
        rows.append(list(cur.rows[0]))
    return Matrix(rows)


def bounding_lattice(A, w, k=0):
    """M = {v : w A^j v in pi^k O for all j < n}; contains every qualifying
    lattice.  Full rank exactly when (A, w) is strongly regular."""
    W = cyclic_matrix(A, w)
    d = W.det()
    if d.is_exact_zero:
        raise NotStronglyRegular("w is not cyclic for A")
    try:
        _ = d.valuation()
    except PrecisionExhausted:
        raise NotStronglyRegular("cyclicity not certified at precision")
    return LatticeBasis(W.inverse().scale_by_uniformizer(k))


def _sublattice_bases(B, j):
    """HNF parameter triples for index-q^j sublattices of the lattice with
    basis B (n = B.n in {1, 2}).  Yields (H, a, b, t)."""
    cfg = B.cfg
    n = B.n
    if n == 1:
        yield Matrix([[PadicScalar.uniformizer(cfg, j)]]), j, 0, 0
        return
    assert n == 2
    p = cfg.p
    for a in range(j + 1):
        b = j - a
        for t in range(p**a):
            H = Matrix(
                [
                    [
                        PadicScalar.uniformizer(cfg, a),
                        PadicScalar.from_rational(cfg, t),
                    ],
                    [PadicScalar.zero(cfg), PadicScalar.uniformizer(cfg, b)],
                ]
            )
            yield H, a, b, t


def enumerate_stable_lattices(A, w, v_max, k=0, hecke_type=None):
    """All lattices L with A L <= L, w L <= pi^k O_F, and v(L) within v_max
    of the bounding lattice, in deterministic order.

    Returns a list of (LatticeBasis, v(L), eta_parity, rel_position) where
    rel_position is the Cartan type of L/AL (None when A L = L fails the
    integrality certificate is impossible -- entries always computed).
    If hecke_type is given, only lattices whose L/AL type equals it are kept.
    """
    M = bounding_lattice(A, w, k)
    BM = M.basis
    BMinv = BM.inverse()
    G = BMinv * A * BM
    out = []
    for j in range(v_max + 1):
        for H, a, b, t in _sublattice_bases(BM, j):
            Hinv = H.inverse()
            C = Hinv * G * H
            try:
                if not C.is_integral():
                    continue
            except PrecisionExhausted:
                raise
            basis = BM * H
            L = LatticeBasis(basis)
            vL = L.index_valuation()
            try:
                rel = Signature(tuple(sorted(smith_valuations(C), reverse=True)))
            except SingularInput:
                raise
            if hecke_type is not None and rel != hecke_type:
                continue
            out.append((L, vL, 1 if vL % 2 == 0 else -1, rel))
    return out


def stable_lattice_counts(A, w, v_max, k=0, hecke_type=None):
    """Counts c_m of qualifying lattices per index valuation m, plus the
    minimal valuation (offset).  Used by the symbolic tail cancellation."""
    found = enumerate_stable_lattices(A, w, v_max, k, hecke_type)
    M = bounding_lattice(A, w, k)
    base = M.index_valuation()
    counts = [0] * (v_max + 1)
    for (_L, vL, _s, _rel) in found:
        counts[vL - base] += 1
    return base, counts


# ---------------------------------------------------------------------------
# Hermitian-side machinery: duals, self-dual lattices, x-stable enumeration
# ---------------------------------------------------------------------------


def hermitian_dual_basis(B):
    """Basis of the Hermitian dual of the lattice with basis B (ring E):
    Lambda = B O^n  =>  Lambda^dual = (B*)^{-1} O^n."""
    return B.star().inverse()


def is_self_dual(B):
    """Lambda^dual == Lambda, tested by unimodularity of the Gram matrix."""
    Gram = B.star() * B
    if not Gram.is_integral():
        return False
    return Gram.det().valuation() == 0


def enumerate_self_dual_in(N_basis):
    """All self-dual lattices L with N^dual <= L <= N, N given by its basis.

    Finite: the sandwich has index q^{2 v(N)} (empty when v(N) < 0).
    """
    Ndual = hermitian_dual_basis(N_basis)
    Nd = LatticeBasis(Ndual)
    N = LatticeBasis(N_basis)
    vN = N.index_valuation()
    if vN > 0:
        return []  # N^dual would not sit inside N
    j_total = Nd.index_valuation() - vN
    cfg = N_basis.cfg
    out = []
    BN = N.basis
    BNinv = BN.inverse()
    n = BN.n
    for j in range(j_total + 1):
        if vN + j != 0:
            continue  # self-dual forces v(L) = 0
        for H, a, b, t in _sublattice_bases_E(BN, j):
            basis = BN * H
            # containment of N^dual: BNinv * basis^{-1} * Ndual integral
            L = LatticeBasis(basis)
            rel = L.basis.inverse() * Ndual
            try:
                if not rel.is_integral():
                    continue
            except PrecisionExhausted:
                raise
            if is_self_dual(L.basis):
                out.append(L)
    # dedup (HNF keys are canonical)
    seen, uniq = set(), []
    for L in out:
        if L.key() not in seen:
            seen.add(L.key())
            uniq.append(L)
    return uniq


def _sublattice_bases_E(B, j):
    """Index-q_E^j sublattice HNF triples over O_E (n in {1,2});
    the off-diagonal parameter runs over O_E / pi^a."""
    cfg = B.cfg
    n = B.n
    if n == 1:
        yield (
            Matrix([[QuadExtScalar(PadicScalar.uniformizer(cfg, j), PadicScalar.zero(cfg))]]),
            j,
            0,
            0,
        )
        return
    assert n == 2
    p = cfg.p
    for a in range(j + 1):
        b = j - a
        for ta in range(p**a):
            for tb in range(p**a):
                t = QuadExtScalar.from_pair(cfg, ta, tb)
                H = Matrix(
                    [
                        [
                            QuadExtScalar(
                                PadicScalar.uniformizer(cfg, a),
                                PadicScalar.zero(cfg),
                            ),
                            t,
                        ],
                        [
                            QuadExtScalar.zero(cfg),
                            QuadExtScalar(
                                PadicScalar.uniformizer(cfg, b),
                                PadicScalar.zero(cfg),
                            ),
                        ],
                    ]
                )
                yield H, a, b, (ta, tb)


def count_self_dual_inside(N_basis):
    return len(enumerate_self_dual_in(N_basis))
