"""Exact arithmetic in F = Q_p (p odd) and its unramified quadratic extension.

Scalars are stored as (valuation, unit residue mod p^prec) so multiplication
is exact and |.|_F, eta are O(1).  Addition can destroy known digits; a value
about which nothing but a valuation lower bound is known becomes an
"uncertain" scalar, and any predicate that would have to guess raises
PrecisionExhausted instead.

E = F(sqrt(u)) for a fixed quadratic non-residue u.  E/F is unramified, so
v_E(a + b*sqrt(u)) = min(v(a), v(b)) with no cancellation, and the norm map
is surjective on units.
"""

from fractions import Fraction

from .errors import Inseparable, PrecisionExhausted, ZeroInput

_INF = float("inf")


def _legendre(a, p):
    # p odd prime, a not divisible by p
    return 1 if pow(a % p, (p - 1) // 2, p) == 1 else -1


def default_nonresidue(p):
    for u in range(2, p):
        if _legendre(u, p) == -1:
            return u
    raise ValueError("no quadratic non-residue found (p must be an odd prime)")


class FieldConfig:
    """Working field data: the prime p, precision N, and the non-residue u.

    q = p here (F = Q_p).  Invariants: p >= 3 prime, N >= 4, legendre(u) = -1.
    """

    __slots__ = ("p", "N", "u")

    def __init__(self, p, N=12, nonresidue=None):
        if p < 3 or any(p % d == 0 for d in range(2, int(p**0.5) + 1)):
            raise ValueError("p must be an odd prime")
        if N < 4:
            raise ValueError("precision N must be >= 4")
        u = default_nonresidue(p) if nonresidue is None else nonresidue
        if _legendre(u, p) != -1:
            raise ValueError("u must be a quadratic non-residue mod p")
        self.p, self.N, self.u = p, N, u

    @property
    def q(self):
        return self.p

    def with_precision(self, N):
        return FieldConfig(self.p, N, self.u)

    def __eq__(self, other):
        return (
            isinstance(other, FieldConfig)
            and (self.p, self.N, self.u) == (other.p, other.N, other.u)
        )

    def __hash__(self):
        return hash((self.p, self.N, self.u))

    def __repr__(self):
        return "FieldConfig(p=%d, N=%d, u=%d)" % (self.p, self.N, self.u)


class PadicScalar:
    """An element of F known to some precision.

    Three states:
      * exact zero                     (v = +inf)
      * certified nonzero              (v, unit mod p^prec, prec >= 1)
      * uncertain: only "in p^v * O"   (prec = 0; branching predicates raise)
    """

    __slots__ = ("cfg", "v", "unit", "prec")

    def __init__(self, cfg, v, unit, prec):
        self.cfg = cfg
        if v is _INF or v == _INF:
            self.v, self.unit, self.prec = _INF, 0, cfg.N
            return
        prec = min(prec, cfg.N)
        if prec >= 1:
            unit %= cfg.p**prec
            assert unit % cfg.p != 0, "unit residue must be invertible"
        else:
            unit = 0
        self.v, self.unit, self.prec = v, unit, prec

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, cfg):
        return cls(cfg, _INF, 0, cfg.N)

    @classmethod
    def one(cls, cfg):
        return cls(cfg, 0, 1, cfg.N)

    @classmethod
    def from_rational(cls, cfg, x):
        x = Fraction(x)
        if x == 0:
            return cls.zero(cfg)
        p = cfg.p
        num, den = x.numerator, x.denominator
        v = 0
        while num % p == 0:
            num //= p
            v += 1
        while den % p == 0:
            den //= p
            v -= 1
        unit = num * pow(den, -1, p**cfg.N) % p**cfg.N
        return cls(cfg, v, unit, cfg.N)

    @classmethod
    def uniformizer(cls, cfg, k=1):
        return cls(cfg, k, 1, cfg.N)

    @classmethod
    def uncertain(cls, cfg, v_bound):
        return cls(cfg, v_bound, 0, 0)

    # -- state predicates ---------------------------------------------------

    @property
    def is_exact_zero(self):
        return self.v is _INF or self.v == _INF

    @property
    def is_uncertain(self):
        return self.prec == 0 and not self.is_exact_zero

    def is_zero(self):
        """Certified zero test; raises if undecidable at precision."""
        if self.is_exact_zero:
            return True
        if self.is_uncertain:
            raise PrecisionExhausted("zero test undecidable at precision")
        return False

    def valuation(self):
        if self.is_exact_zero:
            raise ZeroInput("valuation of exact zero")
        if self.is_uncertain:
            raise PrecisionExhausted("valuation undecidable at precision")
        return self.v

    def valuation_lower_bound(self):
        if self.is_exact_zero:
            return self.cfg.N  # conventional: at least full precision deep
        return self.v

    # -- arithmetic ----------------------------------------------------------

    def __neg__(self):
        if self.is_exact_zero or self.is_uncertain:
            return self
        return PadicScalar(self.cfg, self.v, -self.unit, self.prec)

    def __add__(self, other):
        a, b = self, other
        if a.is_exact_zero:
            return b
        if b.is_exact_zero:
            return a
        cfg = a.cfg
        if a.is_uncertain or b.is_uncertain:
            if a.is_uncertain and b.is_uncertain:
                return PadicScalar.uncertain(cfg, min(a.v, b.v))
            known, unc = (a, b) if b.is_uncertain else (b, a)
            if known.v < unc.v:
                prec = min(known.prec, unc.v - known.v)
                return PadicScalar(cfg, known.v, known.unit, prec)
            return PadicScalar.uncertain(cfg, min(known.v, unc.v))
        if a.v > b.v:
            a, b = b, a
        delta = b.v - a.v
        K = min(a.prec, delta + b.prec, cfg.N)
        pK = cfg.p**K
        s = (a.unit + b.unit * cfg.p**delta) % pK
        if s == 0:
            return PadicScalar.uncertain(cfg, a.v + K)
        t = 0
        while s % cfg.p == 0:
            s //= cfg.p
            t += 1
        return PadicScalar(cfg, a.v + t, s, K - t)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        a, b = self, other
        cfg = a.cfg
        if a.is_exact_zero or b.is_exact_zero:
            return PadicScalar.zero(cfg)
        if a.is_uncertain or b.is_uncertain:
            return PadicScalar.uncertain(cfg, a.v + b.v)
        prec = min(a.prec, b.prec)
        return PadicScalar(cfg, a.v + b.v, a.unit * b.unit, prec)

    def inverse(self):
        if self.is_exact_zero:
            raise ZeroInput("inverse of zero")
        if self.is_uncertain:
            raise PrecisionExhausted("inverse of uncertain scalar")
        pk = self.cfg.p**self.prec
        return PadicScalar(self.cfg, -self.v, pow(self.unit, -1, pk), self.prec)

    def __truediv__(self, other):
        return self * other.inverse()

    def scale_by_uniformizer(self, k):
        if self.is_exact_zero:
            return self
        return PadicScalar(self.cfg, self.v + k, self.unit, self.prec)

    # -- comparisons ---------------------------------------------------------

    def same(self, other):
        """Equality at the shared certified precision."""
        if self.is_exact_zero and other.is_exact_zero:
            return True
        if self.is_exact_zero or other.is_exact_zero:
            z, nz = (self, other) if self.is_exact_zero else (other, self)
            if nz.is_uncertain:
                raise PrecisionExhausted("equality undecidable")
            return False
        if self.is_uncertain or other.is_uncertain:
            raise PrecisionExhausted("equality undecidable")
        if self.v != other.v:
            return False
        k = min(self.prec, other.prec)
        return (self.unit - other.unit) % self.cfg.p**k == 0

    def __eq__(self, other):
        if not isinstance(other, PadicScalar):
            return NotImplemented
        return self.same(other)

    def __hash__(self):
        raise TypeError("PadicScalar is not hashable (precision semantics)")

    def __repr__(self):
        if self.is_exact_zero:
            return "0"
        if self.is_uncertain:
            return "O(pi^%d)" % self.v
        return "pi^%d*%d(+O(pi^%d))" % (self.v, self.unit, self.v + self.prec)

    def to_text(self):
        """Serialization form "v:unit" used in orbit-point text dumps."""
        if self.is_exact_zero:
            return "zero"
        if self.is_uncertain:
            return "O:%d" % self.v
        return "%d:%d" % (self.v, self.unit)

    @classmethod
    def from_text(cls, cfg, s):
        if s == "zero":
            return cls.zero(cfg)
        if s.startswith("O:"):
            return cls.uncertain(cfg, int(s[2:]))
        v, unit = s.split(":")
        return cls(cfg, int(v), int(unit), cfg.N)

    def to_rational(self):
        """A rational representative of the residue class (exact to prec)."""
        if self.is_exact_zero:
            return Fraction(0)
        if self.is_uncertain:
            raise PrecisionExhausted("no rational lift of uncertain scalar")
        return Fraction(self.unit) * Fraction(self.cfg.p) ** self.v


def eta(x):
    """eta(x) = (-1)^v(x), the unramified quadratic character of E/F."""
    return 1 if x.valuation() % 2 == 0 else -1


def is_square(x):
    """x in (F^x)^2, decided by valuation parity and a residue test (p odd)."""
    v = x.valuation()  # raises ZeroInput / PrecisionExhausted as needed
    if v % 2 != 0:
        return False
    return _legendre(x.unit, x.cfg.p) == 1


def sqrt(x):
    """Hensel square root of a certified square."""
    if not is_square(x):
        raise ValueError("not a square")
    cfg = x.cfg
    p = cfg.p
    r = pow(x.unit, (p + 1) // 4, p) if p % 4 == 3 else _tonelli(x.unit % p, p)
    if (r * r - x.unit) % p != 0:
        r = p - r
    assert (r * r - x.unit) % p == 0
    k = 1
    while k < x.prec:
        k = min(2 * k, x.prec)
        pk = p**k
        r = (r + (x.unit - r * r) * pow(2 * r, -1, pk)) % pk
    return PadicScalar(cfg, x.v // 2, r, x.prec)


def _tonelli(a, p):
    # Tonelli-Shanks for p = 1 mod 4
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while _legendre(z, p) != -1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 2 ** (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


class QuadExtScalar:
    """Element a + b*sqrt(u) of the unramified quadratic extension E."""

    __slots__ = ("a", "b")

    def __init__(self, a, b):
        self.a, self.b = a, b

    @classmethod
    def from_pair(cls, cfg, a, b=0):
        return cls(PadicScalar.from_rational(cfg, a), PadicScalar.from_rational(cfg, b))

    @classmethod
    def zero(cls, cfg):
        z = PadicScalar.zero(cfg)
        return cls(z, z)

    @classmethod
    def one(cls, cfg):
        return cls(PadicScalar.one(cfg), PadicScalar.zero(cfg))

    @classmethod
    def embed(cls, x):
        return cls(x, PadicScalar.zero(x.cfg))

    @classmethod
    def sqrt_u(cls, cfg):
        return cls(PadicScalar.zero(cfg), PadicScalar.one(cfg))

    @property
    def cfg(self):
        return self.a.cfg

    def __add__(self, o):
        return QuadExtScalar(self.a + o.a, self.b + o.b)

    def __sub__(self, o):
        return QuadExtScalar(self.a - o.a, self.b - o.b)

    def __neg__(self):
        return QuadExtScalar(-self.a, -self.b)

    def __mul__(self, o):
        u = PadicScalar.from_rational(self.cfg, self.cfg.u)
        return QuadExtScalar(
            self.a * o.a + u * (self.b * o.b), self.a * o.b + self.b * o.a
        )

    def conj(self):
        return QuadExtScalar(self.a, -self.b)

    def norm(self):
        u = PadicScalar.from_rational(self.cfg, self.cfg.u)
        return self.a * self.a - u * (self.b * self.b)

    def trace(self):
        return self.a + self.a

    def inverse(self):
        nm = self.norm()
        if nm.is_exact_zero:
            raise ZeroInput("inverse of zero in E")
        inv = nm.inverse()
        return QuadExtScalar(self.a * inv, -(self.b * inv))

    def __truediv__(self, o):
        return self * o.inverse()

    @property
    def is_exact_zero(self):
        return self.a.is_exact_zero and self.b.is_exact_zero

    def is_zero(self):
        return self.a.is_zero() and self.b.is_zero()

    def valuation(self):
        """v_E; no cancellation happens in the unramified extension."""
        if self.is_exact_zero:
            raise ZeroInput("valuation of zero in E")
        if self.a.is_exact_zero:
            return self.b.valuation()
        if self.b.is_exact_zero:
            return self.a.valuation()
        if self.a.is_uncertain or self.b.is_uncertain:
            va, vb = self.a.valuation_lower_bound(), self.b.valuation_lower_bound()
            if not self.a.is_uncertain and self.a.v < vb:
                return self.a.v
            if not self.b.is_uncertain and self.b.v < va:
                return self.b.v
            raise PrecisionExhausted("valuation in E undecidable")
        return min(self.a.valuation(), self.b.valuation())

    def same(self, o):
        return self.a.same(o.a) and self.b.same(o.b)

    def __eq__(self, o):
        if not isinstance(o, QuadExtScalar):
            return NotImplemented
        return self.same(o)

    def __hash__(self):
        raise TypeError("QuadExtScalar is not hashable")

    def scale_by_uniformizer(self, k):
        return QuadExtScalar(
            self.a.scale_by_uniformizer(k), self.b.scale_by_uniformizer(k)
        )

    def __repr__(self):
        return "(%r)+(%r)*sqrt(u)" % (self.a, self.b)

    def to_text(self):
        return self.a.to_text() + "," + self.b.to_text()

    @classmethod
    def from_text(cls, cfg, s):
        sa, sb = s.split(",")
        return cls(PadicScalar.from_text(cfg, sa), PadicScalar.from_text(cfg, sb))


def norm_trace_conj(a):
    """(Nm(a), Tr(a), sigma(a)) for a in E; Nm and Tr land in F."""
    return a.norm(), a.trace(), a.conj()


def norm_solve(cfg, c):
    """Some a in E with Nm(a) = c, or None if c is not a norm.

    Nm(E^x) = units times even powers of the uniformizer, so the only
    obstruction is valuation parity (E/F unramified, p odd).
    """
    v = c.valuation()
    if v % 2 != 0:
        return None
    target = PadicScalar(cfg, 0, c.unit, c.prec)  # unit part of c
    # scan b until target + u*b^2 is a square, then Hensel-lift its root
    for bb in range(0, 4 * cfg.p):
        b = PadicScalar.from_rational(cfg, bb)
        u = PadicScalar.from_rational(cfg, cfg.u)
        cand = target + u * b * b
        if cand.is_exact_zero or cand.is_uncertain:
            continue
        if is_square(cand):
            a = sqrt(cand)
            res = QuadExtScalar(a, b).scale_by_uniformizer(v // 2)
            return res
    raise PrecisionExhausted("norm equation scan failed")  # pragma: no cover


# ---------------------------------------------------------------------------
# Etale algebras of degree <= 2 and their Tate L-factors
# ---------------------------------------------------------------------------


class EtaleFactor:
    """One factor F_i of F[T]/(f): its degree, residue degree, and type."""

    __slots__ = ("degree", "residue_degree", "ramified", "contains_E")

    def __init__(self, degree, residue_degree, ramified, contains_E):
        assert not (contains_E and (ramified or residue_degree % 2 != 0))
        self.degree = degree
        self.residue_degree = residue_degree
        self.ramified = ramified
        self.contains_E = contains_E

    def __repr__(self):
        kind = "E" if self.contains_E else ("ram" if self.ramified else "F")
        return "EtaleFactor(%s, deg=%d)" % (kind, self.degree)


class EtaleAlgebraDesc:
    """Decomposition F[T]/(f) = prod F_i with the S_1/S_2 split.

    S_1 = factors not containing E (eta_i nontrivial), S_2 = the rest.
    """

    def __init__(self, factors, source_coeffs):
        self.factors = tuple(factors)
        self.source_coeffs = tuple(source_coeffs)
        assert sum(f.degree for f in self.factors) == len(self.source_coeffs) - 1

    @property
    def s1(self):
        return [f for f in self.factors if not f.contains_E]

    @property
    def s2(self):
        return [f for f in self.factors if f.contains_E]

    def is_elliptic(self):
        """E not contained in any factor (the §S_2-empty ellipticity test)."""
        return len(self.s2) == 0

    def __repr__(self):
        return "EtaleAlgebraDesc(%r)" % (list(self.factors),)


def etale_algebra(cfg, coeffs):
    """Classify F[T]/(f) for monic f of degree <= 2.

    coeffs: (c0, ..., c_{d-1}, 1) low-to-high, entries PadicScalar.
    """
    deg = len(coeffs) - 1
    one = coeffs[-1]
    assert not one.is_exact_zero and one.valuation() == 0, "f must be monic"
    if deg == 1:
        return EtaleAlgebraDesc([EtaleFactor(1, 1, False, False)], coeffs)
    if deg != 2:
        raise ValueError("degree must be <= 2")
    c0, c1 = coeffs[0], coeffs[1]
    four = PadicScalar.from_rational(cfg, 4)
    disc = c1 * c1 - four * c0
    try:
        if disc.is_zero():
            raise Inseparable("zero discriminant")
    except PrecisionExhausted:
        raise PrecisionExhausted("discriminant not certified nonzero")
    if is_square(disc):
        fac = [EtaleFactor(1, 1, False, False), EtaleFactor(1, 1, False, False)]
        return EtaleAlgebraDesc(fac, coeffs)
    if disc.valuation() % 2 != 0:
        return EtaleAlgebraDesc([EtaleFactor(2, 1, True, False)], coeffs)
    # even valuation, non-square unit: the unramified quadratic, i.e. E itself
    return EtaleAlgebraDesc([EtaleFactor(2, 2, False, True)], coeffs)


# ---------------------------------------------------------------------------
# Rational functions in T = q^{-s}
# ---------------------------------------------------------------------------


def _poly_trim(c):
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c)


def poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _poly_trim(out)


def poly_add(a, b):
    out = [Fraction(0)] * max(len(a), len(b))
    for i, x in enumerate(a):
        out[i] += x
    for i, y in enumerate(b):
        out[i] += y
    return _poly_trim(out)


def poly_eval(a, x):
    acc = Fraction(0)
    for c in reversed(a):
        acc = acc * x + c
    return acc


def poly_divmod(a, b):
    a, b = list(a), list(b)
    assert any(b), "division by zero polynomial"
    q = [Fraction(0)] * max(1, len(a) - len(b) + 1)
    while len(a) >= len(b) and any(a):
        if a[-1] == 0:
            a.pop()
            continue
        k = len(a) - len(b)
        c = a[-1] / b[-1]
        q[k] = c
        for i, bc in enumerate(b):
            a[i + k] -= c * bc
        a.pop()
    return _poly_trim(q), _poly_trim(a if a else [Fraction(0)])


class RationalInQs:
    """num(T)/den(T) with T = q^{-s}; evaluation at s=0 means T = 1."""

    def __init__(self, num, den=(Fraction(1),)):
        self.num = _poly_trim([Fraction(c) for c in num])
        self.den = _poly_trim([Fraction(c) for c in den])
        assert any(self.den), "zero denominator"

    @classmethod
    def const(cls, c):
        return cls([Fraction(c)])

    @classmethod
    def monomial(cls, c, k):
        return cls([Fraction(0)] * k + [Fraction(c)])

    def __mul__(self, o):
        return RationalInQs(poly_mul(self.num, o.num), poly_mul(self.den, o.den))

    def __add__(self, o):
        return RationalInQs(
            poly_add(poly_mul(self.num, o.den), poly_mul(o.num, self.den)),
            poly_mul(self.den, o.den),
        )

    def reciprocal(self):
        assert any(self.num)
        return RationalInQs(self.den, self.num)

    def _reduced_at_1(self):
        num, den = self.num, self.den
        tm1 = (Fraction(-1), Fraction(1))  # T - 1
        while poly_eval(num, 1) == 0 and poly_eval(den, 1) == 0:
            num, _r = poly_divmod(num, tm1)
            den, _r2 = poly_divmod(den, tm1)
        return num, den

    def value_at_s0(self):
        """Exact value at s = 0 (T = 1) after cancelling shared (T-1) factors."""
        num, den = self._reduced_at_1()
        dv = poly_eval(den, 1)
        if dv == 0:
            raise ZeroDivisionError("pole at s = 0")
        return poly_eval(num, 1) / dv

    def finite_nonzero_at_s0(self):
        try:
            return self.value_at_s0() != 0
        except ZeroDivisionError:
            return False

    def __repr__(self):
        return "RationalInQs(num=%s, den=%s)" % (list(self.num), list(self.den))


def tate_l_factor(desc):
    """L(s, T, eta) = prod_i L(s, eta_i) as a rational function in T = q^{-s}.

    Per factor: F_i containing E gives (1 - T^2)^{-1} (eta_i trivial,
    q_i = q^2); F_i in S_1 with eta_i unramified gives (1 + T^{f_i})^{-1}
    with f_i the residue degree; a ramified eta_i would give 1, which never
    occurs over this unramified E/F (S_1^{ram} is empty).
    """
    den = (Fraction(1),)
    for block in l_factor_denominator(desc):
        den = poly_mul(den, block)
    return RationalInQs((Fraction(1),), den)


def l_factor_denominator(desc):
    """Per-factor polynomials 1 - eta_i(pi_i) T^{f_i} (low-to-high coeffs).

    These are exactly the geometric tails of centralizer orbits on lattices:
    1 + T for an F or ramified factor, 1 - T^2 for an E factor.
    """
    blocks = []
    for f in desc.factors:
        if f.contains_E:
            blocks.append((Fraction(1), Fraction(0), Fraction(-1)))  # 1 - T^2
        else:
            blocks.append((Fraction(1), Fraction(1)))  # 1 + T
    return blocks
