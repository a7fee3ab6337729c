"""Exact multivariate GCD, coprimeness predicates and reduced fractions.

GCD runs over ordinary polynomials after the Laurent unit (monomial content)
is stripped: recursive content / primitive-part reduction over a chosen main
variable, with Brown's subresultant polynomial remainder sequence doing the
univariate work.  Everything is exact big-integer arithmetic; the only
randomness is the optional evaluation fast path in coprime(), which can
certify "coprime" early but never decides "not coprime".
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .laurent import LaurentPoly, VarRegistry

# ---------------------------------------------------------------------------
# dense coefficient lists in one main variable
#
# A polynomial p with nonnegative exponents is viewed as
#   p = sum_d  coeff[d] * v^d
# stored as a list [c_deg, ..., c_1, c_0] of LaurentPoly coefficients free of
# v, descending degree, no leading zero entry.
# ---------------------------------------------------------------------------


def _coeff_list(p: LaurentPoly, vid: int) -> list[LaurentPoly]:
    buckets: dict[int, list] = {}
    for coeff, exps in p.items():
        e = exps.pop(vid, 0)
        buckets.setdefault(e, []).append((coeff, exps))
    top = max(buckets)
    out = []
    for d in range(top, -1, -1):
        out.append(LaurentPoly.from_terms(p.reg, buckets.get(d, [])))
    return out


def _reassemble(coeffs: Sequence[LaurentPoly], vid: int, reg: VarRegistry) -> LaurentPoly:
    acc = LaurentPoly.zero(reg)
    top = len(coeffs) - 1
    for i, c in enumerate(coeffs):
        if not c.is_zero():
            acc = acc + c.shift({vid: top - i})
    return acc


def _lstrip(f: list[LaurentPoly]) -> list[LaurentPoly]:
    i = 0
    while i < len(f) and f[i].is_zero():
        i += 1
    return f[i:]


def _lsub(f: list[LaurentPoly], g: list[LaurentPoly]) -> list[LaurentPoly]:
    # Right-aligned subtraction (constant terms at the end).
    n, m = len(f), len(g)
    w = max(n, m)
    out: list[LaurentPoly] = []
    for i in range(w):
        a = f[i - (w - n)] if i >= w - n else None
        b = g[i - (w - m)] if i >= w - m else None
        if a is None:
            out.append(-b)  # type: ignore[operator]
        elif b is None:
            out.append(a)
        else:
            out.append(a - b)
    return _lstrip(out)


def _ground_mul(f: Sequence[LaurentPoly], c: LaurentPoly) -> list[LaurentPoly]:
    return [x * c for x in f]


def _ground_quo(f: Sequence[LaurentPoly], c: LaurentPoly) -> list[LaurentPoly]:
    return [x.exact_div(c) if not x.is_zero() else x for x in f]


def _prem(f: list[LaurentPoly], g: list[LaurentPoly]) -> list[LaurentPoly]:
    """Pseudo-remainder: lc(g)^(deg f - deg g + 1) * f mod g."""
    df, dg = len(f) - 1, len(g) - 1
    if df < dg:
        return list(f)
    r = list(f)
    n = df - dg + 1
    lc_g = g[0]
    dr = df
    while dr >= dg:
        lc_r = r[0]
        j = dr - dg
        n -= 1
        shifted = _ground_mul(g, lc_r) + [LaurentPoly.zero(lc_r.reg)] * j
        r = _lsub(_ground_mul(r, lc_g), shifted)
        if not r:
            break
        dr = len(r) - 1
    if n > 0 and r:
        r = _ground_mul(r, lc_g ** n)
    return r


def _prs_last(f: list[LaurentPoly], g: list[LaurentPoly],
              reg: VarRegistry) -> list[LaurentPoly]:
    """Last nonzero element of the subresultant PRS of f, g (deg f >= deg g >= 0)."""
    n, m = len(f) - 1, len(g) - 1
    d = n - m
    one = LaurentPoly.one(reg)
    b = one if (d + 1) % 2 == 0 else -one
    h = _ground_mul(_prem(f, g), b) if b is not one else _prem(f, g)
    lc = g[0]
    c = -(lc ** d)
    while h:
        k = len(h) - 1
        f, g, m, d = g, h, k, m - k
        b = -lc * (c ** d)
        h = _ground_quo(_prem(f, g), b)
        lc = g[0]
        if d > 1:
            c = ((-lc) ** d).exact_div(c ** (d - 1))
        else:
            c = -lc
    return g


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def unit_normalize(p: LaurentPoly) -> LaurentPoly:
    """Canonical associate: monomial content divided out, leading coefficient
    positive.  Integer content is kept (it is not a unit in the Laurent ring
    over the integers)."""
    if p.is_zero():
        return p
    content = p.monomial_content()
    if content:
        p = p.shift({v: -e for v, e in content.items()})
    if p.leading_coefficient() < 0:
        p = -p
    return p


def strip_unit(p: LaurentPoly) -> LaurentPoly:
    """Divide out the monomial content, leaving an ordinary polynomial with
    per-variable minimum exponent zero."""
    content = p.monomial_content()
    if content:
        return p.shift({v: -e for v, e in content.items()})
    return p


def gcd(p: LaurentPoly, q: LaurentPoly) -> LaurentPoly:
    """Greatest common divisor in the Laurent ring, unit-normalized."""
    if p.is_zero() and q.is_zero():
        raise ValueError("gcd(0, 0) is undefined")
    if p.is_zero():
        return unit_normalize(q)
    if q.is_zero():
        return unit_normalize(p)
    a = strip_unit(p)
    b = strip_unit(q)
    ia = a.integer_content()
    ib = b.integer_content()
    gi = math.gcd(ia, ib)
    vars_a = a.variables()
    vars_b = b.variables()
    if not vars_a or not vars_b:
        return LaurentPoly.integer(p.reg, gi)
    shared = vars_a & vars_b
    if not shared:
        # Primitive polynomials over disjoint variable sets share only integers.
        return LaurentPoly.integer(p.reg, gi)
    if ia != 1:
        a = a.exact_div(LaurentPoly.integer(a.reg, ia))
    if ib != 1:
        b = b.exact_div(LaurentPoly.integer(b.reg, ib))

    def weight(v: int) -> tuple[int, int, int]:
        da = a.degree_range(v)[1]
        db = b.degree_range(v)[1]
        return (min(da, db), max(da, db), v)

    v = min(shared, key=weight)
    F = _coeff_list(a, v)
    G = _coeff_list(b, v)
    cont_f, F = _content_pp(F)
    cont_g, G = _content_pp(G)
    cont = gcd(cont_f, cont_g)
    if len(F) - 1 < len(G) - 1:
        F, G = G, F
    last = _prs_last(F, G, p.reg)
    _, last_pp = _content_pp(last)
    h = _reassemble(last_pp, v, p.reg)
    result = h * cont
    if gi != 1:
        result = result * LaurentPoly.integer(p.reg, gi)
    return unit_normalize(result)


def _content_pp(coeffs: list[LaurentPoly]) -> tuple[LaurentPoly, list[LaurentPoly]]:
    cont: Optional[LaurentPoly] = None
    for c in coeffs:
        if c.is_zero():
            continue
        cont = unit_normalize(c) if cont is None else gcd(cont, c)
        if cont.is_one():
            break
    assert cont is not None
    if cont.is_one():
        return cont, list(coeffs)
    return cont, _ground_quo(coeffs, cont)


_FAST_POINT_BOUND = 10 ** 6


def coprime(p: LaurentPoly, q: LaurentPoly, trials: int = 4,
            seed: int = 0) -> bool:
    """True iff gcd(p, q) is a unit.

    Fast path: two independent random integer specializations whose values
    are coprime integers certify the verdict (a common non-unit factor would
    divide both values at both points).  Any "not coprime" answer falls
    through to the exact gcd.
    """
    if p.is_zero() or q.is_zero():
        return p.is_unit() or q.is_unit()
    if p.is_unit() or q.is_unit():
        return True
    rng = random.Random(seed)
    vids = p.variables() | q.variables()
    hits = 0
    for _ in range(max(trials, 2)):
        point = {vid: _nonzero(rng) for vid in vids}
        if math.gcd(p.eval_int(point), q.eval_int(point)) == 1:
            hits += 1
            if hits == 2:
                return True
    return gcd(p, q).is_one()


def _nonzero(rng: random.Random) -> int:
    v = rng.randint(-_FAST_POINT_BOUND, _FAST_POINT_BOUND - 1)
    return v if v != 0 else _FAST_POINT_BOUND


# ---------------------------------------------------------------------------
# reduced fractions
# ---------------------------------------------------------------------------


class RationalFunction:
    """num / den with gcd(num, den) a unit and den unit-free.

    "Unit-free" pins the representative: the denominator's monomial content is
    moved into the numerator and its canonical leading coefficient is positive.
    Construct through :meth:`make` (or the arithmetic operators), which reduce.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: LaurentPoly, den: LaurentPoly) -> None:
        self.num = num
        self.den = den

    @classmethod
    def make(cls, num: LaurentPoly, den: LaurentPoly) -> "RationalFunction":
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.is_zero():
            return cls(num, LaurentPoly.one(num.reg))
        g = gcd(num, den)
        if not g.is_one():
            num = num.exact_div(g)
            den = den.exact_div(g)
        content = den.monomial_content()
        if content:
            inv = LaurentPoly.monomial(den.reg, 1, {v: -e for v, e in content.items()})
            num = num * inv
            den = den * inv
        if den.leading_coefficient() < 0:
            num = -num
            den = -den
        return cls(num, den)

    @classmethod
    def from_poly(cls, p: LaurentPoly) -> "RationalFunction":
        return cls(p, LaurentPoly.one(p.reg))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __add__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction.make(self.num * other.den + other.num * self.den,
                                     self.den * other.den)

    def __sub__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction.make(self.num * other.den - other.num * self.den,
                                     self.den * other.den)

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.num, self.den)

    def __mul__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction.make(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "RationalFunction") -> "RationalFunction":
        if other.num.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction.make(self.num * other.den, self.den * other.num)

    def inverse(self) -> "RationalFunction":
        if self.num.is_zero():
            raise ZeroDivisionError("zero has no inverse")
        return RationalFunction.make(self.den, self.num)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return (self.num * other.den) == (other.num * self.den)

    __hash__ = None  # type: ignore[assignment]

    def substitute(self, assignment):
        nv = self.num.substitute(assignment)
        dv = self.den.substitute(assignment)
        return nv / dv

    def to_text(self) -> str:
        if self.den.is_one():
            return self.num.to_factored_text()
        return "(%s) / (%s)" % (self.num.to_factored_text(),
                                self.den.to_factored_text())

    def __repr__(self) -> str:
        return "<RationalFunction %s>" % self.to_text()


def reduce_fraction(num: LaurentPoly, den: LaurentPoly) -> RationalFunction:
    return RationalFunction.make(num, den)


def rational_coprime(f: RationalFunction, g: RationalFunction,
                     seed: int = 0) -> bool:
    """Four-pair coprimeness of reduced fractions; symmetric by construction.

    Monomials are units and never count as common factors, matching the
    definition the gcd works under.
    """
    pairs = ((f.num, g.num), (f.num, g.den), (f.den, g.num), (f.den, g.den))
    for i, (a, b) in enumerate(pairs):
        if not coprime(a, b, seed=seed + i):
            return False
    return True


# ---------------------------------------------------------------------------
# irreducibility evidence
# ---------------------------------------------------------------------------


@dataclass
class IrreducibilityEvidence:
    """Outcome of the decomposition screen plus integer-specialization test.

    kind is one of "proven-unit", "proven-reducible", "evidence-irreducible",
    "inconclusive".  Only "proven-reducible" carries an exact witness factor;
    "evidence-irreducible" is never a proof.
    """

    kind: str
    witness: Optional[LaurentPoly] = None
    trials: int = 0
    details: list = field(default_factory=list)

    PROVEN_UNIT = "proven-unit"
    PROVEN_REDUCIBLE = "proven-reducible"
    EVIDENCE_IRREDUCIBLE = "evidence-irreducible"
    INCONCLUSIVE = "inconclusive"


def irreducibility_evidence(p: LaurentPoly,
                            catalog: Sequence[LaurentPoly],
                            trials: int = 4,
                            seed: int = 0) -> IrreducibilityEvidence:
    """Screen p against known-irreducible factors, then hunt for exponent
    obstructions by exact integer specialization.

    If any catalog element divides p with a non-unit cofactor, p is reducible
    with that element as witness.  Otherwise p could still factor as
    unit * prod(catalog_i ^ r_i) * remainder; each trial specializes every
    variable to nonzero integers and checks that the specialized catalog value
    fails to divide the specialized p, forcing r_i = 0 at that point.  All
    exponents forced to zero across the catalog yields evidence, not proof.
    """
    if p.is_unit():
        return IrreducibilityEvidence(IrreducibilityEvidence.PROVEN_UNIT)
    details: list = []
    for idx, c in enumerate(catalog):
        if c.is_unit():
            continue
        if c.divides(p):
            q = p.exact_div(c)
            if not q.is_unit():
                details.append("catalog[%d] divides with non-unit cofactor" % idx)
                return IrreducibilityEvidence(
                    IrreducibilityEvidence.PROVEN_REDUCIBLE, witness=c,
                    details=details)
            details.append("associate of catalog[%d]" % idx)
            continue
        g = gcd(p, c)
        if not g.is_one():
            cof = p.exact_div(g)
            if not cof.is_unit():
                details.append("shared factor with catalog[%d]" % idx)
                return IrreducibilityEvidence(
                    IrreducibilityEvidence.PROVEN_REDUCIBLE, witness=g,
                    details=details)
    rng = random.Random(seed)
    vids = sorted(p.variables() | set().union(*(c.variables() for c in catalog))
                  if catalog else p.variables())
    pending = {i for i, c in enumerate(catalog) if not c.is_unit()}
    used = 0
    for trial in range(max(trials, 1)):
        # First point is all-ones; later points are small random integers.
        if trial == 0:
            point = {vid: 1 for vid in vids}
        else:
            point = {vid: rng.randint(2, 9) for vid in vids}
        used = trial + 1
        vp = p.eval_int(point)
        if vp == 0:
            continue
        for i in sorted(pending):
            vc = catalog[i].eval_int(point)
            if abs(vc) <= 1:
                continue  # no information at this point
            if vp % vc != 0:
                details.append(
                    "specialized catalog[%d] value %d does not divide %d; exponent 0"
                    % (i, vc, vp))
                pending.discard(i)
        if not pending:
            break
    if pending:
        details.append("no obstruction found for catalog indices %s"
                       % sorted(pending))
        return IrreducibilityEvidence(IrreducibilityEvidence.INCONCLUSIVE,
                                      trials=used, details=details)
    return IrreducibilityEvidence(IrreducibilityEvidence.EVIDENCE_IRREDUCIBLE,
                                  trials=used, details=details)
