"""Exact multivariate Laurent polynomials over the integers.

This is the value domain everything else builds on: evolution cells,
coprimeness audits and identity residuals are all elements of
Z[v_1^{+-1}, ..., v_w^{+-1}] for variables drawn from a :class:`VarRegistry`.
Coefficients are arbitrary-precision ints; arithmetic is exact or it raises.

Terms live in packed-key dicts (see ``_kernels``); this module owns
canonicalisation, ordering, units, substitution and serialization.  The
canonical term order used for display and serialization is graded
lexicographic: higher total degree first, ties broken by the exponent tuple in
registry order, descending.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Union

from .backend import kernels as _k

_BIAS = _k.BIAS
_FIELD_BITS = _k.FIELD_BITS
_FIELD_MASK = _k.FIELD_MASK
_EXP_LIMIT = _k.EXP_LIMIT


class DivisionError(ArithmeticError):
    """Exact division failed: the divisor does not divide the dividend."""


class ZeroSubstitutionError(ValueError):
    """Zero was substituted for a variable occurring with negative exponent."""


class SubstitutionError(ValueError):
    """Substitution left the ring (non-integer coefficients or a non-unit
    value raised to a negative power)."""


class VarRegistry:
    """Append-only table of variables: id -> (name, role).

    Roles tag what a variable seeds ("tau0" and "tau1" initial rows,
    "constant" boundary constants, "generic" otherwise); they carry no
    arithmetic meaning.
    """

    __slots__ = ("_names", "_roles", "_index")

    def __init__(self) -> None:
        self._names: list[str] = []
        self._roles: list[str] = []
        self._index: dict[str, int] = {}

    def add_var(self, name: str, role: str = "generic") -> int:
        if not name or not (name[0].isalpha() and name.replace("_", "").isalnum()):
            raise ValueError("variable name %r is not serializable" % (name,))
        if name in self._index:
            raise ValueError("variable %r already registered" % (name,))
        vid = len(self._names)
        self._names.append(name)
        self._roles.append(role)
        self._index[name] = vid
        return vid

    def var_id(self, name: str) -> int:
        return self._index[name]

    def name(self, vid: int) -> str:
        return self._names[vid]

    def role(self, vid: int) -> str:
        return self._roles[vid]

    def names(self) -> list[str]:
        return list(self._names)

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, name: str) -> bool:
        return name in self._index


Scalar = Union[int, Fraction]


class LaurentPoly:
    """Immutable-by-convention sparse Laurent polynomial."""

    __slots__ = ("reg", "_terms", "_width", "_expbound")

    def __init__(self, reg: VarRegistry, terms: dict, width: int,
                 expbound: Optional[int] = None) -> None:
        # Internal constructor: `terms` must already be canonical (no zero
        # coefficients) at the given width.
        self.reg = reg
        self._terms = terms
        self._width = width
        self._expbound = expbound if expbound is not None else _exp_bound(terms, width)

    # ---------------------------------------------------------------- builders

    @classmethod
    def zero(cls, reg: VarRegistry) -> "LaurentPoly":
        return cls(reg, {}, len(reg), 0)

    @classmethod
    def integer(cls, reg: VarRegistry, c: int) -> "LaurentPoly":
        w = len(reg)
        if c == 0:
            return cls(reg, {}, w, 0)
        return cls(reg, {_k.bias_mask(w): int(c)}, w, 0)

    @classmethod
    def one(cls, reg: VarRegistry) -> "LaurentPoly":
        return cls.integer(reg, 1)

    @classmethod
    def var(cls, reg: VarRegistry, vid: int, exp: int = 1) -> "LaurentPoly":
        return cls.monomial(reg, 1, {vid: exp})

    @classmethod
    def monomial(cls, reg: VarRegistry, coeff: int, exps: Mapping[int, int]) -> "LaurentPoly":
        w = len(reg)
        if coeff == 0:
            return cls(reg, {}, w, 0)
        vec = [0] * w
        for vid, e in exps.items():
            if not 0 <= vid < w:
                raise KeyError("unknown variable id %d" % vid)
            vec[vid] = int(e)
        return cls(reg, {_k.pack(vec): int(coeff)}, w,
                   max((abs(e) for e in vec), default=0))

    @classmethod
    def from_terms(cls, reg: VarRegistry,
                   terms: Iterable[tuple[int, Mapping[int, int]]]) -> "LaurentPoly":
        w = len(reg)
        acc: dict = {}
        for coeff, exps in terms:
            if coeff == 0:
                continue
            vec = [0] * w
            for vid, e in exps.items():
                vec[vid] = int(e)
            key = _k.pack(vec)
            v = acc.get(key, 0) + int(coeff)
            if v:
                acc[key] = v
            elif key in acc:
                del acc[key]
        return cls(reg, acc, w)

    # ------------------------------------------------------------- bookkeeping

    def _sync(self) -> "LaurentPoly":
        """Re-widen to the registry's current size (registries are append-only)."""
        w = len(self.reg)
        if self._width == w:
            return self
        return LaurentPoly(self.reg, _k.widen_terms(self._terms, self._width, w),
                           w, self._expbound)

    def _aligned(self, other: "LaurentPoly") -> tuple[dict, dict, int, int]:
        if self.reg is not other.reg:
            raise ValueError("operands come from different registries")
        a, b = self._sync(), other._sync()
        return a._terms, b._terms, a._width, _k.bias_mask(a._width)

    def _guard_mul(self, other: "LaurentPoly") -> None:
        if self._expbound + other._expbound > _EXP_LIMIT:
            # The cheap propagated bound can overshoot; recompute before failing.
            sb = _exp_bound(self._sync()._terms, len(self.reg))
            ob = _exp_bound(other._sync()._terms, len(self.reg))
            self._expbound, other._expbound = sb, ob
            if sb + ob > _EXP_LIMIT:
                raise OverflowError("product exponents would exceed packed-field range")

    # ------------------------------------------------------------------- state

    def is_zero(self) -> bool:
        return not self._terms

    def is_one(self) -> bool:
        t = self._sync()._terms
        return len(t) == 1 and t.get(_k.bias_mask(self._sync()._width)) == 1

    def num_terms(self) -> int:
        return len(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    # -------------------------------------------------------------- arithmetic

    def __add__(self, other: object) -> "LaurentPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        ta, tb, w, _ = self._aligned(other)
        return LaurentPoly(self.reg, _k.add(ta, tb), w,
                           max(self._expbound, other._expbound))

    __radd__ = __add__

    def __sub__(self, other: object) -> "LaurentPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        ta, tb, w, _ = self._aligned(other)
        return LaurentPoly(self.reg, _k.sub(ta, tb), w,
                           max(self._expbound, other._expbound))

    def __rsub__(self, other: object) -> "LaurentPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other.__sub__(self)

    def __neg__(self) -> "LaurentPoly":
        s = self._sync()
        return LaurentPoly(self.reg, _k.neg(s._terms), s._width, s._expbound)

    def __mul__(self, other: object) -> "LaurentPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        self._guard_mul(other)
        ta, tb, w, bias = self._aligned(other)
        return LaurentPoly(self.reg, _k.mul(ta, tb, bias), w,
                           self._expbound + other._expbound)

    __rmul__ = __mul__

    def square(self) -> "LaurentPoly":
        self._guard_mul(self)
        s = self._sync()
        bias = _k.bias_mask(s._width)
        return LaurentPoly(self.reg, _k.square(s._terms, bias), s._width,
                           2 * s._expbound)

    def __pow__(self, n: int) -> "LaurentPoly":
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            unit = self.classify_unit()
            if unit is None:
                raise DivisionError("negative power of a non-unit")
            sign, exps = unit
            return LaurentPoly.monomial(self.reg, 1 if n % 2 == 0 else sign,
                                        {v: e * n for v, e in exps.items()})
        result = LaurentPoly.one(self.reg)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base.square()
        return result

    def exact_div(self, other: "LaurentPoly") -> "LaurentPoly":
        """Exact quotient in the Laurent ring; raises DivisionError otherwise."""
        other = self._coerce(other)
        if other is NotImplemented or not isinstance(other, LaurentPoly):
            raise TypeError("exact_div expects a polynomial")
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        ta, tb, w, bias = self._aligned(other)
        q = _k.exact_div(ta, tb, bias)
        if q is None:
            raise DivisionError("polynomial does not divide exactly")
        return LaurentPoly(self.reg, q, w, self._expbound + other._expbound)

    def divides(self, other: "LaurentPoly") -> bool:
        if self.is_zero():
            return other.is_zero()
        ta, tb, w, bias = self._aligned(other)
        return _k.exact_div(tb, ta, bias) is not None

    def _coerce(self, other: object):
        if isinstance(other, LaurentPoly):
            return other
        if isinstance(other, int):
            return LaurentPoly.integer(self.reg, other)
        return NotImplemented

    # -------------------------------------------------------------- comparison

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = LaurentPoly.integer(self.reg, other)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        if self.reg is not other.reg:
            return False
        return self._sync()._terms == other._sync()._terms

    __hash__ = None  # type: ignore[assignment]

    # ------------------------------------------------------------------- terms

    def items(self) -> Iterator[tuple[int, dict[int, int]]]:
        """Terms as (coeff, {vid: exp}) in canonical (grlex descending) order."""
        s = self._sync()
        for key, exps in _ordered_keys(s._terms, s._width):
            yield s._terms[key], {i: e for i, e in enumerate(exps) if e}

    def leading_coefficient(self) -> int:
        """Coefficient of the canonical (grlex) leading term; 0 for the zero poly."""
        s = self._sync()
        if not s._terms:
            return 0
        key, _ = next(iter(_ordered_keys(s._terms, s._width)))
        return s._terms[key]

    def normalize(self) -> "LaurentPoly":
        """Canonical form.  Construction already canonicalises; this re-widens
        to the current registry and is otherwise the identity."""
        return self._sync()

    def classify_unit(self) -> Optional[tuple[int, dict[int, int]]]:
        """(sign, exponents) when the value is +-(monomial); None otherwise."""
        s = self._sync()
        if len(s._terms) != 1:
            return None
        ((key, coeff),) = s._terms.items()
        if coeff not in (1, -1):
            return None
        exps = _k.unpack(key, s._width)
        return coeff, {i: e for i, e in enumerate(exps) if e}

    def is_unit(self) -> bool:
        return self.classify_unit() is not None

    def monomial_content(self) -> dict[int, int]:
        """Per-variable minimum exponents over the support (the unit part that
        divides every term).  Zero polynomial has empty content."""
        s = self._sync()
        if not s._terms:
            return {}
        mins = None
        for key in s._terms:
            exps = _k.unpack(key, s._width)
            if mins is None:
                mins = list(exps)
            else:
                mins = [m if m < e else e for m, e in zip(mins, exps)]
        assert mins is not None
        return {i: m for i, m in enumerate(mins) if m}

    def shift(self, exps: Mapping[int, int], coeff: int = 1) -> "LaurentPoly":
        """Multiply by coeff * monomial(exps)."""
        mono = LaurentPoly.monomial(self.reg, coeff, exps)
        return self * mono

    def degree_range(self, vid: int) -> tuple[int, int]:
        """(min, max) exponent of the variable across the support."""
        s = self._sync()
        if not s._terms:
            raise ValueError("degree_range of the zero polynomial is undefined")
        if not 0 <= vid < s._width:
            raise KeyError("unknown variable id %d" % vid)
        shift = _FIELD_BITS * vid
        lo = hi = None
        for key in s._terms:
            e = ((key >> shift) & _FIELD_MASK) - _BIAS
            if lo is None or e < lo:
                lo = e
            if hi is None or e > hi:
                hi = e
        return lo, hi  # type: ignore[return-value]

    def variables(self) -> set[int]:
        """Ids of variables appearing with nonzero exponent."""
        s = self._sync()
        out: set[int] = set()
        for key in s._terms:
            for i, e in enumerate(_k.unpack(key, s._width)):
                if e:
                    out.add(i)
        return out

    def integer_content(self) -> int:
        """gcd of the coefficients (non-negative; 0 for the zero polynomial)."""
        import math
        g = 0
        for c in self._terms.values():
            g = math.gcd(g, c)
            if g == 1:
                return 1
        return g

    # ------------------------------------------------------------ substitution

    def substitute(self, assignment: Mapping[int, Union[Scalar, "LaurentPoly"]]
                   ) -> Union["LaurentPoly", Fraction]:
        """Substitute exact values or polynomials for variables.

        A full assignment (covering every variable that occurs) returns an
        exact Fraction.  A partial assignment returns a LaurentPoly and raises
        SubstitutionError if non-integer coefficients would remain.  Zero for
        a negatively-occurring variable raises ZeroSubstitutionError; a
        polynomial value for a negatively-occurring variable must be a unit.
        """
        s = self._sync()
        w = s._width
        occurring = s.variables()
        full = occurring <= set(assignment)
        # Accumulate terms as {key: Fraction} plus polynomial factors.
        acc: dict[int, Fraction] = {}
        for key, coeff in s._terms.items():
            exps = _k.unpack(key, w)
            scalar = Fraction(coeff)
            poly_factor: Optional[LaurentPoly] = None
            rest = [0] * w
            for vid, e in enumerate(exps):
                if e == 0:
                    continue
                if vid not in assignment:
                    rest[vid] = e
                    continue
                val = assignment[vid]
                if isinstance(val, LaurentPoly):
                    if val.is_zero():
                        if e < 0:
                            raise ZeroSubstitutionError(
                                "zero substituted for %s with negative exponent"
                                % self.reg.name(vid))
                        scalar = Fraction(0)
                        break
                    if e < 0 and not val.is_unit():
                        raise SubstitutionError(
                            "non-unit value for %s occurring with negative exponent"
                            % self.reg.name(vid))
                    p = val ** e
                    poly_factor = p if poly_factor is None else poly_factor * p
                else:
                    v = Fraction(val)
                    if v == 0:
                        if e < 0:
                            raise ZeroSubstitutionError(
                                "zero substituted for %s with negative exponent"
                                % self.reg.name(vid))
                        scalar = Fraction(0)
                        break
                    scalar *= v ** e
            if scalar == 0:
                continue
            base = LaurentPoly(self.reg, {_k.pack(rest): 1}, w)
            if poly_factor is not None:
                base = base * poly_factor
            for bkey, bcoeff in base._sync()._terms.items():
                v = acc.get(bkey, Fraction(0)) + scalar * bcoeff
                if v:
                    acc[bkey] = v
                elif bkey in acc:
                    del acc[bkey]
        if full:
            if not acc:
                return Fraction(0)
            bias_key = _k.bias_mask(len(self.reg))
            if set(acc) != {bias_key}:
                # Polynomial values reintroduced variables; fall through to poly.
                pass
            else:
                return acc[bias_key]
        out: dict[int, int] = {}
        for key, val in acc.items():
            if val.denominator != 1:
                raise SubstitutionError(
                    "partial substitution left non-integer coefficient %s" % (val,))
            out[key] = val.numerator
        return LaurentPoly(self.reg, out, len(self.reg))

    def eval_int(self, values: Mapping[int, int]) -> int:
        """Evaluate at integer values after stripping the monomial-content unit.

        Coprimeness and divisibility evidence are unit-insensitive, so the
        caller gets the value of the unit-normalized representative.  All
        variables must be assigned nonzero values.
        """
        s = self._sync()
        if not s._terms:
            return 0
        content = self.monomial_content()
        stripped = self.shift({v: -e for v, e in content.items()})._sync()
        point = []
        for vid in range(stripped._width):
            v = int(values.get(vid, 1))
            if v == 0:
                raise ZeroSubstitutionError("eval_int requires nonzero values")
            point.append(v)
        return _k.eval_int(stripped._terms, stripped._width, point)

    # ----------------------------------------------------------- serialization

    def to_text(self) -> str:
        """Human-readable signed term list, canonical order: '+2 x1^-1 y1^2'."""
        s = self._sync()
        if not s._terms:
            return "0"
        chunks = []
        for key, exps in _ordered_keys(s._terms, s._width):
            coeff = s._terms[key]
            sign = "+" if coeff > 0 else "-"
            bits = [sign + str(abs(coeff))]
            for vid, e in enumerate(exps):
                if e == 0:
                    continue
                name = self.reg.name(vid)
                bits.append(name if e == 1 else "%s^%d" % (name, e))
            chunks.append(" ".join(bits))
        return " ".join(chunks)

    def to_factored_text(self) -> str:
        """Display form with the monomial-content unit factored out."""
        s = self._sync()
        if not s._terms:
            return "0"
        content = self.monomial_content()
        if not content:
            return self.to_text()
        core = self.shift({v: -e for v, e in content.items()})
        mono_bits = []
        for vid in sorted(content):
            e = content[vid]
            name = self.reg.name(vid)
            mono_bits.append(name if e == 1 else "%s^%d" % (name, e))
        return "(%s) %s" % (core.to_text(), " ".join(mono_bits))

    def to_machine(self) -> list:
        """JSON-ready canonical term array: [[coeff, {name: exp}], ...]."""
        out = []
        for coeff, exps in self.items():
            out.append([coeff, {self.reg.name(v): e for v, e in sorted(exps.items())}])
        return out

    @classmethod
    def from_machine(cls, reg: VarRegistry, data: list) -> "LaurentPoly":
        terms = []
        for coeff, exps in data:
            terms.append((int(coeff), {reg.var_id(n): int(e) for n, e in exps.items()}))
        return cls.from_terms(reg, terms)

    @classmethod
    def from_text(cls, reg: VarRegistry, text: str) -> "LaurentPoly":
        text = text.strip()
        if text == "0":
            return cls.zero(reg)
        terms: list[tuple[int, dict[int, int]]] = []
        coeff: Optional[int] = None
        exps: dict[int, int] = {}
        for tok in text.split():
            if tok[0] in "+-" and tok[1:].isdigit():
                if coeff is not None:
                    terms.append((coeff, exps))
                coeff = int(tok)
                exps = {}
            else:
                if coeff is None:
                    raise ValueError("term does not start with a signed coefficient")
                if "^" in tok:
                    name, _, e = tok.partition("^")
                    exps[reg.var_id(name)] = int(e)
                else:
                    exps[reg.var_id(tok)] = exps.get(reg.var_id(tok), 0) + 1
        if coeff is not None:
            terms.append((coeff, exps))
        return cls.from_terms(reg, terms)

    def __repr__(self) -> str:
        text = self.to_text()
        if len(text) > 120:
            text = text[:117] + "..."
        return "<LaurentPoly %s>" % text

    # --------------------------------------------------------------- pickling

    def __getstate__(self):
        return (self.reg, self._terms, self._width, self._expbound)

    def __setstate__(self, state):
        self.reg, self._terms, self._width, self._expbound = state


def _exp_bound(terms: dict, width: int) -> int:
    bound = 0
    for key in terms:
        for e in _k.unpack(key, width):
            a = -e if e < 0 else e
            if a > bound:
                bound = a
    return bound


def _ordered_keys(terms: dict, width: int):
    """Keys with decoded exponents in graded-lex descending order."""
    decorated = []
    for key in terms:
        exps = _k.unpack(key, width)
        decorated.append((sum(exps), exps, key))
    decorated.sort(reverse=True)
    for _, exps, key in decorated:
        yield key, exps
