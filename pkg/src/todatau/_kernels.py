"""Pure-Python term-dict kernels for sparse integer Laurent polynomials.

A polynomial of width ``w`` (number of registry variables) is a dict mapping a
packed monomial key to a nonzero Python int coefficient.  The key packs the
exponent vector into one int, 16 bits per variable, biased so negative Laurent
exponents stay inside their field:

    key = sum_i (e_i + BIAS) << (16*i),       -BIAS < e_i < BIAS

Packing turns monomial multiplication into a single integer addition
(``ka + kb - bias_mask(w)``), and the natural integer order on keys is a valid
monomial order (translation-invariant and bounded below), which the exact
division loop relies on.  Callers guard exponent magnitudes; fields never
borrow as long as |e| stays below BIAS/2 on each operand of a product.

The compiled twin of this module is ``_speedups.pyx``; both expose the same
functions and must stay behaviourally identical.
"""
from heapq import heapify, heappop, heappush

KERNEL_NAME = "python"

FIELD_BITS = 16
BIAS = 1 << 15
FIELD_MASK = (1 << FIELD_BITS) - 1
# Safe magnitude for exponents of any single operand of a kernel op.
EXP_LIMIT = (1 << 14) - 1

_BIAS_MASKS = [0]


def bias_mask(width):
    """sum(BIAS << (16*i) for i in range(width)), cached."""
    while len(_BIAS_MASKS) <= width:
        w = len(_BIAS_MASKS)
        _BIAS_MASKS.append(_BIAS_MASKS[w - 1] | (BIAS << (FIELD_BITS * (w - 1))))
    return _BIAS_MASKS[width]


def pack(exps):
    """Pack an exponent tuple into a key.  Exponents must be within EXP_LIMIT."""
    key = 0
    shift = 0
    for e in exps:
        if e > EXP_LIMIT or e < -EXP_LIMIT:
            raise OverflowError("exponent %d exceeds packed-field range" % e)
        key |= (e + BIAS) << shift
        shift += FIELD_BITS
    return key


def unpack(key, width):
    """Inverse of pack for a key of the given width."""
    out = []
    for _ in range(width):
        out.append((key & FIELD_MASK) - BIAS)
        key >>= FIELD_BITS
    return tuple(out)


def widen_key(key, from_width, to_width):
    return key + (bias_mask(to_width) - bias_mask(from_width))


def widen_terms(terms, from_width, to_width):
    if from_width == to_width:
        return terms
    delta = bias_mask(to_width) - bias_mask(from_width)
    return {k + delta: c for k, c in terms.items()}


def add(A, B):
    """A + B."""
    out = dict(A)
    get = out.get
    for k, c in B.items():
        v = get(k, 0) + c
        if v:
            out[k] = v
        elif k in out:
            del out[k]
    return out


def sub(A, B):
    """A - B."""
    out = dict(A)
    get = out.get
    for k, c in B.items():
        v = get(k, 0) - c
        if v:
            out[k] = v
        elif k in out:
            del out[k]
    return out


def neg(A):
    return {k: -c for k, c in A.items()}


def scale(A, c):
    """c * A for an integer c."""
    if c == 0:
        return {}
    if c == 1:
        return dict(A)
    return {k: c * v for k, v in A.items()}


def mono_mul(A, key, coeff, bias):
    """(coeff * monomial(key)) * A."""
    if coeff == 0:
        return {}
    shift = key - bias
    if coeff == 1:
        return {k + shift: v for k, v in A.items()}
    return {k + shift: coeff * v for k, v in A.items()}


def mul(A, B, bias):
    """A * B."""
    if not A or not B:
        return {}
    if len(A) > len(B):
        A, B = B, A
    if len(A) == 1:
        ((k, c),) = A.items()
        return mono_mul(B, k, c, bias)
    out = {}
    get = out.get
    Bitems = list(B.items())
    for ka, ca in A.items():
        base = ka - bias
        for kb, cb in Bitems:
            k = base + kb
            v = get(k, 0) + ca * cb
            if v:
                out[k] = v
            elif k in out:
                del out[k]
    return out


def square(A, bias):
    """A * A, exploiting symmetry (about half the big-int multiplies of mul)."""
    n = len(A)
    if n == 0:
        return {}
    items = list(A.items())
    out = {}
    get = out.get
    for i in range(n):
        ki, ci = items[i]
        k = ki + ki - bias
        v = get(k, 0) + ci * ci
        if v:
            out[k] = v
        elif k in out:
            del out[k]
        base = ki - bias
        for j in range(i + 1, n):
            kj, cj = items[j]
            k = base + kj
            p = ci * cj
            v = get(k, 0) + p + p
            if v:
                out[k] = v
            elif k in out:
                del out[k]
    return out


def iadd_mul(acc, A, B, bias):
    """acc += A * B, in place; returns acc."""
    if not A or not B:
        return acc
    if len(A) > len(B):
        A, B = B, A
    get = acc.get
    Bitems = list(B.items())
    for ka, ca in A.items():
        base = ka - bias
        for kb, cb in Bitems:
            k = base + kb
            v = get(k, 0) + ca * cb
            if v:
                acc[k] = v
            elif k in acc:
                del acc[k]
    return acc


def _min_shift(A, bias):
    """Packed offset moving every per-variable minimum exponent to zero."""
    mins = None
    if bias:
        fields = 0
        b = bias
        while b:
            fields += 1
            b >>= FIELD_BITS
    else:
        fields = 0
    for key in A:
        if mins is None:
            mins = [(key >> (FIELD_BITS * i)) & FIELD_MASK for i in range(fields)]
            continue
        for i in range(fields):
            f = (key >> (FIELD_BITS * i)) & FIELD_MASK
            if f < mins[i]:
                mins[i] = f
    if mins is None:
        return 0
    # Signed sum, not OR: negative minima contribute negative field offsets.
    shift = 0
    for i in range(fields):
        shift += (mins[i] - BIAS) << (FIELD_BITS * i)
    return shift


def _fields_at_least_bias(key):
    # Valid because every field of (k - bk + bias) stays in range: exponent
    # differences are bounded by 2*EXP_LIMIT, so no cross-field borrows occur.
    while key:
        if key & FIELD_MASK < BIAS:
            return False
        key >>= FIELD_BITS
    return True


def exact_div(A, B, bias):
    """Exact quotient A // B in the Laurent ring, or None if B does not divide A.

    Both operands are shifted so each variable's minimum exponent is zero
    (divisibility in the Laurent ring reduces to the shifted ordinary
    polynomials; lowest terms multiply over a domain), then leading-term
    elimination runs in the packed-key order with a lazy max-heap.  A leading
    monomial outside lt(B)'s cone or a non-divisible leading coefficient
    proves indivisibility; processed keys strictly decrease, so the loop
    terminates.
    """
    if not B:
        raise ZeroDivisionError("kernel division by zero polynomial")
    if not A:
        return {}
    sa = _min_shift(A, bias)
    sb = _min_shift(B, bias)
    if sa:
        A = {k - sa: c for k, c in A.items()}
    if sb:
        B = {k - sb: c for k, c in B.items()}
    bk = max(B)
    bc = B[bk]
    rest = [(k, c) for k, c in B.items() if k != bk]
    rem = dict(A)
    heap = [-k for k in rem]
    heapify(heap)
    out = {}
    get = rem.get
    while heap:
        k = -heappop(heap)
        c = get(k)
        if not c:
            continue
        qk = k - bk + bias
        if not _fields_at_least_bias(qk):
            return None
        if c % bc:
            return None
        qc = c // bc
        out[qk] = qc
        del rem[k]
        shift = qk - bias
        for kb, cb in rest:
            kk = kb + shift
            prev = get(kk)
            if prev is None:
                rem[kk] = -qc * cb
                heappush(heap, -kk)
            else:
                v = prev - qc * cb
                if v:
                    rem[kk] = v
                else:
                    del rem[kk]
    back = sa - sb
    if back:
        out = {k + back: c for k, c in out.items()}
    return out


def eval_int(A, width, values):
    """Evaluate at integer values (one per variable).  Exponents must be >= 0.

    Power tables are built per variable, so repeated exponents cost one big-int
    multiply each.
    """
    if not A:
        return 0
    tables = [{0: 1} for _ in range(width)]
    total = 0
    for key, coeff in A.items():
        term = coeff
        k = key
        for i in range(width):
            e = (k & FIELD_MASK) - BIAS
            k >>= FIELD_BITS
            if e == 0:
                continue
            if e < 0:
                raise ValueError("eval_int requires non-negative exponents")
            tab = tables[i]
            p = tab.get(e)
            if p is None:
                p = values[i] ** e
                tab[e] = p
            term *= p
        total += term
    return total
