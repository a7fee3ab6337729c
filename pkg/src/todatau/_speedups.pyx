# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of ``_kernels``.  Same functions, same results.

Two layers live here.  The wide layer mirrors ``_kernels.py`` exactly:
Python-int keys with 16-bit biased fields, Python-int coefficients, dict
terms.  The narrow layer kicks in per call when the whole operation provably
fits machine words: at most 8 variables, per-variable exponent spans that fit
8-bit fields after rebasing, and coefficients within signed 64 bits.  Terms
are then packed into C arrays keyed by uint64 and the hot loops run on an
open-addressed table without touching Python objects.  Any bound that would
break (span, coefficient magnitude, int64 overflow mid-accumulation) aborts
the narrow attempt and the call reruns on the wide layer, so results are
identical either way.  The test suite runs the shared kernel contract against
both backends.
"""
from heapq import heapify, heappop, heappush

from libc.stdlib cimport malloc, realloc, free
from libc.string cimport memset

cdef extern from *:
    ctypedef long long i128 "__int128"

cdef extern from "Python.h":
    long long PyLong_AsLongLongAndOverflow(object, int*) except? -1
    unsigned long long PyLong_AsUnsignedLongLongMask(object)
    object PyLong_FromLongLong(long long)
    object PyLong_FromUnsignedLongLong(unsigned long long)

KERNEL_NAME = "cython"

FIELD_BITS = 16
BIAS = 1 << 15
FIELD_MASK = (1 << FIELD_BITS) - 1
EXP_LIMIT = (1 << 14) - 1

_BIAS_MASKS = [0]

cdef unsigned long long EMPTY = <unsigned long long>0xFFFFFFFFFFFFFFFFULL
cdef unsigned long long HASH_C = <unsigned long long>0x9E3779B97F4A7C15ULL
cdef long long I64MAX = <long long>0x7FFFFFFFFFFFFFFFLL
cdef long long I64MIN = <long long>(-0x7FFFFFFFFFFFFFFFLL - 1)

# Narrow dispatch thresholds: below these the wide dict loops win because the
# pack/unpack overhead is linear in the term counts.
cdef enum:
    NARROW_MUL_PAIRS = 16384
    NARROW_DIV_MIN = 192
    NVMAX = 8


def bias_mask(width):
    while len(_BIAS_MASKS) <= width:
        w = len(_BIAS_MASKS)
        _BIAS_MASKS.append(_BIAS_MASKS[w - 1] | (BIAS << (FIELD_BITS * (w - 1))))
    return _BIAS_MASKS[width]


def pack(exps):
    key = 0
    cdef int shift = 0
    for e in exps:
        if e > EXP_LIMIT or e < -EXP_LIMIT:
            raise OverflowError("exponent %d exceeds packed-field range" % e)
        key |= (e + BIAS) << shift
        shift += FIELD_BITS
    return key


def unpack(key, width):
    cdef int i
    out = []
    for i in range(width):
        out.append((key & FIELD_MASK) - BIAS)
        key >>= FIELD_BITS
    return tuple(out)


def widen_key(key, from_width, to_width):
    return key + (bias_mask(to_width) - bias_mask(from_width))


def widen_terms(dict terms, from_width, to_width):
    if from_width == to_width:
        return terms
    delta = bias_mask(to_width) - bias_mask(from_width)
    cdef dict out = {}
    for k, c in terms.items():
        out[k + delta] = c
    return out


def add(dict A, dict B):
    cdef dict out = dict(A)
    for k, c in B.items():
        v = out.get(k, 0) + c
        if v:
            out[k] = v
        elif k in out:
            del out[k]
    return out


def sub(dict A, dict B):
    cdef dict out = dict(A)
    for k, c in B.items():
        v = out.get(k, 0) - c
        if v:
            out[k] = v
        elif k in out:
            del out[k]
    return out


def neg(dict A):
    cdef dict out = {}
    for k, c in A.items():
        out[k] = -c
    return out


def scale(dict A, c):
    cdef dict out
    if c == 0:
        return {}
    if c == 1:
        return dict(A)
    out = {}
    for k, v in A.items():
        out[k] = c * v
    return out


def mono_mul(dict A, key, coeff, bias):
    cdef dict out = {}
    if coeff == 0:
        return out
    shift = key - bias
    if coeff == 1:
        for k, v in A.items():
            out[k + shift] = v
    else:
        for k, v in A.items():
            out[k + shift] = coeff * v
    return out


# --------------------------------------------------------------------------
# Narrow layer.
# --------------------------------------------------------------------------

cdef struct NArr:
    # A polynomial as parallel C arrays.  Key fields are 8-bit, rebased so
    # each variable's minimum exponent maps to field value 0; base[i] holds
    # that minimum, span[i] the max-min range.
    unsigned long long *keys
    long long *vals
    Py_ssize_t n
    int base[NVMAX]
    int span[NVMAX]


cdef void _narr_free(NArr *a) noexcept:
    if a.keys != NULL:
        free(a.keys)
        a.keys = NULL
    if a.vals != NULL:
        free(a.vals)
        a.vals = NULL


cdef int _width_of(bias):
    cdef int w = 0
    b = bias
    while b:
        w += 1
        b >>= FIELD_BITS
    return w


cdef int _load(dict A, int width, NArr *out) except -1:
    """Fill *out from a wide term dict.  Returns 0 on success, 1 when the
    polynomial does not fit the narrow form (coefficient beyond int64 or a
    per-variable exponent span beyond 8 bits)."""
    cdef Py_ssize_t n = len(A), idx, j
    cdef unsigned long long *los = NULL
    cdef unsigned long long *his = NULL
    cdef unsigned long long lo, hi, nk
    cdef long long c
    cdef int i, ovf, e
    cdef int mins[NVMAX]
    cdef int maxs[NVMAX]
    out.keys = NULL
    out.vals = NULL
    out.n = n
    if n == 0:
        return 1
    los = <unsigned long long *>malloc(n * sizeof(unsigned long long))
    his = <unsigned long long *>malloc(n * sizeof(unsigned long long))
    out.vals = <long long *>malloc(n * sizeof(long long))
    if los == NULL or his == NULL or out.vals == NULL:
        free(los)
        free(his)
        _narr_free(out)
        raise MemoryError()
    for i in range(width):
        mins[i] = 0x7FFFFFFF
        maxs[i] = -0x7FFFFFFF
    idx = 0
    try:
        for key, coeff in A.items():
            c = PyLong_AsLongLongAndOverflow(coeff, &ovf)
            if ovf:
                return 1
            out.vals[idx] = c
            lo = PyLong_AsUnsignedLongLongMask(key)
            los[idx] = lo
            if width > 4:
                hi = PyLong_AsUnsignedLongLongMask(key >> 64)
            else:
                hi = 0
            his[idx] = hi
            for i in range(width):
                if i < 4:
                    e = <int>((lo >> (16 * i)) & 0xFFFF) - 0x8000
                else:
                    e = <int>((hi >> (16 * (i - 4))) & 0xFFFF) - 0x8000
                if e < mins[i]:
                    mins[i] = e
                if e > maxs[i]:
                    maxs[i] = e
            idx += 1
        for i in range(width):
            out.base[i] = mins[i]
            out.span[i] = maxs[i] - mins[i]
            if out.span[i] > 254:
                return 1
        for i in range(width, NVMAX):
            out.base[i] = 0
            out.span[i] = 0
        out.keys = <unsigned long long *>malloc(n * sizeof(unsigned long long))
        if out.keys == NULL:
            raise MemoryError()
        for idx in range(n):
            lo = los[idx]
            hi = his[idx]
            nk = 0
            for i in range(width):
                if i < 4:
                    e = <int>((lo >> (16 * i)) & 0xFFFF) - 0x8000
                else:
                    e = <int>((hi >> (16 * (i - 4))) & 0xFFFF) - 0x8000
                nk |= (<unsigned long long>(e - mins[i])) << (8 * i)
            out.keys[idx] = nk
        return 0
    finally:
        free(los)
        free(his)
        if out.keys == NULL:
            _narr_free(out)


cdef struct NTab:
    # Open-addressed uint64 -> int64 map.  EMPTY key marks a free slot; a
    # stored value of zero is a cancelled term and is skipped on emit.  Keys
    # are never removed outside growth, so linear probing stays valid.
    unsigned long long *keys
    long long *vals
    size_t mask
    size_t used
    int shift


cdef int _tab_init(NTab *t, size_t want) except -1:
    cdef size_t cap = 64
    cdef int s = 58
    while cap < want:
        cap <<= 1
        s -= 1
    t.keys = <unsigned long long *>malloc(cap * sizeof(unsigned long long))
    t.vals = <long long *>malloc(cap * sizeof(long long))
    if t.keys == NULL or t.vals == NULL:
        free(t.keys)
        free(t.vals)
        t.keys = NULL
        t.vals = NULL
        raise MemoryError()
    memset(t.keys, 0xFF, cap * sizeof(unsigned long long))
    t.mask = cap - 1
    t.used = 0
    t.shift = s
    return 0


cdef void _tab_free(NTab *t) noexcept:
    if t.keys != NULL:
        free(t.keys)
        t.keys = NULL
    if t.vals != NULL:
        free(t.vals)
        t.vals = NULL


cdef int _tab_grow(NTab *t) except -1:
    # Rebuild at 4x capacity, dropping cancelled (zero) slots.
    cdef unsigned long long *ok = t.keys
    cdef long long *ov = t.vals
    cdef size_t ocap = t.mask + 1
    cdef size_t cap = ocap << 2
    cdef int s = t.shift - 2
    cdef size_t i, j
    cdef unsigned long long k
    cdef long long v
    t.keys = <unsigned long long *>malloc(cap * sizeof(unsigned long long))
    t.vals = <long long *>malloc(cap * sizeof(long long))
    if t.keys == NULL or t.vals == NULL:
        free(t.keys)
        free(t.vals)
        t.keys = ok
        t.vals = ov
        raise MemoryError()
    memset(t.keys, 0xFF, cap * sizeof(unsigned long long))
    t.mask = cap - 1
    t.shift = s
    t.used = 0
    for i in range(ocap):
        k = ok[i]
        v = ov[i]
        if k == EMPTY or v == 0:
            continue
        j = (k * HASH_C) >> s
        while t.keys[j] != EMPTY:
            j = (j + 1) & t.mask
        t.keys[j] = k
        t.vals[j] = v
        t.used += 1
    free(ok)
    free(ov)
    return 0


cdef inline int _tab_acc(NTab *t, unsigned long long k, i128 delta) except -1:
    """t[k] += delta.  Returns 0, or 1 when the slot would leave int64."""
    cdef size_t j = (k * HASH_C) >> t.shift
    cdef unsigned long long kk
    cdef i128 v
    while True:
        kk = t.keys[j]
        if kk == k:
            v = <i128>t.vals[j] + delta
            if v > <i128>I64MAX or v < <i128>I64MIN:
                return 1
            t.vals[j] = <long long>v
            return 0
        if kk == EMPTY:
            if delta > <i128>I64MAX or delta < <i128>I64MIN:
                return 1
            if (t.used + 1) * 8 > (t.mask + 1) * 5:
                _tab_grow(t)
                j = (k * HASH_C) >> t.shift
                while t.keys[j] != EMPTY and t.keys[j] != k:
                    j = (j + 1) & t.mask
                if t.keys[j] == k:
                    continue
            t.keys[j] = k
            t.vals[j] = <long long>delta
            t.used += 1
            return 0
        j = (j + 1) & t.mask


cdef dict _emit(NTab *t, int width, int *base):
    """Convert table contents back to a wide term dict."""
    cdef dict out = {}
    cdef size_t i, cap = t.mask + 1
    cdef unsigned long long k, lo, hi
    cdef unsigned long long wf
    cdef long long v
    cdef int f, e
    for i in range(cap):
        k = t.keys[i]
        if k == EMPTY:
            continue
        v = t.vals[i]
        if v == 0:
            continue
        lo = 0
        hi = 0
        for f in range(width):
            e = <int>((k >> (8 * f)) & 0xFF) + base[f]
            wf = <unsigned long long>(e + 0x8000)
            if f < 4:
                lo |= wf << (16 * f)
            else:
                hi |= wf << (16 * (f - 4))
        if width > 4:
            key_obj = (PyLong_FromUnsignedLongLong(hi) << 64) | PyLong_FromUnsignedLongLong(lo)
        else:
            key_obj = PyLong_FromUnsignedLongLong(lo)
        out[key_obj] = PyLong_FromLongLong(v)
    return out


cdef _nmul(dict A, dict B, int width):
    """Narrow A*B.  Returns the result dict, or None to request the wide path."""
    cdef NArr a, b
    cdef NTab t
    cdef Py_ssize_t ia, ib
    cdef unsigned long long ka
    cdef long long ca
    cdef int i
    cdef int rbase[NVMAX]
    cdef bint have_a = False, have_b = False, have_t = False
    cdef dict out = None
    t.keys = NULL
    t.vals = NULL
    try:
        if _load(A, width, &a):
            return None
        have_a = True
        if _load(B, width, &b):
            return None
        have_b = True
        for i in range(width):
            if a.span[i] + b.span[i] > 254:
                return None
            rbase[i] = a.base[i] + b.base[i]
        _tab_init(&t, 2 * <size_t>(a.n + b.n) + 64)
        have_t = True
        for ia in range(a.n):
            ka = a.keys[ia]
            ca = a.vals[ia]
            for ib in range(b.n):
                if _tab_acc(&t, ka + b.keys[ib], <i128>ca * <i128>b.vals[ib]):
                    return None
        out = _emit(&t, width, rbase)
        return out
    finally:
        if have_a:
            _narr_free(&a)
        if have_b:
            _narr_free(&b)
        if have_t:
            _tab_free(&t)


cdef _nsquare(dict A, int width):
    cdef NArr a
    cdef NTab t
    cdef Py_ssize_t i, j, n
    cdef unsigned long long ki
    cdef long long ci
    cdef i128 p
    cdef int f
    cdef int rbase[NVMAX]
    cdef bint have_a = False, have_t = False
    cdef dict out = None
    t.keys = NULL
    t.vals = NULL
    try:
        if _load(A, width, &a):
            return None
        have_a = True
        for f in range(width):
            if 2 * a.span[f] > 254:
                return None
            rbase[f] = 2 * a.base[f]
        n = a.n
        _tab_init(&t, 4 * <size_t>n + 64)
        have_t = True
        for i in range(n):
            ki = a.keys[i]
            ci = a.vals[i]
            if _tab_acc(&t, ki + ki, <i128>ci * <i128>ci):
                return None
            for j in range(i + 1, n):
                p = <i128>ci * <i128>a.vals[j]
                if _tab_acc(&t, ki + a.keys[j], p + p):
                    return None
        out = _emit(&t, width, rbase)
        return out
    finally:
        if have_a:
            _narr_free(&a)
        if have_t:
            _tab_free(&t)


cdef _niadd_mul(dict acc, dict A, dict B, int width):
    """Narrow acc += A*B.  Mutates and returns acc, or returns None untouched."""
    cdef NArr s, a, b
    cdef NTab t
    cdef Py_ssize_t ia, ib
    cdef unsigned long long ka, kd
    cdef long long ca
    cdef int i, lo_i, hi_i
    cdef int ubase[NVMAX]
    cdef int d_acc[NVMAX]
    cdef int d_ab[NVMAX]
    cdef bint have_s = False, have_a = False, have_b = False, have_t = False
    cdef unsigned long long shift_acc, shift_ab
    cdef dict merged
    t.keys = NULL
    t.vals = NULL
    try:
        if _load(acc, width, &s):
            return None
        have_s = True
        if _load(A, width, &a):
            return None
        have_a = True
        if _load(B, width, &b):
            return None
        have_b = True
        for i in range(width):
            lo_i = a.base[i] + b.base[i]
            hi_i = lo_i + a.span[i] + b.span[i]
            if s.base[i] < lo_i:
                ubase[i] = s.base[i]
            else:
                ubase[i] = lo_i
            if s.base[i] + s.span[i] > hi_i:
                hi_i = s.base[i] + s.span[i]
            if hi_i - ubase[i] > 254:
                return None
            d_acc[i] = s.base[i] - ubase[i]
            d_ab[i] = lo_i - ubase[i]
        shift_acc = 0
        shift_ab = 0
        for i in range(width):
            shift_acc |= (<unsigned long long>d_acc[i]) << (8 * i)
            shift_ab |= (<unsigned long long>d_ab[i]) << (8 * i)
        _tab_init(&t, 2 * <size_t>(s.n + a.n + b.n) + 64)
        have_t = True
        for ia in range(s.n):
            if _tab_acc(&t, s.keys[ia] + shift_acc, <i128>s.vals[ia]):
                return None
        for ia in range(a.n):
            ka = a.keys[ia] + shift_ab
            ca = a.vals[ia]
            for ib in range(b.n):
                if _tab_acc(&t, ka + b.keys[ib], <i128>ca * <i128>b.vals[ib]):
                    return None
        merged = _emit(&t, width, ubase)
        acc.clear()
        acc.update(merged)
        return acc
    finally:
        if have_s:
            _narr_free(&s)
        if have_a:
            _narr_free(&a)
        if have_b:
            _narr_free(&b)
        if have_t:
            _tab_free(&t)


cdef struct U64Heap:
    unsigned long long *a
    size_t n
    size_t cap


cdef void _heap_free(U64Heap *h) noexcept:
    if h.a != NULL:
        free(h.a)
        h.a = NULL


cdef inline void _sift_down(U64Heap *h, size_t i) noexcept:
    cdef unsigned long long x = h.a[i]
    cdef size_t c
    while True:
        c = 2 * i + 1
        if c >= h.n:
            break
        if c + 1 < h.n and h.a[c + 1] > h.a[c]:
            c += 1
        if h.a[c] <= x:
            break
        h.a[i] = h.a[c]
        i = c
    h.a[i] = x


cdef inline int _heap_push(U64Heap *h, unsigned long long k) except -1:
    cdef size_t i, p
    cdef unsigned long long *na
    if h.n == h.cap:
        na = <unsigned long long *>realloc(h.a, 2 * h.cap * sizeof(unsigned long long))
        if na == NULL:
            raise MemoryError()
        h.a = na
        h.cap *= 2
    i = h.n
    h.n += 1
    while i > 0:
        p = (i - 1) >> 1
        if h.a[p] >= k:
            break
        h.a[i] = h.a[p]
        i = p
    h.a[i] = k
    return 0


cdef inline unsigned long long _heap_pop(U64Heap *h) noexcept:
    cdef unsigned long long top = h.a[0]
    h.n -= 1
    if h.n:
        h.a[0] = h.a[h.n]
        _sift_down(h, 0)
    return top


cdef inline long long _tab_get(NTab *t, unsigned long long k) noexcept:
    cdef size_t j = (k * HASH_C) >> t.shift
    cdef unsigned long long kk
    while True:
        kk = t.keys[j]
        if kk == k:
            return t.vals[j]
        if kk == EMPTY:
            return 0
        j = (j + 1) & t.mask


cdef inline int _tab_zero(NTab *t, unsigned long long k) noexcept:
    cdef size_t j = (k * HASH_C) >> t.shift
    while t.keys[j] != k:
        j = (j + 1) & t.mask
    t.vals[j] = 0
    return 0


cdef inline int _tab_submul(NTab *t, unsigned long long k, i128 delta,
                            bint *went_live) except -1:
    """t[k] += delta in one probe.  went_live flags a zero-to-nonzero
    transition (the caller must then schedule k).  Returns 1 on int64
    overflow."""
    cdef size_t j = (k * HASH_C) >> t.shift
    cdef unsigned long long kk
    cdef i128 v
    while True:
        kk = t.keys[j]
        if kk == k:
            v = <i128>t.vals[j] + delta
            if v > <i128>I64MAX or v < <i128>I64MIN:
                return 1
            went_live[0] = t.vals[j] == 0 and v != 0
            t.vals[j] = <long long>v
            return 0
        if kk == EMPTY:
            if delta > <i128>I64MAX or delta < <i128>I64MIN:
                return 1
            if (t.used + 1) * 8 > (t.mask + 1) * 5:
                _tab_grow(t)
                j = (k * HASH_C) >> t.shift
                while t.keys[j] != EMPTY and t.keys[j] != k:
                    j = (j + 1) & t.mask
                if t.keys[j] == k:
                    continue
            t.keys[j] = k
            t.vals[j] = <long long>delta
            t.used += 1
            went_live[0] = delta != 0
            return 0
        j = (j + 1) & t.mask


cdef _ndiv(dict A, dict B, int width, int *status):
    """Narrow exact division.  status: 0 quotient returned, 1 indivisible,
    2 rerun on the wide path."""
    cdef NArr a, b
    cdef NTab rem
    cdef U64Heap heap
    cdef unsigned long long *qkeys = NULL
    cdef unsigned long long *nq
    cdef long long *qvals = NULL
    cdef long long *nv
    cdef size_t qn = 0, qcap = 0
    cdef Py_ssize_t i, nrest
    cdef unsigned long long bk, k, qk, kk, lo, hi, wf
    cdef long long bc, c, qc
    cdef bint went_live
    cdef int f, e, fk, fb
    cdef int boxq[NVMAX]
    cdef int qbase[NVMAX]
    cdef size_t j
    cdef bint have_a = False, have_b = False, have_rem = False
    cdef dict out
    status[0] = 2
    rem.keys = NULL
    rem.vals = NULL
    heap.a = NULL
    heap.n = 0
    heap.cap = 0
    try:
        if _load(A, width, &a):
            return None
        have_a = True
        if _load(B, width, &b):
            return None
        have_b = True
        for f in range(width):
            boxq[f] = a.span[f] - b.span[f]
            if boxq[f] < 0:
                status[0] = 1
                return None
            qbase[f] = a.base[f] - b.base[f]
        bk = 0
        bc = 0
        for i in range(b.n):
            if b.vals[i] != 0 and (bc == 0 or b.keys[i] > bk):
                bk = b.keys[i]
                bc = b.vals[i]
        _tab_init(&rem, 2 * <size_t>a.n + 64)
        have_rem = True
        for i in range(a.n):
            if _tab_acc(&rem, a.keys[i], <i128>a.vals[i]):
                return None
        heap.cap = <size_t>a.n + 64
        heap.a = <unsigned long long *>malloc(heap.cap * sizeof(unsigned long long))
        if heap.a == NULL:
            raise MemoryError()
        for i in range(a.n):
            heap.a[i] = a.keys[i]
        heap.n = <size_t>a.n
        if heap.n > 1:
            i = <Py_ssize_t>(heap.n // 2)
            while i > 0:
                i -= 1
                _sift_down(&heap, <size_t>i)
        qcap = <size_t>a.n + 16
        qkeys = <unsigned long long *>malloc(qcap * sizeof(unsigned long long))
        qvals = <long long *>malloc(qcap * sizeof(long long))
        if qkeys == NULL or qvals == NULL:
            raise MemoryError()
        while heap.n:
            k = _heap_pop(&heap)
            c = _tab_get(&rem, k)
            if c == 0:
                continue
            for f in range(width):
                fk = <int>((k >> (8 * f)) & 0xFF)
                fb = <int>((bk >> (8 * f)) & 0xFF)
                if fk < fb or fk - fb > boxq[f]:
                    status[0] = 1
                    return None
            if c % bc:
                status[0] = 1
                return None
            if c == I64MIN and bc == -1:
                return None
            qc = c / bc
            qk = k - bk
            if qn == qcap:
                nq = <unsigned long long *>realloc(qkeys, 2 * qcap * sizeof(unsigned long long))
                if nq == NULL:
                    raise MemoryError()
                qkeys = nq
                nv = <long long *>realloc(qvals, 2 * qcap * sizeof(long long))
                if nv == NULL:
                    raise MemoryError()
                qvals = nv
                qcap *= 2
            qkeys[qn] = qk
            qvals[qn] = qc
            qn += 1
            _tab_zero(&rem, k)
            for i in range(b.n):
                kk = b.keys[i]
                if kk == bk:
                    continue
                kk = kk + qk
                if _tab_submul(&rem, kk, -(<i128>qc * <i128>b.vals[i]),
                               &went_live):
                    return None
                if went_live:
                    _heap_push(&heap, kk)
        out = {}
        for j in range(qn):
            k = qkeys[j]
            qc = qvals[j]
            lo = 0
            hi = 0
            for f in range(width):
                e = <int>((k >> (8 * f)) & 0xFF) + qbase[f]
                wf = <unsigned long long>(e + 0x8000)
                if f < 4:
                    lo |= wf << (16 * f)
                else:
                    hi |= wf << (16 * (f - 4))
            if width > 4:
                key_obj = (PyLong_FromUnsignedLongLong(hi) << 64) | PyLong_FromUnsignedLongLong(lo)
            else:
                key_obj = PyLong_FromUnsignedLongLong(lo)
            out[key_obj] = PyLong_FromLongLong(qc)
        status[0] = 0
        return out
    finally:
        if have_a:
            _narr_free(&a)
        if have_b:
            _narr_free(&b)
        if have_rem:
            _tab_free(&rem)
        _heap_free(&heap)
        free(qkeys)
        free(qvals)


# --------------------------------------------------------------------------
# Public entry points: narrow attempt first where it can pay off, then the
# wide loops that mirror _kernels.py.
# --------------------------------------------------------------------------

def mul(dict A, dict B, bias):
    cdef dict out = {}
    cdef list Bitems
    cdef Py_ssize_t na, nb
    cdef int w
    if not A or not B:
        return out
    if len(A) > len(B):
        A, B = B, A
    if len(A) == 1:
        for k, c in A.items():
            return mono_mul(B, k, c, bias)
    na = len(A)
    nb = len(B)
    if na * nb >= NARROW_MUL_PAIRS:
        w = _width_of(bias)
        if 1 <= w <= NVMAX:
            r = _nmul(A, B, w)
            if r is not None:
                return r
    Bitems = list(B.items())
    for ka, ca in A.items():
        base = ka - bias
        for kb, cb in Bitems:
            k = base + kb
            v = out.get(k, 0) + ca * cb
            if v:
                out[k] = v
            elif k in out:
                del out[k]
    return out


def square(dict A, bias):
    cdef dict out = {}
    cdef list items
    cdef Py_ssize_t i, j, n
    cdef int w
    n = len(A)
    if n == 0:
        return out
    if n * (n + 1) >= 2 * NARROW_MUL_PAIRS:
        w = _width_of(bias)
        if 1 <= w <= NVMAX:
            r = _nsquare(A, w)
            if r is not None:
                return r
    items = list(A.items())
    for i in range(n):
        ki, ci = items[i]
        k = ki + ki - bias
        v = out.get(k, 0) + ci * ci
        if v:
            out[k] = v
        elif k in out:
            del out[k]
        base = ki - bias
        for j in range(i + 1, n):
            kj, cj = items[j]
            k = base + kj
            p = ci * cj
            v = out.get(k, 0) + p + p
            if v:
                out[k] = v
            elif k in out:
                del out[k]
    return out


def iadd_mul(dict acc, dict A, dict B, bias):
    cdef list Bitems
    cdef Py_ssize_t na, nb
    cdef int w
    if not A or not B:
        return acc
    if len(A) > len(B):
        A, B = B, A
    na = len(A)
    nb = len(B)
    if na * nb >= NARROW_MUL_PAIRS:
        w = _width_of(bias)
        if 1 <= w <= NVMAX:
            r = _niadd_mul(acc, A, B, w)
            if r is not None:
                return r
    Bitems = list(B.items())
    for ka, ca in A.items():
        base = ka - bias
        for kb, cb in Bitems:
            k = base + kb
            v = acc.get(k, 0) + ca * cb
            if v:
                acc[k] = v
            elif k in acc:
                del acc[k]
    return acc


cdef _min_shift(dict A, bias):
    """Packed offset moving every per-variable minimum exponent to zero."""
    cdef list mins = None
    cdef Py_ssize_t fields = 0, i
    b = bias
    while b:
        fields += 1
        b >>= FIELD_BITS
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


cdef bint _fields_at_least_bias(key):
    # Valid because every field of (k - bk + bias) stays in range: exponent
    # differences are bounded by 2*EXP_LIMIT, so no cross-field borrows occur.
    while key:
        if key & FIELD_MASK < BIAS:
            return False
        key >>= FIELD_BITS
    return True


def exact_div(dict A, dict B, bias):
    """Exact quotient A // B in the Laurent ring, or None if B does not divide A.

    Same algorithm as the pure kernel: shift to zero minimum exponents,
    leading-term elimination with a lazy max-heap, indivisibility detected on
    the leading monomial or leading coefficient.
    """
    cdef dict rem, out
    cdef list heap, rest
    cdef int w, status
    if not B:
        raise ZeroDivisionError("kernel division by zero polynomial")
    if not A:
        return {}
    if len(A) >= NARROW_DIV_MIN and len(B) >= 2:
        w = _width_of(bias)
        if 1 <= w <= NVMAX:
            status = 2
            r = _ndiv(A, B, w, &status)
            if status == 0:
                return r
            if status == 1:
                return None
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
    while heap:
        k = -heappop(heap)
        c = rem.get(k)
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
            prev = rem.get(kk)
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


def eval_int(dict A, width, values):
    cdef int i, w
    cdef list tables
    if not A:
        return 0
    w = width
    tables = [dict() for _ in range(w)]
    for i in range(w):
        (<dict>tables[i])[0] = 1
    total = 0
    for key, coeff in A.items():
        term = coeff
        k = key
        for i in range(w):
            e = (k & FIELD_MASK) - BIAS
            k >>= FIELD_BITS
            if e == 0:
                continue
            if e < 0:
                raise ValueError("eval_int requires non-negative exponents")
            tab = <dict>tables[i]
            p = tab.get(e)
            if p is None:
                p = values[i] ** e
                tab[e] = p
            term *= p
        total += term
    return total
