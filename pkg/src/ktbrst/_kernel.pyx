# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled monomial kernels; same contract as ``_kernel_py``."""

cdef enum:
    PARITY = 5


cdef inline int _par(object v):
    return <int>(<tuple>v)[PARITY]


def sort_signed(factors):
    cdef list items = list(factors)
    cdef Py_ssize_t n = len(items), i, j
    cdef int sign = 1
    cdef object x
    for i in range(1, n):
        x = items[i]
        j = i - 1
        while j >= 0 and items[j] > x:
            if _par(x) and _par(items[j]):
                sign = -sign
            items[j + 1] = items[j]
            j -= 1
        items[j + 1] = x
    for i in range(1, n):
        if _par(items[i]) and items[i] == items[i - 1]:
            return None
    return sign, tuple(items)


cdef object _mono_mul(tuple a, tuple b, int* sign_out):
    cdef Py_ssize_t la = len(a), lb = len(b), i = 0, j = 0, k = 0
    cdef int odd_a = 0, sign = 1
    cdef object x, y
    if la == 0:
        sign_out[0] = 1
        return b
    if lb == 0:
        sign_out[0] = 1
        return a
    for i in range(la):
        odd_a += _par(a[i])
    i = 0
    cdef list out = [None] * (la + lb)
    while i < la and j < lb:
        x = a[i]
        y = b[j]
        if y < x:
            if _par(y) and (odd_a & 1):
                sign = -sign
            out[k] = y
            j += 1
        else:
            if _par(x):
                if x == y:
                    return None
                odd_a -= 1
            out[k] = x
            i += 1
        k += 1
    while i < la:
        out[k] = a[i]
        i += 1
        k += 1
    while j < lb:
        out[k] = b[j]
        j += 1
        k += 1
    sign_out[0] = sign
    return tuple(out)


def mono_mul(tuple a, tuple b):
    cdef int s = 1
    r = _mono_mul(a, b, &s)
    if r is None:
        return None
    return s, r


cdef dict _nonzero(dict acc):
    return {m: c for m, c in acc.items() if c}


def poly_mul(dict ta, dict tb):
    cdef dict acc = {}
    cdef int s = 1
    cdef tuple ma, mb
    cdef object m, ca, cb, c
    for ma, ca in ta.items():
        for mb, cb in tb.items():
            m = _mono_mul(ma, mb, &s)
            if m is None:
                continue
            c = ca * cb
            if s < 0:
                c = -c
            acc[m] = acc.get(m, 0) + c
    return _nonzero(acc)


def poly_add(dict ta, dict tb, scale=1):
    cdef dict acc = dict(ta)
    for m, c in tb.items():
        acc[m] = acc.get(m, 0) + scale * c
    return _nonzero(acc)


def partial(dict terms, object var, bint right):
    cdef dict acc = {}
    cdef int odd = _par(var), cnt
    cdef Py_ssize_t n, i, k
    cdef tuple mono, rest
    cdef object c, s
    for mono, c in terms.items():
        n = len(mono)
        for i in range(n):
            if mono[i] != var:
                continue
            s = c
            if odd:
                cnt = 0
                if right:
                    for k in range(i + 1, n):
                        cnt += _par(mono[k])
                else:
                    for k in range(i):
                        cnt += _par(mono[k])
                if cnt & 1:
                    s = -c
            rest = mono[:i] + mono[i + 1:]
            acc[rest] = acc.get(rest, 0) + s
    return _nonzero(acc)


cdef object _insert(tuple rest, Py_ssize_t pos, object w, int* sign_out):
    cdef Py_ssize_t lo = 0, hi = len(rest), mid, p, k
    cdef int cnt = 0
    while lo < hi:
        mid = (lo + hi) >> 1
        if rest[mid] < w:
            lo = mid + 1
        else:
            hi = mid
    p = lo
    if _par(w):
        if p < len(rest) and rest[p] == w:
            return None
        if p >= pos:
            for k in range(pos, p):
                cnt += _par(rest[k])
        else:
            for k in range(p, pos):
                cnt += _par(rest[k])
        sign_out[0] = -1 if (cnt & 1) else 1
    else:
        sign_out[0] = 1
    return rest[:p] + (w,) + rest[p:]


def replace_each(dict terms, dict shift):
    cdef dict acc = {}
    cdef int s = 1
    cdef Py_ssize_t i, n
    cdef tuple mono
    cdef object c, v, w, m
    for mono, c in terms.items():
        n = len(mono)
        for i in range(n):
            v = mono[i]
            w = shift.get(v)
            if w is None:
                continue
            m = _insert(mono[:i] + mono[i + 1:], i, w, &s)
            if m is None:
                continue
            acc[m] = acc.get(m, 0) + (c if s > 0 else -c)
    return _nonzero(acc)


def apply_left(dict terms, dict comp):
    cdef dict acc = {}
    cdef int s = 1, odd_left
    cdef Py_ssize_t i, n
    cdef tuple mono, rest, cm
    cdef object c, v, ct, cc, m, sc, val
    for mono, c in terms.items():
        odd_left = 0
        n = len(mono)
        for i in range(n):
            v = mono[i]
            ct = comp.get(v)
            if ct:
                rest = mono[:i] + mono[i + 1:]
                sc = -c if (_par(v) and odd_left) else c
                for cm, cc in (<dict>ct).items():
                    m = _mono_mul(cm, rest, &s)
                    if m is None:
                        continue
                    val = sc * cc
                    acc[m] = acc.get(m, 0) + (val if s > 0 else -val)
            if _par(v):
                odd_left ^= 1
    return _nonzero(acc)
