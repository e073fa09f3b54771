"""Pure-Python monomial kernels.

A monomial is a tuple of jet variables in canonical (ascending) order, an
even variable repeated once per unit of exponent. A jet variable is any
tuple whose item ``PARITY`` is its Grassmann parity (0 or 1). Term maps are
plain ``dict`` objects ``{monomial: coefficient}``.

Every function here has a twin with the same signature in ``_kernel.pyx``.
"""

from bisect import bisect_left

PARITY = 5


def sort_signed(factors):
    """Sort a raw factor sequence into canonical order.

    Returns ``(sign, monomial)`` or ``None`` when an odd factor repeats.
    """
    items = list(factors)
    n = len(items)
    sign = 1
    # insertion sort; each swap of two odd neighbours flips the sign
    for i in range(1, n):
        x = items[i]
        j = i - 1
        while j >= 0 and items[j] > x:
            if x[PARITY] and items[j][PARITY]:
                sign = -sign
            items[j + 1] = items[j]
            j -= 1
        items[j + 1] = x
    for i in range(1, n):
        if items[i][PARITY] and items[i] == items[i - 1]:
            return None
    return sign, tuple(items)


def mono_mul(a, b):
    """Product of two canonical monomials as ``(sign, monomial)`` or ``None``."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    la = len(a)
    lb = len(b)
    odd_a = 0
    for v in a:
        odd_a += v[PARITY]
    out = []
    sign = 1
    i = j = 0
    while i < la and j < lb:
        x = a[i]
        y = b[j]
        if y < x:
            if y[PARITY] and odd_a & 1:
                sign = -sign
            out.append(y)
            j += 1
        else:
            if x[PARITY]:
                if x == y:
                    return None
                odd_a -= 1
            out.append(x)
            i += 1
    if i < la:
        out.extend(a[i:])
    elif j < lb:
        out.extend(b[j:])
    return sign, tuple(out)


def poly_mul(ta, tb):
    acc = {}
    for ma, ca in ta.items():
        for mb, cb in tb.items():
            r = mono_mul(ma, mb)
            if r is None:
                continue
            m = r[1]
            c = ca * cb if r[0] > 0 else -(ca * cb)
            acc[m] = acc.get(m, 0) + c
    return {m: c for m, c in acc.items() if c}


def poly_add(ta, tb, scale=1):
    """``ta + scale * tb``."""
    acc = dict(ta)
    for m, c in tb.items():
        acc[m] = acc.get(m, 0) + scale * c
    return {m: c for m, c in acc.items() if c}


def partial(terms, var, right):
    """Graded partial derivative with respect to ``var`` (left or right)."""
    acc = {}
    odd = var[PARITY]
    for mono, c in terms.items():
        n = len(mono)
        for i in range(n):
            if mono[i] != var:
                continue
            s = c
            if odd:
                cnt = 0
                rng = range(i + 1, n) if right else range(i)
                for k in rng:
                    cnt += mono[k][PARITY]
                if cnt & 1:
                    s = -c
            rest = mono[:i] + mono[i + 1:]
            acc[rest] = acc.get(rest, 0) + s
    return {m: c for m, c in acc.items() if c}


def _insert(rest, pos, w):
    """Place ``w`` (written at position ``pos`` of ``rest``) in canonical order."""
    p = bisect_left(rest, w)
    if w[PARITY]:
        if p < len(rest) and rest[p] == w:
            return None
        cnt = 0
        if p >= pos:
            for k in range(pos, p):
                cnt += rest[k][PARITY]
        else:
            for k in range(p, pos):
                cnt += rest[k][PARITY]
        sign = -1 if cnt & 1 else 1
    else:
        sign = 1
    return sign, rest[:p] + (w,) + rest[p:]


def replace_each(terms, shift):
    """Even derivation sending each factor ``v`` to the single variable ``shift[v]``.

    This is the total derivative when ``shift`` maps a jet variable to its
    one-step prolongation. Factors missing from ``shift`` are constants of
    the derivation.
    """
    acc = {}
    for mono, c in terms.items():
        for i, v in enumerate(mono):
            w = shift.get(v)
            if w is None:
                continue
            r = _insert(mono[:i] + mono[i + 1:], i, w)
            if r is None:
                continue
            m = r[1]
            acc[m] = acc.get(m, 0) + (c if r[0] > 0 else -c)
    return {m: c for m, c in acc.items() if c}


def apply_left(terms, comp):
    """Left graded derivation ``sum comp[v] * d/dv`` applied to a term map.

    ``comp`` maps jet variables to term maps (the prolonged components).
    """
    acc = {}
    for mono, c in terms.items():
        odd_left = 0
        for i, v in enumerate(mono):
            ct = comp.get(v)
            if ct:
                rest = mono[:i] + mono[i + 1:]
                s = -c if (v[PARITY] and odd_left) else c
                for cm, cc in ct.items():
                    r = mono_mul(cm, rest)
                    if r is None:
                        continue
                    m = r[1]
                    val = s * cc
                    acc[m] = acc.get(m, 0) + (val if r[0] > 0 else -val)
            if v[PARITY]:
                odd_left ^= 1
    return {m: c for m, c in acc.items() if c}
