# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled DBM kernels; same contract as ``_dbmpy``."""

cdef enum:
    MAXDIM = 32

cdef long long _INF = 1LL << 60
INF = _INF
LE_ZERO = 1


cdef inline long long _add(long long a, long long b) nogil:
    if a >= _INF or b >= _INF:
        return _INF
    return a + b - ((a | b) & 1)


cdef inline int _load(object m, long long* buf, int n) except -1:
    cdef int k
    cdef tuple t = <tuple?>m
    if n > MAXDIM * MAXDIM:
        raise ValueError("dimension too large")
    if len(t) != n:
        raise ValueError("matrix size mismatch")
    for k in range(n):
        buf[k] = <long long>t[k]
    return 0


cdef tuple _to_tuple(long long* buf, int n):
    return tuple([buf[k] for k in range(n)])


cdef bint _close(long long* m, int dim) nogil:
    """Floyd-Warshall in place; returns False on a negative cycle."""
    cdef int i, j, k
    cdef long long mik, mkj, s
    for k in range(dim):
        for i in range(dim):
            mik = m[i * dim + k]
            if mik >= _INF:
                continue
            for j in range(dim):
                mkj = m[k * dim + j]
                if mkj >= _INF:
                    continue
                s = mik + mkj - ((mik | mkj) & 1)
                if s < m[i * dim + j]:
                    m[i * dim + j] = s
            if m[i * dim + i] < 1:
                return False
    for i in range(dim):
        if m[i * dim + i] < 1:
            return False
    return True


def add(long long a, long long b):
    return _add(a, b)


def close(m, int dim):
    cdef long long buf[MAXDIM * MAXDIM]
    cdef int n = dim * dim
    if dim > MAXDIM:
        raise ValueError("dimension too large")
    _load(m, buf, n)
    if not _close(buf, dim):
        return None
    return _to_tuple(buf, n)


def tighten(m, int dim, int i, int j, long long r):
    cdef long long buf[MAXDIM * MAXDIM]
    cdef int n = dim * dim
    cdef int a, b
    cdef long long mai, air, mjb, t
    if dim > MAXDIM:
        raise ValueError("dimension too large")
    if r >= <long long>m[i * dim + j]:
        return m
    _load(m, buf, n)
    if _add(r, buf[j * dim + i]) < 1:
        return None
    buf[i * dim + j] = r
    for a in range(dim):
        mai = buf[a * dim + i]
        if mai >= _INF:
            continue
        air = _add(mai, r)
        for b in range(dim):
            mjb = buf[j * dim + b]
            if mjb >= _INF:
                continue
            t = air + mjb - ((air | mjb) & 1)
            if t < buf[a * dim + b]:
                buf[a * dim + b] = t
    return _to_tuple(buf, n)


def intersect(a, b, int dim):
    cdef long long ba[MAXDIM * MAXDIM]
    cdef long long bb[MAXDIM * MAXDIM]
    cdef int n = dim * dim
    cdef int k
    cdef bint only_a = True, only_b = True
    if a is b:
        return a
    if dim > MAXDIM:
        raise ValueError("dimension too large")
    _load(a, ba, n)
    _load(b, bb, n)
    for k in range(n):
        if bb[k] < ba[k]:
            ba[k] = bb[k]
            only_a = False
        elif ba[k] < bb[k]:
            only_b = False
    if only_a:
        return a
    if only_b:
        return b
    if not _close(ba, dim):
        return None
    return _to_tuple(ba, n)


def includes(a, b):
    cdef tuple ta = <tuple?>a
    cdef tuple tb = <tuple?>b
    cdef int k, n = len(ta)
    for k in range(n):
        if <long long>ta[k] < <long long>tb[k]:
            return False
    return True


def down(m, int dim):
    cdef long long buf[MAXDIM * MAXDIM]
    cdef int n = dim * dim
    cdef int i, j
    cdef long long best, v
    _load(m, buf, n)
    for j in range(1, dim):
        best = 1
        for i in range(1, dim):
            v = buf[i * dim + j]
            if v < best:
                best = v
        buf[j] = best
    return _to_tuple(buf, n)


def up(m, int dim):
    cdef long long buf[MAXDIM * MAXDIM]
    cdef int n = dim * dim
    cdef int i
    _load(m, buf, n)
    for i in range(1, dim):
        buf[i * dim] = _INF
    return _to_tuple(buf, n)


def free(m, int dim, int c):
    cdef long long buf[MAXDIM * MAXDIM]
    cdef int n = dim * dim
    cdef int i
    _load(m, buf, n)
    for i in range(dim):
        if i != c:
            buf[c * dim + i] = _INF
            buf[i * dim + c] = buf[i * dim]
    return _to_tuple(buf, n)


def reset(m, int dim, int c):
    cdef long long buf[MAXDIM * MAXDIM]
    cdef int n = dim * dim
    cdef int i
    _load(m, buf, n)
    for i in range(dim):
        if i != c:
            buf[c * dim + i] = buf[i]
            buf[i * dim + c] = buf[i * dim]
    return _to_tuple(buf, n)


def hull(a, b):
    cdef tuple ta = <tuple?>a
    cdef tuple tb = <tuple?>b
    cdef int k, n = len(ta)
    cdef long long x, y
    out = []
    for k in range(n):
        x = ta[k]
        y = tb[k]
        out.append(x if x > y else y)
    return tuple(out)


def value_iterate(long long[::1] state_start, long long[::1] act_start,
                  long long[::1] succ, double[::1] prob, unsigned char[::1] fixed,
                  double[::1] values, bint maximize, double eps, long long cap):
    cdef Py_ssize_t n = state_start.shape[0] - 1
    cdef Py_ssize_t s, a, t
    cdef long long sweeps = 0
    cdef double residual = 0.0, best, acc, diff
    with nogil:
        while sweeps < cap:
            sweeps += 1
            residual = 0.0
            for s in range(n):
                if fixed[s] or state_start[s] == state_start[s + 1]:
                    continue
                best = -1.0 if maximize else 2.0
                for a in range(state_start[s], state_start[s + 1]):
                    acc = 0.0
                    for t in range(act_start[a], act_start[a + 1]):
                        acc = acc + prob[t] * values[succ[t]]
                    if maximize:
                        if acc > best:
                            best = acc
                    elif acc < best:
                        best = acc
                diff = best - values[s]
                if diff < 0:
                    diff = -diff
                if diff > residual:
                    residual = diff
                values[s] = best
            if residual <= eps:
                break
    return values, sweeps, residual
