"""Pure-Python DBM kernels.

Matrices are flat tuples of raw bounds in row-major order; entry ``i*dim + j``
bounds ``x_i - x_j``.  A raw bound is ``2*d + 1`` for ``<= d`` and ``2*d`` for
``< d``; ``INF`` means unbounded.  Functions returning a matrix return ``None``
when the result is empty.  This module mirrors ``_dbmcore.pyx`` exactly.
"""

INF = 1 << 60
LE_ZERO = 1


def add(a, b):
    if a >= INF or b >= INF:
        return INF
    return a + b - ((a | b) & 1)


def close(m, dim):
    m = list(m)
    for k in range(dim):
        kd = k * dim
        for i in range(dim):
            id_ = i * dim
            mik = m[id_ + k]
            if mik >= INF:
                continue
            for j in range(dim):
                mkj = m[kd + j]
                if mkj >= INF:
                    continue
                s = mik + mkj - ((mik | mkj) & 1)
                if s < m[id_ + j]:
                    m[id_ + j] = s
            if m[id_ + i] < LE_ZERO:
                return None
    for i in range(dim):
        if m[i * dim + i] < LE_ZERO:
            return None
    return tuple(m)


def tighten(m, dim, i, j, r):
    """Conjoin ``x_i - x_j <= r`` onto a canonical matrix and re-close."""
    if r >= m[i * dim + j]:
        return m
    if add(r, m[j * dim + i]) < LE_ZERO:
        return None
    m = list(m)
    m[i * dim + j] = r
    for a in range(dim):
        mai = m[a * dim + i]
        if mai >= INF:
            continue
        air = add(mai, r)
        ad = a * dim
        for b in range(dim):
            mjb = m[j * dim + b]
            if mjb >= INF:
                continue
            t = air + mjb - ((air | mjb) & 1)
            if t < m[ad + b]:
                m[ad + b] = t
    return tuple(m)


def intersect(a, b, dim):
    if a == b:
        return a
    m = tuple(x if x < y else y for x, y in zip(a, b))
    if m == a or m == b:
        return m
    return close(m, dim)


def includes(a, b):
    for x, y in zip(a, b):
        if x < y:
            return False
    return True


def down(m, dim):
    m = list(m)
    for j in range(1, dim):
        best = LE_ZERO
        for i in range(1, dim):
            v = m[i * dim + j]
            if v < best:
                best = v
        m[j] = best
    return tuple(m)


def up(m, dim):
    m = list(m)
    for i in range(1, dim):
        m[i * dim] = INF
    return tuple(m)


def free(m, dim, c):
    m = list(m)
    cd = c * dim
    for i in range(dim):
        if i != c:
            m[cd + i] = INF
            m[i * dim + c] = m[i * dim]
    return tuple(m)


def reset(m, dim, c):
    m = list(m)
    cd = c * dim
    for i in range(dim):
        if i != c:
            m[cd + i] = m[i]
            m[i * dim + c] = m[i * dim]
    return tuple(m)


def hull(a, b):
    return tuple(x if x > y else y for x, y in zip(a, b))


def value_iterate(state_start, act_start, succ, prob, fixed, values, maximize, eps, cap):
    """Gauss-Seidel sweeps in state order until the residual drops to ``eps``.

    Returns ``(values, sweeps, residual)``; ``values`` is updated in place.
    ``sweeps == cap`` with ``residual > eps`` means no convergence.
    """
    state_start = list(state_start)
    act_start = list(act_start)
    succ = list(succ)
    prob = list(prob)
    fixed = list(fixed)
    n = len(state_start) - 1
    live = [s for s in range(n) if not fixed[s] and state_start[s] < state_start[s + 1]]
    sweeps = 0
    residual = 0.0
    while sweeps < cap:
        sweeps += 1
        residual = 0.0
        for s in live:
            best = -1.0 if maximize else 2.0
            for a in range(state_start[s], state_start[s + 1]):
                acc = 0.0
                for t in range(act_start[a], act_start[a + 1]):
                    acc += prob[t] * values[succ[t]]
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
