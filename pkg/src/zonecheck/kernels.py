"""Backend selection for the hot loops (DBM closure and value iteration).

The compiled ``_dbmcore`` extension is used when it was built; otherwise the
pure-Python ``_dbmpy`` module is used.  Set ``ZONECHECK_PURE=1`` to force the
fallback.
"""

import os

import numpy as np

from . import _dbmpy

try:
    if os.environ.get("ZONECHECK_PURE", "") not in ("", "0"):
        raise ImportError("pure backend forced")
    from . import _dbmcore as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _dbmpy
    BACKEND = "python"

INF = _dbmpy.INF
LE_ZERO = _dbmpy.LE_ZERO

add = _impl.add
close = _impl.close
tighten = _impl.tighten
intersect = _impl.intersect
includes = _impl.includes
down = _impl.down
up = _impl.up
free = _impl.free
reset = _impl.reset
hull = _impl.hull


def value_iterate(state_start, act_start, succ, prob, fixed, values, maximize, eps, cap):
    if _impl is _dbmpy:
        out, sweeps, res = _dbmpy.value_iterate(
            state_start, act_start, succ, prob, fixed, list(values), maximize, eps, cap
        )
        return np.asarray(out, dtype=np.float64), sweeps, res
    vals = np.array(values, dtype=np.float64)
    _, sweeps, res = _impl.value_iterate(
        np.ascontiguousarray(state_start, dtype=np.int64),
        np.ascontiguousarray(act_start, dtype=np.int64),
        np.ascontiguousarray(succ, dtype=np.int64),
        np.ascontiguousarray(prob, dtype=np.float64),
        np.ascontiguousarray(fixed, dtype=np.uint8),
        vals,
        bool(maximize),
        float(eps),
        int(cap),
    )
    return vals, sweeps, res
