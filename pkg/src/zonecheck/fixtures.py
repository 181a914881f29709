"""Benchmark models, generated deterministically.

The CSMA/CD and Firewire models are recreations from protocol descriptions,
with both participants composed into one automaton and counters unfolded into
locations.  Their constants are scaled down (see ``csma`` and ``firewire``) so
the digital-clocks engine stays small; numbers they produce are indicative
only.  The JSON copies under ``data/`` are regenerated with
``python -m zonecheck.fixtures``.
"""

from __future__ import annotations

import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .expr import parse_expr
from .model import Branch, Edge, Location, Property, Pta, TimeBound, Threshold, parse_model, render_model


def _pta(clocks, initial, locations, edges) -> Pta:
    locs = tuple(Location(n, parse_expr(inv)) for n, inv in locations)
    eds = tuple(
        Edge(src, act, parse_expr(guard), tuple(Branch(Fraction(p), tuple(r), t) for p, r, t in branches))
        for src, act, guard, branches in edges
    )
    return Pta(tuple(clocks), locs, initial, eds)


def example_pta() -> Pta:
    """Message-loss protocol: send succeeds with 0.9, retry after 8, time out at 18."""
    return _pta(
        ["x", "y"],
        "init",
        [("init", "x <= 2 & y <= 24"), ("lost", "x <= 8"), ("fail", "true"), ("done", "true")],
        [
            ("init", "send", "x >= 1", [("9/10", [], "done"), ("1/10", [], "lost")]),
            ("init", "t_out", "y >= 18", [("1", [], "fail")]),
            ("lost", "retry", "x = 8", [("1", ["x"], "init")]),
            ("fail", "f", "true", [("1", [], "fail")]),
            ("done", "d", "true", [("1", [], "done")]),
        ],
    )


# CSMA/CD ---------------------------------------------------------------------

CSMA_SIGMA = 1  # collision detection delay
CSMA_LAMBDA = 8  # frame transmission time
CSMA_SLOT = 2 * CSMA_SIGMA


def csma(bcmax: int) -> Pta:
    """Two stations on a bus that start sending together and collide.

    After a collision is detected (``x = sigma``) each station picks a
    backoff slot uniformly from ``0 .. 2^bc - 1``, where ``bc`` counts
    collisions up to ``bcmax``.  Equal slots collide again; otherwise the
    earlier station transmits (clock ``y``) and the other follows.  One time
    unit stands for about 100 microseconds of the original timing, which puts
    the earliest completion at ``sigma + 2 * lambda = 17``.
    """
    if bcmax not in (1, 2):
        raise ValueError(f"unsupported bcmax {bcmax}: the fixture is defined for 1 and 2")
    locations = []
    edges = []
    for k in range(1, bcmax + 1):
        locations.append((f"collide_{k}", f"x <= {CSMA_SIGMA}"))
    for k in range(1, bcmax + 1):
        window = 2**k
        pair = Fraction(1, window * window)
        branches = []
        for a in range(window):
            branches.append((pair, ["x"], f"retry_{k}_{a}"))
        for m in range(window - 1):
            # both orders of (m, b) with b > m
            branches.append((pair * 2 * (window - 1 - m), ["x"], f"wait_{k}_{m}"))
        edges.append((f"collide_{k}", f"detect_{k}", f"x >= {CSMA_SIGMA}", branches))
    for k in range(1, bcmax + 1):
        nxt = min(k + 1, bcmax)
        for a in range(2**k):
            locations.append((f"retry_{k}_{a}", f"x <= {a * CSMA_SLOT}"))
            edges.append(
                (f"retry_{k}_{a}", "resend", f"x >= {a * CSMA_SLOT}", [(1, ["x"], f"collide_{nxt}")])
            )
        for m in range(2**k - 1):
            locations.append((f"wait_{k}_{m}", f"x <= {m * CSMA_SLOT}"))
            edges.append((f"wait_{k}_{m}", "begin", f"x >= {m * CSMA_SLOT}", [(1, ["y"], "tx_first")]))
    locations += [
        ("tx_first", f"y <= {CSMA_LAMBDA}"),
        ("tx_second", f"y <= {CSMA_LAMBDA}"),
        ("done", "true"),
    ]
    edges += [
        ("tx_first", "end_first", f"y >= {CSMA_LAMBDA}", [(1, ["y"], "tx_second")]),
        ("tx_second", "end_second", f"y >= {CSMA_LAMBDA}", [(1, [], "done")]),
        ("done", "idle", "true", [(1, [], "done")]),
    ]
    return _pta(["x", "y"], "collide_1", locations, edges)


# Firewire root contention ----------------------------------------------------

FIREWIRE_UNITS = {
    # name: (delay, fast_min, fast_max, slow_min, slow_max) in the given time unit
    100: (4, 8, 9, 16, 17),
    10: (36, 76, 85, 159, 167),
}


def firewire(unit: int = 100) -> Pta:
    """Root contention between two nodes.

    Each node flips a coin for a fast or slow wait.  Different choices
    resolve the contention when the fast wait ends; equal choices lead to a
    retry after a wire delay.  ``unit`` is the time unit in nanoseconds; the
    default of 100 rounds the protocol constants, 10 keeps them nearly exact.
    """
    try:
        delay, fmin, fmax, smin, smax = FIREWIRE_UNITS[unit]
    except KeyError:
        raise ValueError(f"unsupported unit {unit}; choose from {sorted(FIREWIRE_UNITS)}") from None
    return _pta(
        ["x", "y"],
        "start",
        [
            ("start", "x <= 0"),
            ("fast_slow", f"x <= {fmax}"),
            ("fast_fast", f"x <= {fmax}"),
            ("slow_slow", f"x <= {smax}"),
            ("contend", f"y <= {delay}"),
            ("done", "true"),
        ],
        [
            (
                "start",
                "flip",
                "true",
                [("1/2", ["x"], "fast_slow"), ("1/4", ["x"], "fast_fast"), ("1/4", ["x"], "slow_slow")],
            ),
            ("fast_slow", "elect", f"x >= {fmin}", [(1, [], "done")]),
            ("fast_fast", "clash", f"x >= {fmin}", [(1, ["y"], "contend")]),
            ("slow_slow", "clash", f"x >= {smin}", [(1, ["y"], "contend")]),
            ("contend", "again", "true", [(1, ["x"], "start")]),
            ("done", "idle", "true", [(1, [], "done")]),
        ],
    )


FIXTURES = {
    "example": example_pta,
    "csma1": lambda: csma(1),
    "csma2": lambda: csma(2),
    "firewire": firewire,
}


def deadline_property(opt: str, deadline: int | None, lam=None, target: str = "done") -> Property:
    """``z.P_opt ~ lam [ F target & z <= D ]``; ``~`` is ``>=`` for min, ``<=`` for max."""
    bound = None if deadline is None else TimeBound("z", "<=", int(deadline))
    threshold = None
    if lam is not None:
        threshold = Threshold(">=" if opt == "min" else "<=", Fraction(str(lam)))
    return Property(opt, parse_expr("true"), parse_expr(target), bound, threshold)


def data_path(name: str) -> Path:
    return Path(str(resources.files("zonecheck") / "data" / f"{name}.json"))


def load_fixture(name: str) -> Pta:
    """Read the committed JSON copy of a fixture."""
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}")
    return parse_model(data_path(name).read_text(encoding="utf-8"))


def write_all(directory: Path | None = None) -> list[Path]:
    directory = Path(directory) if directory else data_path("example").parent
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for name, make in FIXTURES.items():
        path = directory / f"{name}.json"
        path.write_text(render_model(make()), encoding="utf-8")
        out.append(path)
    return out


if __name__ == "__main__":
    for p in write_all(sys.argv[1] if len(sys.argv) > 1 else None):
        print(p)
