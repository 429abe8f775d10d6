#!/usr/bin/env python3
"""Smoke test for the Python bindings.

Builds nothing itself: run `cargo build -p lichnerowicz-py` first, then
`python3 python/smoke_test.py`. The script locates the compiled cdylib,
exposes it under the importable module name, and exercises the main entry
points on the constant benchmark instance.
"""

import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        REPO / "target" / "debug" / "liblichnerowicz_py.so",
        REPO / "target" / "release" / "liblichnerowicz_py.so",
    ]
    lib = next((p for p in candidates if p.exists()), None)
    if lib is None:
        sys.exit("cdylib not found; run `cargo build -p lichnerowicz-py` first")
    stage = Path(tempfile.mkdtemp(prefix="lichnerowicz_py_"))
    shutil.copy(lib, stage / "lichnerowicz_py.so")
    sys.path.insert(0, str(stage))
    import lichnerowicz_py

    return lichnerowicz_py


def main():
    lz = load_module()

    grid = lz.Grid(1, [64], [2.0 * math.pi])
    assert grid.dim == 1 and grid.size == 64

    # constant benchmark instance
    cs = lz.CoefficientSet.constants(grid, 3, 1.0, 2.0, 0.0, 1.0, 0.0, 0.0)
    report = json.loads(lz.check(cs))
    assert report["assumptions"]["all_pass"], report

    lo, hi, delta0 = lz.bracket(cs)
    assert 0.0 < lo < hi
    assert abs(delta0 - 0.5 ** (1.0 / 12.0)) < 1e-9

    u, solve_report = lz.solve(cs)
    solve_report = json.loads(solve_report)
    assert solve_report["converged"] and solve_report["monotone"]
    assert lo - 1e-12 <= u.min() <= u.max() <= hi + 1e-12
    res_inf, _ = lz.residual_norms(u, cs)
    assert res_inf < 1e-8, res_inf
    verify = json.loads(lz.verify(u, cs))
    assert verify["in_bracket"] and verify["res_inf"] < 1e-8

    # manufactured instance with a spatially varying reference solution
    x = [2.0 * math.pi * i / 64 for i in range(64)]
    u_star = lz.Field.from_values(grid, [1.5 + 0.5 * math.sin(t) for t in x])
    one = lz.Field.constant(grid, 1.0)
    zero = lz.Field.constant(grid, 0.0)
    two = lz.Field.constant(grid, 2.0)
    mcs = lz.CoefficientSet.manufactured(u_star, one, two, zero, one, zero, 3)
    res_inf, _ = lz.residual_norms(u_star, mcs)
    assert res_inf < 1e-9, res_inf

    # nonexistence: b = 0, h = 1 is certified; the benchmark is not
    ncs = lz.CoefficientSet.constants(grid, 3, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0)
    ne = json.loads(lz.nonexistence(ncs))
    assert ne["ne1"]["satisfied"] and ne["oracle_certified"] and ne["consistency"]
    certified, margin = lz.oracle(cs)
    assert not certified and margin <= 0.0

    z_bar, f_min = lz.pointwise_min_f(1.0, 0.0, 1.0, 3)
    assert abs(lz.ne1_bound(1.0, 0.0, 1.0, 3) - f_min) < 1e-9 * f_min
    assert z_bar > 0.0

    print("smoke test: PASS")


if __name__ == "__main__":
    main()
