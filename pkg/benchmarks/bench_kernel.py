"""Compare the compiled kernel with the pure-Python fallback.

Kernel-level timings call both modules directly on the same inputs;
end-to-end timings run a model check in a subprocess per backend, since
the backend is fixed at import time.

    python benchmarks/bench_kernel.py [--repeat 5]
"""

import argparse
import importlib
import os
import random
import subprocess
import sys
import timeit

from ktbrst.algebra import FieldDecl, GradedPoly, prolong
from ktbrst import _kernel_py

E2E = """
import time
from ktbrst import BACKEND
from ktbrst.models import build_yang_mills, su2
from ktbrst.brst import build_brst_operator, build_proper_solution, check_master_equation
from ktbrst.derivations import is_nilpotent
m = build_yang_mills(su2(), 3)
t = time.perf_counter()
assert is_nilpotent(build_brst_operator(m))
assert check_master_equation(m, build_proper_solution(m))
print(BACKEND, time.perf_counter() - t)
"""


def random_poly(rng, fields, n_terms=30, n_factors=4, n=3):
    p = GradedPoly()
    for _ in range(n_terms):
        t = GradedPoly.const(rng.randint(-5, 5) or 1)
        for _ in range(rng.randint(1, n_factors)):
            f = rng.choice(fields)
            t = t * f(*[rng.randrange(n) for _ in range(rng.randint(0, 2))])
        p = p + t
    return p


def kernel_workloads(seed=0):
    rng = random.Random(seed)
    fields = [FieldDecl("y", 0), FieldDecl("z", 0), FieldDecl("c", 1, ghost_number=1),
              FieldDecl("e", 1, ghost_number=1)]
    a, b = random_poly(rng, fields), random_poly(rng, fields)
    ta, tb = dict(a.items()), dict(b.items())
    shift = {v: prolong(v, 0) for v in a.variables()}
    comp = {v: tb for v in sorted(a.variables()) if v.parity == 0}
    v0 = sorted(a.variables())[0]
    return {
        "poly_mul": lambda k: k.poly_mul(ta, tb),
        "partial": lambda k: k.partial(ta, v0, False),
        "replace_each": lambda k: k.replace_each(ta, shift),
        "apply_left": lambda k: k.apply_left(ta, comp),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--no-e2e", action="store_true", help="skip the end-to-end runs")
    args = ap.parse_args(argv)
    try:
        cy = importlib.import_module("ktbrst._kernel")
    except ImportError:
        cy = None
        print("compiled kernel not built; showing the Python timings only")

    print(f"{'workload':<14}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for name, fn in kernel_workloads().items():
        py_t = min(timeit.repeat(lambda: fn(_kernel_py), number=20, repeat=args.repeat)) / 20
        if cy is None:
            print(f"{name:<14}{py_t * 1e3:>14.3f}")
            continue
        assert fn(cy) == fn(_kernel_py)
        cy_t = min(timeit.repeat(lambda: fn(cy), number=20, repeat=args.repeat)) / 20
        print(f"{name:<14}{py_t * 1e3:>14.3f}{cy_t * 1e3:>14.3f}{py_t / cy_t:>9.1f}x")

    if args.no_e2e:
        return
    print("\nyang-mills su2 n=3: BRST nilpotency + master equation")
    for pure in ("1", "0"):
        env = dict(os.environ, KTBRST_PURE_PYTHON=pure)
        out = subprocess.run([sys.executable, "-c", E2E], env=env, capture_output=True,
                             text=True, check=True).stdout.split()
        print(f"  {out[0]:<8}{float(out[1]):8.3f} s")


if __name__ == "__main__":
    main()
