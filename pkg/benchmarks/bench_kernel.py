"""Timing comparison of the compiled kernels against the numpy fallback.

Imports both implementations directly (the package itself picks one at
import time; see banachlab.kernel), checks they agree, and reports
per-call times.  Run as a script:

    python3 benchmarks/bench_kernel.py [--reps 20000]
"""

import argparse
import time

import numpy as np

from banachlab import _kernel_py

try:
    from banachlab import _kernel
except ImportError:
    _kernel = None


def _per_call(fn, args, reps):
    fn(*args)  # warm up
    t0 = time.perf_counter()
    for _ in range(reps):
        fn(*args)
    return (time.perf_counter() - t0) / reps


def _cases(seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for n in (8, 64, 1024):
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        w = np.ones(n, dtype=np.float64)
        for p, tag in ((1.0, "1"), (1.5, "1.5"), (2.0, "2"), (3.0, "3"),
                       (0.0, "sup")):
            out.append(("lp_norm  n=%-5d p=%-4s" % (n, tag),
                        "lp_norm", (x, w, p)))
    for deg in (7, 31):
        c = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
        out.append(("poly_sup deg=%-2d grid=4096" % deg,
                    "poly_sup", (c, 4096)))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reps", type=int, default=20000,
                    help="calls per measurement (poly_sup uses reps/20)")
    args = ap.parse_args()
    if _kernel is None:
        print("compiled extension not built; showing the fallback only")
    print("%-28s %12s %12s %9s" % ("case", "python us", "c us", "speedup"))
    for label, name, call_args in _cases():
        reps = args.reps if name == "lp_norm" else max(1, args.reps // 20)
        py_fn = getattr(_kernel_py, name)
        t_py = _per_call(py_fn, call_args, reps)
        if _kernel is None:
            print("%-28s %12.3f %12s %9s" % (label, t_py * 1e6, "-", "-"))
            continue
        c_fn = getattr(_kernel, name)
        got_py, got_c = py_fn(*call_args), c_fn(*call_args)
        if abs(got_py - got_c) > 1e-12 * max(1.0, abs(got_py)):
            raise SystemExit(
                "backends disagree on %s: %r vs %r" % (label, got_py, got_c)
            )
        t_c = _per_call(c_fn, call_args, reps)
        print("%-28s %12.3f %12.3f %8.1fx"
              % (label, t_py * 1e6, t_c * 1e6, t_py / t_c))


if __name__ == "__main__":
    main()
