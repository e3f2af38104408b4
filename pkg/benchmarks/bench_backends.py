"""Compare the numba kernels against the pure-numpy fallback.

Runs each benchmark twice in subprocesses (DESSIN_NUMBA=1 / 0) so both
backends start from a clean import; prints a timing table.

Usage: python3 benchmarks/bench_backends.py [--quick]
"""

import argparse
import json
import os
import subprocess
import sys
import textwrap

_WORK = textwrap.dedent("""
    import json, time
    import numpy as np
    from dessinjulia import ComplexPoly, poly_from_roots
    from dessinjulia import fractal, roots
    from dessinjulia._backend import USE_NUMBA
    from dessinjulia._kernels import orbit_brent

    quick = {quick}
    p = poly_from_roots([-2, 3], [3, 2], -1/54) + 1
    c = p.as_array()
    out = {{"backend": "numba" if USE_NUMBA else "numpy"}}

    # warm up jit compilation outside the timers
    fractal.julia_cloud(p, 2000, rng_seed=0)
    roots(p)
    orbit_brent(c, 0.3 + 0.1j, 10000, 1e6, 1e-9)
    fractal.render_escape(p, (0, 0, 2, 2), (40, 40), 50)

    t = time.time()
    for _ in range(200):
        roots(p + (0.0))
    out["roots_x200"] = time.time() - t

    t = time.time()
    for k in range(2000):
        orbit_brent(c, 0.3 + 0.001j * k, 20000, 1e6, 1e-12)
    out["orbits_x2000"] = time.time() - t

    n = 220 if quick else 600
    t = time.time()
    fractal.render_escape(p, (0, 0, 2, 2), (n, n), 300)
    out[f"render_{{n}}x{{n}}"] = time.time() - t

    m = 50000 if quick else 200000
    t = time.time()
    fractal.julia_cloud(p, m, rng_seed=0)
    out[f"cloud_{{m}}"] = time.time() - t

    print(json.dumps(out))
""")


def run(backend_flag, quick):
    env = dict(os.environ, DESSIN_NUMBA=backend_flag)
    res = subprocess.run([sys.executable, "-c",
                          _WORK.format(quick=quick)],
                         capture_output=True, text=True, env=env, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()
    nb = run("1", args.quick)
    np_ = run("0", args.quick)
    keys = [k for k in nb if k != "backend"]
    w = max(len(k) for k in keys)
    print(f"{'benchmark':<{w}}  {'numba':>9}  {'numpy':>9}  speedup")
    for k in keys:
        print(f"{k:<{w}}  {nb[k]:>8.3f}s  {np_[k]:>8.3f}s  "
              f"{np_[k] / nb[k]:>6.1f}x")


if __name__ == "__main__":
    main()
