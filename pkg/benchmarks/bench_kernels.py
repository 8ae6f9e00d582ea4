"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--pulses N] [--repeat R] [--json]

Times the Poisson pulse sampler and the brute-force success enumeration on
every available backend, and checks that they return identical results.
"""

import argparse
import json
import platform
import time

from hypercascade import kernels


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pulses", type=int, default=2_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--oracle-n", type=int, default=9)
    ap.add_argument("--json", action="store_true", help="emit machine-readable results")
    args = ap.parse_args(argv)

    cases = {
        "pulses mu=1 chain=2": lambda b: kernels.run_pulses(args.pulses, 2, 0.05, seed=1, mu=1.0, backend=b),
        "pulses mu=4 chain=5": lambda b: kernels.run_pulses(args.pulses, 5, 0.5, seed=1, mu=4.0, backend=b),
        f"enumerate n={args.oracle_n} m=5": lambda b: kernels.enumerate_success([0.5, 0.25, 0.125, 0.0625, 0.0625], args.oracle_n, b),
    }
    rows = []
    for name, fn in cases.items():
        results = {}
        for backend in kernels.available_backends():
            sec, out = best_of(lambda: fn(backend), args.repeat)
            key = out if isinstance(out, float) else (out.success_pulses, out.depth_hist.tolist())
            results[backend] = (sec, key)
        keys = [k for _, k in results.values()]
        agree = all(k == keys[0] for k in keys) if not isinstance(keys[0], float) else max(keys) - min(keys) < 1e-12
        row = {"case": name, "agree": agree, **{f"{b}_s": round(s, 4) for b, (s, _) in results.items()}}
        if "cython" in results:
            row["speedup"] = round(results["python"][0] / results["cython"][0], 1)
        rows.append(row)

    if args.json:
        print(json.dumps({"python": platform.python_version(), "rows": rows}, indent=2))
        return
    print(f"backends: {', '.join(kernels.available_backends())}  (default {kernels.BACKEND})")
    for r in rows:
        timing = "  ".join(f"{k[:-2]} {v:.3f}s" for k, v in r.items() if k.endswith("_s"))
        extra = f"  x{r['speedup']}" if "speedup" in r else ""
        print(f"{r['case']:<24} {timing}{extra}  identical={r['agree']}")


if __name__ == "__main__":
    main()
