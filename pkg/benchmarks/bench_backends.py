"""Compare the numba kernels against the interpreted fallback.

Each backend runs in its own interpreter because the choice is made at
import time from ESAVCPD_DISABLE_NUMBA.

    python benchmarks/bench_backends.py [--steps N] [--repeat R]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from esavcpd import BACKEND, experiment_field, make_stepper, ParticleState
steps, repeat = int(sys.argv[1]), int(sys.argv[2])
init = ParticleState([0.0, 1.0, 0.1], [0.09, 0.05, 0.2])
model = experiment_field(1.0)
out = {}
for scheme in ("s1-sav", "s1-esav", "s2-esav", "s1-mesav", "s2-mesav"):
    st = make_stepper(scheme, model, init, c0=1.0)
    st.run(1e-2, 10)
    ts = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        res = st.run(1e-2, steps)
        ts.append(time.perf_counter() - t0)
    out[scheme] = {"median_s": float(np.median(ts)), "final_x": res[3][-1].tolist()}
print(json.dumps({"backend": BACKEND, "results": out}))
"""


def run(backend, steps, repeat):
    env = dict(os.environ, ESAVCPD_DISABLE_NUMBA="1" if backend == "numpy" else "0")
    out = subprocess.run([sys.executable, "-c", WORKER, str(steps), str(repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=10_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    fast, slow = run("numba", args.steps, args.repeat), run("numpy", args.steps, args.repeat)
    print(f"{args.steps} steps, median of {args.repeat}")
    print(f"{'scheme':10s} {'numba [s]':>12s} {'numpy [s]':>12s} {'speedup':>9s} {'max |dx|':>10s}")
    for scheme, a in fast["results"].items():
        b = slow["results"][scheme]
        dx = max(abs(p - q) for p, q in zip(a["final_x"], b["final_x"]))
        print(f"{scheme:10s} {a['median_s']:12.4e} {b['median_s']:12.4e} "
              f"{b['median_s'] / a['median_s']:9.1f} {dx:10.2e}")


if __name__ == "__main__":
    main()
