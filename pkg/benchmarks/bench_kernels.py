"""Numba kernels vs the plain numpy fallback.

Each backend runs in a fresh interpreter because the choice is made at import
time from RANKBOUND_DISABLE_NUMBA. Compile time is reported separately from
the steady-state timings.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, sys, time
import numpy as np
t0 = time.perf_counter()
from rankbound import _accel, _kernels, harness, measures, states
rho = states.random_rank_r(2, 3, 1)
measures.singlet_fraction_optimize(rho, 1, 0)
harness.search_counterexample("lin_bound", 2, restarts=1, seed=0)
warm = time.perf_counter() - t0
repeat = int(sys.argv[1])

def best(fn):
    ts = []
    for _ in range(repeat):
        s = time.perf_counter(); fn(); ts.append(time.perf_counter() - s)
    return min(ts)

x = np.random.default_rng(0).standard_normal(24)
out = {
    "backend": _accel.backend(),
    "import_and_compile_s": warm,
    "claim_margin_x1000_s": best(lambda: [_kernels.claim_margin(2, x, 3, 5 / 6) for _ in range(1000)]),
    "fef_optimize_8_restarts_x20_s": best(lambda: [measures.singlet_fraction_optimize(rho, 8, k) for k in range(20)]),
    "fef_qutrit_4_restarts_s": best(lambda: measures.singlet_fraction_optimize(states.random_rank_r(3, 4, 2), 4, 0)),
    "search_conc_r2_4_restarts_s": best(lambda: harness.search_counterexample("conc_bound_state", 2, restarts=4)),
}
print(json.dumps(out))
"""


def run(disable: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("RANKBOUND_DISABLE_NUMBA", None)
    if disable:
        env["RANKBOUND_DISABLE_NUMBA"] = "1"
    proc = subprocess.run([sys.executable, "-c", WORKLOAD, str(repeat)], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    jit, py = run(False, args.repeat), run(True, args.repeat)
    keys = [k for k in jit if k != "backend"]
    print(f"{'workload':34s} {'numba':>10s} {'numpy':>10s} {'speedup':>8s}")
    for k in keys:
        print(f"{k:34s} {jit[k]:10.4f} {py[k]:10.4f} {py[k] / jit[k]:8.1f}")


if __name__ == "__main__":
    main()
