"""Time the hot loops with numba and with the pure-Python fallback.

Each backend runs in a fresh interpreter because the choice is fixed at import.

    python3 benchmarks/bench_kernels.py [--scale 1.0]
"""
import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, sys, time
import numpy as np
from cbpnet import AttachmentKernel, OutDegreeDistribution
from cbpnet._jit import backend
from cbpnet.collapse import generate_cbp
from cbpnet.engine import grow_marked_ctbp
from cbpnet.limit import sample_root_in_degrees, sample_stopped_batch

scale = float(sys.argv[1])
k = AttachmentKernel.linear(1, 0.5)
h = OutDegreeDistribution.uniform(1, 3)
cases = {
    "lifted_run+collapse": lambda r: generate_cbp(k, h, int(20_000 * scale), r),
    "marked_tree": lambda r: grow_marked_ctbp(k, h, 3.0, r),
    "stopped_batch": lambda r: sample_stopped_batch(k, h, 2.5, int(1_000 * scale), r),
    "root_degrees": lambda r: sample_root_in_degrees(k, h, 2.5, int(20_000 * scale), r),
}
out = {"backend": backend()}
for name, fn in cases.items():
    fn(np.random.default_rng(0))  # warm-up (compilation)
    t0 = time.perf_counter()
    fn(np.random.default_rng(1))
    out[name] = time.perf_counter() - t0
print(json.dumps(out))
"""


def run(disable: bool, scale: float) -> dict:
    env = dict(os.environ)
    env.pop("CBPNET_DISABLE_NUMBA", None)
    if disable:
        env["CBPNET_DISABLE_NUMBA"] = "1"
    res = subprocess.run([sys.executable, "-c", WORKLOAD, str(scale)], env=env, capture_output=True,
                         text=True, check=True)
    return json.loads(res.stdout)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", type=float, default=1.0, help="multiply workload sizes")
    args = ap.parse_args()
    fast, slow = run(False, args.scale), run(True, args.scale)
    print(f"{'case':<22}{fast['backend']:>10}{slow['backend']:>10}{'speedup':>10}")
    for name in fast:
        if name == "backend":
            continue
        print(f"{name:<22}{fast[name]:>9.3f}s{slow[name]:>9.3f}s{slow[name] / fast[name]:>9.1f}x")


if __name__ == "__main__":
    main()
