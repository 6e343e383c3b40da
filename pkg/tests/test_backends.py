"""The numba and pure-Python loops must produce identical draws."""
import os
import subprocess
import sys

import pytest

SCRIPT = r"""
import hashlib, numpy as np
from cbpnet import AttachmentKernel, OutDegreeDistribution
from cbpnet._jit import backend
from cbpnet.collapse import generate_cbp
from cbpnet.coupling import coupling_success_rate
from cbpnet.engine import grow_marked_ctbp
from cbpnet.limit import sample_root_in_degrees, sample_stopped_batch

h = hashlib.sha256()
k = AttachmentKernel.linear(1, 0.5)
d = OutDegreeDistribution.uniform(1, 3)
run, g = generate_cbp(k, d, 400, np.random.default_rng(1))
for a in (run.sigma, run.parent, g.src, g.dst, g.mult):
    h.update(np.ascontiguousarray(a).tobytes())
t = grow_marked_ctbp(k, d, 1.5, np.random.default_rng(2))
h.update(t.birth.tobytes()); h.update(t.parent.tobytes())
b = sample_stopped_batch(k, d, 2.5, 200, np.random.default_rng(3))
h.update(b.size.tobytes()); h.update(b.R_root.tobytes())
h.update(sample_root_in_degrees(AttachmentKernel.constant(1.0), d, 1.0, 500, np.random.default_rng(4)).tobytes())
r = coupling_success_rate(k, d, 200, 2, 5, seed=6)
h.update(repr([row["success"] for row in r.rows]).encode())
print(backend(), h.hexdigest())
"""


def run(disable: bool) -> tuple[str, str]:
    env = dict(os.environ)
    env.pop("CBPNET_DISABLE_NUMBA", None)
    if disable:
        env["CBPNET_DISABLE_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
    name, digest = out.stdout.split()
    return name, digest


def test_backends_agree_bit_for_bit():
    pytest.importorskip("numba")
    jit_name, jit_hash = run(False)
    py_name, py_hash = run(True)
    assert (jit_name, py_name) == ("numba", "python")
    assert jit_hash == py_hash
