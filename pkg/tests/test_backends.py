"""Numba kernels against their plain-Python execution."""

import json
import os
import subprocess
import sys

import pytest

from rankbound import _accel, harness, measures, states

SCRIPT = """
import json
from rankbound import _accel, harness, measures, states
vals = [measures.singlet_fraction_optimize(states.random_rank_r(2, r, 40 + r), 4, 1) for r in (1, 2, 3, 4)]
q = measures.singlet_fraction_optimize(states.random_rank_r(3, 2, 5), 2, 0)
s = harness.search_counterexample("conc_bound_state", 2, restarts=2, seed=0)
print(json.dumps({"backend": _accel.backend(), "fef": vals, "qutrit": q, "search": s.margin}))
"""


def _run(disable):
    env = dict(os.environ)
    if disable:
        env["RANKBOUND_DISABLE_NUMBA"] = "1"
    else:
        env.pop("RANKBOUND_DISABLE_NUMBA", None)
    out = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


@pytest.mark.slow
def test_fallback_matches_numba():
    jit, py = _run(False), _run(True)
    assert jit["backend"] == "numba" and py["backend"] == "numpy"
    for a, b in zip(jit["fef"], py["fef"]):
        assert a == pytest.approx(b, abs=1e-12)
    assert jit["qutrit"] == pytest.approx(py["qutrit"], abs=1e-9)
    assert jit["search"] == pytest.approx(py["search"], abs=1e-9)


def test_backend_flag_in_process():
    assert _accel.backend() in ("numba", "numpy")
    if os.environ.get("RANKBOUND_DISABLE_NUMBA") == "1":
        assert not _accel.USE_NUMBA
