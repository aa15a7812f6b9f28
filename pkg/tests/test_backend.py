"""The numpy fallback must reproduce the numba path bit for bit."""
import os
import subprocess
import sys

import numpy as np

from fracsim import _kernels as K
from fracsim.graph import write_graph
from fracsim.synth import random_labeled_digraph

DRIVER = """
import sys
import numpy as np
from fracsim import FSimConfig, iterate_to_convergence, load_graph
import fracsim._kernels as K

g1 = load_graph(sys.argv[1], sys.argv[2])
g2 = load_graph(sys.argv[3], sys.argv[4])
cfg = FSimConfig(variant=sys.argv[5], w_plus=0.4, w_minus=0.4,
                 label_fn="jw", matching_mode="greedy", workers=2)
table, report = iterate_to_convergence(g1, g2, cfg)
print(K.BACKEND)
print(report.iterations)
for u, v, s in table.items():
    print(u, v, repr(s))
"""


def run_driver(env_backend, files):
    env = dict(os.environ, FRACSIM_BACKEND=env_backend)
    proc = subprocess.run([sys.executable, "-c", DRIVER, *files],
                          capture_output=True, text=True, env=env,
                          timeout=600)
    assert proc.returncode == 0, proc.stderr
    lines = proc.stdout.splitlines()
    return lines[0], lines[1:]


def test_backends_bit_identical(tmp_path):
    g1 = random_labeled_digraph(12, edge_prob=0.25, n_labels=3, seed=101)
    g2 = random_labeled_digraph(11, edge_prob=0.25, n_labels=3, seed=202)
    write_graph(g1, tmp_path / "g1.tsv", tmp_path / "l1.tsv")
    write_graph(g2, tmp_path / "g2.tsv", tmp_path / "l2.tsv")
    files = [str(tmp_path / n) for n in ("g1.tsv", "l1.tsv", "g2.tsv",
                                         "l2.tsv")]
    for variant in ("s", "bj"):
        backend_nb, rows_nb = run_driver("numba", files + [variant])
        backend_np, rows_np = run_driver("numpy", files + [variant])
        assert backend_nb == "numba"
        assert backend_np == "numpy"
        assert rows_nb == rows_np  # repr-exact, hence bit-identical


def test_backend_env_flag_rejects_unknown():
    env = dict(os.environ, FRACSIM_BACKEND="fortran")
    proc = subprocess.run([sys.executable, "-c", "import fracsim"],
                          capture_output=True, text=True, env=env)
    assert proc.returncode != 0
    assert "FRACSIM_BACKEND" in proc.stderr


def test_default_backend_is_numba_here():
    assert K.BACKEND == "numba"
