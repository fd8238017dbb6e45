"""Benchmark the hot kernels with and without numba compilation.

Runs each kernel in the current process, then re-runs itself in a subprocess
with BRAINREP_NUMBA flipped so both execution paths are measured on the same
workload.  Usage: python benchmarks/bench_kernels.py [--inner]
"""

import os
import subprocess
import sys
import time

import numpy as np

from brainrep._kernels import NUMBA_ENABLED
from brainrep.estimator import ExactEnsemble
from brainrep.graph import DegreeSequence, degree_sequence
from brainrep.sampler import (
    SamplerConfig,
    sample_degree_constrained,
    sample_networks,
)
from brainrep.terms import default_group_model

N = 90
THETA = np.array([-2.7, 1.0, -0.3])
TOGGLE_STEPS = 500_000
SWAP_STEPS = 200_000


def run_benchmarks():
    model = default_group_model(0.75)
    label = "numba" if NUMBA_ENABLED else "pure"
    # warm-up triggers compilation so steady-state throughput is measured
    warm = SamplerConfig(burn_in=2_000, thin=100, seed=0, n_samples=2)
    sample_networks(model, THETA, N, warm)

    t0 = time.perf_counter()
    cfg = SamplerConfig(burn_in=TOGGLE_STEPS - 100, thin=100, seed=1, n_samples=1)
    ss = sample_networks(model, THETA, N, cfg)
    toggle_dt = time.perf_counter() - t0

    ref = degree_sequence(ss.graphs[0])
    warm_swap = SamplerConfig(burn_in=2_000, thin=100, seed=0, n_samples=2,
                              proposal="degree_swap", init="degree")
    sample_degree_constrained(model, THETA, ref, warm_swap)
    t0 = time.perf_counter()
    cfg = SamplerConfig(burn_in=SWAP_STEPS - 100, thin=100, seed=1, n_samples=1,
                        proposal="degree_swap", init="degree")
    sample_degree_constrained(model, THETA, ref, cfg)
    swap_dt = time.perf_counter() - t0

    g = ss.graphs[0]
    g.hop_distances()  # warm-up
    t0 = time.perf_counter()
    for _ in range(50):
        g.hop_distances()
    bfs_dt = (time.perf_counter() - t0) / 50

    ExactEnsemble(4, model)  # warm-up
    t0 = time.perf_counter()
    ExactEnsemble(6, model)
    enum_dt = time.perf_counter() - t0

    print(f"[{label}] toggle chain : {TOGGLE_STEPS / toggle_dt / 1e6:8.2f} M proposals/s", flush=True)
    print(f"[{label}] swap chain   : {SWAP_STEPS / swap_dt / 1e6:8.2f} M proposals/s", flush=True)
    print(f"[{label}] bfs 90 nodes : {bfs_dt * 1e3:8.3f} ms / all-pairs pass", flush=True)
    print(f"[{label}] enum n=6     : {enum_dt:8.3f} s / 32768 graphs", flush=True)


def main():
    run_benchmarks()
    if "--inner" in sys.argv:
        return
    env = dict(os.environ)
    env["BRAINREP_NUMBA"] = "0" if NUMBA_ENABLED else "1"
    other = "pure-python" if NUMBA_ENABLED else "numba"
    print(f"--- re-running with the {other} path ---", flush=True)
    subprocess.run([sys.executable, os.path.abspath(__file__), "--inner"],
                   env=env, check=True)


if __name__ == "__main__":
    main()
