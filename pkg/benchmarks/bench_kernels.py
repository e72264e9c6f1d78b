"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Times the exhaustive 3-bit classical-process search and the omega-mediation
sum for the 3-site Ising chain under each available backend.
"""

import argparse
import time

import numpy as np

from proccontext import _pykernels, classical, thermal

try:
    from proccontext import _kernels
except ImportError:
    _kernels = None


def classical_workload():
    spec = classical.StateSpaceSpec.uniform(3, 2)
    tables = [classical.DeterministicProcess.from_index(spec, i).full_table() for i in range(spec.n_processes())]
    k = np.array([2, 2, 2], dtype=np.int64)
    return lambda mod: sum(bool(mod.process_valid(t, k, k)) for t in tables)


def mediation_workload():
    model = thermal.ising_model(3, beta=1.0)
    fvals, idx, offsets = [], [], [0]
    for x in thermal.all_choices(3):
        for c in thermal.configs_for_choice(model, x):
            fvals.append(thermal.frame_function(model, c))
            idx.append(model.configs.index(c))
        offsets.append(len(fvals))
    args = (np.array(fvals), np.array(offsets, dtype=np.int64), np.array(idx, dtype=np.int64), len(model.configs))
    return lambda mod: mod.omega_mediation(*args)


def best_of(fn, mod, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(mod)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    backends = [("python", _pykernels)] + ([("cython", _kernels)] if _kernels is not None else [])
    if _kernels is None:
        print("compiled extension not built; timing the fallback only")
    print(f"{'workload':<28}" + "".join(f"{name:>12}" for name, _ in backends) + "     speedup")
    for label, make in (("3-bit process search", classical_workload), ("omega-mediation, N=3", mediation_workload)):
        fn = make()
        times = [best_of(fn, mod, args.repeat) for _, mod in backends]
        speedup = f"{times[0] / times[-1]:10.1f}x" if len(times) > 1 else ""
        print(f"{label:<28}" + "".join(f"{t:11.4f}s" for t in times) + speedup)


if __name__ == "__main__":
    main()
