"""Acceptance criteria, one test each, every one printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

import itertools
import json
import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from proccontext import classical, cli, contradiction, linalg, quantum, thermal
from proccontext.linalg import HADAMARD, I2, X, Y, Z

PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}
# sign pattern (XX, YY, ZZ) of each printed expansion, in the order 1, X, Y, Z
PRINTED_SIGNS = [(1, -1, 1), (1, 1, -1), (-1, -1, -1), (-1, 1, 1)]


def _two_region_oracle():
    """Literal brute force over 2-bit processes with dict-valued functions."""
    funcs = [{0: a, 1: b} for a in range(2) for b in range(2)]
    ops = [(a, b) for a in range(2) for b in range(2)]
    valid = []
    for wa, wb in itertools.product(funcs, repeat=2):
        if all(
            sum(wa[fb[lb]] == la and wb[fa[la]] == lb for la in range(2) for lb in range(2)) == 1
            for fa, fb in itertools.product(ops, repeat=2)
        ):
            valid.append(((wa[0], wa[1]), (wb[0], wb[1])))
    return valid


def criterion_1():
    with tempfile.TemporaryDirectory() as d:
        out = Path(d) / "report.json"
        t0 = time.perf_counter()
        code = cli.main(["contradiction-demo", "--unitary", "hadamard", "--out", str(out)])
        elapsed = time.perf_counter() - t0
        rep = json.loads(out.read_text(encoding="utf-8"))["result"]
    wit = contradiction.find_contradiction(HADAMARD)
    a, b = wit.decomposition_a.parts, wit.decomposition_b.parts
    failed = sum(linalg.proportionality(p.matrix, q.matrix) is None for p in a for q in b)
    dist = max(rep["mix_distance_a"], rep["mix_distance_b"])
    ok = code == 0 and dist <= 1e-10 and failed == 16 and not rep["proportional_pairs"] and elapsed < 1.0
    return ok, f"mix distance {dist:.1e}, {failed}/16 proportionality tests fail, {elapsed:.2f}s"


def criterion_2():
    a, b = contradiction.build_pauli_decompositions(HADAMARD)
    worst = 0.0
    for parts, u in ((a.parts, I2), (b.parts, HADAMARD)):
        for (name, p), signs, part in zip(PAULIS.items(), PRINTED_SIGNS, parts):
            conj = [u @ s @ u.conj().T for s in (X, Y, Z)]
            printed = np.eye(4) + sum(sg * np.kron(s, c) for sg, s, c in zip(signs, (X, Y, Z), conj))
            # Pauli coefficients of the printed matrix, compared entry by entry
            want = linalg.pauli_coefficients(printed)
            got = contradiction.unit_identity_expansion(part.matrix)
            worst = max(worst, max(abs(got[k] - want[k]) for k in want))
            worst = max(worst, float(np.max(np.abs(2 * part.matrix - printed))))
    w3 = {k: v for k, v in contradiction.unit_identity_expansion(a.parts[2].matrix).items() if abs(v) > 1e-12}
    ok = worst <= 1e-12 and w3 == pytest.approx({"II": 1, "XX": -1, "YY": -1, "ZZ": -1}, abs=1e-12)
    return ok, f"max coefficient deviation {worst:.1e} over 8 processes"


def criterion_3():
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        d = int(rng.integers(2, 5))
        rho = linalg.random_density_matrix(d, rng)
        effect = linalg.random_density_matrix(d, rng)
        effect = effect / np.linalg.eigvalsh(effect).max() * rng.uniform()  # 0 <= E <= 1
        p = quantum.born_probability([quantum.povm_event(effect)], quantum.state_process(rho))
        worst = max(worst, abs(p - np.trace(rho @ effect).real))
    elapsed = time.perf_counter() - t0
    return worst <= 1e-10 and elapsed < 5.0, f"max |p - tr(rho E)| {worst:.1e}, {elapsed:.2f}s"


def _random_process(rng):
    sys.path.insert(0, str(Path(__file__).parent))
    from conftest import random_valid_process

    return random_valid_process(rng)


def criterion_4():
    rng = np.random.default_rng(4)
    worst_sum, worst_neg = 0.0, 0.0
    for _ in range(100):
        w = _random_process(rng)
        instruments = [
            quantum.random_instrument(r.dim_in, r.dim_out, int(rng.integers(1, 4)), rng) for r in w.regions
        ]
        probs = [quantum.born_probability(ev, w) for ev in itertools.product(*instruments)]
        worst_sum = max(worst_sum, abs(sum(probs) - 1))
        worst_neg = max(worst_neg, -min(probs))
    ok = worst_sum <= 1e-9 and worst_neg <= 1e-9
    return ok, f"max |sum - 1| {worst_sum:.1e}, most negative {-worst_neg:.1e}"


def criterion_5():
    spec = classical.StateSpaceSpec.uniform(2, 2)
    t0 = time.perf_counter()
    rep = classical.classify_processes(spec)
    elapsed = time.perf_counter() - t0
    oracle = _two_region_oracle()
    same = sorted(p.tables for p in rep.valid) == sorted(oracle)
    ok = rep.n_processes == 16 and rep.all_valid_have_constant and same and elapsed < 1.0
    return ok, f"{rep.n_valid}/16 valid (oracle {len(oracle)}), all with a constant component, {elapsed:.3f}s"


def criterion_6():
    spec = classical.StateSpaceSpec.uniform(3, 2)
    t0 = time.perf_counter()
    rep = classical.classify_processes(spec, jobs=1)
    elapsed = time.perf_counter() - t0
    n = len(rep.without_constant)
    example = rep.without_constant[0].to_dict() if n else None
    ok = rep.n_processes == 4096 and n >= 1 and elapsed < 30.0
    return ok, f"{rep.n_valid} valid, {n} without a constant component (e.g. {example}), {elapsed:.2f}s"


def criterion_7():
    t0 = time.perf_counter()
    worst = 0.0
    for n in (2, 3):
        for beta in (0.0, 0.5, 1.0):
            worst = max(worst, thermal.verify_omega_mediation(thermal.ising_model(n, beta=beta)).max_residual)
    elapsed = time.perf_counter() - t0
    return worst < 1e-12 and elapsed < 60.0, f"max residual {worst:.1e}, {elapsed:.2f}s"


def criterion_8():
    rng = np.random.default_rng(8)
    wit = contradiction.find_contradiction(HADAMARD)
    processes = wit.decomposition_a.parts + wit.decomposition_b.parts + [wit.target]
    model = quantum.crude_model(processes)
    worst = 0.0
    for _ in range(50):
        w = processes[int(rng.integers(len(processes)))]
        events = [
            quantum.random_instrument(r.dim_in, r.dim_out, 3, rng).events[int(rng.integers(3))] for r in w.regions
        ]
        worst = max(worst, abs(model.predict(events, w) - quantum.born_probability(events, w)))
    normalised = quantum.check_eta_instrument(model, processes)
    return worst <= 1e-10 and normalised, f"max |model - born| {worst:.1e} over 50 event tuples"


def criterion_9():
    beta = 1.0
    model = thermal.ising_model(2, beta=beta)
    both = thermal.site_marginal(model, (1, 1), 1)
    alone = thermal.site_marginal(model, (1, 0), 1)
    tv = thermal.total_variation(both, alone)
    # oracle: the nine configurations, weight exp(beta * l1 * l2), restricted to (1, 1)
    w = {(a, b): math.exp(beta * a * b) for a in (0, 1, -1) for b in (0, 1, -1) if a and b}
    z = sum(w.values())
    oracle_both = {v: sum(p for (a, _), p in w.items() if a == v) / z for v in (1, -1)}
    oracle_tv = 0.5 * sum(abs(oracle_both[v] - 0.5) for v in (1, -1))
    return tv > 0.05, f"total variation {tv:.3g} (enumeration oracle {oracle_tv:.3g}), needs > 0.05"


CRITERIA = [
    (1, "contradiction reproduction", criterion_1),
    (2, "Pauli expansions of the eight processes", criterion_2),
    (3, "single-region Born reduction", criterion_3),
    (4, "frame normalisation", criterion_4),
    (5, "two-region constancy", criterion_5),
    (6, "three-region non-constant process", criterion_6),
    (7, "omega-mediation identity", criterion_7),
    (8, "crude-model reproduction", criterion_8),
    (9, "retrocausal signature, N=2 Ising", criterion_9),
]


def _line(number, title, ok, detail):
    return f"AC-{number} {'PASS' if ok else 'FAIL'} [{title}] {detail}"


@pytest.mark.parametrize("number, title, check", CRITERIA, ids=[f"AC-{n}" for n, _, _ in CRITERIA])
def test_criterion(number, title, check, capsys):
    ok, detail = check()
    with capsys.disabled():
        print("\n" + _line(number, title, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for number, title, check in CRITERIA:
        ok, detail = check()
        results.append(ok)
        print(_line(number, title, ok, detail))
    sys.exit(0 if all(results) else 1)
