"""Command-line entry point: ``proccontext <subcommand> ...``.

Every subcommand writes a JSON report (sorted keys, UTF-8) to ``--out`` or
stdout. Exit status is 0 on a passing verdict, 1 on a verified failure and 2
on bad input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, classical, contradiction, linalg, quantum, thermal
from ._backend import BACKEND
from .errors import ProcContextError

log = logging.getLogger("proccontext")

SUBCOMMANDS = (
    "validate-process",
    "born",
    "contradiction-demo",
    "classical-search",
    "wharton-verify",
    "crude-model-check",
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    inputs: dict = field(default_factory=dict)
    out: str | None = None
    tol: float = linalg.DEFAULT_TOL
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise InputError(f"unknown subcommand {self.subcommand!r}")
        if not self.tol > 0:
            raise InputError("tolerance must be positive")
        if self.seed < 0 or self.jobs < 1:
            raise InputError("seed must be >= 0 and jobs >= 1")


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _complex_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _resolve_unitary(spec: str) -> np.ndarray:
    key = spec.lower()
    if key in contradiction.NAMED_UNITARIES:
        return contradiction.NAMED_UNITARIES[key]
    if Path(spec).exists():
        return linalg.matrix_from_json(_load_json(spec))
    raise InputError(f"unknown unitary {spec!r}; use one of {sorted(contradiction.NAMED_UNITARIES)} or a matrix file")


# --- subcommands -------------------------------------------------------------


def _validate_process(cfg: RunConfig) -> tuple[dict, str, int]:
    w = quantum.process_from_json(_load_json(cfg.inputs["process"]), cfg.tol)
    rep = quantum.validate_process(w, samples=cfg.inputs["samples"], tol=cfg.tol, seed=cfg.seed)
    verdict = "valid" if rep.passed else "invalid"
    return {"validation": rep.to_dict()}, verdict, EXIT_OK if rep.passed else EXIT_FAIL


def _born(cfg: RunConfig) -> tuple[dict, str, int]:
    w = quantum.process_from_json(_load_json(cfg.inputs["process"]), cfg.tol)
    raw = _load_json(cfg.inputs["events"])
    items = raw["events"] if isinstance(raw, dict) else raw
    if not isinstance(items, list):
        raise InputError("events file must hold a list of CP maps")
    events = [quantum.cpmap_from_json(e, cfg.tol) for e in items]
    p = quantum.born_probability(events, w, cfg.tol)
    return {"probability": p}, "ok", EXIT_OK


def _contradiction_demo(cfg: RunConfig) -> tuple[dict, str, int]:
    u = _resolve_unitary(cfg.inputs["unitary"])
    wit = contradiction.find_contradiction(u, cfg.tol)
    a, b = wit.decomposition_a, wit.decomposition_b

    def parts(dec, prefix):
        return {
            f"{prefix}{i + 1}": {
                "pauli_coefficients": linalg.pauli_coefficients(p.matrix),
                "unit_identity_expansion": contradiction.unit_identity_expansion(p.matrix),
                "weight": q,
            }
            for i, (q, p) in enumerate(zip(dec.weights, dec.parts))
        }

    # for unitaries like the identity the two decompositions share parts
    both = list(a.parts)
    for p in b.parts:
        if all(linalg.frobenius_distance(p.matrix, q.matrix) > cfg.tol for q in both):
            both.append(p)
    candidates = {
        "crude_over_decomposition_a": quantum.crude_model(a.parts),
        "crude_over_target": quantum.crude_model([wit.target]),
        "crude_over_both_decompositions": quantum.crude_model(both),
    }
    checks = {
        name: contradiction.support_partition_check(wit, cand).to_dict()
        for name, cand in candidates.items()
    }
    report = {
        "unitary": linalg.matrix_to_json(u),
        "target": linalg.matrix_to_json(wit.target.matrix),
        "mix_distance_a": linalg.frobenius_distance(a.mix().matrix, wit.target.matrix),
        "mix_distance_b": linalg.frobenius_distance(b.mix().matrix, wit.target.matrix),
        "decomposition_a": parts(a, "A"),
        "decomposition_b": parts(b, "B"),
        "proportionality_tests": len(a.parts) * len(b.parts),
        "proportional_pairs": [[j, k, _complex_pair(c)] for j, k, c in wit.proportional_pairs],
        "witness_valid": wit.valid,
        "support_checks": checks,
    }
    if wit.valid:
        return report, "contradiction-confirmed", EXIT_OK
    return report, "no-contradiction", EXIT_FAIL


def _classical_search(cfg: RunConfig) -> tuple[dict, str, int]:
    n, k = cfg.inputs["regions"], cfg.inputs["cardinality"]
    if n < 1 or k < 1:
        raise InputError("regions and cardinality must be positive")
    spec = classical.StateSpaceSpec.uniform(n, k)
    rep = classical.classify_processes(spec, jobs=cfg.jobs)
    body = {"classification": rep.to_dict()}
    if n <= 2:
        if rep.all_valid_have_constant:
            return body, "constant-component-confirmed", EXIT_OK
        return body, "constant-component-violated", EXIT_FAIL
    if rep.without_constant:
        return body, "non-constant-valid-found", EXIT_OK
    return body, "no-non-constant-valid", EXIT_OK


def _wharton_verify(cfg: RunConfig) -> tuple[dict, str, int]:
    if cfg.inputs.get("model"):
        model = thermal.model_from_json(_load_json(cfg.inputs["model"]))
    elif cfg.inputs.get("ising"):
        model = thermal.ising_model(cfg.inputs["ising"], beta=cfg.inputs["beta"])
    else:
        raise InputError("give --model or --ising")
    rep = thermal.verify_omega_mediation(model, tol=cfg.inputs["mediation_tol"])
    body = {"model": thermal.model_to_json(model), "mediation": rep.to_dict()}
    if cfg.out:
        csv_path = Path(cfg.out).with_suffix(".csv")
        csv_path.write_text(rep.to_csv(), encoding="utf-8")
        body["csv"] = csv_path.name
    return body, ("omega-mediation-verified" if rep.passed else "omega-mediation-failed"), (
        EXIT_OK if rep.passed else EXIT_FAIL
    )


def _crude_model_check(cfg: RunConfig) -> tuple[dict, str, int]:
    processes = [quantum.process_from_json(_load_json(p), cfg.tol) for p in cfg.inputs["process"]]
    model = quantum.crude_model(processes, cfg.tol)
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    n_checks = 0
    for _ in range(cfg.inputs["samples"]):
        i = int(rng.integers(len(processes)))
        w = processes[i]
        events = []
        for r in w.regions:
            ins = quantum.random_instrument(r.dim_in, r.dim_out, 2, rng)
            events.append(ins.events[int(rng.integers(len(ins)))])
        worst = max(worst, abs(model.predict(events, w) - quantum.born_probability(events, w, cfg.tol)))
        n_checks += 1
        if len(processes) > 1 and all(p.regions == w.regions for p in processes):
            weights = rng.dirichlet(np.ones(len(processes)))
            mix = quantum.convex_mix(processes, weights / weights.sum())
            worst = max(worst, abs(model.probability(events, weights) - quantum.born_probability(events, mix, cfg.tol)))
            n_checks += 1
    normalised = quantum.check_eta_instrument(model, processes, cfg.tol)
    ok = worst < cfg.tol and normalised
    body = {"max_residual": worst, "checks": n_checks, "g_normalised": normalised}
    return body, ("reproduced" if ok else "mismatch"), (EXIT_OK if ok else EXIT_FAIL)


HANDLERS = {
    "validate-process": _validate_process,
    "born": _born,
    "contradiction-demo": _contradiction_demo,
    "classical-search": _classical_search,
    "wharton-verify": _wharton_verify,
    "crude-model-check": _crude_model_check,
}


def dispatch(cfg: RunConfig) -> int:
    try:
        body, verdict, status = HANDLERS[cfg.subcommand](cfg)
    except (InputError, ProcContextError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = {
        "tool": "proccontext",
        "version": __version__,
        "subcommand": cfg.subcommand,
        "inputs": cfg.inputs,
        "seed": cfg.seed,
        "tolerances": {"tol": cfg.tol},
        "verdict": verdict,
        "result": body,
    }
    text = json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    log.info("%s: %s (backend %s)", cfg.subcommand, verdict, BACKEND)
    return status


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="report path (default: stdout)")
    common.add_argument("--tol", type=float, default=linalg.DEFAULT_TOL)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1)

    parser = argparse.ArgumentParser(prog="proccontext", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("validate-process", parents=[common], help="check a process matrix is valid")
    p.add_argument("--process", required=True)
    p.add_argument("--samples", type=int, default=20)

    p = sub.add_parser("born", parents=[common], help="generalised Born-rule probability")
    p.add_argument("--process", required=True)
    p.add_argument("--events", required=True)

    p = sub.add_parser("contradiction-demo", parents=[common], help="run the two-decomposition no-go check")
    p.add_argument("--unitary", default="hadamard")

    p = sub.add_parser("classical-search", parents=[common], help="classify deterministic classical processes")
    p.add_argument("--regions", type=int, required=True)
    p.add_argument("--cardinality", type=int, default=2)

    p = sub.add_parser("wharton-verify", parents=[common], help="verify omega-mediation for a thermal model")
    p.add_argument("--model")
    p.add_argument("--ising", type=int, help="use the Ising path preset with this many sites")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--mediation-tol", type=float, default=1e-12)

    p = sub.add_parser("crude-model-check", parents=[common], help="check the process-contextual crude model")
    p.add_argument("--process", required=True, action="append")
    p.add_argument("--samples", type=int, default=50)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    options = vars(args).copy()
    for key in ("subcommand", "out", "tol", "seed", "jobs", "verbose"):
        options.pop(key, None)
    try:
        cfg = RunConfig(args.subcommand, options, args.out, args.tol, args.seed, args.jobs)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return dispatch(cfg)


if __name__ == "__main__":
    sys.exit(main())
