"""``wicksys`` command line: simulate, certify, mc-validate.

Exit codes: 0 certified / passed, 1 refuted / failed, 2 malformed input,
3 truncation-policy violation, 4 inconclusive.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .chaos import ChaosExpansion, TruncationLossError, norm_k, random_expansion
from .continuous import GridMismatchError, GridSignal, certify_cont_bibo, l2linf_certify, wick_convolve_grid
from .discrete import (
    DiscreteSignal,
    SizeCapError,
    certify_bibo,
    dissipativity_check,
    l1l2_certify,
    wick_convolve,
)
from .multiindex import PolicyError, TruncationPolicy
from .operators import NonConvergenceError, OrderError
from .report import CERTIFIED, INCONCLUSIVE, REFUTED
from .sampling import orthogonality_table, wick_expectation_rows

log = logging.getLogger("wicksys")

EXIT_OK, EXIT_FAIL, EXIT_MALFORMED, EXIT_POLICY, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4

CRITERIA = {"discrete": ("bibo", "l1l2", "dissipative"), "continuous": ("bibo", "l2linf")}


class InputError(ValueError):
    """Malformed system or config file (exit 2)."""


# parsing


def _policy(obj: dict, args) -> TruncationPolicy | None:
    p = obj.get("policy")
    J = args.max_var if args.max_var is not None else (p or {}).get("J")
    D = args.max_degree if args.max_degree is not None else (p or {}).get("D")
    if J is None and D is None:
        return None
    if J is None or D is None:
        raise InputError("policy needs both J and D")
    return TruncationPolicy(int(J), int(D))


def _chaos(obj, policy: TruncationPolicy | None) -> ChaosExpansion:
    """A chaos JSON object, or a bare number taken as deterministic."""
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        if policy is None:
            raise InputError("bare numbers need a system policy")
        return ChaosExpansion.constant(float(obj), policy)
    if not isinstance(obj, dict) or "terms" not in obj:
        raise InputError(f"not a chaos expansion: {obj!r}")
    if policy is not None:
        obj = {**obj, "policy": policy.to_json()}
    elif "policy" not in obj:
        raise InputError("chaos expansion without a policy")
    return ChaosExpansion.from_json(obj)


def _discrete_signal(obj, policy) -> DiscreteSignal:
    if not isinstance(obj, dict):
        raise InputError("discrete signals are objects {n: chaos}")
    samples = {int(n): _chaos(v, policy) for n, v in obj.items()}
    if policy is None:
        if not samples:
            raise InputError("empty signal without a system policy")
        policy = next(iter(samples.values())).policy
        for v in samples.values():
            policy = policy.join(v.policy)
    return DiscreteSignal(samples, policy)


def _grid_signal(items, t0, dt, policy) -> GridSignal:
    if not isinstance(items, list) or not items:
        raise InputError("continuous signals are non-empty lists of chaos expansions")
    samples = [_chaos(v, policy) for v in items]
    if policy is None:
        policy = samples[0].policy
        for v in samples[1:]:
            policy = policy.join(v.policy)
    return GridSignal(float(t0), float(dt), tuple(samples), policy)


def load_system(path: str, args, need_input: bool = False) -> dict:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    if not isinstance(obj, dict):
        raise InputError("system description must be a JSON object")
    kind = obj.get("kind")
    if kind not in CRITERIA:
        raise InputError(f"unknown system kind {kind!r}")
    if "k" not in obj or "impulse" not in obj:
        raise InputError("system description needs 'k' and 'impulse'")
    if need_input and "input" not in obj:
        raise InputError("simulate needs an 'input' signal")
    policy = _policy(obj, args)
    sysd = {"kind": kind, "k": float(obj["k"]), "l": obj.get("l"), "bound": obj.get("bound"), "raw": obj}
    if kind == "discrete":
        sysd["impulse"] = _discrete_signal(obj["impulse"], policy)
        sysd["causal"] = bool(obj.get("causal", True))
        if "input" in obj:
            sysd["input"] = _discrete_signal(obj["input"], policy)
    else:
        if "dt" not in obj:
            raise InputError("continuous systems need 'dt'")
        sysd["impulse"] = _grid_signal(obj["impulse"], obj.get("t0", 0.0), obj["dt"], policy)
        if "input" in obj:
            sysd["input"] = _grid_signal(obj["input"], obj.get("input_t0", 0.0), obj["dt"], policy)
    if sysd["l"] is not None:
        sysd["l"] = float(sysd["l"])
    return sysd


# output


def config_record(args) -> dict:
    """The run configuration embedded in every output (file names only, so
    outputs do not depend on where the files live)."""
    return {
        "command": args.command,
        "input": Path(args.input).name,
        "criterion": getattr(args, "criterion", None),
        "seed": args.seed,
        "probes": args.probes,
        "tol": args.tol,
        "max_degree": args.max_degree,
        "max_var": args.max_var,
        "version": __version__,
    }


def dumps(obj: Any) -> str:
    # repr-based floats are the shortest strings that round-trip exactly
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def _clean(obj):
    if isinstance(obj, float):
        if math.isfinite(obj):
            return obj
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return _clean(obj.item())
    return obj


def signal_payload(y, kind: str, k: float, config: dict) -> dict:
    out = {"version": __version__, "config": config, "kind": kind, "k": k,
           "policy": y.policy.to_json(), "truncation_loss": y.truncation_loss}
    out["output"] = y.to_json()
    return out


def norms_csv(y, k: float) -> str:
    """Plot data: one row per time step (``n`` or ``t``) with ``||y||_k`` and the mean."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n_or_t", "norm_k", "alpha0_re", "alpha0_im"])
    if isinstance(y, DiscreteSignal):
        rows = [(n, y[n]) for n in range(y.support[0], y.support[1] + 1)] if y.support else []
    else:
        rows = list(zip(y.times.tolist(), y.samples))
    for t, x in rows:
        m = x.mean
        w.writerow([repr(t), repr(float(norm_k(x, k))), repr(float(m.real)), repr(float(m.imag))])
    return buf.getvalue()


def _write(path: str, text: str) -> None:
    Path(path).write_text(text)


# commands


def cmd_simulate(args) -> int:
    sysd = load_system(args.input, args, need_input=True)
    h, u = sysd["impulse"], sysd["input"]
    if sysd["kind"] == "discrete":
        y = wick_convolve(h, u, causal=sysd["causal"])
    else:
        y = wick_convolve_grid(h, u)
    if y.truncation_loss:
        log.warning("output lost terms outside the truncation policy")
    _write(args.output, dumps(signal_payload(y, sysd["kind"], sysd["k"], config_record(args))))
    _write(str(Path(args.output).with_suffix(".csv")), norms_csv(y, sysd["k"]))
    return EXIT_OK


def _run_certifier(sysd: dict, criterion: str, args):
    h, k, l, bound = sysd["impulse"], sysd["k"], sysd["l"], sysd["bound"]
    n_random = 8 if args.probes is None else args.probes
    vtol = 1e-12
    if criterion in ("bibo", "l1l2", "l2linf") and l is None:
        raise InputError(f"criterion {criterion!r} needs the smoothness order 'l'")
    if sysd["kind"] == "discrete":
        if criterion == "bibo":
            return certify_bibo(h, k, l, vtol, n_random=n_random, seed=args.seed, bound=bound)
        if criterion == "l1l2":
            return l1l2_certify(h, k, l, vtol, bound=bound)
        n_time = int(sysd["raw"].get("n_time", 64))
        tol = 1e-9 if args.tol is None else args.tol
        return dissipativity_check(h, k, n_time=n_time, tol=tol, l=l, vage_tol=vtol)
    tail = float(sysd["raw"].get("tail_bound", 0.0))
    if criterion == "bibo":
        rep = certify_cont_bibo(h, k, l, vtol, tail, n_random=n_random, seed=args.seed)
        if bound is not None:
            rep.parameters["bound"] = bound
            if rep.lower_bound > bound:
                rep.verdict = REFUTED
            elif rep.upper_bound > bound:
                rep.verdict = INCONCLUSIVE
        return rep
    return l2linf_certify(h, k, l, vtol, tail, refine=True, n_random=n_random, seed=args.seed, bound=bound)


def cmd_certify(args) -> int:
    sysd = load_system(args.input, args)
    criterion = args.criterion or "bibo"
    if criterion not in CRITERIA[sysd["kind"]]:
        raise InputError(f"criterion {criterion!r} does not apply to {sysd['kind']} systems")
    rep = _run_certifier(sysd, criterion, args)
    payload = {"version": __version__, "config": config_record(args), "kind": sysd["kind"], "report": rep.to_json()}
    _write(args.output, dumps(payload))
    if rep.verdict == CERTIFIED:
        return EXIT_OK
    return EXIT_FAIL if rep.verdict == REFUTED else EXIT_INCONCLUSIVE


def cmd_mc_validate(args) -> int:
    try:
        cfg = json.loads(Path(args.input).read_text())
        N, J, D = int(cfg["N"]), int(cfg["J"]), int(cfg["D"])
        threshold = float(cfg["threshold"])
        n_pairs = int(cfg.get("pairs", 4))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"bad mc-validate config: {exc}") from None
    if args.max_var is not None:
        J = args.max_var
    if args.max_degree is not None:
        D = args.max_degree
    if N < 1 or J < 1 or D < 0 or threshold <= 0:
        raise InputError("need N >= 1, J >= 1, D >= 0 and a positive threshold")
    rows = orthogonality_table(J, D, N, args.seed)
    rng = np.random.default_rng(args.seed)
    half = TruncationPolicy(J, max(D // 2, 1))
    pairs = [(random_expansion(rng, half, complex_coeffs=False), random_expansion(rng, half, complex_coeffs=False))
             for _ in range(n_pairs)]
    wick_rows = wick_expectation_rows(pairs, N, args.seed + 1)
    for r in rows + wick_rows:
        r["pass"] = bool(r["z"] <= threshold and r.get("coefficient_identity", True))
    passed = all(r["pass"] for r in rows + wick_rows)
    payload = {
        "version": __version__,
        "config": config_record(args),
        "mc": {"N": N, "J": J, "D": D, "threshold": threshold, "pairs": n_pairs},
        "passed": passed,
        "max_z": max(r["z"] for r in rows + wick_rows),
        "orthogonality": rows,
        "wick_expectation": wick_rows,
    }
    _write(args.output, dumps(payload))
    return EXIT_OK if passed else EXIT_FAIL


COMMANDS = {"simulate": cmd_simulate, "certify": cmd_certify, "mc-validate": cmd_mc_validate}


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wicksys", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--input", required=True, help="system description or mc-validate config (JSON)")
    p.add_argument("--output", required=True, help="output JSON path")
    p.add_argument("--criterion", choices=("bibo", "l1l2", "dissipative", "l2linf"))
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--probes", type=int, default=None, help="random probe count (default 8)")
    p.add_argument("--tol", type=float, default=None, help="dissipativity tolerance (default 1e-9)")
    p.add_argument("--max-degree", type=int, default=None)
    p.add_argument("--max-var", type=int, default=None)
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--version", action="version", version=f"wicksys {__version__}")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (PolicyError, TruncationLossError) as exc:
        log.error("policy violation: %s", exc)
        return EXIT_POLICY
    except NonConvergenceError as exc:
        log.error("%s", exc)
        return EXIT_INCONCLUSIVE
    except (InputError, OrderError, GridMismatchError, SizeCapError, ValueError, KeyError, TypeError) as exc:
        log.error("malformed input: %s", exc)
        return EXIT_MALFORMED
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_MALFORMED


if __name__ == "__main__":
    sys.exit(main())
