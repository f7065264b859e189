"""Command-line driver: prepare, sweep, critical, audit, tomo.

Exit codes: 0 success, 1 I/O failure, 2 parse/arity/domain error,
3 numerical error, 4 monogamy violation.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import ArityError, DomainError, NumericalError
from .states import CLUSTER_LABELS, DEFAULT_R, lossy_cluster
from .steering import (
    RelationType,
    audit_all,
    audit_monogamy,
    critical_eta,
    gaussian_steering,
    nullifier_variances,
    parse_partition,
    vlf_inseparability,
)
from .symplectic import load_json, save_json, symplectic_eigenvalues
from .tomography import (
    DEFAULT_SEED,
    reconstruct,
    read_records_csv,
    simulate_variances,
    write_records_csv,
)

EXIT_OK, EXIT_IO, EXIT_PARSE, EXIT_NUMERIC, EXIT_VIOLATION = 0, 1, 2, 3, 4
SWEEP_HEADER = ["eta", "partition", "G_forward", "G_reverse"]


def default_partitions(labels=CLUSTER_LABELS) -> list[str]:
    """Every bipartition of disjoint nonempty parties, smaller party steering."""
    n = len(labels)
    seen, out = set(), []
    for k in range(1, n):
        for left in itertools.combinations(range(n), k):
            rest = [m for m in range(n) if m not in left]
            for j in range(1, len(rest) + 1):
                for right in itertools.combinations(rest, j):
                    key = frozenset((left, right))
                    if key in seen:
                        continue
                    seen.add(key)
                    a, b = sorted((left, right), key=lambda p: (len(p), p))
                    out.append("".join(labels[i] for i in a) + "->" + "".join(labels[i] for i in b))
    return out


def eta_grid(eta_min: float, eta_max: float, steps: int) -> np.ndarray:
    if not 0.0 < eta_min <= eta_max <= 1.0:
        raise DomainError(f"eta grid must satisfy 0 < eta-min <= eta-max <= 1, got [{eta_min}, {eta_max}]")
    if steps < 1:
        raise DomainError("eta-steps must be positive")
    return np.linspace(eta_min, eta_max, steps)


def _formatter(precision):
    if precision == "full":
        return lambda v: repr(float(v))
    digits = int(precision)
    return lambda v: f"{v:.{digits}g}"


def _mode_index(label: str) -> int:
    label = label.strip().rstrip("'")
    if label.isdigit():
        return int(label)
    if label not in CLUSTER_LABELS:
        raise DomainError(f"unknown lossy mode {label!r}")
    return CLUSTER_LABELS.index(label)


def _emit(text: str, output) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_prepare(args) -> int:
    fmt = _formatter(args.precision)
    output = args.output or "cluster.json"
    cm = lossy_cluster(args.r, args.eta, _mode_index(args.lossy_mode))
    save_json(cm, output)
    null = nullifier_variances(cm)
    insep = vlf_inseparability(cm)
    nus = symplectic_eigenvalues(cm)
    print(f"wrote {output}: 4-mode square cluster, r={fmt(args.r)}, eta={fmt(args.eta)}")
    for name, v, db in zip(null.labels, null.variances, null.db):
        print(f"  Var({name}) = {fmt(v)}  ({db:.2f} dB)")
    print("  inseparability sums: " + ", ".join(fmt(c) for c in insep.combos)
          + f"  -> {'fully inseparable' if insep.inseparable else 'not certified'}")
    print("  symplectic eigenvalues: [" + ", ".join(fmt(v) for v in nus) + "]")
    print(f"  pure: {bool(np.all(np.abs(nus - 1.0) <= 1e-9))}")
    return EXIT_OK


def sweep_rows(r, etas, lossy_mode, partitions):
    """(eta, partition, G_forward, G_reverse) sorted by (eta, partition)."""
    parts = [(text, parse_partition(text)) for text in partitions]
    rows = []
    for eta in etas:
        cm = lossy_cluster(r, float(eta), lossy_mode)
        for text, part in parts:
            rows.append((
                float(eta),
                text,
                gaussian_steering(cm, part).value,
                gaussian_steering(cm, part.reversed()).value,
            ))
    rows.sort(key=lambda row: (row[0], row[1]))
    return rows


def cmd_sweep(args) -> int:
    fmt = _formatter(args.precision)
    partitions = args.partition or default_partitions()
    etas = eta_grid(args.eta_min, args.eta_max, args.eta_steps)
    rows = sweep_rows(args.r, etas, _mode_index(args.lossy_mode), partitions)
    lines = [",".join(SWEEP_HEADER)]
    lines += [f"{fmt(e)},{p},{fmt(gf)},{fmt(gr)}" for e, p, gf, gr in rows]
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def cmd_critical(args) -> int:
    lossy = _mode_index(args.lossy_mode)
    lines = []
    for text in args.partition or ["A->B"]:
        eta = critical_eta(args.r, parse_partition(text), lossy)
        lines.append(f"{text}: {'none' if eta is None else f'{eta:.4f}'}")
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def _parse_instance(text: str):
    """``"IVb:A|B->CD"`` (two steering parties) or ``"IVa:C->A|B"`` (two steered)."""
    try:
        rel_text, body = text.split(":", 1)
        relation = RelationType(rel_text.strip())
        left, right = body.replace("'", "").split("->")
    except ValueError:
        raise DomainError(f"cannot parse relation instance {text!r}") from None
    idx = lambda s: tuple(CLUSTER_LABELS.index(c) for c in s.strip())  # noqa: E731
    try:
        if relation.joint_steers:
            a, b = right.split("|")
            return relation, (idx(a), idx(b), idx(left))
        a, b = left.split("|")
        return relation, (idx(a), idx(b), idx(right))
    except ValueError:
        raise DomainError(f"cannot parse relation instance {text!r}") from None


def cmd_audit(args) -> int:
    cm = load_json(args.cm_path)
    relations = [RelationType(s.strip()) for s in args.relations.split(",")] if args.relations else list(RelationType)
    reports = [rep.to_dict() for rep in audit_all(cm, relations)] if not args.instance or args.relations else []
    arity_failures = 0
    for text in args.instance or []:
        try:
            relation, parties = _parse_instance(text)
            reports.append(audit_monogamy(cm, relation, parties).to_dict())
        except ArityError as exc:
            arity_failures += 1
            reports.append({"relation_type": text.split(":")[0], "instance": text,
                            "satisfied": None, "error": f"arity: {exc}"})
    _emit(json.dumps(reports, indent=2) + "\n", args.output)
    violated = sum(1 for rep in reports if rep.get("satisfied") is False)
    print(f"{len(reports)} instances, {violated} violated, {arity_failures} arity errors", file=sys.stderr)
    if violated:
        return EXIT_VIOLATION
    return EXIT_PARSE if arity_failures else EXIT_OK


def cmd_tomo(args) -> int:
    fmt = _formatter(args.precision)
    truth = load_json(args.cm_path) if args.cm_path else None
    if args.records:
        records = read_records_csv(args.records)
    elif truth is None:
        raise DomainError("tomo needs a covariance file or --records")
    else:
        records = simulate_variances(truth, samples=args.samples or None, seed=args.seed)
    if args.output:
        write_records_csv(records, args.output)
    result = reconstruct(records, seed=None if args.records else args.seed)
    report = {
        "source": result.source,
        "min_symplectic_eigenvalue": fmt(result.residual_physicality),
        "physical": result.physical,
        "within_sampling_tolerance": result.within_tolerance,
        "kernel_backend": _kernels.BACKEND,
    }
    if truth is not None:
        err = np.linalg.norm(result.cm.data - truth.data)
        report["frobenius_error"] = fmt(err)
        report["relative_frobenius_error"] = fmt(err / np.linalg.norm(truth.data))
    steering = {}
    for text in args.partition or ["B->A", "A->B", "C->D", "BC->A"]:
        part = parse_partition(text)
        entry = {"reconstructed": fmt(gaussian_steering(result.cm, part).value)}
        if truth is not None:
            entry["direct"] = fmt(gaussian_steering(truth, part).value)
        steering[text] = entry
    report["steering"] = steering
    print(json.dumps(report, indent=2))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def read_config(path) -> dict:
    """Flat ``key = value`` file; keys are flag names without dashes prefix."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key == "partition":
            out[key] = [p.strip() for p in value.split(",") if p.strip()]
        else:
            out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; flags override it")
    common.add_argument("--r", type=float, default=DEFAULT_R, help="squeezing parameter (default 0.345)")
    common.add_argument("--lossy-mode", default="A", help="mode sent through the lossy channel")
    common.add_argument("--output", help="output file (default stdout)")
    common.add_argument("--precision", default="6", help="significant digits, or 'full'")
    common.add_argument("--partition", action="append", help="partition such as 'BC->A' (repeatable)")

    parser = argparse.ArgumentParser(prog="cvsteer", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", parents=[common], help="write the cluster covariance matrix as JSON")
    p.add_argument("--eta", type=float, default=1.0, help="transmission of the lossy mode")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("sweep", parents=[common], help="steering vs transmission, as CSV")
    p.add_argument("--eta-min", type=float, default=0.01)
    p.add_argument("--eta-max", type=float, default=1.0)
    p.add_argument("--eta-steps", type=int, default=101)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("critical", parents=[common], help="critical transmission by bisection")
    p.set_defaults(func=cmd_critical)

    p = sub.add_parser("audit", parents=[common], help="monogamy audit of a covariance file")
    p.add_argument("cm_path")
    p.add_argument("--relations", help="comma-separated relation types (default all)")
    p.add_argument("--instance", action="append", help="explicit instance, e.g. 'IVb:A|B->CD'")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("tomo", parents=[common], help="simulate the 32 measurements and reconstruct")
    p.add_argument("cm_path", nargs="?")
    p.add_argument("--samples", type=int, default=0, help="samples per setting (0 = exact)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--records", help="measurement CSV to reconstruct instead of simulating")
    p.set_defaults(func=cmd_tomo)
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return {}
    config = read_config(known.config)
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            dests = {a.dest: a for a in sp._actions}
            typed = {}
            for key, value in config.items():
                if key in dests and key != "partition":
                    conv = dests[key].type
                    typed[key] = conv(value) if conv and not isinstance(value, list) else value
            sp.set_defaults(**typed)
    return config


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        config = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        # append-style flags replace, rather than extend, the config list
        if args.partition is None and "partition" in config:
            args.partition = config["partition"]
        return args.func(args)
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
