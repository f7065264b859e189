"""Covariance-matrix reconstruction from homodyne variance measurements.

The 32-setting protocol measures the 8 single-quadrature variances, the
12 same-quadrature differences (x_i - x_j, p_i - p_j) and the 12 mixed sums
(x_i + p_j, p_i + x_j). Covariances follow from

    Cov(u, v) = +1/2 [Var(u + v) - Var(u) - Var(v)]
    Cov(u, v) = -1/2 [Var(u - v) - Var(u) - Var(v)]

Same-mode x-p covariances are not measured and are set to zero.
"""

from __future__ import annotations

import csv
import itertools
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import DomainError, IncompletePlanError
from .states import CLUSTER_LABELS
from .symplectic import CovarianceMatrix, is_physical, symplectic_eigenvalues

DEFAULT_SEED = 20170719
_QUAD = {"x": 0, "p": 1}
_TERM = re.compile(r"([+-]?)([xp])([A-Za-z][0-9]*)")

Term = tuple[int, str, int]  # (mode, "x" | "p", +1 | -1)


@dataclass(frozen=True)
class MeasurementRecord:
    """Variance of a signed quadrature combination.

    ``sample_count`` is None for exact (noise-free) values.
    """

    combo: tuple[Term, ...]
    variance: float | None = None
    sample_count: int | None = None

    def __post_init__(self):
        combo = tuple((int(m), str(q), int(c)) for m, q, c in self.combo)
        if not combo:
            raise DomainError("measurement combination must be nonempty")
        for _, q, c in combo:
            if q not in _QUAD or c not in (1, -1):
                raise DomainError(f"bad combination term {(q, c)!r}")
        if self.variance is not None and not self.variance >= 0:
            raise DomainError(f"variance must be non-negative, got {self.variance!r}")
        object.__setattr__(self, "combo", combo)

    @property
    def key(self) -> tuple[Term, ...]:
        return canonical_combo(self.combo)

    def name(self, labels: Sequence[str] = CLUSTER_LABELS) -> str:
        return format_combo(self.combo, labels)

    def weights(self, n_modes: int) -> np.ndarray:
        w = np.zeros(2 * n_modes)
        for m, q, c in self.combo:
            w[2 * m + _QUAD[q]] += c
        return w


def canonical_combo(combo) -> tuple[Term, ...]:
    """Order-independent key; overall sign is irrelevant for a variance."""
    terms = sorted(combo, key=lambda t: (t[0], _QUAD[t[1]]))
    if terms[0][2] < 0:
        terms = [(m, q, -c) for m, q, c in terms]
    return tuple(terms)


def format_combo(combo, labels: Sequence[str] = CLUSTER_LABELS) -> str:
    out = []
    for i, (m, q, c) in enumerate(combo):
        sign = "-" if c < 0 else ("+" if i else "")
        out.append(f"{sign}{q}{labels[m]}")
    return "".join(out)


def parse_combo(text: str, labels: Sequence[str] = CLUSTER_LABELS) -> tuple[Term, ...]:
    """Parse ``"pA-xC-xD"`` into ((0, "p", 1), (2, "x", -1), (3, "x", -1))."""
    text = text.strip().replace(" ", "")
    index = {l: i for i, l in enumerate(labels)}
    terms, pos = [], 0
    for match in _TERM.finditer(text):
        if match.start() != pos:
            break
        sign, q, label = match.groups()
        if label not in index:
            raise DomainError(f"combination {text!r}: unknown mode label {label!r}")
        terms.append((index[label], q, -1 if sign == "-" else 1))
        pos = match.end()
    if pos != len(text) or not terms:
        raise DomainError(f"cannot parse quadrature combination {text!r}")
    return tuple(terms)


def measurement_plan(n_modes: int = 4) -> list[MeasurementRecord]:
    """The 32 measurement settings for four modes (templates, no variance)."""
    if n_modes != 4:
        raise DomainError(f"the measurement plan is defined for 4 modes, got {n_modes}")
    pairs = list(itertools.combinations(range(n_modes), 2))
    plan = [((m, q, 1),) for m in range(n_modes) for q in "xp"]
    plan += [((i, "x", 1), (j, "x", -1)) for i, j in pairs]
    plan += [((i, "p", 1), (j, "p", -1)) for i, j in pairs]
    plan += [((i, "x", 1), (j, "p", 1)) for i, j in pairs]
    plan += [((i, "p", 1), (j, "x", 1)) for i, j in pairs]
    return [MeasurementRecord(c) for c in plan]


def simulate_variances(
    cm: CovarianceMatrix,
    plan: Iterable[MeasurementRecord] | None = None,
    samples: int | None = None,
    seed: int = DEFAULT_SEED,
) -> list[MeasurementRecord]:
    """Fill in the plan's variances, exactly or from ``samples`` Gaussian draws.

    In sampled mode every setting gets an independent stream spawned from
    ``seed``, draws ``samples`` vectors of the quadratures it touches from
    their joint (marginal) distribution, and reports the zero-mean
    empirical variance.
    """
    plan = measurement_plan(cm.n_modes) if plan is None else list(plan)
    physical, nu_min = is_physical(cm)
    if not physical:
        raise DomainError(f"cannot simulate measurements on an unphysical state (nu_min={nu_min:.6g})")
    if samples is None:
        w = np.array([rec.weights(cm.n_modes) for rec in plan])
        var = _kernels.quadratic_forms(cm.data, w)
        return [MeasurementRecord(rec.combo, float(v), None) for rec, v in zip(plan, var)]

    samples = int(samples)
    if samples < 2:
        raise DomainError(f"need at least 2 samples, got {samples}")
    streams = np.random.SeedSequence(seed).spawn(len(plan))
    out = []
    for rec, stream in zip(plan, streams):
        w = rec.weights(cm.n_modes)
        idx = np.flatnonzero(w)
        sub = cm.data[np.ix_(idx, idx)]
        lam, vec = np.linalg.eigh(sub)
        factor = vec * np.sqrt(np.clip(lam, 0.0, None))
        rng = np.random.Generator(np.random.PCG64(stream))
        var = _kernels.sampled_second_moment(rng, factor, w[idx], samples)
        out.append(MeasurementRecord(rec.combo, var, samples))
    return out


def sampling_tolerance(samples: int | None) -> float:
    """Relative accuracy expected of one sampled variance.

    Scaled as 10/sqrt(n): 1% at n = 10**6, about seven standard deviations
    of a single Gaussian variance estimate (relative std sqrt(2/n)).
    """
    if samples is None:
        return 0.0
    return 10.0 / np.sqrt(samples)


@dataclass(frozen=True)
class ReconstructionResult:
    cm: CovarianceMatrix
    residual_physicality: float
    source: dict
    pm_discrepancy: float | None = None

    @property
    def physical(self) -> bool:
        return bool(is_physical(self.cm).physical)

    @property
    def physicality_floor(self) -> float:
        """Lowest min symplectic eigenvalue consistent with sampling noise."""
        if self.source.get("kind") == "sampled":
            return 1.0 - 3.0 * sampling_tolerance(self.source["samples"])
        return 1.0 - 1e-9

    @property
    def within_tolerance(self) -> bool:
        return bool(self.residual_physicality >= self.physicality_floor)


def reconstruct(
    records: Iterable[MeasurementRecord],
    n_modes: int = 4,
    labels: Sequence[str] | None = None,
    seed: int | None = None,
) -> ReconstructionResult:
    """Rebuild the covariance matrix from single and pairwise variances.

    When a pair has both a sum and a difference record the two covariance
    estimates are averaged, and their largest disagreement is reported as
    ``pm_discrepancy``. No projection onto physical states is attempted.
    """
    table: dict[tuple, list[float]] = {}
    counts = set()
    for rec in records:
        if rec.variance is None:
            raise DomainError(f"record {rec.name()} has no variance")
        table.setdefault(rec.key, []).append(rec.variance)
        counts.add(rec.sample_count)

    def lookup(combo):
        vals = table.get(canonical_combo(combo))
        return None if vals is None else float(np.mean(vals))

    dim = 2 * n_modes
    quads = [(m, q) for m in range(n_modes) for q in "xp"]
    sigma = np.zeros((dim, dim))
    for k, (m, q) in enumerate(quads):
        v = lookup(((m, q, 1),))
        if v is None:
            raise IncompletePlanError(format_combo(((m, q, 1),), labels or CLUSTER_LABELS))
        sigma[k, k] = v

    gap = None
    for k, l in itertools.combinations(range(dim), 2):
        (mk, qk), (ml, ql) = quads[k], quads[l]
        if mk == ml:
            continue
        plus = lookup(((mk, qk, 1), (ml, ql, 1)))
        minus = lookup(((mk, qk, 1), (ml, ql, -1)))
        ests = []
        if plus is not None:
            ests.append(0.5 * (plus - sigma[k, k] - sigma[l, l]))
        if minus is not None:
            ests.append(-0.5 * (minus - sigma[k, k] - sigma[l, l]))
        if not ests:
            want = ((mk, qk, 1), (ml, ql, -1 if qk == ql else 1))
            raise IncompletePlanError(format_combo(want, labels or CLUSTER_LABELS))
        if len(ests) == 2:
            gap = max(gap or 0.0, abs(ests[0] - ests[1]))
        sigma[k, l] = sigma[l, k] = float(np.mean(ests))

    cm = CovarianceMatrix(sigma, labels)
    sampled = [c for c in counts if c is not None]
    if sampled:
        source = {"kind": "sampled", "samples": int(min(sampled)), "seed": seed}
    else:
        source = {"kind": "exact"}
    return ReconstructionResult(
        cm,
        float(symplectic_eigenvalues(cm)[0]),
        source,
        gap,
    )


def write_records_csv(records: Iterable[MeasurementRecord], path, labels=CLUSTER_LABELS,
                      fmt: str = "{:.17g}") -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["combo", "variance", "samples"])
        for rec in records:
            writer.writerow([
                rec.name(labels),
                fmt.format(rec.variance),
                "exact" if rec.sample_count is None else rec.sample_count,
            ])


def read_records_csv(path, labels=CLUSTER_LABELS) -> list[MeasurementRecord]:
    """Read a variance file, e.g. one produced from laboratory data."""
    out = []
    with open(Path(path), newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"combo", "variance", "samples"} - set(reader.fieldnames or ())
        if missing:
            raise DomainError(f"measurement CSV lacks columns {sorted(missing)}")
        for row in reader:
            samples = row["samples"].strip()
            out.append(MeasurementRecord(
                parse_combo(row["combo"], labels),
                float(row["variance"]),
                None if samples in ("", "exact") else int(samples),
            ))
    return out
