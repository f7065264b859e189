"""Gaussian steerability, monogamy audits and cluster-state diagnostics."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from . import _kernels
from .errors import ArityError, DomainError, MultiCrossingError, PartitionParseError
from .states import DEFAULT_R, CLUSTER_LABELS, lossy_cluster
from .symplectic import (
    CovarianceMatrix,
    ModePartition,
    restrict,
    schur_complement,
    symplectic_eigenvalues,
)

#: nu counts toward G only below 1 - EIGEN_CUTOFF
EIGEN_CUTOFF = 1e-10
#: G above this value means "steering exists"
STEERING_THRESHOLD = 1e-9
RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class SteeringReport:
    partition: ModePartition
    value: float
    contributing_eigenvalues: tuple[float, ...]
    direction_label: str

    @property
    def steers(self) -> bool:
        return self.value > STEERING_THRESHOLD


def parse_partition(text: str, labels: Sequence[str] = CLUSTER_LABELS) -> ModePartition:
    """Parse ``"BC->A"`` into a partition over single-character ``labels``.

    Primes marking a lossy mode (``"A'"``) are ignored.
    """
    clean = text.replace("'", "").replace("′", "").replace(" ", "")
    if clean.count("->") != 1:
        raise PartitionParseError(f"partition {text!r} must contain exactly one '->'")
    left, right = clean.split("->")
    index = {l: i for i, l in enumerate(labels)}
    try:
        steering = tuple(index[c] for c in left)
        steered = tuple(index[c] for c in right)
    except KeyError as exc:
        raise PartitionParseError(f"partition {text!r}: unknown mode label {exc.args[0]!r}") from None
    try:
        return ModePartition(steering, steered)
    except DomainError as exc:
        raise PartitionParseError(f"partition {text!r}: {exc}") from None


def gaussian_steering(cm: CovarianceMatrix, part: ModePartition) -> SteeringReport:
    """Steerability of ``part.steered`` by ``part.steering`` under Gaussian measurements.

    G = -sum(ln nu) over the symplectic eigenvalues nu < 1 of the Schur
    complement of the steering block. Modes outside the partition are
    traced out first.
    """
    part.check(cm.n_modes)
    reduced = restrict(cm, part.modes)
    k = len(part.steering)
    local = ModePartition(tuple(range(k)), tuple(range(k, k + len(part.steered))))
    nus = symplectic_eigenvalues(schur_complement(reduced, local))
    below = tuple(float(v) for v in nus if v < 1.0 - EIGEN_CUTOFF)
    value = float(-np.sum(np.log(below))) if below else 0.0
    return SteeringReport(part, max(0.0, value), below, part.label(cm.labels))


def steering_value(cm: CovarianceMatrix, steering: Sequence[int], steered: Sequence[int]) -> float:
    return gaussian_steering(cm, ModePartition(tuple(steering), tuple(steered))).value


# ---------------------------------------------------------------------------
# critical transmission
# ---------------------------------------------------------------------------

def _steering_vs_eta(r, part, lossy_mode):
    def g(eta):
        return gaussian_steering(lossy_cluster(r, eta, lossy_mode), part).value
    return g


def critical_eta(
    r: float = DEFAULT_R,
    part: ModePartition | str = "A->B",
    lossy_mode: int = 0,
    *,
    eta_min: float = 1e-4,
    grid_points: int = 101,
    tol: float = 1e-4,
    threshold: float = STEERING_THRESHOLD,
) -> float | None:
    """Transmission at which steering for ``part`` switches on or off.

    Scans ``grid_points`` values on [eta_min, 1], then bisects the single
    sign change of ``G(eta) > threshold`` to an absolute width ``tol``.
    Returns None when steering is present everywhere or nowhere on the scan.
    """
    if isinstance(part, str):
        part = parse_partition(part)
    g = _steering_vs_eta(r, part, lossy_mode)
    grid = np.linspace(eta_min, 1.0, grid_points)
    on = np.array([g(eta) > threshold for eta in grid])
    flips = np.flatnonzero(on[1:] != on[:-1])
    if flips.size == 0:
        return None
    if flips.size > 1:
        raise MultiCrossingError([(grid[i], grid[i + 1]) for i in flips])
    lo, hi = grid[flips[0]], grid[flips[0] + 1]
    lo_on = on[flips[0]]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if (g(mid) > threshold) == lo_on:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# monogamy relations
# ---------------------------------------------------------------------------

class RelationType(str, enum.Enum):
    """Monogamy relation families for parties (A, B, C).

    I/II forbid A and B from both steering C. III/IV bound the steering of
    or by the joint party AB by the sum of its parts. ``IVB_MULTI`` is the
    IVb inequality with a multi-mode steered party, which is not a theorem
    but holds for particular states.
    """

    I = "I"
    II = "II"
    IIIA = "IIIa"
    IIIB = "IIIb"
    IVA = "IVa"
    IVB = "IVb"
    IVB_MULTI = "IVb-multi"

    @property
    def exclusive(self) -> bool:
        return self in (RelationType.I, RelationType.II)

    @property
    def joint_steers(self) -> bool:
        """True for the 'a' forms, where C steers the joint party AB."""
        return self in (RelationType.IIIA, RelationType.IVA)


# (max size of A, max size of B, required size of C); None = unrestricted
_ARITY = {
    RelationType.I: (1, 1, 1),
    RelationType.II: (None, None, 1),
    RelationType.IIIA: (1, 1, 1),
    RelationType.IIIB: (1, 1, 1),
    RelationType.IVA: (None, None, None),
    RelationType.IVB: (None, None, 1),
    RelationType.IVB_MULTI: (None, None, None),
}


@dataclass(frozen=True)
class MonogamyReport:
    relation_type: RelationType
    parties: dict[str, tuple[str, ...]]
    lhs_terms: dict[str, float]
    satisfied: bool
    residual: float | None = None
    verdict: bool | None = None
    error: str | None = field(default=None)

    def to_dict(self) -> dict:
        return {
            "relation_type": self.relation_type.value,
            "parties": {k: "".join(v) for k, v in self.parties.items()},
            "lhs_terms": dict(self.lhs_terms),
            "residual": self.residual,
            "verdict": self.verdict,
            "satisfied": self.satisfied,
            "error": self.error,
        }


def _check_parties(relation: RelationType, parties, n_modes: int):
    if len(parties) != 3:
        raise ArityError(f"relation {relation.value} needs three parties (A, B, C)")
    parties = tuple(tuple(int(m) for m in p) for p in parties)
    flat = [m for p in parties for m in p]
    if any(len(p) == 0 for p in parties):
        raise ArityError("monogamy parties must be nonempty")
    if len(set(flat)) != len(flat):
        raise DomainError(f"monogamy parties overlap: {parties}")
    if any(not 0 <= m < n_modes for m in flat):
        raise DomainError(f"party modes {parties} out of range for {n_modes} modes")
    for name, size, limit in zip("ABC", map(len, parties), _ARITY[relation]):
        if limit is None:
            continue
        if (name == "C" and size != limit) or (name != "C" and size > limit):
            raise ArityError(
                f"relation {relation.value} requires n_{name} = {limit}, got {size}"
            )
    return parties


def audit_monogamy(cm: CovarianceMatrix, relation_type, parties) -> MonogamyReport:
    """Evaluate one monogamy relation instance on parties ``(A, B, C)``."""
    relation = RelationType(relation_type)
    a, b, c = _check_parties(relation, parties, cm.n_modes)
    lab = lambda modes: "".join(cm.labels[m] for m in modes)  # noqa: E731
    names = {"A": tuple(cm.labels[m] for m in a),
             "B": tuple(cm.labels[m] for m in b),
             "C": tuple(cm.labels[m] for m in c)}

    if relation.exclusive:
        g_ac = steering_value(cm, a, c)
        g_bc = steering_value(cm, b, c)
        terms = {f"{lab(a)}->{lab(c)}": g_ac, f"{lab(b)}->{lab(c)}": g_bc}
        ok = not (g_ac > STEERING_THRESHOLD and g_bc > STEERING_THRESHOLD)
        return MonogamyReport(relation, names, terms, ok, verdict=ok)

    if relation.joint_steers:
        joint = steering_value(cm, c, a + b)
        parts = (steering_value(cm, c, a), steering_value(cm, c, b))
        keys = (f"{lab(c)}->{lab(a + b)}", f"{lab(c)}->{lab(a)}", f"{lab(c)}->{lab(b)}")
    else:
        joint = steering_value(cm, a + b, c)
        parts = (steering_value(cm, a, c), steering_value(cm, b, c))
        keys = (f"{lab(a + b)}->{lab(c)}", f"{lab(a)}->{lab(c)}", f"{lab(b)}->{lab(c)}")
    residual = joint - parts[0] - parts[1]
    terms = dict(zip(keys, (joint, *parts)))
    return MonogamyReport(relation, names, terms, residual >= -RESIDUAL_TOL, residual=residual)


def _nonempty_subsets(modes):
    for k in range(1, len(modes) + 1):
        yield from itertools.combinations(modes, k)


def _unordered_pairs(modes):
    """Unordered pairs {A, B} of disjoint nonempty subsets of ``modes``."""
    seen = set()
    for a in _nonempty_subsets(modes):
        rest = [m for m in modes if m not in a]
        for b in _nonempty_subsets(rest):
            key = frozenset((a, b))
            if key not in seen:
                seen.add(key)
                yield a, b


def enumerate_instances(relation_type, n_modes: int) -> Iterator[tuple]:
    """Every valid (A, B, C) assignment of the relation on ``n_modes`` modes.

    A and B are interchangeable in every relation, so each unordered pair is
    produced once.
    """
    relation = RelationType(relation_type)
    max_a, max_b, size_c = _ARITY[relation]
    modes = tuple(range(n_modes))
    for c in _nonempty_subsets(modes):
        if size_c is not None and len(c) != size_c:
            continue
        if relation is RelationType.IVB_MULTI and len(c) < 2:
            continue
        rest = [m for m in modes if m not in c]
        for a, b in _unordered_pairs(rest):
            if max_a is not None and (len(a) > max_a or len(b) > max_b):
                continue
            yield a, b, c


def audit_all(cm: CovarianceMatrix, relations=tuple(RelationType)) -> list[MonogamyReport]:
    return [
        audit_monogamy(cm, rel, parties)
        for rel in map(RelationType, relations)
        for parties in enumerate_instances(rel, cm.n_modes)
    ]


# ---------------------------------------------------------------------------
# nullifiers and inseparability
# ---------------------------------------------------------------------------

#: (phase-quadrature mode, amplitude-quadrature neighbours) of each nullifier
SQUARE_NULLIFIERS = ((0, (2, 3)), (1, (2, 3)), (2, (0, 1)), (3, (0, 1)))
#: nullifier pairs whose summed variances witness full inseparability
VLF_PAIRS = ((0, 2), (0, 3), (1, 2), (1, 3))
VLF_BOUND = 4.0


class NullifierVariances(NamedTuple):
    variances: np.ndarray
    db: np.ndarray
    labels: tuple[str, ...]


class Inseparability(NamedTuple):
    combos: np.ndarray
    inseparable: bool


def _require_four_modes(cm):
    if cm.n_modes != 4:
        raise ArityError(f"square-cluster diagnostics need 4 modes, got {cm.n_modes}")


def nullifier_weights() -> np.ndarray:
    w = np.zeros((len(SQUARE_NULLIFIERS), 8))
    for row, (a, neighbours) in enumerate(SQUARE_NULLIFIERS):
        w[row, 2 * a + 1] = 1.0
        for b in neighbours:
            w[row, 2 * b] = -1.0
    return w


def nullifier_variances(cm: CovarianceMatrix) -> NullifierVariances:
    """Variances of p_a - sum(x_b) over the square's neighbours, plus dB vs shot noise."""
    _require_four_modes(cm)
    w = nullifier_weights()
    var = _kernels.quadratic_forms(cm.data, w)
    shot = np.count_nonzero(w, axis=1)
    names = tuple(
        f"p{cm.labels[a]}" + "".join(f"-x{cm.labels[b]}" for b in nb) for a, nb in SQUARE_NULLIFIERS
    )
    return NullifierVariances(var, 10.0 * np.log10(var / shot), names)


def vlf_inseparability(cm: CovarianceMatrix) -> Inseparability:
    """Four pairwise nullifier-variance sums; fully inseparable iff all < 4."""
    var = nullifier_variances(cm).variances
    combos = np.array([var[i] + var[j] for i, j in VLF_PAIRS])
    return Inseparability(combos, bool(np.all(combos < VLF_BOUND)))
