import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvsteer import (
    ArityError,
    CovarianceMatrix,
    ModePartition,
    MultiCrossingError,
    PartitionParseError,
    SingularBlockError,
    critical_eta,
    gaussian_steering,
    lossy_cluster,
    nullifier_variances,
    parse_partition,
    square_cluster,
    vlf_inseparability,
)
from cvsteer import steering as steering_mod
from cvsteer.cli import default_partitions

from conftest import ETA_GRID, R, random_local_symplectic, random_partition, random_physical_cm, tmsv
from oracle import oracle_steering


def G(cm, text):
    return gaussian_steering(cm, parse_partition(text)).value


@pytest.mark.parametrize("r", [0.1, 0.345, 0.5, 1.0])
def test_tmsv_closed_form(r):
    cm = CovarianceMatrix(tmsv(r))
    assert G(cm, "A->B") == pytest.approx(np.log(np.cosh(2 * r)), abs=1e-12)
    assert G(cm, "B->A") == pytest.approx(np.log(np.cosh(2 * r)), abs=1e-12)


def test_tmsv_reference_value():
    assert G(CovarianceMatrix(tmsv(0.5)), "A->B") == pytest.approx(0.433781, abs=1e-6)


def test_product_state_has_no_steering():
    rng = np.random.default_rng(8)
    blocks = [random_physical_cm(1, rng) for _ in range(3)]
    cm = CovarianceMatrix(np.block(
        [[blocks[i] if i == j else np.zeros((2, 2)) for j in range(3)] for i in range(3)]))
    for text in ("A->B", "AB->C", "C->AB", "B->AC"):
        assert G(cm, text) == 0.0


def test_report_invariants(cluster):
    rep = gaussian_steering(cluster, parse_partition("B->ACD"))
    assert rep.direction_label == "B->ACD"
    assert rep.value == pytest.approx(-np.sum(np.log(rep.contributing_eigenvalues)), abs=1e-12)
    assert all(v < 1 for v in rep.contributing_eigenvalues)
    zero = gaussian_steering(cluster, parse_partition("A->D"))
    assert zero.value == 0.0 and zero.contributing_eigenvalues == () and not zero.steers


def test_cluster_neighbours_and_diagonals(cluster):
    assert G(cluster, "A->D") == 0.0
    cd, dc = G(cluster, "C->D"), G(cluster, "D->C")
    assert cd > 1e-3 and cd == pytest.approx(dc, abs=1e-12)


@pytest.mark.parametrize("eta", [1e-3, 0.1, 0.5, 0.9, 1.0])
def test_neighbours_cannot_jointly_steer_a(eta):
    assert G(lossy_cluster(R, eta), "CD->A") == 0.0


def test_b_always_steers_lossy_a():
    for eta in np.linspace(0.01, 1, 100):
        assert G(lossy_cluster(R, eta), "B->A") > 1e-9


def test_a_to_b_is_monotone_in_eta():
    vals = [G(lossy_cluster(R, eta), "A->B") for eta in np.linspace(0.01, 1, 101)]
    assert np.all(np.diff(vals) >= -1e-12)


def test_critical_eta_values():
    assert critical_eta(R, "A->B") == pytest.approx(0.772, abs=5e-3)
    assert critical_eta(R, "A->BC") == pytest.approx(0.5, abs=5e-3)
    assert critical_eta(R, "B->A") is None
    assert critical_eta(R, "CD->A") is None


def test_b_versus_acd_direction():
    # one-way window for (B + A'CD): the joint party A'CD loses its grip on B
    assert critical_eta(R, "ACD->B") == pytest.approx(0.228, abs=5e-3)
    assert critical_eta(R, "B->ACD") is None
    cm = lossy_cluster(R, 0.2)
    assert G(cm, "ACD->B") == 0.0 and G(cm, "B->ACD") > 1e-3


def test_critical_eta_rejects_multiple_crossings(monkeypatch):
    fake = lambda r, part, mode: (lambda eta: 1.0 if 0.3 < eta < 0.6 else 0.0)  # noqa: E731
    monkeypatch.setattr(steering_mod, "_steering_vs_eta", fake)
    with pytest.raises(MultiCrossingError) as info:
        critical_eta(R, "A->B")
    assert len(info.value.intervals) == 2


def test_singular_steering_block_propagates():
    sigma = np.eye(4)
    sigma[:2, :2] = 1e-13 * np.eye(2)
    with pytest.raises(SingularBlockError):
        gaussian_steering(CovarianceMatrix(sigma), ModePartition((0,), (1,)))


@pytest.mark.parametrize("text", ["A-B", "AB", "A->E", "A->A", "->B"])
def test_parse_partition_errors(text):
    with pytest.raises(PartitionParseError):
        parse_partition(text)


def test_parse_partition_accepts_primes():
    assert parse_partition("A'->BC") == ModePartition((0,), (1, 2))


def _swap_cd(text):
    return text.translate(str.maketrans("CD", "DC"))


@pytest.mark.parametrize("eta", [0.3, 0.7, 1.0])
def test_c_d_exchange_symmetry(eta):
    cm = lossy_cluster(R, eta)
    for text in default_partitions():
        for t in (text, "->".join(reversed(text.split("->")))):
            assert G(cm, t) == pytest.approx(G(cm, _swap_cd(t)), abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
def test_local_symplectic_invariance(seed, n):
    rng = np.random.default_rng(seed)
    sigma = random_physical_cm(n, rng)
    steering, steered = random_partition(n, rng)
    L = np.zeros((2 * n, 2 * n))
    for k in range(n):
        L[2 * k:2 * k + 2, 2 * k:2 * k + 2] = random_local_symplectic(rng)
    part = ModePartition(steering, steered)
    before = gaussian_steering(CovarianceMatrix(sigma), part).value
    after = gaussian_steering(CovarianceMatrix(L @ sigma @ L.T), part).value
    assert abs(before - after) < 1e-9


def test_agrees_with_oracle_on_random_states():
    rng = np.random.default_rng(2024)
    for _ in range(40):
        n = int(rng.integers(2, 6))
        sigma = random_physical_cm(n, rng)
        steering, steered = random_partition(n, rng)
        mine = gaussian_steering(CovarianceMatrix(sigma), ModePartition(steering, steered)).value
        assert mine == pytest.approx(oracle_steering(sigma, steering, steered), abs=1e-9)


def test_nullifier_diagnostics(cluster):
    null = nullifier_variances(cluster)
    assert np.allclose(null.variances, 3 * np.exp(-2 * R), atol=1e-12)
    assert np.allclose(np.round(null.db, 1), -3.0)
    assert null.labels[0] == "pA-xC-xD"
    vac = nullifier_variances(square_cluster(0.0))
    assert np.allclose(vac.variances, 3.0) and np.allclose(vac.db, 0.0, atol=1e-12)
    lossy = nullifier_variances(lossy_cluster(R, 0.5))
    assert lossy.variances[0] > null.variances[0]


def test_inseparability():
    combos, ok = vlf_inseparability(square_cluster(R))
    assert ok and np.allclose(combos, 6 * np.exp(-2 * R), atol=1e-12)
    combos, ok = vlf_inseparability(square_cluster(0.0))
    assert not ok and np.allclose(combos, 6.0)
    combos, ok = vlf_inseparability(square_cluster(3.0))
    assert ok and np.all(combos < 0.02) and np.all(combos > 0)


def test_four_mode_diagnostics_need_four_modes():
    with pytest.raises(ArityError):
        nullifier_variances(CovarianceMatrix(np.eye(6)))
    with pytest.raises(ArityError):
        vlf_inseparability(CovarianceMatrix(np.eye(6)))


def test_grid_of_structural_zeros(lossy):
    for eta in ETA_GRID:
        cm = lossy[float(eta)]
        for pair in ("AC", "AD", "BC", "BD"):
            assert G(cm, f"{pair[0]}->{pair[1]}") == 0.0
            assert G(cm, f"{pair[1]}->{pair[0]}") == 0.0
