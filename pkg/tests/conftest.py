import numpy as np
import pytest

from cvsteer import lossy_cluster, square_cluster, unitary_to_symplectic

R = 0.345
ETA_GRID = np.round(np.arange(1, 11) / 10, 10)


def tmsv(r):
    """Two-mode squeezed vacuum written out in closed form."""
    c, s = np.cosh(2 * r), np.sinh(2 * r)
    z = np.diag([1.0, -1.0])
    return np.block([[c * np.eye(2), s * z], [s * z, c * np.eye(2)]])


def random_local_symplectic(rng):
    """Random 2x2 real matrix of unit determinant: rotation, squeeze, rotation."""
    def rot(t):
        return np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
    r = rng.uniform(-1.0, 1.0)
    return rot(rng.uniform(0, 2 * np.pi)) @ np.diag([np.exp(r), np.exp(-r)]) @ rot(rng.uniform(0, 2 * np.pi))


def haar_unitary(n, rng):
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_symplectic(n, rng, max_r=0.8):
    u1, u2 = haar_unitary(n, rng), haar_unitary(n, rng)
    sq = np.diag([v for r in rng.uniform(0, max_r, n) for v in (np.exp(r), np.exp(-r))])
    return unitary_to_symplectic(u1).matrix @ sq @ unitary_to_symplectic(u2).matrix


def random_physical_cm(n, rng, max_r=0.8):
    """S diag(nu) S^T with thermal symplectic spectrum nu >= 1."""
    nus = 1.0 + rng.exponential(0.5, n)
    S = random_symplectic(n, rng, max_r)
    return S @ np.diag(np.repeat(nus, 2)) @ S.T


def random_partition(n, rng):
    modes = rng.permutation(n)
    k = rng.integers(1, n)
    m = rng.integers(1, n - k + 1)
    return tuple(int(i) for i in modes[:k]), tuple(int(i) for i in modes[k:k + m])


@pytest.fixture(scope="session")
def cluster():
    return square_cluster(R)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def lossy():
    return {float(eta): lossy_cluster(R, float(eta)) for eta in ETA_GRID}


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def record_criterion(request):
    """Log one pass/fail line per acceptance criterion for the terminal summary."""
    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        request.config.stash[_ACCEPTANCE].append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
