import numpy as np
import pytest

from qhmhd.spectral import ScalarField, TorusGrid, VectorField

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def grid64():
    return TorusGrid(64)


@pytest.fixture
def grid32():
    return TorusGrid(32)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_modes(rng, grid, k_hi, ncomp=None, k_lo=1.0):
    """Random real field with radial band [k_lo, k_hi], built mode by mode in physical space."""
    x1, x2 = grid.x
    shape = (grid.n, grid.n)
    comps = 1 if ncomp is None else ncomp
    out = np.zeros((comps,) + shape)
    kk = int(np.floor(k_hi))
    for a in range(-kk, kk + 1):
        for b in range(0, kk + 1):
            if b == 0 and a <= 0:
                continue
            if not (k_lo <= np.hypot(a, b) <= k_hi):
                continue
            amp = rng.standard_normal((comps, 2))
            phase = a * x1 + b * x2
            out += amp[:, :1, None] * np.cos(phase) + amp[:, 1:, None] * np.sin(phase)
    if ncomp is None:
        return ScalarField.from_physical(grid, out[0])
    return VectorField.from_physical(grid, *out)


def random_solenoidal_oracle(rng, grid, k_hi, k_lo=1.0):
    """Divergence-free field u = perp grad psi built from an explicit stream function."""
    x1, x2 = grid.x
    u1 = np.zeros((grid.n, grid.n))
    u2 = np.zeros_like(u1)
    kk = int(np.floor(k_hi))
    for a in range(-kk, kk + 1):
        for b in range(0, kk + 1):
            if b == 0 and a <= 0:
                continue
            if not (k_lo <= np.hypot(a, b) <= k_hi):
                continue
            c, s = rng.standard_normal(2) / (a * a + b * b)
            ph = a * x1 + b * x2
            # psi = c cos(ph) + s sin(ph); u = (-d2 psi, d1 psi)
            dpsi = -c * np.sin(ph) + s * np.cos(ph)
            u1 += -b * dpsi
            u2 += a * dpsi
    return VectorField.from_physical(grid, u1, u2)


def vorticity_transport_oracle(U):
    """-(U . grad) omega with omega = d1 U2 - d2 U1, derivatives taken with numpy FFTs."""
    grid = U.grid
    n = grid.n
    k = np.fft.fftfreq(n, 1.0 / n)
    k[n // 2] = 0.0
    K1, K2 = np.meshgrid(k, k, indexing="ij")
    u1, u2 = U.physical()

    def d(f, K):
        return np.real(np.fft.ifft2(1j * K * np.fft.fft2(f)))

    w = d(u2, K1) - d(u1, K2)
    adv = u1 * d(w, K1) + u2 * d(w, K2)
    return ScalarField(grid, -grid.fft(adv) * grid.dealias_mask)
