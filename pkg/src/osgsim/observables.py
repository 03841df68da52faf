"""Distributions and summary statistics over packet states.

Position densities are synthesized from the momentum coefficients by DFT:
with grid spacing 1/S the conjugate position variable is periodic with
period S wavelengths and resolution 1/(2 q_max).  The reported window
defaults to one central wavelength, which covers the physics (the packet
stays within a wavelength of its launch node); pass window=None for the
full period.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks


@dataclass(frozen=True)
class Distribution1D:
    """Sampled probability density over a uniform 1D support."""

    axis: str            # 'q' or 'xi'
    support: np.ndarray
    density: np.ndarray
    measure: float

    def total(self):
        return float(np.sum(self.density) * self.measure)

    def mean(self):
        w = np.sum(self.density)
        return float(np.sum(self.support * self.density) / w)

    def std(self):
        m = self.mean()
        w = np.sum(self.density)
        return float(np.sqrt(np.sum((self.support - m) ** 2 * self.density) / w))


def momentum_distribution(state):
    """P(q): total population per momentum cell across all levels."""
    n = state.norm2()
    dens = (np.sum(np.abs(state.c_e) ** 2, axis=0)
            + np.sum(np.abs(state.c_g) ** 2, axis=0)) / n
    return Distribution1D("q", state.grid.q, dens, state.measure)


def position_amplitudes(state):
    """Position-space wave functions (rows like c_e/c_g) and the xi grid.

    One period of the conjugate grid: xi_j = -S/2 + j/(2 q_max) for
    j = 0..2*S*q_max - 1.  The two half-recoil endpoint cells of the
    momentum grid alias onto one DFT bin and are folded together.
    """
    grid = state.grid
    n = grid.n_points - 1            # DFT length, = 2*S*q_max
    s = grid.subdivisions_per_recoil
    dq = grid.spacing
    signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)

    def rows_to_xi(c):
        d = c[:, :n] * signs
        d[:, 0] += c[:, n]           # q = +q_max folds onto q = -q_max
        return n * dq * np.fft.ifft(d, axis=1)

    xi = -s / 2 + np.arange(n) / (2 * grid.q_max)
    return rows_to_xi(np.asarray(state.c_e)), rows_to_xi(np.asarray(state.c_g)), xi


def position_distribution(state, window=(-0.5, 0.5)):
    """P(xi) over one period, optionally restricted to a window.

    The density is normalized over the full period; restricting the window
    only slices the report, so a packet living inside the window integrates
    to ~1 there.
    """
    psi_e, psi_g, xi = position_amplitudes(state)
    dens = np.sum(np.abs(psi_e) ** 2, axis=0) + np.sum(np.abs(psi_g) ** 2, axis=0)
    dxi = 1.0 / (2 * state.grid.q_max)
    dens = dens / (np.sum(dens) * dxi)
    if window is not None:
        lo, hi = window
        keep = (xi >= lo) & (xi < hi)
        xi, dens = xi[keep], dens[keep]
    return Distribution1D("xi", xi, dens, dxi)


def excited_population(state):
    """(P_e(q) distribution, total excited-state probability P_e)."""
    n = state.norm2()
    dens = np.sum(np.abs(state.c_e) ** 2, axis=0) / n
    dist = Distribution1D("q", state.grid.q, dens, state.measure)
    return dist, dist.total()


def moments(dist, prominence=0.02):
    """(mean, std, positions of local maxima).

    Maxima are counted with a prominence threshold expressed as a fraction
    of the global maximum (default 2%), which turns 'double/triple peaked'
    into a crisp predicate.
    """
    peaks, _ = find_peaks(dist.density, prominence=prominence * dist.density.max())
    return dist.mean(), dist.std(), list(dist.support[peaks])


def post_jump_oracle(beta, eta, grid):
    """Momentum profile right after an atomic jump from the early-time state.

    P(q) proportional to [exp(-beta(q+eta+1)^2) - exp(-beta(q+eta-1)^2)]^2,
    a two-Gaussian difference whose lobes sit near -eta +- 1/sqrt(2 beta)
    (i.e. +-sqrt(2)*delta_q for eta = 0).
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    q = grid.q
    amp = np.exp(-beta * (q + eta + 1) ** 2) - np.exp(-beta * (q + eta - 1) ** 2)
    dens = amp**2
    dens /= dens.sum() * grid.spacing
    return Distribution1D("q", q, dens, grid.spacing)


def uncertainty_product(state):
    """Delta_xi * Delta_q over the full period; 1/(4 pi) marks minimum uncertainty."""
    dq = momentum_distribution(state).std()
    dxi = position_distribution(state, window=None).std()
    return dxi * dq
