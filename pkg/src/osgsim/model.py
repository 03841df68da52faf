"""Domain types, parameter validation, and initial-state construction.

States are stored as unnormalized coefficient arrays C_e(n, q), C_g(n, q) on a
uniform momentum grid q = p/(hbar k).  The e-family index n runs 1..n_max and
the row C_e[n-1] carries n-1 photons; the g-family index runs 0..n_max and the
row C_g[n] carries n photons.  Discrete sums over the grid approximate
integrals with measure dq = 1/S, so a normalized state has
sum(|C|^2) * dq == 1.
"""

from dataclasses import dataclass, field, replace
from math import sqrt

import numpy as np

from . import _kernels


class BoundaryMassError(RuntimeError):
    """Probability mass at the edge of the momentum grid exceeded tolerance."""


class CutoffError(RuntimeError):
    """Probability mass in the top photon-number row exceeded tolerance."""


# fraction of grid cells (total, split between both edges) watched by the
# boundary monitor
BOUNDARY_FRACTION = 0.05
DEFAULT_BOUNDARY_TOL = 1e-6


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform grid on [-q_max, q_max] with spacing 1/subdivisions_per_recoil.

    The spacing divides the unit recoil exactly, so the shifts q -> q +- 1
    induced by absorbing/emitting one photon map grid points onto grid points
    (an integer shift by ``subdivisions_per_recoil`` cells).
    """

    subdivisions_per_recoil: int
    q_max: float

    def __post_init__(self):
        s, qm = self.subdivisions_per_recoil, self.q_max
        if int(s) != s or s < 1:
            raise ValueError(f"subdivisions_per_recoil must be a positive integer, got {s}")
        if qm < 1:
            raise ValueError(f"q_max must be >= 1, got {qm}")
        if abs(s * qm - round(s * qm)) > 1e-9:
            raise ValueError(f"q_max={qm} is not a multiple of the grid spacing 1/{s}")

    @property
    def spacing(self):
        return 1.0 / self.subdivisions_per_recoil

    @property
    def n_points(self):
        return 2 * round(self.subdivisions_per_recoil * self.q_max) + 1

    @property
    def q(self):
        """Grid points, symmetric about q = 0."""
        half = round(self.subdivisions_per_recoil * self.q_max)
        return np.arange(-half, half + 1) * self.spacing

    @property
    def recoil_cells(self):
        """Number of cells in one recoil unit (the exact shift q -> q + 1)."""
        return self.subdivisions_per_recoil


def make_grid(subdivisions_per_recoil, q_max):
    """Build a MomentumGrid; rejects non-positive or incompatible inputs."""
    return MomentumGrid(subdivisions_per_recoil, float(q_max))


@dataclass(frozen=True)
class FieldSpec:
    """Number-state amplitudes f(0)..f(n_max) of the cavity field."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        norm = np.sum(np.abs(amps) ** 2)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"field amplitudes not normalized: sum |f|^2 = {norm!r}")

    @property
    def n_max(self):
        return len(self.amplitudes) - 1

    def mean_photon_number(self):
        n = np.arange(len(self.amplitudes))
        return float(np.sum(n * np.abs(self.amplitudes) ** 2))


def field_fock(n, n_max):
    """Fock state |n> truncated at n_max."""
    if not 0 <= n <= n_max:
        raise ValueError(f"need 0 <= n <= n_max, got n={n}, n_max={n_max}")
    f = np.zeros(n_max + 1, dtype=complex)
    f[n] = 1.0
    return FieldSpec(f)


def field_coherent(alpha, n_max, tol=1e-10):
    """Coherent state truncated at n_max, renormalized over the cutoff.

    Raises if the truncation discards more than ``tol`` of the probability;
    alpha = 1 requires n_max >= 12 at the default tolerance.
    """
    n = np.arange(n_max + 1)
    log_fact = np.cumsum(np.concatenate(([0.0], np.log(np.arange(1, n_max + 1)))))
    amps = np.exp(-abs(alpha) ** 2 / 2) * np.power(complex(alpha), n) / np.exp(log_fact / 2)
    kept = np.sum(np.abs(amps) ** 2)
    if 1.0 - kept > tol:
        raise ValueError(
            f"photon cutoff n_max={n_max} keeps only {kept:.12f} of |alpha|={abs(alpha)}"
            f" coherent state (loss tolerance {tol})"
        )
    return FieldSpec(amps / sqrt(kept))


@dataclass(frozen=True)
class SystemParams:
    """Dimensionless system parameters.

    mu      hbar k^2 / (2 M g0); 0 means infinite mass (Raman-Nath regime)
    gamma   atomic decay rate gamma_A/g0 (collapse rate of the sigma_- channel)
    kappa   cavity field decay rate kappa/g0; the photon-channel collapse rate
            is 2*kappa
    delta   detuning (omega_C - omega_A)/g0
    drive   cavity drive amplitude epsilon/g0 (0 = undriven); the empty-cavity
            steady state is a coherent state with alpha = drive/kappa
    xi0     initial packet center, units of the wavelength
    delta_q initial momentum spread Delta p / (hbar k)
    mode_phase     'cos' or 'sin' standing-wave convention
    detuning_sign  sign convention for the diagonal detuning term on C_e
    """

    mu: float = 0.0
    gamma: float = 0.0
    kappa: float = 0.0
    delta: float = 0.0
    drive: float = 0.0
    xi0: float = 0.25
    delta_q: float = 10.0
    mode_phase: str = "cos"
    detuning_sign: int = +1

    def __post_init__(self):
        if self.mu < 0 or self.gamma < 0 or self.kappa < 0:
            raise ValueError("mu, gamma, kappa must be non-negative")
        if self.delta_q <= 0:
            raise ValueError("delta_q must be positive")
        if self.mode_phase not in ("cos", "sin"):
            raise ValueError(f"mode_phase must be 'cos' or 'sin', got {self.mode_phase!r}")
        if self.detuning_sign not in (+1, -1):
            raise ValueError("detuning_sign must be +1 or -1")

    @property
    def beta(self):
        """Width parameter of the initial packet, 1/(4 delta_q^2)."""
        return 1.0 / (4.0 * self.delta_q**2)

    def with_(self, **kw):
        return replace(self, **kw)


@dataclass
class PacketState:
    """Unnormalized expansion coefficients at scaled time tau.

    c_e has shape (n_max, P): row n-1 is the amplitude on |n-1 photons, q, e>.
    c_g has shape (n_max+1, P): row n is the amplitude on |n photons, q, g>.
    """

    grid: MomentumGrid
    n_max: int
    tau: float
    c_e: np.ndarray
    c_g: np.ndarray

    @property
    def measure(self):
        return self.grid.spacing

    def norm2(self):
        """Squared norm N = sum(|C_e|^2 + |C_g|^2) dq."""
        s = np.vdot(self.c_e, self.c_e).real + np.vdot(self.c_g, self.c_g).real
        return s * self.measure

    def renormalize(self):
        """Scale to unit norm in place; returns the pre-scaling norm."""
        n = self.norm2()
        if n <= 0:
            raise ValueError("cannot renormalize a zero state")
        scale = 1.0 / sqrt(n)
        self.c_e *= scale
        self.c_g *= scale
        return n

    def copy(self):
        return PacketState(self.grid, self.n_max, self.tau,
                           self.c_e.copy(), self.c_g.copy())

    def raw_moments(self):
        """(norm2, excited, photons), all unnormalized, in a single pass.

        Same numbers as norm2 / excited_expectation / photon_expectation but
        fused for the per-step collapse draw, where three separate array
        reductions are measurable overhead.
        """
        tot, exc, pho = _kernels.moments(self.c_e, self.c_g)
        dq = self.measure
        return tot * dq, exc * dq, pho * dq

    def photon_expectation(self):
        """Unnormalized <a^dag a> * dq; row C_e[n-1] carries n-1 photons."""
        n_e = np.arange(self.n_max)          # photons in e rows: 0..n_max-1
        n_g = np.arange(self.n_max + 1)
        s = np.sum(n_e * np.sum(np.abs(self.c_e) ** 2, axis=1))
        s += np.sum(n_g * np.sum(np.abs(self.c_g) ** 2, axis=1))
        return s * self.measure

    def excited_expectation(self):
        """Unnormalized <sigma_+ sigma_-> * dq."""
        return np.sum(np.abs(self.c_e) ** 2) * self.measure

    def boundary_fraction(self, fraction=BOUNDARY_FRACTION):
        """Probability fraction in the outermost cells (split over both edges)."""
        p = self.grid.n_points
        edge = max(1, int(round(p * fraction / 2)))
        w = (np.sum(np.abs(self.c_e[:, :edge]) ** 2) + np.sum(np.abs(self.c_g[:, :edge]) ** 2)
             + np.sum(np.abs(self.c_e[:, -edge:]) ** 2) + np.sum(np.abs(self.c_g[:, -edge:]) ** 2))
        n = self.norm2() / self.measure
        return w / n if n > 0 else 0.0

    def top_row_fraction(self):
        """Probability fraction in the highest photon-number rows."""
        w = np.sum(np.abs(self.c_e[-1]) ** 2) + np.sum(np.abs(self.c_g[-1]) ** 2)
        n = np.vdot(self.c_e, self.c_e).real + np.vdot(self.c_g, self.c_g).real
        return w / n if n > 0 else 0.0


def init_packet(grid, field_spec, params, boundary_tol=DEFAULT_BOUNDARY_TOL):
    """Initial state: ground atom, Gaussian momentum packet, given field.

    C_g(n, q) = F(n) exp(-beta q^2) exp(-2 pi i q xi0) with C_e = 0, rescaled
    so the grid-measure squared norm is exactly 1.  Raises if the Gaussian
    does not fit on the grid (boundary mass above ``boundary_tol``).
    """
    q = grid.q
    n_max = field_spec.n_max
    envelope = np.exp(-params.beta * q**2) * np.exp(-2j * np.pi * q * params.xi0)
    c_g = field_spec.amplitudes[:, None] * envelope[None, :]
    c_e = np.zeros((n_max, grid.n_points), dtype=complex)
    state = PacketState(grid, n_max, 0.0, c_e, c_g)
    state.renormalize()
    frac = state.boundary_fraction()
    if frac > boundary_tol:
        raise BoundaryMassError(
            f"initial packet keeps {frac:.3e} of its mass in the outer "
            f"{100 * BOUNDARY_FRACTION:.0f}% of grid cells (tolerance {boundary_tol}); "
            f"grid q_max={grid.q_max} too small for delta_q={params.delta_q}"
        )
    return state


@dataclass(frozen=True)
class JumpEvent:
    """One collapse event on a trajectory."""

    tau: float
    channel: str          # 'atomic' | 'cavity'
    eta: float = 0.0      # recoil projection, atomic channel only

    def __post_init__(self):
        if self.channel not in ("atomic", "cavity"):
            raise ValueError(f"unknown jump channel {self.channel!r}")
        if not -1.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [-1, 1], got {self.eta}")
