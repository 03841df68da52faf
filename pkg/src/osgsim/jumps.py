"""Collapse probabilities and the two quantum-jump channels.

An atomic jump applies exp(-ikx eta) sigma_- : every excited amplitude drops
to the ground family (photon number unchanged) and the whole packet recoils
by eta recoil units, eta being the projection of the spontaneous photon's
direction on the cavity axis.  A cavity jump applies the photon annihilation
operator to both families.  Neither renormalizes; the caller decides when.

Momentum shifts are performed cyclically on the grid after quantizing eta to
the nearest multiple of the grid spacing.  A cyclic shift keeps |psi(xi)|^2
exactly invariant (the shift is a pure phase in position space), whereas
zero-filling would break that identity at the level of the far-tail mass;
the wrapped-around amplitude is negligible for any packet that fits the grid.
"""

from dataclasses import dataclass

import numpy as np

MAX_STEP_PROBABILITY = 0.1


@dataclass(frozen=True)
class ChannelProbabilities:
    """First-order jump probabilities for one time step."""

    p_atom: float
    p_cav: float

    @property
    def total(self):
        return self.p_atom + self.p_cav


def collapse_probabilities(state, params, dtau):
    """Per-step jump probabilities gamma dt <sig+sig-to>/N and 2 kappa dt <n>/N.

    Raises if their sum reaches 0.1: beyond that the first-order jump
    statistics behind the single-draw rule are no longer trustworthy and the
    step size must come down.
    """
    n, exc, pho = state.raw_moments()
    if n <= 0:
        raise ValueError("collapse probabilities undefined for a zero state")
    p_atom = params.gamma * dtau * exc / n
    p_cav = 2.0 * params.kappa * dtau * pho / n
    if p_atom + p_cav >= MAX_STEP_PROBABILITY:
        raise ValueError(
            f"jump probability {p_atom + p_cav:.3f} in one step of {dtau}; "
            f"first-order statistics require p < {MAX_STEP_PROBABILITY} "
            f"(reduce dtau)"
        )
    return ChannelProbabilities(p_atom, p_cav)


def quantize_eta(eta, grid):
    """Nearest representable recoil projection (multiple of the spacing)."""
    cells = round(eta * grid.subdivisions_per_recoil)
    return cells, cells * grid.spacing


def recoil_shift(rows, cells):
    """C(q) -> C(q + eta): cyclic index shift by -cells on each row.

    The shift acts on the periodically identified grid: the +q_max endpoint
    is the same point as -q_max (they alias to one DFT bin), so its
    amplitude is folded down before rolling and the endpoint slot comes
    back empty.  This makes the shift commute exactly with the position
    synthesis, i.e. |psi(xi)|^2 is bit-level invariant under recoil.
    """
    if cells == 0:
        return rows.copy()
    ring = rows[:, :-1].copy()
    ring[:, 0] += rows[:, -1]
    ring = np.roll(ring, -cells, axis=1)
    out = np.empty_like(rows)
    out[:, :-1] = ring
    out[:, -1] = 0.0
    return out


def atomic_jump(state, eta):
    """Spontaneous-emission collapse; returns a new unnormalized state.

    Cg(n, q) <- Ce(n+1, q + eta) with the excited family zeroed; eta is
    quantized to the grid (error at most half a cell, immaterial next to
    the packet width).
    """
    if not -1.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [-1, 1], got {eta}")
    if state.excited_expectation() <= 0:
        raise ValueError("atomic jump from a state with no excited amplitude")
    cells, _ = quantize_eta(eta, state.grid)
    out = state.copy()
    out.c_g[: state.n_max] = recoil_shift(state.c_e, cells)
    out.c_g[state.n_max] = 0.0
    out.c_e[:] = 0.0
    return out


def cavity_jump(state):
    """Photon-escape collapse; returns a new unnormalized state.

    Ce(n, q) <- sqrt(n) Ce(n+1, q) and Cg(n, q) <- sqrt(n+1) Cg(n+1, q):
    the annihilation operator acting on both families, no momentum change.
    """
    if state.photon_expectation() <= 0:
        raise ValueError("cavity jump from a state with no photons")
    out = state.copy()
    n_max = state.n_max
    if n_max >= 1:
        k = np.arange(1, n_max)      # new e rows 0..n_max-2 from old 1..n_max-1
        out.c_e[:-1] = np.sqrt(k)[:, None] * state.c_e[1:]
        out.c_e[-1] = 0.0
    n = np.arange(1, n_max + 1)
    out.c_g[:-1] = np.sqrt(n)[:, None] * state.c_g[1:]
    out.c_g[-1] = 0.0
    return out


def select_event(probs, r):
    """Partition one uniform draw into (None | 'atomic' | 'cavity')."""
    if r < probs.p_atom:
        return "atomic"
    if r < probs.p_atom + probs.p_cav:
        return "cavity"
    return None


def mask_channels(probs, channels):
    """Zero out the click probability of any channel not in ``channels``.

    The continuous (non-Hermitian) part of the evolution is untouched, so a
    masked channel still drains norm; it just never fires.  This is how one
    conditions a trajectory on "no spontaneous emission" while leaving the
    cavity output monitored, or vice versa.
    """
    return ChannelProbabilities(
        probs.p_atom if "atomic" in channels else 0.0,
        probs.p_cav if "cavity" in channels else 0.0,
    )
