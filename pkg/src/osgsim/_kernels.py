"""Numba inner loops for the coefficient equations of motion.

Layout contract (shared with model.PacketState): ce has n_max rows, row k
holding the amplitude on |k photons, q, e> for couplet n = k+1; cg has
n_max+1 rows, row n holding |n photons, q, g>.  All arrays are C-contiguous
complex128.  Off-grid momentum shifts read as zero (hard wall), which is what
makes the endpoint columns special-cased below.

The standing-wave coupling enters through two complex coefficients
(c_lo, c_hi) multiplying the q-1 and q+1 neighbors: (1/2, 1/2) for a cos
mode, (-i/2, +i/2) for sin.  A time-dependent coupling envelope is folded
into these scalars by the caller, which is why the RK4 driver takes one
(c_lo, c_hi) pair per stage time.
"""

import numpy as np
from numba import njit

_JIT = dict(cache=True, fastmath=True, nogil=True)


@njit(**_JIT)
def deriv(ce, cg, dce, dcg, shift, sqn, gamma, kappa, delta_s, mu_q2,
          c_lo, c_hi, eps):
    """dce/dcg <- time derivative of ce/cg (overwrites outputs).

    ``shift`` is the number of grid cells in one photon recoil, i.e. the
    index offset realizing q -> q -+ 1.
    """
    n_e, npts = ce.shape
    hi0 = npts - shift
    # excited family: row k <-> couplet n = k+1, carrying n-1 photons
    for k in range(n_e):
        n = k + 1
        rn = sqn[n]
        cg_n = cg[n]
        ce_n = ce[k]
        out = dce[k]
        ke = -(0.5 * gamma + kappa * (n - 1))
        for i in range(shift):  # q-1 neighbor off-grid
            dd = ke - 1j * (mu_q2[i] + delta_s)
            out[i] = -rn * c_hi * cg_n[i + shift] + dd * ce_n[i]
        for i in range(shift, hi0):
            dd = ke - 1j * (mu_q2[i] + delta_s)
            out[i] = -rn * (c_lo * cg_n[i - shift] + c_hi * cg_n[i + shift]) \
                + dd * ce_n[i]
        for i in range(hi0, npts):  # q+1 neighbor off-grid
            dd = ke - 1j * (mu_q2[i] + delta_s)
            out[i] = -rn * c_lo * cg_n[i - shift] + dd * ce_n[i]
    # ground family
    for n in range(n_e + 1):
        out = dcg[n]
        cg_n = cg[n]
        kg = -kappa * n
        if n >= 1:
            rn = sqn[n]
            ce_n = ce[n - 1]
            for i in range(shift):
                out[i] = rn * c_hi * ce_n[i + shift] + (kg - 1j * mu_q2[i]) * cg_n[i]
            for i in range(shift, hi0):
                out[i] = rn * (c_lo * ce_n[i - shift] + c_hi * ce_n[i + shift]) \
                    + (kg - 1j * mu_q2[i]) * cg_n[i]
            for i in range(hi0, npts):
                out[i] = rn * c_lo * ce_n[i - shift] + (kg - 1j * mu_q2[i]) * cg_n[i]
        else:
            for i in range(npts):
                out[i] = (kg - 1j * mu_q2[i]) * cg_n[i]
    if eps != 0.0:
        # cavity drive couples neighboring photon numbers within each family
        for k in range(n_e):
            out = dce[k]
            if k >= 1:
                lo = ce[k - 1]
                w = eps * sqn[k]       # sqrt(n-1), photon index k-1 -> k
                for i in range(npts):
                    out[i] += w * lo[i]
            if k + 1 < n_e:
                hi = ce[k + 1]
                w = eps * sqn[k + 1]   # sqrt(n)
                for i in range(npts):
                    out[i] -= w * hi[i]
        for n in range(n_e + 1):
            out = dcg[n]
            if n >= 1:
                lo = cg[n - 1]
                w = eps * sqn[n]
                for i in range(npts):
                    out[i] += w * lo[i]
            if n + 1 <= n_e:
                hi = cg[n + 1]
                w = eps * sqn[n + 1]
                for i in range(npts):
                    out[i] -= w * hi[i]


@njit(**_JIT)
def _lincomb(out, base, k, a):
    """out = base + a*k elementwise."""
    rows, cols = out.shape
    for i in range(rows):
        o, b, s = out[i], base[i], k[i]
        for j in range(cols):
            o[j] = b[j] + a * s[j]


@njit(**_JIT)
def _accumulate(out, k, a):
    """out += a*k elementwise."""
    rows, cols = out.shape
    for i in range(rows):
        o, s = out[i], k[i]
        for j in range(cols):
            o[j] += a * s[j]


@njit(**_JIT)
def _copy_into(out, src):
    rows, cols = out.shape
    for i in range(rows):
        o, s = out[i], src[i]
        for j in range(cols):
            o[j] = s[j]


@njit(**_JIT)
def rk4_step(ce, cg, dt, shift, sqn, gamma, kappa, delta_s, mu_q2, eps,
             c_lo_a, c_hi_a, c_lo_b, c_hi_b, c_lo_c, c_hi_c,
             k_ce, k_cg, y_ce, y_cg, acc_ce, acc_cg):
    """Classical RK4 update of (ce, cg) in place.

    (c_lo_a, c_hi_a) are the coupling coefficients at the step start,
    (.._b) at midpoint, (.._c) at the end; all equal when the coupling is
    time-independent.  k/y/acc are caller-owned scratch arrays.
    """
    h2, h6, h3 = 0.5 * dt, dt / 6.0, dt / 3.0
    deriv(ce, cg, k_ce, k_cg, shift, sqn, gamma, kappa, delta_s, mu_q2,
          c_lo_a, c_hi_a, eps)
    _lincomb(acc_ce, ce, k_ce, h6)
    _lincomb(acc_cg, cg, k_cg, h6)
    _lincomb(y_ce, ce, k_ce, h2)
    _lincomb(y_cg, cg, k_cg, h2)
    deriv(y_ce, y_cg, k_ce, k_cg, shift, sqn, gamma, kappa, delta_s, mu_q2,
          c_lo_b, c_hi_b, eps)
    _accumulate(acc_ce, k_ce, h3)
    _accumulate(acc_cg, k_cg, h3)
    _lincomb(y_ce, ce, k_ce, h2)
    _lincomb(y_cg, cg, k_cg, h2)
    deriv(y_ce, y_cg, k_ce, k_cg, shift, sqn, gamma, kappa, delta_s, mu_q2,
          c_lo_b, c_hi_b, eps)
    _accumulate(acc_ce, k_ce, h3)
    _accumulate(acc_cg, k_cg, h3)
    _lincomb(y_ce, ce, k_ce, dt)
    _lincomb(y_cg, cg, k_cg, dt)
    deriv(y_ce, y_cg, k_ce, k_cg, shift, sqn, gamma, kappa, delta_s, mu_q2,
          c_lo_c, c_hi_c, eps)
    _accumulate(acc_ce, k_ce, h6)
    _accumulate(acc_cg, k_cg, h6)
    _copy_into(ce, acc_ce)
    _copy_into(cg, acc_cg)


@njit(**_JIT)
def euler_step(ce, cg, dt, shift, sqn, gamma, kappa, delta_s, mu_q2, eps,
               c_lo, c_hi, k_ce, k_cg):
    """Forward Euler update of (ce, cg) in place."""
    deriv(ce, cg, k_ce, k_cg, shift, sqn, gamma, kappa, delta_s, mu_q2,
          c_lo, c_hi, eps)
    _accumulate(ce, k_ce, dt)
    _accumulate(cg, k_cg, dt)


@njit(**_JIT)
def moments(ce, cg):
    """One-pass (total, excited, photon-weighted) sums of |C|^2, no measure."""
    n_e, npts = ce.shape
    tot = 0.0
    exc = 0.0
    pho = 0.0
    for k in range(n_e):
        row = ce[k]
        s = 0.0
        for i in range(npts):
            v = row[i]
            s += v.real * v.real + v.imag * v.imag
        exc += s
        pho += k * s
        tot += s
    for n in range(n_e + 1):
        row = cg[n]
        s = 0.0
        for i in range(npts):
            v = row[i]
            s += v.real * v.real + v.imag * v.imag
        pho += n * s
        tot += s
    return tot, exc, pho


def warmup():
    """Compile the kernels on a minimal problem (slow first call otherwise)."""
    ce = np.zeros((1, 5), dtype=np.complex128)
    cg = np.zeros((2, 5), dtype=np.complex128)
    scratch = [np.zeros_like(ce), np.zeros_like(cg)]
    sqn = np.sqrt(np.arange(2.0))
    mu = np.zeros(5)
    half = 0.5 + 0j
    rk4_step(ce, cg, 1e-3, 1, sqn, 0.0, 0.0, 0.0, mu, 0.0,
             half, half, half, half, half, half,
             scratch[0], scratch[1], np.zeros_like(ce), np.zeros_like(cg),
             np.zeros_like(ce), np.zeros_like(cg))
    euler_step(ce, cg, 1e-3, 1, sqn, 0.0, 0.0, 0.0, mu, 0.0, half, half,
               scratch[0], scratch[1])
    moments(ce, cg)
