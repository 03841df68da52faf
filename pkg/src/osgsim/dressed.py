"""Dressed-state algebra for the one-photon couplet {|0,e>, |1,g>}.

Everything here is closed-form: the position-dependent mixing angle, the
Rabi-split eigenenergies, the projection of bare amplitudes onto the dressed
basis, and two scalar estimates (pulsation period of a packet launched at a
node, and the net excursion during the linear-acceleration stage).  Energy
offsets common to both levels are dropped throughout; only the x-dependent
splitting survives, which is all the mechanical forces care about.

Positions are given in wavelengths (xi = x/lambda), detunings and energies in
units of the peak coupling g0.
"""

from dataclasses import dataclass
from math import asinh, atan, cos, exp, pi, sin, sqrt

from scipy.integrate import quad


def mode_g(xi, mode_phase="sin"):
    """Standing-wave coupling g(x)/g0 at position xi = x/lambda."""
    kx = 2.0 * pi * xi
    return sin(kx) if mode_phase == "sin" else cos(kx)


def mixing_angle(xi, delta, mode_phase="sin"):
    """Mixing angle theta in [0, pi/2], tan(theta) = X + sqrt(X^2 + 1).

    X = delta / 2g(x).  The closed form keeps theta in (0, pi/2) for every
    g != 0 and reproduces both node-side limits: theta -> pi/2 as g -> 0+
    and theta -> 0 as g -> 0- (for delta > 0; reversed for delta < 0).
    Exactly at a node the g -> 0+ limit is returned.
    """
    g = mode_g(xi, mode_phase)
    if g == 0.0:
        if delta > 0:
            return pi / 2
        if delta < 0:
            return 0.0
        return pi / 4
    x_ratio = delta / (2.0 * g)
    # X + sqrt(X^2+1) = exp(asinh(X)); stable for |X| up to overflow
    try:
        t = exp(asinh(x_ratio))
    except OverflowError:
        return pi / 2
    return atan(t)


def dressed_energies(xi, delta, mode_phase="sin"):
    """Couplet eigenenergies +-sqrt(g^2 + (delta/2)^2) in units hbar*g0."""
    g = mode_g(xi, mode_phase)
    e = sqrt(g * g + 0.25 * delta * delta)
    return e, -e


@dataclass(frozen=True)
class DressedPoint:
    """Mixing angle and split energies at one position."""

    x_over_lambda: float
    theta: float
    e_plus: float
    e_minus: float


def dressed_point(xi, delta, mode_phase="sin"):
    e_plus, e_minus = dressed_energies(xi, delta, mode_phase)
    return DressedPoint(xi, mixing_angle(xi, delta, mode_phase), e_plus, e_minus)


def decompose_bare(c1, c2, xi, delta, mode_phase="sin"):
    """Dressed amplitudes (A+, A-) of the state c1|0,e> + c2|1,g>.

    A+ = c1 cos(theta) - i c2 sin(theta)
    A- = c1 sin(theta) + i c2 cos(theta)
    Unitary, so |A+|^2 + |A-|^2 = |c1|^2 + |c2|^2.
    """
    th = mixing_angle(xi, delta, mode_phase)
    a_plus = c1 * cos(th) - 1j * c2 * sin(th)
    a_minus = c1 * sin(th) + 1j * c2 * cos(th)
    return a_plus, a_minus


def effective_coupling(dx_over_lambda):
    """Coupling averaged over a packet of rms width dx centered on a node.

    Linearizing the mode function about the node gives the overlap
    2*sqrt(2*pi)*(dx/lambda); about 4% of g0 for dx = lambda/(40*pi).
    """
    return 2.0 * sqrt(2.0 * pi) * dx_over_lambda


def pulsation_period(mu):
    """Period of the classical pendulum-like packet oscillation at a node.

    tau0 = (2/sqrt(mu)) * integral_0^{pi/2} ds / sqrt(sin s).  The endpoint
    singularity is removed by substituting s = u^2 before quadrature.
    """
    if mu <= 0:
        raise ValueError("pulsation period is infinite for mu <= 0")
    val, _ = quad(lambda u: 2.0 * u / sqrt(sin(u * u)), 1e-12, sqrt(pi / 2),
                  epsabs=1e-10, epsrel=1e-10)
    return 2.0 * val / sqrt(mu)


def excursion_estimate(mu):
    """Net packet excursion x/lambda from the linear momentum-growth model.

    Momentum grows like 0.9*tau recoils up to tau = 100 and the drift
    doubles by mirror symmetry; the integral collapses to 2.9e3 * mu.
    """
    if mu < 0:
        raise ValueError("mu must be non-negative")
    return 2.9e3 * mu
