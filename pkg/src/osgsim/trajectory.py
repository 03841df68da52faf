"""Single-trajectory drivers: coherent stretches punctuated by jumps.

Between events the state follows the non-Hermitian stepper from
:mod:`osgsim.dynamics`; jumps are the instantaneous collapse maps from
:mod:`osgsim.jumps`.  Four driving modes are supported:

* ``Stochastic`` -- each step compares the two-channel jump probability
  against a single uniform draw; at most one jump fires per step.
* ``Scheduled`` -- jumps forced at given times, no randomness at all.
* ``NoJump`` -- continuous decay only, renormalized every step.
* ``Closed`` -- gamma and kappa forced to zero.

Jumps are instantaneous: the clock does not advance across a collapse,
so the coherent time adds up to exactly ``tau_end`` in every mode.
"""

from dataclasses import dataclass

import numpy as np

from .dynamics import DEFAULT_DTAU_RK4, Propagator
from .jumps import (
    atomic_jump,
    cavity_jump,
    collapse_probabilities,
    mask_channels,
    quantize_eta,
    select_event,
)
from .model import (
    DEFAULT_BOUNDARY_TOL,
    BoundaryMassError,
    CutoffError,
    JumpEvent,
)
from .observables import (
    Distribution1D,
    excited_population,
    momentum_distribution,
    moments,
    position_distribution,
)

__all__ = [
    "Stochastic",
    "Scheduled",
    "NoJump",
    "Closed",
    "Snapshot",
    "TrajectoryRecord",
    "run_trajectory",
]

# squared-norm floor below which the state is rescaled to dodge underflow
_NORM_FLOOR = 1e-100


@dataclass(frozen=True)
class Stochastic:
    """Random jumps.  ``seed`` is anything ``np.random.default_rng``
    accepts (int, tuple of ints, SeedSequence, or a live Generator whose
    stream should be continued).

    ``channels`` lists which collapse channels may actually fire; a
    suppressed channel keeps its continuous (non-Hermitian) decay but never
    clicks, which is the artificial conditioning used to isolate what the
    jumps themselves do to the packet."""

    seed: object = None
    channels: tuple = ("atomic", "cavity")

    def __post_init__(self):
        chans = tuple(self.channels)
        object.__setattr__(self, "channels", chans)
        bad = set(chans) - {"atomic", "cavity"}
        if bad:
            raise ValueError(f"unknown jump channel(s) {sorted(bad)}")


@dataclass(frozen=True)
class Scheduled:
    """Jumps forced at ``jump_times`` (strictly increasing), all on the
    same channel and, for the atomic channel, with the same recoil eta."""

    jump_times: tuple = ()
    channel: str = "atomic"
    eta: float = 0.0

    def __post_init__(self):
        times = tuple(float(t) for t in self.jump_times)
        object.__setattr__(self, "jump_times", times)
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("scheduled jump times must be strictly increasing")
        if self.channel not in ("atomic", "cavity"):
            raise ValueError(f"unknown jump channel {self.channel!r}")


@dataclass(frozen=True)
class NoJump:
    """Continuous (non-Hermitian) decay with per-step renormalization and
    no jumps on either channel."""


@dataclass(frozen=True)
class Closed:
    """Unitary evolution; any damping rates in the parameters are ignored."""


@dataclass(frozen=True)
class Snapshot:
    """Observable bundle at one instant, computed on a renormalized copy.

    ``norm2`` is the squared norm *before* renormalization, so raw
    (unnormalized) populations are recoverable as e.g. ``excited * norm2``.
    The moment triples are (mean, std, positions of local maxima).
    """

    tau: float
    norm2: float
    momentum: Distribution1D
    position: Distribution1D
    excited_momentum: Distribution1D
    excited: float
    photons: float
    momentum_moments: tuple
    position_moments: tuple
    state: object = None


@dataclass
class TrajectoryRecord:
    jumps: list
    snapshots: dict
    trace: dict
    final_state: object
    forced_renorms: int = 0


def _snapshot(state, keep_state):
    work = state.copy()
    n2 = work.norm2()
    work.renormalize()
    mom = momentum_distribution(work)
    pos = position_distribution(work)
    pe_dist, pe = excited_population(work)
    m_mom = moments(mom)
    m_pos = moments(pos)
    return Snapshot(
        tau=state.tau,
        norm2=n2,
        momentum=mom,
        position=pos,
        excited_momentum=pe_dist,
        excited=pe,
        photons=work.photon_expectation(),
        momentum_moments=(m_mom[0], m_mom[1], tuple(m_mom[2])),
        position_moments=(m_pos[0], m_pos[1], tuple(m_pos[2])),
        state=work if keep_state else None,
    )


def run_trajectory(initial, params, mode, tau_end, dtau=DEFAULT_DTAU_RK4,
                   snapshot_times=(), *, envelope=None, trace_every=0,
                   keep_states=False, check_every=50,
                   boundary_tol=DEFAULT_BOUNDARY_TOL, cutoff_tol=1e-6):
    """Drive one trajectory from ``initial.tau`` to ``tau_end``.

    Snapshots are taken at the requested times (after any jump scheduled
    at the same instant) and stored under the requested keys.  Jumps
    renormalize the state; between jumps the unnormalized state is carried
    as is, except in NoJump mode which renormalizes every step.

    ``trace_every`` > 0 records a light time series (tau, norm2, excited
    fraction, photon number, position/momentum std) every that many steps.

    Two health monitors run every ``check_every`` steps: the boundary
    monitor rejects runs whose packet reaches the momentum-grid edge, and
    the photon-cutoff monitor rejects driven runs that climb into the top
    Fock row.  Without a drive the photon ladder cannot be climbed, so the
    cutoff monitor only runs when ``params.drive != 0``.  A state whose
    squared norm decays below 1e-100 is rescaled in place (counted in
    ``forced_renorms``) to keep long damped stretches out of underflow.
    """
    if dtau <= 0:
        raise ValueError("dtau must be positive")
    state = initial.copy()
    tau0 = state.tau
    if tau_end < tau0 - 1e-12:
        raise ValueError("tau_end lies before the initial time")

    run_params = params
    rng = None
    if isinstance(mode, Closed):
        run_params = params.with_(gamma=0.0, kappa=0.0)
    elif isinstance(mode, NoJump):
        if params.gamma == 0 and params.kappa == 0:
            raise ValueError("NoJump mode is meaningless without damping")
    elif isinstance(mode, Stochastic):
        rng = np.random.default_rng(mode.seed)
        live_channels = mode.channels
    elif not isinstance(mode, Scheduled):
        raise TypeError(f"unknown trajectory mode {mode!r}")

    # breakpoints: all times where something must happen, in order
    marks = {float(tau_end): set()}
    for t in snapshot_times:
        t = float(t)
        if t < tau0 - 1e-12 or t > tau_end + 1e-12:
            raise ValueError(f"snapshot time {t} outside [{tau0}, {tau_end}]")
        marks.setdefault(t, set()).add("snap")
    if isinstance(mode, Scheduled):
        for t in mode.jump_times:
            if t <= tau0 or t > tau_end + 1e-12:
                raise ValueError(f"scheduled jump at {t} outside ({tau0}, {tau_end}]")
            marks.setdefault(t, set()).add("jump")

    prop = Propagator(state.grid, state.n_max, run_params, envelope=envelope)
    record = TrajectoryRecord(jumps=[], snapshots={}, trace={}, final_state=state)
    rows = []
    renorm_every_step = isinstance(mode, NoJump)
    n_steps = 0

    def monitor(st):
        if st.norm2() < _NORM_FLOOR:
            st.renormalize()
            record.forced_renorms += 1
        if st.boundary_fraction() > boundary_tol:
            raise BoundaryMassError(
                f"packet reached the momentum boundary at tau={st.tau:.4g} "
                f"(edge fraction {st.boundary_fraction():.3g} > {boundary_tol:g})")
        if run_params.drive != 0 and cutoff_tol is not None \
                and st.top_row_fraction() > cutoff_tol:
            raise CutoffError(
                f"population climbed into the top photon row at "
                f"tau={st.tau:.4g} (fraction {st.top_row_fraction():.3g})")

    def trace_row(st):
        n2 = st.norm2()
        rows.append((st.tau, n2,
                     st.excited_expectation() / n2,
                     st.photon_expectation() / n2,
                     position_distribution(st).std(),
                     momentum_distribution(st).std()))

    if trace_every:
        trace_row(state)

    for t in sorted(marks):
        while True:
            remaining = t - state.tau
            if remaining <= 1e-9 * dtau:
                break
            dt = dtau if remaining > dtau else remaining
            if rng is not None:
                probs = collapse_probabilities(state, run_params, dt)
                probs = mask_channels(probs, live_channels)
                channel = select_event(probs, rng.random())
                if channel is not None:
                    if channel == "atomic":
                        _, eta_q = quantize_eta(rng.uniform(-1.0, 1.0), state.grid)
                        state = atomic_jump(state, eta_q)
                    else:
                        eta_q = 0.0
                        state = cavity_jump(state)
                    state.renormalize()
                    record.jumps.append(JumpEvent(state.tau, channel, eta_q))
                    continue        # the collapse consumed no time
            prop.step_rk4(state, dt)
            if renorm_every_step:
                state.renormalize()
            n_steps += 1
            if check_every and n_steps % check_every == 0:
                monitor(state)
            if trace_every and n_steps % trace_every == 0:
                trace_row(state)
        state.tau = t               # land exactly, killing roundoff residue

        if "jump" in marks[t]:
            if mode.channel == "atomic":
                _, eta_q = quantize_eta(mode.eta, state.grid)
                state = atomic_jump(state, eta_q)
            else:
                eta_q = 0.0
                state = cavity_jump(state)
            state.renormalize()
            record.jumps.append(JumpEvent(state.tau, mode.channel, eta_q))
        if "snap" in marks[t]:
            record.snapshots[t] = _snapshot(state, keep_states)

    if trace_every and (not rows or rows[-1][0] != state.tau):
        trace_row(state)
    if rows:
        cols = np.array(rows, dtype=float).T
        record.trace = dict(zip(
            ("tau", "norm2", "excited", "photons", "position_std",
             "momentum_std"), cols))
    record.final_state = state
    return record
