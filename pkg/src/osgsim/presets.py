"""Ready-made run configurations for the canonical demonstration plots.

Each preset is a named bundle of runs expressed as plain JSON-able config
dicts, the same format the service endpoints and the CLI accept.  The
``figN`` names index the standard plot set produced by this package:

========  ===========================================================
fig2      node-launch pulsation of a closed single-quantum packet
fig5      detuned evolution growing a third (trapped) coordinate peak
fig6      packet shapes right after one emission at successive times
fig7      frozen coordinate profile of an infinitely heavy atom
fig8      continuous-decay squeezing, then one emission splits packet
fig9      excited-state momentum profile while no emission occurs
fig10     successive emissions carving 2, 3, 4 momentum peaks
fig11     beam-transit far field: nonradiative vs radiative atoms
fig12     beam-transit far field: continuous decay only vs radiative
========  ===========================================================

The beam-transit presets (fig11/fig12) use the barium-line numbers: a
37 um waist crossed at 400 m/s under a coupling of 2 pi x 42 MHz gives
T_w = g0 w / v_z ~ 24.4 and mu ~ 1.1e-4, with drive/kappa = 1 so the
empty cavity idles at one photon.  The screen distance only rescales
the far-field axis (the shape is computed in momentum space); it is
calibrated so the plotted widths land on the published-curve scale and
is recorded in every output header.
"""

from copy import deepcopy

__all__ = ["preset_names", "get_preset", "PresetError"]


class PresetError(KeyError):
    """Raised for an unknown preset name."""


# --- shared parameter bundles -------------------------------------------

# massive-atom packet pinned at a node, one-wavelength momentum comb
_NODE = dict(mu=0.0, gamma=0.0, kappa=0.0, delta=0.0, drive=0.0,
             xi0=0.25, delta_q=10.0, mode_phase="cos", detuning_sign=1)

_GRID = dict(subdivisions=2, q_max=120.0)
_FOCK1 = dict(kind="fock", n=1)
_ALPHA1 = dict(kind="coherent", alpha=1.0)

# barium beam transit: T_w = g0 w / v_z for w = 37 um, v_z = 400 m/s,
# g0 = 2 pi x 42 MHz; entry/exit planes 10 waists out
_TRANSIT = dict(t_w=24.41, entry_offset=10.0, exit_offset=10.0,
                screen_distance=11.0)
_BEAM = dict(mu=1.1e-4, gamma=0.5, kappa=0.25, delta=0.0, drive=0.25,
             xi0=0.25, delta_q=10.0, mode_phase="cos", detuning_sign=1)


def _trajectory(params, field, mode, tau_end, dtau, snaps, n_max,
                grid=None, trace_every=0):
    return dict(kind="trajectory", params=dict(params), grid=grid or dict(_GRID),
                field=dict(field), n_max=n_max, mode=mode, tau_end=tau_end,
                dtau=dtau, snapshot_times=list(snaps), trace_every=trace_every)


def _span(t0, t1, step):
    out, t = [], t0
    while t <= t1 + 1e-9:
        out.append(round(t, 10))
        t += step
    return out


def _build_presets():
    p = {}

    # Closed node-launch pulsation: momentum wings grow to ~90 recoils and
    # return; the coordinate packet splits to the neighboring nodes and back.
    p["fig2"] = dict(
        comment="closed pulsation of a single-quantum packet at a node",
        runs=[dict(label="pulsation",
                   config=_trajectory(
                       dict(_NODE, mu=1.7e-4), _FOCK1, dict(kind="closed"),
                       tau_end=450.0, dtau=0.01, snaps=_span(0, 450, 10),
                       n_max=1))])

    # Small atom-cavity detuning traps part of the packet at the node: the
    # coordinate profile grows a third, central maximum.  The companion run
    # at a tenth of the detuning stays effectively resonant.
    runs = []
    for d in (0.1, 0.01):
        runs.append(dict(
            label=f"detuning_{d:g}",
            config=_trajectory(
                dict(_NODE, mu=1.7e-4, delta=d), _FOCK1, dict(kind="closed"),
                tau_end=240.0, dtau=0.01, snaps=_span(0, 240, 10), n_max=1)))
    p["fig5"] = dict(
        comment="detuned node evolution: central trapped peak vs none",
        runs=runs)

    # One forced emission at successively later times; each run is an
    # independent trajectory snapshotted right after its jump.
    runs = []
    for t in (1.0, 2.0, 3.0, 4.0, 5.0, 10.0, 20.0):
        runs.append(dict(
            label=f"jump_at_{t:g}",
            config=_trajectory(
                dict(_NODE, gamma=0.1), _ALPHA1,
                dict(kind="scheduled", jump_times=[t], channel="atomic",
                     eta=0.0),
                tau_end=t, dtau=0.01, snaps=[0.0, t], n_max=12)))
    p["fig6"] = dict(
        comment="post-emission packet shapes vs time of the emission",
        runs=runs)

    # No damping, infinitely heavy atom: the momentum distribution churns
    # while the coordinate distribution stays frozen.
    p["fig7"] = dict(
        comment="frozen coordinate profile of an undamped heavy atom",
        runs=[dict(label="invariance",
                   config=_trajectory(
                       _NODE, _ALPHA1, dict(kind="closed"),
                       tau_end=20.0, dtau=0.01, snaps=_span(0, 20, 0.5),
                       n_max=12))])

    # Weak atomic damping: continuous decay squeezes the coordinate packet
    # until a (here: forced, for reproducibility) emission splits it.
    p["fig8"] = dict(
        comment="continuous-decay squeezing, then one emission",
        runs=[dict(label="one_emission",
                   config=_trajectory(
                       dict(_NODE, gamma=0.1), _ALPHA1,
                       dict(kind="scheduled", jump_times=[10.0],
                            channel="atomic", eta=0.0),
                       tau_end=20.0, dtau=0.01, snaps=_span(0, 20, 0.5),
                       n_max=12, trace_every=50))])

    # The no-emission branch of the same system: excited-state momentum
    # profile and total excited population while no click has occurred.
    p["fig9"] = dict(
        comment="excited-state profile conditioned on no emission",
        runs=[dict(label="no_emission",
                   config=_trajectory(
                       dict(_NODE, gamma=0.1), _ALPHA1, dict(kind="nojump"),
                       tau_end=20.0, dtau=0.01, snaps=_span(0, 20, 0.5),
                       n_max=12, trace_every=50))])

    # Three forced emissions: the momentum profile gains one lobe per click
    # while the coordinate profile stays double-peaked.
    p["fig10"] = dict(
        comment="successive emissions carving 2, 3, 4 momentum lobes",
        runs=[dict(label="three_emissions",
                   config=_trajectory(
                       dict(_NODE, gamma=0.5), _ALPHA1,
                       dict(kind="scheduled", jump_times=[5.0, 10.0, 15.0],
                            channel="atomic", eta=0.0),
                       tau_end=20.0, dtau=0.01,
                       snaps=[0.0, 5.0, 10.0, 15.0, 20.0], n_max=12))])

    # Beam transit, 200 atoms per curve, node launch.  "nonradiative"
    # keeps the cavity channel open but sets gamma = 0.
    def beam(mode, gamma):
        return dict(kind="ensemble", params=dict(_BEAM, gamma=gamma),
                    n_atoms=200, mode=mode, master_seed=0,
                    transit=dict(_TRANSIT), xi0=0.25, grid=None, n_max=12,
                    dtau=0.05, dtau_coast=0.1, window=4.0, threads=1)

    p["fig11"] = dict(
        comment="far field on the screen: nonradiative vs radiative beam",
        runs=[dict(label="nonradiative", config=beam("stochastic", 0.0)),
              dict(label="radiative", config=beam("stochastic", 0.5))])

    p["fig12"] = dict(
        comment="far field with emissions suppressed vs the radiative beam",
        runs=[dict(label="continuous_only", config=beam("suppressed", 0.5)),
              dict(label="radiative", config=beam("stochastic", 0.5))])

    return p


_PRESETS = _build_presets()


def preset_names():
    """Sorted preset names with their one-line comments."""
    return {k: _PRESETS[k]["comment"] for k in sorted(_PRESETS)}


def get_preset(name):
    """Deep copy of the named preset bundle; raises PresetError if unknown."""
    try:
        return deepcopy(_PRESETS[name])
    except KeyError:
        raise PresetError(f"unknown preset {name!r}; "
                          f"known: {', '.join(sorted(_PRESETS))}") from None
