"""HTTP facade over the simulator.

Runs are described by plain JSON bodies (the same dicts the preset table
holds), executed synchronously, and returned as JSON.  The CLI talks to
this app in-process; nothing here keeps state between requests.

Error contract: malformed bodies fail pydantic validation (422), bodies
that are well-formed but physically inconsistent raise ValueError in the
core and come back as 400, and runs that start fine but blow up mid-flight
(norm reaching the momentum boundary, photon ladder overflow) come back
as 409 so callers can tell "fix your input" from "enlarge the box".
"""

from typing import Literal, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .experiment import (TransitConfig, coupling_envelope,
                         initial_field_steady_state, run_ensemble)
from .model import (BoundaryMassError, CutoffError, SystemParams,
                    field_coherent, field_fock, init_packet, make_grid)
from .observables import moments
from .presets import PresetError, get_preset, preset_names
from .trajectory import (Closed, NoJump, Scheduled, Stochastic,
                         run_trajectory)

app = FastAPI(title="osgsim", version=__version__)


# --- request models ------------------------------------------------------

class ParamsModel(BaseModel):
    """System constants in units of the vacuum Rabi frequency."""

    mu: float = 0.0
    gamma: float = 0.0
    kappa: float = 0.0
    delta: float = 0.0
    drive: float = 0.0
    xi0: float = 0.25
    delta_q: float = 10.0
    mode_phase: Literal["cos", "sin"] = "cos"
    detuning_sign: Literal[-1, 1] = 1


class GridModel(BaseModel):
    subdivisions: int = Field(2, ge=1)
    q_max: float = Field(120.0, gt=0)


class FieldModel(BaseModel):
    """Initial cavity field: a number state or a coherent state."""

    kind: Literal["fock", "coherent"]
    n: int = Field(0, ge=0)
    alpha: float = 0.0


class ModeModel(BaseModel):
    """How decay is unraveled along the trajectory."""

    kind: Literal["closed", "nojump", "stochastic", "suppressed",
                  "scheduled"] = "closed"
    seed: Optional[int] = None
    channels: Optional[list[Literal["atomic", "cavity"]]] = None
    jump_times: list[float] = []
    channel: Literal["atomic", "cavity"] = "atomic"
    eta: float = 0.0


class TransitModel(BaseModel):
    """Gaussian coupling window crossed by the moving atom."""

    t_w: float = Field(gt=0)
    entry_offset: float = 10.0
    exit_offset: float = 10.0
    screen_distance: float = 30.0


class TrajectoryRequest(BaseModel):
    params: ParamsModel = ParamsModel()
    grid: GridModel = GridModel()
    field: Optional[FieldModel] = None   # default: steady state of the drive
    n_max: int = Field(12, ge=0)
    mode: ModeModel = ModeModel()
    transit: Optional[TransitModel] = None
    tau_end: Optional[float] = Field(None, gt=0)
    dtau: float = Field(1e-3, gt=0)
    snapshot_times: list[float] = []
    trace_every: int = Field(0, ge=0)
    boundary_tol: float = Field(1e-6, gt=0)
    cutoff_tol: float = Field(1e-6, gt=0)


class EnsembleRequest(BaseModel):
    params: ParamsModel = ParamsModel()
    n_atoms: int = Field(ge=1)
    mode: Literal["stochastic", "suppressed", "nojump", "closed"] = "stochastic"
    master_seed: int = 0
    transit: Optional[TransitModel] = None
    xi0: Optional[float] = None
    grid: Optional[GridModel] = None
    field: Optional[FieldModel] = None   # default: steady state of the drive
    n_max: int = Field(12, ge=0)
    dtau: float = Field(0.05, gt=0)
    dtau_coast: float = Field(0.1, gt=0)
    window: float = Field(4.0, gt=0)
    tau_end: Optional[float] = Field(None, gt=0)
    threads: int = Field(1, ge=1)
    boundary_tol: float = Field(1e-6, gt=0)
    cutoff_tol: float = Field(1e-6, gt=0)


class ValidateRequest(BaseModel):
    """A run of either kind, checked without being executed."""

    kind: Literal["trajectory", "ensemble"]
    config: dict


class PresetRequest(BaseModel):
    """Optional overrides applied to every run in the preset.

    ``closed_cavity`` reinterprets a "nonradiative" beam run as a fully
    lossless one: both decay channels off, no drive, and the cavity
    prepared in the coherent state the drive would have sustained.
    """

    seed: Optional[int] = None
    threads: Optional[int] = None
    n_atoms: Optional[int] = Field(None, ge=1)
    closed_cavity: bool = False


# --- response models -----------------------------------------------------

class DistributionModel(BaseModel):
    axis: str
    support: list[float]
    density: list[float]
    measure: float


class MomentsModel(BaseModel):
    mean: float
    std: float
    peaks: list[float]


class JumpModel(BaseModel):
    tau: float
    channel: str
    eta: float


class SnapshotModel(BaseModel):
    tau: float
    norm2: float
    excited: float
    photons: float
    momentum: DistributionModel
    position: DistributionModel
    excited_momentum: DistributionModel
    momentum_moments: MomentsModel
    position_moments: MomentsModel


class TraceModel(BaseModel):
    tau: list[float] = []
    norm2: list[float] = []
    excited: list[float] = []
    photons: list[float] = []
    position_std: list[float] = []
    momentum_std: list[float] = []


class TrajectoryResponse(BaseModel):
    jumps: list[JumpModel]
    snapshots: list[SnapshotModel]
    trace: TraceModel
    final_norm2: float
    forced_renorms: int


class EnsembleResponse(BaseModel):
    far_field: DistributionModel
    width: float
    peaks: list[float]
    mean_jumps: float
    jump_counts: list[int]
    cavity_counts: list[int]
    n_atoms: int
    screen_distance: Optional[float] = None


class ValidateResponse(BaseModel):
    ok: bool
    errors: list[str]
    warnings: list[str]


# --- builders ------------------------------------------------------------

def _build_field(spec, n_max):
    if spec.kind == "fock":
        return field_fock(spec.n, n_max)
    return field_coherent(spec.alpha, n_max)


def _build_mode(m):
    if m.kind == "closed":
        return Closed()
    if m.kind == "nojump":
        return NoJump()
    if m.kind == "scheduled":
        return Scheduled(tuple(m.jump_times), channel=m.channel, eta=m.eta)
    if m.kind == "suppressed":
        return Stochastic(seed=m.seed, channels=("cavity",))
    channels = tuple(m.channels) if m.channels else ("atomic", "cavity")
    return Stochastic(seed=m.seed, channels=channels)


def _build_transit(t):
    return TransitConfig(t.t_w, entry_offset=t.entry_offset,
                         exit_offset=t.exit_offset,
                         screen_distance=t.screen_distance)


def _dist(d):
    return DistributionModel(axis=d.axis, support=d.support.tolist(),
                             density=d.density.tolist(), measure=d.measure)


def _mom(triple):
    return MomentsModel(mean=triple[0], std=triple[1], peaks=list(triple[2]))


def _run_trajectory(req: TrajectoryRequest) -> TrajectoryResponse:
    params = SystemParams(**req.params.model_dump())
    grid = make_grid(req.grid.subdivisions, req.grid.q_max)
    if req.field is not None:
        field = _build_field(req.field, req.n_max)
    else:
        field = initial_field_steady_state(params, n_max=req.n_max)
    state = init_packet(grid, field, params, boundary_tol=req.boundary_tol)

    envelope, tau_end = None, req.tau_end
    if req.transit is not None:
        tcfg = _build_transit(req.transit)
        envelope = lambda tau: coupling_envelope(tau, tcfg)
        if tau_end is None:
            tau_end = tcfg.tau_end
    if tau_end is None:
        raise ValueError("tau_end is required when no transit window is given")

    rec = run_trajectory(state, params, _build_mode(req.mode), tau_end,
                         dtau=req.dtau, snapshot_times=req.snapshot_times,
                         envelope=envelope, trace_every=req.trace_every,
                         boundary_tol=req.boundary_tol,
                         cutoff_tol=req.cutoff_tol)

    trace = TraceModel(**{k: v.tolist() for k, v in rec.trace.items()})
    snaps = [rec.snapshots[t] for t in sorted(rec.snapshots)]

    return TrajectoryResponse(
        jumps=[JumpModel(tau=j.tau, channel=j.channel, eta=j.eta)
               for j in rec.jumps],
        snapshots=[SnapshotModel(
            tau=s.tau, norm2=s.norm2, excited=s.excited, photons=s.photons,
            momentum=_dist(s.momentum), position=_dist(s.position),
            excited_momentum=_dist(s.excited_momentum),
            momentum_moments=_mom(s.momentum_moments),
            position_moments=_mom(s.position_moments))
            for s in snaps],
        trace=trace,
        final_norm2=rec.final_state.norm2(),
        forced_renorms=rec.forced_renorms)


def _run_ensemble(req: EnsembleRequest) -> EnsembleResponse:
    params = SystemParams(**req.params.model_dump())
    transit = _build_transit(req.transit) if req.transit else None
    grid = make_grid(req.grid.subdivisions, req.grid.q_max) if req.grid else None
    field = _build_field(req.field, req.n_max) if req.field else None
    res = run_ensemble(req.n_atoms, params, transit, mode=req.mode,
                       master_seed=req.master_seed, grid=grid, field=field,
                       n_max=req.n_max, dtau=req.dtau,
                       dtau_coast=req.dtau_coast, window=req.window,
                       xi0=req.xi0, tau_end=req.tau_end, threads=req.threads,
                       boundary_tol=req.boundary_tol,
                       cutoff_tol=req.cutoff_tol)
    _, _, peaks = moments(res.far_field)
    return EnsembleResponse(
        far_field=_dist(res.far_field), width=res.width, peaks=list(peaks),
        mean_jumps=res.mean_jumps,
        jump_counts=[int(c) for c in res.jump_counts],
        cavity_counts=[int(c) for c in res.cavity_counts],
        n_atoms=req.n_atoms,
        screen_distance=(req.transit.screen_distance if req.transit else None))


# dtau coarser than a tenth of the fastest decay time risks stepping over
# jump windows (the per-step click probability cap would trip mid-run)
def _warnings(params: ParamsModel, dtau: float):
    out = []
    fastest = max(params.gamma, 2.0 * params.kappa)
    if fastest > 0 and dtau * fastest > 0.05:
        out.append(f"dtau={dtau:g} is coarse for decay rate {fastest:g}; "
                   "expect step-probability aborts or biased jump statistics")
    if dtau > 0.1:
        out.append(f"dtau={dtau:g} exceeds 0.1; integrator error may be "
                   "visible in the Rabi phase")
    return out


# --- endpoints -----------------------------------------------------------

@app.exception_handler(ValueError)
async def _on_value_error(request: Request, exc: ValueError):
    return JSONResponse(status_code=400,
                        content={"error": type(exc).__name__,
                                 "message": str(exc)})


@app.exception_handler(BoundaryMassError)
async def _on_boundary(request: Request, exc: BoundaryMassError):
    return JSONResponse(status_code=409,
                        content={"error": "BoundaryMassError",
                                 "message": str(exc)})


@app.exception_handler(CutoffError)
async def _on_cutoff(request: Request, exc: CutoffError):
    return JSONResponse(status_code=409,
                        content={"error": "CutoffError",
                                 "message": str(exc)})


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.get("/presets")
def presets():
    return {"presets": preset_names()}


@app.post("/simulate", response_model=TrajectoryResponse)
def simulate(req: TrajectoryRequest):
    """Run one trajectory and return jumps, snapshots and trace."""
    return _run_trajectory(req)


@app.post("/ensemble", response_model=EnsembleResponse)
def ensemble(req: EnsembleRequest):
    """Fly an ensemble through the cavity and return the averaged far field."""
    return _run_ensemble(req)


@app.post("/validate", response_model=ValidateResponse)
def validate(req: ValidateRequest):
    """Build (but do not run) a config; report hard errors and warnings."""
    errors, warnings = [], []
    try:
        if req.kind == "trajectory":
            treq = TrajectoryRequest(**req.config)
            params = SystemParams(**treq.params.model_dump())
            grid = make_grid(treq.grid.subdivisions, treq.grid.q_max)
            if treq.field is not None:
                field = _build_field(treq.field, treq.n_max)
            else:
                field = initial_field_steady_state(params, n_max=treq.n_max)
            init_packet(grid, field, params, boundary_tol=treq.boundary_tol)
            _build_mode(treq.mode)
            if treq.transit is not None:
                _build_transit(treq.transit)
            elif treq.tau_end is None:
                errors.append("tau_end is required without a transit window")
            warnings += _warnings(treq.params, treq.dtau)
        else:
            ereq = EnsembleRequest(**req.config)
            params = SystemParams(**ereq.params.model_dump())
            if ereq.grid is not None:
                grid = make_grid(ereq.grid.subdivisions, ereq.grid.q_max)
                if ereq.field is not None:
                    field = _build_field(ereq.field, ereq.n_max)
                else:
                    field = initial_field_steady_state(params, n_max=ereq.n_max)
                init_packet(grid, field, params, boundary_tol=ereq.boundary_tol)
            if ereq.transit is not None:
                _build_transit(ereq.transit)
            elif ereq.tau_end is None:
                errors.append("tau_end is required without a transit window")
            warnings += _warnings(ereq.params, ereq.dtau)
    except (ValueError, BoundaryMassError, CutoffError) as exc:
        errors.append(f"{type(exc).__name__}: {exc}")
    return ValidateResponse(ok=not errors, errors=errors, warnings=warnings)


@app.post("/preset/{name}")
def run_preset(name: str, req: PresetRequest = None):
    """Execute every run of a named preset and return results keyed by label."""
    try:
        bundle = get_preset(name)
    except PresetError as exc:
        return JSONResponse(status_code=404,
                            content={"error": "PresetError",
                                     "message": str(exc)})
    req = req or PresetRequest()
    results = {}
    for run in bundle["runs"]:
        cfg = run["config"]
        if cfg["kind"] == "trajectory":
            treq = TrajectoryRequest(**{k: v for k, v in cfg.items()
                                        if k != "kind"})
            if req.seed is not None and treq.mode.kind in ("stochastic",
                                                           "suppressed"):
                treq.mode.seed = req.seed
            results[run["label"]] = {
                "kind": "trajectory", "config": treq.model_dump(),
                "result": _run_trajectory(treq).model_dump()}
        else:
            ereq = EnsembleRequest(**{k: v for k, v in cfg.items()
                                      if k != "kind"})
            if req.closed_cavity and run["label"] == "nonradiative":
                alpha = ereq.params.drive / ereq.params.kappa
                ereq.params = ereq.params.model_copy(
                    update={"gamma": 0.0, "kappa": 0.0, "drive": 0.0})
                ereq.mode = "closed"
                ereq.field = FieldModel(kind="coherent", alpha=alpha)
            if req.seed is not None:
                ereq.master_seed = req.seed
            if req.threads is not None:
                ereq.threads = req.threads
            if req.n_atoms is not None:
                ereq.n_atoms = req.n_atoms
            results[run["label"]] = {
                "kind": "ensemble", "config": ereq.model_dump(),
                "result": _run_ensemble(ereq).model_dump()}
    return {"name": name, "comment": bundle["comment"], "results": results}
