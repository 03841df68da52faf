"""Command-line front end.

Thin client over the HTTP service: every command validates its input with
the service's own request models, posts it to the in-process app, and
writes whatever comes back.  All files are written from this process,
sequentially; worker threads live inside the service call.

Commands
    simulate CONFIG   run the trajectory or ensemble described by CONFIG
    ensemble CONFIG   like simulate, but the config must be an ensemble
    preset NAME       run a named bundle and emit its data + plot script
    validate CONFIG   check a config without running it

CONFIG is a JSON file: either a bare request body (optionally carrying a
"kind" key) or a manifest written by a previous run, which is re-run
bit-identically.  Exit codes: 0 success, 1 bad usage or validation
failure, 2 runtime violation (boundary mass, photon cutoff).
"""

import argparse
import asyncio
import json
import secrets
import sys
from pathlib import Path

import httpx
from pydantic import ValidationError

from . import __version__
from .service import EnsembleRequest, TrajectoryRequest, app

_FMT = "%.17g"     # float formatting; 17 significant digits round-trip


class _Parser(argparse.ArgumentParser):
    # usage problems are exit code 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _request(method, path, payload=None):
    async def go():
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://osgsim",
                                     timeout=None) as client:
            r = await client.request(method, path, json=payload)
            return r.status_code, r.json()

    return asyncio.run(go())


def _fail_http(status, body):
    if isinstance(body, dict):
        msg = body.get("message") or json.dumps(body.get("detail", body))
    else:
        msg = str(body)
    print(f"error (HTTP {status}): {msg}", file=sys.stderr)
    # 4xx except conflicts are the caller's fault; conflicts and anything
    # unexpected mean the run itself blew up
    sys.exit(1 if status in (400, 404, 422) else 2)


def _load_config(path):
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        sys.exit(1)
    except json.JSONDecodeError as exc:
        print(f"config is not valid JSON: {exc}", file=sys.stderr)
        sys.exit(1)
    if not isinstance(raw, dict):
        print("config must be a JSON object", file=sys.stderr)
        sys.exit(1)
    kind = raw.get("kind")
    if isinstance(raw.get("config"), dict):   # a manifest from an earlier run
        raw = raw["config"]
        kind = kind or raw.get("kind")
    cfg = {k: v for k, v in raw.items() if k != "kind"}
    if kind is None:
        kind = "ensemble" if "n_atoms" in cfg else "trajectory"
    return kind, cfg


def _resolve(kind, cfg, seed=None, threads=None):
    """Fill in every default and pin the seed so the run is reproducible."""
    model = TrajectoryRequest if kind == "trajectory" else EnsembleRequest
    try:
        req = model(**cfg)
    except ValidationError as exc:
        lines = [f"{'.'.join(str(p) for p in e['loc'])}: {e['msg']}"
                 for e in exc.errors()]
        print("invalid config:\n  " + "\n  ".join(lines), file=sys.stderr)
        sys.exit(1)
    if kind == "trajectory":
        if seed is not None:
            req.mode.seed = seed
        if req.mode.kind in ("stochastic", "suppressed") and req.mode.seed is None:
            req.mode.seed = secrets.randbits(32)
    else:
        if seed is not None:
            req.master_seed = seed
        if threads is not None:
            req.threads = threads
    return req.model_dump()


# --- output files ---------------------------------------------------------

def _fmt(v):
    return _FMT % v if isinstance(v, float) else str(v)


def _write_tsv(path, header, columns, rows):
    with open(path, "w") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write("# columns: " + "\t".join(columns) + "\n")
        for row in rows:
            if row is None:
                fh.write("\n")      # block separator for surface data
            else:
                fh.write("\t".join(_fmt(v) for v in row) + "\n")


def _common_header(kind, cfg):
    g = cfg.get("grid") or {"subdivisions": 2, "q_max": 120.0}
    seed = (cfg["mode"]["seed"] if kind == "trajectory"
            else cfg["master_seed"])
    head = [f"osgsim {__version__}", f"kind: {kind}",
            f"grid: subdivisions={g['subdivisions']} q_max={g['q_max']:g}",
            f"seed: {seed}"]
    if kind == "ensemble":
        head.append(f"mode: {cfg['mode']}")
        head.append(f"atoms: {cfg['n_atoms']}")
    else:
        head.append(f"mode: {cfg['mode']['kind']}")
    t = cfg.get("transit")
    if t:
        head.append(f"transit: t_w={t['t_w']:g} "
                    f"screen_distance={t['screen_distance']:g} waists "
                    "(display scale only)")
    return head


_AXIS_NOTE = {
    "q": "q, momentum in photon-recoil units",
    "xi": "xi, position in wavelength units",
}


def _write_manifest(path, kind, cfg):
    manifest = {"osgsim_version": __version__, "kind": kind, "config": cfg}
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _write_trajectory(out, label, cfg, res):
    head = _common_header("trajectory", cfg)
    pre = f"{label}_" if label else ""
    written = []

    def surface(name, key):
        rows = []
        for s in res["snapshots"]:
            d = s[key]
            rows += [(s["tau"], x, v)
                     for x, v in zip(d["support"], d["density"])]
            rows.append(None)
        axis = res["snapshots"][0][key]["axis"] if res["snapshots"] else "q"
        p = out / f"{pre}{name}.tsv"
        _write_tsv(p, head + [f"axis: {_AXIS_NOTE[axis]}",
                              "units: probability density per unit axis"],
                   ("tau", axis, "density"), rows)
        written.append(p)

    surface("momentum", "momentum")
    surface("position", "position")
    surface("excited_momentum", "excited_momentum")

    if res["snapshots"]:
        last = res["snapshots"][-1]
        for name, key in (("final_momentum", "momentum"),
                          ("final_position", "position")):
            d = last[key]
            p = out / f"{pre}{name}.tsv"
            _write_tsv(p, head + [f"axis: {_AXIS_NOTE[d['axis']]}",
                                  f"tau: {_fmt(last['tau'])}",
                                  "units: probability density per unit axis"],
                       (d["axis"], "density"),
                       list(zip(d["support"], d["density"])))
            written.append(p)

        p = out / f"{pre}moments.tsv"
        _write_tsv(p, head + ["units: recoils (q), wavelengths (xi)"],
                   ("tau", "norm2", "excited", "photons",
                    "q_mean", "q_std", "xi_mean", "xi_std"),
                   [(s["tau"], s["norm2"], s["excited"], s["photons"],
                     s["momentum_moments"]["mean"], s["momentum_moments"]["std"],
                     s["position_moments"]["mean"], s["position_moments"]["std"])
                    for s in res["snapshots"]])
        written.append(p)

    p = out / f"{pre}jumps.tsv"
    _write_tsv(p, head + ["units: tau in 1/g0, eta in recoil fractions"],
               ("tau", "channel", "eta"),
               [(j["tau"], j["channel"], j["eta"]) for j in res["jumps"]])
    written.append(p)

    if res["trace"]["tau"]:
        t = res["trace"]
        p = out / f"{pre}trace.tsv"
        _write_tsv(p, head + ["units: recoils (q_std), wavelengths (xi_std)"],
                   ("tau", "norm2", "excited", "photons", "xi_std", "q_std"),
                   list(zip(t["tau"], t["norm2"], t["excited"], t["photons"],
                            t["position_std"], t["momentum_std"])))
        written.append(p)

    _write_manifest(out / f"{pre}manifest.json", "trajectory", cfg)
    written.append(out / f"{pre}manifest.json")
    return written


def _write_ensemble(out, label, cfg, res):
    head = _common_header("ensemble", cfg)
    pre = f"{label}_" if label else ""
    d = res["far_field"]
    stats = [f"axis: {_AXIS_NOTE[d['axis']]} (screen plane)",
             "units: probability density per unit axis",
             f"width_at_half_max: {_fmt(res['width'])}",
             f"mean_atomic_jumps: {_fmt(res['mean_jumps'])}"]
    p1 = out / f"{pre}far_field.tsv"
    _write_tsv(p1, head + stats, (d["axis"], "density"),
               list(zip(d["support"], d["density"])))
    p2 = out / f"{pre}jump_counts.tsv"
    _write_tsv(p2, head + ["one row per atom"],
               ("atom", "atomic_jumps", "cavity_jumps"),
               list(zip(range(len(res["jump_counts"])),
                        res["jump_counts"], res["cavity_counts"])))
    _write_manifest(out / f"{pre}manifest.json", "ensemble", cfg)
    return [p1, p2, out / f"{pre}manifest.json"]


# --- plot scripts ---------------------------------------------------------

def _plot_script(name, runs):
    """Gnuplot commands reproducing the preset's panels from its TSVs."""
    lines = [f"# gnuplot script for the {name} preset",
             "set terminal pngcairo size 1200,500 font ',10'",
             f"set output '{name}.png'"]
    kinds = {k for k, _ in runs}
    if kinds == {"ensemble"}:
        lines += ["set xlabel 'screen position (wavelengths)'",
                  "set ylabel 'density'",
                  "plot " + ", \\\n     ".join(
                      f"'{label}_far_field.tsv' using 1:2 with lines "
                      f"title '{label}'" for _, label in runs)]
    elif len(runs) <= 2:
        key = "excited_momentum" if name == "fig9" else "momentum"
        lines += ["set multiplot layout 1,%d" % (2 * len(runs)),
                  "set pm3d map", "set ylabel 'tau'"]
        for _, label in runs:
            lines += [f"set xlabel 'xi (wavelengths)'",
                      f"set title '{label}: P(xi,tau)'",
                      f"splot '{label}_position.tsv' using 2:1:3 notitle",
                      f"set xlabel 'q (recoils)'",
                      f"set title '{label}: P(q,tau)'",
                      f"splot '{label}_{key}.tsv' using 2:1:3 notitle"]
        lines.append("unset multiplot")
    else:
        lines += ["set multiplot layout 1,2",
                  "set xlabel 'xi (wavelengths)'", "set ylabel 'density'",
                  "plot " + ", \\\n     ".join(
                      f"'{label}_final_position.tsv' using 1:2 with lines "
                      f"title '{label}'" for _, label in runs),
                  "set xlabel 'q (recoils)'",
                  "plot " + ", \\\n     ".join(
                      f"'{label}_final_momentum.tsv' using 1:2 with lines "
                      f"title '{label}'" for _, label in runs),
                  "unset multiplot"]
    return "\n".join(lines) + "\n"


# --- commands -------------------------------------------------------------

def _outdir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_run(args, forced_kind=None):
    kind, cfg = _load_config(args.config)
    if forced_kind and kind != forced_kind:
        print(f"config is a {kind} run, not an {forced_kind}",
              file=sys.stderr)
        sys.exit(1)
    cfg = _resolve(kind, cfg, seed=args.seed, threads=args.threads)
    status, body = _request("POST", f"/{'simulate' if kind == 'trajectory' else 'ensemble'}",
                            cfg)
    if status != 200:
        _fail_http(status, body)
    out = _outdir(args)
    writer = _write_trajectory if kind == "trajectory" else _write_ensemble
    for p in writer(out, "", cfg, body):
        print(p)
    return 0


def _cmd_preset(args):
    payload = {"seed": args.seed, "threads": args.threads,
               "n_atoms": args.n_atoms, "closed_cavity": args.closed_cavity}
    status, body = _request("POST", f"/preset/{args.name}", payload)
    if status != 200:
        _fail_http(status, body)
    out = _outdir(args)
    runs = []
    for label, entry in body["results"].items():
        writer = (_write_trajectory if entry["kind"] == "trajectory"
                  else _write_ensemble)
        for p in writer(out, label, entry["config"], entry["result"]):
            print(p)
        runs.append((entry["kind"], label))
    script = out / f"{args.name}.gp"
    script.write_text(_plot_script(args.name, runs))
    print(script)
    return 0


def _cmd_validate(args):
    kind, cfg = _load_config(args.config)
    status, body = _request("POST", "/validate",
                            {"kind": kind, "config": cfg})
    if status != 200:
        _fail_http(status, body)
    for w in body["warnings"]:
        print(f"warning: {w}")
    if body["ok"]:
        print("ok")
        return 0
    for e in body["errors"]:
        print(f"error: {e}", file=sys.stderr)
    return 1


def main(argv=None):
    parser = _Parser(prog="osgsim",
                     description="standing-wave cavity trajectory simulator")
    parser.add_argument("--version", action="version",
                        version=f"osgsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_threads=True):
        p.add_argument("--seed", type=int, default=None,
                       help="override the run's random seed")
        p.add_argument("--out", default=".",
                       help="output directory (created if missing)")
        if with_threads:
            p.add_argument("--threads", type=int, default=None,
                           help="worker threads for ensembles "
                                "(never changes results)")

    p = sub.add_parser("simulate", help="run a config file (either kind)")
    p.add_argument("config")
    add_common(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("ensemble", help="run an ensemble config file")
    p.add_argument("config")
    add_common(p)
    p.set_defaults(func=lambda a: _cmd_run(a, forced_kind="ensemble"))

    p = sub.add_parser("preset", help="run a named preset bundle")
    p.add_argument("name")
    add_common(p)
    p.add_argument("--n-atoms", type=int, default=None,
                   help="override ensemble size in beam presets")
    p.add_argument("--closed-cavity", action="store_true",
                   help="make the nonradiative beam case fully lossless "
                        "(gamma = kappa = 0, cavity pre-loaded)")
    p.set_defaults(func=_cmd_preset)

    p = sub.add_parser("validate", help="check a config without running")
    p.add_argument("config")
    p.set_defaults(func=_cmd_validate)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
