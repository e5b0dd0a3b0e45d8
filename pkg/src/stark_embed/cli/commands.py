"""construct / verify / sweep / export."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .. import __version__, analysis, constructor
from ..errors import ArgumentError, StarkEmbedError
from ..prufer import PruferTrajectory, solve
from ..transform import (GridFunction, PiecewisePotential, StarkFrame,
                         q_from_V, resolve_table)
from .config import DEFAULTS, RunConfig, h_profile

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

MAX_TRAJ_ROWS = 20_000
GRAM_B = 1e5
BOUNDS_FILE = "envelope_claims.txt"


# ---------------------------------------------------------------------------
# construction


def build(cfg: RunConfig):
    """Run the construction selected by ``cfg.mode``.

    Returns ``(trajectories, V, exact, info, claims)``; ``claims`` are
    ``(lo, hi, bound)`` rows for the envelope check, in the units of
    :func:`envelope_of`.
    """
    frame = StarkFrame(cfg.alpha)
    E = cfg.energies
    th = cfg.boundary_angles
    fac = frame.envelope_factor
    if cfg.mode == "single":
        c = constructor.construct_single(E[0], cfg.d, th[0], cfg.xi_max,
                                         frame, cfg.tol)
        claims = [(float(c.V.grid[0]), cfg.xi_max, fac * 2.0 * cfg.d)]
        return [c.trajectory], c.V, c.potential, c.info, claims
    if cfg.mode == "critical":
        c = constructor.construct_single_critical(E[0], th[0], cfg.xi_max,
                                                  frame, cfg.tol)
        claims = [(b["start"], b["end"], fac * 2.0 * b["d"])
                  for b in c.info["blocks"]]
        return [c.trajectory], c.V, c.potential, c.info, claims
    if cfg.mode == "schrodinger-critical":
        c = constructor.construct_schrodinger_critical(cfg.a, th[0],
                                                       cfg.xi_max, cfg.tol)
        claims = [(b["start"], b["end"], b["coupling"])
                  for b in c.info["blocks"]]
        return [c.trajectory], c.V, None, c.info, claims
    if cfg.mode == "glue":
        plan = constructor.schedule_finite(len(E), cfg.W, frame).plan(E, th)
        if cfg.M is not None:
            plan = replace(plan, M=cfg.M)
    else:
        plan = constructor.schedule_infinite_prefix(
            E, h_profile(cfg.h), cfg.W, frame, angles=th)
    g = constructor.glue(plan, frame, cfg.tol, xi_max=cfg.xi_max,
                         window_frac=cfg.window)
    claims = [(b["J_prev"], b["J"], fac * b["envelope_bound"])
              for b in g.blocks]
    info = g.summary()
    info["mode"] = cfg.mode
    return g.trajectories, g.V, None, info, claims


def envelope_of(V: GridFunction, cfg: RunConfig, lo=None, hi=None):
    """``x**(1-alpha/2)|q|``; plain ``x |V|`` for the x-frame mode."""
    if cfg.mode == "schrodinger-critical":
        g, v = V.grid, V.values
        m = np.ones(g.size, dtype=bool)
        if lo is not None:
            m &= g >= lo
        if hi is not None:
            m &= g <= hi
        return g[m] * np.abs(v[m])
    return analysis.envelope_values(V, StarkFrame(cfg.alpha), lo, hi)


def report_for(trajs, V, cfg: RunConfig) -> dict:
    xframe = cfg.mode == "schrodinger-critical"
    rep = analysis.spectral_report(trajs, None if xframe else V,
                                   r=cfg.ratio_threshold)
    d = rep.to_dict()
    if xframe:
        env = envelope_of(V, cfg)
        last = envelope_of(V, cfg, lo=V.grid[-1] / 10.0)
        d["envelope"] = {"sup": float(env.max()),
                         "sup_last_decade": float(last.max(initial=0.0))}
    return d


# ---------------------------------------------------------------------------
# checks


def _check(ok, **detail):
    return {"pass": bool(ok), **detail}


def run_checks(trajs, V, cfg: RunConfig, claims) -> dict:
    frame = StarkFrame(cfg.alpha)
    out = {}
    lo, hi = trajs[0].xi_range
    N = len(trajs)
    if "envelope" in cfg.checks:
        worst, ok = 0.0, True
        for a, b, bound in claims:
            vals = envelope_of(V, cfg, a, b)
            if vals.size:
                r = float(vals.max() / bound)
                worst = max(worst, r)
                ok &= r <= 1.0 + 1e-9
        out["envelope"] = _check(ok, worst_ratio=worst)
    if "oscillatory" in cfg.checks:
        a = max(1e3, lo)
        dens = []
        for t in trajs:
            rep = analysis.oscillatory_integral(t, 1.0, a, hi, "abs_sin2")
            dens.append(rep.density)
        err = max(abs(d / (2 / math.pi) - 1.0) for d in dens)
        out["oscillatory"] = _check(err <= 0.02, density=dens,
                                    rel_error=err, window=[a, hi])
    if "count" in cfg.checks:
        a = float(envelope_of(V, cfg).max())
        if cfg.mode == "schrodinger-critical":
            bound = analysis.count_bound(a, StarkFrame(1.0))
        else:
            bound = analysis.count_bound(a, frame)
        out["count"] = _check(N <= bound, a=a, bound=bound, n=N)
    if N >= 2 and "gram" in cfg.checks:
        B = min(GRAM_B, hi)
        g = analysis.gram_matrix(trajs, B)
        diag_err = max(abs(x - g.half_log_B) for x in g.A)
        out["gram"] = _check(g.alpha < 1.0 and diag_err <= 2.0, B=B, A=g.A,
                             max_offdiag=g.max_offdiag, alpha=g.alpha,
                             diag_error=diag_err)
    if N >= 2 and "bessel" in cfg.checks:
        B = min(GRAM_B, hi)
        fb = analysis.frame_basis(trajs, B)
        rng = np.random.default_rng(cfg.seed)
        worst, ok = 0.0, True
        for _ in range(cfg.n_random):
            g = rng.standard_normal(fb.nodes.size) / (1.0 + fb.nodes)
            rep = analysis.bessel_bound_check(g, fb)
            ok &= rep.applicable and rep.holds
            worst = max(worst, rep.lhs / rep.rhs)
        out["bessel"] = _check(ok, trials=cfg.n_random, worst_ratio=worst)
    if N >= 2 and "orthogonality" in cfg.checks and hi >= 1e5:
        xi0s = np.geomspace(1e3, hi / 100.0, 5)
        exps = []
        for i in range(N):
            for k in range(i + 1, N):
                _, _, ex = analysis.almost_orthogonality_sweep(
                    trajs[i], trajs[k], xi0s, hi)
                exps.append(ex)
        out["orthogonality"] = _check(min(exps) >= 1.0 / 3.0 - 0.1,
                                      exponents=exps, xi0=xi0s.tolist())
    return out


# ---------------------------------------------------------------------------
# bundles


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _dump_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True,
                               default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def write_manifest(out: Path, cfg: RunConfig, files, verdicts, wall: float):
    manifest = {
        "artifact_version": __version__,
        "config": cfg.to_dict(),
        "defaults": DEFAULTS,
        "wall_clock_s": round(wall, 3),
        "checksums": {Path(f).name: _sha256(Path(f)) for f in sorted(files)},
        "verdicts": verdicts,
    }
    _dump_json(out / "manifest.json", manifest)


def write_bundle(out: Path, cfg: RunConfig, trajs, V, exact, info, claims,
                 report, checks) -> list:
    out.mkdir(parents=True, exist_ok=True)
    files = []
    cfg_path = out / "config.ini"
    cfg_path.write_text(cfg.to_ini())
    files.append(cfg_path)
    files.append(V.save(out / "V.txt"))
    if exact is not None:
        files.append(exact.save(out / "V_segments.txt"))
    if cfg.mode != "schrodinger-critical":
        files.append(q_from_V(V, StarkFrame(cfg.alpha)).save(out / "q.txt"))
    for i, t in enumerate(trajs):
        stride = max(1, len(t) // MAX_TRAJ_ROWS)
        files.append(t.save(out / f"traj_E{i}.txt", stride=stride))
    cl = out / BOUNDS_FILE
    np.savetxt(cl, np.array(claims, dtype=float).reshape(-1, 3), fmt="%.17g",
               header="lo hi envelope_bound")
    files.append(cl)
    rec = {"mode": cfg.mode, "alpha": cfg.alpha, "energies": cfg.energies,
           "boundary_angles": cfg.boundary_angles, "anchor": trajs[0].xi_range[0],
           "xi_max": trajs[0].xi_range[1], "tol": cfg.tol,
           "construction": info, "spectral": report, "checks": checks,
           "certified": report["certified"],
           "checks_pass": all(c["pass"] for c in checks.values()),
           "tail_potential": "|x|^alpha for x < 0 (boundary angles supplied)"}
    rp = out / "report.json"
    _dump_json(rp, rec)
    files.append(rp)
    return files


def load_bundle_potential(bundle: Path, cfg: RunConfig):
    """Exact segments when present, else the node grid."""
    seg = resolve_table(bundle / "V_segments.txt")
    if seg.exists():
        return PiecewisePotential.load(seg), GridFunction.load(bundle / "V.txt")
    V = GridFunction.load(bundle / "V.txt")
    return V, V


def _status_line(name, ok, extra=""):
    return f"{'PASS' if ok else 'FAIL'}  {name}{('  ' + extra) if extra else ''}"


# ---------------------------------------------------------------------------
# commands


def cmd_construct(cfg: RunConfig, out: Path | None = None, quiet=False) -> int:
    out = Path(out or cfg.out or "bundle")
    t0 = time.perf_counter()
    try:
        trajs, V, exact, info, claims = build(cfg)
        report = report_for(trajs, V, cfg)
        checks = run_checks(trajs, V, cfg, claims)
    except StarkEmbedError as exc:
        if isinstance(exc, ArgumentError):
            raise
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    files = write_bundle(out, cfg, trajs, V, exact, info, claims, report,
                         checks)
    verdicts = dict(zip((repr(e) for e in report["energies"]),
                        report["verdicts"]))
    write_manifest(out, cfg, files, verdicts, time.perf_counter() - t0)
    ok = report["certified"] and all(c["pass"] for c in checks.values())
    if not quiet:
        for e, v in verdicts.items():
            print(_status_line(f"verdict E={e}: {v}", v == analysis.L2_CERTIFIED))
        for name, c in checks.items():
            print(_status_line(f"check {name}", c["pass"]))
        print(f"bundle written to {out}")
    return EXIT_OK if ok else EXIT_FAIL


def _bundle_config(bundle: Path, cfg: RunConfig) -> tuple[RunConfig, dict]:
    rp = bundle / "report.json"
    if not rp.is_file():
        raise FileNotFoundError(f"{rp} not found")
    rec = json.loads(rp.read_text())
    bc = replace(cfg, mode=rec["mode"], alpha=rec["alpha"],
                 energies=rec["energies"], angles=rec["boundary_angles"],
                 tol=rec["tol"])
    return bc, rec


def cmd_verify(cfg: RunConfig) -> int:
    bundle = Path(cfg.bundle)
    try:
        bc, rec = _bundle_config(bundle, cfg)
        passive, V = load_bundle_potential(bundle, bc)
        claims = np.loadtxt(bundle / BOUNDS_FILE, ndmin=2)
    except (OSError, ValueError) as exc:
        print(f"error: cannot read bundle: {exc}", file=sys.stderr)
        return EXIT_USAGE
    lines, results = [], {}
    if bc.mode == "schrodinger-critical":
        trajs = [PruferTrajectory.load(resolve_table(bundle / "traj_E0.txt"))]
        checks = run_checks(trajs, V, replace(bc, checks=["envelope", "count"]),
                            claims)
        verdicts = rec["spectral"]["verdicts"]
        lines.append("note: x-frame bundle; spectral verdicts taken from report")
    else:
        frame = StarkFrame(bc.alpha)
        try:
            trajs = solve(frame, bc.energies, bc.boundary_angles, 0.0,
                          rec["anchor"], rec["xi_max"], bc.tol, V=passive)
        except StarkEmbedError as exc:
            print(f"error: re-integration failed: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        checks = run_checks(trajs, V, bc, claims)
        rep = report_for(trajs, V, bc)
        verdicts = rep["verdicts"]
        results["spectral"] = rep
    results["checks"] = checks
    results["verdicts"] = verdicts
    for e, v in zip(bc.energies, verdicts):
        lines.append(_status_line(f"verdict E={e!r}: {v}",
                                  v == analysis.L2_CERTIFIED))
    for name, c in checks.items():
        lines.append(_status_line(f"check {name}", c["pass"]))
    print("\n".join(lines))
    dest = Path(cfg.out) if cfg.out else bundle
    dest.mkdir(parents=True, exist_ok=True)
    _dump_json(dest / "verify.json", results)
    ok = all(v == analysis.L2_CERTIFIED for v in verdicts) and \
        all(c["pass"] for c in checks.values())
    return EXIT_OK if ok else EXIT_FAIL


SWEEP_FIELDS = ["cell", "alpha", "d", "a", "a_over_2_minus_alpha", "mode",
                "slope", "verdict", "envelope_sup", "status", "error"]


def sweep_cells(cfg: RunConfig):
    alphas = cfg.sweep_alpha or [cfg.alpha]
    cells = []
    for alpha in alphas:
        dc = StarkFrame(alpha).critical_coupling
        ds = list(cfg.sweep_d)
        if cfg.sweep_margin is not None:
            ds.append(cfg.sweep_margin * dc)
        for d in ds:
            crit = abs(d - dc) <= 1e-3 * dc
            cells.append((len(cells), alpha, d, "critical" if crit else "single"))
    return cells


def _run_cell(args):
    idx, alpha, d, mode, cfg, root = args
    sub = replace(cfg, command="construct", alpha=alpha, d=d, mode=mode,
                  energies=cfg.energies[:1], angles=None,
                  checks=[c for c in cfg.checks if c == "envelope"])
    frame = StarkFrame(alpha)
    row = {"cell": idx, "alpha": alpha, "d": d,
           "a": frame.envelope_factor * 2.0 * d,
           "a_over_2_minus_alpha": frame.envelope_factor * 2.0 * d / (2 - alpha),
           "mode": mode, "slope": "", "verdict": "", "envelope_sup": "",
           "status": "ok", "error": ""}
    out = Path(root) / f"cell_{idx:03d}"
    try:
        sub.validate()
        code = cmd_construct(sub, out, quiet=True)
        rec = json.loads((out / "report.json").read_text())
        sp = rec["spectral"]
        row.update(slope=sp["slopes"][0], verdict=sp["verdicts"][0],
                   envelope_sup=sp["envelope"].get("sup", ""))
        if code == EXIT_NUMERIC:
            row["status"] = "failed"
    except Exception as exc:  # cell failures are recorded, the sweep goes on
        row.update(status="failed", error=f"{type(exc).__name__}: {exc}")
    return row


def cmd_sweep(cfg: RunConfig) -> int:
    root = Path(cfg.out or "sweep")
    root.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    jobs = [(i, a, d, m, cfg, str(root)) for i, a, d, m in sweep_cells(cfg)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_run_cell, jobs))
    else:
        rows = [_run_cell(j) for j in jobs]
    table = root / "sweep.csv"
    with open(table, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SWEEP_FIELDS)
        w.writeheader()
        for r in rows:
            w.writerow(r)
    for r in rows:
        print(f"cell {r['cell']:3d}  alpha={r['alpha']:<5g} d={r['d']:<8.4g} "
              f"{r['mode']:<8s} {r['verdict'] or r['status']}")
    files = [table] + sorted(root.glob("cell_*/manifest.json"))
    write_manifest(root, cfg, files,
                   {str(r["cell"]): r["verdict"] or r["status"] for r in rows},
                   time.perf_counter() - t0)
    return EXIT_OK if all(r["status"] == "ok" for r in rows) else EXIT_FAIL


def cmd_export(cfg: RunConfig) -> int:
    bundle = Path(cfg.bundle)
    out = Path(cfg.out) if cfg.out else bundle / "export"
    out.mkdir(parents=True, exist_ok=True)
    rp = bundle / "report.json"
    if not rp.is_file():
        print(f"error: {rp} not found", file=sys.stderr)
        return EXIT_USAGE
    rec = json.loads(rp.read_text())
    trajs = sorted(bundle.glob("traj_E*.txt*"))
    if not trajs:
        print("warning: bundle has no trajectories; exporting potential and "
              "tails only", file=sys.stderr)
    written = []

    def write_csv(name, header, rows):
        p = out / name
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for r in rows:
                w.writerow([f"{v:.12g}" if isinstance(v, float) else v
                            for v in r])
        written.append(p)

    if cfg.format == "json":
        p = out / "summary.json"
        _dump_json(p, {"mode": rec["mode"], "alpha": rec["alpha"],
                       "energies": rec["energies"],
                       "verdicts": rec["spectral"]["verdicts"],
                       "slopes": rec["spectral"]["slopes"],
                       "envelope": rec["spectral"]["envelope"],
                       "checks": {k: v["pass"] for k, v in rec["checks"].items()}})
        print(f"wrote {p}")
        return EXIT_OK

    for path in trajs:
        t = PruferTrajectory.load(path)
        tag = path.name.split(".")[0].removeprefix("traj_")
        write_csv(f"logR_{tag}.csv", ["ln_xi", "logR"],
                  zip(np.log(t.xi).tolist(), t.logR.tolist()))
    V = GridFunction.load(bundle / "V.txt")
    stride = max(1, len(V) // MAX_TRAJ_ROWS)
    write_csv("xiV.csv", ["xi", "xi_abs_V"],
              zip(V.grid[::stride].tolist(),
                  (V.grid * np.abs(V.values))[::stride].tolist()))
    for i, tail in enumerate(rec["spectral"]["tails"]):
        if tail is None:
            continue
        e = tail["edges"]
        write_csv(f"tails_E{i}.csv", ["decade", "lo", "hi", "mass"],
                  [(k, float(e[j]), float(e[j + 1]), float(m))
                   for j, (k, m) in enumerate(zip(tail["decades"],
                                                  tail["masses"]))])
    for p in written:
        print(f"wrote {p}")
    return EXIT_OK
