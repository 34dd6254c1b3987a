"""Experiment driver: exact and semiclassical purity over a time grid.

One run produces a CSV with the fixed column set

    t, p_exact, p_sc, slin_exact, slin_sc,
    residual_detM, residual_energy, residual_im_psc

(17 significant digits, LF line endings) plus a JSON metadata sidecar at
<path>.meta.json. Rows where the semiclassical formula left its validity
window carry nan in the p_sc/slin_sc/residual_im_psc columns and are listed
in the sidecar; they are flagged, never fabricated.
"""

import json
import platform
import sys as _sys
import time as _time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .config import CSV_COLUMNS, build_model
from .errors import ValidityBreakdown
from .flow import integrate_stability, integrate_trajectory
from .quantum import PurityCurve, SpectralPropagator, purity, reduced_density
from .semiclassical import purity_sc_evaluate
from .spin import product_coherent


@dataclass(frozen=True)
class RunReport:
    """Everything one experiment produced, with its invariant ceilings."""

    curve: PurityCurve
    metadata: dict
    csv_path: Path
    flagged_rows: Sequence[int]

    @property
    def max_residual_detM(self):
        return self.metadata["invariants"]["max_residual_detM"]


def compute_curve(cfg, model=None):
    """PurityCurve for one configuration (no file output)."""
    model = model or build_model(cfg)
    times = np.linspace(0.0, cfg.t_max, cfg.num_points)
    sys = cfg.system

    psi0 = product_coherent(sys, cfg.initial_state)
    prop = SpectralPropagator(model.operator, sys.hbar)
    p_exact = np.empty(times.size)
    for i, t in enumerate(times):
        rho = reduced_density(prop.apply(psi0, t), "x", sys.dim)
        p_exact[i] = purity(rho)

    traj = integrate_trajectory(sys, model, cfg.initial_state, cfg.t_max,
                                cfg.integrator, sample_times=times)
    m_series = integrate_stability(sys, model, traj, cfg.integrator)
    p_sc = np.empty(times.size)
    res_detm = np.empty(times.size)
    res_energy = np.abs(traj.energy - traj.energy[0])
    res_im = np.empty(times.size)
    flagged = []
    for i in range(times.size):
        det_m = m_series[i].det()
        try:
            ev = purity_sc_evaluate(m_series[i], traj.initial, traj.state(i))
            p_sc[i] = ev.p_sc
            res_im[i] = ev.im_residual
            res_detm[i] = abs(det_m - ev.tcal)
        except ValidityBreakdown:
            flagged.append(i)
            p_sc[i] = np.nan
            res_im[i] = np.nan
            res_detm[i] = np.nan
    curve = PurityCurve(
        times=times,
        p_exact=p_exact,
        p_sc=p_sc,
        residual_detM=res_detm,
        residual_energy=res_energy,
        residual_im_psc=res_im,
    )
    return curve, flagged


def _format_value(x):
    return f"{x:.17g}"


def write_csv(path, curve):
    columns = [
        curve.times, curve.p_exact, curve.p_sc, curve.slin_exact,
        curve.slin_sc, curve.residual_detM, curve.residual_energy,
        curve.residual_im_psc,
    ]
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for i in range(len(curve.times)):
            fh.write(",".join(_format_value(col[i]) for col in columns) + "\n")


def _sweep_entries(cfg):
    if cfg.sweep is None:
        return [(None, cfg.output_path)]
    pname, values = cfg.sweep
    entries = []
    base = Path(cfg.output_path)
    for val in values:
        name = f"{base.stem}_{pname}={val:g}{base.suffix}"
        entries.append(((pname, val), str(base.with_name(name))))
    return entries


def run_experiment(cfg, output_dir=None, threads=1, quiet=False, log=None):
    """Run the configured experiment, write outputs, return RunReports.

    Sweep values are computed by a small worker pool when threads > 1;
    output files are written in configuration order regardless of
    completion order, so results are deterministic either way.
    """
    log = log or (lambda msg: None if quiet else print(msg, file=_sys.stderr))
    entries = _sweep_entries(cfg)

    def one(entry):
        override, rel_path = entry
        started = _time.perf_counter()
        model = build_model(cfg, override)
        curve, flagged = compute_curve(cfg, model)
        wall = _time.perf_counter() - started
        return override, rel_path, curve, flagged, wall

    if threads > 1 and len(entries) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, entries))
    else:
        results = [one(entry) for entry in entries]

    reports = []
    for override, rel_path, curve, flagged, wall in results:
        out_path = Path(output_dir) / rel_path if output_dir else Path(rel_path)
        if out_path.parent and not out_path.parent.exists():
            out_path.parent.mkdir(parents=True, exist_ok=True)
        write_csv(out_path, curve)
        finite = lambda a: a[np.isfinite(a)]
        metadata = {
            "config": cfg.raw,
            "sweep_override": list(override) if override else None,
            "versions": {
                "spinsemi": __version__,
                "numpy": np.__version__,
                "python": platform.python_version(),
            },
            "wall_time_s": wall,
            "invariants": {
                "max_residual_detM": _maximum(finite(curve.residual_detM)),
                "max_residual_energy": _maximum(finite(curve.residual_energy)),
                "max_residual_im_psc": _maximum(finite(curve.residual_im_psc)),
            },
            "flagged_rows": flagged,
        }
        meta_path = Path(str(out_path) + ".meta.json")
        with open(meta_path, "w", newline="\n") as fh:
            json.dump(metadata, fh, indent=2, default=str)
            fh.write("\n")
        log(f"wrote {out_path} ({len(curve.times)} rows"
            + (f", {len(flagged)} flagged" if flagged else "") + ")")
        reports.append(RunReport(
            curve=curve, metadata=metadata, csv_path=out_path, flagged_rows=flagged,
        ))
    return reports


def _maximum(arr):
    return float(np.max(arr)) if arr.size else float("nan")
