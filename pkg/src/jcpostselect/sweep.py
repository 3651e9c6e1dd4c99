"""Parameter sweeps and figure-data files.

Every work item (one ``(r, N)`` pair, or one Wigner grid row) is computed
on its own, so the bytes written do not depend on how many workers ran.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import SweepConfig
from .errors import UndefinedMeanError
from .fock import ProtocolParams
from .metrics import mandel_q, photon_moments_beta, quadrature_moments_closed_form
from .postselect import ps_state, success_probability, success_probability_curve
from .wigner import WignerGrid, negativity_metrics, wigner_grid

__all__ = [
    "PROB_COLUMNS",
    "SWEEP_COLUMNS",
    "fmt",
    "prob_rows",
    "run_prob",
    "run_state",
    "run_sweep",
    "run_wigner_job",
    "run_wigner_batch",
    "sweep_row",
    "sweep_rows",
    "wigner_csv",
]

SWEEP_COLUMNS = ("r", "N", "variance", "squeezing_db", "mandel_q", "mean_n", "P_N", "note")
PROB_COLUMNS = ("r", "N", "P_N")


def fmt(value) -> str:
    """12 significant digits, locale independent; ``None`` becomes an empty field."""
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".12g")


def sweep_row(alpha: complex, r: float, N: int, phi: float = 0.0, cutoff: int | None = None) -> dict:
    quad = quadrature_moments_closed_form(alpha, r, N, phi, cutoff)
    note = ""
    try:
        q = mandel_q(alpha, r, N, cutoff)
    except UndefinedMeanError as exc:
        q, note = None, f"mandel_q undefined: {exc}"
    mean_n, _ = photon_moments_beta(alpha, r, N, cutoff)
    return {
        "r": r,
        "N": N,
        "variance": quad.variance,
        "squeezing_db": quad.squeezing_db,
        "mandel_q": q,
        "mean_n": mean_n,
        "P_N": success_probability(alpha, r, N, cutoff),
        "note": note,
    }


def _sweep_task(args):
    return sweep_row(*args)


def _map(func, tasks, jobs):
    if jobs <= 1:
        return [func(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, tasks, chunksize=chunk))


def sweep_rows(config: SweepConfig) -> list[dict]:
    """All ``(r, N)`` rows, ordered by ``r`` then ``N``."""
    tasks = [
        (config.alpha, float(r), int(n), config.phi, config.cutoff)
        for r in config.r_grid()
        for n in sorted(config.atoms)
    ]
    return _map(_sweep_task, tasks, config.jobs)


def _write_csv(path: Path, columns, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([row[c] if isinstance(row[c], str) else fmt(row[c]) for c in columns])
    path.write_text(buf.getvalue())
    return path


def run_sweep(config: SweepConfig, name: str = "sweep.csv") -> Path:
    """Write the squeezing / Mandel / success-probability table for every ``(r, N)``."""
    return _write_csv(config.out_dir / name, SWEEP_COLUMNS, sweep_rows(config))


def prob_rows(config: SweepConfig) -> list[dict]:
    rows = []
    for n in sorted(config.atoms):
        for r, p in success_probability_curve(config.alpha, n, config.r_grid(), config.cutoff):
            rows.append({"r": r, "N": n, "P_N": p})
    rows.sort(key=lambda row: (row["r"], row["N"]))
    return rows


def run_prob(config: SweepConfig, name: str = "prob.csv") -> Path:
    return _write_csv(config.out_dir / name, PROB_COLUMNS, prob_rows(config))


def run_state(config: SweepConfig, r: float, N: int) -> Path:
    """Dump the normalized post-selected state with its success probability as JSON."""
    outcome = ps_state(ProtocolParams(config.alpha, r, N, config.cutoff, config.phi))
    payload = outcome.state.to_dict()
    payload.update(
        {
            "alpha": [config.alpha.real, config.alpha.imag],
            "r": r,
            "atoms": N,
            "success_probability": outcome.success_probability,
        }
    )
    path = config.out_dir / f"state_r{fmt(r)}_N{N}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=1) + "\n")
    return path


def wigner_csv(grid: WignerGrid) -> str:
    buf = io.StringIO()
    buf.write("x,y,W\n")
    for i, y in enumerate(grid.im_axis):
        for j, x in enumerate(grid.re_axis):
            buf.write(f"{fmt(x)},{fmt(y)},{fmt(grid.values[i, j])}\n")
    return buf.getvalue()


def run_wigner_job(config: SweepConfig, r: float, N: int) -> tuple[WignerGrid, Path, Path]:
    """Write ``wigner_r{r}_N{N}.csv`` and the matching ``.json`` summary."""
    grid = wigner_grid(config.alpha, r, N, config.grid, config.cutoff, jobs=config.jobs)
    stem = f"wigner_r{fmt(r)}_N{N}"
    config.out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = config.out_dir / f"{stem}.csv"
    csv_path.write_text(wigner_csv(grid))
    metrics = negativity_metrics(grid)
    summary = {
        "alpha": [config.alpha.real, config.alpha.imag],
        "r": r,
        "atoms": N,
        "min_value": metrics.min_value,
        "negative_volume": metrics.negative_volume,
        "negative_region_count": metrics.negative_region_count,
        "total_integral": grid.total_integral,
    }
    json_path = config.out_dir / f"{stem}.json"
    json_path.write_text(json.dumps(summary, indent=1) + "\n")
    return grid, csv_path, json_path


def run_wigner_batch(config: SweepConfig) -> list[tuple[WignerGrid, Path, Path]]:
    """One job per ``(r, N)`` in ``wigner_r x atoms``; the fig4 preset gives the 6 x 3 matrix."""
    return [run_wigner_job(config, r, n) for r in config.wigner_r for n in sorted(config.atoms)]

