"""Acceptance checks reproducing the headline numbers and the oracle cross-checks.

Each check returns a :class:`CheckResult`; exceptions raised while running a
check (for instance a :class:`~jcpostselect.errors.TruncationError` from an
undersized cutoff) are recorded as failures carrying the error message.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, replace
from typing import Any, Callable

import numpy as np

from .config import FIG4_R, SweepConfig
from .dynamics import closed_form_blocks, joint_evolution_oracle
from .fock import FieldState, ProtocolParams, coherent_state, default_cutoff
from .metrics import (
    mandel_q,
    photon_statistics,
    quadrature_moments_closed_form,
    quadrature_moments_trace,
    uncertainty_product,
)
from .postselect import iterate_ps, ps_state, success_probability, success_probability_curve
from .wigner import GridSpec, parity_kernel, wigner_from_state, wigner_grid

__all__ = ["CHECKS", "CheckResult", "report_json", "run_acceptance", "run_check"]

PASS, FAIL, UNDER_RESOLVED = "pass", "fail", "under-resolved"
# r-grid spacing above which curve minima are not trusted
MAX_CURVE_STEP = 0.05
SAMPLE_SEED = 20210412
SAMPLE_SIZE = 50

FIG4_PAIRS = [(r, n) for r in FIG4_R for n in (1, 2, 5)]
SUBGRID_RE = (-1.5, 0.5, 2.5, 3.5, 5.5)
SUBGRID_IM = (-2.0, -0.75, 0.0, 0.75, 2.0)
FINE_GRID = GridSpec(-7.0, 7.0, -7.0, 7.0, 281)


@dataclass
class CheckResult:
    name: str
    target: str
    measured: Any
    tolerance: str
    verdict: str
    detail: str = ""
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def line(self) -> str:
        return f"[{self.verdict.upper():>14}] {self.name}: measured={self.measured} target={self.target} ({self.elapsed:.2f}s) {self.detail}".rstrip()


def _alpha(config):
    return config.alpha


def _random_sample(size=SAMPLE_SIZE, seed=SAMPLE_SEED, max_amp=3.5):
    rng = np.random.default_rng(seed)
    amps = rng.uniform(0.1, max_amp, size)
    phases = rng.uniform(0, 2 * math.pi, size)
    rs = rng.uniform(0.0, 3.0, size)
    ns = rng.integers(1, 6, size)
    return [(complex(a * math.cos(p), a * math.sin(p)), float(r), int(n)) for a, p, r, n in zip(amps, phases, rs, ns)]


def check_success_probabilities(config: SweepConfig) -> CheckResult:
    targets = {1: 0.0638, 2: 0.0114, 5: 0.0006}
    measured = {n: success_probability(_alpha(config), 0.51, n, config.cutoff) for n in targets}
    ok = all(abs(measured[n] - t) <= 5e-5 for n, t in targets.items())
    return CheckResult(
        "1 success probabilities at r=0.51",
        "P1=0.0638, P2=0.0114, P5=0.0006",
        {n: round(p, 6) for n, p in measured.items()},
        "+-5e-5, runtime < 1 s",
        PASS if ok else FAIL,
    )


def check_fig1_shape(config: SweepConfig) -> CheckResult:
    grid = config.r_grid()
    grid = grid[grid <= 3.0 + 1e-12]
    curve = np.array(success_probability_curve(_alpha(config), 1, grid, config.cutoff))
    r, p = curve[:, 0], curve[:, 1]
    interior_minima = [r[i] for i in range(1, len(p) - 1) if p[i] < p[i - 1] and p[i] < p[i + 1]]
    low = r[p < 0.1]
    at_zero = p[0] if r[0] == 0.0 else math.nan
    measured = {
        "P1(0)": float(at_zero),
        "local_minima": [round(float(x), 4) for x in interior_minima],
        "r_below_0.1": [round(float(low.min()), 4), round(float(low.max()), 4)] if low.size else [],
    }
    ok = (
        abs(at_zero - 1.0) <= 1e-12
        and len(interior_minima) >= 2
        and low.size > 0
        and low.min() >= 0.35
        and low.max() <= 0.65
    )
    verdict = PASS if ok else FAIL
    if config.r_step > MAX_CURVE_STEP:
        verdict = UNDER_RESOLVED
    return CheckResult(
        "2 shape of the P1(r) curve",
        "P1(0)=1, oscillating, P1<0.1 only for r in [0.35, 0.65]",
        measured,
        f"1e-12 at r=0; r step <= {MAX_CURVE_STEP}; runtime < 10 s",
        verdict,
    )


def _squeezing_min(config, n):
    rs = [r for r in config.r_grid() if 0.7 < r < 1.3]
    if not rs:
        return math.inf, math.nan
    dbs = [quadrature_moments_closed_form(_alpha(config), r, n, 0.0, config.cutoff).squeezing_db for r in rs]
    i = int(np.argmin(dbs))
    return float(dbs[i]), float(rs[i])


def check_fig2_squeezing(config: SweepConfig) -> CheckResult:
    mins = {n: _squeezing_min(config, n) for n in (1, 2, 5)}
    ok = -4.5 <= mins[5][0] <= -3.5 and mins[1][0] < 0 and mins[2][0] < 0
    verdict = PASS if ok else FAIL
    detail = ""
    if config.r_step > MAX_CURVE_STEP:
        verdict = UNDER_RESOLVED
        detail = f"r step {config.r_step} > {MAX_CURVE_STEP}: minimum over (0.7, 1.3) not resolved"
    return CheckResult(
        "3 squeezing minimum in (0.7, 1.3)",
        "N=5 min in [-4.5, -3.5] dB; N=1,2 min < 0 dB",
        {n: {"db": round(db, 4), "r": r} for n, (db, r) in mins.items()},
        "interval bounds; runtime < 10 s",
        verdict,
        detail,
    )


def check_fig3_mandel(config: SweepConfig) -> CheckResult:
    measured = {}
    ok = True
    for n in (1, 2, 5):
        q1 = mandel_q(_alpha(config), 1.0, n, config.cutoff)
        q2 = mandel_q(_alpha(config), 2.0, n, config.cutoff)
        q0 = mandel_q(_alpha(config), 0.0, n, config.cutoff)
        measured[n] = {"Q(1.0)": round(q1, 6), "Q(2.0)": round(q2, 6), "Q(0)": q0}
        ok &= q1 < 0 and q2 < 0 and abs(q0) <= 1e-10
    return CheckResult(
        "4 Mandel Q sign",
        "Q<0 at r=1.0 and r=2.0 for N=1,2,5; Q(0)=0",
        measured,
        "|Q(0)| <= 1e-10; runtime < 5 s",
        PASS if ok else FAIL,
    )


def check_wigner_onset(config: SweepConfig) -> CheckResult:
    """Computes the whole 6 x 3 fig4 batch so its runtime is measured too."""
    mins = {}
    for r, n in FIG4_PAIRS:
        mins[(r, n)] = wigner_grid(_alpha(config), r, n, config.grid, config.cutoff).min_value
    ok = mins[(0.2, 1)] > -1e-3 and all(mins[(0.4, n)] < -1e-3 for n in (1, 2, 5))
    return CheckResult(
        "5 Wigner negativity onset",
        "min W > -1e-3 at (0.2,1); min W < -1e-3 at (0.4, N=1,2,5)",
        {f"r={r},N={n}": float(f"{v:.4g}") for (r, n), v in mins.items() if r in (0.2, 0.4)},
        "threshold 1e-3; runtime < 120 s for the fig4 batch",
        PASS if ok else FAIL,
    )


def check_oracle_equivalence(config: SweepConfig) -> CheckResult:
    sample = _random_sample(20, SAMPLE_SEED + 1)
    ps_err = 0.0
    for alpha, r, n in sample:
        cutoff = config.cutoff or default_cutoff(alpha)
        closed = ps_state(ProtocolParams(alpha, r, n, cutoff)).state.matrix
        iterated = iterate_ps(coherent_state(alpha, cutoff), r, n).state.matrix
        ps_err = max(ps_err, float(np.max(np.abs(closed - iterated))))

    block_err = 0.0
    rng = np.random.default_rng(SAMPLE_SEED + 2)
    for alpha, r, _ in sample[:10]:
        cutoff = config.cutoff or default_cutoff(alpha)
        states = [coherent_state(alpha, cutoff)]
        probs = rng.dirichlet(np.ones(cutoff + 1))
        states.append(FieldState(np.diag(probs)))
        for st in states:
            oracle = joint_evolution_oracle(st, r)
            closed_blocks = closed_form_blocks(st, r)
            for name in ("rho11", "rho12", "rho21", "rho22"):
                diff = getattr(oracle, name)[:-2, :-2] - getattr(closed_blocks, name)[:-2, :-2]
                block_err = max(block_err, float(np.max(np.abs(diff))))

    gammas = np.array([x + 1j * y for y in SUBGRID_IM for x in SUBGRID_RE])
    wig_err = 0.0
    for r, n in FIG4_PAIRS:
        state = ps_state(ProtocolParams(_alpha(config), r, n, config.cutoff)).state
        series = wigner_from_state(state, gammas)
        for g, w in zip(gammas, series):
            kernel = parity_kernel(complex(g), state.cutoff)
            oracle = (2.0 / math.pi) * float(np.sum(state.matrix * kernel.T).real)
            wig_err = max(wig_err, abs(w - oracle))

    ok = ps_err <= 1e-10 and block_err <= 1e-8 and wig_err <= 1e-8
    return CheckResult(
        "6 oracle equivalence",
        "closed vs iterative PS state; branch maps vs expm; series vs parity Wigner",
        {"ps_state": float(ps_err), "blocks": float(block_err), "wigner": float(wig_err)},
        "1e-10, 1e-8, 1e-8 (elementwise max)",
        PASS if ok else FAIL,
    )


def check_conservation(config: SweepConfig) -> CheckResult:
    sample = _random_sample()
    trace_err = 0.0
    for alpha, r, _ in sample[:10]:
        cutoff = config.cutoff or default_cutoff(alpha)
        st = coherent_state(alpha, cutoff)
        blocks = joint_evolution_oracle(st, r)
        trace_err = max(trace_err, abs(blocks.total_trace() - st.trace().real))

    prob_sum_err = 0.0
    min_uncertainty = math.inf
    corr_margin = math.inf
    for alpha, r, n in sample:
        stats = photon_statistics(alpha, r, n, config.cutoff)
        prob_sum_err = max(prob_sum_err, abs(float(np.sum(stats.probabilities)) - 1.0))
        state = ps_state(ProtocolParams(alpha, r, n, config.cutoff)).state
        for phi in (0.0, math.pi / 4, math.pi / 2):
            min_uncertainty = min(min_uncertainty, uncertainty_product(state, phi))
        p_n = success_probability(alpha, r, n, config.cutoff)
        p_1 = success_probability(alpha, r, 1, config.cutoff)
        corr_margin = min(corr_margin, p_n - p_1**n)

    integrals = {}
    for r, n in ((0.51, 1), (1.0, 5)):
        integrals[f"r={r},N={n}"] = wigner_grid(_alpha(config), r, n, FINE_GRID, config.cutoff).total_integral
    integral_err = max(abs(v - 1.0) for v in integrals.values())

    ok = (
        trace_err <= 1e-10
        and integral_err <= 1e-6
        and prob_sum_err <= 1e-10
        and min_uncertainty >= 1.0 - 1e-9
        and corr_margin >= -1e-12
    )
    return CheckResult(
        "7 conservation and normalization",
        "trace preserved; Wigner integral 1; sum c_n = 1; uncertainty >= 1; P_N >= p1^N",
        {
            "trace": trace_err,
            "wigner_integral": integral_err,
            "photon_sum": prob_sum_err,
            "min_uncertainty": min_uncertainty,
            "min P_N - p1^N": corr_margin,
        },
        "1e-10, 1e-6, 1e-10, 1e-9, 1e-12",
        PASS if ok else FAIL,
    )


def check_identity(config: SweepConfig) -> CheckResult:
    alpha = _alpha(config)
    cutoff = config.cutoff or default_cutoff(alpha)
    coherent = coherent_state(alpha, cutoff)
    state_err = var_err = 0.0
    q_err = wig_err = 0.0
    gammas = np.array([x + 1j * y for y in SUBGRID_IM for x in SUBGRID_RE])
    gaussian = (2.0 / math.pi) * np.exp(-2.0 * np.abs(gammas - alpha) ** 2)
    for n in (1, 2, 5):
        outcome = ps_state(ProtocolParams(alpha, 0.0, n, cutoff))
        state_err = max(state_err, float(np.max(np.abs(outcome.state.matrix - coherent.matrix))))
        for phi in (0.0, math.pi / 4, math.pi / 2):
            var_err = max(
                var_err,
                abs(quadrature_moments_closed_form(alpha, 0.0, n, phi, cutoff).variance - 1.0),
                abs(quadrature_moments_trace(outcome.state, phi).variance - 1.0),
            )
        if alpha != 0:
            q_err = max(q_err, abs(mandel_q(alpha, 0.0, n, cutoff)))
        wig_err = max(wig_err, float(np.max(np.abs(wigner_from_state(outcome.state, gammas) - gaussian))))
    ok = max(state_err, var_err, q_err, wig_err) <= 1e-10
    return CheckResult(
        "8 identity case r=0",
        "coherent state, variance 1, Q=0, Gaussian Wigner",
        {"state": state_err, "variance": var_err, "mandel_q": q_err, "wigner": wig_err},
        "1e-10",
        PASS if ok else FAIL,
    )


# name, function, runtime budget in seconds
CHECKS: list[tuple[str, Callable[[SweepConfig], CheckResult], float]] = [
    ("success_probabilities", check_success_probabilities, 1.0),
    ("fig1_shape", check_fig1_shape, 10.0),
    ("fig2_squeezing", check_fig2_squeezing, 10.0),
    ("fig3_mandel", check_fig3_mandel, 5.0),
    ("wigner_onset", check_wigner_onset, 120.0),
    ("oracle_equivalence", check_oracle_equivalence, math.inf),
    ("conservation", check_conservation, math.inf),
    ("identity", check_identity, math.inf),
]


def run_check(key: str, config: SweepConfig | None = None) -> CheckResult:
    config = config or SweepConfig()
    _, func, budget = next(c for c in CHECKS if c[0] == key)
    start = time.perf_counter()
    try:
        result = func(config)
    except Exception as exc:  # failures are report entries, not crashes
        result = CheckResult(key, "", None, "", FAIL, f"{type(exc).__name__}: {exc}")
    result.elapsed = time.perf_counter() - start
    if result.verdict == PASS and result.elapsed > budget:
        result = replace(result, verdict=FAIL, detail=f"runtime {result.elapsed:.2f}s over budget {budget:g}s")
    return result


def run_acceptance(config: SweepConfig | None = None) -> list[CheckResult]:
    return [run_check(key, config) for key, _, _ in CHECKS]


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        return None if math.isnan(value) else float(value)
    if isinstance(value, np.integer):
        return int(value)
    return value


def report_json(results: list[CheckResult]) -> str:
    return json.dumps(
        {
            "all_passed": all(r.passed for r in results),
            "checks": [_jsonable(asdict(r)) for r in results],
        },
        indent=1,
    )
