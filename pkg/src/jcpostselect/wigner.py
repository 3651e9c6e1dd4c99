"""Wigner function of the post-selected cavity field.

The series route expands ``W = (2/pi) sum_{n,m} rho_nm <m|D P D^dag|n>`` with
the closed-form Fock matrix elements of the displaced parity ``D P D^dag``::

    m >= n:  (-1)^n sqrt(n!/m!) (2 gamma)^(m-n)        e^{-2|gamma|^2} L_n^(m-n)(4|gamma|^2)
    n >  m:  (-1)^m sqrt(m!/n!) (2 conj(gamma))^(n-m)  e^{-2|gamma|^2} L_m^(n-m)(4|gamma|^2)

Both branches keep the complex power of ``gamma``. The compact form with a
single real cosine of ``arg(gamma) - arg(alpha)`` and ``|gamma|^(m-n)`` is not
used: it drops the ``(n - m)`` multiplier of the relative phase and is
singular at the origin for ``n > m``; :func:`wigner_parity_oracle` disagrees
with it but agrees with the branch form to ~1e-15.

The factorial, power and Gaussian factors are folded into the Laguerre
function itself (see :func:`scaled_laguerre`), whose magnitude never
exceeds one, so nothing overflows for ``4|gamma|^2`` in the hundreds.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.linalg import expm
from scipy.ndimage import label
from scipy.special import comb, gammaln

from .errors import NumericalError
from .fock import FieldState, ProtocolParams, annihilation
from .postselect import ps_state

__all__ = [
    "NEGATIVE_THRESHOLD",
    "WIGNER_BOUND",
    "GridSpec",
    "LaguerreTable",
    "NegativityMetrics",
    "TruncationWarning",
    "WignerGrid",
    "laguerre_table",
    "negativity_metrics",
    "parity_kernel",
    "scaled_laguerre",
    "wigner_from_state",
    "wigner_grid",
    "wigner_parity_oracle",
    "wigner_point",
]

WIGNER_BOUND = 2.0 / math.pi
NEGATIVE_THRESHOLD = -1e-4
SERIES_TAIL_LIMIT = 1e-10
IMAG_TOLERANCE = 1e-10


class TruncationWarning(UserWarning):
    pass


def _laguerre_degrees(x: np.ndarray, max_degree: int, max_order: int):
    """Yield ``F_n[..., k]`` for ``n = 0..max_degree`` (see :func:`scaled_laguerre`)."""
    k = np.arange(max_order + 1, dtype=float)
    xc = x[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        log_f0 = 0.5 * k * np.log(xc) - 0.5 * xc - 0.5 * gammaln(k + 1)
    # x = 0, k = 0 is 0 * log(0)
    log_f0 = np.where((k == 0) & (xc == 0), 0.0, log_f0)
    f_prev = np.exp(log_f0)
    yield f_prev
    if max_degree == 0:
        return
    f_curr = (1.0 + k - xc) * f_prev / np.sqrt(1.0 + k)
    yield f_curr
    for n in range(1, max_degree):
        f_next = ((2 * n + 1 + k - xc) * f_curr - np.sqrt(n * (n + k)) * f_prev) / np.sqrt(
            (n + 1) * (n + 1 + k)
        )
        yield f_next
        f_prev, f_curr = f_curr, f_next


def scaled_laguerre(x, max_degree: int, max_order: int) -> np.ndarray:
    """Normalized generalized Laguerre functions by forward recurrence in degree.

    Returns ``F[..., n, k] = sqrt(n!/(n+k)!) x^(k/2) e^(-x/2) L_n^k(x)`` for
    ``0 <= n <= max_degree`` and ``0 <= k <= max_order``. The recurrence
    ``(n+1) L_{n+1} = (2n+1+k-x) L_n - (n+k) L_{n-1}`` is rescaled so the
    starting value carries the whole prefactor (computed as a logarithm).
    """
    x = np.asarray(x, dtype=float)
    return np.stack(list(_laguerre_degrees(x, max_degree, max_order)), axis=-2)


@dataclass(frozen=True)
class LaguerreTable:
    """Generalized Laguerre values ``L_n^k(x)`` at one point, stored scaled."""

    x: float
    max_degree: int
    max_order: int
    scaled: np.ndarray = field(repr=False)

    def value(self, n: int, k: int) -> float:
        """Unscaled ``L_n^k(x)``; may overflow to ``inf`` for very large ``x``."""
        if self.x == 0.0:
            return float(comb(n + k, n, exact=True))
        log_scale = 0.5 * (gammaln(n + 1) - gammaln(n + k + 1)) + 0.5 * k * math.log(self.x) - 0.5 * self.x
        with np.errstate(over="ignore"):
            return float(self.scaled[n, k] * np.exp(-log_scale))


def laguerre_table(x: float, max_degree: int, max_order: int) -> LaguerreTable:
    if x < 0:
        raise ValueError("Laguerre argument must be >= 0")
    return LaguerreTable(float(x), max_degree, max_order, scaled_laguerre(float(x), max_degree, max_order))


def _branch_weights(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients ``(-1)^j rho[j, j+k]`` and ``(-1)^j rho[j+k, j]`` indexed ``[j, k]``."""
    dim = rho.shape[0]
    upper = np.zeros((dim, dim), dtype=np.complex128)
    lower = np.zeros((dim, dim), dtype=np.complex128)
    sign = (-1.0) ** np.arange(dim)
    for k in range(dim):
        upper[: dim - k, k] = sign[: dim - k] * np.diagonal(rho, k)
        if k:
            lower[: dim - k, k] = sign[: dim - k] * np.diagonal(rho, -k)
    return upper, lower


def _series_row(rho: np.ndarray, gammas: np.ndarray) -> np.ndarray:
    dim = rho.shape[0]
    upper, lower = _branch_weights(rho)
    s_up = np.zeros((gammas.size, dim), dtype=np.complex128)
    s_low = np.zeros_like(s_up)
    for j, f_j in enumerate(_laguerre_degrees(4.0 * np.abs(gammas) ** 2, dim - 1, dim - 1)):
        s_up += f_j * upper[j]
        s_low += f_j * lower[j]
    rot = np.exp(1j * np.outer(np.angle(gammas), np.arange(dim)))
    w = (2.0 / math.pi) * np.sum(rot * s_up + rot.conj() * s_low, axis=1)
    imag = np.max(np.abs(w.imag)) if w.size else 0.0
    if imag > IMAG_TOLERANCE:
        raise NumericalError(f"Wigner series has imaginary residue {imag:.2e}; is rho Hermitian?")
    return w.real


def wigner_from_state(state: FieldState, gammas) -> np.ndarray:
    """Laguerre-series Wigner function of ``state`` at an array of points."""
    gammas = np.asarray(gammas, dtype=np.complex128)
    flat = gammas.ravel()
    return _series_row(state.matrix, flat).reshape(gammas.shape)


def _warn_tail(params: ProtocolParams, success_probability: float):
    # relative to rho^N_ps, the neglected mass can grow by 1/P_N
    tail = params.tail_mass() / success_probability
    if tail > SERIES_TAIL_LIMIT:
        warnings.warn(
            f"cutoff {params.cutoff} leaves relative series tail {tail:.2e} > {SERIES_TAIL_LIMIT:g}",
            TruncationWarning,
            stacklevel=3,
        )


def wigner_point(alpha, r, N, gamma, cutoff=None) -> float:
    """Wigner function of the N-atom post-selected state at one point."""
    params = ProtocolParams(alpha=alpha, r=r, atoms=N, cutoff=cutoff)
    outcome = ps_state(params)
    _warn_tail(params, outcome.success_probability)
    return float(_series_row(outcome.state.matrix, np.array([complex(gamma)]))[0])


def _oracle_dim(cutoff: int, gamma: complex) -> int:
    spread = math.sqrt(cutoff) + abs(gamma)
    return int(math.ceil(spread**2 + 10.0 * spread + 30.0))


@lru_cache(maxsize=256)
def _parity_kernel_cached(gamma: complex, cutoff: int, work_dim: int) -> np.ndarray:
    a = annihilation(work_dim - 1).matrix
    disp = expm(gamma * a.conj().T - np.conj(gamma) * a)
    if not np.all(np.isfinite(disp)):
        raise NumericalError("displacement exponential produced non-finite entries")
    rows = disp[: cutoff + 1, :]
    parity = (-1.0) ** np.arange(work_dim)
    kernel = (rows * parity) @ rows.conj().T
    kernel.setflags(write=False)
    return kernel


def parity_kernel(gamma: complex, cutoff: int, work_dim: int | None = None) -> np.ndarray:
    """Matrix ``<m| D(gamma) P D(gamma)^dag |n>`` for ``m, n <= cutoff``.

    ``D`` is the matrix exponential of ``gamma a^dag - conj(gamma) a`` in a
    padded space of dimension ``work_dim`` (chosen automatically so the
    displaced Fock states up to ``cutoff`` fit).
    """
    gamma = complex(gamma)
    needed = _oracle_dim(cutoff, gamma)
    if work_dim is None:
        work_dim = needed
    elif work_dim < needed:
        warnings.warn(
            f"working dimension {work_dim} below trust region {needed} for |gamma| = {abs(gamma):.3g}",
            TruncationWarning,
            stacklevel=2,
        )
    return _parity_kernel_cached(gamma, cutoff, max(int(work_dim), cutoff + 1))


def wigner_parity_oracle(state: FieldState, gamma, work_dim: int | None = None) -> float:
    """``(2/pi) Tr[rho D(gamma) P D(gamma)^dag]`` with a numerically exponentiated ``D``."""
    kernel = parity_kernel(complex(gamma), state.cutoff, work_dim)
    value = (2.0 / math.pi) * np.sum(state.matrix * kernel.T)
    return float(value.real)


@dataclass(frozen=True)
class GridSpec:
    """Rectangular sampling of ``gamma = x + i y``; ``points`` per axis, bounds inclusive."""

    re_min: float = -6.5
    re_max: float = 6.5
    im_min: float = -6.5
    im_max: float = 6.5
    points: int = 261

    def __post_init__(self):
        if self.points < 2:
            raise ValueError("grid needs at least 2 points per axis")
        bounds = (self.re_min, self.re_max, self.im_min, self.im_max)
        if not all(math.isfinite(b) for b in bounds):
            raise ValueError("grid bounds must be finite")
        if not (self.re_max > self.re_min and self.im_max > self.im_min):
            raise ValueError("grid bounds must satisfy max > min")

    @property
    def re_axis(self) -> np.ndarray:
        return np.linspace(self.re_min, self.re_max, self.points)

    @property
    def im_axis(self) -> np.ndarray:
        return np.linspace(self.im_min, self.im_max, self.points)

    @property
    def cell_area(self) -> float:
        return (self.re_max - self.re_min) * (self.im_max - self.im_min) / (self.points - 1) ** 2


class NegativityMetrics(NamedTuple):
    min_value: float
    negative_volume: float
    negative_region_count: int


def _negativity(values: np.ndarray, cell_area: float, threshold: float = NEGATIVE_THRESHOLD):
    neg = values < 0
    volume = float(-np.sum(values[neg]) * cell_area)
    # default structuring element is the 4-neighbour cross
    _, count = label(values < threshold)
    return NegativityMetrics(float(values.min()), volume, int(count))


@dataclass(frozen=True)
class WignerGrid:
    """Wigner values on a grid; ``values[i, j]`` is at ``re_axis[j] + 1j * im_axis[i]``."""

    re_axis: np.ndarray
    im_axis: np.ndarray
    values: np.ndarray
    cell_area: float
    min_value: float = field(init=False)
    negative_volume: float = field(init=False)
    total_integral: float = field(init=False)

    def __post_init__(self):
        metrics = _negativity(self.values, self.cell_area)
        object.__setattr__(self, "min_value", metrics.min_value)
        object.__setattr__(self, "negative_volume", metrics.negative_volume)
        object.__setattr__(self, "total_integral", float(np.sum(self.values) * self.cell_area))

    def summary(self) -> dict:
        metrics = negativity_metrics(self)
        return {
            "min_value": metrics.min_value,
            "negative_volume": metrics.negative_volume,
            "negative_region_count": metrics.negative_region_count,
            "total_integral": self.total_integral,
        }


def negativity_metrics(grid: WignerGrid, threshold: float = NEGATIVE_THRESHOLD) -> NegativityMetrics:
    """Minimum, cell-weighted negative volume, and count of 4-connected regions below ``threshold``."""
    return _negativity(grid.values, grid.cell_area, threshold)


def _grid_rows(rho, re_axis, im_rows):
    return np.stack([_series_row(rho, re_axis + 1j * y) for y in im_rows])


def wigner_grid(alpha, r, N, spec: GridSpec | None = None, cutoff=None, jobs: int = 1) -> WignerGrid:
    """Evaluate the series Wigner function on ``spec`` (default 261 x 261 over [-6.5, 6.5]^2).

    Rows are computed independently, one row per task, so the result does
    not depend on ``jobs``.
    """
    spec = spec or GridSpec()
    params = ProtocolParams(alpha=alpha, r=r, atoms=N, cutoff=cutoff)
    outcome = ps_state(params)
    _warn_tail(params, outcome.success_probability)
    rho = np.array(outcome.state.matrix)
    re_axis, im_axis = spec.re_axis, spec.im_axis

    if jobs > 1:
        blocks = np.array_split(im_axis, jobs)
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_grid_rows, [rho] * len(blocks), [re_axis] * len(blocks), blocks))
        values = np.concatenate(parts, axis=0)
    else:
        values = _grid_rows(rho, re_axis, im_axis)
    return WignerGrid(re_axis, im_axis, values, spec.cell_area)
