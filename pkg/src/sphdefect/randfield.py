"""Monte Carlo for the defect of Gaussian random spherical harmonics.

    f_l(x) = sqrt(4 pi / (2l+1)) sum_{m=-l}^{l} a_m Y_lm(x),   a_m iid N(0, 1)

with Y_lm the real orthonormal harmonics, so that E f_l(x) f_l(y) = P_l(cos d(x, y))
and the pointwise variance is 1.  The field is synthesized on a Gauss-Legendre (in cos theta) x uniform (in phi) grid,
and the defect sum_i w_i sign(f(x_i)) is the grid quadrature of
int H(f(x)) dx.

Coefficients come from a counter-based generator (Philox) keyed by
(seed, sample index), so every sample can be regenerated on its own and a
parallel run is bitwise identical to a serial one.  Samples are processed in
fixed-size chunks whatever the worker count, and the reduction is done over
the full ordered array of per-sample defects.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .quad import gauss_legendre_rule
from .specfun import assoc_legendre_table

__all__ = [
    "HarmonicCoefficients",
    "SphereGrid",
    "DefectSample",
    "VarianceEstimate",
    "ResolutionError",
    "sample_coefficients",
    "sphere_grid",
    "grid_for_degree",
    "synthesize",
    "evaluate",
    "defect",
    "hemisphere_mask",
    "sample_defects",
    "mc_variance",
    "default_workers",
]

THREADS_ENV = "SPHDEFECT_THREADS"
MIN_GRID = 64
DEFAULT_RESOLUTION = 8.0
_CHUNK = 32
_SEED_MASK = (1 << 64) - 1


class ResolutionError(ValueError):
    """The grid cannot resolve a degree-l harmonic."""


def default_workers():
    value = os.environ.get(THREADS_ENV)
    if value:
        return max(1, int(value))
    return 1


@dataclass(frozen=True)
class HarmonicCoefficients:
    l: int
    a: np.ndarray  # a[m + l] for m = -l..l
    seed: int
    sample_index: int


def _generator(seed, sample_index):
    return np.random.Generator(np.random.Philox(key=[seed & _SEED_MASK, sample_index]))


def sample_coefficients(l, seed, sample_index):
    if l < 1:
        raise ValueError("l must be >= 1")
    a = _generator(seed, sample_index).standard_normal(2 * l + 1)
    a.flags.writeable = False
    return HarmonicCoefficients(l, a, seed, sample_index)


@dataclass(frozen=True, eq=False)
class SphereGrid:
    n_theta: int
    n_phi: int
    cos_theta: np.ndarray  # increasing, antipodally symmetric
    theta_weights: np.ndarray
    phi: np.ndarray
    phi_step: float
    resolution: float = float("nan")

    @property
    def theta(self):
        return np.arccos(self.cos_theta)

    @property
    def weights(self):
        return np.outer(self.theta_weights, np.full(self.n_phi, self.phi_step))

    def antipode_index(self, i, k):
        """Grid index of the point antipodal to (i, k)."""
        return self.n_theta - 1 - i, (k + self.n_phi // 2) % self.n_phi


@lru_cache(maxsize=16)
def sphere_grid(n_theta, n_phi, resolution=float("nan")):
    if n_phi % 2:
        raise ValueError("n_phi must be even so that antipodes are grid points")
    rule = gauss_legendre_rule(n_theta)
    phi_step = 2.0 * math.pi / n_phi
    phi = phi_step * np.arange(n_phi)
    return SphereGrid(n_theta, n_phi, rule.nodes, rule.weights, phi, phi_step, resolution)


def grid_for_degree(l, resolution=DEFAULT_RESOLUTION):
    """Grid with n_theta = n_phi = max(64, ceil(resolution * l)), rounded up to even."""
    n = max(MIN_GRID, math.ceil(resolution * l))
    n += n % 2
    return sphere_grid(n, n, float(resolution))


def _basis_theta(l, cos_theta):
    # columns m = -l..l; sqrt(2) for m != 0 makes the real basis orthonormal
    table = assoc_legendre_table(l, cos_theta)  # (l+1, n)
    out = np.empty((cos_theta.size, 2 * l + 1))
    out[:, l] = table[0]
    out[:, l + 1 :] = math.sqrt(2.0) * table[1:].T
    out[:, :l] = math.sqrt(2.0) * table[1:][::-1].T
    return out


def _basis_phi(l, phi):
    m = np.arange(-l, l + 1)[:, None]
    return np.where(m < 0, np.sin(-m * phi), np.cos(m * phi))


def _field_scale(l):
    return math.sqrt(4.0 * math.pi / (2 * l + 1))


@lru_cache(maxsize=8)
def _synthesis_tables(l, grid):
    lam = _basis_theta(l, grid.cos_theta) * _field_scale(l)
    trig = _basis_phi(l, grid.phi)
    lam.flags.writeable = False
    trig.flags.writeable = False
    return lam, trig


def _check_resolution(l, grid):
    if grid.n_theta < 2 * l + 2:
        raise ResolutionError(f"n_theta={grid.n_theta} < 2l+2={2 * l + 2}")


def synthesize(coeffs, grid):
    """Values of f_l on the grid, shape (n_theta, n_phi)."""
    l = coeffs.l
    _check_resolution(l, grid)
    lam, trig = _synthesis_tables(l, grid)
    return (lam * coeffs.a) @ trig


def _synthesize_batch(a, l, grid):
    lam, trig = _synthesis_tables(l, grid)
    return (lam[None, :, :] * a[:, None, :]) @ trig


def evaluate(coeffs, theta, phi):
    """f_l at arbitrary points (theta, phi) given as equal-shape arrays."""
    l = coeffs.l
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    lam = _basis_theta(l, np.cos(theta.ravel()))
    trig = _basis_phi(l, phi.ravel())
    vals = np.einsum("pm,m,mp->p", lam, coeffs.a, trig) * _field_scale(l)
    return vals.reshape(theta.shape)


@dataclass(frozen=True)
class DefectSample:
    l: int
    value: float
    seed: int
    sample_index: int


def hemisphere_mask(grid):
    """Boolean mask of the northern hemisphere cos(theta) > 0."""
    return np.broadcast_to((grid.cos_theta > 0)[:, None], (grid.n_theta, grid.n_phi))


def _defect_values(values, grid, mask=None):
    h = np.sign(values)  # sign(0) = 0 matches H(0) = 0
    if mask is not None:
        h = h * mask
    return (h @ np.full(grid.n_phi, grid.phi_step)) @ grid.theta_weights


def defect(values, grid, mask=None, l=None, seed=None, sample_index=None):
    """Grid defect sum_i w_i H(f(x_i)); ``mask`` restricts to a region."""
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.n_theta, grid.n_phi):
        raise ValueError("field values do not match the grid")
    return DefectSample(l, float(_defect_values(values, grid, mask)), seed, sample_index)


def _chunk_defects(l, grid, seed, start, stop):
    a = np.stack([_generator(seed, i).standard_normal(2 * l + 1) for i in range(start, stop)])
    return _defect_values(_synthesize_batch(a, l, grid), grid)


def sample_defects(l, n_samples, seed, resolution=DEFAULT_RESOLUTION, workers=None, grid=None):
    """Defects of samples 0..n_samples-1 as an array ordered by sample index."""
    grid = grid if grid is not None else grid_for_degree(l, resolution)
    _check_resolution(l, grid)
    _synthesis_tables(l, grid)  # fill the cache before threads start
    bounds = [(s, min(s + _CHUNK, n_samples)) for s in range(0, n_samples, _CHUNK)]
    workers = default_workers() if workers is None else workers

    def run(b):
        return _chunk_defects(l, grid, seed, *b)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, bounds))
    else:
        parts = [run(b) for b in bounds]
    return np.concatenate(parts) if parts else np.empty(0)


@dataclass(frozen=True)
class VarianceEstimate:
    l: int
    n_samples: int
    mean: float
    variance: float
    mean_stderr: float
    var_stderr: float
    resolution: float
    seed: int


def mc_variance(l, n_samples, seed, resolution=DEFAULT_RESOLUTION, workers=None):
    """Monte Carlo mean and variance of the defect of f_l (even l)."""
    if l < 2 or l % 2:
        raise ValueError("the defect is nontrivial only for even l")
    if n_samples < 2:
        raise ValueError("need at least two samples")
    if resolution < 4:
        raise ResolutionError("resolution factor must be >= 4")
    d = sample_defects(l, n_samples, seed, resolution, workers)
    mean = float(np.mean(d))
    var = float(np.var(d, ddof=1))
    return VarianceEstimate(
        l=l,
        n_samples=n_samples,
        mean=mean,
        variance=var,
        mean_stderr=math.sqrt(var / n_samples),
        var_stderr=var * math.sqrt(2.0 / (n_samples - 1)),
        resolution=float(resolution),
        seed=seed,
    )
