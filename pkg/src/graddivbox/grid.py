"""Periodic uniform grids, vector fields, and exact spectral operators.

Fields live on a cubic (or square) periodic box and carry paired
physical-space and spectral-space views. The spectral layout is the
real-to-complex half spectrum (numpy ``rfftn``), so conjugate symmetry is
structural and the inverse transform is real by construction.

Normalization: spectral coefficients are true Fourier-series coefficients,
``u(x) = sum_k uhat_k exp(i k.x)``, i.e. forward transform divided by the
total number of samples. This is the single normalization constant of the
whole package; Parseval then reads ``mean(|u|^2) = sum_k w_k |uhat_k|^2``
with ``w_k = 2`` for modes whose conjugate partner is not stored and
``w_k = 1`` on the self-conjugate planes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic box: `dim` axes, `n` samples per axis, side `box_length`.

    Wavevectors are k = (2*pi/box_length) * m for integer multi-indices m
    with |m_j| <= n/2. Anisotropic grids are rejected by construction
    (single `n` for all axes).
    """

    dim: int
    n: int
    box_length: float
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        n = self.n
        if n < 4 or (n & (n - 1)) != 0:
            raise ValueError(f"n must be a power of two >= 4, got {n}")
        if not self.box_length > 0:
            raise ValueError(f"box_length must be positive, got {self.box_length}")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ValueError(
                f"dealias_fraction must be in (0, 1], got {self.dealias_fraction}"
            )

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dim

    @property
    def spectral_shape(self) -> tuple:
        return (self.n,) * (self.dim - 1) + (self.n // 2 + 1,)

    @property
    def num_samples(self) -> int:
        return self.n ** self.dim

    @property
    def spacing(self) -> float:
        return self.box_length / self.n


@lru_cache(maxsize=None)
def mode_numbers(grid: GridSpec):
    """Integer mode index m_j along each axis, broadcast to the spectral shape."""
    n = grid.n
    full = np.fft.fftfreq(n, 1.0 / n)
    half = np.arange(n // 2 + 1, dtype=float)
    axes = [full] * (grid.dim - 1) + [half]
    return tuple(np.meshgrid(*axes, indexing="ij"))


@lru_cache(maxsize=None)
def wavevectors(grid: GridSpec):
    """Physical wavevector components k_j = (2*pi/box_length) m_j."""
    scale = TWO_PI / grid.box_length
    return tuple(scale * m for m in mode_numbers(grid))


@lru_cache(maxsize=None)
def wavenumber_sq(grid: GridSpec):
    k = wavevectors(grid)
    return sum(kj * kj for kj in k)


@lru_cache(maxsize=None)
def dealias_mask(grid: GridSpec):
    """Boolean mask keeping modes with |m_j| <= dealias_fraction * n/2 on every axis."""
    cutoff = grid.dealias_fraction * (grid.n / 2) + 1e-9
    mask = np.ones(grid.spectral_shape, dtype=bool)
    for m in mode_numbers(grid):
        mask &= np.abs(m) <= cutoff
    return mask


@lru_cache(maxsize=None)
def parseval_weights(grid: GridSpec):
    """Multiplicity of each stored mode in the full spectrum (1 or 2)."""
    w = np.full(grid.spectral_shape, 2.0)
    w[..., 0] = 1.0
    w[..., -1] = 1.0  # Nyquist plane of the real axis is self-conjugate
    return w


class Field:
    """A multi-component field on a GridSpec with lazily paired views.

    Components are stored along the leading axis: shape (ncomp, n, ..., n)
    physically, (ncomp, n, ..., n//2+1) spectrally. Velocity and force
    fields have ncomp == grid.dim; scalars (e.g. a divergence) have
    ncomp == 1. Fields are treated as immutable; operators return new
    instances.
    """

    __slots__ = ("grid", "_phys", "_spec")

    def __init__(self, grid: GridSpec, phys=None, spec=None):
        if phys is None and spec is None:
            raise ValueError("Field needs a physical or spectral view")
        if phys is not None:
            phys = np.asarray(phys, dtype=float)
            if phys.ndim == grid.dim:
                phys = phys[np.newaxis]
            if phys.shape[1:] != grid.shape:
                raise ValueError(f"physical view shape {phys.shape} does not match grid {grid.shape}")
        if spec is not None:
            spec = np.asarray(spec, dtype=complex)
            if spec.ndim == grid.dim:
                spec = spec[np.newaxis]
            if spec.shape[1:] != grid.spectral_shape:
                raise ValueError(f"spectral view shape {spec.shape} does not match grid {grid.spectral_shape}")
        self.grid = grid
        self._phys = phys
        self._spec = spec

    @classmethod
    def from_physical(cls, grid: GridSpec, arr) -> "Field":
        return cls(grid, phys=arr)

    @classmethod
    def from_spectral(cls, grid: GridSpec, arr) -> "Field":
        return cls(grid, spec=arr)

    @classmethod
    def zeros(cls, grid: GridSpec, ncomp=None) -> "Field":
        ncomp = grid.dim if ncomp is None else ncomp
        return cls(grid, phys=np.zeros((ncomp,) + grid.shape))

    @property
    def ncomp(self) -> int:
        view = self._phys if self._phys is not None else self._spec
        return view.shape[0]

    @property
    def phys(self):
        if self._phys is None:
            axes = tuple(range(1, self.grid.dim + 1))
            self._phys = np.fft.irfftn(
                self._spec * self.grid.num_samples, s=self.grid.shape, axes=axes
            )
        return self._phys

    @property
    def spec(self):
        if self._spec is None:
            axes = tuple(range(1, self.grid.dim + 1))
            self._spec = np.fft.rfftn(self._phys, axes=axes) / self.grid.num_samples
        return self._spec


def transform_to_spectral(field: Field) -> Field:
    """Return the field with its spectral view materialized."""
    field.spec
    return field


def transform_to_physical(field: Field) -> Field:
    """Return the field with its physical view materialized."""
    field.phys
    return field


def divergence(u: Field) -> Field:
    """Spectral divergence of a vector field; returns a one-component Field."""
    k = wavevectors(u.grid)
    s = u.spec
    d = 1j * sum(k[j] * s[j] for j in range(u.grid.dim))
    return Field.from_spectral(u.grid, d[np.newaxis])


def gradient(field: Field) -> Field:
    """Full gradient tensor; component order is (i, j) -> i * dim + j for d(field_i)/dx_j."""
    grid = field.grid
    k = wavevectors(grid)
    s = field.spec
    out = np.empty((field.ncomp * grid.dim,) + grid.spectral_shape, dtype=complex)
    for i in range(field.ncomp):
        for j in range(grid.dim):
            out[i * grid.dim + j] = 1j * k[j] * s[i]
    return Field.from_spectral(grid, out)


def laplacian(u: Field) -> Field:
    return Field.from_spectral(u.grid, -wavenumber_sq(u.grid) * u.spec)


def grad_div(u: Field) -> Field:
    """The operator grad(div u): per mode -k (k . uhat)."""
    grid = u.grid
    k = wavevectors(grid)
    s = u.spec
    kdotu = sum(k[j] * s[j] for j in range(grid.dim))
    out = np.empty_like(s)
    for j in range(grid.dim):
        out[j] = -k[j] * kdotu
    return Field.from_spectral(grid, out)


def dealias(field: Field) -> Field:
    """Zero all modes above the grid's dealias cutoff (idempotent)."""
    return Field.from_spectral(field.grid, field.spec * dealias_mask(field.grid))


def volume_norm_sq(field: Field) -> float:
    """(1/|box|) integral of |field|^2, i.e. the mean of |field|^2 over samples.

    Uses the physical view when already materialized, otherwise Parseval on
    the spectral view; the two agree to roundoff.
    """
    if field._phys is not None:
        p = field._phys
        return float(np.mean(np.sum(p * p, axis=0)))
    w = parseval_weights(field.grid)
    s = field._spec
    return float(np.sum(w * np.sum(s.real ** 2 + s.imag ** 2, axis=0)))


def inner_product(u: Field, v: Field) -> float:
    """Volume-normalized L2 inner product (1/|box|) integral of u . v."""
    if u._phys is not None and v._phys is not None:
        return float(np.mean(np.sum(u._phys * v._phys, axis=0)))
    w = parseval_weights(u.grid)
    su, sv = u.spec, v.spec
    return float(np.sum(w * np.sum((np.conj(su) * sv).real, axis=0)))


def project_divergence_free(u: Field) -> Field:
    """Remove the k-parallel part of every mode (Leray projection)."""
    grid = u.grid
    k = wavevectors(grid)
    ksq = wavenumber_sq(grid)
    s = u.spec.copy()
    kdotu = sum(k[j] * s[j] for j in range(grid.dim))
    with np.errstate(invalid="ignore", divide="ignore"):
        coef = np.where(ksq > 0, kdotu / np.where(ksq > 0, ksq, 1.0), 0.0)
    for j in range(grid.dim):
        s[j] -= k[j] * coef
    return Field.from_spectral(grid, s)


def zero_mean(u: Field) -> Field:
    s = u.spec.copy()
    s[(slice(None),) + (0,) * u.grid.dim] = 0.0
    return Field.from_spectral(u.grid, s)
