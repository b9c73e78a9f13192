"""Periodic grid, Fourier transforms, spectral differentiation and norms.

The domain is the torus [0, L)^2 sampled at x_j = j L / N. Coefficients use the
amplitude convention

    u_hat[k] = N^-2 * sum_j u(x_j) exp(-i k . x_j)

(`numpy.fft.fft2(..., norm="forward")`), so a unit sine has two coefficients of
magnitude 1/2 and Parseval reads

    integral |u|^2 dx = L^2 * sum_k |u_hat[k]|^2.

Arrays are laid out component-major with the two lattice axes last, in
`numpy.fft` index order (0, 1, ..., N/2 - 1, -N/2, ..., -1).
"""

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import ClassVar

import numpy as np

from .error import ConfigError, UsageError
from .types import NormVariant

SOBOLEV_RANGE = (-2.0, 4.0)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid:
    """Uniform periodic collocation grid and its wavenumber lattice.

    Examples:
        >>> from smaglab.spectral import Grid
        >>> grid = Grid(64)
        >>> grid.dx == grid.L / 64
        True

    """

    N: int
    L: float = 2.0 * math.pi

    d: ClassVar[int] = 2

    def __post_init__(self):
        """Validate the grid parameters."""
        if isinstance(self.N, bool) or int(self.N) != self.N:
            raise ConfigError("N must be an integer", key="grid.N")
        if self.N < 4:
            raise ConfigError("N must be >= 4", key="grid.N")
        if self.N % 2:
            raise ConfigError("N must be even", key="grid.N")
        if not (math.isfinite(self.L) and self.L > 0):
            raise ConfigError("L must be positive and finite", key="grid.L")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "L", float(self.L))

    @property
    def dx(self) -> float:
        """Grid spacing L/N."""
        return self.L / self.N

    @property
    def k_min(self) -> float:
        """Smallest nonzero wavenumber 2*pi/L."""
        return 2.0 * math.pi / self.L

    @property
    def shape(self) -> tuple[int, int]:
        """Sample shape per component."""
        return (self.N, self.N)

    @cached_property
    def points(self) -> np.ndarray:
        """Collocation points, shape (2, N, N), `ij` indexing."""
        x = np.arange(self.N) * self.dx
        return _readonly(np.stack(np.meshgrid(x, x, indexing="ij")))

    @cached_property
    def integer_wavenumbers(self) -> np.ndarray:
        """Integer lattice indices in `numpy.fft` order."""
        return _readonly(np.fft.fftfreq(self.N, 1.0 / self.N).round().astype(int))

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Wavevectors k = (k1, k2), shape (2, N, N)."""
        n = self.integer_wavenumbers * self.k_min
        k1, k2 = np.meshgrid(n, n, indexing="ij")
        return _readonly(np.stack([k1, k2]))

    @cached_property
    def derivative_wavenumbers(self) -> np.ndarray:
        """Wavevectors with the unpaired Nyquist entries zeroed, for odd derivatives."""
        k = self.wavenumbers.copy()
        k[0][self.N // 2, :] = 0.0
        k[1][:, self.N // 2] = 0.0
        return _readonly(k)

    @cached_property
    def k_squared(self) -> np.ndarray:
        """|k|^2 on the lattice, shape (N, N)."""
        return _readonly(np.sum(self.wavenumbers**2, axis=0))

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        """True on the Nyquist row and column, which have no conjugate partner."""
        mask = np.zeros(self.shape, dtype=bool)
        mask[self.N // 2, :] = True
        mask[:, self.N // 2] = True
        return _readonly(mask)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask |n_i| < N/3: the modes spanned by the Galerkin space."""
        n = np.abs(self.integer_wavenumbers)
        keep = 3 * n < self.N
        return _readonly(keep[:, None] & keep[None, :])

    def padded(self, factor: float) -> "Grid":
        """Return the zero-padded evaluation grid with at least `factor`*N points.

        Args:
            factor (float): padding factor, >= 1.

        Returns:
            Grid: grid of the same period with an even number of points.

        """
        if factor < 1.0:
            raise ConfigError("padding factor must be >= 1", key="physics.padding")
        m = 2 * math.ceil(factor * self.N / 2)
        return Grid(m, self.L)


@dataclass(frozen=True)
class SobolevOrder:
    """Order s of a Sobolev norm."""

    s: float

    def __post_init__(self):
        """Validate the supported range."""
        lo, hi = SOBOLEV_RANGE
        if not (lo <= self.s <= hi):
            raise UsageError(f"Sobolev order {self.s} outside supported range [{lo}, {hi}]")

    @property
    def is_integer(self) -> bool:
        """Whether the literal derivative-sum norm is available."""
        return float(self.s).is_integer()


def _component_shape(values: np.ndarray, grid: Grid) -> tuple[int, ...]:
    if values.shape[-2:] != grid.shape:
        raise ConfigError(
            f"sample shape {values.shape[-2:]} does not match grid {grid.shape}"
        )
    components = values.shape[:-2]
    if components not in ((), (grid.d,), (grid.d, grid.d)):
        raise ConfigError(f"unsupported component shape {components}")
    return components


@dataclass(frozen=True, eq=False)
class RealField:
    """Physical-space samples of a scalar, vector or tensor field."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        """Check shape and finiteness."""
        values = np.asarray(self.values, dtype=float)
        _component_shape(values, self.grid)
        if not np.all(np.isfinite(values)):
            raise UsageError("field has non-finite samples")
        object.__setattr__(self, "values", values)

    @property
    def components(self) -> tuple[int, ...]:
        """Component shape: (), (2,) or (2, 2)."""
        return self.values.shape[:-2]


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a real field (any component shape)."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        """Check the coefficient shape."""
        coeffs = np.asarray(self.coeffs, dtype=complex)
        _component_shape(coeffs, self.grid)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def components(self) -> tuple[int, ...]:
        """Component shape: (), (2,) or (2, 2)."""
        return self.coeffs.shape[:-2]


@dataclass(frozen=True, eq=False)
class SpectralVelocity(SpectralField):
    """Divergence-free, mean-zero velocity field stored as Fourier coefficients.

    On the torus the Stokes eigenfunctions are the divergence-free Fourier
    modes, so the coefficient array is the Galerkin state c_k(t).
    """

    def __post_init__(self):
        """Check that the field has one component per dimension."""
        super().__post_init__()
        if self.components != (self.grid.d,):
            raise ConfigError(f"velocity needs {self.grid.d} components, got {self.components}")

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralVelocity":
        """Return the zero velocity on `grid`."""
        return cls(grid, np.zeros((grid.d, *grid.shape), dtype=complex))

    def to_real(self) -> RealField:
        """Evaluate the velocity at the collocation points."""
        return inverse_transform(self)

    def check(self, rtol: float = 1e-12) -> None:
        """Raise `UsageError` unless the velocity invariants hold.

        Checked: Hermitian symmetry, divergence |k . u_k| <= rtol * max|u_k|,
        zero mean, and vanishing Nyquist lines.

        Args:
            rtol (float, optional): relative tolerance. Defaults to 1e-12.

        """
        c = self.coeffs
        scale = float(np.max(np.abs(c), initial=0.0))
        if scale == 0.0:
            return
        if np.max(np.abs(c - _reflect(c).conj())) > rtol * scale:
            raise UsageError("velocity is not Hermitian-symmetric")
        div = np.abs(np.sum(self.grid.wavenumbers * c, axis=0))
        if np.max(div) > rtol * scale:
            raise UsageError("velocity is not divergence-free")
        if np.max(np.abs(c[:, 0, 0])) > rtol * scale:
            raise UsageError("velocity has nonzero mean")
        if np.max(np.abs(c[:, self.grid.nyquist_mask])) > rtol * scale:
            raise UsageError("velocity has energy on the Nyquist lines")


def _reflect(c: np.ndarray) -> np.ndarray:
    """Return the coefficients at -k (index -n mod N) for every k."""
    return np.roll(np.flip(c, axis=(-2, -1)), 1, axis=(-2, -1))


def _check_same_grid(a: Grid, b: Grid) -> None:
    if a != b:
        raise ConfigError(f"grid mismatch: {a} vs {b}")


def forward_transform(f: RealField) -> SpectralField:
    """Transform physical samples to Fourier coefficients.

    Args:
        f (RealField): samples at the collocation points.

    Returns:
        SpectralField: coefficients in the amplitude convention of this module.

    Examples:
        >>> import numpy as np
        >>> from smaglab.spectral import Grid, RealField, forward_transform
        >>> grid = Grid(8)
        >>> u = RealField(grid, np.sin(grid.points[1]))
        >>> round(abs(forward_transform(u).coeffs[0, 1]), 12)
        0.5

    """
    return SpectralField(f.grid, np.fft.fft2(f.values, axes=(-2, -1), norm="forward"))


def inverse_transform(c: SpectralField) -> RealField:
    """Evaluate Fourier coefficients at the collocation points."""
    values = np.fft.ifft2(c.coeffs, axes=(-2, -1), norm="forward").real
    return RealField(c.grid, values)


def _resample(coeffs: np.ndarray, n_from: int, n_to: int) -> np.ndarray:
    n = min(n_from, n_to)
    k = np.arange(-(n // 2) + 1, n // 2)
    src = k % n_from
    dst = k % n_to
    out = np.zeros((*coeffs.shape[:-2], n_to, n_to), dtype=complex)
    out[..., dst[:, None], dst[None, :]] = coeffs[..., src[:, None], src[None, :]]
    return out


def restrict(c: SpectralField, grid: Grid) -> SpectralField:
    """Restrict coefficients to a coarser grid of the same period.

    Every mode strictly below the coarse Nyquist wavenumber is copied
    exactly; the rest are dropped.

    Args:
        c (SpectralField): coefficients on the fine grid.
        grid (Grid): coarse grid.

    Returns:
        SpectralField: coefficients on `grid`, same concrete type as `c`.

    """
    if grid.L != c.grid.L or grid.N > c.grid.N:
        raise ConfigError("restriction needs a coarser grid with the same period")
    return type(c)(grid, _resample(c.coeffs, c.grid.N, grid.N))


def prolong(c: SpectralField, grid: Grid) -> SpectralField:
    """Zero-pad coefficients onto a finer grid of the same period."""
    if grid.L != c.grid.L or grid.N < c.grid.N:
        raise ConfigError("prolongation needs a finer grid with the same period")
    return type(c)(grid, _resample(c.coeffs, c.grid.N, grid.N))


def _gradient_coeffs(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    """Coefficients of the gradient; the new derivative index is appended last among components."""
    return 1j * grid.derivative_wavenumbers * coeffs[..., None, :, :]


def gradient(u: SpectralField) -> RealField:
    """Spectral gradient evaluated at the collocation points.

    For a velocity the result is the tensor G[i, j] = d u_i / d x_j.

    Args:
        u (SpectralField): scalar or vector coefficients.

    Returns:
        RealField: vector (for a scalar) or tensor (for a vector) samples.

    """
    if len(u.components) > 1:
        raise ConfigError("gradient of a tensor field is not supported")
    return inverse_transform(SpectralField(u.grid, _gradient_coeffs(u.coeffs, u.grid)))


def divergence(c: SpectralField) -> SpectralField:
    """Spectral divergence over the last component index."""
    if not c.components:
        raise ConfigError("divergence needs a vector or tensor field")
    k = c.grid.derivative_wavenumbers
    return SpectralField(c.grid, np.sum(1j * k * c.coeffs, axis=-3))


def vorticity(u: SpectralVelocity) -> RealField:
    """Scalar vorticity d u_2/d x_1 - d u_1/d x_2."""
    k = u.grid.derivative_wavenumbers
    w = 1j * (k[0] * u.coeffs[1] - k[1] * u.coeffs[0])
    return inverse_transform(SpectralField(u.grid, w))


def leray_project(v: SpectralField) -> SpectralVelocity:
    """Project a vector field onto divergence-free, mean-zero fields.

    Applies u_k = (I - k k^T / |k|^2) v_k for k != 0 and sets u_0 = 0. The
    Nyquist lines are removed as well since they have no conjugate partner.

    Args:
        v (SpectralField): Hermitian-symmetric vector coefficients.

    Returns:
        SpectralVelocity: the projected field.

    """
    if v.components != (v.grid.d,):
        raise ConfigError("Leray projection needs a vector field")
    grid = v.grid
    k = grid.wavenumbers
    k2 = grid.k_squared.copy()
    k2[0, 0] = 1.0
    kv = np.sum(k * v.coeffs, axis=0)
    out = v.coeffs - k * (kv / k2)
    out[:, 0, 0] = 0.0
    out[:, grid.nyquist_mask] = 0.0
    return SpectralVelocity(grid, out)


def l2_inner(a: RealField | SpectralField, b: RealField | SpectralField) -> float:
    """L^2 inner product of two fields with the same component shape.

    Physical-space fields use the rectangle rule (L/N)^2 sum_j a(x_j) . b(x_j);
    spectral fields use the Parseval sum L^2 sum_k Re(conj(a_k) . b_k). The two
    agree to rounding for the same field.

    Args:
        a (RealField | SpectralField): first field.
        b (RealField | SpectralField): second field, same representation.

    Returns:
        float: the inner product.

    """
    _check_same_grid(a.grid, b.grid)
    if a.components != b.components:
        raise ConfigError(f"component mismatch: {a.components} vs {b.components}")
    grid = a.grid
    if isinstance(a, RealField) and isinstance(b, RealField):
        return float(np.sum(a.values * b.values) * grid.dx**grid.d)
    if isinstance(a, SpectralField) and isinstance(b, SpectralField):
        return float(np.sum((a.coeffs.conj() * b.coeffs).real) * grid.L**grid.d)
    raise ConfigError("inner product needs both fields in the same representation")


def _magnitude(values: np.ndarray) -> np.ndarray:
    """Pointwise Euclidean/Frobenius magnitude across the component axes."""
    if values.ndim == 2:
        return np.abs(values)
    axes = tuple(range(values.ndim - 2))
    return np.sqrt(np.sum(values**2, axis=axes))


def lp_norm(a: RealField, p: int) -> float:
    """L^p norm by the rectangle rule with the pointwise Frobenius magnitude.

    Args:
        a (RealField): scalar, vector or tensor samples.
        p (int): 2 or 3.

    Returns:
        float: ((L/N)^2 sum_j |a(x_j)|^p)^(1/p).

    """
    if p not in (2, 3):
        raise ConfigError(f"unsupported norm exponent p={p}; expected 2 or 3")
    grid = a.grid
    total = float(np.sum(_magnitude(a.values) ** p) * grid.dx**grid.d)
    return total ** (1.0 / p)


def sobolev_weight(grid: Grid, s: float, variant: NormVariant = "bessel") -> np.ndarray:
    """Per-mode weight w_k such that ||u||^2_{H^s} = L^2 sum_k w_k |u_k|^2.

    `bessel` is (1 + |k|^2)^s. `derivative-sum` is sum over multi-indices
    |alpha| <= s of k^(2 alpha), the spectral form of sum ||D^alpha u||^2.
    """
    order = SobolevOrder(float(s))
    if variant == "bessel":
        return (1.0 + grid.k_squared) ** order.s
    if variant == "derivative-sum":
        if not order.is_integer or order.s < 0:
            raise UsageError(
                f"derivative-sum norm needs an integer order s >= 0, got {order.s}"
            )
        k1sq, k2sq = grid.wavenumbers**2
        w = np.zeros(grid.shape)
        for a1, a2 in itertools.product(range(int(order.s) + 1), repeat=2):
            if a1 + a2 <= order.s:
                w += k1sq**a1 * k2sq**a2
        return w
    raise UsageError(f"unknown Sobolev norm variant: {variant}")


def sobolev_norm(
    u: SpectralField,
    s: float | SobolevOrder,
    variant: NormVariant = "bessel",
) -> float:
    """Sobolev norm ||u||_{H^s}, computed from the Fourier coefficients.

    Args:
        u (SpectralField): field coefficients.
        s (float | SobolevOrder): norm order in [-2, 4].
        variant (NormVariant, optional): "bessel" or "derivative-sum". Defaults to "bessel".

    Returns:
        float: the norm. Both variants reduce to the L^2 norm at s = 0.

    """
    order = s.s if isinstance(s, SobolevOrder) else s
    w = sobolev_weight(u.grid, order, variant)
    power = np.sum(np.abs(u.coeffs) ** 2, axis=tuple(range(u.coeffs.ndim - 2)))
    return math.sqrt(float(np.sum(w * power)) * u.grid.L**u.grid.d)


def sobolev_equivalence_bracket(grid: Grid, s: int) -> tuple[float, float]:
    """Constants c1, c2 with c1 ||u||_bessel <= ||u||_ds <= c2 ||u||_bessel on `grid`.

    Taken from the extreme ratios of the two weights over the lattice.
    """
    ratio = sobolev_weight(grid, s, "derivative-sum") / sobolev_weight(grid, s, "bessel")
    active = ~grid.nyquist_mask
    return math.sqrt(float(ratio[active].min())), math.sqrt(float(ratio[active].max()))


def h_minus_one_norm(f: SpectralField, homogeneous: bool = False) -> float:
    """Dual norm ||f||_{H^-1} of a mean-zero field.

    The default uses the Bessel weight (1 + |k|^2)^-1. With `homogeneous` the
    weight is |k|^-2, the dual of ||grad u||; it dominates the Bessel value.

    Args:
        f (SpectralField): mean-zero coefficients.
        homogeneous (bool, optional): use the |k|^-2 weight. Defaults to False.

    Returns:
        float: the norm.

    """
    c = f.coeffs
    scale = float(np.max(np.abs(c), initial=0.0))
    if scale == 0.0:
        return 0.0
    if np.max(np.abs(c[..., 0, 0])) > 1e-12 * scale:
        raise UsageError("H^-1 norm is undefined for fields with nonzero mean")
    grid = f.grid
    if homogeneous:
        k2 = grid.k_squared.copy()
        k2[0, 0] = 1.0
        w = 1.0 / k2
        w[0, 0] = 0.0
    else:
        w = 1.0 / (1.0 + grid.k_squared)
    power = np.sum(np.abs(c) ** 2, axis=tuple(range(c.ndim - 2)))
    return math.sqrt(float(np.sum(w * power)) * grid.L**grid.d)


def poincare_constant(grid: Grid) -> float:
    """Sharp Poincare constant C_P = L / (2 pi) for mean-zero periodic fields."""
    return 1.0 / grid.k_min
