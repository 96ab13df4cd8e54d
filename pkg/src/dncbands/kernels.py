"""Matern kernels, Gram matrices, and a truncated spectral model.

Only the half-integer Matern family is supported; for nu in
{1/2, 3/2, 5/2, 7/2} the kernel has a closed form

    k(r) = s * p(u) * exp(-u),    u = sqrt(2 nu) r / l,

with p a polynomial of degree nu - 1/2, so no Bessel-function
evaluation is ever needed.  The spectral model pins eigenvalues to
mu_j = j^(-b) exactly, which makes every diagnostic reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HALF_INTEGER_NUS = (0.5, 1.5, 2.5, 3.5)


@dataclass(frozen=True)
class KernelSpec:
    """Positive-definite Matern kernel: family, smoothness, scales."""

    family: str = "matern"
    nu: float = 3.5
    lengthscale: float = 1.0
    output_scale: float = 1.0

    def __post_init__(self):
        if self.family != "matern":
            raise ValueError(f"unsupported kernel family {self.family!r}")
        if self.nu not in HALF_INTEGER_NUS:
            raise ValueError(
                f"nu must be one of {HALF_INTEGER_NUS} (closed-form half-integer "
                f"Matern only), got {self.nu}"
            )
        if not (self.lengthscale > 0):
            raise ValueError(f"lengthscale must be positive, got {self.lengthscale}")
        if not (self.output_scale > 0):
            raise ValueError(f"output_scale must be positive, got {self.output_scale}")


def _as_points(x) -> np.ndarray:
    """Coerce scalars / 1d / 2d input to an (n, d) float array."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(-1, 1)
    elif a.ndim != 2:
        raise ValueError(f"points must be at most 2-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite covariate values")
    return a


def matern_profile(spec: KernelSpec, r: np.ndarray) -> np.ndarray:
    """Kernel value as a function of the Euclidean distance r >= 0."""
    u = np.sqrt(2.0 * spec.nu) * np.asarray(r, dtype=np.float64) / spec.lengthscale
    if spec.nu == 0.5:
        poly = 1.0
    elif spec.nu == 1.5:
        poly = 1.0 + u
    elif spec.nu == 2.5:
        poly = 1.0 + u + u * u / 3.0
    else:  # nu == 3.5
        poly = 1.0 + u + 0.4 * u * u + u * u * u / 15.0
    return spec.output_scale * poly * np.exp(-u)


def _as_single_point(x) -> np.ndarray:
    """Coerce a scalar or d-vector to a (1, d) point."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim > 2 or (a.ndim == 2 and a.shape[0] != 1):
        raise ValueError(f"expected a single point, got shape {a.shape}")
    a = a.reshape(1, -1)
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite covariate values")
    return a


def eval_kernel(spec: KernelSpec, x, xp) -> float:
    """Evaluate k(x, x') for two points of the covariate space."""
    a = _as_single_point(x)
    b = _as_single_point(xp)
    if a.shape != b.shape:
        raise ValueError("eval_kernel expects two points of equal dimension")
    r = float(np.linalg.norm(a - b))
    return float(matern_profile(spec, r))


def cross_matrix(spec: KernelSpec, points_a, points_b) -> np.ndarray:
    """Rectangular kernel matrix k(a_i, b_j) for two point sets."""
    a = _as_points(points_a)
    b = _as_points(points_b)
    if a.shape[1] != b.shape[1]:
        raise ValueError("point sets live in different dimensions")
    diff = a[:, None, :] - b[None, :, :]
    r = np.sqrt(np.sum(diff * diff, axis=-1))
    return matern_profile(spec, r)


def gram_matrix(spec: KernelSpec, points) -> np.ndarray:
    """Symmetric Gram matrix of a point set; diagonal equals output_scale."""
    a = _as_points(points)
    k = cross_matrix(spec, a, a)
    # distances computed once, so k is symmetric up to rounding; make it exact
    k = 0.5 * (k + k.T)
    np.fill_diagonal(k, spec.output_scale)
    return k


@dataclass(frozen=True)
class SpectralModel:
    """Truncated eigenvalue model of the kernel operator, mu_j = j^(-b)."""

    decay_exponent: float
    truncation: int
    eigenvalues: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not (self.decay_exponent > 1):
            raise ValueError(f"decay exponent must exceed 1, got {self.decay_exponent}")
        if self.truncation < 1:
            raise ValueError("truncation must be a positive integer")
        mu = np.asarray(self.eigenvalues, dtype=np.float64)
        if mu.shape != (self.truncation,):
            raise ValueError("eigenvalue array does not match the truncation")
        if not np.all(mu > 0):
            raise ValueError("eigenvalues must be positive")
        if self.truncation > 1 and not np.all(np.diff(mu) < 0):
            raise ValueError("eigenvalues must be strictly decreasing")
        object.__setattr__(self, "eigenvalues", mu)

    @classmethod
    def polynomial(cls, decay_exponent: float, truncation: int) -> "SpectralModel":
        j = np.arange(1, truncation + 1, dtype=np.float64)
        return cls(decay_exponent, truncation, j ** (-decay_exponent))

    @classmethod
    def from_matern(cls, spec: KernelSpec, dim: int, truncation: int) -> "SpectralModel":
        # polynomial decay exponent of a Matern kernel in dimension dim
        return cls.polynomial(2.0 * spec.nu + dim, truncation)


def effective_dimension(model: SpectralModel, rho: float) -> float:
    """Ridge-regularized degrees of freedom: sum_j mu_j / (mu_j + rho).

    The sum runs over the model's truncation only; use
    ``effective_dimension_tail`` to check the neglected tail term.
    """
    if not (rho > 0):
        raise ValueError(f"rho must be positive, got {rho}")
    mu = model.eigenvalues
    return float(np.sum(mu / (mu + rho)))


def effective_dimension_tail(model: SpectralModel, rho: float) -> float:
    """Last retained term mu_J / (mu_J + rho); callers keep this < 1e-8."""
    if not (rho > 0):
        raise ValueError(f"rho must be positive, got {rho}")
    mu_last = float(model.eigenvalues[-1])
    return mu_last / (mu_last + rho)
