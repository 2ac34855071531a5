"""Gauge (length) functions on R^p minus the origin.

A gauge is a positive, positively homogeneous degree-1 function g; its unit
level set {g = 1} is a cross section meeting every ray from the origin
exactly once.  Scaling a point moves it along its ray, g moves with it
(g(cx) = c g(x)), and x/g(x) is the scale-invariant part.  The gauges here
come in six flavors:

* ``EllipticalGauge``   g(x) = sqrt(x' Sigma^-1 x), ellipsoidal contours
* ``SupNormGauge``      g(x) = max_i |x_i|, hypercube contours
* ``L1NormGauge``       g(x) = sum_i |x_i|, crosspolytope contours
* ``PolytopeGauge``     g(x) = max_j <a_j, x>, general polytope contours
* ``TabulatedRadialGauge``  p=2 only, boundary radius tabulated in angle
* ``DirectionDerivedGauge`` built from a target direction density, see
  :func:`gauge_from_direction_density`

All evaluation paths accept single points (shape ``(p,)``) via ``value`` /
``gradient`` and batches (shape ``(n, p)``) via ``values``.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import rng as _rng
from .errors import (
    DimensionMismatchError,
    NonPositiveError,
    NonSmoothPointError,
    NotADensityError,
    ZeroVectorError,
)

# Points with Euclidean norm below this are treated as the origin.  The
# threshold is a denormal guard, not an exact-zero test.
ZERO_NORM_EPS = 1e-300

# Relative gap below which two competing facets count as tied.
RIDGE_TIE_RTOL = 1e-9

# Step factor for central finite differences on tabulated/derived gauges.
FD_STEP = 1e-6


@dataclass(frozen=True)
class SphereBounds:
    """Bounds on a gauge over the unit sphere, g_min <= g(u) <= g_max.

    ``g_min`` is conservative (never above the true infimum) because the
    rejection sampler's correctness depends on it; ``g_max`` errs high.
    """

    g_min: float
    g_max: float

    def __post_init__(self):
        if not (0.0 < self.g_min <= self.g_max < np.inf):
            raise NonPositiveError(
                f"invalid sphere bounds ({self.g_min}, {self.g_max})"
            )


def _as_point(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (dim,):
        raise DimensionMismatchError(
            f"expected a point of dimension {dim}, got shape {x.shape}"
        )
    if np.linalg.norm(x) < ZERO_NORM_EPS:
        raise ZeroVectorError("gauge functions are undefined at the origin")
    return x


def _as_batch(X, dim: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != dim:
        raise DimensionMismatchError(
            f"expected points of shape (n, {dim}), got {X.shape}"
        )
    if X.shape[0] and np.min(np.linalg.norm(X, axis=1)) < ZERO_NORM_EPS:
        raise ZeroVectorError("batch contains the origin")
    return X


def unit_angles(theta) -> np.ndarray:
    """Unit vectors (cos t, sin t) for an array of angles, shape (n, 2)."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    return np.column_stack([np.cos(theta), np.sin(theta)])


class Gauge(ABC):
    """Positively homogeneous degree-1 positive function on R^p - {0}."""

    #: short lowercase tag used in the JSON schema
    variant: str

    def __init__(self, dim: int):
        if dim < 1:
            raise DimensionMismatchError("gauge dimension must be >= 1")
        self.dim = int(dim)

    # -- evaluation -------------------------------------------------------

    @abstractmethod
    def values(self, X) -> np.ndarray:
        """Gauge values for a batch of points, shape (n, p) -> (n,)."""

    def value(self, x) -> float:
        """Gauge value at a single point."""
        x = _as_point(x, self.dim)
        return float(self.values(x[None, :])[0])

    __call__ = value

    # -- geometry ---------------------------------------------------------

    def gradient(self, x, strict: bool = False) -> np.ndarray:
        """Gradient of g at x.

        With ``strict=True``, evaluation at a facet ridge (two competing
        facets within a relative gap of 1e-9) raises
        :class:`NonSmoothPointError`; otherwise the lowest-index active
        facet wins.  Ridges are null sets for every continuous
        distribution involved, so the tie-break is statistically inert.
        """
        x = _as_point(x, self.dim)
        return self._gradient(x, strict)

    @abstractmethod
    def _gradient(self, x: np.ndarray, strict: bool) -> np.ndarray:
        ...

    def cross_section_point(self, x) -> np.ndarray:
        """Projection z = x / g(x) onto the unit cross section {g = 1}."""
        x = _as_point(x, self.dim)
        return x / float(self.values(x[None, :])[0])

    def sphere_bounds(self) -> SphereBounds:
        """Conservative bounds on g over the unit sphere."""
        return self._numeric_sphere_bounds()

    def kink_angles(self) -> np.ndarray:
        """Angles (p=2 only) where g restricted to the circle is not C^1.

        Quadrature on the circle aligns panel boundaries to these angles.
        Smooth gauges return an empty array.
        """
        return np.empty(0)

    # -- helpers ----------------------------------------------------------

    def _numeric_sphere_bounds(self) -> SphereBounds:
        if self.dim == 2:
            theta = np.linspace(0.0, 2.0 * np.pi, 8193)
            vals = self.values(unit_angles(theta))
            lo, hi = float(vals.min()), float(vals.max())
            slack = float(np.max(np.abs(np.diff(vals))))
            g_min = max(lo - 10.0 * slack, 0.5 * lo)
            g_max = hi + 10.0 * slack
        else:
            gen = _rng.stream(0, 901)
            U = gen.normal(size=(200_000, self.dim))
            U /= np.linalg.norm(U, axis=1, keepdims=True)
            vals = self.values(U)
            lo, hi = float(vals.min()), float(vals.max())
            pad = 0.1 * (hi - lo)
            g_min = max(lo - pad, 0.5 * lo)
            g_max = hi + pad
        if lo <= 0.0:
            raise NonPositiveError("gauge is not positive on the unit sphere")
        return SphereBounds(g_min, g_max)

    def _fd_gradient(self, x: np.ndarray) -> np.ndarray:
        h = FD_STEP * max(1.0, float(np.linalg.norm(x)))
        probes = np.repeat(x[None, :], 2 * self.dim, axis=0)
        for i in range(self.dim):
            probes[2 * i, i] += h
            probes[2 * i + 1, i] -= h
        vals = self.values(probes)
        return (vals[0::2] - vals[1::2]) / (2.0 * h)

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        """JSON-ready descriptor {"dim":..., "variant":..., "params":...}."""
        return {"dim": self.dim, "variant": self.variant, "params": self._params()}

    @abstractmethod
    def _params(self) -> dict:
        ...


class EllipticalGauge(Gauge):
    """g(x) = sqrt(x' Sigma^-1 x) for a symmetric positive-definite Sigma."""

    variant = "elliptical"

    def __init__(self, sigma):
        sigma = np.asarray(sigma, dtype=float)
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
            raise DimensionMismatchError("sigma must be a square matrix")
        super().__init__(sigma.shape[0])
        if np.max(np.abs(sigma - sigma.T)) > 1e-12 * max(1.0, np.max(np.abs(sigma))):
            raise NonPositiveError("sigma must be symmetric")
        eigvals = np.linalg.eigvalsh(sigma)
        if eigvals[0] <= 0.0:
            raise NonPositiveError("sigma must be positive definite")
        self.sigma = 0.5 * (sigma + sigma.T)
        self.sigma_inv = np.linalg.inv(self.sigma)
        self._eigvals = eigvals

    def values(self, X) -> np.ndarray:
        X = _as_batch(X, self.dim)
        return np.sqrt(np.einsum("ij,jk,ik->i", X, self.sigma_inv, X))

    def _gradient(self, x, strict):
        return (self.sigma_inv @ x) / self.value(x)

    def sphere_bounds(self) -> SphereBounds:
        return SphereBounds(
            float(self._eigvals[-1] ** -0.5), float(self._eigvals[0] ** -0.5)
        )

    def _params(self):
        return {"sigma": self.sigma.tolist()}


class SupNormGauge(Gauge):
    """g(x) = max_i |x_i|; unit cross section is the hypercube boundary."""

    variant = "sup"

    def values(self, X) -> np.ndarray:
        X = _as_batch(X, self.dim)
        return np.max(np.abs(X), axis=1)

    def _gradient(self, x, strict):
        a = np.abs(x)
        j = int(np.argmax(a))
        if strict:
            rest = np.delete(a, j)
            if rest.size and a[j] - rest.max() <= RIDGE_TIE_RTOL * a[j]:
                raise NonSmoothPointError("point lies on a hypercube ridge")
        grad = np.zeros(self.dim)
        grad[j] = 1.0 if x[j] >= 0 else -1.0
        return grad

    def sphere_bounds(self) -> SphereBounds:
        return SphereBounds(self.dim ** -0.5, 1.0)

    def kink_angles(self) -> np.ndarray:
        if self.dim != 2:
            return np.empty(0)
        return np.pi / 4.0 + np.arange(4) * np.pi / 2.0

    def _params(self):
        return {}


class L1NormGauge(Gauge):
    """g(x) = sum_i |x_i|; unit cross section is the crosspolytope boundary."""

    variant = "l1"

    def values(self, X) -> np.ndarray:
        X = _as_batch(X, self.dim)
        return np.sum(np.abs(X), axis=1)

    def _gradient(self, x, strict):
        if strict:
            a = np.abs(x)
            if a.min() <= RIDGE_TIE_RTOL * a.max():
                raise NonSmoothPointError("point lies on a crosspolytope ridge")
        return np.where(x >= 0, 1.0, -1.0)

    def sphere_bounds(self) -> SphereBounds:
        return SphereBounds(1.0, self.dim ** 0.5)

    def kink_angles(self) -> np.ndarray:
        if self.dim != 2:
            return np.empty(0)
        return np.arange(4) * np.pi / 2.0

    def _params(self):
        return {}


class PolytopeGauge(Gauge):
    """g(x) = max_j <a_j, x> for outward facet functionals a_j.

    The polytope {g <= 1} must contain the origin strictly inside, i.e.
    max_j <a_j, u> > 0 for every direction u; this is checked numerically
    at construction.
    """

    variant = "polytope"

    def __init__(self, facets):
        A = np.asarray(facets, dtype=float)
        if A.ndim != 2 or A.shape[0] < 2:
            raise DimensionMismatchError("facets must be an (m, p) array, m >= 2")
        super().__init__(A.shape[1])
        self.facets = A
        bounds = self._numeric_sphere_bounds()  # raises if g <= 0 somewhere
        self._bounds = bounds

    def values(self, X) -> np.ndarray:
        X = _as_batch(X, self.dim)
        return np.max(X @ self.facets.T, axis=1)

    def _gradient(self, x, strict):
        vals = self.facets @ x
        j = int(np.argmax(vals))
        if strict:
            rest = np.delete(vals, j)
            if rest.size and vals[j] - rest.max() <= RIDGE_TIE_RTOL * max(
                1.0, abs(vals[j])
            ):
                raise NonSmoothPointError("point lies on a polytope ridge")
        return self.facets[j].copy()

    def sphere_bounds(self) -> SphereBounds:
        return self._bounds

    def kink_angles(self) -> np.ndarray:
        if self.dim != 2:
            return np.empty(0)
        # Scan for active-facet switches, then bisect each switch angle.
        theta = np.linspace(0.0, 2.0 * np.pi, 16385)
        active = np.argmax(unit_angles(theta) @ self.facets.T, axis=1)
        switches = np.nonzero(np.diff(active) != 0)[0]
        angles = []
        for k in switches:
            lo, hi = theta[k], theta[k + 1]
            a_lo = active[k]
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if np.argmax(self.facets @ unit_angles(mid)[0]) == a_lo:
                    lo = mid
                else:
                    hi = mid
            angles.append(0.5 * (lo + hi))
        return np.unique(np.mod(angles, 2.0 * np.pi))

    def _params(self):
        return {"facets": self.facets.tolist()}


class TabulatedRadialGauge(Gauge):
    """Planar gauge given by tabulated boundary radii r_k at angles t_k.

    The cross section point at angle t is r(t)(cos t, sin t) with r linear
    in angle between the tabulated nodes (periodic), so g(x) = |x| / r(t).
    Restricted to p = 2; general-p tabulation would need a sphere mesh.
    Piecewise-C^1 smoothness between nodes is assumed, not verified.
    """

    variant = "tabulated"

    def __init__(self, angles, radii):
        super().__init__(2)
        angles = np.asarray(angles, dtype=float)
        radii = np.asarray(radii, dtype=float)
        if angles.ndim != 1 or angles.shape != radii.shape or angles.size < 3:
            raise DimensionMismatchError("angles and radii must be equal-length 1-D")
        if np.any(np.diff(angles) <= 0) or angles[0] < 0 or angles[-1] >= 2 * np.pi:
            raise NonPositiveError("angles must be strictly increasing in [0, 2pi)")
        if np.any(radii <= 0):
            raise NonPositiveError("tabulated radii must be positive")
        self.angles = angles
        self.radii = radii
        self._ang_ext = np.concatenate([angles, [angles[0] + 2.0 * np.pi]])
        self._rad_ext = np.concatenate([radii, [radii[0]]])

    def _radius(self, theta: np.ndarray) -> np.ndarray:
        # Wrap into [angles[0], angles[0] + 2pi) before interpolating.
        t = np.mod(theta - self.angles[0], 2.0 * np.pi) + self.angles[0]
        return np.interp(t, self._ang_ext, self._rad_ext)

    def values(self, X) -> np.ndarray:
        X = _as_batch(X, self.dim)
        theta = np.arctan2(X[:, 1], X[:, 0])
        return np.linalg.norm(X, axis=1) / self._radius(theta)

    def _gradient(self, x, strict):
        return self._fd_gradient(x)

    def sphere_bounds(self) -> SphereBounds:
        # Piecewise-linear r attains its extremes at the nodes.
        return SphereBounds(float(1.0 / self.radii.max()), float(1.0 / self.radii.min()))

    def kink_angles(self) -> np.ndarray:
        return np.mod(self.angles, 2.0 * np.pi)

    def _params(self):
        return {"angles": self.angles.tolist(), "radii": self.radii.tolist()}


class DirectionDerivedGauge(Gauge):
    """Gauge realizing a prescribed direction density.

    For a density f on the unit sphere, g(x) = |x| f(x/|x|)^(-1/p) makes the
    direction of a star-shaped sample with this gauge distributed exactly as
    f, whatever the radial profile.  Build through
    :func:`gauge_from_direction_density`, which checks f.
    """

    variant = "direction-derived"

    def __init__(self, density: Callable[[np.ndarray], np.ndarray], dim: int):
        super().__init__(dim)
        self.density = density

    def values(self, X) -> np.ndarray:
        X = _as_batch(X, self.dim)
        norms = np.linalg.norm(X, axis=1)
        f = np.asarray(self.density(X / norms[:, None]), dtype=float)
        return norms * f ** (-1.0 / self.dim)

    def _gradient(self, x, strict):
        return self._fd_gradient(x)

    def _params(self):
        raise NotADensityError(
            "direction-derived gauges hold a function handle and do not serialize"
        )


def gauge_from_direction_density(
    density: Callable[[np.ndarray], np.ndarray],
    dim: int,
    norm_rtol: float = 0.01,
) -> DirectionDerivedGauge:
    """Build the gauge whose induced direction law equals ``density``.

    ``density`` maps a batch of unit vectors, shape (n, p), to values (n,)
    and must be positive and integrate to 1 against the sphere volume
    element.  Normalization is verified (p=2 by angular quadrature, p>=3 by
    Monte Carlo) to ``norm_rtol``, not enforced.
    """
    if dim < 2:
        raise DimensionMismatchError("direction densities need dim >= 2")
    if dim == 2:
        theta = np.linspace(0.0, 2.0 * np.pi, 16385)
        vals = np.asarray(density(unit_angles(theta)), dtype=float)
        if np.min(vals) <= 0.0:
            raise NonPositiveError("direction density must be positive")
        total = _simpson_closed(vals, theta[1] - theta[0])
    else:
        gen = _rng.stream(0, 902)
        U = gen.normal(size=(200_000, dim))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        vals = np.asarray(density(U), dtype=float)
        if np.min(vals) <= 0.0:
            raise NonPositiveError("direction density must be positive")
        total = sphere_surface(dim) * float(np.mean(vals))
    if abs(total - 1.0) > norm_rtol:
        raise NotADensityError(
            f"direction density integrates to {total:.6g}, not 1 within {norm_rtol:.0%}"
        )
    return DirectionDerivedGauge(density, dim)


def sphere_surface(p: int) -> float:
    """Surface measure of the unit sphere in R^p, 2 pi^(p/2) / Gamma(p/2)."""
    from scipy.special import gamma

    return float(2.0 * np.pi ** (p / 2.0) / gamma(p / 2.0))


def _simpson_closed(vals: np.ndarray, h: float) -> float:
    """Composite Simpson for an odd number of equally spaced samples."""
    if vals.size % 2 == 0:
        raise ValueError("Simpson needs an odd sample count")
    return float(h / 3.0 * (vals[0] + vals[-1] + 4 * vals[1:-1:2].sum() + 2 * vals[2:-2:2].sum()))


# -- JSON (de)serialization ------------------------------------------------

_VARIANTS = {"elliptical", "sup", "l1", "polytope", "tabulated"}


def gauge_from_dict(obj: dict) -> Gauge:
    """Rebuild a gauge from its JSON descriptor, rejecting unknown fields."""
    from .errors import ConfigError

    if not isinstance(obj, dict):
        raise ConfigError("gauge: expected a JSON object")
    unknown = set(obj) - {"dim", "variant", "params"}
    if unknown:
        raise ConfigError(f"gauge: unknown field '{sorted(unknown)[0]}'")
    for field in ("dim", "variant"):
        if field not in obj:
            raise ConfigError(f"gauge: missing field '{field}'")
    dim = obj["dim"]
    variant = obj["variant"]
    params = obj.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("gauge.params: expected a JSON object")
    if variant not in _VARIANTS:
        raise ConfigError(f"gauge.variant: unknown variant '{variant}'")

    def need(keys: Sequence[str]):
        unknown = set(params) - set(keys)
        if unknown:
            raise ConfigError(f"gauge.params: unknown field '{sorted(unknown)[0]}'")
        for k in keys:
            if k not in params:
                raise ConfigError(f"gauge.params: missing field '{k}'")

    try:
        if variant == "elliptical":
            need(["sigma"])
            g = EllipticalGauge(params["sigma"])
        elif variant == "sup":
            need([])
            g = SupNormGauge(dim)
        elif variant == "l1":
            need([])
            g = L1NormGauge(dim)
        elif variant == "polytope":
            need(["facets"])
            g = PolytopeGauge(params["facets"])
        else:
            need(["angles", "radii"])
            g = TabulatedRadialGauge(params["angles"], params["radii"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"gauge.params: {exc}") from exc
    if g.dim != dim:
        raise ConfigError(
            f"gauge.dim: declared {dim} but params imply {g.dim}"
        )
    return g
