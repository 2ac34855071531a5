"""The direction side of a star-shaped law.

Whatever the radial profile, the direction z' = x/|x| of a star-shaped
sample has density c0 g(z')^(-p) on the unit sphere, where
1/c0 = integral of g^(-p) over the sphere.  This module computes that
constant (deterministic angular quadrature in the plane, Monte Carlo with a
standard error in higher dimensions), evaluates the direction density and
the induced surface measure on the unit cross section, and draws exact
direction samples by rejection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import rng as _rng
from .errors import (
    BoundsUnavailableError,
    DimensionMismatchError,
    NotOnCrossSectionError,
    NotUnitVectorError,
    QuadratureFailureError,
)
from .gauge import Gauge, SphereBounds, sphere_surface, unit_angles

UNIT_ATOL = 1e-9
_CHUNK = 1 << 17


@dataclass(frozen=True)
class SphereIntegral:
    """Estimate of an integral over the unit sphere.

    ``stderr`` is zero for deterministic quadrature; for Monte Carlo it is
    the sample standard error of omega_p * h(U) with U uniform.
    """

    value: float
    stderr: float
    method: str
    n_evals: int


class C0Estimate(NamedTuple):
    c0: float
    stderr: float
    integral: SphereIntegral


class DirectionDraws(NamedTuple):
    points: np.ndarray
    acceptance_rate: float
    n_proposed: int


def _arcs_from_kinks(kinks: np.ndarray) -> list[tuple[float, float]]:
    """Split [0, 2pi) into smooth arcs at the given angles."""
    two_pi = 2.0 * np.pi
    if kinks.size == 0:
        return [(0.0, two_pi)]
    ks = np.unique(np.mod(kinks, two_pi))
    arcs = []
    for i in range(len(ks)):
        a = ks[i]
        b = ks[(i + 1) % len(ks)] + (two_pi if i == len(ks) - 1 else 0.0)
        if b - a > 1e-13:
            arcs.append((float(a), float(b)))
    return arcs


def integrate_circle(func, kinks: np.ndarray, n_panels: int) -> float:
    """Composite Simpson of ``func(theta)`` over [0, 2pi), kink-aligned.

    Panels are distributed over the smooth arcs in proportion to length, so
    the integrand is C^1 inside every Simpson cell and the rule keeps its
    full order even for polytope gauges.
    """
    arcs = _arcs_from_kinks(kinks)
    total_len = sum(b - a for a, b in arcs)
    acc = 0.0
    for a, b in arcs:
        k = max(8, int(round(n_panels * (b - a) / total_len)))
        k += k % 2
        theta = np.linspace(a, b, k + 1)
        h = (b - a) / k
        # Chunk the evaluation so huge panel counts stay memory-bounded.
        vals = np.empty(k + 1)
        for lo in range(0, k + 1, _CHUNK):
            hi = min(lo + _CHUNK, k + 1)
            vals[lo:hi] = func(theta[lo:hi])
        acc += h / 3.0 * (
            vals[0] + vals[-1] + 4.0 * vals[1:-1:2].sum() + 2.0 * vals[2:-2:2].sum()
        )
    return acc


def direction_integral(
    gauge: Gauge,
    n_panels: int = 1 << 20,
    n_mc: int = 1_000_000,
    seed: int = 0,
    shards: int | None = None,
) -> SphereIntegral:
    """Integral of g^(-p) over the unit sphere.

    p = 2 uses kink-aligned composite Simpson with ``n_panels`` panels
    (deterministic, stderr 0); p >= 3 uses ``n_mc`` uniform sphere points
    split over Philox streams, so the result is a deterministic function of
    (seed, shard count).
    """
    p = gauge.dim
    if p < 2:
        raise DimensionMismatchError("direction integrals need dim >= 2")
    if p == 2:
        val = integrate_circle(
            lambda t: gauge.values(unit_angles(t)) ** (-2.0),
            gauge.kink_angles(),
            n_panels,
        )
        if not np.isfinite(val) or val <= 0:
            raise QuadratureFailureError(f"sphere integral evaluated to {val}")
        return SphereIntegral(float(val), 0.0, "angular-quadrature", n_panels + 1)
    shards = _rng.shard_count() if shards is None else shards
    per = n_mc // shards
    count = 0
    acc = 0.0
    acc2 = 0.0
    for s in range(shards):
        gen = _rng.stream(seed, 1000 + s)
        m = per if s < shards - 1 else n_mc - per * (shards - 1)
        U = gen.normal(size=(m, p))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        h = gauge.values(U) ** (-float(p))
        acc += h.sum()
        acc2 += (h * h).sum()
        count += m
    mean = acc / count
    var = max(acc2 / count - mean * mean, 0.0) * count / (count - 1)
    omega = sphere_surface(p)
    return SphereIntegral(
        float(omega * mean),
        float(omega * np.sqrt(var / count)),
        "monte-carlo",
        count,
    )


def direction_constant(
    gauge: Gauge,
    n_panels: int = 1 << 20,
    n_mc: int = 1_000_000,
    seed: int = 0,
    shards: int | None = None,
) -> C0Estimate:
    """Normalizing constant c0 = 1 / integral of g^(-p) over the sphere."""
    integral = direction_integral(gauge, n_panels, n_mc, seed, shards)
    c0 = 1.0 / integral.value
    stderr = integral.stderr / integral.value ** 2
    return C0Estimate(float(c0), float(stderr), integral)


def _check_unit(z, dim: int) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape != (dim,):
        raise DimensionMismatchError(f"expected a unit vector of dimension {dim}")
    if abs(np.linalg.norm(z) - 1.0) > UNIT_ATOL:
        raise NotUnitVectorError(f"|z'| = {np.linalg.norm(z):.12g} is not 1")
    return z


def direction_density(gauge: Gauge, c0: float, zprime) -> float:
    """Density c0 g(z')^(-p) of the direction with respect to dz'."""
    z = _check_unit(zprime, gauge.dim)
    return float(c0 * gauge.value(z) ** (-float(gauge.dim)))


def direction_densities(gauge: Gauge, c0: float, Z) -> np.ndarray:
    """Vectorized :func:`direction_density` over rows of Z."""
    Z = np.asarray(Z, dtype=float)
    norms = np.linalg.norm(Z, axis=1)
    if np.max(np.abs(norms - 1.0)) > UNIT_ATOL:
        raise NotUnitVectorError("batch contains non-unit directions")
    return c0 * gauge.values(Z) ** (-float(gauge.dim))


def uniform_sphere(gen: np.random.Generator, n: int, p: int) -> np.ndarray:
    """n uniform points on the unit sphere via normalized Gaussians."""
    U = gen.normal(size=(n, p))
    return U / np.linalg.norm(U, axis=1, keepdims=True)


def direction_sample(
    gauge: Gauge,
    gen: np.random.Generator,
    n: int,
    strategy: str = "rejection",
    bounds: SphereBounds | None = None,
    max_rounds: int = 10_000,
) -> DirectionDraws:
    """n i.i.d. directions with density c0 g^(-p), plus the acceptance rate.

    ``rejection`` proposes uniformly on the sphere and accepts with
    probability (g_min/g(z'))^p.  ``body`` proposes uniformly in the ball
    circumscribing the unit star body {g <= 1} and keeps the direction of
    proposals that land inside the body; the radial integral over a ray is
    proportional to g^(-p), so accepted directions have exactly the target
    law.  Expected acceptance is g_min^p/(c0 omega_p) for both.
    """
    p = gauge.dim
    if bounds is None:
        bounds = gauge.sphere_bounds()
    if not np.isfinite(bounds.g_min) or bounds.g_min <= 0.0:
        raise BoundsUnavailableError("sampler needs a positive lower sphere bound")
    if strategy not in ("rejection", "body"):
        raise ValueError(f"unknown strategy '{strategy}'")

    out = np.empty((n, p))
    got = 0
    proposed = 0
    accepted = 0
    for _ in range(max_rounds):
        if got >= n:
            break
        m = max(1024, int(1.5 * (n - got)))
        if strategy == "rejection":
            Z = uniform_sphere(gen, m, p)
            accept_prob = (bounds.g_min / gauge.values(Z)) ** p
            keep = gen.random(m) < accept_prob
            pts = Z[keep]
        else:
            radius = (1.0 / bounds.g_min) * gen.random(m) ** (1.0 / p)
            X = radius[:, None] * uniform_sphere(gen, m, p)
            keep = gauge.values(X) <= 1.0
            pts = X[keep]
            pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        proposed += m
        accepted += len(pts)
        take = min(len(pts), n - got)
        out[got : got + take] = pts[:take]
        got += take
    if got < n:
        raise BoundsUnavailableError(
            f"acceptance rate too low: {got}/{n} after {proposed} proposals"
        )
    return DirectionDraws(out, accepted / proposed, proposed)


def cross_section_measure_density(gauge: Gauge, c0: float, z) -> float:
    """Density c0 <z, n_z> of the invariant part on the unit cross section.

    ``n_z`` is the outward unit normal (normalized gauge gradient); the
    inner product equals the distance from the origin to the tangent
    hyperplane at z (the support function there).
    """
    z = np.asarray(z, dtype=float)
    if z.shape != (gauge.dim,):
        raise DimensionMismatchError(f"expected a point of dimension {gauge.dim}")
    if abs(gauge.value(z) - 1.0) > UNIT_ATOL:
        raise NotOnCrossSectionError(f"g(z) = {gauge.value(z):.12g} is not 1")
    grad = gauge.gradient(z)
    return float(c0 * np.dot(z, grad) / np.linalg.norm(grad))


def cross_section_mass(gauge: Gauge, c0: float, n_panels: int = 1 << 14) -> float:
    """Total mass of c0 <z, n_z> dz over the unit cross section (p = 2).

    Parameterizes the cross section by angle, z(t) = u(t)/g(u(t)), and
    integrates the surface density times the curve speed |dz/dt| on
    kink-aligned arcs.  Equals 1 when the gradient geometry is consistent.
    """
    if gauge.dim != 2:
        raise DimensionMismatchError("cross-section mass check is planar only")

    delta = 1e-7

    def integrand(theta: np.ndarray) -> np.ndarray:
        u = unit_angles(theta)
        z = u / gauge.values(u)[:, None]
        u_plus = unit_angles(theta + delta)
        u_minus = unit_angles(theta - delta)
        z_plus = u_plus / gauge.values(u_plus)[:, None]
        z_minus = u_minus / gauge.values(u_minus)[:, None]
        speed = np.linalg.norm(z_plus - z_minus, axis=1) / (2.0 * delta)
        dens = np.array(
            [cross_section_measure_density(gauge, c0, zi) for zi in z]
        )
        return dens * speed

    # Pull panel boundaries slightly inside each arc so the finite
    # differences above never straddle a ridge; the lost slivers are added
    # back as endpoint rectangles (error O(inset^2)).
    kinks = gauge.kink_angles()
    arcs = _arcs_from_kinks(np.asarray(kinks, dtype=float))
    total = 0.0
    for a, b in arcs:
        k = max(8, int(round(n_panels * (b - a) / (2.0 * np.pi))))
        k += k % 2
        inset = 4.0 * delta
        theta = np.linspace(a + inset, b - inset, k + 1)
        h = theta[1] - theta[0]
        vals = integrand(theta)
        total += h / 3.0 * (
            vals[0] + vals[-1] + 4.0 * vals[1:-1:2].sum() + 2.0 * vals[2:-2:2].sum()
        )
        total += inset * (vals[0] + vals[-1])
    return float(total)


def angle_bin_probs(
    gauge: Gauge, c0: float, edges: np.ndarray, panels_per_bin: int = 512
) -> np.ndarray:
    """Probability of each angular bin under the direction law (p = 2)."""
    if gauge.dim != 2:
        raise DimensionMismatchError("angle bins are planar only")
    kinks = gauge.kink_angles()
    probs = np.empty(len(edges) - 1)
    for i in range(len(edges) - 1):
        a, b = float(edges[i]), float(edges[i + 1])
        inner = kinks[(kinks > a) & (kinks < b)] if kinks.size else np.empty(0)
        cuts = np.concatenate([[a], np.sort(inner), [b]])
        acc = 0.0
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            k = max(8, panels_per_bin)
            k += k % 2
            theta = np.linspace(lo, hi, k + 1)
            vals = c0 * gauge.values(unit_angles(theta)) ** -2.0
            h = (hi - lo) / k
            acc += h / 3.0 * (
                vals[0] + vals[-1] + 4.0 * vals[1:-1:2].sum() + 2.0 * vals[2:-2:2].sum()
            )
        probs[i] = acc
    return probs
