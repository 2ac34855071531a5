"""Triangular- and general-linear-group models for positive-definite pairs.

A pair (W1, W2) of p x p positive-definite matrices decomposes under
congruence actions in two classic ways:

* lower-triangular group: with T the Cholesky factor of W1 + W2 and
  U = T^-1 W1 T^-t, the pair is (T U T^t, T (I-U) T^t); the action is free
  and under two independent Wisharts U has the matrix beta law.
* general linear group: with the congruence eigenvalues l_1 > ... > l_p of
  W1 relative to W1 + W2 and B the congruence factor,
  the pair is (B L B^t, B (I-L) B^t); the action is not free — the common
  isotropy of the diagonal cross section is the sign group diag(+-1) — and
  B is fixed by the convention that the first nonzero entry of each column
  is positive.

Densities of both invariant parts follow the weighted dominating measure
(det W1)^(a-(p+1)/2) (det W2)^(b-(p+1)/2) dW1 dW2 and carry an optional
cross-section twist (a triangular map S(U), or a normalizer map P(L) of
permutation x diagonal type).

The companion matrix-F decomposition (triangularizing W2 alone instead of
W1 + W2) follows from the same operations with W1 + W2 replaced by W2; it
is not provided separately.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, linalg
from scipy.special import gammaln

from .errors import (
    BadDegreesOfFreedomError,
    DegenerateRootsError,
    DimensionMismatchError,
    NotOrderedError,
    NotPositiveDefiniteError,
    NotTriangularError,
    OutOfRangeError,
)

DEFAULT_GAP_TOL = 1e-10
_SYM_ATOL = 1e-12


def _as_square(W, name: str = "matrix") -> np.ndarray:
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got shape {W.shape}")
    return W


def _check_symmetric(W: np.ndarray, name: str) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(W))))
    if np.max(np.abs(W - W.T)) > _SYM_ATOL * scale:
        raise NotPositiveDefiniteError(f"{name} is not symmetric")
    return 0.5 * (W + W.T)


def cholesky_factor(W) -> np.ndarray:
    """Lower-triangular T with positive diagonal and T T^t = W."""
    W = _check_symmetric(_as_square(W), "matrix")
    try:
        return np.linalg.cholesky(W)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("matrix is not positive definite") from exc


def validate_pd_pair(W1, W2, gap_tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Check symmetry and positive-definiteness of a pair.

    With ``gap_tol`` set, also require the congruence roots of
    det(W1 - l (W1+W2)) = 0 to be separated by more than the tolerance,
    the precondition of the general-linear decomposition.
    """
    W1 = _check_symmetric(_as_square(W1, "W1"), "W1")
    W2 = _check_symmetric(_as_square(W2, "W2"), "W2")
    if W1.shape != W2.shape:
        raise DimensionMismatchError("W1 and W2 must have the same shape")
    cholesky_factor(W1)
    cholesky_factor(W2)
    if gap_tol is not None:
        roots = congruence_roots(W1, W2)
        if roots.size > 1 and np.min(-np.diff(roots)) <= gap_tol:
            raise DegenerateRootsError(
                f"congruence roots {roots} are not separated beyond {gap_tol:g}"
            )
    return W1, W2


def congruence_roots(W1: np.ndarray, W2: np.ndarray) -> np.ndarray:
    """Roots of det(W1 - l (W1+W2)) = 0 in decreasing order."""
    T = cholesky_factor(W1 + W2)
    Ti = linalg.solve_triangular(T, np.eye(T.shape[0]), lower=True)
    M = Ti @ W1 @ Ti.T
    return np.sort(np.linalg.eigvalsh(0.5 * (M + M.T)))[::-1]


def wishart_sample(
    p: int, dof: float, gen: np.random.Generator, n: int | None = None
) -> np.ndarray:
    """Wishart(identity scale) draws by the triangular construction.

    The factor A is lower triangular with a_ii^2 ~ chi-square(dof - i + 1)
    and standard normal entries below the diagonal; W = A A^t.  Requires
    dof > p - 1 (non-integer degrees of freedom are fine).
    """
    if dof <= p - 1:
        raise BadDegreesOfFreedomError(f"need dof > p - 1 = {p - 1}, got {dof}")
    m = 1 if n is None else n
    A = np.zeros((m, p, p))
    rows, cols = np.tril_indices(p, k=-1)
    if rows.size:
        A[:, rows, cols] = gen.normal(size=(m, rows.size))
    for i in range(p):
        A[:, i, i] = np.sqrt(gen.chisquare(dof - i, size=m))
    W = A @ np.transpose(A, (0, 2, 1))
    return W[0] if n is None else W


@dataclass(frozen=True)
class LTDecomposition:
    """Triangular-group split of a pair: W1 = T U T^t, W2 = T (I-U) T^t.

    ``G`` is the equivariant part T S(U)^-1 for the cross-section map S
    (identity when no map is given, so G = T).  Residuals are relative
    Frobenius reconstruction errors.
    """

    T: np.ndarray
    U: np.ndarray
    G: np.ndarray
    resid_w1: float
    resid_w2: float


def lt_orbital_decompose(
    W1, W2, s_handle: Callable[[np.ndarray], np.ndarray] | None = None
) -> LTDecomposition:
    """Decompose a positive-definite pair under the triangular action."""
    W1, W2 = validate_pd_pair(W1, W2)
    p = W1.shape[0]
    T = cholesky_factor(W1 + W2)
    Ti = linalg.solve_triangular(T, np.eye(p), lower=True)
    U = Ti @ W1 @ Ti.T
    U = 0.5 * (U + U.T)
    eig = np.linalg.eigvalsh(U)
    if eig[0] <= 0.0 or eig[-1] >= 1.0:
        raise NotPositiveDefiniteError(
            f"invariant part has eigenvalues {eig} outside (0, 1)"
        )
    if s_handle is None:
        G = T
    else:
        S = _check_lower_triangular(np.asarray(s_handle(U), dtype=float))
        G = T @ linalg.solve_triangular(S, np.eye(p), lower=True)
    R1 = T @ U @ T.T
    R2 = T @ (np.eye(p) - U) @ T.T
    return LTDecomposition(
        T,
        U,
        G,
        float(np.linalg.norm(R1 - W1) / np.linalg.norm(W1)),
        float(np.linalg.norm(R2 - W2) / np.linalg.norm(W2)),
    )


def _check_lower_triangular(G: np.ndarray) -> np.ndarray:
    G = _as_square(G)
    scale = max(1.0, float(np.max(np.abs(G))))
    if np.max(np.abs(np.triu(G, k=1))) > 1e-12 * scale:
        raise NotTriangularError("matrix has entries above the diagonal")
    if np.any(np.diag(G) <= 0.0):
        raise NotTriangularError("triangular factor needs a positive diagonal")
    return G


def multivariate_beta(p: int, a: float, b: float) -> float:
    """B_p(a, b) = Gamma_p(a) Gamma_p(b) / Gamma_p(a + b)."""

    def log_gamma_p(x: float) -> float:
        return p * (p - 1) / 4.0 * np.log(np.pi) + sum(
            gammaln(x - 0.5 * i) for i in range(p)
        )

    return float(np.exp(log_gamma_p(a) + log_gamma_p(b) - log_gamma_p(a + b)))


def _beta_core(U: np.ndarray, a: float, b: float) -> float:
    p = U.shape[0]
    dU = np.linalg.det(U)
    dI = np.linalg.det(np.eye(p) - U)
    return float(dU ** (a - (p + 1) / 2.0) * dI ** (b - (p + 1) / 2.0))


def _s_factor(
    U: np.ndarray, a: float, b: float, s_handle: Callable[[np.ndarray], np.ndarray]
) -> float:
    p = U.shape[0]
    S = _check_lower_triangular(np.asarray(s_handle(U), dtype=float))
    exps = 2.0 * (a + b) + p - 2.0 * np.arange(1, p + 1) + 1.0
    return float(np.prod(np.diag(S) ** exps))


_beta_norm_cache: dict = {}


def matrix_beta_density(
    U,
    a: float,
    b: float,
    s_handle: Callable[[np.ndarray], np.ndarray] | None = None,
    normalized: bool | None = None,
) -> float:
    """Density of the triangular-action invariant part U at a matrix point.

    The shape is
    prod_i s_ii(U)^(2(a+b)+p-2i+1) (det U)^(a-(p+1)/2) (det(I-U))^(b-(p+1)/2);
    for the plain cross section (no ``s_handle``) and p <= 2 the normalizer
    is the multivariate beta constant, for a twisted section at p = 2 it is
    computed by cubature over {0 < U < I}; at p >= 3 only the unnormalized
    shape is available (pass ``normalized=False``).
    """
    U = _check_symmetric(_as_square(U, "U"), "U")
    p = U.shape[0]
    if a <= (p - 1) / 2.0 or b <= (p - 1) / 2.0:
        raise OutOfRangeError(f"need a, b > (p-1)/2 = {(p - 1) / 2}")
    eig = np.linalg.eigvalsh(U)
    if eig[0] <= 0.0 or eig[-1] >= 1.0:
        raise OutOfRangeError(f"U must satisfy 0 < U < I, eigenvalues {eig}")
    if normalized is None:
        normalized = p <= 2
    value = _beta_core(U, a, b)
    if s_handle is not None:
        value *= _s_factor(U, a, b, s_handle)
    if not normalized:
        return value
    if p > 2:
        raise OutOfRangeError("normalized values are available for p <= 2 only")
    if s_handle is None:
        return value / multivariate_beta(p, a, b)
    if p == 1:
        key = (1, a, b, s_handle)
        if key not in _beta_norm_cache:
            _beta_norm_cache[key] = integrate.quad(
                lambda u: _beta_core(np.array([[u]]), a, b)
                * _s_factor(np.array([[u]]), a, b, s_handle),
                0.0,
                1.0,
            )[0]
        return value / _beta_norm_cache[key]
    key = (2, a, b, s_handle)
    if key not in _beta_norm_cache:
        _beta_norm_cache[key] = _twisted_beta_normalizer_p2(a, b, s_handle)
    return value / _beta_norm_cache[key]


def _twisted_beta_normalizer_p2(
    a: float, b: float, s_handle: Callable[[np.ndarray], np.ndarray], order: int = 40
) -> float:
    """Tensor Gauss-Legendre cubature of the twisted p=2 shape over 0 < U < I.

    The off-diagonal is rescaled to t = u12 / sqrt(min(u11 u22,
    (1-u11)(1-u22))) so the domain becomes a box, and the (u11, u22) square
    is split along u11 + u22 = 1 where the min() kink lives.  The map
    handle is called per node (it takes one matrix), so the order is kept
    moderate; relative accuracy is ~1e-4, plenty for shape normalization.
    """
    nodes, weights = np.polynomial.legendre.leggauss(order)

    def seg(lo, hi):
        return 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo), 0.5 * (hi - lo) * weights

    u11_n, u11_w = seg(0.0, 1.0)
    t_n, t_w = seg(-1.0, 1.0)
    total = 0.0
    for x, wx in zip(u11_n, u11_w):
        for lo_22, hi_22 in ((0.0, 1.0 - x), (1.0 - x, 1.0)):
            u22_n, u22_w = seg(lo_22, hi_22)
            for y, wy in zip(u22_n, u22_w):
                s = np.sqrt(min(x * y, (1.0 - x) * (1.0 - y)))
                if s <= 0.0:
                    continue
                acc = 0.0
                for t, wt in zip(t_n, t_w):
                    U = np.array([[x, t * s], [t * s, y]])
                    if x * y - (t * s) ** 2 <= 0.0:
                        continue
                    if (1 - x) * (1 - y) - (t * s) ** 2 <= 0.0:
                        continue
                    acc += wt * _beta_core(U, a, b) * _s_factor(U, a, b, s_handle)
                total += wx * wy * s * acc
    return total


def equivariant_density_lt(
    G, a: float, b: float, fg_handle: Callable[[np.ndarray], float]
) -> float:
    """Unnormalized density f_G(G) prod_i g_ii^(2(a+b)-i) of the triangular part.

    For the Wishart shape f_G(T) = exp(-tr(T T^t)/2) with a + b = (n1+n2)/2
    the implied marginals make g_ii^2 chi-square(n1+n2-i+1), which is the
    test oracle for this formula.
    """
    G = _check_lower_triangular(np.asarray(G, dtype=float))
    p = G.shape[0]
    exps = 2.0 * (a + b) - np.arange(1, p + 1)
    return float(fg_handle(G) * np.prod(np.diag(G) ** exps))


def lt_decompose_batch(W1: np.ndarray, W2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized triangular decomposition of stacked pairs.

    ``W1``, ``W2`` have shape (n, p, p); returns (T, U) with the same
    batch layout.  Validation is lighter than the scalar path (inputs are
    assumed symmetric; Cholesky still rejects non-PD slices).
    """
    S = W1 + W2
    T = np.linalg.cholesky(S)
    Ti = np.linalg.inv(T)
    U = Ti @ W1 @ np.transpose(Ti, (0, 2, 1))
    return T, 0.5 * (U + np.transpose(U, (0, 2, 1)))


def gl_decompose_batch(
    W1: np.ndarray, W2: np.ndarray, gap_tol: float = DEFAULT_GAP_TOL
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized general-linear decomposition of stacked pairs.

    Returns (B, l, ok) where ``ok`` flags the slices whose congruence roots
    are separated beyond ``gap_tol``; degenerate slices keep their raw
    numbers but should be dropped by the caller.
    """
    T, U = lt_decompose_batch(W1, W2)
    lam, V = np.linalg.eigh(U)
    lam = lam[:, ::-1]
    V = V[:, :, ::-1]
    p = W1.shape[-1]
    ok = np.ones(len(W1), dtype=bool)
    if p > 1:
        ok &= np.min(-np.diff(lam, axis=1), axis=1) > gap_tol
    ok &= (lam[:, 0] < 1.0) & (lam[:, -1] > 0.0)
    B = T @ V
    # Column sign convention: first (significantly) nonzero entry positive.
    col_scale = np.max(np.abs(B), axis=1)
    sign = np.zeros((len(W1), p))
    decided = np.zeros((len(W1), p), dtype=bool)
    for i in range(p):
        row = B[:, i, :]
        significant = (np.abs(row) > 1e-12 * col_scale) & ~decided
        sign = np.where(significant, np.sign(row), sign)
        decided |= significant
    sign = np.where(decided, sign, 1.0)
    return B * sign[:, None, :], lam, ok


@dataclass(frozen=True)
class GLDecomposition:
    """General-linear split of a pair: W1 = B L B^t, W2 = B (I-L) B^t.

    ``l`` holds the strictly decreasing congruence roots in (0, 1); ``B``
    follows the positive-first-nonzero column convention; ``G`` is the
    sign-repaired equivariant selection B P(L)^-1 (equal to B without a
    normalizer twist).
    """

    B: np.ndarray
    l: np.ndarray
    G: np.ndarray
    resid_w1: float
    resid_w2: float

    @property
    def L(self) -> np.ndarray:
        return np.diag(self.l)


def _fix_column_signs(B: np.ndarray) -> np.ndarray:
    B = B.copy()
    for j in range(B.shape[1]):
        col = B[:, j]
        nz = np.nonzero(np.abs(col) > 1e-12 * max(1.0, np.max(np.abs(col))))[0]
        if nz.size and col[nz[0]] < 0.0:
            B[:, j] = -col
    return B


def gl_orbital_decompose(
    W1,
    W2,
    p_handle: Callable[[np.ndarray], np.ndarray] | None = None,
    gap_tol: float = DEFAULT_GAP_TOL,
) -> GLDecomposition:
    """Decompose a positive-definite pair under the general linear action.

    Solves the symmetric-definite eigenproblem W1 v = l (W1 + W2) v by
    Cholesky reduction of W1 + W2, normalizes eigenvectors against
    W1 + W2, and assembles B as the inverse-transpose of the eigenvector
    matrix, re-signed into the column convention.  Raises
    :class:`DegenerateRootsError` when the roots are closer than
    ``gap_tol``.
    """
    W1, W2 = validate_pd_pair(W1, W2)
    p = W1.shape[0]
    T = cholesky_factor(W1 + W2)
    Ti = linalg.solve_triangular(T, np.eye(p), lower=True)
    M = Ti @ W1 @ Ti.T
    lam, V = np.linalg.eigh(0.5 * (M + M.T))
    order = np.argsort(lam)[::-1]
    lam = lam[order]
    V = V[:, order]
    if lam[0] >= 1.0 or lam[-1] <= 0.0:
        raise NotPositiveDefiniteError(f"congruence roots {lam} outside (0, 1)")
    if p > 1 and np.min(-np.diff(lam)) <= gap_tol:
        raise DegenerateRootsError(
            f"congruence roots {lam} are not separated beyond {gap_tol:g}"
        )
    B = _fix_column_signs(T @ V)
    if p_handle is None:
        G = B
    else:
        P = _check_monomial(np.asarray(p_handle(lam), dtype=float))
        G = _fix_column_signs(B @ np.linalg.inv(P))
    L = np.diag(lam)
    R1 = B @ L @ B.T
    R2 = B @ (np.eye(p) - L) @ B.T
    return GLDecomposition(
        B,
        lam,
        G,
        float(np.linalg.norm(R1 - W1) / np.linalg.norm(W1)),
        float(np.linalg.norm(R2 - W2) / np.linalg.norm(W2)),
    )


def _check_monomial(P: np.ndarray) -> np.ndarray:
    """Validate a permutation-times-diagonal (normalizer) matrix."""
    P = _as_square(P, "P")
    nz = np.abs(P) > 1e-12 * max(1.0, float(np.max(np.abs(P))))
    if not (np.all(nz.sum(axis=0) == 1) and np.all(nz.sum(axis=1) == 1)):
        raise OutOfRangeError(
            "normalizer element must have exactly one nonzero per row and column"
        )
    return P


_eigen_norm_cache: dict = {}


def eigenvalue_density(
    l,
    a: float,
    b: float,
    p_handle: Callable[[np.ndarray], np.ndarray] | None = None,
    normalized: bool | None = None,
) -> float:
    """Density of the ordered congruence roots (l_1 > ... > l_p) at a point.

    The shape is (det P(L))^(2(a+b)) prod_i l_i^(a-(p+1)/2)
    prod_i (1-l_i)^(b-(p+1)/2) prod_{i<j} (l_i - l_j).  p = 1 normalizes to
    the scalar beta; p = 2 normalizes by quadrature over the ordered
    triangle; p >= 3 is shape-only.
    """
    l = np.asarray(l, dtype=float)
    if l.ndim != 1:
        raise DimensionMismatchError("l must be a vector")
    p = l.size
    if a <= (p - 1) / 2.0 or b <= (p - 1) / 2.0:
        raise OutOfRangeError(f"need a, b > (p-1)/2 = {(p - 1) / 2}")
    if np.any(l <= 0.0) or np.any(l >= 1.0):
        raise OutOfRangeError(f"roots {l} must lie strictly inside (0, 1)")
    if p > 1 and np.any(np.diff(l) >= 0.0):
        raise NotOrderedError(f"roots {l} must be strictly decreasing")
    if normalized is None:
        normalized = p <= 2
    value = _eigen_core(l, a, b)
    if p_handle is not None:
        P = _check_monomial(np.asarray(p_handle(l), dtype=float))
        value *= abs(np.linalg.det(P)) ** (2.0 * (a + b))
    if not normalized:
        return value
    if p > 2:
        raise OutOfRangeError("normalized values are available for p <= 2 only")
    if p == 1:
        if p_handle is None:
            return value * np.exp(
                gammaln(a + b) - gammaln(a) - gammaln(b)
            )
        key = (1, a, b, p_handle)
        if key not in _eigen_norm_cache:
            _eigen_norm_cache[key] = integrate.quad(
                lambda t: _eigen_core(np.array([t]), a, b)
                * abs(np.linalg.det(np.asarray(p_handle(np.array([t]))))) ** (2 * (a + b)),
                0.0,
                1.0,
            )[0]
        return value / _eigen_norm_cache[key]
    key = (2, a, b, p_handle)
    if key not in _eigen_norm_cache:

        def dens(l2, l1):
            core = _eigen_core(np.array([l1, l2]), a, b)
            if p_handle is not None:
                P = np.asarray(p_handle(np.array([l1, l2])), dtype=float)
                core *= abs(np.linalg.det(P)) ** (2.0 * (a + b))
            return core

        _eigen_norm_cache[key] = integrate.dblquad(
            dens, 0.0, 1.0, 0.0, lambda l1: l1, epsabs=1e-12, epsrel=1e-10
        )[0]
    return value / _eigen_norm_cache[key]


def _eigen_core(l: np.ndarray, a: float, b: float) -> float:
    p = l.size
    value = float(np.prod(l ** (a - (p + 1) / 2.0)) * np.prod((1.0 - l) ** (b - (p + 1) / 2.0)))
    for i in range(p):
        for j in range(i + 1, p):
            value *= l[i] - l[j]
    return value


def sign_matrices(p: int) -> list[np.ndarray]:
    """All 2^p diagonal sign matrices diag(+-1, ..., +-1)."""
    return [np.diag(eps) for eps in itertools.product((1.0, -1.0), repeat=p)]


def check_sign_invariance(
    t_handle: Callable[[np.ndarray], float],
    p: int,
    gen: np.random.Generator,
    n_probe: int = 8,
    rtol: float = 1e-8,
) -> bool:
    """Probe whether t(B) ignores column signs, as the eigenvalue law requires.

    Not a certification — random matrices and random sign flips only.  A
    failed probe emits a warning and returns False.
    """
    for _ in range(n_probe):
        B = gen.normal(size=(p, p))
        while abs(np.linalg.det(B)) < 1e-6:
            B = gen.normal(size=(p, p))
        eps = np.diag(np.where(gen.random(p) < 0.5, 1.0, -1.0))
        base = float(t_handle(B))
        flipped = float(t_handle(B @ eps))
        if abs(base - flipped) > rtol * max(1.0, abs(base)):
            warnings.warn(
                "t-handle changed under a column sign flip; the stated "
                "eigenvalue law does not apply to it",
                stacklevel=2,
            )
            return False
    return True


@dataclass(frozen=True)
class CrossSectionReport:
    """Outcome of the isotropy audit of a candidate global cross section."""

    group: str
    n_points: int
    expected_isotropy: int
    point_isotropy: tuple[int, ...]
    violations: tuple[str, ...]

    @property
    def clean(self) -> bool:
        return not self.violations


def verify_global_cross_section(
    points: Sequence[tuple[np.ndarray, np.ndarray]],
    group: str = "gl",
    atol: float = 1e-9,
    gen: np.random.Generator | None = None,
) -> CrossSectionReport:
    """Audit that candidate cross-section points share the expected isotropy.

    For the general linear action the reference isotropy subgroup is the
    full sign group diag(+-1)^p; every sign matrix must fix every point
    (componentwise on the pair).  Points produced by a non-normalizer
    within-orbit move keep only a conjugate of the sign group and get
    flagged.  For the triangular action the action is free: the Cholesky
    factor of W1 + W2 is unique, so only the identity can fix a point; a
    handful of random triangular elements confirm that numerically.
    """
    if group not in ("gl", "lt"):
        raise ValueError(f"unknown group '{group}'")
    violations: list[str] = []
    sizes: list[int] = []
    if not points:
        raise DimensionMismatchError("need at least one cross-section point")
    p = np.asarray(points[0][0]).shape[0]

    if group == "gl":
        expected = 2 ** p
        signs = sign_matrices(p)
        for idx, (W1, W2) in enumerate(points):
            W1 = _as_square(W1, "W1")
            W2 = _as_square(W2, "W2")
            scale = max(1.0, float(np.max(np.abs(W1))), float(np.max(np.abs(W2))))
            stab = 0
            for E in signs:
                if (
                    np.max(np.abs(E @ W1 @ E.T - W1)) <= atol * scale
                    and np.max(np.abs(E @ W2 @ E.T - W2)) <= atol * scale
                ):
                    stab += 1
            sizes.append(stab)
            if stab != expected:
                violations.append(
                    f"point {idx}: only {stab}/{expected} sign matrices fix the pair; "
                    "isotropy is a conjugate of the reference subgroup"
                )
        return CrossSectionReport(group, len(points), expected, tuple(sizes), tuple(violations))

    expected = 1
    gen = np.random.default_rng(0) if gen is None else gen
    for idx, (W1, W2) in enumerate(points):
        W1, W2 = validate_pd_pair(W1, W2)
        scale = max(1.0, float(np.max(np.abs(W1))))
        stab = 1  # the identity
        for _ in range(16):
            A = np.tril(gen.normal(size=(p, p)))
            np.fill_diagonal(A, np.exp(0.3 * gen.normal(size=p)))
            if np.max(np.abs(A - np.eye(p))) < 1e-6:
                continue
            if (
                np.max(np.abs(A @ W1 @ A.T - W1)) <= atol * scale
                and np.max(np.abs(A @ W2 @ A.T - W2)) <= atol * scale
            ):
                stab += 1
        sizes.append(stab)
        if stab != expected:
            violations.append(
                f"point {idx}: a non-identity triangular element fixes the pair"
            )
    return CrossSectionReport(group, len(points), expected, tuple(sizes), tuple(violations))
