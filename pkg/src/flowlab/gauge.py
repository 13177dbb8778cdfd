"""Finite-dimensional gauge toy: invariant fields, orbit-orthogonal fixing.

A compact group acts linearly through antisymmetric generators; gauge fixing
relative to a reference point x solves the orbit-orthogonality condition
rho_x^T (exp(-g) . y - x) = 0 for an algebra element g orthogonal to the
kernel of the infinitesimal action.  Trajectories of an invariant field can
then be gauge-fixed sample by sample and their secant traced.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, expm_frechet

from .errors import GaugeFixError
from .fields import AnalyticField
from .asymptotics import SecantTrace, secant_trace_from_vectors


@dataclass(frozen=True)
class GroupAction:
    """Linear group action on the field's domain via antisymmetric generators."""

    generators: tuple
    field: AnalyticField

    def __post_init__(self):
        for J in self.generators:
            J = np.asarray(J)
            if J.shape != (self.field.dim, self.field.dim):
                raise ValueError("generator shape does not match field dimension")
            if not np.array_equal(J, -J.T):
                raise ValueError("generators must be exactly antisymmetric")

    @property
    def n_generators(self) -> int:
        return len(self.generators)

    def rho(self, x) -> np.ndarray:
        """Infinitesimal action at x: columns J_a x."""
        x = np.asarray(x, dtype=float)
        return np.column_stack([np.asarray(J) @ x for J in self.generators])

    def algebra(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        out = np.zeros((self.field.dim, self.field.dim))
        for coef, J in zip(theta, self.generators):
            out += coef * np.asarray(J)
        return out

    def element(self, theta) -> np.ndarray:
        return expm(self.algebra(theta))

    def invariance_deviation(self, rng, n_samples: int = 50, radius: float = 0.8) -> float:
        """Largest |field(exp(tJ_a) u) - field(u)| over random (u, t, a)."""
        worst = 0.0
        for _ in range(n_samples):
            u = rng.normal(size=self.field.dim)
            u *= radius * rng.random() / max(np.linalg.norm(u), 1e-12)
            t = rng.uniform(-np.pi, np.pi)
            a = rng.integers(self.n_generators)
            moved = expm(t * np.asarray(self.generators[a])) @ u
            worst = max(worst, abs(self.field.value(moved) - self.field.value(u)))
        return worst


@dataclass(frozen=True)
class GaugeFixResult:
    """Algebra coefficients, the fixed point exp(-g).y and the final residual."""

    theta: np.ndarray
    fixed_point: np.ndarray
    residual: float
    iterations: int
    rank: int


def gauge_fix_point(
    action: GroupAction,
    x,
    y,
    tol: float = 1e-12,
    max_iter: int = 60,
) -> GaugeFixResult:
    """Solve the orbit-orthogonality condition at reference x for the point y.

    Newton iteration on algebra coefficients restricted to the orthogonal
    complement of ker(rho_x); when rho_x vanishes (x fixed by the whole
    group) the condition is vacuous and the identity is returned.  Column
    rank deficiency of rho_x is handled by restricting to its row space.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    M = action.rho(x)
    m = action.n_generators
    scale = np.linalg.norm(M)
    if scale < 1e-14:
        residual = float(np.linalg.norm(M.T @ (y - x)))
        return GaugeFixResult(theta=np.zeros(m), fixed_point=y.copy(),
                              residual=residual, iterations=0, rank=0)
    _, svals, vt = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(svals > 1e-12 * svals[0]))
    basis = vt[:rank].T  # (m, rank): orthonormal basis of the row space

    def residual_at(xi):
        G = action.algebra(basis @ xi)
        moved = expm(-G) @ y
        return basis.T @ (M.T @ (moved - x)), moved, G

    xi = np.zeros(rank)
    res, moved, G = residual_at(xi)
    norm = float(np.linalg.norm(res))
    iterations = 0
    while norm >= tol and iterations < max_iter:
        jac = np.empty((rank, rank))
        for j in range(rank):
            direction = -action.algebra(basis[:, j])
            _, dmoved = expm_frechet(-G, direction)
            jac[:, j] = basis.T @ (M.T @ (dmoved @ y))
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(jac, -res, rcond=None)
        damping = 1.0
        while damping >= 1.0 / 64.0:
            res_new, moved_new, G_new = residual_at(xi + damping * step)
            if np.linalg.norm(res_new) < norm:
                break
            damping *= 0.5
        else:
            raise GaugeFixError(
                f"gauge fixing stalled at residual {norm:.3e}",
                residual=norm, iterations=iterations,
            )
        xi = xi + damping * step
        res, moved, G = res_new, moved_new, G_new
        norm = float(np.linalg.norm(res))
        iterations += 1
    if norm >= tol:
        raise GaugeFixError(
            f"gauge fixing did not reach tol={tol:g} in {max_iter} iterations "
            f"(residual {norm:.3e})",
            residual=norm, iterations=iterations,
        )
    return GaugeFixResult(theta=basis @ xi, fixed_point=moved, residual=norm,
                          iterations=iterations, rank=rank)


@dataclass(frozen=True)
class GaugeFixedSecant:
    trace: SecantTrace
    residuals: np.ndarray
    gauge_increments: np.ndarray  # |g_{i+1} g_i^{-1} - id|_F, a continuity diagnostic


def gauge_fixed_secant(action: GroupAction, points, x_inf, tol: float = 1e-12) -> GaugeFixedSecant:
    """Gauge-fix every point relative to the limit, then trace the secant.

    ``points`` may be a trajectory or any sequence of points.  A gauge-fix
    failure at some sample propagates with the sample index attached.
    """
    if hasattr(points, "samples"):
        points = [smp.u for smp in points.samples]
    x_inf = np.asarray(x_inf, dtype=float)
    fixed, thetas, residuals = [], [], []
    for idx, u in enumerate(points):
        try:
            result = gauge_fix_point(action, x_inf, u, tol=tol)
        except GaugeFixError as exc:
            raise GaugeFixError(
                f"gauge fixing failed at sample {idx}: {exc}",
                residual=exc.residual, iterations=exc.iterations,
            ) from exc
        fixed.append(result.fixed_point - x_inf)
        thetas.append(result.theta)
        residuals.append(result.residual)
    vectors = np.asarray(fixed)
    radii = np.linalg.norm(vectors, axis=1)
    trace = secant_trace_from_vectors(vectors, radii)
    increments = []
    for t0, t1 in zip(thetas, thetas[1:]):
        g0 = action.element(-np.asarray(t0))
        g1 = action.element(-np.asarray(t1))
        increments.append(float(np.linalg.norm(g1 @ g0.T - np.eye(action.field.dim))))
    return GaugeFixedSecant(
        trace=trace,
        residuals=np.asarray(residuals),
        gauge_increments=np.asarray(increments),
    )


def rotation_generator(dim: int, i: int, j: int) -> np.ndarray:
    """Antisymmetric generator of the rotation in the (i, j) coordinate plane."""
    J = np.zeros((dim, dim))
    J[i, j] = -1.0
    J[j, i] = 1.0
    return J
