"""Hessian-kernel splitting and the finite-dimensional reduced model.

At a critical point the Hessian is split into its (near-)kernel and the
complement.  Points are projected onto the slice where the complement part
of the gradient vanishes, moving only complement coordinates; on top of the
slice sits a (k+2)-dimensional model function whose value and radial
derivative reproduce the field's to high order in the distance from the
slice.  ``compat_check`` measures those decay orders on shrink sequences.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import InsufficientDataError, NewtonError, ReductionError
from .fields import AnalyticField, Jet2

CRITICAL_GRAD_TOL = 1e-10


@dataclass(frozen=True)
class SpectralSplit:
    """Eigendecomposition of the Hessian at the origin, split at a kernel cutoff.

    ``eigenvalues`` are sorted ascending by magnitude and ``eigenvectors``
    holds the matching orthonormal columns.  ``projector`` is the orthogonal
    projection onto the kernel span.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    kernel_dim: int
    kernel_basis: np.ndarray
    complement_basis: np.ndarray
    projector: np.ndarray
    kernel_tol: float

    @property
    def dim(self) -> int:
        return self.eigenvectors.shape[0]


def spectral_split(field: AnalyticField, kernel_tol: float | None = None) -> SpectralSplit:
    """Split the Hessian at the origin into kernel and complement.

    ``kernel_tol`` is an absolute eigenvalue cutoff; by default it is
    1e-8 times the largest eigenvalue magnitude (an exact splitting needs a
    floating-point gap threshold).
    """
    origin = np.zeros(field.dim)
    jet = field.jet2(origin)
    if jet.grad_norm >= CRITICAL_GRAD_TOL:
        raise ReductionError(
            f"origin is not a critical point: |grad| = {jet.grad_norm:.3e}"
        )
    try:
        eigvals, eigvecs = np.linalg.eigh(jet.hessian)
    except np.linalg.LinAlgError as exc:
        raise ReductionError(f"eigendecomposition failed: {exc}") from exc

    order = np.argsort(np.abs(eigvals), kind="stable")
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]

    max_abs = float(np.max(np.abs(eigvals)))
    if kernel_tol is None:
        kernel_tol = 1e-8 * max_abs
    if max_abs == 0.0:
        k = field.dim
    else:
        k = int(np.sum(np.abs(eigvals) < kernel_tol))

    kernel_basis = eigvecs[:, :k]
    complement_basis = eigvecs[:, k:]
    projector = kernel_basis @ kernel_basis.T
    return SpectralSplit(
        eigenvalues=eigvals,
        eigenvectors=eigvecs,
        kernel_dim=k,
        kernel_basis=kernel_basis,
        complement_basis=complement_basis,
        projector=projector,
        kernel_tol=float(kernel_tol),
    )


def project_onto_slice(
    field: AnalyticField,
    split: SpectralSplit,
    point,
    newton_tol: float = 1e-12,
    max_iter: int = 50,
    basin_radius: float = 1.0,
) -> np.ndarray:
    """Move ``point`` onto the slice where the complement gradient vanishes.

    Only the complement coordinates change; the kernel coordinate of the
    result equals that of the input.  Solved by damped Newton on the
    complement coordinates, starting from the input's own.
    """
    u = np.asarray(point, dtype=float)
    if u.shape != (field.dim,):
        raise ValueError(f"expected point of shape ({field.dim},)")
    if np.linalg.norm(u) > basin_radius:
        raise ValueError(
            f"point norm {np.linalg.norm(u):.3g} outside Newton basin radius {basin_radius}"
        )
    C = split.complement_basis
    if C.shape[1] == 0:
        return u.copy()
    base = split.projector @ u
    w = C.T @ u

    def residual(wvec):
        z = base + C @ wvec
        _, g = field.jet1(z)
        return C.T @ g, z

    res, z = residual(w)
    norm = np.linalg.norm(res)
    if norm < newton_tol:
        return u.copy()
    for _ in range(max_iter):
        if norm < newton_tol:
            return z
        hess = field.jet2(z).hessian
        jac = C.T @ hess @ C
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(jac, -res, rcond=None)
        damping = 1.0
        while damping >= 1.0 / 64.0:
            res_new, z_new = residual(w + damping * step)
            if np.linalg.norm(res_new) < norm:
                break
            damping *= 0.5
        else:
            raise NewtonError(
                "slice projection stalled", last_iterate=z, residual=norm
            )
        w = w + damping * step
        res, z, norm = res_new, z_new, np.linalg.norm(res_new)
    if norm < newton_tol:
        return z
    raise NewtonError(
        f"slice projection did not converge in {max_iter} iterations",
        last_iterate=z,
        residual=norm,
        iterations=max_iter,
    )


@dataclass(frozen=True)
class ReducedModel:
    """The (k+2)-dimensional model: slice restriction plus a signed quadratic.

    ``curvature_scale`` is the largest Hessian eigenvalue magnitude on the
    complement (the operator norm of the Hessian restricted there).
    """

    field: AnalyticField
    split: SpectralSplit
    k: int
    curvature_scale: float
    _newton_tol: float = dc_field(default=1e-12, repr=False)

    def slice_point(self, xcoords) -> np.ndarray:
        """Ambient point on the slice with the given kernel coordinates."""
        x = np.atleast_1d(np.asarray(xcoords, dtype=float))
        u = self.split.kernel_basis @ x
        return project_onto_slice(self.field, self.split, u, self._newton_tol)

    def restricted_value(self, xcoords) -> float:
        if self.k == 0:
            return self.field.value(np.zeros(self.field.dim))
        return self.field.value(self.slice_point(xcoords))

    def restricted_grad(self, xcoords) -> np.ndarray:
        # On the slice the ambient gradient lies in the kernel span, so the
        # restriction's gradient is just its kernel coordinates.
        if self.k == 0:
            return np.zeros(0)
        z = self.slice_point(xcoords)
        _, g = self.field.jet1(z)
        return self.split.kernel_basis.T @ g

    def value(self, reduced_point) -> float:
        p = np.asarray(reduced_point, dtype=float)
        x, y1, y2 = p[: self.k], p[-2], p[-1]
        return self.restricted_value(x) + self.curvature_scale * (y1 * y1 - y2 * y2)

    def gradient(self, reduced_point) -> np.ndarray:
        p = np.asarray(reduced_point, dtype=float)
        x, y1, y2 = p[: self.k], p[-2], p[-1]
        return np.concatenate(
            [self.restricted_grad(x),
             [2.0 * self.curvature_scale * y1, -2.0 * self.curvature_scale * y2]]
        )

    def radial_derivative(self, reduced_point) -> float:
        p = np.asarray(reduced_point, dtype=float)
        r = np.linalg.norm(p)
        if r == 0.0:
            raise ValueError("radial derivative undefined at the origin")
        return float(np.dot(self.gradient(p), p) / r)


def build_reduced(field: AnalyticField, split: SpectralSplit) -> ReducedModel:
    """Build the reduced model from a kernel splitting with k < n."""
    if split.kernel_dim == split.dim:
        raise ReductionError(
            "Hessian vanishes on every direction; the reduction needs a "
            "nondegenerate complement"
        )
    complement_eigs = split.eigenvalues[split.kernel_dim:]
    a = float(np.max(np.abs(complement_eigs)))
    return ReducedModel(field=field, split=split, k=split.kernel_dim, curvature_scale=a)


def to_reduced_coords(
    field: AnalyticField,
    split: SpectralSplit,
    model: ReducedModel,
    point,
    newton_tol: float = 1e-12,
) -> np.ndarray:
    """Map an ambient point to reduced coordinates (x^1..x^k, y1, y2).

    The pair (y1, y2) >= 0 carries the distance to the slice in quadrature,
    (y1^2 + y2^2) = |u - Qu|^2, with the split between them chosen so the
    model's signed quadratic matches the Hessian quadratic form of the field
    along the normal displacement.  A positive form loads y1, a negative one
    y2, and a vanishing form splits evenly, keeping the map continuous on rays.
    """
    u = np.asarray(point, dtype=float)
    z = project_onto_slice(field, split, u, newton_tol)
    d = u - z
    delta_sq = float(np.dot(d, d))
    x = split.kernel_basis.T @ z
    if delta_sq == 0.0:
        return np.concatenate([x, [0.0, 0.0]])
    hess = field.jet2(z).hessian
    q = 0.5 * float(d @ hess @ d)
    a = model.curvature_scale
    limit = a * delta_sq
    if abs(q) > limit * (1.0 + 1e-9):
        raise ReductionError(
            f"quadratic form magnitude {abs(q):.3e} exceeds curvature bound "
            f"{limit:.3e}; point outside the model's validity region"
        )
    y1_sq = max(0.5 * (delta_sq + q / a), 0.0)
    y2_sq = max(0.5 * (delta_sq - q / a), 0.0)
    return np.concatenate([x, [np.sqrt(y1_sq), np.sqrt(y2_sq)]])


@dataclass(frozen=True)
class CompatReport:
    """Decay orders of the reduced model's mismatch on a shrink sequence.

    ``value_order`` / ``radial_order`` are log-log slopes of the value and
    radial-derivative mismatches against the distance to the slice;
    ``norm_order`` is the slope of the squared-norm distortion of the
    reduced coordinates against the point norm.  ``*_exact`` flags mark
    mismatches at rounding level, where no order can be fitted.
    """

    value_order: float
    radial_order: float
    norm_order: float
    value_exact: bool
    radial_exact: bool
    norm_exact: bool
    n_points: int
    value_residual: float
    radial_residual: float


def _loglog_order(diffs, scales, rel_floor):
    """Slope of log(diffs) vs log(scales); inf when diffs sit at rounding."""
    diffs = np.asarray(diffs)
    scales = np.asarray(scales)
    mask = diffs > rel_floor
    if np.count_nonzero(mask) < 4:
        return np.inf, True, 0.0
    lx = np.log(scales[mask])
    ly = np.log(diffs[mask])
    if np.ptp(lx) < 1e-9:
        raise InsufficientDataError("shrink sequence does not shrink")
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = float(np.sqrt(np.mean((ly - (slope * lx + intercept)) ** 2)))
    return float(slope), False, resid


def compat_check(field: AnalyticField, model: ReducedModel, shrink_sequence) -> CompatReport:
    """Fit mismatch decay orders of the reduced model along a shrink sequence."""
    split = model.split
    deltas, rnorms = [], []
    value_diffs, radial_diffs, norm_diffs = [], [], []
    value_scale, radial_scale = 0.0, 0.0
    for point in shrink_sequence:
        u = np.asarray(point, dtype=float)
        z = project_onto_slice(field, split, u)
        delta = float(np.linalg.norm(u - z))
        if delta <= 0.0:
            continue
        reduced = to_reduced_coords(field, split, model, u)
        fval = model.value(reduced)
        eval_ = field.value(u)
        jet1 = field.jet1(u)
        r = float(np.linalg.norm(u))
        e_r = float(np.dot(jet1[1], u) / r)
        f_r = model.radial_derivative(reduced)
        deltas.append(delta)
        rnorms.append(r)
        value_diffs.append(abs(fval - eval_))
        radial_diffs.append(abs(f_r - e_r))
        norm_diffs.append(abs(float(np.dot(reduced, reduced)) - r * r))
        value_scale = max(value_scale, abs(fval), abs(eval_))
        radial_scale = max(radial_scale, abs(f_r), abs(e_r))
    if len(deltas) < 4:
        raise InsufficientDataError(
            f"only {len(deltas)} usable points in shrink sequence (need >= 4)"
        )
    deltas = np.asarray(deltas)
    rnorms = np.asarray(rnorms)
    if np.ptp(np.log(deltas)) < 1e-9:
        raise InsufficientDataError("shrink sequence is effectively constant")

    p1, ex1, res1 = _loglog_order(value_diffs, deltas, 1e-13 * max(value_scale, 1e-300))
    p2, ex2, res2 = _loglog_order(radial_diffs, deltas, 1e-13 * max(radial_scale, 1e-300))
    p3, ex3, _ = _loglog_order(norm_diffs, rnorms, 1e-13 * max(float(np.max(rnorms ** 2)), 1e-300))
    return CompatReport(
        value_order=p1,
        radial_order=p2,
        norm_order=p3,
        value_exact=ex1,
        radial_exact=ex2,
        norm_exact=ex3,
        n_points=len(deltas),
        value_residual=res1,
        radial_residual=res2,
    )
