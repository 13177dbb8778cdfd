"""Asymptotic diagnostics along trajectories converging to a critical point.

Everything here is a pure function of an immutable trajectory (or a point
cloud): cone membership of samples, characteristic-exponent and Lojasiewicz
fits, the secant's spherical length and its per-decade tail, the scaled
energy monitor, and envelope fits for the inequality-type estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import FlowError, InsufficientDataError
from .fields import AnalyticField

_TINY = 1e-300


@dataclass(frozen=True)
class ConeParams:
    """Parameters of the radial-dominance cones and their refinements.

    ``epsilon`` is the cone aperture (angular-vs-radial derivative ratio),
    ``delta`` the window exponent for exponent-resolved membership,
    ``omega`` the refinement exponent, and ``alpha`` the perturbation
    exponent of the monotone scaled-energy surrogate (must satisfy
    alpha < 2 * omega).
    """

    epsilon: float = 0.1
    delta: float = 0.1
    omega: float = 0.05
    alpha: float = 0.05

    def __post_init__(self):
        if min(self.epsilon, self.delta, self.omega, self.alpha) <= 0:
            raise ValueError("cone parameters must be positive")
        if not self.alpha < 2 * self.omega:
            raise ValueError("alpha must be below 2 * omega")


@dataclass(frozen=True)
class ConeLabel:
    kind: str          # "outside" | "cone" | "cone_l" | "refined_l"
    l: float | None    # matched exponent for the resolved kinds
    ratio: float       # |e_theta| / |e_r| (inf when e_r == 0)


@dataclass(frozen=True)
class ConeReport:
    labels: tuple
    fraction_in_cone: float
    decades_with_l: dict

    def matched_l(self):
        return np.array([lab.l if lab.l is not None else np.nan for lab in self.labels])


def cone_membership(traj, params: ConeParams, l_values=None) -> ConeReport:
    """Label each sample by cone membership and matched exponent window.

    A sample is inside the cone when its value is nonzero and
    epsilon * |e_theta| <= |e_r|.  Inside the cone, the sample matches
    exponent l when |r e_r / value - l| <= r^delta, and is refined when
    r^(-omega) * |e_theta| <= |e_r|.  ``l_values`` defaults to the snapped
    characteristic-exponent estimate of the trajectory.
    """
    arr = traj.arrays()
    if l_values is None:
        est = estimate_char_exponent(traj, params)
        l_values = [est.nearest_rational] if est.nearest_rational is not None else [est.l_hat]
    labels = []
    decades: dict[int, set] = {}
    n_in = 0
    for i in range(len(arr["r"])):
        r = arr["r"][i]
        value = arr["value"][i]
        e_r = arr["e_r"][i]
        th = arr["e_theta_norm"][i]
        ratio = abs(th / e_r) if e_r != 0.0 else (0.0 if th == 0.0 else np.inf)
        if value == 0.0 or e_r == 0.0 or params.epsilon * th > abs(e_r):
            labels.append(ConeLabel("outside", None, ratio))
            continue
        n_in += 1
        q = r * e_r / value
        window = r ** params.delta
        matched = None
        best = np.inf
        for l in l_values:
            gap = abs(q - l)
            if gap <= window and gap < best:
                matched, best = float(l), gap
        if matched is None:
            labels.append(ConeLabel("cone", None, ratio))
            continue
        refined = th * r ** (-params.omega) <= abs(e_r)
        labels.append(ConeLabel("refined_l" if refined else "cone_l", matched, ratio))
        decades.setdefault(int(math.floor(math.log10(r))), set()).add(matched)
    return ConeReport(
        labels=tuple(labels),
        fraction_in_cone=n_in / max(len(labels), 1),
        decades_with_l=decades,
    )


@dataclass(frozen=True)
class CharExponentReport:
    l_hat: float
    series_r: np.ndarray
    series_q: np.ndarray
    nearest_rational: float | None
    rational_gap: float
    off_rational: bool
    n_used: int


def _cone_mask(arr, epsilon):
    e_r = arr["e_r"]
    return (arr["value"] != 0.0) & (np.abs(e_r) > 0.0) & \
        (epsilon * arr["e_theta_norm"] <= np.abs(e_r))


def estimate_char_exponent(traj, params: ConeParams) -> CharExponentReport:
    """Extrapolated limit of r * e_r / value along the in-cone samples.

    The samples sit on a geometric radius grid, so the residual q - l decays
    geometrically and iterated Aitken extrapolation applies; for series that
    are constant to rounding the last value is exact.  The result is flagged
    when farther than 0.02 from every rational p/q with q <= 12.
    """
    arr = traj.arrays()
    mask = _cone_mask(arr, params.epsilon)
    r = arr["r"][mask]
    if len(r) < 6 or r.max() / max(r.min(), _TINY) < 100.0:
        raise InsufficientDataError(
            "need cone samples spanning at least two decades of radius"
        )
    q = (r * arr["e_r"][mask] / arr["value"][mask])
    order = np.argsort(-r)  # by decreasing radius == increasing time
    r, q = r[order], q[order]

    tail = q[-min(len(q), 30):]
    extrapolants = []
    for i in range(len(tail) - 2):
        d1 = tail[i + 1] - tail[i]
        d2 = tail[i + 2] - 2 * tail[i + 1] + tail[i]
        if abs(d2) > 1e-13 * (abs(tail[i]) + 1.0):
            extrapolants.append(tail[i] - d1 * d1 / d2)
    if extrapolants:
        l_hat = float(np.median(extrapolants[-5:]))
    else:
        l_hat = float(tail[-1])

    rational = Fraction(l_hat).limit_denominator(12)
    gap = abs(l_hat - float(rational))
    return CharExponentReport(
        l_hat=l_hat,
        series_r=r,
        series_q=q,
        nearest_rational=float(rational),
        rational_gap=gap,
        off_rational=gap > 0.02,
        n_used=len(q),
    )


@dataclass(frozen=True)
class LojFit:
    rho_hat: float
    c_hat: float
    rho_raw: float
    clipped: bool
    n_used: int


def estimate_loj_exponent(traj) -> LojFit:
    """Least-squares gradient-vs-value power fit over the final two decades.

    Fits log|grad| = rho * log(value) + log(c); the exponent is clipped to
    [1/2, 1) with ``clipped`` set when the raw fit leaves the interval.
    """
    arr = traj.arrays()
    mask = arr["value"] > 0.0
    r = arr["r"][mask]
    if len(r) < 5:
        raise InsufficientDataError("need at least 5 samples with positive value")
    window = r <= 100.0 * r.min()
    value = arr["value"][mask][window]
    gnorm = arr["grad_norm"][mask][window]
    if len(value) < 5 or np.ptp(np.log(value)) < 0.5 or np.any(gnorm <= 0.0):
        raise InsufficientDataError("degenerate regression input for exponent fit")
    lx = np.log(value)
    ly = np.log(gnorm)
    slope, intercept = np.polyfit(lx, ly, 1)
    raw = float(slope)
    clipped = not (0.5 <= raw < 1.0)
    rho = min(max(raw, 0.5), 1.0 - 1e-12)
    return LojFit(rho_hat=rho, c_hat=float(np.exp(intercept)), rho_raw=raw,
                  clipped=clipped, n_used=len(value))


@dataclass(frozen=True)
class BochnakReport:
    c_bl: float
    r_at_min: float
    n_used: int


def bochnak_constant(traj, final_decades: int | None = None) -> BochnakReport:
    """Infimum of r * |grad| / |value| over samples (optionally a radius window)."""
    arr = traj.arrays()
    mask = arr["value"] != 0.0
    if final_decades is not None:
        rmin = arr["r"][mask].min()
        mask = mask & (arr["r"] <= rmin * 10.0 ** final_decades)
    if not np.any(mask):
        raise InsufficientDataError("no samples with nonzero value")
    ratio = arr["r"][mask] * arr["grad_norm"][mask] / np.abs(arr["value"][mask])
    idx = int(np.argmin(ratio))
    return BochnakReport(c_bl=float(ratio[idx]), r_at_min=float(arr["r"][mask][idx]),
                         n_used=int(mask.sum()))


@dataclass(frozen=True)
class SecantTrace:
    """Spherical trace of the normalized trajectory points.

    ``spherical_length`` accumulates great-circle increments (arccos of the
    clamped inner product); ``chord_length`` is the cross-validating chord
    sum.  ``tail_lengths`` buckets increments by the radius decade of their
    left endpoint and ``cauchy_gap`` is the largest pairwise distance of the
    unit points in the final decade.
    """

    points: np.ndarray
    radii: np.ndarray
    increments: np.ndarray
    spherical_length: float
    chord_length: float
    tail_lengths: dict
    cauchy_gap: float

    def tail_ratios_ok(self, n_decades: int = 3, ratio: float = 0.9,
                       floor: float = 1e-9) -> bool:
        """Whether the deepest per-decade tails decay (or sit under ``floor``)."""
        decades = sorted(self.tail_lengths, reverse=True)  # large r first
        tails = [self.tail_lengths[d] for d in decades][-n_decades:]
        for upper, lower in zip(tails, tails[1:]):
            if lower > floor and not lower < ratio * upper:
                return False
        return True


def secant_trace_from_vectors(vectors, radii) -> SecantTrace:
    """Secant trace of arbitrary nonzero vectors under the Euclidean metric."""
    vectors = np.asarray(vectors, dtype=float)
    radii = np.asarray(radii, dtype=float)
    if len(vectors) < 2:
        raise InsufficientDataError("need at least two points for a secant trace")
    if np.any(radii <= 0.0):
        raise ValueError("secant undefined for points at the limit")
    units = vectors / radii[:, None]
    chords = np.linalg.norm(np.diff(units, axis=0), axis=1)
    # 2 arcsin(chord/2) equals arccos of the clamped inner product but stays
    # accurate for nearly identical unit vectors.
    increments = 2.0 * np.arcsin(np.clip(0.5 * chords, 0.0, 1.0))
    tails: dict[int, float] = {}
    for inc, r in zip(increments, radii[:-1]):
        decade = int(math.floor(math.log10(r)))
        tails[decade] = tails.get(decade, 0.0) + float(inc)
    final = units[radii <= 10.0 * radii.min()]
    gap = 0.0
    for i in range(len(final)):
        gap = max(gap, float(np.max(np.linalg.norm(final[i + 1:] - final[i], axis=1), initial=0.0)))
    return SecantTrace(
        points=units,
        radii=radii,
        increments=increments,
        spherical_length=float(np.sum(increments)),
        chord_length=float(np.sum(chords)),
        tail_lengths=tails,
        cauchy_gap=gap,
    )


def secant_trace(traj) -> SecantTrace:
    """Secant trace of a trajectory toward the origin."""
    arr = traj.arrays()
    return secant_trace_from_vectors(arr["u"], arr["r"])


@dataclass(frozen=True)
class SigmaRatioReport:
    r: np.ndarray
    ratio: np.ndarray
    final_decade_mean: float
    final_decade_max_dev: float


def sigma_ratio(traj) -> SigmaRatioReport:
    """Remaining arclength over radius, with the sub-floor tail estimated by r.

    The length from a sample to the limit is the chord sum to the final
    point plus the final radius (the straight-line estimate of the
    unresolved tail).
    """
    if not traj.converged:
        raise FlowError("sigma/r ratio needs a converged trajectory")
    arr = traj.arrays()
    sigma = arr["sigma"]
    r = arr["r"]
    remaining = sigma[-1] - sigma + r[-1]
    ratio = remaining / r
    final = r <= 10.0 * r.min()
    dev = np.abs(ratio[final] - 1.0)
    return SigmaRatioReport(
        r=r,
        ratio=ratio,
        final_decade_mean=float(np.mean(ratio[final])),
        final_decade_max_dev=float(np.max(dev)),
    )


@dataclass(frozen=True)
class ScaledEnergyMonitor:
    """Samples of E = value / r^l and of its monotone surrogate g = E + r^alpha."""

    l: float
    E: np.ndarray
    g: np.ndarray
    a0_hat: float
    final_decade_fluctuation: float
    monotone_violations: int
    sign_mismatches: int
    w_ratio: np.ndarray
    diverged: bool


def monitor_scaled_energy(traj, l: float, params: ConeParams) -> ScaledEnergyMonitor:
    """Track the scaled energy, its surrogate's monotonicity and decay rate.

    Monotonicity of g = E + r^alpha is an asymptotic statement: before the
    trajectory settles into the cone window of the target exponent, E may
    legitimately grow (the excluded lower-exponent regime), so violations are
    counted on the terminal window of samples matching ``l``.  The measured
    slope between consecutive samples is also compared in sign with the
    closed-form derivative of the scaled energy along the unit-speed flow,
    -(|e_theta|^2 + e_r^2 (1 - l * value / (r e_r))) / (|grad| r^l).
    """
    if l <= 0:
        raise ValueError("l must be positive")
    arr = traj.arrays()
    r = arr["r"]
    value = arr["value"]
    E = value / r ** l
    g = E + r ** params.alpha

    e_r_arr = arr["e_r"]
    in_cone = _cone_mask(arr, params.epsilon)
    with np.errstate(divide="ignore", invalid="ignore"):
        q_arr = np.where(value != 0.0, r * e_r_arr / np.where(value != 0, value, 1.0), np.inf)
    matches = in_cone & (np.abs(q_arr - l) <= r ** params.delta)
    nonmatch = np.nonzero(~matches)[0]
    tail_start = int(nonmatch[-1] + 1) if len(nonmatch) else 0
    if tail_start > len(g) - 2:  # never settled: fall back to the final decade
        tail_start = int(np.argmax(r <= 10.0 * r.min()))
    gt = g[tail_start:]
    budget = 1e-12 * np.maximum(1.0, np.abs(gt[:-1]))
    violations = int(np.sum(gt[1:] > gt[:-1] + budget))

    with np.errstate(divide="ignore", invalid="ignore"):
        w_ratio = np.abs(1.0 - l * value / (r * arr["e_r"]))

    e_r = arr["e_r"]
    closed = -(arr["e_theta_norm"] ** 2 + e_r ** 2 - l * value * e_r / r) / (
        np.maximum(arr["grad_norm"], _TINY) * r ** l
    )
    ds = np.diff(arr["s"])
    measured = np.diff(E) / np.where(ds > 0, ds, np.inf)
    scale = np.max(np.abs(closed)) if len(closed) else 0.0
    mism = 0
    for i in range(len(measured)):
        c = 0.5 * (closed[i] + closed[i + 1])
        if abs(measured[i]) > 1e-10 * max(scale, 1.0) and abs(c) > 1e-10 * max(scale, 1.0):
            if np.sign(measured[i]) != np.sign(c):
                mism += 1

    final = r <= 10.0 * r.min()
    a0 = float(np.mean(E[final]))
    spread = float(np.ptp(E[final]) / max(abs(a0), _TINY))
    diverged = bool(E[-1] > 10.0 * max(E[0], _TINY) and E[-1] >= np.max(E[: max(len(E) // 2, 1)]))
    return ScaledEnergyMonitor(
        l=l, E=E, g=g, a0_hat=a0, final_decade_fluctuation=spread,
        monotone_violations=violations, sign_mismatches=mism,
        w_ratio=w_ratio, diverged=diverged,
    )


@dataclass(frozen=True)
class AsymptoticValueReport:
    a0: float
    ratios: np.ndarray
    decaying: bool | None  # None when the ratio is zero to rounding throughout
    slope: float | None


def asymptotic_critical_value(traj, l: float) -> AsymptoticValueReport:
    """Limit of the scaled energy along samples whose gradient turns radial."""
    if not traj.converged:
        raise FlowError("asymptotic value needs a converged trajectory")
    arr = traj.arrays()
    r = arr["r"]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(
            np.abs(arr["e_r"]) > 0.0,
            arr["e_theta_norm"] / np.abs(arr["e_r"]),
            np.inf,
        )
    final = r <= 10.0 * r.min()
    a0 = float(np.mean(arr["value"][final] / r[final] ** l))
    positive = ratios > 1e-14
    if np.count_nonzero(positive) < 5:
        return AsymptoticValueReport(a0=a0, ratios=ratios, decaying=None, slope=None)
    lx = np.log(r[positive])
    ly = np.log(ratios[positive])
    slope = float(np.polyfit(lx, ly, 1)[0])
    return AsymptoticValueReport(a0=a0, ratios=ratios, decaying=slope > 0.0, slope=slope)


@dataclass(frozen=True)
class EnvelopeFit:
    """Lower-envelope power fit of r|E'| against |E - a| on a restricted cloud."""

    rho_a: float | None
    c: float | None
    n_restricted: int
    n_binned: int
    degenerate_exact: bool
    violation: bool


def critical_value_envelope(
    field: AnalyticField,
    l: float,
    a: float,
    eta: float,
    sample_cloud,
    c_a: float = 0.5,
    n_bins: int = 12,
    quantile: float = 0.05,
) -> EnvelopeFit:
    """Fit r|E'| >= c |E - a|^rho_a on the nearly-radial part of a point cloud.

    E = value / r^l.  The cloud is restricted to |E_r| <= r^eta |E'| and
    |E - a| <= c_a; the fit is a least-squares line through per-bin lower
    quantiles of log(r|E'|) over log|E - a| bins, so it tracks the envelope
    rather than the mean.  rho_a < 1 is the expected outcome; ``violation``
    flags a fit at or above 1.
    """
    cloud = np.asarray(sample_cloud, dtype=float)
    rE, gap = [], []
    for u in cloud:
        r = float(np.linalg.norm(u))
        if r == 0.0:
            continue
        value, grad = field.jet1(u)
        unit = u / r
        e_r = float(np.dot(grad, unit))
        e_theta = grad - e_r * unit
        E = value / r ** l
        E_r = e_r / r ** l - l * E / r
        E_theta = float(np.linalg.norm(e_theta)) / r ** l
        E_grad = math.hypot(E_r, E_theta)
        if abs(E_r) <= r ** eta * E_grad and abs(E - a) <= c_a:
            rE.append(r * E_grad)
            gap.append(abs(E - a))
    if not rE:
        raise InsufficientDataError("restriction left no samples in the cloud")
    rE = np.asarray(rE)
    gap = np.asarray(gap)
    live = gap > 1e-12
    if not np.any(live):
        return EnvelopeFit(rho_a=None, c=None, n_restricted=len(gap), n_binned=0,
                           degenerate_exact=True, violation=False)
    lx = np.log(gap[live])
    ly = np.log(np.maximum(rE[live], _TINY))
    edges = np.linspace(lx.min(), lx.max() + 1e-12, n_bins + 1)
    xs, ys = [], []
    for k in range(n_bins):
        sel = (lx >= edges[k]) & (lx < edges[k + 1])
        if np.count_nonzero(sel) >= 3:
            xs.append(0.5 * (edges[k] + edges[k + 1]))
            ys.append(np.quantile(ly[sel], quantile))
    if len(xs) < 4:
        raise InsufficientDataError(
            f"only {len(xs)} occupied envelope bins (need >= 4)"
        )
    slope, intercept = np.polyfit(xs, ys, 1)
    return EnvelopeFit(
        rho_a=float(slope),
        c=float(np.exp(intercept)),
        n_restricted=len(gap),
        n_binned=len(xs),
        degenerate_exact=False,
        violation=not slope < 1.0,
    )


@dataclass(frozen=True)
class AnalyticCurve:
    """Truncated power series t -> sum_j coefficients[j] * t^(j+1), through 0."""

    coefficients: tuple

    def __call__(self, t: float) -> np.ndarray:
        out = np.zeros_like(np.asarray(self.coefficients[0], dtype=float))
        for j, c in enumerate(self.coefficients):
            out = out + np.asarray(c, dtype=float) * t ** (j + 1)
        return out

    def radius(self, t: float) -> float:
        return float(np.linalg.norm(self(t)))


@dataclass(frozen=True)
class PuiseuxReport:
    l: float | None
    a_l: float | None
    identically_zero: bool
    radial_consistency: float | None  # median relative gap of e_r vs l*a_l*r^(l-1)


def puiseux_fit(field: AnalyticField, curve: AnalyticCurve, r_samples) -> PuiseuxReport:
    """Leading exponent and coefficient of the field along an analytic curve.

    The curve is reparameterized by radius (bisection on the monotone small-t
    branch), the exponent comes from a log-log fit against r, and the radial
    derivative is cross-checked against l * a_l * r^(l-1).
    """
    radii = np.sort(np.asarray(r_samples, dtype=float))
    if np.any(radii <= 0.0):
        raise ValueError("curve radii must be positive")
    t_hi = 1e-6
    while curve.radius(t_hi) < radii[-1]:
        t_hi *= 2.0
        if t_hi > 1e6:
            raise InsufficientDataError("curve never reaches the requested radius")
    values, e_rs = [], []
    for r in radii:
        lo, hi = 0.0, t_hi
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if curve.radius(mid) < r:
                lo = mid
            else:
                hi = mid
        point = curve(0.5 * (lo + hi))
        val, grad = field.jet1(point)
        values.append(val)
        e_rs.append(float(np.dot(grad, point) / np.linalg.norm(point)))
    values = np.asarray(values)
    e_rs = np.asarray(e_rs)
    if np.max(np.abs(values)) < 1e-25:
        return PuiseuxReport(l=None, a_l=None, identically_zero=True,
                             radial_consistency=None)
    slope, _ = np.polyfit(np.log(radii), np.log(np.abs(values)), 1)
    l = float(slope)
    a_l = float(np.median(values / radii ** l))
    predicted = l * a_l * radii ** (l - 1.0)
    good = np.abs(predicted) > _TINY
    consistency = float(np.median(np.abs(e_rs[good] - predicted[good])
                                  / np.abs(predicted[good]))) if np.any(good) else np.inf
    return PuiseuxReport(l=l, a_l=a_l, identically_zero=False,
                         radial_consistency=consistency)


@dataclass(frozen=True)
class CriticalDistanceReport:
    c_fit: float
    n_used: int
    n_skipped: int
    ratios: np.ndarray


def critical_distance_check(
    field: AnalyticField,
    traj,
    alpha: float,
    params: ConeParams = ConeParams(),
    max_iter: int = 200,
) -> CriticalDistanceReport:
    """Envelope constant of |value|^(1/alpha) over the distance to the critical set.

    The distance is measured to the nearest critical point found by damped
    Newton polish started from each in-cone sample; samples whose polish
    diverges are skipped and counted.
    """
    arr = traj.arrays()
    mask = _cone_mask(arr, params.epsilon)
    ratios = []
    skipped = 0
    for u, value in zip(arr["u"][mask], arr["value"][mask]):
        z = _polish_critical(field, u, max_iter)
        if z is None:
            skipped += 1
            continue
        d = float(np.linalg.norm(u - z))
        if d < 1e-15:
            skipped += 1
            continue
        ratios.append(abs(value) ** (1.0 / alpha) / d)
    if not ratios:
        raise InsufficientDataError("no usable in-cone samples for the distance check")
    ratios = np.asarray(ratios)
    return CriticalDistanceReport(
        c_fit=float(np.quantile(ratios, 0.05)),
        n_used=len(ratios),
        n_skipped=skipped,
        ratios=ratios,
    )


def _polish_critical(field, start, max_iter):
    z = np.asarray(start, dtype=float).copy()
    scale = 10.0 * (1.0 + np.linalg.norm(z))
    for _ in range(max_iter):
        jet = field.jet2(z)
        if jet.grad_norm < 1e-13:
            return z
        try:
            step = np.linalg.solve(jet.hessian, -jet.gradient)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(jet.hessian, -jet.gradient, rcond=None)
        t = 1.0
        accepted = False
        while t >= 1.0 / 64.0:
            z_new = z + t * step
            if float(np.linalg.norm(field.jet1(z_new)[1])) < jet.grad_norm:
                accepted = True
                break
            t *= 0.5
        if not accepted or np.linalg.norm(z_new) > scale:
            return None
        z = z_new
    return z if float(np.linalg.norm(field.jet1(z)[1])) < 1e-10 else None


@dataclass(frozen=True)
class ExponentReport:
    """Combined exponent fits and the bound slack between them.

    ``bound_slack`` is (1 - rho_hat)^(-1) - l_hat; it should be nonnegative
    up to fit tolerance.
    """

    rho_hat: float
    c_hat: float
    l_hat: float
    L_candidates: tuple
    c_bl: float
    bound_slack: float
    rho_clipped: bool
    off_rational: bool


def exponent_report(traj, params: ConeParams, l_values=None) -> ExponentReport:
    """Assemble Lojasiewicz, characteristic-exponent and infimum-ratio fits."""
    loj = estimate_loj_exponent(traj)
    char = estimate_char_exponent(traj, params)
    boch = bochnak_constant(traj, final_decades=2)
    candidates = tuple(l_values) if l_values is not None else (
        (char.nearest_rational,) if char.nearest_rational is not None else (char.l_hat,)
    )
    return ExponentReport(
        rho_hat=loj.rho_hat,
        c_hat=loj.c_hat,
        l_hat=char.l_hat,
        L_candidates=candidates,
        c_bl=boch.c_bl,
        bound_slack=1.0 / (1.0 - loj.rho_hat) - char.l_hat,
        rho_clipped=loj.clipped,
        off_rational=char.off_rational,
    )
