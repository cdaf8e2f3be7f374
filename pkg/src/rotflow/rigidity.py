"""Radial-symmetry rigidity diagnostics.

Three computable consequences of the rotating-solution structure are
checked here:

* the radial-symmetry set: radii whose centered circles are level sets of
  the relative stream function phi, estimated from the angular oscillation
  of phi on sampled circles,
* gradient vanishing on non-isolated boundary circles of that set (a
  violation flags a defective input field, since valid constructions can
  only stop being radial across circles where grad(phi) = 0),
* the functional-relation test: wherever grad(phi) does not vanish, the
  pair (phi, lap(phi)) must locally trace the graph of a single continuous
  function; distinct radial pieces trace distinct graphs, so the relation
  collapses locally but becomes multi-valued globally for genuinely
  multi-center flows.

Fields enter through a small protocol: ``phi(points)``, ``gradient(points)``
and ``laplacian(points)`` (see AnalyticField / ImportedFlow in the composer).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .composer import midpoint_grid


class AnalysisError(ValueError):
    """Bad analysis request (empty region, interval too thin, ...)."""


def _circle_points(center, radii, n_angles):
    theta = 2.0 * np.pi * np.arange(n_angles) / n_angles
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    px = center[0] + radii[:, None] * np.cos(theta)
    py = center[1] + radii[:, None] * np.sin(theta)
    return np.stack([px, py], axis=-1)


def _field_scales(fieldv, half_width, n=400):
    """Global oscillation of phi and max |grad phi| on a fixed dense grid.

    The grid is independent of the circle sampling so that membership
    statistics only grow when angular sampling is refined.
    """
    X, Y, _ = midpoint_grid(n, half_width)
    pts = np.stack([X, Y], axis=-1)
    phi = fieldv.phi(pts)
    grad = fieldv.gradient(pts)
    osc = float(np.max(phi) - np.min(phi))
    gmax = float(np.max(np.hypot(grad[..., 0], grad[..., 1])))
    return (osc if osc > 0.0 else 1.0), (gmax if gmax > 0.0 else 1.0)


# ----------------------------------------------------------------------------
# Symmetry set
# ----------------------------------------------------------------------------

@dataclass
class SymmetrySetEstimate:
    center: tuple
    radii: np.ndarray
    sigma: np.ndarray
    member: np.ndarray
    intervals: list
    boundary: list          # (radius, non_isolated) for interval ends in (0, r_max)
    tau: float
    dr: float
    n_angles: int
    oscillation: float

    def gap_intervals(self):
        """Complement of the membership set within [0, r_max]."""
        gaps = []
        for (a, b), (c, d) in zip(self.intervals[:-1], self.intervals[1:]):
            gaps.append((b, c))
        return gaps


def estimate_symmetry_set(fieldv, r_max: float, dr: float, n_angles: int = 256,
                          tau: float = 1e-8, center=(0.0, 0.0)) -> SymmetrySetEstimate:
    """Estimate the set of radii whose circles are level sets of phi.

    For each radius r_i = i*dr the statistic sigma(r_i) is the max-minus-min
    of phi over n_angles equispaced samples on the circle, normalized by the
    global oscillation of phi; membership means sigma <= tau.  r = 0 is
    always a member (a circle of radius zero is a point).  Adjacent members
    merge into closed intervals; a boundary radius is classified
    non-isolated when another member sample lies within 4*dr.
    """
    if n_angles < 64:
        raise AnalysisError("n_angles must be >= 64")
    if dr <= 0.0 or r_max <= dr:
        raise AnalysisError("need 0 < dr < r_max")
    extent = getattr(fieldv, "half_extent", None)
    if extent is not None and r_max > extent:
        raise AnalysisError(f"r_max {r_max} exceeds the field extent {extent}")

    osc, _ = _field_scales(fieldv, r_max)
    radii = dr * np.arange(int(np.floor(r_max / dr)) + 1)
    sigma = np.zeros_like(radii)
    if radii.size > 1:
        pts = _circle_points(center, radii[1:], n_angles)
        vals = fieldv.phi(pts)
        sigma[1:] = (np.max(vals, axis=1) - np.min(vals, axis=1)) / osc
    member = sigma <= tau

    intervals = []
    start = None
    for i, m in enumerate(member):
        if m and start is None:
            start = i
        if start is not None and (not m or i == member.size - 1):
            end = i if (m and i == member.size - 1) else i - 1
            intervals.append((float(radii[start]), float(radii[end])))
            start = None

    member_radii = radii[member]
    boundary = []
    for a, b in intervals:
        for r in (a, b):
            if r <= 0.0 or r >= float(radii[-1]):
                continue
            others = member_radii[np.abs(member_radii - r) > 0.5 * dr]
            non_isolated = bool(np.any(np.abs(others - r) <= 4.0 * dr + 1e-12))
            boundary.append((r, non_isolated))

    return SymmetrySetEstimate(center=tuple(center), radii=radii, sigma=sigma,
                               member=member, intervals=intervals, boundary=boundary,
                               tau=tau, dr=dr, n_angles=n_angles, oscillation=osc)


@dataclass
class BoundaryGradientRow:
    radius: float
    non_isolated: bool
    max_gradient: float
    ratio: float
    flagged: bool


def boundary_gradient_check(fieldv, estimate: SymmetrySetEstimate,
                            tolerance: float = 1e-8,
                            n_angles: int | None = None) -> list:
    """Max |grad phi| on the circles at the estimate's boundary radii.

    A valid rotating construction stops being radial only across circles
    where the gradient vanishes, so a non-isolated boundary radius with
    gradient above tolerance * max|grad phi| is flagged; this screens
    defective imported fields.
    """
    n_angles = n_angles or estimate.n_angles
    r_max = float(estimate.radii[-1])
    _, gmax = _field_scales(fieldv, r_max)
    rows = []
    for radius, non_isolated in estimate.boundary:
        pts = _circle_points(estimate.center, [radius], n_angles)
        grad = fieldv.gradient(pts)
        g = float(np.max(np.hypot(grad[..., 0], grad[..., 1])))
        ratio = g / gmax
        rows.append(BoundaryGradientRow(
            radius=radius,
            non_isolated=non_isolated,
            max_gradient=g,
            ratio=ratio,
            flagged=bool(non_isolated and ratio > tolerance),
        ))
    return rows


# ----------------------------------------------------------------------------
# Radial consistency
# ----------------------------------------------------------------------------

@dataclass
class RadialConsistencyReport:
    interval: tuple
    center: tuple
    max_discrepancy: float
    scale: float

    @property
    def relative(self) -> float:
        return self.max_discrepancy / self.scale if self.scale > 0.0 else 0.0


def radial_consistency(fieldv, interval, center=(0.0, 0.0), dr: float = 0.01,
                       n_samples: int = 1024, n_check_angles: int = 8,
                       spline_order: int = 5) -> RadialConsistencyReport:
    """Check that inside a radial interval the 2D Laplacian matches the
    1D radial operator g'' + g'/r of the extracted profile.

    The profile g(r) = phi on the ray from the center is sampled densely,
    splined, and the 1D operator is compared against lap(phi) sampled at
    several angles on the same circles.
    """
    from scipy.interpolate import make_interp_spline

    a, b = float(interval[0]), float(interval[1])
    if b - a < 4.0 * dr:
        raise AnalysisError(f"interval ({a}, {b}) too thin to extract a profile")
    margin = 0.02 * (b - a)
    r = np.linspace(a + margin, b - margin, n_samples)
    ray = np.stack([center[0] + r, center[1] + np.zeros_like(r)], axis=-1)
    g = fieldv.phi(ray)
    spl = make_interp_spline(r, g, k=spline_order)
    radial_lap = spl.derivative(2)(r) + spl.derivative(1)(r) / r

    inner = slice(8, -8)  # spline endpoint derivatives are less accurate
    pts = _circle_points(center, r[inner], n_check_angles)
    lap2d = fieldv.laplacian(pts)
    disc = np.abs(lap2d - radial_lap[inner][:, None])
    scale = float(np.max(np.abs(lap2d)))
    return RadialConsistencyReport(interval=(a, b), center=tuple(center),
                                   max_discrepancy=float(np.max(disc)),
                                   scale=scale if scale > 0.0 else 1.0)


# ----------------------------------------------------------------------------
# Functional relation
# ----------------------------------------------------------------------------

@dataclass
class AnnulusRegion:
    center: tuple
    r_inner: float
    r_outer: float


@dataclass
class FunctionalRelationReport:
    width: float
    value_range: float
    verdict: str
    n_samples: int
    n_occupied_bins: int
    tau: float
    scatter: np.ndarray = field(repr=False, default=None)  # columns (phi, lap_phi)

    @property
    def single_valued(self) -> bool:
        return self.verdict == "single-valued"

    @property
    def normalized_width(self) -> float:
        return self.width / self.value_range if self.value_range > 0.0 else 0.0


def _vector_bisect(fieldv, center, lo, hi, levels, n_iter=80):
    """Solve phi(center + r e_x) = level on the brackets [lo, hi] per entry."""
    def ray_phi(r):
        pts = np.stack([center[0] + r, center[1] + np.zeros_like(r)], axis=-1)
        return fieldv.phi(pts)

    flo = ray_phi(lo) - levels
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        fmid = ray_phi(mid) - levels
        take_lo = (flo * fmid) > 0.0
        lo = np.where(take_lo, mid, lo)
        flo = np.where(take_lo, fmid, flo)
        hi = np.where(take_lo, hi, mid)
    return 0.5 * (lo + hi)


def functional_relation_test(fieldv, regions, n_bins: int = 256,
                             n_angles: int = 256,
                             gradient_fraction: float = 1e-6,
                             tau: float = 1e-6,
                             transect_samples: int = 4096,
                             r_cap: float | None = None) -> FunctionalRelationReport:
    """Test single-valuedness of the map phi -> lap(phi) over annular regions.

    phi values are binned (n_bins over the observed range, after discarding
    points with |grad phi| below gradient_fraction * max|grad phi|), and the
    width W is the largest spread of lap(phi) within a bin.  Samples are
    taken on circles at radii where the radial transect of each region
    crosses the bin-center levels; a monotone radial piece contributes one
    level circle per bin, so W collapses to roundoff when the relation is a
    function, while distinct radial pieces whose phi ranges overlap populate
    shared bins with distinct lap(phi) values and inflate W.

    Run with a single region (the locality statement) or with all regions
    of a flow (the global statement).
    """
    if not regions:
        raise AnalysisError("no regions to test")
    caps = [r.r_outer if np.isfinite(r.r_outer) else r_cap for r in regions]
    if any(c is None for c in caps):
        raise AnalysisError("unbounded region requires r_cap")

    half = max(max(abs(r.center[0]), abs(r.center[1])) + c for r, c in zip(regions, caps))
    _, gmax = _field_scales(fieldv, half)
    gthr = gradient_fraction * gmax

    transects = []
    phis = []
    for region, cap in zip(regions, caps):
        span = cap - region.r_inner
        rr = region.r_inner + span * np.linspace(1e-4, 1.0 - 1e-4, transect_samples)
        pts = np.stack([region.center[0] + rr,
                        region.center[1] + np.zeros_like(rr)], axis=-1)
        grad = fieldv.gradient(pts)
        keep = np.hypot(grad[..., 0], grad[..., 1]) > gthr
        transects.append((region, rr, fieldv.phi(pts), keep))
        if np.any(keep):
            phis.append(fieldv.phi(pts)[keep])
    if not phis:
        raise AnalysisError("empty region after gradient filtering")

    phi_lo = min(float(np.min(p)) for p in phis)
    phi_hi = max(float(np.max(p)) for p in phis)
    if phi_hi <= phi_lo:
        raise AnalysisError("degenerate phi range after gradient filtering")
    width = (phi_hi - phi_lo) / n_bins
    levels = phi_lo + width * (np.arange(n_bins) + 0.5)

    phi_samples = []
    lap_samples = []
    for region, rr, phi_t, keep in transects:
        diff = phi_t[:, None] - levels[None, :]
        sign_change = diff[:-1, :] * diff[1:, :] < 0.0
        valid = keep[:-1] & keep[1:]
        idx_r, idx_l = np.nonzero(sign_change & valid[:, None])
        if idx_r.size == 0:
            continue
        roots = _vector_bisect(fieldv, region.center,
                               rr[idx_r], rr[idx_r + 1], levels[idx_l])
        pts = _circle_points(region.center, roots, n_angles)
        gr = fieldv.gradient(pts)
        ok = np.hypot(gr[..., 0], gr[..., 1]) > gthr
        phi_c = fieldv.phi(pts)
        lap_c = fieldv.laplacian(pts)
        phi_samples.append(phi_c[ok])
        lap_samples.append(lap_c[ok])

    if not phi_samples or sum(p.size for p in phi_samples) == 0:
        raise AnalysisError("empty region after gradient filtering")
    phi_all = np.concatenate([p.ravel() for p in phi_samples])
    lap_all = np.concatenate([l.ravel() for l in lap_samples])

    bins = np.clip(((phi_all - phi_lo) / width).astype(int), 0, n_bins - 1)
    bmax = np.full(n_bins, -np.inf)
    bmin = np.full(n_bins, np.inf)
    np.maximum.at(bmax, bins, lap_all)
    np.minimum.at(bmin, bins, lap_all)
    counts = np.bincount(bins, minlength=n_bins)
    occupied = counts >= 2
    w = float(np.max(bmax[occupied] - bmin[occupied])) if np.any(occupied) else 0.0
    value_range = float(np.max(lap_all) - np.min(lap_all))

    verdict = "single-valued" if w <= tau * value_range else "multi-valued"
    return FunctionalRelationReport(
        width=w,
        value_range=value_range,
        verdict=verdict,
        n_samples=int(phi_all.size),
        n_occupied_bins=int(np.sum(occupied)),
        tau=tau,
        scatter=np.column_stack([phi_all, lap_all]),
    )


def regions_from_spec(spec, r_cap_factor: float = 2.5):
    """Annular regions of a FlowSpec for the functional-relation test."""
    regions = [AnnulusRegion(b.center, 0.0, b.profile.support_radius)
               for b in spec.bumps]
    if spec.angular_velocity != 0.0:
        regions.append(AnnulusRegion((0.0, 0.0), spec.gluing_radius,
                                     r_cap_factor * spec.gluing_radius))
    return regions


# ----------------------------------------------------------------------------
# Imported-field structure verdict
# ----------------------------------------------------------------------------

@dataclass
class ImportedStructureReport:
    verdict: str
    estimates: list
    uncovered_fraction: float


def imported_local_structure(fieldv, r_max: float, dr: float,
                             n_angles: int = 256, tau: float = 1e-8,
                             centers=((0.0, 0.0),),
                             gradient_fraction: float = 1e-6) -> ImportedStructureReport:
    """Classify an imported field by scanning circles about candidate centers.

    Every point where the gradient is above threshold must lie on a member
    circle of some candidate center for the field to count as locally
    radial at the sampling resolution.
    """
    estimates = [estimate_symmetry_set(fieldv, r_max, dr, n_angles, tau, c)
                 for c in centers]
    _, gmax = _field_scales(fieldv, r_max)
    X, Y, _ = midpoint_grid(256, r_max / np.sqrt(2.0))
    pts = np.stack([X, Y], axis=-1)
    grad = fieldv.gradient(pts)
    active = np.hypot(grad[..., 0], grad[..., 1]) > gradient_fraction * gmax
    covered = np.zeros_like(active)
    for est in estimates:
        rr = np.hypot(X - est.center[0], Y - est.center[1])
        member_mask = np.zeros_like(active)
        for a, b in est.intervals:
            member_mask |= (rr >= a - 0.5 * est.dr) & (rr <= b + 0.5 * est.dr)
        covered |= member_mask
    bad = active & ~covered
    frac = float(np.sum(bad)) / max(1, int(np.sum(active)))
    if not np.any(active):
        verdict = "radial (trivially: vanishing gradient)"
    elif frac == 0.0:
        verdict = "locally radial (numerically)"
    else:
        verdict = "not locally radial (numerically)"
    return ImportedStructureReport(verdict=verdict, estimates=estimates,
                                   uncovered_fraction=frac)
