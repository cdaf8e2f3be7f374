"""Planar field assembly by gluing radial bumps to a rigid-rotation exterior.

A flow is specified by an angular velocity Omega, a gluing radius R and a
list of radial bumps at pairwise disjoint centers strictly inside B_R(0).
With chi the plateau cutoff, Q(x) = |x|^2 / 2 and phi_bar the bump
superposition, the relative stream function is

    phi(x) = chi(|x|/R) * phi_bar(x) - (1 - chi(|x|/R)) * Omega * Q(x)
           = chi(|x|/R) * (phi_bar(x) + Omega Q(x)) - Omega Q(x),

so the full stream function psi = phi + Omega*Q = chi * (phi_bar + Omega*Q)
is compactly supported in B_2R.  Velocity and vorticity follow as

    v = perp_grad(phi) + Omega * x_perp,      x_perp = (-x2, x1),
    w = lap(phi) + 2 * Omega,

and the field solves the steady rotating-frame transport equation exactly:
(v - Omega x_perp) . grad(w) = perp_grad(phi) . grad(lap(phi)) = 0, because
phi is radial about some center wherever its gradient does not vanish.

All derivatives up to third order are assembled analytically (chain rule
through the cutoff and each radial profile).  Outside B_2R the velocity and
vorticity cancel to exact floating-point zeros, and in the gaps between
bumps phi and its derivatives are exact zeros.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .profiles import BumpProfile, RadialProfile, TabulatedProfile, cutoff_jet


class FlowSpecError(ValueError):
    """Invalid construction recipe (overlap, support escaping the ball, ...)."""


# ----------------------------------------------------------------------------
# Specification
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Bump:
    center: tuple[float, float]
    profile: RadialProfile

    def as_config(self) -> dict:
        cfg = {"center": [float(self.center[0]), float(self.center[1])]}
        cfg.update(self.profile.as_config())
        return cfg


@dataclass(frozen=True)
class FlowSpec:
    """Construction recipe: rotation rate, gluing radius, bump placements."""

    angular_velocity: float
    gluing_radius: float
    bumps: tuple[Bump, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "bumps", tuple(self.bumps))
        if self.gluing_radius <= 0.0:
            raise FlowSpecError("gluing radius must be positive")
        for b in self.bumps:
            reach = float(np.hypot(*b.center)) + b.profile.support_radius
            if not reach < self.gluing_radius:
                raise FlowSpecError(
                    f"bump at {b.center} with support radius "
                    f"{b.profile.support_radius} is not strictly inside the "
                    f"gluing ball of radius {self.gluing_radius}"
                )
        for i, bi in enumerate(self.bumps):
            for bj in self.bumps[i + 1:]:
                dist = float(np.hypot(bi.center[0] - bj.center[0],
                                      bi.center[1] - bj.center[1]))
                if not dist > bi.profile.support_radius + bj.profile.support_radius:
                    raise FlowSpecError(
                        f"disjointness violated: bump supports at {bi.center} "
                        f"and {bj.center} overlap"
                    )

    @property
    def outer_radius(self) -> float:
        """Radius 2R beyond which velocity and vorticity vanish identically."""
        return 2.0 * self.gluing_radius

    def as_config(self) -> dict:
        return {
            "angular_velocity": float(self.angular_velocity),
            "gluing_radius": float(self.gluing_radius),
            "bumps": [b.as_config() for b in self.bumps],
        }


def spec_from_config(cfg: dict) -> FlowSpec:
    bumps = []
    for bc in cfg.get("bumps", []):
        kind = bc.get("kind", "bump")
        if kind == "bump":
            profile: RadialProfile = BumpProfile(
                amplitude=float(bc["amplitude"]),
                support_radius=float(bc["support_radius"]),
                exponent=int(bc["exponent"]),
            )
        elif kind == "table":
            if "table" in bc:
                profile = TabulatedProfile.from_text(bc["table"], order=int(bc.get("order", 5)))
            else:
                profile = TabulatedProfile(bc["radii"], bc["values"], order=int(bc.get("order", 5)))
        else:
            raise FlowSpecError(f"unknown profile kind {kind!r}")
        bumps.append(Bump(center=(float(bc["center"][0]), float(bc["center"][1])), profile=profile))
    return FlowSpec(
        angular_velocity=float(cfg["angular_velocity"]),
        gluing_radius=float(cfg["gluing_radius"]),
        bumps=tuple(bumps),
    )


# ----------------------------------------------------------------------------
# Jet assembly
# ----------------------------------------------------------------------------

_JET_KEYS_BY_ORDER = {
    0: ("value",),
    1: ("value", "gx", "gy"),
    2: ("value", "gx", "gy", "hxx", "hxy", "hyy"),
    3: ("value", "gx", "gy", "hxx", "hxy", "hyy", "txxx", "txxy", "txyy", "tyyy"),
}


@dataclass
class FieldJet:
    """Pointwise derivatives of a scalar planar field up to third order."""

    value: np.ndarray
    gx: np.ndarray = None
    gy: np.ndarray = None
    hxx: np.ndarray = None
    hxy: np.ndarray = None
    hyy: np.ndarray = None
    txxx: np.ndarray = None
    txxy: np.ndarray = None
    txyy: np.ndarray = None
    tyyy: np.ndarray = None

    @property
    def laplacian(self):
        return self.hxx + self.hyy

    @property
    def grad_laplacian(self):
        return self.txxx + self.txyy, self.txxy + self.tyyy


def _radial_cartesian_jet(a0, a1, a2, a3, d1, d2, order):
    """Cartesian jet of a radial function from its radial jet coefficients."""
    jet = {"value": a0}
    if order >= 1:
        jet["gx"] = a1 * d1
        jet["gy"] = a1 * d2
    if order >= 2:
        jet["hxx"] = a1 + a2 * d1 * d1
        jet["hxy"] = a2 * d1 * d2
        jet["hyy"] = a1 + a2 * d2 * d2
    if order >= 3:
        jet["txxx"] = d1 * (3.0 * a2 + a3 * d1 * d1)
        jet["txxy"] = d2 * (a2 + a3 * d1 * d1)
        jet["txyy"] = d1 * (a2 + a3 * d2 * d2)
        jet["tyyy"] = d2 * (3.0 * a2 + a3 * d2 * d2)
    return jet


def _leibniz(c, w, order):
    """Jet of the product c*w from the jets of the factors."""
    out = {"value": c["value"] * w["value"]}
    if order >= 1:
        out["gx"] = c["gx"] * w["value"] + c["value"] * w["gx"]
        out["gy"] = c["gy"] * w["value"] + c["value"] * w["gy"]
    if order >= 2:
        out["hxx"] = c["hxx"] * w["value"] + 2.0 * c["gx"] * w["gx"] + c["value"] * w["hxx"]
        out["hyy"] = c["hyy"] * w["value"] + 2.0 * c["gy"] * w["gy"] + c["value"] * w["hyy"]
        out["hxy"] = (c["hxy"] * w["value"] + c["gx"] * w["gy"]
                      + c["gy"] * w["gx"] + c["value"] * w["hxy"])
    if order >= 3:
        out["txxx"] = (c["txxx"] * w["value"] + 3.0 * c["hxx"] * w["gx"]
                       + 3.0 * c["gx"] * w["hxx"] + c["value"] * w["txxx"])
        out["tyyy"] = (c["tyyy"] * w["value"] + 3.0 * c["hyy"] * w["gy"]
                       + 3.0 * c["gy"] * w["hyy"] + c["value"] * w["tyyy"])
        out["txxy"] = (c["txxy"] * w["value"] + c["hxx"] * w["gy"]
                       + 2.0 * c["hxy"] * w["gx"] + 2.0 * c["gx"] * w["hxy"]
                       + c["gy"] * w["hxx"] + c["value"] * w["txxy"])
        out["txyy"] = (c["txyy"] * w["value"] + c["hyy"] * w["gx"]
                       + 2.0 * c["hxy"] * w["gy"] + 2.0 * c["gy"] * w["hxy"]
                       + c["gx"] * w["hyy"] + c["value"] * w["txyy"])
    return out


def _cutoff_radial_jets(r, gluing_radius):
    """Radial jet coefficients of C(r) = chi(r / R) about the origin.

    chi and all its derivatives vanish identically off the transition band
    R < r < 2R, so the guarded divisions below never see r = 0 there.
    """
    R = gluing_radius
    c0, c1, c2, c3 = cutoff_jet(r / R)
    C1 = c1 / R
    C2 = c2 / R**2
    C3 = c3 / R**3
    active = C1 != 0.0
    for arr in (C2, C3):
        active |= arr != 0.0
    rs = np.where(active, r, 1.0)
    b1 = np.where(active, C1 / rs, 0.0)
    b2 = np.where(active, (C2 - b1) / rs**2, 0.0)
    b3 = np.where(active, (C3 - 3.0 * b2 * rs) / rs**3, 0.0)
    return c0, b1, b2, b3


def phi_jet(spec: FlowSpec, x, y, order: int = 3) -> FieldJet:
    """Relative stream function phi and derivatives up to the given order.

    Assembles phi = C * W - Omega*Q with W = phi_bar + Omega*Q via the
    Leibniz rule, where C is the cutoff chi(|x|/R) and Q = |x|^2/2.  The
    bump supports sit on the cutoff plateau, so every cross term in the
    product rule multiplies an exact zero and the assembly is exact in the
    plateau, gap and far-field regions.
    """
    if order not in (0, 1, 2, 3):
        raise ValueError("order must be 0..3")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    omega = spec.angular_velocity

    r2 = x * x + y * y
    q = {"value": 0.5 * r2, "gx": x, "gy": y,
         "hxx": np.ones_like(x), "hxy": np.zeros_like(x), "hyy": np.ones_like(x),
         "txxx": np.zeros_like(x), "txxy": np.zeros_like(x),
         "txyy": np.zeros_like(x), "tyyy": np.zeros_like(x)}

    keys = _JET_KEYS_BY_ORDER[order]
    w = {k: omega * q[k] for k in keys}
    for bump in spec.bumps:
        d1 = x - bump.center[0]
        d2 = y - bump.center[1]
        rr = np.sqrt(d1 * d1 + d2 * d2)
        a0, a1, a2, a3 = bump.profile.radial_jets(rr)
        bj = _radial_cartesian_jet(a0, a1, a2, a3, d1, d2, order)
        for k in keys:
            w[k] = w[k] + bj[k]

    r = np.sqrt(r2)
    c0, b1, b2, b3 = _cutoff_radial_jets(r, spec.gluing_radius)
    c = _radial_cartesian_jet(c0, b1, b2, b3, x, y, order)

    p = _leibniz(c, w, order)
    phi = {k: p[k] - omega * q[k] for k in keys}
    return FieldJet(**phi)


# ----------------------------------------------------------------------------
# Field evaluation
# ----------------------------------------------------------------------------

@dataclass
class FieldSample:
    """Evaluated flow quantities at a set of points with provenance."""

    points: np.ndarray
    phi: np.ndarray
    grad: np.ndarray
    laplacian: np.ndarray
    velocity: np.ndarray
    vorticity: np.ndarray
    provenance: str


def _split_points(points):
    pts = np.asarray(points, dtype=float)
    if pts.shape[-1] != 2:
        raise ValueError("points must have trailing dimension 2")
    return pts[..., 0], pts[..., 1]


class AnalyticField:
    """Pointwise evaluator for a FlowSpec with exact derivatives."""

    provenance = "analytic"

    def __init__(self, spec: FlowSpec):
        self.spec = spec

    def phi(self, points):
        x, y = _split_points(points)
        return phi_jet(self.spec, x, y, order=0).value

    def gradient(self, points):
        x, y = _split_points(points)
        jet = phi_jet(self.spec, x, y, order=1)
        return np.stack([jet.gx, jet.gy], axis=-1)

    def laplacian(self, points):
        x, y = _split_points(points)
        return phi_jet(self.spec, x, y, order=2).laplacian

    def velocity(self, points):
        x, y = _split_points(points)
        jet = phi_jet(self.spec, x, y, order=1)
        om = self.spec.angular_velocity
        return np.stack([-jet.gy - om * y, jet.gx + om * x], axis=-1)

    def vorticity(self, points):
        x, y = _split_points(points)
        jet = phi_jet(self.spec, x, y, order=2)
        return jet.laplacian + 2.0 * self.spec.angular_velocity

    def sample(self, points) -> FieldSample:
        x, y = _split_points(points)
        jet = phi_jet(self.spec, x, y, order=2)
        om = self.spec.angular_velocity
        vel = np.stack([-jet.gy - om * y, jet.gx + om * x], axis=-1)
        return FieldSample(
            points=np.asarray(points, dtype=float),
            phi=jet.value,
            grad=np.stack([jet.gx, jet.gy], axis=-1),
            laplacian=jet.laplacian,
            velocity=vel,
            vorticity=jet.laplacian + 2.0 * om,
            provenance=self.provenance,
        )


def velocity(spec: FlowSpec, points):
    """Velocity v = perp_grad(phi) + Omega x_perp; exactly 0 for |x| >= 2R."""
    return AnalyticField(spec).velocity(points)


def vorticity(spec: FlowSpec, points):
    """Vorticity w = lap(phi) + 2 Omega; 0 outside B_2R, 2 Omega in gaps."""
    return AnalyticField(spec).vorticity(points)


def stream_function(spec: FlowSpec, points):
    """Relative stream function phi, its gradient and Laplacian."""
    x, y = _split_points(points)
    jet = phi_jet(spec, x, y, order=2)
    return jet.value, np.stack([jet.gx, jet.gy], axis=-1), jet.laplacian


# ----------------------------------------------------------------------------
# Grids and residuals
# ----------------------------------------------------------------------------

def midpoint_grid(n: int, half_width: float):
    """Cell-centered n x n grid on [-half_width, half_width]^2."""
    h = 2.0 * half_width / n
    coords = -half_width + (np.arange(n) + 0.5) * h
    X, Y = np.meshgrid(coords, coords, indexing="ij")
    return X, Y, h


@dataclass
class ResidualReport:
    max_abs: float
    rms_abs: float
    normalizer: float
    normalized_max: float
    normalized_rms: float
    field: np.ndarray | None = None

    def summary(self) -> dict:
        return {
            "max_abs": self.max_abs,
            "rms_abs": self.rms_abs,
            "normalizer": self.normalizer,
            "normalized_max": self.normalized_max,
            "normalized_rms": self.normalized_rms,
        }


def _residual_from_jet(jet: FieldJet, keep_field: bool) -> ResidualReport:
    gvx, gvy = jet.grad_laplacian
    res = -jet.gy * gvx + jet.gx * gvy
    if res.size == 0:
        raise ValueError("empty grid")
    max_pg = float(np.max(np.hypot(jet.gx, jet.gy)))
    max_gl = float(np.max(np.hypot(gvx, gvy)))
    normalizer = max_pg * max_gl
    max_abs = float(np.max(np.abs(res)))
    rms_abs = float(np.sqrt(np.mean(res * res)))
    if normalizer == 0.0:
        nmax = nrms = 0.0
    else:
        nmax = max_abs / normalizer
        nrms = rms_abs / normalizer
    return ResidualReport(max_abs, rms_abs, normalizer, nmax, nrms,
                          res if keep_field else None)


def residual_rotating(spec: FlowSpec, x, y, keep_field: bool = False) -> ResidualReport:
    """Pointwise residual perp_grad(phi) . grad(lap(phi)) on given points.

    Max and rms are reported both raw and normalized by
    max|perp_grad(phi)| * max|grad(lap(phi))| over the grid (0/0 -> 0).
    """
    jet = phi_jet(spec, x, y, order=3)
    return _residual_from_jet(jet, keep_field)


def grid_rotation_residual(phi_values: np.ndarray, spacing: float,
                           keep_field: bool = False) -> ResidualReport:
    """Rotation residual from phi samples on a uniform grid.

    Independent finite-difference route: 4th-order centered stencils produce
    grad(phi), lap(phi) and grad(lap(phi)); the result lives on the interior
    inset by 4 cells.  Used for imported grids and as a discretization
    oracle against the analytic assembly.
    """
    gx = _fd1(phi_values, spacing, axis=0)
    gy = _fd1(phi_values, spacing, axis=1)
    lap = _fd2(phi_values, spacing, axis=0) + _fd2(phi_values, spacing, axis=1)
    gvx = _fd1(lap, spacing, axis=0)
    gvy = _fd1(lap, spacing, axis=1)
    gx_i, gy_i = gx[2:-2, 2:-2], gy[2:-2, 2:-2]
    res = -gy_i * gvx + gx_i * gvy
    if res.size == 0:
        raise ValueError("grid too small for the finite-difference stencil")
    max_pg = float(np.max(np.hypot(gx_i, gy_i)))
    max_gl = float(np.max(np.hypot(gvx, gvy)))
    normalizer = max_pg * max_gl
    max_abs = float(np.max(np.abs(res)))
    rms_abs = float(np.sqrt(np.mean(res * res)))
    if normalizer == 0.0:
        nmax = nrms = 0.0
    else:
        nmax = max_abs / normalizer
        nrms = rms_abs / normalizer
    return ResidualReport(max_abs, rms_abs, normalizer, nmax, nrms,
                          res if keep_field else None)


def _fd1(f, h, axis):
    """4th-order centered first derivative, valid region inset by 2."""
    s = [slice(2, -2)] * f.ndim

    def sl(offset):
        idx = list(s)
        idx[axis] = slice(2 + offset, f.shape[axis] - 2 + offset or None)
        return f[tuple(idx)]

    return (-sl(2) + 8.0 * sl(1) - 8.0 * sl(-1) + sl(-2)) / (12.0 * h)


def _fd2(f, h, axis):
    """4th-order centered second derivative, valid region inset by 2."""
    s = [slice(2, -2)] * f.ndim

    def sl(offset):
        idx = list(s)
        idx[axis] = slice(2 + offset, f.shape[axis] - 2 + offset or None)
        return f[tuple(idx)]

    return (-sl(2) + 16.0 * sl(1) - 30.0 * sl(0) + 16.0 * sl(-1) - sl(-2)) / (12.0 * h * h)


def grid_divergence(vx: np.ndarray, vy: np.ndarray, spacing: float) -> np.ndarray:
    """6th-order centered finite-difference divergence (interior inset 3)."""
    w = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / (60.0 * spacing)

    def deriv(f, axis):
        out = np.zeros((f.shape[0] - 6, f.shape[1] - 6))
        for j, c in enumerate(w):
            if c == 0.0:
                continue
            if axis == 0:
                out += c * f[j:f.shape[0] - 6 + j, 3:-3]
            else:
                out += c * f[3:-3, j:f.shape[1] - 6 + j]
        return out

    return deriv(vx, 0) + deriv(vy, 1)


def vorticity_integral(spec: FlowSpec, n: int = 1024, extent_factor: float = 2.5):
    """Midpoint quadrature of the vorticity and of |vorticity| over a box.

    The box is [-extent_factor*R, extent_factor*R]^2, which contains the
    support B_2R whenever extent_factor > 2.
    """
    X, Y, h = midpoint_grid(n, extent_factor * spec.gluing_radius)
    w = phi_jet(spec, X, Y, order=2).laplacian + 2.0 * spec.angular_velocity
    return float(np.sum(w) * h * h), float(np.sum(np.abs(w)) * h * h)


# ----------------------------------------------------------------------------
# Local radial structure
# ----------------------------------------------------------------------------

@dataclass
class AnnulusReport:
    center: tuple[float, float]
    r_inner: float
    r_outer: float
    sigma_max: float
    verified: bool


@dataclass
class LocalStructureReport:
    annuli: list
    verdict: str
    critical_set_note: str

    @property
    def all_verified(self) -> bool:
        return all(a.verified for a in self.annuli)


def _circle_oscillation(field, center, radii, n_angles):
    radii = np.asarray(radii, dtype=float)
    theta = 2.0 * np.pi * np.arange(n_angles) / n_angles
    px = center[0] + radii[:, None] * np.cos(theta)
    py = center[1] + radii[:, None] * np.sin(theta)
    vals = field.phi(np.stack([px, py], axis=-1))
    return np.max(vals, axis=1) - np.min(vals, axis=1)


def global_oscillation(field, half_width: float, n: int = 400) -> float:
    X, Y, _ = midpoint_grid(n, half_width)
    vals = field.phi(np.stack([X, Y], axis=-1))
    return float(np.max(vals) - np.min(vals))


def check_locally_radial(source, n_angles: int = 256, n_radii: int = 16,
                         tolerance: float = 1e-10) -> LocalStructureReport:
    """Report the decomposition of the plane into radial annuli plus the
    critical set, and verify each annulus numerically.

    For a FlowSpec the annuli are known from the construction: one punctured
    disk per bump, plus the exterior region r > R about the origin when the
    flow rotates.  Gap regions, where the gradient vanishes identically,
    belong to the critical set.  Each annulus is verified by sampling the
    angular oscillation of phi on circles about its center (normalized by
    the global oscillation of phi).

    Imported fields carry no structure, so they are scanned about candidate
    centers; see ``rotflow.rigidity`` for the scan itself.
    """
    if not isinstance(source, FlowSpec):
        raise TypeError("check_locally_radial expects a FlowSpec; "
                        "imported grids go through rigidity.estimate_symmetry_set")
    spec = source
    fieldv = AnalyticField(spec)
    r_cap = 2.5 * spec.gluing_radius
    osc = global_oscillation(fieldv, r_cap)
    osc = osc if osc > 0.0 else 1.0

    all_origin = all(b.center[0] == 0.0 and b.center[1] == 0.0 for b in spec.bumps)
    annuli: list[AnnulusReport] = []

    def verified_annulus(center, r_in, r_out):
        hi = r_out if np.isfinite(r_out) else r_cap
        span = hi - r_in
        radii = r_in + span * (np.arange(1, n_radii + 1) / (n_radii + 1))
        sig = _circle_oscillation(fieldv, center, radii, n_angles) / osc
        smax = float(np.max(sig)) if sig.size else 0.0
        return AnnulusReport(tuple(center), r_in, r_out, smax, smax <= tolerance)

    if all_origin:
        annuli.append(verified_annulus((0.0, 0.0), 0.0, np.inf))
        verdict = "radial"
        note = "critical set: isolated critical circles of the radial profile"
    else:
        for b in spec.bumps:
            annuli.append(verified_annulus(b.center, 0.0, b.profile.support_radius))
        if spec.angular_velocity != 0.0:
            annuli.append(verified_annulus((0.0, 0.0), spec.gluing_radius, np.inf))
        verdict = "locally radial, not radial"
        note = ("critical set: gap regions inside the gluing ball where "
                "grad(phi) = 0" + ("" if spec.angular_velocity != 0.0
                                   else ", plus the entire exterior (Omega = 0)"))
    return LocalStructureReport(annuli=annuli, verdict=verdict, critical_set_note=note)


# ----------------------------------------------------------------------------
# Angular-velocity bounds
# ----------------------------------------------------------------------------

@dataclass
class OmegaBoundsReport:
    omega: float
    inf_inner: float
    sup_inner: float
    inf_plane: float
    sup_plane: float
    lower: float
    upper: float
    strict_inclusion: bool
    stationary: bool

    def lines(self) -> list:
        if self.stationary:
            return ["stationary case (Omega = 0); rotation bounds are vacuous",
                    f"vorticity range over the gluing ball: "
                    f"[{self.inf_inner:.6g}, {self.sup_inner:.6g}]"]
        status = "holds" if self.strict_inclusion else "VIOLATED"
        return [
            f"vorticity over gluing ball: [{self.inf_inner:.6g}, {self.sup_inner:.6g}]",
            f"vorticity over sampling box: [{self.inf_plane:.6g}, {self.sup_plane:.6g}]",
            f"strict inclusion Omega in (half inf, half sup) = "
            f"({self.lower:.6g}, {self.upper:.6g}): {status}",
        ]


def omega_bounds_check(spec: FlowSpec, n: int = 600) -> OmegaBoundsReport:
    """Check the strict inclusion Omega in (inf w/2, sup w/2) over B_R.

    The vorticity of a valid construction takes values both above and below
    2*Omega inside the gluing ball (each bump's Laplacian integrates to zero
    without vanishing identically), which places Omega strictly between the
    half-extrema.  Sampled on a grid; also reports plane-wide extrema.
    """
    field = AnalyticField(spec)
    Xb, Yb, _ = midpoint_grid(n, spec.gluing_radius)
    inner = Xb * Xb + Yb * Yb < spec.gluing_radius**2
    w_in = field.vorticity(np.stack([Xb, Yb], axis=-1))[inner]
    Xp, Yp, _ = midpoint_grid(n, 2.5 * spec.gluing_radius)
    w_pl = field.vorticity(np.stack([Xp, Yp], axis=-1))
    lo, hi = 0.5 * float(np.min(w_in)), 0.5 * float(np.max(w_in))
    om = spec.angular_velocity
    return OmegaBoundsReport(
        omega=om,
        inf_inner=float(np.min(w_in)),
        sup_inner=float(np.max(w_in)),
        inf_plane=float(np.min(w_pl)),
        sup_plane=float(np.max(w_pl)),
        lower=lo,
        upper=hi,
        strict_inclusion=bool(lo < om < hi),
        stationary=om == 0.0,
    )


# ----------------------------------------------------------------------------
# Imported fields
# ----------------------------------------------------------------------------

class ImportedMap:
    """Uniform grid of inner stream-function values with spline evaluation.

    The sample must vanish on the outermost grid frame so the gluing stays
    valid.  Derivatives come from the spline (order >= 4); imported data is
    second-class next to the analytic assembly.
    """

    provenance = "imported-grid"

    def __init__(self, values: np.ndarray, x0: float, y0: float,
                 dx: float, dy: float, order: int = 5):
        values = np.asarray(values, dtype=float)
        if values.ndim != 2:
            raise ValueError("imported field must be a 2D grid")
        if order < 4 or order > 5:
            raise ValueError("interpolation order must be 4 or 5")
        frame = np.concatenate([values[0, :], values[-1, :], values[:, 0], values[:, -1]])
        scale = float(np.max(np.abs(values))) or 1.0
        if np.max(np.abs(frame)) > 1e-13 * scale:
            raise ValueError("imported field must vanish on the outermost grid frame")
        self.values = values
        self.x0, self.y0, self.dx, self.dy = float(x0), float(y0), float(dx), float(dy)
        self.order = int(order)
        nx, ny = values.shape
        self.x_nodes = x0 + dx * np.arange(nx)
        self.y_nodes = y0 + dy * np.arange(ny)
        self._spline = RectBivariateSpline(self.x_nodes, self.y_nodes, values,
                                           kx=self.order, ky=self.order, s=0)

    def _ev(self, points, dx=0, dy=0):
        px, py = _split_points(points)
        shape = px.shape
        px = np.clip(px.ravel(), self.x_nodes[0], self.x_nodes[-1])
        py = np.clip(py.ravel(), self.y_nodes[0], self.y_nodes[-1])
        return self._spline.ev(px, py, dx=dx, dy=dy).reshape(shape)

    def phi(self, points):
        return self._ev(points)

    def gradient(self, points):
        return np.stack([self._ev(points, dx=1), self._ev(points, dy=1)], axis=-1)

    def laplacian(self, points):
        return self._ev(points, dx=2) + self._ev(points, dy=2)

    @property
    def half_extent(self) -> float:
        return float(max(abs(self.x_nodes[0]), abs(self.x_nodes[-1]),
                         abs(self.y_nodes[0]), abs(self.y_nodes[-1])))


class ImportedFlow:
    """Glued flow whose inner stream function is an imported grid.

    phi = chi(|x|/R) * (phi_bar + Omega Q) - Omega Q with phi_bar from the
    imported map; derivatives up to second order via the cutoff chain rule.
    """

    provenance = "imported-grid"

    def __init__(self, inner: ImportedMap, angular_velocity: float, gluing_radius: float):
        if gluing_radius <= 0.0:
            raise FlowSpecError("gluing radius must be positive")
        self.inner = inner
        self.angular_velocity = float(angular_velocity)
        self.gluing_radius = float(gluing_radius)

    @property
    def outer_radius(self) -> float:
        return 2.0 * self.gluing_radius

    def _jets(self, points):
        x, y = _split_points(points)
        om = self.angular_velocity
        w0 = self.inner.phi(points) + 0.5 * om * (x * x + y * y)
        g = self.inner.gradient(points)
        wx, wy = g[..., 0] + om * x, g[..., 1] + om * y
        wlap = self.inner.laplacian(points) + 2.0 * om
        r = np.hypot(x, y)
        c0, b1, b2, _ = _cutoff_radial_jets(r, self.gluing_radius)
        cx, cy = b1 * x, b1 * y
        clap = 2.0 * b1 + b2 * r * r
        # Only value/grad/laplacian are needed downstream; assemble directly.
        phi = c0 * w0 - 0.5 * om * (x * x + y * y)
        phix = cx * w0 + c0 * wx - om * x
        phiy = cy * w0 + c0 * wy - om * y
        # lap(c*w) = lap(c) w + 2 grad c . grad w + c lap w, minus Omega*lap(Q)
        wxx_term = clap * w0 + 2.0 * (cx * wx + cy * wy) + c0 * wlap - 2.0 * om
        return phi, phix, phiy, wxx_term

    def phi(self, points):
        return self._jets(points)[0]

    def gradient(self, points):
        _, gx, gy, _ = self._jets(points)
        return np.stack([gx, gy], axis=-1)

    def laplacian(self, points):
        return self._jets(points)[3]

    def velocity(self, points):
        x, y = _split_points(points)
        _, gx, gy, _ = self._jets(points)
        om = self.angular_velocity
        return np.stack([-gy - om * y, gx + om * x], axis=-1)

    def vorticity(self, points):
        return self.laplacian(points) + 2.0 * self.angular_velocity

    def sample(self, points) -> FieldSample:
        phi, gx, gy, lap = self._jets(points)
        x, y = _split_points(points)
        om = self.angular_velocity
        return FieldSample(
            points=np.asarray(points, dtype=float),
            phi=phi,
            grad=np.stack([gx, gy], axis=-1),
            laplacian=lap,
            velocity=np.stack([-gy - om * y, gx + om * x], axis=-1),
            vorticity=lap + 2.0 * om,
            provenance=self.provenance,
        )
