"""One-dimensional radial building blocks.

Everything planar in this package is assembled from radial pieces, so this
module owns the 1D machinery:

* a smooth plateau cutoff chi with chi(t) = 1 for |t| <= 1 and chi(t) = 0
  for |t| >= 2, realized as an exponential partition of unity so that all
  downstream numbers are bit-stable,
* compactly supported polynomial bump profiles A*(1 - (r/rho)^2)^p, which
  are C^(p-1) across the support edge r = rho,
* tabulated radial profiles (spline-backed), including segments produced by
  integrating the radial equation  phi'' + phi'/r + f(phi) = 0.

Profiles expose "radial jets": smooth coefficient functions (a0, a1, a2, a3)
such that for a radial function beta(|x - q|) with d = x - q,

    beta          = a0
    grad          = a1 * d
    Hessian       = a1 * I + a2 * (d outer d)
    third deriv   = a2 * (d_i delta_jk + d_j delta_ik + d_k delta_ij)
                    + a3 * d_i d_j d_k

with a1 = beta'/r, a2 = (beta'' - beta'/r)/r^2, a3 = (beta''' - 3*a2*r)/r^3.
For the closed-form bumps these ratios are polynomials in u = 1 - (r/rho)^2,
so they stay exact at the center and vanish identically outside the support.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import make_interp_spline


class RadialIvpError(RuntimeError):
    """Radial ODE integration failed (step underflow, blow-up, bad f)."""


# ----------------------------------------------------------------------------
# Plateau cutoff
# ----------------------------------------------------------------------------

def _h_jet(s):
    """h(s) = exp(-1/s) for s > 0 (else 0) and its first three derivatives.

    h'   = h / s^2
    h''  = h (1 - 2s) / s^4
    h''' = h (1 - 6s + 6s^2) / s^6
    """
    s = np.asarray(s, dtype=float)
    pos = s > 0.0
    sp = np.where(pos, s, 1.0)
    with np.errstate(over="ignore"):
        h = np.where(pos, np.exp(-1.0 / sp), 0.0)
    h1 = h / sp**2
    h2 = h * (1.0 - 2.0 * sp) / sp**4
    h3 = h * (1.0 - 6.0 * sp + 6.0 * sp**2) / sp**6
    zero = np.zeros_like(h)
    return h, np.where(pos, h1, zero), np.where(pos, h2, zero), np.where(pos, h3, zero)


def cutoff_jet(t):
    """Value and first three derivatives of the plateau cutoff chi(t).

    chi(t) = h(2 - |t|) / (h(2 - |t|) + h(|t| - 1)) with h(s) = exp(-1/s)
    for s > 0 and h(s) = 0 otherwise.  chi is even, identically 1 on
    [-1, 1] and identically 0 outside (-2, 2); the plateau values and all
    derivatives there are exact zeros/ones, not approximations.
    """
    t = np.asarray(t, dtype=float)
    s = np.abs(t)
    sign = np.where(t < 0.0, -1.0, 1.0)

    chi = np.where(s <= 1.0, 1.0, 0.0)
    d1 = np.zeros_like(chi)
    d2 = np.zeros_like(chi)
    d3 = np.zeros_like(chi)

    mid = (s > 1.0) & (s < 2.0)
    if np.any(mid):
        sm = s[mid]
        n, n1, n2, n3 = _h_jet(2.0 - sm)
        n1, n3 = -n1, -n3
        g, g1, g2, g3 = _h_jet(sm - 1.0)
        d = n + g
        dp = n1 + g1
        dpp = n2 + g2
        dppp = n3 + g3
        e = 1.0 / d
        c0 = n * e
        c1 = (n1 - c0 * dp) * e
        c2 = (n2 - c0 * dpp - 2.0 * c1 * dp) * e
        c3 = (n3 - c0 * dppp - 3.0 * c1 * dpp - 3.0 * c2 * dp) * e
        chi[mid] = c0
        d1[mid] = c1
        d2[mid] = c2
        d3[mid] = c3

    return chi, sign * d1, d2, sign * d3


def cutoff_eval(t):
    """chi(t) together with its first and second derivatives."""
    c, c1, c2, _ = cutoff_jet(t)
    return c, c1, c2


# ----------------------------------------------------------------------------
# Radial profiles
# ----------------------------------------------------------------------------

class RadialProfile:
    """Common interface of compactly supported radial profiles.

    Subclasses provide ``radial_jets`` and declare a support radius; the
    profile and its first derivative vanish for r >= support_radius.
    """

    support_radius: float
    kind: str

    def radial_jets(self, r):
        raise NotImplementedError

    def _check_radius(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < 0.0):
            raise ValueError("radius must be nonnegative")
        return r

    def eval(self, r):
        """Return (beta, beta', beta'') at radius r >= 0."""
        r = self._check_radius(r)
        a0, a1, a2, _ = self.radial_jets(r)
        return a0, a1 * r, a1 + a2 * r * r

    def derivative3(self, r):
        """Third radial derivative beta'''(r)."""
        r = self._check_radius(r)
        _, _, a2, a3 = self.radial_jets(r)
        return 3.0 * a2 * r + a3 * r**3

    def laplacian(self, r):
        """Planar Laplacian beta'' + beta'/r of the radial profile.

        Evaluated through the smooth ratio a1 = beta'/r, so the r -> 0
        limit 2*beta''(0) comes out exactly.
        """
        r = self._check_radius(r)
        _, a1, a2, _ = self.radial_jets(r)
        return 2.0 * a1 + a2 * r * r

    def as_config(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class BumpProfile(RadialProfile):
    """Closed-form bump beta(r) = A * (1 - (r/rho)^2)^p on [0, rho], else 0.

    The profile is C^(p-1) across r = rho.  Radial jets are polynomials in
    u = 1 - (r/rho)^2:

        a0 =  A u^p
        a1 = -(2Ap/rho^2) u^(p-1)
        a2 =  (4Ap(p-1)/rho^4) u^(p-2)
        a3 = -(8Ap(p-1)(p-2)/rho^6) u^(p-3)
    """

    amplitude: float
    support_radius: float
    exponent: int
    kind: str = field(default="bump", init=False)

    def __post_init__(self):
        if self.support_radius <= 0.0:
            raise ValueError("support_radius must be positive")
        if int(self.exponent) != self.exponent or self.exponent < 3:
            raise ValueError("exponent must be an integer >= 3")
        object.__setattr__(self, "exponent", int(self.exponent))

    def radial_jets(self, r):
        r = np.asarray(r, dtype=float)
        a, rho, p = self.amplitude, self.support_radius, self.exponent
        u = 1.0 - (r / rho) ** 2
        inside = u > 0.0
        uc = np.where(inside, u, 0.0)
        u_pm3 = uc ** (p - 3)
        u_pm2 = u_pm3 * uc
        u_pm1 = u_pm2 * uc
        u_p = u_pm1 * uc
        zero = np.zeros_like(uc)
        a0 = np.where(inside, a * u_p, zero)
        a1 = np.where(inside, (-2.0 * a * p / rho**2) * u_pm1, zero)
        a2 = np.where(inside, (4.0 * a * p * (p - 1) / rho**4) * u_pm2, zero)
        a3 = np.where(inside, (-8.0 * a * p * (p - 1) * (p - 2) / rho**6) * u_pm3, zero)
        return a0, a1, a2, a3

    def as_config(self) -> dict:
        return {
            "kind": "bump",
            "amplitude": self.amplitude,
            "support_radius": self.support_radius,
            "exponent": self.exponent,
        }


class TabulatedProfile(RadialProfile):
    """Radial profile backed by a 1D sample table and a local spline.

    Values outside [radii[0], radii[-1]] evaluate to zero (compact-support
    semantics; segments from the radial IVP simply end at their interval).
    Interpolation order >= 4 keeps second derivatives accurate; order 5 is
    required when third derivatives feed the rotation residual.
    """

    kind = "table"

    def __init__(self, radii, values, order: int = 5):
        radii = np.asarray(radii, dtype=float)
        values = np.asarray(values, dtype=float)
        if radii.ndim != 1 or radii.shape != values.shape:
            raise ValueError("radii and values must be matching 1D arrays")
        if np.any(np.diff(radii) <= 0.0):
            raise ValueError("radii must be strictly increasing")
        if radii[0] < 0.0:
            raise ValueError("radii must be nonnegative")
        if order < 4:
            raise ValueError("interpolation order must be >= 4")
        if radii.size <= order:
            raise ValueError("table too short for the interpolation order")
        self.radii = radii
        self.values = values
        self.order = int(order)
        self.support_radius = float(radii[-1])
        self.inner_radius = float(radii[0])
        self._spline = make_interp_spline(radii, values, k=self.order)
        self._derivs = [self._spline.derivative(m) for m in (1, 2, 3)]

    @classmethod
    def from_text(cls, path, order: int = 5) -> "TabulatedProfile":
        """Load from two-column text (r, beta) with strictly increasing r."""
        table = np.loadtxt(path, dtype=float)
        if table.ndim != 2 or table.shape[1] != 2:
            raise ValueError(f"{path}: expected two columns (r, beta)")
        return cls(table[:, 0], table[:, 1], order=order)

    def _raw(self, r):
        r = np.asarray(r, dtype=float)
        inside = (r >= self.inner_radius) & (r <= self.support_radius)
        rc = np.clip(r, self.inner_radius, self.support_radius)
        b0 = np.where(inside, self._spline(rc), 0.0)
        b1 = np.where(inside, self._derivs[0](rc), 0.0)
        b2 = np.where(inside, self._derivs[1](rc), 0.0)
        b3 = np.where(inside, self._derivs[2](rc), 0.0)
        return b0, b1, b2, b3

    def radial_jets(self, r):
        r = np.asarray(r, dtype=float)
        b0, b1, b2, b3 = self._raw(r)
        # Guarded ratios; below r_eps fall back to the symmetric-profile
        # limits a1 -> beta''(0), a2 -> beta''''(0)/3, a3 -> 0.
        r_eps = 1e-4 * max(self.support_radius, 1.0)
        small = r < r_eps
        rs = np.where(small, 1.0, r)
        a1 = np.where(small, b2, b1 / rs)
        a2 = np.where(small, self._fourth_at_zero() / 3.0, (b2 - a1) / rs**2)
        a3 = np.where(small, 0.0, (b3 - 3.0 * a2 * rs) / rs**3)
        return b0, a1, a2, a3

    def _fourth_at_zero(self) -> float:
        if self.order >= 4 and self.inner_radius == 0.0:
            return float(self._spline.derivative(4)(0.0))
        return 0.0

    def eval(self, r):
        r = self._check_radius(r)
        b0, b1, b2, _ = self._raw(r)
        return b0, b1, b2

    def derivative3(self, r):
        r = self._check_radius(r)
        return self._raw(r)[3]

    def laplacian(self, r):
        r = self._check_radius(r)
        _, a1, a2, _ = self.radial_jets(r)
        return 2.0 * a1 + a2 * r * r

    def as_config(self) -> dict:
        return {
            "kind": "table",
            "order": self.order,
            "radii": [float(v) for v in self.radii],
            "values": [float(v) for v in self.values],
        }


# ----------------------------------------------------------------------------
# Radial initial value problem
# ----------------------------------------------------------------------------

@dataclass
class RadialIvpProblem:
    """Data for the radial equation phi'' + phi'/r + f(phi) = 0.

    The interval (r0 - half_width, r0 + half_width) must stay away from the
    r = 0 singularity.  Step control defaults to tight tolerances with an
    embedded-error adaptive method; ``max_step``/``first_step`` pin the
    nominal step for convergence studies.
    """

    f: Callable[[float], float]
    r0: float
    value: float
    slope: float
    half_width: float
    rtol: float = 1e-10
    atol: float = 1e-10
    max_step: float = np.inf
    first_step: float | None = None
    n_samples: int = 2049

    def __post_init__(self):
        if self.r0 <= 0.0:
            raise ValueError("r0 must be positive")
        if self.half_width <= 0.0 or self.r0 - self.half_width <= 0.0:
            raise ValueError("interval must exclude the r = 0 singularity")
        if self.n_samples < 16:
            raise ValueError("n_samples too small")


def solve_radial_ivp(problem: RadialIvpProblem) -> TabulatedProfile:
    """Integrate the radial IVP and return the solution as a sampled profile.

    Integrates outward and backward from r0 with an adaptive Dormand-Prince
    pair (declared propagation order 5), samples the dense output on a
    uniform grid containing r0, and wraps it in a quintic TabulatedProfile.
    The sample at r0 reproduces the initial value exactly.
    """

    def rhs(r, y):
        return (y[1], -y[1] / r - problem.f(y[0]))

    def integrate(r_end):
        try:
            sol = solve_ivp(
                rhs,
                (problem.r0, r_end),
                (problem.value, problem.slope),
                method="RK45",
                rtol=problem.rtol,
                atol=problem.atol,
                max_step=problem.max_step,
                first_step=problem.first_step,
                dense_output=True,
            )
        except (ValueError, ZeroDivisionError, OverflowError, FloatingPointError) as exc:
            raise RadialIvpError(f"radial IVP right-hand side failed: {exc}") from exc
        if not sol.success:
            raise RadialIvpError(f"radial IVP integration failed: {sol.message}")
        return sol

    n = problem.n_samples if problem.n_samples % 2 == 1 else problem.n_samples + 1
    radii = np.linspace(problem.r0 - problem.half_width, problem.r0 + problem.half_width, n)
    mid = n // 2
    radii[mid] = problem.r0

    values = np.empty(n)
    values[mid] = problem.value
    left = integrate(radii[0])
    values[:mid] = left.sol(radii[:mid])[0]
    right = integrate(radii[-1])
    values[mid + 1:] = right.sol(radii[mid + 1:])[0]
    if not np.all(np.isfinite(values)):
        raise RadialIvpError("radial IVP produced non-finite values (blow-up)")

    return TabulatedProfile(radii, values, order=5)
