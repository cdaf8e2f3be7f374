"""Shipped example flows, shared by the example configs and the test suite.

The radial fixture is stationary (zero angular velocity), so its glued
exterior term vanishes identically and the spectral dynamics is clean to
near roundoff.  The rotating fixtures carry the exponential-cutoff gluing
annulus; that annulus is an exact relative equilibrium but a dynamically
unstable one, which bounds how long a discretized run can track rigid
rotation (see the simulate horizon in the example configs).
"""

from __future__ import annotations

from .composer import Bump, FlowSpec
from .profiles import BumpProfile

RADIAL_GRID = (256, 3.6)
TWO_BUMP_GRID = (256, 2.8125)
ANALYSIS_TAU = 1e-13


def radial_spec() -> FlowSpec:
    return FlowSpec(
        angular_velocity=0.0,
        gluing_radius=1.6,
        bumps=(Bump((0.0, 0.0), BumpProfile(1.0, 1.0, 12)),),
    )


def two_bump_spec(angular_velocity: float = 1.0) -> FlowSpec:
    return FlowSpec(
        angular_velocity=angular_velocity,
        gluing_radius=1.25,
        bumps=(
            Bump((0.75, 0.0), BumpProfile(0.3, 0.45, 7)),
            Bump((-0.75, 0.0), BumpProfile(0.22, 0.45, 9)),
        ),
    )


def three_bump_spec(angular_velocity: float = 1.0) -> FlowSpec:
    return FlowSpec(
        angular_velocity=angular_velocity,
        gluing_radius=1.25,
        bumps=(
            Bump((0.75, 0.0), BumpProfile(0.3, 0.45, 7)),
            Bump((-0.75, 0.0), BumpProfile(0.22, 0.45, 9)),
            Bump((0.0, 0.8), BumpProfile(0.25, 0.35, 8)),
        ),
    )
