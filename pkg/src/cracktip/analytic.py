"""Closed-form solution family (cracktip, crack-front, u_delta) and energies.

phi0(r, theta) = C0 sqrt(r) sin(theta/2) with C0 = sqrt(2/pi), singular set
the half-line K0; the crack-front is its vertically constant extension and
u_delta(r, theta, z) = phi0 + delta*z tilts it along the front.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .geometry import CrackGeometry, Domain, PolarPoint, surface_measure, to_polar

__all__ = [
    "C0_DEFAULT",
    "CracktipFunction",
    "LineJumpFunction",
    "EnergyBreakdown",
    "closed_form_energy",
]

C0_DEFAULT = float(np.sqrt(2.0 / np.pi))


@dataclass(frozen=True)
class EnergyBreakdown:
    """Dirichlet/surface/total energy triple with provenance."""

    dirichlet: float
    surface: float
    provenance: str = "closed-form"  # {"closed-form", "quadrature", "discrete"}

    @property
    def total(self) -> float:
        return self.dirichlet + self.surface


@dataclass(frozen=True)
class CracktipFunction:
    """The family u = c0 sqrt(r) sin(theta/2) + delta*z.

    ``c0 = sqrt(2/pi)`` gives the normalized cracktip whose Dirichlet and
    surface energies balance; other values are deliberately non-stationary
    scalings (useful as negative controls).  ``delta = 0`` is the pure
    cracktip (2D) / crack-front (3D).
    """

    c0: float = C0_DEFAULT
    delta: float = 0.0

    def eval(self, p: Union[PolarPoint, np.ndarray]) -> float:
        """Field value; continuous up to each side of the crack."""
        pp = p if isinstance(p, PolarPoint) else to_polar(p)
        val = self.c0 * np.sqrt(pp.r) * np.sin(0.5 * pp.theta)
        if pp.z is not None:
            val += self.delta * pp.z
        return float(val)

    def grad(self, p: Union[PolarPoint, np.ndarray]) -> np.ndarray:
        """Gradient in cartesian components; third component is delta.

        The radial/angular derivatives are c0 sin(theta/2)/(2 sqrt(r)) and
        c0 cos(theta/2)/(2 sqrt(r)); r = 0 is a hard error (the gradient
        is unbounded at the tip).
        """
        pp = p if isinstance(p, PolarPoint) else to_polar(p)
        if pp.r == 0.0:
            raise ValueError("cracktip singularity: gradient undefined at r = 0")
        gx, gy = self.grad_polar_xy(np.asarray(pp.r), np.asarray(pp.theta))
        g = np.array([float(gx), float(gy)])
        if pp.z is not None:
            g = np.append(g, self.delta)
        return g

    # vectorized fast paths used by the quadrature modules -----------------

    def eval_polar(self, r, theta, z=None):
        val = self.c0 * np.sqrt(r) * np.sin(0.5 * np.asarray(theta))
        return val if z is None else val + self.delta * z

    def grad_polar_xy(self, r, theta):
        """In-plane cartesian gradient components on arrays of (r, theta)."""
        amp = self.c0 / (2.0 * np.sqrt(r))
        return -amp * np.sin(0.5 * theta), amp * np.cos(0.5 * theta)

    def grad_sq(self, r):
        """|grad|^2 = c0^2/(4r) + delta^2; independent of theta."""
        return self.c0 ** 2 / (4.0 * np.asarray(r, dtype=float)) + self.delta ** 2


@dataclass(frozen=True)
class LineJumpFunction:
    """Two constants separated by the full line L = {y = 0}.

    Gradient vanishes off L, so the couple (u_L, L) has zero Dirichlet
    energy; it is the textbook flat stationary couple in the plane.
    """

    upper: float = 1.0
    lower: float = 0.0

    def eval(self, p: Union[PolarPoint, np.ndarray]) -> float:
        pp = p if isinstance(p, PolarPoint) else to_polar(p, side_hint="above")
        above = pp.side == "above" or (pp.side is None and np.sin(pp.theta) > 0)
        return self.upper if above else self.lower

    def grad(self, p) -> np.ndarray:
        return np.zeros(2)


def closed_form_energy(f: CracktipFunction, D: Domain) -> EnergyBreakdown:
    """Exact Mumford-Shah energy of (u, K) on D for the supported domains.

    Dirichlet part integrates c0^2/(4 rho) exactly (rho the in-plane
    distance to the tip/front) plus delta^2 * |D|; the surface part is
    the matching crack measure.  Domains must be centered on the tip.
    """
    if any(c != 0.0 for c in D.center):
        raise ValueError("closed forms assume the domain is centered on the tip/front")
    quarter_c2 = 0.25 * f.c0 ** 2
    R = D.radius
    if D.kind == "disk":
        dirichlet = quarter_c2 * 2.0 * np.pi * R
        crack = CrackGeometry.halfline()
    elif D.kind == "ball":
        # integral of 1/rho over the ball is pi^2 R^2
        dirichlet = quarter_c2 * np.pi ** 2 * R * R + f.delta ** 2 * D.volume
        crack = CrackGeometry.halfplane()
    elif D.kind == "cylinder":
        dirichlet = quarter_c2 * 4.0 * np.pi * R * D.half_height + f.delta ** 2 * D.volume
        crack = CrackGeometry.halfplane()
    else:
        raise ValueError(
            f"no closed-form energy on {D.kind!r}; evaluate by quadrature instead")
    surface = surface_measure(crack, D)
    return EnergyBreakdown(float(dirichlet), float(surface), "closed-form")
