"""Energy ledgers for the competitor constructions and their thresholds.

Each ledger itemizes the Dirichlet and surface energies of the original
couple and of a competitor localized to the modification region, all in
closed form where possible; margin = competitor.total - original.total,
so margin < 0 means the competitor wins and the couple is not minimizing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from .analytic import CracktipFunction, EnergyBreakdown
from .geometry import CrackGeometry
from .quadrature import gauss_panels

__all__ = [
    "CompetitorLedger",
    "cut_ball_ledger",
    "drilled_sphere_ledger",
    "cylinder_shell_ledger",
    "cylinder_shell_threshold",
    "sdelta_upper_bound",
]


@dataclass(frozen=True)
class CompetitorLedger:
    original: EnergyBreakdown
    competitor: EnergyBreakdown
    parameters: Dict[str, float]
    construction: str  # {"cut_ball", "drilled_sphere", "cylinder_shell"}
    extras: Dict[str, float] = field(default_factory=dict)

    @property
    def margin(self) -> float:
        """competitor.total - original.total; negative iff the competitor wins."""
        return self.competitor.total - self.original.total

    def csv_row(self) -> str:
        p = ";".join(f"{k}={v:.17g}" for k, v in sorted(self.parameters.items()))
        cells = [self.construction, p,
                 "%.17g" % self.original.dirichlet, "%.17g" % self.original.surface,
                 "%.17g" % self.original.total,
                 "%.17g" % self.competitor.dirichlet, "%.17g" % self.competitor.surface,
                 "%.17g" % self.competitor.total, "%.17g" % self.margin]
        return ",".join(cells)


CSV_HEADER = ("construction,parameters,original_dirichlet,original_surface,"
              "original_total,competitor_dirichlet,competitor_surface,"
              "competitor_total,margin")


# ---------------------------------------------------------------------------
# cut ball: kill u inside B(0,R), pay the whole sphere
# ---------------------------------------------------------------------------

def cut_ball_ledger(delta: float, R: float) -> CompetitorLedger:
    """Competitor (P0 \\ B(0,R)) u dB(0,R) with v = 0 inside the ball.

    All terms are closed forms; the competitor wins (margin < 0) exactly
    when R > 9/(4 delta^2), so any delta != 0 loses minimality at large R.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    half_disk = 0.5 * np.pi * R * R
    bulk = delta * delta * (4.0 / 3.0) * np.pi * R ** 3
    original = EnergyBreakdown(half_disk + bulk, half_disk)
    competitor = EnergyBreakdown(0.0, 4.0 * np.pi * R * R)
    win_R = 9.0 / (4.0 * delta * delta) if delta != 0.0 else np.inf
    return CompetitorLedger(
        original, competitor, {"delta": delta, "R": R}, "cut_ball",
        extras={"win_radius": win_R, "complement_connected": False},
    )


# ---------------------------------------------------------------------------
# drilled sphere: same ball but with a small hole reconnecting the sides
# ---------------------------------------------------------------------------

def _drilled_dirichlet(delta: float, R: float, eps: float,
                       n_panels: int = 10, n_gauss: int = 8):
    """Quadrature of |grad(u_delta * cutoff)|^2 over B(y, 2eps) inter B(0,R),
    y = (R, 0, 0); the cutoff ramps linearly from 1 at rho=eps to 0 at 2eps.

    Returns (value, int |grad u_delta|^2 over the region, sup |u_delta|,
    region volume) -- the extra pieces feed the recorded upper bound.
    """
    u = CracktipFunction(delta=delta)
    # radial panels conform to the ramp kink at rho = eps
    edges = np.concatenate([np.linspace(0.0, eps, n_panels // 2 + 1),
                            np.linspace(eps, 2.0 * eps, n_panels // 2 + 1)[1:]])
    rho, wr = gauss_panels(edges, n_gauss)
    phi_ang, wp = gauss_panels(np.linspace(0.0, 2.0 * np.pi, n_panels + 1), n_gauss)
    val = 0.0
    val_u = 0.0
    vol = 0.0
    sup_u = 0.0
    for rho_i, wr_i in zip(rho, wr):
        # polar axis along e_x: inside B(0,R) iff t = cos(angle) <= -rho/(2R)
        t_cut = -rho_i / (2.0 * R)
        t, wt = gauss_panels(np.linspace(-1.0, t_cut, n_panels + 1), n_gauss)
        T, P = np.meshgrid(t, phi_ang, indexing="ij")
        W = np.outer(wt, wp).ravel() * rho_i * rho_i * wr_i
        s = np.sqrt(1.0 - T * T)
        px = R + rho_i * T.ravel()
        py = (rho_i * s * np.cos(P)).ravel()
        pz = (rho_i * s * np.sin(P)).ravel()
        r = np.hypot(px, py)
        theta = np.arctan2(py, px)
        gx, gy = u.grad_polar_xy(r, theta)
        uval = u.eval_polar(r, theta, pz)
        sup_u = max(sup_u, float(np.abs(uval).max()))
        if rho_i <= eps:
            cut, dcut = 1.0, 0.0
        else:
            cut, dcut = 2.0 - rho_i / eps, -1.0 / eps
        # grad v = cut * grad u + u * dcut * omega  (omega the radial direction)
        ox = T.ravel()
        oy = (s * np.cos(P)).ravel()
        oz = (s * np.sin(P)).ravel()
        vx = cut * gx + uval * dcut * ox
        vy = cut * gy + uval * dcut * oy
        vz = cut * delta + uval * dcut * oz
        val += float(np.dot(W, vx * vx + vy * vy + vz * vz))
        val_u += float(np.dot(W, gx * gx + gy * gy + delta * delta))
        vol += float(W.sum())
    return val, val_u, sup_u, vol


def drilled_sphere_ledger(delta: float, R: float, eps_hole: float) -> CompetitorLedger:
    """Cut-ball competitor with a hole of radius ``eps_hole`` drilled at
    (R, 0, 0), keeping the complement of the crack connected.

    The removed spherical cap has area exactly pi*eps^2; the transition
    energy of u_delta times the radial cutoff is evaluated by quadrature
    and also bounded by 2*int_{B(y,2eps)}|grad u_delta|^2 + C'(u)*eps,
    mirroring the construction's estimate.  The margin uses the
    quadrature value.
    """
    if eps_hole >= R / 4.0:
        raise ValueError("cutoff construction invalid: need eps_hole < R/4")
    if eps_hole <= 0:
        raise ValueError("eps_hole must be positive")
    base = cut_ball_ledger(delta, R)
    cap = np.pi * eps_hole * eps_hole
    dval, du, sup_u, vol = _drilled_dirichlet(delta, R, eps_hole)
    # (a+b)^2 <= 2a^2 + 2b^2 with |grad cutoff| <= 1/eps on a shell of
    # volume <= vol(B(y,2eps) inter B(0,R))
    bound = 2.0 * du + 2.0 * sup_u ** 2 * vol / eps_hole ** 2
    competitor = EnergyBreakdown(dval, 4.0 * np.pi * R * R - cap, "quadrature")
    return CompetitorLedger(
        base.original, competitor,
        {"delta": delta, "R": R, "eps_hole": eps_hole}, "drilled_sphere",
        extras={"cap_area": cap, "dirichlet_bound": bound,
                "transition_volume": vol, "complement_connected": True},
    )


# ---------------------------------------------------------------------------
# cylinder shell: shrink the crack into the boundary of a smaller cylinder
# ---------------------------------------------------------------------------

def cylinder_shell_threshold() -> float:
    """The non-minimality threshold delta* = sqrt(3 - 2/pi)."""
    return float(np.sqrt(3.0 - 2.0 / np.pi))


def cylinder_shell_ledger(delta: float, eps: float) -> CompetitorLedger:
    """Competitor on the unit cylinder C: kill u inside the shrunk cylinder
    C_eps = B(0,1-eps) x [-1+eps, 1-eps] and pay its whole boundary.

    All finite-eps terms are closed forms; as eps -> 0 the competitor
    total tends to |dC| = 6 pi, so the competitor wins for some eps
    exactly when delta^2 > 3 - 2/pi.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("need 0 < eps < 1")
    two_pi = 2.0 * np.pi
    original = EnergyBreakdown(2.0 + two_pi * delta * delta, 2.0)
    s = 1.0 - eps
    shell_dirichlet = (2.0 + two_pi * delta * delta) - 2.0 * s * s - two_pi * delta * delta * s ** 3
    crack_left = 2.0 - 2.0 * s * s          # H^2 of the crack outside C_eps
    dC = 6.0 * np.pi * s * s                # lateral 4 pi s^2 plus two caps
    competitor = EnergyBreakdown(shell_dirichlet, crack_left + dC)
    limit_margin = 6.0 * np.pi - (4.0 + two_pi * delta * delta)
    return CompetitorLedger(
        original, competitor, {"delta": delta, "eps": eps}, "cylinder_shell",
        extras={"limit_competitor_total": 6.0 * np.pi,
                "limit_margin": limit_margin,
                "threshold": cylinder_shell_threshold()},
    )


# ---------------------------------------------------------------------------
# upper bounds on the energy gap from a discrete candidate
# ---------------------------------------------------------------------------

def sdelta_upper_bound(candidate, delta: float) -> Tuple[float, float]:
    """Evaluate the two gap bounds on a discrete candidate pair.

    ``candidate`` is (u: ScalarField, K: triangulated CrackGeometry).
    Returns (strong, weak):

        strong = int_C (delta^2 - |dz u|^2) dx + int_K (|sin theta| - 1) dH^2
        weak   = 2 delta^2 |C| - 2 delta int_C dz u dx

    with theta(x) the angle between the triangle normal and e_3.  Both
    volume terms use the same discrete cell measure, so strong <= weak
    holds exactly (their difference is int (delta - dz u)^2 plus a
    nonnegative surface term).  The candidate u is assumed jump-free on
    cells (true for phase-field outputs and for sampled smooth fields).
    """
    u_field, K = candidate
    if K.kind != "triangulated":
        raise ValueError("candidate crack must be triangulated")
    areas = K.triangle_areas()
    bad = np.nonzero(areas < 1e-14)[0]
    if bad.size:
        raise ValueError(f"degenerate triangles at indices {bad.tolist()}")
    from .atsolver import dz_cell_stats  # local import: avoid a hard cycle
    vol, int_dz, int_dz_sq = dz_cell_stats(u_field)
    normals = K.triangle_normals()
    sin_theta = np.sqrt(np.clip(1.0 - normals[:, 2] ** 2, 0.0, 1.0))
    surface_term = float(((sin_theta - 1.0) * areas).sum())
    strong = delta * delta * vol - int_dz_sq + surface_term
    weak = 2.0 * delta * delta * vol - 2.0 * delta * int_dz
    return strong, weak
