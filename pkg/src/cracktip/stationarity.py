"""Weak Euler-Lagrange stationarity checks for the analytic crack couples.

A couple (u, K) is stationary when

    int |grad u|^2 div(eta) - 2 <grad u, grad u . grad eta> dx
        + int_K div^K eta dH^{N-1}  =  0

for every compactly supported C^1 vector field eta.  The bulk integral is
evaluated on the excised domain {rho > eps} in crack-conforming polar or
cylindrical panels (the area element cancels the 1/rho singularity of
|grad u|^2, so the panel integrands are smooth) and extrapolated eps -> 0;
every ingredient of the limit argument is exposed as its own operation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from .analytic import C0_DEFAULT, CracktipFunction, LineJumpFunction, closed_form_energy
from .geometry import CrackGeometry, Domain
from .quadrature import gauss_panels, richardson_limit

__all__ = [
    "TestVectorField",
    "ELResidualReport",
    "surface_divergence_integral",
    "bulk_integral",
    "excised_ball_integral",
    "el_residual",
    "boundary_term_decomposition",
    "udelta_cross_terms",
    "scaled_control",
]


# ---------------------------------------------------------------------------
# test vector fields: tensor-product smooth bumps with analytic gradients
# ---------------------------------------------------------------------------

class TestVectorField:
    """Compactly supported smooth vector field with closed-form Jacobian.

    Component i is  a_i * prod_d B(t_d) (1 + gamma_{id} t_d)  with
    t = (x - center)/support_radius and the bump profile
    B(t) = exp(1 - 1/(1 - t^2)) on |t| < 1, zero outside.  The support is
    the closed cube of half-width ``support_radius`` around ``center``;
    B(0) = 1, so eta(center) = amplitudes.

    Parameters
    ----------
    amplitudes : (dim,) array
        Component values at the center.
    gammas : (dim, dim) array, optional
        Linear tilts; gamma[i, d] skews component i along direction d.
    center : (dim,) array
    support_radius : float
    seed : int, optional
        Provenance tag for generated families (not used in evaluation).
    """

    __test__ = False  # not a pytest case despite the name

    def __init__(self, amplitudes, gammas=None, center=None, support_radius=0.85,
                 seed: Optional[int] = None):
        self.amplitudes = np.asarray(amplitudes, dtype=float)
        d = self.amplitudes.shape[0]
        self.gammas = np.zeros((d, d)) if gammas is None else np.asarray(gammas, dtype=float)
        self.center = np.zeros(d) if center is None else np.asarray(center, dtype=float)
        self.support_radius = float(support_radius)
        self.seed = seed
        if self.gammas.shape != (d, d) or self.center.shape != (d,):
            raise ValueError("inconsistent field shapes")
        if not self.support_radius > 0:
            raise ValueError("support_radius must be positive")
        self._c1 = None

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    # -- evaluation --------------------------------------------------------

    def _bumps(self, pts: np.ndarray):
        t = (pts - self.center) / self.support_radius
        inside = np.abs(t) < 1.0
        q = np.where(inside, 1.0 - t * t, 1.0)
        B = np.where(inside, np.exp(1.0 - 1.0 / q), 0.0)
        dB = np.where(inside, B * (-2.0 * t) / (q * q), 0.0) / self.support_radius
        return t, B, dB

    def __call__(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        t, B, _ = self._bumps(pts)
        F = B[:, None, :] * (1.0 + t[:, None, :] * self.gammas[None, :, :])
        eta = self.amplitudes * F.prod(axis=2)
        return eta if np.ndim(points) > 1 else eta[0]

    def jacobian(self, points) -> np.ndarray:
        """J[..., i, j] = d eta_i / d x_j."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        t, B, dB = self._bumps(pts)
        lin = 1.0 + t[:, None, :] * self.gammas[None, :, :]
        F = B[:, None, :] * lin
        dF = dB[:, None, :] * lin + B[:, None, :] * self.gammas[None, :, :] / self.support_radius
        d = self.dim
        J = np.empty((pts.shape[0], d, d))
        for j in range(d):
            prod = np.ones_like(F[:, :, 0])
            for k in range(d):
                if k != j:
                    prod = prod * F[:, :, k]
            J[:, :, j] = self.amplitudes * dF[:, :, j] * prod
        return J if np.ndim(points) > 1 else J[0]

    def divergence(self, points) -> np.ndarray:
        J = self.jacobian(np.atleast_2d(np.asarray(points, dtype=float)))
        div = np.trace(J, axis1=1, axis2=2)
        return div if np.ndim(points) > 1 else div[0]

    def value_at_origin(self) -> np.ndarray:
        return self(np.zeros(self.dim))

    # -- geometry of the support ------------------------------------------

    def support_box(self) -> Tuple[np.ndarray, np.ndarray]:
        R = self.support_radius
        return self.center - R, self.center + R

    def is_compactly_supported(self, rtol: float = 1e-12) -> bool:
        """Sample the support shell; the field must vanish there."""
        lo, hi = self.support_box()
        d = self.dim
        s = np.linspace(-1.0, 1.0, 7)
        vals = []
        for axis in range(d):
            for sign in (-1.0, 1.0):
                grid = np.meshgrid(*[s] * (d - 1), indexing="ij") if d > 1 else []
                face = np.empty((s.size ** (d - 1), d))
                others = [a for a in range(d) if a != axis]
                for k, a in enumerate(others):
                    face[:, a] = self.center[a] + self.support_radius * grid[k].ravel()
                face[:, axis] = self.center[axis] + sign * self.support_radius * (1.0 + 1e-9)
                vals.append(np.abs(self(face)).max())
        scale = max(np.abs(self.amplitudes).max(), 1e-300)
        return max(vals) <= rtol * scale

    def c1_norm(self) -> float:
        """sup |eta| + sup |grad eta| (Frobenius), on a deterministic sample grid."""
        if self._c1 is None:
            s = np.linspace(-0.995, 0.995, 13)
            grids = np.meshgrid(*[s] * self.dim, indexing="ij")
            pts = self.center + self.support_radius * np.stack([g.ravel() for g in grids], axis=1)
            sup = np.linalg.norm(self(pts), axis=1).max()
            J = self.jacobian(pts)
            supJ = np.sqrt((J * J).sum(axis=(1, 2))).max()
            self._c1 = float(sup + supJ)
        return self._c1

    def shifted(self, offset) -> "TestVectorField":
        return TestVectorField(self.amplitudes, self.gammas,
                               self.center + np.asarray(offset, dtype=float),
                               self.support_radius, self.seed)

    # -- factories ---------------------------------------------------------

    @classmethod
    def unit_at_origin(cls, dim: int, direction: int = 0,
                       support_radius: float = 0.85) -> "TestVectorField":
        """The deterministic field with eta(0) = e_{direction}."""
        a = np.zeros(dim)
        a[direction] = 1.0
        return cls(a, support_radius=support_radius)

    @classmethod
    def random_family(cls, n: int, dim: int, seed: int = 0,
                      support_radius: float = 0.85,
                      center_spread: float = 0.15) -> list:
        """Deterministic seeded family; centers stay near the tip so the
        supports keep straddling the crack."""
        rng = np.random.default_rng(seed)
        fields = []
        for k in range(n):
            a = rng.uniform(-1.0, 1.0, size=dim)
            gam = rng.uniform(-0.5, 0.5, size=(dim, dim))
            c = rng.uniform(-center_spread, center_spread, size=dim)
            fields.append(cls(a, gam, c, support_radius, seed=seed + k))
        return fields


def scaled_control(factor: float = 2.0) -> CracktipFunction:
    """Scaled cracktip (negative control): stationarity fails for factor != 1."""
    return CracktipFunction(c0=factor * C0_DEFAULT)


# ---------------------------------------------------------------------------
# residual report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ELResidualReport:
    """Euler-Lagrange residual, split into its bulk and surface parts.

    ``total`` is bulk_term + surface_term by construction.  ``normalized``
    divides |total| by the C^1 norm of the test field times the local
    energy scale of the couple, so thresholds are scale-free.
    """

    bulk_term: float
    surface_term: float
    excision_radius: float
    quadrature_error_estimate: float
    normalized: float
    eps_values: Tuple[float, ...] = ()
    raw_totals: Tuple[float, ...] = ()

    @property
    def total(self) -> float:
        return self.bulk_term + self.surface_term


# ---------------------------------------------------------------------------
# surface term
# ---------------------------------------------------------------------------

def _support_extents(eta: TestVectorField):
    lo, hi = eta.support_box()
    corners_r = []
    d = eta.dim
    for mask in range(2 ** d):
        c = [hi[a] if (mask >> a) & 1 else lo[a] for a in range(d)]
        corners_r.append(np.hypot(c[0], c[1]))
    return max(corners_r), (lo, hi)


def surface_divergence_integral(K: CrackGeometry, eta: TestVectorField,
                                n_panels: int = 32, n_gauss: int = 10,
                                return_both: bool = False):
    """int_K div^K eta dH^{N-1} for the exact crack sets.

    Computes the tangential-divergence quadrature and the closed-form
    reduction (endpoint value eta^1(0) for the half-line, the front line
    integral of eta^1 for the half-plane) and checks they agree; the
    closed-form value is returned.
    """
    if not eta.is_compactly_supported():
        raise ValueError("test field support is not compact at the support shell")
    if K.kind == "triangulated":
        raise ValueError("surface divergence is implemented for the exact crack sets only")
    if K.dim != eta.dim:
        raise ValueError("crack set and test field dimension mismatch")

    lo, hi = eta.support_box()
    if K.kind in ("halfline", "line"):
        a = min(lo[0] - 0.1, -0.1)
        b = 0.0 if K.kind == "halfline" else hi[0] + 0.1
        x, w = gauss_panels(np.linspace(a, b, n_panels + 1), n_gauss)
        pts = np.column_stack([x, np.zeros_like(x)])
        quad = float(np.dot(w, eta.jacobian(pts)[:, 0, 0]))
        if K.kind == "halfline":
            closed = float(eta(np.zeros(2))[0])
        else:
            closed = 0.0
    else:  # halfplane
        ax = min(lo[0] - 0.1, -0.1)
        x_edges = np.linspace(ax, 0.0, n_panels + 1)
        z_edges = np.linspace(lo[2] - 0.1, hi[2] + 0.1, n_panels + 1)
        x, wx = gauss_panels(x_edges, n_gauss)
        z, wz = gauss_panels(z_edges, n_gauss)
        X, Z = np.meshgrid(x, z, indexing="ij")
        W = np.outer(wx, wz).ravel()
        pts = np.column_stack([X.ravel(), np.zeros(X.size), Z.ravel()])
        J = eta.jacobian(pts)
        quad = float(np.dot(W, J[:, 0, 0] + J[:, 2, 2]))
        zf, wzf = gauss_panels(z_edges, n_gauss)
        front = np.column_stack([np.zeros_like(zf), np.zeros_like(zf), zf])
        closed = float(np.dot(wzf, eta(front)[:, 0]))

    if abs(quad - closed) > 1e-8 * (1.0 + abs(closed)):
        raise RuntimeError(
            f"surface divergence quadrature disagrees with the closed form "
            f"by {abs(quad - closed):.3e}; refine n_panels/n_gauss")
    return (closed, quad) if return_both else closed


# ---------------------------------------------------------------------------
# bulk term on the excised domain
# ---------------------------------------------------------------------------

def _bulk_integrand_2d(u: CracktipFunction, eta: TestVectorField,
                       r: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """(|grad u|^2 div eta - 2 <grad u, grad u . grad eta>) * r  on nodes."""
    x = r * np.cos(theta)
    y = r * np.sin(theta)
    pts = np.column_stack([x, y])
    J = eta.jacobian(pts)
    div = J[:, 0, 0] + J[:, 1, 1]
    gx, gy = u.grad_polar_xy(r, theta)
    quad_form = (gx * (J[:, 0, 0] * gx + J[:, 0, 1] * gy)
                 + gy * (J[:, 1, 0] * gx + J[:, 1, 1] * gy))
    return (u.grad_sq(r) * div - 2.0 * quad_form) * r


def _bulk_value_2d(u, eta, r_edges, n_gauss, n_theta_panels=24) -> float:
    r, wr = gauss_panels(r_edges, n_gauss)
    th, wth = gauss_panels(np.linspace(-np.pi, np.pi, n_theta_panels + 1), n_gauss)
    R, T = np.meshgrid(r, th, indexing="ij")
    W = np.outer(wr, wth)
    vals = _bulk_integrand_2d(u, eta, R.ravel(), T.ravel())
    return float(np.dot(W.ravel(), vals))


def _bulk_value_3d(u, eta, s_edges, z_edges, n_gauss, n_theta_panels=16) -> float:
    # radial substitution rho = s^2 keeps the delta cross-terms smooth
    s, ws = gauss_panels(s_edges, n_gauss)
    th, wth = gauss_panels(np.linspace(-np.pi, np.pi, n_theta_panels + 1), n_gauss)
    z, wz = gauss_panels(z_edges, n_gauss)
    S, T = np.meshgrid(s, th, indexing="ij")
    rho = (S * S).ravel()
    theta = T.ravel()
    x = rho * np.cos(theta)
    y = rho * np.sin(theta)
    gx, gy = u.grad_polar_xy(rho, theta)
    grad_sq = u.grad_sq(rho)
    # measure: rho drho dtheta dz with drho = 2 s ds
    w2d = (np.outer(ws, wth)).ravel() * rho * 2.0 * S.ravel()
    g = np.stack([gx, gy, np.full_like(gx, u.delta)], axis=1)
    total = 0.0
    for zi, wzi in zip(z, wz):  # chunk over z to bound memory
        pts = np.column_stack([x, y, np.full_like(x, zi)])
        J = eta.jacobian(pts)
        div = J[:, 0, 0] + J[:, 1, 1] + J[:, 2, 2]
        Jg = np.einsum("nij,nj->ni", J, g)
        quad_form = np.einsum("ni,ni->n", g, Jg)
        integrand = grad_sq * div - 2.0 * quad_form
        total += wzi * float(np.dot(w2d, integrand))
    return total


def bulk_integral(u: CracktipFunction, eta: TestVectorField, eps: float,
                  n_panels: int = 12, n_gauss: int = 8, tol: Optional[float] = None,
                  with_error: bool = False):
    """Excised bulk integral over {rho > eps} intersected with the support.

    The quadrature panels conform to the crack (the angular interval is
    exactly (-pi, pi), so no panel straddles K) and to the excision circle.
    The error estimate compares against a lower-order pass on the same
    panels; if ``tol`` is given and exceeded, raises with a refinement hint.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    r_max, (lo, hi) = _support_extents(eta)
    if eta.dim == 2:
        r_edges = np.linspace(eps, max(r_max, eps * 2), n_panels + 1)
        val = _bulk_value_2d(u, eta, r_edges, n_gauss)
        low = _bulk_value_2d(u, eta, r_edges, n_gauss - 2)
    else:
        s_edges = np.linspace(np.sqrt(eps), np.sqrt(max(r_max, eps * 2)), n_panels + 1)
        z_edges = np.linspace(lo[2] - 0.05, hi[2] + 0.05, n_panels + 1)
        val = _bulk_value_3d(u, eta, s_edges, z_edges, n_gauss)
        low = _bulk_value_3d(u, eta, s_edges, z_edges, n_gauss - 2)
    err = abs(val - low)
    if tol is not None and err > tol:
        raise RuntimeError(
            f"bulk quadrature error estimate {err:.3e} exceeds tol {tol:.3e}; "
            f"increase n_panels (currently {n_panels}) or n_gauss")
    return (val, err) if with_error else val


def excised_ball_integral(u: CracktipFunction, eta: TestVectorField,
                          eps: float, n_panels: int = 8, n_gauss: int = 8) -> float:
    """The discarded part: integral of the bulk integrand over B_eps (2D).

    Direct polar quadrature; the area element makes the integrand smooth
    down to r = 0, so no inner cutoff is needed.  Used as the oracle for
    the eps -> 0 decay rate of the discarded ball.
    """
    r_edges = np.linspace(0.0, eps, n_panels + 1)
    return _bulk_value_2d(u, eta, r_edges, n_gauss)


# ---------------------------------------------------------------------------
# full residual with eps -> 0 extrapolation
# ---------------------------------------------------------------------------

def _energy_scale(u, dim: int, r_max: float, z_half: float) -> float:
    if isinstance(u, LineJumpFunction):
        return 1.0
    if dim == 2:
        eb = closed_form_energy(u, Domain("disk", r_max))
    else:
        eb = closed_form_energy(u, Domain("cylinder", r_max, half_height=max(z_half, 0.1)))
    return max(eb.total, 1e-30)


def el_residual(u: Union[CracktipFunction, LineJumpFunction], K: CrackGeometry,
                eta: TestVectorField, eps0: float = 0.08, levels: int = 3,
                n_panels: int = 12, n_gauss: int = 8) -> ELResidualReport:
    """Euler-Lagrange residual of the couple (u, K) against ``eta``.

    The bulk term is evaluated at eps0, eps0/2, ..., and Richardson-
    extrapolated with the known decay exponents of the excised core
    (eps^2 and eps^3 in 2D; the delta cross-terms add eps^{3/2} in 3D).
    """
    if K.kind in ("halfline", "line") and eta.dim != 2:
        raise ValueError("2D couple needs a 2D test field")
    if K.kind == "halfplane" and eta.dim != 3:
        raise ValueError("3D couple needs a 3D test field")

    surface = surface_divergence_integral(K, eta)
    r_max, (lo, hi) = _support_extents(eta)
    z_half = max(abs(lo[-1]), abs(hi[-1])) if eta.dim == 3 else 0.0

    if isinstance(u, LineJumpFunction):
        # gradient vanishes off L: the bulk integrand is identically zero
        report = ELResidualReport(0.0, surface, 0.0, 0.0,
                                  abs(surface) / max(eta.c1_norm(), 1e-30))
        return report

    eps_values = tuple(eps0 / 2 ** k for k in range(levels))
    bulks = []
    errs = []
    for eps in eps_values:
        v, e = bulk_integral(u, eta, eps, n_panels, n_gauss, with_error=True)
        bulks.append(v)
        errs.append(e)
    totals = [b + surface for b in bulks]
    exponents = (2.0, 3.0) if eta.dim == 2 else (1.5, 2.0)
    total, ext_err = richardson_limit(eps_values, totals, exponents)
    quad_err = max(errs) + ext_err
    scale = eta.c1_norm() * _energy_scale(u, eta.dim, r_max, z_half)
    return ELResidualReport(
        bulk_term=total - surface,
        surface_term=surface,
        excision_radius=eps_values[-1],
        quadrature_error_estimate=quad_err,
        normalized=abs(total) / max(scale, 1e-30),
        eps_values=eps_values,
        raw_totals=tuple(totals),
    )


# ---------------------------------------------------------------------------
# ingredients of the 2D limit argument
# ---------------------------------------------------------------------------

def boundary_term_decomposition(eps: float, eta: TestVectorField,
                                u: Optional[CracktipFunction] = None,
                                n_panels: int = 24, n_gauss: int = 8) -> Tuple[float, float]:
    """The two boundary integrals on the excision circle {r = eps}.

    With nu the outer normal of the excised domain (pointing toward the
    tip), term_A = -int |grad u|^2 <eta, nu> and
    term_B = -2 int (du/dnu) <eta, grad u>.  As eps -> 0,
    term_A -> 0 and term_B -> -eta_1(0).
    """
    if u is None:
        u = CracktipFunction()
    th, wth = gauss_panels(np.linspace(-np.pi, np.pi, n_panels + 1), n_gauss)
    r = np.full_like(th, eps)
    pts = np.column_stack([eps * np.cos(th), eps * np.sin(th)])
    ev = eta(pts)
    gx, gy = u.grad_polar_xy(r, th)
    # nu = -e_r on the inner circle
    nux, nuy = -np.cos(th), -np.sin(th)
    grad_sq = u.grad_sq(r)
    term_A = -float(np.dot(wth, grad_sq * (ev[:, 0] * nux + ev[:, 1] * nuy)) * eps)
    du_dnu = gx * nux + gy * nuy
    eta_dot_grad = ev[:, 0] * gx + ev[:, 1] * gy
    term_B = -2.0 * float(np.dot(wth, du_dnu * eta_dot_grad) * eps)
    return term_A, term_B


# ---------------------------------------------------------------------------
# the three cross-terms of the tilted 3D family
# ---------------------------------------------------------------------------

def udelta_cross_terms(delta: float, eta: TestVectorField,
                       n_panels: int = 12, n_gauss: int = 8) -> Tuple[float, float, float]:
    """The three integrals whose vanishing upgrades crack-front to u_delta
    stationarity:

        T1 = delta int dx(u0) dz(eta^1) + dy(u0) dz(eta^2)
        T2 = delta int <grad u0, grad eta^3>
        T3 = delta^2 int dz(eta^3)

    evaluated independently by cylindrical quadrature (radial substitution
    rho = s^2; each vanishes by Fubini or by the 2D Euler equation).
    """
    if eta.dim != 3:
        raise ValueError("cross terms need a 3D test field")
    u0 = CracktipFunction(delta=0.0)
    r_max, (lo, hi) = _support_extents(eta)
    s, ws = gauss_panels(np.linspace(0.0, np.sqrt(r_max), n_panels + 1), n_gauss)
    th, wth = gauss_panels(np.linspace(-np.pi, np.pi, 2 * n_panels + 1), n_gauss)
    z, wz = gauss_panels(np.linspace(lo[2] - 0.05, hi[2] + 0.05, n_panels + 1), n_gauss)
    T1 = T2 = T3 = 0.0
    for zi, wzi in zip(z, wz):
        S, T = np.meshgrid(s, th, indexing="ij")
        rho, theta = (S * S).ravel(), T.ravel()
        pts = np.column_stack([rho * np.cos(theta), rho * np.sin(theta),
                               np.full(rho.size, zi)])
        J = eta.jacobian(pts)
        gx, gy = u0.grad_polar_xy(rho, theta)
        meas = (np.outer(ws, wth)).ravel() * rho * 2.0 * S.ravel()
        T1 += wzi * float(np.dot(meas, gx * J[:, 0, 2] + gy * J[:, 1, 2]))
        T2 += wzi * float(np.dot(meas, gx * J[:, 2, 0] + gy * J[:, 2, 1]))
        T3 += wzi * float(np.dot(meas, J[:, 2, 2]))
    return delta * T1, delta * T2, delta * delta * T3
