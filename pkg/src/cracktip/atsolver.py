"""Phase-field (elliptic-regularized) free-discontinuity solver.

Minimizes the functional

    E(u, phi) = int (k + phi^2) |grad u|^2
              + eps |grad phi|^2 + (1 - phi)^2 / (4 eps)

on a node grid masked to the domain, by exact alternating minimization:
each sweep solves the phi-subproblem and then the u-subproblem to
conjugate-gradient tolerance, so the energy trace is non-increasing up
to that tolerance.

Discretization notes (these choices are load-bearing):

* The grid is staggered in y: no node lies on the y = 0 plane, so the
  trace of the singular function is evaluated away from its branch cut
  and the discontinuity falls between node layers.
* Cell energies use edge differences averaged over the parallel edges
  of each cell, and the phi^2 weight enters through the cell mean of
  phi^2.  The resulting phi-system matrix is an M-matrix, so the solved
  phi stays in [0, 1] up to CG tolerance with no clamping.
* Dirichlet data is imposed on every participating node that touches a
  missing or inactive cell (a staircase collar), with values sampled
  from the closed-form singular function.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .analytic import C0_DEFAULT, EnergyBreakdown

__all__ = [
    "Grid",
    "ScalarField",
    "ATConfig",
    "ATState",
    "make_grid",
    "solve",
    "at_energy",
    "insert_state",
    "dz_cell_stats",
    "sdelta_trend",
]

_RIM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Grid:
    """Structured node grid with an activity mask.

    Attributes
    ----------
    kind : str
        "cylinder", "disk", or "interval".
    h : float
        Uniform spacing, all axes.
    origins : tuple of float
        Coordinate of node index 0 along each axis.
    shape : tuple of int
        Node counts per axis.
    active : ndarray of bool
        True where the node lies inside the closed domain.
    """

    kind: str
    h: float
    origins: Tuple[float, ...]
    shape: Tuple[int, ...]
    active: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.shape)

    def axes(self) -> List[np.ndarray]:
        return [o + self.h * np.arange(n) for o, n in zip(self.origins, self.shape)]

    def coords(self) -> List[np.ndarray]:
        """Sparse broadcastable coordinate arrays (indexing='ij')."""
        return list(np.meshgrid(*self.axes(), indexing="ij", sparse=True))

    def cell_mask(self) -> np.ndarray:
        """Cells whose 2^d corners are all active."""
        m = self.active
        for ax in range(self.dim):
            lo = [slice(None)] * self.dim
            hi = [slice(None)] * self.dim
            lo[ax] = slice(0, -1)
            hi[ax] = slice(1, None)
            m = m[tuple(lo)] & m[tuple(hi)]
        return m

    def node_masks(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(participating, interior, dirichlet) node masks.

        participating: corner of at least one active cell.
        interior: all 2^d incident cells exist and are active (the
        u-unknowns).  dirichlet: participating but not interior.
        """
        frac = _kernels.node_cell_avg(self.cell_mask().astype(float))
        participating = frac > 0.0
        interior = frac >= 1.0 - _RIM_TOL
        return participating, interior, participating & ~interior

    def active_volume(self) -> float:
        return float(self.cell_mask().sum()) * self.h ** self.dim


def make_grid(domain: str, n: int) -> Grid:
    """Build the node grid for a named domain at resolution ``n`` (h = 2/n).

    "cylinder": unit-radius cylinder, height [-1, 1]; "disk": unit disk;
    "interval": [-1, 1].  The y axis is staggered by h/2 so no node sits
    on the crack plane; ``n`` must be even for disk/cylinder so the
    stagger cannot land a node on y = 0.  An odd ``n`` on the interval
    puts the midpoint between nodes instead, which is where a centered
    jump wants to sit.
    """
    if n < 4 or (n % 2 and domain != "interval"):
        raise ValueError(f"grid resolution must be even and >= 4, got n={n}")
    h = 2.0 / n
    if domain == "interval":
        shape: Tuple[int, ...] = (n + 1,)
        origins: Tuple[float, ...] = (-1.0,)
        active = np.ones(shape, dtype=bool)
        return Grid("interval", h, origins, shape, active)
    if domain in ("disk", "cylinder"):
        xs = -1.0 + h * np.arange(n + 1)
        ys = -1.0 - 0.5 * h + h * np.arange(n + 2)
        rad2 = xs[:, None] ** 2 + ys[None, :] ** 2
        in_disk = rad2 <= 1.0 + _RIM_TOL
        if domain == "disk":
            return Grid("disk", h, (-1.0, -1.0 - 0.5 * h), (n + 1, n + 2), in_disk)
        active = np.broadcast_to(in_disk[:, :, None], (n + 1, n + 2, n + 1)).copy()
        return Grid(
            "cylinder",
            h,
            (-1.0, -1.0 - 0.5 * h, -1.0),
            (n + 1, n + 2, n + 1),
            active,
        )
    raise ValueError(f"unknown domain {domain!r}")


@dataclass(eq=False)
class ScalarField:
    """Node-valued field on a :class:`Grid`."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"field shape {self.values.shape} != grid shape {self.grid.shape}"
            )

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


_DOMAINS = ("cylinder", "disk", "interval")
_PHI_INITS = ("uniform", "profile")


@dataclass(frozen=True)
class ATConfig:
    """Run parameters for :func:`solve`.

    ``eps`` is the phase-field width; it must resolve on the grid
    (eps >= 2h).  ``alt_tol`` stops the alternating sweeps once the
    relative energy decrease falls below it; ``max_sweeps`` caps them.
    ``noise_amp`` perturbs the initial phi (seeded) to break symmetry.
    """

    domain: str = "cylinder"
    n: int = 32
    eps: float = 0.125
    delta: float = 0.0
    k_floor: float = 1e-6
    alt_tol: float = 1e-7
    max_sweeps: int = 400
    cg_tol: float = 1e-10
    cg_maxiter: int = 50000
    seed: Optional[int] = None
    noise_amp: float = 0.0
    phi_init: str = "uniform"

    def __post_init__(self):
        if self.domain not in _DOMAINS:
            raise ValueError(f"unknown domain {self.domain!r}; expected one of {_DOMAINS}")
        if self.n < 4 or (self.n % 2 and self.domain != "interval"):
            raise ValueError(f"n must be even and >= 4, got {self.n}")
        if self.phi_init not in _PHI_INITS:
            raise ValueError(f"phi_init must be one of {_PHI_INITS}, got {self.phi_init!r}")
        h = 2.0 / self.n
        if self.eps < 2.0 * h - _RIM_TOL:
            raise ValueError(
                f"eps={self.eps:g} is under-resolved on h={h:g}: need eps >= 2h = {2 * h:g}"
            )
        for name in ("k_floor", "alt_tol", "cg_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")

    @property
    def h(self) -> float:
        return 2.0 / self.n

    def to_file(self, path: str) -> None:
        keys = [f.name for f in fields(self)]
        with open(path, "w") as fh:
            for k in keys:
                v = getattr(self, k)
                fh.write(f"{k} = {'none' if v is None else v}\n")

    @classmethod
    def from_file(cls, path: str) -> "ATConfig":
        """Parse a flat ``key = value`` file ('#' starts a comment).

        ``h`` may be given instead of ``n`` and is converted.
        """
        raw: Dict[str, str] = {}
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                m = re.match(r"([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.+)$", line)
                if not m:
                    raise ValueError(f"{path}:{lineno}: cannot parse {line!r}")
                raw[m.group(1)] = m.group(2).strip()
        if "h" in raw:
            if "n" in raw:
                raise ValueError(f"{path}: give n or h, not both")
            raw["n"] = str(round(2.0 / float(raw.pop("h"))))
        known = {f.name: f for f in fields(cls)}
        kwargs: Dict[str, object] = {}
        for k, v in raw.items():
            if k not in known:
                raise ValueError(f"{path}: unknown config key {k!r}")
            if k in ("domain", "phi_init"):
                kwargs[k] = v
            elif k in ("n", "max_sweeps", "cg_maxiter"):
                kwargs[k] = int(v)
            elif k == "seed":
                kwargs[k] = None if v.lower() == "none" else int(v)
            else:
                kwargs[k] = float(v)
        return cls(**kwargs)


@dataclass(eq=False)
class ATState:
    """Solver output: fields, energy trace, and termination info.

    ``energy_trace[0]`` is the energy after initialization (first
    u-solve included); one entry is appended per sweep.  ``sweeps == 0``
    marks an assembled (not solved) state.
    """

    u: ScalarField
    phi: ScalarField
    config: ATConfig
    energy_trace: List[float] = field(default_factory=list)
    sweeps: int = 0
    converged: bool = False
    cg_iterations: int = 0

    @property
    def energy(self) -> float:
        return self.energy_trace[-1]


def _trace_values(grid: Grid, delta: float) -> np.ndarray:
    """Dirichlet data on the full node grid.

    2D/3D: the crack-tip square-root function (plus delta * z in 3D),
    well defined at every node because of the y stagger.  1D: the ramp
    u = x, whose endpoint gap of 2 makes a jump cheaper than a ramp.
    """
    if grid.dim == 1:
        return grid.axes()[0].copy()
    c = grid.coords()
    x, y = c[0], c[1]
    r = np.hypot(x, y)
    theta = np.arctan2(y, x)
    vals = C0_DEFAULT * np.sqrt(r) * np.sin(0.5 * theta)
    if grid.dim == 3:
        vals = vals + delta * c[2]
    else:
        vals = vals + np.zeros_like(y)  # broadcast to the full shape
    return np.ascontiguousarray(np.broadcast_to(vals, grid.shape))


def _pcg(apply_a, b, x0, diag, tol, maxiter, what):
    """Jacobi-preconditioned conjugate gradients, fixed operation order."""
    x = x0.copy()
    r = b - apply_a(x)
    bnorm = float(np.linalg.norm(b))
    target = tol * (bnorm if bnorm > 0 else 1.0)
    z = r / diag
    p = z.copy()
    rz = float(r @ z)
    for it in range(maxiter + 1):
        if float(np.linalg.norm(r)) <= target:
            return x, it
        if it == maxiter:
            break
        ap = apply_a(p)
        pap = float(p @ ap)
        if pap <= 0.0:
            raise RuntimeError(f"{what}: PCG breakdown (curvature {pap:g}) at iteration {it}")
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        z = r / diag
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise RuntimeError(
        f"{what}: PCG did not converge in {maxiter} iterations "
        f"(residual {float(np.linalg.norm(r)):.3e}, target {target:.3e})"
    )


class _Problem:
    """Precomputed masks, index lists, and constant arrays for one solve."""

    def __init__(self, config: ATConfig):
        self.config = config
        self.grid = make_grid(config.domain, config.n)
        g = self.grid
        self.h = g.h
        self.dim = g.dim
        self.hd = g.h ** g.dim
        self.cells = g.cell_mask()
        self.cell_ind = self.cells.astype(float)
        self.part, self.interior, self.dirichlet = g.node_masks()
        self.idx_u = np.flatnonzero(self.interior.ravel())
        self.idx_phi = np.flatnonzero(self.part.ravel())
        self.trace = _trace_values(g, config.delta)
        self.u_bc = np.where(self.dirichlet, self.trace, 0.0)

        he = g.h ** (g.dim - 2)
        eps = config.eps
        self.w_phi = [
            eps * he * _kernels.edge_weights(self.cell_ind, ax) for ax in range(g.dim)
        ]
        self.c_node = (self.hd / (4.0 * eps)) * _kernels.node_cell_avg(self.cell_ind)
        self.lapdiag_phi = _kernels.lap_diag(g.shape, self.w_phi)

    # -- vector packing ------------------------------------------------
    def _gather(self, full, idx):
        return full.ravel()[idx]

    def _scatter(self, vec, idx):
        full = np.zeros(self.grid.shape)
        full.ravel()[idx] = vec
        return full

    # -- subproblem solves ---------------------------------------------
    def u_step(self, u_full, phi_full):
        cfg = self.config
        cw = self.cell_ind * (cfg.k_floor + _kernels.cell_mean(phi_full * phi_full))
        he = self.h ** (self.dim - 2)
        w_u = [he * _kernels.edge_weights(cw, ax) for ax in range(self.dim)]
        if self.idx_u.size == 0:
            return self.u_bc.copy(), 0
        b = self._gather(-_kernels.lap_apply(self.u_bc, w_u), self.idx_u)
        diag = self._gather(_kernels.lap_diag(self.grid.shape, w_u), self.idx_u)

        def apply_a(vec):
            return self._gather(
                _kernels.lap_apply(self._scatter(vec, self.idx_u), w_u), self.idx_u
            )

        x0 = self._gather(u_full, self.idx_u)
        x, iters = _pcg(apply_a, b, x0, diag, cfg.cg_tol, cfg.cg_maxiter, "u-step")
        out = self.u_bc.copy()
        out.ravel()[self.idx_u] = x
        return out, iters

    def phi_step(self, u_full, phi_full):
        cfg = self.config
        g_cell = self.cell_ind * _kernels.cell_grad_sq(u_full, self.h)
        b_node = self.hd * _kernels.node_cell_avg(g_cell)
        dmass = b_node + self.c_node
        diag = self._gather(dmass + self.lapdiag_phi, self.idx_phi)
        rhs = self._gather(self.c_node, self.idx_phi)
        dmass_flat = self._gather(dmass, self.idx_phi)

        def apply_a(vec):
            full = self._scatter(vec, self.idx_phi)
            out = self._gather(_kernels.lap_apply(full, self.w_phi), self.idx_phi)
            return out + dmass_flat * vec

        x0 = self._gather(phi_full, self.idx_phi)
        x, iters = _pcg(apply_a, rhs, x0, diag, cfg.cg_tol, cfg.cg_maxiter, "phi-step")
        out = np.ones(self.grid.shape)
        out.ravel()[self.idx_phi] = x
        return out, iters

    def energy(self, u_full, phi_full) -> Tuple[float, float]:
        cfg = self.config
        g_cell = _kernels.cell_grad_sq(u_full, self.h)
        wbar = _kernels.cell_mean(phi_full * phi_full)
        p_cell = _kernels.cell_grad_sq(phi_full, self.h)
        m_cell = _kernels.cell_mean((1.0 - phi_full) ** 2)
        bulk = self.hd * float((self.cell_ind * (cfg.k_floor + wbar) * g_cell).sum())
        surf = self.hd * float(
            (self.cell_ind * (cfg.eps * p_cell + m_cell / (4.0 * cfg.eps))).sum()
        )
        return bulk, surf


def _profile_phi(grid: Grid, eps: float) -> np.ndarray:
    """Transition profile seeded on the straight crack: 1 - exp(-d / 2 eps),
    d = distance to the half-plane reduced by h/2 so the node layers
    flanking the crack carry phi = 0 exactly."""
    if grid.dim == 1:
        x = grid.axes()[0]
        d = np.abs(x)
    else:
        c = grid.coords()
        x, y = c[0], c[1]
        d = np.where(x <= 0.0, np.abs(y), np.hypot(x, y)) + np.zeros(grid.shape)
    d = np.maximum(d - 0.5 * grid.h, 0.0)
    return 1.0 - np.exp(-d / (2.0 * eps))


def solve(config: ATConfig, phi0: Optional[np.ndarray] = None) -> ATState:
    """Alternating minimization from a uniform (or seeded) initial phi.

    The initializer runs one u-solve against the initial phi; each sweep
    is then a phi-solve followed by a u-solve.  Iteration stops when the
    energy decrease over a sweep falls below ``alt_tol * max(1, |E|)``
    or at ``max_sweeps`` (reported via ``converged``).
    """
    prob = _Problem(config)
    grid = prob.grid

    if phi0 is not None:
        phi = np.asarray(phi0, dtype=float).copy()
        if phi.shape != grid.shape:
            raise ValueError(f"phi0 shape {phi.shape} != grid shape {grid.shape}")
    elif config.phi_init == "profile":
        phi = _profile_phi(grid, config.eps)
    else:
        phi = np.ones(grid.shape)
    if config.noise_amp > 0.0:
        rng = np.random.default_rng(config.seed)
        noise = config.noise_amp * rng.uniform(-1.0, 1.0, size=grid.shape)
        phi = np.clip(phi + np.where(prob.part, noise, 0.0), 0.0, 1.0)

    u = prob.u_bc.copy()
    u, it0 = prob.u_step(u, phi)
    cg_total = it0
    trace = [sum(prob.energy(u, phi))]

    sweeps = 0
    converged = False
    for sweeps in range(1, config.max_sweeps + 1):
        phi, it_p = prob.phi_step(u, phi)
        u, it_u = prob.u_step(u, phi)
        cg_total += it_p + it_u
        e = sum(prob.energy(u, phi))
        trace.append(e)
        drop = trace[-2] - trace[-1]
        if abs(drop) <= config.alt_tol * max(1.0, abs(e)):
            converged = True
            break

    return ATState(
        u=ScalarField(grid, u),
        phi=ScalarField(grid, phi),
        config=config,
        energy_trace=trace,
        sweeps=sweeps,
        converged=converged,
        cg_iterations=cg_total,
    )


def at_energy(state: ATState) -> EnergyBreakdown:
    """Energy of a state under its own configuration, split into the
    weighted Dirichlet part and the phase-field surface surrogate."""
    prob = _Problem(state.config)
    bulk, surf = prob.energy(state.u.values, state.phi.values)
    return EnergyBreakdown(dirichlet=bulk, surface=surf, provenance="discrete")


def insert_state(config: ATConfig) -> ATState:
    """Assemble (without solving) the sharp competitor state: u sampled
    from the closed-form singular function and phi the transition
    profile of the straight crack.  2D/3D only."""
    if config.domain == "interval":
        raise ValueError("insert_state needs a crack geometry; use a disk or cylinder domain")
    prob = _Problem(config)
    grid = prob.grid
    u = np.where(prob.part, prob.trace, 0.0)
    phi = np.where(prob.part, _profile_phi(grid, config.eps), 1.0)
    state = ATState(
        u=ScalarField(grid, u),
        phi=ScalarField(grid, phi),
        config=config,
        sweeps=0,
        converged=False,
    )
    state.energy_trace = [sum(prob.energy(u, phi))]
    return state


def dz_cell_stats(fld: ScalarField) -> Tuple[float, float, float]:
    """Cell statistics of the axial derivative on a 3D grid.

    Returns ``(volume, int dz_u, int (dz_u)^2)`` over active cells, with
    the same per-cell edge averaging as the energy (mean of the squared
    edge differences for the quadratic term).
    """
    grid = fld.grid
    if grid.dim != 3:
        raise ValueError(f"axial statistics need a 3D grid, got dim={grid.dim}")
    h = grid.h
    dz = np.diff(fld.values, axis=2) / h
    mean_dz = dz
    mean_dz2 = dz * dz
    for ax in (0, 1):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[ax] = slice(0, -1)
        hi[ax] = slice(1, None)
        mean_dz = 0.5 * (mean_dz[tuple(lo)] + mean_dz[tuple(hi)])
        mean_dz2 = 0.5 * (mean_dz2[tuple(lo)] + mean_dz2[tuple(hi)])
    ind = grid.cell_mask().astype(float)
    h3 = h ** 3
    vol = h3 * float(ind.sum())
    return (
        vol,
        h3 * float((ind * mean_dz).sum()),
        h3 * float((ind * mean_dz2).sum()),
    )


def sdelta_trend(
    deltas: Sequence[float], base: ATConfig
) -> List[Dict[str, float]]:
    """Energy gap between the solved and the inserted state per delta.

    Each row reports the solved and inserted totals, their gap ``shat``,
    the reference scale ``2 delta^2 |C|`` (discrete cell volume), and
    the gap/scale ratio (inf at delta = 0).
    """
    rows: List[Dict[str, float]] = []
    for d in deltas:
        cfg = replace(base, delta=float(d))
        solved = solve(cfg)
        inserted = insert_state(cfg)
        vol = solved.u.grid.active_volume()
        shat = inserted.energy - solved.energy
        scale = 2.0 * d * d * vol
        rows.append(
            {
                "delta": float(d),
                "solved_total": solved.energy,
                "inserted_total": inserted.energy,
                "shat": shat,
                "scale": scale,
                "ratio": shat / scale if scale > 0 else math.inf,
            }
        )
    return rows
