"""Exact domains, crack sets, and branch-cut-aware polar coordinates.

The two crack geometries of interest are the half-line
``K0 = (-inf, 0] x {0}`` in the plane and the half-plane ``P0 = K0 x R``
in space.  The polar angle carries its branch cut exactly on K0, so
``theta`` lives in (-pi, pi) off the crack and on-crack points need an
explicit side tag to pick the theta -> +pi or theta -> -pi limit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

__all__ = [
    "Domain",
    "CrackGeometry",
    "PolarPoint",
    "to_polar",
    "from_polar",
    "surface_measure",
    "clipped_mesh_area",
    "halfplane_mesh",
    "tilted_plane_mesh",
    "helicoid_mesh",
    "save_triangles",
    "load_triangles",
]


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Domain:
    """Axis-aligned reference domain centered at ``center``.

    kind:
        ``disk(radius)`` and ``ball(radius)`` are the round domains,
        ``cylinder(radius, half_height)`` is B_2D(0, radius) x
        [-half_height, half_height], and ``excised(radius, inner_radius)``
        is the annular domain with a ball of radius ``inner_radius``
        removed from the center (an annulus in 2D; with ``half_height``
        set, a cylinder with a coaxial core removed).
    """

    kind: str
    radius: float
    half_height: Optional[float] = None
    inner_radius: Optional[float] = None
    center: Tuple[float, ...] = (0.0, 0.0)

    def __post_init__(self):
        if self.kind not in ("disk", "ball", "cylinder", "excised"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if self.kind == "cylinder" and not (self.half_height or 0) > 0:
            raise ValueError("cylinder needs half_height > 0")
        if self.kind == "excised":
            if self.inner_radius is None or not 0 < self.inner_radius < self.radius:
                raise ValueError("excised domain needs 0 < inner_radius < radius")
        if len(self.center) != self.dim:
            object.__setattr__(self, "center", tuple(self.center) + (0.0,) * (self.dim - len(self.center)))

    @property
    def dim(self) -> int:
        if self.kind in ("ball", "cylinder"):
            return 3
        if self.kind == "excised" and self.half_height is not None:
            return 3
        return 2

    @property
    def volume(self) -> float:
        """Closed-form area (2D) / volume (3D)."""
        R = self.radius
        if self.kind == "disk":
            return np.pi * R * R
        if self.kind == "ball":
            return 4.0 / 3.0 * np.pi * R ** 3
        if self.kind == "cylinder":
            return 2.0 * np.pi * R * R * self.half_height
        e = self.inner_radius
        if self.half_height is None:
            return np.pi * (R * R - e * e)
        return 2.0 * np.pi * (R * R - e * e) * self.half_height

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Vectorized membership test for the closed domain."""
        p = np.atleast_2d(np.asarray(points, dtype=float)) - np.asarray(self.center)
        rho2 = p[:, 0] ** 2 + p[:, 1] ** 2
        R2 = self.radius ** 2
        if self.kind in ("disk", "ball"):
            r2 = rho2 if self.kind == "disk" else rho2 + p[:, 2] ** 2
            inside = r2 <= R2
        elif self.kind == "cylinder":
            inside = (rho2 <= R2) & (np.abs(p[:, 2]) <= self.half_height)
        else:
            inside = (rho2 <= R2) & (rho2 >= self.inner_radius ** 2)
            if self.half_height is not None:
                inside &= np.abs(p[:, 2]) <= self.half_height
        return inside if np.ndim(points) > 1 else bool(inside[0])

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        c = np.asarray(self.center)
        R = self.radius
        if self.dim == 2:
            half = np.array([R, R])
        elif self.kind == "ball":
            half = np.array([R, R, R])
        else:
            half = np.array([R, R, self.half_height])
        return c - half, c + half


# ---------------------------------------------------------------------------
# crack sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CrackGeometry:
    """Crack set: exact {halfline K0, halfplane P0, line} or a triangulated surface.

    The exact kinds are *not* meshed; analytic code paths treat them
    symbolically.  Triangulated surfaces store vertices as an (n, 3, 3)
    array, one triangle per row, and orient per-triangle unit normals by
    the right-hand rule on the vertex order.
    """

    kind: str
    triangles: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in ("halfline", "halfplane", "line", "triangulated"):
            raise ValueError(f"unknown crack kind {self.kind!r}")
        if self.kind == "triangulated":
            tri = np.asarray(self.triangles, dtype=float)
            if tri.ndim != 3 or tri.shape[1:] != (3, 3):
                raise ValueError("triangles must have shape (n, 3, 3)")
            object.__setattr__(self, "triangles", tri)
            if tri.shape[0] and not np.all(self.triangle_areas() > 0):
                raise ValueError("every triangle must have positive area")
        elif self.triangles is not None:
            raise ValueError(f"{self.kind} crack carries no mesh")

    # constructors for the named sets
    @classmethod
    def halfline(cls) -> "CrackGeometry":
        return cls("halfline")

    @classmethod
    def halfplane(cls) -> "CrackGeometry":
        return cls("halfplane")

    @classmethod
    def line(cls) -> "CrackGeometry":
        return cls("line")

    @classmethod
    def from_triangles(cls, triangles: np.ndarray) -> "CrackGeometry":
        return cls("triangulated", np.asarray(triangles, dtype=float))

    @property
    def dim(self) -> int:
        return 2 if self.kind in ("halfline", "line") else 3

    def triangle_areas(self) -> np.ndarray:
        t = self.triangles
        cross = np.cross(t[:, 1] - t[:, 0], t[:, 2] - t[:, 0])
        return 0.5 * np.linalg.norm(cross, axis=1)

    def triangle_normals(self) -> np.ndarray:
        """Unit normals by the right-hand rule on vertex order."""
        t = self.triangles
        cross = np.cross(t[:, 1] - t[:, 0], t[:, 2] - t[:, 0])
        nrm = np.linalg.norm(cross, axis=1, keepdims=True)
        return cross / nrm

    def area(self) -> float:
        return float(self.triangle_areas().sum())


# ---------------------------------------------------------------------------
# polar coordinates with the branch cut on K0
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolarPoint:
    """Polar/cylindrical coordinates; ``side`` tags on-crack points."""

    r: float
    theta: float
    z: Optional[float] = None
    side: Optional[str] = None  # {"above", "below"} for points on the crack

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("r must be >= 0")
        if self.side not in (None, "above", "below"):
            raise ValueError("side must be 'above' or 'below'")

    def to_cartesian(self) -> np.ndarray:
        if self.side is not None:
            # exact on-crack point: y = +-0 by convention
            p = np.array([-self.r, 0.0])
        else:
            p = np.array([self.r * np.cos(self.theta), self.r * np.sin(self.theta)])
        if self.z is not None:
            p = np.append(p, self.z)
        return p


def to_polar(p, side_hint: Optional[str] = None) -> PolarPoint:
    """Cartesian -> polar with the branch cut on K0.

    Points exactly on the open crack (y == 0, x < 0) are ambiguous: the
    angle jumps from +pi to -pi there, so a ``side_hint`` in
    {"above", "below"} is required and selects the one-sided limit.
    """
    p = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(p)):
        raise ValueError("point must be finite")
    x, y = p[0], p[1]
    z = float(p[2]) if p.shape[0] == 3 else None
    r = float(np.hypot(x, y))
    if y == 0.0 and x < 0.0:
        if side_hint is None:
            raise ValueError("branch ambiguity: point lies on the crack, pass side_hint")
        theta = np.pi if side_hint == "above" else -np.pi
        return PolarPoint(r, theta, z, side=side_hint)
    theta = float(np.arctan2(y, x))
    return PolarPoint(r, theta, z)


def from_polar(pp: PolarPoint) -> np.ndarray:
    return pp.to_cartesian()


# ---------------------------------------------------------------------------
# surface measure H^{N-1}(K \cap D)
# ---------------------------------------------------------------------------

def _chord_half_width(R: float, offset: float) -> float:
    # half-width of the chord cut by a line at distance |offset| from the center
    s = R * R - offset * offset
    return np.sqrt(s) if s > 0 else 0.0


def _halfline_in_disk(D: Domain, R: float) -> float:
    cx, cy = D.center[0], D.center[1]
    w = _chord_half_width(R, cy)
    if w == 0.0:
        return 0.0
    return max(0.0, min(cx + w, 0.0) - (cx - w))


def _halfplane_in_ball(D: Domain) -> float:
    # plane {y=0} cuts the ball in a disk of radius rho; keep the part {x<=0}
    cx, cy = D.center[0], D.center[1]
    rho = _chord_half_width(D.radius, cy)
    if rho == 0.0:
        return 0.0
    a = cx  # signed distance of the slice-disk center to the front line {x=0}
    if a <= -rho:
        return np.pi * rho * rho
    if a >= rho:
        return 0.0
    return rho * rho * np.arccos(a / rho) - a * np.sqrt(rho * rho - a * a)


def surface_measure(K: CrackGeometry, D: Domain, with_error: bool = False):
    """H^{N-1} measure of ``K`` inside ``D``.

    Closed forms for the exact crack kinds against {disk, ball, cylinder,
    excised}; triangulated surfaces fall back to adaptive clipping, which
    reports its own error estimate (pass ``with_error=True`` to get it).
    """
    if K.kind == "triangulated":
        area, err = clipped_mesh_area(K, D)
        return (area, err) if with_error else area
    if K.dim != D.dim:
        raise ValueError(f"{K.kind} crack and {D.kind} domain have mismatched dimension")

    cx, cy = D.center[0], D.center[1]
    if K.kind == "halfline":
        if D.kind == "disk":
            val = _halfline_in_disk(D, D.radius)
        else:  # excised annulus
            val = _halfline_in_disk(D, D.radius) - _halfline_in_disk(D, D.inner_radius)
    elif K.kind == "line":
        if D.kind == "disk":
            val = 2.0 * _chord_half_width(D.radius, cy)
        else:
            val = 2.0 * (_chord_half_width(D.radius, cy) - _chord_half_width(D.inner_radius, cy))
    else:  # halfplane
        if D.kind == "ball":
            val = _halfplane_in_ball(D)
        elif D.kind == "cylinder":
            val = _halfline_in_disk(D, D.radius) * 2.0 * D.half_height
        else:  # excised cylinder
            w = _halfline_in_disk(D, D.radius) - _halfline_in_disk(D, D.inner_radius)
            val = w * 2.0 * D.half_height
    val = float(val)
    return (val, 0.0) if with_error else val


def clipped_mesh_area(K: CrackGeometry, D: Domain, max_depth: int = 7) -> Tuple[float, float]:
    """Area of a triangulated surface inside ``D`` by recursive subdivision.

    Leaf triangles entirely inside/outside are counted exactly; straddling
    leaves at the depth limit contribute half their area and all of it to
    the error estimate.  First-order accurate in the leaf size.
    """
    if K.kind != "triangulated":
        raise ValueError("clipped_mesh_area needs a triangulated crack")

    area = 0.0
    err = 0.0
    stack = [(t, 0) for t in K.triangles]
    while stack:
        tri, depth = stack.pop()
        probes = np.vstack([tri, tri.mean(axis=0)])
        inside = D.contains(probes)
        a = 0.5 * np.linalg.norm(np.cross(tri[1] - tri[0], tri[2] - tri[0]))
        if inside.all():
            area += a
        elif not inside.any():
            continue
        elif depth >= max_depth or a == 0.0:
            area += 0.5 * a
            err += 0.5 * a
        else:
            m01 = 0.5 * (tri[0] + tri[1])
            m12 = 0.5 * (tri[1] + tri[2])
            m20 = 0.5 * (tri[2] + tri[0])
            for sub in ((tri[0], m01, m20), (tri[1], m12, m01), (tri[2], m20, m12), (m01, m12, m20)):
                stack.append((np.vstack(sub), depth + 1))
    return float(area), float(err)


# ---------------------------------------------------------------------------
# synthetic meshes (flat, tilted, helically twisted half-planes)
# ---------------------------------------------------------------------------

def _quads_to_triangles(grid: np.ndarray) -> np.ndarray:
    # grid: (ns, nt, 3) vertex lattice -> 2 triangles per quad
    a = grid[:-1, :-1]
    b = grid[1:, :-1]
    c = grid[1:, 1:]
    d = grid[:-1, 1:]
    t1 = np.stack([a, b, c], axis=2)
    t2 = np.stack([a, c, d], axis=2)
    return np.concatenate([t1, t2], axis=2).reshape(-1, 3, 3)


def halfplane_mesh(n_x: int = 16, n_z: int = 16, half_height: float = 1.0) -> CrackGeometry:
    """Uniform triangulation of P0 within the unit cylinder: [-1,0] x {0} x [-h,h]."""
    x = np.linspace(-1.0, 0.0, n_x + 1)
    z = np.linspace(-half_height, half_height, n_z + 1)
    X, Z = np.meshgrid(x, z, indexing="ij")
    grid = np.stack([X, np.zeros_like(X), Z], axis=-1)
    return CrackGeometry.from_triangles(_quads_to_triangles(grid))


def tilted_plane_mesh(alpha: float, n_s: int = 16, n_t: int = 16,
                      s_range=(-1.0, 0.0), t_range=(-1.0, 1.0)) -> CrackGeometry:
    """Planar mesh tilted by ``alpha`` from vertical (rotation about the x-axis).

    The unit normal is (0, cos a, sin a), so the co-area factor
    |sin(theta)| is cos(alpha) on every triangle.
    """
    s = np.linspace(*s_range, n_s + 1)
    t = np.linspace(*t_range, n_t + 1)
    S, T = np.meshgrid(s, t, indexing="ij")
    grid = np.stack([S, -T * np.sin(alpha), T * np.cos(alpha)], axis=-1)
    return CrackGeometry.from_triangles(_quads_to_triangles(grid))


def helicoid_mesh(pitch: float, n_s: int = 24, n_z: int = 48,
                  radius: float = 1.0, half_height: float = 1.0) -> CrackGeometry:
    """Helically twisted half-plane: the z-slice at height z is a radius at
    angle ``pi + pitch*z`` (so pitch=0 recovers the flat P0).

    Total twist between z = -h and z = +h is ``2*pitch*h``.
    """
    s = np.linspace(0.0, radius, n_s + 1)
    z = np.linspace(-half_height, half_height, n_z + 1)
    S, Z = np.meshgrid(s, z, indexing="ij")
    A = np.pi + pitch * Z
    grid = np.stack([S * np.cos(A), S * np.sin(A), Z], axis=-1)
    tri = _quads_to_triangles(grid)
    areas = 0.5 * np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1)
    return CrackGeometry.from_triangles(tri[areas > 1e-16])


# ---------------------------------------------------------------------------
# triangle-soup ASCII interchange: one triangle per line, nine coordinates
# ---------------------------------------------------------------------------

def save_triangles(K: CrackGeometry, path) -> None:
    if K.kind != "triangulated":
        raise ValueError("only triangulated cracks are exported")
    with open(path, "w") as fh:
        for tri in K.triangles:
            fh.write(" ".join("%.17g" % v for v in tri.ravel()) + "\n")


def load_triangles(path) -> CrackGeometry:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            vals = [float(v) for v in line.split()]
            if len(vals) != 9:
                raise ValueError("each line must hold nine coordinates")
            rows.append(np.asarray(vals).reshape(3, 3))
    tri = np.asarray(rows) if rows else np.zeros((0, 3, 3))
    return CrackGeometry.from_triangles(tri)
