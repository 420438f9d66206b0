"""Linear-plus-quadratic E x e Jahn-Teller model on the pseudorotation plane.

The two diabatic surfaces couple through a single complex field

    f(r, theta) = k r e^{i theta} + (g/2) r^2 e^{-2 i theta},

whose modulus is half the adiabatic gap and whose argument is the mixing
angle:

    2 Delta(r, theta) = gap,  Delta = |f| = sqrt(k^2 r^2 + k g r^3 cos 3theta
                                                 + g^2 r^4 / 4),
    alpha(r, theta) = arg f.

The electronic Hamiltonian is Delta (sin alpha sigma_x + cos alpha sigma_z)
in the diabatic basis, so the adiabatic pair is (cos alpha/2, sin alpha/2)
and (-sin alpha/2, cos alpha/2) with energies r^2/2 +- Delta.  Degeneracies
sit at the origin and, for k, g > 0, at radius 2k/g under theta = pi/3, pi,
5pi/3.  Anchoring the lower branch at theta = 0 (where alpha = 0), its
overlap with the anchor is cos(alpha/2); the zeros of that overlap are the
node lines computed here both in closed form and through the generic
tracking pipeline.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .berryphase import detect_nodes, overlap_trace, refine_nodes, NodeSet
from .eigenpath import (
    DiscretizedPath,
    HamiltonianField,
    ParameterPoint,
    track_branch,
)
from .errors import AlphaUndefined, OnDegeneracyCircle, SampleOnNode

# Gap threshold below which the mixing angle is treated as undefined.
ALPHA_GAP_TOL = 1e-14

# Radii closer than this to 2k/g count as lying on the degeneracy circle.
DEGENERACY_CIRCLE_TOL = 1e-10


@dataclass(frozen=True)
class JTParams:
    """Linear (k) and quadratic (g) coupling constants, k, g >= 0, not both 0."""

    k: float
    g: float

    def __post_init__(self):
        if self.k < 0 or self.g < 0:
            raise ValueError(f"couplings must be >= 0, got k={self.k!r} g={self.g!r}")
        if self.k == 0 and self.g == 0:
            raise ValueError("k and g cannot both vanish")

    @property
    def degeneracy_radius(self) -> float | None:
        """Radius of the outer degeneracy circle, or None without one."""
        if self.k > 0 and self.g > 0:
            return 2.0 * self.k / self.g
        return None


def _coupling_field(p: JTParams, r: float, theta: float) -> complex:
    if r < 0:
        raise ValueError(f"radius must be >= 0, got {r!r}")
    return (p.k * r * cmath.exp(1j * theta)
            + 0.5 * p.g * r * r * cmath.exp(-2j * theta))


@dataclass(frozen=True)
class JTPointData:
    """Gap half-width, mixing angle and adiabatic energies at one point."""

    delta_E: float
    alpha: float
    energies: tuple[float, float]


def jt_point_data(p: JTParams, r: float, theta: float) -> JTPointData:
    """Delta, alpha and (E_minus, E_plus) at (r, theta).

    alpha is the principal argument in (-pi, pi].  Raises AlphaUndefined on
    the degeneracy set, where the angle has no value.
    """
    f = _coupling_field(p, r, theta)
    delta = abs(f)
    if delta <= ALPHA_GAP_TOL:
        raise AlphaUndefined(r, theta)
    alpha = math.atan2(f.imag, f.real)
    if alpha <= -math.pi:
        alpha = math.pi
    # sanity: polar pair must reproduce the coupling field
    err = abs(delta * cmath.exp(1j * alpha) - f)
    if err > 1e-12 * max(1.0, delta):
        raise RuntimeError(f"polar decomposition residual {err:.3e}")
    trap = 0.5 * r * r
    return JTPointData(delta_E=delta, alpha=alpha,
                       energies=(trap - delta, trap + delta))


def jt_electronic_hamiltonian(p: JTParams, r: float, theta: float) -> np.ndarray:
    """2x2 diabatic electronic matrix: Re f on the diagonal, Im f off it.

    Equal to Delta (sin alpha sigma_x + cos alpha sigma_z); traceless with
    eigenvalues +-Delta.  Well defined on the degeneracy set, where it is the
    zero matrix.
    """
    f = _coupling_field(p, r, theta)
    return np.array([[f.real, f.imag], [f.imag, -f.real]])


def jt_eigenvectors(p: JTParams, r: float, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form adiabatic pair (lower, upper) in the diabatic basis.

    lower = (-sin alpha/2, cos alpha/2), upper = (cos alpha/2, sin alpha/2).
    """
    alpha = jt_point_data(p, r, theta).alpha
    c, s = math.cos(0.5 * alpha), math.sin(0.5 * alpha)
    return np.array([-s, c]), np.array([c, s])


def jt_field(p: JTParams, frame: str = "polar") -> HamiltonianField:
    """The model as a HamiltonianField over polar (r, theta) or Cartesian (x, y)."""
    if frame == "polar":
        def fn(point: ParameterPoint) -> np.ndarray:
            return jt_electronic_hamiltonian(p, point.r, point.theta)
    elif frame == "cartesian":
        def fn(point: ParameterPoint) -> np.ndarray:
            r = math.hypot(point.x, point.y)
            theta = math.atan2(point.y, point.x)
            return jt_electronic_hamiltonian(p, r, theta)
    else:
        raise ValueError(f"frame must be 'polar' or 'cartesian', got {frame!r}")
    return HamiltonianField(dimension=2, matrix_fn=fn)


@dataclass(frozen=True)
class DegeneracyPoint:
    """A conical intersection; theta is None for the origin where it is moot."""

    r: float
    theta: float | None

    def cartesian(self) -> tuple[float, float]:
        if self.theta is None:
            return (0.0, 0.0)
        return (self.r * math.cos(self.theta), self.r * math.sin(self.theta))


def degeneracy_points(p: JTParams) -> tuple[DegeneracyPoint, ...]:
    """All conical intersections: the origin, plus three on r = 2k/g if k, g > 0."""
    pts = [DegeneracyPoint(0.0, None)]
    rc = p.degeneracy_radius
    if rc is not None:
        for t in (math.pi / 3.0, math.pi, 5.0 * math.pi / 3.0):
            pts.append(DegeneracyPoint(rc, t))
    return tuple(pts)


def node_angles_analytic(p: JTParams, r: float) -> tuple[float, ...]:
    """Closed-form node angles of the anchor overlap on the circle of radius r.

    Solves alpha(r, theta) = pi: theta = pi inside the degeneracy circle,
    theta = +-arccos(k / (g r)) outside it; pure linear coupling gives {pi},
    pure quadratic gives {pi/2, 3pi/2}.  Raises OnDegeneracyCircle within
    1e-10 of r = 2k/g, where the node structure changes discontinuously.
    """
    if r <= 0:
        raise ValueError(f"radius must be > 0, got {r!r}")
    if p.g == 0:
        return (math.pi,)
    if p.k == 0:
        return (0.5 * math.pi, 1.5 * math.pi)
    rc = p.degeneracy_radius
    if abs(r - rc) <= DEGENERACY_CIRCLE_TOL:
        raise OnDegeneracyCircle(r, rc)
    if r < rc:
        return (math.pi,)
    a = math.acos(p.k / (p.g * r))
    return (a, 2.0 * math.pi - a)


# Deterministic grid offsets (in units of the step) tried when a node lands
# exactly on a sample.
_GRID_OFFSETS = (0.0, 0.5, 0.25, 0.75, 0.125, 0.375)


def _anchored_circle(r: float, n_samples: int, offset: float) -> DiscretizedPath:
    """Closed circle grid that keeps theta = 0 as its first point.

    With offset > 0 the interior samples shift by offset * h while the anchor
    and the closure point stay at 0 and 2 pi, so the anchor convention
    alpha_0 = alpha(r, 0) survives resampling retries.
    """
    h = 2.0 * math.pi / n_samples
    if offset == 0.0:
        thetas = h * np.arange(n_samples + 1)
    else:
        interior = h * (offset + np.arange(n_samples))
        thetas = np.concatenate(([0.0], interior, [2.0 * math.pi]))
    pts = tuple(ParameterPoint.polar(r, t) for t in thetas)
    return DiscretizedPath(pts, closed=True)


def circle_nodes(p: JTParams, r: float, n_samples: int = 2048, band: int = 0,
                 refine_tol: float = 1e-10):
    """Numeric node pipeline on one circle: track, trace, detect, refine.

    When a node sits on the sampling grid the grid is shifted by deterministic
    fractions of a step (half step first) and the pipeline reruns; the anchor
    stays pinned at theta = 0 throughout.  Returns (branch, trace, nodes)
    with node angles folded into [0, 2 pi).
    """
    field = jt_field(p, frame="polar")
    last_error = None
    for offset in _GRID_OFFSETS:
        path = _anchored_circle(r, n_samples, offset)
        branch = track_branch(field, path, band=band)
        trace = overlap_trace(branch, anchor_index=0)
        try:
            nodes = detect_nodes(trace)
        except SampleOnNode as err:
            last_error = err
            continue
        nodes = refine_nodes(trace, nodes, tol=refine_tol)
        folded = sorted(a % (2.0 * math.pi) for a in nodes.angles)
        nodes = NodeSet(angles=tuple(folded), count=nodes.count,
                        parity=nodes.parity)
        return branch, trace, nodes
    raise last_error


@dataclass(frozen=True)
class NodalMapRow:
    r: float
    numeric_angles: tuple[float, ...]
    analytic_angles: tuple[float, ...]
    count: int


@dataclass(frozen=True)
class NodalMap:
    """Node lines over a radius sweep, numeric against closed form."""

    params: JTParams
    theta_samples: int
    rows: tuple[NodalMapRow, ...]
    skipped_radii: tuple[float, ...]
    degeneracies: tuple[DegeneracyPoint, ...]


# Agreement demanded between pipeline and closed-form node angles.
NODAL_MAP_TOL = 1e-4


def nodal_map(p: JTParams, r_values, theta_samples: int = 2048,
              band: int = 0) -> NodalMap:
    """Numeric node angles for each radius, verified against the closed form.

    Radii on the degeneracy circle are skipped (the circle itself belongs to
    the degeneracy list, not the node map).  A disagreement beyond 1e-4
    between pipeline and closed form is a hard failure.
    """
    rows = []
    skipped = []
    for r in r_values:
        r = float(r)
        try:
            analytic = node_angles_analytic(p, r)
        except OnDegeneracyCircle:
            skipped.append(r)
            continue
        _, _, nodes = circle_nodes(p, r, n_samples=theta_samples, band=band)
        if nodes.count != len(analytic):
            raise RuntimeError(
                f"r={r!r}: pipeline found {nodes.count} nodes, closed form "
                f"has {len(analytic)}"
            )
        worst = max(
            abs(math.remainder(a - b, 2.0 * math.pi))
            for a, b in zip(nodes.angles, analytic)
        )
        if worst > NODAL_MAP_TOL:
            raise RuntimeError(
                f"r={r!r}: node angles differ from closed form by {worst:.3e}"
            )
        rows.append(NodalMapRow(r=r, numeric_angles=nodes.angles,
                                analytic_angles=analytic, count=nodes.count))
    return NodalMap(params=p, theta_samples=theta_samples, rows=tuple(rows),
                    skipped_radii=tuple(skipped),
                    degeneracies=degeneracy_points(p))
