"""Eigenvector branches of real symmetric Hamiltonians along parameter paths.

A branch follows one band (fixed ascending-eigenvalue index) along a
discretized path, fixing the sign of each eigenvector by continuity with its
predecessor.  For a closed path the final-versus-initial sign is then a
well-defined holonomy: -1 flags an eigenvector sign change around the loop,
which is the quantity everything else in this package is built on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    AmbiguousContinuation,
    DegeneracyOnPath,
    NonFinite,
    NonSymmetric,
    OpenPath,
)

# Overlap magnitude below which consecutive eigenvectors no longer identify
# a unique continuation.
CONTINUATION_MIN_OVERLAP = 0.5

# Relative tolerance for the symmetry check and the closed-path consistency
# check on Hamiltonian matrices.
MATRIX_TOL = 1e-12

# Residual contract ||H v - E v|| for every point of a tracked branch.
RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class ParameterPoint:
    """A point in nuclear parameter space.

    `coords` is an arbitrary finite real vector; the Hamiltonian field decides
    how to read it.  Ring paths use the polar convention (r, theta) with
    r >= 0, planar searches use Cartesian (x, y).
    """

    coords: tuple[float, ...]

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        if not all(math.isfinite(c) for c in coords):
            raise NonFinite(f"non-finite parameter point {coords}")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def polar(cls, r: float, theta: float) -> "ParameterPoint":
        if r < 0:
            raise ValueError(f"polar radius must be >= 0, got {r!r}")
        return cls((float(r), float(theta)))

    @classmethod
    def cartesian(cls, x: float, y: float) -> "ParameterPoint":
        return cls((float(x), float(y)))

    @property
    def r(self) -> float:
        return self.coords[0]

    @property
    def theta(self) -> float:
        return self.coords[1]

    @property
    def x(self) -> float:
        return self.coords[0]

    @property
    def y(self) -> float:
        return self.coords[1]


@dataclass(frozen=True)
class DiscretizedPath:
    """Ordered parameter points, optionally marked as a closed loop.

    A closed path stores the closure point explicitly: the last point must map
    to the same Hamiltonian as the first (checked when a branch is tracked.)
    Consecutive stored points must be distinct.
    """

    points: tuple[ParameterPoint, ...]
    closed: bool = False

    def __post_init__(self):
        points = tuple(self.points)
        if len(points) < 3:
            raise ValueError(f"path needs >= 3 points, got {len(points)}")
        for j in range(1, len(points)):
            if points[j].coords == points[j - 1].coords:
                raise ValueError(f"consecutive duplicate point at index {j}")
        object.__setattr__(self, "points", points)

    def __len__(self) -> int:
        return len(self.points)

    def coords_array(self) -> np.ndarray:
        return np.array([p.coords for p in self.points], dtype=float)


def circle_path(r: float, n_segments: int, theta0: float = 0.0,
                revolutions: float = 1.0, closed: bool = True) -> DiscretizedPath:
    """Uniform polar circle with `n_segments` steps (n_segments + 1 points)."""
    if n_segments < 3:
        raise ValueError(f"need >= 3 segments, got {n_segments}")
    span = 2.0 * math.pi * revolutions
    thetas = theta0 + span * np.arange(n_segments + 1) / n_segments
    pts = tuple(ParameterPoint.polar(r, t) for t in thetas)
    return DiscretizedPath(pts, closed=closed)


def polygon_path(vertices: Sequence[tuple[float, float]],
                 samples_per_edge: int = 64) -> DiscretizedPath:
    """Closed Cartesian polygon through `vertices`, sampled edge by edge."""
    if len(vertices) < 3:
        raise ValueError(f"polygon needs >= 3 vertices, got {len(vertices)}")
    pts: list[ParameterPoint] = []
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        for j in range(samples_per_edge):
            f = j / samples_per_edge
            pts.append(ParameterPoint.cartesian(x0 + f * (x1 - x0),
                                                y0 + f * (y1 - y0)))
    pts.append(ParameterPoint.cartesian(*vertices[0]))
    return DiscretizedPath(tuple(pts), closed=True)


def to_polar_path(path: DiscretizedPath) -> DiscretizedPath:
    """Reinterpret a Cartesian path as polar points (r, theta), pointwise."""
    pts = tuple(
        ParameterPoint.polar(math.hypot(p.x, p.y), math.atan2(p.y, p.x))
        for p in path.points
    )
    return DiscretizedPath(pts, closed=path.closed)


@dataclass(frozen=True)
class HamiltonianField:
    """A map from parameter points to N x N real symmetric matrices."""

    dimension: int
    matrix_fn: Callable[[ParameterPoint], np.ndarray]

    def evaluate(self, point: ParameterPoint) -> np.ndarray:
        m = np.asarray(self.matrix_fn(point), dtype=float)
        if m.shape != (self.dimension, self.dimension):
            raise ValueError(
                f"field returned shape {m.shape}, expected "
                f"({self.dimension}, {self.dimension})"
            )
        return _validated_symmetric(m)


def _validated_symmetric(m: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(m)):
        raise NonFinite("matrix contains non-finite entries")
    scale = max(1.0, float(np.max(np.abs(m))))
    asym = float(np.max(np.abs(m - m.T)))
    if asym > MATRIX_TOL * scale:
        raise NonSymmetric(f"asymmetry {asym:.3e} exceeds {MATRIX_TOL:.0e} * {scale:.3e}")
    return 0.5 * (m + m.T)


def eig_real_symmetric(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Full eigendecomposition of a real symmetric matrix.

    Returns (eigenvalues ascending, eigenvectors as columns).  The
    decomposition satisfies ||M v_i - w_i v_i|| <= 1e-9 and reconstructs M to
    the same tolerance; eigenvector signs are whatever the backend produced
    and carry no meaning on their own.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    m = _validated_symmetric(m)
    w, v = np.linalg.eigh(m)
    return w, v


@dataclass(eq=False)
class EigenBranch:
    """One band tracked along a path with sign-continuous eigenvectors.

    vectors[j] is the unit eigenvector at path point j (rows), energies[j]
    its eigenvalue, gaps[j] the distance to the nearest adjacent band.
    """

    field: HamiltonianField
    path: DiscretizedPath
    band: int
    energies: np.ndarray
    vectors: np.ndarray
    gaps: np.ndarray
    max_residual: float = dc_field(default=0.0)

    def __len__(self) -> int:
        return len(self.path)


def track_branch(field: HamiltonianField, path: DiscretizedPath, band: int,
                 gap_tol: float = 1e-8) -> EigenBranch:
    """Track band `band` along `path` with sign continuity.

    The band keeps its ascending-eigenvalue index throughout; each
    eigenvector is flipped when its overlap with the previous one is
    negative.  Raises DegeneracyOnPath when the gap to an adjacent band drops
    to gap_tol, and AmbiguousContinuation when the consecutive overlap falls
    below 0.5 in magnitude (under-resolved path).
    """
    n_pts = len(path)
    dim = field.dimension
    if not 0 <= band < dim:
        raise ValueError(f"band {band} out of range for dimension {dim}")

    energies = np.empty(n_pts)
    vectors = np.empty((n_pts, dim))
    gaps = np.empty(n_pts)
    max_residual = 0.0
    first_matrix = None

    for j, point in enumerate(path.points):
        m = field.evaluate(point)
        if j == 0:
            first_matrix = m
        w, v = np.linalg.eigh(m)

        gap = math.inf
        if band > 0:
            gap = min(gap, float(w[band] - w[band - 1]))
        if band < dim - 1:
            gap = min(gap, float(w[band + 1] - w[band]))
        if gap <= gap_tol:
            raise DegeneracyOnPath(j, gap, gap_tol)

        vec = v[:, band]
        if j > 0:
            overlap = float(vectors[j - 1] @ vec)
            if abs(overlap) < CONTINUATION_MIN_OVERLAP:
                raise AmbiguousContinuation(j, overlap)
            if overlap < 0.0:
                vec = -vec

        residual = float(np.linalg.norm(m @ vec - w[band] * vec))
        max_residual = max(max_residual, residual)

        energies[j] = w[band]
        vectors[j] = vec
        gaps[j] = gap

    if path.closed:
        m_last = field.evaluate(path.points[-1])
        scale = max(1.0, float(np.max(np.abs(first_matrix))))
        mismatch = float(np.max(np.abs(m_last - first_matrix)))
        if mismatch > MATRIX_TOL * scale:
            raise ValueError(
                f"closed path endpoints map to different Hamiltonians "
                f"(mismatch {mismatch:.3e})"
            )

    if max_residual > RESIDUAL_TOL:
        raise RuntimeError(
            f"eigensolver residual {max_residual:.3e} exceeds {RESIDUAL_TOL:.0e}"
        )

    return EigenBranch(field=field, path=path, band=band, energies=energies,
                       vectors=vectors, gaps=gaps, max_residual=max_residual)


def holonomy_sign(branch: EigenBranch) -> int:
    """Sign of the final-versus-initial eigenvector overlap on a closed loop.

    +1 means the branch returns to itself, -1 means it returns with a sign
    flip.  The value is stable under sampling refinement as long as tracking
    succeeds.
    """
    if not branch.path.closed:
        raise OpenPath("holonomy is defined for closed paths only")
    overlap = float(branch.vectors[-1] @ branch.vectors[0])
    return 1 if overlap > 0.0 else -1
