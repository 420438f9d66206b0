"""Pseudorotation ring spectra with periodic or antiperiodic seam.

A single band moving on a ring of radius r0 sees

    H = -(1 / (2 r0^2)) d^2/dtheta^2 + E(theta),

discretized by the standard second-order three-point stencil on M uniform
grid points.  The eigenvector sign change around a loop with an odd node
count is imposed as an antiperiodic seam: the wrap coupling between the last
and first grid point flips sign.  An even node count keeps the plain
periodic wrap.  An infinite barrier is a deleted arc of grid points with
Dirichlet values at its edges; once the ring is cut, the seam sign is pure
gauge and the two parities collapse onto the same spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BarrierTooWide, GridTooCoarse
from .jahnteller import JTParams, circle_nodes, jt_point_data

MIN_GRID_POINTS = 64

# Relative tolerance under which adjacent levels are flagged degenerate.
DEGENERACY_FLAG_TOL = 1e-8

_PARITIES = ("even", "odd")


@dataclass(eq=False)
class RingProblem:
    """Grid, potential, seam parity and optional barrier for one ring band."""

    radius: float
    grid_size: int
    potential: np.ndarray
    flux_parity: str
    barrier: tuple[float, float] | None = None

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"ring radius must be > 0, got {self.radius!r}")
        if self.grid_size < MIN_GRID_POINTS:
            raise GridTooCoarse(
                f"grid size {self.grid_size} below minimum {MIN_GRID_POINTS}"
            )
        if self.flux_parity not in _PARITIES:
            raise ValueError(f"flux_parity must be one of {_PARITIES}")
        v = np.asarray(self.potential, dtype=float)
        if v.shape != (self.grid_size,):
            raise ValueError(
                f"potential shape {v.shape} does not match grid size {self.grid_size}"
            )
        if self.barrier is not None:
            start, width = (float(x) for x in self.barrier)
            if width >= 2.0 * math.pi:
                raise BarrierTooWide(
                    f"barrier width {width!r} covers the whole ring"
                )
            if width <= 0:
                raise ValueError(f"barrier width must be > 0, got {width!r}")
            if start <= 0 or start + width >= 2.0 * math.pi:
                raise ValueError(
                    f"barrier [{start!r}, {start + width!r}] must lie inside (0, 2 pi)"
                )
            self.barrier = (start, width)
        if not np.all(np.isfinite(np.delete(v, self.barrier_indices()))):
            raise ValueError("potential must be finite outside the barrier")
        self.potential = v

    @property
    def step(self) -> float:
        return 2.0 * math.pi / self.grid_size

    def barrier_indices(self) -> np.ndarray:
        """Grid indices removed by the barrier (its edges carry Dirichlet zeros)."""
        if self.barrier is None:
            return np.array([], dtype=int)
        start, width = self.barrier
        h = self.step
        j_lo = int(round(start / h))
        j_hi = int(round((start + width) / h))
        j_lo = max(j_lo, 1)
        j_hi = min(j_hi, self.grid_size - 1)
        if j_hi < j_lo:
            raise GridTooCoarse(
                f"barrier [{start!r}, {start + width!r}] collapses on a grid "
                f"of step {h!r}"
            )
        return np.arange(j_lo, j_hi + 1)

    def kept_indices(self) -> np.ndarray:
        keep = np.ones(self.grid_size, dtype=bool)
        keep[self.barrier_indices()] = False
        return np.nonzero(keep)[0]


def build_ring_hamiltonian(problem: RingProblem) -> np.ndarray:
    """Dense symmetric matrix of the discretized ring Hamiltonian.

    Off-diagonal couplings are -1/(2 r0^2 h^2); with odd flux parity the wrap
    coupling flips sign (antiperiodic seam), which keeps the matrix real
    symmetric.  Barrier grid points are deleted outright.
    """
    m_size = problem.grid_size
    t = 1.0 / (2.0 * problem.radius ** 2 * problem.step ** 2)
    h_mat = np.zeros((m_size, m_size))
    np.fill_diagonal(h_mat, 2.0 * t + problem.potential)
    idx = np.arange(m_size - 1)
    h_mat[idx, idx + 1] = -t
    h_mat[idx + 1, idx] = -t
    wrap = t if problem.flux_parity == "odd" else -t
    h_mat[m_size - 1, 0] = wrap
    h_mat[0, m_size - 1] = wrap
    keep = problem.kept_indices()
    if len(keep) < MIN_GRID_POINTS // 2:
        raise GridTooCoarse(
            f"barrier leaves only {len(keep)} grid points"
        )
    return h_mat[np.ix_(keep, keep)]


def _absorb_seam(matrix: np.ndarray, problem: RingProblem) -> np.ndarray:
    """Gauge away the seam sign of a barrier-cut ring.

    With the ring cut, flipping the basis sign on every kept point before the
    barrier moves the wrap coupling back to its periodic value; this is exact
    (sign flips only), so both parities diagonalize literally the same matrix.
    """
    if problem.barrier is None or problem.flux_parity == "even":
        return matrix
    keep = problem.kept_indices()
    signs = np.where(keep < problem.barrier_indices()[0], -1.0, 1.0)
    return matrix * np.outer(signs, signs)


@dataclass(eq=False)
class SpectrumResult:
    """Lowest levels of a ring problem with degeneracy markers."""

    levels: np.ndarray
    boundary: str
    degeneracy_flags: tuple[bool, ...]


def degeneracy_flags(levels: np.ndarray,
                     tol: float = DEGENERACY_FLAG_TOL) -> tuple[bool, ...]:
    """Flag each level that has a partner within tol * max(1, |E|)."""
    n = len(levels)
    flags = [False] * n
    for i in range(n - 1):
        a, b = float(levels[i]), float(levels[i + 1])
        if abs(a - b) <= tol * max(1.0, abs(a), abs(b)):
            flags[i] = True
            flags[i + 1] = True
    return tuple(flags)


def spectrum(problem: RingProblem, n_levels: int) -> SpectrumResult:
    """Lowest `n_levels` eigenvalues of the ring problem.

    For barrier problems the seam gauge is absorbed first, so even and odd
    parity produce bitwise-identical level sets, as they must once the ring
    is cut.
    """
    h_mat = _absorb_seam(build_ring_hamiltonian(problem), problem)
    if n_levels < 1 or n_levels > h_mat.shape[0]:
        raise ValueError(
            f"n_levels {n_levels} out of range for matrix size {h_mat.shape[0]}"
        )
    levels = np.linalg.eigvalsh(h_mat)[:n_levels]
    if problem.barrier is None:
        boundary = "periodic" if problem.flux_parity == "even" else "antiperiodic"
    else:
        boundary = "dirichlet-barrier"
    return SpectrumResult(levels=levels, boundary=boundary,
                          degeneracy_flags=degeneracy_flags(levels))


def flat_ring_problem(flux_parity: str, grid_size: int = 1024,
                      radius: float = 1.0,
                      barrier: tuple[float, float] | None = None) -> RingProblem:
    """Free ring: zero potential, spectrum m^2/2 with integer or half-odd m."""
    return RingProblem(radius=radius, grid_size=grid_size,
                       potential=np.zeros(grid_size), flux_parity=flux_parity,
                       barrier=barrier)


# Sampling used to count overlap nodes when deriving the seam parity.
_PARITY_LOOP_SAMPLES = 1024


def jt_ring_problem(p: JTParams, radius: float, grid_size: int = 1024,
                    band: int = 0,
                    barrier: tuple[float, float] | None = None) -> RingProblem:
    """Ring problem for one adiabatic band of the E x e model at fixed radius.

    The potential is the band energy sampled on the grid; the seam parity is
    derived from the node count of the band's anchor overlap around the same
    circle (odd count -> antiperiodic).
    """
    if band not in (0, 1):
        raise ValueError(f"band must be 0 (lower) or 1 (upper), got {band!r}")
    _, _, nodes = circle_nodes(p, radius, n_samples=_PARITY_LOOP_SAMPLES,
                               band=band)
    parity = "odd" if nodes.parity else "even"
    h = 2.0 * math.pi / grid_size
    pot = np.array([
        jt_point_data(p, radius, j * h).energies[band] for j in range(grid_size)
    ])
    return RingProblem(radius=radius, grid_size=grid_size, potential=pot,
                       flux_parity=parity, barrier=barrier)
