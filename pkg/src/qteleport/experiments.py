"""Coarse-grained Bloch-sphere sources, specification vs. accessible information,
and the classical-bit cost of teleporting their output.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np

from .infotheory import QuantumEnsemble, as_distribution, holevo_chi, shannon_entropy
from .qcore import PAULIS, I2, trace_distance
from .teleport import UnknownState, run_collapse
from .transcript import fmt_float

FOUR_PI = 4.0 * np.pi
CSV_COLUMNS = ("N", "H_spec_bits", "chi_bits", "gap_bits")


@dataclass(frozen=True)
class SphereGrid:
    """Cell midpoints ``(theta, phi)`` and solid-angle weights of a partition."""

    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray
    band_counts: tuple[int, ...]

    @property
    def count(self) -> int:
        return self.theta.size

    def bloch_vectors(self) -> np.ndarray:
        st = np.sin(self.theta)
        return np.stack([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)], axis=1)

    def density_matrices(self) -> np.ndarray:
        """Pure-state projectors ``(1 + r.sigma)/2`` of the midpoints, shape ``(N, 2, 2)``."""
        r = self.bloch_vectors()
        return 0.5 * (I2[None] + np.einsum("ni,ijk->njk", r, np.stack(PAULIS)))

    def unknown_state(self, cell: int) -> UnknownState:
        t, p = self.theta[cell], self.phi[cell]
        return UnknownState(np.cos(t / 2), np.exp(1j * p) * np.sin(t / 2))


def _ring_counts(n_cells: int) -> list[int]:
    """Cells per latitude band: one cap at each pole, rings in between."""
    if n_cells == 1:
        return [1]
    if n_cells == 2:
        return [1, 1]
    area = FOUR_PI / n_cells
    cap = np.arccos(1.0 - 2.0 / n_cells)
    n_rings = max(1, int(round((np.pi - 2 * cap) / np.sqrt(area))))
    edges = cap + (np.pi - 2 * cap) * np.arange(n_rings + 1) / n_rings
    ideal = 2 * np.pi * (np.cos(edges[:-1]) - np.cos(edges[1:])) / area
    counts, carry = [], 0.0
    for x in ideal:
        c = int(round(x + carry))
        carry += x - c
        counts.append(c)
    counts[-1] += (n_cells - 2) - sum(counts)
    return [1] + [c for c in counts if c > 0] + [1]


def coarse_grain_sphere(n_cells: int) -> SphereGrid:
    """Equal-area partition of the sphere into ``n_cells`` cells.

    Latitude bands have boundaries uniform in ``cos(theta)`` sized so each
    holds a whole number of equal-area cells; the two polar caps are single
    cells and the remaining bands are split into equal longitude sectors
    (roughly square cells). Midpoints: the pole for a cap, otherwise the
    area-bisecting latitude of the band and the central longitude of the
    sector. A single cell covering the whole sphere has midpoint ``(pi/2, pi)``.
    """
    if n_cells < 1:
        raise ValueError("n_cells must be at least 1")
    counts = _ring_counts(n_cells)
    z_edges = 1.0 - 2.0 * np.concatenate([[0], np.cumsum(counts)]) / n_cells
    z_edges[-1] = -1.0
    thetas, phis, weights = [], [], []
    last = len(counts) - 1
    for j, n in enumerate(counts):
        top, bottom = z_edges[j], z_edges[j + 1]
        if n_cells > 1 and j == 0:
            theta = 0.0
        elif n_cells > 1 and j == last:
            theta = np.pi
        else:
            theta = float(np.arccos(0.5 * (top + bottom)))
        w = 2 * np.pi * (top - bottom) / n
        for k in range(n):
            thetas.append(theta)
            phis.append((k + 0.5) * 2 * np.pi / n)
            weights.append(w)
    return SphereGrid(np.array(thetas), np.array(phis), np.array(weights), tuple(counts))


@dataclass(frozen=True)
class StateSource:
    """Classical source picking grid cells with probabilities ``dist``."""

    grid: SphereGrid
    dist: np.ndarray

    def __post_init__(self):
        dist = as_distribution(self.dist, "source distribution")
        if dist.size != self.grid.count:
            raise ValueError(f"distribution has {dist.size} entries for {self.grid.count} cells")
        object.__setattr__(self, "dist", dist)

    @classmethod
    def uniform(cls, n_cells: int) -> "StateSource":
        return cls(coarse_grain_sphere(n_cells), np.full(n_cells, 1.0 / n_cells))

    @classmethod
    def peaked(cls, n_cells: int, cell: int = 0) -> "StateSource":
        dist = np.zeros(n_cells)
        dist[cell] = 1.0
        return cls(coarse_grain_sphere(n_cells), dist)

    def ensemble(self) -> QuantumEnsemble:
        return QuantumEnsemble(self.dist, self.grid.density_matrices())


def specification_information(src: StateSource) -> float:
    return shannon_entropy(src.dist)


@dataclass(frozen=True)
class SpecVsAccessible:
    h_spec: float
    chi: float
    gap: float


def spec_vs_accessible(src: StateSource) -> SpecVsAccessible:
    """Source entropy against the Holevo bound of the prepared qubits."""
    h = specification_information(src)
    chi = holevo_chi(src.ensemble())
    return SpecVsAccessible(h, chi, h - chi)


def ensemble_average_deviation(src: StateSource) -> float:
    """Trace distance between the source's average state and ``1/2``."""
    return trace_distance(src.ensemble().average, 0.5 * I2)


@dataclass(frozen=True)
class CostLedger:
    runs: int
    bits_sent: int
    accessible_bound: float
    ratio: float


def cost_ledger(src: StateSource, n_runs: int, rng: np.random.Generator) -> CostLedger:
    """Teleport ``n_runs`` states drawn from ``src`` and tally the bit budget.

    Extractable information per run is bounded by the source's Holevo
    quantity, so the bound is ``chi * n_runs``; ``ratio`` is infinite when
    nothing is extractable.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    cells = rng.choice(src.grid.count, size=n_runs, p=src.dist)
    sent = 0
    for cell in cells:
        sent += run_collapse(src.grid.unknown_state(int(cell)), rng).classical_bits
    bound = holevo_chi(src.ensemble()) * n_runs
    ratio = sent / bound if bound > 0 else float("inf")
    return CostLedger(n_runs, sent, bound, ratio)


def spec_info_table(ns: Iterable[int]) -> list[dict[str, float]]:
    """One row per grid size for uniform sources."""
    rows = []
    for n in ns:
        if n < 1:
            raise ValueError("every N must be at least 1")
        r = spec_vs_accessible(StateSource.uniform(n))
        rows.append({"N": n, "H_spec_bits": r.h_spec, "chi_bits": r.chi, "gap_bits": r.gap})
    return rows


def write_csv(rows: list[dict], fh: TextIO, columns=CSV_COLUMNS, digits: int = 15) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row[c], digits) for c in columns])


def _fmt(value, digits: int) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return fmt_float(value, digits)
    return str(value)
