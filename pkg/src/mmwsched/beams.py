"""Beamforming codebooks, exhaustive beam alignment, effective channels.

Codebook design: the 2^B beams tile sin(azimuth) space in equal intervals.
With one RF chain per stream a codeword is the normalized steering vector
at the beam center.  With K' > 1 chains the codeword is the unit-normalized
least-squares fit, inside the span of K' steering columns spread across the
beam interval, to an ideal flat-top response over that interval (linear
phase referenced to the array center, zero outside).  Extra chains can only
lower the fit residual, which is what flattens the in-beam gain.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import steering_matrix

DESIGN_GRID_MIN = 1024       # sin-space grid used by the LS fit


@dataclass(frozen=True)
class Codebook:
    """Unit-norm codewords as rows of ``codewords`` (2^bits, n_antennas)."""

    codewords: np.ndarray
    rf_per_stream: int
    sin_centers: np.ndarray = field(repr=False)
    sin_edges: np.ndarray = field(repr=False)

    @property
    def n_beams(self) -> int:
        return self.codewords.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.codewords.shape[1]

    def gain_pattern(self, beam: int, sin_grid: np.ndarray) -> np.ndarray:
        """|a(phi)^H w|^2 on the given sin(azimuth) grid."""
        a = steering_matrix(self.n_antennas, sin_grid)
        return np.abs(a.conj().T @ self.codewords[beam]) ** 2


def _flat_top_target(n_antennas: int, sin_grid: np.ndarray, lo: float, hi: float) -> np.ndarray:
    # Linear phase matched to the array phase center; magnitude 1 in-beam.
    inside = (sin_grid >= lo) & (sin_grid <= hi)
    target = np.exp(-1j * np.pi * (n_antennas - 1) * sin_grid / 2.0)
    return np.where(inside, target, 0.0)


def design_codebook(n_antennas: int, bits: int, rf_per_stream: int) -> Codebook:
    """Design 2^bits unit-norm codewords tiling sin-space.

    Raises ValueError when the array is smaller than the per-stream chain
    count (the fit basis would be rank-deficient by construction).
    """
    if bits < 0:
        raise ValueError(f"codebook bits must be >= 0, got {bits}")
    if rf_per_stream < 1:
        raise ValueError(f"rf_per_stream must be >= 1, got {rf_per_stream}")
    if n_antennas < rf_per_stream:
        raise ValueError(
            f"n_antennas={n_antennas} < rf_per_stream={rf_per_stream}: invalid configuration")

    n_beams = 2 ** bits
    edges = np.linspace(-1.0, 1.0, n_beams + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    width = 2.0 / n_beams

    if rf_per_stream == 1:
        codewords = steering_matrix(n_antennas, centers).T / math.sqrt(n_antennas)
        return Codebook(codewords, 1, centers, edges)

    grid = np.linspace(-1.0, 1.0, max(DESIGN_GRID_MIN, 8 * n_antennas))
    responses = steering_matrix(n_antennas, grid)          # (N, G)
    codewords = np.empty((n_beams, n_antennas), dtype=complex)
    offsets = (np.arange(rf_per_stream) - (rf_per_stream - 1) / 2.0) * (width / rf_per_stream)
    for j in range(n_beams):
        basis = steering_matrix(n_antennas, centers[j] + offsets)   # (N, K')
        pattern = responses.conj().T @ basis                        # (G, K')
        target = _flat_top_target(n_antennas, grid, edges[j], edges[j + 1])
        x, *_ = np.linalg.lstsq(pattern, target, rcond=None)
        w = basis @ x
        codewords[j] = w / np.linalg.norm(w)
    return Codebook(codewords, rf_per_stream, centers, edges)


@dataclass(frozen=True)
class AlignmentResult:
    """Per-UE best (BS beam, UE beam) pair and the distinct-BS-beam set."""

    bs_beam: np.ndarray        # (U,) BS beam index per UE
    ue_beam: np.ndarray        # (U,)
    metric: np.ndarray         # (U,) sum over CBs of |v^H H w|^2 for the chosen pair
    distinct_bs_beams: tuple   # sorted C_b^*

    @property
    def n_ues(self) -> int:
        return self.bs_beam.shape[0]


def beam_align(channels_mb0: np.ndarray, bs_codebook: Codebook,
               ue_codebook: Codebook) -> AlignmentResult:
    """Exhaustive search over all codeword pairs per UE.

    ``channels_mb0``: (Q, U, N_u, N_b) matrices of the first MB.  The metric
    is the pilot energy summed over the Q CBs; ties break to the lowest
    (BS beam, UE beam) pair.
    """
    n_q, n_ues = channels_mb0.shape[:2]
    wb = bs_codebook.codewords          # (Mb, N_b)
    vu = ue_codebook.codewords          # (Mu, N_u)
    bs_beam = np.empty(n_ues, dtype=int)
    ue_beam = np.empty(n_ues, dtype=int)
    best = np.empty(n_ues, dtype=float)
    for u in range(n_ues):
        metric = np.zeros((bs_codebook.n_beams, ue_codebook.n_beams))
        for q in range(n_q):
            # proj[m_b, m_u] = v_{m_u}^H H w_{m_b}
            proj = (vu.conj() @ channels_mb0[q, u] @ wb.T).T
            metric += np.abs(proj) ** 2
        flat = int(np.argmax(metric))           # first max = lowest (bs, ue) pair
        bs_beam[u], ue_beam[u] = divmod(flat, ue_codebook.n_beams)
        best[u] = metric.flat[flat]
    distinct = tuple(sorted(set(int(b) for b in bs_beam)))
    return AlignmentResult(bs_beam, ue_beam, best, distinct)


@dataclass(frozen=True)
class EffectiveChannelSet:
    """Scalar effective channels v*_u^H H_{q,u} w_b for b in C_b^*.

    ``gains[q, u, col]`` with ``col = column[b]``; UEs sharing a preferred
    beam share a column.  ``gain(q, u, n)`` resolves beam-owner n through
    its preferred beam (n == u gives the signal channel).
    """

    gains: np.ndarray          # (Q, U, |C_b^*|) complex
    column: dict               # BS beam index -> column
    bs_beam: np.ndarray        # (U,) preferred BS beam per UE

    def gain(self, q: int, u: int, n: int) -> complex:
        return self.gains[q, u, self.column[int(self.bs_beam[n])]]

    def beam_gain(self, q: int, u: int, beam: int) -> complex:
        return self.gains[q, u, self.column[beam]]


def effective_channels(channels_mb: np.ndarray, align: AlignmentResult,
                       bs_codebook: Codebook, ue_codebook: Codebook) -> EffectiveChannelSet:
    """Exact bilinear products for every CB, victim UE and distinct BS beam."""
    n_q, n_ues = channels_mb.shape[:2]
    beams = align.distinct_bs_beams
    column = {b: i for i, b in enumerate(beams)}
    wb = bs_codebook.codewords[list(beams)]                    # (B*, N_b)
    gains = np.empty((n_q, n_ues, len(beams)), dtype=complex)
    for q in range(n_q):
        for u in range(n_ues):
            v = ue_codebook.codewords[align.ue_beam[u]]
            gains[q, u] = (v.conj() @ channels_mb[q, u]) @ wb.T
    return EffectiveChannelSet(gains, column, align.bs_beam.copy())


def export_patterns(codebook: Codebook, path, step_deg: float = 1.0) -> None:
    """Per-codeword gain vs azimuth (degrees) as CSV for plots/regression."""
    az = np.arange(-90.0, 90.0 + step_deg / 2, step_deg)
    grid = np.sin(np.radians(az))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["beam", "azimuth_deg", "gain_db"])
        for j in range(codebook.n_beams):
            gain = codebook.gain_pattern(j, grid)
            gain_db = 10.0 * np.log10(np.maximum(gain, 1e-300))
            for a, g in zip(az, gain_db):
                writer.writerow([j, repr(float(a)), repr(float(g))])
