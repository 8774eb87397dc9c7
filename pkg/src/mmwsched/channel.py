"""Network realizations and narrow-band multi-cluster channel synthesis.

A realization fixes the slow state for one simulated drop: UE positions
(area-uniform in the annulus between the exclusion and cell radii),
path loss + shadowing, cluster power fractions and per-path AoD/AoA.
Small-scale fading is redrawn independently for every (MB, CB, UE) from
its own RNG substream, so any single channel matrix can be regenerated
in isolation.
"""

import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .rng import GEOMETRY, POSITIONS, SHADOWING, SMALLSCALE, substream


def array_response(n: int, phi: float) -> np.ndarray:
    """ULA response [1, e^{j pi sin phi}, ..., e^{j(n-1) pi sin phi}]."""
    if n < 1:
        raise ValueError(f"array size must be >= 1, got {n}")
    return np.exp(1j * np.pi * np.arange(n) * np.sin(phi))


def steering_matrix(n: int, sin_angles: np.ndarray) -> np.ndarray:
    """Columns are array responses at the given sin(angle) values; (n, len)."""
    sin_angles = np.asarray(sin_angles, dtype=float)
    return np.exp(1j * np.pi * np.outer(np.arange(n), sin_angles))


def path_loss_db(distance: float, intercept_db: float, exponent: float,
                 shadow_std_db: float = 0.0, rng: np.random.Generator | None = None) -> float:
    """PL = a + 10 b log10(d) + X, X ~ N(0, shadow_std^2) when an rng is given."""
    if distance <= 0:
        raise ValueError(f"distance must be > 0, got {distance}")
    pl = intercept_db + 10.0 * exponent * math.log10(distance)
    if rng is not None and shadow_std_db > 0:
        pl += shadow_std_db * rng.standard_normal()
    return pl


@dataclass
class UeState:
    """Large-scale state of one UE, fixed for the whole realization."""

    position: np.ndarray        # (2,), m
    path_loss_db: float         # includes the shadowing draw
    cluster_powers: np.ndarray  # (n_clusters,), sums to 1
    aod: np.ndarray             # (n_clusters, n_paths), rad
    aoa: np.ndarray             # (n_clusters, n_paths), rad


@dataclass
class NetworkRealization:
    seed: int
    bs_height: float
    ues: list

    @property
    def n_ues(self) -> int:
        return len(self.ues)


def cluster_power_profile(n_clusters: int) -> np.ndarray:
    """Normalized exponential decay nu_d proportional to e^{-d/2}."""
    nu = np.exp(-0.5 * np.arange(n_clusters))
    return nu / nu.sum()


def generate_realization(cfg: SystemConfig, seed: int) -> NetworkRealization:
    """Drop cfg.n_ues UEs and draw their large-scale channel state."""
    u_count = cfg.n_ues
    pos_rng = substream(seed, POSITIONS)
    radii = np.sqrt(pos_rng.uniform(cfg.exclusion_radius ** 2, cfg.cell_radius ** 2, u_count))
    angles = pos_rng.uniform(0.0, 2.0 * np.pi, u_count)
    positions = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])

    shad_rng = substream(seed, SHADOWING)
    shadowing = shad_rng.standard_normal(u_count) * cfg.shadowing_std_db

    spread = math.radians(cfg.path_angle_spread_deg)
    half_pi = np.pi / 2.0
    nu = cluster_power_profile(cfg.n_clusters)

    ues = []
    for u in range(u_count):
        dist_3d = math.hypot(radii[u], cfg.bs_height)
        pl = path_loss_db(dist_3d, cfg.pathloss_intercept_db, cfg.pathloss_exponent) + shadowing[u]
        geo = substream(seed, GEOMETRY, u)
        centers_aod = geo.uniform(-half_pi, half_pi, cfg.n_clusters)
        centers_aoa = geo.uniform(-half_pi, half_pi, cfg.n_clusters)
        shape = (cfg.n_clusters, cfg.n_paths_per_cluster)
        aod = np.clip(centers_aod[:, None] + geo.standard_normal(shape) * spread, -half_pi, half_pi)
        aoa = np.clip(centers_aoa[:, None] + geo.standard_normal(shape) * spread, -half_pi, half_pi)
        ues.append(UeState(positions[u], float(pl), nu.copy(), aod, aoa))
    return NetworkRealization(seed=int(seed), bs_height=cfg.bs_height, ues=ues)


def synthesize_channel(real: NetworkRealization, cfg: SystemConfig, u: int, q: int,
                       mb: int) -> np.ndarray:
    """(N_u, N_b) channel matrix for UE u in CB q of MB mb.

    H = (1/sqrt(N_path)) sum_d sum_l sigma_d kappa a_u(aoa) a_b(aod)^H with
    kappa ~ CN(0,1) independent per (mb, q); sigma_d = sqrt(nu_d 10^{-PL/10}).
    """
    ue = real.ues[u]
    n_cl, n_path = ue.aod.shape
    rng = substream(real.seed, SMALLSCALE, mb, q, u)
    kappa = (rng.standard_normal((n_cl, n_path)) + 1j * rng.standard_normal((n_cl, n_path))) \
        / math.sqrt(2.0)
    sigma = np.sqrt(ue.cluster_powers * 10.0 ** (-0.1 * ue.path_loss_db))
    g = (sigma[:, None] * kappa).ravel()

    a_rx = steering_matrix(cfg.n_ue_antennas, np.sin(ue.aoa.ravel()))   # (N_u, D*L)
    a_tx = steering_matrix(cfg.n_bs_antennas, np.sin(ue.aod.ravel()))   # (N_b, D*L)
    return (a_rx * g) @ a_tx.conj().T / math.sqrt(n_path)


def synthesize_mb(real: NetworkRealization, cfg: SystemConfig, mb: int) -> np.ndarray:
    """All channel matrices of one MB: (Q, U, N_u, N_b)."""
    out = np.empty((cfg.n_cbs_freq, real.n_ues, cfg.n_ue_antennas, cfg.n_bs_antennas),
                   dtype=complex)
    for q in range(cfg.n_cbs_freq):
        for u in range(real.n_ues):
            out[q, u] = synthesize_channel(real, cfg, u, q, mb)
    return out


# --- realization dump / replay --------------------------------------------

def _fmt(values) -> str:
    return " ".join(repr(float(v)) for v in np.asarray(values, dtype=float).ravel())


def dump_realization(real: NetworkRealization, path) -> None:
    """Self-describing text dump; floats use repr so replay is bit-exact."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("format = mmwsched-realization-v1\n")
        fh.write(f"seed = {real.seed}\n")
        fh.write(f"bs_height = {real.bs_height!r}\n")
        fh.write(f"n_ues = {real.n_ues}\n")
        for u, ue in enumerate(real.ues):
            n_cl, n_path = ue.aod.shape
            fh.write(f"[ue {u}]\n")
            fh.write(f"n_clusters = {n_cl}\n")
            fh.write(f"n_paths = {n_path}\n")
            fh.write(f"position = {_fmt(ue.position)}\n")
            fh.write(f"path_loss_db = {ue.path_loss_db!r}\n")
            fh.write(f"cluster_powers = {_fmt(ue.cluster_powers)}\n")
            fh.write(f"aod = {_fmt(ue.aod)}\n")
            fh.write(f"aoa = {_fmt(ue.aoa)}\n")


def load_realization(path) -> NetworkRealization:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    header = {}
    i = 0
    while i < len(lines) and not lines[i].startswith("[ue"):
        key, val = (part.strip() for part in lines[i].split("=", 1))
        header[key] = val
        i += 1
    if header.get("format") != "mmwsched-realization-v1":
        raise ValueError(f"unsupported realization format: {header.get('format')!r}")
    ues = []
    while i < len(lines):
        assert lines[i].startswith("[ue")
        block = {}
        i += 1
        while i < len(lines) and not lines[i].startswith("[ue"):
            key, val = (part.strip() for part in lines[i].split("=", 1))
            block[key] = val
            i += 1
        n_cl, n_path = int(block["n_clusters"]), int(block["n_paths"])
        ues.append(UeState(
            position=np.array([float(v) for v in block["position"].split()]),
            path_loss_db=float(block["path_loss_db"]),
            cluster_powers=np.array([float(v) for v in block["cluster_powers"].split()]),
            aod=np.array([float(v) for v in block["aod"].split()]).reshape(n_cl, n_path),
            aoa=np.array([float(v) for v in block["aoa"].split()]).reshape(n_cl, n_path),
        ))
    return NetworkRealization(seed=int(header["seed"]), bs_height=float(header["bs_height"]),
                              ues=ues)
