"""SINR under equal power splitting and discrete-MCS rate mapping.

The shipped rate table carries the 15 CQI spectral efficiencies of the
LTE 4-bit CQI set with SINR thresholds obtained by Shannon inversion
(threshold = 2^eff - 1).  The table is data, not code: any CSV with a
``threshold_db,efficiency`` header can replace it.
"""

import math
from dataclasses import dataclass

import numpy as np

try:
    from importlib.resources import files as _resource_files
except ImportError:  # pragma: no cover
    from importlib_resources import files as _resource_files


class RateTableError(ValueError):
    pass


@dataclass(frozen=True)
class RateTable:
    """Step function from linear SINR to spectral efficiency (bits/s/Hz).

    ``thresholds`` are linear SINRs, strictly increasing; a SINR equal to a
    threshold qualifies for that row (closed lower boundary).  Below the
    first threshold the efficiency is 0.
    """

    thresholds: np.ndarray
    efficiencies: np.ndarray

    def __post_init__(self):
        thr = np.asarray(self.thresholds, dtype=float)
        eff = np.asarray(self.efficiencies, dtype=float)
        if thr.ndim != 1 or thr.shape != eff.shape or thr.size == 0:
            raise RateTableError("thresholds and efficiencies must be equal-length 1-D")
        if not np.all(np.diff(thr) > 0):
            raise RateTableError("thresholds must be strictly increasing")
        if not np.all(np.diff(eff) > 0):
            raise RateTableError("efficiencies must be strictly increasing")
        if thr[0] <= 0 or eff[0] <= 0:
            raise RateTableError("thresholds and efficiencies must be positive")
        object.__setattr__(self, "thresholds", thr)
        object.__setattr__(self, "efficiencies", eff)

    @classmethod
    def from_csv(cls, path) -> "RateTable":
        rows = np.genfromtxt(path, delimiter=",", names=True, dtype=float)
        names = rows.dtype.names
        if names is None or set(names) != {"threshold_db", "efficiency"}:
            raise RateTableError(f"expected header 'threshold_db,efficiency', got {names}")
        thr_db = np.atleast_1d(rows["threshold_db"])
        eff = np.atleast_1d(rows["efficiency"])
        return cls(10.0 ** (thr_db / 10.0), eff)

    @classmethod
    def default(cls) -> "RateTable":
        res = _resource_files("mmwsched.data").joinpath("cqi_table.csv")
        with res.open("rb") as fh:
            return cls.from_csv(fh)

    def map_array(self, gamma: np.ndarray) -> np.ndarray:
        """Vectorized rate_map."""
        gamma = np.asarray(gamma, dtype=float)
        idx = np.searchsorted(self.thresholds, gamma, side="right") - 1
        eff = np.where(idx >= 0, self.efficiencies[np.maximum(idx, 0)], 0.0)
        return eff


def rate_map(gamma: float, table: RateTable) -> float:
    """Spectral efficiency of the highest MCS whose threshold <= gamma."""
    if gamma < 0:
        raise ValueError(f"SINR must be >= 0, got {gamma}")
    idx = int(np.searchsorted(table.thresholds, gamma, side="right")) - 1
    if idx < 0:
        return 0.0
    return float(table.efficiencies[idx])


def noise_power_prb(prb_bw: float, noise_psd: float) -> float:
    """sigma^2_PRB = delta_F * N0, linear W."""
    if prb_bw <= 0:
        raise ValueError(f"prb_bw must be > 0, got {prb_bw}")
    return prb_bw * noise_psd


@dataclass(frozen=True)
class SinrContext:
    """One (beam set, UE tuple, CB) scheduling hypothesis.

    Power per beam per PRB is P_BS / (|beam_set| * Q * N_F): the budget is
    split equally over the active beams and uniformly over the Q*N_F
    vertical PRBs of a time slot.
    """

    beam_set: tuple
    ue_tuple: tuple
    q: int
    tx_power: float
    n_cbs_freq: int
    n_freq_subch: int
    noise_power: float

    def __post_init__(self):
        if len(self.beam_set) != len(self.ue_tuple):
            raise ValueError("beam set and UE tuple sizes differ")

    @property
    def power_per_beam_prb(self) -> float:
        return self.tx_power / (len(self.beam_set) * self.n_cbs_freq * self.n_freq_subch)


def sinr(eff, ctx: SinrContext, u: int) -> float:
    """Linear SINR of UE ``u`` under ``ctx``; 0 if u is not in the tuple.

    ``eff`` is an EffectiveChannelSet (beams module): ``eff.gain(q, u, n)``
    returns the effective channel from beam-owner ``n`` to victim ``u``.
    """
    if u not in ctx.ue_tuple:
        return 0.0
    p = ctx.power_per_beam_prb
    signal = abs(eff.gain(ctx.q, u, u)) ** 2 * p
    interference = 0.0
    for n in ctx.ue_tuple:
        if n != u:
            interference += abs(eff.gain(ctx.q, u, n)) ** 2 * p
    return signal / (interference + ctx.noise_power)


def sinr_db(gamma: float) -> float:
    return 10.0 * math.log10(gamma)
