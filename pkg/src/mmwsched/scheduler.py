"""Multi-user PF scheduling: candidate enumeration, relaxed solve, rounding.

Pipeline per MB: enumerate candidate beam sets and UE tuples (fixed after
beam alignment), precompute the rate tensor, solve the relaxed concave
program with a conditional-gradient (Frank-Wolfe) method whose linear
oracle is closed-form over the one-hot allocation vertices, then round to
slot/PRB granularity with the floor-and-redistribute heuristic.  A tiny
exhaustive oracle solves the integer problem exactly for sandwich tests.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .link import RateTable


class CapExceededError(RuntimeError):
    """Candidate enumeration exceeded its cap; lower L or the UE count."""


class SolverError(RuntimeError):
    def __init__(self, message: str, gap: float, iterations: int):
        super().__init__(message)
        self.gap = gap
        self.iterations = iterations


# --- candidate enumeration -------------------------------------------------

def enumerate_beam_sets(distinct_beams, max_streams: int, cap: int) -> list:
    """All subsets of the aligned BS beams with 1 <= size <= L, ordered by
    (size, lexicographic)."""
    beams = sorted(int(b) for b in distinct_beams)
    if not beams:
        raise ValueError("no aligned BS beams")
    sets = []
    for size in range(1, min(max_streams, len(beams)) + 1):
        for combo in itertools.combinations(beams, size):
            sets.append(combo)
            if len(sets) > cap:
                raise CapExceededError(
                    f"beam-set count exceeds cap {cap}; lower max_streams or the UE count")
    return sets


def enumerate_ue_tuples(beam_set, align, cap: int) -> list:
    """Cartesian product of the per-beam UE groups; [] if a beam has no UE."""
    groups = []
    for b in beam_set:
        members = sorted(int(u) for u in np.flatnonzero(align.bs_beam == b))
        if not members:
            return []
        groups.append(members)
    count = math.prod(len(g) for g in groups)
    if count > cap:
        raise CapExceededError(
            f"UE-tuple count {count} exceeds cap {cap}; lower max_streams or the UE count")
    return list(itertools.product(*groups))


@dataclass(frozen=True)
class CandidateSpace:
    """Flattened (beam set, UE tuple) pairs; pairs of a set are contiguous."""

    beam_sets: tuple           # ordered beam sets (tuples of BS beam ids)
    ue_tuples: tuple           # per set, tuple of UE tuples
    n_ues: int
    pair_set: np.ndarray       # (P,) beam-set index per pair
    set_pair_start: np.ndarray  # (n_sets + 1,) offsets into pairs

    @property
    def n_sets(self) -> int:
        return len(self.beam_sets)

    @property
    def n_pairs(self) -> int:
        return int(self.pair_set.shape[0])

    def pair_ues(self, p: int) -> tuple:
        s = int(self.pair_set[p])
        return self.ue_tuples[s][p - int(self.set_pair_start[s])]


def build_candidate_space(align, max_streams: int, n_ues: int,
                          max_beam_sets: int, max_ue_tuples: int) -> CandidateSpace:
    """Enumerate both levels; beam sets whose tuple list is empty are dropped."""
    raw_sets = enumerate_beam_sets(align.distinct_bs_beams, max_streams, max_beam_sets)
    beam_sets, ue_tuples = [], []
    total = 0
    for beam_set in raw_sets:
        tuples = enumerate_ue_tuples(beam_set, align, max_ue_tuples - total)
        if not tuples:
            continue
        total += len(tuples)
        beam_sets.append(beam_set)
        ue_tuples.append(tuple(tuples))
    pair_set = np.repeat(np.arange(len(beam_sets)), [len(t) for t in ue_tuples])
    start = np.concatenate([[0], np.cumsum([len(t) for t in ue_tuples])]).astype(int)
    return CandidateSpace(tuple(beam_sets), tuple(ue_tuples), n_ues, pair_set, start)


# --- rate tensor ------------------------------------------------------------

class RateTensor:
    """Spectral efficiencies r[pair][q, slot] plus flat views for the solver."""

    def __init__(self, space: CandidateSpace, rates: list, n_cbs: int):
        self.space = space
        self.n_cbs = n_cbs
        self.rates = rates                          # per pair: (Q, |tuple|)
        self.ue_ids = [np.array(space.pair_ues(p), dtype=int)
                       for p in range(space.n_pairs)]
        flat_rate, flat_ue, flat_row = [], [], []
        for p, r in enumerate(rates):
            k = r.shape[1]
            flat_rate.append(r.ravel())
            flat_ue.append(np.tile(self.ue_ids[p], n_cbs))
            flat_row.append(np.repeat(p * n_cbs + np.arange(n_cbs), k))
        self.flat_rate = np.concatenate(flat_rate) if flat_rate else np.zeros(0)
        self.flat_ue = np.concatenate(flat_ue).astype(int) if flat_ue else np.zeros(0, int)
        self.flat_row = np.concatenate(flat_row).astype(int) if flat_row else np.zeros(0, int)

    @property
    def n_pairs(self) -> int:
        return self.space.n_pairs


def precompute_rates(space: CandidateSpace, eff, cfg, table: RateTable) -> RateTensor:
    """SINR -> MCS efficiency for every (beam set, tuple, CB, served UE)."""
    n_q = cfg.n_cbs_freq
    sigma2 = cfg.noise_power_prb
    rates = []
    for s, beam_set in enumerate(space.beam_sets):
        k = len(beam_set)
        cols = [eff.column[b] for b in beam_set]
        sub = eff.gains[:, :, cols]                     # (Q, U, k)
        z_mat = np.array(space.ue_tuples[s], dtype=int)  # (nz, k)
        p_beam = cfg.tx_power / (k * n_q * cfg.n_freq_subch)
        # m[q, t, j, i] = effective channel at victim z[t, j] from beam i
        m = np.abs(sub[:, z_mat, :]) ** 2 * p_beam       # (Q, nz, k, k)
        signal = np.einsum("qtjj->qtj", m)
        interference = m.sum(axis=3) - signal
        gamma = signal / (interference + sigma2)
        eff_rates = table.map_array(gamma)               # (Q, nz, k)
        for t in range(z_mat.shape[0]):
            rates.append(np.ascontiguousarray(eff_rates[:, t, :]))
    return RateTensor(space, rates, n_q)


# --- PF state and bookkeeping ------------------------------------------------

@dataclass(frozen=True)
class PfState:
    """Windowed average throughput R_u per UE (bits/s)."""

    avg_throughput: np.ndarray
    window: int

    @classmethod
    def initial(cls, n_ues: int, window: int, floor: float) -> "PfState":
        if floor <= 0:
            raise ValueError("PF floor must be > 0 so log utilities stay defined")
        return cls(np.full(n_ues, float(floor)), int(window))

    @property
    def weighted(self) -> np.ndarray:
        """W * R_u."""
        return self.window * self.avg_throughput


def update_average(pf: PfState, throughputs: np.ndarray) -> PfState:
    """R_u := (1 - 1/W) R_u + lambda_u / W."""
    w = pf.window
    new = (1.0 - 1.0 / w) * pf.avg_throughput + np.asarray(throughputs, float) / w
    return PfState(new, w)


def pf_objective(throughputs: np.ndarray, pf: PfState) -> float:
    """sum_u log(W R_u + lambda_u)."""
    args = pf.weighted + np.asarray(throughputs, float)
    if np.any(args <= 0):
        raise ValueError("PF utility argument <= 0; the epsilon floor is missing")
    return float(np.sum(np.log(args)))


def throughput(alpha: np.ndarray, beta: np.ndarray, tensor: RateTensor,
               coherence_bw: float) -> np.ndarray:
    """lambda_u = B_c sum_l alpha_l sum_z sum_q beta * r  (bits/s)."""
    contrib = alpha[tensor.space.pair_set][:, None] * beta
    return _lambda_from_rows(contrib, tensor, coherence_bw)


def throughput_from_xi(xi: np.ndarray, tensor: RateTensor, coherence_bw: float) -> np.ndarray:
    """lambda_u = B_c sum xi * r for the relaxed variables."""
    return _lambda_from_rows(xi, tensor, coherence_bw)


def _lambda_from_rows(rows: np.ndarray, tensor: RateTensor, coherence_bw: float) -> np.ndarray:
    if tensor.flat_rate.size == 0:
        return np.zeros(tensor.space.n_ues)
    weights = tensor.flat_rate * rows.ravel()[tensor.flat_row]
    lam = np.bincount(tensor.flat_ue, weights=weights, minlength=tensor.space.n_ues)
    return coherence_bw * lam


def mean_active_ues(alpha: np.ndarray, beta: np.ndarray, space: CandidateSpace,
                    n_cbs: int) -> float:
    """alpha/beta-weighted mean tuple size = average active UEs per PRB."""
    sizes = np.array([len(space.pair_ues(p)) for p in range(space.n_pairs)], float)
    per_pair = (alpha[space.pair_set][:, None] * beta).sum(axis=1)
    return float((per_pair * sizes).sum() / n_cbs)


# --- relaxed solve (conditional gradient) ------------------------------------

@dataclass
class RelaxedSolution:
    alpha: np.ndarray          # (n_sets,)
    xi: np.ndarray             # (P, Q)
    throughputs: np.ndarray    # (U,) bits/s
    objective: float
    gap: float
    iterations: int
    trace: list | None = None


class _Vertex:
    """One-hot allocation: all slots to one beam set, per CB the full PRB
    fraction to one tuple (or none when every rate in that CB is zero)."""

    __slots__ = ("set_idx", "choices", "lam")

    def __init__(self, set_idx: int, choices: tuple, lam: np.ndarray):
        self.set_idx = set_idx
        self.choices = choices      # per q: pair index or -1
        self.lam = lam

    @property
    def key(self):
        return (self.set_idx, self.choices)


def _vertex_lambda(tensor: RateTensor, coherence_bw: float, choices) -> np.ndarray:
    lam = np.zeros(tensor.space.n_ues)
    for q, p in enumerate(choices):
        if p >= 0:
            lam[tensor.ue_ids[p]] += coherence_bw * tensor.rates[p][q]
    return lam


def _lmo(tensor: RateTensor, coherence_bw: float, g_lam: np.ndarray) -> _Vertex:
    """Closed-form linear maximization over the allocation polytope."""
    space = tensor.space
    n_q = tensor.n_cbs
    weights = tensor.flat_rate * g_lam[tensor.flat_ue]
    grad = np.bincount(tensor.flat_row, weights=weights,
                       minlength=space.n_pairs * n_q).reshape(space.n_pairs, n_q)
    grad *= coherence_bw
    per_set_max = np.maximum.reduceat(grad, space.set_pair_start[:-1], axis=0)
    scores = np.maximum(per_set_max, 0.0).sum(axis=1)
    s = int(np.argmax(scores))                      # ties -> lowest index
    lo, hi = int(space.set_pair_start[s]), int(space.set_pair_start[s + 1])
    block = grad[lo:hi]
    choices = []
    for q in range(n_q):
        p = int(np.argmax(block[:, q]))
        choices.append(lo + p if block[p, q] > 0 else -1)
    choices = tuple(choices)
    return _Vertex(s, choices, _vertex_lambda(tensor, coherence_bw, choices))


def _line_search(lam_x: np.ndarray, lam_d: np.ndarray, weighted_r: np.ndarray,
                 gamma_max: float, iters: int = 80) -> float:
    """Maximize the concave 1-D restriction via bisection on its derivative."""
    def deriv(gamma):
        return float(np.sum(lam_d / (weighted_r + lam_x + gamma * lam_d)))

    if deriv(gamma_max) >= 0.0:
        return gamma_max
    lo, hi = 0.0, gamma_max
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if deriv(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return lo


def _combo_lambda(active: dict) -> np.ndarray:
    lam = None
    for weight, vertex in active.values():
        term = weight * vertex.lam
        lam = term if lam is None else lam + term
    return lam


def solve_relaxed(tensor: RateTensor, pf: PfState, cfg, variant: str = "away",
                  record_trace: bool = False) -> RelaxedSolution:
    """Maximize sum_u log(W R_u + lambda_u) over the relaxed allocation polytope.

    Frank-Wolfe with the closed-form LMO; ``variant="away"`` (default) adds
    away steps for linear convergence, ``"plain"`` is the textbook method.
    The duality gap of the final iterate certifies optimality to
    cfg.fw_rel_tol; failing to certify within cfg.fw_max_iters raises
    SolverError (never silently accepted).
    """
    if variant not in ("away", "plain"):
        raise ValueError(f"unknown variant {variant!r}")
    if tensor.space.n_ues != pf.avg_throughput.shape[0]:
        raise ValueError("PF state size does not match the tensor's UE count")
    b_c = cfg.coherence_bw
    rel_tol, max_iters = cfg.fw_rel_tol, cfg.fw_max_iters
    weighted_r = pf.weighted
    if np.any(weighted_r <= 0):
        raise ValueError("W R_u must be > 0 (epsilon floor)")

    v0 = _lmo(tensor, b_c, 1.0 / weighted_r)
    active = {v0.key: [1.0, v0]}
    trace = [] if record_trace else None

    gap = math.inf
    iterations = 0
    stalled = False
    obj = -math.inf
    while iterations < max_iters:
        iterations += 1
        lam_x = _combo_lambda(active)
        denom = weighted_r + lam_x
        obj = float(np.sum(np.log(denom)))
        if trace is not None:
            trace.append(obj)
        g_lam = 1.0 / denom
        s = _lmo(tensor, b_c, g_lam)
        lam_s_score = float(g_lam @ s.lam)
        lam_x_score = float(g_lam @ lam_x)
        gap = lam_s_score - lam_x_score
        if gap <= rel_tol * max(1.0, abs(obj)):
            break

        use_away = False
        if variant == "away" and len(active) > 1:
            a_key = min(active, key=lambda k: float(g_lam @ active[k][1].lam))
            a_weight, a_vertex = active[a_key]
            gap_away = lam_x_score - float(g_lam @ a_vertex.lam)
            use_away = gap_away > gap and a_weight < 1.0

        if use_away:
            lam_d = lam_x - a_vertex.lam
            gamma_max = a_weight / (1.0 - a_weight)
        else:
            lam_d = s.lam - lam_x
            gamma_max = 1.0

        gamma = _line_search(lam_x, lam_d, weighted_r, gamma_max)

        # Exact line search is non-decreasing in reals; guard float dips by
        # halving, and stop without stepping if no improvement survives.
        committed = False
        while gamma > 1e-18:
            candidate = _apply_step(active, s, a_vertex if use_away else None,
                                    gamma, gamma_max, use_away)
            lam_c = _combo_lambda(candidate)
            if float(np.sum(np.log(weighted_r + lam_c))) >= obj:
                active = candidate
                committed = True
                break
            gamma *= 0.5
        if not committed:
            stalled = True
            break

    tol = rel_tol * max(1.0, abs(obj))
    if gap > tol:
        reason = "stalled" if stalled else f"iteration cap {max_iters} reached"
        raise SolverError(
            f"relaxed solve did not certify tolerance: {reason}, gap={gap:.3e}, "
            f"tol={tol:.3e} after {iterations} iterations", gap, iterations)

    total = sum(entry[0] for entry in active.values())
    alpha = np.zeros(tensor.space.n_sets)
    xi = np.zeros((tensor.space.n_pairs, tensor.n_cbs))
    for weight, vertex in active.values():
        w = weight / total
        alpha[vertex.set_idx] += w
        for q, p in enumerate(vertex.choices):
            if p >= 0:
                xi[p, q] += w
    lam_x = _combo_lambda(active) / total
    objective = float(np.sum(np.log(weighted_r + lam_x)))
    return RelaxedSolution(alpha, xi, lam_x, objective, gap, iterations, trace)


def _apply_step(active: dict, s: _Vertex, away: "_Vertex | None", gamma: float,
                gamma_max: float, use_away: bool) -> dict:
    new = {key: [w, v] for key, (w, v) in active.items()}
    if use_away:
        drop = math.isclose(gamma, gamma_max, rel_tol=0.0, abs_tol=1e-15)
        for entry in new.values():
            entry[0] *= (1.0 + gamma)
        new[away.key][0] -= gamma
        if drop or new[away.key][0] <= 1e-15:
            del new[away.key]
    else:
        if gamma >= 1.0:
            return {s.key: [1.0, s]}
        for entry in new.values():
            entry[0] *= (1.0 - gamma)
        if s.key in new:
            new[s.key][0] += gamma
        else:
            new[s.key] = [gamma, s]
    return new


# --- feasible rounding (floor and redistribute) ------------------------------

@dataclass
class FeasibleAllocation:
    alpha: np.ndarray          # multiples of 1/N_T
    beta: np.ndarray           # (P, Q), multiples of 1/N_F
    alpha_slots: np.ndarray    # integer slot counts, sum N_T
    beta_prbs: np.ndarray      # (P, Q) integer PRB counts


def _snap_floor(scaled: np.ndarray) -> np.ndarray:
    # floor with a 1e-9 snap so exact multiples survive float noise
    return np.floor(scaled + 1e-9).astype(int)


def round_feasible(alpha: np.ndarray, xi: np.ndarray, space: CandidateSpace,
                   n_time_slots: int, n_freq_subch: int) -> FeasibleAllocation:
    """Floor alpha to 1/N_T (beta = xi/alpha to 1/N_F) grids, then give the
    leftover slots to the beam set with the largest relaxed alpha and, per
    (set, CB), the leftover PRBs to the tuple with the largest floored beta.
    Ties break to the lowest index.  Beam sets with alpha = 0 are skipped.
    """
    alpha = np.asarray(alpha, float)
    xi = np.asarray(xi, float)
    n_sets, (n_pairs, n_q) = alpha.shape[0], xi.shape

    alpha_slots = _snap_floor(n_time_slots * alpha)
    leftover = n_time_slots - int(alpha_slots.sum())
    assert leftover >= 0, "floored slot counts exceed N_T"
    if leftover > 0:
        alpha_slots[int(np.argmax(alpha))] += leftover

    beta = np.zeros_like(xi)
    active_sets = np.flatnonzero(alpha > 0)
    for s in active_sets:
        lo, hi = int(space.set_pair_start[s]), int(space.set_pair_start[s + 1])
        beta[lo:hi] = np.clip(xi[lo:hi] / alpha[s], 0.0, 1.0)
    beta_prbs = _snap_floor(n_freq_subch * beta)
    for s in active_sets:
        lo, hi = int(space.set_pair_start[s]), int(space.set_pair_start[s + 1])
        for q in range(n_q):
            rem = n_freq_subch - int(beta_prbs[lo:hi, q].sum())
            assert rem >= 0, "floored PRB counts exceed N_F"
            if rem > 0:
                beta_prbs[lo + int(np.argmax(beta_prbs[lo:hi, q])), q] += rem

    return FeasibleAllocation(alpha_slots / n_time_slots, beta_prbs / n_freq_subch,
                              alpha_slots, beta_prbs)


# --- exhaustive oracle --------------------------------------------------------

def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


class BruteForceResult:
    """Exact optimum of the integer problem on a tiny instance.

    ``evaluate`` replays the enumeration's accumulation order bit-exactly,
    so comparing any feasible allocation against ``objective`` is an exact
    float comparison, not a toleranced one.
    """

    def __init__(self, tensor: RateTensor, pf: PfState, coherence_bw: float,
                 n_time_slots: int, n_freq_subch: int):
        self.tensor = tensor
        self.space = tensor.space
        self.pf = pf
        self.coherence_bw = coherence_bw
        self.n_time_slots = n_time_slots
        self.n_freq_subch = n_freq_subch
        self.n_q = tensor.n_cbs
        # per set: list of N_F-compositions over its tuples, and the
        # per-composition lambda contribution base (before the alpha factor)
        self.comps = []
        self.comp_index = []
        self.base = []
        scale = coherence_bw / (n_time_slots * n_freq_subch)
        for s, tuples in enumerate(self.space.ue_tuples):
            lo = int(self.space.set_pair_start[s])
            dense = np.zeros((len(tuples), self.n_q, self.space.n_ues))
            for t in range(len(tuples)):
                p = lo + t
                dense[t, :, tensor.ue_ids[p]] = tensor.rates[p].T
            comps = list(_compositions(n_freq_subch, len(tuples)))
            comp_mat = np.array(comps, float)                    # (C, nz)
            base_sq = np.einsum("cz,zqu->cqu", comp_mat, dense) * scale
            self.comps.append(comps)
            self.comp_index.append({c: i for i, c in enumerate(comps)})
            self.base.append(base_sq)
        self.alpha_slots = None
        self.beta_choice = None
        self.objective = -math.inf
        self.throughputs = None

    def evaluate(self, alpha_slots, beta_prbs_by_cell) -> float:
        """Objective of an integer allocation via the enumeration's own path.

        ``beta_prbs_by_cell``: {(set_idx, q): composition tuple} for every
        set with a positive slot count.
        """
        lam = np.zeros(self.space.n_ues)
        for s, slots in enumerate(alpha_slots):
            if slots == 0:
                continue
            for q in range(self.n_q):
                comp = tuple(int(c) for c in beta_prbs_by_cell[(s, q)])
                idx = self.comp_index[s][comp]
                lam = lam + slots * self.base[s][idx, q]
        return pf_objective(lam, self.pf)


def brute_force_work(space: CandidateSpace, n_time_slots: int, n_freq_subch: int,
                     n_q: int) -> int:
    """Exact leaf count of the exhaustive enumeration (computed via DP)."""
    ways = []
    for tuples in space.ue_tuples:
        c = math.comb(n_freq_subch + len(tuples) - 1, len(tuples) - 1)
        ways.append(c ** n_q)
    f = {0: 1}
    for w in ways:
        nxt = dict(f)
        for t, cnt in f.items():
            for s in range(1, n_time_slots - t + 1):
                nxt[t + s] = nxt.get(t + s, 0) + cnt * w
        f = nxt
    return f.get(n_time_slots, 0)


def brute_force_schedule(tensor: RateTensor, pf: PfState, n_time_slots: int,
                         n_freq_subch: int, coherence_bw: float,
                         cap: int = 2_000_000) -> BruteForceResult:
    """Exhaustively maximize the integer problem; refuses above ``cap`` leaves."""
    space = tensor.space
    work = brute_force_work(space, n_time_slots, n_freq_subch, tensor.n_cbs)
    if work > cap:
        raise CapExceededError(
            f"brute force would evaluate {work} allocations (cap {cap}); "
            "the oracle is tiny-scale only")

    result = BruteForceResult(tensor, pf, coherence_bw, n_time_slots, n_freq_subch)
    n_q = tensor.n_cbs

    def descend(cells, lam, chosen):
        if not cells:
            obj = pf_objective(lam, pf)
            if obj > result.objective:
                result.objective = obj
                result.beta_choice = dict(chosen)
                result.throughputs = lam.copy()
                result._alpha_snapshot = result._current_alpha
            return
        (s, q), rest = cells[0], cells[1:]
        slots = result._current_alpha[s]
        for idx, comp in enumerate(result.comps[s]):
            chosen[(s, q)] = comp
            descend(rest, lam + slots * result.base[s][idx, q], chosen)
        del chosen[(s, q)]

    for alpha_slots in _compositions(n_time_slots, space.n_sets):
        cells = [(s, q) for s in range(space.n_sets) if alpha_slots[s] > 0
                 for q in range(n_q)]
        result._current_alpha = alpha_slots
        descend(cells, np.zeros(space.n_ues), {})
    result.alpha_slots = result._alpha_snapshot
    del result._current_alpha, result._alpha_snapshot
    return result


# --- one-call pipeline for a MB ------------------------------------------------

@dataclass
class ScheduleSolution:
    relaxed: RelaxedSolution
    feasible: FeasibleAllocation
    feasible_throughputs: np.ndarray
    feasible_objective: float
    mean_active_ues: float


def dump_solution(path, sol: ScheduleSolution, space: CandidateSpace) -> None:
    """Per-MB solution CSV: a meta row, one row per beam set, one row per
    (set, CB, tuple) cell and one row per UE."""
    import csv as _csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["kind", "set", "beams", "q", "ue_tuple", "ue",
                         "alpha_relaxed", "alpha_feasible", "xi", "beta_feasible",
                         "lambda_relaxed", "lambda_feasible", "objective_relaxed",
                         "objective_feasible", "fw_gap", "fw_iterations"])
        writer.writerow(["meta", "", "", "", "", "", "", "", "", "",
                         "", "", repr(sol.relaxed.objective),
                         repr(sol.feasible_objective), repr(sol.relaxed.gap),
                         sol.relaxed.iterations])
        for s, beams in enumerate(space.beam_sets):
            writer.writerow(["set", s, " ".join(map(str, beams)), "", "", "",
                             repr(float(sol.relaxed.alpha[s])),
                             repr(float(sol.feasible.alpha[s])),
                             "", "", "", "", "", "", "", ""])
            lo, hi = int(space.set_pair_start[s]), int(space.set_pair_start[s + 1])
            for p in range(lo, hi):
                for q in range(sol.relaxed.xi.shape[1]):
                    writer.writerow(["cell", s, " ".join(map(str, beams)), q,
                                     " ".join(map(str, space.pair_ues(p))), "",
                                     "", "", repr(float(sol.relaxed.xi[p, q])),
                                     repr(float(sol.feasible.beta[p, q])),
                                     "", "", "", "", "", ""])
        for u in range(space.n_ues):
            writer.writerow(["ue", "", "", "", "", u, "", "", "", "",
                             repr(float(sol.relaxed.throughputs[u])),
                             repr(float(sol.feasible_throughputs[u])),
                             "", "", "", ""])


def schedule_mb(tensor: RateTensor, pf: PfState, cfg, record_trace: bool = False) -> ScheduleSolution:
    relaxed = solve_relaxed(tensor, pf, cfg, record_trace=record_trace)
    feasible = round_feasible(relaxed.alpha, relaxed.xi, tensor.space,
                              cfg.n_time_slots, cfg.n_freq_subch)
    lam = throughput(feasible.alpha, feasible.beta, tensor, cfg.coherence_bw)
    return ScheduleSolution(
        relaxed=relaxed,
        feasible=feasible,
        feasible_throughputs=lam,
        feasible_objective=pf_objective(lam, pf),
        mean_active_ues=mean_active_ues(feasible.alpha, feasible.beta, tensor.space,
                                        tensor.n_cbs),
    )
