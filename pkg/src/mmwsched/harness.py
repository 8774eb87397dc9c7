"""Campaign driver: realizations, MB loop, metrics, sweeps, CSV output.

One realization = one UE drop: beam alignment runs once on the first MB's
channels, the candidate space is fixed, then the scheduler runs for
``n_mbs`` consecutive MBs with the PF average driven by the feasible
(post-rounding) throughputs.  The relaxed solution of each MB, solved on
the same PF trajectory, provides the per-realization upper-bound metrics.
"""

import csv
import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .beams import beam_align, design_codebook, effective_channels
from .channel import generate_realization, synthesize_mb
from .config import ConfigError, SystemConfig, load_config, validate_config
from .link import RateTable
from .rng import derive_seed, substream
from .scheduler import (CapExceededError, PfState, RateTensor, SolverError,
                        brute_force_schedule, build_candidate_space,
                        dump_solution, precompute_rates, round_feasible,
                        schedule_mb, solve_relaxed, update_average)

CSV_SCHEMA_VERSION = 1

SWEEPABLE_FIELDS = (
    "n_ues", "n_bs_rf", "rf_per_stream_bs", "rf_per_stream_ue",
    "n_bs_antennas", "n_ue_antennas", "bs_codebook_bits", "ue_codebook_bits",
)

COORD_FIELDS = (
    "n_ues", "n_bs_antennas", "n_ue_antennas", "n_bs_rf", "rf_per_stream_bs",
    "n_ue_rf", "rf_per_stream_ue", "bs_codebook_bits", "ue_codebook_bits",
    "n_cbs_freq", "n_mbs",
)

AGGREGATE_COLUMNS = ("schema_version",) + COORD_FIELDS + (
    "realizations", "master_seed", "gm_bar", "gmr_bar", "gap_pct",
    "mean_active_ues_per_prb", "max_obj_gap_pct", "max_fw_gap_rel",
    "mean_fw_iters", "status", "error",
)

REALIZATION_COLUMNS = ("schema_version",) + COORD_FIELDS + (
    "master_seed", "realization", "seed", "gm", "gm_r",
    "mean_active_ues_per_prb", "max_obj_gap_pct", "max_fw_gap_rel", "status", "error",
)


def geometric_mean(values) -> float:
    v = np.asarray(values, dtype=float)
    if v.size == 0 or np.any(v <= 0):
        return 0.0
    return float(np.exp(np.mean(np.log(v))))


@dataclass
class RealizationResult:
    seed: int
    feasible_mean: np.ndarray     # (U,) per-UE throughput averaged over MBs
    relaxed_mean: np.ndarray
    gm: float
    gm_r: float
    mean_active_ues: float
    obj_relaxed: np.ndarray       # per MB
    obj_feasible: np.ndarray
    fw_gap_rel: np.ndarray        # gap / max(1, |objective|) per MB
    fw_iters: np.ndarray
    n_distinct_beams: int
    traces: list

    @property
    def max_obj_gap_pct(self) -> float:
        rel = (self.obj_relaxed - self.obj_feasible) / np.abs(self.obj_relaxed)
        return float(100.0 * rel.max())


def run_realization(cfg: SystemConfig, seed: int, table: RateTable | None = None,
                    trace_mbs: int = 0, dump_dir=None) -> RealizationResult:
    """BA once, then schedule cfg.n_mbs consecutive MBs.

    ``dump_dir`` writes one solution CSV per MB (alpha/xi/beta/lambda rows).
    """
    table = table or RateTable.default()
    real = generate_realization(cfg, seed)
    bs_cb = design_codebook(cfg.n_bs_antennas, cfg.bs_codebook_bits, cfg.rf_per_stream_bs)
    ue_cb = design_codebook(cfg.n_ue_antennas, cfg.ue_codebook_bits, cfg.rf_per_stream_ue)

    channels0 = synthesize_mb(real, cfg, 0)
    align = beam_align(channels0, bs_cb, ue_cb)
    space = build_candidate_space(align, cfg.max_streams, cfg.n_ues,
                                  cfg.max_beam_sets, cfg.max_ue_tuples)
    pf = PfState.initial(cfg.n_ues, cfg.pf_window, cfg.pf_floor)

    feas = np.zeros((cfg.n_mbs, cfg.n_ues))
    rel = np.zeros((cfg.n_mbs, cfg.n_ues))
    obj_rel = np.zeros(cfg.n_mbs)
    obj_feas = np.zeros(cfg.n_mbs)
    fw_gap_rel = np.zeros(cfg.n_mbs)
    fw_iters = np.zeros(cfg.n_mbs, dtype=int)
    active = np.zeros(cfg.n_mbs)
    traces = []

    for mb in range(cfg.n_mbs):
        channels = channels0 if mb == 0 else synthesize_mb(real, cfg, mb)
        eff = effective_channels(channels, align, bs_cb, ue_cb)
        tensor = precompute_rates(space, eff, cfg, table)
        try:
            sol = schedule_mb(tensor, pf, cfg, record_trace=mb < trace_mbs)
        except SolverError as exc:
            raise SolverError(f"seed {seed}, MB {mb}: {exc}", exc.gap, exc.iterations) from exc
        feas[mb] = sol.feasible_throughputs
        rel[mb] = sol.relaxed.throughputs
        obj_rel[mb] = sol.relaxed.objective
        obj_feas[mb] = sol.feasible_objective
        fw_gap_rel[mb] = sol.relaxed.gap / max(1.0, abs(sol.relaxed.objective))
        fw_iters[mb] = sol.relaxed.iterations
        active[mb] = sol.mean_active_ues
        if sol.relaxed.trace is not None:
            traces.append(sol.relaxed.trace)
        if dump_dir is not None:
            dump_solution(os.path.join(dump_dir, f"seed{seed}_mb{mb:03d}.csv"),
                          sol, space)
        pf = update_average(pf, sol.feasible_throughputs)

    feasible_mean = feas.mean(axis=0)
    relaxed_mean = rel.mean(axis=0)
    return RealizationResult(
        seed=seed,
        feasible_mean=feasible_mean,
        relaxed_mean=relaxed_mean,
        gm=geometric_mean(feasible_mean),
        gm_r=geometric_mean(relaxed_mean),
        mean_active_ues=float(active.mean()),
        obj_relaxed=obj_rel,
        obj_feasible=obj_feas,
        fw_gap_rel=fw_gap_rel,
        fw_iters=fw_iters,
        n_distinct_beams=len(align.distinct_bs_beams),
        traces=traces,
    )


# --- campaigns ---------------------------------------------------------------

@dataclass
class CampaignSpec:
    base: SystemConfig
    axes: dict                  # ordered {field: [values]}
    realizations: int
    master_seed: int

    def points(self) -> list:
        """Validated config per grid point, in declared axis order."""
        if not self.axes:
            return [self.base]
        names = list(self.axes)
        configs = []
        for combo in itertools.product(*(self.axes[n] for n in names)):
            cfg = replace(self.base, **dict(zip(names, combo)))
            configs.append(validate_config(cfg))
        return configs


def parse_campaign_text(text: str, source: str = "<campaign>",
                        base: SystemConfig | None = None) -> CampaignSpec:
    """Campaign file: ``realizations``/``master_seed``/``profile``/``config``
    keys, ``sweep <field> = v1 v2 ...`` axes, plus plain config overrides."""
    realizations, master_seed = 1, 0
    profile, config_path = None, None
    axes: dict = {}
    overrides: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(source, f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key.startswith("sweep "):
            field = key.split(None, 1)[1]
            if field not in SWEEPABLE_FIELDS:
                raise ConfigError(field, f"not sweepable; choose from {SWEEPABLE_FIELDS}")
            axes[field] = [int(v) for v in raw.split()]
        elif key == "realizations":
            realizations = int(raw)
        elif key == "master_seed":
            master_seed = int(raw)
        elif key == "profile":
            profile = raw
        elif key == "config":
            config_path = raw
        else:
            overrides[key] = raw
    if base is None:
        base = load_config(path=config_path, profile=profile, overrides=overrides)
    spec = CampaignSpec(base, axes, realizations, master_seed)
    spec.points()   # fail fast if any swept combination is invalid
    return spec


def _realization_job(args):
    cfg, index, master_seed, trace_mbs = args
    seed = derive_seed(master_seed, index)
    return run_realization(cfg, seed, trace_mbs=trace_mbs)


def run_point(cfg: SystemConfig, realizations: int, master_seed: int,
              workers: int = 1, trace_mbs: int = 0) -> list:
    """All realizations of one sweep point, ordered by realization index."""
    jobs = [(cfg, i, master_seed, trace_mbs) for i in range(realizations)]
    if workers <= 1:
        return [_realization_job(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_realization_job, jobs))


def _coords(cfg: SystemConfig) -> dict:
    return {name: getattr(cfg, name) for name in COORD_FIELDS}


def aggregate_point(cfg: SystemConfig, results: list, realizations: int,
                    master_seed: int) -> dict:
    gms = [r.gm for r in results]
    gmrs = [r.gm_r for r in results]
    gm_bar = float(np.mean(gms))
    gmr_bar = float(np.mean(gmrs))
    gap_pct = 100.0 * (gmr_bar - gm_bar) / gmr_bar if gmr_bar > 0 else 0.0
    row = {"schema_version": CSV_SCHEMA_VERSION, **_coords(cfg),
           "realizations": realizations, "master_seed": master_seed,
           "gm_bar": gm_bar, "gmr_bar": gmr_bar, "gap_pct": gap_pct,
           "mean_active_ues_per_prb": float(np.mean([r.mean_active_ues for r in results])),
           "max_obj_gap_pct": float(np.max([r.max_obj_gap_pct for r in results])),
           "max_fw_gap_rel": float(np.max([r.fw_gap_rel.max() for r in results])),
           "mean_fw_iters": float(np.mean([r.fw_iters.mean() for r in results])),
           "status": "ok", "error": ""}
    return row


def run_campaign(spec: CampaignSpec, workers: int = 1, progress=None):
    """Execute the sweep grid; returns (aggregate_rows, per_realization_rows).

    A failing sweep point is recorded with status=error and the campaign
    continues with the remaining points.
    """
    agg_rows, per_rows = [], []
    for idx, cfg in enumerate(spec.points()):
        if progress:
            progress(f"point {idx + 1}: {_coords(cfg)}")
        try:
            results = run_point(cfg, spec.realizations, spec.master_seed, workers)
        except (SolverError, CapExceededError) as exc:
            row = {"schema_version": CSV_SCHEMA_VERSION, **_coords(cfg),
                   "realizations": spec.realizations, "master_seed": spec.master_seed,
                   "gm_bar": "", "gmr_bar": "", "gap_pct": "",
                   "mean_active_ues_per_prb": "", "max_obj_gap_pct": "",
                   "max_fw_gap_rel": "", "mean_fw_iters": "",
                   "status": "error", "error": str(exc)}
            agg_rows.append(row)
            continue
        agg_rows.append(aggregate_point(cfg, results, spec.realizations, spec.master_seed))
        for i, res in enumerate(results):
            per_rows.append({"schema_version": CSV_SCHEMA_VERSION, **_coords(cfg),
                             "master_seed": spec.master_seed, "realization": i,
                             "seed": res.seed, "gm": res.gm, "gm_r": res.gm_r,
                             "mean_active_ues_per_prb": res.mean_active_ues,
                             "max_obj_gap_pct": res.max_obj_gap_pct,
                             "max_fw_gap_rel": float(res.fw_gap_rel.max()),
                             "status": "ok", "error": ""})
    return agg_rows, per_rows


def write_csv(path, columns, rows) -> None:
    """Floats are written with repr so identical runs are byte-identical."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format_cell(row.get(c, "")) for c in columns])


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(float(value))        # repr round-trips; float() drops numpy scalars
    return str(value)


# --- tiny-instance oracle suite ------------------------------------------------

@dataclass(frozen=True)
class _FakeAlignment:
    bs_beam: np.ndarray
    distinct_bs_beams: tuple


def random_tiny_instance(rng: np.random.Generator, table: RateTable):
    """Random (space, tensor, pf, N_T, N_F) with U<=3, |L|<=4, Q=1."""
    n_ues = int(rng.integers(1, 4))
    # (distinct beams, L) kept small enough that |L| <= 4
    options = [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1)]
    n_beams, max_streams = options[int(rng.integers(0, len(options)))]
    n_beams = min(n_beams, n_ues)
    # every beam gets at least one UE
    assignment = np.concatenate([np.arange(n_beams),
                                 rng.integers(0, n_beams, n_ues - n_beams)])
    align = _FakeAlignment(assignment, tuple(range(n_beams)))
    space = build_candidate_space(align, max_streams, n_ues, 100, 100)

    n_time_slots = int(rng.choice([2, 4]))
    n_freq_subch = int(rng.choice([2, 3]))
    rates = []
    effs = np.concatenate([[0.0], table.efficiencies])
    for p in range(space.n_pairs):
        k = len(space.pair_ues(p))
        rates.append(effs[rng.integers(0, effs.size, size=(1, k))])
    tensor = RateTensor(space, rates, 1)
    pf = PfState.initial(n_ues, 100, 1e3)
    pf = PfState(pf.avg_throughput * rng.uniform(1.0, 50.0, n_ues), pf.window)
    return space, tensor, pf, n_time_slots, n_freq_subch


def sandwich_check(cfg: SystemConfig, n_instances: int, seed: int,
                   table: RateTable | None = None) -> list:
    """Alg-1 <= exact oracle <= relaxed + tol on random tiny instances."""
    table = table or RateTable.default()
    rng = substream(seed, 9)
    records = []
    for i in range(n_instances):
        space, tensor, pf, n_t, n_f = random_tiny_instance(rng, table)
        relaxed = solve_relaxed(tensor, pf, cfg)
        feasible = round_feasible(relaxed.alpha, relaxed.xi, space, n_t, n_f)
        oracle = brute_force_schedule(tensor, pf, n_t, n_f, cfg.coherence_bw)
        cells = {}
        for s in range(space.n_sets):
            if feasible.alpha_slots[s] == 0:
                continue
            lo, hi = int(space.set_pair_start[s]), int(space.set_pair_start[s + 1])
            for q in range(tensor.n_cbs):
                cells[(s, q)] = tuple(int(v) for v in feasible.beta_prbs[lo:hi, q])
        feas_obj = oracle.evaluate(feasible.alpha_slots, cells)
        tol = cfg.fw_rel_tol * max(1.0, abs(relaxed.objective))
        records.append({
            "instance": i,
            "feasible": feas_obj,
            "oracle": oracle.objective,
            "relaxed": relaxed.objective,
            "tol": tol,
            "left_ok": feas_obj <= oracle.objective,
            "right_ok": oracle.objective <= relaxed.objective + tol,
        })
    return records
