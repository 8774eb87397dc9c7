"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s``.  The campaigns use the
desk profile (U<=8, N_b=32, N_u=8, Q=4, Z=20, 20 MBs) and a fixed master
seed, so every number here is reproducible.
"""

import math

import numpy as np
import pytest

from mmwsched.beams import beam_align, design_codebook
from mmwsched.channel import generate_realization, synthesize_channel
from mmwsched.cli import main as cli_main
from mmwsched.config import dbm_to_watts, load_config, watts_to_dbm, with_overrides
from mmwsched.harness import aggregate_point, run_point, run_realization, sandwich_check
from mmwsched.link import noise_power_prb
from mmwsched.scheduler import RateTensor, round_feasible, throughput
from test_scheduler import constant_tensor, make_space

MASTER_SEED = 20250809
Z = 20
FW_TOL = 1e-6


def _pass(name, detail):
    print(f"PASS [{name}] {detail}")


@pytest.fixture(scope="module")
def desk():
    return load_config(profile="desk")


@pytest.fixture(scope="module")
def gap_suite(desk):
    """Relaxation-gap campaign: U in {4, 8} at desk scale."""
    points = {}
    for n_ues in (4, 8):
        cfg = with_overrides(desk, n_ues=n_ues)
        results = run_point(cfg, realizations=Z, master_seed=MASTER_SEED)
        points[n_ues] = (cfg, results, aggregate_point(cfg, results, Z, MASTER_SEED))
    return points


@pytest.fixture(scope="module")
def trend_suite(desk):
    """Trend campaign: U=8, K_b in {2,4,8} at K'_b=1 plus (K_b=2, K'_b=2)."""
    points = {}
    for kb, kpb in ((2, 1), (4, 1), (8, 1), (2, 2)):
        cfg = with_overrides(desk, n_bs_rf=kb, rf_per_stream_bs=kpb)
        results = run_point(cfg, realizations=Z, master_seed=MASTER_SEED)
        points[(kb, kpb)] = (cfg, results, aggregate_point(cfg, results, Z, MASTER_SEED))
    return points


def test_sandwich_exactness(desk):
    """>= 50 randomized tiny instances: Alg-1 <= oracle <= relaxed + tol."""
    records = sandwich_check(desk, n_instances=50, seed=MASTER_SEED)
    violations = [r for r in records if not (r["left_ok"] and r["right_ok"])]
    assert len(records) == 50
    assert not violations, violations
    _pass("sandwich-exactness", f"{len(records)} instances, 0 violations")


def test_relaxation_gap(gap_suite):
    """Mean GM gap and per-MB objective gap within 2% at desk scale."""
    for n_ues, (cfg, results, row) in gap_suite.items():
        assert abs(row["gap_pct"]) <= 2.0, (n_ues, row["gap_pct"])
        assert row["max_obj_gap_pct"] <= 2.0, (n_ues, row["max_obj_gap_pct"])
        assert row["max_obj_gap_pct"] >= 0.0
    detail = ", ".join(
        f"U={u}: gm gap {row['gap_pct']:+.3f}%, max per-MB objective gap "
        f"{row['max_obj_gap_pct']:.4f}%" for u, (_, _, row) in gap_suite.items())
    _pass("relaxation-gap", detail)


def test_trend_reproduction(trend_suite):
    """GM grows with K_b (K'_b=1); K'_b=2 hurts at K_b=2; active UEs behave."""
    rows = {key: row for key, (_, _, row) in trend_suite.items()}
    ses = {key: float(np.std([r.gm for r in res], ddof=1) / math.sqrt(len(res)))
           for key, (_, res, _) in trend_suite.items()}
    # (i) non-decreasing within 1 SE (of the difference of realization means)
    for a, b in (((2, 1), (4, 1)), ((4, 1), (8, 1))):
        tol = math.hypot(ses[a], ses[b])
        assert rows[b]["gm_bar"] >= rows[a]["gm_bar"] - tol, (a, b)
    # (ii) K'_b=2 strictly lower at K_b=2 (fewer streams)
    assert rows[(2, 2)]["gm_bar"] < rows[(2, 1)]["gm_bar"]
    # (iii) active UEs/PRB non-decreasing in K_b and structurally bounded
    act = [rows[(k, 1)]["mean_active_ues_per_prb"] for k in (2, 4, 8)]
    assert act[0] <= act[1] + 1e-9 and act[1] <= act[2] + 1e-9
    for (kb, kpb), (cfg, results, _) in trend_suite.items():
        for res in results:
            bound = min(cfg.n_ues, cfg.max_streams, res.n_distinct_beams)
            assert res.mean_active_ues <= bound + 1e-9
    _pass("trend-reproduction",
          f"gm_bar {rows[(2,1)]['gm_bar']:.4g} -> {rows[(4,1)]['gm_bar']:.4g} -> "
          f"{rows[(8,1)]['gm_bar']:.4g}; K'_b=2 ratio "
          f"{rows[(2,2)]['gm_bar']/rows[(2,1)]['gm_bar']:.3f}; active {act}")


def test_solver_certificate(desk, gap_suite, trend_suite):
    """FW gap <= 1e-6 * |objective| on every solve; monotone objective traces."""
    worst = 0.0
    n_solves = 0
    for suite in (gap_suite, trend_suite):
        for _, results, _ in suite.values():
            for res in results:
                worst = max(worst, float(res.fw_gap_rel.max()))
                n_solves += res.fw_gap_rel.size
    assert worst <= FW_TOL
    traced = run_realization(with_overrides(desk, n_mbs=10), seed=MASTER_SEED,
                             trace_mbs=10)
    assert len(traced.traces) == 10
    for trace in traced.traces:
        diffs = np.diff(np.array(trace))
        assert np.all(diffs >= 0)
    _pass("solver-certificate",
          f"{n_solves} solves, max relative gap {worst:.3e}; "
          f"10 traces non-decreasing")


def test_unit_identities(desk):
    """Frozen identities: noise power, Eq.-(7) case, rounding, channel energy, BA."""
    # sigma^2_PRB for the full-size numerology
    sigma2 = noise_power_prb(720e3, dbm_to_watts(-174.0))
    assert abs(watts_to_dbm(sigma2) - (-115.43)) <= 0.01

    # single-allocation throughput: lambda = B_c * Q * r exactly
    space = make_space([0], max_streams=1)
    tensor = constant_tensor(space, n_cbs=22, value=2.0)
    lam = throughput(np.array([1.0]), np.ones((1, 22)), tensor, 8.64e6)
    assert lam[0] == 380.16e6

    # rounding fixed point and hand trace
    space2 = make_space([0, 1], max_streams=1)
    fixed = round_feasible(np.array([0.25, 0.75]),
                           np.array([[0.25], [0.75]]), space2, 4, 12)
    np.testing.assert_array_equal(fixed.alpha, [0.25, 0.75])
    trace = round_feasible(np.array([0.3, 0.7]), np.array([[0.3], [0.7]]),
                           space2, 4, 12)
    np.testing.assert_allclose(trace.alpha, [0.25, 0.75])

    # channel Frobenius energy within 2 percent
    cfg1 = with_overrides(desk, n_ues=1)
    real = generate_realization(cfg1, seed=33)
    target = cfg1.n_ue_antennas * cfg1.n_bs_antennas * 10 ** (-0.1 * real.ues[0].path_loss_db)
    total = sum(np.linalg.norm(synthesize_channel(real, cfg1, 0, q, 0)) ** 2
                for q in range(3000))
    assert abs(total / 3000 - target) / target < 0.02

    # beam alignment equals the exhaustive 128-pair re-scan
    bs_cb = design_codebook(32, 4, 1)          # 16 beams
    ue_cb = design_codebook(8, 3, 1)           # 8 beams
    rng = np.random.default_rng(MASTER_SEED)
    channels = (rng.standard_normal((2, 2, 8, 32))
                + 1j * rng.standard_normal((2, 2, 8, 32)))
    align = beam_align(channels, bs_cb, ue_cb)
    for u in range(2):
        best = max(((jb, ju) for jb in range(16) for ju in range(8)),
                   key=lambda p: sum(
                       abs(ue_cb.codewords[p[1]].conj() @ channels[q, u]
                           @ bs_cb.codewords[p[0]]) ** 2 for q in range(2)))
        assert (align.bs_beam[u], align.ue_beam[u]) == best
    _pass("unit-identities",
          f"sigma2={watts_to_dbm(sigma2):.4f} dBm; lambda=380.16 Mb/s exact; "
          "rounding, channel energy, BA re-scan all verified")


def test_determinism(tmp_path):
    """Identical seeds give byte-identical CSVs (no timestamps emitted)."""
    args = ["run", "--profile", "desk", "--seed", "3", "--realizations", "2",
            "--set", "n_ues=4", "--set", "n_mbs=4", "--set", "n_cbs_freq=2",
            "--set", "n_bs_antennas=16", "--set", "n_ue_antennas=4",
            "--set", "bs_codebook_bits=3", "--set", "ue_codebook_bits=2",
            "--set", "n_bs_rf=2"]
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    per_a, per_b = tmp_path / "pa.csv", tmp_path / "pb.csv"
    assert cli_main(args + ["--output", str(out_a), "--per-realization", str(per_a)]) == 0
    assert cli_main(args + ["--output", str(out_b), "--per-realization", str(per_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    assert per_a.read_bytes() == per_b.read_bytes()
    _pass("determinism", "aggregate and per-realization CSVs byte-identical")
