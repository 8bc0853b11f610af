"""Acceptance criteria 1-7, each at its stated tolerance.

Every test records one PASS/FAIL line (printed in the terminal summary) and
then asserts, so a red criterion stays red.
"""

import json
import time

import numpy as np
from scipy.special import erfinv

from rngverify import angle, nist
from rngverify.cli import main
from rngverify.config import AnalysisConfig
from rngverify.erf_fit import ErfModel, fit_erf
from rngverify.pipeline import analyze, monitor, write_series
from rngverify.report import dumps_report
from rngverify.series import CdfPoints, cdf_points, center, empirical_cdf, normalize, rank, sum_function
from rngverify.synth import ar1, derive_seed, duplicate_halves, gaussian, quantize, random_bits
from rngverify.topology import pair_criteria, split_quad


def test_criterion_1_sra_invariance(verdict):
    rng = np.random.default_rng(1)
    g_funcs = (np.square, lambda v: -v * np.log(v + 1e-12), np.cos)
    start = time.perf_counter()
    multiset_bad = sum_bad = 0
    for _ in range(1000):
        raw = rng.normal(size=int(rng.integers(2, 10_001))) * rng.uniform(0.1, 100)
        s = normalize(raw) if np.ptp(raw) > 0 else np.zeros_like(raw)
        for direction in ("ascending", "descending"):
            r = rank(s, direction).values
            multiset_bad += not np.array_equal(np.sort(r), np.sort(s))
            for g in g_funcs:
                a, b = sum_function(s, g), sum_function(r, g)
                sum_bad += abs(a - b) > 1e-9 * abs(a)
    elapsed = time.perf_counter() - start
    verdict(1, "SRA invariance", {
        "multiset": (multiset_bad == 0, f"{multiset_bad} failures"),
        "sum_function": (sum_bad == 0, f"{sum_bad} failures"),
        "runtime": (elapsed < 30, f"{elapsed:.1f}s < 30s"),
    })


def test_criterion_2_cdf_consistency(verdict):
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(100):
        s = rng.normal(size=int(rng.integers(2, 5000)))
        N = s.size
        desc = rank(s, "descending")
        pts = cdf_points(rank(s, "ascending"))
        f_desc = np.array([empirical_cdf(desc, n) for n in range(1, N + 1)])
        # descending rank n is ascending rank N + 1 - n: same amplitude, grid value z_{N+1-n}
        z_mirror = pts.z[::-1]
        assert np.array_equal(pts.x[::-1], desc.values)
        worst = max(worst, float(np.max(np.abs(f_desc - z_mirror))) * N)
        frac_le = np.searchsorted(pts.x, desc.values, side="right") / N
        worst = max(worst, float(np.max(np.abs(f_desc - frac_le))) * N)
    verdict(2, "rank-CDF consistency", {"within_1_over_N": (worst <= 1.0 + 1e-9, f"max deviation {worst:.3g}/N")})


def _model_points(w0, dw, n=1000):
    z = (np.arange(1, n + 1) - 0.5) / n
    return w0 + dw * erfinv(2 * z - 1), z


def test_criterion_3_erf_fit_recovery(verdict):
    rng = np.random.default_rng(3)
    worst_clean = worst_noisy = 0.0
    for _ in range(50):
        w0, dw = rng.uniform(0.1, 0.9), rng.uniform(0.01, 1.0)
        w, z = _model_points(w0, dw)
        m = fit_erf(CdfPoints(w, z)).model
        worst_clean = max(worst_clean, abs(m.w0 - w0), abs(m.dw - dw))
        # noise rides on the measured amplitude; z stays on its rank grid
        m = fit_erf(CdfPoints(w + rng.normal(0, 1e-3, w.size), z)).model
        worst_noisy = max(worst_noisy, abs(m.w0 - w0), abs(m.dw - dw))
    worst_jac = 0.0
    h = 1e-6
    for _ in range(100):
        w0, dw = rng.uniform(0.1, 0.9), rng.uniform(0.05, 1.0)
        w = rng.uniform(0, 1, 5)
        J = ErfModel(w0, dw).jacobian(w)
        fd = np.column_stack([
            (ErfModel(w0 + h, dw)(w) - ErfModel(w0 - h, dw)(w)) / (2 * h),
            (ErfModel(w0, dw + h)(w) - ErfModel(w0, dw - h)(w)) / (2 * h),
        ])
        worst_jac = max(worst_jac, float(np.max(np.abs(J - fd)) / np.max(np.abs(fd))))
    verdict(3, "erf-fit recovery", {
        "noiseless": (worst_clean <= 1e-6, f"max error {worst_clean:.2g}"),
        "noise_1e-3": (worst_noisy <= 1e-3, f"max error {worst_noisy:.2g}"),
        "jacobian": (worst_jac <= 1e-5, f"max relative {worst_jac:.2g}"),
    })


def test_criterion_4_topology_sensitivity(verdict):
    start = time.perf_counter()
    n = 2_000_000
    g = pair_criteria(split_quad(gaussian(n, 42)))
    a = pair_criteria(split_quad(ar1(n, 0.1, 42)))
    d = pair_criteria(split_quad(duplicate_halves(n, 0.0, 42)))
    elapsed = time.perf_counter() - start
    verdict(4, "topology detector", {
        "gaussian": (g.r2_12 < 5e-5 and g.r2_34 < 5e-5, f"R2_12={g.r2_12:.2g}, R2_34={g.r2_34:.2g}"),
        "ar1": (0.005 <= a.r2_34 <= 0.02 and a.r2_12 < 5e-5, f"R2_12={a.r2_12:.2g}, R2_34={a.r2_34:.3g}"),
        "duplicate": (d.r2_12 == 1.0 and d.r2_34 < 5e-5, f"R2_12={d.r2_12!r}, R2_34={d.r2_34:.2g}"),
        "runtime": (elapsed < 60, f"{elapsed:.1f}s < 60s"),
    })


def _zero_fraction(x, y):
    return angle.split(angle.decompose(center(x), center(y))).zero_fraction


def test_criterion_5_angle_null(verdict, gaussian_2m):
    x, y = gaussian_2m[:1_000_000], gaussian_2m[1_000_000:]
    d = angle.decompose(center(x), center(y))
    t = angle.split(d)
    u = angle.angle_uniformity(d.phi)
    dphi_fit, dr_fit = angle.inhomogeneity_fits(t)
    r_fit = angle.radius_fit(d.r)
    ones = angle.extract_bits(t).ones_fraction
    zf_q = _zero_fraction(quantize(x, 12), quantize(y, 12))
    r2s = (r_fit.r2, dphi_fit.r2, dr_fit.r2)
    verdict(5, "angle pipeline null", {
        "uniformity": (u < 2e-3, f"{u:.3g} < 2e-3"),
        "fits_r2": (min(r2s) >= 0.999, "radius/dphi/dr r2 = " + "/".join(f"{v:.5f}" for v in r2s)),
        "ones_fraction": (abs(ones - 0.5) <= 0.002, f"{ones:.5f}"),
        "zero_fraction_raw": (t.zero_fraction == 0, f"{t.zero_fraction}"),
        "zero_fraction_12bit": (5e-5 <= zf_q <= 5e-3, f"{zf_q:.3g} in [5e-5, 5e-3]"),
    })


def test_criterion_6_nist_battery(verdict, gaussian_2m):
    start = time.perf_counter()
    ex_freq = nist.frequency(np.array([1, 0, 1, 1, 0, 1, 0, 1, 0, 1]), min_bits=0).p_value
    ex_runs = nist.runs(np.array([1, 0, 0, 1, 1, 0, 1, 0, 1, 1]), min_bits=0).p_value
    examples_ok = abs(ex_freq - 0.527089) <= 1e-6 and abs(ex_runs - 0.147232) <= 1e-6

    zeros = nist.run_battery(np.zeros(1_000_000, np.uint8)).by_name()
    zero_names = ("frequency", "runs", "rank", "universal", "cumulative_sums_forward", "cumulative_sums_backward")
    zeros_ok = all(not zeros[k].passed for k in zero_names)
    ones_results = [
        nist.frequency(np.ones(100, np.uint8)),
        nist.block_frequency(np.ones(2560, np.uint8), 128),
        nist.longest_runs(np.ones(128, np.uint8)),
        *nist.cumulative_sums(np.ones(100, np.uint8)),
    ]
    ones_ok = all(not r.passed for r in ones_results)

    passes: dict = {}
    for i in range(1000):
        rep = nist.run_battery(random_bits(100_000, derive_seed(6, i)))
        for r in rep.results:
            passes.setdefault(r.name, []).append(r.passed)
    fractions = {k: float(np.mean(v)) for k, v in passes.items()}
    null_ok = all(0.97 <= f <= 1.0 for f in fractions.values())

    bits = angle.extract_bits(angle.split(angle.decompose(center(gaussian_2m[:1_000_000]), center(gaussian_2m[1_000_000:]))))
    e2e = nist.run_battery(bits.bits)
    failed = [f"{r.name}:{r.p_value:.2g}" for r in e2e.results if not r.passed]
    elapsed = time.perf_counter() - start
    verdict(6, "NIST battery", {
        "worked_examples": (examples_ok, f"frequency {ex_freq:.6f}, runs {ex_runs:.6f}"),
        "all_zeros": (zeros_ok, ", ".join(f"{k}:{zeros[k].p_value:.2g}" for k in zero_names)),
        "all_ones": (ones_ok, ", ".join(f"{r.name}:{r.p_value:.2g}" for r in ones_results)),
        "null_pass_fraction": (null_ok, ", ".join(f"{k}:{v:.3f}" for k, v in fractions.items())),
        "end_to_end": (not failed, "failed " + (", ".join(failed) or "none")),
        "runtime": (elapsed < 600, f"{elapsed:.0f}s < 600s"),
    })


def _switch_stream(defect, switch_at, total, chunk):
    parts = []
    for i in range(1, total + 1):
        seed = derive_seed(7, i)
        parts.append(gaussian(chunk, seed) if i < switch_at else defect(chunk, seed))
    return parts


def test_criterion_7_pipeline_contract(verdict, tmp_path):
    cfg = AnalysisConfig()
    s = gaussian(2 * cfg.chunk_size, 42)
    same = dumps_report(analyze(s, cfg)) == dumps_report(analyze(s.copy(), cfg))

    data = tmp_path / "g.bin"
    write_series(data, s)
    quiet = tmp_path / "quiet.json"
    quiet.write_text(json.dumps({"nist_role": "info", "uniformity_role": "info"}))
    dup = tmp_path / "dup.bin"
    write_series(dup, duplicate_halves(2 * cfg.chunk_size, 0.0, 42))
    codes = (
        main(["analyze", str(data), "--config", str(quiet), "--json", str(tmp_path / "a.json")]),
        main(["analyze", str(dup), "--config", str(quiet), "--json", str(tmp_path / "b.json")]),
        main(["analyze", str(tmp_path / "missing.bin")]),
    )

    alarms = {}
    for name, defect in (
        ("ar1", lambda n, seed: ar1(n, 0.1, seed)),
        ("duplicate", lambda n, seed: duplicate_halves(n, 0.0, seed)),
    ):
        chunks = _switch_stream(defect, switch_at=6, total=10, chunk=cfg.chunk_size)
        alarms[name] = [r.index for r in monitor(chunks, cfg) if r.alarm]
    expected = [6 + cfg.consecutive_alarms - 1]
    verdict(7, "pipeline determinism and CI contract", {
        "byte_identical": (same, "two runs compared"),
        "exit_codes": (codes == (0, 1, 2), f"pass/fail/io = {codes}"),
        "monitor_alarm": (all(v == expected for v in alarms.values()), f"alarms {alarms}, expected {expected}"),
    })
