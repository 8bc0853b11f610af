"""Eight statistical tests from NIST SP 800-22 rev. 1a and a battery runner.

Implemented: frequency (monobit), frequency within a block, runs, longest
run of ones in a block, binary matrix rank, discrete Fourier transform
(spectral), Maurer's universal statistical test and cumulative sums.  Each
test maps a 0/1 sequence to a ``TestResult``; a test passes when its p-value
exceeds 0.01.  Constants are those of SP 800-22 rev. 1a, section numbers
noted next to each table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import erfc, gammaincc, ndtr

from .errors import InvalidParameter, TooFewBits

ALPHA = 0.01

MIN_BITS = {
    "frequency": 100,
    "block_frequency": 100,
    "runs": 100,
    "longest_runs": 128,
    "rank": 38_912,
    "fft": 1000,
    "universal": 387_840,
    "cumulative_sums": 100,
}

# SP 800-22 2.4.4: (min n, block length M, category upper edges, pi_i)
LONGEST_RUN_TABLES = (
    (128, 8, (1, 2, 3, 4), (0.2148, 0.3672, 0.2305, 0.1875)),
    (6272, 128, (4, 5, 6, 7, 8, 9), (0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124)),
    (
        750_000,
        10_000,
        (10, 11, 12, 13, 14, 15, 16),
        (0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727),
    ),
)

# SP 800-22 2.9.7 and 2.9.4: L chosen by n; expectedValue and variance per L
UNIVERSAL_MIN_N = (
    (6, 387_840),
    (7, 904_960),
    (8, 2_068_480),
    (9, 4_654_080),
    (10, 10_342_400),
    (11, 22_753_280),
    (12, 49_643_520),
    (13, 107_560_960),
    (14, 231_669_760),
    (15, 496_435_200),
    (16, 1_059_061_760),
)
UNIVERSAL_EXPECTED = {
    6: 5.2177052, 7: 6.1962507, 8: 7.1836656, 9: 8.1764248, 10: 9.1723243,
    11: 10.170032, 12: 11.168765, 13: 12.168070, 14: 13.167693, 15: 14.167488,
    16: 15.167379,
}
UNIVERSAL_VARIANCE = {
    6: 2.954, 7: 3.125, 8: 3.238, 9: 3.311, 10: 3.356, 11: 3.384, 12: 3.401,
    13: 3.410, 14: 3.416, 15: 3.419, 16: 3.421,
}

RANK_SIZE = 32


def rank_probabilities(m: int = RANK_SIZE, q: int = RANK_SIZE) -> tuple[float, float, float]:
    """Probabilities of rank full, full - 1 and lower for a random m x q GF(2) matrix."""

    def p(r: int) -> float:
        prod = 1.0
        for i in range(r):
            prod *= (1 - 2.0 ** (i - q)) * (1 - 2.0 ** (i - m)) / (1 - 2.0 ** (i - r))
        return 2.0 ** (r * (q + m - r) - m * q) * prod

    full = min(m, q)
    p_full, p_minus = p(full), p(full - 1)
    return p_full, p_minus, 1.0 - p_full - p_minus


@dataclass(frozen=True)
class TestResult:
    name: str
    statistic: float
    p_value: float
    passed: bool
    n_bits: int

    __test__ = False  # not a pytest class


@dataclass(frozen=True)
class BatteryReport:
    results: tuple
    skipped: tuple
    all_passed: bool
    n_bits: int
    empty: bool = False
    alpha: float = ALPHA

    def by_name(self) -> dict:
        return {r.name: r for r in self.results}


def _bits(bits) -> np.ndarray:
    b = np.asarray(bits)
    if b.ndim != 1:
        raise InvalidParameter("bit sequence must be one-dimensional")
    b = b.astype(np.uint8, copy=False)
    if b.size and b.max() > 1:
        raise InvalidParameter("bit sequence may only contain 0 and 1")
    return b


def _require(name: str, n: int, min_bits: Optional[int]) -> None:
    need = MIN_BITS[name] if min_bits is None else min_bits
    if n < need:
        raise TooFewBits(f"{name} needs at least {need} bits, got {n}")


def _result(name: str, statistic: float, p: float, n: int, alpha: float = ALPHA) -> TestResult:
    # underflow or a NaN from a degenerate statistic counts as p = 0
    p = float(p)
    p = min(max(p, 0.0), 1.0) if math.isfinite(p) else 0.0
    return TestResult(name=name, statistic=float(statistic), p_value=p, passed=p > alpha, n_bits=n)


def frequency(bits, min_bits: Optional[int] = None) -> TestResult:
    b = _bits(bits)
    n = b.size
    _require("frequency", n, min_bits)
    s = 2 * int(np.count_nonzero(b)) - n
    s_obs = abs(s) / math.sqrt(n)
    return _result("frequency", s_obs, erfc(s_obs / math.sqrt(2)), n)


def block_frequency(bits, block_len: int = 128, min_bits: Optional[int] = None) -> TestResult:
    b = _bits(bits)
    n = b.size
    _require("block_frequency", n, min_bits)
    if block_len < 20 and min_bits is None:
        raise InvalidParameter("block length must be at least 20")
    nblocks = n // block_len
    if nblocks < 1:
        raise TooFewBits("block_frequency needs at least one full block")
    pi = b[: nblocks * block_len].reshape(nblocks, block_len).mean(axis=1)
    chi2 = 4.0 * block_len * float(np.sum((pi - 0.5) ** 2))
    return _result("block_frequency", chi2, gammaincc(nblocks / 2.0, chi2 / 2.0), n)


def runs(bits, min_bits: Optional[int] = None) -> TestResult:
    b = _bits(bits)
    n = b.size
    _require("runs", n, min_bits)
    pi = np.count_nonzero(b) / n
    v_obs = 1 + int(np.count_nonzero(b[1:] != b[:-1]))
    if abs(pi - 0.5) >= 2.0 / math.sqrt(n):
        # frequency prerequisite failed; the runs statistic is not meaningful
        return _result("runs", v_obs, 0.0, n)
    num = abs(v_obs - 2.0 * n * pi * (1 - pi))
    den = 2.0 * math.sqrt(2.0 * n) * pi * (1 - pi)
    return _result("runs", v_obs, erfc(num / den), n)


def _longest_run_per_row(blocks: np.ndarray) -> np.ndarray:
    nrows, width = blocks.shape
    padded = np.zeros((nrows, width + 2), dtype=np.uint8)
    padded[:, 1:-1] = blocks
    flat = padded.ravel()
    zeros = np.flatnonzero(flat == 0)
    gaps = np.diff(zeros) - 1
    rows = zeros[:-1] // (width + 2)
    longest = np.zeros(nrows, dtype=np.int64)
    np.maximum.at(longest, rows, gaps)
    return longest


def longest_runs(bits, min_bits: Optional[int] = None) -> TestResult:
    b = _bits(bits)
    n = b.size
    _require("longest_runs", n, min_bits)
    table = [t for t in LONGEST_RUN_TABLES if n >= t[0]][-1]
    _, m, edges, probs = table
    nblocks = n // m
    longest = _longest_run_per_row(b[: nblocks * m].reshape(nblocks, m))
    clipped = np.clip(longest, edges[0], edges[-1])
    counts = np.array([np.count_nonzero(clipped == e) for e in edges], dtype=np.float64)
    expected = nblocks * np.asarray(probs)
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    k = len(edges) - 1
    return _result("longest_runs", chi2, gammaincc(k / 2.0, chi2 / 2.0), n)


def gf2_rank(rows: np.ndarray, ncols: int) -> np.ndarray:
    """Ranks over GF(2) of a stack of matrices given as row bitmasks.

    ``rows`` has shape ``(k, m)``; bit ``ncols - 1 - j`` of ``rows[i, r]`` is
    entry ``(r, j)`` of matrix ``i``.  Elimination runs on all matrices at once.
    """
    rows = np.array(rows, dtype=np.uint64)
    k, m = rows.shape
    rank = np.zeros(k, dtype=np.int64)
    row_idx = np.arange(m)
    for c in range(ncols):
        bit = np.uint64(1) << np.uint64(ncols - 1 - c)
        has = (rows & bit) != 0
        cand = has & (row_idx[None, :] >= rank[:, None])
        ok = cand.any(axis=1)
        if not ok.any():
            continue
        sel = np.flatnonzero(ok)
        piv = cand[sel].argmax(axis=1)
        dst = rank[sel]
        pivot_rows = rows[sel, piv].copy()
        rows[sel, piv] = rows[sel, dst]
        rows[sel, dst] = pivot_rows
        sub = rows[sel]
        hit = (sub & bit) != 0
        hit[np.arange(sel.size), dst] = False
        sub ^= np.where(hit, pivot_rows[:, None], np.uint64(0))
        rows[sel] = sub
        rank[sel] += 1
    return rank


def _pack_rows(b: np.ndarray, nmat: int, size: int) -> np.ndarray:
    mats = b[: nmat * size * size].reshape(nmat, size, size)
    weights = np.uint64(1) << np.arange(size - 1, -1, -1, dtype=np.uint64)
    return (mats.astype(np.uint64) * weights).sum(axis=2, dtype=np.uint64)


def matrix_rank(bits, min_bits: Optional[int] = None) -> TestResult:
    b = _bits(bits)
    n = b.size
    _require("rank", n, min_bits)
    size = RANK_SIZE
    nmat = n // (size * size)
    if nmat < 1:
        raise TooFewBits("rank test needs at least one full matrix")
    ranks = gf2_rank(_pack_rows(b, nmat, size), size)
    f_full = int(np.count_nonzero(ranks == size))
    f_minus = int(np.count_nonzero(ranks == size - 1))
    counts = np.array([f_full, f_minus, nmat - f_full - f_minus], dtype=np.float64)
    expected = nmat * np.asarray(rank_probabilities(size, size))
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    return _result("rank", chi2, math.exp(-chi2 / 2.0), n)


def spectral_fft(bits, min_bits: Optional[int] = None) -> TestResult:
    b = _bits(bits)
    n = b.size - (b.size % 2)
    _require("fft", n, min_bits)
    x = 2.0 * b[:n] - 1.0
    modulus = np.abs(np.fft.rfft(x)[: n // 2])
    threshold = math.sqrt(math.log(1 / 0.05) * n)
    n0 = 0.95 * n / 2.0
    n1 = int(np.count_nonzero(modulus < threshold))
    d = (n1 - n0) / math.sqrt(n * 0.95 * 0.05 / 4.0)
    return _result("fft", d, erfc(abs(d) / math.sqrt(2)), n)


def universal_parameters(n: int) -> tuple[int, int, int]:
    """Block length L, initialization blocks Q and test blocks K for ``n`` bits."""
    eligible = [L for L, need in UNIVERSAL_MIN_N if n >= need]
    if not eligible:
        raise TooFewBits(f"universal needs at least {UNIVERSAL_MIN_N[0][1]} bits, got {n}")
    L = eligible[-1]
    Q = 10 * 2**L
    return L, Q, n // L - Q


def maurer_universal(bits, min_bits: Optional[int] = None) -> TestResult:
    b = _bits(bits)
    n = b.size
    _require("universal", n, min_bits)
    L, Q, K = universal_parameters(n)
    weights = 1 << np.arange(L - 1, -1, -1)
    values = b[: (Q + K) * L].reshape(Q + K, L).astype(np.int64) @ weights
    pos = np.arange(1, Q + K + 1)
    order = np.lexsort((pos, values))
    sv, sp = values[order], pos[order]
    prev = np.zeros(Q + K, dtype=np.int64)
    same = sv[1:] == sv[:-1]
    prev[order[1:]] = np.where(same, sp[:-1], 0)
    gaps = pos[Q:] - prev[Q:]
    fn = float(np.sum(np.log2(gaps))) / K
    c = 0.7 - 0.8 / L + (4 + 32 / L) * K ** (-3 / L) / 15
    sigma = c * math.sqrt(UNIVERSAL_VARIANCE[L] / K)
    p = erfc(abs(fn - UNIVERSAL_EXPECTED[L]) / (math.sqrt(2) * sigma))
    return _result("universal", fn, p, n)


def _cusum_p(n: int, z: int) -> float:
    sq = math.sqrt(n)
    # summation bounds truncate toward zero, as in the reference code
    k1 = np.arange(int((-n / z + 1) / 4), int((n / z - 1) / 4) + 1)
    s1 = np.sum(ndtr((4 * k1 + 1) * z / sq) - ndtr((4 * k1 - 1) * z / sq))
    k2 = np.arange(int((-n / z - 3) / 4), int((n / z - 1) / 4) + 1)
    s2 = np.sum(ndtr((4 * k2 + 3) * z / sq) - ndtr((4 * k2 + 1) * z / sq))
    return 1.0 - float(s1) + float(s2)


def cumulative_sums(bits, min_bits: Optional[int] = None) -> tuple[TestResult, TestResult]:
    """Forward and backward cumulative-sums results."""
    b = _bits(bits)
    n = b.size
    _require("cumulative_sums", n, min_bits)
    x = 2 * b.astype(np.int64) - 1
    out = []
    for name, seq in (("cumulative_sums_forward", x), ("cumulative_sums_backward", x[::-1])):
        z = int(np.abs(np.cumsum(seq)).max())
        out.append(_result(name, z, _cusum_p(n, z), n))
    return out[0], out[1]


TEST_ORDER = (
    "frequency",
    "block_frequency",
    "runs",
    "longest_runs",
    "rank",
    "fft",
    "universal",
    "cumulative_sums",
)


def run_battery(bits, alpha: float = ALPHA, block_len: int = 128) -> BatteryReport:
    """Run all eight tests; too-short inputs are reported as skipped, not failed."""
    b = _bits(bits)
    runners = {
        "frequency": lambda: frequency(b),
        "block_frequency": lambda: block_frequency(b, block_len),
        "runs": lambda: runs(b),
        "longest_runs": lambda: longest_runs(b),
        "rank": lambda: matrix_rank(b),
        "fft": lambda: spectral_fft(b),
        "universal": lambda: maurer_universal(b),
        "cumulative_sums": lambda: cumulative_sums(b),
    }
    results = []
    skipped = []
    for name in TEST_ORDER:
        try:
            out = runners[name]()
        except TooFewBits:
            skipped.append((name, "insufficient bits"))
            continue
        for r in out if isinstance(out, tuple) else (out,):
            if alpha != ALPHA:
                r = TestResult(r.name, r.statistic, r.p_value, r.p_value > alpha, r.n_bits)
            results.append(r)
    return BatteryReport(
        results=tuple(results),
        skipped=tuple(skipped),
        all_passed=all(r.passed for r in results),
        n_bits=int(b.size),
        empty=b.size == 0,
        alpha=alpha,
    )
