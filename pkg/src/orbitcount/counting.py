"""Counting pipelines: orbital series, growth fits, pair measures.

Series are built by a single pass over the word ball, partitioned by
length-1 prefixes so the ``workers`` knob can fan subtrees out to a pool;
partial results are merged associatively (counts add, value arrays are
sorted), which keeps every report independent of the worker count.  The
ball walker carries matrix products level by level, so each word costs one
matrix multiply, and per-level statistics run batched.

Truncation convention: ``t_max`` is the configured percentile (default
60th) of the statistic over the sphere of length exactly L.  Entries above
``t_max`` stay in the series and the raw maximum is recorded, but fits and
ratio curves only trust the part below ``t_max``, where the L-ball is
believed to exhaust the group.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .cocycles import functional_interior_check, limit_cone_sample
from .linalg import exterior_power
from .errors import (
    DimensionMismatch,
    EmptyMeasure,
    InsufficientData,
    InteriorUncertified,
    NotCertified,
)

SERIES_KINDS = (
    "norm",
    "spectral_primitive",
    "phi_cartan",
    "phi_jordan_primitive",
    "distance",
)

DEFAULT_PERCENTILE = 0.6
DEFAULT_WINDOW_FRACTION = 0.4
_FIT_POINTS = 64
_RATIO_POINTS = 32
_MIN_FIT_ENTRIES = 50
_DEDUP_DECIMALS = 8  # matrices equal within 1e-8 entrywise are identified
_INTERIOR_SAMPLE_L = 6


@dataclass
class CountSeries:
    """Sorted statistic values of enumerated elements (or classes)."""

    values: np.ndarray
    kind: str
    L: int
    t_max: float
    raw_max: float
    percentile: float
    approximate: bool = False

    def count(self, t) -> np.ndarray:
        """N(t): number of entries <= t."""
        return np.searchsorted(self.values, t, side="right")


@dataclass
class GrowthFit:
    h_hat: float
    intercept: float
    window: Tuple[float, float]
    residual: float
    entries_below: int


@dataclass
class PairMeasure:
    """Depth-k cylinder pair counts over (gamma^-1 prefix, gamma prefix)."""

    depth: int
    threshold: float
    cells: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], int]
    total: int


# --- ball walker ------------------------------------------------------------

def _walk_subtree(carriers, L, first_letter, k_ends=0):
    """Yield (length, stacks, firsts, lasts) for words starting with a letter.

    ``carriers`` is a list of per-letter matrix arrays (n_letters, C, C);
    the walker propagates the word products of each carrier in lockstep, one
    batched multiply per carrier and level.  Statistics that need more than
    the top singular value or modulus read the extra carriers (exterior
    powers), which keep those quantities at their own norm scale.

    ``firsts`` holds the first min(k, length) letters (right-padded -1) and
    ``lasts`` the most recent min(k, length) letters (left-padded -1); both
    are None when ``k_ends`` is 0.
    """
    n = carriers[0].shape[0]
    stacks = [c[first_letter][None, :, :].copy() for c in carriers]
    last = np.array([first_letter], dtype=np.int8)
    firsts = lasts = None
    if k_ends:
        firsts = np.full((1, k_ends), -1, dtype=np.int8)
        lasts = np.full((1, k_ends), -1, dtype=np.int8)
        firsts[0, 0] = first_letter
        lasts[0, -1] = first_letter
    length = 1
    yield length, stacks, firsts, lasts
    while length < L:
        parts = [[] for _ in carriers]
        lparts, fparts, tparts = [], [], []
        for l in range(n):
            mask = last != (l ^ 1)
            cnt = int(mask.sum())
            if cnt == 0:
                continue
            for i, c in enumerate(carriers):
                parts[i].append(stacks[i][mask] @ c[l])
            lparts.append(np.full(cnt, l, dtype=np.int8))
            if k_ends:
                f = firsts[mask]
                if length < k_ends:
                    f = f.copy()
                    f[:, length] = l
                fparts.append(f)
                t = np.concatenate(
                    [lasts[mask][:, 1:], np.full((cnt, 1), l, dtype=np.int8)], axis=1
                )
                tparts.append(t)
        stacks = [np.concatenate(p) for p in parts]
        last = np.concatenate(lparts)
        if k_ends:
            firsts = np.concatenate(fparts)
            lasts = np.concatenate(tparts)
        length += 1
        yield length, stacks, firsts, lasts


def _pool_map(fn, args, workers):
    if workers <= 1 or len(args) <= 1:
        return [fn(a) for a in args]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, args))


# --- per-level statistics ---------------------------------------------------

def _batch_lognorm(mats, norm_kind):
    if norm_kind == "euclidean":
        return np.log(np.linalg.svd(mats, compute_uv=False)[:, 0])
    if norm_kind == "l1":
        return np.log(np.abs(mats).sum(axis=1).max(axis=1))
    if norm_kind == "linf":
        return np.log(np.abs(mats).sum(axis=2).max(axis=1))
    raise ValueError("unknown norm kind %r" % (norm_kind,))


def _top_logmod(mats):
    if mats.shape[-1] == 2:
        # trace-and-determinant root: survives entry rounding on huge-norm
        # products where a batched eigensolve does not (determinant snapped
        # to the unimodular precondition)
        tr = mats[:, 0, 0] + mats[:, 1, 1]
        det = mats[:, 0, 0] * mats[:, 1, 1] - mats[:, 0, 1] * mats[:, 1, 0]
        floor = 40.0 * np.finfo(float).eps * np.maximum(
            1.0, np.abs(mats).max(axis=(1, 2))) ** 2
        det = np.where(np.abs(det) <= floor, 1.0, det)
        det = np.where(np.abs(np.abs(det) - 1.0) <= floor,
                       np.sign(det), det)
        disc = tr * tr - 4.0 * det
        real = disc > 0.0
        out = np.empty(len(mats))
        out[real] = np.log(0.5 * (np.abs(tr[real]) + np.sqrt(disc[real])))
        out[~real] = 0.5 * np.log(det[~real])
        return out
    return np.log(np.abs(np.linalg.eigvals(mats)).max(axis=1))


def _cartan_stack(stacks):
    # rows of the result are Cartan vectors; column k of S is
    # log(sigma_1 ... sigma_k), taken from the k-th exterior power at its
    # own norm scale, so the small coordinates do not drown in eps*sigma_1
    S = np.column_stack(
        [np.log(np.linalg.svd(p, compute_uv=False)[:, 0]) for p in stacks]
    )
    a = np.empty((len(S), len(stacks) + 1))
    a[:, 0] = S[:, 0]
    a[:, 1:-1] = S[:, 1:] - S[:, :-1]
    a[:, -1] = -S[:, -1]
    return a


def _jordan_stack(stacks):
    T = np.column_stack([_top_logmod(p) for p in stacks])
    lam = np.empty((len(T), len(stacks) + 1))
    lam[:, 0] = T[:, 0]
    lam[:, 1:-1] = T[:, 1:] - T[:, :-1]
    lam[:, -1] = -T[:, -1]
    return lam


def _carrier_letters(rep, full):
    """Per-letter matrices the walker multiplies: [g] or all exterior powers."""
    letters = rep.letter_mats
    if not full or rep.dim == 2:
        return [letters]
    return [letters] + [
        np.stack([exterior_power(m, k) for m in letters])
        for k in range(2, rep.dim)
    ]


def _stat_plan(rep, kind, norm_kind=None, phi=None):
    if kind == "norm":
        return _carrier_letters(rep, False), (
            lambda st: _batch_lognorm(st[0], norm_kind)
        )
    if kind == "spectral_primitive":
        return _carrier_letters(rep, False), lambda st: _top_logmod(st[0])
    if kind == "distance":
        return _carrier_letters(rep, True), (
            lambda st: np.linalg.norm(_cartan_stack(st), axis=1)
        )
    if kind == "phi_cartan":
        return _carrier_letters(rep, True), lambda st: _cartan_stack(st) @ phi
    if kind == "phi_jordan_primitive":
        return _carrier_letters(rep, True), lambda st: _jordan_stack(st) @ phi
    raise ValueError("no statistic of kind %r" % (kind,))


def _identity_stacks(carriers):
    return [np.eye(c.shape[-1])[None] for c in carriers]


def _certified_values(rep, L, carriers, statfn, workers):
    def job(first):
        vals, sphere = [], np.empty(0)
        for length, stacks, _, _ in _walk_subtree(carriers, L, first):
            v = statfn(stacks)
            vals.append(v)
            if length == L:
                sphere = v
        return np.concatenate(vals), sphere

    results = _pool_map(job, range(rep.gen_set.n_letters), workers)
    values = np.concatenate([r[0] for r in results])
    sphere = np.concatenate([r[1] for r in results])
    return values, sphere


def _dedup_values(rep, L, carriers, statfn):
    # best-effort mode for representations without a freeness certificate:
    # identify words whose matrices agree entrywise within 1e-8
    stacks = [_identity_stacks(carriers)]
    lengths = [np.zeros(1, dtype=np.int32)]
    for first in range(rep.gen_set.n_letters):
        for length, st, _, _ in _walk_subtree(carriers, L, first):
            stacks.append(st)
            lengths.append(np.full(len(st[0]), length, dtype=np.int32))
    merged = [
        np.concatenate([st[i] for st in stacks]) for i in range(len(carriers))
    ]
    lengths = np.concatenate(lengths)
    keys = np.round(merged[0].reshape(len(merged[0]), -1) * 10.0 ** _DEDUP_DECIMALS)
    _, first_idx = np.unique(keys, axis=0, return_index=True)
    first_idx.sort()
    merged = [m[first_idx] for m in merged]
    lengths = lengths[first_idx]
    values = statfn(merged)
    # a finite (torsion) image can exhaust itself before length L; the
    # truncation percentile then reads the longest surviving length
    return values[lengths > 0], values[lengths == lengths.max()]


def _assemble_series(rep, L, kind, percentile, workers, norm_kind=None, phi=None):
    carriers, statfn = _stat_plan(rep, kind, norm_kind=norm_kind, phi=phi)
    identity_value = float(statfn(_identity_stacks(carriers))[0])
    if L == 0:
        values = np.array([identity_value])
        return CountSeries(
            values, kind, L, identity_value, identity_value, percentile,
            approximate=not rep.certified,
        )
    if rep.certified:
        values, sphere = _certified_values(rep, L, carriers, statfn, workers)
    else:
        values, sphere = _dedup_values(rep, L, carriers, statfn)
    values = np.sort(np.concatenate([[identity_value], values]))
    if sphere.size == 0:
        raise InsufficientData("sphere of length %d is empty" % L)
    t_max = float(np.percentile(sphere, 100.0 * percentile))
    return CountSeries(
        values, kind, L, t_max, float(values[-1]), percentile,
        approximate=not rep.certified,
    )


def norm_series(rep, L, norm_kind="euclidean",
                percentile=DEFAULT_PERCENTILE, workers=1) -> CountSeries:
    """Log operator norms over the full L-ball, identity included."""
    return _assemble_series(rep, L, "norm", percentile, workers,
                            norm_kind=norm_kind)


def distance_series(rep, L, percentile=DEFAULT_PERCENTILE, workers=1) -> CountSeries:
    """Euclidean norms of Cartan projections (symmetric-space distance proxy)."""
    return _assemble_series(rep, L, "distance", percentile, workers)


# --- primitive classes, vectorized ------------------------------------------

def _cyclically_reduced_words(n_letters, m):
    if m == 1:
        return np.arange(n_letters, dtype=np.int8)[:, None]
    words = np.arange(n_letters, dtype=np.int8)[:, None]
    for _ in range(m - 1):
        blocks = []
        for l in range(n_letters):
            mask = words[:, -1] != (l ^ 1)
            blocks.append(
                np.concatenate(
                    [words[mask], np.full((int(mask.sum()), 1), l, dtype=np.int8)],
                    axis=1,
                )
            )
        words = np.concatenate(blocks)
    return words[words[:, -1] != (words[:, 0] ^ 1)]


def _canonical_primitive_words(n_letters, m):
    """Canonical rotations of the primitive cyclic words of length m."""
    words = _cyclically_reduced_words(n_letters, m)
    if m == 1:
        return words
    b = max(1, int(n_letters - 1).bit_length())
    shifts = (b * (m - 1 - np.arange(m))).astype(np.uint64)
    codes = (words.astype(np.uint64) << shifts).sum(axis=1, dtype=np.uint64)
    mask_all = np.uint64((1 << (b * m)) - 1)
    canon = codes.copy()
    rot = codes.copy()
    nonprim = np.zeros(len(codes), dtype=bool)
    for r in range(1, m):
        rot = ((rot << np.uint64(b)) & mask_all) | (rot >> np.uint64(b * (m - 1)))
        np.minimum(canon, rot, out=canon)
        if m % r == 0:
            nonprim |= rot == codes
    canon = np.unique(canon[~nonprim])
    out = np.empty((len(canon), m), dtype=np.int8)
    letter_mask = np.uint64((1 << b) - 1)
    for i in range(m):
        out[:, i] = ((canon >> np.uint64(b * (m - 1 - i))) & letter_mask).astype(
            np.int8
        )
    return out


def _batch_products(letter_mats, words):
    mats = letter_mats[words[:, 0]]
    for i in range(1, words.shape[1]):
        mats = mats @ letter_mats[words[:, i]]
    return mats


def primitive_class_arrays(rep, L, workers=1):
    """Per length m <= L: (m, canonical words (n, m), matrices (n, d, d))."""

    def job(m):
        words = _canonical_primitive_words(rep.gen_set.n_letters, m)
        return m, words, _batch_products(rep.letter_mats, words)

    return _pool_map(job, range(1, L + 1), workers)


def _primitive_series(rep, L, kind, percentile, workers, phi=None):
    carriers, statfn = _stat_plan(rep, kind, phi=phi)

    def job(m):
        words = _canonical_primitive_words(rep.gen_set.n_letters, m)
        if len(words) == 0:
            return np.empty(0)
        stacks = [_batch_products(c, words) for c in carriers]
        if not rep.certified:
            base = stacks[0]
            keys = np.round(base.reshape(len(base), -1) * 10.0 ** _DEDUP_DECIMALS)
            _, idx = np.unique(keys, axis=0, return_index=True)
            idx.sort()
            stacks = [s[idx] for s in stacks]
        return statfn(stacks)

    if L == 0:
        return CountSeries(
            np.empty(0), kind, 0, 0.0, 0.0, percentile,
            approximate=not rep.certified,
        )
    per_length = _pool_map(job, range(1, L + 1), workers)
    values = np.sort(np.concatenate(per_length))
    # rank-1 groups run out of primitive classes after length 1; the
    # truncation percentile then reads the longest populated length
    sphere = next((p for p in reversed(per_length) if p.size), None)
    if sphere is None:
        raise InsufficientData("no primitive classes of length <= %d" % L)
    t_max = float(np.percentile(sphere, 100.0 * percentile))
    return CountSeries(
        values, kind, L, t_max, float(values[-1]), percentile,
        approximate=not rep.certified,
    )


def primitive_spectral_series(rep, L, percentile=DEFAULT_PERCENTILE,
                              workers=1) -> CountSeries:
    """Top Jordan coordinate over primitive conjugacy classes of length <= L."""
    return _primitive_series(rep, L, "spectral_primitive", percentile, workers)


def phi_series(rep, L, phi, projection="cartan",
               percentile=DEFAULT_PERCENTILE, interior_margin=1e-8,
               workers=1) -> CountSeries:
    """phi-weighted series over the Cartan or primitive Jordan projections.

    The functional must pass the sampled interior-of-dual-cone check on the
    Jordan rays of classes up to length min(L, 6); otherwise the growth
    statistic need not be proper and InteriorUncertified is raised.
    """
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (rep.dim,):
        raise DimensionMismatch(
            "functional has %d coefficients, expected %d" % (phi.size, rep.dim)
        )
    sample = limit_cone_sample(rep, min(L, _INTERIOR_SAMPLE_L))
    if not functional_interior_check(phi, sample, interior_margin):
        raise InteriorUncertified(
            "functional fails the sampled dual-cone interior check"
        )
    if projection == "cartan":
        return _assemble_series(rep, L, "phi_cartan", percentile, workers,
                                phi=phi)
    if projection == "jordan_primitive":
        return _primitive_series(rep, L, "phi_jordan_primitive", percentile,
                                 workers, phi=phi)
    raise ValueError("unknown projection %r" % (projection,))


# --- fits and ratio curves --------------------------------------------------

def fit_exponent(series: CountSeries,
                 window_fraction=DEFAULT_WINDOW_FRACTION) -> GrowthFit:
    """Least-squares exponential fit of N(t) on the trusted window.

    Samples log N(t) at 64 evenly spaced t in
    [t_max * (1 - window_fraction), t_max] and returns the slope as the
    growth estimate.
    """
    if not 0.0 < window_fraction < 1.0:
        raise ValueError("window fraction must lie in (0, 1)")
    below = int(series.count(series.t_max))
    if below < _MIN_FIT_ENTRIES:
        raise InsufficientData(
            "only %d entries below t_max; need %d" % (below, _MIN_FIT_ENTRIES)
        )
    t_lo = series.t_max * (1.0 - window_fraction)
    ts = np.linspace(t_lo, series.t_max, _FIT_POINTS)
    counts = series.count(ts)
    if counts.min() < 1:
        raise InsufficientData("empty counts inside the fit window")
    y = np.log(counts)
    slope, intercept = np.polyfit(ts, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * ts + intercept)) ** 2)))
    return GrowthFit(
        h_hat=float(slope),
        intercept=float(intercept),
        window=(float(t_lo), float(series.t_max)),
        residual=resid,
        entries_below=below,
    )


def prime_orbit_ratio_curve(series: CountSeries, h,
                            window_fraction=DEFAULT_WINDOW_FRACTION):
    """Ratio h * t * exp(-h t) * N(t) on 32 grid points of the fit window.

    Convergence of the ratio to 1 is the prime-orbit normalization of the
    spectral series; the curve is the empirical trace of that limit.
    """
    t_lo = series.t_max * (1.0 - window_fraction)
    ts = np.linspace(t_lo, series.t_max, _RATIO_POINTS)
    counts = series.count(ts)
    ratio = h * ts * np.exp(-h * ts) * counts
    return np.column_stack([ts, ratio])


# --- pair measure -----------------------------------------------------------

def pair_empirical_measure(rep, L, t, depth=1, workers=1) -> PairMeasure:
    """Empirical pair measure over depth-k cylinders at threshold t.

    For every nontrivial word gamma in the L-ball with euclidean log-norm
    <= t, the cell (first k letters of gamma^-1, first k letters of gamma)
    is incremented.  Classification is symbolic, so the measure is exact
    for certified representations and unavailable otherwise.
    """
    if not rep.certified:
        raise NotCertified("pair measure needs the symbolic coding")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    n = rep.gen_set.n_letters
    base = np.int64(n + 1)
    big = base ** depth

    def job(first):
        counts: Dict[int, int] = {}
        walk = _walk_subtree([rep.letter_mats], L, first, depth)
        for length, (mats,), firsts, lasts in walk:
            v = _batch_lognorm(mats, "euclidean")
            sel = v <= t
            if not sel.any():
                continue
            k = min(depth, length)
            # B cell: word prefix; A cell: prefix of the inverse word,
            # i.e. the last letters reversed and inverted
            fw = firsts[sel][:, :k].astype(np.int64)
            lw = (lasts[sel][:, depth - k:] ^ 1).astype(np.int64)[:, ::-1]
            code_b = np.zeros(len(fw), dtype=np.int64)
            code_a = np.zeros(len(fw), dtype=np.int64)
            for j in range(k):
                code_b = code_b * base + fw[:, j] + 1
                code_a = code_a * base + lw[:, j] + 1
            combined = code_a * big + code_b
            uniq, cnt = np.unique(combined, return_counts=True)
            for u, c in zip(uniq.tolist(), cnt.tolist()):
                counts[u] = counts.get(u, 0) + c
        return counts

    merged: Dict[int, int] = {}
    for counts in _pool_map(job, range(n), workers):
        for u, c in counts.items():
            merged[u] = merged.get(u, 0) + c

    def decode(code):
        letters = []
        while code:
            letters.append(int(code % base) - 1)
            code //= base
        return tuple(reversed(letters))

    cells = {}
    for code, c in merged.items():
        cells[(decode(code // big), decode(code % big))] = c
    return PairMeasure(
        depth=depth, threshold=float(t), cells=cells, total=sum(cells.values())
    )


def factorization_deficit(measure: PairMeasure) -> float:
    """Max cell deviation of the pair measure from its product of marginals."""
    if measure.total == 0:
        raise EmptyMeasure("pair measure has no mass")
    total = float(measure.total)
    row: Dict[Tuple[int, ...], float] = {}
    col: Dict[Tuple[int, ...], float] = {}
    for (a, b), c in measure.cells.items():
        row[a] = row.get(a, 0.0) + c / total
        col[b] = col.get(b, 0.0) + c / total
    worst = 0.0
    for a, pa in row.items():
        for b, pb in col.items():
            pab = measure.cells.get((a, b), 0) / total
            worst = max(worst, abs(pab - pa * pb))
    return worst


# --- report serialization ---------------------------------------------------

def _fmt(x) -> str:
    return format(float(x), ".12g")


def write_series_csv(series: CountSeries, path):
    """CSV report ``t,count,log_count`` at each distinct threshold."""
    uniq = np.unique(series.values)
    counts = series.count(uniq)
    with open(path, "w") as fh:
        fh.write("t,count,log_count\n")
        for t, c in zip(uniq, counts):
            fh.write("%s,%d,%s\n" % (_fmt(t), int(c), _fmt(np.log(c))))


def write_pairs_csv(measure: PairMeasure, gen_set, path):
    """CSV report ``cell_a,cell_b,count`` sorted by cell labels."""
    rows = sorted(measure.cells.items())
    with open(path, "w") as fh:
        fh.write("cell_a,cell_b,count\n")
        for (a, b), c in rows:
            fh.write("%s,%s,%d\n" % (gen_set.format(a), gen_set.format(b), c))


def fit_payload(fit: GrowthFit, series: CountSeries) -> dict:
    """JSON-ready summary of a growth fit, rounded for byte determinism."""
    num = lambda x: float(_fmt(x))
    return {
        "h_hat": num(fit.h_hat),
        "intercept": num(fit.intercept),
        "window": [num(fit.window[0]), num(fit.window[1])],
        "residual": num(fit.residual),
        "truncation": {
            "L": series.L,
            "t_max": num(series.t_max),
            "percentile": num(series.percentile),
        },
        "kind": series.kind,
        "approximate": series.approximate,
        "entries_below": fit.entries_below,
    }
