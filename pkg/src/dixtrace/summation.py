"""Partial sums of symbol traces over dual enumerations.

The central object is a PartialSumSeries: cutoffs N_k on a geometric grid,
the partial sums S(N_k) = sum of |trace| contributions over dual points of
weight <= N_k, and the eigenvalue counts at the same cutoffs.

Two evaluation strategies produce series:

  * a radial bulk path for scalar symbols, streaming (eigenvalue, total
    multiplicity) shell chunks from the geometry and evaluating the scalar
    vectorized;
  * a per-point object path for matrix symbols (tables, masks), which also
    carries the optional thread fan-out.

Both share one accumulation contract so results are reproducible bit for
bit: per-shell totals (exact fsum over the points of one eigenvalue) are
combined in ascending eigenvalue order inside fixed-size chunks by plain
cumulative summation, and chunk totals are folded together with a
Neumaier-compensated carry.  Chunk boundaries depend only on the geometry,
never on the grid or the thread count, so extending the grid or running the
per-point path in parallel reproduces every earlier snapshot exactly.

Cutoffs act through the eigenvalue threshold lambda <= N^nu - 1 (ties
included).  Counts are kept in float64; they are exact integers up to 2**53,
beyond which (huge SU(2)/SU(3) grids) they round in the last few ulp while
counting_function itself stays exact.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from itertools import groupby, islice
from typing import Iterable, Iterator

import numpy as np

from .errors import ConfigError, ContractError, FitError, SpectrumFormatError
from .geometry import Geometry, enumerate_dual, label_text, radial_shells, \
    supports_radial_shells
from .symbol import RadialWeight, SymbolSpec, eval_symbol, is_radial_scalar, \
    nuclear_trace_abs, scalar_values

PICTURES = ("manifold", "group", "homogeneous", "boundary-index")

_SHELLS_PER_BLOCK = 256  # object-path chunk size, fixed for reproducibility

SCHEMA_VERSION = 1


def dyadic_grid(n_max: float, points_per_octave: int = 4) -> np.ndarray:
    """Geometric cutoff grid from 2 to n_max, last point exactly n_max."""
    if not n_max >= 4:
        raise ConfigError("grid n_max must be >= 4, got %r" % (n_max,))
    if points_per_octave < 1:
        raise ConfigError("points_per_octave must be >= 1")
    n_max = float(n_max)
    vals = []
    k = 0
    while True:
        v = 2.0 ** (1.0 + k / points_per_octave)
        if v >= n_max:
            break
        vals.append(v)
        k += 1
    vals.append(n_max)
    return np.array(vals)


@dataclass
class PartialSumSeries:
    """Cutoff grid with partial sums and eigenvalue counts.

    dim is the manifold dimension kappa used in log-normalizations; picture
    records which summation formula produced the sums.
    """

    cutoffs: np.ndarray
    sums: np.ndarray
    counts: np.ndarray
    dim: int
    picture: str

    def __post_init__(self):
        if self.picture not in PICTURES:
            raise ConfigError("unknown picture %r" % (self.picture,))
        if not (len(self.cutoffs) == len(self.sums) == len(self.counts)):
            raise ConfigError("series arrays must have equal length")

    def __len__(self) -> int:
        return len(self.cutoffs)

    def normalized(self) -> np.ndarray:
        """f_k = S(N_k) / (kappa * log N_k), the quantity extrapolated."""
        return self.sums / (self.dim * np.log(self.cutoffs))

    def to_csv(self, path: str, extra_f: bool = False) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["cutoff", "count", "sum", "f"] if extra_f
                       else ["cutoff", "count", "sum"])
            f = self.normalized() if extra_f else None
            for i in range(len(self)):
                row = [format(self.cutoffs[i], ".17g"),
                       _format_count(self.counts[i]),
                       format(self.sums[i], ".17g")]
                if extra_f:
                    row.append(format(f[i], ".17g"))
                w.writerow(row)

    @staticmethod
    def from_csv(path: str, dim: int = 1, picture: str = "manifold") -> "PartialSumSeries":
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SpectrumFormatError("%s: empty series file" % path) from None
            if [h.strip() for h in header[:3]] != ["cutoff", "count", "sum"]:
                raise SpectrumFormatError("%s: expected header cutoff,count,sum" % path)
            cutoffs, counts, sums = [], [], []
            for row in reader:
                if not row:
                    continue
                cutoffs.append(float(row[0]))
                counts.append(float(row[1]))
                sums.append(float(row[2]))
        return PartialSumSeries(np.array(cutoffs), np.array(sums),
                                np.array(counts), dim=dim, picture=picture)

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "picture": self.picture,
            "dim": self.dim,
            "cutoffs": [float(x) for x in self.cutoffs],
            "counts": [float(x) for x in self.counts],
            "sums": [float(x) for x in self.sums],
        }

    def to_json(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=1)
            fh.write("\n")

    @staticmethod
    def from_json(path: str) -> "PartialSumSeries":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        return PartialSumSeries(np.array(doc["cutoffs"], dtype=np.float64),
                                np.array(doc["sums"], dtype=np.float64),
                                np.array(doc["counts"], dtype=np.float64),
                                dim=int(doc["dim"]), picture=doc["picture"])


def _format_count(c: float) -> str:
    if c == math.floor(c) and abs(c) < 2.0 ** 53:
        return str(int(c))
    return format(c, ".17g")


class _Carry:
    """Neumaier (Kahan-Babuska) compensated accumulator for chunk totals."""

    __slots__ = ("total", "comp")

    def __init__(self):
        self.total = 0.0
        self.comp = 0.0

    def add(self, x: float) -> None:
        t = self.total + x
        if abs(self.total) >= abs(x):
            self.comp += (self.total - t) + x
        else:
            self.comp += (x - t) + self.total
        self.total = t

    def value(self) -> float:
        return self.total + self.comp


def _stream_snapshots(chunks: Iterable[tuple], thresholds: np.ndarray):
    """Fold (lam, contrib, dsum) chunks into snapshot sums/counts.

    Every snapshot is computed as carry-before-chunk + in-chunk prefix, so
    values never depend on how far the stream continues afterwards.
    """
    k_total = len(thresholds)
    sums = np.zeros(k_total)
    counts = np.zeros(k_total)
    carry_s = _Carry()
    carry_c = _Carry()
    ptr = 0
    last = None  # (lam, cs, cc, carry_s_before, carry_c_before)
    for lam, contrib, dsum in chunks:
        if lam.size == 0:
            continue
        cs = np.cumsum(contrib)
        cc = np.cumsum(dsum)
        while ptr < k_total and thresholds[ptr] <= lam[-1]:
            idx = int(np.searchsorted(lam, thresholds[ptr], side="right")) - 1
            if idx >= 0:
                sums[ptr] = carry_s.value() + cs[idx]
                counts[ptr] = carry_c.value() + cc[idx]
            else:
                sums[ptr] = carry_s.value()
                counts[ptr] = carry_c.value()
            ptr += 1
        last = (carry_s.value(), carry_c.value(), float(cs[-1]), float(cc[-1]))
        carry_s.add(float(cs[-1]))
        carry_c.add(float(cc[-1]))
    while ptr < k_total:
        if last is None:
            sums[ptr] = 0.0
            counts[ptr] = 0.0
        else:
            sums[ptr] = last[0] + last[2]
            counts[ptr] = last[1] + last[3]
        ptr += 1
    return sums, counts


def default_picture(geom: Geometry) -> str:
    if geom.kind in ("su2", "so3", "su3"):
        return "group"
    if geom.kind == "sphere":
        return "homogeneous"
    return "manifold"


def partial_sums(geom: Geometry, spec: SymbolSpec, grid: np.ndarray,
                 picture: str | None = None, workers: int | None = None) -> PartialSumSeries:
    """Partial sums of nuclear traces of the symbol over the dual.

    grid is an increasing array of weight cutoffs (see dyadic_grid).  The
    three closed-geometry pictures share one contribution rule (the block
    lift makes them agree numerically); the picture tag records which
    normalization downstream estimators should apply.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or len(grid) == 0 or np.any(np.diff(grid) <= 0):
        raise ConfigError("grid must be a nonempty increasing 1-d array")
    if grid[0] < 2.0:
        raise ConfigError("grid cutoffs must start at 2 or above")
    if picture is None:
        picture = default_picture(geom)
    if picture == "boundary-index":
        raise ContractError("boundary-index series come from the boundary module")
    if picture not in PICTURES:
        raise ConfigError("unknown picture %r" % (picture,))
    thresholds = np.array([geom.lambda_threshold(float(n)) for n in grid])
    if is_radial_scalar(spec) and supports_radial_shells(geom):
        chunks = _radial_chunks(geom, spec, float(grid[-1]))
        sums, counts = _stream_snapshots(chunks, thresholds)
    else:
        blocks = _point_blocks(geom, spec, float(grid[-1]), picture)
        chunks = _evaluated_blocks(blocks, workers)
        sums, counts = _stream_snapshots(chunks, thresholds)
    return PartialSumSeries(grid.copy(), sums, counts, dim=geom.dim, picture=picture)


def _radial_chunks(geom: Geometry, spec: SymbolSpec, n_max: float) -> Iterator[tuple]:
    for lam, dsum in radial_shells(geom, n_max):
        f = scalar_values(spec, lam, geom)
        if not np.all(np.isfinite(f)):
            raise ConfigError("symbol produced non-finite values on %s" % geom.describe())
        yield lam, dsum * np.abs(f), dsum


def _point_blocks(geom: Geometry, spec: SymbolSpec, n_max: float, picture: str):
    """Group dual points into shells, shells into fixed-size blocks."""
    mask = picture == "homogeneous" or geom.kind == "sphere"
    mult_one = geom.kind in ("torus", "file")
    shells = groupby(enumerate_dual(geom, n_max), key=lambda p: p.eigenvalue)

    def shell_list():
        for lam, pts in shells:
            yield lam, list(pts)

    gen = shell_list()
    while True:
        block = list(islice(gen, _SHELLS_PER_BLOCK))
        if not block:
            return
        yield geom, spec, mask, mult_one, block


def _eval_block(args) -> tuple:
    geom, spec, mask, mult_one, block = args
    lam = np.empty(len(block))
    contrib = np.empty(len(block))
    dsum = np.empty(len(block))
    for i, (ev, pts) in enumerate(block):
        lam[i] = ev
        terms = []
        total_d = 0.0
        for p in pts:
            t = nuclear_trace_abs(eval_symbol(spec, p, geom, masked=mask),
                                  label=label_text(p))
            terms.append(t if mult_one else p.rep_dim * t)
            total_d += p.eigenspace_dim
        contrib[i] = math.fsum(terms)
        dsum[i] = total_d
    return lam, contrib, dsum


def _evaluated_blocks(blocks, workers: int | None) -> Iterator[tuple]:
    if workers is None or workers <= 1:
        for b in blocks:
            yield _eval_block(b)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # executor.map preserves order, so the reduction below is the
            # same fold as the serial loop
            yield from pool.map(_eval_block, blocks)


def counting_series(geom: Geometry, grid: np.ndarray) -> PartialSumSeries:
    """Series whose counts (and sums) are the eigenvalue counting function."""
    return partial_sums(geom, RadialWeight(0.0), grid)


def scale_series(series: PartialSumSeries, c: float) -> PartialSumSeries:
    """Multiply all partial sums by c >= 0 (counts untouched)."""
    if c < 0:
        raise ConfigError("scale factor must be >= 0, got %r" % (c,))
    return replace(series, cutoffs=series.cutoffs.copy(), sums=c * series.sums,
                   counts=series.counts.copy())


@dataclass
class WeylFit:
    """Log-log fit of the counting function: count ~ c0 * N^kappa."""

    kappa_hat: float
    c0_hat: float
    residual: float
    points_used: int


def weyl_fit(series: PartialSumSeries) -> WeylFit:
    """Fit log(count) = log(c0) + kappa*log(N) on the upper half of the grid."""
    if len(series) < 4:
        raise FitError("weyl_fit needs at least 4 grid points, got %d" % len(series))
    half = len(series) // 2
    n = series.cutoffs[half:]
    c = series.counts[half:]
    if np.any(c < 1):
        raise FitError("weyl_fit needs counts >= 1 on the fit window")
    if np.all(c == c[0]):
        raise FitError("weyl_fit: counting function is constant on the fit window")
    x = np.log(n)
    y = np.log(c)
    a = np.vstack([np.ones_like(x), x]).T
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - a @ coef
    rms = float(np.sqrt(np.mean(resid ** 2)))
    return WeylFit(kappa_hat=float(coef[1]), c0_hat=float(math.exp(coef[0])),
                   residual=rms, points_used=len(n))
