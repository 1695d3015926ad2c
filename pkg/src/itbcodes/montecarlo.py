"""Code-capacity depolarizing Monte Carlo and the curve formulas built on it.

Each trial draws one uniform u per qubit: X if u < p/3, Z if p/3 <= u < 2p/3,
Y if 2p/3 <= u < p. The X component (X or Y) is decoded against H_Z and the Z
component against H_X, each with prior 2p/3. A trial fails when either
residual pairs nontrivially with a logical of the opposite type.

Trial ``i`` of grid point ``j`` always consumes the same counter-based stream
(seed, j, i), so results do not depend on batching or thread count.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm

from . import kernels
from ._backend import default_threads
from .code import CssCode, signature_words
from .decoder import DecoderConfig

Z95 = 1.959964


class MonteCarloError(ValueError):
    pass


def wilson_interval(failures: int, shots: int, confidence: float = 0.95) -> tuple[float, float]:
    if shots < 1 or not 0 <= failures <= shots:
        raise MonteCarloError(f"need 0 <= failures <= shots and shots >= 1, got {failures}/{shots}")
    z = Z95 if confidence == 0.95 else float(norm.ppf(0.5 + confidence / 2))
    f = failures / shots
    z2 = z * z
    denom = 1 + z2 / shots
    centre = (f + z2 / (2 * shots)) / denom
    half = z * math.sqrt(f * (1 - f) / shots + z2 / (4 * shots * shots)) / denom
    # clamp rounding at the boundaries so low <= f <= high always holds
    return max(0.0, min(centre - half, f)), min(1.0, max(centre + half, f))


@dataclass
class NoisePoint:
    p: float
    shots: int
    failures: int
    failures_x: int
    failures_z: int
    wilson_low: float
    wilson_high: float
    seed: int
    point_index: int = 0
    code: str = ""
    decoder: str = ""

    @property
    def rate(self) -> float:
        return self.failures / self.shots

    @classmethod
    def from_counts(cls, p: float, shots: int, failures: int, failures_x: int, failures_z: int, seed: int, **kw) -> "NoisePoint":
        lo, hi = wilson_interval(failures, shots)
        return cls(p, shots, failures, failures_x, failures_z, lo, hi, seed, **kw)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["rate"] = self.rate
        return d


class _Sim:
    """Dense matrices, edge lists and logical signatures of one code."""

    def __init__(self, code: CssCode):
        self.code = code
        self.hx = np.ascontiguousarray(code.hx_dense)
        self.hz = np.ascontiguousarray(code.hz_dense)
        self.hx_edges = kernels.build_edges(self.hx)
        self.hz_edges = kernels.build_edges(self.hz)
        # X-type residuals are judged by the Z logicals and vice versa
        self.sig_xerr = signature_words(code.logicals_z, code.n)
        self.sig_zerr = signature_words(code.logicals_x, code.n)

    def run(self, p: float, cfg: DecoderConfig, seed: int, stream: int, start: int, count: int) -> np.ndarray:
        n = self.code.n
        prior = np.full(n, math.log((1 - 2 * p / 3) / (2 * p / 3)))
        return kernels.simulate_shots(
            self.hx, self.hz, self.hx_edges, self.hz_edges, self.sig_xerr, self.sig_zerr,
            p / 3, 2 * p / 3, p, prior, prior.copy(), np.uint64(seed % (1 << 64)), stream, start, count,
            cfg.max_iter, cfg.ms_scaling, cfg.osd_order, cfg.method_code, cfg.osd_always,
        )


_SIMS: dict[int, _Sim] = {}


def _sim_for(code: CssCode) -> _Sim:
    sim = _SIMS.get(id(code))
    if sim is None or sim.code is not code:
        sim = _SIMS[id(code)] = _Sim(code)
    return sim


def simulate_flags(code: CssCode, p: float, cfg: DecoderConfig, seed: int, point_index: int, start: int, count: int) -> np.ndarray:
    """Per-trial failure flags (bit 0: X sector, bit 1: Z sector)."""
    return _sim_for(code).run(p, cfg, seed, point_index, start, count)


def run_code_capacity(
    code: CssCode,
    p: float,
    shots: int,
    cfg: DecoderConfig | None = None,
    seed: int = 0,
    *,
    point_index: int = 0,
    target_width: float | None = None,
    min_shots: int = 1000,
    batch: int = 2000,
    threads: int | None = None,
) -> NoisePoint:
    """Simulate up to ``shots`` trials at physical rate ``p``.

    With ``target_width`` set, stops after the first whole batch (at least
    ``min_shots`` trials) whose Wilson interval width divided by the failure
    fraction drops below ``target_width``. ``cfg.channel_prior`` is not used:
    each sector's prior is 2p/3.
    """
    if not 0 < p < 0.75:
        raise MonteCarloError(f"p must lie in (0, 0.75), got {p}")
    if shots < 1:
        raise MonteCarloError("shots must be >= 1")
    cfg = cfg or DecoderConfig()
    sim = _sim_for(code)
    threads = threads or default_threads()
    done = 0
    fx = fz = fany = 0
    while done < shots:
        count = min(batch, shots - done)
        if threads > 1 and count >= 2 * threads:
            edges = np.linspace(done, done + count, threads + 1).astype(int)
            with ThreadPoolExecutor(threads) as ex:
                parts = list(ex.map(lambda i: sim.run(p, cfg, seed, point_index, edges[i], edges[i + 1] - edges[i]), range(threads)))
            flags = np.concatenate(parts)
        else:
            flags = sim.run(p, cfg, seed, point_index, done, count)
        done += count
        fx += int(np.count_nonzero(flags & 1))
        fz += int(np.count_nonzero(flags & 2))
        fany += int(np.count_nonzero(flags))
        if target_width is not None and done >= min_shots and fany > 0:
            lo, hi = wilson_interval(fany, done)
            if (hi - lo) / (fany / done) < target_width:
                break
    return NoisePoint.from_counts(p, done, fany, fx, fz, seed, point_index=point_index, code=code.label, decoder=cfg.digest())


def run_grid(
    code: CssCode,
    ps: Sequence[float],
    shots: int,
    cfg: DecoderConfig | None = None,
    seed: int = 0,
    **kw,
) -> list[NoisePoint]:
    return [run_code_capacity(code, p, shots, cfg, seed, point_index=i, **kw) for i, p in enumerate(ps)]


def parse_p_grid(text: str) -> list[float]:
    """``"0.01:0.12:log12"`` (log-spaced), ``"0.01:0.12:8"`` (linear) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise MonteCarloError(f"bad grid {text!r}")
        lo, hi, spec = float(parts[0]), float(parts[1]), parts[2]
        if spec.startswith("log"):
            return [float(x) for x in np.geomspace(lo, hi, int(spec[3:]))]
        return [float(x) for x in np.linspace(lo, hi, int(spec))]
    return [float(x) for x in text.split(",") if x.strip()]


@dataclass
class Pseudothreshold:
    p0: float
    low: float
    high: float

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


def _loglog_crossing(ps: np.ndarray, ys: np.ndarray) -> float | None:
    """First p where log y - log p goes from negative to nonnegative."""
    ok = ys > 0
    ps, ys = ps[ok], ys[ok]
    g = np.log(ys) - np.log(ps)
    for i in range(len(ps) - 1):
        if g[i] < 0 <= g[i + 1]:
            x0, x1 = math.log(ps[i]), math.log(ps[i + 1])
            t = -g[i] / (g[i + 1] - g[i])
            return math.exp(x0 + t * (x1 - x0))
    return None


def pseudothreshold_code_capacity(points: Iterable[NoisePoint]) -> Pseudothreshold:
    pts = sorted(points, key=lambda q: q.p)
    ps = np.array([q.p for q in pts])
    p0 = _loglog_crossing(ps, np.array([q.rate for q in pts]))
    if p0 is None:
        raise MonteCarloError("no crossing of p_L = p in the supplied points")
    # a higher failure curve crosses earlier
    lo = _loglog_crossing(ps, np.array([q.wilson_high for q in pts]))
    hi = _loglog_crossing(ps, np.array([q.wilson_low for q in pts]))
    return Pseudothreshold(p0, lo if lo is not None else float(ps[0]), hi if hi is not None else float(ps[-1]))


def per_round_rate(p_any: float, n_c: int) -> float:
    if not 0.0 <= p_any <= 1.0:
        raise MonteCarloError("P_any must lie in [0, 1]")
    if n_c < 1:
        raise MonteCarloError("N_c must be >= 1")
    if p_any == 1.0:
        return 1.0
    return -math.expm1(math.log1p(-p_any) / n_c)


@dataclass
class FitResult:
    c0: float
    c1: float
    c2: float
    d_used: int
    fit_range: list[float] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)

    def evaluate(self, p: float | np.ndarray) -> float | np.ndarray:
        p = np.asarray(p, dtype=np.float64)
        out = p ** (self.d_used / 2) * np.exp(self.c0 + self.c1 * p + self.c2 * p * p)
        return float(out) if out.ndim == 0 else out

    @property
    def max_residual(self) -> float:
        return max((abs(r) for r in self.residuals), default=0.0)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def fit_scaling(points: Iterable[tuple[float, float]], d: int, p_min: float = 2e-3) -> FitResult:
    """Least squares for log p_L - (d/2) log p = c0 + c1 p + c2 p^2."""
    pts = sorted((float(p), float(q)) for p, q in points if p >= p_min and q > 0)
    if len(pts) < 3:
        raise MonteCarloError(f"need >= 3 points with p >= {p_min} and p_L > 0, got {len(pts)}")
    p = np.array([a for a, _ in pts])
    y = np.log([b for _, b in pts]) - (d / 2) * np.log(p)
    s = p.max()
    design = np.stack([np.ones_like(p), p / s, (p / s) ** 2], axis=1)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    c0, c1, c2 = coef[0], coef[1] / s, coef[2] / (s * s)
    resid = y - (c0 + c1 * p + c2 * p * p)
    return FitResult(float(c0), float(c1), float(c2), d, [float(x) for x in p], [float(r) for r in resid])


def pseudothreshold_break_even(fit: FitResult, k: int, lo: float = 1e-5, hi: float = 1e-1, grid: int = 4000) -> float:
    """Smallest root of p_L(p) = k p in (lo, hi).

    The quadratic in the exponent can bend the curve back below k p at large
    p, so the bracket is located by scanning a log grid for the first upward
    sign change before refining.
    """
    if k < 1:
        raise MonteCarloError("k must be >= 1")

    def g(p: float) -> float:
        return (fit.d_used / 2) * math.log(p) + fit.c0 + fit.c1 * p + fit.c2 * p * p - math.log(k * p)

    xs = np.geomspace(lo, hi, grid)
    vals = np.array([g(x) for x in xs])
    for i in range(grid - 1):
        if vals[i] == 0.0:
            return float(xs[i])
        if vals[i] < 0 < vals[i + 1]:
            return float(brentq(g, xs[i], xs[i + 1], xtol=1e-15, rtol=1e-12))
    raise MonteCarloError("no root of p_L(p) = k p in the bracket")


POINT_FIELDS = [f.name for f in fields(NoisePoint)] + ["rate"]


def write_points_csv(points: Iterable[NoisePoint], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=POINT_FIELDS)
        w.writeheader()
        for pt in points:
            w.writerow(pt.to_dict())


def read_curve(path: str | Path) -> list[tuple[float, float]]:
    """(p, p_L) pairs from a CSV with either a ``p_L`` column or failure counts."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            p = float(row["p"])
            if row.get("p_L") not in (None, ""):
                q = float(row["p_L"])
            elif row.get("rate") not in (None, ""):
                q = float(row["rate"])
            else:
                q = int(row["failures"]) / int(row["shots"])
            out.append((p, q))
    return out


__all__ = [
    "FitResult",
    "MonteCarloError",
    "NoisePoint",
    "Pseudothreshold",
    "fit_scaling",
    "parse_p_grid",
    "per_round_rate",
    "pseudothreshold_break_even",
    "pseudothreshold_code_capacity",
    "read_curve",
    "run_code_capacity",
    "run_grid",
    "simulate_flags",
    "wilson_interval",
    "write_points_csv",
]
