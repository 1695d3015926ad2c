"""Normalized min-sum belief propagation with ordered-statistics post-processing.

LLR convention: positive means the bit is more likely 0. The channel LLR of a
bit with error probability p is log((1 - p) / p).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from typing import Any

import numpy as np

from . import kernels
from .linalg import BitMatrix, BitVector

OSD_METHODS = {"zero": 0, "osd0": 0, "osd-0": 0, "combination-sweep": 1, "cs": 1, "osd-cs": 1}


class DecoderError(ValueError):
    pass


@dataclass(frozen=True)
class DecoderConfig:
    max_iter: int = 50
    ms_scaling: float = 0.625
    osd_order: int = 10
    osd_method: str = "combination-sweep"
    channel_prior: float = 0.01
    osd_always: bool = False

    def __post_init__(self):
        if self.max_iter < 1:
            raise DecoderError("max_iter must be >= 1")
        if not 0.0 < self.ms_scaling <= 1.0:
            raise DecoderError("ms_scaling must lie in (0, 1]")
        if self.osd_order < 0:
            raise DecoderError("osd_order must be >= 0")
        if self.osd_method not in OSD_METHODS:
            raise DecoderError(f"unknown osd_method {self.osd_method!r}")
        if not 0.0 < self.channel_prior < 0.5:
            raise DecoderError("channel_prior must lie in (0, 0.5)")

    @property
    def method_code(self) -> int:
        return OSD_METHODS[self.osd_method]

    def with_prior(self, p: float) -> "DecoderConfig":
        return DecoderConfig(self.max_iter, self.ms_scaling, self.osd_order, self.osd_method, p, self.osd_always)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def digest(self) -> str:
        """Short hash of the decoder settings (the prior excluded)."""
        d = self.to_dict()
        d.pop("channel_prior")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class DecodeResult:
    correction: BitVector
    converged: bool
    osd_used: bool
    soft_output: np.ndarray
    iterations: int = 0


def channel_llr(p: float | np.ndarray, n: int | None = None) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    llr = np.log((1.0 - p) / p)
    if n is not None and llr.ndim == 0:
        llr = np.full(n, float(llr))
    return llr


def _as_dense(syndrome, m: int) -> np.ndarray:
    s = syndrome.to_dense() if isinstance(syndrome, BitVector) else np.asarray(syndrome, dtype=np.uint8)
    if s.shape != (m,):
        raise DecoderError(f"syndrome has length {s.shape[0] if s.ndim else 0}, expected {m}")
    return np.ascontiguousarray(s & 1, dtype=np.uint8)


def _dense(h) -> np.ndarray:
    return np.ascontiguousarray(h.to_dense() if isinstance(h, BitMatrix) else np.asarray(h, dtype=np.uint8))


def bp_min_sum(h: BitMatrix | np.ndarray, syndrome, cfg: DecoderConfig, prior: np.ndarray | None = None):
    """Returns ``(soft, hard, converged, iterations)``."""
    hd = _dense(h)
    s = _as_dense(syndrome, hd.shape[0])
    if prior is None:
        prior = channel_llr(cfg.channel_prior, hd.shape[1])
    edges = kernels.build_edges(hd)
    return kernels.bp_min_sum(*edges, s, np.ascontiguousarray(prior, dtype=np.float64), cfg.max_iter, cfg.ms_scaling)


def osd_postprocess(
    h: BitMatrix | np.ndarray,
    syndrome,
    soft: np.ndarray,
    cfg: DecoderConfig,
    cost: np.ndarray | None = None,
) -> np.ndarray:
    """Lowest-cost correction found by OSD; ``cost`` defaults to the channel LLRs."""
    hd = _dense(h)
    s = _as_dense(syndrome, hd.shape[0])
    if cost is None:
        cost = channel_llr(cfg.channel_prior, hd.shape[1])
    corr, consistent = kernels.osd(
        hd, s, np.ascontiguousarray(soft, dtype=np.float64), np.ascontiguousarray(cost, dtype=np.float64),
        cfg.osd_order, cfg.method_code,
    )
    if not consistent:
        raise DecoderError("syndrome is not in the column space of h")
    return corr


class BpOsdDecoder:
    """BP followed by OSD when BP fails to reproduce the syndrome.

    Matrices and edge lists are prepared once; ``decode`` can be called
    repeatedly and holds no state between calls.
    """

    def __init__(self, h: BitMatrix | np.ndarray, cfg: DecoderConfig | None = None, prior: np.ndarray | None = None):
        self.cfg = cfg or DecoderConfig()
        self.h = _dense(h)
        self.m, self.n = self.h.shape
        self.edges = kernels.build_edges(self.h)
        self.prior = np.ascontiguousarray(
            channel_llr(self.cfg.channel_prior, self.n) if prior is None else prior, dtype=np.float64
        )

    def decode(self, syndrome) -> DecodeResult:
        s = _as_dense(syndrome, self.m)
        soft, hard, conv, iters = kernels.bp_min_sum(*self.edges, s, self.prior, self.cfg.max_iter, self.cfg.ms_scaling)
        if conv and not self.cfg.osd_always:
            return DecodeResult(BitVector.from_dense(hard), True, False, soft, int(iters))
        corr, consistent = kernels.osd(self.h, s, soft, self.prior, self.cfg.osd_order, self.cfg.method_code)
        if not consistent:
            raise DecoderError("syndrome is not in the column space of h")
        return DecodeResult(BitVector.from_dense(corr), bool(conv), True, soft, int(iters))

    def syndrome(self, error) -> np.ndarray:
        e = error.to_dense() if isinstance(error, BitVector) else np.asarray(error, dtype=np.uint8)
        return ((self.h.astype(np.int64) @ e.astype(np.int64)) & 1).astype(np.uint8)


__all__ = [
    "BpOsdDecoder",
    "DecodeResult",
    "DecoderConfig",
    "DecoderError",
    "bp_min_sum",
    "channel_llr",
    "osd_postprocess",
]
