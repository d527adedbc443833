"""Seeded Monte-Carlo BER/FER estimation over BPSK and AWGN.

The all-zero codeword is sent.  Frame ``f`` at SNR index ``s`` draws its
noise from ``Philox(SeedSequence([seed, s, f]))``, frames are processed in
fixed-size chunks and chunk results are folded in frame order, stopping at
the first chunk boundary where the stop rule holds.  The result therefore
does not depend on how many worker processes share the chunks.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Union

import numpy as np

from .convcode import ConvCode, terminated_matrix
from .decode import PipelineDecoder, TannerGraph, awgn_sigma2
from .gf2 import SparseBinMatrix, gf2_rank

__all__ = [
    "SimConfig",
    "SnrPoint",
    "SimResult",
    "run_ber",
    "emit_csv",
    "format_csv",
    "parse_csv",
    "convolutional_gain",
    "snr_at_ber",
    "read_config",
    "CSV_HEADER",
]

CSV_HEADER = "code_id,ebn0_db,frames,bits,bit_errors,frame_errors,ber,fer,avg_iter"

Code = Union[SparseBinMatrix, ConvCode]


@dataclass(frozen=True)
class SimConfig:
    """One simulation campaign.

    ``decoder`` is ``"block"`` (flooding, syndrome stop, ``iterations`` as
    the cap) or ``"pipeline"`` (``iterations`` processors, convolutional
    codes only).  Convolutional codes are simulated as zero-tail terminated
    frames of ``frame_blocks`` blocks, by default the smallest count giving
    at least ``20 * nu_s`` symbols.  ``rate`` overrides the rate used for
    ``Eb/N0``: by default ``k/n`` of block codes and ``b/c`` of
    convolutional codes.
    """

    code: Code
    ebn0_db: tuple[float, ...]
    seed: int
    code_id: str = "code"
    decoder: str = "block"
    iterations: int = 100
    max_frames: int = 10_000
    min_bit_errors: int = 500
    min_frame_errors: int = 100
    frame_blocks: int | None = None
    rate: float | None = None
    chunk_frames: int = 32
    workers: int = 1

    def __post_init__(self):
        snrs = tuple(float(x) for x in self.ebn0_db)
        if not snrs:
            raise ValueError("SNR list is empty")
        object.__setattr__(self, "ebn0_db", snrs)
        for name in ("iterations", "max_frames", "min_bit_errors", "min_frame_errors", "chunk_frames", "workers"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.decoder not in ("block", "pipeline"):
            raise ValueError(f"unknown decoder {self.decoder!r}")
        if self.decoder == "pipeline" and not isinstance(self.code, ConvCode):
            raise ValueError("the pipeline decoder needs a convolutional code")
        if self.rate is not None and not 0 < self.rate <= 1:
            raise ValueError("rate must lie in (0, 1]")


@dataclass(frozen=True)
class SnrPoint:
    code_id: str
    ebn0_db: float
    frames: int
    bits: int
    bit_errors: int
    frame_errors: int
    iterations: int

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else 0.0

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else 0.0

    @property
    def avg_iter(self) -> float:
        return self.iterations / self.frames if self.frames else 0.0

    def flagged(self, min_bit_errors: int = 500) -> bool:
        """Too few errors for a stable estimate."""
        return self.bit_errors < min_bit_errors


@dataclass(frozen=True)
class SimResult:
    points: tuple[SnrPoint, ...] = field(default_factory=tuple)

    def curve(self) -> tuple[np.ndarray, np.ndarray]:
        pts = sorted(self.points, key=lambda p: p.ebn0_db)
        return np.array([p.ebn0_db for p in pts]), np.array([p.ber for p in pts])

    def at(self, ebn0_db: float) -> SnrPoint:
        for p in self.points:
            if math.isclose(p.ebn0_db, ebn0_db):
                return p
        raise KeyError(ebn0_db)

    def monotone_violations(self, min_bit_errors: int = 500) -> list[tuple[float, float]]:
        """Adjacent well-estimated SNR pairs where the BER increases."""
        pts = [p for p in sorted(self.points, key=lambda p: p.ebn0_db) if not p.flagged(min_bit_errors)]
        return [(a.ebn0_db, b.ebn0_db) for a, b in zip(pts, pts[1:]) if b.ber > a.ber]


# ---------------------------------------------------------------------------
# worker side
# ---------------------------------------------------------------------------

class _Frame:
    """Decoder and bookkeeping for one frame type, built once per process."""

    def __init__(self, cfg: SimConfig):
        code = cfg.code
        self.iterations = cfg.iterations
        if isinstance(code, ConvCode):
            nb = cfg.frame_blocks or -(-20 * code.nu_s // code.c)
            if cfg.decoder == "pipeline":
                self.pipe = PipelineDecoder(code, nb, cfg.iterations)
                self.graph = self.pipe.graph
            else:
                self.pipe = None
                self.graph = TannerGraph(terminated_matrix(code, nb))
            self.rate = float(cfg.rate if cfg.rate is not None else code.rate)
        else:
            self.pipe = None
            self.graph = TannerGraph(code)
            if cfg.rate is not None:
                self.rate = float(cfg.rate)
            else:
                k = code.cols - gf2_rank(code)
                if k <= 0:
                    raise ValueError("block code has dimension 0")
                self.rate = k / code.cols
        self.n = self.graph.n

    def run(self, cfg: SimConfig, snr_idx: int, first: int, count: int) -> tuple[int, int, int, int, int]:
        sigma = math.sqrt(awgn_sigma2(cfg.ebn0_db[snr_idx], self.rate))
        scale = 2.0 / (sigma * sigma)
        frames = bits = bit_err = frame_err = iters = 0
        for f in range(first, first + count):
            rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([cfg.seed, snr_idx, f])))
            y = 1.0 + sigma * rng.standard_normal(self.n)
            llr = scale * y
            if self.pipe is not None:
                dec = self.pipe.decode(llr)
                it = self.iterations
            else:
                res = self.graph.decode(llr, self.iterations, True)
                dec, it = res.bits, res.iterations
            e = int(dec.sum())
            frames += 1
            bits += self.n
            bit_err += e
            frame_err += e > 0
            iters += it
        return frames, bits, bit_err, frame_err, iters


_WORKER: dict = {}


def _worker_init(cfg: SimConfig) -> None:
    _WORKER["cfg"] = cfg
    _WORKER["frame"] = _Frame(cfg)


def _worker_chunk(args) -> tuple[int, int, int, int, int]:
    snr_idx, first, count = args
    return _WORKER["frame"].run(_WORKER["cfg"], snr_idx, first, count)


def _done(cfg: SimConfig, frames: int, bit_err: int, frame_err: int) -> bool:
    if frames >= cfg.max_frames:
        return True
    return bit_err >= cfg.min_bit_errors and frame_err >= cfg.min_frame_errors


def _chunks(cfg: SimConfig):
    first = 0
    while first < cfg.max_frames:
        count = min(cfg.chunk_frames, cfg.max_frames - first)
        yield first, count
        first += count


def run_ber(cfg: SimConfig, *, progress=None) -> SimResult:
    """Simulate every SNR of ``cfg``; deterministic for a fixed config."""
    points = []
    if cfg.workers == 1:
        frame = _Frame(cfg)
        run = lambda s, a, c: frame.run(cfg, s, a, c)  # noqa: E731
        pool = None
    else:
        pool = ProcessPoolExecutor(max_workers=cfg.workers, initializer=_worker_init, initargs=(cfg,))
    try:
        for s_idx, snr in enumerate(cfg.ebn0_db):
            tot = [0, 0, 0, 0, 0]
            chunks = _chunks(cfg)
            finished = False
            while not finished:
                batch = [c for _, c in zip(range(cfg.workers), chunks)]
                if not batch:
                    break
                if pool is None:
                    outs = [run(s_idx, a, c) for a, c in batch]
                else:
                    outs = list(pool.map(_worker_chunk, [(s_idx, a, c) for a, c in batch]))
                for out in outs:
                    tot = [x + y for x, y in zip(tot, out)]
                    if _done(cfg, tot[0], tot[2], tot[3]):
                        finished = True
                        break
            pt = SnrPoint(cfg.code_id, snr, *tot)
            points.append(pt)
            if progress is not None:
                progress(pt)
    finally:
        if pool is not None:
            pool.shutdown()
    return SimResult(tuple(points))


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def _g6(x: float) -> str:
    return f"{x:.6g}"


def format_csv(res: SimResult) -> str:
    lines = [CSV_HEADER]
    for p in res.points:
        lines.append(",".join([
            p.code_id, _g6(p.ebn0_db), str(p.frames), str(p.bits), str(p.bit_errors),
            str(p.frame_errors), _g6(p.ber), _g6(p.fer), _g6(p.avg_iter),
        ]))
    return "\n".join(lines) + "\n"


def emit_csv(res: SimResult, path) -> Path:
    p = Path(path)
    p.write_text(format_csv(res))
    return p


def parse_csv(text: str) -> SimResult:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("unexpected CSV header")
    pts = []
    for ln in lines[1:]:
        f = ln.split(",")
        if len(f) != 9:
            raise ValueError(f"bad CSV row: {ln!r}")
        frames = int(f[2])
        pts.append(SnrPoint(f[0], float(f[1]), frames, int(f[3]), int(f[4]), int(f[5]),
                            int(round(float(f[8]) * frames))))
    return SimResult(tuple(pts))


# ---------------------------------------------------------------------------
# gains
# ---------------------------------------------------------------------------

def snr_at_ber(res: SimResult, target_ber: float) -> float:
    """SNR where the curve crosses ``target_ber``, interpolating ``log10(BER)`` linearly."""
    if target_ber <= 0:
        raise ValueError("target BER must be positive")
    x, y = res.curve()
    lt = math.log10(target_ber)
    for k in range(len(x) - 1):
        y0, y1 = y[k], y[k + 1]
        if y0 <= 0:
            continue
        if y0 >= target_ber >= y1:
            if y1 <= 0:
                continue
            l0, l1 = math.log10(y0), math.log10(y1)
            if l0 == l1:
                return float(x[k])
            return float(x[k] + (lt - l0) * (x[k + 1] - x[k]) / (l1 - l0))
    raise ValueError(f"BER {target_ber:g} is not bracketed by the curve")


def convolutional_gain(block: SimResult, conv: SimResult, target_ber: float) -> float:
    """SNR the block code needs minus the SNR the convolutional code needs."""
    return snr_at_ber(block, target_ber) - snr_at_ber(conv, target_ber)


# ---------------------------------------------------------------------------
# config files
# ---------------------------------------------------------------------------

def read_config(path) -> dict[str, str]:
    """Flat ``key=value`` file; ``#`` starts a comment line."""
    out = {}
    for n, ln in enumerate(Path(path).read_text().splitlines(), 1):
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        if "=" not in ln:
            raise ValueError(f"line {n}: expected key=value")
        k, v = ln.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def config_from_mapping(kv: dict[str, str], code: Code) -> SimConfig:
    """Build a :class:`SimConfig` from string settings (config file or CLI)."""
    known = {
        "code", "code_id", "decoder", "iterations", "ebn0_db", "seed", "max_frames",
        "min_bit_errors", "min_frame_errors", "frame_blocks", "rate", "chunk_frames", "workers",
    }
    unknown = set(kv) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "seed" not in kv:
        raise ValueError("a seed is required")
    if "ebn0_db" not in kv:
        raise ValueError("ebn0_db is required")
    ints = {k: int(kv[k]) for k in ("iterations", "max_frames", "min_bit_errors", "min_frame_errors",
                                     "frame_blocks", "chunk_frames", "workers") if k in kv}
    rate = kv.get("rate")
    return SimConfig(
        code=code,
        ebn0_db=tuple(float(x) for x in kv["ebn0_db"].replace(";", ",").split(",") if x.strip()),
        seed=int(kv["seed"]),
        code_id=kv.get("code_id", "code"),
        decoder=kv.get("decoder", "block"),
        rate=float(Fraction(rate)) if rate else None,
        **ints,
    )


def with_workers(cfg: SimConfig, workers: int) -> SimConfig:
    return replace(cfg, workers=workers)


def default_workers() -> int:
    return os.cpu_count() or 1
