"""Monte Carlo oracle: accept-reject sampling of the N-level eigenphase density.

Proposals are independent uniforms on (0, pi)^N and are accepted against an
envelope M = envelope_scale * max f, where

    f(phi) = prod_j w(cos phi_j) prod_{j<k} (cos phi_k - cos phi_j)^2,
    w(c)   = (1 - c)^alpha (1 + c)^beta,

is the unnormalized joint density.  The maximum is located numerically.

Random numbers come from numpy's ``Philox`` (4x64, 10 rounds), a
counter-based generator.  Proposals are drawn in fixed-size blocks and
block ``i`` is keyed by ``SeedSequence(seed, spawn_key=(i,))``, so the
accepted stream depends only on the seed and never on how many workers
process the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import DomainError, EnvelopeViolation
from .params import EnsembleParams

__all__ = [
    "BIT_GENERATOR",
    "McConfig",
    "McResult",
    "dkw_bound",
    "empirical_first_cdf",
    "envelope_maximum",
    "log_density",
    "sample_levels",
]

BIT_GENERATOR = "Philox"  # numpy.random.Philox, pinned for reproducibility
MAX_N = 6


@dataclass(frozen=True)
class McConfig:
    """Sampling settings.

    Attributes
    ----------
    samples : int
        Number of accepted N-tuples to return.
    seed : int
        64-bit seed; the whole stream is a function of it.
    envelope_scale : float
        Safety factor applied to the located maximum.
    block_size : int
        Proposals per RNG block.
    workers : int
        Threads used to process blocks.  Has no effect on the output.
    max_restarts : int
        Envelope doublings allowed before giving up.
    """

    samples: int = 100_000
    seed: int = 0
    envelope_scale: float = 1.1
    block_size: int = 1 << 15
    workers: int = 1
    max_restarts: int = 8

    def __post_init__(self):
        if isinstance(self.samples, bool) or int(self.samples) != self.samples or self.samples < 1:
            raise DomainError(f"samples must be a positive integer, got {self.samples}")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must fit in 64 bits")
        if not self.envelope_scale >= 1.0:
            raise DomainError("envelope_scale must be >= 1")
        if self.block_size < 1 or self.workers < 1:
            raise DomainError("block_size and workers must be positive")


@dataclass
class McResult:
    levels: np.ndarray  # (samples, N), one row per accepted tuple
    envelope: float  # final log M
    restarts: int
    proposals: int

    @property
    def acceptance_rate(self) -> float:
        return len(self.levels) / self.proposals


def _check(params: EnsembleParams) -> int:
    if not params.N_is_integer or not 1 <= params.N <= MAX_N:
        raise DomainError(f"Monte Carlo needs an integer N in [1, {MAX_N}], got {params.N}")
    # the uniform-proposal envelope needs a bounded density
    if params.alpha < 0 or params.beta < 0:
        raise DomainError("Monte Carlo needs alpha, beta >= 0 (bounded density)")
    return int(params.N)


def log_density(params: EnsembleParams, phi) -> np.ndarray:
    """log of the unnormalized joint density; ``phi`` has shape (..., N)."""
    phi = np.asarray(phi, dtype=float)
    c = np.cos(phi)
    al, be = params.alpha_f, params.beta_f
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.zeros(phi.shape[:-1])
        if al:
            out = out + al * np.log1p(-c).sum(axis=-1)
        if be:
            out = out + be * np.log1p(c).sum(axis=-1)
        n = phi.shape[-1]
        for j in range(n):
            for k in range(j + 1, n):
                out = out + 2.0 * np.log(np.abs(c[..., k] - c[..., j]))
    return out


def envelope_maximum(params: EnsembleParams, seed: int = 0, coarse: int = 4096, refine: int = 8) -> float:
    """Numerically located max of ``log_density`` (coarse search + L-BFGS-B)."""
    n = _check(params)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(2**32,))))
    pts = rng.uniform(0.0, math.pi, size=(coarse, n))
    # include the edges, where the maximum sits when alpha or beta vanish
    edge = np.linspace(0.0, math.pi, n)
    pts = np.vstack([pts, edge[None, :]])
    vals = log_density(params, pts)
    best = float(np.max(vals))
    bounds = [(0.0, math.pi)] * n

    def neg(x):
        v = log_density(params, x[None, :])[0]
        return 1e300 if not np.isfinite(v) else -v

    for i in np.argsort(vals)[::-1][:refine]:
        res = minimize(neg, pts[i], method="L-BFGS-B", bounds=bounds)
        best = max(best, -float(res.fun))
    return best


def _block(params, seed, index, size, n, log_m):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))
    phi = rng.uniform(0.0, math.pi, size=(size, n))
    u = rng.uniform(size=size)
    logf = log_density(params, phi)
    if np.any(logf > log_m):
        raise EnvelopeViolation(f"density exceeded envelope in block {index}")
    keep = np.log(u) + log_m < logf
    return phi[keep]


def _run(params, cfg, n, log_m):
    accepted, have, proposals = [], 0, 0
    index = 0
    pool = ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        while have < cfg.samples:
            batch = range(index, index + cfg.workers)
            if pool is None:
                results = [_block(params, cfg.seed, i, cfg.block_size, n, log_m) for i in batch]
            else:
                futs = [pool.submit(_block, params, cfg.seed, i, cfg.block_size, n, log_m) for i in batch]
                results = [f.result() for f in futs]
            for r in results:  # merged strictly in block order
                if have >= cfg.samples:
                    break
                accepted.append(r)
                have += len(r)
                proposals += cfg.block_size
            index += cfg.workers
    finally:
        if pool is not None:
            pool.shutdown()
    levels = np.concatenate(accepted)[: cfg.samples]
    return levels, proposals


def sample_levels(params: EnsembleParams, cfg: McConfig = McConfig()) -> McResult:
    """Draw ``cfg.samples`` accepted N-tuples of eigenphases in (0, pi).

    On an envelope violation the envelope is doubled and sampling restarts
    from the first block, so the output stays a pure function of the seed.
    """
    n = _check(params)
    log_m = envelope_maximum(params, cfg.seed) + math.log(cfg.envelope_scale)
    restarts = 0
    while True:
        try:
            levels, proposals = _run(params, cfg, n, log_m)
            return McResult(levels, log_m, restarts, proposals)
        except EnvelopeViolation:
            restarts += 1
            if restarts > cfg.max_restarts:
                raise
            log_m += math.log(2.0)


def empirical_first_cdf(params: EnsembleParams, cfg: McConfig, phis, levels=None) -> np.ndarray:
    """Fraction of accepted tuples whose smallest phase is <= each phi.

    Estimates 1 - E_N(phi).  Pass ``levels`` to reuse an existing sample.
    """
    if levels is None:
        levels = sample_levels(params, cfg).levels
    first = np.sort(np.min(levels, axis=1))
    phis = np.asarray(phis, dtype=float)
    return np.searchsorted(first, phis, side="right") / len(first)


def dkw_bound(samples: int, delta: float = 1e-3) -> float:
    """Dvoretzky-Kiefer-Wolfowitz radius: sup |F_n - F| <= eps w.p. >= 1 - delta."""
    if samples < 1:
        raise DomainError("need at least one sample")
    return math.sqrt(math.log(2.0 / delta) / (2.0 * samples))
