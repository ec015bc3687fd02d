"""Monte Carlo bookkeeping: estimates, exact-merge moments, fits, KS.

Sample moments are accumulated per fixed-size block of path indices with
exactly-rounded block sums (math.fsum), and block sums are combined in
block order.  A merged set of per-worker partials therefore reproduces a
single-stream run bit for bit, regardless of how blocks were distributed.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

BLOCK_SIZE = 4096


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo estimate with normal-theory 95% confidence interval."""

    n: int
    mean: float
    stderr: float
    ci95: Tuple[float, float]
    n_discarded: int = 0
    meta: dict = field(default_factory=dict)

    def scaled(self, factor: float, **extra_meta) -> "McEstimate":
        """The estimate of factor * quantity (exact rescaling)."""
        m = factor * self.mean
        se = abs(factor) * self.stderr
        meta = dict(self.meta)
        meta.update(extra_meta)
        return McEstimate(n=self.n, mean=m, stderr=se,
                          ci95=(m - 1.96 * se, m + 1.96 * se),
                          n_discarded=self.n_discarded, meta=meta)


@dataclass
class BlockMoments:
    """Per-block exactly-rounded sums keyed by absolute block index."""

    blocks: Dict[int, Tuple[int, float, float]] = field(default_factory=dict)

    @classmethod
    def from_values(cls, values: Sequence[float], first_index: int = 0,
                    block_size: int = BLOCK_SIZE) -> "BlockMoments":
        """Accumulate values whose global sample indices start at first_index.

        ``first_index`` must be block-aligned so that partials from
        different workers never share a block.
        """
        if first_index % block_size != 0:
            raise ValueError("first_index must be a multiple of the block size")
        out = cls()
        values = np.asarray(values, dtype=np.float64)
        b0 = first_index // block_size
        for off in range(0, len(values), block_size):
            chunk = values[off:off + block_size]
            out.blocks[b0 + off // block_size] = (
                len(chunk),
                math.fsum(chunk),
                math.fsum(chunk * chunk),
            )
        return out

    def merge(self, other: "BlockMoments") -> "BlockMoments":
        overlap = self.blocks.keys() & other.blocks.keys()
        if overlap:
            raise ValueError(f"blocks {sorted(overlap)} present in both partials")
        merged = BlockMoments(dict(self.blocks))
        merged.blocks.update(other.blocks)
        return merged

    def estimate(self, n_discarded: int = 0, **meta) -> McEstimate:
        keys = sorted(self.blocks)
        n = sum(self.blocks[k][0] for k in keys)
        s1 = math.fsum(self.blocks[k][1] for k in keys)
        s2 = math.fsum(self.blocks[k][2] for k in keys)
        mean = s1 / n
        if n > 1:
            var = (s2 - s1 * s1 / n) / (n - 1)
            var = max(var, 0.0)
            se = math.sqrt(var / n)
        else:
            se = math.nan
        return McEstimate(n=n, mean=mean, stderr=se,
                          ci95=(mean - 1.96 * se, mean + 1.96 * se),
                          n_discarded=n_discarded, meta=dict(meta))


def merge_moments(parts: Sequence[BlockMoments]) -> BlockMoments:
    out = BlockMoments()
    for p in parts:
        out = out.merge(p)
    return out


@dataclass(frozen=True)
class ScanResult:
    """Estimates along a scanned axis plus a log-log power-law fit."""

    axis: np.ndarray
    estimates: List[McEstimate]
    fitted_exponent: float
    fitted_exponent_se: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ax = np.asarray(self.axis, dtype=np.float64)
        object.__setattr__(self, "axis", ax)
        d = np.diff(ax)
        if len(ax) != len(self.estimates):
            raise ValueError("axis and estimates must align")
        if len(ax) > 1 and not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("axis must be strictly monotone")


def wls_loglog(x: Sequence[float], y: Sequence[float], yerr: Sequence[float]):
    """Weighted least squares of log y on log x.

    Weights are 1/sigma^2 with sigma = yerr/y (the delta-method error of
    log y).  Returns (slope, slope_se, intercept).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    yerr = np.asarray(yerr, dtype=np.float64)
    if np.any(y <= 0.0):
        raise ValueError("log-log fit needs positive values")
    lx = np.log(x)
    ly = np.log(y)
    sig = yerr / y
    w = 1.0 / (sig * sig)
    sw = w.sum()
    xb = (w * lx).sum() / sw
    yb = (w * ly).sum() / sw
    sxx = (w * (lx - xb) ** 2).sum()
    slope = (w * (lx - xb) * (ly - yb)).sum() / sxx
    slope_se = math.sqrt(1.0 / sxx)
    intercept = yb - slope * xb
    return slope, slope_se, intercept


def ks_distance(samples: Sequence[float], cdf_x: np.ndarray, cdf_y: np.ndarray,
                weights: Optional[Sequence[float]] = None) -> float:
    """Kolmogorov-Smirnov distance of (optionally weighted) samples to a CDF
    given on a dense grid."""
    s = np.sort(np.asarray(samples, dtype=np.float64))
    if weights is None:
        hi = np.arange(1, len(s) + 1) / len(s)
    else:
        w = np.asarray(weights, dtype=np.float64)
        order = np.argsort(np.asarray(samples, dtype=np.float64))
        w = w[order]
        hi = np.cumsum(w) / w.sum()
    lo = np.concatenate(([0.0], hi[:-1]))
    ref = np.interp(s, cdf_x, cdf_y)
    return float(max(np.max(np.abs(hi - ref)), np.max(np.abs(lo - ref))))
