"""Perturbation sampling with label-distribution shaping.

Training labels should cover the APPD range roughly uniformly, with a small
fixed fraction of exact zeros (unperturbed parameters).  Uniformity is
achieved by bin-slot rejection sampling: candidate parameter sets are drawn
by independently perturbing each parameter with a multiplicative factor,
their APPD is computed, and a candidate is kept only while its label bin
still has unfilled slots.  Bins that cannot be filled within the attempt
budget are reported as starved rather than looping forever.

Everything is driven by a single seeded generator, so results are
reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .camera import ImageSize, Intrinsics
from .errors import ParseError
from .metric import appd
from .rectify import rectified_map

# Multiplicative perturbation defaults: focal length -5%..+20%, optical
# center +/-5%, distortion coefficients +/-15%.
DEFAULT_FOCAL_RANGE = (0.95, 1.20)
DEFAULT_CENTER_RANGE = (0.95, 1.05)
DEFAULT_DISTORTION_RANGE = (0.85, 1.15)

FACTOR_ONES = (1.0,) * 9


@dataclass(frozen=True)
class PerturbRanges:
    """Per-parameter multiplicative intervals.

    `focal` applies to fu and fv independently, `center` to uc and vc,
    `distortion` to each of k1, k2, k3, p1, p2.  A parameter whose
    reference value is exactly 0 is unaffected by a multiplicative factor;
    set `distortion_additive_eps` > 0 to draw an additive value from
    U(-eps, eps) for such distortion coefficients instead.
    """

    focal: tuple = DEFAULT_FOCAL_RANGE
    center: tuple = DEFAULT_CENTER_RANGE
    distortion: tuple = DEFAULT_DISTORTION_RANGE
    distortion_additive_eps: float = 0.0

    def __post_init__(self):
        for name in ("focal", "center", "distortion"):
            lo, hi = getattr(self, name)
            if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
                raise ValueError(f"invalid {name} range ({lo}, {hi})")
        if self.distortion_additive_eps < 0:
            raise ValueError("distortion_additive_eps must be >= 0")

    def factor_intervals(self):
        """The nine (lo, hi) intervals in canonical parameter order."""
        return (self.focal,) * 2 + (self.center,) * 2 + (self.distortion,) * 5

    def is_biased(self) -> bool:
        """True when some interval does not contain the unit factor."""
        return any(not (lo <= 1.0 <= hi) for lo, hi in self.factor_intervals())


@dataclass
class SamplerConfig:
    n_samples: int
    n_bins: int = 10
    appd_max: float | None = None  # None: estimate with a pilot run
    zero_fraction: float = 0.01
    max_attempts_per_slot: int = 1000
    seed: int = 0
    pilot_draws: int = 1000

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")
        if self.n_bins < 2:
            raise ValueError("n_bins must be at least 2")
        if self.appd_max is not None and self.appd_max <= 0:
            raise ValueError("appd_max must be positive when given")
        if not 0.0 <= self.zero_fraction <= 0.1:
            raise ValueError("zero_fraction must lie in [0, 0.1]")
        if self.max_attempts_per_slot < 1:
            raise ValueError("max_attempts_per_slot must be positive")


@dataclass(frozen=True)
class LabeledPerturbation:
    """One perturbed parameter set with its APPD label.

    `factors` holds the nine multiplicative draws in canonical order; the
    zero-label entries carry all-ones factors and the reference parameters
    bit for bit.
    """

    theta: Intrinsics
    appd: float
    factors: tuple = FACTOR_ONES


@dataclass(frozen=True)
class BinStarvation:
    bin_index: int
    lo: float
    hi: float
    wanted: int
    filled: int


@dataclass
class SamplerResult:
    samples: list
    appd_max: float
    bin_edges: np.ndarray
    attempts: int
    starved: list = field(default_factory=list)

    def histogram(self):
        """Counts of nonzero labels per bin (zeros excluded)."""
        counts = np.zeros(len(self.bin_edges) - 1, dtype=int)
        for s in self.samples:
            if s.appd > 0:
                counts[_bin_index(s.appd, self.appd_max, len(counts))] += 1
        return counts


def draw_factors(ranges: PerturbRanges, rng) -> tuple:
    """Nine independent uniform factor draws in canonical parameter order."""
    return tuple(rng.uniform(lo, hi) for lo, hi in ranges.factor_intervals())


def apply_factors(theta_star: Intrinsics, factors, ranges: PerturbRanges | None = None,
                  rng=None) -> Intrinsics:
    values = [v * f for v, f in zip(theta_star.as_tuple(), factors)]
    if ranges is not None and ranges.distortion_additive_eps > 0 and rng is not None:
        eps = ranges.distortion_additive_eps
        for i in range(4, 9):
            if theta_star.as_tuple()[i] == 0.0:
                values[i] = rng.uniform(-eps, eps)
    return Intrinsics.from_tuple(values)


def sample_params(theta_star: Intrinsics, ranges: PerturbRanges, rng) -> Intrinsics:
    """One perturbed parameter set, every parameter drawn independently."""
    return apply_factors(theta_star, draw_factors(ranges, rng), ranges, rng)


def pilot_appd_max(theta_star: Intrinsics, size: ImageSize, ranges: PerturbRanges,
                   n_pilot: int, rng) -> float:
    """95th-percentile APPD over unconstrained perturbation draws."""
    if n_pilot < 100:
        raise ValueError("n_pilot must be at least 100")
    star = rectified_map(theta_star, size)
    vals = np.empty(n_pilot)
    for i in range(n_pilot):
        theta = sample_params(theta_star, ranges, rng)
        vals[i] = appd(star, rectified_map(theta, size))
    return float(np.percentile(vals, 95))


def _bin_index(value: float, appd_max: float, n_bins: int) -> int:
    """Bin of `value` over n_bins equal-width bins covering (0, appd_max]."""
    idx = int(np.ceil(value * n_bins / appd_max)) - 1
    return min(max(idx, 0), n_bins - 1)


def sample_uniform_appd(theta_star: Intrinsics, size: ImageSize, ranges: PerturbRanges,
                        cfg: SamplerConfig) -> SamplerResult:
    """Draw labeled perturbations whose APPD histogram is approximately flat.

    Returns round(zero_fraction * n_samples) exact-zero entries plus
    rejection-sampled entries filling n_bins equal-width bins over
    (0, appd_max] as evenly as the attempt budget allows.  The total
    attempt budget is max_attempts_per_slot * (number of nonzero slots);
    bins still unfilled when it runs out are listed in the starvation
    report and the result is partial.  Output order is a seeded shuffle of
    the pool.  Deterministic given the config seed.
    """
    rng = np.random.default_rng(cfg.seed)
    n_zero = round(cfg.zero_fraction * cfg.n_samples)
    n_fill = cfg.n_samples - n_zero

    appd_max = cfg.appd_max
    if appd_max is None:
        appd_max = pilot_appd_max(theta_star, size, ranges, cfg.pilot_draws, rng)

    quota = np.full(cfg.n_bins, n_fill // cfg.n_bins, dtype=int)
    quota[: n_fill % cfg.n_bins] += 1
    filled = np.zeros(cfg.n_bins, dtype=int)

    samples = [LabeledPerturbation(theta=theta_star, appd=0.0) for _ in range(n_zero)]
    attempts = 0
    budget = cfg.max_attempts_per_slot * n_fill
    if appd_max > 0 and n_fill > 0:
        star = rectified_map(theta_star, size)
        open_slots = n_fill
        while open_slots > 0 and attempts < budget:
            attempts += 1
            factors = draw_factors(ranges, rng)
            theta = apply_factors(theta_star, factors, ranges, rng)
            value = appd(star, rectified_map(theta, size))
            if not 0.0 < value <= appd_max:
                continue
            b = _bin_index(value, appd_max, cfg.n_bins)
            if filled[b] < quota[b]:
                filled[b] += 1
                open_slots -= 1
                samples.append(LabeledPerturbation(theta=theta, appd=value, factors=factors))

    edges = np.linspace(0.0, appd_max, cfg.n_bins + 1)
    starved = [
        BinStarvation(bin_index=i, lo=float(edges[i]), hi=float(edges[i + 1]),
                      wanted=int(quota[i]), filled=int(filled[i]))
        for i in range(cfg.n_bins)
        if filled[i] < quota[i]
    ]
    order = rng.permutation(len(samples))
    samples = [samples[i] for i in order]
    return SamplerResult(samples=samples, appd_max=appd_max, bin_edges=edges,
                         attempts=attempts, starved=starved)


_CONFIG_TYPES = {
    "n_samples": int,
    "n_bins": int,
    "appd_max": float,
    "zero_fraction": float,
    "max_attempts_per_slot": int,
    "seed": int,
    "pilot_draws": int,
}


def load_sampler_config(path) -> SamplerConfig:
    """Read a SamplerConfig from a plain key-value file.

    One `key = value` (or `key: value`) pair per line; `#` starts a
    comment.  Keys match the SamplerConfig field names.
    """
    kwargs = {}
    with open(path) as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            for sep in ("=", ":"):
                if sep in line:
                    key, _, value = line.partition(sep)
                    break
            else:
                raise ParseError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key = key.strip()
            value = value.strip()
            if key not in _CONFIG_TYPES:
                raise ParseError(f"{path}:{lineno}: unknown sampler config key {key!r}")
            try:
                kwargs[key] = _CONFIG_TYPES[key](value)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    if "n_samples" not in kwargs:
        raise ParseError(f"{path}: sampler config must set n_samples")
    return SamplerConfig(**kwargs)
