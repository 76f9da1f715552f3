"""Experiment configuration and the derived protocol constants.

All randomness in a trial flows from the three seeds here; there is no
ambient RNG anywhere in the protocol stack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

STAGES = ("forest", "fmin", "bfs", "mst", "all")
SCHEDULERS = ("unit", "uniformRandom", "adversarialLag")


@dataclass
class RunConfig:
    n: int = 64
    family: str = "gnp:0.3"
    eps: float = 0.0

    # protocol constants (exposed so both the desk-scale defaults and the
    # literal asymptotic thresholds are runnable)
    alpha: float = 0.35      # high-degree threshold scale
    beta: float = 4.0        # star-selection scale
    c_f: float = 1.0         # sampling-loop repetition scale
    c_a: float = 2.0         # cut-estimate repetition scale
    c_msg: int = 4           # words per CONGEST message
    kappa_b: float = 4.0     # BFS additive-stretch allowance

    scheduler: str = "unit"
    graph_seed: int = 1
    protocol_seed: int = 2
    scheduler_seed: int = 3

    stage: str = "all"
    trials: int = 1

    # knowledge of n is only promised up to a constant factor
    n_factor: int = 1
    # time-charge multi-word payloads as pipelined fragments
    pipelined_bits: bool = True
    # hard event ceiling; exceeding it is a reported failure, not a crash
    event_ceiling: int = 0   # 0 = auto
    trace: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.eps <= 0.25:
            raise ValueError(f"eps must lie in [0, 1/4], got {self.eps}")
        if self.stage not in STAGES:
            raise ValueError(f"unknown stage {self.stage!r}")
        if self.scheduler not in SCHEDULERS:
            raise ValueError(f"unknown scheduler {self.scheduler!r}")
        if self.n < 1:
            raise ValueError("n must be positive")

    # ------------------------------------------------------------------
    # derived quantities (computed from the advertised network size)

    @property
    def n_est(self) -> int:
        """Network size as known to the nodes (exact up to a constant factor)."""
        return max(2, self.n_factor * self.n)

    @property
    def log_n(self) -> float:
        return math.log(self.n_est)

    @property
    def sqrt_n(self) -> int:
        return math.isqrt(self.n_est - 1) + 1  # ceil(sqrt(n))

    @property
    def degree_threshold(self) -> int:
        """Degree at or above which a node is high-degree."""
        n, e = self.n_est, self.eps
        return max(1, math.ceil(self.alpha * n ** (0.5 + e) * self.log_n ** 2))

    @property
    def star_probability(self) -> float:
        """Self-selection probability yielding ~n^(1/2-eps) stars."""
        n, e = self.n_est, self.eps
        return min(1.0, self.beta / (n ** (0.5 + e) * self.log_n))

    @property
    def sample_budget(self) -> int:
        """Sampling attempts per maximal-tree phase."""
        return math.ceil(16.0 * self.c_f * self.log_n)

    @property
    def sample_floor(self) -> int:
        """Sample size below which an all-stale phase means the cut is exhausted."""
        return math.ceil(2.0 * self.log_n)

    @property
    def cut_estimate_reps(self) -> int:
        """Independent hash repetitions inside one cut-size estimate."""
        return max(3, math.ceil(self.c_a * self.log_n))

    @property
    def word_bits(self) -> int:
        return max(1, math.ceil(math.log2(self.n_est)))

    @property
    def congest_bits(self) -> int:
        """Capacity of a single CONGEST message."""
        return self.c_msg * self.word_bits

    @property
    def sketch_levels(self) -> int:
        """Sampling levels; enough to cover every possible cut size."""
        return 2 * self.word_bits + 2

    @property
    def max_events(self) -> int:
        if self.event_ceiling:
            return self.event_ceiling
        n = self.n
        return 4_000_000 + 40 * n * n

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in d.items() if k in known})


def parse_family(family: str) -> tuple[str, dict]:
    """Parse a family spec like ``gnp:0.3`` or ``complete``."""
    name, _, arg = family.partition(":")
    name = name.strip().lower()
    if name == "gnp":
        p = float(arg) if arg else 0.3
        return "gnp", {"p": p}
    if name in ("complete", "path", "grid", "barbell"):
        return name, {}
    raise ValueError(f"unknown graph family {family!r}")
