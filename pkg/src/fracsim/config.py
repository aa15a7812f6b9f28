"""Engine configuration."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError
from .labels import LabelSimilarity, resolve_label_fn

VARIANTS = ("s", "dp", "b", "bj")
CONVERGENCE_MODES = ("absolute", "relative")
MATCHING_MODES = ("greedy", "exact-small")

# above this many weight cells, "exact-small" matching falls back to greedy
EXACT_SMALL_CELLS = 64


@dataclass(frozen=True)
class FSimConfig:
    """Full parameterization of a fractional-simulation run.

    Defaults mirror the usual experimental setup: equal out/in weights
    0.4 each, absolute convergence at 0.01, Jaro-Winkler labels, pruning
    off (alpha 0, beta 0.5 when enabled).
    """

    variant: str = "s"
    w_plus: float = 0.4
    w_minus: float = 0.4
    theta: float = 0.0
    epsilon: float = 0.01
    convergence_mode: str = "absolute"
    max_iterations: int | None = None
    label_fn: LabelSimilarity = field(default_factory=LabelSimilarity)
    ub_enabled: bool = False
    alpha: float = 0.0
    beta: float = 0.5
    matching_mode: str = "greedy"
    workers: int = 1
    max_candidates: int = 20_000_000

    def __post_init__(self):
        object.__setattr__(self, "label_fn", resolve_label_fn(self.label_fn))
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, "
                              f"got {self.variant!r}")
        if not 0.0 <= self.w_plus < 1.0:
            raise ConfigError(f"w_plus must be in [0, 1), got {self.w_plus}")
        if not 0.0 <= self.w_minus < 1.0:
            raise ConfigError(f"w_minus must be in [0, 1), got {self.w_minus}")
        if not 0.0 < self.w_plus + self.w_minus < 1.0:
            raise ConfigError(
                f"w_plus + w_minus must lie in (0, 1), "
                f"got {self.w_plus + self.w_minus}")
        if not 0.0 <= self.theta <= 1.0:
            raise ConfigError(f"theta must be in [0, 1], got {self.theta}")
        if not self.epsilon > 0.0:
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon}")
        if self.convergence_mode not in CONVERGENCE_MODES:
            raise ConfigError(f"convergence_mode must be one of "
                              f"{CONVERGENCE_MODES}, got {self.convergence_mode!r}")
        if self.max_iterations is not None and self.max_iterations < 0:
            raise ConfigError("max_iterations must be >= 0")
        if not 0.0 <= self.alpha < 1.0:
            raise ConfigError(f"alpha must be in [0, 1), got {self.alpha}")
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"beta must be in [0, 1], got {self.beta}")
        if self.matching_mode not in MATCHING_MODES:
            raise ConfigError(f"matching_mode must be one of {MATCHING_MODES}, "
                              f"got {self.matching_mode!r}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.max_candidates < 1:
            raise ConfigError("max_candidates must be >= 1")

    @property
    def resolved_max_iterations(self) -> int:
        """Iteration cap; by default the contraction bound plus slack."""
        if self.max_iterations is not None:
            return self.max_iterations
        w = self.w_plus + self.w_minus
        return math.ceil(math.log(self.epsilon) / math.log(w)) + 5
