"""Configuration and result types for the 2D layout methods."""

from __future__ import annotations

from dataclasses import dataclass, field


class LayoutError(ValueError):
    """Invalid layout configuration or input."""


class DivergenceError(RuntimeError):
    """Optimization produced a non-finite coordinate."""

    def __init__(self, iteration: int):
        super().__init__(f"layout diverged at iteration {iteration}")
        self.iteration = iteration


@dataclass
class TsneSettings:
    perplexity: float = 30.0
    iterations: int = 1000
    learning_rate: float = 200.0
    momentum_early: float = 0.5
    momentum_late: float = 0.8
    momentum_switch_iter: int = 250
    early_exaggeration: float = 12.0
    exaggeration_iters: int = 250
    theta: float = 0.5

    def validate(self) -> None:
        if self.perplexity < 2:
            raise LayoutError(f"perplexity must be >= 2, got {self.perplexity}")
        if not 0.0 <= self.theta <= 1.0:
            raise LayoutError(f"theta must be in [0, 1], got {self.theta}")
        if self.iterations < 1 or self.learning_rate <= 0:
            raise LayoutError("iterations and learning_rate must be positive")


@dataclass
class UmapSettings:
    n_neighbors: int = 15
    min_dist: float = 0.1
    epochs: int = 500
    negative_sample_rate: int = 5

    def validate(self) -> None:
        if self.n_neighbors < 2 or self.epochs < 1 or self.negative_sample_rate < 1:
            raise LayoutError("n_neighbors, epochs, and negative_sample_rate must be positive")
        if self.min_dist < 0:
            raise LayoutError(f"min_dist must be >= 0, got {self.min_dist}")


@dataclass
class LayoutConfig:
    method: str = "tsne"  # "tsne" | "umap"
    random_seed: int = 0
    tsne: TsneSettings = field(default_factory=TsneSettings)
    umap: UmapSettings = field(default_factory=UmapSettings)

    def validate(self) -> None:
        if self.method not in ("tsne", "umap"):
            raise LayoutError(f"unknown layout method {self.method!r}")
        self.tsne.validate()
        self.umap.validate()


@dataclass
class LayoutResult:
    coordinates: dict[str, tuple[float, float]]
    method: str
    objective: float
    trustworthiness: float
    objective_history: list[tuple[int, float]] = field(default_factory=list)

# Exported coordinates are centered and uniformly scaled into this box so the
# viewport index and UI camera work at a stable scale.
EXPORT_HALF_EXTENT = 1000.0
