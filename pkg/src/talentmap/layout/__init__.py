"""2D layout of the aggregated embedding space, with quality metrics."""

from .affinities import AffinityResult, compute_affinities, knn_distances, realized_perplexity
from .bhtree import ForceTree
from .config import (
    DivergenceError,
    EXPORT_HALF_EXTENT,
    LayoutConfig,
    LayoutError,
    LayoutResult,
    TsneSettings,
    UmapSettings,
)
from .formats import read_layout, write_layout
from .metrics import trustworthiness
from .tsne import kl_divergence_exact, run_tsne, tsne_gradient
from .umap import fuzzy_membership_graph, run_umap, smooth_bandwidths

__all__ = [
    "AffinityResult",
    "compute_affinities",
    "knn_distances",
    "realized_perplexity",
    "ForceTree",
    "DivergenceError",
    "EXPORT_HALF_EXTENT",
    "LayoutConfig",
    "LayoutError",
    "LayoutResult",
    "TsneSettings",
    "UmapSettings",
    "read_layout",
    "write_layout",
    "trustworthiness",
    "kl_divergence_exact",
    "run_tsne",
    "tsne_gradient",
    "fuzzy_membership_graph",
    "run_umap",
    "smooth_bandwidths",
]


def run_layout(vectors, config: LayoutConfig) -> LayoutResult:
    """Dispatch to the configured reduction method."""
    if config.method == "umap":
        return run_umap(vectors, config)
    return run_tsne(vectors, config)
