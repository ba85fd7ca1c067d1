"""Structure-aware sketch-to-diagram retrieval toolkit."""

import os

from ._core import (  # noqa: F401
    Index,
    build_generation_request,
    clip_margin,
    cosine_similarity,
    extract_visual_features,
    feature_hash_embedding,
    generate_variants,
    infer_layout,
    info_nce_loss,
    learning_rate_at,
    normalize_record,
    parse_filter_verdict,
    parse_judge_verdict,
    render_svg,
    retrieval_metrics,
    stable_seed,
    synthetic_corpus,
    validate_record,
    variant_loss,
)

__version__ = "0.1.0"


def template_dir() -> str:
    """Directory holding the shipped prompt templates."""
    return os.path.join(os.path.dirname(__file__), "assets", "prompts")
