"""Feature enhancement: the two candidate streams that repair a
neglected object, plus the substitution, template, and taxonomy
machinery they share."""

from .config import EnhancementConfig
from .explicit import explicit_repair
from .implicit import attention_guided_search, implicit_repair, prune_tree
from .substitution import carry_spans, replacement_span, substitute
from .templates import (
    parse_feature_response,
    render_feature_query,
    render_llm_repair_query,
)
from .wordnet import (
    HyponymNode,
    NounDatabase,
    Synset,
    build_hyponym_tree,
    bundled_wordnet_dir,
    load_noun_database,
)

__all__ = [
    "EnhancementConfig",
    "explicit_repair",
    "attention_guided_search",
    "implicit_repair",
    "prune_tree",
    "carry_spans",
    "replacement_span",
    "substitute",
    "parse_feature_response",
    "render_feature_query",
    "render_llm_repair_query",
    "HyponymNode",
    "NounDatabase",
    "Synset",
    "build_hyponym_tree",
    "bundled_wordnet_dir",
    "load_noun_database",
]
