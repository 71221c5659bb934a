"""Metrics, language identification and report aggregation."""

from .langid import detect_language, load_profiles
from .metrics import char_3gram_recall, flexible_em, normalize
from .report import (EvalRecord, Report, ResourceRegistry, aggregate, evaluate_result,
                     language_mix)

__all__ = [
    "EvalRecord", "Report", "ResourceRegistry", "aggregate", "char_3gram_recall",
    "detect_language", "evaluate_result", "flexible_em", "language_mix", "load_profiles",
    "normalize",
]
