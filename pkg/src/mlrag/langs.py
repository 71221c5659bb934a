"""Fixed language registry: ISO 639-1 codes, display names, resource classes."""

from __future__ import annotations

LANGUAGE_NAMES: dict[str, str] = {
    "ar": "Arabic",
    "bn": "Bengali",
    "de": "German",
    "en": "English",
    "es": "Spanish",
    "fi": "Finnish",
    "fr": "French",
    "hi": "Hindi",
    "it": "Italian",
    "ja": "Japanese",
    "ko": "Korean",
    "pt": "Portuguese",
    "ru": "Russian",
    "te": "Telugu",
    "th": "Thai",
    "vi": "Vietnamese",
    "zh": "Chinese",
}

# High-resource set follows the CommonCrawl share table; everything else is LR.
HIGH_RESOURCE = frozenset({"en", "ru", "de", "zh", "fr", "ja", "es"})

PIVOT = "en"


def is_registered(code: str) -> bool:
    return code in LANGUAGE_NAMES


def language_name(code: str) -> str:
    return LANGUAGE_NAMES.get(code, code)


def check_code(code: str) -> str:
    if code not in LANGUAGE_NAMES:
        raise ValueError(f"unknown language code {code!r}")
    return code
