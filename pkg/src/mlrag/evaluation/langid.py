"""Rank-order (out-of-place) character n-gram language identification.

Profiles are ranked lists of the most frequent 1..4-grams of a seed corpus,
stored one file per language under ``data/langid/profiles``.
"""

from __future__ import annotations

import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from ..errors import DataError

PROFILE_VERSION = 1
PROFILE_SIZE = 400
NGRAM_ORDERS = (1, 2, 3, 4)
UNDETERMINED = "und"
DEFAULT_THRESHOLD = 0.98
MIN_CHARS = 3

DATA_DIR = Path(__file__).resolve().parent.parent / "data" / "langid"

_HEADER = re.compile(r"^# mlrag-langid-profile v(\d+) lang=(\w+)")


def _words(text: str) -> list[str]:
    text = unicodedata.normalize("NFKC", text).casefold()
    cleaned = "".join(ch if (ch.isalpha() or unicodedata.category(ch).startswith("M")) else " "
                      for ch in text)
    return cleaned.split()


def ngram_ranking(text: str, size: int = PROFILE_SIZE) -> list[str]:
    """Most frequent padded n-grams, ties broken by the n-gram itself."""
    counts: Counter[str] = Counter()
    for word in _words(text):
        padded = f"_{word}_"
        for n in NGRAM_ORDERS:
            for i in range(len(padded) - n + 1):
                gram = padded[i:i + n]
                if gram != "_":
                    counts[gram] += 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [g for g, _ in ranked[:size]]


@dataclass(frozen=True)
class Profile:
    lang: str
    ranks: Mapping[str, int]

    @classmethod
    def from_ranking(cls, lang: str, ranking: Iterable[str]) -> "Profile":
        return cls(lang, {g: i for i, g in enumerate(ranking)})


class LanguageProfiles:
    def __init__(self, profiles: Iterable[Profile], size: int = PROFILE_SIZE,
                 threshold: float = DEFAULT_THRESHOLD):
        self.profiles = {p.lang: p for p in profiles}
        if not self.profiles:
            raise DataError("no language profiles loaded")
        self.size = size
        self.threshold = threshold

    @property
    def languages(self) -> list[str]:
        return sorted(self.profiles)

    def distances(self, text: str) -> dict[str, float]:
        """Normalized out-of-place distance per language, in [0, 1]."""
        doc = ngram_ranking(text, self.size)
        if not doc:
            return {lang: 1.0 for lang in self.profiles}
        worst = self.size
        out = {}
        for lang, prof in self.profiles.items():
            ranks = prof.ranks
            d = 0
            for i, g in enumerate(doc):
                r = ranks.get(g)
                d += worst if r is None else min(abs(r - i), worst)
            out[lang] = d / (worst * len(doc))
        return out

    def detect(self, text: str) -> str:
        if len("".join(_words(text))) < MIN_CHARS:
            return UNDETERMINED
        dist = self.distances(text)
        best = min(sorted(dist), key=lambda lang: dist[lang])
        if dist[best] > self.threshold:
            return UNDETERMINED
        return best


def build_profiles(seed_texts: Mapping[str, str], size: int = PROFILE_SIZE) -> LanguageProfiles:
    return LanguageProfiles([Profile.from_ranking(lang, ngram_ranking(text, size))
                             for lang, text in sorted(seed_texts.items())], size)


def write_profile(path: Path, lang: str, ranking: list[str]) -> None:
    lines = [f"# mlrag-langid-profile v{PROFILE_VERSION} lang={lang} n=1-4 size={len(ranking)}"]
    lines.extend(ranking)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def build_profile_files(seed_dir: Path = DATA_DIR / "seed",
                        out_dir: Path = DATA_DIR / "profiles", size: int = PROFILE_SIZE) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for seed in sorted(seed_dir.glob("*.txt")):
        lang = seed.stem
        path = out_dir / f"{lang}.txt"
        write_profile(path, lang, ngram_ranking(seed.read_text(encoding="utf-8"), size))
        written.append(path)
    return written


def load_profiles(directory: str | Path | None = None,
                  threshold: float = DEFAULT_THRESHOLD) -> LanguageProfiles:
    directory = Path(directory) if directory else DATA_DIR / "profiles"
    files = sorted(directory.glob("*.txt")) if directory.is_dir() else []
    if not files:
        raise DataError(f"missing language profiles in {directory}")
    profiles = []
    size = 0
    for path in files:
        lines = path.read_text(encoding="utf-8").split("\n")
        m = _HEADER.match(lines[0])
        if not m or int(m.group(1)) != PROFILE_VERSION:
            raise DataError(f"{path}: not a v{PROFILE_VERSION} language profile")
        ranking = [line for line in lines[1:] if line]
        size = max(size, len(ranking))
        profiles.append(Profile.from_ranking(m.group(2), ranking))
    return LanguageProfiles(profiles, size or PROFILE_SIZE, threshold)


_default: LanguageProfiles | None = None


def default_profiles() -> LanguageProfiles:
    global _default
    if _default is None:
        _default = load_profiles()
    return _default


def detect_language(text: str, profiles: LanguageProfiles | None = None) -> str:
    """ISO code of the closest profile, or ``"und"``."""
    return (profiles or default_profiles()).detect(text)


if __name__ == "__main__":  # regenerate shipped profiles from seed corpora
    for p in build_profile_files():
        print(p)
