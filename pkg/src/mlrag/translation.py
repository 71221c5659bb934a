"""Translation system used for query translation (tRAG) and document
translation (CrossRAG), with a write-through cache shared with the provider
client."""

from __future__ import annotations

import logging
import unicodedata
from dataclasses import dataclass, replace
from typing import Sequence

from . import langs
from .errors import DataError, ProviderError
from .providers import HttpTranslator, MockTranslator, ProviderClient
from .retrieval import RetrievedPassage

logger = logging.getLogger(__name__)

FAIL_RUN = "fail-run"
KEEP_ORIGINAL = "keep-original"


def normalize_for_key(text: str) -> str:
    return unicodedata.normalize("NFC", text).strip()


@dataclass(frozen=True)
class TranslationRequest:
    text: str
    src: str
    tgt: str
    provider_id: str = "mock"

    def __post_init__(self):
        if not self.text.strip():
            raise DataError("translation request has empty text")
        if not langs.is_registered(self.tgt):
            raise DataError(f"unsupported target language {self.tgt!r}")
        if self.src != "auto" and not langs.is_registered(self.src):
            raise DataError(f"unsupported source language {self.src!r}")


@dataclass(frozen=True)
class TranslationResult:
    text: str
    detected_src: str
    cached: bool


class Translator:
    """Binds a translation provider (mock or HTTP) to a provider client."""

    def __init__(self, provider: MockTranslator | HttpTranslator, client: ProviderClient):
        self.provider = provider
        self.client = client
        self.provider_id = provider.provider_id

    def __call__(self, req: TranslationRequest) -> TranslationResult:
        return translate(req, self)

    def _invoke(self, text: str, src: str, tgt: str) -> TranslationResult:
        if isinstance(self.provider, HttpTranslator):
            res = self.provider.request(text, src, tgt)
        else:
            payload = {"text": text, "src": src, "tgt": tgt,
                       "dictionary": self.provider.fingerprint}

            def run():
                out, detected = self.provider.translate(text, src, tgt)
                return {"text": out, "detected_src": detected}

            res = self.client.call_local(self.provider_id, payload, run)
        try:
            return TranslationResult(str(res.payload["text"]),
                                     str(res.payload.get("detected_src", src)), res.cached)
        except (KeyError, TypeError, AttributeError):
            raise ProviderError(f"translator {self.provider_id}: malformed response",
                                request_hash=res.request_hash, stage="translate") from None


def translate(req: TranslationRequest, provider: Translator) -> TranslationResult:
    """Translate one request. Identical languages short-circuit to the input."""
    if req.src == req.tgt:
        return TranslationResult(req.text, req.src, False)
    return provider._invoke(normalize_for_key(req.text), req.src, req.tgt)


def translate_text(text: str, src: str, tgt: str, provider: Translator) -> TranslationResult:
    return translate(TranslationRequest(text, src, tgt, provider.provider_id), provider)


def translate_documents(passages: Sequence[RetrievedPassage], tgt: str, provider: Translator,
                        on_error: str = FAIL_RUN) -> list[RetrievedPassage]:
    """Translate passage evidence text (title + body) into ``tgt``.

    Rank, score and doc id are preserved; ``lang`` becomes ``tgt`` and the
    original language is kept in ``provenance["orig_lang"]``.
    """
    if on_error not in (FAIL_RUN, KEEP_ORIGINAL):
        raise ValueError(f"unknown translation failure policy {on_error!r}")
    out: list[RetrievedPassage] = []
    for p in passages:
        prov = dict(p.provenance)
        prov["orig_lang"] = p.doc.lang
        if p.lang == tgt:
            prov["translated"] = False
            out.append(replace(p, provenance=prov))
            continue
        try:
            res = translate_text(p.text, p.lang, tgt, provider)
        except (ProviderError, DataError) as exc:
            if on_error == FAIL_RUN:
                raise
            logger.warning("keeping untranslated passage %s: %s", p.doc.id, exc)
            prov["translated"] = False
            prov["translation_failed"] = str(exc)
            out.append(replace(p, provenance=prov))
            continue
        prov["translated"] = True
        prov["translation_cached"] = res.cached
        out.append(replace(p, text=res.text, lang=tgt, provenance=prov))
    return out
