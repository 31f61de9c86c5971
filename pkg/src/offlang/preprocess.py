"""Rule-based cleaning for tweets in English, Hindi, Marathi and code-mixed text.

Rules run in a fixed order: mention masking, URL removal, emoji removal,
character filtering, whitespace normalization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import regex

from offlang.corpus import Language

DANDA = "।"
DOUBLE_DANDA = "॥"

ENGLISH_PUNCT = frozenset(".,?!")
INDIC_PUNCT = ENGLISH_PUNCT | {DANDA, DOUBLE_DANDA, "|"}

_MENTION = regex.compile(r"@\w+")
_URL = regex.compile(r"(?:https?://|www\.)\S*", regex.IGNORECASE)
_EMOJI = regex.compile(r"[\p{Extended_Pictographic}\U0001F1E6-\U0001F1FF\u200d\ufe0e\ufe0f]")
_WS = regex.compile(r"\s+")
# letters, digits, non-enclosing combining marks, the Devanagari block, whitespace
_KEEP_BASE = r"\p{L}\p{N}\p{Mn}\p{Mc}\u0900-\u097f\s#@"

_MAX_PASSES = 16


def default_punctuation(language: Language) -> frozenset[str]:
    if language in (Language.HINDI, Language.MARATHI):
        return INDIC_PUNCT
    return ENGLISH_PUNCT


@dataclass(frozen=True)
class PreprocessConfig:
    language: Language = Language.ENGLISH
    mention_token: str = "@user"
    kept_punctuation: frozenset[str] | None = None
    keep_hashtags: bool = True
    keep_stopwords: bool = True
    stopwords: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.kept_punctuation is None:
            object.__setattr__(self, "kept_punctuation", default_punctuation(self.language))
        else:
            object.__setattr__(self, "kept_punctuation", frozenset(self.kept_punctuation))
        if not self.mention_token or not regex.fullmatch(r"@?\w+", self.mention_token):
            raise ValueError(f"mention_token must look like '@word' or 'word', got {self.mention_token!r}")
        if self.language in (Language.HINDI, Language.MARATHI):
            missing = {DANDA, "|", ",", "?", "."} - self.kept_punctuation
            if missing:
                raise ValueError(f"Hindi/Marathi punctuation must keep {sorted(missing)}")

    def _drop_pattern(self):
        extra = "".join(regex.escape(c) for c in sorted(self.kept_punctuation))
        keep = _KEEP_BASE if self.keep_hashtags else _KEEP_BASE.replace("#", "")
        return _drop_cache(keep + extra)


_DROP_CACHE: dict[str, regex.Pattern] = {}


def _drop_cache(keep: str) -> regex.Pattern:
    pat = _DROP_CACHE.get(keep)
    if pat is None:
        pat = _DROP_CACHE[keep] = regex.compile(f"[^{keep}]")
    return pat


def mask_mentions(text: str, token: str = "@user") -> str:
    return _MENTION.sub(token, text)


def strip_urls(text: str) -> str:
    return _URL.sub("", text)


def strip_emoji(text: str) -> str:
    """Remove pictographs, regional-indicator flags, ZWJ and emoji variation selectors."""
    return _EMOJI.sub("", text)


def filter_chars(text: str, cfg: PreprocessConfig) -> str:
    return cfg._drop_pattern().sub("", text)


def normalize_ws(text: str) -> str:
    return _WS.sub(" ", text).strip()


def _one_pass(text: str, cfg: PreprocessConfig) -> str:
    text = mask_mentions(text, cfg.mention_token)
    text = strip_urls(text)
    text = strip_emoji(text)
    text = filter_chars(text, cfg)
    text = normalize_ws(text)
    if not cfg.keep_stopwords and cfg.stopwords:
        text = " ".join(w for w in text.split(" ") if w.lower() not in cfg.stopwords)
    return text


def preprocess(text: str, cfg: PreprocessConfig | None = None) -> str:
    """Clean one post.

    Deleting characters can splice a new ``@name`` or ``www.`` token together
    (``"@$bob"`` becomes ``"@bob"``), so the rule chain is repeated until the
    output stops changing. This makes the function idempotent.
    """
    cfg = cfg or PreprocessConfig()
    for _ in range(_MAX_PASSES):
        out = _one_pass(text, cfg)
        if out == text:
            return out
        text = out
    raise RuntimeError("preprocess did not reach a fixed point")  # pragma: no cover


def preprocess_many(texts, cfg: PreprocessConfig | None = None) -> list[str]:
    cfg = cfg or PreprocessConfig()
    return [preprocess(t, cfg) for t in texts]
