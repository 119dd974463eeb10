"""Small text helpers used across modules."""

import re

_WS_RUN = re.compile(r"[ \t\f\v]+")
_WORD = re.compile(r"[A-Za-z0-9''-]+")
_SENTENCE_END = re.compile(r"[.!?]+(?=\s|$)")


def normalize_ws(text: str) -> str:
    """Trim and collapse internal runs of spaces/tabs; join lines with one space.

    This is the only normalization applied when comparing canonical pattern
    text, so typography (quotes, dashes) is preserved.
    """
    return _WS_RUN.sub(" ", text.replace("\n", " ").replace("\r", " ")).strip()


def tokens(text: str) -> set[str]:
    """Lowercased word-token set, used by similarity scoring."""
    return {m.group(0).lower() for m in _WORD.finditer(text)}


def jaccard(a: str, b: str) -> float:
    """Token-set Jaccard similarity of two texts; 1.0 when both are empty."""
    ta, tb = tokens(a), tokens(b)
    if not ta and not tb:
        return 1.0
    union = ta | tb
    if not union:
        return 0.0
    return len(ta & tb) / len(union)


def sentence_count(text: str) -> int:
    """Approximate sentence count: terminal-punctuation runs at word ends.

    Trailing text without terminal punctuation counts as one sentence.
    """
    stripped = text.strip()
    if not stripped:
        return 0
    count = len(_SENTENCE_END.findall(stripped))
    if stripped[-1] not in ".!?":
        count += 1
    return count


def word_count(text: str) -> int:
    return len(text.split())


def first_sentence(text: str) -> str:
    """Everything up to and excluding the first sentence terminator."""
    stripped = text.strip()
    m = _SENTENCE_END.search(stripped)
    if m:
        return stripped[: m.start()].strip()
    return stripped
