"""Text normalization and content-based statement identity.

Normalized text (lowercase, collapsed whitespace, no terminal punctuation) is
the canonical equality used for de-duplication and seen-set membership; raw
text is kept on statements for display.
"""

import hashlib
import re

_WHITESPACE = re.compile(r"\s+")
_TERMINAL_PUNCT = ".!?;:,"


def normalize(text: str) -> str:
    collapsed = _WHITESPACE.sub(" ", text.strip()).lower()
    return collapsed.rstrip(_TERMINAL_PUNCT + " ")


def tokens(text: str) -> list[str]:
    norm = normalize(text)
    return norm.split(" ") if norm else []


def content_id(text: str) -> str:
    """Stable id for a statement: hash of its normalized text.

    Two statements with the same normalized text share an id, which makes
    seen-sets order-independent.
    """
    return hashlib.sha1(normalize(text).encode("utf-8")).hexdigest()[:16]
