"""Identifier tokenization and low-level string similarity helpers."""

from __future__ import annotations

import re

# Splits camel-case runs, underscores/punctuation, and digit groups:
# "HTTPServer2" -> ["HTTP", "Server", "2"], "order_item" -> ["order", "item"].
_TOKEN_RE = re.compile(r"[A-Z]+(?![a-z])|[A-Z][a-z]*|[a-z]+|\d+")


def tokenize(label: str) -> tuple[str, ...]:
    """Lower-cased tokens of an identifier-like label."""
    return tuple(t.lower() for t in _TOKEN_RE.findall(label))


def token_set(label: str) -> frozenset[str]:
    return frozenset(tokenize(label))


def normalize(label: str) -> str:
    """Concatenation of the lower-cased tokens ("OrderItem" and "order_item" agree)."""
    return "".join(tokenize(label))


def jaccard(a: frozenset[str] | set[str], b: frozenset[str] | set[str]) -> float:
    """Jaccard overlap; two empty sets count as identical."""
    if not a and not b:
        return 1.0
    union = len(a | b)
    if union == 0:
        return 1.0
    return len(a & b) / union


def levenshtein(a: str, b: str) -> int:
    """Classic edit distance (insert/delete/substitute, unit costs)."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost))
        prev = cur
    return prev[-1]
