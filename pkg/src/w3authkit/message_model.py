"""Decomposition of sign-in messages into their constituent fields.

A login message is free text made of a handful of recognisable fields:
a human statement, the issuing domain and site name, a nonce, and the
optional extension fields (address, version, chain id, timestamps,
request id). :func:`parse_message` locates them by character span;
:func:`detect_variable_spans` finds fields that only reveal themselves
by changing between two messages of the same issuer.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Callable, Iterable, Optional, Sequence

__all__ = [
    "FieldKind",
    "NonceValueKind",
    "Field",
    "ParsedMessage",
    "VariableSpan",
    "NeedMultipleSamples",
    "tokenize",
    "lcs_pairs",
    "classify_nonce_value",
    "is_rfc3339",
    "parse_message",
    "detect_variable_spans",
    "ADDRESS_RE",
    "DOMAIN_RE",
    "UUID_RE",
    "VARIABLE_KINDS",
]


class FieldKind(enum.Enum):
    STATEMENT = "statement"
    DOMAIN = "domain"
    NAME = "name"
    NONCE = "nonce"
    ADDRESS = "address"
    VERSION = "version"
    CHAIN_ID = "chain-id"
    ISSUED_AT = "issued-at"
    EXPIRATION_TIME = "expiration-time"
    NOT_BEFORE = "not-before"
    REQUEST_ID = "request-id"


VARIABLE_KINDS = frozenset(
    {
        FieldKind.NONCE,
        FieldKind.ADDRESS,
        FieldKind.ISSUED_AT,
        FieldKind.EXPIRATION_TIME,
        FieldKind.NOT_BEFORE,
        FieldKind.REQUEST_ID,
    }
)

# kinds that may legitimately occur more than once in one message
_REPEATABLE = frozenset({FieldKind.STATEMENT, FieldKind.DOMAIN})


class NonceValueKind(enum.Enum):
    TIMESTAMP10 = "timestamp10"
    TIMESTAMP13 = "timestamp13"
    DATETIME = "datetime"
    RANDOM = "random"


class NeedMultipleSamples(ValueError):
    pass


ADDRESS_RE = re.compile(r"(?<![0-9A-Za-z])0x[0-9a-fA-F]{40}(?![0-9A-Za-z])")
UUID_RE = re.compile(
    r"[0-9a-fA-F]{8}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{12}"
)
# host labels, a purely alphabetic TLD of >= 2 chars, optional port
DOMAIN_RE = re.compile(
    r"(?<![0-9A-Za-z_.@-])"
    r"(?:[A-Za-z0-9](?:[A-Za-z0-9-]{0,61}[A-Za-z0-9])?\.)+[A-Za-z]{2,63}"
    r"(?::\d{1,5})?"
    r"(?![0-9A-Za-z_-])"
)
_RFC3339_RE = re.compile(
    r"(\d{4})-(\d{2})-(\d{2})[Tt](\d{2}):(\d{2}):(\d{2})(\.\d+)?([Zz]|[+-]\d{2}:\d{2})"
)
_TOKEN_RE = re.compile(r"\s+|\S+")

# label -> kind; the value is the next non-space run after the colon
_LABELLED = [
    (re.compile(r"(?i)\b(?:nonce|timestamp)\s*:[ \t]*\n?[ \t]*(\S+)"), FieldKind.NONCE),
    (re.compile(r"(?i)\bversion\s*:[ \t]*(\S+)"), FieldKind.VERSION),
    (re.compile(r"(?i)\bchain[ _-]?id\s*:[ \t]*(\d+)"), FieldKind.CHAIN_ID),
    (re.compile(r"(?i)\bissued[ _-]?at\s*:[ \t]*\n?[ \t]*(\S+)"), FieldKind.ISSUED_AT),
    (re.compile(r"(?i)\bexpiration[ _-]?time\s*:[ \t]*(\S+)"), FieldKind.EXPIRATION_TIME),
    (re.compile(r"(?i)\bnot[ _-]?before\s*:[ \t]*(\S+)"), FieldKind.NOT_BEFORE),
    (re.compile(r"(?i)\brequest[ _-]?id\s*:[ \t]*(\S+)"), FieldKind.REQUEST_ID),
]

_GREETING_RE = re.compile(
    r"(?:welcome to|connect to|sign in to|sign into|log in to|login to|"
    r"log into|this is|sign in with|authenticate with)\s+"
    r"([A-Z][A-Za-z0-9-]*(?:[ ][A-Z][A-Za-z0-9-]*)?)",
    re.IGNORECASE,
)


def tokenize(text: str) -> list[str]:
    """Whitespace-preserving split: ``"".join(tokenize(t)) == t``."""
    return _TOKEN_RE.findall(text)


def lcs_pairs(
    a: Sequence, b: Sequence, eq: Optional[Callable[[Any, Any], bool]] = None
) -> list[tuple[int, int]]:
    """Index pairs of one longest common subsequence of ``a`` and ``b``.

    ``eq`` replaces ``==`` when elements of the two sides are not directly
    comparable (template tokens against message tokens, say).
    """
    same = eq or (lambda x, y: x == y)
    n, m = len(a), len(b)
    # suffix table so the walk below is forward and greedy-stable
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row, nxt = table[i], table[i + 1]
        ai = a[i]
        for j in range(m - 1, -1, -1):
            best = max(nxt[j], row[j + 1])
            if same(ai, b[j]):
                best = max(best, nxt[j + 1] + 1)
            row[j] = best
    pairs = []
    i = j = 0
    while i < n and j < m:
        if same(a[i], b[j]) and table[i][j] == table[i + 1][j + 1] + 1:
            pairs.append((i, j))
            i += 1
            j += 1
        elif table[i + 1][j] >= table[i][j + 1]:
            i += 1
        else:
            j += 1
    return pairs


def is_rfc3339(token: str) -> bool:
    m = _RFC3339_RE.fullmatch(token)
    if not m:
        return False
    year, month, day, hour, minute, second = (int(g) for g in m.groups()[:6])
    try:
        datetime(year, month, day, hour, minute, min(second, 59))
    except ValueError:
        return False
    if second > 60:
        return False
    off = m.group(8)
    if off[0] in "+-":
        oh, om = int(off[1:3]), int(off[4:6])
        if oh > 23 or om > 59:
            return False
    return True


def classify_nonce_value(token: str) -> NonceValueKind:
    if token.isascii() and token.isdigit():
        if len(token) == 13:
            return NonceValueKind.TIMESTAMP13
        if len(token) == 10:
            return NonceValueKind.TIMESTAMP10
    if is_rfc3339(token):
        return NonceValueKind.DATETIME
    return NonceValueKind.RANDOM


@dataclass(frozen=True)
class Field:
    kind: FieldKind
    value: str
    span: tuple[int, int]


@dataclass(frozen=True)
class ParsedMessage:
    raw: str
    fields: tuple[Field, ...] = ()

    @property
    def body(self) -> str:
        """``raw`` with every variable-field span cut out."""
        out = []
        pos = 0
        for f in self.fields:
            if f.kind in VARIABLE_KINDS:
                out.append(self.raw[pos : f.span[0]])
                pos = f.span[1]
        out.append(self.raw[pos:])
        return "".join(out)

    def reconstruct(self) -> str:
        """Reinsert variable values into :attr:`body`; equals ``raw``."""
        body = self.body
        out = []
        consumed = 0  # chars of body already emitted
        cut = 0  # chars excised so far
        for f in self.fields:
            if f.kind not in VARIABLE_KINDS:
                continue
            at = f.span[0] - cut
            out.append(body[consumed:at])
            out.append(f.value)
            consumed = at
            cut += f.span[1] - f.span[0]
        out.append(body[consumed:])
        return "".join(out)

    def get(self, kind: FieldKind) -> Optional[Field]:
        for f in self.fields:
            if f.kind is kind:
                return f
        return None

    def all(self, kind: FieldKind) -> list[Field]:
        return [f for f in self.fields if f.kind is kind]

    def has(self, kind: FieldKind) -> bool:
        return self.get(kind) is not None

    @property
    def nonce_kind(self) -> Optional[NonceValueKind]:
        f = self.get(FieldKind.NONCE)
        return classify_nonce_value(f.value) if f else None


def _overlaps(span: tuple[int, int], taken: Iterable[tuple[int, int]]) -> bool:
    return any(span[0] < e and s < span[1] for s, e in taken)


def parse_message(
    raw: str,
    expected_domain: Optional[str] = None,
    expected_name: Optional[str] = None,
) -> ParsedMessage:
    """Locate the fields of a sign-in message.

    ``expected_name`` switches name detection from the greeting heuristic to
    a case-insensitive search for that name. ``expected_domain`` is only a
    hint: every authority-shaped substring is reported as a Domain field
    regardless, and the hinted one is found even without a TLD-looking
    suffix (e.g. ``localhost:8080``).
    """
    if raw == "":
        return ParsedMessage(raw="", fields=())

    found: list[Field] = []
    taken: list[tuple[int, int]] = []

    def claim(kind: FieldKind, start: int, end: int) -> None:
        found.append(Field(kind, raw[start:end], (start, end)))
        taken.append((start, end))

    for kind_re, kind in _LABELLED:
        m = kind_re.search(raw)
        if m and not _overlaps(m.span(1), taken):
            claim(kind, *m.span(1))

    for m in ADDRESS_RE.finditer(raw):
        if not _overlaps(m.span(), taken):
            claim(FieldKind.ADDRESS, *m.span())
            break

    # datetimes would otherwise leak host-like fragments such as "00.000Z"
    blocked = list(taken) + [m.span() for m in _RFC3339_RE.finditer(raw)]
    if expected_domain:
        for m in re.finditer(re.escape(expected_domain), raw, re.IGNORECASE):
            if not _overlaps(m.span(), blocked):
                claim(FieldKind.DOMAIN, *m.span())
                blocked.append(m.span())
    for m in DOMAIN_RE.finditer(raw):
        if not _overlaps(m.span(), blocked):
            claim(FieldKind.DOMAIN, *m.span())
            blocked.append(m.span())

    domain_spans = [f.span for f in found if f.kind is FieldKind.DOMAIN]
    if expected_name:
        for m in re.finditer(re.escape(expected_name), raw, re.IGNORECASE):
            if not _overlaps(m.span(), taken) and not _overlaps(m.span(), domain_spans):
                claim(FieldKind.NAME, *m.span())
                break
    else:
        head_end = _end_of_line(raw, _end_of_line(raw, 0) + 1)
        for m in _GREETING_RE.finditer(raw, 0, head_end):
            if not _overlaps(m.span(1), taken) and not _overlaps(m.span(1), domain_spans):
                claim(FieldKind.NAME, *m.span(1))
                break

    found.sort(key=lambda f: f.span)
    found = _with_statements(raw, found)
    return ParsedMessage(raw=raw, fields=tuple(found))


def _end_of_line(text: str, start: int) -> int:
    idx = text.find("\n", start)
    return len(text) if idx < 0 else idx


def _with_statements(raw: str, fields: list[Field]) -> list[Field]:
    out: list[Field] = []
    pos = 0
    for f in fields + [None]:  # type: ignore[list-item]
        gap_end = f.span[0] if f is not None else len(raw)
        gap = raw[pos:gap_end]
        stripped = gap.strip()
        if stripped:
            s = pos + (len(gap) - len(gap.lstrip()))
            out.append(Field(FieldKind.STATEMENT, stripped, (s, s + len(stripped))))
        if f is not None:
            out.append(f)
            pos = f.span[1]
    return out


@dataclass(frozen=True)
class VariableSpan:
    """A token position whose value differs between samples."""

    position: int
    kind: NonceValueKind
    is_nonce: bool
    char_span: tuple[int, int] = field(compare=False)


def detect_variable_spans(messages: Sequence[str]) -> list[VariableSpan]:
    """Token positions (of the first message) that vary across ``messages``.

    Differing address tokens are reported with ``is_nonce=False``. When the
    token counts differ, positions are aligned by LCS and unmatched tokens
    of the first message count as variable.
    """
    if len(messages) < 2:
        raise NeedMultipleSamples("need at least two messages to diff")
    token_lists = [tokenize(m) for m in messages]
    ref = token_lists[0]
    values: dict[int, set[str]] = {}

    for other in token_lists[1:]:
        if len(other) == len(ref):
            pairs = [(i, i) for i in range(len(ref))]
        else:
            pairs = lcs_pairs(ref, other)
        matched = {i for i, _ in pairs}
        for i, j in pairs:
            if ref[i] != other[j]:
                values.setdefault(i, {ref[i]}).add(other[j])
        for i in range(len(ref)):
            if i not in matched:
                values.setdefault(i, {ref[i]})

    offsets = []
    pos = 0
    for tok in ref:
        offsets.append(pos)
        pos += len(tok)

    spans = []
    for i in sorted(values):
        vals = values[i]
        if all(v.isspace() for v in vals):
            continue
        kinds = {classify_nonce_value(v) for v in vals if v}
        kind = kinds.pop() if len(kinds) == 1 else NonceValueKind.RANDOM
        is_addr = all(ADDRESS_RE.fullmatch(v) for v in vals)
        spans.append(
            VariableSpan(
                position=i,
                kind=kind,
                is_nonce=not is_addr,
                char_span=(offsets[i], offsets[i] + len(ref[i])),
            )
        )
    return spans
