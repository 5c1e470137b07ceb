"""Wallet-side defence against blind message attacks.

For every site the user logs into, the guard keeps one template of the
login message: the latest message with its variable fields replaced by
wildcards. A signature request whose message contains some other site's
template raises a red alert naming that site; a request whose message
never mentions the requesting origin raises a yellow alert. The two are
independent.
"""

from __future__ import annotations

import json
import os
import random
import re
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from hashlib import sha256
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .message_model import lcs_pairs, tokenize

__all__ = [
    "WILDCARD_CLASSES",
    "Literal",
    "Wildcard",
    "MessageTemplate",
    "RedAlert",
    "AlertDecision",
    "TemplateStore",
    "StoreError",
    "normalize_origin",
    "template_from_message",
    "extract_template",
    "compile_matcher",
    "check_signature_request",
    "record_login",
    "CorpusSite",
    "guard_corpus",
    "corpus_document",
    "load_corpus",
    "attack_message",
    "build_store",
]

# narrowest first; "any" is the fallback
WILDCARD_CLASSES = {
    "addr": r"0x[0-9a-fA-F]{40}",
    "uuid": r"[0-9a-fA-F]{8}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{12}",
    "dt": r"\d{4}-\d{2}-\d{2}[Tt]\d{2}:\d{2}:\d{2}(?:\.\d+)?(?:[Zz]|[+-]\d{2}:\d{2})",
    "num": r"\d+",
    "any": r"\S+",
}
_FULL = {name: re.compile(pat) for name, pat in WILDCARD_CLASSES.items()}


class StoreError(ValueError):
    pass


@dataclass(frozen=True)
class Literal:
    text: str

    @property
    def is_space(self) -> bool:
        return self.text.isspace()


@dataclass(frozen=True)
class Wildcard:
    cls: str

    def __post_init__(self) -> None:
        if self.cls not in WILDCARD_CLASSES:
            raise ValueError(f"unknown wildcard class {self.cls!r}")

    def accepts(self, token: str) -> bool:
        return _FULL[self.cls].fullmatch(token) is not None


Token = Union[Literal, Wildcard]


def _narrowest(*tokens: str) -> str:
    for name, rx in _FULL.items():
        if all(rx.fullmatch(t) for t in tokens):
            return name
    return "any"


def _now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class MessageTemplate:
    origin_domain: str
    tokens: list[Token]
    updated_at: str = field(default_factory=_now_iso)
    sample_count: int = 1

    def literal_chars(self) -> int:
        return sum(len(t.text) for t in self.tokens if isinstance(t, Literal) and not t.is_space)

    def render(self) -> str:
        """Human-readable form, wildcards shown as ``<cls>``."""
        return "".join(t.text if isinstance(t, Literal) else f"<{t.cls}>" for t in self.tokens)

    def to_dict(self) -> dict:
        merged: list[dict] = []
        for tok in self.tokens:
            if isinstance(tok, Literal):
                if merged and "lit" in merged[-1]:
                    merged[-1]["lit"] += tok.text
                else:
                    merged.append({"lit": tok.text})
            else:
                merged.append({"wc": tok.cls})
        return {"tokens": merged, "updated_at": self.updated_at, "sample_count": self.sample_count}

    @classmethod
    def from_dict(cls, domain: str, data: dict) -> "MessageTemplate":
        tokens: list[Token] = []
        try:
            for item in data["tokens"]:
                if "lit" in item:
                    tokens.extend(Literal(t) for t in tokenize(item["lit"]))
                else:
                    tokens.append(Wildcard(item["wc"]))
            count = int(data.get("sample_count", 1))
        except (KeyError, TypeError, ValueError) as exc:
            raise StoreError(f"bad template for {domain!r}: {exc}") from exc
        if count < 1:
            raise StoreError(f"bad sample_count for {domain!r}")
        return cls(domain, tokens, str(data.get("updated_at", "")), count)


def normalize_origin(origin: str) -> str:
    """Lower-case host without scheme, ``www.``, path or port."""
    host = origin.strip().lower()
    host = re.sub(r"^[a-z][a-z0-9+.-]*://", "", host)
    host = host.split("/", 1)[0]
    host = host.rsplit("@", 1)[-1]
    host = re.sub(r":\d+$", "", host)
    if host.startswith("www."):
        host = host[4:]
    return host


def template_from_message(origin_domain: str, message: str) -> MessageTemplate:
    return MessageTemplate(normalize_origin(origin_domain), [Literal(t) for t in tokenize(message)])


def _token_matches(tok: Token, text: str) -> bool:
    if isinstance(tok, Wildcard):
        return tok.accepts(text)
    if tok.is_space:
        return text.isspace()
    return tok.text == text


def _merge(tok: Token, text: str) -> Token:
    if _token_matches(tok, text):
        return tok
    if text.isspace() or (isinstance(tok, Literal) and tok.is_space):
        # whitespace against a word: keep the new message's shape
        return Literal(text) if text.isspace() else Wildcard("any")
    if isinstance(tok, Literal):
        return Wildcard(_narrowest(tok.text, text))
    return Wildcard("any")


def extract_template(stored: MessageTemplate, new_message: str) -> MessageTemplate:
    """Generalise ``stored`` so that it also covers ``new_message``.

    Same token count: compare slot by slot. Otherwise align on a longest
    common subsequence; unmatched stretches take the new message's shape,
    words becoming generic wildcards.
    """
    new = tokenize(new_message)
    old = stored.tokens
    if len(old) == len(new):
        tokens = [_merge(t, n) for t, n in zip(old, new)]
    else:
        pairs = dict((j, i) for i, j in lcs_pairs(old, new, eq=_token_matches))
        tokens = []
        for j, text in enumerate(new):
            if j in pairs:
                tokens.append(old[pairs[j]])
            elif text.isspace():
                tokens.append(Literal(text))
            else:
                tokens.append(Wildcard("any"))
    return MessageTemplate(stored.origin_domain, tokens, _now_iso(), stored.sample_count + 1)


def compile_matcher(t: MessageTemplate) -> re.Pattern:
    """Unanchored pattern: matches messages that contain the template."""
    parts: list[str] = []
    prev_space = False
    for tok in t.tokens:
        if isinstance(tok, Literal) and tok.is_space:
            if not prev_space:
                parts.append(r"\s+")
            prev_space = True
            continue
        prev_space = False
        parts.append(re.escape(tok.text) if isinstance(tok, Literal) else WILDCARD_CLASSES[tok.cls])
    return re.compile("".join(parts))


@dataclass(frozen=True)
class RedAlert:
    victim_domain: str
    victims: tuple[str, ...]


@dataclass(frozen=True)
class AlertDecision:
    red: Optional[RedAlert]
    yellow: bool

    @property
    def clean(self) -> bool:
        return self.red is None and not self.yellow

    def to_dict(self) -> dict:
        red = None
        if self.red is not None:
            red = {"victim_domain": self.red.victim_domain, "victims": list(self.red.victims)}
        return {"red": red, "yellow": self.yellow}


class TemplateStore:
    """One template per domain, persisted as a single JSON file."""

    def __init__(self, templates: Optional[dict[str, MessageTemplate]] = None) -> None:
        self.templates: dict[str, MessageTemplate] = dict(templates or {})
        self._matchers: dict[str, tuple[MessageTemplate, re.Pattern]] = {}

    def __len__(self) -> int:
        return len(self.templates)

    def __contains__(self, domain: str) -> bool:
        return normalize_origin(domain) in self.templates

    def get(self, domain: str) -> Optional[MessageTemplate]:
        return self.templates.get(normalize_origin(domain))

    def matcher(self, domain: str) -> re.Pattern:
        t = self.templates[domain]
        cached = self._matchers.get(domain)
        if cached is None or cached[0] is not t:
            cached = (t, compile_matcher(t))
            self._matchers[domain] = cached
        return cached[1]

    def record(self, origin: str, message: str) -> MessageTemplate:
        domain = normalize_origin(origin)
        stored = self.templates.get(domain)
        t = template_from_message(domain, message) if stored is None else extract_template(stored, message)
        self.templates[domain] = t
        return t

    def check(self, message: str, origin: str) -> AlertDecision:
        me = normalize_origin(origin)
        hits = []
        for domain, t in self.templates.items():
            if domain == me:
                continue
            if self.matcher(domain).search(message):
                hits.append((t.literal_chars(), domain))
        red = None
        if hits:
            hits.sort(key=lambda h: (-h[0], h[1]))
            red = RedAlert(hits[0][1], tuple(d for _, d in hits))
        yellow = bool(me) and me not in message.lower()
        return AlertDecision(red, yellow)

    # persistence

    def to_json(self) -> str:
        doc = {d: self.templates[d].to_dict() for d in sorted(self.templates)}
        return json.dumps(doc, ensure_ascii=False, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "TemplateStore":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise StoreError(f"store is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise StoreError("store must be a JSON object")
        return cls({d: MessageTemplate.from_dict(d, v) for d, v in doc.items()})

    @classmethod
    def load(cls, path: Union[str, Path]) -> "TemplateStore":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def save(self, path: Union[str, Path]) -> None:
        path = Path(path)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(self.to_json())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def template_sizes(self) -> dict[str, int]:
        return {
            d: len(json.dumps(t.to_dict(), ensure_ascii=False, separators=(",", ":")).encode())
            for d, t in self.templates.items()
        }


def check_signature_request(message: str, origin_domain: str, store: TemplateStore) -> AlertDecision:
    return store.check(message, origin_domain)


def record_login(origin_domain: str, message: str, store: TemplateStore) -> TemplateStore:
    store.record(origin_domain, message)
    return store


# -- evaluation corpus


@dataclass
class CorpusSite:
    label: str
    origin: str
    body_unchecked: bool
    extraction: list[str]
    test: list[str]


def guard_corpus(seed: int = 0, profiles=None, per_set: int = 5) -> list[CorpusSite]:
    """Login messages for each simulated site, from one wallet over time.

    Defaults to the first 25 fixture sites (the login deployments). Each
    site gets ``per_set`` messages for template extraction and as many for
    testing, all generated from a seeded RNG and a synthetic clock.
    """
    from .vulnsim import compose_message, fixture_table2, message_values
    from .wallet_crypto import keypair_from_seed

    if profiles is None:
        profiles = [p for p in fixture_table2() if p.auth_path == "auth"]
    rng = random.Random(seed)
    wallet = keypair_from_seed(sha256(f"w3authkit-guard:{seed}".encode()).digest())
    base = 1_700_000_000.0
    sites = []
    for i, p in enumerate(profiles):
        msgs = []
        for k in range(2 * per_set):
            now = base + i * 7919 + k * 3600 + rng.random() * 600
            msgs.append(compose_message(p, message_values(p, wallet.address_hex, now, rng)))
        unchecked = p.body_check == "none" or not p.message_check
        sites.append(CorpusSite(p.label, p.domain, unchecked, msgs[:per_set], msgs[per_set:]))
    return sites


def corpus_document(sites: Sequence[CorpusSite]) -> str:
    return json.dumps(
        {
            "sites": [
                {
                    "label": s.label,
                    "origin": s.origin,
                    "body_unchecked": s.body_unchecked,
                    "extraction": s.extraction,
                    "test": s.test,
                }
                for s in sites
            ]
        },
        indent=2,
        ensure_ascii=False,
    )


def load_corpus(text: str) -> list[CorpusSite]:
    doc = json.loads(text)
    return [
        CorpusSite(s["label"], s["origin"], bool(s["body_unchecked"]), list(s["extraction"]), list(s["test"]))
        for s in doc["sites"]
    ]


ATTACK_WRAPPER = ("Welcome to Evil Gallery!\n\n", "\n\nSigning is free and grants no permissions.")
ATTACK_DECOY = "Sign to continue."


def attack_message(site: CorpusSite, message: str, embed: bool = False) -> str:
    """What a malicious site would ask the victim to sign.

    Sites that check the body are attacked with their own message, verbatim
    or wrapped in foreign text. Sites that do not check the body let the
    attacker discard the prose entirely and keep only the field lines.
    """
    if site.body_unchecked:
        from .checker import field_lines

        fields = field_lines(message)
        return ATTACK_DECOY + ("\n\n" + fields if fields else "")
    if embed:
        return ATTACK_WRAPPER[0] + message + ATTACK_WRAPPER[1]
    return message


def build_store(sites: Iterable[CorpusSite]) -> TemplateStore:
    store = TemplateStore()
    for s in sites:
        for m in s.extraction:
            store.record(s.origin, m)
    return store
