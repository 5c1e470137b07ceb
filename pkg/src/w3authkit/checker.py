"""Dynamic checks for Web3 login deployments.

Three checkers drive a target's QUERY/AUTH/ACCESS requests with crafted
payloads and watch whether a session token still comes back:

* the message checker signs a random string, a message stripped down to
  its variable fields, and a genuine message with a random prefix;
* the nonce checker replays, cross-signs, forges and strips the nonce in
  a fixed five-AUTH sequence and reads the nonce type off the pattern of
  successes;
* the signature checker sends an empty signature, a zeroed signature and
  a genuine signature under somebody else's address.

Every probe starts from a fresh QUERY. A token counts as issued when the
target's token key binds to a non-empty value and, if the target has an
ACCESS request, that request answers 2xx.
"""

from __future__ import annotations

import enum
import hashlib
import secrets
import string
import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Iterable, Optional, Sequence

import requests

from .flexrequest import (
    Policy,
    RateLimiter,
    SessionContext,
    TargetConfig,
    TraceEntry,
    resolve_template,
    run_item,
)
from .message_model import (
    ADDRESS_RE,
    FieldKind,
    NonceValueKind,
    classify_nonce_value,
    detect_variable_spans,
    parse_message,
    tokenize,
    UUID_RE,
)
from .wallet_crypto import KeyPair, keypair_from_seed, personal_sign

__all__ = [
    "Verdict",
    "NonceKind",
    "RiskLevel",
    "Outcome",
    "Evidence",
    "Finding",
    "ScanReport",
    "TargetBroken",
    "NotCombinable",
    "Scanner",
    "classify_risk",
    "flag_replay",
    "flag_bmma",
    "nonce_kind_from_pattern",
    "craft_bmma_message",
    "field_lines",
    "similar_value",
    "key_pool",
]


class Verdict(str, enum.Enum):
    PASS = "pass"
    V2 = "V2"
    V3 = "V3"
    FAIL = "fail"
    NOT_APPLICABLE = "N/A"
    INCONCLUSIVE = "inconclusive"


class NonceKind(str, enum.Enum):
    ONE_TIME = "one-time"
    TEMPORARY = "temporary"
    TIME_BASED = "time-based"
    INVALID_NONCE = "invalid-nonce"
    NO_NONCE = "no-nonce"


class RiskLevel(enum.IntEnum):
    LOW = 0
    MEDIUM = 1
    HIGH = 2
    CRITICAL = 3

    @property
    def letter(self) -> str:
        return self.name[0]


class Outcome(str, enum.Enum):
    TOKEN = "token"
    REJECTED = "rejected"
    INCONCLUSIVE = "inconclusive"


class TargetBroken(RuntimeError):
    """An honest login failed, so nothing can be inferred from rejections."""


class NotCombinable(ValueError):
    pass


@dataclass
class Evidence:
    probe: str
    outcome: Outcome
    status: Optional[int] = None
    digest: str = ""
    note: str = ""

    def to_dict(self) -> dict:
        out = {"probe": self.probe, "outcome": self.outcome.value, "status": self.status}
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class Finding:
    has_domain: bool = False
    has_name: bool = False
    has_nonce: bool = False
    message: Verdict = Verdict.PASS
    body: Verdict = Verdict.PASS
    nonce: Verdict = Verdict.NOT_APPLICABLE
    signature: Verdict = Verdict.PASS
    address: Verdict = Verdict.PASS
    nonce_kind: Optional[NonceKind] = None
    evidence: list[Evidence] = field(default_factory=list)

    @property
    def inconclusive(self) -> bool:
        verdicts = (self.message, self.body, self.nonce, self.signature, self.address)
        return Verdict.INCONCLUSIVE in verdicts or self.nonce_kind is None

    def verdicts(self) -> dict:
        return {
            "message_fields": {
                "has_domain": self.has_domain,
                "has_name": self.has_name,
                "has_nonce": self.has_nonce,
            },
            "server_checks": {
                "message": self.message.value,
                "body": self.body.value,
                "nonce": self.nonce.value,
                "signature": self.signature.value,
                "address": self.address.value,
            },
            "nonce_kind": self.nonce_kind.value if self.nonce_kind else None,
        }


@dataclass
class ScanReport:
    label: str
    finding: Finding
    risk: RiskLevel
    replay_risk: bool
    bmma_risk: bool
    timing: dict[str, float] = field(default_factory=dict)
    requests: int = 0
    error: Optional[str] = None

    @property
    def inconclusive(self) -> bool:
        return self.error is not None or self.finding.inconclusive


# -- pure classification


def classify_risk(f: Finding) -> RiskLevel:
    """Worst applicable level across the four rules."""
    if f.message is Verdict.V2 or f.signature is Verdict.FAIL or f.address is Verdict.FAIL:
        return RiskLevel.CRITICAL
    if (not f.has_domain and not f.has_name) or f.body is Verdict.V2:
        return RiskLevel.HIGH
    if (not f.has_domain and f.has_name) or f.body is Verdict.V3:
        return RiskLevel.MEDIUM
    return RiskLevel.LOW


def flag_replay(f: Finding) -> bool:
    return f.nonce_kind in (NonceKind.NO_NONCE, NonceKind.INVALID_NONCE)


def flag_bmma(f: Finding) -> bool:
    return f.body in (Verdict.V2, Verdict.V3) or f.message is Verdict.V2


def nonce_kind_from_pattern(pattern: Sequence[bool]) -> tuple[NonceKind, str]:
    """Map the successes of the five AUTH requests to a nonce type.

    The sequence stops at the first failure, so a pattern is some run of
    successes optionally followed by one failure. A failure at the third
    request (cross-address reuse) is not in the reference table; it is
    read as a record-based temporary nonce bound to its address.
    """
    if not pattern or not pattern[0]:
        raise TargetBroken("first AUTH with an honest message failed")
    ok = 0
    for passed in pattern:
        if not passed:
            break
        ok += 1
    if ok == 1:
        return NonceKind.ONE_TIME, ""
    if ok == 2:
        return NonceKind.TEMPORARY, "nonce rejected for a second address; treated as address-bound temporary"
    if ok == 3:
        return NonceKind.TEMPORARY, ""
    if ok == 4:
        return NonceKind.TIME_BASED, ""
    return NonceKind.INVALID_NONCE, ""


# -- message surgery helpers

_FIELD_KINDS = frozenset(
    {
        FieldKind.NONCE,
        FieldKind.ADDRESS,
        FieldKind.VERSION,
        FieldKind.CHAIN_ID,
        FieldKind.ISSUED_AT,
        FieldKind.EXPIRATION_TIME,
        FieldKind.NOT_BEFORE,
        FieldKind.REQUEST_ID,
    }
)


def _token_offsets(tokens: Sequence[str]) -> list[int]:
    out, pos = [], 0
    for tok in tokens:
        out.append(pos)
        pos += len(tok)
    return out


def field_lines(message: str, variable_positions: Iterable[int] = (), ref_token_count: int = -1) -> str:
    """The lines of ``message`` that carry fields, with the prose removed.

    Labelled fields are found by :func:`parse_message`; ``variable_positions``
    (token indices from a cross-message diff) add unlabelled ones when the
    message has ``ref_token_count`` tokens. A value sitting alone on its
    line keeps the label line above it.
    """
    lines = message.split("\n")
    starts = []
    pos = 0
    for line in lines:
        starts.append(pos)
        pos += len(line) + 1

    def line_of(offset: int) -> int:
        idx = 0
        for i, s in enumerate(starts):
            if s <= offset:
                idx = i
        return idx

    keep: set[int] = set()
    parsed = parse_message(message)
    offsets = [f.span[0] for f in parsed.fields if f.kind in _FIELD_KINDS]
    tokens = tokenize(message)
    if len(tokens) == ref_token_count:
        tok_off = _token_offsets(tokens)
        offsets.extend(tok_off[i] for i in variable_positions if i < len(tokens))
    for off in offsets:
        li = line_of(off)
        keep.add(li)
        if lines[li][: off - starts[li]].strip() == "" and li > 0:
            keep.add(li - 1)
    return "\n".join(lines[i] for i in sorted(keep))


def _iso_now(delta: float = 0.0) -> str:
    dt = datetime.now(timezone.utc) + timedelta(seconds=delta)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.") + f"{dt.microsecond // 1000:03d}Z"


def similar_value(value: str, shift: float = 0.0) -> str:
    """A fabricated value shaped like ``value`` (time-like values use now + shift)."""
    kind = classify_nonce_value(value) if value else NonceValueKind.RANDOM
    now = time.time() + shift
    if kind is NonceValueKind.TIMESTAMP13:
        return str(int(now * 1000))
    if kind is NonceValueKind.TIMESTAMP10:
        return str(int(now))
    if kind is NonceValueKind.DATETIME:
        return _iso_now(shift)
    if UUID_RE.fullmatch(value):
        return str(uuid.uuid4())
    if value.isdigit():
        return "".join(secrets.choice(string.digits) for _ in range(len(value)))
    alphabet = "0123456789abcdef" if all(c in string.hexdigits for c in value) else string.ascii_letters + string.digits
    if value and value.isupper():
        alphabet = alphabet.upper()
    return "".join(secrets.choice(alphabet) for _ in range(max(len(value), 8)))


def _random_text(n: int) -> str:
    return "".join(secrets.choice(string.ascii_letters + string.digits) for _ in range(n))


def key_pool(seed: int, n: int = 3) -> list[KeyPair]:
    """Deterministic test wallets derived from ``seed``."""
    return [
        keypair_from_seed(hashlib.sha256(f"w3authkit:{seed}:{i}".encode()).digest())
        for i in range(n)
    ]


# -- probing


class _Inconclusive(Exception):
    pass


@dataclass
class _Nonce:
    position: int
    ref_tokens: int
    labelled: bool
    kind: NonceValueKind


class Scanner:
    """Runs the checkers against targets with a fixed wallet pool.

    One scanner per thread: the request counter is not synchronised.
    """

    def __init__(
        self,
        policy: Policy = Policy(),
        keys: Optional[Sequence[KeyPair]] = None,
        seed: int = 0,
        limiter: Optional[RateLimiter] = None,
        http: Optional[requests.Session] = None,
    ) -> None:
        self.policy = policy
        self.keys = list(keys) if keys is not None else key_pool(seed, 3)
        if len(self.keys) < 2:
            raise ValueError("need at least two wallets")
        self.limiter = limiter
        self.http = http
        self.requests = 0

    # plumbing

    def _run(self, item, session: SessionContext, local) -> TraceEntry:
        entry = run_item(item, session, local, self.policy, self.limiter, self.http)
        if entry.request is not None:
            self.requests += 1
        return entry

    def fresh_message(self, target: TargetConfig, key: KeyPair) -> tuple[str, SessionContext]:
        """QUERY as ``key`` and return the message the front end would sign."""
        session = SessionContext()
        local = {"addr": key.address_hex}
        if target.query is not None:
            entry = self._run(target.query, session, local)
            if entry.error or entry.status is None or entry.status >= 400:
                raise _Inconclusive(entry.error or f"QUERY answered {entry.status}")
        msg = session.bindings.get("msg")
        if msg is None:
            template = target.auth.inputs.get("msg")
            if template is None:
                raise _Inconclusive("QUERY produced no message and AUTH has no message template")
            msg = resolve_template(template, target.auth, session, local)
        return msg, session

    def auth(
        self,
        target: TargetConfig,
        session: SessionContext,
        message: str,
        sig: str,
        addr: str,
        extra: Optional[dict] = None,
    ) -> tuple[Outcome, Optional[int], str]:
        s = session.fork(drop=[target.token_key])
        local = {"addr": addr, "msg": message, "sig": sig}
        if extra:
            local.update(extra)
        entry = self._run(target.auth, s, local)
        digest = ""
        if entry.request is not None:
            digest = hashlib.sha256(entry.request.body.encode()).hexdigest()[:16]
        if entry.error is not None or entry.status is None:
            return Outcome.INCONCLUSIVE, None, digest
        token = s.bindings.get(target.token_key)
        if not token:
            return Outcome.REJECTED, entry.status, digest
        if target.access is not None:
            acc = self._run(target.access, s, {})
            if acc.error is not None or acc.status is None:
                return Outcome.INCONCLUSIVE, entry.status, digest
            if not 200 <= acc.status < 300:
                return Outcome.REJECTED, acc.status, digest
            shown = {a.lower() for a in ADDRESS_RE.findall(acc.response_body or "")}
            if shown and addr.lower() not in shown:
                return Outcome.REJECTED, acc.status, digest
        return Outcome.TOKEN, entry.status, digest

    def _probe(
        self,
        finding: Finding,
        name: str,
        target: TargetConfig,
        session: SessionContext,
        message: str,
        sig: str,
        addr: str,
        extra: Optional[dict] = None,
        note: str = "",
    ) -> Outcome:
        outcome, status, digest = self.auth(target, session, message, sig, addr, extra)
        finding.evidence.append(Evidence(name, outcome, status, digest, note))
        return outcome

    # message checker

    def check_message(self, target: TargetConfig, finding: Optional[Finding] = None) -> Finding:
        f = finding or Finding()
        a, b = self.keys[0], self.keys[1]
        try:
            m_a, _ = self.fresh_message(target, a)
            m_b, _ = self.fresh_message(target, b)
        except _Inconclusive as exc:
            f.evidence.append(Evidence("message:query", Outcome.INCONCLUSIVE, note=str(exc)))
            f.message = f.body = Verdict.INCONCLUSIVE
            return f
        parsed = parse_message(m_a, expected_domain=target.host or None, expected_name=target.expected_name)
        f.has_domain = parsed.has(FieldKind.DOMAIN)
        f.has_name = parsed.has(FieldKind.NAME)
        variable = [s.position for s in detect_variable_spans([m_a, m_b])]
        ref_count = len(tokenize(m_a))

        outcomes = {}
        for probe in ("random-message", "empty-body", "prefixed-body"):
            try:
                msg, session = self.fresh_message(target, a)
            except _Inconclusive as exc:
                f.evidence.append(Evidence(f"message:{probe}", Outcome.INCONCLUSIVE, note=str(exc)))
                outcomes[probe] = Outcome.INCONCLUSIVE
                continue
            if probe == "random-message":
                payload = _random_text(32)
            elif probe == "empty-body":
                payload = field_lines(msg, variable, ref_count)
            else:
                payload = _random_text(8) + msg
            sig = personal_sign(payload, a).hex
            outcomes[probe] = self._probe(f, f"message:{probe}", target, session, payload, sig, a.address_hex)

        f.message = _verdict(outcomes["random-message"], Verdict.V2)
        if outcomes["empty-body"] is Outcome.TOKEN:
            f.body = Verdict.V2
        elif outcomes["prefixed-body"] is Outcome.TOKEN:
            f.body = Verdict.V3
        elif Outcome.INCONCLUSIVE in (outcomes["empty-body"], outcomes["prefixed-body"]):
            f.body = Verdict.INCONCLUSIVE
        else:
            f.body = Verdict.PASS
        return f

    # nonce checker

    def _locate_nonce(self, target: TargetConfig) -> Optional[_Nonce]:
        m_a, _ = self.fresh_message(target, self.keys[0])
        m_b, _ = self.fresh_message(target, self.keys[1])
        tokens = tokenize(m_a)
        labelled = parse_message(m_a).get(FieldKind.NONCE)
        if labelled is not None:
            offsets = _token_offsets(tokens)
            position = offsets.index(labelled.span[0])
            return _Nonce(position, len(tokens), True, classify_nonce_value(labelled.value))
        spans = [s for s in detect_variable_spans([m_a, m_b]) if s.is_nonce]
        if not spans:
            return None
        return _Nonce(spans[0].position, len(tokens), False, spans[0].kind)

    @staticmethod
    def _nonce_slot(message: str, nonce: _Nonce) -> tuple[int, int]:
        if nonce.labelled:
            f = parse_message(message).get(FieldKind.NONCE)
            if f is not None:
                return f.span
        tokens = tokenize(message)
        if len(tokens) != nonce.ref_tokens:
            raise _Inconclusive("message shape changed between queries")
        start = _token_offsets(tokens)[nonce.position]
        return start, start + len(tokens[nonce.position])

    def check_nonce(self, target: TargetConfig, finding: Optional[Finding] = None) -> Finding:
        f = finding or Finding()
        a, b = self.keys[0], self.keys[1]
        try:
            nonce = self._locate_nonce(target)
        except _Inconclusive as exc:
            f.evidence.append(Evidence("nonce:query", Outcome.INCONCLUSIVE, note=str(exc)))
            f.nonce = Verdict.INCONCLUSIVE
            f.nonce_kind = None
            return f
        if nonce is None:
            f.has_nonce = False
            f.nonce = Verdict.NOT_APPLICABLE
            f.nonce_kind = NonceKind.NO_NONCE
            f.evidence.append(Evidence("nonce:diff", Outcome.REJECTED, note="no variable field besides the address"))
            return f
        f.has_nonce = True

        pattern: list[bool] = []
        try:
            # 1: honest login
            m1, s1 = self.fresh_message(target, a)
            sig1 = personal_sign(m1, a).hex
            o = self._probe(f, "nonce:1-honest", target, s1, m1, sig1, a.address_hex)
            pattern.append(self._ok(o))
            # 2: replay the same request
            if pattern[-1]:
                o = self._probe(f, "nonce:2-replay", target, s1, m1, sig1, a.address_hex)
                pattern.append(self._ok(o))
            # 3: message issued to another address, signed by the first
            if pattern[-1]:
                m3, s3 = self.fresh_message(target, b)
                o = self._probe(
                    f, "nonce:3-cross-address", target, s3, m3, personal_sign(m3, a).hex, a.address_hex
                )
                pattern.append(self._ok(o))
            # 4: forged look-alike nonce
            if pattern[-1]:
                m4, s4 = self.fresh_message(target, a)
                start, end = self._nonce_slot(m4, nonce)
                forged = similar_value(m4[start:end])
                m4 = m4[:start] + forged + m4[end:]
                note = ""
                if classify_nonce_value(forged) is not NonceValueKind.RANDOM:
                    note = "forged value is a current timestamp; temporary vs time-based rests on this step"
                o = self._probe(
                    f, "nonce:4-forged", target, s4, m4, personal_sign(m4, a).hex, a.address_hex,
                    extra={"nonce": forged}, note=note,
                )
                pattern.append(self._ok(o))
            # 5: nonce removed
            if pattern[-1]:
                m5, s5 = self.fresh_message(target, a)
                start, end = self._nonce_slot(m5, nonce)
                m5 = m5[:start] + m5[end:]
                o = self._probe(
                    f, "nonce:5-removed", target, s5, m5, personal_sign(m5, a).hex, a.address_hex,
                    extra={"nonce": ""},
                )
                pattern.append(self._ok(o))
        except _Inconclusive as exc:
            f.evidence.append(Evidence("nonce:sequence", Outcome.INCONCLUSIVE, note=str(exc)))
            f.nonce = Verdict.INCONCLUSIVE
            f.nonce_kind = None
            return f

        kind, note = nonce_kind_from_pattern(pattern)
        if note:
            f.evidence.append(Evidence("nonce:pattern", Outcome.REJECTED, note=note))
        f.nonce_kind = kind
        f.nonce = Verdict.PASS
        if kind is NonceKind.INVALID_NONCE:
            f.nonce = self._invalid_nonce_verdict(target, f, nonce)
        return f

    @staticmethod
    def _ok(outcome: Outcome) -> bool:
        if outcome is Outcome.INCONCLUSIVE:
            raise _Inconclusive("AUTH request did not complete")
        return outcome is Outcome.TOKEN

    def _invalid_nonce_verdict(self, target: TargetConfig, f: Finding, nonce: _Nonce) -> Verdict:
        """V3 if a time-like nonce is checked at all (future values refused), else V2."""
        if nonce.kind is NonceValueKind.RANDOM:
            return Verdict.V2
        a = self.keys[0]
        try:
            m, s = self.fresh_message(target, a)
            start, end = self._nonce_slot(m, nonce)
            future = similar_value(m[start:end], shift=86400.0)
            m = m[:start] + future + m[end:]
            o = self._probe(
                f, "nonce:future-timestamp", target, s, m, personal_sign(m, a).hex, a.address_hex,
                extra={"nonce": future},
            )
        except _Inconclusive as exc:
            f.evidence.append(Evidence("nonce:future-timestamp", Outcome.INCONCLUSIVE, note=str(exc)))
            return Verdict.V2
        return Verdict.V3 if o is Outcome.REJECTED else Verdict.V2

    # signature checker

    def check_signature(self, target: TargetConfig, finding: Optional[Finding] = None) -> Finding:
        f = finding or Finding()
        a, b = self.keys[0], self.keys[1]
        outcomes = {}
        for probe in ("null-signature", "invalid-signature", "other-address"):
            try:
                msg, session = self.fresh_message(target, a)
            except _Inconclusive as exc:
                f.evidence.append(Evidence(f"signature:{probe}", Outcome.INCONCLUSIVE, note=str(exc)))
                outcomes[probe] = Outcome.INCONCLUSIVE
                continue
            addr = a.address_hex
            if probe == "null-signature":
                sig = ""
            elif probe == "invalid-signature":
                sig = "0x" + "00" * 64 + "1b"
            else:
                sig = personal_sign(msg, a).hex
                addr = b.address_hex
            outcomes[probe] = self._probe(f, f"signature:{probe}", target, session, msg, sig, addr)

        sig_outcomes = (outcomes["null-signature"], outcomes["invalid-signature"])
        if Outcome.TOKEN in sig_outcomes:
            f.signature = Verdict.FAIL
        elif Outcome.INCONCLUSIVE in sig_outcomes:
            f.signature = Verdict.INCONCLUSIVE
        else:
            f.signature = Verdict.PASS
        f.address = _verdict(outcomes["other-address"], Verdict.FAIL)
        return f

    # expiry measurement

    def probe_nonce_expiry(
        self,
        target: TargetConfig,
        schedule: Sequence[float],
        nonce_kind: NonceKind,
        sleep=time.sleep,
    ) -> Optional[float]:
        """Replay one signed message after each delay; last delay that still worked.

        Only meaningful for nonces that can be reused for a while.
        """
        if nonce_kind not in (NonceKind.TEMPORARY, NonceKind.TIME_BASED):
            raise ValueError(f"expiry probing needs a temporary or time-based nonce, not {nonce_kind.value}")
        if not schedule:
            return None
        a = self.keys[0]
        msg, session = self.fresh_message(target, a)
        sig = personal_sign(msg, a).hex
        start = time.monotonic()
        bound = None
        for delay in sorted(schedule):
            wait = start + delay - time.monotonic()
            if wait > 0:
                sleep(wait)
            outcome, _, _ = self.auth(target, session, msg, sig, a.address_hex)
            if outcome is not Outcome.TOKEN:
                break
            bound = delay
        return bound

    # full scan

    def scan(self, target: TargetConfig) -> ScanReport:
        before = self.requests
        f = Finding()
        timing = {}
        error = None
        for name, check in (
            ("message", self.check_message),
            ("nonce", self.check_nonce),
            ("signature", self.check_signature),
        ):
            t0 = time.monotonic()
            try:
                check(target, f)
            except TargetBroken as exc:
                error = str(exc)
                f.nonce = Verdict.INCONCLUSIVE
                f.nonce_kind = None
                f.evidence.append(Evidence(f"{name}:broken", Outcome.INCONCLUSIVE, note=str(exc)))
            timing[name] = time.monotonic() - t0
        return ScanReport(
            label=target.label,
            finding=f,
            risk=classify_risk(f),
            replay_risk=flag_replay(f),
            bmma_risk=flag_bmma(f),
            timing=timing,
            requests=self.requests - before,
            error=error,
        )


def _verdict(outcome: Outcome, bad: Verdict) -> Verdict:
    if outcome is Outcome.TOKEN:
        return bad
    if outcome is Outcome.INCONCLUSIVE:
        return Verdict.INCONCLUSIVE
    return Verdict.PASS


DEFAULT_DECOY = "Welcome! Please sign this message to log in."


def craft_bmma_message(
    findings: Sequence[tuple[TargetConfig, Finding]],
    genuine_messages: dict[str, str],
    decoy: str = DEFAULT_DECOY,
) -> str:
    """One message meant to pass every listed target's verification.

    Targets whose body check is mere containment contribute their genuine
    message verbatim; targets that do not check the body contribute only
    their field lines. ``genuine_messages`` maps target label to a fresh
    message issued for the victim's address.
    """
    if not findings:
        raise NotCombinable("no targets to combine")
    embedded, fields_only = [], []
    for target, f in findings:
        if f.message is Verdict.V2 or f.body is Verdict.V2:
            fields_only.append(target)
        elif f.body is Verdict.V3:
            embedded.append(target)
        else:
            raise NotCombinable(f"{target.label} checks its message body exactly")
    parts = [decoy]
    for t in embedded:
        parts.append(genuine_messages[t.label])
    for t in fields_only:
        lines = field_lines(genuine_messages[t.label])
        if lines:
            parts.append(lines)
    return "\n\n".join(parts)
