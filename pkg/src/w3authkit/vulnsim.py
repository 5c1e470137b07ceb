"""Reference login servers with switchable verification flaws.

Each :class:`VulnProfile` describes one simulated site: what its sign-in
message contains and which checks its back end performs when the signed
message comes back. :class:`SimServer` hosts any number of profiles on one
port under ``/p/<label>/``::

    POST /p/<label>/query    {"address": "0x.."} -> {"data":{"auth":{"message"|"nonce": ..}}}
    POST /p/<label>/auth     {"address","message","signature"[,"nonce"]}
                             -> {"data":{"auth":{"token": ..}}} | 401 {"error":{"stage": ..}}
    POST /p/<label>/update   same as /auth (profile-update flows)
    GET  /p/<label>/access   Authorization: Bearer <token> -> {"data":{"address": ..}} | 401

The address may also arrive in an ``x-viewer-addr`` header.
"""

from __future__ import annotations

import json
import random
import re
import secrets
import threading
import time
import uuid
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timedelta, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, Optional
from urllib.parse import urlsplit

from .message_model import DOMAIN_RE, is_rfc3339
from .wallet_crypto import InvalidSignature, parse_address, recover_address

__all__ = [
    "NONCE_KINDS",
    "BODY_CHECKS",
    "VulnProfile",
    "NonceRecord",
    "ServerState",
    "AuthResult",
    "SimulatedSite",
    "SimServer",
    "compose_message",
    "frontend_template",
    "fixture_table2",
    "table1_profiles",
    "load_profiles",
    "dump_profiles",
    "target_document",
    "format_nonce",
    "parse_timestamp",
]

NONCE_KINDS = ("none", "one-time", "temporary", "time-based", "unchecked")
BODY_CHECKS = ("exact", "contains", "none")
NONCE_FORMATS = ("uuid", "hex", "digits", "timestamp10", "timestamp13", "datetime")
QUERY_MODES = ("message", "nonce", "none")

_EXT_LABELS = {
    "version": ("Web3 Token Version", None),
    "chain-id": ("Chain ID", None),
    "issued-at": ("Issued At", "issued-at"),
    "expiration-time": ("Expiration Time", "expiration-time"),
}
_EXT_ORDER = ("version", "chain-id")
_EXT_ORDER_AFTER_NONCE = ("issued-at", "expiration-time")
_FUTURE_SKEW = 30.0


@dataclass
class VulnProfile:
    label: str
    domain: str = "example.org"
    name: str = "Example"
    include_domain: bool = True
    include_name: bool = True
    statement: str = "Sign this message to log in."
    nonce_kind: str = "one-time"
    nonce_format: str = "uuid"
    nonce_label: str = "Nonce"
    nonce_ttl: float = 2.0
    # None means "no expiry": only timestamps from the future are refused
    time_window: Optional[float] = 60.0
    body_check: str = "exact"
    message_check: bool = True
    sig_check: bool = True
    addr_check: bool = True
    token_ttl: float = 3600.0
    include_address: bool = False
    address_label: str = "Wallet address"
    field_separator: str = ": "
    ext_fields: list[str] = field(default_factory=list)
    query_mode: str = "message"
    auth_path: str = "auth"
    row: Optional[int] = None
    category: str = ""

    def __post_init__(self) -> None:
        if self.nonce_kind not in NONCE_KINDS:
            raise ValueError(f"{self.label}: unknown nonce_kind {self.nonce_kind!r}")
        if self.body_check not in BODY_CHECKS:
            raise ValueError(f"{self.label}: unknown body_check {self.body_check!r}")
        if self.nonce_format not in NONCE_FORMATS:
            raise ValueError(f"{self.label}: unknown nonce_format {self.nonce_format!r}")
        if self.query_mode not in QUERY_MODES:
            raise ValueError(f"{self.label}: unknown query_mode {self.query_mode!r}")
        if self.query_mode == "nonce" and self.nonce_kind == "none":
            raise ValueError(f"{self.label}: nonce query mode needs a nonce")
        if self.query_mode == "none" and self.nonce_kind in ("one-time", "temporary"):
            raise ValueError(f"{self.label}: record-based nonces need a QUERY endpoint")
        unknown = set(self.ext_fields) - set(_EXT_LABELS)
        if unknown:
            raise ValueError(f"{self.label}: unknown ext fields {sorted(unknown)}")

    @classmethod
    def from_dict(cls, data: dict) -> "VulnProfile":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown profile keys: {sorted(extra)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)


# -- message composition


def _iso(ts: float) -> str:
    dt = datetime.fromtimestamp(ts, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.") + f"{dt.microsecond // 1000:03d}Z"


def format_nonce(fmt: str, now: float, rng: random.Random | None = None) -> str:
    rng = rng or random.SystemRandom()
    if fmt == "uuid":
        return str(uuid.UUID(int=rng.getrandbits(128), version=4))
    if fmt == "hex":
        return "%032x" % rng.getrandbits(128)
    if fmt == "digits":
        return str(rng.randrange(10_000_000, 100_000_000))
    if fmt == "timestamp10":
        return str(int(now))
    if fmt == "timestamp13":
        return str(int(now * 1000))
    return _iso(now)


def parse_timestamp(value: str) -> Optional[float]:
    """Seconds since the epoch for 10/13-digit or RFC 3339 values."""
    if value.isdigit() and len(value) == 10:
        return float(value)
    if value.isdigit() and len(value) == 13:
        return int(value) / 1000.0
    if is_rfc3339(value):
        text = value.replace("z", "Z").replace("Z", "+00:00")
        text = text[:10] + "T" + text[11:]
        try:
            return datetime.fromisoformat(_trim_fraction(text)).timestamp()
        except ValueError:
            return None
    return None


def _trim_fraction(text: str) -> str:
    # fromisoformat on 3.10 accepts only 3 or 6 fractional digits
    m = re.match(r"(.*T\d{2}:\d{2}:\d{2})(\.\d+)?(.*)$", text)
    if not m or not m.group(2):
        return text
    frac = (m.group(2)[1:] + "000000")[:6]
    return f"{m.group(1)}.{frac}{m.group(3)}"


def _head(profile: VulnProfile) -> str:
    head = profile.statement.format(name=profile.name, domain=profile.domain)
    if profile.include_name and profile.name.lower() not in head.lower():
        head = f"Welcome to {profile.name}!\n\n{head}"
    if profile.include_domain and profile.domain.lower() not in head.lower():
        head = f"{head}\n\nURI: https://{profile.domain}"
    return head


def compose_message(profile: VulnProfile, values: dict[str, str]) -> str:
    """Render a profile's message from concrete field values.

    ``values`` keys: ``address``, ``nonce``, ``issued-at``,
    ``expiration-time``.
    """
    sep = profile.field_separator
    lines = []
    if profile.include_address:
        lines.append(f"{profile.address_label}{sep}{values['address']}")
    for ext in _EXT_ORDER:
        if ext in profile.ext_fields:
            label, _ = _EXT_LABELS[ext]
            lines.append(f"{label}{sep}{'2' if ext == 'version' else '1'}")
    if profile.nonce_kind != "none":
        lines.append(f"{profile.nonce_label}{sep}{values['nonce']}")
    for ext in _EXT_ORDER_AFTER_NONCE:
        if ext in profile.ext_fields:
            label, key = _EXT_LABELS[ext]
            lines.append(f"{label}{sep}{values[key]}")
    head = _head(profile)
    return head + ("\n\n" + "\n".join(lines) if lines else "")


def message_values(
    profile: VulnProfile, address: str, now: float, rng: random.Random | None = None
) -> dict[str, str]:
    return {
        "address": address,
        "nonce": format_nonce(profile.nonce_format, now, rng),
        "issued-at": _iso(now),
        "expiration-time": _iso(now + 86400),
    }


_FRONTEND_GENERATORS = {
    "timestamp10": "{{ now_s }}",
    "timestamp13": "{{ now_ms }}",
    "datetime": "{{ now_iso }}",
    "uuid": "{{ uuid4 }}",
    "digits": "{{ rand_digits(8) }}",
    "hex": "{{ rand_hex(32) }}",
}


def frontend_template(profile: VulnProfile) -> str:
    """The message as a front end would compose it, with request placeholders."""
    if profile.query_mode == "nonce":
        nonce = "{{ nonce }}"
    else:
        nonce = _FRONTEND_GENERATORS[profile.nonce_format]
    return compose_message(
        profile,
        {
            "address": "{{ addr }}",
            "nonce": nonce,
            "issued-at": "{{ now_iso }}",
            "expiration-time": "{{ now_iso_plus_day }}",
        },
    )


# -- server state


@dataclass
class NonceRecord:
    address: str
    issued_at: float
    used: bool = False


@dataclass
class ServerState:
    nonces: dict[str, NonceRecord] = field(default_factory=dict)
    tokens: dict[str, tuple[str, float]] = field(default_factory=dict)


@dataclass(frozen=True)
class AuthResult:
    token: Optional[str] = None
    stage: Optional[str] = None
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.token is not None


_SENTINELS = {
    "address": "\x00A\x00",
    "nonce": "\x00N\x00",
    "issued-at": "\x00I\x00",
    "expiration-time": "\x00E\x00",
}
_GROUP_NAMES = {"address": "address", "nonce": "nonce", "issued-at": "issued", "expiration-time": "expires"}


def _template_regex(profile: VulnProfile) -> re.Pattern:
    skeleton = compose_message(profile, _SENTINELS)
    pattern = re.escape(skeleton)
    for key, sentinel in _SENTINELS.items():
        escaped = re.escape(sentinel)
        group = f"(?P<{_GROUP_NAMES[key]}>\\S*)"
        # only the first occurrence captures; later ones must just be present
        pattern = pattern.replace(escaped, group, 1).replace(escaped, r"\S*")
    return re.compile(pattern)


class SimulatedSite:
    """One profile plus its mutable state; all handlers are thread-safe."""

    def __init__(
        self,
        profile: VulnProfile,
        clock: Callable[[], float] = time.time,
        rng: random.Random | None = None,
    ) -> None:
        self.profile = profile
        self.state = ServerState()
        self.clock = clock
        self.rng = rng or random.SystemRandom()
        self.lock = threading.Lock()
        self.request_count = 0
        self._regex = _template_regex(profile)

    # QUERY

    def handle_query(self, address: str) -> str:
        """Issue a message (or a bare nonce in ``query_mode="nonce"``)."""
        p = self.profile
        now = self.clock()
        with self.lock:
            values = message_values(p, address, now, self.rng)
            if p.nonce_kind in ("one-time", "temporary"):
                self.state.nonces[values["nonce"]] = NonceRecord(address.lower(), now)
        if p.query_mode == "nonce":
            return values["nonce"]
        return compose_message(p, values)

    # AUTH

    def _extract_fields(self, message: str) -> Optional[dict[str, str]]:
        p = self.profile
        if p.body_check == "exact":
            m = self._regex.fullmatch(message)
        elif p.body_check == "contains":
            m = self._regex.search(message)
        else:
            found = {}
            labels = []
            if p.nonce_kind != "none":
                labels.append((p.nonce_label, "nonce"))
            for ext in p.ext_fields:
                label, key = _EXT_LABELS[ext]
                labels.append((label, key or ext))
            for label, key in labels:
                lm = re.search(re.escape(label + p.field_separator) + r"(\S*)", message)
                if lm is None:
                    return None
                found[_GROUP_NAMES.get(key, key)] = lm.group(1)
            return found
        if m is None:
            return None
        return {k: v for k, v in m.groupdict().items() if v is not None}

    def _check_nonce(self, value: str, now: float) -> Optional[str]:
        p = self.profile
        kind = p.nonce_kind
        if kind in ("none", "unchecked"):
            return None
        if kind == "time-based":
            ts = parse_timestamp(value) if value else None
            if p.time_window is None:
                if ts is not None and ts > now + _FUTURE_SKEW:
                    return "timestamp is in the future"
                return None
            if ts is None:
                return "missing or malformed timestamp"
            if abs(now - ts) > p.time_window:
                return "timestamp outside accepted window"
            return None
        record = self.state.nonces.get(value)
        if record is None:
            return "unknown nonce"
        if now - record.issued_at > p.nonce_ttl:
            return "nonce expired"
        if kind == "one-time" and record.used:
            return "nonce already used"
        return None

    def handle_auth(self, message: str, signature: str, address: str) -> AuthResult:
        p = self.profile
        now = self.clock()
        address = (address or "").lower()
        try:
            claimed = parse_address(address)
        except ValueError:
            return AuthResult(stage="address", detail="malformed address")

        if p.sig_check:
            try:
                signer = recover_address(message, signature)
            except (InvalidSignature, ValueError) as exc:
                return AuthResult(stage="signature", detail=str(exc))
            if p.addr_check and signer != claimed:
                return AuthResult(stage="address", detail="signer does not match address")

        with self.lock:
            nonce_value = None
            if p.message_check:
                extracted = self._extract_fields(message)
                if extracted is None:
                    stage = "body" if p.body_check != "none" else "field"
                    return AuthResult(stage=stage, detail="message does not match issued message")
                for key in ("issued", "expires"):
                    val = extracted.get(key)
                    if val is not None and parse_timestamp(val) is None:
                        return AuthResult(stage="field", detail=f"malformed {key} time")
                expires = extracted.get("expires")
                if expires is not None and parse_timestamp(expires) < now:
                    return AuthResult(stage="field", detail="message expired")
                nonce_value = extracted.get("nonce", "")
                problem = self._check_nonce(nonce_value, now)
                if problem:
                    return AuthResult(stage="nonce", detail=problem)
                if p.nonce_kind == "one-time":
                    self.state.nonces[nonce_value].used = True
            token = secrets.token_hex(16)
            self.state.tokens[token] = (address, now + p.token_ttl)
        return AuthResult(token=token)

    # ACCESS

    def handle_access(self, token: str) -> Optional[dict]:
        now = self.clock()
        with self.lock:
            entry = self.state.tokens.get(token)
        if entry is None or entry[1] <= now:
            return None
        # balance/transactions are stubbed: no chain behind the simulator
        return {"address": entry[0], "profile": self.profile.label, "balance": "0"}


# -- HTTP front


class _Handler(BaseHTTPRequestHandler):
    server: "_SimHTTPServer"
    protocol_version = "HTTP/1.1"

    def log_message(self, format, *args):  # noqa: A002
        pass

    def _reply(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _route(self) -> tuple[Optional[SimulatedSite], str]:
        parts = urlsplit(self.path).path.strip("/").split("/")
        if len(parts) != 3 or parts[0] != "p":
            return None, ""
        return self.server.sites.get(parts[1]), parts[2]

    def _json_body(self) -> Optional[dict]:
        """Parsed JSON object, {} for an empty body, None if malformed."""
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            return {}
        try:
            data = json.loads(raw)
        except ValueError:
            return None
        return data if isinstance(data, dict) else None

    def do_POST(self) -> None:
        site, action = self._route()
        payload = self._json_body()
        if site is None:
            self._reply(404, {"error": {"stage": "route"}})
            return
        with site.lock:
            site.request_count += 1
        if payload is None:
            self._reply(400, {"error": {"stage": "request", "detail": "body is not a JSON object"}})
            return
        address = str(payload.get("address") or self.headers.get("x-viewer-addr") or "")
        if action == "query":
            if site.profile.query_mode == "none":
                self._reply(404, {"error": {"stage": "route"}})
                return
            value = site.handle_query(address)
            key = "nonce" if site.profile.query_mode == "nonce" else "message"
            self._reply(200, {"data": {"auth": {key: value}}})
        elif action in ("auth", "update"):
            result = site.handle_auth(
                str(payload.get("message") or ""),
                str(payload.get("signature") or ""),
                address,
            )
            if result.ok:
                self._reply(200, {"data": {"auth": {"token": result.token}}})
            else:
                self._reply(401, {"error": {"stage": result.stage, "detail": result.detail}})
        else:
            self._reply(404, {"error": {"stage": "route"}})

    def do_GET(self) -> None:
        site, action = self._route()
        if site is None or action != "access":
            self._reply(404, {"error": {"stage": "route"}})
            return
        with site.lock:
            site.request_count += 1
        auth = self.headers.get("Authorization", "")
        token = auth[7:].strip() if auth.lower().startswith("bearer ") else ""
        data = site.handle_access(token)
        if data is None:
            self._reply(401, {"error": {"stage": "token"}})
        else:
            self._reply(200, {"data": data})


class _SimHTTPServer(ThreadingHTTPServer):
    daemon_threads = True
    sites: dict[str, SimulatedSite]


class SimServer:
    """Serve a fleet of profiles from a background thread.

    >>> with SimServer([VulnProfile("demo")]) as sim:   # doctest: +SKIP
    ...     sim.base_url("demo")
    'http://127.0.0.1:41234/p/demo'
    """

    def __init__(
        self,
        profiles: list[VulnProfile],
        host: str = "127.0.0.1",
        port: int = 0,
        clock: Callable[[], float] = time.time,
    ) -> None:
        labels = [p.label for p in profiles]
        if len(set(labels)) != len(labels):
            raise ValueError("profile labels must be unique")
        self.sites = {p.label: SimulatedSite(p, clock=clock) for p in profiles}
        self._httpd = _SimHTTPServer((host, port), _Handler)
        self._httpd.sites = self.sites
        self._thread: Optional[threading.Thread] = None

    @property
    def address(self) -> tuple[str, int]:
        return self._httpd.server_address[:2]

    @property
    def root_url(self) -> str:
        host, port = self.address
        return f"http://{host}:{port}"

    def base_url(self, label: str) -> str:
        return f"{self.root_url}/p/{label}"

    def start(self) -> "SimServer":
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def serve_forever(self) -> None:
        self._httpd.serve_forever()

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def __enter__(self) -> "SimServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


# -- profile files and matching target configs


def load_profiles(text: str) -> list[VulnProfile]:
    data = json.loads(text)
    if not isinstance(data, list):
        raise ValueError("profile file must hold a JSON list")
    return [VulnProfile.from_dict(item) for item in data]


def dump_profiles(profiles: list[VulnProfile]) -> str:
    return json.dumps([p.to_dict() for p in profiles], indent=2)


def target_entry(profile: VulnProfile, base_url: str) -> dict:
    """A collection-file target that drives ``profile`` at ``base_url``."""
    requests = []
    auth_inputs: dict[str, str] = {}
    if profile.query_mode != "none":
        out = "nonce" if profile.query_mode == "nonce" else "msg"
        requests.append(
            {
                "role": "QUERY",
                "method": "POST",
                "url": f"{base_url}/query",
                "headers": {"Content-Type": "application/json"},
                "body": '{"address": "{{ addr }}"}',
                "inputs": {},
                "outputs": {out: f"data.auth.{'nonce' if out == 'nonce' else 'message'}"},
            }
        )
    if profile.query_mode != "message":
        auth_inputs["msg"] = frontend_template(profile)
    if profile.query_mode == "nonce":
        # element-style: address travels in a header, nonce echoed in the body
        auth = {
            "role": "AUTH",
            "method": "POST",
            "url": f"{base_url}/{profile.auth_path}",
            "headers": {"Content-Type": "application/json", "x-viewer-addr": "{{ addr }}"},
            "body": '{"message": "{{ msg }}", "nonce": "{{ nonce }}", "signature": "{{ sig }}"}',
        }
    else:
        auth = {
            "role": "AUTH",
            "method": "POST",
            "url": f"{base_url}/{profile.auth_path}",
            "headers": {"Content-Type": "application/json"},
            "body": '{"address": "{{ addr }}", "message": "{{ msg }}", "signature": "{{ sig }}"}',
        }
    auth["inputs"] = auth_inputs
    auth["outputs"] = {"token": "data.auth.token"}
    requests.append(auth)
    requests.append(
        {
            "role": "ACCESS",
            "method": "GET",
            "url": f"{base_url}/access",
            "headers": {"Authorization": "Bearer {{ token }}"},
            "body": "",
            "inputs": {},
            "outputs": {"account": "data.address"},
        }
    )
    return {
        "label": profile.label,
        "host": profile.domain,
        "expected_name": profile.name,
        "token_key": "token",
        "requests": requests,
        "meta": {"row": profile.row, "website": profile.name, "category": profile.category},
    }


def target_document(profiles: list[VulnProfile], root_url: str) -> str:
    root_url = root_url.rstrip("/")
    targets = [target_entry(p, f"{root_url}/p/{p.label}") for p in profiles]
    return json.dumps({"targets": targets}, indent=2)


# -- fixture fleets


def _row(row: int, label: str, category: str, **kw) -> VulnProfile:
    return VulnProfile(label=label, row=row, category=category, **kw)


def fixture_table2(temporary_ttl: float = 900.0) -> list[VulnProfile]:
    """29 profiles, one per surveyed deployment, reproducing each row's flaws.

    Statements are distinct per site so no site's message is contained in
    another's; nameless and domainless rows avoid any host-shaped text.
    """
    T = temporary_ttl
    rows = [
        _row(1, "blur", "Marketplace", domain="blur.io", name="Blur",
             include_domain=False, statement="Sign in to {name}\nThis signature proves you control the wallet.",
             nonce_kind="temporary", nonce_format="hex", nonce_label="Challenge", nonce_ttl=T),
        _row(2, "opensea", "Marketplace", domain="opensea.io", name="OpenSea",
             statement=(
                 "Welcome to {name}! \n\nThis request will not trigger a blockchain transaction or \n"
                 "cost any gas fees. \nClick to sign in and accept the {name} Terms of Service:\n"
                 "https://{domain}/tos\n\nYour authentication status will reset after 24 Hours."
             ),
             include_address=True, nonce_kind="one-time", nonce_format="uuid", nonce_ttl=T),
        _row(3, "looksrare", "Marketplace", domain="looksrare.org", name="LooksRare",
             statement="Welcome to {name}!\n\nClick to sign in and accept the {name} Terms of Service: https://{domain}/terms",
             nonce_kind="one-time", nonce_format="digits", nonce_ttl=T),
        _row(4, "foundation", "Marketplace", domain="foundation.app", name="Foundation",
             include_domain=False, statement="Please sign this message to connect to {name}.",
             nonce_kind="none", body_check="contains"),
        _row(5, "element", "Marketplace", domain="element.market", name="Element",
             statement=(
                 "Welcome to {name}!\n\nClick \"Sign\" to sign in. No password needed!\n\n"
                 "I accept the {name} Terms of Service: \nhttps://{domain}/tos"
             ),
             include_address=True, address_label="Wallet address", field_separator=":\n",
             nonce_kind="one-time", nonce_format="hex", nonce_ttl=T,
             body_check="contains", query_mode="nonce"),
        _row(6, "rarible", "Marketplace", domain="rarible.com", name="Rarible",
             statement="{domain} wants you to sign in to {name} with your wallet.",
             nonce_kind="time-based", nonce_format="timestamp13", nonce_label="Timestamp"),
        _row(7, "joepegs", "Marketplace", domain="joepegs.com", name="Joepegs",
             include_domain=False, statement="Welcome to {name}! Sign to verify ownership of your wallet.",
             nonce_kind="temporary", nonce_format="uuid", nonce_ttl=T),
        _row(8, "quix", "Marketplace", domain="quixotic.io", name="Quix",
             include_domain=False, include_name=False,
             statement="Sign this message to prove you own this wallet and proceed. Free of charge.",
             nonce_kind="time-based", nonce_format="timestamp10", nonce_label="Timestamp",
             time_window=None, body_check="none"),
        _row(9, "minted", "Marketplace", domain="minted.network", name="Minted Network",
             statement="{name} asks you to sign in.\nURI: https://{domain}",
             nonce_kind="time-based", nonce_format="datetime", nonce_label="Nonce"),
        _row(10, "campfire", "Marketplace", domain="campfire.exchange", name="Campfire",
             statement="Log in to {name} at https://{domain} by signing this message.",
             nonce_kind="temporary", nonce_format="uuid", nonce_ttl=T),
        _row(11, "moonflow", "Marketplace", domain="moonflow.io", name="Moonflow",
             include_domain=False, statement="{name} NFT login request. Signing is free.",
             nonce_kind="temporary", nonce_format="digits", nonce_ttl=T),
        _row(12, "galler", "Marketplace", domain="www.galler.io", name="Galler",
             statement=(
                 "This is {name}, welcome!\n\nClick \"Sign\" to sign in. No password needed!\n"
                 "This request will not trigger a blockchain transaction or \ncost any gas fees.\n\n"
                 "Your authentication status will be reset after 24 hours.\n\n"
                 "I accept the {name} User Terms of Use: \nhttps://{domain}/en/terms-of-use"
             ),
             include_address=True, field_separator=":\n",
             nonce_kind="unchecked", nonce_format="timestamp13", nonce_label="timestamp",
             message_check=False),
        _row(13, "playdapp", "Marketplace", domain="playdapp.io", name="PlayDapp",
             include_domain=False, include_name=False,
             statement="Please sign to let us verify that you are the owner of this address.",
             nonce_kind="none"),
        _row(14, "refinable", "Marketplace", domain="refinable.com", name="Refinable",
             include_domain=False, include_name=False,
             statement="Authenticate your wallet by signing this one-time code.",
             nonce_kind="one-time", nonce_format="digits", nonce_ttl=T),
        _row(15, "apeiron", "Marketplace", domain="apeironnft.com", name="Apeiron",
             include_domain=False, include_name=False,
             statement="Signing in to the god game. No gas will be spent.",
             nonce_kind="time-based", nonce_format="timestamp13", nonce_label="Timestamp"),
        _row(16, "lifty", "Marketplace", domain="lifty.io", name="Lifty",
             statement="{domain} requests your signature to sign in to {name}.",
             nonce_kind="one-time", nonce_format="uuid", nonce_ttl=T),
        _row(17, "learnblockchain", "Community", domain="learnblockchain.cn", name="LearnBlockchain",
             include_domain=False, statement="learnblockchain",
             nonce_kind="none", message_check=False),
        _row(18, "dappradar", "Ranking", domain="dappradar.com", name="DappRadar",
             include_domain=False, include_name=False,
             statement="I am signing my one-time nonce to rank and track my portfolio.",
             nonce_kind="temporary", nonce_format="hex", nonce_ttl=T),
        _row(19, "questn", "Service", domain="questn.com", name="QuestN",
             include_domain=False, statement="Welcome to {name}, sign to join the quest board.",
             nonce_kind="time-based", nonce_format="timestamp10", nonce_label="Timestamp",
             body_check="none", query_mode="none"),
        _row(20, "galxe", "Social", domain="galxe.com", name="Galxe",
             statement="{domain} wants you to sign in with your Ethereum account to {name}.",
             include_address=True, nonce_kind="unchecked", nonce_format="uuid"),
        _row(21, "planetix", "Game", domain="planetix.com", name="Planetix",
             statement="Sign in to {name} at {domain} to manage your planets.",
             ext_fields=["version", "issued-at", "expiration-time"],
             nonce_kind="unchecked", nonce_format="digits", body_check="none"),
        _row(22, "mobox", "Game", domain="mobox.io", name="MOBOX",
             include_domain=False, include_name=False,
             statement="Sign to enter the metaverse of boxes and heroes.",
             nonce_kind="time-based", nonce_format="timestamp10", nonce_label="Timestamp"),
        _row(23, "bombcrypto", "Game", domain="bombcrypto.io", name="Bomb Crypto",
             include_domain=False, include_name=False,
             statement="Hero login: sign to load your bombers.",
             nonce_kind="time-based", nonce_format="datetime", nonce_label="Nonce"),
        _row(24, "decert", "Service", domain="decert.me", name="Decert",
             include_domain=False, statement="Welcome to {name}! Sign to claim your learning credentials.",
             nonce_kind="one-time", nonce_format="uuid", nonce_ttl=T),
        _row(25, "paragraph", "Media", domain="paragraph.xyz", name="Paragraph",
             include_domain=False, statement="Sign in to {name} to write, publish and collect.",
             nonce_kind="temporary", nonce_format="uuid", nonce_ttl=T),
        _row(26, "campfire-update", "Marketplace", domain="campfire.exchange", name="Campfire",
             include_domain=False, include_name=False, statement="update_profile",
             nonce_kind="none", auth_path="update"),
        _row(27, "lifty-update", "Marketplace", domain="lifty.io", name="Lifty",
             include_domain=False, include_name=False, statement="I want to update my profile",
             nonce_kind="none", auth_path="update"),
        _row(28, "nftmall", "Marketplace", domain="nftmall.io", name="NFTmall",
             include_domain=False, include_name=False, statement="Confirm profile changes",
             nonce_kind="none", auth_path="update"),
        _row(29, "babylons", "Marketplace", domain="babylons.io", name="Babylons",
             include_domain=False, include_name=False, statement="Sign to save your settings",
             nonce_kind="none", auth_path="update"),
    ]
    return rows


def table1_profiles(temporary_ttl: float = 2.0) -> list[VulnProfile]:
    """One profile per nonce behaviour of the AUTH-status table."""
    base = dict(domain="nonce.test", name="NonceLab", include_address=True)
    return [
        VulnProfile("nonce-one-time", nonce_kind="one-time", nonce_ttl=60.0, **base),
        VulnProfile("nonce-temporary", nonce_kind="temporary", nonce_ttl=temporary_ttl, **base),
        VulnProfile("nonce-time-based", nonce_kind="time-based", nonce_format="timestamp13",
                    nonce_label="Timestamp", time_window=60.0, **base),
        VulnProfile("nonce-unchecked", nonce_kind="unchecked", **base),
        VulnProfile("nonce-none", nonce_kind="none", **base),
    ]


def host_shaped(text: str) -> list[str]:
    """Host-like substrings, used to keep domainless fixtures clean."""
    return [m.group(0) for m in DOMAIN_RE.finditer(text)]
