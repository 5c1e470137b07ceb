"""Templated HTTP requests threaded through a QUERY -> AUTH -> ACCESS session.

A :class:`RequestItem` carries ``{{ key }}`` placeholders in its url,
headers and body. At render time each key is looked up in the per-call
local overrides first, then the session bindings, then the item's own
``inputs`` defaults, and finally the built-in generators (``now_ms``,
``now_s``, ``now_iso``, ``now_iso_plus_day``, ``uuid4``,
``rand_digits(n)``, ``rand_hex(n)``). Input defaults may themselves
contain placeholders, which is how a front end that composes its message
locally is described.

After a response arrives, each ``outputs`` entry (key -> response path)
is resolved and bound into the session.
"""

from __future__ import annotations

import ipaddress
import json
import logging
import re
import secrets
import threading
import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Any, Callable, Iterable, Mapping, Optional, Union
from urllib.parse import quote, urlsplit

import requests

log = logging.getLogger(__name__)

__all__ = [
    "ROLES",
    "RESERVED_KEYS",
    "FlexRequestError",
    "ParseError",
    "InvalidTarget",
    "MissingKey",
    "RequestFailed",
    "Timeout",
    "NetworkError",
    "RequestItem",
    "TargetConfig",
    "ConcreteRequest",
    "Response",
    "TraceEntry",
    "SessionContext",
    "Policy",
    "RateLimiter",
    "HEADER_PROFILES",
    "load_targets",
    "render",
    "resolve_template",
    "execute",
    "resolve_path",
    "extract_outputs",
    "run_item",
    "run_sequence",
]

ROLES = ("QUERY", "AUTH", "ACCESS")
RESERVED_KEYS = ("addr", "msg", "sig", "nonce", "token")

PLACEHOLDER_RE = re.compile(r"\{\{ ([A-Za-z_][A-Za-z0-9_]*(?:\(\d+\))?) \}\}")
_MAX_DEPTH = 5


class FlexRequestError(Exception):
    pass


class ParseError(FlexRequestError):
    def __init__(self, message: str, location: str) -> None:
        super().__init__(f"{location}: {message}")
        self.location = location


class InvalidTarget(FlexRequestError):
    pass


class MissingKey(FlexRequestError, KeyError):
    def __init__(self, key: str) -> None:
        super().__init__(key)
        self.key = key

    def __str__(self) -> str:
        return f"no value bound for {{{{ {self.key} }}}}"


class RequestFailed(FlexRequestError):
    pass


class Timeout(RequestFailed):
    pass


class NetworkError(RequestFailed):
    pass


@dataclass(frozen=True)
class RequestItem:
    role: str
    method: str
    url: str
    headers: tuple[tuple[str, str], ...] = ()
    body: str = ""
    inputs: Mapping[str, str] = field(default_factory=dict)
    outputs: Mapping[str, str] = field(default_factory=dict)

    def placeholders(self) -> set[str]:
        found = set(PLACEHOLDER_RE.findall(self.url))
        found.update(PLACEHOLDER_RE.findall(self.body))
        for name, value in self.headers:
            found.update(PLACEHOLDER_RE.findall(name))
            found.update(PLACEHOLDER_RE.findall(value))
        return found


@dataclass(frozen=True)
class TargetConfig:
    label: str
    host: str
    expected_name: Optional[str]
    token_key: str
    requests: tuple[RequestItem, ...]
    # free-form report metadata (row number, category, display name)
    meta: dict = field(default_factory=dict, compare=False)

    def item(self, role: str) -> Optional[RequestItem]:
        for it in self.requests:
            if it.role == role:
                return it
        return None

    @property
    def query(self) -> Optional[RequestItem]:
        return self.item("QUERY")

    @property
    def auth(self) -> RequestItem:
        item = self.item("AUTH")
        if item is None:
            raise InvalidTarget(f"{self.label}: no AUTH request")
        return item

    @property
    def access(self) -> Optional[RequestItem]:
        return self.item("ACCESS")


@dataclass(frozen=True)
class ConcreteRequest:
    method: str
    url: str
    headers: tuple[tuple[str, str], ...]
    body: str

    @property
    def host(self) -> str:
        return urlsplit(self.url).netloc


@dataclass
class Response:
    status: int
    headers: dict[str, str]
    body: str
    elapsed: float = 0.0

    def json(self) -> Any:
        return json.loads(self.body)

    @property
    def ok(self) -> bool:
        return 200 <= self.status < 300


@dataclass
class TraceEntry:
    role: str
    request: Optional[ConcreteRequest]
    status: Optional[int]
    extracted: dict[str, str] = field(default_factory=dict)
    misses: list[str] = field(default_factory=list)
    error: Optional[str] = None
    elapsed: float = 0.0
    response_body: str = ""


@dataclass
class SessionContext:
    bindings: dict[str, str] = field(default_factory=dict)
    trace: list[TraceEntry] = field(default_factory=list)
    misses: list[tuple[str, str]] = field(default_factory=list)

    def bind(self, key: str, value: str) -> None:
        self.bindings[key] = value

    def fork(self, drop: Iterable[str] = ()) -> "SessionContext":
        """Copy of the bindings (minus ``drop``) with an empty trace."""
        drop = set(drop)
        return SessionContext({k: v for k, v in self.bindings.items() if k not in drop})


# -- collection files


def _loc(*parts: Any) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def _parse_item(raw: Any, ti: int, ri: int) -> RequestItem:
    where = _loc("targets", ti, "requests", ri)
    if not isinstance(raw, dict):
        raise ParseError("request must be an object", where)
    role = str(raw.get("role", "")).upper()
    if role not in ROLES:
        raise ParseError(f"role must be one of {ROLES}, got {raw.get('role')!r}", _loc(where, "role"))
    for key in ("method", "url"):
        if not isinstance(raw.get(key), str) or not raw[key]:
            raise ParseError(f"missing {key}", _loc(where, key))
    headers = raw.get("headers") or {}
    if isinstance(headers, dict):
        header_pairs = tuple((str(k), str(v)) for k, v in headers.items())
    elif isinstance(headers, list):
        try:
            header_pairs = tuple((str(k), str(v)) for k, v in headers)
        except (TypeError, ValueError):
            raise ParseError("headers must be an object or list of pairs", _loc(where, "headers"))
    else:
        raise ParseError("headers must be an object or list of pairs", _loc(where, "headers"))
    body = raw.get("body") or ""
    if not isinstance(body, str):
        body = json.dumps(body)
    for key in ("inputs", "outputs"):
        val = raw.get(key) or {}
        if not isinstance(val, dict):
            raise ParseError(f"{key} must be an object", _loc(where, key))
    for key, path in (raw.get("outputs") or {}).items():
        if not _valid_path(str(path)):
            raise ParseError(f"bad response path {path!r}", _loc(where, "outputs", key))
    return RequestItem(
        role=role,
        method=raw["method"].upper(),
        url=raw["url"],
        headers=header_pairs,
        body=body,
        inputs={str(k): str(v) for k, v in (raw.get("inputs") or {}).items()},
        outputs={str(k): str(v) for k, v in (raw.get("outputs") or {}).items()},
    )


def load_targets(document: str) -> list[TargetConfig]:
    """Parse a collection file into target configurations."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from exc
    if not isinstance(data, dict) or not isinstance(data.get("targets", []), list):
        raise ParseError("expected an object with a 'targets' list", "$")
    targets = []
    for ti, raw in enumerate(data.get("targets", [])):
        where = _loc("targets", ti)
        if not isinstance(raw, dict):
            raise ParseError("target must be an object", where)
        label = raw.get("label")
        if not isinstance(label, str) or not label:
            raise ParseError("missing label", _loc(where, "label"))
        items = tuple(_parse_item(r, ti, ri) for ri, r in enumerate(raw.get("requests") or []))
        counts = {role: sum(1 for it in items if it.role == role) for role in ROLES}
        if counts["AUTH"] != 1:
            raise InvalidTarget(f"{label}: expected exactly one AUTH request, found {counts['AUTH']}")
        if counts["QUERY"] > 1 or counts["ACCESS"] > 1:
            raise InvalidTarget(f"{label}: at most one QUERY and one ACCESS request allowed")
        if not isinstance(raw.get("meta") or {}, dict):
            raise ParseError("meta must be an object", _loc(where, "meta"))
        targets.append(
            TargetConfig(
                label=label,
                host=str(raw.get("host") or ""),
                expected_name=raw.get("expected_name") or None,
                token_key=str(raw.get("token_key") or "token"),
                requests=items,
                meta=dict(raw.get("meta") or {}),
            )
        )
    return targets


# -- rendering


def _generate(key: str) -> Optional[str]:
    now = time.time()
    if key == "now_ms":
        return str(int(now * 1000))
    if key == "now_s":
        return str(int(now))
    if key in ("now_iso", "now_iso_plus_day"):
        dt = datetime.now(timezone.utc)
        if key == "now_iso_plus_day":
            dt += timedelta(days=1)
        return dt.strftime("%Y-%m-%dT%H:%M:%S.") + f"{dt.microsecond // 1000:03d}Z"
    if key == "uuid4":
        return str(uuid.uuid4())
    m = re.fullmatch(r"rand_(digits|hex)\((\d+)\)", key)
    if m:
        n = int(m.group(2))
        if m.group(1) == "digits":
            return "".join(secrets.choice("0123456789") for _ in range(n))
        return secrets.token_hex((n + 1) // 2)[:n]
    return None


class _Resolver:
    def __init__(self, item: RequestItem, session: SessionContext, local: Mapping[str, str]):
        self.item = item
        self.session = session
        self.local = local
        self.generated: dict[str, str] = {}

    def value(self, key: str, depth: int = 0) -> str:
        if key in self.local:
            return str(self.local[key])
        if key in self.session.bindings:
            return str(self.session.bindings[key])
        if key in self.item.inputs:
            return self.expand(self.item.inputs[key], depth + 1)
        if key not in self.generated:
            generated = _generate(key)
            if generated is None:
                raise MissingKey(key)
            self.generated[key] = generated
        return self.generated[key]

    def expand(self, text: str, depth: int = 0, escape: Callable[[str], str] = str) -> str:
        if depth > _MAX_DEPTH:
            raise FlexRequestError(f"placeholder nesting deeper than {_MAX_DEPTH}")
        return PLACEHOLDER_RE.sub(lambda m: escape(self.value(m.group(1), depth)), text)


def _json_escape(value: str) -> str:
    return json.dumps(value, ensure_ascii=False)[1:-1]


def _looks_like_json(body: str) -> bool:
    return body.lstrip()[:1] in ("{", "[")


def render(
    item: RequestItem,
    session: SessionContext,
    local: Optional[Mapping[str, str]] = None,
) -> ConcreteRequest:
    """Substitute every placeholder; precedence local > session > inputs.

    Values placed into a JSON body are string-escaped, values placed into
    the url are percent-encoded.
    """
    resolver = _Resolver(item, session, local or {})
    url = resolver.expand(item.url, escape=lambda v: quote(v, safe=":/@"))
    headers = tuple((resolver.expand(k), resolver.expand(v)) for k, v in item.headers)
    body_escape = _json_escape if _looks_like_json(item.body) else str
    body = resolver.expand(item.body, escape=body_escape)
    return ConcreteRequest(item.method, url, headers, body)


def resolve_template(
    text: str,
    item: RequestItem,
    session: SessionContext,
    local: Optional[Mapping[str, str]] = None,
) -> str:
    """Expand ``text`` with the same lookup rules as :func:`render`."""
    return _Resolver(item, session, local or {}).expand(text)


# -- execution


HEADER_PROFILES: dict[str, dict[str, str]] = {
    "chrome-like": {
        "User-Agent": (
            "Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 "
            "(KHTML, like Gecko) Chrome/110.0.0.0 Safari/537.36"
        ),
        "Accept": "application/json, text/plain, */*",
        "Accept-Language": "en-US,en;q=0.9",
        "sec-ch-ua": '"Chromium";v="110", "Not A(Brand";v="24", "Google Chrome";v="110"',
        "sec-ch-ua-mobile": "?0",
        "sec-ch-ua-platform": '"Windows"',
    },
    "none": {},
}


def _is_loopback(host: str) -> bool:
    hostname = urlsplit(f"//{host}").hostname or ""
    if hostname == "localhost":
        return True
    try:
        return ipaddress.ip_address(hostname).is_loopback
    except ValueError:
        return False


@dataclass(frozen=True)
class Policy:
    timeout: float = 10.0
    # None picks 60 s for remote hosts and 0 for loopback
    min_interval: Optional[float] = None
    headers_profile: str = "chrome-like"

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.min_interval is not None and self.min_interval < 0:
            raise ValueError("min_interval must be non-negative")
        if self.headers_profile not in HEADER_PROFILES:
            raise ValueError(f"unknown header profile {self.headers_profile!r}")

    def interval_for(self, host: str) -> float:
        if self.min_interval is not None:
            return self.min_interval
        return 0.0 if _is_loopback(host) else 60.0


class RateLimiter:
    """Per-host minimum spacing between request starts."""

    def __init__(self, clock: Callable[[], float] = time.monotonic, sleep=time.sleep):
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._host_locks: dict[str, threading.Lock] = {}
        self._last: dict[str, float] = {}

    def wait(self, host: str, interval: float) -> None:
        with self._lock:
            host_lock = self._host_locks.setdefault(host, threading.Lock())
        with host_lock:
            last = self._last.get(host)
            if last is not None and interval > 0:
                remaining = last + interval - self._clock()
                if remaining > 0:
                    self._sleep(remaining)
            self._last[host] = self._clock()


DEFAULT_LIMITER = RateLimiter()


def execute(
    request: ConcreteRequest,
    policy: Policy = Policy(),
    limiter: Optional[RateLimiter] = None,
    http: Optional[requests.Session] = None,
) -> Response:
    limiter = limiter or DEFAULT_LIMITER
    limiter.wait(request.host, policy.interval_for(request.host))
    headers = dict(HEADER_PROFILES[policy.headers_profile])
    headers.update(dict(request.headers))
    sender = http or requests
    started = time.monotonic()
    try:
        resp = sender.request(
            request.method,
            request.url,
            headers=headers,
            data=request.body.encode("utf-8") if request.body else None,
            timeout=policy.timeout,
            allow_redirects=False,
        )
    except requests.Timeout as exc:
        raise Timeout(f"{request.method} {request.url}: timed out after {policy.timeout}s") from exc
    except requests.RequestException as exc:
        raise NetworkError(f"{request.method} {request.url}: {exc.__class__.__name__}") from exc
    return Response(
        status=resp.status_code,
        headers=dict(resp.headers),
        body=resp.text,
        elapsed=time.monotonic() - started,
    )


# -- response extraction

_MISSING = object()


def _valid_path(path: str) -> bool:
    if path == "status":
        return True
    if path.startswith("header:"):
        return len(path) > len("header:")
    return all(seg != "" for seg in path.split("."))


def resolve_path(response: Response, path: str) -> Optional[str]:
    """Value at ``path`` in ``response`` as text, or None."""
    if path == "status":
        return str(response.status)
    if path.startswith("header:"):
        wanted = path[len("header:") :].lower()
        for k, v in response.headers.items():
            if k.lower() == wanted:
                return v
        return None
    segments = path.split(".")
    if any(s == "" for s in segments):
        raise ValueError(f"empty segment in response path {path!r}")
    try:
        node: Any = response.json()
    except ValueError:
        return None
    for seg in segments:
        if isinstance(node, dict):
            node = node.get(seg, _MISSING)
        elif isinstance(node, list) and seg.isdigit():
            idx = int(seg)
            node = node[idx] if idx < len(node) else _MISSING
        else:
            node = _MISSING
        if node is _MISSING:
            return None
    if node is None:
        return None
    if isinstance(node, (dict, list)):
        return json.dumps(node)
    if isinstance(node, bool):
        return "true" if node else "false"
    return str(node)


def extract_outputs(
    response: Response, outputs: Mapping[str, str], session: SessionContext
) -> SessionContext:
    """Bind each resolvable output path; unresolvable ones are recorded as misses."""
    for key, path in outputs.items():
        try:
            value = resolve_path(response, path)
        except ValueError:
            value = None
        if value is None:
            session.misses.append((key, path))
        else:
            session.bind(key, value)
    return session


# -- sequences

LocalSpec = Union[Mapping[str, str], Callable[[SessionContext], Mapping[str, str]]]


@dataclass(frozen=True)
class Hooks:
    """Observers called around each request: ``before`` gets the rendered
    request just ahead of sending, ``after`` the finished trace entry."""

    before: Optional[Callable[[ConcreteRequest], None]] = None
    after: Optional[Callable[[TraceEntry], None]] = None


def run_item(
    item: RequestItem,
    session: SessionContext,
    local: Optional[Mapping[str, str]] = None,
    policy: Policy = Policy(),
    limiter: Optional[RateLimiter] = None,
    http: Optional[requests.Session] = None,
    hooks: Optional[Hooks] = None,
) -> TraceEntry:
    """Render, execute and extract one item; failures land in the trace."""
    entry = TraceEntry(role=item.role, request=None, status=None)
    session.trace.append(entry)
    _run_item(entry, item, session, local, policy, limiter, http, hooks)
    if hooks is not None and hooks.after is not None:
        hooks.after(entry)
    return entry


def _run_item(entry, item, session, local, policy, limiter, http, hooks) -> None:
    try:
        request = render(item, session, local)
    except FlexRequestError as exc:
        entry.error = str(exc)
        return
    entry.request = request
    if hooks is not None and hooks.before is not None:
        hooks.before(request)
    try:
        response = execute(request, policy, limiter, http)
    except RequestFailed as exc:
        entry.error = f"{exc.__class__.__name__}: {exc}"
        log.debug("request failed: %s", exc)
        return
    entry.status = response.status
    entry.elapsed = response.elapsed
    entry.response_body = response.body
    before = len(session.misses)
    extract_outputs(response, item.outputs, session)
    missed = {k for k, _ in session.misses[before:]}
    entry.extracted = {k: session.bindings[k] for k in item.outputs if k not in missed}
    entry.misses = sorted(missed)


def run_sequence(
    target: TargetConfig,
    overrides: Optional[Mapping[str, LocalSpec]] = None,
    policy: Policy = Policy(),
    required: Iterable[str] = (),
    session: Optional[SessionContext] = None,
    limiter: Optional[RateLimiter] = None,
    http: Optional[requests.Session] = None,
    hooks: Optional[Hooks] = None,
) -> SessionContext:
    """Run QUERY -> AUTH -> ACCESS (absent roles skipped).

    ``overrides`` maps a role to its local values, or to a callable that
    builds them from the session so far (e.g. to sign a freshly queried
    message). A failure in a role listed in ``required`` stops the run.
    """
    overrides = overrides or {}
    required = set(required)
    session = session or SessionContext()
    for role in ROLES:
        item = target.item(role)
        if item is None:
            continue
        spec = overrides.get(role, {})
        try:
            local = spec(session) if callable(spec) else spec
        except FlexRequestError as exc:
            session.trace.append(TraceEntry(role=role, request=None, status=None, error=str(exc)))
            if role in required:
                break
            continue
        entry = run_item(item, session, local, policy, limiter, http, hooks)
        failed = entry.error is not None or entry.status is None or entry.status >= 400
        if failed and role in required:
            break
    return session
