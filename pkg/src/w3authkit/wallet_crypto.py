"""secp256k1 keys and EIP-191 ``personal_sign`` signatures.

Signing is deterministic (RFC 6979, HMAC-SHA256) and always emits low-s
signatures with a legacy ``v`` of 27 or 28, which is what browser wallets
hand back to a web page. Recovery is strict: high-s and out-of-range
values are rejected rather than normalised.

Hex convention: lowercase with a ``0x`` prefix everywhere, except for the
EIP-55 mixed-case output of :func:`to_checksum_address`.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass, field
from typing import Union

from Crypto.Hash import keccak

__all__ = [
    "CURVE_ORDER",
    "InvalidSeed",
    "InvalidSignature",
    "KeyPair",
    "SignatureBundle",
    "keccak256",
    "keypair_from_seed",
    "personal_message_hash",
    "personal_sign",
    "recover_address",
    "to_checksum_address",
    "address_hex",
    "parse_address",
]

# secp256k1 domain parameters
P = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F
CURVE_ORDER = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
GX = 0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798
GY = 0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8
_HALF_ORDER = CURVE_ORDER // 2

PERSONAL_PREFIX = b"\x19Ethereum Signed Message:\n"


class InvalidSeed(ValueError):
    pass


class InvalidSignature(ValueError):
    pass


def keccak256(data: bytes) -> bytes:
    return keccak.new(digest_bits=256, data=data).digest()


# -- curve arithmetic in Jacobian coordinates; None is the point at infinity

_Jac = tuple[int, int, int]


def _jac_double(pt: _Jac | None) -> _Jac | None:
    if pt is None:
        return None
    x, y, z = pt
    if y == 0:
        return None
    ysq = y * y % P
    s = 4 * x * ysq % P
    m = 3 * x * x % P  # a == 0 for secp256k1
    nx = (m * m - 2 * s) % P
    ny = (m * (s - nx) - 8 * ysq * ysq) % P
    nz = 2 * y * z % P
    return nx, ny, nz


def _jac_add(p1: _Jac | None, p2: _Jac | None) -> _Jac | None:
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    x1, y1, z1 = p1
    x2, y2, z2 = p2
    z1sq = z1 * z1 % P
    z2sq = z2 * z2 % P
    u1 = x1 * z2sq % P
    u2 = x2 * z1sq % P
    s1 = y1 * z2sq * z2 % P
    s2 = y2 * z1sq * z1 % P
    if u1 == u2:
        if s1 != s2:
            return None
        return _jac_double(p1)
    h = (u2 - u1) % P
    r = (s2 - s1) % P
    hsq = h * h % P
    hcu = hsq * h % P
    nx = (r * r - hcu - 2 * u1 * hsq) % P
    ny = (r * (u1 * hsq - nx) - s1 * hcu) % P
    nz = h * z1 * z2 % P
    return nx, ny, nz


def _jac_mul(pt: _Jac | None, k: int) -> _Jac | None:
    result = None
    addend = pt
    while k:
        if k & 1:
            result = _jac_add(result, addend)
        addend = _jac_double(addend)
        k >>= 1
    return result


def _to_affine(pt: _Jac | None) -> tuple[int, int] | None:
    if pt is None:
        return None
    x, y, z = pt
    zinv = pow(z, -1, P)
    zinv2 = zinv * zinv % P
    return x * zinv2 % P, y * zinv2 * zinv % P


_G: _Jac = (GX, GY, 1)


def _pubkey_to_address(point: tuple[int, int]) -> bytes:
    x, y = point
    return keccak256(x.to_bytes(32, "big") + y.to_bytes(32, "big"))[-20:]


# -- addresses


def address_hex(addr: bytes) -> str:
    return "0x" + addr.hex()


def parse_address(text: str) -> bytes:
    """Parse a ``0x``-prefixed 40-hex-digit address (any case)."""
    body = text[2:] if text[:2].lower() == "0x" else text
    if len(body) != 40:
        raise ValueError(f"address must have 40 hex digits: {text!r}")
    return bytes.fromhex(body)


def to_checksum_address(addr: Union[bytes, str]) -> str:
    """EIP-55 mixed-case encoding of a 20-byte address."""
    if isinstance(addr, str):
        addr = parse_address(addr)
    lower = addr.hex()
    digest = keccak256(lower.encode("ascii")).hex()
    out = [
        ch.upper() if ch.isalpha() and int(digest[i], 16) >= 8 else ch
        for i, ch in enumerate(lower)
    ]
    return "0x" + "".join(out)


# -- keys


@dataclass(frozen=True)
class KeyPair:
    private_scalar: int = field(repr=False)
    address: bytes

    @property
    def address_hex(self) -> str:
        return address_hex(self.address)

    @property
    def checksum_address(self) -> str:
        return to_checksum_address(self.address)


def keypair_from_seed(seed: bytes) -> KeyPair:
    if len(seed) != 32:
        raise InvalidSeed("seed must be 32 bytes")
    d = int.from_bytes(seed, "big") % CURVE_ORDER
    if d == 0:
        raise InvalidSeed("seed reduces to the zero scalar")
    pub = _to_affine(_jac_mul(_G, d))
    assert pub is not None
    return KeyPair(private_scalar=d, address=_pubkey_to_address(pub))


# -- signatures


@dataclass(frozen=True)
class SignatureBundle:
    r: int
    s: int
    v: int

    @property
    def encoded(self) -> bytes:
        return self.r.to_bytes(32, "big") + self.s.to_bytes(32, "big") + bytes([self.v])

    @property
    def hex(self) -> str:
        return "0x" + self.encoded.hex()

    @classmethod
    def from_bytes(cls, raw: bytes) -> "SignatureBundle":
        if len(raw) != 65:
            raise InvalidSignature(f"signature must be 65 bytes, got {len(raw)}")
        return cls(
            r=int.from_bytes(raw[:32], "big"),
            s=int.from_bytes(raw[32:64], "big"),
            v=raw[64],
        )

    @classmethod
    def from_hex(cls, text: str) -> "SignatureBundle":
        body = text[2:] if text[:2].lower() == "0x" else text
        try:
            raw = bytes.fromhex(body)
        except ValueError as exc:
            raise InvalidSignature(f"signature is not hex: {text[:20]!r}") from exc
        return cls.from_bytes(raw)


def personal_message_hash(message: Union[str, bytes]) -> bytes:
    data = message.encode("utf-8") if isinstance(message, str) else message
    return keccak256(PERSONAL_PREFIX + str(len(data)).encode("ascii") + data)


def _bits2int_modq(h: bytes) -> int:
    # hash length equals the order length (256 bits), so no truncation
    return int.from_bytes(h, "big") % CURVE_ORDER


def _rfc6979_nonces(d: int, h1: bytes):
    x = d.to_bytes(32, "big")
    h = _bits2int_modq(h1).to_bytes(32, "big")
    v = b"\x01" * 32
    k = b"\x00" * 32
    k = hmac.new(k, v + b"\x00" + x + h, hashlib.sha256).digest()
    v = hmac.new(k, v, hashlib.sha256).digest()
    k = hmac.new(k, v + b"\x01" + x + h, hashlib.sha256).digest()
    v = hmac.new(k, v, hashlib.sha256).digest()
    while True:
        v = hmac.new(k, v, hashlib.sha256).digest()
        candidate = int.from_bytes(v, "big")
        if 1 <= candidate < CURVE_ORDER:
            yield candidate
        k = hmac.new(k, v + b"\x00", hashlib.sha256).digest()
        v = hmac.new(k, v, hashlib.sha256).digest()


def sign_hash(msg_hash: bytes, key: KeyPair) -> SignatureBundle:
    """Raw ECDSA over a 32-byte digest, low-s normalised."""
    z = int.from_bytes(msg_hash, "big")
    d = key.private_scalar
    for k in _rfc6979_nonces(d, msg_hash):
        pt = _to_affine(_jac_mul(_G, k))
        assert pt is not None
        rx, ry = pt
        r = rx % CURVE_ORDER
        if r == 0:
            continue
        s = pow(k, -1, CURVE_ORDER) * (z + r * d) % CURVE_ORDER
        if s == 0:
            continue
        recid = (ry & 1) | (2 if rx >= CURVE_ORDER else 0)
        if s > _HALF_ORDER:
            s = CURVE_ORDER - s
            recid ^= 1
        return SignatureBundle(r=r, s=s, v=27 + recid)
    raise AssertionError("unreachable")


def personal_sign(message: Union[str, bytes], key: KeyPair) -> SignatureBundle:
    return sign_hash(personal_message_hash(message), key)


def _lift_x(x: int, odd: bool) -> tuple[int, int]:
    if x >= P:
        raise InvalidSignature("r is not a field element")
    alpha = (pow(x, 3, P) + 7) % P
    beta = pow(alpha, (P + 1) // 4, P)
    if beta * beta % P != alpha:
        raise InvalidSignature("r is not the x-coordinate of a curve point")
    y = beta if (beta & 1) == odd else P - beta
    return x, y


def recover_from_hash(msg_hash: bytes, sig: SignatureBundle) -> bytes:
    if sig.v not in (27, 28):
        raise InvalidSignature(f"v must be 27 or 28, got {sig.v}")
    if not (1 <= sig.r < CURVE_ORDER and 1 <= sig.s < CURVE_ORDER):
        raise InvalidSignature("r or s out of range")
    if sig.s > _HALF_ORDER:
        raise InvalidSignature("non-canonical (high) s")
    rx, ry = _lift_x(sig.r, bool(sig.v - 27))
    z = int.from_bytes(msg_hash, "big") % CURVE_ORDER
    rinv = pow(sig.r, -1, CURVE_ORDER)
    sR = _jac_mul((rx, ry, 1), sig.s)
    zG = _jac_mul(_G, (-z) % CURVE_ORDER)
    q = _to_affine(_jac_mul(_jac_add(sR, zG), rinv))
    if q is None:
        raise InvalidSignature("recovered point at infinity")
    return _pubkey_to_address(q)


def recover_address(
    message: Union[str, bytes], sig: Union[SignatureBundle, bytes, str]
) -> bytes:
    """Return the 20-byte address that produced ``sig`` over ``message``.

    Raises :class:`InvalidSignature` for malformed input, ``v`` outside
    {27, 28}, high ``s`` or an unrecoverable point.
    """
    if isinstance(sig, str):
        sig = SignatureBundle.from_hex(sig)
    elif isinstance(sig, (bytes, bytearray)):
        sig = SignatureBundle.from_bytes(bytes(sig))
    return recover_from_hash(personal_message_hash(message), sig)
