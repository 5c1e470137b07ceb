import hashlib
import random

import pytest
from eth_account import Account
from eth_account.messages import encode_defunct
from eth_utils import to_checksum_address as oracle_checksum
from hypothesis import given, settings, strategies as st

from w3authkit.wallet_crypto import (
    CURVE_ORDER,
    InvalidSeed,
    InvalidSignature,
    SignatureBundle,
    keccak256,
    keypair_from_seed,
    personal_message_hash,
    personal_sign,
    recover_address,
    sign_hash,
    to_checksum_address,
)

from listings import OPENSEA, OPENSEA_ADDRESS

SEED_ONE = (1).to_bytes(32, "big")


def test_keccak_known_vector():
    # keccak-256 of the empty string, the pre-standard padding Ethereum uses
    assert keccak256(b"").hex() == "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470"


def test_zero_seed_rejected():
    with pytest.raises(InvalidSeed):
        keypair_from_seed(bytes(32))
    with pytest.raises(InvalidSeed):
        keypair_from_seed(CURVE_ORDER.to_bytes(32, "big"))
    with pytest.raises(InvalidSeed):
        keypair_from_seed(b"short")


def test_seed_is_deterministic():
    assert keypair_from_seed(b"\x07" * 32) == keypair_from_seed(b"\x07" * 32)


def test_seed_one_matches_oracle():
    key = keypair_from_seed(SEED_ONE)
    assert key.checksum_address == Account.from_key(SEED_ONE).address


def test_listing_message_signature_matches_oracle():
    seed = hashlib.sha256(b"listing test key").digest()
    ours = personal_sign(OPENSEA, keypair_from_seed(seed))
    theirs = Account.sign_message(encode_defunct(text=OPENSEA), seed)
    assert ours.encoded == bytes(theirs.signature)
    assert len(ours.hex) == 132


def test_signing_is_deterministic():
    key = keypair_from_seed(b"\x05" * 32)
    assert personal_sign("same", key) == personal_sign("same", key)


def test_tampered_message_recovers_other_address():
    key = keypair_from_seed(b"\x09" * 32)
    sig = personal_sign("pay 1 token", key)
    assert recover_address("pay 9 token", sig) != key.address


@pytest.mark.parametrize("v", [0, 1, 26, 29, 35])
def test_bad_v_rejected(v):
    key = keypair_from_seed(b"\x09" * 32)
    sig = personal_sign("m", key)
    with pytest.raises(InvalidSignature):
        recover_address("m", SignatureBundle(sig.r, sig.s, v))


def test_high_s_rejected():
    key = keypair_from_seed(b"\x09" * 32)
    sig = personal_sign("m", key)
    flipped = SignatureBundle(sig.r, CURVE_ORDER - sig.s, 55 - sig.v)
    with pytest.raises(InvalidSignature):
        recover_address("m", flipped)


@pytest.mark.parametrize(
    "sig",
    ["", "0x", "0x" + "00" * 64 + "1b", "0xzz", "0x" + "ff" * 65, "0x" + "00" * 64],
)
def test_malformed_signatures_rejected(sig):
    with pytest.raises(InvalidSignature):
        recover_address("m", sig)


def test_prefix_binding():
    key = keypair_from_seed(b"\x0b" * 32)
    msg = "bind me"
    sig = personal_sign(msg, key)
    raw = sign_hash(keccak256(msg.encode()), key)
    assert sig != raw
    assert personal_message_hash(msg) != keccak256(msg.encode())


def test_checksum_of_listing_address():
    expected = oracle_checksum(OPENSEA_ADDRESS)
    assert to_checksum_address(OPENSEA_ADDRESS) == expected
    assert to_checksum_address("0x" + OPENSEA_ADDRESS[2:].upper()) == expected


def test_checksum_zero_address():
    assert to_checksum_address(bytes(20)) == "0x" + "0" * 40


def test_checksum_is_idempotent():
    once = to_checksum_address(OPENSEA_ADDRESS)
    assert to_checksum_address(once.lower()) == once
    assert to_checksum_address(once) == once


@settings(max_examples=40, deadline=None)
@given(seed=st.binary(min_size=32, max_size=32), msg=st.binary(max_size=200))
def test_roundtrip_property(seed, msg):
    try:
        key = keypair_from_seed(seed)
    except InvalidSeed:
        return
    sig = personal_sign(msg, key)
    assert sig.s <= CURVE_ORDER // 2
    assert sig.v in (27, 28)
    assert recover_address(msg, sig) == key.address


@settings(max_examples=15, deadline=None)
@given(seed=st.binary(min_size=32, max_size=32), msg=st.text(max_size=80))
def test_matches_oracle_property(seed, msg):
    try:
        key = keypair_from_seed(seed)
    except InvalidSeed:
        return
    theirs = Account.sign_message(encode_defunct(text=msg), key.private_scalar.to_bytes(32, "big"))
    assert personal_sign(msg, key).encoded == bytes(theirs.signature)


def test_recover_accepts_all_encodings():
    rng = random.Random(3)
    key = keypair_from_seed(rng.randbytes(32))
    sig = personal_sign("x", key)
    assert recover_address("x", sig) == recover_address("x", sig.encoded) == recover_address("x", sig.hex)
