import json
import random
import time

import pytest
import requests
from eth_account import Account
from eth_account.messages import encode_defunct
from eth_utils import to_checksum_address as oracle_checksum

from w3authkit.checker import NonceKind, Outcome, Scanner, craft_bmma_message
from w3authkit.cli import main
from w3authkit.flexrequest import Policy, load_targets
from w3authkit.guard import attack_message, build_store, guard_corpus
from w3authkit.vulnsim import SimServer, fixture_table2, table1_profiles, target_document
from w3authkit.wallet_crypto import (
    CURVE_ORDER,
    keypair_from_seed,
    personal_sign,
    recover_address,
    to_checksum_address,
)

from listings import OPENSEA_ADDRESS

FOREIGN = "evil.example"


def detail(record_property, text):
    record_property("detail", text)
    print(text)


@pytest.mark.slow
@pytest.mark.criterion(1, "published results table reproduced by a CLI scan of the fixture fleet")
def test_table2_reproduction(tmp_path, record_property):
    profiles = fixture_table2()
    with SimServer(profiles) as sim:
        path = tmp_path / "targets.json"
        path.write_text(target_document(profiles, sim.root_url), encoding="utf-8")
        out = tmp_path / "report.json"
        t0 = time.monotonic()
        code = main(["scan", "--targets", str(path), "--out", str(out), "--interval", "0"])
        elapsed = time.monotonic() - t0
    s = json.loads(out.read_text())["summary"]
    detail(record_property, f"risk {s['risk']}, RA {s['replay']}, BMMA {s['bmma']}, {elapsed:.1f} s")
    assert code == 2
    assert s["inconclusive"] == 0
    assert s["risk"] == {"C": 2, "H": 13, "M": 7, "L": 7}
    assert s["replay"] == 11
    assert s["bmma"] == 7
    assert elapsed < 300


@pytest.mark.criterion(2, "nonce type inferred for the five nonce behaviours")
def test_table1_nonce_inference(targets, record_property):
    expected = {
        "nonce-one-time": NonceKind.ONE_TIME,
        "nonce-temporary": NonceKind.TEMPORARY,
        "nonce-time-based": NonceKind.TIME_BASED,
        "nonce-unchecked": NonceKind.INVALID_NONCE,
        "nonce-none": NonceKind.NO_NONCE,
    }
    assert [p.label for p in table1_profiles()] == list(expected)
    scanner = Scanner(Policy(timeout=5), seed=21)
    got = {label: scanner.check_nonce(targets[label]).nonce_kind for label in expected}
    hits = sum(got[k] is expected[k] for k in expected)
    detail(record_property, f"{hits}/5 correct")
    assert got == expected


@pytest.mark.criterion(3, "guard flags replayed and embedded messages, stays quiet on own origin")
def test_guard_rounds(record_property):
    sites = guard_corpus()
    store = build_store(sites)
    guarded = [s for s in sites if not s.body_unchecked]
    unchecked = [s for s in sites if s.body_unchecked]

    def caught(site, embed):
        return all(store.check(attack_message(site, m, embed), FOREIGN).red is not None for m in site.test)

    round1 = [s.label for s in guarded if caught(s, False)]
    round2 = [s.label for s in guarded if caught(s, True)]
    own_red = sum(store.check(m, s.origin).red is not None for s in sites for m in s.test)
    missed_v2 = [s.label for s in unchecked if not caught(s, False)]
    detail(
        record_property,
        f"round 1 {len(round1)}/20, round 2 {len(round2)}/20, round 3 {own_red} red of "
        f"{sum(len(s.test) for s in sites)}, body-unchecked missed {len(missed_v2)}/{len(unchecked)}",
    )
    assert len(sites) == 25 and len(guarded) == 20 and len(unchecked) == 5
    assert len(round1) == 20
    assert len(round2) == 20
    assert own_red == 0


@pytest.mark.criterion(4, "one signature buys tokens from three servers")
def test_bmma_end_to_end(targets, record_property):
    scanner = Scanner(Policy(timeout=5), seed=33)
    chosen = [targets[label] for label in ("foundation", "planetix", "questn")]
    findings = [(t, scanner.check_message(t)) for t in chosen]
    victim = keypair_from_seed(b"\x42" * 32)
    genuine, sessions = {}, {}
    for t in chosen:
        genuine[t.label], sessions[t.label] = scanner.fresh_message(t, victim)
    message = craft_bmma_message(findings, genuine)
    sig = personal_sign(message, victim).hex
    outcomes = {t.label: scanner.auth(t, sessions[t.label], message, sig, victim.address_hex)[0] for t in chosen}
    tokens = sum(o is Outcome.TOKEN for o in outcomes.values())
    detail(record_property, f"{tokens}/3 tokens from one signature")
    assert outcomes == {label: Outcome.TOKEN for label in outcomes}


def _login(base, key, message=None):
    if message is None:
        r = requests.post(f"{base}/query", json={"address": key.address_hex}, timeout=5)
        message = r.json()["data"]["auth"]["message"]
    sig = personal_sign(message, key).hex
    r = requests.post(f"{base}/auth", json={"address": key.address_hex, "message": message, "signature": sig}, timeout=5)
    token = (r.json().get("data") or {}).get("auth", {}).get("token") if r.ok else None
    return message, r.status_code, token


@pytest.mark.criterion(5, "replay succeeds without a nonce and fails with a one-time nonce")
def test_replay_behaviour(sim, record_property):
    key = keypair_from_seed(b"\x43" * 32)
    none = sim.base_url("nonce-none")
    msg, _, first = _login(none, key)
    _, _, second = _login(none, key, msg)
    once = sim.base_url("nonce-one-time")
    msg, _, honest = _login(once, key)
    _, status, replayed = _login(once, key, msg)
    detail(
        record_property,
        f"no-nonce replay token {'issued' if second else 'refused'}, "
        f"one-time replay {'issued' if replayed else f'refused ({status})'}",
    )
    assert first and second and first != second
    access = requests.get(f"{none}/access", headers={"Authorization": f"Bearer {second}"}, timeout=5)
    assert access.status_code == 200
    assert honest
    assert replayed is None and status >= 400


@pytest.mark.criterion(6, "signing roundtrip, EIP-55 checksum and canonical signatures")
def test_crypto_properties(record_property):
    rng = random.Random(6)
    half = CURVE_ORDER // 2
    bad_roundtrip = bad_canonical = 0
    for i in range(1000):
        key = keypair_from_seed(rng.randbytes(32))
        msg = rng.randbytes(rng.randrange(0, 200)).hex() if i % 2 else f"login #{i} {rng.random()}"
        sig = personal_sign(msg, key)
        bad_roundtrip += recover_address(msg, sig) != key.address
        bad_canonical += not (0 < sig.s <= half)
        if i % 100 == 0:
            assert Account.recover_message(encode_defunct(text=msg), signature=sig.encoded) == oracle_checksum(key.address_hex)
    ours = to_checksum_address(OPENSEA_ADDRESS)
    detail(record_property, f"{1000 - bad_roundtrip}/1000 roundtrips, {bad_canonical} high-s, checksum {ours}")
    assert bad_roundtrip == 0
    assert bad_canonical == 0
    assert ours == oracle_checksum(OPENSEA_ADDRESS)
    assert ours == "0x36E7C6FeB20A90b07F63863D09cC12C4c9f39064"


@pytest.mark.criterion(7, "template store stays small")
def test_template_economy(tmp_path, record_property):
    store = build_store(guard_corpus())
    path = tmp_path / "store.json"
    store.save(path)
    total = path.stat().st_size
    largest = max(store.template_sizes().values())
    detail(record_property, f"store {total} B, largest template {largest} B")
    assert total < 10 * 1024
    assert largest <= 2048


@pytest.mark.criterion(8, "request budget for a full scan of one profile")
def test_request_budget(record_property):
    (profile,) = [p for p in fixture_table2() if p.label == "planetix"]
    with SimServer([profile]) as sim:
        (target,) = load_targets(target_document([profile], sim.root_url))
        report = Scanner(Policy(timeout=5), seed=8).scan(target)
        served = sim.sites["planetix"].request_count
    detail(record_property, f"{served} requests served, {report.requests} sent")
    assert not report.inconclusive
    assert served == report.requests
    assert served <= 60
