import json
import random

import pytest
import requests

from w3authkit.message_model import FieldKind, parse_message
from w3authkit.vulnsim import (
    SimServer,
    SimulatedSite,
    VulnProfile,
    dump_profiles,
    fixture_table2,
    load_profiles,
    table1_profiles,
)
from w3authkit.wallet_crypto import keypair_from_seed, personal_sign

ALICE = keypair_from_seed(b"\x31" * 32)
BOB = keypair_from_seed(b"\x32" * 32)


class Clock:
    def __init__(self, t=1_700_000_000.0):
        self.t = t

    def __call__(self):
        return self.t


def site(clock=None, **kw):
    kw.setdefault("domain", "sim.test")
    kw.setdefault("name", "Sim")
    kw.setdefault("include_address", True)
    return SimulatedSite(VulnProfile("t", **kw), clock=clock or Clock(), rng=random.Random(1))


def login(s, key=ALICE, message=None):
    msg = message if message is not None else s.handle_query(key.address_hex)
    return msg, s.handle_auth(msg, personal_sign(msg, key).hex, key.address_hex)


def test_low_risk_message_looks_like_a_good_design():
    msg = site().handle_query(ALICE.address_hex)
    p = parse_message(msg)
    assert p.has(FieldKind.DOMAIN) and p.has(FieldKind.NAME)
    assert len(p.get(FieldKind.NONCE).value) == 36


def test_no_nonce_messages_repeat():
    s = site(nonce_kind="none", include_address=False)
    assert s.handle_query(ALICE.address_hex) == s.handle_query(BOB.address_hex)


def test_foundation_shape():
    s = site(include_domain=False, nonce_kind="none", include_address=False,
             statement="Please sign this message to connect to {name}.", name="Foundation")
    p = parse_message(s.handle_query(ALICE.address_hex))
    assert p.get(FieldKind.NAME).value == "Foundation"
    assert not p.has(FieldKind.DOMAIN)


@pytest.mark.parametrize("p", fixture_table2() + table1_profiles(), ids=lambda p: p.label)
def test_honest_login_succeeds_everywhere(p):
    s = SimulatedSite(p, clock=Clock())
    if p.query_mode == "message":
        msg = s.handle_query(ALICE.address_hex)
        result = s.handle_auth(msg, personal_sign(msg, ALICE).hex, ALICE.address_hex)
        assert result.ok, result
        assert s.handle_access(result.token)["address"] == ALICE.address_hex


def test_contains_accepts_prefix():
    s = site(body_check="contains")
    msg = "zz" + s.handle_query(ALICE.address_hex)
    assert login(s, message=msg)[1].ok
    strict = site()
    _, res = login(strict, message="zz" + strict.handle_query(ALICE.address_hex))
    assert res.stage == "body"


def test_one_time_rejects_second_use():
    s = site()
    msg, first = login(s)
    second = s.handle_auth(msg, personal_sign(msg, ALICE).hex, ALICE.address_hex)
    assert first.ok
    assert second.stage == "nonce"


def test_temporary_expires():
    clock = Clock()
    s = site(clock, nonce_kind="temporary", nonce_ttl=2.0)
    msg, first = login(s)
    assert first.ok
    clock.t += 1
    assert login(s, message=msg)[1].ok
    clock.t += 2
    assert login(s, message=msg)[1].stage == "nonce"


def test_time_based_window():
    clock = Clock()
    s = site(clock, nonce_kind="time-based", nonce_format="timestamp13", nonce_label="Timestamp")
    msg, first = login(s)
    assert first.ok
    clock.t += 61
    assert login(s, message=msg)[1].stage == "nonce"


def test_no_expiry_only_refuses_future():
    clock = Clock()
    s = site(clock, nonce_kind="time-based", nonce_format="timestamp10", nonce_label="Timestamp",
             time_window=None)
    msg, _ = login(s)
    clock.t += 10 * 86400
    assert login(s, message=msg)[1].ok
    future = msg.replace(str(int(clock.t - 10 * 86400)), str(int(clock.t + 3600)))
    assert future != msg
    assert login(s, message=future)[1].stage == "nonce"


def test_null_signature_without_sig_check():
    s = site(sig_check=False)
    msg = s.handle_query(ALICE.address_hex)
    assert s.handle_auth(msg, "", ALICE.address_hex).ok
    assert site().handle_auth(msg, "", ALICE.address_hex).stage == "signature"


def test_address_swap_without_addr_check():
    s = site(addr_check=False)
    msg = s.handle_query(BOB.address_hex)
    assert s.handle_auth(msg, personal_sign(msg, ALICE).hex, BOB.address_hex).ok
    strict = site()
    msg = strict.handle_query(BOB.address_hex)
    assert strict.handle_auth(msg, personal_sign(msg, ALICE).hex, BOB.address_hex).stage == "address"


def test_message_check_off_accepts_anything():
    s = site(message_check=False)
    assert login(s, message="whatever")[1].ok


def test_rejections_name_their_stage():
    s = site()
    msg = s.handle_query(ALICE.address_hex)
    assert s.handle_auth(msg, "0x00", ALICE.address_hex).stage == "signature"
    assert s.handle_auth(msg, personal_sign(msg, BOB).hex, ALICE.address_hex).stage == "address"
    assert login(s, message=msg.replace("Sign this", "Sign that"))[1].stage == "body"
    forged = msg[:-4] + "abcd"
    assert login(s, message=forged)[1].stage == "nonce"


def test_access_rules():
    clock = Clock()
    s = site(clock, token_ttl=10)
    _, res = login(s)
    assert s.handle_access(res.token)["address"] == ALICE.address_hex
    assert s.handle_access("never-issued") is None
    clock.t += 11
    assert s.handle_access(res.token) is None


def test_tightening_never_admits_more():
    loose = site(body_check="contains")
    strict = site()
    for s in (loose, strict):
        msg = s.handle_query(ALICE.address_hex)
        for payload in (msg, "x" + msg, msg + "\nextra", "random"):
            strict_ok = login(strict, message=payload.replace(msg, strict.handle_query(ALICE.address_hex)))[1].ok
            loose_ok = login(loose, message=payload.replace(msg, loose.handle_query(ALICE.address_hex)))[1].ok
            assert loose_ok or not strict_ok


def test_profile_validation():
    with pytest.raises(ValueError):
        VulnProfile("x", nonce_kind="sometimes")
    with pytest.raises(ValueError):
        VulnProfile("x", query_mode="none", nonce_kind="one-time")
    with pytest.raises(ValueError):
        VulnProfile.from_dict({"label": "x", "colour": "red"})


def test_profile_file_roundtrip():
    profiles = fixture_table2()
    assert load_profiles(dump_profiles(profiles)) == profiles


def test_fixture_shape():
    rows = fixture_table2()
    assert len(rows) == 29
    assert [p.row for p in rows] == list(range(1, 30))
    assert len({p.label for p in rows}) == 29


def test_http_front():
    p = VulnProfile("demo", domain="demo.test", name="Demo", include_address=True)
    with SimServer([p]) as sim:
        base = sim.base_url("demo")
        r = requests.post(f"{base}/query", json={"address": ALICE.address_hex}, timeout=5)
        msg = r.json()["data"]["auth"]["message"]
        r = requests.post(
            f"{base}/auth",
            json={"address": ALICE.address_hex, "message": msg, "signature": personal_sign(msg, ALICE).hex},
            timeout=5,
        )
        token = r.json()["data"]["auth"]["token"]
        r = requests.get(f"{base}/access", headers={"Authorization": f"Bearer {token}"}, timeout=5)
        assert r.status_code == 200 and r.json()["data"]["address"] == ALICE.address_hex
        assert requests.get(f"{base}/access", timeout=5).status_code == 401
        assert requests.post(f"{sim.root_url}/p/nope/query", json={}, timeout=5).status_code == 404
        bad = requests.post(f"{base}/auth", data="not json", timeout=5)
        assert bad.status_code == 400
        assert sim.sites["demo"].request_count >= 5


def test_restart_behaves_the_same():
    p = VulnProfile("demo", domain="demo.test", name="Demo")
    a, b = SimulatedSite(p, clock=Clock()), SimulatedSite(p, clock=Clock())
    ma, mb = a.handle_query(ALICE.address_hex), b.handle_query(ALICE.address_hex)
    assert parse_message(ma).body == parse_message(mb).body
    assert login(a, message=ma)[1].ok and login(b, message=mb)[1].ok


def test_nonce_endpoint_mode(targets):
    t = targets["element"]
    from w3authkit.flexrequest import Policy, SessionContext, run_item

    s = SessionContext()
    run_item(t.query, s, {"addr": ALICE.address_hex}, Policy(timeout=5))
    assert set(s.bindings) == {"nonce"}
    assert json.dumps(s.bindings)
