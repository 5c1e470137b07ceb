import json

import pytest
from hypothesis import given, settings, strategies as st

from w3authkit.guard import (
    Literal,
    MessageTemplate,
    StoreError,
    TemplateStore,
    Wildcard,
    attack_message,
    build_store,
    check_signature_request,
    compile_matcher,
    corpus_document,
    extract_template,
    guard_corpus,
    load_corpus,
    normalize_origin,
    record_login,
    template_from_message,
)

from listings import BMMA, FOUNDATION, OPENSEA, OPENSEA_ADDRESS

OTHER_UUID = "0b7b0a6e-55a1-4f2c-9d7e-0a1b2c3d4e5f"
OTHER_ADDRESS = "0x" + "ab" * 20


def wildcards(t):
    return [tok.cls for tok in t.tokens if isinstance(tok, Wildcard)]


def test_identical_messages_stay_literal():
    t = extract_template(template_from_message("opensea.io", OPENSEA), OPENSEA)
    assert wildcards(t) == []
    assert t.render() == OPENSEA
    assert t.sample_count == 2


def test_listing_pair_wildcards_uuid_and_address():
    other = OPENSEA.replace("66ffb8f1-5eb1-4477-9558-36a60eb1b51f", OTHER_UUID).replace(OPENSEA_ADDRESS, OTHER_ADDRESS)
    t = extract_template(template_from_message("opensea.io", OPENSEA), other)
    assert wildcards(t) == ["addr", "uuid"]
    assert t.render().endswith("Wallet address: <addr>\nNonce: <uuid>")


def test_unequal_lengths_use_lcs():
    t = extract_template(template_from_message("x.io", "Nonce: 1 2"), "Nonce: 9")
    assert t.tokens[0] == Literal("Nonce:")
    assert wildcards(t) == ["any"]
    assert compile_matcher(t).search("Nonce: 9")


@pytest.mark.parametrize(
    "a,b,cls",
    [
        ("1706389762", "1706389999", "num"),
        ("2024-01-13T03:59:00.000Z", "2024-01-14T04:00:00.000Z", "dt"),
        (OPENSEA_ADDRESS, OTHER_ADDRESS, "addr"),
        ("66ffb8f1-5eb1-4477-9558-36a60eb1b51f", OTHER_UUID, "uuid"),
        ("3deca92b", "abc", "any"),
    ],
)
def test_narrowest_class(a, b, cls):
    t = extract_template(template_from_message("x.io", f"Nonce: {a}"), f"Nonce: {b}")
    assert wildcards(t) == [cls]


def test_widening_a_wildcard():
    t = extract_template(template_from_message("x.io", "Nonce: 12"), "Nonce: 34")
    t = extract_template(t, "Nonce: ab")
    assert wildcards(t) == ["any"]


def test_foundation_template_found_inside_bmma_message():
    m = compile_matcher(template_from_message("foundation.app", FOUNDATION.replace(".", "")))
    assert m.search(BMMA)


def test_literal_template_matches_source():
    assert compile_matcher(template_from_message("opensea.io", OPENSEA)).search(OPENSEA)


def test_uuid_slot_rejects_short_token():
    t = MessageTemplate("x.io", [Literal("Nonce:"), Literal(" "), Wildcard("uuid")])
    assert not compile_matcher(t).search("Nonce: abc")
    assert compile_matcher(t).search("Nonce: " + OTHER_UUID)


def test_red_and_yellow_for_foreign_origin():
    store = record_login("opensea.io", OPENSEA, TemplateStore())
    d = check_signature_request(OPENSEA, "evil.example", store)
    assert d.red is not None and d.red.victim_domain == "opensea.io"
    assert d.yellow


def test_self_origin_is_clean():
    store = record_login("opensea.io", OPENSEA, TemplateStore())
    d = check_signature_request(OPENSEA, "https://www.opensea.io:443", store)
    assert d.red is None and not d.yellow
    assert d.clean


def test_red_and_yellow_together():
    store = record_login("foundation.app", FOUNDATION, TemplateStore())
    d = check_signature_request(FOUNDATION, "phish.example", store)
    assert d.red is not None and d.yellow


def test_victim_is_the_most_specific_match():
    store = TemplateStore()
    store.record("short.io", "connect to Foundation")
    store.record("foundation.app", FOUNDATION)
    d = store.check("Hello! " + FOUNDATION, "evil.example")
    assert d.red.victim_domain == "foundation.app"
    assert set(d.red.victims) == {"short.io", "foundation.app"}


def test_one_template_per_domain():
    store = TemplateStore()
    for i in range(5):
        store.record("lifty.io", f"Sign in to Lifty\nNonce: {1000 + i * 37}")
    assert len(store) == 1
    t = store.get("lifty.io")
    assert t.sample_count == 5
    assert wildcards(t) == ["num"]


@pytest.mark.parametrize(
    "origin,host",
    [("https://www.OpenSea.io/login", "opensea.io"), ("opensea.io:8443", "opensea.io"), ("galler.io", "galler.io")],
)
def test_normalize_origin(origin, host):
    assert normalize_origin(origin) == host


def test_store_roundtrip_and_atomic_save(tmp_path):
    store = build_store(guard_corpus(seed=2)[:4])
    path = tmp_path / "store.json"
    store.save(path)
    again = TemplateStore.load(path)
    assert again.to_json() == store.to_json()
    for d in store.templates:
        assert again.templates[d].tokens == store.templates[d].tokens
    assert [p.name for p in tmp_path.iterdir()] == ["store.json"]


def test_store_file_format(tmp_path):
    store = TemplateStore()
    store.record("lifty.io", "Nonce: 1")
    store.record("lifty.io", "Nonce: 2")
    doc = json.loads(store.to_json())
    assert doc["lifty.io"]["tokens"] == [{"lit": "Nonce: "}, {"wc": "num"}]
    assert doc["lifty.io"]["sample_count"] == 2


def test_bad_store_rejected():
    with pytest.raises(StoreError):
        TemplateStore.from_json("[]")
    with pytest.raises(StoreError):
        TemplateStore.from_json('{"a.io": {"tokens": [{"wc": "weird"}]}}')


def test_corpus_document_roundtrip():
    sites = guard_corpus(seed=5)
    assert len(sites) == 25
    assert all(len(s.extraction) == 5 and len(s.test) == 5 for s in sites)
    again = load_corpus(corpus_document(sites))
    assert [s.test for s in again] == [s.test for s in sites]
    assert guard_corpus(seed=5)[0].test == sites[0].test


def test_unchecked_body_attack_drops_prose():
    sites = {s.label: s for s in guard_corpus()}
    q = sites["questn"]
    attack = attack_message(q, q.test[0])
    assert "QuestN" not in attack and "Timestamp:" in attack
    f = sites["foundation"]
    assert attack_message(f, f.test[0], embed=True).count(f.test[0]) == 1


# -- properties

shapes = st.lists(st.sampled_from(["uuid", "num", "addr", "word"]), min_size=1, max_size=4)


def fill(kind, draw):
    return {
        "uuid": draw(st.uuids()).__str__(),
        "num": str(draw(st.integers(0, 10**12))),
        "addr": "0x" + draw(st.binary(min_size=20, max_size=20)).hex(),
        "word": draw(st.from_regex(r"[A-Za-z]{1,8}", fullmatch=True)),
    }[kind]


@st.composite
def same_shape_messages(draw):
    kinds = draw(shapes)
    n = draw(st.integers(2, 6))
    msgs = []
    for _ in range(n):
        parts = [f"Field{i}: {fill(k, draw)}" for i, k in enumerate(kinds)]
        msgs.append("Sign in to Prop\n" + "\n".join(parts))
    return msgs


@settings(max_examples=60, deadline=None)
@given(same_shape_messages())
def test_every_sample_matches_final_template(msgs):
    store = TemplateStore()
    for m in msgs:
        store.record("prop.io", m)
    matcher = compile_matcher(store.get("prop.io"))
    assert all(matcher.search(m) for m in msgs)


@settings(max_examples=60, deadline=None)
@given(same_shape_messages())
def test_extraction_is_idempotent(msgs):
    t = template_from_message("prop.io", msgs[0])
    for m in msgs[1:]:
        t = extract_template(t, m)
    again = extract_template(t, msgs[-1])
    assert again.tokens == t.tokens


@settings(max_examples=40, deadline=None)
@given(same_shape_messages())
def test_self_origin_never_red(msgs):
    store = TemplateStore()
    for m in msgs:
        store.record("prop.io", m)
    assert all(store.check(m, "prop.io").red is None for m in msgs)
