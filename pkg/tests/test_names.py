import pytest
from hypothesis import given, strategies as st

from fittsim.names import (Data, FittNackPayload, Interest, MalformedName, Nack, Name, Reason,
                           is_prefix_of, parse_name)

component = st.text(st.characters(blacklist_characters="/", blacklist_categories=("Cs",)),
                    min_size=1, max_size=8)
names = st.lists(component, max_size=6).map(Name)


def test_parse_five_components():
    n = parse_name("/univ1/cs/alice/video/demo.mp4")
    assert len(n) == 5
    assert n[0] == "univ1" and n[-1] == "demo.mp4"


def test_parse_root_is_empty():
    assert len(parse_name("/")) == 0


@pytest.mark.parametrize("text", ["/a//b", "a/b", "", "/a/", "//"])
def test_malformed(text):
    with pytest.raises(MalformedName):
        parse_name(text)


def test_component_validation():
    with pytest.raises(MalformedName):
        Name(["a", ""])
    with pytest.raises(MalformedName):
        Name(["a/b"])


@pytest.mark.parametrize("prefix,name,expected", [
    ("/univ1/cs", "/univ1/cs/alice/video/demo.mp4", True),
    ("/", "/anything/at/all", True),
    ("/univ1/service/email", "/univ1/service/video", False),
    ("/univ1/cs/alice", "/univ1/cs", False),
])
def test_prefix_examples(prefix, name, expected):
    assert is_prefix_of(parse_name(prefix), parse_name(name)) is expected


def test_component_boundaries_respected():
    # "/univ" is not a prefix of "/univ1" even though the text is
    assert not is_prefix_of(parse_name("/univ"), parse_name("/univ1/x"))


@given(names)
def test_round_trip(n):
    assert parse_name(str(n)) == n


@given(names, names)
def test_prefix_of_concatenation(a, b):
    assert is_prefix_of(a, Name(a + b))


@given(names)
def test_prefix_reflexive(n):
    assert is_prefix_of(n, n)


@given(names, names)
def test_prefix_antisymmetric(a, b):
    if is_prefix_of(a, b) and is_prefix_of(b, a):
        assert a == b


@given(names, names, names)
def test_prefix_transitive(a, b, c):
    if is_prefix_of(a, b) and is_prefix_of(b, c):
        assert is_prefix_of(a, c)


def test_name_helpers():
    n = parse_name("/a/b")
    assert str(n.append("c")) == "/a/b/c"
    assert n.prefix(1) == parse_name("/a")
    assert n == ("a", "b")


def test_packets_are_immutable():
    i = Interest(parse_name("/a"), 1)
    with pytest.raises(Exception):
        i.nonce = 2
    assert Data(parse_name("/a")).freshness_ms == 0


def test_nack_payload_invariants():
    p = parse_name("/univ1/service/email")
    FittNackPayload(Reason.VALID, p, capacity=1500.0)
    FittNackPayload(Reason.FAKE, p, fake_list=(p.append("zz"),))
    with pytest.raises(ValueError):
        FittNackPayload(Reason.VALID, p)
    with pytest.raises(ValueError):
        FittNackPayload(Reason.VALID, p, capacity=0.0)
    with pytest.raises(ValueError):
        FittNackPayload(Reason.FAKE, p, fake_list=())
    with pytest.raises(ValueError):
        # fake names must sit strictly under the attacked prefix
        FittNackPayload(Reason.FAKE, p, fake_list=(parse_name("/univ1/other/x"),))
    with pytest.raises(ValueError):
        FittNackPayload(Reason.FAKE, p, fake_list=(p,))
    assert Nack(FittNackPayload(Reason.VALID, p, capacity=1.0)).hop_tag == ""
