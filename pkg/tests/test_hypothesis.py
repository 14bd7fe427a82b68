import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbclift.errors import ParseError
from sbclift.hypothesis import (
    Literal,
    ModeDecl,
    build_space,
    canonical_body,
    generic_bias,
    is_safe,
    make_constraint,
    parse_bias,
    parse_body,
    parse_constraints,
    parse_modeb,
    pup_bias,
    score,
    subsumers,
    subsumes,
    write_constraints,
)

# Example-1 listing minus the two positive-pGEQ rules, which do not
# theta-subsume the query (see test_example1_positive_geq_not_subsumers)
EXAMPLE1_SOUND = [
    ":- q(V1,V1).",
    ":- q(V1,V2).",
    ":- not pGEQ(V1,V1), q(V1,V2).",
    ":- not pGEQ(V1,V2), q(V1,V2).",
    ":- not pGEQ(V2,V1), q(V1,V2).",
    ":- not pGEQ(V2,V2), q(V1,V2).",
    ":- not pGEQ(V1,V1), q(V1,V1).",
    ":- not pGEQ(V1,V1), not pGEQ(V1,V2), q(V1,V2).",
    ":- not pGEQ(V1,V1), not pGEQ(V2,V1), q(V1,V2).",
    ":- not pGEQ(V1,V1), not pGEQ(V2,V2), q(V1,V2).",
    ":- not pGEQ(V1,V2), not pGEQ(V2,V1), q(V1,V2).",
    ":- not pGEQ(V1,V2), not pGEQ(V2,V2), q(V1,V2).",
    ":- not pGEQ(V2,V1), not pGEQ(V2,V2), q(V1,V2).",
]


def oracle_space_size(bias, vmax, bmax):
    """Isomorphism classes counted by closing each body under all renamings."""
    lits = [(d.predicate, pos, a, b, d.symmetric)
            for d in bias for a in range(1, vmax + 1) for b in range(1, vmax + 1)
            if not (d.anti_reflexive and a == b) for pos in (True, False)]

    def renamed(body, ren):
        return frozenset((p, pos, frozenset((ren[a], ren[b])) if sym else (ren[a], ren[b]))
                         for p, pos, a, b, sym in body)

    classes = set()
    ident = {v: v for v in range(1, vmax + 1)}
    for k in range(1, bmax + 1):
        for combo in itertools.combinations(lits, k):
            preds = [l[0] for l in combo]
            if any(preds.count(d.predicate) > d.recall for d in bias):
                continue
            if len({(p, a, b) for p, _, a, b, _ in combo}) < k:
                continue
            pos_vars = {v for l in combo if l[1] for v in l[2:4]}
            if not pos_vars or not {v for l in combo for v in l[2:4]} <= pos_vars:
                continue
            classes.add(frozenset(renamed(combo, dict(zip(ident, p)))
                                  for p in itertools.permutations(ident)))
    return len(classes)


def test_generic_bmax1_by_hand(generic_space):
    small = build_space(generic_bias(), bmax=1)
    assert {str(c) for c in small} == {
        ":- r(V1,V1).", ":- r(V1,V2).", ":- close(V1,V2).",
        ":- pGEQ(V1,V1).", ":- pGEQ(V1,V2).", ":- q(V1,V1).", ":- q(V1,V2).",
    }


@pytest.mark.parametrize("bias", [generic_bias, pup_bias])
@pytest.mark.parametrize("bmax", [1, 2])
def test_space_size_matches_oracle(bias, bmax):
    assert len(build_space(bias(), bmax=bmax)) == oracle_space_size(bias(), 3, bmax)


def test_full_space_sizes(generic_space, pup_space):
    # frozen after the renaming-closure oracle agreed at bmax 3
    assert (len(generic_space), len(pup_space)) == (1401, 5226)


def test_single_r_bias():
    space = build_space(parse_bias("#modeb(1,r(var(t),var(t)))."))
    assert [str(c) for c in space] == [":- r(V1,V1).", ":- r(V1,V2)."]


def test_space_members_safe_canonical_unique(generic_space):
    bodies = [c.body for c in generic_space]
    assert len(set(bodies)) == len(bodies)
    for c in generic_space:
        assert is_safe(c.body)
        assert canonical_body(c.body, generic_space.symmetric) == c.body
        assert c.variables == tuple(range(1, len(c.variables) + 1))


def test_ids_are_one_based_and_contiguous(pup_space):
    assert [c.id for c in pup_space] == list(range(1, len(pup_space) + 1))


def test_example1_rules_in_space(generic_space):
    for text in EXAMPLE1_SOUND + [":- pGEQ(V1,V1).", ":- pGEQ(V1,V2).", ":- close(V1,V2)."]:
        generic_space.lookup(text)


def test_example1_sound_subsumers(generic_space):
    r = generic_space.lookup(":- not pGEQ(V1,V1), q(V1,V1).")
    assert set(subsumers(r, generic_space)) == {generic_space.lookup(t) for t in EXAMPLE1_SOUND}


def test_example1_positive_geq_not_subsumers(generic_space):
    r = generic_space.lookup(":- not pGEQ(V1,V1), q(V1,V1).")
    for text in (":- pGEQ(V1,V1).", ":- pGEQ(V1,V2)."):
        assert not subsumes(generic_space.lookup(text), r)
    # the interpretation {q(1,1)} violates r but neither positive-pGEQ rule
    assert _violated(r.body, {("q", 1, 1)})
    assert not _violated(parse_body(":- pGEQ(V1,V2)."), {("q", 1, 1)})


def test_close_only_subsumes_itself(generic_space):
    r = generic_space.lookup(":- close(V1,V2).")
    assert subsumers(r, generic_space) == [r]


def test_subsumers_requires_member(generic_space):
    with pytest.raises(ValueError):
        subsumers(make_constraint(parse_body(":- q(V1,V2).")), generic_space)


@pytest.mark.parametrize("text,default,custom", [
    (":- pGEQ(V1,V1), close(V1,V2), q(V2,V3).", 3, 6),
    (":- zone2sensor(V1,V2).", 1, 1),
    (":- partnerunits(V1,V1).", 1, 2),
    (":- not unit2zoneGEQ(V1,V2), zone2sensor(V1,V2).", 2, 4),
])
def test_scores(text, default, custom):
    body = parse_body(text)
    assert score(body) == default
    assert score(body, "custom") == custom
    c = make_constraint(body)
    assert (c.cost("default"), c.cost("custom")) == (default, custom)


def test_unknown_scheme():
    with pytest.raises(ValueError):
        score(parse_body(":- q(V1,V2)."), "weighted")


def test_canonical_form_renaming_and_symmetry():
    sym = frozenset({"close"})
    a = canonical_body(parse_body(":- close(V3,V1), q(V1,V3)."), sym)
    b = canonical_body(parse_body(":- q(V2,V1), close(V1,V2)."), sym)
    assert a == b == canonical_body(parse_body(":- close(V1,V2), q(V1,V2)."), sym)


def test_parse_and_write_constraints(pup_space):
    text = "% learned\n3: :- closezones(V1,V2), partnerunits(V1,V2), not zone2sensor(V1,V2).\n"
    got = parse_constraints(text, pup_space)
    assert write_constraints(got) == ":- closezones(V1,V2), partnerunits(V1,V2), not zone2sensor(V1,V2).\n"
    assert parse_constraints(write_constraints(got), pup_space) == got


@pytest.mark.parametrize("bad", [":- q(V1,V2) r(V1,V1).", ":- .", ":- q(X,Y).", "q(V1,V2), junk"])
def test_parse_body_errors(bad):
    with pytest.raises(ParseError):
        parse_body(bad)


def test_modeb_parsing():
    d = parse_modeb("#modeb(2,pGEQ(var(t),var(t))).")
    assert d == ModeDecl(2, "pGEQ")
    d = parse_modeb("#modeb(1,close(var(t),var(t)),(symmetric,anti_reflexive)).")
    assert d.symmetric and d.anti_reflexive
    assert parse_modeb(str(d)) == d
    with pytest.raises(ParseError):
        parse_modeb("#modeh(q(var(t)))")


# ---------------------------------------------------------------- semantic checks

DOMAIN = (1, 2)
ATOMS = [(p, a, b) for p in ("r", "close", "pGEQ", "q") for a in DOMAIN for b in DOMAIN]


def _violated(body, interp):
    variables = sorted({v for l in body for v in (l.a, l.b)})
    for values in itertools.product(DOMAIN, repeat=len(variables)):
        th = dict(zip(variables, values))

        def holds(l):
            atom = (l.predicate, th[l.a], th[l.b])
            if l.predicate == "close":
                atom = (atom[0], min(atom[1:]), max(atom[1:]))
            return (atom in interp) == l.positive

        if all(holds(l) for l in body):
            return True
    return False


_GENERIC = build_space(generic_bias())
_IDS = st.integers(1, len(_GENERIC))


@settings(max_examples=200, deadline=None)
@given(_IDS)
def test_subsumption_reflexive(i):
    assert subsumes(_GENERIC[i], _GENERIC[i], _GENERIC.symmetric)


@settings(max_examples=100, deadline=None)
@given(_IDS)
def test_subsumption_transitive(i):
    r = _GENERIC[i]
    for mid in _GENERIC.subsumers(r):
        for top in _GENERIC.subsumers(mid):
            assert top in _GENERIC.subsumers(r)


@settings(max_examples=100, deadline=None)
@given(_IDS, st.sets(st.sampled_from(ATOMS)))
def test_subsumers_semantically_sound(i, atoms):
    # any interpretation violating r violates each of its subsumers
    r = _GENERIC[i]
    interp = {(p, min(a, b), max(a, b)) if p == "close" else (p, a, b) for p, a, b in atoms}
    if _violated(r.body, interp):
        for s in _GENERIC.subsumers(r):
            assert _violated(s.body, interp)


def test_literal_str():
    assert str(Literal("q", False, 1, 2)) == "not q(V1,V2)"
