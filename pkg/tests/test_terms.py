"""Term language tests: generalization, subsumption, grammar, codec."""

import random

import pytest

from storyloom.errors import ParseFailure, ValidationFailure
from storyloom.terms import (
    Compound,
    Constant,
    Variable,
    format_term,
    is_ground,
    lgg2,
    lggN,
    parse_term,
    parse_terms,
    rename_canonical,
    subsumes,
    term_from_dict,
    term_to_dict,
    variables,
    variants,
)
from .oracles import (
    most_specific_by_enumeration,
    oracle_subsumes,
    oracle_variants,
    random_ground_term,
    refine_msg,
)


def t(text):
    return parse_term(text)


# --- generalization ---

def test_lgg2_identity_on_ground_terms():
    rng = random.Random(101)
    for _ in range(100):
        term = random_ground_term(rng)
        assert lgg2(term, term) == term


def test_lgg2_shares_variables_for_repeated_mismatches():
    result = lgg2(t("f(a,a)"), t("f(b,b)"))
    assert isinstance(result, Compound)
    first, second = result.args
    assert isinstance(first, Variable)
    assert first == second  # f(X,X), never f(X,Y)
    oracle = most_specific_by_enumeration(t("f(a,a)"), t("f(b,b)"))
    assert all(oracle_variants(result, o) for o in oracle)


def test_lgg2_head_mismatch_collapses_to_variable():
    assert isinstance(lgg2(t("f(a,b)"), t("g(a,b)")), Variable)
    assert isinstance(lgg2(t("a"), t("f(a)")), Variable)
    assert isinstance(lgg2(t("a"), t("b")), Variable)


def test_lgg2_shared_variable_across_argument_positions():
    result = lgg2(t("f(g(a,b),g(a,c))"), t("f(g(b,b),g(b,c))"))
    assert format_term(rename_canonical(result)) == "f(g(X1, b), g(X1, c))"


def test_lgg2_does_not_capture_input_variables():
    # a surviving input variable must stay distinct from fresh ones
    left = Compound("f", (Variable("X1"), Constant("a")))
    right = Compound("f", (Variable("X1"), Constant("b")))
    result = lgg2(left, right)
    assert result.args[0] == Variable("X1")
    assert isinstance(result.args[1], Variable)
    assert result.args[1] != Variable("X1")


def test_lgg2_subsumes_both_inputs():
    rng = random.Random(102)
    for _ in range(150):
        s = random_ground_term(rng)
        u = random_ground_term(rng)
        g = lgg2(s, u)
        assert subsumes(g, s) and subsumes(g, u)
        assert oracle_subsumes(g, s) and oracle_subsumes(g, u)


def test_lgg2_commutative_up_to_renaming():
    rng = random.Random(103)
    for _ in range(150):
        s = random_ground_term(rng)
        u = random_ground_term(rng)
        assert variants(lgg2(s, u), lgg2(u, s))


def test_lgg2_associative_up_to_renaming():
    rng = random.Random(104)
    for _ in range(100):
        a = random_ground_term(rng)
        b = random_ground_term(rng)
        c = random_ground_term(rng)
        assert variants(lgg2(lgg2(a, b), c), lgg2(a, lgg2(b, c)))


def test_lgg2_is_most_specific_small_terms():
    # exhaustive-enumeration oracle; depth kept low so the candidate set
    # stays enumerable
    rng = random.Random(105)
    for _ in range(30):
        s = random_ground_term(rng, max_depth=2)
        u = random_ground_term(rng, max_depth=2)
        maximal = most_specific_by_enumeration(s, u)
        got = lgg2(s, u)
        assert all(oracle_variants(got, m) for m in maximal)
        assert len(maximal) >= 1


def test_lgg2_matches_refinement_fixpoint():
    rng = random.Random(106)
    for _ in range(200):
        s = random_ground_term(rng)
        u = random_ground_term(rng)
        assert oracle_variants(lgg2(s, u), refine_msg(s, u))


def test_lggN_singleton_and_triples():
    rng = random.Random(107)
    for _ in range(50):
        term = random_ground_term(rng)
        assert lggN([term]) == term
    assert format_term(lggN([t("f(a)"), t("f(b)"), t("f(c)")])) == "f(X1)"


def test_lggN_rejects_empty_input():
    with pytest.raises(ValidationFailure):
        lggN([])


def test_lggN_permutation_invariant():
    import itertools
    rng = random.Random(108)
    for _ in range(40):
        terms = [random_ground_term(rng) for _ in range(3)]
        base = lggN(terms)
        for perm in itertools.permutations(terms):
            assert variants(base, lggN(list(perm)))


def test_lggN_subsumes_all_inputs():
    rng = random.Random(109)
    for _ in range(80):
        terms = [random_ground_term(rng) for _ in range(rng.randint(2, 4))]
        g = lggN(terms)
        for term in terms:
            assert subsumes(g, term)
            assert oracle_subsumes(g, term)


# --- subsumption ---

def test_subsumes_basics():
    assert subsumes(t("X"), t("f(g(a),b)"))
    assert subsumes(t("X"), t("c"))
    assert not subsumes(t("f(X,X)"), t("f(a,b)"))
    assert subsumes(t("f(X,X)"), t("f(a,a)"))
    assert subsumes(t("f(X,Y)"), t("f(a,b)"))
    assert not subsumes(t("f(a)"), t("f(b)"))
    assert not subsumes(t("f(a)"), t("a"))


def test_subsumes_agrees_with_oracle():
    rng = random.Random(110)
    for _ in range(200):
        s = random_ground_term(rng)
        u = random_ground_term(rng)
        g = lgg2(s, u)
        for general, specific in [(g, s), (g, u), (s, u), (s, g)]:
            assert subsumes(general, specific) == oracle_subsumes(general, specific)


def test_variants_relation():
    assert variants(t("f(X,Y)"), t("f(A,B)"))
    assert not variants(t("f(X,X)"), t("f(A,B)"))
    assert variants(t("g(X,g(X,a))"), t("g(Q,g(Q,a))"))
    assert not variants(t("f(X,Y)"), t("f(a,Y)"))


# --- inspection helpers ---

def test_variables_pre_order_first_occurrence():
    term = t("h(X,f(Y),g(X,Z))")
    assert [v.name for v in variables(term)] == ["X", "Y", "Z"]
    assert variables(t("f(a)")) == []


def test_rename_canonical():
    assert format_term(rename_canonical(t("h(Q,f(P),g(Q,R))"))) == "h(X1, f(X2), g(X1, X3))"


def test_is_ground():
    assert is_ground(t("f(g(a,b),c)"))
    assert not is_ground(t("f(g(a,X),c)"))
    assert not is_ground(t("X"))


# --- text grammar ---

def test_parse_classification():
    assert parse_term("Protagonist") == Variable("Protagonist")
    assert parse_term("_tmp") == Variable("_tmp")
    assert parse_term("quest") == Constant("quest")
    assert parse_term("9lives") == Constant("9lives")
    assert parse_term("ordinary-world") == Constant("ordinary-world")
    assert parse_term("role(protagonist)") == Compound(
        "role", (Constant("protagonist"),)
    )


def test_parse_whitespace_tolerance():
    assert parse_term("  f( a ,  B )  ") == Compound(
        "f", (Constant("a"), Variable("B"))
    )


def test_parse_round_trip_random_terms():
    rng = random.Random(111)
    for _ in range(200):
        term = random_ground_term(rng)
        assert parse_term(format_term(term)) == term


def test_parse_failures_carry_position():
    for bad in ["", "f(", "f()", "f(a", "f(a,,b)", "(a)", "a)", "f(a) x", "-x"]:
        with pytest.raises(ParseFailure) as err:
            parse_term(bad)
        assert "column" in str(err.value) or "unterminated" in str(err.value)


def test_parse_terms_splits_at_top_level_only():
    terms = parse_terms("role(protagonist), move(quest), setting(special-world)")
    assert [format_term(x) for x in terms] == [
        "role(protagonist)", "move(quest)", "setting(special-world)",
    ]
    nested = parse_terms("g(a,b), f(g(a,b))")
    assert len(nested) == 2
    assert parse_terms("  ") == []


def test_compound_invariants():
    with pytest.raises(ValidationFailure):
        Compound("", (Constant("a"),))
    with pytest.raises(ValidationFailure):
        Compound("f", ())


# --- JSON codec ---

def test_term_codec_round_trip():
    rng = random.Random(112)
    for _ in range(150):
        term = random_ground_term(rng)
        assert term_from_dict(term_to_dict(term)) == term
    withvars = t("f(g(X,a),Y)")
    assert term_from_dict(term_to_dict(withvars)) == withvars


def test_term_codec_rejects_unknown_kind():
    with pytest.raises(ValidationFailure):
        term_from_dict({"kind": "tuple", "items": []})
