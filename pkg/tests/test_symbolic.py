import itertools

import pytest

from app.core.exceptions import NotAdmissible, PeriodTooLarge, SequenceParseError
from app.services.symbolic import (
    Ordering,
    PeriodicSequence,
    Symbol,
    Word,
    compare,
    compare_words,
    enumerate_admissible,
    has_distinct_orbit,
    is_admissible,
    is_bistable,
    is_markov_form,
    kneading_pair,
    parity,
    parse_sequence,
    phi,
    shift,
    shift_word,
    sort_sequences,
    tau,
)


def seq(text: str) -> PeriodicSequence:
    return parse_sequence(text)


class TestParse:
    @pytest.mark.parametrize("text", ["RMB", "RMB^inf", "(RMB)^inf", "  RMB "])
    def test_accepted_forms(self, text):
        assert str(parse_sequence(text)) == "RMB"

    def test_rejects_unknown_symbol(self):
        with pytest.raises(SequenceParseError) as exc:
            parse_sequence("RXB")
        assert exc.value.position == 1

    def test_is_case_sensitive(self):
        with pytest.raises(SequenceParseError):
            parse_sequence("rmb")

    def test_rejects_empty(self):
        with pytest.raises(SequenceParseError):
            parse_sequence("()^inf")

    def test_period_is_not_reduced(self):
        assert seq("RMRM").period == 4


class TestOperators:
    def test_tau(self):
        assert str(tau(seq("RLMR"))) == "LRML"
        assert str(tau(seq("RMB"))) == "LMA"
        assert tau(Symbol.A) == Symbol.B

    def test_tau_is_an_involution(self):
        for word in ("RLMB", "LAMBR", "M"):
            assert tau(tau(Word.parse(word))) == Word.parse(word)

    def test_shift(self):
        assert str(shift(seq("RMB"))) == "MBR"
        assert str(shift(seq("RLMB"), 3)) == "BRLM"
        assert shift(seq("RLMB"), 4) == seq("RLMB")
        assert str(shift_word(Word.parse("RLM"))) == "LMR"

    def test_parity(self):
        assert parity(Word.parse("RM")) == 1
        assert parity(Word.parse("R")) == -1
        assert parity(Word()) == 1

    @pytest.mark.parametrize(
        "symbol, value",
        [(Symbol.L, -1), (Symbol.A, -1), (Symbol.M, 0), (Symbol.B, 1), (Symbol.R, 1)],
    )
    def test_phi(self, symbol, value):
        assert phi(symbol) == value


class TestCompare:
    def test_first_symbol_decides(self):
        assert compare(seq("LML"), seq("RMR")) == Ordering.LT

    def test_odd_prefix_reverses(self):
        assert compare(seq("RLL"), seq("RML")) == Ordering.GT

    def test_equal(self):
        assert compare(seq("RMB"), seq("RMB")) == Ordering.EQ
        assert compare(seq("RM"), seq("RMRM")) == Ordering.EQ

    def test_finite_words(self):
        assert compare_words(Word.parse("RL"), Word.parse("RM")) == Ordering.GT
        assert compare_words(Word.parse("RM"), Word.parse("RMB")) == Ordering.EQ

    def test_tau_reverses_order(self):
        items = enumerate_admissible(3, require_markov_form=False) + enumerate_admissible(
            4, require_markov_form=False
        )
        for p, q in itertools.product(items, repeat=2):
            assert (compare(p, q) == Ordering.LT) == (compare(tau(q), tau(p)) == Ordering.LT)

    def test_total_order_on_markov_sequences(self):
        items = [s for p in range(2, 6) for s in enumerate_admissible(p, require_markov_form=True)]
        for p, q in itertools.product(items, repeat=2):
            assert compare(p, q).value == -compare(q, p).value
        for a, b, c in itertools.product(items, repeat=3):
            if compare(a, b) == Ordering.LT and compare(b, c) == Ordering.LT:
                assert compare(a, c) == Ordering.LT

    def test_sort_sequences(self):
        ordered = sort_sequences([seq("RMR"), seq("LML"), seq("MMM")])
        assert [str(s) for s in ordered] == ["LML", "MMM", "RMR"]


class TestAdmissibility:
    @pytest.mark.parametrize("text", ["RMB", "RLMB", "MMM"])
    def test_admissible(self, text):
        assert is_admissible(seq(text))

    def test_not_admissible(self):
        assert not is_admissible(seq("RRL"))
        with pytest.raises(NotAdmissible):
            kneading_pair("RRL")

    def test_kneading_pair(self):
        pair = kneading_pair("RMB")
        assert str(pair.S) == "RMB"
        assert str(pair.tauS) == "LMA"

    def test_tau_side_of_admissible_sequences(self):
        for s in enumerate_admissible(4, require_markov_form=False):
            mirrored = tau(s)
            for k in range(s.period):
                assert compare(shift(mirrored, k), mirrored) != Ordering.LT
                assert compare(shift(mirrored, k), s) != Ordering.GT

    def test_bistable(self):
        assert is_bistable(seq("RLMBLRMA"))
        assert is_bistable(seq("RMLM"))
        assert not is_bistable(seq("RMRM"))
        assert not is_bistable(seq("RMB"))

    def test_markov_form(self):
        assert is_markov_form(seq("RMB"))
        assert not is_markov_form(seq("RBMB"))
        assert is_markov_form(seq("RBMB"), allow_interior_discontinuity=True)
        assert not is_markov_form(seq("MRB"))

    def test_distinct_orbit(self):
        assert has_distinct_orbit(seq("RMB"))
        assert not has_distinct_orbit(seq("RMRM"))


class TestEnumerate:
    def test_period_one_markov_form_is_empty(self):
        assert enumerate_admissible(1, require_markov_form=True) == []

    def test_worked_examples_are_enumerated(self):
        assert seq("RMB") in enumerate_admissible(3, require_markov_form=True)
        assert seq("RLMB") in enumerate_admissible(4, require_markov_form=True)

    def test_output_is_admissible_and_sorted(self):
        found = enumerate_admissible(5, require_markov_form=True)
        assert found
        assert all(is_admissible(s) and is_markov_form(s) for s in found)
        keys = [[x.order_index for x in s.word] for s in found]
        assert keys == sorted(keys)

    def test_period_bound(self):
        with pytest.raises(PeriodTooLarge):
            enumerate_admissible(11, require_markov_form=True)

    def test_invalid_period(self):
        with pytest.raises(ValueError):
            enumerate_admissible(0, require_markov_form=False)
