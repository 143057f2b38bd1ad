import pytest
import sympy

from app.core.exceptions import (
    BistableInput,
    DenominatorVanishesAtZero,
    InsufficientSymbols,
    NonIntegerLapCoefficient,
    NotAdmissible,
    NotBistable,
)
from app.services.kneading import (
    KneadingMatrixTrunc,
    closed_form_series,
    growth_number,
    invariant_coordinate,
    kneading_det_from_matrix,
    kneading_determinant,
    kneading_determinant_bistable,
    kneading_increments,
    lap_series,
    oracle_agrees,
    periodic_kneading_determinant,
    truncated_determinant,
    u_poly,
)
from app.services.markov import build_orbit_table, spectral_radius, transition_matrix
from app.services.poly import IntPolynomial, RationalFunction
from app.services.symbolic import Word, enumerate_admissible, kneading_pair, parse_sequence
from tests.conftest import product


def seq(text: str):
    return parse_sequence(text)


def rational(num: str, *den: str) -> RationalFunction:
    return RationalFunction(IntPolynomial.parse(num), product(*den))


class TestUPoly:
    @pytest.mark.parametrize(
        "text, expected",
        [("RMB", "-t - t^3"), ("RLMB", "-t - t^2 + t^4"), ("MMM", "0")],
    )
    def test_u_poly(self, text, expected):
        assert str(u_poly(seq(text))) == expected


class TestKneadingDeterminant:
    def test_rmb(self):
        assert kneading_determinant(seq("RMB")) == rational("1 - 2*t - t^3", "1 + t", "1 + t^3")

    def test_rlmb(self, printed_examples):
        num, den = printed_examples["RLMB"]["one_plus_t_determinant"]
        d = kneading_determinant(seq("RLMB"))
        assert d * IntPolynomial((1, 1)) == rational(num, den)

    def test_rmr_equals_rmb(self):
        assert kneading_determinant(seq("RMR")) == kneading_determinant(seq("RMB"))

    def test_not_admissible(self):
        with pytest.raises(NotAdmissible):
            kneading_determinant(seq("RRL"))

    def test_bistable_input_is_redirected(self):
        with pytest.raises(BistableInput):
            kneading_determinant(seq("RMBLMA"))


class TestBistable:
    def test_rmb_half(self):
        d = kneading_determinant_bistable(seq("RMBLMA"))
        assert d == rational("1 - 2*t - 3*t^3", "1 + t", "1 - t^3")

    def test_agrees_with_full_period_form(self):
        s = seq("RMBLMA")
        assert kneading_determinant_bistable(s) == periodic_kneading_determinant(s.word)

    def test_all_m(self):
        assert kneading_determinant_bistable(seq("MM")) == rational("1", "1 + t")

    def test_single_symbol_half(self):
        assert kneading_determinant_bistable(seq("RL")) == rational("1 - 3*t", "1 - t^2")

    def test_not_bistable(self):
        with pytest.raises(NotBistable):
            kneading_determinant_bistable(seq("RMB"))


class TestIncrements:
    def test_invariant_coordinate_folds_b_to_r(self):
        series = invariant_coordinate(Word.parse("RMBRMB"), 2)
        assert series.R.coeffs == (1, 0, 1)
        assert series.M.coeffs == (0, -1, 0)
        assert series.L.is_zero()

    def test_constant_itinerary(self):
        series = invariant_coordinate(Word.parse("MMMMM"), 4)
        assert series.M.coeffs == (1, -1, 1, -1, 1)

    def test_insufficient_symbols(self):
        with pytest.raises(InsufficientSymbols):
            invariant_coordinate(Word.parse("RM"), 2)

    def test_order_zero_increments(self):
        n = kneading_increments(kneading_pair("RMB"), 0)
        assert [n[0, j].coeffs[0] for j in range(3)] == [-1, 1, 0]
        assert [n[1, j].coeffs[0] for j in range(3)] == [0, -1, 1]

    @pytest.mark.parametrize("text, order", [("RMB", 6), ("RLMB", 8)])
    def test_each_omitted_column_gives_the_closed_form(self, text, order):
        s = seq(text)
        n = kneading_increments(kneading_pair(s), order)
        expected = closed_form_series(s, order)
        for j in (1, 2, 3):
            assert kneading_det_from_matrix(n, j) == expected

    def test_zero_matrix(self):
        assert kneading_det_from_matrix(KneadingMatrixTrunc.zero(4), 2).is_zero()

    def test_column_index(self):
        with pytest.raises(ValueError):
            kneading_det_from_matrix(KneadingMatrixTrunc.zero(4), 4)

    def test_oracle_on_all_markov_sequences_up_to_period_6(self):
        for p in range(2, 7):
            for s in enumerate_admissible(p, require_markov_form=True):
                assert oracle_agrees(s), str(s)


class TestLapSeries:
    def test_rmb(self, printed_examples):
        d = kneading_determinant(seq("RMB"))
        assert lap_series(d, 6) == printed_examples["RMB"]["laps"]

    def test_rlmb(self, printed_examples):
        laps = lap_series(kneading_determinant(seq("RLMB")), 4)
        assert laps == printed_examples["RLMB"]["laps"]
        assert laps[0] == 3

    def test_matches_sympy(self):
        d = kneading_determinant(seq("RLMB"))
        t = sympy.Symbol("t")
        num = sum(c * t**k for k, c in enumerate(d.num.coeffs))
        den = sum(c * t**k for k, c in enumerate(d.den.coeffs))
        expansion = sympy.series(den / ((1 - t**2) * num), t, 0, 7).removeO()
        expected = [int(sympy.Poly(expansion, t).coeff_monomial(t**k)) for k in range(1, 7)]
        assert lap_series(d, 6) == expected

    def test_degenerate_constant_laps(self):
        assert lap_series(rational("1", "1 + t"), 3) == [1, 1, 1]

    def test_laps_at_most_treble(self):
        for p in range(2, 6):
            for s in enumerate_admissible(p, require_markov_form=True):
                laps = lap_series(kneading_determinant(s), 6)
                assert laps[0] == 3
                assert all(0 < a <= b <= 3 * a for a, b in zip(laps, laps[1:]))

    def test_non_integer(self):
        with pytest.raises(NonIntegerLapCoefficient):
            lap_series(rational("2 + t", "1"), 3)

    def test_vanishing_numerator(self):
        with pytest.raises(DenominatorVanishesAtZero):
            lap_series(rational("t", "1 + t"), 3)


class TestGrowthNumber:
    def test_rmb(self, printed_examples):
        t0, rho = growth_number(kneading_determinant(seq("RMB")))
        assert t0 == pytest.approx(printed_examples["RMB"]["t0"], abs=5e-5)
        assert rho == pytest.approx(printed_examples["RMB"]["rho"], abs=5e-4)

    def test_no_root(self):
        assert growth_number(rational("1", "1 + t")) == (None, 1.0)

    def test_cancelled_root_is_ignored(self):
        # 1 - 2t appears in both numerator and denominator.
        d = RationalFunction(product("1 - 2*t", "1 + t^2"), product("1 - 2*t", "1 + t"))
        assert growth_number(d) == (None, 1.0)

    def test_rlmb_matches_printed_markov_matrix(self):
        t0, rho = growth_number(kneading_determinant(seq("RLMB")))
        assert t0 == pytest.approx(0.371, abs=1e-3)
        psi = transition_matrix(build_orbit_table(seq("RLMB")))
        assert spectral_radius(psi) * t0 == pytest.approx(1.0, abs=1e-8)

    def test_bounded_for_admissible_sequences(self):
        for p in range(2, 7):
            for s in enumerate_admissible(p, require_markov_form=True):
                _, rho = growth_number(kneading_determinant(s))
                assert 1.0 <= rho <= 3.0

    def test_truncated_prefix(self):
        d = truncated_determinant(Word.parse("RMB"))
        assert d == rational("1 - 2*t - 2*t^3", "1 + t")
