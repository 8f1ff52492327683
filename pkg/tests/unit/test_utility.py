"""Unit tests for stakeholder utilities."""
import math

import pytest
from pydantic import ValidationError

from dproc.data_objects import StakeholderSystem, canonicalize
from dproc.errors import DegenerateProcess
from dproc.templates import (
    PreferAnd,
    PreferConstraint,
    PreferNot,
    participation,
    succ,
)
from dproc.utility import (
    UtilityVector,
    good_traces,
    utility,
    utility_vector,
    utility_vector_from_counts,
)
from tests.known_values import AD1_TRACES, AD2_TRACES, PH_VECTORS

JIGSAW_THEN_SHOW = PreferAnd(
    PreferAnd(
        PreferAnd(PreferConstraint(participation(3)), PreferConstraint(participation(5))),
        PreferConstraint(succ(3, 5)),
    ),
    PreferConstraint(succ(5, 4)),
)
NO_SHOW = PreferNot(PreferConstraint(participation(5)))


def with_preferences(system, *preferences):
    return StakeholderSystem(
        process=system.process,
        stakeholders=tuple(f"S{k}" for k in range(1, len(preferences) + 1)),
        preferences=preferences,
    )


class TestUtility:
    """Test suite for the single-stakeholder utility."""

    @pytest.mark.parametrize(
        "good, total, expected",
        [
            (12, 16, 0.90531),
            (6, 8, 0.88562),
            (2, 16, 0.38776),
            (4, 16, 0.56806),
            (11, 459, 0.40529),
            (3, 459, 0.22610),
            (389, 459, 0.97308),
            (452, 459, 0.99750),
            (448, 459, 0.99605),
            (324, 16316590, 0.34826),
            (1457048, 16316590, 0.85454),
            (1952, 199143708, 0.39651),
            (16316590, 199143708, 0.86908),
        ],
    )
    def test_printed_values(self, good, total, expected):
        """Test known utilities to their five printed decimals."""
        assert utility(good, total) == pytest.approx(expected, abs=5e-6)

    def test_enumerated_participation_count(self):
        """Test AD1 has 8 traces with activity 6, so u = ln 9 / ln 17."""
        assert utility(8, 16) == pytest.approx(0.77552, abs=5e-6)

    def test_same_process_denominator(self):
        """Test AD2 utilities divide by its own 8 traces."""
        assert utility(1, 8) == pytest.approx(0.31546, abs=5e-6)
        assert utility(2, 8) == pytest.approx(0.50000, abs=5e-6)

    def test_boundaries(self):
        """Test no good traces gives 0 and all good traces gives 1."""
        assert utility(0, 5) == 0.0
        assert utility(5, 5) == 1.0

    def test_degenerate_process(self):
        """Test a process without traces has no utility."""
        with pytest.raises(DegenerateProcess):
            utility(0, 0)

    @pytest.mark.parametrize("good, total", [(-1, 4), (2, -1), (5, 4)])
    def test_invalid_counts(self, good, total):
        """Test negative counts and more good than total traces are rejected."""
        with pytest.raises(ValueError):
            utility(good, total)


class TestUtilityProperties:
    """Exhaustive checks over every count pair up to 200 traces."""

    def test_range_and_boundaries(self):
        """Test utilities lie in [0, 1] and hit the ends exactly."""
        for total in range(1, 201):
            assert utility(0, total) == 0.0
            assert utility(total, total) == 1.0
            for good in range(total + 1):
                assert 0.0 <= utility(good, total) <= 1.0

    def test_monotone(self):
        """Test more good traces never lower the utility, more traces never raise it."""
        for total in range(1, 201):
            values = [utility(good, total) for good in range(total + 1)]
            assert values == sorted(values)
            assert all(a < b for a, b in zip(values, values[1:]))
            for good in range(total + 1):
                assert utility(good, total + 1) <= utility(good, total)

    def test_squaring_scale(self):
        """Test (1+g)^2 - 1 good of (1+t)^2 - 1 traces gives the same utility for every pair."""
        for total in range(1, 201):
            for good in range(total + 1):
                squared = utility((1 + good) ** 2 - 1, (1 + total) ** 2 - 1)
                assert math.isclose(squared, utility(good, total), abs_tol=1e-12)


class TestUtilityVector:
    """Test suite for utility vectors."""

    def test_from_counts(self):
        """Test the first known vector from its counts."""
        vector = utility_vector_from_counts([11, 3, 389, 452, 448], 459)
        assert vector.values == pytest.approx(PH_VECTORS[0], abs=5e-6)
        assert vector.good_counts == (11, 3, 389, 452, 448)
        assert vector.total_count == 459
        assert len(vector) == 5

    def test_aliases(self):
        """Test the serialized field names."""
        vector = UtilityVector.from_counts([0, 5], 5)
        dumped = vector.model_dump(by_alias=True)
        assert dumped["utilities"] == (0.0, 1.0)
        assert dumped["trace_count"] == 5
        assert UtilityVector.model_validate(dumped) == vector

    def test_plain_values(self):
        """Test vectors without counts are allowed."""
        assert UtilityVector(values=(0.5, 1.0)).good_counts is None

    def test_out_of_range(self):
        """Test utilities outside [0, 1] are rejected."""
        with pytest.raises(ValidationError):
            UtilityVector(values=(1.5,))

    def test_counts_need_total(self):
        """Test good counts without a total are rejected."""
        with pytest.raises(ValidationError):
            UtilityVector(values=(0.5,), good_counts=(1,))

    def test_boundary_consistency(self):
        """Test a zero count must come with a zero utility."""
        with pytest.raises(ValidationError):
            UtilityVector(values=(0.2,), good_counts=(0,), total_count=4)

    def test_count_length(self):
        """Test one count per utility."""
        with pytest.raises(ValidationError):
            UtilityVector(values=(0.5, 0.5), good_counts=(1,), total_count=4)

    def test_huge_total_rounds_to_one(self):
        """Test one missing trace out of 10^18 is accepted although it rounds to 1."""
        vector = UtilityVector.from_counts([10**18 - 1, 10**18], 10**18)
        assert vector.values == (1.0, 1.0)
        assert vector.good_counts == (10**18 - 1, 10**18)

    def test_all_good_must_be_one(self):
        """Test every trace being good still demands a utility of exactly 1."""
        with pytest.raises(ValidationError):
            UtilityVector(values=(0.9,), good_counts=(4,), total_count=4)


class TestSystemUtilities:
    """Test suite for utilities computed from enumerated traces."""

    def test_after_dinner_participation(self, ad1_system, ad2_system):
        """Test the evening show and bedtime preferences on both processes."""
        ad1 = utility_vector(ad1_system, canonicalize(AD1_TRACES))
        ad2 = utility_vector(ad2_system, canonicalize(AD2_TRACES))
        assert ad1.good_counts == (12, 8)
        assert ad1.values == pytest.approx((0.90531, 0.77552), abs=5e-6)
        assert ad2.good_counts == (6, 8)
        assert ad2.values == pytest.approx((0.88562, 1.0), abs=5e-6)

    def test_jigsaw_preferences(self, ad1_system, ad2_system):
        """Test the jigsaw-then-show and no-show preferences."""
        ad1 = utility_vector(
            with_preferences(ad1_system, JIGSAW_THEN_SHOW, NO_SHOW), canonicalize(AD1_TRACES)
        )
        ad2 = utility_vector(
            with_preferences(ad2_system, JIGSAW_THEN_SHOW, NO_SHOW), canonicalize(AD2_TRACES)
        )
        assert ad1.good_counts == (2, 4)
        assert ad1.values == pytest.approx((0.38776, 0.56806), abs=5e-6)
        assert ad2.good_counts == (1, 2)
        assert ad2.values == pytest.approx((0.31546, 0.50000), abs=5e-6)

    def test_good_traces(self):
        """Test filtering keeps canonical order."""
        good = good_traces(canonicalize(AD2_TRACES), NO_SHOW)
        assert good.traces == ((1, 2, 6), (1, 2, 3, 4, 6))

    def test_no_traces(self, ad1_system):
        """Test an empty trace set is degenerate."""
        with pytest.raises(DegenerateProcess):
            utility_vector(ad1_system, canonicalize([]))
