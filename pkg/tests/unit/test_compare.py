"""Unit tests for subset comparison and robustness summaries."""
import math
from itertools import combinations, permutations

import pytest

from dproc.compare import (
    GuidanceNote,
    SubsetRow,
    acompare,
    compare,
    compare_vectors,
    h_distance,
    mask_of,
    optimal_for_subset,
    reduced,
    robustness_summary,
    subset_indices,
    subset_scan,
    unique_labels,
)
from dproc.config import AnalysisSettings
from dproc.data_objects import StakeholderSystem
from dproc.errors import EmptySubset, MismatchedStakeholders, TooManyStakeholders
from dproc.templates import PreferConstraint, participation
from dproc.utility import UtilityVector
from tests.known_values import PH_LABELS, PH_VECTORS

STAKEHOLDERS = ("S1", "S2", "S3", "S4", "S5")

# optimum per subset, subsets by size and then lexicographically
PH_WINNERS = [
    "PH1", "PH2b", "PH2a", "PH2b", "PH2a",
    "PH2b", "PH1", "PH1", "PH1", "PH2b", "PH2b", "PH2b", "PH2b", "PH2a", "PH2b",
    "PH2b", "PH2b", "PH2b", "PH1", "PH1", "PH1", "PH2b", "PH2b", "PH2b", "PH2b",
    "PH2b", "PH2b", "PH2b", "PH1", "PH2b",
    "PH2b",
]  # fmt: skip


def ph_vectors():
    return [UtilityVector(values=v) for v in PH_VECTORS]


def ph_report():
    return compare_vectors(PH_LABELS, ph_vectors(), STAKEHOLDERS)


def row(subset, winner_index, labels=("A", "B")):
    return SubsetRow(
        subset=subset,
        mask=0,
        h=(),
        winner=labels[winner_index],
        winner_index=winner_index,
        tie=False,
        ties=(labels[winner_index],),
    )


class TestDistance:
    """Test suite for H and subset reduction."""

    def test_known_distances(self):
        """Test H over all five stakeholders for the three systems."""
        distances = [h_distance(v) for v in PH_VECTORS]
        assert distances == pytest.approx([0.97640, 0.66778, 0.61753], abs=2e-5)

    def test_single_stakeholder(self):
        """Test H of a one-element vector is one minus the utility."""
        assert h_distance([0.40529]) == pytest.approx(0.59471, abs=1e-12)

    def test_ideal(self):
        """Test the all-ones vector has distance zero."""
        assert h_distance([1.0, 1.0, 1.0]) == 0.0

    def test_reduced(self):
        """Test reduction keeps the chosen stakeholders in order."""
        assert reduced(PH_VECTORS[0], mask_of([0, 1])) == (0.40529, 0.22610)
        assert reduced(UtilityVector(values=PH_VECTORS[0]), mask_of([4, 2])) == (0.97308, 0.99605)

    def test_reduced_empty(self):
        """Test the empty subset is rejected."""
        with pytest.raises(EmptySubset):
            reduced(PH_VECTORS[0], 0)

    def test_reduced_out_of_range(self):
        """Test subsets naming missing stakeholders are rejected."""
        with pytest.raises(ValueError):
            reduced((0.5, 0.5), mask_of([2]))

    def test_masks(self):
        """Test masks and indices convert both ways."""
        assert mask_of([0, 2]) == 0b101
        assert subset_indices(0b10110) == (1, 2, 4)

    def test_additivity(self):
        """Test squared H over a subset is the sum over its members."""
        vector = PH_VECTORS[0]
        for size in range(1, 6):
            for indices in combinations(range(5), size):
                singles = sum(h_distance(reduced(vector, mask_of([k]))) ** 2 for k in indices)
                assert h_distance(reduced(vector, mask_of(indices))) ** 2 == pytest.approx(
                    singles, abs=1e-12
                )

    def test_dominance(self):
        """Test a system at least as good for everyone is never further away."""
        better, worse = (0.9, 0.8, 1.0), (0.7, 0.8, 0.5)
        for mask in range(1, 8):
            assert h_distance(reduced(better, mask)) <= h_distance(reduced(worse, mask))


class TestOptimalForSubset:
    """Test suite for the per-subset optimum."""

    def test_first_stakeholder(self):
        """Test PH1 is closest for S1 alone."""
        assert optimal_for_subset(PH_VECTORS, mask_of([0])) == (0, (0,))

    def test_exact_tie(self):
        """Test equal distances go to the first system and record the tie."""
        assert optimal_for_subset(PH_VECTORS, mask_of([2])) == (1, (1, 2))

    def test_tolerance(self):
        """Test a wider tolerance turns near misses into ties."""
        winner, ties = optimal_for_subset(PH_VECTORS, mask_of([3]), tolerance=1e-4)
        assert ties == (1, 2)
        assert winner == 1

    def test_no_systems(self):
        """Test an empty system list is rejected."""
        with pytest.raises(ValueError):
            optimal_for_subset([], 1)


class TestSubsetScan:
    """Test suite for the full subset table."""

    def test_known_table(self):
        """Test all 31 optima of the patient-handler comparison."""
        rows = subset_scan(PH_VECTORS, PH_LABELS, STAKEHOLDERS)
        assert len(rows) == 31
        assert [r.winner for r in rows] == PH_WINNERS

    def test_row_order_and_contents(self):
        """Test rows run by size, then lexicographically, with all distances."""
        rows = subset_scan(PH_VECTORS, PH_LABELS, STAKEHOLDERS)
        assert rows[0].subset == ("S1",)
        assert rows[5].subset == ("S1", "S2")
        assert rows[-1].subset == STAKEHOLDERS
        assert rows[5].h == pytest.approx((0.97601, 0.66778, 0.61753), abs=2e-5)
        assert rows[0].h == pytest.approx((0.59471, 0.65174, 0.60349), abs=1e-5)

    def test_ties_marked(self):
        """Test PH2a and PH2b tie where both utilities are equal."""
        rows = {r.subset: r for r in subset_scan(PH_VECTORS, PH_LABELS, STAKEHOLDERS)}
        for subset in [("S3",), ("S5",), ("S3", "S5")]:
            assert rows[subset].tie is True
            assert rows[subset].ties == ("PH2a", "PH2b")
        assert rows[("S1",)].tie is False

    def test_stakeholder_order_irrelevant(self):
        """Test reordering stakeholders the same way in every vector keeps each winner."""
        expected = {
            frozenset(r.subset): (r.winner, r.ties)
            for r in subset_scan(PH_VECTORS, PH_LABELS, STAKEHOLDERS)
        }
        for order in permutations(range(len(STAKEHOLDERS))):
            vectors = [tuple(v[k] for k in order) for v in PH_VECTORS]
            stakeholders = [STAKEHOLDERS[k] for k in order]
            rows = subset_scan(vectors, PH_LABELS, stakeholders)
            assert {frozenset(r.subset): (r.winner, r.ties) for r in rows} == expected

    def test_too_many_stakeholders(self):
        """Test the subset limit."""
        with pytest.raises(TooManyStakeholders):
            subset_scan([(1.0,) * 3], ["A"], ["S1", "S2", "S3"], max_stakeholders=2)


class TestRobustnessSummary:
    """Test suite for stratum frequencies and guidance notes."""

    def test_known_frequencies(self):
        """Test PH2b wins every stratum with the known frequencies."""
        summary = ph_report().summary
        assert summary.all.winner == "PH2b"
        assert (summary.all.freq_num, summary.all.freq_den) == (1, 1)
        assert (summary.almostall.winner, summary.almostall.freq_num) == ("PH2b", 5)
        assert summary.almostall.freq_den == 6
        assert (summary.morethanhalf.winner, summary.morethanhalf.freq_num) == ("PH2b", 12)
        assert summary.morethanhalf.freq_den == 16
        assert (summary.any.winner, summary.any.freq_num, summary.any.freq_den) == ("PH2b", 20, 31)
        assert summary.notes == (GuidanceNote.ALL_EQ_ALMOSTALL,)

    def test_divergent_strata(self):
        """Test the notes when the almost-all family disagrees with the full set."""
        a = UtilityVector(values=(1.0, 1.0, 1.0, 1.0 - math.sqrt(0.6)))
        b = UtilityVector(values=(1.0 - math.sqrt(0.2),) * 3 + (1.0 - math.sqrt(0.1),))
        summary = compare_vectors(["A", "B"], [a, b], ["S1", "S2", "S3", "S4"]).summary
        assert summary.all.winner == "A"
        assert (summary.almostall.winner, summary.almostall.freq_num) == ("B", 3)
        assert summary.morethanhalf.winner == "B"
        assert summary.any.winner == "A"
        assert summary.notes == (GuidanceNote.DIVERGENT, GuidanceNote.ALMOSTALL_EQ_MORETHANHALF)

    def test_unknown_active_set(self):
        """Test a note when the plurality over all subsets differs from the full set."""
        rows = [row(("S1",), 1), row(("S2",), 1), row(("S1", "S2"), 0)]
        summary = robustness_summary(rows, 2, ["A", "B"])
        assert summary.all.winner == "A"
        assert summary.any.winner == "B"
        assert summary.notes == (
            GuidanceNote.DIVERGENT,
            GuidanceNote.ALMOSTALL_EQ_MORETHANHALF,
            GuidanceNote.UNKNOWN_ACTIVE_SET,
        )

    def test_frequency_tie(self):
        """Test equal counts go to the lower index and list every leader."""
        rows = [row(("S1",), 1), row(("S2",), 0), row(("S1", "S2"), 0), row(("S1", "S2"), 1)]
        stratum = robustness_summary(rows, 2, ["A", "B"]).any
        assert (stratum.winner, stratum.tie, stratum.tied) == ("A", True, ("A", "B"))

    def test_labels_from_rows(self):
        """Test labels are recovered from the rows when not given."""
        summary = robustness_summary([row(("S1",), 1)], 1)
        assert summary.all.winner == "B"

    def test_no_rows(self):
        """Test an empty table is rejected."""
        with pytest.raises(ValueError):
            robustness_summary([], 1)


class TestCompareVectors:
    """Test suite for comparing precomputed vectors."""

    def test_report(self):
        """Test the report carries systems, rows and the overall winner."""
        report = ph_report()
        assert report.labels == ("PH1", "PH2a", "PH2b")
        assert report.winner == "PH2b"
        assert report.systems[0].h == pytest.approx(0.97640, abs=2e-5)
        assert len(report.rows) == 31

    def test_identical_systems_tie(self):
        """Test two equal vectors tie on every subset."""
        vector = UtilityVector(values=(0.5, 0.7))
        report = compare_vectors(["A", "B"], [vector, vector], ["S1", "S2"])
        assert all(r.tie and r.winner == "A" for r in report.rows)
        assert report.summary.notes == (GuidanceNote.ALL_EQ_ALMOSTALL,)

    def test_single_stakeholder(self):
        """Test one stakeholder gives one row and agreeing strata."""
        report = compare_vectors(
            ["A", "B"], [UtilityVector(values=(0.2,)), UtilityVector(values=(0.9,))], ["S1"]
        )
        assert len(report.rows) == 1
        summary = report.summary
        assert {summary.all.winner, summary.almostall.winner, summary.any.winner} == {"B"}
        assert summary.morethanhalf.freq_den == 1

    def test_single_system(self):
        """Test one system wins everything."""
        report = compare_vectors(["A"], [UtilityVector(values=(0.2, 0.3))], ["S1", "S2"])
        assert report.summary.any.freq_num == 3

    def test_mismatched_lengths(self):
        """Test vectors must have one utility per stakeholder."""
        with pytest.raises(MismatchedStakeholders):
            compare_vectors(
                ["A", "B"],
                [UtilityVector(values=(0.5,)), UtilityVector(values=(0.5, 0.5))],
                ["S1", "S2"],
            )

    def test_too_many_stakeholders(self):
        """Test the configured limit on stakeholders."""
        with pytest.raises(TooManyStakeholders):
            compare_vectors(["A"], [UtilityVector(values=(1.0,) * 21)], [f"S{k}" for k in range(21)])

    def test_limit_from_settings(self):
        """Test the limit follows the settings."""
        with pytest.raises(TooManyStakeholders):
            compare_vectors(
                ["A"],
                [UtilityVector(values=(1.0,) * 3)],
                ["S1", "S2", "S3"],
                AnalysisSettings(max_stakeholders=2),
            )

    def test_duplicate_labels(self):
        """Test system labels must be distinct."""
        vector = UtilityVector(values=(0.5,))
        with pytest.raises(ValueError):
            compare_vectors(["A", "A"], [vector, vector], ["S1"])

    def test_unique_labels(self):
        """Test repeated labels get numbered suffixes."""
        assert unique_labels(["AD1", "AD1", "AD2", "AD1"]) == ["AD1", "AD1_2", "AD2", "AD1_3"]


class TestCompareSystems:
    """Test suite for comparing stakeholder systems end to end."""

    def test_after_dinner(self, ad1_system, ad2_system):
        """Test AD2 is closer to the ideal for the child and the parents together."""
        report = compare([ad1_system, ad2_system])
        assert report.labels == ("AD1", "AD2")
        assert report.systems[0].vector.good_counts == (12, 8)
        assert report.systems[0].h == pytest.approx(0.24363, abs=5e-5)
        assert report.systems[1].h == pytest.approx(0.11438, abs=5e-5)
        assert report.winner == "AD2"
        assert report.systems[0].preferences == ("participation(5)", "participation(6)")

    def test_same_spec_twice(self, ad1_system):
        """Test comparing a system with itself ties everywhere."""
        report = compare([ad1_system, ad1_system])
        assert report.labels == ("AD1", "AD1_2")
        assert all(r.tie for r in report.rows)
        assert report.winner == "AD1"

    @pytest.mark.asyncio
    async def test_precomputed_vectors(self, ad1_system, ad2_system):
        """Test supplied vectors skip enumeration."""
        vectors = [UtilityVector(values=(0.5, 0.5)), UtilityVector(values=(0.4, 0.4))]
        report = await acompare([ad1_system, ad2_system], vectors)
        assert report.winner == "AD1"

    def test_stakeholders_must_match(self, ad1_system):
        """Test systems with different stakeholder labels are not comparable."""
        other = StakeholderSystem(
            process=ad1_system.process,
            stakeholders=("Child", "Parents"),
            preferences=(PreferConstraint(participation(5)), PreferConstraint(participation(6))),
        )
        with pytest.raises(MismatchedStakeholders):
            compare([ad1_system, other])
