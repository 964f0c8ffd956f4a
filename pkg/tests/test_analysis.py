import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weaklabel.analysis import AnalysisReport, analyze, tag_density
from weaklabel.schema import MULTI_LABEL

from .helpers import matrix_from_votes, toy_matrix
from .oracles import stats_aggregate, stats_per_lf
from .oracles import tag_density as oracle_tag_density

# The hand-enumerated reference matrix: classes A=0, B=1, abstain=-1.
EXAMPLE_ROWS = [
    [0, -1, 0],
    [-1, -1, -1],
    [0, 1, -1],
    [1, 1, 1],
]


class TestAggregate:
    def test_worked_example(self):
        report = analyze(toy_matrix(EXAMPLE_ROWS, k=2))
        assert report.coverage == 0.75
        assert report.overlaps == 0.75
        assert report.conflicts == 0.25
        assert report.conflict_coverage_ratio == round(0.25 / 0.75, 4)

    def test_all_abstain(self):
        report = analyze(toy_matrix([[-1, -1]] * 3, k=2))
        assert (report.coverage, report.overlaps, report.conflicts) == (0.0, 0.0, 0.0)
        assert report.conflict_coverage_ratio == 0.0

    def test_empty_matrix(self):
        report = analyze(toy_matrix([], k=2))
        assert (report.coverage, report.overlaps, report.conflicts) == (0.0, 0.0, 0.0)

    def test_single_lf_never_overlaps(self):
        report = analyze(toy_matrix([[0], [1], [-1]], k=2))
        assert report.coverage == pytest.approx(2 / 3)
        assert report.overlaps == 0.0
        assert report.conflicts == 0.0

    def test_ratio_rounded_to_4_places(self):
        rows = [[0, 1]] + [[0, 0]] * 2 + [[-1, -1]] * 4
        report = analyze(toy_matrix(rows, k=2))
        assert report.conflicts == pytest.approx(1 / 7)
        assert report.conflict_coverage_ratio == round((1 / 7) / (3 / 7), 4) == 0.3333


class TestPerLf:
    def test_worked_example_per_lf(self):
        report = analyze(toy_matrix(EXAMPLE_ROWS, k=2))
        by_name = {s.lf_name: s for s in report.per_lf}
        assert (by_name["lf0"].coverage, by_name["lf0"].overlaps, by_name["lf0"].conflicts) == (
            0.75,
            0.75,
            0.25,
        )
        assert (by_name["lf1"].coverage, by_name["lf1"].overlaps, by_name["lf1"].conflicts) == (
            0.5,
            0.5,
            0.25,
        )
        assert (by_name["lf2"].coverage, by_name["lf2"].overlaps, by_name["lf2"].conflicts) == (
            0.5,
            0.5,
            0.0,
        )

    def test_per_lf_matches_oracle(self):
        rng = np.random.default_rng(7)
        votes = rng.integers(-1, 3, size=(60, 5)).astype(np.int16)
        report = analyze(matrix_from_votes(votes, k=3))
        expected = stats_per_lf(votes.tolist(), 5)
        got = [(s.coverage, s.overlaps, s.conflicts) for s in report.per_lf]
        assert got == expected


@st.composite
def vote_grids(draw):
    n = draw(st.integers(min_value=1, max_value=40))
    m = draw(st.integers(min_value=1, max_value=6))
    k = draw(st.integers(min_value=2, max_value=4))
    rows = draw(
        st.lists(
            st.lists(st.integers(min_value=-1, max_value=k - 1), min_size=m, max_size=m),
            min_size=n,
            max_size=n,
        )
    )
    return rows, k


class TestProperties:
    @given(vote_grids())
    @settings(max_examples=150, deadline=None)
    def test_matches_oracle_exactly(self, grid):
        rows, k = grid
        report = analyze(toy_matrix(rows, k=k))
        assert (report.coverage, report.overlaps, report.conflicts) == stats_aggregate(rows)
        per = stats_per_lf(rows, len(rows[0]))
        assert [(s.coverage, s.overlaps, s.conflicts) for s in report.per_lf] == per

    @given(vote_grids())
    @settings(max_examples=150, deadline=None)
    def test_ordering_invariant(self, grid):
        rows, k = grid
        report = analyze(toy_matrix(rows, k=k))
        assert 0 <= report.conflicts <= report.overlaps <= report.coverage <= 1
        for s in report.per_lf:
            assert 0 <= s.conflicts <= s.overlaps <= s.coverage <= 1

    @given(vote_grids())
    @settings(max_examples=60, deadline=None)
    def test_always_abstain_lf_changes_nothing(self, grid):
        rows, k = grid
        base = analyze(toy_matrix(rows, k=k))
        padded = analyze(toy_matrix([row + [-1] for row in rows], k=k))
        assert (padded.coverage, padded.overlaps, padded.conflicts) == (
            base.coverage,
            base.overlaps,
            base.conflicts,
        )

    @given(vote_grids())
    @settings(max_examples=60, deadline=None)
    def test_duplicating_a_column(self, grid):
        rows, k = grid
        base = analyze(toy_matrix(rows, k=k))
        doubled = analyze(toy_matrix([row + [row[0]] for row in rows], k=k))
        assert doubled.coverage == base.coverage
        assert doubled.overlaps >= base.overlaps


class TestTagDensity:
    def test_one_pair_covered(self):
        # 2 docs x 2 tags, one rule per tag, exactly one (doc, tag) pair fires
        matrix = toy_matrix([[0, -1], [-1, -1]], k=2, mode=MULTI_LABEL, targets=[0, 1])
        assert tag_density(matrix) == 0.25

    def test_everything_covered(self):
        matrix = toy_matrix([[0, 1], [0, 1]], k=2, mode=MULTI_LABEL, targets=[0, 1])
        assert tag_density(matrix) == 1.0

    def test_multiple_rules_per_tag_count_once(self):
        # two rules for tag 0, none for tag 1: density is per (doc, tag) pair
        matrix = toy_matrix([[0, 0], [0, -1]], k=2, mode=MULTI_LABEL, targets=[0, 0])
        assert tag_density(matrix) == 0.5

    def test_requires_multilabel(self):
        with pytest.raises(ValueError, match="multi-label"):
            tag_density(toy_matrix([[0]], k=2))

    def test_matches_oracle(self):
        rng = np.random.default_rng(11)
        t_count = 4
        targets = [0, 0, 1, 2, 3, 3]
        rows = []
        for _ in range(50):
            row = []
            for target in targets:
                row.append(target if rng.random() < 0.3 else -1)
            rows.append(row)
        matrix = toy_matrix(rows, k=t_count, mode=MULTI_LABEL, targets=targets)
        assert tag_density(matrix) == oracle_tag_density(rows, targets, t_count)

    def test_report_includes_density_for_multilabel(self):
        matrix = toy_matrix([[0, -1], [-1, -1]], k=2, mode=MULTI_LABEL, targets=[0, 1])
        report = analyze(matrix)
        assert report.tag_density == 0.25

    def test_single_tag_single_polarity_never_conflicts(self):
        rows = [[3, 3], [3, -1], [-1, 3], [-1, -1]]
        matrix = toy_matrix(rows, k=5, mode=MULTI_LABEL, targets=[3, 3])
        report = analyze(matrix)
        assert report.conflicts == 0.0
        assert report.overlaps == 0.25


class TestReportSerialization:
    def test_json_round_trip(self):
        report = analyze(toy_matrix(EXAMPLE_ROWS, k=2))
        blob = json.dumps(report.to_json())
        assert AnalysisReport.from_json(json.loads(blob)) == report

    def test_render_table_shape(self):
        report = analyze(toy_matrix(EXAMPLE_ROWS, k=2))
        text = report.render_table()
        lines = text.splitlines()
        assert lines[0].split() == ["rule", "coverage", "overlaps", "conflicts"]
        assert any(line.startswith("<all>") for line in lines)
        assert "conflict/coverage: 0.3333" in text
        assert "documents: 4" in text

    def test_render_table_includes_density(self):
        matrix = toy_matrix([[0, -1], [-1, -1]], k=2, mode=MULTI_LABEL, targets=[0, 1])
        assert "tag density: 0.2500" in analyze(matrix).render_table()
