"""Label-matrix diagnostics: how much the rules say, and how much they disagree.

Aggregate statistics are fractions of documents; per-rule statistics condition
on that rule voting. For any matrix both satisfy
conflicts <= overlaps <= coverage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .runtime import ABSTAIN, LabelMatrix
from .schema import MULTI_LABEL


@dataclass(frozen=True)
class PerLfStats:
    lf_name: str
    coverage: float  # fraction of docs where this rule votes
    overlaps: float  # ... where it votes and at least one other rule votes too
    conflicts: float  # ... where some other rule votes a different class


@dataclass(frozen=True)
class AnalysisReport:
    task: str
    n_docs: int
    n_lfs: int
    coverage: float  # fraction of docs with >= 1 vote
    overlaps: float  # fraction of docs with >= 2 votes
    conflicts: float  # fraction of docs with >= 2 votes that do not all agree
    conflict_coverage_ratio: float  # conflicts / coverage, 0 when coverage is 0, 4 decimals
    per_lf: tuple[PerLfStats, ...]
    tag_density: float | None = None  # multi-label only
    manifest: str | None = None

    def to_json(self) -> dict:
        data = {
            "task": self.task,
            "manifest": self.manifest,
            "n_docs": self.n_docs,
            "n_lfs": self.n_lfs,
            "coverage": self.coverage,
            "overlaps": self.overlaps,
            "conflicts": self.conflicts,
            "conflict_coverage_ratio": self.conflict_coverage_ratio,
            "per_lf": [
                {
                    "lf_name": s.lf_name,
                    "coverage": s.coverage,
                    "overlaps": s.overlaps,
                    "conflicts": s.conflicts,
                }
                for s in self.per_lf
            ],
            "tag_density": self.tag_density,
        }
        return data

    @classmethod
    def from_json(cls, data: dict) -> "AnalysisReport":
        return cls(
            task=data["task"],
            manifest=data.get("manifest"),
            n_docs=data["n_docs"],
            n_lfs=data["n_lfs"],
            coverage=data["coverage"],
            overlaps=data["overlaps"],
            conflicts=data["conflicts"],
            conflict_coverage_ratio=data["conflict_coverage_ratio"],
            per_lf=tuple(
                PerLfStats(
                    lf_name=s["lf_name"],
                    coverage=s["coverage"],
                    overlaps=s["overlaps"],
                    conflicts=s["conflicts"],
                )
                for s in data["per_lf"]
            ),
            tag_density=data.get("tag_density"),
        )

    def render_table(self) -> str:
        """Aligned text table, aggregate row last."""
        headers = ("rule", "coverage", "overlaps", "conflicts")
        rows = [
            (s.lf_name, f"{s.coverage:.4f}", f"{s.overlaps:.4f}", f"{s.conflicts:.4f}")
            for s in self.per_lf
        ]
        rows.append(
            ("<all>", f"{self.coverage:.4f}", f"{self.overlaps:.4f}", f"{self.conflicts:.4f}")
        )
        widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(headers)]
        def fmt(cells):
            return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(cells)).rstrip()
        lines = [fmt(headers)]
        lines.append("  ".join("-" * w for w in widths))
        lines.extend(fmt(r) for r in rows)
        lines.append("")
        lines.append(f"documents: {self.n_docs}  rules: {self.n_lfs}")
        lines.append(f"conflict/coverage: {self.conflict_coverage_ratio:.4f}")
        if self.tag_density is not None:
            lines.append(f"tag density: {self.tag_density:.4f}")
        return "\n".join(lines)


def conflict_rows(matrix: LabelMatrix) -> np.ndarray:
    """Boolean flag per document: at least two rules voted, and not all agree."""
    votes = matrix.votes
    n, m = votes.shape
    if votes.size == 0:
        return np.zeros(n, dtype=bool)
    voting = votes != ABSTAIN
    per_row = voting.sum(axis=1)
    # Max and min over the voting entries differ exactly when two votes differ.
    big = np.where(voting, votes, np.int16(-32768))
    small = np.where(voting, votes, np.int16(32767))
    return (per_row >= 2) & (big.max(axis=1) != small.min(axis=1))


def analyze(matrix: LabelMatrix, manifest: str | None = None) -> AnalysisReport:
    votes = matrix.votes
    n, m = votes.shape
    voting = votes != ABSTAIN
    per_row = voting.sum(axis=1)

    if n == 0:
        coverage = overlaps = conflicts = 0.0
        per_lf = tuple(PerLfStats(name, 0.0, 0.0, 0.0) for name in matrix.lf_names)
    else:
        coverage = float((per_row >= 1).mean())
        overlaps = float((per_row >= 2).mean())
        conflicts = float(conflict_rows(matrix).mean())

        per_lf = []
        for j, name in enumerate(matrix.lf_names):
            votes_j = voting[:, j]
            cov_j = float(votes_j.mean())
            over_j = float((votes_j & (per_row >= 2)).mean())
            differs = voting & (votes != votes[:, j : j + 1])
            conf_j = float((votes_j & differs.any(axis=1)).mean())
            per_lf.append(PerLfStats(name, cov_j, over_j, conf_j))
        per_lf = tuple(per_lf)

    ratio = 0.0 if coverage == 0 else round(conflicts / coverage, 4)
    density = tag_density(matrix) if matrix.schema.mode == MULTI_LABEL else None
    return AnalysisReport(
        task=matrix.schema.name,
        manifest=manifest,
        n_docs=n,
        n_lfs=m,
        coverage=coverage,
        overlaps=overlaps,
        conflicts=conflicts,
        conflict_coverage_ratio=ratio,
        per_lf=per_lf,
        tag_density=density,
    )


def tag_density(matrix: LabelMatrix) -> float:
    """Mean over (document, tag) pairs of "some rule for that tag fired".

    Tags with no rules count as never fired, so sparse rule sets read low.
    """
    if matrix.schema.mode != MULTI_LABEL:
        raise ValueError("tag density is defined for multi-label matrices only")
    if matrix.lf_targets is None:
        raise ValueError("tag density needs per-rule target tags on the matrix")
    n = matrix.n
    t_count = matrix.schema.k
    if n == 0 or t_count == 0:
        return 0.0
    covered = 0
    voting = matrix.votes != ABSTAIN
    for t in range(t_count):
        cols = [j for j, target in enumerate(matrix.lf_targets) if target == t]
        if cols:
            covered += int(voting[:, cols].any(axis=1).sum())
    return covered / (n * t_count)
