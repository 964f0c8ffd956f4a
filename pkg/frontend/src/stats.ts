/** Shapes a server analysis report for the stats panel.
 *
 * Formatting only: every number is taken from the report as-is. In
 * particular the conflict/coverage ratio is the server's field, never
 * recomputed from the other two.
 */

import type { AnalysisReport } from "./types.js";

export interface StatsRow {
  label: string;
  value: string;
}

export interface LfRow {
  lf: string;
  coverage: string;
  overlaps: string;
  conflicts: string;
}

export interface StatsPanel {
  task: string;
  manifest: string;
  summary: StatsRow[];
  perLf: LfRow[];
}

export function formatShare(value: number): string {
  return `${(100 * value).toFixed(1)}%`;
}

export function statsPanelModel(report: AnalysisReport): StatsPanel {
  const summary: StatsRow[] = [
    { label: "documents", value: String(report.n_docs) },
    { label: "rules", value: String(report.n_lfs) },
    { label: "coverage", value: formatShare(report.coverage) },
    { label: "overlaps", value: formatShare(report.overlaps) },
    { label: "conflicts", value: formatShare(report.conflicts) },
    { label: "conflict/coverage", value: formatShare(report.conflict_coverage_ratio) },
  ];
  if (report.tag_density !== null) {
    summary.push({ label: "tag density", value: formatShare(report.tag_density) });
  }
  return {
    task: report.task,
    manifest: report.manifest,
    summary,
    perLf: report.per_lf.map((row) => ({
      lf: row.lf_name,
      coverage: formatShare(row.coverage),
      overlaps: formatShare(row.overlaps),
      conflicts: formatShare(row.conflicts),
    })),
  };
}
