/** HTML fragments for the studio panes. Pure string builders so the
 * contract tests can check what gets shown without a browser. */

import type { Guideline } from "./guidelines.js";
import type { StatsPanel } from "./stats.js";
import type { Diagnostic, HardLabel, QueueItem, ReviewProgress } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function formatLabel(label: HardLabel | null): string {
  if (label === null) return "(none)";
  if (typeof label === "string") return label;
  const present = Object.keys(label).filter((tag) => label[tag]);
  return present.length ? present.join(", ") : "(no tags)";
}

export function renderStatsPanel(panel: StatsPanel): string {
  const rows = panel.summary
    .map((row) => `<tr><th>${escapeHtml(row.label)}</th><td>${escapeHtml(row.value)}</td></tr>`)
    .join("");
  const perLf = panel.perLf
    .map(
      (row) =>
        `<tr><td>${escapeHtml(row.lf)}</td><td>${row.coverage}</td>` +
        `<td>${row.overlaps}</td><td>${row.conflicts}</td></tr>`,
    )
    .join("");
  return (
    `<section class="stats" data-task="${escapeHtml(panel.task)}">` +
    `<h2>${escapeHtml(panel.manifest)}</h2>` +
    `<table class="stats-summary">${rows}</table>` +
    `<table class="stats-per-lf">` +
    `<tr><th>rule</th><th>coverage</th><th>overlaps</th><th>conflicts</th></tr>${perLf}` +
    `</table></section>`
  );
}

export function renderDiagnostics(byFile: Record<string, Diagnostic[]>): string {
  const blocks = Object.keys(byFile)
    .sort()
    .map((file) => {
      const items = (byFile[file] ?? [])
        .map((diag) => {
          const where = diag.line !== null ? `${diag.line}:${diag.col ?? 0} ` : "";
          return (
            `<li class="diag-${diag.severity}" data-line="${diag.line ?? ""}"` +
            ` data-col="${diag.col ?? ""}">` +
            `${escapeHtml(where)}${escapeHtml(diag.code)}: ${escapeHtml(diag.message)}</li>`
          );
        })
        .join("");
      return `<div class="file-diags" data-file="${escapeHtml(file)}">` +
        `<h3>${escapeHtml(file)}</h3><ul>${items}</ul></div>`;
    });
  return blocks.join("");
}

export function renderConflictBanner(message: string | null): string {
  if (message === null) return "";
  return (
    `<div class="conflict-banner" role="alert">${escapeHtml(message)} ` +
    `<button data-action="refresh">Refresh</button></div>`
  );
}

function renderGuideline(guideline: Guideline | null): string {
  if (guideline === null) return "";
  const points = guideline.points
    .map((point) => {
      const head = point.label === null ? "" : `<strong>${escapeHtml(point.label)}</strong>: `;
      return `<li>${head}${escapeHtml(point.text)}</li>`;
    })
    .join("");
  return (
    `<aside class="guidelines"><h3>Guidelines</h3>` +
    `<p>${escapeHtml(guideline.intro)}</p><ul>${points}</ul></aside>`
  );
}

export function renderReviewPane(
  item: QueueItem | null,
  guideline: Guideline | null,
  progress: ReviewProgress | null,
  labels: string[],
  lastError: string | null = null,
): string {
  if (item === null) return `<section class="review"><p>Queue is empty.</p></section>`;
  const probs = item.probs === null
    ? ""
    : `<p class="probs">${item.probs.map((p) => p.toFixed(3)).join(" / ")}</p>`;
  const counter = progress === null
    ? ""
    : `<p class="progress">${progress.reviewed} of ${progress.total} reviewed</p>` +
      `<p class="distribution">${labels
        .map((label) => `${escapeHtml(label)}: ${progress.distribution[label] ?? 0}`)
        .join(", ")}</p>`;
  const retry = lastError === null
    ? ""
    : `<div class="post-error" role="alert">${escapeHtml(lastError)} ` +
      `<button data-action="retry">Retry</button></div>`;
  const choices = labels
    .map((label, i) => `<button data-action="revise" data-label="${escapeHtml(label)}">` +
      `${i + 1} ${escapeHtml(label)}</button>`)
    .join("");
  return (
    `<section class="review" data-doc="${escapeHtml(item.doc_id)}">` +
    `<article class="document">${escapeHtml(item.input)}</article>` +
    renderGuideline(guideline) +
    `<p class="prediction">prediction: ${escapeHtml(formatLabel(item.prediction))}` +
    `${item.conflicted ? " (rules conflicted)" : ""}</p>` +
    probs +
    `<p class="gold">status: ${escapeHtml(item.gold_status)}` +
    `${item.gold_label !== null ? `, gold: ${escapeHtml(formatLabel(item.gold_label))}` : ""}</p>` +
    retry +
    `<div class="actions"><button data-action="accept">Accept</button>${choices}` +
    `<button data-action="next">Next</button></div>` +
    counter +
    `</section>`
  );
}
