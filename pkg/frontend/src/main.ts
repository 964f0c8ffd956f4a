/** Browser entry point: wires the API client, editor, review queue and
 * stats panel into the static page. All state changes go through the API. */

import { ApiClient } from "./api.js";
import { EditorSession } from "./editor.js";
import { guidelineFor } from "./guidelines.js";
import { keyToAction } from "./keyboard.js";
import type { ReviewAction } from "./keyboard.js";
import {
  renderConflictBanner,
  renderDiagnostics,
  renderReviewPane,
  renderStatsPanel,
} from "./render.js";
import { ReviewSession } from "./review.js";
import { statsPanelModel } from "./stats.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

async function start(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const task = params.get("task") ?? "sentiment";
  const split = params.get("split") ?? "validation";
  const client = new ApiClient((url, init) => fetch(url, init));

  const info = await client.project();
  const labels = info.tasks[task]?.labels ?? [];
  const statsPane = el<HTMLElement>("stats");
  const reviewPane = el<HTMLElement>("review");
  const bannerPane = el<HTMLElement>("banner");
  const diagsPane = el<HTMLElement>("diagnostics");
  const filePicker = el<HTMLSelectElement>("file-picker");
  const sourceBox = el<HTMLTextAreaElement>("source");
  const manifestPicker = el<HTMLSelectElement>("manifest-picker");
  const saveName = el<HTMLInputElement>("save-name");

  async function refreshStats(manifest?: string): Promise<void> {
    const report = await client.analyze(task, manifest);
    statsPane.innerHTML = renderStatsPanel(statsPanelModel(report));
  }

  // -- review queue -------------------------------------------------------
  const session = await ReviewSession.open(client, task, split);
  const guideline = guidelineFor(task);

  function drawReview(): void {
    reviewPane.innerHTML = renderReviewPane(
      session.current(),
      guideline,
      session.progress,
      labels,
      session.lastError,
    );
  }

  async function dispatch(action: ReviewAction): Promise<void> {
    if (action.kind === "accept") await session.accept();
    else if (action.kind === "next") session.next();
    else if (action.kind === "toggle-conflicted") await session.toggleConflicted();
    else if (action.kind === "revise") {
      const label = labels[action.labelIndex];
      if (label !== undefined) await session.revise(label);
    }
    drawReview();
  }

  document.addEventListener("keydown", (event) => {
    if (event.target instanceof HTMLTextAreaElement || event.target instanceof HTMLInputElement) {
      return;
    }
    const action = keyToAction(event.key);
    if (action !== null) void dispatch(action);
  });

  reviewPane.addEventListener("click", (event) => {
    const button = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (button === null) return;
    const kind = button.dataset.action;
    if (kind === "accept") void dispatch({ kind: "accept" });
    else if (kind === "next") void dispatch({ kind: "next" });
    else if (kind === "retry") void dispatch({ kind: "accept" });
    else if (kind === "revise") {
      const index = labels.indexOf(button.dataset.label ?? "");
      if (index >= 0) void dispatch({ kind: "revise", labelIndex: index });
    }
  });

  // -- manifest editor ----------------------------------------------------
  let editor: EditorSession | null = null;

  const names = Object.keys(info.manifests)
    .filter((name) => info.manifests[name]?.task === task)
    .sort();
  manifestPicker.innerHTML = names
    .map((name) => `<option value="${name}">${name}</option>`)
    .join("");

  function drawEditor(): void {
    if (editor === null) return;
    const files = Object.keys(editor.files).sort();
    const selected = filePicker.value;
    filePicker.innerHTML = files
      .map((name) => `<option value="${name}">${name}</option>`)
      .join("");
    filePicker.value = files.includes(selected) ? selected : (files[0] ?? "");
    sourceBox.value = editor.files[filePicker.value] ?? "";
    bannerPane.innerHTML = renderConflictBanner(editor.conflict);
    diagsPane.innerHTML = renderDiagnostics(editor.diagnosticsByFile());
  }

  async function loadManifest(name: string): Promise<void> {
    editor = await EditorSession.load(client, name);
    saveName.value = name;
    drawEditor();
    await refreshStats(name);
  }

  manifestPicker.addEventListener("change", () => void loadManifest(manifestPicker.value));
  filePicker.addEventListener("change", drawEditor);
  sourceBox.addEventListener("input", () => {
    if (editor !== null && filePicker.value !== "") {
      editor.setFile(filePicker.value, sourceBox.value);
    }
  });

  el<HTMLButtonElement>("save").addEventListener("click", async () => {
    if (editor === null) return;
    const outcome = await editor.save(saveName.value);
    drawEditor();
    if (outcome.kind === "saved") {
      statsPane.innerHTML = renderStatsPanel(statsPanelModel(outcome.analysis));
    }
  });

  bannerPane.addEventListener("click", async (event) => {
    const button = (event.target as HTMLElement).closest<HTMLElement>("[data-action=refresh]");
    if (button === null || editor === null) return;
    await editor.refresh();
    drawEditor();
  });

  if (names.length > 0 && names[0] !== undefined) await loadManifest(names[0]);
  else await refreshStats();
  drawReview();
}

void start();
