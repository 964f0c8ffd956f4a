/** Edit-validate-analyze loop for rule manifests.
 *
 * The session holds a draft of the rule files plus the project version it
 * was loaded against. Saving re-validates server-side; a stale base version
 * turns into a conflict banner and blocks further saves until the session
 * is refreshed against the current project state.
 */

import type { ApiClient } from "./api.js";
import type { AnalysisReport, Diagnostic } from "./types.js";

export type SaveOutcome =
  | { kind: "saved"; analysis: AnalysisReport; version: number }
  | { kind: "invalid"; diagnostics: Diagnostic[] }
  | { kind: "conflict"; message: string }
  | { kind: "blocked"; message: string };

export class EditorSession {
  diagnostics: Diagnostic[] = [];
  lastAnalysis: AnalysisReport | null = null;
  /** Banner text while the draft is stale; null once refreshed. */
  conflict: string | null = null;

  constructor(
    private readonly client: ApiClient,
    readonly task: string,
    public files: Record<string, string>,
    public baseVersion: number,
    public manifestVersion: string = "v0",
  ) {}

  static async load(client: ApiClient, name: string): Promise<EditorSession> {
    const manifest = await client.manifest(name);
    return new EditorSession(
      client,
      manifest.task,
      { ...manifest.files },
      manifest.version,
      manifest.manifest_version,
    );
  }

  setFile(name: string, source: string): void {
    this.files[name] = source;
  }

  removeFile(name: string): void {
    delete this.files[name];
  }

  canSave(): boolean {
    return this.conflict === null;
  }

  /** Per-file diagnostics for inline rendering; unattributed ones under "". */
  diagnosticsByFile(): Record<string, Diagnostic[]> {
    const byFile: Record<string, Diagnostic[]> = {};
    for (const diag of this.diagnostics) {
      const key = diag.lf_name ?? "";
      (byFile[key] ??= []).push(diag);
    }
    return byFile;
  }

  async save(name: string): Promise<SaveOutcome> {
    if (this.conflict !== null) {
      return { kind: "blocked", message: this.conflict };
    }
    const { status, data } = await this.client.putManifest(name, {
      base_version: this.baseVersion,
      task: this.task,
      version: this.manifestVersion,
      files: this.files,
    });
    if (status === 409) {
      this.conflict = String(data.error);
      return { kind: "conflict", message: this.conflict };
    }
    if (status === 422) {
      this.diagnostics = data.diagnostics as Diagnostic[];
      return { kind: "invalid", diagnostics: this.diagnostics };
    }
    this.diagnostics = data.diagnostics as Diagnostic[];
    this.lastAnalysis = data.analysis as AnalysisReport;
    this.baseVersion = data.version as number;
    return { kind: "saved", analysis: this.lastAnalysis, version: this.baseVersion };
  }

  /** Re-reads the project version so a conflicted draft can be saved again. */
  async refresh(): Promise<void> {
    const info = await this.client.project();
    this.baseVersion = info.version;
    this.conflict = null;
  }
}
