/** Wire types for the weaklabel HTTP API. Every response carries `version`. */

export interface TaskInfo {
  mode: string;
  labels: string[];
}

export interface ProjectInfo {
  settings: Record<string, unknown>;
  tasks: Record<string, TaskInfo>;
  manifests: Record<string, { task: string; version: string; n_lfs: number }>;
  matrices: Record<string, unknown>;
  models: Record<string, unknown>;
  predictions: Record<string, unknown>;
  version: number;
}

export interface PerLfStats {
  lf_name: string;
  coverage: number;
  overlaps: number;
  conflicts: number;
}

export interface AnalysisReport {
  task: string;
  manifest: string;
  n_docs: number;
  n_lfs: number;
  coverage: number;
  overlaps: number;
  conflicts: number;
  conflict_coverage_ratio: number;
  per_lf: PerLfStats[];
  tag_density: number | null;
}

export interface Diagnostic {
  severity: "error" | "warning";
  code: string;
  message: string;
  line: number | null;
  col: number | null;
  lf_name: string | null;
}

export interface DocumentRecord {
  id: string;
  title: string;
  text: string;
  tags: string | null;
  split: string;
  input: string;
}

/** Hard label: class name for single-label tasks, {tag: present} otherwise. */
export type HardLabel = string | Record<string, boolean>;

export interface QueueItem {
  doc_id: string;
  split: string;
  input: string;
  prediction: HardLabel | null;
  probs: number[] | null;
  conflicted: boolean;
  gold_status: "unreviewed" | "accepted" | "revised";
  gold_label: HardLabel | null;
}

export interface ReviewProgress {
  task: string;
  split: string | null;
  total: number;
  reviewed: number;
  distribution: Record<string, number>;
}

export interface QueueResponse {
  task: string;
  items: QueueItem[];
  progress: ReviewProgress;
  version: number;
}

export interface GoldRecord {
  doc_id: string;
  task: string;
  label: HardLabel;
  reviewer: string;
  revised_from: HardLabel | null;
  reviewed_at: string;
}

export interface ManifestResponse {
  name: string;
  task: string;
  manifest_version: string;
  files: Record<string, string>;
  version: number;
}

export interface ManifestPutBody {
  base_version: number;
  task: string;
  version: string;
  files: Record<string, string>;
}
