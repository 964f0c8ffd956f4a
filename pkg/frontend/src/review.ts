/** Review queue workflow: walk validation/test documents, accept or revise
 * the model's prediction, and keep progress in sync with the server.
 *
 * The session never computes a label or a count itself. Accept posts the
 * prediction back verbatim; after every decision the queue and progress are
 * refetched. A failed post leaves the item unreviewed so it can be retried.
 */

import { ApiError } from "./api.js";
import type { ApiClient } from "./api.js";
import type { GoldRecord, HardLabel, QueueItem, ReviewProgress } from "./types.js";

export class ReviewSession {
  items: QueueItem[] = [];
  progress: ReviewProgress | null = null;
  cursor = 0;
  onlyConflicted = false;
  /** Decisions posted by this session, in order. */
  records: GoldRecord[] = [];
  lastError: string | null = null;

  constructor(
    private readonly client: ApiClient,
    readonly task: string,
    readonly split?: string,
  ) {}

  static async open(client: ApiClient, task: string, split?: string): Promise<ReviewSession> {
    const session = new ReviewSession(client, task, split);
    await session.reload();
    return session;
  }

  current(): QueueItem | null {
    return this.items[this.cursor] ?? null;
  }

  next(): void {
    if (this.cursor < this.items.length - 1) this.cursor += 1;
  }

  /** Keep the model's prediction as gold for the current document. */
  async accept(): Promise<GoldRecord | null> {
    const item = this.current();
    if (item === null || item.prediction === null) return null;
    return this.post(item, item.prediction);
  }

  /** Replace the prediction with a human label for the current document. */
  async revise(label: HardLabel): Promise<GoldRecord | null> {
    const item = this.current();
    if (item === null) return null;
    return this.post(item, label);
  }

  async toggleConflicted(): Promise<void> {
    this.onlyConflicted = !this.onlyConflicted;
    this.cursor = 0;
    await this.reload();
  }

  private async post(item: QueueItem, label: HardLabel): Promise<GoldRecord | null> {
    try {
      const record = await this.client.postReview(item.doc_id, this.task, label);
      this.lastError = null;
      this.records.push(record);
      await this.reload();
      return record;
    } catch (error) {
      // The item stays unreviewed; the caller can retry the same decision.
      this.lastError = error instanceof ApiError ? error.message : String(error);
      return null;
    }
  }

  private async reload(): Promise<void> {
    const queue = await this.client.reviewQueue(this.task, this.split, this.onlyConflicted);
    this.items = queue.items;
    this.progress = queue.progress;
    if (this.cursor >= this.items.length) {
      this.cursor = Math.max(0, this.items.length - 1);
    }
  }
}
