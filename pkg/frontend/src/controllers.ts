// View controllers: IO orchestration over the pure state module. DOM-free,
// so the full review flow is testable against a stubbed API client.

import { ApiClient, ApiError } from "./api.js";
import { actionForKey } from "./keyboard.js";
import {
  AnnotateState,
  PendingVerdict,
  TriageState,
  annotateComplete,
  annotateCurrent,
  annotateMove,
  applyVerdict,
  computeTallies,
  currentItem,
  initialAnnotate,
  initialTriage,
  moveCursor,
  rollbackVerdict,
} from "./state.js";
import type { AgreementReport, Flag, Label, TriageItem, Verdict } from "./types.js";

export class TriageController {
  state: TriageState = { queue: [], cursor: 0, tallies: { confirmed: 0, rejected: 0, unsure: 0 }, error: null };
  loaded = false;

  constructor(
    private api: ApiClient,
    public reviewer: string,
    private onChange: (state: TriageState) => void = () => {},
  ) {}

  private emit(): void {
    this.onChange(this.state);
  }

  async load(): Promise<void> {
    const flags = await this.api.getFlags();
    const unreviewed = flags.filter((f) => f.verdict === "unreviewed");
    const items: TriageItem[] = [];
    for (const flag of unreviewed) {
      const ad = await this.api.getAd(flag.ad_id);
      items.push({
        ad_id: flag.ad_id,
        score: flag.score,
        model_id: flag.model_id,
        verdict: flag.verdict,
        reviewer: flag.reviewer,
        text: ad.text,
        advertiser_name: ad.advertiser_name,
        disclaimer: ad.disclaimer,
      });
    }
    this.state = initialTriage(items, flags);
    this.loaded = true;
    this.emit();
  }

  current(): TriageItem | null {
    return currentItem(this.state);
  }

  move(delta: number): void {
    this.state = moveCursor(this.state, delta);
    this.emit();
  }

  /** Optimistic verdict: the queue advances immediately; a failed write puts
   * the item back with a visible error. Resolves true when journaled. */
  async setVerdict(verdict: Exclude<Verdict, "unreviewed">): Promise<boolean> {
    const applied = applyVerdict(this.state, verdict);
    if (applied === null) return false;
    this.state = applied.state;
    this.emit();
    try {
      await this.api.postVerdict(applied.pending.item.ad_id, verdict, this.reviewer);
      return true;
    } catch (err) {
      this.state = this.rollback(applied.pending, err);
      this.emit();
      return false;
    }
  }

  private rollback(pending: PendingVerdict, err: unknown): TriageState {
    const message = err instanceof ApiError ? `write failed: ${err.message}` : `write failed: ${String(err)}`;
    return rollbackVerdict(this.state, pending, message);
  }

  async handleKey(key: string): Promise<void> {
    const action = actionForKey(key);
    if (action === null) return;
    if (action.kind === "move") this.move(action.delta);
    else await this.setVerdict(action.choice);
  }
}

export class AnnotateController {
  state: AnnotateState = { queue: [], cursor: 0, labeled: 0, error: null };

  constructor(
    private api: ApiClient,
    public annotator: string,
    private onChange: (state: AnnotateState) => void = () => {},
  ) {}

  private emit(): void {
    this.onChange(this.state);
  }

  /** Queue = collector ads this annotator has not labeled yet. Scores are
   * never fetched here, so annotators are not anchored by the model. */
  async load(limit = 500): Promise<void> {
    const [page, labels] = await Promise.all([
      this.api.getAds({ source: "collector", limit }),
      this.api.getLabels(this.annotator),
    ]);
    const done = new Set(labels.map((ev) => ev.ad_id));
    const queue = page.items
      .filter((ad) => !done.has(ad.id))
      .map((ad) => ({
        id: ad.id,
        text: ad.text,
        advertiser_name: ad.advertiser_name,
        disclaimer: ad.disclaimer,
      }));
    this.state = initialAnnotate(queue);
    this.emit();
  }

  current() {
    return annotateCurrent(this.state);
  }

  move(delta: number): void {
    this.state = annotateMove(this.state, delta);
    this.emit();
  }

  /** The ad leaves the queue only once the write is acknowledged. */
  async setLabel(label: Label): Promise<boolean> {
    const ad = this.current();
    if (ad === null) return false;
    try {
      await this.api.postLabel(ad.id, this.annotator, label);
    } catch (err) {
      const message = err instanceof ApiError ? err.message : String(err);
      this.state = { ...this.state, error: `label write failed: ${message}` };
      this.emit();
      return false;
    }
    this.state = annotateComplete(this.state, ad.id);
    this.emit();
    return true;
  }

  async handleKey(key: string): Promise<void> {
    const action = actionForKey(key);
    if (action === null) return;
    if (action.kind === "move") this.move(action.delta);
    else await this.setLabel(action.choice);
  }
}

export interface AgreementView {
  report: AgreementReport | null;
  error: string | null;
}

export class AgreementController {
  view: AgreementView = { report: null, error: null };

  constructor(
    private api: ApiClient,
    private onChange: (view: AgreementView) => void = () => {},
  ) {}

  async fetchPair(annotatorA: string, annotatorB: string): Promise<AgreementView> {
    try {
      const report = await this.api.getAgreement(annotatorA, annotatorB);
      this.view = { report, error: null };
    } catch (err) {
      const message = err instanceof ApiError ? err.message : String(err);
      this.view = { report: null, error: message };
    }
    this.onChange(this.view);
    return this.view;
  }
}

export function talliesOf(flags: Flag[]) {
  return computeTallies(flags);
}
