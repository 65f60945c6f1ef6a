// Single-page annotation app: one source/target pair at a time, score via
// buttons or keys 1-5, severity toggles, Enter submits, auto-advance.
//
// Submission safety: an idempotency token is attached per segment view, a
// single in-flight guard blocks double submits, and network-failed
// submissions wait in an ordered queue that retries until acknowledged.

import { AnnotationApi, AnnotationPayload, SegmentView, ValidationFailure } from "./api.js";
import { textDirection } from "./rtl.js";

export const SCALE_LABELS: Record<number, string> = {
  5: "excellent translation; no corrections needed",
  4: "good translation; minor improvement(s) need to be made",
  3: "medium translation; major improvement(s) need to be made",
  2: "poor translation; many improvements need to be made",
  1: "extremely poor translation",
};

export const SEVERITIES = [
  { id: "neutral", hint: "fine: stylistic preference only" },
  { id: "minor", hint: "inaccurate: hurts precision, meaning survives" },
  { id: "major", hint: "problematic: accuracy or interpretation breaks" },
] as const;

export interface AppOptions {
  annotator: string;
  baseUrl?: string;
  /** Retry interval for failed requests (ms). */
  retryMs?: number;
  tokenFactory?: () => string;
}

interface QueuedSubmission {
  segmentId: string;
  payload: AnnotationPayload;
}

let tokenCounter = 0;

function defaultToken(): string {
  const cryptoObj = globalThis.crypto as Crypto | undefined;
  if (cryptoObj && "randomUUID" in cryptoObj) return cryptoObj.randomUUID();
  tokenCounter += 1;
  return `tok-${Date.now()}-${tokenCounter}`;
}

export class AnnotationApp {
  readonly api: AnnotationApi;
  private readonly root: HTMLElement;
  private readonly annotator: string;
  private readonly retryMs: number;
  private readonly tokenFactory: () => string;

  private current: SegmentView | null = null;
  private done = false;
  private selectedScore: number | null = null;
  private severities = new Set<string>();
  private inFlight = false;
  private lastAck: number | null = null;
  private annotatedCount = 0;
  private viewToken = "";
  private queue: QueuedSubmission[] = [];
  private retryTimer: ReturnType<typeof setTimeout> | null = null;
  private idleWaiters: Array<() => void> = [];

  constructor(root: HTMLElement, options: AppOptions) {
    this.root = root;
    this.annotator = options.annotator;
    this.api = new AnnotationApi(options.baseUrl ?? "");
    this.retryMs = options.retryMs ?? 1500;
    this.tokenFactory = options.tokenFactory ?? defaultToken;
    this.buildSkeleton();
    document.addEventListener("keydown", this.onKeyDown);
  }

  dispose(): void {
    document.removeEventListener("keydown", this.onKeyDown);
    if (this.retryTimer !== null) clearTimeout(this.retryTimer);
  }

  // ---- public state for tests and the host page ----

  get state() {
    return {
      current: this.current,
      done: this.done,
      selectedScore: this.selectedScore,
      severities: [...this.severities].sort(),
      inFlight: this.inFlight,
      lastAck: this.lastAck,
      annotatedCount: this.annotatedCount,
      queuedSubmissions: this.queue.length,
    };
  }

  /** Resolves once nothing is in flight and the retry queue is empty. */
  whenIdle(): Promise<void> {
    if (!this.inFlight && this.queue.length === 0) return Promise.resolve();
    return new Promise((resolve) => this.idleWaiters.push(resolve));
  }

  async start(): Promise<void> {
    await this.fetchNext();
  }

  // ---- DOM ----

  private el<T extends HTMLElement>(selector: string): T {
    const node = this.root.querySelector(selector);
    if (!node) throw new Error(`missing UI element ${selector}`);
    return node as T;
  }

  private buildSkeleton(): void {
    const scoreButtons = [1, 2, 3, 4, 5]
      .map(
        (score) =>
          `<button type="button" class="score" data-score="${score}" ` +
          `title="${SCALE_LABELS[score]}">${score}</button>`,
      )
      .join("");
    const severityToggles = SEVERITIES.map(
      (severity) =>
        `<button type="button" class="severity" data-severity="${severity.id}" ` +
        `title="${severity.hint}">${severity.id}</button>`,
    ).join("");
    this.root.innerHTML = `
      <header class="bar">
        <span class="annotator"></span>
        <span class="progress-note"></span>
        <a href="/rubric" target="_blank" rel="noopener">ranking guidelines</a>
      </header>
      <div class="banner" hidden></div>
      <main class="workspace">
        <section class="pair">
          <article class="pane source-pane"><h2>Source</h2><p class="text source-text"></p></article>
          <article class="pane target-pane"><h2>Translation</h2><p class="text target-text"></p></article>
        </section>
        <section class="controls">
          <div class="scores" role="group" aria-label="quality score">${scoreButtons}</div>
          <div class="severity-row" role="group" aria-label="error severity">${severityToggles}</div>
          <textarea class="comment" rows="2"
            placeholder="optional comment (write 'source illogical' for unusable sources)"></textarea>
          <button type="button" class="submit" disabled>submit &amp; next (Enter)</button>
          <p class="field-error" hidden></p>
        </section>
        <section class="done-screen" hidden>
          <h2>Queue complete</h2>
          <p class="done-summary"></p>
        </section>
      </main>
    `;
    this.el<HTMLElement>(".annotator").textContent = this.annotator;
    this.el<HTMLElement>(".scores").addEventListener("click", (event) => {
      const target = event.target as HTMLElement;
      const score = target.dataset?.score;
      if (score) this.selectScore(Number(score));
    });
    this.el<HTMLElement>(".severity-row").addEventListener("click", (event) => {
      const target = event.target as HTMLElement;
      const severity = target.dataset?.severity;
      if (severity) this.toggleSeverity(severity);
    });
    this.el<HTMLButtonElement>(".submit").addEventListener("click", () => {
      void this.submitCurrent();
    });
  }

  private onKeyDown = (event: KeyboardEvent): void => {
    if (this.done || this.current === null) return;
    const inComment = event.target instanceof HTMLTextAreaElement;
    if (event.key >= "1" && event.key <= "5" && !inComment) {
      event.preventDefault();
      this.selectScore(Number(event.key));
      return;
    }
    if (event.key === "Enter" && !(inComment && event.shiftKey)) {
      event.preventDefault();
      void this.submitCurrent();
    }
  };

  private renderSegment(): void {
    const segment = this.current;
    const doneScreen = this.el<HTMLElement>(".done-screen");
    const workspacePair = this.el<HTMLElement>(".pair");
    const controls = this.el<HTMLElement>(".controls");
    if (segment === null) {
      workspacePair.hidden = true;
      controls.hidden = true;
      doneScreen.hidden = false;
      return;
    }
    doneScreen.hidden = true;
    workspacePair.hidden = false;
    controls.hidden = false;
    const sourceText = this.el<HTMLElement>(".source-text");
    const targetText = this.el<HTMLElement>(".target-text");
    sourceText.textContent = segment.source;
    sourceText.dir = textDirection(segment.source);
    targetText.textContent = segment.target;
    targetText.dir = textDirection(segment.target);
    this.el<HTMLTextAreaElement>(".comment").value = "";
    this.selectedScore = null;
    this.severities.clear();
    this.viewToken = this.tokenFactory();
    this.updateControls();
    this.hideBanner();
    this.hideFieldError();
  }

  private updateControls(): void {
    for (const button of this.root.querySelectorAll<HTMLButtonElement>(".score")) {
      button.classList.toggle("selected", Number(button.dataset.score) === this.selectedScore);
    }
    for (const button of this.root.querySelectorAll<HTMLButtonElement>(".severity")) {
      const id = button.dataset.severity ?? "";
      button.classList.toggle("selected", this.severities.has(id));
    }
    const submit = this.el<HTMLButtonElement>(".submit");
    submit.disabled = this.selectedScore === null || this.inFlight;
  }

  private updateProgressNote(): void {
    this.el<HTMLElement>(".progress-note").textContent =
      `${this.annotatedCount} annotated this session`;
  }

  private showBanner(message: string): void {
    const banner = this.el<HTMLElement>(".banner");
    banner.textContent = message;
    banner.hidden = false;
  }

  private hideBanner(): void {
    this.el<HTMLElement>(".banner").hidden = true;
  }

  private showFieldError(message: string): void {
    const node = this.el<HTMLElement>(".field-error");
    node.textContent = message;
    node.hidden = false;
  }

  private hideFieldError(): void {
    this.el<HTMLElement>(".field-error").hidden = true;
  }

  private async renderDone(): Promise<void> {
    this.done = true;
    this.current = null;
    this.renderSegment();
    let summary = `You annotated ${this.annotatedCount} segments this session.`;
    try {
      const progress = await this.api.progress();
      const mine = progress.annotated_by_annotator[this.annotator] ?? 0;
      summary += ` Overall: ${mine} of ${progress.total} segments carry your judgment.`;
    } catch {
      summary += " (progress summary unavailable)";
    }
    this.el<HTMLElement>(".done-summary").textContent = summary;
  }

  // ---- actions ----

  selectScore(score: number): void {
    if (this.done || this.current === null || this.inFlight) return;
    if (score < 1 || score > 5) return;
    this.selectedScore = score;
    this.updateControls();
  }

  toggleSeverity(id: string): void {
    if (this.done || this.current === null || this.inFlight) return;
    if (this.severities.has(id)) this.severities.delete(id);
    else this.severities.add(id);
    this.updateControls();
  }

  /**
   * Submit the current judgment and advance. Returns false when blocked
   * (no score selected, already in flight, or queue still draining).
   */
  async submitCurrent(): Promise<boolean> {
    if (this.done || this.current === null || this.inFlight) return false;
    if (this.selectedScore === null) {
      this.showFieldError("select a score (1-5) before submitting");
      return false;
    }
    const segment = this.current;
    const comment = this.el<HTMLTextAreaElement>(".comment").value.trim();
    const payload: AnnotationPayload = {
      annotator: this.annotator,
      score: this.selectedScore,
      severities: [...this.severities].sort(),
      token: this.viewToken,
    };
    if (comment) payload.comment = comment;

    this.inFlight = true;
    this.updateControls();
    try {
      const ack = await this.api.submit(segment.segment_id, payload);
      this.lastAck = ack.sequence_number;
      this.annotatedCount += 1;
      this.updateProgressNote();
      this.inFlight = false;
      await this.fetchNext();
      return true;
    } catch (error) {
      this.inFlight = false;
      if (error instanceof ValidationFailure) {
        this.showFieldError(
          error.field ? `${error.field}: ${error.message}` : error.message,
        );
        this.updateControls();
        this.notifyIfIdle();
        return false;
      }
      // Network failure: keep the judgment, retry in order, never drop it.
      this.queue.push({ segmentId: segment.segment_id, payload });
      this.showBanner("connection lost; your judgment is queued and will retry");
      this.scheduleRetry();
      this.updateControls();
      return false;
    }
  }

  private async fetchNext(): Promise<void> {
    try {
      const segment = await this.api.nextSegment(this.annotator);
      if (segment === null) {
        await this.renderDone();
      } else {
        this.done = false;
        this.current = segment;
        this.renderSegment();
      }
      this.notifyIfIdle();
    } catch {
      this.showBanner("cannot reach the annotation service; retrying");
      this.scheduleRetry();
    }
  }

  private scheduleRetry(): void {
    if (this.retryTimer !== null) return;
    this.retryTimer = setTimeout(() => {
      this.retryTimer = null;
      void this.flushQueue();
    }, this.retryMs);
  }

  /** Drain queued submissions in order, then refresh the current view. */
  async flushQueue(): Promise<void> {
    while (this.queue.length > 0) {
      const head = this.queue[0]!;
      try {
        const ack = await this.api.submit(head.segmentId, head.payload);
        this.lastAck = ack.sequence_number;
        this.annotatedCount += 1;
        this.updateProgressNote();
        this.queue.shift();
      } catch (error) {
        if (error instanceof ValidationFailure) {
          // Rejected, not lost to the network: surface it and drop from queue.
          this.queue.shift();
          this.showFieldError(error.message);
          continue;
        }
        this.scheduleRetry();
        return;
      }
    }
    this.hideBanner();
    await this.fetchNext();
  }

  private notifyIfIdle(): void {
    if (this.inFlight || this.queue.length > 0) return;
    const waiters = this.idleWaiters;
    this.idleWaiters = [];
    for (const resolve of waiters) resolve();
  }
}

export function createApp(root: HTMLElement, options: AppOptions): AnnotationApp {
  return new AnnotationApp(root, options);
}
