// Client for the annotation service HTTP API. Bodies are JSON; the four
// endpoints below are the service's whole surface.

export interface SegmentView {
  segment_id: string;
  source: string;
  target: string;
}

export interface Progress {
  total: number;
  annotated_by_annotator: Record<string, number>;
}

export interface AnnotationPayload {
  annotator: string;
  score: number;
  severities: string[];
  comment?: string;
  token?: string;
}

export interface SubmitAck {
  sequence_number: number;
}

export class ValidationFailure extends Error {
  readonly field: string | undefined;
  constructor(message: string, field?: string) {
    super(message);
    this.field = field;
  }
}

export class AnnotationApi {
  constructor(private readonly baseUrl: string = "") {}

  /** Next unannotated segment for this annotator, or null when done. */
  async nextSegment(annotator: string): Promise<SegmentView | null> {
    const url = `${this.baseUrl}/api/segments/next?annotator=${encodeURIComponent(annotator)}`;
    const response = await fetch(url);
    if (response.status === 204) return null;
    if (!response.ok) throw new Error(`next segment failed: HTTP ${response.status}`);
    return (await response.json()) as SegmentView;
  }

  /**
   * Submit one judgment. 422 maps to ValidationFailure so the caller can
   * show field errors without losing input; network errors reject as-is.
   */
  async submit(segmentId: string, payload: AnnotationPayload): Promise<SubmitAck> {
    const url = `${this.baseUrl}/api/segments/${encodeURIComponent(segmentId)}/annotation`;
    const response = await fetch(url, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (response.status === 422) {
      const doc = (await response.json()) as { error?: string; field?: string };
      throw new ValidationFailure(doc.error ?? "validation failed", doc.field);
    }
    if (response.status !== 201) {
      throw new Error(`submit failed: HTTP ${response.status}`);
    }
    return (await response.json()) as SubmitAck;
  }

  async progress(): Promise<Progress> {
    const response = await fetch(`${this.baseUrl}/api/progress`);
    if (!response.ok) throw new Error(`progress failed: HTTP ${response.status}`);
    return (await response.json()) as Progress;
  }
}
