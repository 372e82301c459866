// Typed client for the two labeling routes. The server is the source of
// truth; this layer only shapes requests and classifies responses.

export interface PairInfo {
  true_class: number;
  predicted_class: number;
  true_name: string;
  predicted_name: string;
}

export interface SessionResponse {
  session_id: string;
  class_names: string[];
  scale_labels: string[];
  progress: { rated: number; total: number };
  images: Record<string, string[]> | null;
  done: boolean;
  pair: PairInfo | null;
}

export interface RatingAck {
  ok: boolean;
  count: number;
  rater_rated: number;
  total: number;
  done: boolean;
}

export interface RatingRejection {
  error: string;
  detail: string;
}

export type SubmitOutcome =
  | { kind: "ack"; ack: RatingAck }
  | { kind: "rejected"; rejection: RatingRejection };

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class LabelingApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async fetchSession(raterId: string): Promise<SessionResponse> {
    const url = `${this.baseUrl}/session?rater_id=${encodeURIComponent(raterId)}`;
    const response = await this.fetchFn(url);
    if (!response.ok) {
      throw new Error(`session fetch failed: HTTP ${response.status}`);
    }
    return (await response.json()) as SessionResponse;
  }

  // Resolves with a rejection (never throws) for server-side validation
  // errors, so callers can surface the reason verbatim; network failures
  // still reject the promise.
  async submitRating(
    raterId: string,
    pair: PairInfo,
    score: number,
  ): Promise<SubmitOutcome> {
    const response = await this.fetchFn(`${this.baseUrl}/rating`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        rater_id: raterId,
        true_class: pair.true_class,
        predicted_class: pair.predicted_class,
        score,
      }),
    });
    const body = await response.json();
    if (response.ok) {
      return { kind: "ack", ack: body as RatingAck };
    }
    const rejection = body as RatingRejection;
    if (!rejection.error) {
      throw new Error(`rating submit failed: HTTP ${response.status}`);
    }
    return { kind: "rejected", rejection };
  }

  imageUrl(path: string): string {
    return `${this.baseUrl}${path}`;
  }
}
