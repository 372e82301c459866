// Session orchestration: talks to the API, applies the pure transitions, and
// notifies the view. Framework-free so it can also drive a scripted session
// in tests (including the end-to-end round trip against the real server).

import { LabelingApi, SubmitOutcome } from "./api.js";
import {
  UiSessionState,
  beginSubmit,
  canSubmit,
  initialState,
  withAck,
  withRejection,
  withServerUnreachable,
  withSession,
} from "./state.js";

export type StateListener = (state: UiSessionState) => void;

export class SessionController {
  private state: UiSessionState;
  private listeners: StateListener[] = [];

  constructor(
    private readonly api: LabelingApi,
    raterId: string,
  ) {
    this.state = initialState(raterId);
  }

  get current(): UiSessionState {
    return this.state;
  }

  onChange(listener: StateListener): void {
    this.listeners.push(listener);
  }

  private setState(next: UiSessionState): void {
    this.state = next;
    for (const listener of this.listeners) {
      listener(next);
    }
  }

  async load(): Promise<UiSessionState> {
    try {
      const session = await this.api.fetchSession(this.state.raterId);
      this.setState(withSession(this.state, session));
    } catch (err) {
      this.setState(withServerUnreachable(this.state, String(err)));
    }
    return this.state;
  }

  // Submits a rating for the pair currently on screen. Exactly one rating can
  // be in flight; calls while submitting (or when no pair is shown) are
  // ignored. A duplicate-rating rejection advances without incrementing the
  // acknowledged count (the server already holds that rating).
  async submit(score: number): Promise<UiSessionState> {
    if (!canSubmit(this.state) || !Number.isInteger(score) || score < 0 || score > 4) {
      return this.state;
    }
    const pair = this.state.session!.pair!;
    this.setState(beginSubmit(this.state));
    let outcome: SubmitOutcome;
    try {
      outcome = await this.api.submitRating(this.state.raterId, pair, score);
    } catch (err) {
      // nothing was acknowledged: keep the pair so the rating can be retried
      this.setState(withServerUnreachable(this.state, String(err)));
      return this.state;
    }
    if (outcome.kind === "ack") {
      this.setState(withAck(this.state));
      return this.load();
    }
    if (outcome.rejection.error === "duplicate-rating") {
      // already recorded server-side; advance without double-counting
      return this.load();
    }
    this.setState(withRejection(this.state, outcome.rejection));
    return this.state;
  }
}
