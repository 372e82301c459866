// Pure state transitions. The UI state is a function of the last server
// response plus in-flight submission status, so a page refresh that refetches
// the session reconstructs exactly the same screen; nothing rated is tracked
// client-side beyond the acknowledgment count shown on the summary screen.

import type { RatingRejection, SessionResponse } from "./api.js";

export type Phase = "loading" | "rating" | "submitting" | "done" | "failed";

export interface UiSessionState {
  raterId: string;
  phase: Phase;
  session: SessionResponse | null;
  // rejection reasons and transport errors, shown verbatim; null when clear
  banner: string | null;
  // ratings acknowledged by the server during this page's lifetime
  acknowledged: number;
}

export function initialState(raterId: string): UiSessionState {
  return { raterId, phase: "loading", session: null, banner: null, acknowledged: 0 };
}

export function withSession(state: UiSessionState, session: SessionResponse): UiSessionState {
  return {
    ...state,
    phase: session.done ? "done" : "rating",
    session,
    banner: null,
  };
}

export function beginSubmit(state: UiSessionState): UiSessionState {
  return { ...state, phase: "submitting", banner: null };
}

export function withAck(state: UiSessionState): UiSessionState {
  return { ...state, acknowledged: state.acknowledged + 1 };
}

export function withRejection(state: UiSessionState, rejection: RatingRejection): UiSessionState {
  return {
    ...state,
    phase: "rating",
    banner: `${rejection.error}: ${rejection.detail}`,
  };
}

export function withServerUnreachable(state: UiSessionState, message: string): UiSessionState {
  // the current pair (if any) is kept so the rating can be retried
  return {
    ...state,
    phase: state.session && !state.session.done ? "rating" : "failed",
    banner: `server unreachable: ${message}`,
  };
}

export function canSubmit(state: UiSessionState): boolean {
  return state.phase === "rating" && state.session?.pair != null;
}

export function progressText(state: UiSessionState): string {
  const progress = state.session?.progress;
  return progress ? `${progress.rated} / ${progress.total}` : "- / -";
}
