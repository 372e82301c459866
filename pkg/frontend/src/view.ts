// DOM rendering. The whole screen is re-rendered from the state on every
// change; no rating-related information lives in the DOM between renders.

import type { LabelingApi, PairInfo, SessionResponse } from "./api.js";
import { UiSessionState, canSubmit, progressText } from "./state.js";

export interface ViewHooks {
  onScore: (score: number) => void;
  onRetry: () => void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function imageGrid(api: LabelingApi, session: SessionResponse, className: string): HTMLElement | null {
  const paths = session.images?.[className];
  if (!paths || paths.length === 0) {
    return null;
  }
  const grid = el("div", "image-grid");
  for (const path of paths.slice(0, 36)) {
    const img = el("img");
    img.src = api.imageUrl(path);
    img.alt = className;
    img.loading = "lazy";
    grid.appendChild(img);
  }
  return grid;
}

function classPanel(
  api: LabelingApi,
  session: SessionResponse,
  heading: string,
  className: string,
): HTMLElement {
  const panel = el("section", "class-panel");
  panel.appendChild(el("h2", "panel-heading", heading));
  panel.appendChild(el("div", "class-name", className));
  const grid = imageGrid(api, session, className);
  if (grid) panel.appendChild(grid);
  return panel;
}

function ratingButtons(session: SessionResponse, enabled: boolean, hooks: ViewHooks): HTMLElement {
  const row = el("div", "rating-row");
  session.scale_labels.forEach((label, score) => {
    const button = el("button", "rating-button");
    button.appendChild(el("span", "rating-score", String(score)));
    button.appendChild(el("span", "rating-label", label));
    button.disabled = !enabled;
    button.addEventListener("click", () => hooks.onScore(score));
    row.appendChild(button);
  });
  return row;
}

function pairScreen(
  api: LabelingApi,
  state: UiSessionState,
  session: SessionResponse,
  pair: PairInfo,
  hooks: ViewHooks,
): HTMLElement {
  const root = el("div", "pair-screen");
  const question = el("p", "question");
  question.textContent =
    `How reasonable would it be for a classifier to label a "${pair.true_name}" ` +
    `image as "${pair.predicted_name}"?`;
  root.appendChild(question);

  const panels = el("div", "panels");
  panels.appendChild(classPanel(api, session, "True class", pair.true_name));
  panels.appendChild(classPanel(api, session, "Predicted as", pair.predicted_name));
  root.appendChild(panels);

  root.appendChild(ratingButtons(session, canSubmit(state), hooks));
  root.appendChild(el("p", "hint", "Keys 0-4 also submit a rating."));
  return root;
}

function doneScreen(state: UiSessionState): HTMLElement {
  const root = el("div", "done-screen");
  root.appendChild(el("h2", undefined, "All pairs rated."));
  const total = state.session?.progress.total ?? 0;
  root.appendChild(
    el(
      "p",
      undefined,
      `Recorded ${total} ratings for ${state.raterId} ` +
        `(${state.acknowledged} submitted in this sitting). Thank you!`,
    ),
  );
  return root;
}

export function render(
  container: HTMLElement,
  api: LabelingApi,
  state: UiSessionState,
  hooks: ViewHooks,
): void {
  container.replaceChildren();

  const header = el("header", "status-bar");
  header.appendChild(el("span", "rater", `rater: ${state.raterId}`));
  header.appendChild(el("span", "progress", progressText(state)));
  container.appendChild(header);

  if (state.banner) {
    const banner = el("div", "banner", state.banner);
    const retry = el("button", "retry-button", "retry");
    retry.addEventListener("click", () => hooks.onRetry());
    banner.appendChild(retry);
    container.appendChild(banner);
  }

  const session = state.session;
  if (state.phase === "loading") {
    container.appendChild(el("p", "loading", "Loading session..."));
  } else if (state.phase === "failed" || session === null) {
    if (!state.banner) container.appendChild(el("p", "loading", "Session unavailable."));
  } else if (state.phase === "done") {
    container.appendChild(doneScreen(state));
  } else if (session.pair) {
    container.appendChild(pairScreen(api, state, session, session.pair, hooks));
  }
}
