// Entry point: collect the rater id and server address, then hand the session
// to the controller and re-render on every state change.

import { LabelingApi } from "./api.js";
import { SessionController } from "./controller.js";
import { render } from "./view.js";

const RATER_KEY = "wcce-rater-id";

function serverBase(): string {
  const param = new URLSearchParams(window.location.search).get("server");
  if (param) return param.replace(/\/$/, "");
  if (window.location.protocol.startsWith("http")) return window.location.origin;
  return "http://127.0.0.1:8765";
}

function startForm(container: HTMLElement, onStart: (raterId: string) => void): void {
  container.replaceChildren();
  const form = document.createElement("form");
  form.className = "start-form";
  const label = document.createElement("label");
  label.textContent = "Rater id: ";
  const input = document.createElement("input");
  input.value = window.localStorage.getItem(RATER_KEY) ?? "";
  input.required = true;
  label.appendChild(input);
  const button = document.createElement("button");
  button.textContent = "Start rating";
  form.append(label, button);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const raterId = input.value.trim();
    if (!raterId) return;
    window.localStorage.setItem(RATER_KEY, raterId);
    onStart(raterId);
  });
  container.appendChild(form);
}

function startSession(container: HTMLElement, raterId: string): void {
  const api = new LabelingApi(serverBase());
  const controller = new SessionController(api, raterId);
  const hooks = {
    onScore: (score: number) => void controller.submit(score),
    onRetry: () => void controller.load(),
  };
  controller.onChange((state) => render(container, api, state, hooks));
  document.addEventListener("keydown", (event) => {
    if (event.key >= "0" && event.key <= "4" && !(event.target instanceof HTMLInputElement)) {
      void controller.submit(Number(event.key));
    }
  });
  void controller.load();
}

const root = document.getElementById("app");
if (root) {
  startForm(root, (raterId) => startSession(root, raterId));
}
