/**
 * Browser wiring: one active session per tab, event polling while a turn is
 * in flight, and re-hydration from /history + /world after a reload.
 */

import { ApiError, Client } from "./api.js";
import { EventCursor, nextDelay, parseSse } from "./sse.js";
import {
  canSend,
  initialState,
  lifecycleEvent,
  rebuild,
  sessionStarted,
  toastDismissed,
  turnCompleted,
  turnFailed,
  turnSubmitted,
  type ViewState,
} from "./store.js";
import { renderChat, renderScenarioPicker, renderToasts, renderWorldPanel } from "./render.js";

const SESSION_KEY = "housekeep.session";

function element<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

export function startApp(baseUrl: string): void {
  const client = new Client(baseUrl);
  const cursor = new EventCursor();
  let state: ViewState = initialState();
  let lastFailedText: string | null = null;

  const chatBox = element<HTMLDivElement>("chat");
  const worldBox = element<HTMLDivElement>("world");
  const toastBox = element<HTMLDivElement>("toasts");
  const pickerBox = element<HTMLDivElement>("picker");
  const startButton = element<HTMLButtonElement>("start");
  const input = element<HTMLInputElement>("input");
  const sendButton = element<HTMLButtonElement>("send");

  function render(): void {
    chatBox.innerHTML = renderChat(state);
    worldBox.innerHTML = renderWorldPanel(state);
    toastBox.innerHTML = renderToasts(state);
    const allowed = canSend(state, input.value);
    sendButton.disabled = !allowed;
    input.disabled = state.session === null || state.busy;
    chatBox.scrollTop = chatBox.scrollHeight;
    for (const button of toastBox.querySelectorAll<HTMLButtonElement>("button.retry")) {
      button.addEventListener("click", () => {
        const index = Number(button.dataset.index);
        state = toastDismissed(state, index);
        if (lastFailedText) void submit(lastFailedText);
        render();
      });
    }
  }

  async function pollEvents(): Promise<void> {
    let failures = 0;
    while (state.busy && state.session) {
      try {
        const text = await client.events(state.session.session_id, cursor.after);
        for (const frame of cursor.ingest(parseSse(text))) {
          state = lifecycleEvent(state, frame);
        }
        failures = 0;
        render();
      } catch {
        failures += 1;
      }
      await new Promise((resolve) => setTimeout(resolve, nextDelay(failures)));
    }
  }

  async function submit(text: string): Promise<void> {
    const session = state.session;
    if (!session || !canSend(state, text)) return;
    state = turnSubmitted(state, text);
    input.value = "";
    render();
    void pollEvents();
    try {
      const turn = await client.postTurn(session.session_id, text);
      const world = await client.world(session.session_id);
      state = turnCompleted(state, turn, world);
      lastFailedText = null;
    } catch (exc) {
      if (exc instanceof ApiError && exc.status === 409) {
        // another turn is still running; leave the send box disabled
        return;
      }
      lastFailedText = text;
      const message =
        exc instanceof ApiError && exc.retryable
          ? `request failed (${exc.message}); retry?`
          : `rejected: ${exc instanceof Error ? exc.message : String(exc)}`;
      state = turnFailed(state, message);
    }
    render();
  }

  async function openSession(scenario: string): Promise<void> {
    const session = await client.createSession(scenario);
    sessionStorage.setItem(SESSION_KEY, session.session_id);
    state = sessionStarted(state, session);
    render();
  }

  async function restoreSession(sessionId: string): Promise<void> {
    const history = await client.history(sessionId);
    const world = await client.world(sessionId);
    const session = {
      session_id: sessionId,
      scenario: world.scenario,
      objects: [],
      k: 0,
    };
    state = rebuild(session, history, world);
    render();
  }

  startButton.addEventListener("click", () => {
    const picker = pickerBox.querySelector<HTMLSelectElement>("select");
    if (picker) void openSession(picker.value);
  });
  sendButton.addEventListener("click", () => void submit(input.value));
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") void submit(input.value);
  });
  input.addEventListener("input", render);

  void (async () => {
    const scenarios = await client.scenarios();
    pickerBox.innerHTML = renderScenarioPicker(scenarios);
    const saved = sessionStorage.getItem(SESSION_KEY);
    if (saved) {
      try {
        await restoreSession(saved);
      } catch {
        sessionStorage.removeItem(SESSION_KEY);
      }
    }
    render();
  })();
}
