import { describe, expect, it } from "vitest";

import {
  escapeHtml,
  renderChat,
  renderLifecycle,
  renderScenarioPicker,
  renderToasts,
  renderWorldPanel,
} from "../src/render.js";
import { initialState, sessionStarted, turnSubmitted, type ViewState } from "../src/store.js";

const SESSION = { session_id: "s0001", scenario: "dining_table", objects: [], k: 5 };

function stateWithTurn(): ViewState {
  const base = sessionStarted(initialState(), SESSION);
  return {
    ...base,
    turns: [
      {
        user: "clear the <table>",
        agent: {
          badge: "action_command",
          provenance: "tool_call",
          text: "Moved Plate to the sink.",
          chips: [
            { object: "Plate", destination: "sink", status: "executed", detail: null },
            { object: "Cup", destination: "sink", status: "skipped", detail: "object not present" },
          ],
          evidence: [],
          warnings: ["dropped unknown object"],
          error: null,
        },
      },
      {
        user: "what is in the trash?",
        agent: {
          badge: "history_query",
          provenance: "tool_call",
          text: "Two objects.",
          chips: [],
          evidence: [
            { entryId: 3, text: "[2025-03-01T09:00:05Z] Q: a A: b", score: 0.912345 },
          ],
          warnings: [],
          error: null,
        },
      },
    ],
    world: { Plate: "sink", Chair: "dining_table" },
  };
}

describe("escaping", () => {
  it("neutralizes markup in user-controlled text", () => {
    expect(escapeHtml(`<img src=x onerror="x('a')">`)).toBe(
      "&lt;img src=x onerror=&quot;x(&#39;a&#39;)&quot;&gt;",
    );
    const html = renderChat(stateWithTurn());
    expect(html).not.toContain("<table>");
    expect(html).toContain("clear the &lt;table&gt;");
  });
});

describe("chat markup", () => {
  it("renders chips with executed and skipped marks", () => {
    const html = renderChat(stateWithTurn());
    expect(html).toContain('<span class="chip executed">Plate → sink ✓</span>');
    expect(html).toContain('title="object not present"');
    expect(html).toContain("Cup → sink ✗");
  });

  it("renders the evidence drawer with count and scores", () => {
    const html = renderChat(stateWithTurn());
    expect(html).toContain("<summary>evidence (1)</summary>");
    expect(html).toContain('data-entry="3"');
    expect(html).toContain("score 0.912");
    expect(html).toContain("[2025-03-01T09:00:05Z] Q: a A: b");
  });

  it("shows route badges and warnings", () => {
    const html = renderChat(stateWithTurn());
    expect(html).toContain('class="badge action_command"');
    expect(html).toContain('class="badge history_query"');
    expect(html).toContain('<div class="warning">dropped unknown object</div>');
  });

  it("shows the pending bubble and lifecycle while busy", () => {
    const busy = turnSubmitted(stateWithTurn(), "next request");
    const html = renderChat(busy);
    expect(html).toContain('class="message user pending"');
    expect(html).toContain("sending…");
    const later = renderLifecycle(["routed", "planned"]);
    expect(later).toContain('data-stages="routed,planned"');
    expect(later).toContain("planned…");
  });
});

describe("panels", () => {
  it("renders the world panel sorted by object", () => {
    const html = renderWorldPanel(stateWithTurn());
    const chair = html.indexOf("Chair");
    const plate = html.indexOf("Plate");
    expect(chair).toBeGreaterThan(-1);
    expect(plate).toBeGreaterThan(chair);
    expect(html).toContain("<td>sink</td>");
  });

  it("renders a placeholder before any world exists", () => {
    expect(renderWorldPanel(initialState())).toContain("no world yet");
  });

  it("renders toasts with retry buttons", () => {
    const html = renderToasts({ ...initialState(), toasts: ["request failed; retry?"] });
    expect(html).toContain('class="toast"');
    expect(html).toContain('<button class="retry" data-index="0">retry</button>');
  });

  it("renders the scenario picker from the service listing", () => {
    const html = renderScenarioPicker([
      { id: "dining_table", cleanup_zone: "dining_table", command: "c", objects: [] },
      { id: "desk", cleanup_zone: "desk", command: "c", objects: [] },
    ]);
    expect(html).toContain('<option value="dining_table">dining_table</option>');
    expect(html).toContain('<option value="desk">desk</option>');
  });
});
