/**
 * Pure HTML renderers: ViewState in, markup string out. Keeping these free of
 * DOM access lets the tests assert on real markup without a browser.
 */

import type { ScenarioInfo } from "./api.js";
import type { AgentView, ViewState } from "./store.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

export function renderScenarioPicker(scenarios: ScenarioInfo[]): string {
  const options = scenarios
    .map((s) => `<option value="${escapeHtml(s.id)}">${escapeHtml(s.id)}</option>`)
    .join("");
  return `<select id="scenario-picker">${options}</select>`;
}

function renderChips(agent: AgentView): string {
  if (agent.chips.length === 0) return "";
  const chips = agent.chips
    .map((chip) => {
      const title = chip.detail ? ` title="${escapeHtml(chip.detail)}"` : "";
      const mark = chip.status === "executed" ? "✓" : "✗";
      return (
        `<span class="chip ${chip.status}"${title}>` +
        `${escapeHtml(chip.object)} → ${escapeHtml(chip.destination)} ${mark}</span>`
      );
    })
    .join("");
  return `<div class="chips">${chips}</div>`;
}

function renderEvidence(agent: AgentView): string {
  if (agent.evidence.length === 0) return "";
  const items = agent.evidence
    .map(
      (item) =>
        `<li data-entry="${item.entryId}">${escapeHtml(item.text)}` +
        ` <span class="score">score ${item.score.toFixed(3)}</span></li>`,
    )
    .join("");
  return (
    `<details class="evidence"><summary>evidence (${agent.evidence.length})</summary>` +
    `<ol>${items}</ol></details>`
  );
}

function renderAgent(agent: AgentView): string {
  const warnings = agent.warnings
    .map((w) => `<div class="warning">${escapeHtml(w)}</div>`)
    .join("");
  const error = agent.error ? `<div class="error">${escapeHtml(agent.error)}</div>` : "";
  return (
    `<div class="message agent"><span class="badge ${escapeHtml(agent.badge)}">` +
    `${escapeHtml(agent.badge)}</span>` +
    `<p>${escapeHtml(agent.text)}</p>${renderChips(agent)}${renderEvidence(agent)}` +
    `${warnings}${error}</div>`
  );
}

export function renderChat(state: ViewState): string {
  const parts: string[] = [];
  for (const turn of state.turns) {
    parts.push(`<div class="message user"><p>${escapeHtml(turn.user)}</p></div>`);
    parts.push(renderAgent(turn.agent));
  }
  if (state.pending !== null) {
    parts.push(`<div class="message user pending"><p>${escapeHtml(state.pending)}</p></div>`);
    parts.push(renderLifecycle(state.lifecycle));
  }
  return parts.join("\n");
}

export function renderLifecycle(stages: string[]): string {
  const label = stages.length === 0 ? "sending" : stages[stages.length - 1];
  return `<div class="lifecycle" data-stages="${escapeHtml(stages.join(","))}">${escapeHtml(
    label,
  )}…</div>`;
}

export function renderWorldPanel(state: ViewState): string {
  if (!state.world) return `<div class="world empty">no world yet</div>`;
  const rows = Object.keys(state.world)
    .sort()
    .map(
      (object) =>
        `<tr><td>${escapeHtml(object)}</td><td>${escapeHtml(state.world![object])}</td></tr>`,
    )
    .join("");
  return `<table class="world"><thead><tr><th>object</th><th>location</th></tr></thead><tbody>${rows}</tbody></table>`;
}

export function renderToasts(state: ViewState): string {
  return state.toasts
    .map(
      (toast, index) =>
        `<div class="toast" data-index="${index}">${escapeHtml(toast)}` +
        `<button class="retry" data-index="${index}">retry</button></div>`,
    )
    .join("");
}
