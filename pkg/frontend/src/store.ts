/**
 * View model and pure state transitions.
 *
 * Everything renderable derives from service responses: turn views come from
 * TurnRecords, the world panel from GET /world. That keeps the UI state
 * reconstructible after a reload from GET /history + GET /world alone, which
 * rebuild() implements and the tests hold the live path to.
 */

import type {
  HistoryResponse,
  SessionInfo,
  TurnRecord,
  TurnResponse,
  WorldResponse,
} from "./api.js";
import type { EventFrame } from "./sse.js";

export interface PlanChip {
  object: string;
  destination: string;
  status: "executed" | "skipped";
  detail: string | null;
}

export interface EvidenceItem {
  entryId: number;
  text: string;
  score: number;
}

export interface AgentView {
  badge: string;
  provenance: string;
  text: string;
  chips: PlanChip[];
  evidence: EvidenceItem[];
  warnings: string[];
  error: string | null;
}

export interface TurnView {
  user: string;
  agent: AgentView;
}

export interface ViewState {
  session: SessionInfo | null;
  turns: TurnView[];
  pending: string | null;
  lifecycle: string[];
  world: Record<string, string> | null;
  busy: boolean;
  toasts: string[];
}

export function initialState(): ViewState {
  return {
    session: null,
    turns: [],
    pending: null,
    lifecycle: [],
    world: null,
    busy: false,
    toasts: [],
  };
}

export function canSend(state: ViewState, draft: string): boolean {
  return state.session !== null && !state.busy && draft.trim().length > 0;
}

export function sessionStarted(state: ViewState, session: SessionInfo): ViewState {
  return { ...initialState(), toasts: state.toasts, session };
}

export function turnSubmitted(state: ViewState, text: string): ViewState {
  return { ...state, pending: text, lifecycle: [], busy: true };
}

export function lifecycleEvent(state: ViewState, frame: EventFrame): ViewState {
  if (!state.busy) return state;
  return { ...state, lifecycle: [...state.lifecycle, frame.event] };
}

export function agentView(record: TurnRecord): AgentView {
  const chips: PlanChip[] = [];
  if (record.execution) {
    for (const move of record.execution.executed) {
      chips.push({ object: move.object, destination: move.to, status: "executed", detail: null });
    }
    for (const skip of record.execution.skipped) {
      chips.push({
        object: skip.object,
        destination: skip.destination,
        status: "skipped",
        detail: skip.reason,
      });
    }
  }
  const evidence: EvidenceItem[] = (record.retrieval ?? []).map((item) => ({
    entryId: item.entry_id,
    text: item.rendered_text,
    score: item.score,
  }));
  const text =
    record.narration ?? record.answer ?? record.clarification ?? "(no response)";
  return {
    badge: record.route.category,
    provenance: record.route.provenance,
    text,
    chips,
    evidence,
    warnings: record.warnings,
    error: record.error,
  };
}

function turnView(record: TurnRecord): TurnView {
  return { user: record.request.text, agent: agentView(record) };
}

export function turnCompleted(
  state: ViewState,
  turn: TurnResponse,
  world: WorldResponse,
): ViewState {
  return {
    ...state,
    turns: [...state.turns, turnView(turn.record)],
    pending: null,
    lifecycle: [],
    busy: false,
    world: { ...world.world.placements },
  };
}

export function turnFailed(state: ViewState, message: string): ViewState {
  return {
    ...state,
    pending: null,
    lifecycle: [],
    busy: false,
    toasts: [...state.toasts, message],
  };
}

export function toastDismissed(state: ViewState, index: number): ViewState {
  return { ...state, toasts: state.toasts.filter((_, i) => i !== index) };
}

/** Rebuild the whole view from the two read endpoints, as after a reload. */
export function rebuild(
  session: SessionInfo,
  history: HistoryResponse,
  world: WorldResponse,
): ViewState {
  return {
    session,
    turns: history.turns.map(turnView),
    pending: null,
    lifecycle: [],
    world: { ...world.world.placements },
    busy: false,
    toasts: [],
  };
}
