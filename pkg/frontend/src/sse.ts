/**
 * Parser and resume cursor for the service's replayable event log.
 *
 * The events endpoint sends everything after the cursor and then closes, so
 * the client re-polls instead of holding a connection; the cursor (highest
 * seen id) doubles as the Last-Event-ID on reconnect.
 */

export interface EventFrame {
  id: number;
  event: string;
  data: unknown;
}

export function parseSse(text: string): EventFrame[] {
  const frames: EventFrame[] = [];
  for (const block of text.split("\n\n")) {
    if (!block.trim()) continue;
    let id: number | null = null;
    let event = "message";
    let data = "";
    for (const line of block.split("\n")) {
      if (line.startsWith("id: ")) id = Number(line.slice(4));
      else if (line.startsWith("event: ")) event = line.slice(7);
      else if (line.startsWith("data: ")) data = line.slice(6);
    }
    if (id === null || Number.isNaN(id)) continue;
    let parsed: unknown = data;
    try {
      parsed = JSON.parse(data);
    } catch {
      // keep the raw string when the payload is not JSON
    }
    frames.push({ id, event, data: parsed });
  }
  return frames;
}

export class EventCursor {
  after = 0;

  /** Record frames, drop duplicates, and advance the resume position. */
  ingest(frames: EventFrame[]): EventFrame[] {
    const fresh = frames.filter((f) => f.id > this.after);
    for (const frame of fresh) {
      if (frame.id > this.after) this.after = frame.id;
    }
    return fresh;
  }
}

const BASE_DELAY_MS = 500;
const MAX_DELAY_MS = 8000;

/** Exponential backoff for reconnects: 500ms doubling to an 8s ceiling. */
export function nextDelay(consecutiveFailures: number): number {
  if (consecutiveFailures <= 0) return BASE_DELAY_MS;
  return Math.min(BASE_DELAY_MS * 2 ** consecutiveFailures, MAX_DELAY_MS);
}
