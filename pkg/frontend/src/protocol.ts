// Wire types for the game server's WebSocket protocol. The server is
// authoritative: we send inputs with strictly increasing sequence numbers
// and render whatever state it publishes.

export type Dir = "up" | "down" | "left" | "right";

export type Cell = [number, number];

export type ClientMsg =
  | { kind: "join"; scenario: string; profile: { familiar: boolean; gamer: boolean }; seq: number }
  | { kind: "input"; input: "move"; dir: Dir; seq: number }
  | { kind: "input"; input: "jump" | "start_fire"; seq: number }
  | { kind: "leave"; seq: number };

export interface ExitSnapshot {
  id: string;
  kind: string;
  cells: Cell[];
}

export interface SignSnapshot {
  at: Cell;
  to: string;
}

export interface ScenarioSnapshot {
  name: string;
  cell_size: number;
  rows: string[];
  exits: ExitSnapshot[];
  signs: SignSnapshot[];
  spawn: Cell;
}

export interface StateMsg {
  kind: "state";
  tick: number;
  elapsed: number;
  timer_running: boolean;
  outcome: string;
  player: Cell | null;
  player_status: string | null;
  agents: Cell[];
  burning: Cell[];
  dropped_inputs: number;
}

export interface JoinedMsg {
  kind: "joined";
  session: string;
  scenario: ScenarioSnapshot;
}

export interface EndedMsg {
  kind: "ended";
  outcome: string;
  score: number | null;
}

export interface ErrorMsg {
  kind: "error";
  code: string;
  text: string;
}

export type ServerMsg = JoinedMsg | StateMsg | EndedMsg | ErrorMsg;

const KINDS = new Set(["joined", "state", "ended", "error"]);

/** Parse one frame; null for anything malformed (the caller skips it). */
export function parseServerMsg(raw: string): ServerMsg | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const kind = (data as { kind?: unknown }).kind;
  if (typeof kind !== "string" || !KINDS.has(kind)) return null;
  return data as ServerMsg;
}
