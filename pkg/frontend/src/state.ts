// Client view state: a non-authoritative mirror of what the server said.
// Rendering reads only this; in particular the HUD clock is always the
// server-reported elapsed time, never a locally extrapolated one.

import type { EndedMsg, ScenarioSnapshot, ServerMsg, StateMsg } from "./protocol.js";

export type Connection = "connecting" | "open" | "closed";

export interface ViewState {
  connection: Connection;
  session: string | null;
  scenario: ScenarioSnapshot | null;
  last: StateMsg | null;
  ended: EndedMsg | null;
  lastError: string | null;
  notices: string[];
}

export function initialView(): ViewState {
  return {
    connection: "connecting",
    session: null,
    scenario: null,
    last: null,
    ended: null,
    lastError: null,
    notices: [],
  };
}

/** Fold one server message into the view. Unknown input is ignored. */
export function applyServer(view: ViewState, msg: ServerMsg | null): ViewState {
  if (msg === null) return view;
  switch (msg.kind) {
    case "joined":
      return { ...view, session: msg.session, scenario: msg.scenario };
    case "state":
      if (view.last !== null && msg.tick < view.last.tick) return view; // stale
      return { ...view, last: msg };
    case "ended":
      return { ...view, ended: msg };
    case "error":
      return { ...view, lastError: `${msg.code}: ${msg.text}` };
  }
}

export function withConnection(view: ViewState, connection: Connection): ViewState {
  return { ...view, connection };
}

export function withNotice(view: ViewState, notice: string): ViewState {
  return { ...view, notices: [...view.notices.slice(-4), notice] };
}

/** The HUD clock value: the server's elapsed seconds, 0 before the alarm. */
export function hudClock(view: ViewState): number {
  return view.last?.elapsed ?? 0;
}

export function timerRunning(view: ViewState): boolean {
  return view.last?.timer_running ?? false;
}
