// Keyboard-to-protocol mapping. One physical key produces exactly one
// protocol message; keys outside the table produce nothing. The classic
// bindings: W/A/S/D walk (up/left/down/right on the top-down grid), space
// jumps (accepted by the server, no grid effect), O starts the fire
// simulation.

import type { ClientMsg, Dir } from "./protocol.js";

export type InputPayload =
  | { input: "move"; dir: Dir }
  | { input: "jump" }
  | { input: "start_fire" };

export const KEY_BINDINGS: Readonly<Record<string, InputPayload>> = {
  KeyW: { input: "move", dir: "up" },
  KeyA: { input: "move", dir: "left" },
  KeyS: { input: "move", dir: "down" },
  KeyD: { input: "move", dir: "right" },
  Space: { input: "jump" },
  KeyO: { input: "start_fire" },
};

/** Pure lookup: the payload a key emits, or null for unbound keys. */
export function messageForKey(code: string): InputPayload | null {
  return KEY_BINDINGS[code] ?? null;
}

export interface SenderOptions {
  /** How many messages may wait while disconnected before we drop. */
  queueLimit?: number;
  /** Called once per dropped message so the UI can show a notice. */
  onDrop?: (msg: ClientMsg) => void;
}

/**
 * Serializes user intents into protocol messages with a strictly
 * increasing per-connection sequence. While disconnected, messages queue
 * up to a small bound and are then dropped with a visible notice.
 */
export class InputSender {
  private seq = 0;
  private connected = false;
  private queue: ClientMsg[] = [];
  private readonly limit: number;
  private readonly onDrop: (msg: ClientMsg) => void;

  constructor(
    private readonly transmit: (msg: ClientMsg) => void,
    opts: SenderOptions = {},
  ) {
    this.limit = opts.queueLimit ?? 16;
    this.onDrop = opts.onDrop ?? (() => undefined);
  }

  private nextSeq(): number {
    this.seq += 1;
    return this.seq;
  }

  private dispatch(msg: ClientMsg): ClientMsg {
    if (this.connected) {
      this.transmit(msg);
    } else if (this.queue.length < this.limit) {
      this.queue.push(msg);
    } else {
      this.onDrop(msg);
    }
    return msg;
  }

  setConnected(connected: boolean): void {
    this.connected = connected;
    if (connected) {
      const backlog = this.queue;
      this.queue = [];
      for (const msg of backlog) this.transmit(msg);
    }
  }

  join(scenario: string, profile: { familiar: boolean; gamer: boolean }): ClientMsg {
    return this.dispatch({ kind: "join", scenario, profile, seq: this.nextSeq() });
  }

  /** Emit the message bound to a key; null (and nothing sent) otherwise. */
  press(code: string): ClientMsg | null {
    const payload = messageForKey(code);
    if (payload === null) return null;
    return this.dispatch({ kind: "input", ...payload, seq: this.nextSeq() } as ClientMsg);
  }

  leave(): ClientMsg {
    return this.dispatch({ kind: "leave", seq: this.nextSeq() });
  }

  get pending(): number {
    return this.queue.length;
  }
}
