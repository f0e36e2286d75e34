// End-to-end: a scripted client joins the bundled scenario on a real
// server, presses O, walks the nearest-exit route with the real key
// bindings and must escape with the headless-predicted score.

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { InputSender } from "../src/input.js";
import { parseServerMsg, type ClientMsg, type ServerMsg } from "../src/protocol.js";

const PORT = 8917;
const BASE = `http://127.0.0.1:${PORT}`;
// the batch engine's no-fire single-occupant traversal of the 31 m
// emergency route at 1.5 m/s lands on 20.7 s (0.1 s ticks)
const PREDICTED_SCORE = 20.7;

let server: ChildProcess;

async function serverUp(): Promise<void> {
  for (let i = 0; i < 100; i++) {
    try {
      const res = await fetch(`${BASE}/api/scenarios`);
      if (res.ok) return;
    } catch {
      /* not up yet */
    }
    await new Promise((r) => setTimeout(r, 150));
  }
  throw new Error("server did not come up");
}

beforeAll(async () => {
  const data = mkdtempSync(join(tmpdir(), "evacsim-e2e-"));
  server = spawn(
    "python3",
    [
      "-m", "evacsim.cli", "serve",
      "--bind", `127.0.0.1:${PORT}`,
      "--data", data,
      "--tick-hz", "40",
      "--seed", "20240809",
    ],
    { stdio: "ignore" },
  );
  await serverUp();
}, 30_000);

afterAll(() => {
  server?.kill();
});

describe("playing the bundled scenario end to end", () => {
  it(
    "escapes via the nearest exit at the predicted score",
    async () => {
      const ws = new WebSocket(`ws://127.0.0.1:${PORT}/ws`);
      const sender = new InputSender((m: ClientMsg) => ws.send(JSON.stringify(m)));

      const result = await new Promise<{ outcome: string; score: number | null }>(
        (resolve, reject) => {
          const timer = setTimeout(() => reject(new Error("e2e timed out")), 50_000);
          let stage = 0;
          let secondO = false;
          let lastElapsed = 0;

          ws.on("open", () => {
            sender.setConnected(true);
            sender.join("dei-analog", { familiar: true, gamer: false });
          });
          ws.on("error", reject);
          ws.on("message", (raw) => {
            const msg: ServerMsg | null = parseServerMsg(String(raw));
            if (msg === null) return;
            if (msg.kind === "error") {
              clearTimeout(timer);
              reject(new Error(`${msg.code}: ${msg.text}`));
              return;
            }
            if (msg.kind === "joined") {
              expect(msg.scenario.rows.length).toBe(21);
              expect(msg.scenario.spawn).toEqual([2, 58]);
              sender.press("KeyO"); // alarm + timer
              sender.press("KeyS"); // head down to the corridor
              stage = 1;
              return;
            }
            if (msg.kind === "ended") {
              clearTimeout(timer);
              resolve({ outcome: msg.outcome, score: msg.score });
              return;
            }
            if (msg.kind !== "state" || msg.player === null) return;
            // the server clock must never run backwards (a second O later
            // in the run must not reset it)
            expect(msg.elapsed).toBeGreaterThanOrEqual(lastElapsed);
            lastElapsed = msg.elapsed;
            const [row, col] = msg.player;
            if (stage === 1 && row >= 5) {
              sender.press("KeyA"); // west along the corridor
              stage = 2;
            } else if (stage === 2 && !secondO && col < 40) {
              sender.press("KeyO"); // mid-run O: logged no-op, no clock reset
              secondO = true;
            } else if (stage === 2 && col <= 6) {
              sender.press("KeyS"); // down the emergency stair
              stage = 3;
            }
          });
        },
      );

      ws.close();
      expect(result.outcome).toBe("escaped");
      expect(result.score).not.toBeNull();
      expect(Math.abs(result.score! - PREDICTED_SCORE)).toBeLessThanOrEqual(0.3);
    },
    55_000,
  );
});
