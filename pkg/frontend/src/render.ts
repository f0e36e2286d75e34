// Top-down canvas renderer: cells by kind, fire, occupants, the player,
// sign arrows toward their exits, and the HUD (timer + outcome screen).

import type { Cell, ExitSnapshot, ScenarioSnapshot, SignSnapshot } from "./protocol.js";
import { hudClock, timerRunning, type ViewState } from "./state.js";

const KIND_COLORS: Record<string, string> = {
  ".": "#d8d2c4", // floor
  "#": "#3a3632", // wall
  D: "#b59a6a", // door
  S: "#9aa7b5", // stair
  E: "#7fc97f", // exit
  " ": "#181614", // void
};

export type Arrow = "up" | "down" | "left" | "right";

/** Direction a sign's arrow points: toward the nearest cell of its exit,
 * dominant axis winning (ties prefer the horizontal). Pure, testable. */
export function signArrow(sign: SignSnapshot, exits: ExitSnapshot[]): Arrow {
  const target = exits.find((e) => e.id === sign.to);
  if (!target || target.cells.length === 0) return "up";
  let best: Cell = target.cells[0];
  let bestD = Infinity;
  for (const cell of target.cells) {
    const d = Math.abs(cell[0] - sign.at[0]) + Math.abs(cell[1] - sign.at[1]);
    if (d < bestD) {
      bestD = d;
      best = cell;
    }
  }
  const dr = best[0] - sign.at[0];
  const dc = best[1] - sign.at[1];
  if (Math.abs(dc) >= Math.abs(dr)) return dc >= 0 ? "right" : "left";
  return dr >= 0 ? "down" : "up";
}

const ARROW_GLYPH: Record<Arrow, string> = { up: "↑", down: "↓", left: "←", right: "→" };

export class Renderer {
  private px = 12;

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly hud: HTMLElement,
  ) {}

  private fit(scenario: ScenarioSnapshot): void {
    const rows = scenario.rows.length;
    const cols = scenario.rows[0]?.length ?? 1;
    this.px = Math.max(4, Math.min(24, Math.floor(Math.min(1600 / cols, 800 / rows))));
    this.canvas.width = cols * this.px;
    this.canvas.height = rows * this.px;
  }

  draw(view: ViewState): void {
    const scenario = view.scenario;
    const ctx = this.canvas.getContext("2d");
    if (!scenario || !ctx) {
      this.hud.textContent =
        view.connection === "open" ? "joining…" : `connection: ${view.connection}`;
      return;
    }
    if (this.canvas.width !== scenario.rows[0].length * this.px) this.fit(scenario);
    const px = this.px;

    for (let r = 0; r < scenario.rows.length; r++) {
      const row = scenario.rows[r];
      for (let c = 0; c < row.length; c++) {
        ctx.fillStyle = KIND_COLORS[row[c]] ?? KIND_COLORS[" "];
        ctx.fillRect(c * px, r * px, px, px);
      }
    }

    if (view.last) {
      ctx.fillStyle = "#e25822"; // burning cells
      for (const [r, c] of view.last.burning) ctx.fillRect(c * px, r * px, px, px);
      ctx.fillStyle = "#4967aa"; // computer-controlled occupants
      for (const [r, c] of view.last.agents) {
        ctx.beginPath();
        ctx.arc(c * px + px / 2, r * px + px / 2, px * 0.33, 0, Math.PI * 2);
        ctx.fill();
      }
      if (view.last.player) {
        const [r, c] = view.last.player;
        ctx.fillStyle = "#1d7a1d";
        ctx.beginPath();
        ctx.arc(c * px + px / 2, r * px + px / 2, px * 0.42, 0, Math.PI * 2);
        ctx.fill();
      }
    }

    ctx.fillStyle = "#104210";
    ctx.font = `${px}px monospace`;
    ctx.textAlign = "center";
    ctx.textBaseline = "middle";
    for (const sign of scenario.signs) {
      const glyph = ARROW_GLYPH[signArrow(sign, scenario.exits)];
      ctx.fillText(glyph, sign.at[1] * px + px / 2, sign.at[0] * px + px / 2);
    }

    this.drawHud(view);
  }

  private drawHud(view: ViewState): void {
    const parts: string[] = [];
    if (view.ended) {
      const score = view.ended.score;
      parts.push(
        view.ended.outcome === "escaped" && score !== null
          ? `ESCAPED in ${score.toFixed(1)} s — lower is better`
          : `TRAPPED — no score`,
      );
    } else if (timerRunning(view)) {
      parts.push(`${hudClock(view).toFixed(1)} s`);
    } else {
      parts.push("0.0 s — press O to start the fire simulation");
    }
    if (view.last && view.last.dropped_inputs > 0) {
      parts.push(`dropped inputs: ${view.last.dropped_inputs}`);
    }
    if (view.lastError) parts.push(view.lastError);
    if (view.notices.length) parts.push(view.notices[view.notices.length - 1]);
    this.hud.textContent = parts.join("  |  ");
  }
}
