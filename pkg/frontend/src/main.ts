// Wire-up: one socket, one key listener, one render loop reading the
// latest view snapshot on animation frames.

import { InputSender } from "./input.js";
import { connect } from "./net.js";
import { Renderer } from "./render.js";
import { applyServer, initialView, withConnection, withNotice } from "./state.js";

const params = new URLSearchParams(location.search);
const scenario = params.get("scenario") ?? "dei-analog";
const familiar = params.get("familiar") === "1";
const gamer = params.get("gamer") === "1";

const canvas = document.getElementById("grid") as HTMLCanvasElement;
const hud = document.getElementById("hud") as HTMLElement;
const renderer = new Renderer(canvas, hud);

let view = initialView();

const proto = location.protocol === "https:" ? "wss" : "ws";
const socket = connect(
  `${proto}://${location.host}/ws`,
  (msg) => {
    view = applyServer(view, msg);
  },
  () => {
    view = withConnection(view, "open");
    sender.setConnected(true);
    sender.join(scenario, { familiar, gamer });
  },
  () => {
    view = withConnection(withNotice(view, "connection closed"), "closed");
    sender.setConnected(false);
  },
);

const sender = new InputSender((msg) => socket.send(msg), {
  onDrop: () => {
    view = withNotice(view, "offline: input dropped");
  },
});

window.addEventListener("keydown", (ev) => {
  if (ev.repeat) return; // the walk direction is sticky server-side
  if (ev.code === "Space") ev.preventDefault();
  sender.press(ev.code);
});

function frame(): void {
  renderer.draw(view);
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);
