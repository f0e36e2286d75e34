// Thin WebSocket wrapper: JSON out, parsed frames in.

import { parseServerMsg, type ClientMsg, type ServerMsg } from "./protocol.js";

export interface Socket {
  send(msg: ClientMsg): void;
  close(): void;
}

export function connect(
  url: string,
  onMessage: (msg: ServerMsg) => void,
  onOpen: () => void,
  onClose: () => void,
): Socket {
  const ws = new WebSocket(url);
  ws.onopen = onOpen;
  ws.onclose = onClose;
  ws.onmessage = (ev) => {
    const msg = parseServerMsg(String(ev.data));
    if (msg === null) {
      console.error("malformed server message skipped", ev.data);
      return;
    }
    onMessage(msg);
  };
  return {
    send: (msg) => {
      if (ws.readyState === WebSocket.OPEN) ws.send(JSON.stringify(msg));
    },
    close: () => ws.close(),
  };
}
