/** WebSocket client for the bridge. One JSON message per socket frame
 * (the bridge does the newline splitting on the TCP side). */

import type { ClientCommand, ServerMessage } from "./protocol.js";
import { parseServerLine } from "./protocol.js";

export interface SocketHandlers {
  onMessage(msg: ServerMessage, wallMs: number): void;
  onOpen(): void;
  onClose(): void;
  onParseError(error: string): void;
}

export class SteeringSocket {
  private ws: WebSocket | null = null;
  private readonly url: string;
  private readonly handlers: SocketHandlers;

  constructor(url: string, handlers: SocketHandlers) {
    this.url = url;
    this.handlers = handlers;
  }

  connect(): void {
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => this.handlers.onOpen();
    ws.onclose = () => this.handlers.onClose();
    ws.onmessage = (evt) => {
      const text = typeof evt.data === "string" ? evt.data : "";
      for (const line of text.split("\n")) {
        if (!line.trim()) continue;
        try {
          this.handlers.onMessage(parseServerLine(line), Date.now());
        } catch (exc) {
          this.handlers.onParseError((exc as Error).message);
        }
      }
    };
  }

  get open(): boolean {
    return this.ws !== null && this.ws.readyState === WebSocket.OPEN;
  }

  send(cmd: ClientCommand): boolean {
    if (!this.open) return false;
    (this.ws as WebSocket).send(JSON.stringify(cmd));
    return true;
  }

  close(): void {
    this.ws?.close();
  }
}
