/** Browser-socket shim: serves the panel and relays WebSocket frames
 * to the simulator's newline-delimited JSON TCP socket, one line per
 * frame in both directions. Each browser tab gets its own TCP
 * connection, so last-writer-wins on commands matches connecting the
 * tabs straight to the simulator.
 */

import { readFile } from "node:fs/promises";
import { createServer, type IncomingMessage, type ServerResponse } from "node:http";
import { connect } from "node:net";
import { dirname, join, normalize, resolve } from "node:path";
import { fileURLToPath } from "node:url";

import { WebSocketServer, type WebSocket } from "ws";

import { LineSplitter } from "../src/protocol.js";

export interface BridgeOptions {
  tcpHost?: string;
  tcpPort: number;
  httpPort?: number;
}

export interface Bridge {
  httpPort: number;
  close(): Promise<void>;
}

const CONTENT_TYPES: Record<string, string> = {
  ".html": "text/html; charset=utf-8",
  ".js": "text/javascript; charset=utf-8",
  ".css": "text/css; charset=utf-8",
  ".json": "application/json",
};

/** The package root is wherever index.html lives above this module
 * (source runs from bridge/, compiled runs from dist/bridge/bridge/). */
async function findRoot(): Promise<string> {
  let dir = dirname(fileURLToPath(import.meta.url));
  for (let depth = 0; depth < 5; depth += 1) {
    try {
      await readFile(join(dir, "index.html"));
      return dir;
    } catch {
      dir = dirname(dir);
    }
  }
  throw new Error("index.html not found above the bridge module");
}

async function serveStatic(root: string, req: IncomingMessage,
                           res: ServerResponse): Promise<void> {
  const url = (req.url ?? "/").split("?")[0] as string;
  const path = url === "/" ? "/index.html" : url;
  const full = resolve(join(root, normalize(path)));
  const servable = full === join(root, "index.html")
    || full.startsWith(join(root, "dist") + "/");
  const ext = full.slice(full.lastIndexOf("."));
  if (!servable || !(ext in CONTENT_TYPES)) {
    res.writeHead(404, { "content-type": "text/plain" });
    res.end("not found");
    return;
  }
  try {
    const body = await readFile(full);
    res.writeHead(200, { "content-type": CONTENT_TYPES[ext] as string });
    res.end(body);
  } catch {
    res.writeHead(404, { "content-type": "text/plain" });
    res.end("not found");
  }
}

function relay(ws: WebSocket, tcpHost: string, tcpPort: number): void {
  const tcp = connect({ host: tcpHost, port: tcpPort });
  const splitter = new LineSplitter();
  tcp.setNoDelay(true);
  tcp.on("data", (chunk: Buffer) => {
    for (const line of splitter.push(chunk.toString("utf8"))) {
      if (ws.readyState === ws.OPEN) ws.send(line);
    }
  });
  tcp.on("error", (err: Error) => {
    ws.close(1011, `simulator socket error: ${err.message}`.slice(0, 120));
  });
  tcp.on("close", () => ws.close(1000, "simulator closed"));
  ws.on("message", (data) => {
    if (!tcp.destroyed) tcp.write(data.toString() + "\n");
  });
  ws.on("close", () => tcp.destroy());
}

export async function startBridge(options: BridgeOptions): Promise<Bridge> {
  const tcpHost = options.tcpHost ?? "127.0.0.1";
  const root = await findRoot();
  const http = createServer((req, res) => {
    void serveStatic(root, req, res);
  });
  const wss = new WebSocketServer({ server: http, path: "/ws" });
  wss.on("connection", (ws) => relay(ws, tcpHost, options.tcpPort));
  await new Promise<void>((ready, fail) => {
    http.once("error", fail);
    http.listen(options.httpPort ?? 0, "127.0.0.1", ready);
  });
  const address = http.address();
  if (address === null || typeof address === "string") {
    throw new Error("http server has no port");
  }
  return {
    httpPort: address.port,
    close: () =>
      new Promise<void>((done) => {
        for (const client of wss.clients) client.terminate();
        wss.close(() => http.close(() => done()));
      }),
  };
}
