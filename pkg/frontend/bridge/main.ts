/** CLI for the shim: node dist/bridge/bridge/main.js --tcp-port 8765
 * [--tcp-host 127.0.0.1] [--http-port 8080], then open the printed URL.
 * Run the simulator first: intentctl serve <scenario> --port 8765.
 */

import { parseArgs } from "node:util";

import { startBridge } from "./bridge.js";

const { values } = parseArgs({
  options: {
    "tcp-port": { type: "string" },
    "tcp-host": { type: "string", default: "127.0.0.1" },
    "http-port": { type: "string", default: "8080" },
  },
});

if (values["tcp-port"] === undefined) {
  console.error("usage: main.js --tcp-port <simulator port> "
    + "[--tcp-host 127.0.0.1] [--http-port 8080]");
  process.exit(2);
}

const bridge = await startBridge({
  tcpHost: values["tcp-host"],
  tcpPort: Number(values["tcp-port"]),
  httpPort: Number(values["http-port"]),
});

console.log(`steering panel: http://127.0.0.1:${bridge.httpPort}/`);
console.log(`relaying to simulator at ${values["tcp-host"]}:${values["tcp-port"]}`);

process.on("SIGINT", () => {
  void bridge.close().then(() => process.exit(0));
});
