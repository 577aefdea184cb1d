"""Realtime serving over newline-delimited JSON on a TCP socket.

One thread does everything in a fixed rotation: accept and read sockets,
drain the command queue at a step boundary, step the simulation up to the
wall-clock target, broadcast the newest telemetry. Clients therefore never
observe a half-applied command, and a slow reader can never stall the
stepper (its backlog just grows until it is dropped).

Wire format, both directions: one JSON object per line with fields
{t, kind, payload}. Server-to-client kinds: hello, state, ack, error,
done. Client-to-server kinds: inject_event, set_param, pause, resume,
reset. Parameter changes survive a reset; injected events do not.
"""

from __future__ import annotations

import json
import logging
import select
import socket
import time

import numpy as np

from .dynamics import forward_kinematics
from .events import HumanEvent
from .scenario import _EVENT_PARAM_KEYS, Scenario, _check_keys, build_world
from .simulation import TELEMETRY_COLUMNS, SimWorld
from .supervisor import Thresholds
from .weighting import FactorParams

LOG = logging.getLogger(__name__)

BROADCAST_INTERVAL_S = 0.04      # 25 Hz nominal keeps the 20 Hz floor safe
MAX_SLICE_WALL_S = 0.02          # stepping may never starve the broadcaster
MAX_CLIENT_BACKLOG = 1 << 20


def record_payload(world: SimWorld) -> dict:
    """The newest telemetry row plus poses, as plain JSON types."""
    r = world.telemetry[-1]
    d = world.diagnostics[-1]
    probe = forward_kinematics(world.model, d.q)
    err = [float(v) for v in r.err]
    payload = {
        "time_s": float(r.time_s), "mode": r.mode,
        "a_h": float(r.a_h), "a_p": float(r.a_p), "a_f": float(r.a_f),
        "a_n": float(r.a_n), "a_b": float(r.a_b),
        "k_d1": float(r.k_d1), "k_d2": float(r.k_d2),
        "err_x": err[0], "err_y": err[1], "err_z": err[2],
        "err_rx": err[3], "err_ry": err[4], "err_rz": err[5],
        "x1d_x": float(r.x1d[0]), "x1d_y": float(r.x1d[1]),
        "x1d_z": float(r.x1d[2]),
        "f_z_E": float(r.f_z_E), "tau_n_norm": float(r.tau_n_norm),
        "energy_residual": float(r.energy_residual),
        "x_2d": float(d.x_2d), "x2": float(d.x2),
        "probe": {"position": [float(v) for v in probe.position],
                  "quat": [float(v) for v in probe.quat]},
        "neck": {"position": [float(v) for v in d.neck_position],
                 "quat": [float(v) for v in world.neck.pose.quat]},
    }
    return payload


class RealtimeServer:
    def __init__(self, scenario: Scenario, port: int = 0, speed: float = 1.0,
                 world: SimWorld | None = None, host: str = "127.0.0.1"):
        if speed <= 0.0:
            raise ValueError("speed must be positive")
        self.scenario = scenario
        self.world = world if world is not None else build_world(scenario)
        self.speed = float(speed)
        self._config = json.loads(json.dumps(scenario.data))
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((host, port))
        self._listener.listen(8)
        self._listener.setblocking(False)
        self.port = self._listener.getsockname()[1]
        self._in_buffers: dict[socket.socket, bytes] = {}
        self._out_buffers: dict[socket.socket, bytes] = {}
        self._commands: list[tuple[socket.socket, dict]] = []
        self.paused = False
        self._closed = False

    # ---- wire helpers ----------------------------------------------------

    def _message(self, kind: str, payload: dict) -> bytes:
        return (json.dumps({"t": self.world.t, "kind": kind,
                            "payload": payload})
                + "\n").encode()

    def _queue(self, client: socket.socket, data: bytes) -> None:
        if client not in self._out_buffers:
            return
        backlog = self._out_buffers[client] + data
        if len(backlog) > MAX_CLIENT_BACKLOG:
            LOG.warning("dropping client with %d bytes of backlog",
                        len(backlog))
            self._drop(client)
            return
        self._out_buffers[client] = backlog

    def _broadcast(self, data: bytes) -> None:
        for client in list(self._out_buffers):
            self._queue(client, data)

    def _drop(self, client: socket.socket) -> None:
        self._in_buffers.pop(client, None)
        self._out_buffers.pop(client, None)
        try:
            client.close()
        except OSError:
            pass

    def _accept(self) -> None:
        while True:
            try:
                client, _ = self._listener.accept()
            except (BlockingIOError, OSError):
                return
            client.setblocking(False)
            self._in_buffers[client] = b""
            self._out_buffers[client] = b""
            self._queue(client, self._message("hello", {
                "scenario": self._config,
                "columns": list(TELEMETRY_COLUMNS),
                "dt": self.world.dt,
                "duration_s": self.scenario.duration,
                "speed": self.speed,
            }))

    def _read_clients(self) -> None:
        for client in list(self._in_buffers):
            try:
                chunk = client.recv(4096)
            except (BlockingIOError, InterruptedError):
                continue
            except OSError:
                self._drop(client)
                continue
            if not chunk:
                self._drop(client)
                continue
            buffer = self._in_buffers[client] + chunk
            *lines, rest = buffer.split(b"\n")
            self._in_buffers[client] = rest
            for line in lines:
                if line.strip():
                    self._commands.append((client, {"raw": line}))

    def _flush_clients(self) -> None:
        writable = [c for c, buf in self._out_buffers.items()
                    if buf and c.fileno() >= 0]
        if not writable:
            return
        try:
            _, ready, _ = select.select([], writable, [], 0.0)
        except (ValueError, OSError):
            # a socket was closed underneath us (shutdown from another thread)
            return
        for client in ready:
            buf = self._out_buffers.get(client)
            if not buf:
                continue
            try:
                sent = client.send(buf)
            except (BlockingIOError, InterruptedError):
                continue
            except OSError:
                self._drop(client)
                continue
            self._out_buffers[client] = buf[sent:]

    # ---- commands ---------------------------------------------------------

    def _apply_commands(self) -> None:
        commands, self._commands = self._commands, []
        for client, entry in commands:
            try:
                message = json.loads(entry["raw"].decode())
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                self._reply_error(client, f"not valid JSON: {exc}")
                continue
            if not isinstance(message, dict):
                self._reply_error(client, "command must be a JSON object")
                continue
            kind = message.get("kind")
            payload = message.get("payload", {})
            try:
                self._apply_one(kind, payload)
            except (KeyError, TypeError, ValueError) as exc:
                self._reply_error(client, f"{kind}: {exc}")
                continue
            self._queue(client, self._message("ack", {"command": kind}))

    def _apply_one(self, kind, payload) -> None:
        if kind == "pause":
            self.paused = True
        elif kind == "resume":
            self.paused = False
        elif kind == "reset":
            self.world.reset()
        elif kind == "inject_event":
            if not isinstance(payload, dict):
                raise ValueError("payload must be an event object")
            params = dict(payload.get("params", {}))
            event_kind = payload.get("kind")
            if event_kind in _EVENT_PARAM_KEYS:
                _check_keys(params, _EVENT_PARAM_KEYS[event_kind], "params.")
            event = HumanEvent(event_kind, float(payload["start"]),
                               float(payload["end"]), params)
            self.world.inject_event(event)
        elif kind == "set_param":
            self._set_param(str(payload["path"]), payload["value"])
        else:
            raise ValueError(f"unknown command kind {kind!r}")

    def _set_param(self, path: str, value) -> None:
        world = self.world
        if path == "compensate_external":
            world.compensate_external = bool(value)
            return
        head, _, field = path.partition(".")
        if path == "gains.k2g":
            world.k2g = float(value)
        elif path == "gains.k1g":
            vec = np.asarray([float(v) for v in value], dtype=float)
            if vec.shape != (6,):
                raise ValueError("gains.k1g needs six entries")
            world.k1g = vec
        elif head == "factors" and field in self._config["factors"]:
            cfg = dict(self._config["factors"], **{field: float(value)})
            world.factor_params = FactorParams(**cfg)
            self._config["factors"] = cfg
        elif head == "thresholds" and field in self._config["thresholds"]:
            cfg = dict(self._config["thresholds"], **{field: float(value)})
            world.supervisor.thresholds = Thresholds(**cfg)
            self._config["thresholds"] = cfg
        elif head == "supervisor" and field in ("delta", "delta_ret"):
            rate = float(value)
            if rate <= 0.0:
                raise ValueError(f"{path} must be positive")
            setattr(world.supervisor, field, rate)
        else:
            raise ValueError(f"unknown parameter path {path!r}")

    def _reply_error(self, client: socket.socket, message: str) -> None:
        LOG.info("rejected command: %s", message)
        self._queue(client, self._message("error", {"message": message}))

    # ---- main loop ----------------------------------------------------------

    def run(self) -> None:
        """Serve until the scenario duration is simulated."""
        anchor = time.monotonic() - self.world.t / self.speed
        last_broadcast = 0.0
        duration = self.scenario.duration
        while not self._closed:
            self._accept()
            self._read_clients()
            was_t = self.world.t
            self._apply_commands()
            if self.world.t != was_t:      # reset moved the clock
                anchor = time.monotonic() - self.world.t / self.speed
            stepped = False
            if self.paused:
                anchor = time.monotonic() - self.world.t / self.speed
            else:
                now = time.monotonic()
                target = (now - anchor) * self.speed
                slice_end = now + MAX_SLICE_WALL_S
                while (self.world.t < min(target, duration)
                       and time.monotonic() < slice_end):
                    self.world.step()
                    stepped = True
                if self.world.t < min(target, duration):
                    # fell behind wall clock; drop the backlog, not the rate
                    anchor = time.monotonic() - self.world.t / self.speed
            now = time.monotonic()
            if now - last_broadcast >= BROADCAST_INTERVAL_S \
                    and self.world.telemetry:
                self._broadcast(self._message("state", record_payload(
                    self.world)))
                last_broadcast = now
            self._flush_clients()
            if self.world.t >= duration:
                break
            if not stepped:
                time.sleep(0.001)
        if self.world.telemetry:
            self._broadcast(self._message("state",
                                          record_payload(self.world)))
        self._broadcast(self._message("done", {"t_final": self.world.t}))
        deadline = time.monotonic() + 0.5
        while (not self._closed and time.monotonic() < deadline
               and any(self._out_buffers.values())):
            self._flush_clients()
            time.sleep(0.005)
        self.close()

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        for client in list(self._in_buffers):
            self._drop(client)
        try:
            self._listener.close()
        except OSError:
            pass
