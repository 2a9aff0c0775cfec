"""Client side of the jsonl-v1 external metric provider protocol.

A provider is any executable that prints one handshake line and then
answers line-delimited JSON requests on stdin/stdout:

  handshake: {"protocol":"jsonl-v1","name":...,"is_distance":...,"range":[lo,hi]}
  request:   {"id":"7","ref":"/path/a.png","test":"/path/b.png"}
  response:  {"id":"7","value":0.42}  or  {"id":"7","error":"..."}

Provider stderr is inherited for diagnostics and never parsed. A session is
strictly serial: one in-flight request at a time.
"""

from __future__ import annotations

import json
import math
import queue
import subprocess
import threading

from .errors import (
    HandshakeError,
    ProtocolError,
    ProviderError,
    ProviderTimeout,
    SpawnError,
)
from .metrics import MetricDescriptor

PROTOCOL_NAME = "jsonl-v1"
HANDSHAKE_TIMEOUT_S = 30.0
REQUEST_TIMEOUT_S = 120.0
SHUTDOWN_TIMEOUT_S = 10.0


class ProviderSession:
    """One running provider process plus its declared metric descriptor."""

    def __init__(self, proc: subprocess.Popen, descriptor: MetricDescriptor):
        self._proc = proc
        self._lines: queue.Queue = queue.Queue()
        self.descriptor = descriptor
        self._next_id = 0
        self._eof = False
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self):
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)  # EOF sentinel

    def _read_line(self, timeout: float) -> str:
        if self._eof:
            raise ProtocolError(
                f"provider {self.descriptor.name!r} already closed its stream")
        try:
            line = self._lines.get(timeout=timeout)
        except queue.Empty:
            raise ProviderTimeout(
                f"provider {self.descriptor.name!r} gave no answer "
                f"within {timeout:.0f}s") from None
        if line is None:
            # Remember EOF so later calls fail fast instead of waiting out
            # the full request timeout against a dead process.
            self._eof = True
            raise ProtocolError(
                f"provider {self.descriptor.name!r} closed its stream")
        return line

    def score(self, ref_path, test_path, timeout: float = REQUEST_TIMEOUT_S) -> float:
        """Score one pair; blocks until the matching-id response arrives."""
        self._next_id += 1
        request_id = str(self._next_id)
        request = {"id": request_id, "ref": str(ref_path), "test": str(test_path)}
        if self._eof:
            raise ProtocolError(
                f"provider {self.descriptor.name!r} already closed its stream")
        try:
            self._proc.stdin.write(json.dumps(request) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError, ValueError) as exc:
            raise ProtocolError(f"provider stdin write failed: {exc}") from exc

        line = self._read_line(timeout)
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"malformed provider response: {line!r}") from exc
        if not isinstance(obj, dict) or obj.get("id") != request_id:
            raise ProtocolError(
                f"response id {obj.get('id')!r} does not match request {request_id!r}"
                if isinstance(obj, dict) else f"non-object response: {line!r}")
        if "error" in obj:
            raise ProviderError(str(obj["error"]))
        value = obj.get("value")
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ProtocolError(f"response value is not a number: {line!r}")
        return float(value)

    def close(self, timeout: float = SHUTDOWN_TIMEOUT_S) -> int:
        """Close stdin and wait for exit; kills the process past the deadline."""
        try:
            if self._proc.stdin and not self._proc.stdin.closed:
                self._proc.stdin.close()
        except OSError:
            pass
        try:
            return self._proc.wait(timeout=timeout)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            return self._proc.wait()

    @property
    def alive(self) -> bool:
        return self._proc.poll() is None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def provider_open(command: list[str] | tuple[str, ...],
                  handshake_timeout: float = HANDSHAKE_TIMEOUT_S) -> ProviderSession:
    """Spawn a provider and validate its handshake line."""
    try:
        proc = subprocess.Popen(
            list(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=None,  # inherited: diagnostics pass through
            text=True,
            encoding="utf-8",
            bufsize=1,
        )
    except OSError as exc:
        raise SpawnError(f"cannot start provider {command!r}: {exc}") from exc

    lines: queue.Queue = queue.Queue()

    def read_first():
        lines.put(proc.stdout.readline())

    t = threading.Thread(target=read_first, daemon=True)
    t.start()
    try:
        first = lines.get(timeout=handshake_timeout)
    except queue.Empty:
        proc.kill()
        raise HandshakeError(
            f"no handshake from {command!r} within {handshake_timeout:.0f}s") from None

    try:
        obj = json.loads(first)
        if obj.get("protocol") != PROTOCOL_NAME:
            raise ValueError(f"protocol {obj.get('protocol')!r} != {PROTOCOL_NAME!r}")
        name = obj["name"]
        is_distance = obj["is_distance"]
        low, high = obj["range"]
        if not isinstance(name, str) or not name or not isinstance(is_distance, bool):
            raise ValueError("bad handshake field types")
        low, high = float(low), float(high)
        if not (math.isfinite(low) and math.isfinite(high) and low < high):
            raise ValueError(f"declared range [{low}, {high}] is not a finite interval")
    except Exception as exc:
        proc.kill()
        raise HandshakeError(f"malformed handshake {first!r}: {exc}") from exc

    descriptor = MetricDescriptor(
        name=name,
        orientation="distance" if is_distance else "similarity",
        raw_range=(low, high),
        command=tuple(command),
    )
    return ProviderSession(proc, descriptor)
