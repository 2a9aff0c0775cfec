"""The jsonl-v1 request loop.

Wire format, one JSON object per line:

  handshake: {"protocol": "jsonl-v1", "name": ..., "is_distance": true, "range": [0.0, 1.0]}
  request:   {"id": "7", "ref": "/path/a.png", "test": "/path/b.png"}
  response:  {"id": "7", "value": 0.42}  or  {"id": "7", "error": "..."}

The handshake is only written once the scorer is ready, so a failed model
load never emits a partial session. Per-pair problems become error objects;
only stdin EOF ends the loop.
"""

from __future__ import annotations

import json
import math
import os
import sys
from dataclasses import dataclass

PROTOCOL_NAME = "jsonl-v1"


@dataclass(frozen=True)
class Descriptor:
    """What the provider declares about itself in the handshake."""

    name: str
    is_distance: bool = True
    range: tuple = (0.0, 1.0)


def _emit(stream, obj) -> None:
    stream.write(json.dumps(obj) + "\n")
    stream.flush()


def serve_loop(descriptor: Descriptor, scorer, stdin=None, stdout=None) -> None:
    """Handshake, then answer every request line until EOF.

    `scorer(ref_path, test_path) -> float` may raise; the exception text is
    relayed as that request's error object and the loop continues.
    """
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout

    _emit(stdout, {
        "protocol": PROTOCOL_NAME,
        "name": descriptor.name,
        "is_distance": descriptor.is_distance,
        "range": list(descriptor.range),
    })

    for line in stdin:
        if not line.strip():
            continue
        request_id = None
        try:
            request = json.loads(line)
            request_id = request.get("id")
            ref, test = request["ref"], request["test"]
        except (json.JSONDecodeError, KeyError, AttributeError, TypeError) as exc:
            _emit(stdout, {"id": request_id,
                           "error": f"malformed request: {exc}"})
            continue
        missing = [p for p in (ref, test) if not os.path.isfile(p)]
        if missing:
            _emit(stdout, {"id": request_id,
                           "error": f"file not found: {missing[0]}"})
            continue
        try:
            value = float(scorer(ref, test))
        except Exception as exc:
            _emit(stdout, {"id": request_id,
                           "error": f"{type(exc).__name__}: {exc}"})
            continue
        if not math.isfinite(value):
            # json.dumps would put a bare NaN/Infinity token on the wire,
            # which is not interoperable JSON.
            _emit(stdout, {"id": request_id,
                           "error": f"non-finite score: {value!r}"})
            continue
        _emit(stdout, {"id": request_id, "value": value})
