"""JSONL frame streams: parsing, serialization, validation, labelled corpora.

One frame per line:

    {"t": <int ms>, "hands": [{"hd": "L"|"R", "pts": [[x, y] * 21], "conf": [c * 21]}]}

"conf" may be omitted, in which case every confidence defaults to 1.0.
Coordinates and confidences must lie in [0, 1]; at most two hands per frame,
never two of the same handedness; two-handed frames list the right hand first.
Within a stream, timestamps are strictly increasing.

A labelled corpus line is the same object with one extra field, ``"label"``,
holding the ground-truth gesture name ("none" when absent).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable, Iterator

from .errors import ParseError, StreamOrderError, ValidationError
from .model import NUM_LANDMARKS, HandFrame, Handedness, LandmarkSet

_FRAME_KEYS = {"t", "hands"}
_HAND_KEYS = {"hd", "pts", "conf"}


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{path}: expected a number, got {value!r}")
    out = float(value)
    if out != out or out in (float("inf"), float("-inf")):
        raise ValidationError(f"{path}: must be finite, got {value!r}")
    return out


def _unit_number(value: Any, path: str) -> float:
    out = _number(value, path)
    if not 0.0 <= out <= 1.0:
        raise ValidationError(f"{path}: must lie in [0, 1], got {value!r}")
    return out


def _hand_from_obj(obj: Any, path: str) -> LandmarkSet:
    if not isinstance(obj, dict):
        raise ValidationError(f"{path}: expected an object, got {type(obj).__name__}")
    for key in obj:
        if key not in _HAND_KEYS:
            raise ValidationError(f"{path}: unexpected field {key!r}")
    if "hd" not in obj:
        raise ValidationError(f"{path}: missing field 'hd'")
    if obj["hd"] not in ("L", "R"):
        raise ValidationError(f"{path}.hd: expected 'L' or 'R', got {obj['hd']!r}")
    if "pts" not in obj:
        raise ValidationError(f"{path}: missing field 'pts'")
    pts = obj["pts"]
    if not isinstance(pts, list) or len(pts) != NUM_LANDMARKS:
        raise ValidationError(
            f"{path}.pts: expected {NUM_LANDMARKS} points, got "
            f"{len(pts) if isinstance(pts, list) else type(pts).__name__}")
    points = []
    for j, pair in enumerate(pts):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ValidationError(f"{path}.pts[{j}]: expected an [x, y] pair")
        points.append([_unit_number(pair[0], f"{path}.pts[{j}].x"),
                       _unit_number(pair[1], f"{path}.pts[{j}].y")])
    conf = None
    if "conf" in obj:
        raw = obj["conf"]
        if not isinstance(raw, list) or len(raw) != NUM_LANDMARKS:
            raise ValidationError(f"{path}.conf: expected {NUM_LANDMARKS} values")
        conf = [_unit_number(v, f"{path}.conf[{j}]") for j, v in enumerate(raw)]
    return LandmarkSet(points=points, handedness=Handedness(obj["hd"]), confidences=conf)


def frame_from_obj(obj: Any) -> HandFrame:
    """Build a HandFrame from a decoded JSON object, rejecting schema deviations."""
    if not isinstance(obj, dict):
        raise ValidationError(f"frame: expected an object, got {type(obj).__name__}")
    for key in obj:
        if key not in _FRAME_KEYS:
            raise ValidationError(f"frame: unexpected field {key!r}")
    if "t" not in obj:
        raise ValidationError("frame: missing field 't'")
    if "hands" not in obj:
        raise ValidationError("frame: missing field 'hands'")
    t = obj["t"]
    if isinstance(t, bool) or not isinstance(t, int):
        raise ValidationError(f"t: expected integer milliseconds, got {t!r}")
    hands_obj = obj["hands"]
    if not isinstance(hands_obj, list):
        raise ValidationError("hands: expected a list")
    if len(hands_obj) > 2:
        raise ValidationError(f"hands: at most 2 hands per frame, got {len(hands_obj)}")
    hands = tuple(_hand_from_obj(h, f"hands[{i}]") for i, h in enumerate(hands_obj))
    return HandFrame(t_ms=t, hands=hands)


def frame_to_obj(frame: HandFrame) -> dict:
    """Return the JSON-ready dict for a frame (hands in canonical order)."""
    return {
        "t": frame.t_ms,
        "hands": [
            {
                "hd": h.handedness.value,
                "pts": [[float(x), float(y)] for x, y in h.points],
                "conf": [float(c) for c in h.confidences],
            }
            for h in frame.hands
        ],
    }


def parse_frame(line: str) -> HandFrame:
    """Parse one JSONL line into a HandFrame.

    Raises ParseError for malformed JSON and ValidationError for any schema
    or invariant violation (the message names the offending field).
    """
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    return frame_from_obj(obj)


def serialize_frame(frame: HandFrame) -> str:
    """Serialize a frame to its single-line JSON form (no trailing newline)."""
    return json.dumps(frame_to_obj(frame), separators=(",", ":"))


def validate_frame(frame: HandFrame) -> None:
    """Raise ValidationError unless the frame would survive a serialize/parse round trip.

    Construction already enforces the structural invariants; this additionally
    requires every coordinate to lie in the unit square, which the line format
    demands.
    """
    if not isinstance(frame, HandFrame):
        raise ValidationError(f"frame: expected HandFrame, got {type(frame).__name__}")
    for i, hand in enumerate(frame.hands):
        pts = hand.points
        if not ((pts >= 0.0).all() and (pts <= 1.0).all()):
            raise ValidationError(f"hands[{i}].pts: coordinates must lie in [0, 1]")


def _lines(source: Iterable[str] | str | Path) -> Iterator[str]:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="ascii") as fh:
            yield from fh
    else:
        yield from source


def read_frames(source: Iterable[str] | str | Path) -> Iterator[HandFrame]:
    """Yield frames from a path or line iterable, enforcing increasing timestamps.

    Blank lines are skipped. Raises StreamOrderError on the first frame whose
    timestamp is not strictly greater than its predecessor's.
    """
    last_t: int | None = None
    for n, line in enumerate(_lines(source), start=1):
        if not line.strip():
            continue
        frame = parse_frame(line)
        if last_t is not None and frame.t_ms <= last_t:
            raise StreamOrderError(
                f"line {n}: timestamp {frame.t_ms} does not increase past {last_t}")
        last_t = frame.t_ms
        yield frame


def write_frames(path: str | Path, frames: Iterable[HandFrame]) -> int:
    """Write frames as JSONL; returns the number of lines written."""
    count = 0
    with open(path, "w", encoding="ascii") as fh:
        for frame in frames:
            validate_frame(frame)
            fh.write(serialize_frame(frame) + "\n")
            count += 1
    return count


def read_labelled(source: Iterable[str] | str | Path) -> Iterator[tuple[HandFrame, str]]:
    """Yield (frame, label) pairs from a labelled corpus.

    Lines without a "label" field yield the label "none". Timestamp ordering
    is enforced exactly as in read_frames.
    """
    last_t: int | None = None
    for n, line in enumerate(_lines(source), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {n}: malformed JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise ValidationError(f"line {n}: expected an object")
        label = obj.pop("label", "none")
        if not isinstance(label, str) or not label:
            raise ValidationError(f"line {n}: label must be a non-empty string")
        frame = frame_from_obj(obj)
        if last_t is not None and frame.t_ms <= last_t:
            raise StreamOrderError(
                f"line {n}: timestamp {frame.t_ms} does not increase past {last_t}")
        last_t = frame.t_ms
        yield frame, label


def write_labelled(path: str | Path, pairs: Iterable[tuple[HandFrame, str]]) -> int:
    """Write (frame, label) pairs as labelled corpus JSONL; returns the line count."""
    count = 0
    with open(path, "w", encoding="ascii") as fh:
        for frame, label in pairs:
            validate_frame(frame)
            obj = frame_to_obj(frame)
            obj["label"] = label
            fh.write(json.dumps(obj, separators=(",", ":")) + "\n")
            count += 1
    return count
