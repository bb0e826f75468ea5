"""Posture extraction and gesture recognition over landmark frames.

A finger is open (1) when its tip sits strictly above its MCP joint in image
coordinates (tip.y < mcp.y; y grows downward, so above means smaller y). The
thumb moves sideways rather than up, so it is judged by the segment from its
MCP (landmark 2) to its tip (landmark 4): open means the tip is displaced
laterally by at least ``thumb_min_dx`` with slope magnitude at most
``thumb_slope_max``. Ties and degenerate geometry resolve to folded (0).

The five bits (thumb, index, middle, ring, pinky) form a posture array, which
gesture definitions match literally — single-handed against any present hand,
double-handed against both hands at once. A registry is an ordered list of
definitions; classification returns the first match, so more specific
(double-handed) entries belong before the single-handed ones they overlap.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterator, Mapping

from .errors import StreamOrderError, ValidationError
from .model import (
    MCP,
    TIP,
    THUMB_MCP,
    THUMB_TIP,
    INDEX_TIP,
    MIDDLE_MCP,
    DoublePattern,
    GestureDef,
    GestureEvent,
    HandFrame,
    Handedness,
    LandmarkSet,
    Point2,
    PostureArray,
)

_BEND_FINGERS = ("index", "middle", "ring", "pinky")


@dataclass(frozen=True)
class FingerStateParams:
    """Tunable thresholds for the thumb's lateral-displacement rule."""

    thumb_slope_max: float = 1.0
    thumb_min_dx: float = 0.04

    def __post_init__(self) -> None:
        if self.thumb_slope_max <= 0:
            raise ValidationError(f"thumb_slope_max must be positive, got {self.thumb_slope_max}")
        if self.thumb_min_dx <= 0:
            raise ValidationError(f"thumb_min_dx must be positive, got {self.thumb_min_dx}")


DEFAULT_FINGER_PARAMS = FingerStateParams()


def finger_state(lms: LandmarkSet, finger: str) -> int:
    """1 if the finger's tip is strictly above its MCP joint, else 0.

    ``finger`` is one of "index", "middle", "ring", "pinky"; the thumb has its
    own rule (see thumb_state).
    """
    if finger not in _BEND_FINGERS:
        raise ValueError(f"finger must be one of {_BEND_FINGERS}, got {finger!r}")
    tip_y = lms.points[TIP[finger], 1]
    mcp_y = lms.points[MCP[finger], 1]
    return 1 if tip_y < mcp_y else 0


def thumb_state(lms: LandmarkSet, params: FingerStateParams = DEFAULT_FINGER_PARAMS) -> int:
    """1 if the thumb tip is laterally displaced from its MCP with a shallow slope.

    Open requires |tip.x - mcp.x| >= thumb_min_dx and |dy / dx| <= thumb_slope_max;
    anything else (including a near-vertical thumb) is folded.
    """
    tip_x, tip_y = lms.points[THUMB_TIP]
    mcp_x, mcp_y = lms.points[THUMB_MCP]
    dx = tip_x - mcp_x
    if abs(dx) < params.thumb_min_dx:
        return 0
    slope = (tip_y - mcp_y) / dx
    return 1 if abs(slope) <= params.thumb_slope_max else 0


def posture_array(lms: LandmarkSet, params: FingerStateParams = DEFAULT_FINGER_PARAMS) -> PostureArray:
    """The five finger bits for one hand, thumb first."""
    bits = (thumb_state(lms, params),) + tuple(finger_state(lms, f) for f in _BEND_FINGERS)
    return PostureArray(bits)


def cursor_point(lms: LandmarkSet) -> Point2:
    """The midpoint between thumb tip and index tip — the pointing cursor."""
    thumb = lms.points[THUMB_TIP]
    index = lms.points[INDEX_TIP]
    return Point2(float((thumb[0] + index[0]) / 2.0), float((thumb[1] + index[1]) / 2.0))


def focal_point(lms: LandmarkSet) -> Point2:
    """The middle-finger MCP — the point the camera keeps centered."""
    return lms.point(MIDDLE_MCP)


class GestureRegistry:
    """An ordered collection of gesture definitions with unique names and patterns."""

    def __init__(self, defs: tuple[GestureDef, ...] | list[GestureDef]):
        defs = tuple(defs)
        names = set()
        patterns = set()
        for d in defs:
            if d.name in names:
                raise ValidationError(f"registry: duplicate gesture name {d.name!r}")
            if d.pattern in patterns:
                raise ValidationError(f"registry: duplicate pattern on {d.name!r}")
            names.add(d.name)
            patterns.add(d.pattern)
        self.defs = defs
        self._by_name = {d.name: d for d in defs}

    def __iter__(self) -> Iterator[GestureDef]:
        return iter(self.defs)

    def __len__(self) -> int:
        return len(self.defs)

    def get(self, name: str) -> GestureDef:
        return self._by_name[name]

    def __contains__(self, name: str) -> bool:
        return name in self._by_name


def classify(arrays: Mapping[Handedness, PostureArray], registry: GestureRegistry) -> str | None:
    """Return the first registry entry the present hands satisfy, or None.

    A single-handed definition matches when any present hand shows its
    posture; a double-handed definition only when both hands are present and
    each shows its side's posture. With no hands there is no match.
    """
    if not arrays:
        return None
    right = arrays.get(Handedness.RIGHT)
    left = arrays.get(Handedness.LEFT)
    for d in registry:
        pattern = d.pattern
        if isinstance(pattern, DoublePattern):
            if right is not None and left is not None \
                    and right == pattern.right and left == pattern.left:
                return d.name
        else:
            if right == pattern or left == pattern:
                return d.name
    return None


def frame_arrays(frame: HandFrame,
                 params: FingerStateParams = DEFAULT_FINGER_PARAMS) -> dict[Handedness, PostureArray]:
    """Posture arrays for every hand in the frame, keyed by handedness."""
    return {h.handedness: posture_array(h, params) for h in frame.hands}


@dataclass
class EngineState:
    """Mutable per-stream recognition state (owned by a single engine).

    Frames classify to at most one name at a time, so one (candidate, streak)
    pair carries the same information as a counter per definition.
    """

    candidate: str | None = None
    streak: int = 0
    active: str | None = None
    active_onset_ms: int | None = None
    last_cursor: Point2 | None = None
    last_t_ms: int | None = None


class GestureEngine:
    """Debounced gesture recognition over a single frame stream.

    A gesture fires (onset event) only after ``hold_frames`` consecutive
    frames classify to it, and closes (offset event) on the first frame that
    classifies differently. Feed frames in strictly increasing ``t_ms`` order.
    """

    def __init__(self, registry: GestureRegistry,
                 params: FingerStateParams = DEFAULT_FINGER_PARAMS):
        self.registry = registry
        self.params = params
        self.state = EngineState()

    def step(self, frame: HandFrame) -> list[GestureEvent]:
        """Advance by one frame; return the events it triggered (possibly none)."""
        state = self.state
        if state.last_t_ms is not None and frame.t_ms <= state.last_t_ms:
            raise StreamOrderError(
                f"frame timestamp {frame.t_ms} does not increase past {state.last_t_ms}")
        state.last_t_ms = frame.t_ms

        if frame.hands:
            primary = frame.hands[0]  # canonical order puts the right hand first
            state.last_cursor = cursor_point(primary)

        name = classify(frame_arrays(frame, self.params), self.registry)
        events: list[GestureEvent] = []

        if state.active is not None and name != state.active:
            events.append(GestureEvent(
                name=state.active,
                onset_ms=state.active_onset_ms,
                offset_ms=frame.t_ms,
            ))
            state.active = None
            state.active_onset_ms = None

        if name is None or name == state.active:
            state.candidate = None
            state.streak = 0
        else:
            if name == state.candidate:
                state.streak += 1
            else:
                state.candidate = name
                state.streak = 1
            if state.streak >= self.registry.get(name).hold_frames:
                state.active = name
                state.active_onset_ms = frame.t_ms
                state.candidate = None
                state.streak = 0
                events.append(GestureEvent(
                    name=name,
                    onset_ms=frame.t_ms,
                    offset_ms=None,
                    cursor=state.last_cursor,
                ))
        return events

    def run(self, frames) -> Iterator[GestureEvent]:
        """Yield every event produced while consuming an iterable of frames."""
        for frame in frames:
            yield from self.step(frame)


def _posture_from_obj(obj: Any, path: str) -> PostureArray:
    if not isinstance(obj, list) or len(obj) != 5:
        raise ValidationError(f"{path}: expected five finger bits")
    return PostureArray(tuple(obj))


def registry_from_obj(obj: Any) -> GestureRegistry:
    """Build a registry from the decoded registry-file JSON (a list of defs)."""
    if not isinstance(obj, list):
        raise ValidationError("registry: expected a JSON array of definitions")
    defs = []
    for i, entry in enumerate(obj):
        path = f"registry[{i}]"
        if not isinstance(entry, dict):
            raise ValidationError(f"{path}: expected an object")
        name = entry.get("name")
        if not isinstance(name, str) or not name:
            raise ValidationError(f"{path}: name must be a non-empty string")
        pattern_obj = entry.get("pattern")
        if not isinstance(pattern_obj, dict) or len(pattern_obj) != 1:
            raise ValidationError(f"{path}: pattern must hold exactly one of 'single' or 'double'")
        if "single" in pattern_obj:
            pattern: PostureArray | DoublePattern = _posture_from_obj(
                pattern_obj["single"], f"{path}.pattern.single")
        elif "double" in pattern_obj:
            two = pattern_obj["double"]
            if not isinstance(two, dict) or set(two) != {"R", "L"}:
                raise ValidationError(f"{path}.pattern.double: expected 'R' and 'L' postures")
            pattern = DoublePattern(
                right=_posture_from_obj(two["R"], f"{path}.pattern.double.R"),
                left=_posture_from_obj(two["L"], f"{path}.pattern.double.L"),
            )
        else:
            raise ValidationError(f"{path}: pattern must hold 'single' or 'double'")
        hold = entry.get("hold_frames", 5)
        if isinstance(hold, bool) or not isinstance(hold, int):
            raise ValidationError(f"{path}: hold_frames must be an integer")
        defs.append(GestureDef(name=name, pattern=pattern, hold_frames=hold))
    return GestureRegistry(defs)


def registry_to_obj(registry: GestureRegistry) -> list:
    out = []
    for d in registry:
        if isinstance(d.pattern, DoublePattern):
            pattern = {"double": {"R": list(d.pattern.right), "L": list(d.pattern.left)}}
        else:
            pattern = {"single": list(d.pattern)}
        out.append({"name": d.name, "pattern": pattern, "hold_frames": d.hold_frames})
    return out


def load_registry(path: str | Path) -> GestureRegistry:
    """Load a registry file (a JSON array of {name, pattern, hold_frames})."""
    with open(path, "r", encoding="ascii") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"registry: malformed JSON: {exc}") from exc
    return registry_from_obj(obj)


def save_registry(path: str | Path, registry: GestureRegistry) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump(registry_to_obj(registry), fh, indent=2)
        fh.write("\n")


def default_registry() -> GestureRegistry:
    """The 16 stock gestures: 4 double-handed entries, then 12 single-handed.

    Names follow the numeral/shape convention of the capture set the engine
    was built around; the double-handed entries come first so a two-handed
    pose wins over the single-handed posture it contains.
    """
    data = resources.files("handwave").joinpath("data/default_registry.json").read_text("ascii")
    return registry_from_obj(json.loads(data))
