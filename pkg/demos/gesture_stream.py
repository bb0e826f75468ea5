"""
From landmark frames to debounced gesture events
================================================

Posture arrays turn 21 landmarks into five open/folded bits; the gesture
engine watches the stream and fires an onset only after a gesture holds for
its configured number of consecutive frames, then an offset when it breaks.
"""

from handwave import (
    GestureEngine,
    Handedness,
    HandFrame,
    PostureArray,
    default_registry,
    hand_template,
    posture_array,
)

registry = default_registry()
print(f"registry holds {len(registry)} gestures, two-handed ones first")

# Build a little scripted performance: five frames of an index finger, two
# noise frames of a fist, then a two-handed timeout "T".
one = hand_template(PostureArray.of(0, 1, 0, 0, 0))
fist = hand_template(PostureArray.of(0, 0, 0, 0, 0))
print("posture bits for the pointing hand:", tuple(posture_array(one)))

timeout = registry.get("TimeOut_2H")
right = hand_template(timeout.pattern.right, Handedness.RIGHT)
left = hand_template(timeout.pattern.left, Handedness.LEFT)

script = [one] * 6 + [fist] * 2 + [(right, left)] * 6
frames = []
for i, hands in enumerate(script):
    hands = hands if isinstance(hands, tuple) else (hands,)
    frames.append(HandFrame(t_ms=i * 40, hands=hands))

engine = GestureEngine(registry)
for event in engine.run(frames):
    kind = "onset " if event.is_onset else "offset"
    at = event.onset_ms if event.is_onset else event.offset_ms
    cursor = f"  cursor ({event.cursor.x:.2f}, {event.cursor.y:.2f})" if event.cursor else ""
    print(f"{kind} {event.name:12s} at {at:4d} ms{cursor}")
