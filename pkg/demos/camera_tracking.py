"""
Closed-loop pan/tilt centering over the wire protocol
=====================================================

The controller compares the hand's focal point (middle-finger knuckle) with
the frame center and emits step commands; a simulated mount applies them.
Commands travel as the one-line wire format the firmware parses.
"""

from handwave import (
    Axis,
    ControllerConfig,
    DeviceCommand,
    Point2,
    centering_step,
    decode_wire,
    encode_wire,
)

cfg = ControllerConfig(deadzone=0.05, gain=40.0, max_steps=20)
focal = Point2(0.95, 0.12)  # hand far up-right in the frame
print(f"start: focal at ({focal.x:.3f}, {focal.y:.3f})")

iteration = 0
while True:
    commands = centering_step(focal, cfg)
    if not commands:
        print(f"centered after {iteration} iterations "
              f"at ({focal.x:.3f}, {focal.y:.3f})")
        break
    iteration += 1
    x, y = focal.x, focal.y
    for cmd in commands:
        line = encode_wire(cmd)
        print(f"  iteration {iteration}: {line!r}", end="")
        # the mount consumes the same bytes it was sent
        parsed = decode_wire(line)
        assert parsed == cmd
        if parsed.axis is Axis.X:
            x -= parsed.steps / cfg.gain
        else:
            y -= parsed.steps / cfg.gain
        print(f"  -> focal ({x:.3f}, {y:.3f})")
    focal = Point2(x, y)

# Device actions ride the same wire with a D verb.
power = DeviceCommand("tv", "POWER")
print(f"device command on the wire: {encode_wire(power)!r}")

# Anything non-canonical is refused with the offending byte offset.
from handwave import ProtocolError

for bad in (b"M Z +8\n", b"M X +08\n", b"D tv\n"):
    try:
        decode_wire(bad)
    except ProtocolError as exc:
        print(f"rejected {bad!r}: {exc}")
