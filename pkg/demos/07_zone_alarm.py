"""Track a target drifting toward a restricted polygon and raise alarms.

The alarm level counts how many distance thresholds the target has crossed;
the last threshold is the trigger.
"""

from brcf.boxes import BBox
from brcf.metrics import Zone, zone_alarm, zone_distance
from brcf.synth import MotionSpec, synth_sequence
from brcf.tracker import TrackerConfig, track_sequence

zone = Zone([(220, 80), (310, 80), (310, 170), (220, 170)], thresholds=[80.0, 40.0, 15.0])
spec = MotionSpec(frame_w=360, n_frames=60, start=BBox(60, 120, 36, 36), velocity=(2.5, 0.0))
frames = [f for f, _ in synth_sequence(spec)]
gts = [b for _, b in synth_sequence(spec)]

last_level = -1
for r in track_sequence(frames, gts[0], TrackerConfig(seed=0)):
    d = zone_distance(r.box, zone)
    level = zone_alarm(d, zone)
    if level != last_level:
        tag = " <-- ALARM" if level == zone.max_level else ""
        print(f"frame {r.frame:3d}: distance {d:6.1f} px, level {level}{tag}")
        last_level = level
