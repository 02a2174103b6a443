"""Watch the KL-based fusion weights adapt over a short tracking run.

Each sub-model's response is scored by its KL divergence from an ideal
Gaussian bump at its own peak; weights move toward the reliable models with
exponential smoothing, so they drift rather than jump.
"""

from brcf.synth import MotionSpec, synth_sequence
from brcf.tracker import TrackerConfig, track_sequence

spec = MotionSpec(n_frames=30, velocity=(2.0, 0.5), noise_sigma=4.0, seed=11)
frames = [f for f, _ in synth_sequence(spec)]
gts = [b for _, b in synth_sequence(spec)]

print(f"{'frame':>5} {'KL hog':>8} {'KL ch':>8} {'KL lh':>8}   "
      f"{'w hog':>6} {'w ch':>6} {'w lh':>6}")
for r in track_sequence(frames, gts[0], TrackerConfig(seed=0)):
    print(f"{r.frame:>5} {r.kl[0]:>8.3f} {r.kl[1]:>8.3f} {r.kl[2]:>8.3f}   "
          f"{r.weights[0]:>6.3f} {r.weights[1]:>6.3f} {r.weights[2]:>6.3f}")
