"""Fine-tune the linear box regressor on one frame and watch it pull
jittered boxes back toward the true one.

Four ridge regressions over HOG features of a canonical 64x64 crop predict
size-normalized center offsets and log size ratios.
"""

import numpy as np

from brcf.boxes import iou
from brcf.regression import (
    TrainingPair,
    apply_regressor,
    box_features,
    sample_training_boxes,
    train_regressor,
)
from brcf.synth import MotionSpec, synth_sequence

frame, truth = next(synth_sequence(MotionSpec(n_frames=1, seed=2)))
rng = np.random.default_rng(0)

samples = sample_training_boxes(truth, 64, rng=rng)
pairs = [TrainingPair(s, truth, box_features(frame, s)) for s in samples]
weights = train_regressor(pairs, lam=1.0, iters=200)

print(f"{'before IoU':>10} {'after IoU':>10}")
gains = []
for s in sample_training_boxes(truth, 8, rng=np.random.default_rng(99)):
    refined = apply_regressor(weights, box_features(frame, s), s)
    gains.append(iou(refined, truth) - iou(s, truth))
    print(f"{iou(s, truth):>10.3f} {iou(refined, truth):>10.3f}")
print(f"mean IoU gain: {np.mean(gains):+.3f}")
