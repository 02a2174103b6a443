"""Estimate a scale change between two frames from matched keypoints.

Box-filter keypoints are detected on integral images of both crops, matched
by descriptor distance with a ratio test, and the ratio of weighted-centroid
distances to the patch centers gives the scale estimate.
"""

import cv2
import numpy as np

from brcf.keypoints import (
    detect_and_describe,
    estimate_scale,
    match_keypoints,
    weighted_centroid,
)
from brcf.media import integral_image

rng = np.random.default_rng(7)
img = cv2.GaussianBlur(rng.integers(0, 255, size=(120, 120)).astype(np.uint8), (0, 0), 1.5)

true_scale = 1.08
big = cv2.resize(img, None, fx=true_scale, fy=true_scale, interpolation=cv2.INTER_LINEAR)

kps1, d1 = detect_and_describe(integral_image(img), threshold=1e-5, max_points=80, upright=True)
kps2, d2 = detect_and_describe(integral_image(big), threshold=1e-5, max_points=80, upright=True)
pairs = match_keypoints(d1, d2, ratio=0.7)
print(f"{len(kps1)} / {len(kps2)} keypoints, {len(pairs)} matches")

i_idx = [i for i, _, _ in pairs.pairs]
j_idx = [j for _, j, _ in pairs.pairs]
w = np.ones(len(pairs))
m1 = weighted_centroid([(kps1[i].x, kps1[i].y) for i in i_idx], w)
m2 = weighted_centroid([(kps2[j].x, kps2[j].y) for j in j_idx], w)
c1 = ((img.shape[1] - 1) / 2, (img.shape[0] - 1) / 2)
c2 = ((big.shape[1] - 1) / 2, (big.shape[0] - 1) / 2)

est = estimate_scale(m1, c1, m2, c2, n_matches=len(pairs), clamp=(0.5, 2.0))
print(f"true scale {true_scale:.3f}, estimated {est:.3f}")
