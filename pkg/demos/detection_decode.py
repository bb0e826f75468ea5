"""
Anchor boxes, raw prediction decoding, and non-maximum suppression
==================================================================

A detector head emits one (logit, tx, ty, tw, th) row per anchor. This walk
through builds a small anchor grid, fakes a few predictions around two true
hands, and shows NMS boiling the overlapping candidates down to two boxes.
"""

import numpy as np

from handwave import AnchorConfig, LayerSpec, RawPrediction, decode_box, generate_anchors, iou, nms

# A single 8x8 layer, one square anchor per cell, 30% of image width each.
cfg = AnchorConfig(layers=(LayerSpec(8, 8, scales=(0.3,), aspect_ratios=(1.0,)),))
anchors = generate_anchors(cfg)
print(f"{len(anchors)} anchors; first at ({anchors[0].cx:.4f}, {anchors[0].cy:.4f})")

# Pretend the detector saw hands near (0.3, 0.4) and (0.7, 0.6): every anchor
# close to a hand gets a confident logit and offsets pointing at the truth.
truths = [(0.30, 0.40), (0.70, 0.60)]
rng = np.random.default_rng(0)

boxes = []
for anchor in anchors:
    best = min(truths, key=lambda t: (t[0] - anchor.cx) ** 2 + (t[1] - anchor.cy) ** 2)
    gap = np.hypot(best[0] - anchor.cx, best[1] - anchor.cy)
    if gap > 0.15:
        continue  # this anchor never fires
    logit = 4.0 - 20.0 * gap + rng.normal(0, 0.3)
    # invert the decode transform so the box lands on the truth
    tx = (best[0] - anchor.cx) / (cfg.center_variance * anchor.w)
    ty = (best[1] - anchor.cy) / (cfg.center_variance * anchor.h)
    boxes.append(decode_box(RawPrediction(logit, tx, ty, 0.0, 0.0), anchor, cfg))

print(f"{len(boxes)} candidate boxes above threshold before suppression")

kept = nms(boxes, iou_thresh=0.5, score_thresh=0.5)
print(f"{len(kept)} boxes survive NMS:")
for box in kept:
    print(f"  center ({box.cx:.3f}, {box.cy:.3f})  score {box.score:.3f}")

# The survivors barely overlap each other, by construction of the greedy sweep.
if len(kept) == 2:
    print(f"pairwise IoU of the survivors: {iou(kept[0], kept[1]):.4f}")
