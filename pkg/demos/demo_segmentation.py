"""Walkthrough: stratified adaptive thresholding on an unevenly lit phantom.

Renders a synthetic image whose illumination climbs 40 gray levels across the
diagonal, segments it with one global threshold and with the quadtree-
stratified pipeline, and compares both against the exact ground truth.

Run from the repository root:

    python3 demos/demo_segmentation.py

Outputs (phantom, ground truth, both masks, JSON report) are written to
demo_output/.
"""

import json
import pathlib

import numpy as np

from stratseg import (
    GrayImage,
    PhantomSpec,
    ShapeSpec,
    build_quadtree,
    generate_phantom,
    leaves,
    oracle_best_threshold,
    save_pgm,
    seg_metrics,
    segment,
    threshold_tree,
)

OUT = pathlib.Path("demo_output")
OUT.mkdir(exist_ok=True)

# --- 1. a phantom with ground truth ------------------------------------------
# Two bright ellipses (intensity 125) on a darker background (80), plus a
# diagonal illumination ramp and Gaussian noise. Because the ramp adds up to
# 40 gray levels, the darkest foreground is dimmer than the brightest
# background: no single threshold can separate them everywhere.
spec = PhantomSpec(
    width=512,
    height=512,
    background=80,
    shapes=(
        ShapeSpec("ellipse", 160.0, 170.0, 130.0, 105.0, 125),
        ShapeSpec("ellipse", 350.0, 340.0, 130.0, 110.0, 125),
    ),
    ramp_amplitude=40.0,
    noise_sigma=8.0,
    seed=20240613,
)
img, truth = generate_phantom(spec)
(OUT / "phantom.pgm").write_bytes(save_pgm(img))
(OUT / "truth.pgm").write_bytes(save_pgm(truth))
print(f"phantom: {img.width}x{img.height}, intensities "
      f"{img.pixels.min()}..{img.pixels.max()}")

# --- 2. the global-threshold baseline -----------------------------------------
# Even the *best possible* single threshold (exhaustive search over all 256
# candidates of the same objective) cannot undo the illumination ramp.
hist = np.bincount(img.pixels.ravel(), minlength=256)
t_global, j_global = oracle_best_threshold(hist)
global_mask = GrayImage(np.where(img.pixels <= t_global, 0, 255).astype(np.uint8))
(OUT / "mask_global.pgm").write_bytes(save_pgm(global_mask))
gm = seg_metrics(global_mask, truth)
print(f"global threshold t={t_global}: distortion={gm.distortion:.4f} "
      f"Dice={gm.reliability:.4f}")

# --- 3. the stratified pipeline ------------------------------------------------
# The quadtree splits wherever intensity variance stays above the policy
# threshold, so every subdomain sees only a local slice of the ramp. Each
# leaf then gets its own threshold from the blended variance/entropy
# objective; homogeneous leaves inherit the threshold of their parent, whose
# histogram still resolves both classes.
tree = build_quadtree(img)
report = threshold_tree(img, tree)
mask = segment(img, tree, report)
(OUT / "mask_stratified.pgm").write_bytes(save_pgm(mask))
m = seg_metrics(mask, truth)

thresholds = [e.threshold for e in report.entries]
print(f"quadtree: {len(leaves(tree))} leaves, per-leaf thresholds span "
      f"{min(thresholds)}..{max(thresholds)} "
      f"(the spread is the ramp being tracked)")
print(f"stratified: distortion={m.distortion:.4f} Dice={m.reliability:.4f}")
print(f"Dice improvement over the best global threshold: "
      f"{m.reliability - gm.reliability:+.4f}")

# --- 4. a machine-readable report ----------------------------------------------
doc = {
    "global": {"threshold": t_global, "distortion": gm.distortion, "dice": gm.reliability},
    "stratified": {
        "n_leaves": len(report.entries),
        "threshold_min": min(thresholds),
        "threshold_max": max(thresholds),
        "distortion": m.distortion,
        "dice": m.reliability,
    },
}
(OUT / "comparison.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
print(f"wrote phantom, masks and comparison.json to {OUT}/")
