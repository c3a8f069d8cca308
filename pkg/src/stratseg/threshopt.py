"""Per-subdomain threshold selection.

The objective blends the normalized Otsu between-class variance with the
normalized Kapur two-class entropy under a complexity-adaptive weight, is
made continuous in the threshold by piecewise-linear interpolation of the
histogram's cumulative sums, and is maximized by a 1-D Nelder-Mead simplex
followed by rounding and a local integer refinement. An exhaustive
256-candidate oracle backs every optimizer claim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import EmptyHistogram, ReportTreeMismatch
from .imgio import GrayImage, Rect
from .stratify import QuadTree, RegionNode, leaves, region_complexity, region_histogram

__all__ = [
    "ObjectiveWeights",
    "SimplexParams",
    "LeafThreshold",
    "ThresholdReport",
    "objective",
    "nelder_mead_1d",
    "optimize_leaf",
    "oracle_best_threshold",
    "threshold_tree",
    "segment",
]

_LN256 = math.log(256.0)


@dataclass(frozen=True)
class ObjectiveWeights:
    """Blend weights for the variance and entropy criteria.

    With `adaptive` set, the entropy weight is scaled by the region's
    complexity (entropy/8) and the variance weight takes the remainder, so
    flat regions rely on the variance criterion alone.
    """

    w_var: float = 0.7
    w_ent: float = 0.3
    adaptive: bool = True

    def __post_init__(self):
        if self.w_var < 0 or self.w_ent < 0 or self.w_var + self.w_ent <= 0:
            raise ValueError("weights must be nonnegative with positive sum")

    def effective(self, complexity: float) -> tuple:
        """(w_var, w_ent) actually applied; always nonnegative, summing to 1."""
        s = self.w_var + self.w_ent
        wv, we = self.w_var / s, self.w_ent / s
        if self.adaptive:
            we = we * complexity
            wv = 1.0 - we
        return wv, we


@dataclass(frozen=True)
class SimplexParams:
    max_iter: int = 200
    diameter_tol: float = 0.5
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5

    def __post_init__(self):
        ok = (
            self.max_iter >= 1
            and self.diameter_tol > 0
            and self.reflection > 0
            and self.expansion > self.reflection
            and 0 < self.contraction < 1
            and 0 < self.shrink < 1
        )
        if not ok:
            raise ValueError("invalid simplex parameters")


@dataclass(frozen=True)
class LeafThreshold:
    """One per-leaf record of the threshold report."""

    threshold: int
    continuous_optimum: float
    objective_value: float
    w_var: float
    w_ent: float
    iterations: int
    converged: bool
    rect: Optional[Rect] = None
    # region whose histogram the threshold was optimized on; None means the
    # leaf's own histogram, otherwise the nearest heterogeneous ancestor
    source_rect: Optional[Rect] = None


@dataclass(frozen=True)
class ThresholdReport:
    entries: tuple

    def __len__(self):
        return len(self.entries)


class _Tables:
    """Cumulative-sum tables giving a continuous extension of the objective."""

    def __init__(self, hist):
        counts = np.asarray(hist, dtype=np.float64)
        n = counts.sum()
        if n <= 0:
            raise EmptyHistogram("histogram has zero total count")
        levels = np.arange(256, dtype=np.float64)
        self.n = n
        self.cum_w = np.cumsum(counts)
        self.cum_s = np.cumsum(counts * levels)
        p = counts / n
        a = np.where(p > 0, -p * np.log(np.where(p > 0, p, 1.0)), 0.0)
        self.cum_a = np.cumsum(a)
        self.a_tot = self.cum_a[-1]
        self.s_tot = self.cum_s[-1]
        self.mean = self.s_tot / n
        self.var_tot = float((counts * (levels - self.mean) ** 2).sum() / n)

    def _interp(self, table, t):
        # piecewise-linear between integer knots; exact at the knots
        k = np.floor(t).astype(np.int64)
        k = np.clip(k, 0, 255)
        frac = t - k
        hi = np.minimum(k + 1, 255)
        return table[k] + frac * (table[hi] - table[k])

    def evaluate(self, t, w_var: float, w_ent: float):
        """J(t) for scalar or array t; t is clamped into [0, 255]."""
        t_arr = np.clip(np.asarray(t, dtype=np.float64), 0.0, 255.0)
        w = self._interp(self.cum_w, t_arr)
        s = self._interp(self.cum_s, t_arr)
        a = self._interp(self.cum_a, t_arr)
        om0 = w / self.n
        om1 = 1.0 - om0
        with np.errstate(divide="ignore", invalid="ignore"):
            mu0 = np.where(w > 0, s / np.where(w > 0, w, 1.0), 0.0)
            mu1 = np.where(
                om1 > 0, (self.s_tot - s) / np.where(om1 > 0, self.n - w, 1.0), 0.0
            )
            bcv = om0 * om1 * (mu0 - mu1) ** 2
            v = bcv / self.var_tot if self.var_tot > 0 else np.zeros_like(bcv)
            h0 = np.where(om0 > 0, np.log(np.where(om0 > 0, om0, 1.0)) + a / np.where(om0 > 0, om0, 1.0), 0.0)
            rest = self.a_tot - a
            h1 = np.where(om1 > 0, np.log(np.where(om1 > 0, om1, 1.0)) + rest / np.where(om1 > 0, om1, 1.0), 0.0)
        e = np.clip((h0 + h1) / (2.0 * _LN256), 0.0, 1.0)
        j = w_var * v + w_ent * e
        return float(j) if np.isscalar(t) or np.ndim(t) == 0 else j


def objective(hist, t, weights: ObjectiveWeights = ObjectiveWeights(), complexity: float = 1.0):
    """Weighted threshold objective J(t); accepts scalar or array t."""
    tab = _Tables(hist)
    wv, we = weights.effective(complexity)
    return tab.evaluate(t, wv, we)


def nelder_mead_1d(
    f: Callable[[float], float], x0: float, params: SimplexParams = SimplexParams()
):
    """Maximize f with a 2-vertex Nelder-Mead simplex started at {x0, x0+16}.

    Returns (x_best, f_best, iterations, converged).
    """
    verts = [float(x0), float(x0) + 16.0]
    fvals = [f(verts[0]), f(verts[1])]
    iters = 0
    while iters < params.max_iter and abs(verts[0] - verts[1]) >= params.diameter_tol:
        if fvals[1] > fvals[0]:
            verts.reverse()
            fvals.reverse()
        best, worst = verts
        fb, fw = fvals
        xr = best + params.reflection * (best - worst)
        fr = f(xr)
        if fr > fb:
            xe = best + params.expansion * (best - worst)
            fe = f(xe)
            if fe > fr:
                verts[1], fvals[1] = xe, fe
            else:
                verts[1], fvals[1] = xr, fr
        elif fr > fw:
            verts[1], fvals[1] = xr, fr
        else:
            xc = best + params.contraction * (worst - best)
            fc = f(xc)
            if fc > fw:
                verts[1], fvals[1] = xc, fc
            else:
                xs = best + params.shrink * (worst - best)
                verts[1], fvals[1] = xs, f(xs)
        iters += 1
    if fvals[1] > fvals[0]:
        verts.reverse()
        fvals.reverse()
    converged = abs(verts[0] - verts[1]) < params.diameter_tol
    return verts[0], fvals[0], iters, converged


def _refine_integer(tab: _Tables, t_star: float, wv: float, we: float) -> int:
    """Round, scan a +-3 window (smallest-t ties), then hill-climb to a
    strict integer local maximum."""
    t0 = int(np.floor(min(max(t_star, 0.0), 255.0) + 0.5))
    lo, hi = max(0, t0 - 3), min(255, t0 + 3)
    cand = np.arange(lo, hi + 1)
    jw = tab.evaluate(cand.astype(np.float64), wv, we)
    t = int(cand[int(np.argmax(jw))])  # first max = smallest tie
    jt = tab.evaluate(float(t), wv, we)
    while True:
        if t < 255:
            up = tab.evaluate(float(t + 1), wv, we)
            if up > jt:
                t, jt = t + 1, up
                continue
        if t > 0:
            dn = tab.evaluate(float(t - 1), wv, we)
            if dn > jt:
                t, jt = t - 1, dn
                continue
        return t


def optimize_leaf(
    hist,
    complexity: float,
    weights: ObjectiveWeights = ObjectiveWeights(),
    params: SimplexParams = SimplexParams(),
) -> LeafThreshold:
    """Simplex search from the region mean, then integer refinement.

    The returned threshold is always an integer local maximum of J over its
    integer neighbors.
    """
    tab = _Tables(hist)
    wv, we = weights.effective(complexity)
    x_star, _, iters, converged = nelder_mead_1d(
        lambda t: tab.evaluate(t, wv, we), tab.mean, params
    )
    t = _refine_integer(tab, x_star, wv, we)
    return LeafThreshold(
        threshold=t,
        continuous_optimum=float(x_star),
        objective_value=float(tab.evaluate(float(t), wv, we)),
        w_var=wv,
        w_ent=we,
        iterations=iters,
        converged=converged,
    )


def oracle_best_threshold(
    hist, complexity: float = 1.0, weights: ObjectiveWeights = ObjectiveWeights()
):
    """Exhaustive argmax of J over all 256 integer thresholds (smallest-t tie)."""
    tab = _Tables(hist)
    wv, we = weights.effective(complexity)
    j = tab.evaluate(np.arange(256, dtype=np.float64), wv, we)
    t = int(np.argmax(j))
    return t, float(j[t])


def _leaf_sources(tree: QuadTree):
    """Pair each leaf with the node whose histogram its threshold comes from.

    Homogeneous leaves (variance at or below the split threshold) inherit
    from their nearest split ancestor, i.e. the parent: the quadtree gives
    every subdomain a coarser level whose statistics still resolve the
    foreground/background mixture. Heterogeneous leaves (stopped by the
    depth or size caps) use their own histogram.
    """
    thresh = tree.policy.var_threshold
    out = []

    def visit(node: RegionNode, ancestor):
        if node.is_leaf:
            if node.stats.variance > thresh or ancestor is None:
                out.append((node, node))
            else:
                out.append((node, ancestor))
        else:
            for child in node.children:
                visit(child, node)

    visit(tree.root, None)
    return out


def threshold_tree(
    img: GrayImage,
    tree: QuadTree,
    weights: ObjectiveWeights = ObjectiveWeights(),
    params: SimplexParams = SimplexParams(),
) -> ThresholdReport:
    """Optimize one threshold per leaf, in deterministic leaf order."""
    cache = {}
    entries = []
    for leaf, source in _leaf_sources(tree):
        key = id(source)
        if key not in cache:
            hist = region_histogram(img, source.rect)
            cache[key] = optimize_leaf(
                hist, region_complexity(source), weights, params
            )
        base = cache[key]
        entries.append(
            replace(
                base,
                rect=leaf.rect,
                source_rect=None if source is leaf else source.rect,
            )
        )
    return ThresholdReport(tuple(entries))


def segment(img: GrayImage, tree: QuadTree, report: ThresholdReport) -> GrayImage:
    """Stitch the per-leaf binarizations into a full-size {0, 255} mask."""
    leaf_list = leaves(tree)
    if len(leaf_list) != len(report.entries):
        raise ReportTreeMismatch(
            f"{len(report.entries)} entries for {len(leaf_list)} leaves"
        )
    mask = np.zeros((img.height, img.width), dtype=np.uint8)
    for leaf, entry in zip(leaf_list, report.entries):
        if entry.rect != leaf.rect:
            raise ReportTreeMismatch(f"entry rect {entry.rect} != leaf rect {leaf.rect}")
        r = leaf.rect
        sub = img.pixels[r.y0 : r.y0 + r.h, r.x0 : r.x0 + r.w]
        mask[r.y0 : r.y0 + r.h, r.x0 : r.x0 + r.w] = np.where(
            sub <= entry.threshold, 0, 255
        ).astype(np.uint8)
    return GrayImage(mask)
