"""Independent box-counting dimension estimator.

Point clouds are generated from cylinder anchors of a coding; dimensions come
from the least-squares slope of log N(eps) against log(1/eps) on a geometric
scale ladder, with the grid anchored at the origin.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .coding import enumerate_words
from .errors import ParameterError


@dataclass(eq=False)
class BoxCountTable:
    scales: np.ndarray        # descending
    counts: np.ndarray
    fit_dim: float
    fit_residual: float       # max |fit - data| in log N units

    def rows(self):
        return [(float(s), int(c)) for s, c in zip(self.scales, self.counts)]


def sample_leaf_set(coding, bundle, depth):
    """One anchor per admissible depth-`depth` word, in leaf-section
    coordinates (1-D values for leaf codings, torus points for full-bundle
    endomorphism codings)."""
    words = enumerate_words(coding, depth)
    if coding.box is not None:
        return np.array([coding.box.anchor(w) for w in words])
    leaf = coding.leaf[bundle]
    # anchors level by level, one inverse-branch evaluation per suffix
    succ = [np.nonzero(leaf.transition[i])[0].tolist()
            for i in range(leaf.n_symbols)]
    table = {(i,): leaf.intervals[i].lo for i in range(leaf.n_symbols)}
    for _ in range(depth - 1):
        table = {(i,) + w: leaf._inverse_branch(i, a)
                 for w, a in table.items()
                 for i in range(leaf.n_symbols) if w[0] in succ[i]}
    return np.array([table[w] for w in words])


def _nn_spacing_estimate(pts):
    if pts.shape[1] == 1:
        vals = np.sort(pts[:, 0])
        gaps = np.diff(vals)
        gaps = gaps[gaps > 0]
        return float(gaps.min()) if len(gaps) else 0.0
    from scipy.spatial import cKDTree
    sample = pts
    if len(sample) > 200_000:
        keep = np.random.default_rng(0).choice(len(sample), 200_000, replace=False)
        sample = sample[keep]
    d, _ = cKDTree(sample).query(sample, k=2)
    positive = d[:, 1][d[:, 1] > 0]
    return float(np.min(positive)) if len(positive) else 0.0


def box_dimension(points, scale_ladder):
    """Grid-based box counts (grid anchored at 0) and the regression slope of
    log N versus log(1/eps) over the ladder."""
    pts = np.asarray(points, float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if len(pts) == 0:
        raise ParameterError("box_dimension: empty point set")
    scales = np.sort(np.asarray(scale_ladder, float))[::-1]
    if len(scales) < 2:
        raise ParameterError("box_dimension: need at least 2 scales")
    if np.any(scales <= 0):
        raise ParameterError("box_dimension: scales must be positive")
    spacing = _nn_spacing_estimate(pts)
    if scales.min() < 10.0 * spacing:
        raise ParameterError(
            f"box_dimension: min scale {scales.min():.3g} is below 10x the "
            f"sampling resolution estimate {spacing:.3g}")
    counts = []
    for eps in scales:
        # nudge points sitting within float roundoff of a grid line into the
        # box on their right, so exact self-similar scales count cleanly
        cells = np.floor(pts / eps + 1e-9).astype(np.int64)
        counts.append(len(np.unique(cells, axis=0)))
    counts = np.asarray(counts)
    if np.any(np.diff(counts) < 0):
        raise ParameterError("box_dimension: counts must not decrease as the "
                             "scale shrinks")
    if counts.max() == counts.min():
        raise ParameterError("box_dimension: degenerate ladder (all counts "
                             "equal); widen the scale range")
    x = np.log(1.0 / scales)
    y = np.log(counts.astype(float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.max(np.abs(slope * x + intercept - y)))
    return BoxCountTable(scales=scales, counts=counts,
                         fit_dim=float(slope), fit_residual=resid)


def default_scale_ladder(ratio, k_lo=2, k_hi=6):
    """Geometric ladder ratio^k, k = k_lo..k_hi (ratio defaults to the
    dominant contraction when known, else 1/2)."""
    if not 0.0 < ratio < 1.0:
        raise ParameterError("default_scale_ladder: ratio must lie in (0, 1)")
    return np.array([ratio**k for k in range(k_lo, k_hi + 1)])


def oracle_box_dimension(record, depth=10, k_lo=2, k_hi=6):
    """Box-counting estimate of the invariant set's total dimension.

    Full-bundle codings count torus anchors directly; two-sided systems count
    the product of the unstable and stable leaf samples; one-dimensional
    repellers count the leaf sample itself.
    """
    coding = record.coding
    if coding is None:
        raise ParameterError(f"{record.name} has no coding for the box oracle")
    ratio = math.exp(-record.system.log_expansion)
    if coding.box is not None:
        pts = sample_leaf_set(coding, "unstable", min(depth, 6))
        ladder = default_scale_ladder(0.5, k_lo, min(k_hi, min(depth, 6) - 2))
        return box_dimension(pts, ladder)
    if coding.two_sided and "stable" in coding.leaf:
        d_product = max(4, min(depth, 9))
        while d_product > 4 and coding.word_count(d_product)**2 > 300_000:
            d_product -= 1
        xs = sample_leaf_set(coding, "unstable", d_product)
        ys = sample_leaf_set(coding, "stable", d_product)
        pts = np.array([(x, y) for x, y in itertools.product(xs, ys)])
        ladder = default_scale_ladder(
            ratio, k_lo, max(k_lo + 1, min(k_hi, d_product - 4)))
        return box_dimension(pts, ladder)
    pts = sample_leaf_set(coding, "unstable", depth)
    ladder = default_scale_ladder(ratio, k_lo, k_hi)
    return box_dimension(pts, ladder)
