"""Dynamical-system abstraction and the catalog of analytically solvable
hyperbolic systems and repellers used as ground truth by the rest of the
package.

Every catalog entry wires together a :class:`SmoothSystem` (map, Jacobian,
invariant-set membership), a :class:`BundleFrame` (stable/unstable splitting)
and, for coded families, a :class:`~thermodim.coding.MarkovCoding`.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._util import as_point, euclidean_distance, torus_distance, wrap_unit
from .coding import (BoxCoding, BoxRegion, Interval, MarkovCoding,
                     affine_leaf, circle_leaf, enumerate_words, tiling_leaf)
from .errors import ParameterError

POWER_LIMIT = 2**20


@dataclass(eq=False)
class SmoothSystem:
    """An invertible or expanding map with analytic Jacobian.

    ``forward``/``jacobian`` act on single points; ``forward_batch`` (if set)
    on an (m, d) array.  ``backward`` returns branch-indexed preimages.
    ``metric`` selects the ambient distance ("euclidean", "torus", "circle").
    All callables are pure; instances are safe to share across threads.
    """

    name: str
    params: dict
    ambient_dim: int
    map_kind: str
    metric: str
    domain: str
    forward: callable
    backward: callable
    jacobian: callable
    membership: callable
    constant_derivative: bool
    log_expansion: float             # log sup ||d_x f||
    forward_batch: callable = None
    stable_witness: tuple = None     # (C, lambda) for linear hyperbolic examples
    seed_points: callable = None     # (n, epsilon, budget) -> SeedSample
    invariant_sample: callable = None  # (count, rng) -> points array

    def distance(self, a, b):
        if self.metric == "euclidean":
            return euclidean_distance(as_point(a), as_point(b))
        return torus_distance(as_point(a), as_point(b))

    def orbit(self, x, n):
        """Stacked points x, f(x), ..., f^(n-1)(x) as an (n, d) array."""
        pts = np.empty((n, self.ambient_dim))
        y = as_point(x)
        for i in range(n):
            pts[i] = y
            if i + 1 < n:
                y = as_point(self.forward(y))
        return pts

    def orbit_batch(self, xs, n):
        """Orbits of many points: (m, n, d) array."""
        xs = np.atleast_2d(np.asarray(xs, float))
        if xs.shape[1] != self.ambient_dim:
            xs = xs.reshape(-1, self.ambient_dim)
        out = np.empty((xs.shape[0], n, self.ambient_dim))
        cur = xs.copy()
        for i in range(n):
            out[:, i, :] = cur
            if i + 1 < n:
                if self.forward_batch is not None:
                    cur = np.atleast_2d(self.forward_batch(cur))
                    if cur.ndim == 1:
                        cur = cur[:, None]
                else:
                    cur = np.array([as_point(self.forward(p)) for p in cur])
        return out


@dataclass(eq=False)
class BundleFrame:
    """Orthonormal stable/unstable subspace fields (columns span the bundle)."""

    d_s: int
    d_u: int
    stable_frame: callable
    unstable_frame: callable

    def frame(self, x, bundle):
        if bundle == "stable":
            return np.asarray(self.stable_frame(x), float)
        if bundle == "unstable":
            return np.asarray(self.unstable_frame(x), float)
        raise ParameterError(f"unknown bundle tag {bundle!r}")

    def dim(self, bundle):
        if bundle == "stable":
            return self.d_s
        if bundle == "unstable":
            return self.d_u
        raise ParameterError(f"unknown bundle tag {bundle!r}")


@dataclass(eq=False)
class SeedSample:
    points: np.ndarray
    target_resolution: float
    actual_resolution: float
    warned: bool = False

    @property
    def count(self):
        return len(self.points)


@dataclass(eq=False)
class CatalogRecord:
    """A fully wired catalog system.  ``analytic_dim`` and ``h_top`` are the
    known closed-form values, kept for the test harness and reports."""

    system: SmoothSystem
    frame: BundleFrame
    coding: MarkovCoding = None
    analytic_dim: float = None
    h_top: float = None
    average_conformal: bool = True
    leaf_embed: dict = field(default_factory=dict)  # bundle -> leaf coord -> ambient

    @property
    def name(self):
        return self.system.name

    def bundles(self):
        tags = []
        if self.frame.d_u >= 1:
            tags.append("unstable")
        if self.frame.d_s >= 1:
            tags.append("stable")
        return tags

    def ambient_anchor(self, word, bundle="unstable"):
        """Ambient point realizing the word's cylinder anchor."""
        a = self.coding.leaf_anchor(word, bundle)
        if bundle in self.leaf_embed:
            return self.leaf_embed[bundle](a)
        return as_point(a)


def _anchor_table(leaf, depth):
    """Leaf anchors of all admissible depth-`depth` words, keyed by word.

    Built level by level so each inverse-branch evaluation is done once per
    distinct suffix (matters for non-affine branches).
    """
    succ = [np.nonzero(leaf.transition[i])[0].tolist()
            for i in range(leaf.n_symbols)]
    table = {(i,): leaf.intervals[i].lo for i in range(leaf.n_symbols)}
    for _ in range(depth - 1):
        nxt = {}
        for word, a in table.items():
            for i in range(leaf.n_symbols):
                if word[0] in succ[i]:
                    nxt[(i,) + word] = leaf._inverse_branch(i, a)
        table = nxt
    return table


def _leaf_anchor_points(leaf, depth):
    return np.array(sorted(_anchor_table(leaf, depth).values()))


def _coded_1d_seeds(leaf, log_expansion, slope_min, budget):
    def seeds(n, epsilon, budget_=None):
        cap = budget_ or budget
        target = epsilon * math.exp(-(n - 1) * log_expansion) / 4.0
        depth = max(2, math.ceil(math.log(1.0 / target) / math.log(slope_min)))
        warned = False
        while leaf.n_symbols**depth > cap and depth > 2:
            depth -= 1
            warned = True
        pts = _leaf_anchor_points(leaf, depth)
        actual = slope_min ** (-depth)
        return SeedSample(pts[:, None], target, actual, warned)
    return seeds


def _random_words(transition, depth, count, rng):
    succ = [np.nonzero(np.asarray(transition)[i])[0]
            for i in range(np.asarray(transition).shape[0])]
    words = []
    for _ in range(count):
        s = int(rng.integers(0, len(succ)))
        w = [s]
        for _ in range(depth - 1):
            s = int(succ[s][rng.integers(0, len(succ[s]))])
            w.append(s)
        words.append(tuple(w))
    return words


def _jacobian_fd_ready(system):
    return system  # placeholder hook; finite-difference checks live in tests


# ---------------------------------------------------------------------------
# interval repellers

def _interval_repeller(name, params, branch_intervals, slopes, analytic_dim):
    ivs = [Interval(*iv) for iv in branch_intervals]
    n_sym = len(ivs)
    transition = np.ones((n_sym, n_sym), dtype=int)
    leaf = affine_leaf(ivs, [Interval(0.0, 1.0)] * n_sym, transition)
    slopes = np.asarray(slopes, float)

    def locate(x):
        x = float(x)
        dist = [max(iv.lo - x, 0.0, x - iv.hi) for iv in ivs]
        return int(np.argmin(dist))

    def forward(x):
        x = as_point(x)
        return as_point(leaf.forward(float(x[0])))

    def forward_batch(xs):
        return leaf.forward_batch(np.asarray(xs, float).reshape(-1))[:, None]

    def backward(y):
        y = float(as_point(y)[0])
        if not 0.0 - 1e-12 <= y <= 1.0 + 1e-12:
            raise ParameterError(f"{name}: {y} is outside [0, 1]")
        return {i: as_point(leaf._inverse_branch(i, y)) for i in range(n_sym)}

    def jacobian(x):
        return np.array([[slopes[locate(float(as_point(x)[0]))]]])

    def membership(x, tol=1e-9):
        return leaf.contains_invariant(float(as_point(x)[0]), depth=16, tol=tol)

    system = SmoothSystem(
        name=name, params=params, ambient_dim=1,
        map_kind="expanding-endomorphism", metric="euclidean",
        domain="unit interval with branch domains",
        forward=forward, backward=backward, jacobian=jacobian,
        membership=membership,
        constant_derivative=bool(np.all(slopes == slopes[0])),
        log_expansion=float(np.log(slopes.max())),
        forward_batch=forward_batch,
    )
    system.seed_points = _coded_1d_seeds(leaf, system.log_expansion,
                                         float(slopes.min()), 250_000)

    def invariant_sample(count, rng):
        depth = 14
        words = _random_words(transition, depth, count, rng)
        return np.array([leaf.anchor(w) for w in words])[:, None]

    system.invariant_sample = invariant_sample

    frame = BundleFrame(d_s=0, d_u=1,
                        stable_frame=lambda x: np.zeros((1, 0)),
                        unstable_frame=lambda x: np.eye(1))
    coding = MarkovCoding(n_symbols=n_sym, transition=transition,
                          rectangles=ivs, leaf={"unstable": leaf})
    return CatalogRecord(system=system, frame=frame, coding=coding,
                         analytic_dim=analytic_dim, h_top=float(np.log(n_sym)))


def cantor_repeller(slope=3.0):
    slope = float(slope)
    if slope <= 1.0:
        raise ParameterError(
            f"cantor_repeller: slope must exceed 1 for expansion, got {slope}")
    if slope <= 2.0:
        raise ParameterError(
            f"cantor_repeller: slope must exceed 2 so the two affine branches "
            f"are disjoint, got {slope}")
    dim = math.log(2.0) / math.log(slope)
    return _interval_repeller(
        "cantor_repeller", {"slope": slope},
        [(0.0, 1.0 / slope), (1.0 - 1.0 / slope, 1.0)], [slope, slope], dim)


def _moran_root(ratios, tol=1e-14):
    """Root of sum(r_i^s) = 1 by bisection (contraction ratios r_i < 1)."""
    ratios = np.asarray(ratios, float)
    lo, hi = 0.0, 1.0
    f = lambda s: float(np.sum(ratios**s) - 1.0)
    while f(hi) > 0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def cookie_cutter(slopes=(3.0, 4.0)):
    s0, s1 = (float(s) for s in slopes)
    if s0 <= 1.0 or s1 <= 1.0:
        raise ParameterError(
            f"cookie_cutter: slopes must exceed 1 for expansion, got {slopes}")
    if 1.0 / s0 + 1.0 / s1 >= 1.0:
        raise ParameterError(
            f"cookie_cutter: branch domains overlap for slopes {slopes} "
            f"(need 1/s0 + 1/s1 < 1)")
    dim = _moran_root([1.0 / s0, 1.0 / s1])
    return _interval_repeller(
        "cookie_cutter", {"slopes": (s0, s1)},
        [(0.0, 1.0 / s0), (1.0 - 1.0 / s1, 1.0)], [s0, s1], dim)


# ---------------------------------------------------------------------------
# linear horseshoe

def linear_horseshoe(contraction=1.0 / 3.0, expansion=3.0, branches=2):
    c, e, nb = float(contraction), float(expansion), int(branches)
    if nb < 2:
        raise ParameterError("linear_horseshoe: need at least 2 branches")
    if e <= 1.0:
        raise ParameterError(
            f"linear_horseshoe: expansion must exceed 1, got {e}")
    if not 0.0 < c < 1.0:
        raise ParameterError(
            f"linear_horseshoe: contraction must lie in (0, 1), got {c}")
    if e < nb:
        raise ParameterError(
            f"linear_horseshoe: {nb} branch strips of width 1/{e} do not fit")
    if c * nb > 1.0:
        raise ParameterError(
            f"linear_horseshoe: {nb} image strips of height {c} do not fit")
    a = np.array([i * (1.0 - 1.0 / e) / (nb - 1) for i in range(nb)])
    b = np.array([i * (1.0 - c) / (nb - 1) for i in range(nb)])
    transition = np.ones((nb, nb), dtype=int)
    leaf_u = affine_leaf([(a[i], a[i] + 1.0 / e) for i in range(nb)],
                         [Interval(0.0, 1.0)] * nb, transition)
    leaf_s = affine_leaf([(b[i], b[i] + c) for i in range(nb)],
                         [Interval(0.0, 1.0)] * nb, transition)

    def locate_x(x):
        # nearest strip; clamping keeps long float orbits on the model
        dist = np.maximum(a - x, 0.0) + np.maximum(x - (a + 1.0 / e), 0.0)
        return int(np.argmin(dist))

    def forward(p):
        x, y = as_point(p)
        i = locate_x(x)
        xi = min(max(x, a[i]), a[i] + 1.0 / e)
        return np.array([e * (xi - a[i]), c * y + b[i]])

    def forward_batch(ps):
        ps = np.asarray(ps, float).reshape(-1, 2)
        dist = np.maximum(a[None, :] - ps[:, 0][:, None], 0.0) \
            + np.maximum(ps[:, 0][:, None] - (a + 1.0 / e)[None, :], 0.0)
        br = np.argmin(dist, axis=1)
        xi = np.clip(ps[:, 0], a[br], a[br] + 1.0 / e)
        return np.stack([e * (xi - a[br]), c * ps[:, 1] + b[br]], axis=1)

    def backward(p):
        u, v = as_point(p)
        out = {}
        for j in range(nb):
            if b[j] - 1e-12 <= v <= b[j] + c + 1e-12:
                out[j] = np.array([u / e + a[j], (v - b[j]) / c])
        if not out:
            raise ParameterError(
                f"linear_horseshoe: y={v} has no preimage in the image strips")
        return out

    jac = np.array([[e, 0.0], [0.0, c]])

    def membership(p, tol=1e-9):
        x, y = as_point(p)
        return (leaf_u.contains_invariant(x, depth=16, tol=tol)
                and leaf_s.contains_invariant(y, depth=16, tol=tol))

    system = SmoothSystem(
        name="linear_horseshoe",
        params={"contraction": c, "expansion": e, "branches": nb},
        ambient_dim=2, map_kind="diffeomorphism", metric="euclidean",
        domain="unit square, vertical branch strips",
        forward=forward, backward=backward, jacobian=lambda x: jac.copy(),
        membership=membership, constant_derivative=True,
        log_expansion=math.log(e), forward_batch=forward_batch,
        stable_witness=(1.0, c),
    )

    def seeds(n, epsilon, budget=250_000):
        target = epsilon * e ** (-(n - 1)) / 4.0
        du = max(2, math.ceil(math.log(1.0 / target) / math.log(e)))
        ds = max(2, math.ceil(math.log(4.0 / epsilon) / math.log(1.0 / c)))
        warned = False
        while nb**du * nb**ds > budget and du > 2:
            du -= 1
            warned = True
        xs = _leaf_anchor_points(leaf_u, du)
        ys = _leaf_anchor_points(leaf_s, ds)
        grid = np.stack(np.meshgrid(xs, ys, indexing="ij"), -1).reshape(-1, 2)
        return SeedSample(grid, target, e**(-du), warned)

    system.seed_points = seeds

    def invariant_sample(count, rng):
        wu = _random_words(transition, 12, count, rng)
        ws = _random_words(transition, 12, count, rng)
        return np.array([[leaf_u.anchor(w1), leaf_s.anchor(w2)]
                         for w1, w2 in zip(wu, ws)])

    system.invariant_sample = invariant_sample

    frame = BundleFrame(
        d_s=1, d_u=1,
        stable_frame=lambda x: np.array([[0.0], [1.0]]),
        unstable_frame=lambda x: np.array([[1.0], [0.0]]))
    rects = [BoxRegion(anchor=np.array([a[i], 0.0]),
                       basis=np.diag([1.0 / e, 1.0])) for i in range(nb)]
    coding = MarkovCoding(n_symbols=nb, transition=transition, rectangles=rects,
                          leaf={"unstable": leaf_u, "stable": leaf_s},
                          two_sided=True)
    rec = CatalogRecord(
        system=system, frame=frame, coding=coding,
        analytic_dim=math.log(nb) / math.log(e) + math.log(nb) / math.log(1.0 / c),
        h_top=math.log(nb))
    rec.leaf_embed = {
        "unstable": lambda t: np.array([float(t), 0.0]),
        "stable": lambda t: np.array([0.0, float(t)]),
    }
    return rec


# ---------------------------------------------------------------------------
# toral automorphism (cat map)

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0
CAT_MATRIX = np.array([[2.0, 1.0], [1.0, 1.0]])
CAT_LAMBDA = (3.0 + math.sqrt(5.0)) / 2.0

# two-block recoding of the golden-mean shift under its square: a 0/1 vertex
# shift with spectral radius exactly (3+sqrt(5))/2, realizing the leaf
# subdivision structure of the cat map
CAT_SFT = np.array([[1, 1, 1], [1, 1, 0], [1, 1, 1]], dtype=int)


def cat_map():
    A = CAT_MATRIX
    Ainv = np.linalg.inv(A)
    vu = np.array([GOLDEN, 1.0])
    vu = vu / np.linalg.norm(vu)
    vs = np.array([1.0 - GOLDEN, 1.0])
    vs = vs / np.linalg.norm(vs)

    def forward(x):
        return wrap_unit(A @ as_point(x))

    def forward_batch(xs):
        return wrap_unit(np.asarray(xs, float).reshape(-1, 2) @ A.T)

    def backward(x):
        return {0: wrap_unit(Ainv @ as_point(x))}

    leaf, rho = tiling_leaf(CAT_SFT)
    assert abs(rho - CAT_LAMBDA) < 1e-12

    system = SmoothSystem(
        name="cat_map", params={}, ambient_dim=2, map_kind="diffeomorphism",
        metric="torus", domain="2-torus",
        forward=forward, backward=backward, jacobian=lambda x: A.copy(),
        membership=lambda x, tol=1e-9: True,
        constant_derivative=True, log_expansion=math.log(CAT_LAMBDA),
        forward_batch=forward_batch,
        stable_witness=(1.0, 1.0 / CAT_LAMBDA),
    )

    def seeds(n, epsilon, budget=250_000):
        target = epsilon * CAT_LAMBDA ** (-(n - 1)) / 4.0
        count = int(math.ceil(1.0 / target))
        warned = count > budget
        count = min(count, budget)
        t = np.linspace(0.0, 1.0, count, endpoint=False)
        return SeedSample(wrap_unit(t[:, None] * vu), target, 1.0 / count, warned)

    system.seed_points = seeds
    system.invariant_sample = lambda count, rng: rng.random((count, 2))

    frame = BundleFrame(
        d_s=1, d_u=1,
        stable_frame=lambda x: vs.reshape(2, 1).copy(),
        unstable_frame=lambda x: vu.reshape(2, 1).copy())
    coding = MarkovCoding(n_symbols=3, transition=CAT_SFT,
                          rectangles=list(leaf.intervals),
                          leaf={"unstable": leaf, "stable": leaf},
                          two_sided=True)
    rec = CatalogRecord(system=system, frame=frame, coding=coding,
                        analytic_dim=2.0, h_top=math.log(CAT_LAMBDA))
    rec.leaf_embed = {
        "unstable": lambda t: wrap_unit(float(t) * vu),
        "stable": lambda t: wrap_unit(float(t) * vs),
    }
    return rec


# ---------------------------------------------------------------------------
# expanding toral endomorphisms

def _toral_endomorphism(name, params, matrix, moduli, average_conformal):
    M = np.asarray(matrix, float)
    box = BoxCoding(M, moduli)

    def forward(x):
        return wrap_unit(M @ as_point(x))

    def forward_batch(xs):
        return wrap_unit(np.asarray(xs, float).reshape(-1, 2) @ M.T)

    def backward(x):
        x = as_point(x)
        return {s: wrap_unit(box.inv @ (x + box.reps[s]))
                for s in range(box.degree)}

    log_exp = float(np.log(np.linalg.norm(M, 2)))
    system = SmoothSystem(
        name=name, params=params, ambient_dim=2,
        map_kind="expanding-endomorphism", metric="torus", domain="2-torus",
        forward=forward, backward=backward, jacobian=lambda x: M.copy(),
        membership=lambda x, tol=1e-9: True,
        constant_derivative=True, log_expansion=log_exp,
        forward_batch=forward_batch,
    )

    def seeds(n, epsilon, budget=250_000):
        target = epsilon * math.exp(-(n - 1) * log_exp) / 4.0
        m = int(math.ceil(1.0 / target))
        cap = int(math.sqrt(budget))
        warned = m > cap
        m = min(m, cap)
        t = np.arange(m) / m
        grid = np.stack(np.meshgrid(t, t, indexing="ij"), -1).reshape(-1, 2)
        return SeedSample(grid, target, 1.0 / m, warned)

    system.seed_points = seeds
    system.invariant_sample = lambda count, rng: rng.random((count, 2))

    frame = BundleFrame(d_s=0, d_u=2,
                        stable_frame=lambda x: np.zeros((2, 0)),
                        unstable_frame=lambda x: np.eye(2))
    rects = [box.cylinder((s,)) for s in range(box.degree)]
    coding = MarkovCoding(n_symbols=box.degree, transition=box.transition,
                          rectangles=rects, box=box)
    h = float(np.log(box.degree))
    return CatalogRecord(system=system, frame=frame, coding=coding,
                         analytic_dim=2.0, h_top=h,
                         average_conformal=average_conformal)


def diag_endomorphism(p=2, q=3):
    p, q = int(p), int(q)
    if abs(p) < 2 or abs(q) < 2:
        raise ParameterError(
            f"diag_endomorphism: need integer factors of modulus >= 2, got {(p, q)}")
    rec = _toral_endomorphism(
        "diag_endomorphism", {"p": p, "q": q},
        np.diag([float(p), float(q)]), (abs(p), abs(q)),
        average_conformal=(abs(p) == abs(q)))
    return rec


def jordan_endomorphism():
    # expanding, average conformal (single exponent log 3), but not conformal:
    # the n-step norm/conorm ratio grows polynomially in n
    return _toral_endomorphism(
        "jordan_endomorphism", {}, np.array([[3.0, 3.0], [0.0, 3.0]]), (3, 3),
        average_conformal=True)


# ---------------------------------------------------------------------------
# perturbed doubling map

def perturbed_doubling(eps=0.1):
    eps = float(eps)
    if not 0.0 <= eps < 1.0 / (2.0 * math.pi):
        raise ParameterError(
            f"perturbed_doubling: need 0 <= eps < 1/(2*pi) for expansion, got {eps}")

    def lift(x):
        return 2.0 * x + eps * np.sin(2.0 * math.pi * np.asarray(x, float))

    def dlift(x):
        return 2.0 + 2.0 * math.pi * eps * np.cos(2.0 * math.pi * np.asarray(x, float))

    leaf = circle_leaf(lift, [0.0, 0.5, 1.0], np.ones((2, 2), dtype=int))

    def forward(x):
        return as_point(wrap_unit(float(lift(float(as_point(x)[0])))))

    def forward_batch(xs):
        return wrap_unit(lift(np.asarray(xs, float).reshape(-1)))[:, None]

    def backward(y):
        y = float(as_point(y)[0]) % 1.0
        return {i: as_point(leaf._inverse_branch(i, y) % 1.0) for i in range(2)}

    def jacobian(x):
        return np.array([[float(dlift(float(as_point(x)[0])))]])

    system = SmoothSystem(
        name="perturbed_doubling", params={"eps": eps}, ambient_dim=1,
        map_kind="expanding-endomorphism", metric="circle",
        domain="circle R/Z",
        forward=forward, backward=backward, jacobian=jacobian,
        membership=lambda x, tol=1e-9: True,
        constant_derivative=(eps == 0.0),
        log_expansion=math.log(2.0 + 2.0 * math.pi * eps),
        forward_batch=forward_batch,
    )
    slope_min = 2.0 - 2.0 * math.pi * eps
    system.seed_points = _coded_1d_seeds(leaf, system.log_expansion,
                                         slope_min, 250_000)
    system.invariant_sample = lambda count, rng: rng.random((count, 1))

    frame = BundleFrame(d_s=0, d_u=1,
                        stable_frame=lambda x: np.zeros((1, 0)),
                        unstable_frame=lambda x: np.eye(1))
    coding = MarkovCoding(n_symbols=2, transition=np.ones((2, 2), dtype=int),
                          rectangles=list(leaf.intervals),
                          leaf={"unstable": leaf})
    return CatalogRecord(system=system, frame=frame, coding=coding,
                         analytic_dim=1.0, h_top=math.log(2.0))


# ---------------------------------------------------------------------------
# catalog registry and the power construction

CATALOG = {
    "cantor_repeller": cantor_repeller,
    "cookie_cutter": cookie_cutter,
    "linear_horseshoe": linear_horseshoe,
    "cat_map": cat_map,
    "diag_endomorphism": diag_endomorphism,
    "jordan_endomorphism": jordan_endomorphism,
    "perturbed_doubling": perturbed_doubling,
}

PARAM_DOCS = {
    "cantor_repeller": {"slope": "branch slope (> 2), default 3"},
    "cookie_cutter": {"slopes": "pair of branch slopes, default (3, 4)"},
    "linear_horseshoe": {"contraction": "stable factor in (0, 1), default 1/3",
                         "expansion": "unstable factor (> 1), default 3",
                         "branches": "branch count (>= 2), default 2"},
    "cat_map": {},
    "diag_endomorphism": {"p": "first integer factor (|p| >= 2), default 2",
                          "q": "second integer factor (|q| >= 2), default 3"},
    "jordan_endomorphism": {},
    "perturbed_doubling": {"eps": "perturbation in [0, 1/(2*pi)), default 0.1"},
}


def catalog_system(name, **params):
    """Instantiate a catalog family by name; raises ParameterError for
    unknown names or parameters violating hyperbolicity."""
    if name not in CATALOG:
        known = ", ".join(sorted(CATALOG))
        raise ParameterError(f"unknown system {name!r}; known systems: {known}")
    return CATALOG[name](**params)


def power_system(sys, n):
    """The n-fold iterate as a system: chain-rule Jacobian, same invariant
    set and bundles."""
    n = int(n)
    if n < 1:
        raise ParameterError(f"power_system: need n >= 1, got {n}")
    if n > POWER_LIMIT:
        raise ParameterError(f"power_system: n = {n} exceeds limit {POWER_LIMIT}")
    if n == 1:
        return sys

    def forward(x):
        y = as_point(x)
        for _ in range(n):
            y = as_point(sys.forward(y))
        return y

    forward_batch = None
    if sys.forward_batch is not None:
        def forward_batch(xs):
            cur = np.asarray(xs, float)
            for _ in range(n):
                cur = sys.forward_batch(cur)
            return cur

    def jacobian(x):
        y = as_point(x)
        J = np.eye(sys.ambient_dim)
        for _ in range(n):
            J = np.asarray(sys.jacobian(y)) @ J
            y = as_point(sys.forward(y))
        return J

    def backward(x):
        layers = {(): as_point(x)}
        for _ in range(n):
            nxt = {}
            for word, p in layers.items():
                for br, q in sys.backward(p).items():
                    nxt[(br,) + word] = q
            layers = nxt
        return layers

    out = SmoothSystem(
        name=f"{sys.name}^{n}",
        params=dict(sys.params, power=n),
        ambient_dim=sys.ambient_dim, map_kind=sys.map_kind,
        metric=sys.metric, domain=sys.domain,
        forward=forward, backward=backward, jacobian=jacobian,
        membership=sys.membership, constant_derivative=sys.constant_derivative,
        log_expansion=n * sys.log_expansion, forward_batch=forward_batch,
        stable_witness=None if sys.stable_witness is None else
        (sys.stable_witness[0], sys.stable_witness[1]**n),
    )
    if sys.seed_points is not None:
        out.seed_points = lambda nn, eps, budget=250_000: sys.seed_points(
            (nn - 1) * n + 1, eps, budget)
    out.invariant_sample = sys.invariant_sample
    return out
