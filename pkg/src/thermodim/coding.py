"""Symbolic machinery for coded systems: rectangles, transition matrices,
cylinder sets and quasi-conformality diagnostics.

Two concrete geometries back the same word algebra:

* ``LeafCoding`` - a one-dimensional Markov interval system along an
  expanding leaf (branch intervals, monotone inverse branches).  Used for
  the interval repellers, for the per-leaf structure of the horseshoe, and
  for the constant-slope interval realization of a subshift (which models
  the leaf dynamics of a toral automorphism).
* ``BoxCoding`` - the full-shift structure of an expanding toral
  endomorphism, whose cylinders are affine images of the unit box.

Points fed to leaf machinery are leaf coordinates (for one-dimensional
ambient systems these coincide with ambient coordinates).
"""

from dataclasses import dataclass, field

import numpy as np

from ._util import wrap_unit
from .errors import ParameterError

WORD_COUNT_BOUND = 10**7


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.hi >= self.lo:
            raise ParameterError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def length(self):
        return self.hi - self.lo

    def contains(self, x, tol=1e-12):
        return self.lo - tol <= x <= self.hi + tol

    def contains_interval(self, other, tol=1e-12):
        return self.lo - tol <= other.lo and other.hi <= self.hi + tol

    def mesh(self, count):
        return np.linspace(self.lo, self.hi, count)


@dataclass(frozen=True)
class BoxRegion:
    """Affine image of the unit box: {anchor + basis @ u : u in [0,1]^d}."""

    anchor: np.ndarray
    basis: np.ndarray

    def contains_point(self, p, tol=1e-9):
        u = np.linalg.solve(self.basis, np.asarray(p, float) - self.anchor)
        return bool(np.all(u >= -tol) and np.all(u <= 1.0 + tol))

    def contains_region(self, other, tol=1e-9):
        return all(self.contains_point(c, tol) for c in other.corners())

    def corners(self):
        d = len(self.anchor)
        cs = []
        for mask in range(2**d):
            u = np.array([(mask >> i) & 1 for i in range(d)], float)
            cs.append(self.anchor + self.basis @ u)
        return cs

    def mesh(self, per_dim):
        d = len(self.anchor)
        axes = [np.linspace(0.0, 1.0, per_dim) for _ in range(d)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        return self.anchor + grid @ self.basis.T

    @property
    def diameter(self):
        return float(np.linalg.norm(self.basis @ np.ones(len(self.anchor))))


class LeafCoding:
    """Markov interval system: branch i occupies ``intervals[i]``,
    ``forward`` is the expanding (lifted) leaf map and ``inverse_branch(i, y)``
    its orientation-preserving right inverse with range ``intervals[i]``."""

    def __init__(self, intervals, transition, forward, inverse_branch,
                 reduce=None, forward_batch=None, branch_forward=None):
        self.intervals = list(intervals)
        self.transition = np.asarray(transition, dtype=int)
        self.n_symbols = len(self.intervals)
        if self.transition.shape != (self.n_symbols, self.n_symbols):
            raise ParameterError("transition shape does not match symbol count")
        self._forward = forward
        self._inverse_branch = inverse_branch
        self._reduce = reduce if reduce is not None else (lambda x: x)
        self._forward_batch = forward_batch
        self._branch_forward = branch_forward

    def forward_word(self, xs, word):
        """Evolve points through the branches prescribed by a word (exact on
        a cylinder, immune to boundary-attribution roundoff).  Returns the
        lifted images after len(word) steps."""
        cur = np.asarray(xs, float)
        for s in word:
            if self._branch_forward is not None:
                cur = self._branch_forward(s, cur)
            else:
                cur = self.forward_batch(cur)
        return cur

    def forward(self, x):
        return self._forward(x)

    def forward_batch(self, xs):
        if self._forward_batch is not None:
            return self._forward_batch(np.asarray(xs, float))
        return np.array([self._forward(float(x)) for x in np.asarray(xs, float)])

    def symbol_of(self, x, tol=1e-9):
        x = self._reduce(float(x))
        best, best_err = None, np.inf
        for i, iv in enumerate(self.intervals):
            if iv.contains(x, tol):
                err = max(iv.lo - x, x - iv.hi, 0.0)
                if err < best_err:
                    best, best_err = i, err
        if best is None:
            raise ParameterError(f"point {x} lies in no branch interval")
        return best

    def itinerary(self, x, depth, tol=1e-9):
        """Symbols of x, f(x), ..., f^(depth-1)(x), clamping into the located
        branch interval at each step to arrest float drift."""
        word = []
        y = self._reduce(float(x))
        for _ in range(depth):
            s = self.symbol_of(y, tol)
            iv = self.intervals[s]
            y = min(max(y, iv.lo), iv.hi)
            word.append(s)
            y = self._reduce(self._forward(y))
        return tuple(word)

    def contains_invariant(self, x, depth=16, tol=1e-9):
        y = self._reduce(float(x))
        for _ in range(depth):
            hit = None
            for i, iv in enumerate(self.intervals):
                if iv.contains(y, tol):
                    hit = i
                    break
            if hit is None:
                return False
            iv = self.intervals[hit]
            y = self._reduce(self._forward(min(max(y, iv.lo), iv.hi)))
        return True

    def cylinder(self, word):
        word = tuple(word)
        _check_admissible(self.transition, word)
        lo, hi = self.intervals[word[-1]].lo, self.intervals[word[-1]].hi
        for s in reversed(word[:-1]):
            lo, hi = self._inverse_branch(s, lo), self._inverse_branch(s, hi)
        return Interval(lo, hi)

    def anchor(self, word):
        return self.cylinder(word).lo

    def measured_transition(self, samples=64):
        """0/1 matrix from sampled branch images; oracle for the declared one."""
        out = np.zeros_like(self.transition)
        for i, iv in enumerate(self.intervals):
            pad = 1e-9 * max(iv.length, 1.0)
            xs = np.linspace(iv.lo + pad, iv.hi - pad, samples)
            ys = [self._reduce(self._forward(float(x))) for x in xs]
            for j, jv in enumerate(self.intervals):
                if any(jv.contains(y, 1e-9) for y in ys):
                    out[i, j] = 1
        return out


def affine_leaf(branch_intervals, images, transition):
    """Leaf coding whose branch i is the affine orientation-preserving
    bijection ``branch_intervals[i] -> images[i]``.

    The forward map is totalized by nearest-branch clamping: points pushed
    off the branch domains by float drift along long orbits are clamped into
    the closest branch before the affine formula is applied (exact on the
    branch domains themselves).
    """
    ivs = [iv if isinstance(iv, Interval) else Interval(*iv) for iv in branch_intervals]
    ims = [im if isinstance(im, Interval) else Interval(*im) for im in images]
    slopes = np.array([im.length / iv.length for im, iv in zip(ims, ivs)])
    if np.any(slopes <= 1.0):
        raise ParameterError("affine leaf branches must be expanding (slope > 1)")
    los = np.array([iv.lo for iv in ivs])
    his = np.array([iv.hi for iv in ivs])
    imlos = np.array([im.lo for im in ims])

    def nearest_branch(x):
        dist = np.maximum(los - x, 0.0) + np.maximum(x - his, 0.0)
        return int(np.argmin(dist))

    def forward(x):
        x = float(x)
        i = nearest_branch(x)
        xi = min(max(x, los[i]), his[i])
        return imlos[i] + slopes[i] * (xi - los[i])

    def forward_batch(xs):
        xs = np.asarray(xs, float)
        dist = np.maximum(los[None, :] - xs[:, None], 0.0) \
            + np.maximum(xs[:, None] - his[None, :], 0.0)
        branch = np.argmin(dist, axis=1)
        xi = np.clip(xs, los[branch], his[branch])
        return imlos[branch] + slopes[branch] * (xi - los[branch])

    def inverse_branch(i, y):
        return los[i] + (float(y) - imlos[i]) / slopes[i]

    def branch_forward(i, xs):
        return imlos[i] + slopes[i] * (np.asarray(xs, float) - los[i])

    return LeafCoding(ivs, transition, forward, inverse_branch,
                      forward_batch=forward_batch, branch_forward=branch_forward)


def tiling_leaf(transition):
    """Constant-slope interval realization of a mixing subshift: state
    intervals sized by the Perron eigenvector tile [0, 1), each mapping
    affinely (slope = spectral radius) onto the span of its successors.

    Requires each row's successor set to be contiguous in symbol order.
    """
    a = np.asarray(transition, dtype=float)
    n = a.shape[0]
    evals, evecs = np.linalg.eig(a)
    k = int(np.argmax(evals.real))
    rho = float(evals[k].real)
    h = np.abs(evecs[:, k].real)
    h = h / h.sum()
    cuts = np.concatenate([[0.0], np.cumsum(h)])
    cuts[-1] = 1.0
    ivs = [Interval(cuts[i], cuts[i + 1]) for i in range(n)]
    images = []
    for i in range(n):
        succ = np.nonzero(a[i] > 0)[0]
        if len(succ) == 0 or not np.array_equal(succ, np.arange(succ[0], succ[-1] + 1)):
            raise ParameterError(
                "tiling realization needs contiguous successor sets per row")
        images.append(Interval(cuts[succ[0]], cuts[succ[-1] + 1]))
    return affine_leaf(ivs, images, transition), rho


def circle_leaf(lift, breaks, transition, solver_tol=1e-14):
    """Full-branch expanding circle map given by a monotone lift.

    ``breaks`` are the branch endpoints 0 = b_0 < ... < b_N = 1 with
    lift(b_i) = i; branch i maps [b_i, b_{i+1}] onto [i, i+1] (mod 1 covers
    the whole circle).
    """
    from scipy.optimize import brentq

    breaks = np.asarray(breaks, float)
    nb = len(breaks) - 1
    ivs = [Interval(breaks[i], breaks[i + 1]) for i in range(nb)]

    def reduce(x):
        return float(x) % 1.0

    def inverse_branch(i, y):
        target = float(y) + i
        return brentq(lambda z: lift(z) - target, breaks[i], breaks[i + 1],
                      xtol=solver_tol)

    def forward_batch(xs):
        return lift(np.asarray(xs, float))

    return LeafCoding(ivs, transition, lambda x: lift(float(x)), inverse_branch,
                      reduce=reduce, forward_batch=forward_batch,
                      branch_forward=lambda i, xs: lift(np.asarray(xs, float)))


class BoxCoding:
    """Full-shift coding of an expanding integer toral endomorphism whose
    lattice A Z^d equals diag(moduli) Z^d; symbols are the coset carries."""

    def __init__(self, matrix, moduli):
        self.matrix = np.asarray(matrix, dtype=float)
        self.matrix_int = np.asarray(matrix, dtype=int)
        self.inv = np.linalg.inv(self.matrix)
        self.moduli = tuple(int(m) for m in moduli)
        self.degree = abs(int(round(np.linalg.det(self.matrix))))
        if self.degree != int(np.prod(self.moduli)):
            raise ParameterError("moduli do not enumerate the coset carries")
        self.reps = [np.array([i, j], float)
                     for i in range(self.moduli[0]) for j in range(self.moduli[1])]
        self.n_symbols = self.degree
        self.transition = np.ones((self.degree, self.degree), dtype=int)

    def symbol_of(self, x, tol=1e-9):
        w = np.floor(self.matrix @ wrap_unit(x) + tol).astype(int)
        i = w[0] % self.moduli[0]
        j = w[1] % self.moduli[1]
        return int(i * self.moduli[1] + j)

    def itinerary(self, x, depth, tol=1e-9):
        word = []
        y = wrap_unit(x)
        for _ in range(depth):
            word.append(self.symbol_of(y, tol))
            y = wrap_unit(self.matrix @ y)
        return tuple(word)

    def anchor(self, word):
        a = np.zeros(2)
        for s in reversed(word):
            a = wrap_unit(self.inv @ (a + self.reps[s]))
        return a

    def cylinder(self, word):
        a = np.zeros(2)
        basis = np.eye(2)
        for s in reversed(word):
            a = self.inv @ (a + self.reps[s])
            basis = self.inv @ basis
        return BoxRegion(anchor=a, basis=basis)


@dataclass(frozen=True)
class CylinderRatio:
    z: object
    n: int
    k: int
    bundle: str
    lambda_lower: float
    lambda_upper: float

    def __post_init__(self):
        if not (0.0 < self.lambda_lower <= self.lambda_upper * (1 + 1e-12)):
            raise ParameterError(
                f"invalid cylinder ratio bounds {self.lambda_lower}, {self.lambda_upper}")

    @property
    def ratio(self):
        return self.lambda_upper / self.lambda_lower


@dataclass
class MarkovCoding:
    """Umbrella over the per-bundle geometric realizations of one subshift.

    ``rectangles`` holds the depth-1 region descriptors, ``transition`` the
    0/1 matrix; cylinder machinery is dispatched per bundle tag.
    """

    n_symbols: int
    transition: np.ndarray
    rectangles: list
    leaf: dict = field(default_factory=dict)     # bundle tag -> LeafCoding
    box: BoxCoding = None                        # full-bundle 2-D machinery
    two_sided: bool = False
    resolution_limit: int = 30

    def has_bundle(self, bundle):
        return bundle in self.leaf or self.box is not None

    def symbol_of(self, z, bundle="unstable"):
        if self.box is not None:
            return self.box.symbol_of(z)
        return self.leaf[bundle].symbol_of(z)

    def itinerary(self, z, depth, bundle="unstable"):
        if self.box is not None:
            return self.box.itinerary(z, depth)
        return self.leaf[bundle].itinerary(z, depth)

    def cylinder_map(self, word, bundle="unstable"):
        word = tuple(int(s) for s in word)
        if len(word) == 0:
            raise ParameterError("cylinder word must be nonempty")
        if len(word) > self.resolution_limit:
            raise ParameterError(
                f"depth {len(word)} exceeds coding resolution limit "
                f"{self.resolution_limit}")
        _check_admissible(self.transition, word)
        if self.box is not None:
            return self.box.cylinder(word)
        return self.leaf[bundle].cylinder(word)

    def leaf_anchor(self, word, bundle="unstable"):
        """Anchor in leaf-section coordinates (1-D float, or a 2-D point for
        full-bundle endomorphism codings)."""
        _check_admissible(self.transition, tuple(word))
        if self.box is not None:
            return self.box.anchor(word)
        return self.leaf[bundle].anchor(word)

    def word_count(self, n):
        a = np.asarray(self.transition, dtype=float)
        if n == 1:
            return self.n_symbols
        return float(np.sum(np.linalg.matrix_power(a, n - 1)))


def _check_admissible(transition, word):
    t = np.asarray(transition)
    for a, b in zip(word[:-1], word[1:]):
        if not t[a, b]:
            raise ParameterError(f"word {word} is not admissible at {a}->{b}")


def enumerate_words(coding, n):
    """All admissible length-n words in lexicographic order.

    The count equals the entry sum of transition^(n-1); enumeration is
    refused above WORD_COUNT_BOUND.
    """
    if n < 1:
        raise ParameterError("word length must be >= 1")
    transition = coding.transition if hasattr(coding, "transition") else np.asarray(coding)
    n_symbols = transition.shape[0]
    expected = float(np.sum(np.linalg.matrix_power(
        np.asarray(transition, float), n - 1))) if n > 1 else n_symbols
    if expected > WORD_COUNT_BOUND:
        raise ParameterError(
            f"{expected:.3g} words of length {n} exceed the enumeration bound "
            f"{WORD_COUNT_BOUND}; use a smaller depth")
    succ = [np.nonzero(transition[i])[0].tolist() for i in range(n_symbols)]
    words = [(i,) for i in range(n_symbols)]
    for _ in range(n - 1):
        words = [w + (j,) for w in words for j in succ[w[-1]]]
    return words


def cylinder(coding, z, depth, bundle="unstable"):
    """Cylinder of the point z to the given word length, on the requested
    invariant-leaf section."""
    if depth < 1:
        raise ParameterError("cylinder depth must be >= 1")
    if depth > coding.resolution_limit:
        raise ParameterError(
            f"depth {depth} exceeds coding resolution limit {coding.resolution_limit}")
    word = coding.itinerary(z, depth, bundle)
    return coding.cylinder_map(word, bundle)


def quasi_conformal_ratio(sys, coding, z, n, k, bundle="unstable",
                          mesh_per_dim=None):
    """Extremal n-step expansion ratios over a deterministic mesh of the
    depth-(n+k) cylinder through z, in leaf-intrinsic distance."""
    if n < 1 or k < 0:
        raise ParameterError("need n >= 1 and k >= 0")
    if n + k > coding.resolution_limit:
        raise ParameterError(
            f"depth {n + k} exceeds coding resolution limit {coding.resolution_limit}")
    word = coding.itinerary(z, n + k, bundle)
    region = coding.cylinder_map(word, bundle)
    if coding.box is not None:
        per_dim = mesh_per_dim or 2**5
        pts = region.mesh(per_dim)
        mat = np.linalg.matrix_power(coding.box.matrix, n)
        imgs = pts @ mat.T
    else:
        per_dim = mesh_per_dim or 2**10
        leaf = coding.leaf[bundle]
        pts = region.mesh(per_dim)[:, None]
        imgs = leaf.forward_word(pts[:, 0], word[:n])[:, None]
    if len(pts) < 2:
        raise ParameterError("sampled cylinder is empty")
    dx = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    dy = np.linalg.norm(imgs[:, None, :] - imgs[None, :, :], axis=-1)
    iu = np.triu_indices(len(pts), k=1)
    dxs, dys = dx[iu], dy[iu]
    ok = dxs > 0
    if not np.any(ok):
        raise ParameterError("sampled cylinder is degenerate")
    ratios = dys[ok] / dxs[ok]
    return CylinderRatio(z=z, n=n, k=k, bundle=bundle,
                         lambda_lower=float(ratios.min()),
                         lambda_upper=float(ratios.max()))
