"""Derivative cocycle restricted to an invariant bundle, the four
norm/conorm potential sequences, Lyapunov exponents, and the
average-conformality defect.

All n-step products are accumulated with per-step QR re-orthonormalization
and log-magnitude tracking, so quantities stay finite for n far beyond
float overflow of the raw product.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._util import as_point, orthonormalize
from .errors import NumericalError, ParameterError


@dataclass(eq=False)
class CocycleValue:
    """n-step restricted cocycle at a point, in moving orthonormal frames.

    ``restricted_unit`` times exp(``log_scale``) is the actual d_E x d_E
    matrix; op_norm/conorm are its extreme singular values (log form kept
    as the primary representation).
    """

    base_point: np.ndarray
    steps: int
    bundle: str
    restricted_unit: np.ndarray
    log_scale: float
    log_op_norm: float
    log_conorm: float
    log_abs_det: float

    @property
    def restricted(self):
        with np.errstate(over="ignore"):
            return self.restricted_unit * math.exp(self.log_scale) \
                if self.log_scale < 700 else self.restricted_unit * np.inf

    @property
    def op_norm(self):
        return math.exp(self.log_op_norm) if self.log_op_norm < 700 else math.inf

    @property
    def conorm(self):
        return math.exp(self.log_conorm) if self.log_conorm < 700 else math.inf

    @property
    def dim(self):
        return self.restricted_unit.shape[0]


def cocycle_value(sys, frame, x, n, bundle):
    """Transport the bundle frame along the orbit of x and accumulate the
    restricted Jacobian product for n steps."""
    if n < 1:
        raise ParameterError(f"cocycle_value: need n >= 1, got {n}")
    d_e = frame.dim(bundle)
    if d_e < 1:
        raise ParameterError(f"cocycle_value: bundle {bundle!r} has dimension 0")
    x = as_point(x)
    w, _ = orthonormalize(frame.frame(x, bundle))
    acc = np.eye(d_e)
    log_scale = 0.0
    log_det = 0.0
    y = x
    for j in range(n):
        jac = np.asarray(sys.jacobian(y), float)
        q, r = orthonormalize(jac @ w)
        diag = np.abs(np.diag(r))
        if np.any(diag < 1e-13 * max(1.0, float(np.max(diag, initial=0.0)))):
            raise NumericalError(
                "cocycle_value",
                f"frame degenerate at orbit index {j} (principal angle collapse)")
        log_det += float(np.sum(np.log(diag)))
        acc = r @ acc
        scale = float(np.max(np.abs(acc)))
        acc = acc / scale
        log_scale += math.log(scale)
        w = q
        y = as_point(sys.forward(y))
    align = frame.frame(y, bundle).T @ w
    unit = align @ acc
    svals = np.linalg.svd(acc, compute_uv=False)
    return CocycleValue(
        base_point=x, steps=n, bundle=bundle,
        restricted_unit=unit, log_scale=log_scale,
        log_op_norm=float(np.log(svals[0]) + log_scale),
        log_conorm=float(np.log(svals[-1]) + log_scale),
        log_abs_det=log_det,
    )


@dataclass(eq=False)
class PotentialSequence:
    """One of the norm/conorm sequences or the additive determinant
    potential, as an (x, n) evaluator.

    kind "super_norm":  -log ||d_x f^n|_E||        (super-additive)
    kind "sub_conorm":  -log m(d_x f^n|_E)          (sub-additive)
    kind "additive_det": sign * (1/d_E) log|det d_x f^n|_E|   (additive)
    """

    kind: str
    bundle: str
    evaluator: callable
    scale: float = 1.0

    def __call__(self, x, n):
        return self.scale * self.evaluator(x, n)

    def scaled(self, t):
        return PotentialSequence(kind=self.kind, bundle=self.bundle,
                                 evaluator=self.evaluator,
                                 scale=self.scale * float(t))

    @property
    def is_sub_additive(self):
        # scaling by t >= 0 preserves the inequality direction
        if self.scale < 0:
            return self.kind == "super_norm"
        return self.kind in ("sub_conorm", "additive_det")

    @property
    def is_super_additive(self):
        if self.scale < 0:
            return self.kind == "sub_conorm"
        return self.kind in ("super_norm", "additive_det")


def potential_sequence(sys, frame, kind, bundle, det_sign=1.0):
    if kind == "super_norm":
        ev = lambda x, n: -cocycle_value(sys, frame, x, n, bundle).log_op_norm
    elif kind == "sub_conorm":
        ev = lambda x, n: -cocycle_value(sys, frame, x, n, bundle).log_conorm
    elif kind == "additive_det":
        d_e = frame.dim(bundle)
        ev = lambda x, n: det_sign * cocycle_value(
            sys, frame, x, n, bundle).log_abs_det / d_e
    else:
        raise ParameterError(f"unknown potential kind {kind!r}")
    return PotentialSequence(kind=kind, bundle=bundle, evaluator=ev)


@dataclass(eq=False)
class LyapunovEstimate:
    exponents: np.ndarray          # ascending
    partials: np.ndarray           # (N, d_E) running estimates, ascending per row
    converged: bool

    def __iter__(self):
        return iter(self.exponents)


def lyapunov_exponents(sys, frame, x, N, bundle):
    """Bundle Lyapunov exponents by orthogonalized cocycle iteration:
    running means of the log triangular diagonals over N steps."""
    if N < 50:
        raise ParameterError(f"lyapunov_exponents: need N >= 50, got {N}")
    d_e = frame.dim(bundle)
    if d_e < 1:
        raise ParameterError(f"lyapunov_exponents: bundle {bundle!r} is trivial")
    y = as_point(x)
    w, _ = orthonormalize(frame.frame(y, bundle))
    sums = np.zeros(d_e)
    partials = np.empty((N, d_e))
    for j in range(N):
        jac = np.asarray(sys.jacobian(y), float)
        q, r = orthonormalize(jac @ w)
        diag = np.abs(np.diag(r))
        if np.any(diag <= 0.0):
            raise NumericalError("lyapunov_exponents",
                                 f"rank collapse at orbit index {j}")
        sums += np.log(diag)
        partials[j] = np.sort(sums / (j + 1))
        w = q
        y = as_point(sys.forward(y))
    converged = bool(np.max(np.abs(partials[-1] - partials[-2])) <= 1e-2)
    return LyapunovEstimate(exponents=partials[-1].copy(), partials=partials,
                            converged=converged)


def conformality_defect(sys, frame, bundle, n, sample):
    """max over the sample of (log op_norm - log conorm)/n for the n-step
    cocycle; tends to 0 on average conformal systems."""
    sample = np.atleast_2d(np.asarray(sample, float))
    if sample.size == 0:
        raise ParameterError("conformality_defect: sample must be nonempty")
    if n < 1:
        raise ParameterError("conformality_defect: need n >= 1")
    worst = 0.0
    for p in sample:
        cv = cocycle_value(sys, frame, p, n, bundle)
        worst = max(worst, (cv.log_op_norm - cv.log_conorm) / n)
    return worst


def kingman_check(pot, x, N):
    """(phi_N(x)/N, min over n <= N of phi_n(x)/n); the limit estimate
    dominates the infimum estimate for sub-additive sequences."""
    if N < 16:
        raise ParameterError(f"kingman_check: need N >= 16, got {N}")
    values = np.array([pot(x, n) / n for n in range(1, N + 1)])
    return float(values[-1]), float(values.min())


def four_c_constant(pot, sample, m):
    """max over i in 1..2m-1, x in the sample, of |phi_i(x)|."""
    sample = np.atleast_2d(np.asarray(sample, float))
    return max(abs(pot(p, i)) for i in range(1, 2 * m) for p in sample)


def four_c_inequality_check(pot, sys, x, n, m, sample=None, slack=1e-6):
    """Sub-additive: phi_n <= S_n(phi_m/m) + 4C(m); super-additive sequences
    satisfy the reversed bound with -4C(m).

    C(m) is sampled as max |phi_i| over i < 2m (the magnitude bound both
    directions of the block decomposition argument require).
    """
    if not 1 <= m < n:
        raise ParameterError(f"four_c_inequality_check: need 1 <= m < n, got {(n, m)}")
    x = as_point(x)
    if sample is None:
        sample = x[None, :]
    c = four_c_constant(pot, sample, m)
    lhs = pot(x, n)
    y = x
    birkhoff = 0.0
    for _ in range(n):
        birkhoff += pot(y, m) / m
        y = as_point(sys.forward(y))
    if pot.is_sub_additive:
        return bool(lhs <= birkhoff + 4.0 * c + slack)
    if pot.is_super_additive:
        return bool(lhs >= birkhoff - 4.0 * c - slack)
    raise ParameterError(
        f"potential of kind {pot.kind!r} is neither sub- nor super-additive")
