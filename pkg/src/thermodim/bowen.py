"""Roots of Bowen-type equations: the monotone bracket sequences built from
iterate pressures, the closed-form dimension formula through the equilibrium
measure of the determinant potential, and the assembled dimension report.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .cocycle import cocycle_value, conformality_defect
from .errors import NumericalError, ParameterError
from .pressure import (iterate_cocycle_potential, iterate_pressure,
                       pressure_separated, word_graph)
from .systems import power_system


def _word_det_values(record, bundle, depth):
    """|log det|/d_E of the one-step restricted cocycle at every depth-d
    cylinder anchor, cached on the record (root solvers reuse them)."""
    cache = record.__dict__.setdefault("_word_value_cache", {})
    key = (bundle, depth, "det")
    if key not in cache:
        graph = word_graph(record.coding, depth)
        d_e = record.frame.dim(bundle)
        vals = np.empty(graph.size)
        for i, w in enumerate(graph.words):
            x = record.ambient_anchor(w, bundle)
            cv = cocycle_value(record.system, record.frame, x, 1, bundle)
            vals[i] = abs(cv.log_abs_det) / d_e
        cache[key] = vals
    return cache[key]


def effective_depth(coding, depth, word_budget=50_000):
    """Largest depth <= `depth` whose word count stays within budget."""
    d = int(depth)
    while d > 1 and coding.word_count(d) > word_budget:
        d -= 1
    return d


def _separated_levels(record, bundle, m, base_n, epsilon, budget):
    """Per ladder level: maximal separated sets of the m-th iterate and the
    Birkhoff sums of both iterate potentials over them.

    The scale shrinks with the iterate (epsilon * contraction^(m-1)): the
    Bowen metric of f^m samples every m-th time, so a fixed scale resolves
    only log(1/eps) symbols per window and misses the iterate's full
    complexity (the eps -> 0 limit in the pressure definition does this
    refinement in the theory)."""
    sys, frame = record.system, record.frame
    power = power_system(sys, m)
    eps_m = epsilon * math.exp(-(m - 1) * sys.log_expansion)
    from .pressure import _ladder, max_separated_set
    levels = []
    for n_level in _ladder(base_n):
        if power.seed_points is None:
            raise ParameterError("separated sandwich needs a seed generator")
        seeds = power.seed_points(n_level, eps_m, budget)
        sep = max_separated_set(power, n_level, eps_m, seeds)
        sums = {"sup": np.empty(sep.count), "inf": np.empty(sep.count)}
        for i, p in enumerate(sep.points):
            s_sup = s_inf = 0.0
            y = p
            for _ in range(n_level):
                cv = cocycle_value(sys, frame, y, m, bundle)
                s_sup += iterate_cocycle_potential(cv, bundle, "sup")
                s_inf += iterate_cocycle_potential(cv, bundle, "inf")
                y = np.atleast_1d(np.asarray(power.forward(y), float))
            sums["sup"][i] = s_sup
            sums["inf"][i] = s_inf
        levels.append({"n": n_level, "sums": sums})
    return levels


def _scaled_pressure(levels, side, s):
    from scipy.special import logsumexp
    rows = [(lv["n"], float(logsumexp(s * lv["sums"][side])) / lv["n"])
            for lv in levels]
    if len(rows) < 2:
        return rows[-1][1]
    (n1, v1), (n2, v2) = rows[-2], rows[-1]
    return (n2 * v2 - n1 * v1) / (n2 - n1)


def bowen_root(pressure_fn, s_lo, s_hi, tol=1e-10, max_iter=64):
    """Bisection root of a strictly decreasing pressure function, returned
    once |P| <= tol (at most ``max_iter`` bisections)."""
    p_lo = pressure_fn(s_lo)
    p_hi = pressure_fn(s_hi)
    if not (p_lo > 0.0 > p_hi):
        raise NumericalError(
            "bowen_root",
            f"invalid bracket: P({s_lo}) = {p_lo}, P({s_hi}) = {p_hi} "
            f"(need P > 0 at the left endpoint and P < 0 at the right)")
    samples = [(s_lo, p_lo), (s_hi, p_hi)]
    lo, hi = s_lo, s_hi
    mid, p_mid = lo, p_lo
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        p_mid = pressure_fn(mid)
        samples.append((mid, p_mid))
        if abs(p_mid) <= tol:
            break
        if p_mid > 0.0:
            lo = mid
        else:
            hi = mid
    else:
        raise NumericalError(
            "bowen_root", f"|P| = {abs(p_mid)} above tolerance {tol} "
            f"after {max_iter} bisections")
    samples.sort()
    values = [p for _, p in samples]
    slack = 1e-9 * (1.0 + max(abs(v) for v in values))
    if any(values[i + 1] > values[i] + slack for i in range(len(values) - 1)):
        raise NumericalError("bowen_root",
                             "pressure samples are not monotone decreasing in s")
    return mid


def _auto_bracket(pressure_fn, d_e, tol, widenings=4):
    lo, hi = 0.0, float(d_e + 1)
    for _ in range(widenings + 1):
        try:
            return bowen_root(pressure_fn, lo, hi, tol=tol)
        except NumericalError:
            if pressure_fn(hi) > 0.0:
                hi *= 2.0
            elif pressure_fn(lo) <= 0.0 and lo == 0.0:
                raise
            else:
                raise
    raise NumericalError("bowen_root",
                         f"no sign change found up to s = {hi}")


@dataclass(eq=False)
class BowenBracket:
    """Roots at one doubling level: s from the norm potential, t from the
    conorm potential; s <= t within tolerance, and across levels s is
    non-decreasing while t is non-increasing."""

    k: int
    s_val: float
    t_val: float
    tolerance: float

    def contains(self, value):
        return self.s_val - self.tolerance <= value <= self.t_val + self.tolerance

    @property
    def width(self):
        return self.t_val - self.s_val


def _root_tolerance(pressure_fn, root, residual, tol):
    h = max(1e-4, 1e-3 * max(abs(root), 1.0))
    slope = (pressure_fn(root + h) - pressure_fn(root - h)) / (2.0 * h)
    if slope >= 0.0:
        return max(tol, residual)
    return max(tol, residual) / abs(slope)


def sandwich_sequence(record, bundle, k_max, method="transfer_operator",
                      depth=8, epsilon=0.05, base_n=4, root_tol=1e-10,
                      budget=None):
    """Bowen brackets for the iterates f^(2^k), k = 0..k_max.

    method "transfer_operator": iterate pressures through the coding (exact
    closed evaluation for constant cocycles, one-step weighted operator for
    one-dimensional coded bundles).  method "separated": direct separated-set
    pressure of the power system carrying the iterate potential as an
    additive potential (cost grows like exp(h * n * 2^k); capped at k_max <= 5).
    """
    if method in ("transfer", "transfer_operator"):
        if k_max > 8:
            raise ParameterError("sandwich_sequence: transfer method capped at k_max = 8")
        evaluate = None
    elif method == "separated":
        if k_max > 5:
            raise ParameterError("sandwich_sequence: separated method capped at k_max = 5")
        evaluate = "separated"
    else:
        raise ParameterError(f"sandwich_sequence: unknown method {method!r}")

    sys, frame = record.system, record.frame
    d_e = frame.dim(bundle)
    brackets = []
    for k in range(k_max + 1):
        m = 2**k
        if evaluate is None:
            p_sup = lambda s, m=m: iterate_pressure(record, bundle, m, s, "sup",
                                                    depth=depth)
            p_inf = lambda s, m=m: iterate_pressure(record, bundle, m, s, "inf",
                                                    depth=depth)
            residual = 1e-12
        else:
            # the separated set and the Birkhoff sums of the base potential
            # do not depend on the Bowen parameter, so compute them once per
            # level and let the bisection rescale the exponents
            levels = _separated_levels(record, bundle, m, base_n, epsilon,
                                       budget or 250_000)
            p_sup = lambda s, lv=levels: _scaled_pressure(lv, "sup", s)
            p_inf = lambda s, lv=levels: _scaled_pressure(lv, "inf", s)
            residual = 1e-3
        s_val = _auto_bracket(p_sup, d_e, root_tol)
        t_val = _auto_bracket(p_inf, d_e, root_tol)
        tol_s = _root_tolerance(p_sup, s_val, residual, root_tol)
        tol_t = _root_tolerance(p_inf, t_val, residual, root_tol)
        brackets.append(BowenBracket(k=k, s_val=s_val, t_val=t_val,
                                     tolerance=max(tol_s, tol_t)))
    return brackets


@dataclass(eq=False)
class FormulaDimension:
    r: float
    entropy: float
    det_integral: float
    depth: int
    pressure_residual: float

    def __iter__(self):
        return iter((self.r, self.entropy, self.det_integral))


def dimension_via_formula(record, bundle, depth=10, root_tol=1e-12):
    """Dimension of the bundle's leaf section by solving
    P(-r * (1/d_E) log|det df|_E|) = 0 through the transfer operator.

    The stable bundle uses the inverse-time expansion (the absolute value of
    the one-step log determinant, positive for a uniform contraction), so the
    returned integral is positive for hyperbolic configurations.
    """
    if record.coding is None:
        raise ParameterError(f"{record.name} has no coding; formula route needs one")
    d_e = record.frame.dim(bundle)
    if d_e < 1:
        raise ParameterError(f"bundle {bundle!r} has dimension 0")

    graph = word_graph(record.coding, depth)
    psi_vals = _word_det_values(record, bundle, depth)

    def pressure_fn(r):
        return graph.pressure(-r * psi_vals)[0].value

    r = _auto_bracket(pressure_fn, d_e, root_tol)
    est, eq = graph.pressure(-r * psi_vals)
    psi_integral = float(np.dot(eq.cylinder_weights, psi_vals))
    det_integral = d_e * psi_integral
    if det_integral <= 0.0:
        raise NumericalError(
            "dimension_via_formula",
            f"determinant integral {det_integral} <= 0 signals a "
            f"non-hyperbolic configuration")
    r_formula = eq.entropy * d_e / det_integral
    if abs(r - r_formula) > 1e-8 * max(1.0, abs(r)):
        raise NumericalError(
            "dimension_via_formula",
            f"root {r} and entropy/integral quotient {r_formula} disagree")
    return FormulaDimension(r=r, entropy=eq.entropy, det_integral=det_integral,
                            depth=depth, pressure_residual=abs(est.value))


@dataclass(eq=False)
class BundleReport:
    bundle: str
    formula_dim: float
    formula_applicable: bool
    entropy: float
    det_integral: float
    bracket_history: list
    defect_curve: list

    def to_dict(self):
        return {
            "r": self.formula_dim,
            "formula_applicable": self.formula_applicable,
            "entropy": self.entropy,
            "det_integral": self.det_integral,
            "brackets": [{"k": b.k, "s": b.s_val, "t": b.t_val,
                          "tolerance": b.tolerance} for b in self.bracket_history],
            "defect": [[int(n), float(v)] for n, v in self.defect_curve],
        }


@dataclass(eq=False)
class DimensionReport:
    system: str
    params: dict
    bundles: dict
    total_dim: float
    flags: list
    box_dim_oracle: dict = None
    options: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "system": self.system,
            "params": {k: v for k, v in sorted(self.params.items())},
            "bundles": {tag: rep.to_dict() for tag, rep in sorted(self.bundles.items())},
            "total_dim": self.total_dim,
            "flags": list(self.flags),
            "box_dim_oracle": self.box_dim_oracle,
            "options": {k: self.options[k] for k in sorted(self.options)},
        }


DEFAULT_REPORT_OPTIONS = {
    "depth": 10,
    "k_max": 4,
    "sandwich_method": "transfer_operator",
    "n_check": 64,
    "theta": 0.1,
    "defect_ns": (2, 4, 8, 16, 32, 64),
    "defect_samples": 64,
    "root_tol": 1e-10,
    "epsilon": 0.05,
    "include_boxdim": False,
    "boxdim_depth": 10,
    "seed": 42,
}


def full_report(record, options=None):
    """Assemble formula dimensions, sandwich histories and the defect curve
    for every nontrivial bundle; total dimension is the bundle sum.

    A defect above ``theta`` at ``n_check`` raises the NON_CONFORMAL flag and
    marks the formula values inapplicable (they are still reported).
    """
    opts = dict(DEFAULT_REPORT_OPTIONS)
    if options:
        unknown = set(options) - set(opts)
        if unknown:
            raise ParameterError(f"full_report: unknown options {sorted(unknown)}")
        opts.update(options)
    sys, frame = record.system, record.frame
    rng = np.random.default_rng(opts["seed"])
    sample = sys.invariant_sample(opts["defect_samples"], rng)
    depth = effective_depth(record.coding, opts["depth"]) \
        if record.coding is not None else opts["depth"]

    flags = []
    bundles = {}
    total = 0.0
    for tag in record.bundles():
        ns = sorted(set(int(n) for n in opts["defect_ns"]) | {int(opts["n_check"])})
        curve = [(n, conformality_defect(sys, frame, tag, n, sample)) for n in ns]
        gate = dict(curve)[int(opts["n_check"])]
        applicable = gate <= opts["theta"]
        if not applicable and "NON_CONFORMAL" not in flags:
            flags.append("NON_CONFORMAL")
        formula = dimension_via_formula(record, tag, depth=depth,
                                        root_tol=min(opts["root_tol"], 1e-12))
        brackets = sandwich_sequence(record, tag, opts["k_max"],
                                     method=opts["sandwich_method"],
                                     depth=depth,
                                     epsilon=opts["epsilon"],
                                     root_tol=opts["root_tol"])
        bundles[tag] = BundleReport(
            bundle=tag, formula_dim=formula.r, formula_applicable=applicable,
            entropy=formula.entropy, det_integral=formula.det_integral,
            bracket_history=brackets, defect_curve=curve)
        total += formula.r

    box_table = None
    if opts["include_boxdim"]:
        from .boxdim import oracle_box_dimension
        box_table = oracle_box_dimension(record, depth=opts["boxdim_depth"])
        box_table = {"fit_dim": box_table.fit_dim,
                     "fit_residual": box_table.fit_residual,
                     "scales": [float(s) for s in box_table.scales],
                     "counts": [int(c) for c in box_table.counts]}

    return DimensionReport(
        system=record.name, params=dict(record.system.params),
        bundles=bundles, total_dim=total, flags=flags,
        box_dim_oracle=box_table,
        options={k: (list(v) if isinstance(v, tuple) else v)
                 for k, v in opts.items()})
