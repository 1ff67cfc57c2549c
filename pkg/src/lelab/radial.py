"""Radial initial-value solver for the Lane-Emden system.

Integrates

    u'' + (N-1)/r u' = -v^p,    v'' + (N-1)/r v' = -u^q,
    u(0) = u0 > 0, v(0) = v0 > 0, u'(0) = v'(0) = 0,

with a Dormand-Prince 5(4) embedded pair, PI step-size control and quartic
dense output.  The removable singularity of the (N-1)/r term is handled by
a series start on [0, r_start]: the even Taylor expansion

    u(r) = u0 - v0^p r^2/(2N) + p v0^{p-1} u0^q r^4 / (8N(N+2)) + O(r^6)

(and symmetrically for v) seeds the stepper at an r_start chosen so the
neglected r^4-remainder is below the local error tolerance.

Trajectories halt at the first zero crossing of u or v (located by
bisection on the dense interpolant) or at r_max.  A profile that stays
positive and decreasing through ``r_target`` with both fields below the
decay threshold is classified entire-positive; true entirety is not
decidable numerically and is certified separately by the decay identity
u(0) = (N-2)^{-1} int_0^inf t v(t)^p dt.

A classical fixed-step RK4 integrator over the same output nodes (10
substeps per node interval by default) serves as the independent reference
for solver verification; it shares only the closed-form series start.
"""

from __future__ import annotations

import bisect as _bisect
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .errors import (
    BracketError,
    ConvergenceError,
    DomainError,
    InvalidOptions,
    MisclassifiedProfile,
    StepUnderflow,
)
from .exponents import ParameterTriple, ScalingData, derive_scaling
from .serialize import to_csv

__all__ = [
    "InitialData",
    "SolverOptions",
    "IntegratorStats",
    "ProfileClass",
    "RadialProfile",
    "integrate",
    "reference_integrate",
    "ShootResult",
    "shoot",
    "rescale",
    "DecayReport",
    "decay_identity_check",
    "ode_residual",
    "profile_to_csv",
    "profile_metadata",
    "profile_from_text",
]

_EPS = np.finfo(float).eps

# Dormand-Prince 5(4) tableau; the propagated solution is 5th order and the
# last row of _A doubles as its weights (FSAL).
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_ERR = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# quartic dense-output matrix (Shampine's interpolant for this pair)
_PD = (
    (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799),
    (0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072),
    (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632),
    (0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844),
    (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423),
)


@dataclass(frozen=True)
class InitialData:
    """Values at the origin; radial regularity forces zero slope there."""

    u0: float
    v0: float

    def __post_init__(self):
        if not (self.u0 > 0.0 and self.v0 > 0.0
                and math.isfinite(self.u0) and math.isfinite(self.v0)):
            raise DomainError("initial values must be positive and finite")


@dataclass(frozen=True)
class SolverOptions:
    rtol: float = 1e-10
    atol: float = 1e-12
    event_tol: float = 1e-12
    min_step: float = 0.0
    max_steps: int = 2_000_000
    r_target: float = 1e6
    decay_threshold: float = 0.05     # relative to max(u0, v0)
    grid_nodes: int = 2048
    v0_tol: float = 1e-13
    shoot_max_iter: int = 200
    polish_probe: float | None = None  # default min(r_target, 1e4)

    def validate(self) -> None:
        for name in ("rtol", "atol", "event_tol", "r_target", "decay_threshold"):
            if not getattr(self, name) > 0.0:
                raise InvalidOptions(f"{name} must be positive")
        if self.min_step < 0.0:
            raise InvalidOptions("min_step must be nonnegative")
        if self.grid_nodes < 16:
            raise InvalidOptions("grid_nodes must be at least 16")
        if self.v0_tol <= 0.0 or self.shoot_max_iter < 1:
            raise InvalidOptions("bad shooting options")


@dataclass(frozen=True)
class IntegratorStats:
    steps: int
    rejected: int
    min_step: float
    max_step: float
    nfev: int


class ProfileClass(Enum):
    ENTIRE_POSITIVE = "EntirePositive"
    U_HITS_ZERO = "UHitsZero"
    V_HITS_ZERO = "VHitsZero"
    TRUNCATED = "Truncated"


@dataclass
class RadialProfile:
    """Sampled radial trajectory on a logarithmic output grid.

    The grid covers [r_start, r_max]; values below r_start come from the
    series start (available through ``dense``).  ``dense`` is an in-memory
    interpolant and is not serialized.
    """

    p: float
    q: float
    N: int
    u0: float
    v0: float
    r: np.ndarray
    u: np.ndarray
    v: np.ndarray
    du: np.ndarray
    dv: np.ndarray
    classification: ProfileClass
    r_event: float | None
    r_max: float
    rtol: float
    atol: float
    stats: IntegratorStats
    dense: Callable[[float], tuple] | None = field(default=None, repr=False)

    @property
    def params(self) -> ParameterTriple:
        return ParameterTriple(self.p, self.q, self.N)


class _TaylorStart:
    """Even series of the regular solution about r = 0, through r^4."""

    def __init__(self, params: ParameterTriple, init: InitialData,
                 opts: SolverOptions):
        p, q, N = params.p, params.q, params.N
        u0, v0 = init.u0, init.v0
        try:
            v0p = v0 ** p
            u0q = u0 ** q
            c4u = p * v0 ** (p - 1.0) * u0q / (8.0 * N * (N + 2.0))
            c4v = q * u0 ** (q - 1.0) * v0p / (8.0 * N * (N + 2.0))
        except OverflowError as exc:
            raise DomainError("initial data too extreme for double precision") from exc
        if not all(map(math.isfinite, (v0p, u0q, c4u, c4v))):
            raise DomainError("initial data too extreme for double precision")
        self.u0, self.v0 = u0, v0
        self.c2u = -v0p / (2.0 * N)
        self.c2v = -u0q / (2.0 * N)
        self.c4u, self.c4v = c4u, c4v
        # r_start: keep the r^4 term below the local tolerance and stay well
        # inside the positivity region r_char where the r^2 term is small
        tol_u = opts.atol + opts.rtol * u0
        tol_v = opts.atol + opts.rtol * v0
        r4u = (tol_u / max(c4u, 1e-290)) ** 0.25
        r4v = (tol_v / max(c4v, 1e-290)) ** 0.25
        r_char = math.sqrt(2.0 * N * min(u0 / v0p, v0 / u0q))
        self.r_start = max(min(r4u, r4v, 0.05 * r_char), 1e-290)

    def eval(self, r: float) -> tuple:
        r2 = r * r
        u = self.u0 + self.c2u * r2 + self.c4u * r2 * r2
        v = self.v0 + self.c2v * r2 + self.c4v * r2 * r2
        du = 2.0 * self.c2u * r + 4.0 * self.c4u * r2 * r
        dv = 2.0 * self.c2v * r + 4.0 * self.c4v * r2 * r
        return (u, du, v, dv)


def _make_rhs(params: ParameterTriple):
    p, q, N = params.p, params.q, params.N
    nm1 = N - 1.0

    def rhs(r: float, y: tuple) -> tuple:
        u, du, v, dv = y
        vp = v ** p if v > 0.0 else 0.0
        uq = u ** q if u > 0.0 else 0.0
        inv = nm1 / r
        return (du, -vp - inv * du, dv, -uq - inv * dv)

    return rhs


class _Dense:
    """Piecewise interpolant: series on [0, r_start], step quartics beyond."""

    def __init__(self, taylor: _TaylorStart, starts, steps, y0s, qmats):
        self.taylor = taylor
        self.starts = starts    # list of step left endpoints
        self.steps = steps      # list of step sizes
        self.y0s = y0s
        self.qmats = qmats      # per step: 4x4 rows=component, cols=theta powers
        self.r_end = starts[-1] + steps[-1] if starts else taylor.r_start

    def __call__(self, r: float) -> tuple:
        if r < self.taylor.r_start:
            if r < 0.0:
                raise DomainError("negative radius")
            return self.taylor.eval(r)
        if r > self.r_end * (1.0 + 4.0 * _EPS):
            raise DomainError(f"radius {r} beyond integrated range {self.r_end}")
        i = _bisect.bisect_right(self.starts, r) - 1
        i = max(0, min(i, len(self.starts) - 1))
        h = self.steps[i]
        th = (r - self.starts[i]) / h
        th = min(max(th, 0.0), 1.0)
        y0 = self.y0s[i]
        qm = self.qmats[i]
        out = []
        for d in range(4):
            c = qm[d]
            out.append(y0[d] + h * th * (c[0] + th * (c[1] + th * (c[2] + th * c[3]))))
        return tuple(out)


def _interp_component(y0d: float, h: float, c: tuple, th: float) -> float:
    return y0d + h * th * (c[0] + th * (c[1] + th * (c[2] + th * c[3])))


def integrate(params: ParameterTriple, init: InitialData, r_max: float,
              opts: SolverOptions | None = None) -> RadialProfile:
    """Adaptive integration from the origin; see module docstring."""
    opts = SolverOptions() if opts is None else opts
    opts.validate()
    if not (r_max > 0.0 and math.isfinite(r_max)):
        raise DomainError("r_max must be positive and finite")
    taylor = _TaylorStart(params, init, opts)
    if taylor.r_start >= r_max:
        raise DomainError(f"r_max={r_max} is inside the series-start region")
    rhs = _make_rhs(params)
    rtol, atol = opts.rtol, opts.atol

    r = taylor.r_start
    y = taylor.eval(r)
    f0 = rhs(r, y)
    nfev = 1
    h = 0.1 * r
    facold = 1e-4
    naccept = nreject = 0
    hmin_seen = math.inf
    hmax_seen = 0.0
    starts: list[float] = []
    steps: list[float] = []
    y0s: list[tuple] = []
    qmats: list[tuple] = []
    event_kind: ProfileClass | None = None
    r_event: float | None = None
    y_end = y
    r_end = r

    while r < r_max:
        h = min(h, r_max - r)
        if h < max(opts.min_step, 16.0 * _EPS * r):
            raise StepUnderflow(
                f"step {h:.3e} below floor at r={r:.6e} "
                f"(min_step={opts.min_step})"
            )
        if naccept + nreject >= opts.max_steps:
            raise ConvergenceError(f"more than {opts.max_steps} steps")
        K = [f0]
        yi = y
        for i in range(1, 7):
            a = _A[i]
            yi = tuple(
                y[d] + h * math.fsum(a[j] * K[j][d] for j in range(i))
                for d in range(4)
            )
            K.append(rhs(r + _C[i] * h, yi))
        nfev += 6
        y1 = yi  # stage 6 uses the 5th-order weights
        err = 0.0
        for d in range(4):
            e = h * math.fsum(_ERR[j] * K[j][d] for j in range(7))
            sc = atol + rtol * max(abs(y[d]), abs(y1[d]))
            err += (e / sc) ** 2
        err = math.sqrt(err / 4.0)

        if err <= 1.0:
            # accept: store dense output for this step
            qm = tuple(
                tuple(
                    math.fsum(K[j][d] * _PD[j][col] for j in range(7))
                    for col in range(4)
                )
                for d in range(4)
            )
            starts.append(r)
            steps.append(h)
            y0s.append(y)
            qmats.append(qm)
            naccept += 1
            hmin_seen = min(hmin_seen, h)
            hmax_seen = max(hmax_seen, h)
            r_new = r + h
            # first zero crossing of u or v inside this step
            hit = None
            for comp, kind in ((0, ProfileClass.U_HITS_ZERO),
                               (2, ProfileClass.V_HITS_ZERO)):
                if y[comp] > 0.0 and y1[comp] <= 0.0:
                    a_th, b_th = 0.0, 1.0
                    for _ in range(200):
                        if (b_th - a_th) * h <= opts.event_tol:
                            break
                        m_th = 0.5 * (a_th + b_th)
                        val = _interp_component(y[comp], h, qm[comp], m_th)
                        if val > 0.0:
                            a_th = m_th
                        else:
                            b_th = m_th
                    th_star = b_th
                    if hit is None or th_star < hit[0]:
                        hit = (th_star, kind)
            if hit is not None:
                th_star, event_kind = hit
                r_event = r + th_star * h
                y_end = tuple(
                    _interp_component(y[d], h, qm[d], th_star) for d in range(4)
                )
                r_end = r_event
                break
            r, y, f0 = r_new, y1, K[6]
            r_end, y_end = r, y
            facold = max(err, 1e-4)
            fac11 = err ** 0.17 if err > 0.0 else 1e-20
            fac = fac11 / facold ** 0.04
            h = h / max(0.1, min(5.0, fac / 0.9))
        else:
            nreject += 1
            fac11 = err ** 0.17
            h = h / min(5.0, fac11 / 0.9)

    stats = IntegratorStats(
        steps=naccept, rejected=nreject,
        min_step=hmin_seen if naccept else 0.0, max_step=hmax_seen, nfev=nfev,
    )
    dense = _Dense(taylor, starts, steps, y0s, qmats)
    grid = np.geomspace(taylor.r_start, r_end, opts.grid_nodes)
    grid[0] = taylor.r_start
    grid[-1] = r_end
    vals = np.empty((4, grid.size))
    for i, rr in enumerate(grid):
        vals[:, i] = dense(float(rr))
    if event_kind is not None:
        classification = event_kind
    else:
        thr = opts.decay_threshold * max(init.u0, init.v0)
        decayed = (y_end[0] < thr and y_end[2] < thr
                   and y_end[1] < 0.0 and y_end[3] < 0.0)
        if r_end >= min(r_max, opts.r_target) and r_max >= opts.r_target and decayed:
            classification = ProfileClass.ENTIRE_POSITIVE
        else:
            classification = ProfileClass.TRUNCATED
    return RadialProfile(
        p=params.p, q=params.q, N=params.N, u0=init.u0, v0=init.v0,
        r=grid, u=vals[0], v=vals[2], du=vals[1], dv=vals[3],
        classification=classification, r_event=r_event, r_max=r_end,
        rtol=rtol, atol=atol, stats=stats, dense=dense,
    )


def reference_integrate(params: ParameterTriple, init: InitialData,
                        r_nodes, substeps: int = 10,
                        opts: SolverOptions | None = None) -> np.ndarray:
    """Classical fixed-step RK4 across the given nodes (independent oracle).

    Starts from the same closed-form series state at r_nodes[0] and takes
    ``substeps`` equal steps per node interval; returns a (4, len(nodes))
    array of (u, du, v, dv).
    """
    opts = SolverOptions() if opts is None else opts
    r_nodes = np.asarray(r_nodes, dtype=float)
    if r_nodes.ndim != 1 or r_nodes.size < 2 or np.any(np.diff(r_nodes) <= 0):
        raise DomainError("r_nodes must be strictly increasing")
    taylor = _TaylorStart(params, init, opts)
    rhs = _make_rhs(params)
    r = float(r_nodes[0])
    y = taylor.eval(r)
    out = np.empty((4, r_nodes.size))
    out[:, 0] = y
    for k in range(1, r_nodes.size):
        rb = float(r_nodes[k])
        hh = (rb - r) / substeps
        for _ in range(substeps):
            k1 = rhs(r, y)
            y2 = tuple(y[d] + 0.5 * hh * k1[d] for d in range(4))
            k2 = rhs(r + 0.5 * hh, y2)
            y3 = tuple(y[d] + 0.5 * hh * k2[d] for d in range(4))
            k3 = rhs(r + 0.5 * hh, y3)
            y4 = tuple(y[d] + hh * k3[d] for d in range(4))
            k4 = rhs(r + hh, y4)
            y = tuple(
                y[d] + hh / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d])
                for d in range(4)
            )
            r += hh
        r = rb
        out[:, k] = y
    return out


@dataclass(frozen=True)
class ShootResult:
    v0: float
    profile: RadialProfile
    iterations: int
    bracket_width: float
    polished: bool


def _positive_through_target(profile: RadialProfile) -> bool:
    return profile.r_event is None


def shoot(params: ParameterTriple, u0: float, v0_bracket: tuple,
          opts: SolverOptions | None = None, *, polish: bool = False) -> ShootResult:
    """Bisect v0 until the trajectory stays positive through r_target.

    The bracket endpoints must fail in opposite ways (one u-zero, one
    v-zero), else BracketError.  Stops at the first midpoint whose
    positivity interval exceeds ``opts.r_target``, or when the bracket is
    narrower than v0_tol (the midpoint profile is returned as-is).

    ``polish=True`` runs a bracketed-secant refinement of v0 on the smooth
    matching functional u(R)/u_s(R) - v(R)/v_s(R) at a probe radius, which
    places v0 on the entire-solution manifold to a few ulp; this sharpens
    the trustworthy tail far beyond what classification bisection can do.
    Requires the scaling data to exist.
    """
    opts = SolverOptions() if opts is None else opts
    opts.validate()
    lo, hi = float(v0_bracket[0]), float(v0_bracket[1])
    if not (0.0 < lo < hi):
        raise DomainError("need 0 < lo < hi in the v0 bracket")
    if u0 <= 0.0:
        raise DomainError("u0 must be positive")

    def run(v0: float, r_max: float | None = None) -> RadialProfile:
        return integrate(params, InitialData(u0, v0),
                         opts.r_target if r_max is None else r_max, opts)

    prof_lo = run(lo)
    prof_hi = run(hi)
    kinds = {prof_lo.classification, prof_hi.classification}
    if kinds != {ProfileClass.U_HITS_ZERO, ProfileClass.V_HITS_ZERO}:
        raise BracketError(
            f"bracket endpoints must fail in opposite ways, got "
            f"{prof_lo.classification.value} at {lo} and "
            f"{prof_hi.classification.value} at {hi}"
        )
    kind_lo = prof_lo.classification

    result: ShootResult | None = None
    if params.p == params.q and lo < u0 < hi:
        # the diagonal is invariant: v0 = u0 gives u identical to v
        prof = run(u0)
        if _positive_through_target(prof):
            result = ShootResult(u0, prof, 0, 0.0, False)

    it = 0
    if result is None:
        a, b = lo, hi
        while True:
            it += 1
            if it > opts.shoot_max_iter:
                raise ConvergenceError(
                    f"shooting did not converge in {opts.shoot_max_iter} bisections"
                )
            mid = 0.5 * (a + b)
            prof = run(mid)
            if _positive_through_target(prof):
                result = ShootResult(mid, prof, it, b - a, False)
                break
            if prof.classification == kind_lo:
                a = mid
            else:
                b = mid
            if (b - a) <= opts.v0_tol * max(1.0, abs(b)):
                result = ShootResult(mid, prof, it, b - a, False)
                break

    if not polish:
        return result

    scaling = derive_scaling(params)
    probe = opts.polish_probe or min(opts.r_target, 1e4)
    lg_a = math.log(scaling.a)
    lg_b = math.log(scaling.b)

    def match(v0: float) -> float:
        prof = run(v0, r_max=probe)
        if prof.classification == ProfileClass.U_HITS_ZERO:
            return -1e3
        if prof.classification == ProfileClass.V_HITS_ZERO:
            return 1e3
        rr = float(prof.r[-1])
        uh = math.log(prof.u[-1]) + scaling.alpha * math.log(rr) - lg_a
        vh = math.log(prof.v[-1]) + scaling.beta * math.log(rr) - lg_b
        return uh - vh

    # orient the bracket so that f(a) > 0 (small v0 side) > f(b)
    a, b = lo, hi
    if kind_lo == ProfileClass.U_HITS_ZERO:
        a, b = hi, lo
    center = result.v0
    half = max(abs(result.bracket_width), 64.0 * _EPS * max(1.0, center))
    cand_a = center - math.copysign(half, b - a) * 8.0
    cand_b = center + math.copysign(half, b - a) * 8.0
    fa, fb = match(cand_a), match(cand_b)
    if not (fa > 0.0 > fb):
        cand_a, cand_b, fa, fb = a, b, match(a), match(b)
        if not (fa > 0.0 > fb):
            raise BracketError("matching functional has no sign change; "
                               "cannot polish this bracket")
    for _ in range(200):
        if abs(cand_b - cand_a) <= 4.0 * _EPS * max(1.0, abs(cand_b)):
            break
        if abs(fa) < 1e2 and abs(fb) < 1e2 and fa != fb:
            x = cand_a + fa * (cand_a - cand_b) / (fb - fa)
            lo_, hi_ = min(cand_a, cand_b), max(cand_a, cand_b)
            if not (lo_ < x < hi_):
                x = 0.5 * (cand_a + cand_b)
        else:
            x = 0.5 * (cand_a + cand_b)
        fx = match(x)
        if fx > 0.0:
            cand_a, fa = x, fx
        elif fx < 0.0:
            cand_b, fb = x, fx
        else:
            cand_a = cand_b = x
            break
    v0_star = 0.5 * (cand_a + cand_b)
    prof = run(v0_star)
    return ShootResult(v0_star, prof, it, abs(cand_b - cand_a), True)


def rescale(profile: RadialProfile, scaling: ScalingData, R: float) -> RadialProfile:
    """Scale-invariance map (u, v)(r) -> (R^alpha u(R r), R^beta v(R r)).

    The rescaled grid is r_i / R so every sample reuses an existing node
    exactly; derivatives pick up one extra power of R.  The result solves
    the same system because alpha + 2 = beta p and beta + 2 = alpha q.
    """
    if not (R > 0.0 and math.isfinite(R)):
        raise DomainError("R must be positive and finite")
    cu = R ** scaling.alpha
    cv = R ** scaling.beta
    dense = profile.dense
    wrapped = None
    if dense is not None:
        def wrapped(rr: float, _d=dense, _cu=cu, _cv=cv, _R=R):
            u, du, v, dv = _d(rr * _R)
            return (u * _cu, du * _cu * _R, v * _cv, dv * _cv * _R)
    return RadialProfile(
        p=profile.p, q=profile.q, N=profile.N,
        u0=profile.u0 * cu, v0=profile.v0 * cv,
        r=profile.r / R,
        u=profile.u * cu, v=profile.v * cv,
        du=profile.du * (cu * R), dv=profile.dv * (cv * R),
        classification=profile.classification,
        r_event=None if profile.r_event is None else profile.r_event / R,
        r_max=profile.r_max / R,
        rtol=profile.rtol, atol=profile.atol,
        stats=profile.stats, dense=wrapped,
    )


@dataclass(frozen=True)
class DecayReport:
    residual: float
    tail_share: float
    fitted_slope: float


def decay_identity_check(profile: RadialProfile,
                         params: ParameterTriple | None = None) -> DecayReport:
    """Certify global positivity and decay through the potential identity

        u(0) = (N-2)^{-1} int_0^inf t v(t)^p dt.

    The integral is a trapezoid sum over the profile grid plus a closed-form
    head on [0, r_1] and a power-law tail fitted over the last decade.  A
    small residual certifies an entire-positive profile; on a truncated
    (but positive) profile the residual is dominated by the missing tail
    and ``tail_share`` tells the caller how much of the estimate came from
    extrapolation.  Event-terminated profiles are rejected.
    """
    p = profile.p if params is None else params.p
    N = profile.N if params is None else params.N
    if N < 3:
        raise DomainError("the potential identity needs N >= 3")
    if not math.isfinite(profile.u0):
        raise MisclassifiedProfile("profile has no finite value at the origin")
    if profile.classification in (ProfileClass.U_HITS_ZERO,
                                  ProfileClass.V_HITS_ZERO):
        raise MisclassifiedProfile(
            f"decay identity needs a positive profile, got "
            f"{profile.classification.value}"
        )
    # truncated-but-positive profiles are allowed: the residual is then
    # dominated by the missing tail and the reported tail share tells the
    # caller to extend r_max
    r = profile.r
    fv = r * profile.v ** p
    body = float(np.sum(0.5 * (fv[1:] + fv[:-1]) * np.diff(r)))
    head = profile.v0 ** p * r[0] ** 2 / 2.0
    # tail: fit log v against log r over the last decade of the grid
    mask = r >= profile.r_max / 10.0
    lr = np.log(r[mask])
    lv = np.log(profile.v[mask])
    slope, intercept = np.polyfit(lr, lv, 1)
    beta_hat = -float(slope)
    C = math.exp(float(intercept))
    if beta_hat * p <= 2.0:
        tail = math.inf
    else:
        tail = C ** p * profile.r_max ** (2.0 - beta_hat * p) / (beta_hat * p - 2.0)
    total = head + body + tail
    residual = abs(profile.u0 - total / (N - 2.0)) / profile.u0
    share = tail / total if math.isfinite(tail) else 1.0
    return DecayReport(residual=residual, tail_share=share, fitted_slope=-beta_hat)


def ode_residual(profile: RadialProfile) -> float:
    """Max relative residual of (r^{N-1} u')' = -r^{N-1} v^p (and the v
    equation) by 4th-order finite differences on the log grid."""
    r = profile.r
    if r.size < 7:
        raise DomainError("profile grid too small for the residual stencil")
    lr = np.log(r)
    h = np.diff(lr)
    if np.max(np.abs(h - h[0])) > 1e-8 * h[0]:
        raise DomainError("residual stencil requires a uniform log grid")
    h0 = float(h[0])
    worst = 0.0
    for (w, src) in ((profile.du, profile.v ** profile.p),
                     (profile.dv, profile.u ** profile.q)):
        F = r ** (profile.N - 1.0) * w
        dF = (-F[4:] + 8.0 * F[3:-1] - 8.0 * F[1:-3] + F[:-4]) / (12.0 * h0)
        dFdr = dF / r[2:-2]
        rhs = -(r ** (profile.N - 1.0) * src)[2:-2]
        scale = (r ** (profile.N - 1.0) * (np.abs(src) + np.abs(w) / r))[2:-2]
        worst = max(worst, float(np.max(np.abs(dFdr - rhs) / scale)))
    return worst


# ----------------------------------------------------------------------
# serialization

_SCHEMA_VERSION = 1


def profile_metadata(profile: RadialProfile) -> dict:
    return {
        "schema_version": _SCHEMA_VERSION,
        "kind": "radial_profile",
        "params": {"p": profile.p, "q": profile.q, "N": profile.N},
        "u0": profile.u0,
        "v0": profile.v0,
        "classification": profile.classification.value,
        "r_event": profile.r_event,
        "r_start": float(profile.r[0]),
        "r_max": profile.r_max,
        "rtol": profile.rtol,
        "atol": profile.atol,
        "grid_nodes": int(profile.r.size),
        "stats": {
            "steps": profile.stats.steps,
            "rejected": profile.stats.rejected,
            "min_step": profile.stats.min_step,
            "max_step": profile.stats.max_step,
            "nfev": profile.stats.nfev,
        },
    }


def profile_to_csv(profile: RadialProfile) -> str:
    rows = zip(profile.r, profile.u, profile.v, profile.du, profile.dv)
    return to_csv(["r", "u", "v", "du", "dv"], rows)


def profile_from_text(csv_text: str, json_text: str) -> RadialProfile:
    import json as _json

    meta = _json.loads(json_text)
    if meta.get("kind") != "radial_profile":
        raise DomainError("not a radial-profile metadata document")
    lines = csv_text.strip().split("\n")
    if lines[0] != "r,u,v,du,dv":
        raise DomainError("unexpected CSV header for a radial profile")
    data = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]])
    stats = meta["stats"]
    return RadialProfile(
        p=float(meta["params"]["p"]), q=float(meta["params"]["q"]),
        N=int(meta["params"]["N"]),
        u0=float(meta["u0"]), v0=float(meta["v0"]),
        r=data[:, 0], u=data[:, 1], v=data[:, 2], du=data[:, 3], dv=data[:, 4],
        classification=ProfileClass(meta["classification"]),
        r_event=None if meta["r_event"] is None else float(meta["r_event"]),
        r_max=float(meta["r_max"]),
        rtol=float(meta["rtol"]), atol=float(meta["atol"]),
        stats=IntegratorStats(
            steps=int(stats["steps"]), rejected=int(stats["rejected"]),
            min_step=float(stats["min_step"]), max_step=float(stats["max_step"]),
            nfev=int(stats["nfev"]),
        ),
        dense=None,
    )
