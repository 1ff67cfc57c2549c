"""Comparison of regular radial profiles with the singular solution.

Locates sign changes of u - u_s and v - v_s, computes the suprema
M1 = sup u/u_s and M2 = sup v/v_s over the profile grid, and checks the
Newtonian-potential chain M1 <= M2^p, M2 <= M1^q for ordered profiles.

Sign changes are counted with a dead band relative to |u_s| so that
rounding-level oscillations of a trajectory that has locked onto the
singular asymptote are not reported as crossings.  Suprema over the
unbounded domain are necessarily truncated at the profile's outer radius;
profiles that are not entire-positive are flagged interior-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .closed_form import SingularSolution
from .errors import DomainError, GridTooCoarse
from .exponents import ScalingData
from .radial import ProfileClass, RadialProfile

__all__ = ["ComparisonReport", "RatioReport", "compare", "ratio_suprema",
           "truncate_profile"]

DEFAULT_BAND = 1e-12


@dataclass(frozen=True)
class ComparisonReport:
    crossings_u: list
    crossings_v: list
    m1: float
    m2: float
    r_m1: float
    r_m2: float
    ordered: bool
    degenerate: bool
    interior_only: bool
    band_rel: float

    def as_dict(self) -> dict:
        return {
            "crossings_u": list(self.crossings_u),
            "crossings_v": list(self.crossings_v),
            "M1": self.m1, "M2": self.m2,
            "r_M1": self.r_m1, "r_M2": self.r_m2,
            "ordered": self.ordered,
            "degenerate": self.degenerate,
            "interior_only": self.interior_only,
            "band_rel": self.band_rel,
        }


@dataclass(frozen=True)
class RatioReport:
    m1: float
    m2: float
    r_m1: float
    r_m2: float
    ordered: bool
    chain_deficit_p: float | None
    chain_deficit_q: float | None
    diagnostics: list = field(default_factory=list)
    interior_only: bool = False


def truncate_profile(profile: RadialProfile, r_cut: float) -> RadialProfile:
    """Restrict a profile to grid radii <= r_cut (dense output kept)."""
    if r_cut <= profile.r[0]:
        raise DomainError("truncation radius below the first grid node")
    n = int(np.searchsorted(profile.r, r_cut, side="right"))
    cls = profile.classification
    if cls is ProfileClass.ENTIRE_POSITIVE and n < profile.r.size:
        cls = ProfileClass.TRUNCATED
    return replace(
        profile,
        r=profile.r[:n], u=profile.u[:n], v=profile.v[:n],
        du=profile.du[:n], dv=profile.dv[:n],
        r_max=float(profile.r[n - 1]),
        classification=cls,
    )


def _field_dense(profile: RadialProfile, comp_idx: int):
    dense = profile.dense
    if dense is None:
        return None

    def f(r: float) -> float:
        return dense(r)[comp_idx]

    return f


def _refine_crossing(f, sing_val, a: float, b: float) -> float:
    """Bisect f(r) - sing_val(r) = 0 on [a, b] using the dense output."""
    fa = f(a) - sing_val(a)
    for _ in range(200):
        if (b - a) <= 1e-10 * b:
            break
        m = 0.5 * (a + b)
        fm = f(m) - sing_val(m)
        if (fm > 0.0) == (fa > 0.0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _loglinear_root(r0, r1, d0, d1) -> float:
    # no dense output: secant in log r on the relative difference
    t = d0 / (d0 - d1)
    return math.exp(math.log(r0) + t * (math.log(r1) - math.log(r0)))


def _crossings_one_field(r, rel_diff, band, f_dense, sing_val):
    """Crossing radii of one field from its dead-band-quantized sign states."""
    state = np.zeros(r.size, dtype=int)
    state[rel_diff > band] = 1
    state[rel_diff < -band] = -1
    idx = np.nonzero(state)[0]
    crossings = []
    for k in range(idx.size - 1):
        i, j = idx[k], idx[k + 1]
        if state[i] == state[j]:
            continue
        if f_dense is None:
            crossings.append(_loglinear_root(float(r[i]), float(r[j]),
                                             float(rel_diff[i]), float(rel_diff[j])))
            continue
        root = _refine_crossing(f_dense, sing_val, float(r[i]), float(r[j]))
        if j - i <= 1:
            # adjacent nodes: make sure the cell hides no extra alternations
            sub = np.geomspace(r[i], r[j], 17)
            sgn = []
            for s in sub:
                sv = sing_val(float(s))
                d = (f_dense(float(s)) - sv) / sv
                sgn.append(1 if d > band else (-1 if d < -band else 0))
            nz = [s for s in sgn if s != 0]
            flips = sum(1 for a, b2 in zip(nz, nz[1:]) if a != b2)
            if flips > 1:
                raise GridTooCoarse(
                    f"{flips} sign alternations inside one grid cell near "
                    f"r={root:.6g}"
                )
        crossings.append(root)
    return crossings


def _refine_max(ratio, r, i, f_dense, sing_val):
    """Parabolic refinement (in log r) of a grid maximum of the ratio."""
    if i == 0 or i == r.size - 1 or f_dense is None:
        return float(ratio[i]), float(r[i])
    x0, x1, x2 = math.log(r[i - 1]), math.log(r[i]), math.log(r[i + 1])
    y0, y1, y2 = float(ratio[i - 1]), float(ratio[i]), float(ratio[i + 1])
    den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0)
    if den == 0.0 or not math.isfinite(den):
        return y1, float(r[i])
    xv = x1 - 0.5 * ((x1 - x0) ** 2 * (y1 - y2) - (x1 - x2) ** 2 * (y1 - y0)) / den
    if not (x0 < xv < x2) or not math.isfinite(xv):
        return y1, float(r[i])
    rv = math.exp(xv)
    val = f_dense(rv) / sing_val(rv)
    if val > y1:
        return float(val), rv
    return y1, float(r[i])


def compare(profile: RadialProfile, scaling: ScalingData,
            band_rel: float = DEFAULT_BAND) -> ComparisonReport:
    """Sign-change count and ratio suprema of a profile against (u_s, v_s)."""
    if band_rel <= 0.0:
        raise DomainError("band_rel must be positive")
    r = profile.r
    if np.any(r <= 0.0):
        raise DomainError("profile grid must be positive")
    sing = SingularSolution(scaling)
    us, vs = sing.u(r), sing.v(r)
    rel_u = profile.u / us - 1.0
    rel_v = profile.v / vs - 1.0

    degenerate = bool(np.all(np.abs(rel_u) <= band_rel)
                      and np.all(np.abs(rel_v) <= band_rel))
    cross_u: list = []
    cross_v: list = []
    if not degenerate:
        cross_u = _crossings_one_field(r, rel_u, band_rel,
                                       _field_dense(profile, 0), sing.u)
        cross_v = _crossings_one_field(r, rel_v, band_rel,
                                       _field_dense(profile, 2), sing.v)

    ratio_u = rel_u + 1.0
    ratio_v = rel_v + 1.0
    i1 = int(np.argmax(ratio_u))
    i2 = int(np.argmax(ratio_v))
    m1, rm1 = _refine_max(ratio_u, r, i1, _field_dense(profile, 0), sing.u)
    m2, rm2 = _refine_max(ratio_v, r, i2, _field_dense(profile, 2), sing.v)

    ordered = bool(
        not degenerate
        and not cross_u and not cross_v
        and np.all(rel_u <= band_rel) and np.all(rel_v <= band_rel)
    )
    interior_only = profile.classification is not ProfileClass.ENTIRE_POSITIVE
    return ComparisonReport(
        crossings_u=cross_u, crossings_v=cross_v,
        m1=m1, m2=m2, r_m1=rm1, r_m2=rm2,
        ordered=ordered, degenerate=degenerate,
        interior_only=interior_only, band_rel=band_rel,
    )


def ratio_suprema(profile: RadialProfile, scaling: ScalingData,
                  band_rel: float = DEFAULT_BAND,
                  chain_tol: float = 0.0) -> RatioReport:
    """Refined suprema plus the Newtonian-potential chain diagnostics.

    When the profile is ordered below the singular solution the chain
    M1 <= M2^p and M2 <= M1^q holds for the true suprema over (0, inf);
    with grid-truncated suprema the signed deficits M1 - M2^p and
    M2 - M1^q are reported, with a diagnostic entry when one exceeds
    ``chain_tol``.
    """
    rep = compare(profile, scaling, band_rel)
    diagnostics: list = []
    deficit_p = deficit_q = None
    if rep.ordered:
        deficit_p = rep.m1 - rep.m2 ** scaling.p
        deficit_q = rep.m2 - rep.m1 ** scaling.q
        if deficit_p > chain_tol:
            diagnostics.append(
                f"M1 <= M2^p violated by {deficit_p:.3e} (truncated suprema)"
            )
        if deficit_q > chain_tol:
            diagnostics.append(
                f"M2 <= M1^q violated by {deficit_q:.3e} (truncated suprema)"
            )
    if rep.interior_only:
        diagnostics.append("suprema are interior-only (profile truncated)")
    return RatioReport(
        m1=rep.m1, m2=rep.m2, r_m1=rep.r_m1, r_m2=rep.r_m2,
        ordered=rep.ordered,
        chain_deficit_p=deficit_p, chain_deficit_q=deficit_q,
        diagnostics=diagnostics, interior_only=rep.interior_only,
    )
