"""Weighted Hardy-Rellich principal eigenvalue on annuli.

Computes

    lambda(A) = min  int_A r^{2-gamma} (Delta phi)^2 dx / int_A r^{-2-gamma} phi^2 dx

over radial phi vanishing (together with psi = r^{2-gamma}(-Delta phi)) on
the boundary of the annulus A.  The minimizer solves the cooperative system

    -Delta phi = r^{gamma-2} psi,    -Delta psi = lambda r^{-gamma-2} phi,

so lambda is the reciprocal of the dominant eigenvalue of the positive map
B = A^{-1} W1 A^{-1} W2, where A is the Dirichlet radial Laplacian and
W1, W2 the two weights.  In log-radius coordinates rho = log r the
Laplacian is r^{-2}(d_rho^2 + (N-2) d_rho); it is discretized in
conservative (flux) form on a uniform rho grid, which is second-order
accurate, unconditionally an M-matrix (the iteration preserves positivity)
and symmetrizable, so each application of A^{-1} is two triangular sweeps
of a prefactored banded Cholesky.

lambda(A) decreases to the optimal constant C_gamma = [((N-2)^2-gamma^2)/4]^2
as the annulus grows, and exceeds it on every finite annulus (the infimum
is not attained).  Comparing lambda against K1 K2 on a ladder of annuli
decides stability of the singular solution: an annulus with
lambda < K1 K2 witnesses instability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .errors import ConvergenceError, DiscretizationError, DomainError
from .exponents import (CurvePosition, ParameterTriple, classify,
                        derive_scaling, hardy_rellich_constant)

__all__ = [
    "Annulus",
    "EigOptions",
    "EigReport",
    "StabilityReport",
    "principal_eigenvalue",
    "eig_ladder",
    "default_ladder",
    "singular_stability_verdict",
    "richardson_limit",
]


@dataclass(frozen=True)
class Annulus:
    r_inner: float
    r_outer: float
    M: int

    def __post_init__(self):
        if not (0.0 < self.r_inner < self.r_outer and math.isfinite(self.r_outer)):
            raise DomainError("need 0 < r_inner < r_outer < inf")
        if self.M < 16:
            raise DomainError("need at least 16 interior nodes")

    @property
    def log_width(self) -> float:
        return math.log(self.r_outer / self.r_inner)


@dataclass(frozen=True)
class EigOptions:
    tol: float = 1e-11
    max_iter: int = 10_000
    verdict_band: float = 1e-6

    def validate(self):
        if self.tol <= 0.0 or self.max_iter < 1 or self.verdict_band <= 0.0:
            raise DomainError("bad eigensolver options")


@dataclass(frozen=True)
class EigReport:
    annulus: Annulus
    N: int
    gamma: float
    lam: float
    iterations: int
    residual: float
    phi: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)
    r: np.ndarray = field(repr=False)
    verdict: str | None = None
    k1k2: float | None = None
    marginal: bool | None = None

    def as_dict(self, with_fields: bool = False) -> dict:
        d = {
            "r_inner": self.annulus.r_inner,
            "r_outer": self.annulus.r_outer,
            "M": self.annulus.M,
            "N": self.N,
            "gamma": self.gamma,
            "lambda": self.lam,
            "iterations": self.iterations,
            "residual": self.residual,
            "verdict": self.verdict,
            "K1K2": self.k1k2,
            "marginal": self.marginal,
        }
        if with_fields:
            d["phi"] = [float(x) for x in self.phi]
            d["psi"] = [float(x) for x in self.psi]
        return d


def _dirichlet_laplacian_factor(annulus: Annulus, N: int):
    """Prefactor the flux-form radial Laplacian on the log grid.

    Returns (r interior nodes, solve) where solve(b) solves -Delta x = b
    with Dirichlet conditions at both radii.
    """
    M = annulus.M
    rho = np.linspace(math.log(annulus.r_inner), math.log(annulus.r_outer), M + 2)
    h = rho[1] - rho[0]
    rho_in = rho[1:-1]
    # flux coefficients e^{(N-2) rho} at half nodes; row scaling e^{N rho}
    ehalf = np.exp((N - 2.0) * 0.5 * (rho[:-1] + rho[1:]))
    diag = (ehalf[:-1] + ehalf[1:]) / h**2
    off = -ehalf[1:-1] / h**2
    ab = np.zeros((2, M))
    ab[0, 1:] = off
    ab[1, :] = diag
    cb = cholesky_banded(ab, lower=False)
    row_scale = np.exp(N * rho_in)

    def solve(b: np.ndarray) -> np.ndarray:
        return cho_solve_banded((cb, False), row_scale * b)

    return np.exp(rho_in), solve


def principal_eigenvalue(annulus: Annulus, N: int, gamma: float,
                         opts: EigOptions | None = None,
                         x0: np.ndarray | None = None) -> EigReport:
    """Inverse-power iteration for the smallest weighted quotient.

    The iterate is phi_{k+1} = A^{-1}(w1 . A^{-1}(w2 . phi_k)) with
    w1 = r^{gamma-2}, w2 = r^{-gamma-2}; the Rayleigh ratio of the map in
    the L^2(w2 dx) inner product converges to 1/lambda.  Successive
    eigenvalue estimates are Aitken-extrapolated (the iteration error is
    geometric) and the loop stops when the extrapolated value moves by
    less than ``tol`` relatively, or raises ConvergenceError at the
    iteration cap.  The analytic leading mode r^{-(N-2)/2} sin(pi rho/L)
    is the default start vector.
    """
    opts = EigOptions() if opts is None else opts
    opts.validate()
    if int(N) != N or N < 3:
        raise DomainError(f"integer N >= 3 required, got {N}")
    if not (0.0 <= gamma < N - 2.0):
        raise DomainError(f"0 <= gamma < N-2 required, got gamma={gamma}")
    r, solve = _dirichlet_laplacian_factor(annulus, N)
    w1 = r ** (gamma - 2.0)
    w2 = r ** (-gamma - 2.0)
    quad = w2 * r ** N  # L^2(w2 dx) weights on the uniform log grid

    if x0 is None:
        L = annulus.log_width
        s = np.log(r / annulus.r_inner)
        x = r ** (-(N - 2.0) / 2.0) * np.sin(math.pi * s / L)
    else:
        x = np.asarray(x0, dtype=float).copy()
        if x.shape != r.shape:
            raise DomainError("x0 has the wrong number of nodes")
    x /= math.sqrt(float(np.dot(quad, x * x)))

    mu_hist: list[float] = []
    ext_prev = None
    lam = math.nan
    iterations = 0
    y = None
    for k in range(1, opts.max_iter + 1):
        iterations = k
        y = solve(w2 * x)
        z = solve(w1 * y)
        mu = float(np.dot(quad, z * x))  # Rayleigh ratio, ||x||_w = 1
        mu_hist.append(mu)
        # Aitken extrapolation of the geometric tail
        if len(mu_hist) >= 3:
            m0, m1, m2 = mu_hist[-3], mu_hist[-2], mu_hist[-1]
            den = m2 - 2.0 * m1 + m0
            ext = m2 - (m2 - m1) ** 2 / den if den != 0.0 else m2
        else:
            ext = mu
        nz = math.sqrt(float(np.dot(quad, z * z)))
        if nz <= 0.0 or not math.isfinite(nz):
            raise DiscretizationError("iterate collapsed; grid too coarse")
        x = z / nz
        if ext_prev is not None and abs(ext - ext_prev) <= opts.tol * abs(ext):
            lam = 1.0 / ext
            break
        ext_prev = ext
    else:
        raise ConvergenceError(
            f"eigenvalue iteration did not converge in {opts.max_iter} steps "
            f"(last lambda ~ {1.0 / mu_hist[-1]:.12g})"
        )

    if np.any(x <= 0.0):
        raise DiscretizationError(
            "principal iterate lost positivity; refine the grid"
        )
    # residual of B x = mu x in the weighted norm
    y = solve(w2 * x)
    z = solve(w1 * y)
    mu = float(np.dot(quad, z * x)) / float(np.dot(quad, x * x))
    res = z - mu * x
    residual = math.sqrt(float(np.dot(quad, res * res))
                         / float(np.dot(quad, x * x))) / mu
    psi = lam * y / math.sqrt(float(np.dot(quad, x * x)))
    return EigReport(
        annulus=annulus, N=int(N), gamma=float(gamma), lam=lam,
        iterations=iterations, residual=residual,
        phi=x, psi=psi, r=r,
    )


def default_ladder(k_max: int = 5, m_per_k: int = 1024) -> list[Annulus]:
    """Annuli [10^-k, 10^k] with M = m_per_k * k interior nodes."""
    return [Annulus(10.0 ** (-k), 10.0 ** k, m_per_k * k)
            for k in range(1, k_max + 1)]


def eig_ladder(N: int, gamma: float, ladder: list[Annulus] | None = None,
               opts: EigOptions | None = None) -> list[EigReport]:
    """Eigenvalues along a nested-annulus ladder, warm-starting each rung."""
    ladder = default_ladder() if ladder is None else ladder
    reports: list[EigReport] = []
    prev: EigReport | None = None
    for ann in ladder:
        x0 = None
        if prev is not None:
            r, _ = _dirichlet_laplacian_factor(ann, N)
            lr = np.log(r)
            x0 = np.interp(lr, np.log(prev.r), prev.phi, left=0.0, right=0.0)
            if not np.any(x0 > 0.0):
                x0 = None
            else:
                # keep the start vector strictly positive inside
                floor = float(np.max(x0)) * 1e-8
                x0 = np.maximum(x0, floor)
        reports.append(principal_eigenvalue(ann, N, gamma, opts, x0=x0))
        prev = reports[-1]
    return reports


def richardson_limit(reports: list[EigReport]) -> float:
    """Extrapolated infinite-annulus limit from the last ladder rungs.

    The leading finite-width correction is O(1/L^2) in the log width L;
    a two-point Richardson step on the last two rungs removes it.
    """
    if len(reports) < 2:
        raise DomainError("need at least two ladder rungs to extrapolate")
    r1, r2 = reports[-2], reports[-1]
    x1 = 1.0 / r1.annulus.log_width ** 2
    x2 = 1.0 / r2.annulus.log_width ** 2
    return (x1 * r2.lam - x2 * r1.lam) / (x1 - x2)


# closed-form gap model 2 sqrt(C_gamma) (pi/L)^2: used only to decide when a
# wider annulus could still flip the verdict near the critical curve
def _gap_estimate(N: int, gamma: float, L: float) -> float:
    return 2.0 * math.sqrt(hardy_rellich_constant(N, gamma)) * (math.pi / L) ** 2


@dataclass(frozen=True)
class StabilityReport:
    params: ParameterTriple
    k1k2: float
    gamma: float
    reports: list
    verdict: str
    marginal: bool
    lecv_consistent: bool
    extended: int

    @property
    def lam_top(self) -> float:
        return self.reports[-1].lam


def singular_stability_verdict(
    params: ParameterTriple,
    annulus: Annulus | None = None,
    opts: EigOptions | None = None,
    *,
    ladder: list[Annulus] | None = None,
    extend_max_k: int = 14,
    m_per_k: int = 1024,
) -> StabilityReport:
    """Stability of the singular solution via the annulus eigenvalue test.

    An annulus with lambda < K1 K2 certifies instability; if every tested
    annulus has lambda >= K1 K2 the verdict is stable.  Because
    lambda -> C_gamma with a known O(1/L^2) gap, the ladder is extended
    (up to ``extend_max_k``) while the top-rung margin lambda - K1K2 is
    positive but smaller than twice the gap estimate, i.e. while a wider
    annulus could still flip the comparison.  ``marginal`` is set when the
    comparison remains inside the verdict band (relative to K1K2) at the
    final rung, or undecided at the extension cap.

    The closed-form inequality C_gamma >= K1K2 is evaluated independently
    and recorded in ``lecv_consistent`` as a cross-check; it never feeds
    the verdict.
    """
    opts = EigOptions() if opts is None else opts
    sc = derive_scaling(params)
    k1k2 = sc.K1K2
    if annulus is not None:
        rungs = [annulus]
    elif ladder is not None:
        rungs = list(ladder)
    else:
        rungs = default_ladder(m_per_k=m_per_k)
    reports = eig_ladder(params.N, sc.gamma, rungs, opts)
    extended = 0
    if annulus is None:
        k = round(math.log10(reports[-1].annulus.r_outer))
        relax = EigOptions(tol=max(opts.tol, 1e-9), max_iter=max(opts.max_iter, 30_000),
                           verdict_band=opts.verdict_band)
        while (reports[-1].lam >= k1k2
               and reports[-1].lam - k1k2 < 2.0 * _gap_estimate(
                   params.N, sc.gamma, reports[-1].annulus.log_width)
               and k < extend_max_k):
            k += 1
            ann = Annulus(10.0 ** (-k), 10.0 ** k, m_per_k * k)
            r, _ = _dirichlet_laplacian_factor(ann, params.N)
            x0 = np.interp(np.log(r), np.log(reports[-1].r), reports[-1].phi,
                           left=0.0, right=0.0)
            floor = float(np.max(x0)) * 1e-8
            x0 = np.maximum(x0, floor)
            reports.append(principal_eigenvalue(ann, params.N, sc.gamma, relax, x0=x0))
            extended += 1
    lam_min = min(rep.lam for rep in reports)
    unstable = lam_min < k1k2
    verdict = "SingularUnstable" if unstable else "SingularStable"
    band = opts.verdict_band * max(1.0, k1k2)
    undecided = (not unstable
                 and reports[-1].lam - k1k2 < 2.0 * _gap_estimate(
                     params.N, sc.gamma, reports[-1].annulus.log_width))
    marginal = bool(abs(reports[-1].lam - k1k2) <= band or undecided)
    side = classify(params).jl
    lecv_holds = side in (CurvePosition.ABOVE, CurvePosition.ON)
    consistent = (verdict == "SingularStable") == lecv_holds
    tagged = [
        EigReport(
            annulus=rep.annulus, N=rep.N, gamma=rep.gamma, lam=rep.lam,
            iterations=rep.iterations, residual=rep.residual,
            phi=rep.phi, psi=rep.psi, r=rep.r,
            verdict=verdict, k1k2=k1k2, marginal=marginal,
        )
        for rep in reports
    ]
    return StabilityReport(
        params=params, k1k2=k1k2, gamma=sc.gamma, reports=tagged,
        verdict=verdict, marginal=marginal, lecv_consistent=consistent,
        extended=extended,
    )
