"""Periodic and quasi-periodic orbits of the reduced system on centred quadrics.

Admissible data (normalized lambdas, C = 1, A > 0) comes in two families:

  case (a): all lambda_j = +1 and alpha < 0  (compact quadric, shrinkers),
  case (b): lambdas (+1 x m, -1 x (n-m)) with 1 <= m < n, any alpha.

On the band where all radii are positive, G(u) = Q(u) e^{alpha u} is strictly
log-concave with a unique interior critical point u_*.  Every computation
here first re-bases the data so u_* = 0; the shift alpha_j -> alpha_j +
lambda_j u_* must be accompanied by A -> A e^{-alpha u_*/2}, which leaves the
orbit, its period and its holonomies unchanged.

With G(0) = A^2 exactly, u stays pinned at 0 and the angles evolve linearly
(Hamiltonian stationary case).  With A^2 < G(0), u oscillates between the two
roots u_1 < 0 < u_2 of G(u) = A^2 with period

    S = integral_{u1}^{u2} dv / sqrt(Q(v) - A^2 e^{-alpha v})

and each phase advances per period by the holonomy

    gamma_j = -integral_{u1}^{u2} A lambda_j dv
              / ((alpha_j + lambda_j v) sqrt(G(v) - A^2)).

G - A^2 is evaluated as A^2 expm1(log G - 2 log A) so the integrands stay
accurate through the endpoint cancellation, and the sin^2 substitution of
quadutil removes the inverse-square-root singularities exactly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import CaseMismatch, ValidationError
from .params import SolitonParams
from .quadutil import DEFAULT_REL_TOL, sin2_quad
from .reduced_ode import TrajectorySpec, sample_reduced

CASE_I_REL_TOL = 1e-12
CONDITIONING_MARGIN = 1e-10


class OrbitConditioningWarning(UserWarning):
    """Oscillation data lies so close to the stationary case that the
    turning points and period are determined only to a few digits."""


@dataclass(frozen=True)
class PeriodicSpec:
    """Orbit data: normalized params, base radii squared, first integral A > 0.

    psi are the phases phi_j at the base point; they do not influence the
    orbit shape, only where the trajectory sits in the angle torus.
    """

    params: SolitonParams
    alphas: tuple
    A: float
    psi: tuple = None

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        psi = tuple(float(p) for p in self.psi) if self.psi is not None else (0.0,) * len(alphas)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "A", float(self.A))
        if not self.params.is_normalized:
            raise ValidationError("PeriodicSpec requires normalized params")
        n = self.params.n
        if len(alphas) != n or len(psi) != n:
            raise ValidationError("alphas and psi must have length n")
        if any(a <= 0 for a in alphas):
            raise ValidationError("alphas must be positive")
        if self.A <= 0:
            raise ValidationError("A must be positive")
        m = self.params.num_positive
        if m == n:
            if self.params.alpha >= 0:
                raise ValidationError(
                    "all-positive lambdas admit bounded oscillation only for alpha < 0")
        elif m == 0:
            raise ValidationError("at least one lambda must be +1 (flip u -> -u otherwise)")

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def m(self) -> int:
        return self.params.num_positive

    def band(self):
        lam = self.params.lambdas
        lo = max(-a for a, l in zip(self.alphas, lam) if l > 0)
        hi = min((a for a, l in zip(self.alphas, lam) if l < 0), default=math.inf)
        return lo, hi

    def log_G(self, u: float) -> float:
        """log of G(u) = prod(alpha_j + lambda_j u) e^{alpha u}."""
        s = self.params.alpha * u
        for a, l in zip(self.alphas, self.params.lambdas):
            s += math.log(a + l * u)
        return s

    def dlog_G(self, u: float) -> float:
        s = self.params.alpha
        for a, l in zip(self.alphas, self.params.lambdas):
            s += l / (a + l * u)
        return s

    def trajectory_spec(self) -> TrajectorySpec:
        """ODE initial data with the same base point and first integral."""
        return TrajectorySpec.with_first_integral(
            self.params, self.alphas, self.A, phi0=self.psi)


def critical_point(spec: PeriodicSpec) -> float:
    """The unique u_* in the band with d/du log G = 0 (G maximal there)."""
    lo, hi = spec.band()
    # bracket: dlog_G -> +inf at the lower radius collapse, negative far right
    span = (hi - lo) if math.isfinite(hi) else max(1.0, -lo)
    a = lo + span * 1e-12
    while spec.dlog_G(a) <= 0:
        span *= 0.5
        a = lo + span * 1e-12
        if span < 1e-200:
            raise ValidationError("could not bracket the critical point from below")
    if math.isfinite(hi):
        span = hi - lo
        b = hi - span * 1e-12
        while spec.dlog_G(b) >= 0:
            span *= 0.5
            b = hi - span * 1e-12
            if span < 1e-200:
                raise ValidationError("could not bracket the critical point from above")
    else:
        b = max(1.0, a + 1.0)
        while spec.dlog_G(b) >= 0:
            b *= 2.0
            if b > 1e200:
                raise ValidationError("critical point bracket ran away")
    return brentq(spec.dlog_G, a, b, xtol=1e-15, rtol=8.9e-16)


def rebase(spec: PeriodicSpec):
    """Shift the base height so the critical point sits at u = 0.

    Returns (rebased spec, u_star).  A is rescaled by e^{-alpha u_*/2}; the
    orbit and all its invariants are unchanged.
    """
    u_star = critical_point(spec)
    if u_star == 0.0:
        return spec, 0.0
    lam = spec.params.lambdas
    alphas = tuple(a + l * u_star for a, l in zip(spec.alphas, lam))
    A = spec.A * math.exp(-0.5 * spec.params.alpha * u_star)
    return PeriodicSpec(spec.params, alphas, A, spec.psi), u_star


def stationary_spec(params, alphas, psi=None) -> PeriodicSpec:
    """Data with A pinned at sqrt(G(u_*)), the Hamiltonian stationary value."""
    probe = PeriodicSpec(params, alphas, 1.0, psi)
    u_star = critical_point(probe)
    A = math.exp(0.5 * probe.log_G(u_star))
    return PeriodicSpec(params, alphas, A, psi)


def _stationary_margin(spec: PeriodicSpec) -> float:
    """(G(0) - A^2)/G(0) for a rebased spec; 0 exactly at the stationary case."""
    w0 = spec.log_G(0.0) - 2.0 * math.log(spec.A)
    return -math.expm1(-w0)


def classify_case(spec: PeriodicSpec) -> str:
    """'hamiltonian_stationary' when A^2 = G(u_*) to 1e-12 relative, else 'oscillating'."""
    based, _ = rebase(spec)
    margin = _stationary_margin(based)
    if margin < -CASE_I_REL_TOL:
        raise ValidationError(
            f"A = {spec.A:.12g} exceeds the maximum sqrt(G(u_*)); no bounded orbit")
    return "hamiltonian_stationary" if abs(margin) <= CASE_I_REL_TOL else "oscillating"


def turning_points(spec: PeriodicSpec):
    """Roots u_1 < 0 < u_2 of G(u) = A^2 around the (rebased) critical point.

    Returned in the original base-height coordinates of spec.
    """
    based, shift = rebase(spec)
    if classify_case(spec) == "hamiltonian_stationary":
        return shift, shift
    u1, u2 = _based_turning_points(based)
    return u1 + shift, u2 + shift


def _orbit_quad(based: PeriodicSpec, u1: float, u2: float, numer, *,
                rel_tol: float = DEFAULT_REL_TOL, what: str = "integral") -> float:
    """Integral over one half-swing of numer(v, radii) / sqrt(G(v) - A^2).

    Written in the angle variable of v = u1 + (u2-u1) sin^2(xi) so that the
    offsets from the turning points keep full relative precision, and with
    G - A^2 evaluated through log1p expansions anchored at the nearer turning
    point.  That matters when a radius factor nearly vanishes at an endpoint
    (the near-cone regime): the integrand then carries a spike of width
    (alpha_j + lambda_j u1) whose location is also handed to the adaptive
    scheme as breakpoints.
    """
    from scipy.integrate import quad

    du = u2 - u1
    lam = based.params.lambdas
    alpha = based.params.alpha
    A2 = based.A ** 2
    d1 = [a + l * u1 for a, l in zip(based.alphas, lam)]
    d2 = [a + l * u2 for a, l in zip(based.alphas, lam)]

    def g(xi):
        sx, cx = math.sin(xi), math.cos(xi)
        dl = du * sx * sx       # v - u1, full relative precision
        dr = du * cx * cx       # u2 - v
        if dl <= dr:
            w = alpha * dl
            rad = [dj + lj * dl for dj, lj in zip(d1, lam)]
            for dj, lj in zip(d1, lam):
                w += math.log1p(lj * dl / dj)
            v = u1 + dl
        else:
            w = -alpha * dr
            rad = [dj - lj * dr for dj, lj in zip(d2, lam)]
            for dj, lj in zip(d2, lam):
                w += math.log1p(-lj * dr / dj)
            v = u2 - dr
        gap = A2 * math.expm1(w) if w > 0.0 else A2 * 1e-300
        return numer(v, rad) / math.sqrt(gap) * du * 2.0 * sx * cx

    pts = []
    for dj in d1:
        t = dj / du
        if 0.0 < t < 0.05:
            pts += [math.asin(math.sqrt(t)), math.asin(math.sqrt(min(10 * t, 0.5)))]
    for dj in d2:
        t = dj / du
        if 0.0 < t < 0.05:
            pts += [math.pi / 2 - math.asin(math.sqrt(t)),
                    math.pi / 2 - math.asin(math.sqrt(min(10 * t, 0.5)))]
    pts = sorted(set(p for p in pts if 0.0 < p < math.pi / 2))
    res = quad(g, 0.0, math.pi / 2, epsabs=0.0, epsrel=rel_tol, limit=400,
               points=pts or None, full_output=1)
    from .quadutil import _checked
    return _checked(res, rel_tol, what)


def period(spec: PeriodicSpec, *, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """u-oscillation period S of an oscillating spec."""
    based, _ = rebase(spec)
    _warn_if_marginal(based)
    u1, u2 = _based_turning_points(based)
    alpha = based.params.alpha
    return _orbit_quad(based, u1, u2, lambda v, rad: math.exp(0.5 * alpha * v),
                       rel_tol=rel_tol, what="oscillation period")


def holonomies(spec: PeriodicSpec, *, rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    """Per-period phase advances gamma_j of an oscillating spec."""
    based, _ = rebase(spec)
    _warn_if_marginal(based)
    u1, u2 = _based_turning_points(based)
    out = []
    for j, lj in enumerate(based.params.lambdas):
        out.append(_orbit_quad(
            based, u1, u2,
            lambda v, rad, j=j, lj=lj: -based.A * lj / rad[j],
            rel_tol=rel_tol, what="holonomy"))
    return np.array(out)


def _based_turning_points(based: PeriodicSpec):
    if classify_case(based) == "hamiltonian_stationary":
        raise CaseMismatch("stationary data has no oscillation band")
    lnA2 = 2.0 * math.log(based.A)
    W = lambda u: based.log_G(u) - lnA2
    lo, hi = based.band()
    t = 0.5
    while W(lo + (0.0 - lo) * t) > 0:
        t *= 0.5
        if t < 1e-14:
            raise ValidationError("left turning point collapsed onto the band edge")
    u1 = brentq(W, lo + (0.0 - lo) * t, 0.0, xtol=1e-15, rtol=8.9e-16)
    if math.isfinite(hi):
        t = 0.5
        while W(hi - hi * t) > 0:
            t *= 0.5
            if t < 1e-14:
                raise ValidationError("right turning point collapsed onto the band edge")
        u2 = brentq(W, 0.0, hi - hi * t, xtol=1e-15, rtol=8.9e-16)
    else:
        b = 1.0
        while W(b) > 0:
            b *= 2.0
            if b > 1e200:
                raise ValidationError("right turning point bracket ran away")
        u2 = brentq(W, 0.0, b, xtol=1e-15, rtol=8.9e-16)
    # Newton polish: when d log G is huge at a root, brentq's xtol leaves a
    # W-residual far above evaluation noise, which would bias the orbit
    # quadratures near that endpoint
    hi_cap = hi if math.isfinite(hi) else math.inf
    u1 = _polish_root(based, W, u1, lo, hi_cap)
    u2 = _polish_root(based, W, u2, lo, hi_cap)
    return u1, u2


def _polish_root(based: PeriodicSpec, W, u: float, lo: float, hi: float) -> float:
    for _ in range(4):
        dW = based.dlog_G(u)
        if dW == 0.0:
            break
        step = W(u) / dW
        un = u - step
        if not (lo < un < hi):
            break
        u = un
        if abs(step) <= 1e-16 * (1.0 + abs(u)):
            break
    return u


def _warn_if_marginal(based: PeriodicSpec):
    margin = _stationary_margin(based)
    if 0 < margin < CONDITIONING_MARGIN:
        warnings.warn(
            f"(G(0) - A^2)/G(0) = {margin:.3e}; turning points and period are"
            " ill-conditioned this close to the stationary case",
            OrbitConditioningWarning, stacklevel=2)


def limit_gamma(spec: PeriodicSpec) -> np.ndarray:
    """Holonomy limits as A^2 -> G(0): -2 pi lambda_j alpha_j^{-1} (2 sum alpha_k^{-2})^{-1/2}."""
    based, _ = rebase(spec)
    lam = np.array(based.params.lambdas)
    alphas = np.array(based.alphas)
    norm = math.sqrt(2.0 * float(np.sum(alphas ** -2.0)))
    return -2.0 * math.pi * lam / (alphas * norm)


def limit_period(spec: PeriodicSpec) -> float:
    """Small-oscillation (harmonic) limit of S as A^2 -> G(0)."""
    based, _ = rebase(spec)
    alphas = np.array(based.alphas)
    return 2.0 * math.pi / math.sqrt(
        2.0 * float(np.prod(alphas)) * float(np.sum(alphas ** -2.0)))


@dataclass(frozen=True)
class PeriodicOrbit:
    """Computed orbit invariants of a PeriodicSpec (rebased internally)."""

    spec: PeriodicSpec          # as given
    based: PeriodicSpec         # rebased so the critical point sits at u = 0
    u_shift: float              # critical point of the original spec
    case: str                   # 'hamiltonian_stationary' or 'oscillating'
    u1: float
    u2: float
    S: float
    gamma: tuple
    stationary_margin: float

    @property
    def gamma_sum(self) -> float:
        return float(sum(self.gamma))


def compute_orbit(spec: PeriodicSpec, *, rel_tol: float = DEFAULT_REL_TOL) -> PeriodicOrbit:
    """Turning points, period and holonomies; stationary data gets its limits."""
    based, shift = rebase(spec)
    case = classify_case(spec)
    margin = _stationary_margin(based)
    if case == "hamiltonian_stationary":
        return PeriodicOrbit(spec, based, shift, case, shift, shift,
                             limit_period(spec), tuple(limit_gamma(spec)), margin)
    _warn_if_marginal(based)
    u1, u2 = _based_turning_points(based)
    alpha = based.params.alpha
    S = _orbit_quad(based, u1, u2, lambda v, rad: math.exp(0.5 * alpha * v),
                    rel_tol=rel_tol, what="oscillation period")
    gam = []
    for j, lj in enumerate(based.params.lambdas):
        gam.append(_orbit_quad(
            based, u1, u2,
            lambda v, rad, j=j, lj=lj: -based.A * lj / rad[j],
            rel_tol=rel_tol, what="holonomy"))
    return PeriodicOrbit(spec, based, shift, case, u1 + shift, u2 + shift, S,
                         tuple(gam), margin)


# -- periodicity detection ---------------------------------------------------

@dataclass(frozen=True)
class PeriodicityVerdict:
    periodic: bool
    case: str
    r: int | None
    p: tuple | None
    T: float | None
    max_residual: float
    qmax: int
    tol: float


def _best_rational(x: float, qmax: int) -> Fraction:
    """Best rational approximation with denominator <= qmax (continued fractions)."""
    return Fraction(x).limit_denominator(qmax)


def detect_periodicity(orbit: PeriodicOrbit, *, qmax: int = 64,
                       tol: float = None) -> PeriodicityVerdict:
    """Decide whether the orbit closes up and compute its minimal period.

    Stationary case: periodic iff the ratios (lambda_j/alpha_j) /
    (lambda_1/alpha_1) are rational with common denominator <= qmax; the
    minimal period is then 2 pi R / (A |lambda_1/alpha_1| g) with R the common
    denominator and g the gcd of the numerators.

    Oscillating case: periodic iff every gamma_j is within tol of 2 pi p_j / r
    for a common r <= qmax; the minimal period is r S.
    """
    if tol is None:
        tol = 1e-9 * qmax
    based = orbit.based

    if orbit.case == "hamiltonian_stationary":
        lam = based.params.lambdas
        rho = [l / a for l, a in zip(lam, based.alphas)]
        c = [x / rho[0] for x in rho]
        fracs = [_best_rational(x, qmax) for x in c]
        R = 1
        for f in fracs:
            R = R * f.denominator // math.gcd(R, f.denominator)
        if R > qmax:
            resid = max(abs(x - float(f)) for x, f in zip(c, fracs))
            return PeriodicityVerdict(False, orbit.case, None, None, None, resid, qmax, tol)
        k = [round(x * R) for x in c]
        resid = max(abs(x * R - kk) / R for x, kk in zip(c, k))
        if resid > tol:
            return PeriodicityVerdict(False, orbit.case, None, None, None, resid, qmax, tol)
        g = 0
        for kk in k:
            g = math.gcd(g, abs(kk))
        T = 2.0 * math.pi * R / (based.A * abs(rho[0]) * g)
        # with this normalization the rational multipliers q_j = k_j sign(rho_1)/g
        # are integers; report them and r = 1
        sgn = 1 if rho[0] > 0 else -1
        q = tuple(sgn * kk // g for kk in k)
        return PeriodicityVerdict(True, orbit.case, 1, q, T, resid, qmax, tol)

    x = [gj / (2.0 * math.pi) for gj in orbit.gamma]
    best = None
    # continued-fraction candidates first, then the exhaustive denominator scan
    fracs = [_best_rational(xx, qmax) for xx in x]
    R = 1
    for f in fracs:
        R = R * f.denominator // math.gcd(R, f.denominator)
    candidates = list(range(1, qmax + 1)) if R > qmax else [R] + list(range(1, qmax + 1))
    for r in candidates:
        p = [round(xx * r) for xx in x]
        resid = max(abs(gj - 2.0 * math.pi * pp / r) for gj, pp in zip(orbit.gamma, p))
        if resid <= tol:
            g = r
            for pp in p:
                g = math.gcd(g, abs(pp))
            r_min = r // g
            p_min = tuple(pp // g for pp in p)
            return PeriodicityVerdict(True, orbit.case, r_min, p_min,
                                      r_min * orbit.S, resid, qmax, tol)
    resid = max(abs(xx - float(f)) for xx, f in zip(x, fracs))
    return PeriodicityVerdict(False, orbit.case, None, None, None, resid, qmax, tol)


# -- closed-form stationary profiles and ODE-backed orbit profiles -----------

class HamiltonianStationaryProfile:
    """Closed-form solution with u = 0: phases wind linearly, theta likewise.

    phi_j(s) = psi_j - lambda_j A s / alpha_j
    theta(s) = sum(psi) - pi/2 + alpha A s
    """

    kind = "centred"

    def __init__(self, spec: PeriodicSpec):
        if classify_case(spec) != "hamiltonian_stationary":
            raise CaseMismatch(
                "data does not satisfy A^2 = G(u_*); the u = 0 closed form does not apply")
        self.spec, self.u_shift = rebase(spec)
        self.lambdas = self.spec.params.lambdas
        self.C = 1.0
        self.alpha = self.spec.params.alpha
        self.n = self.spec.n
        self._rates = tuple(-l * self.spec.A / a
                            for l, a in zip(self.lambdas, self.spec.alphas))

    def phis_of(self, s: float):
        return np.array(self.spec.psi) + np.array(self._rates) * s

    def w_of(self, s: float):
        r = np.sqrt(np.array(self.spec.alphas))
        return r * np.exp(1j * self.phis_of(s))

    def theta_of(self, s: float) -> float:
        return sum(self.spec.psi) - 0.5 * math.pi + self.alpha * self.spec.A * s

    def u_of(self, s: float) -> float:
        return 0.0

    def wdot_of(self, s: float):
        return 1j * np.array(self._rates) * self.w_of(s)

    def theta_rate_of(self, s: float) -> float:
        return self.alpha * self.spec.A


def hamiltonian_stationary(spec: PeriodicSpec) -> HamiltonianStationaryProfile:
    return HamiltonianStationaryProfile(spec)


class OrbitProfile:
    """ODE-backed centred profile for an oscillating spec, cached per s."""

    kind = "centred"

    def __init__(self, spec: PeriodicSpec, *, rtol: float = 1e-11, atol: float = 1e-13):
        self.spec, self.u_shift = rebase(spec)
        self.tspec = self.spec.trajectory_spec()
        self.lambdas = self.spec.params.lambdas
        self.C = 1.0
        self.alpha = self.spec.params.alpha
        self.n = self.spec.n
        self.rtol = rtol
        self.atol = atol
        self._cache = {}

    def prefetch(self, s_values):
        missing = sorted(set(float(s) for s in s_values) - set(self._cache))
        if not missing:
            return
        traj = sample_reduced(self.tspec, missing, rtol=self.rtol, atol=self.atol)
        for i, s in enumerate(traj.s):
            st = traj.y[i]
            self._cache[float(s)] = st

    def _state(self, s: float):
        s = float(s)
        if s not in self._cache:
            self.prefetch([s])
        return self._cache[s]

    def u_of(self, s: float) -> float:
        return float(self._state(s)[0])

    def phis_of(self, s: float):
        return self._state(s)[1:self.n + 1]

    def w_of(self, s: float):
        st = self._state(s)
        lam = np.array(self.lambdas)
        r = np.sqrt(np.array(self.spec.alphas) + lam * st[0])
        return r * np.exp(1j * st[1:self.n + 1])

    def theta_of(self, s: float) -> float:
        return float(self._state(s)[-1])

    def wdot_of(self, s: float):
        w = self.w_of(s)
        theta = self.theta_of(s)
        lam = np.array(self.lambdas)
        # dw_j/ds = lambda_j e^{i theta} conj(prod_{k != j} w_k)
        full = np.prod(w)
        return lam * np.exp(1j * theta) * np.conj(full / w)

    def theta_rate_of(self, s: float) -> float:
        return self.alpha * self.spec.A * math.exp(-0.5 * self.alpha * self.u_of(s))


# -- reduction path test and data search -------------------------------------

def reduction_check(base: PeriodicSpec, alpha_values, *, mirror: bool = False,
                    rel_tol: float = DEFAULT_REL_TOL):
    """Add a slot with large base radius and track the surviving holonomies.

    Default path: append a lambda = -1 slot with alpha_n -> infinity,
    A = A_base sqrt(alpha_n), and alpha_1 adjusted to keep the critical
    point at u = 0.  The base slots' holonomies converge to those of the
    base spec and the new slot's to 0, at rate O(1/alpha_n).  With
    ``mirror=True`` the new slot is a lambda = +1 slot prepended with
    alpha_1 -> infinity (compensating on the base's first negative slot,
    or its first slot when all lambdas are positive).  Returns a list of
    records per alpha value.
    """
    base_based, _ = rebase(base)
    gamma_ref = holonomies(base_based, rel_tol=rel_tol)
    lam = base_based.params.lambdas
    out = []
    for an in alpha_values:
        an = float(an)
        if mirror:
            # compensate 1/an on a slot so sum(lambda_j/alpha_j) stays put
            alphas = list(base_based.alphas)
            negs = [j for j, l in enumerate(lam) if l < 0]
            j = negs[0] if negs else 0
            inv = 1.0 / alphas[j] + (1.0 / an if negs else -1.0 / an)
            alphas[j] = 1.0 / inv
            params = SolitonParams((1.0,) + lam, 1.0, base_based.params.alpha)
            spec = PeriodicSpec(params, (an,) + tuple(alphas),
                                base_based.A * math.sqrt(an))
            gam = holonomies(spec, rel_tol=rel_tol)
            gam_keep, gam_new = gam[1:], gam[0]
        else:
            if lam[0] != 1.0:
                raise ValidationError(
                    "reduction path adjusts a lambda = +1 slot; need lambda_1 = +1")
            inv_a1 = 1.0 / base_based.alphas[0] + 1.0 / an
            alphas = (1.0 / inv_a1,) + base_based.alphas[1:] + (an,)
            params = SolitonParams(lam + (-1.0,), 1.0, base_based.params.alpha)
            spec = PeriodicSpec(params, alphas, base_based.A * math.sqrt(an))
            gam = holonomies(spec, rel_tol=rel_tol)
            gam_keep, gam_new = gam[:-1], gam[-1]
        out.append({
            "alpha_n": an,
            "gamma": gam,
            "gamma_ref": gamma_ref,
            "deviation": float(max(np.abs(gam_keep - gamma_ref).max(), abs(gam_new))),
        })
    return out


def search_periodic_data(lambdas, alpha: float, gamma_target, *, seed=None,
                         tol: float = 1e-8, max_iter: int = 60) -> PeriodicSpec:
    """Find (alphas, A) whose holonomies hit gamma_target, by damped Newton.

    Unknowns are (log alpha_1..log alpha_n, log A); the system couples the
    critical-point constraint sum(lambda_j/alpha_j) + alpha = 0 (which fixes
    the re-basing gauge) with the n holonomy equations.  The Jacobian is
    finite-difference; infeasible trials (A beyond the G maximum) are damped
    away.
    """
    lambdas = tuple(float(l) for l in lambdas)
    params = SolitonParams(lambdas, 1.0, float(alpha))
    if not params.is_normalized:
        raise ValidationError("search expects normalized lambdas (+-1, positives first)")
    target = np.asarray(gamma_target, dtype=float)
    n = len(lambdas)
    if target.size != n:
        raise ValidationError("gamma_target must have length n")

    def residual(x):
        alphas = tuple(np.exp(x[:n]))
        A = math.exp(x[n])
        try:
            spec = PeriodicSpec(params, alphas, A)
            if classify_case(spec) == "hamiltonian_stationary":
                return None
            gam = holonomies(spec)
        except (ValidationError, ValueError, OverflowError):
            return None
        constraint = sum(l / a for l, a in zip(lambdas, alphas)) + alpha
        return np.concatenate([[constraint], gam - target])

    if seed is not None:
        alphas0 = np.asarray(seed[0], dtype=float)
        A0 = float(seed[1])
        x = np.concatenate([np.log(alphas0), [math.log(A0)]])
        r = residual(x)
        if r is None:
            raise ValidationError("seed data is infeasible")
    else:
        x, r = _search_seed(params, target, residual)

    rnorm = float(np.linalg.norm(r))
    h = 1e-6
    for _ in range(max_iter):
        if float(np.abs(r[1:]).max()) < tol and abs(r[0]) < tol:
            return PeriodicSpec(params, tuple(np.exp(x[:n])), math.exp(x[n]))
        J = np.empty((n + 1, n + 1))
        for k in range(n + 1):
            xp = x.copy(); xp[k] += h
            xm = x.copy(); xm[k] -= h
            rp, rm = residual(xp), residual(xm)
            if rp is None or rm is None:
                # one-sided fallback at the feasibility boundary
                rp = residual(xp) if rp is not None else r
                rm = residual(xm) if rm is not None else r
                J[:, k] = (rp - rm) / h
            else:
                J[:, k] = (rp - rm) / (2 * h)
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(J, -r, rcond=None)
        lam_d = 1.0
        for _ in range(15):
            trial = x + lam_d * step
            tr = residual(trial)
            if tr is not None and float(np.linalg.norm(tr)) < rnorm:
                break
            lam_d *= 0.5
        else:
            from .errors import NonConvergence
            raise NonConvergence("periodic data search stalled (damping exhausted)")
        x, r, rnorm = trial, tr, float(np.linalg.norm(tr))
    if float(np.abs(r[1:]).max()) < tol and abs(r[0]) < tol:
        return PeriodicSpec(params, tuple(np.exp(x[:n])), math.exp(x[n]))
    from .errors import NonConvergence
    raise NonConvergence(f"periodic data search did not converge in {max_iter} iterations")


def _search_seed(params: SolitonParams, target: np.ndarray, residual):
    """Seed from the harmonic limit when possible, else a coarse grid scan."""
    lam = np.array(params.lambdas)
    alpha = params.alpha
    n = params.n
    tsum = float(target.sum())
    if alpha != 0.0 and tsum * alpha > 0:
        # harmonic-limit inversion: lambda_j/alpha_j = -gamma_j t/(2 pi),
        # scale t fixed by the constraint
        t = -2.0 * math.pi * alpha / tsum
        if t > 0:
            b = -target * t / (2.0 * math.pi)
            alphas = lam / b
            if np.all(alphas > 0):
                spec = PeriodicSpec(params, tuple(alphas), 1.0)  # A replaced below
                based, _ = rebase(spec)
                Amax = math.exp(0.5 * based.log_G(0.0))
                for frac in (0.9, 0.7, 0.5):
                    x = np.concatenate([np.log(alphas), [math.log(frac * Amax)]])
                    r = residual(x)
                    if r is not None:
                        return x, r
    # coarse scan over symmetric-ish alphas and A fractions
    best = None
    for scale in (0.25, 0.5, 1.0, 2.0, 4.0):
        alphas = np.full(n, scale)
        # adjust the first slot so the constraint is roughly met when possible
        s_rest = sum(l / a for l, a in zip(params.lambdas[1:], alphas[1:])) + alpha
        if params.lambdas[0] > 0 and s_rest < 0:
            alphas[0] = -1.0 / s_rest
        try:
            spec = PeriodicSpec(params, tuple(alphas), 1.0)
            based, _ = rebase(spec)
            Amax = math.exp(0.5 * based.log_G(0.0))
        except (ValidationError, ValueError):
            continue
        for frac in (0.3, 0.6, 0.9):
            x = np.concatenate([np.log(alphas), [math.log(frac * Amax)]])
            r = residual(x)
            if r is not None:
                nrm = float(np.linalg.norm(r))
                if best is None or nrm < best[0]:
                    best = (nrm, x, r)
    if best is None:
        raise ValidationError("could not find a feasible starting point for the search")
    return best[1], best[2]


def topology_tag(spec: PeriodicSpec) -> str:
    """Submanifold type of a closed orbit's immersion: compact only when m = n."""
    m, n = spec.m, spec.n
    if m == n:
        return f"S1 x S{n - 1}"
    return f"S1 x S{m - 1} x R{n - m}"


# -- the associated eternal flow ---------------------------------------------

@dataclass(frozen=True)
class FlowSlice:
    """Topology descriptor of the time-t slice of the associated flow."""

    m: int
    n: int
    t: float
    topology: str
    singular: bool


def brakke_family(spec: PeriodicSpec, t: float) -> FlowSlice:
    """Descriptor for the quadric level set sum lambda_j x_j^2 = C(t) ~ t.

    Positive t keeps the m positive directions compact, negative t the n - m
    negative ones; t = 0 is the cone with an isolated singular point at the
    origin.
    """
    m, n = spec.m, spec.n
    if not 1 <= m < n:
        raise CaseMismatch("the eternal flow family needs mixed signs (1 <= m < n)")
    if t > 0:
        topo = f"S1 x S{m - 1} x R{n - m}"
        singular = False
    elif t < 0:
        topo = f"S1 x S{n - m - 1} x R{m}"
        singular = False
    else:
        topo = f"cone over S1 x S{m - 1} x S{n - m - 1}"
        singular = True
    return FlowSlice(m, n, float(t), topo, singular)
