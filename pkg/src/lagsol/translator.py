"""Translating solitons on non-centred quadrics.

A base profile in n-1 complex dimensions (expander, periodic orbit or
Hamiltonian stationary, normalized C = 1) together with one extra complex
coordinate gives a translating Lagrangian in C^n:

    z(x, t) = (x_1 w_1(t), ..., x_{n-1} w_{n-1}(t),
               -1/2 sum_j lambda_j x_j^2 + beta(t)),      x free in R^{n-1},

where beta solves d beta/ds = e^{i theta} conj(w_1 ... w_{n-1}) in the system
parameter s.  The soliton translates with velocity T = alpha Re e_n: the
defining equation is T_perp = H.

beta in closed form: for alpha != 0,

    beta = u/2 - (i/alpha) theta + K,

so theta + alpha Im z_n is constant on the whole submanifold (the angle is a
linear function of the translation direction).  For alpha = 0 the real part
is still u/2 + Re K while Im beta = -A s + Im K drifts linearly in s by the
first integral A of the base.

The default K = -u_*/2 places the waist at Re beta = 0; with base phases
psi = 0 the point z(0, 0) then sits at -i pi / (2 alpha).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .expander import ExpanderProfile, s_of_y
from .geometry import FD_STEP_SCALE, FramedPoint, fd_step, mean_curvature_fd
from .periodic import (PeriodicSpec, OrbitProfile, compute_orbit,
                       hamiltonian_stationary)


class TranslatorProfile:
    """Translator built over an (n-1)-dimensional centred base profile."""

    kind = "translator"

    def __init__(self, base, *, K: complex = None, first_integral: float = None,
                 orbit=None):
        if getattr(base, "kind", None) != "centred":
            raise ValidationError("translator base must be a centred profile")
        if getattr(base, "C", 1.0) != 1.0:
            raise ValidationError("translator base must be normalized to C = 1")
        self.base = base
        self.alpha = float(base.alpha)
        self.n = base.n + 1
        self.base_lambdas = tuple(base.lambdas)
        self.orbit = orbit
        if first_integral is None:
            if hasattr(base, "first_integral_value"):
                first_integral = base.first_integral_value
            elif hasattr(base, "spec"):
                first_integral = base.spec.A
            else:
                raise ValidationError("base profile does not expose its first integral")
        self.first_integral = float(first_integral)
        u_star = getattr(base, "u_star", 0.0)
        self.K = complex(K) if K is not None else complex(-0.5 * u_star, 0.0)

    # -- constructors --------------------------------------------------------

    @classmethod
    def from_expander_base(cls, alpha: float, a, psi=None, *, K: complex = None):
        """Translator whose base is an expander-type profile (all lambda = +1)."""
        return cls(ExpanderProfile(alpha, a, psi), K=K)

    @classmethod
    def from_orbit_base(cls, spec: PeriodicSpec, *, K: complex = None):
        """Translator over a periodic-orbit (or stationary) base."""
        from .periodic import classify_case
        if classify_case(spec) == "hamiltonian_stationary":
            base = hamiltonian_stationary(spec)
            orbit = None
        else:
            base = OrbitProfile(spec)
            orbit = compute_orbit(spec)
        return cls(base, K=K, orbit=orbit)

    # -- scalar curve data ---------------------------------------------------

    def s_of(self, t: float) -> float:
        """System parameter s of the base at curve parameter t."""
        if isinstance(self.base, ExpanderProfile):
            return s_of_y(self.base, t)
        return float(t)

    def s_rate_of(self, t: float) -> float:
        if isinstance(self.base, ExpanderProfile):
            return self.base.s_rate_of(t)
        return 1.0

    def theta_of(self, t: float) -> float:
        return self.base.theta_of(t)

    def theta_rate_of(self, t: float) -> float:
        return self.base.theta_rate_of(t)

    def beta_of(self, t: float) -> complex:
        u = self.base.u_of(t)
        if self.alpha != 0.0:
            return 0.5 * u - 1j * self.base.theta_of(t) / self.alpha + self.K
        return complex(0.5 * u + self.K.real,
                       -self.first_integral * self.s_of(t) + self.K.imag)

    def beta_rate_of(self, t: float) -> complex:
        """d beta/dt; equals e^{i theta} conj(prod w) ds/dt."""
        if self.alpha != 0.0:
            udot = self._u_rate(t)
            return 0.5 * udot - 1j * self.base.theta_rate_of(t) / self.alpha
        return complex(0.5 * self._u_rate(t), -self.first_integral * self.s_rate_of(t))

    def _u_rate(self, t: float) -> float:
        if isinstance(self.base, ExpanderProfile):
            return 2.0 * t
        w = np.asarray(self.base.w_of(t))
        wdot = np.asarray(self.base.wdot_of(t))
        lam = np.asarray(self.base_lambdas)
        # u = mean of lambda_j (|w_j|^2 - alpha_j): du/dt = 2 lambda_j Re(conj(w) wdot)
        return float(np.mean(2.0 * lam * (np.conj(w) * wdot).real))

    # -- the immersion and its frame ----------------------------------------

    def immersion(self, x, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.size != self.n - 1:
            raise ValidationError("base point must have n - 1 coordinates")
        lam = np.asarray(self.base_lambdas)
        w = np.asarray(self.base.w_of(t))
        z = np.empty(self.n, dtype=complex)
        z[:-1] = x * w
        z[-1] = -0.5 * float(np.sum(lam * x * x)) + self.beta_of(t)
        return z

    def frame_at(self, x, t: float) -> FramedPoint:
        x = np.asarray(x, dtype=float)
        lam = np.asarray(self.base_lambdas)
        w = np.asarray(self.base.w_of(t))
        wdot = np.asarray(self.base.wdot_of(t))
        n = self.n
        frame = np.zeros((n, n), dtype=complex)
        for j in range(n - 1):
            frame[j, j] = w[j]
            frame[j, -1] = -lam[j] * x[j]
        frame[-1, :-1] = x * wdot
        frame[-1, -1] = self.beta_rate_of(t)
        gram = frame @ np.conj(frame.T)
        return FramedPoint(self.immersion(x, t), frame, gram,
                           float(self.theta_of(t)), float(self.theta_rate_of(t)))

    def translation_vector(self) -> np.ndarray:
        T = np.zeros(self.n, dtype=complex)
        T[-1] = self.alpha
        return T

    # -- invariants and residuals -------------------------------------------

    def maslov_invariant(self, x, t: float) -> float:
        """theta + alpha Im z_n; constant (= alpha Im K) for alpha != 0."""
        z = self.immersion(x, t)
        return float(self.theta_of(t) + self.alpha * z[-1].imag)

    def soliton_residual(self, x, t: float) -> float:
        """| T_perp - H | at one point."""
        fp = self.frame_at(x, t)
        H = fp.mean_curvature()
        Tp = fp.normal_projection(self.translation_vector())
        return float(np.linalg.norm(Tp - H))

    @property
    def oscillates(self) -> bool:
        """True when the base orbit oscillates in u (case (ii) base)."""
        return self.orbit is not None and self.orbit.case == "oscillating"


class TranslatorChart:
    """Chart (xi, t) around (x0, t0); the base coordinates are already flat."""

    def __init__(self, profile: TranslatorProfile, x0, t0: float):
        self.profile = profile
        self.x0 = np.asarray(x0, dtype=float)
        self.t0 = float(t0)
        self.n = profile.n

    def __call__(self, coords):
        coords = np.asarray(coords, dtype=float)
        return self.profile.immersion(self.x0 + coords[:-1], self.t0 + coords[-1])

    def center(self):
        return np.zeros(self.n)


def translator_fd_mean_curvature(profile: TranslatorProfile, x, t: float, *,
                                 scale: float = FD_STEP_SCALE,
                                 richardson: bool = True) -> np.ndarray:
    chart = TranslatorChart(profile, x, t)
    h = fd_step(profile.base.u_of(t), scale)
    return mean_curvature_fd(chart, chart.center(), h, richardson=richardson)
