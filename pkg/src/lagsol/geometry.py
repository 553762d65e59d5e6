"""Pointwise differential geometry of the constructed Lagrangians.

A centred profile (expander, shrinker or periodic orbit) immerses the product
of a quadric { sum lambda_j x_j^2 = C } with its curve parameter via

    F(x, t) = (x_1 w_1(t), ..., x_n w_n(t)),

a translating profile sends a free base point x in R^{n-1} to

    z(x, t) = (x_1 w_1(t), ..., x_{n-1} w_{n-1}(t), -1/2 sum lambda_j x_j^2 + beta(t)).

Everything here works from a small duck-typed profile surface: n, alpha, C,
lambdas, w_of(t), wdot_of(t), theta_of(t), theta_rate_of(t) (plus beta data
for translators, supplied by the caller through TranslatorChart).

The frame at a point consists of the quadric tangent directions multiplied
into w plus the curve velocity.  From its complex Gram matrix M = F^H F we
get the induced metric g = Re M, the Lagrangian defect max |Im M|, the
Lagrangian angle as arg det of the frame, the mean curvature H = J grad
theta, and the normal projections entering the soliton equations.  A slow
finite-difference mean curvature (Laplace-Beltrami of the immersion on a
local chart, Richardson extrapolated) serves as an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

FD_STEP_SCALE = 1e-3


def quadric_tangent_basis(lambdas, x):
    """Orthonormal tangent basis of { sum lambda_j x_j^2 = C } at x.

    Returns an (n-1, n) array of row vectors orthogonal to the gradient
    direction nu ~ (lambda_1 x_1, ..., lambda_n x_n), built by Gram-Schmidt
    from the coordinate axes with the axis of largest |lambda_j x_j| dropped
    (deterministic pivot).  The orientation is fixed so that the rows followed
    by nu form a right-handed basis of R^n.
    """
    lam = np.asarray(lambdas, dtype=float)
    x = np.asarray(x, dtype=float)
    n = x.size
    grad = lam * x
    norm = np.linalg.norm(grad)
    if norm == 0:
        raise ValidationError("quadric gradient vanishes; point is singular")
    nu = grad / norm
    drop = int(np.argmax(np.abs(grad)))
    rows = []
    for k in range(n):
        if k == drop:
            continue
        v = np.zeros(n)
        v[k] = 1.0
        v -= (v @ nu) * nu
        for e in rows:
            v -= (v @ e) * e
        vn = np.linalg.norm(v)
        if vn < 1e-12:
            raise ValidationError("degenerate tangent basis at quadric point")
        rows.append(v / vn)
    basis = np.array(rows).reshape(n - 1, n)
    if n > 1:
        full = np.vstack([basis, nu[None, :]])
        if np.linalg.det(full) < 0:
            basis[0] = -basis[0]
    return basis


@dataclass
class FramedPoint:
    """Frame and first fundamental data at one point of the immersion."""

    z: np.ndarray             # immersion point in C^n
    frame: np.ndarray         # (n, n) complex; row a is the tangent vector f_a
    gram: np.ndarray          # complex Gram matrix M = conj(frame) frame^T
    theta: float              # Lagrangian angle carried by the profile
    theta_rate: float         # d theta / dt in the chart's curve parameter

    @property
    def metric(self) -> np.ndarray:
        return self.gram.real

    @property
    def lagrangian_residual(self) -> float:
        return float(np.abs(self.gram.imag).max())

    @property
    def angle_residual(self) -> float:
        """|arg det frame - theta| wrapped to (-pi, pi]."""
        det = np.linalg.det(self.frame)
        d = np.angle(det) - self.theta
        return abs(math.remainder(d, 2.0 * math.pi))

    def metric_inverse(self) -> np.ndarray:
        return np.linalg.inv(self.metric)

    def tangent_projection(self, v: np.ndarray) -> np.ndarray:
        """Real-orthogonal projection of v in C^n ~ R^2n onto the tangent space."""
        coeff = self.frame @ np.conj(v)
        comp = self.metric_inverse() @ coeff.real
        return comp @ self.frame

    def normal_projection(self, v: np.ndarray) -> np.ndarray:
        return v - self.tangent_projection(v)

    def mean_curvature(self) -> np.ndarray:
        """H = J grad theta; theta varies only along the curve direction."""
        ginv = self.metric_inverse()
        return 1j * self.theta_rate * (ginv[-1] @ self.frame)


def centred_frame(profile, x, t: float) -> FramedPoint:
    """Frame of F(x, t) = x * w(t) at a quadric point x and curve parameter t."""
    x = np.asarray(x, dtype=float)
    n = profile.n
    if x.size != n:
        raise ValidationError("quadric point has wrong dimension")
    qc = float(np.sum(np.asarray(profile.lambdas) * x * x))
    if abs(qc - profile.C) > 1e-9 * max(1.0, abs(profile.C)):
        raise ValidationError(
            f"point is not on the quadric: sum lambda x^2 = {qc!r}, expected {profile.C!r}")
    w = np.asarray(profile.w_of(t))
    wdot = np.asarray(profile.wdot_of(t))
    z = x * w
    if n == 1:
        frame = (x * wdot)[None, :]
    else:
        basis = quadric_tangent_basis(profile.lambdas, x)
        frame = np.vstack([basis * w[None, :], (x * wdot)[None, :]])
    gram = frame @ np.conj(frame.T)
    return FramedPoint(z, frame, gram, float(profile.theta_of(t)),
                       float(profile.theta_rate_of(t)))


def curve_metric_coefficient(profile, x, t: float) -> float:
    """Closed form prod r_j^2 * sum_j lambda_j^2 x_j^2 / r_j^2 for g_tt.

    Valid when the profile's curve parameter is the system parameter s of the
    phase equations; profiles in another parameter pick up (ds/dt)^2.
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(profile.w_of(t))
    r2 = np.abs(w) ** 2
    lam = np.asarray(profile.lambdas)
    return float(np.prod(r2) * np.sum(lam ** 2 * x ** 2 / r2))


def position_normal_closed_form(profile, x, t: float, *, s_rate: float = 1.0) -> np.ndarray:
    """Normal part of the position, C prod(r_j) sin(phi - theta) (ds/dt) / g_tt * J f_t.

    Cross-checks FramedPoint.normal_projection(z) on centred profiles.  s_rate
    is ds/dt for profiles whose curve parameter t is not the system parameter
    s (1 for those parametrized by s itself).
    """
    fp = centred_frame(profile, x, t)
    w = np.asarray(profile.w_of(t))
    # sin(phi - theta) from the full product, robust to phase wrapping
    full = np.prod(w)
    sin_d = np.imag(np.exp(-1j * fp.theta) * full) / np.abs(full)
    gtt = fp.metric[-1, -1]
    return profile.C * np.abs(full) * sin_d * s_rate / gtt * (1j * fp.frame[-1])


def selfsimilar_residual(profile, x, t: float) -> float:
    """| alpha F_perp - C H | at one point of a centred profile."""
    fp = centred_frame(profile, x, t)
    H = fp.mean_curvature()
    Fperp = fp.normal_projection(fp.z)
    return float(np.linalg.norm(profile.alpha * Fperp - profile.C * H))


# -- finite-difference mean curvature ---------------------------------------

def fd_step(u: float, scale: float = FD_STEP_SCALE) -> float:
    """Chart step h = scale * sqrt(1 + |u|), tied to the local radius scale."""
    return scale * math.sqrt(1.0 + abs(u))


def _fd_derivatives(F, xi0: np.ndarray, h: float):
    """Central first and second derivatives of F: R^n -> C^n on a full stencil."""
    n = xi0.size
    F0 = F(xi0)
    d1 = np.empty((n,) + F0.shape, dtype=complex)
    d2 = np.empty((n, n) + F0.shape, dtype=complex)
    plus = []
    minus = []
    for a in range(n):
        xp = xi0.copy(); xp[a] += h
        xm = xi0.copy(); xm[a] -= h
        Fp, Fm = F(xp), F(xm)
        plus.append(Fp); minus.append(Fm)
        d1[a] = (Fp - Fm) / (2.0 * h)
        d2[a, a] = (Fp - 2.0 * F0 + Fm) / (h * h)
    for a in range(n):
        for b in range(a + 1, n):
            xpp = xi0.copy(); xpp[a] += h; xpp[b] += h
            xpm = xi0.copy(); xpm[a] += h; xpm[b] -= h
            xmp = xi0.copy(); xmp[a] -= h; xmp[b] += h
            xmm = xi0.copy(); xmm[a] -= h; xmm[b] -= h
            mixed = (F(xpp) - F(xpm) - F(xmp) + F(xmm)) / (4.0 * h * h)
            d2[a, b] = mixed
            d2[b, a] = mixed
    return d1, d2


def _laplace_beltrami(d1, d2):
    """Mean curvature from chart derivatives: g^{ab}(d2_ab - Gamma^c_ab d1_c)."""
    n = d1.shape[0]
    g = np.empty((n, n))
    for a in range(n):
        for b in range(n):
            g[a, b] = float(np.sum(d1[a] * np.conj(d1[b])).real)
    ginv = np.linalg.inv(g)
    # dg[a, b, d] = partial_a g_{bd} = <d2_ab, d1_d> + <d1_b, d2_ad>
    dg = np.empty((n, n, n))
    for a in range(n):
        for b in range(n):
            for d in range(n):
                dg[a, b, d] = float(
                    np.sum(d2[a, b] * np.conj(d1[d])).real
                    + np.sum(d1[b] * np.conj(d2[a, d])).real)
    H = np.zeros(d1.shape[1:], dtype=complex)
    for a in range(n):
        for b in range(n):
            acc = d2[a, b].astype(complex).copy()
            for c in range(n):
                gamma = 0.0
                for d in range(n):
                    gamma += 0.5 * ginv[c, d] * (dg[a, b, d] + dg[b, a, d] - dg[d, a, b])
                acc -= gamma * d1[c]
            H += ginv[a, b] * acc
    return H


def mean_curvature_fd(F, xi0, h: float, *, richardson: bool = True) -> np.ndarray:
    """Finite-difference H = Laplace-Beltrami of the immersion F at chart point xi0.

    Second-order central differences; with richardson=True the h and h/2
    results are extrapolated to fourth order.
    """
    xi0 = np.asarray(xi0, dtype=float)
    d1, d2 = _fd_derivatives(F, xi0, h)
    Hh = _laplace_beltrami(d1, d2)
    if not richardson:
        return Hh
    d1, d2 = _fd_derivatives(F, xi0, 0.5 * h)
    Hh2 = _laplace_beltrami(d1, d2)
    return (4.0 * Hh2 - Hh) / 3.0


class CentredChart:
    """Local chart (xi, t) around (x0, t0) on a centred-profile immersion.

    Base points move in the tangent plane at x0 and are pulled back to the
    quadric by the radial scaling x -> x sqrt(C / sum lambda x^2).
    """

    def __init__(self, profile, x0, t0: float):
        self.profile = profile
        self.x0 = np.asarray(x0, dtype=float)
        self.t0 = float(t0)
        self.n = profile.n
        self.lam = np.asarray(profile.lambdas, dtype=float)
        if self.n > 1:
            self.basis = quadric_tangent_basis(profile.lambdas, self.x0)

    def base_point(self, xi):
        if self.n == 1:
            return self.x0
        x = self.x0 + np.asarray(xi) @ self.basis
        q = float(np.sum(self.lam * x * x))
        if q <= 0:
            raise ValidationError("chart left the quadric's radial domain")
        return x * math.sqrt(self.profile.C / q)

    def __call__(self, coords):
        coords = np.asarray(coords, dtype=float)
        x = self.base_point(coords[:-1])
        t = self.t0 + coords[-1]
        return x * np.asarray(self.profile.w_of(t))

    def center(self):
        return np.zeros(self.n)


def centred_fd_mean_curvature(profile, x, t: float, *, scale: float = FD_STEP_SCALE,
                              richardson: bool = True) -> np.ndarray:
    """Finite-difference H at (x, t); the analytic route is mean_curvature()."""
    chart = CentredChart(profile, x, t)
    h = fd_step(profile.u_of(t) if hasattr(profile, "u_of") else 0.0, scale)
    return mean_curvature_fd(chart, chart.center(), h, richardson=richardson)
