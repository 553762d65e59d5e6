"""Quadrature helpers shared by the profile and orbit modules.

Two substitutions keep every integral on a finite interval with a smooth
integrand: improper integrals over [0, inf) go through t = tan(xi), and
orbit integrals with inverse-square-root endpoint singularities go through
v = u1 + (u2 - u1) sin^2(xi), after which the Jacobian sin(2 xi) cancels the
singularity exactly.  Both wrap QUADPACK via scipy.
"""

from __future__ import annotations

import math

from scipy.integrate import quad

from .errors import ToleranceFailure

DEFAULT_REL_TOL = 1e-11


def _checked(res, rel_tol, what):
    if len(res) > 3:
        # QUADPACK attached a warning message; accept only if the error
        # estimate still meets the requested accuracy.
        val, abserr = res[0], res[1]
        if abserr > max(100 * rel_tol * abs(val), 1e-12):
            raise ToleranceFailure(f"quadrature failed for {what}: est. error {abserr:.2e}")
        return val
    return res[0]


def finite_quad(f, a: float, b: float, *, rel_tol: float = DEFAULT_REL_TOL,
                breaks=(), what: str = "integral") -> float:
    """Adaptive integral of f over [a, b] with optional interior breakpoints."""
    if a == b:
        return 0.0
    pts = sorted(p for p in breaks if min(a, b) < p < max(a, b))
    res = quad(f, a, b, epsabs=0.0, epsrel=rel_tol, limit=200,
               points=pts or None, full_output=1)
    return _checked(res, rel_tol, what)


def improper_quad(f, *, rel_tol: float = DEFAULT_REL_TOL, scale_breaks=(),
                  what: str = "integral") -> float:
    """Adaptive integral of f over [0, inf) via t = tan(xi).

    scale_breaks lists t-values where the integrand changes character
    (e.g. peak widths ~ a^(-1/2) for large a); they become QUADPACK
    breakpoints so narrow features are never skipped.
    """

    def g(xi):
        t = math.tan(xi)
        c = math.cos(xi)
        return f(t) / (c * c)

    pts = sorted({math.atan(b) for b in scale_breaks if b > 0})
    pts = [p for p in pts if 0.0 < p < math.pi / 2]
    res = quad(g, 0.0, math.pi / 2, epsabs=0.0, epsrel=rel_tol, limit=200,
               points=pts or None, full_output=1)
    return _checked(res, rel_tol, what)


def sin2_quad(F, u1: float, u2: float, *, rel_tol: float = DEFAULT_REL_TOL,
              breaks=(), what: str = "integral") -> float:
    """Integral of F over [u1, u2] where F has 1/sqrt endpoint singularities.

    F must blow up no faster than ((v-u1)(u2-v))^(-1/2); the substitution
    v = u1 + (u2-u1) sin^2(xi) renders the transformed integrand smooth on
    [0, pi/2].  breaks are v-locations of additional sharp features (spikes
    from factors that nearly vanish inside the interval); they are mapped to
    xi and handed to the adaptive scheme.
    """
    if not u2 > u1:
        raise ValueError("need u2 > u1")
    du = u2 - u1

    def g(xi):
        sx = math.sin(xi)
        v = u1 + du * sx * sx
        return F(v) * du * math.sin(2 * xi)

    pts = []
    for v in breaks:
        t = (v - u1) / du
        if 0.0 < t < 1.0:
            pts.append(math.asin(math.sqrt(t)))
    pts = sorted(set(pts))
    res = quad(g, 0.0, math.pi / 2, epsabs=0.0, epsrel=rel_tol, limit=400,
               points=pts or None, full_output=1)
    return _checked(res, rel_tol, what)
