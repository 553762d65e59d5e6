"""Independent verification of exported meshes against their profile records.

The checks here recompute everything from scratch: intrinsic coordinates are
reconstructed from the raw mesh points, frames are rebuilt, and the soliton
equation is cross-checked against a finite-difference mean curvature oracle
on a deterministic subset of points.  Nothing is trusted from export time
except the profile record and the point coordinates themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError, VerificationError
from .geometry import centred_frame, centred_fd_mean_curvature
from .translator import TranslatorProfile, translator_fd_mean_curvature

__all__ = [
    "VerificationThresholds",
    "VerificationReport",
    "verify_mesh",
    "require_verified",
]


@dataclass(frozen=True)
class VerificationThresholds:
    """Acceptance levels for each recomputed invariant."""

    reconstruction: float = 1e-9   # |z - x * w| / (1 + |z|)
    quadric: float = 5e-10         # |sum lambda x^2 - C|, inside the frame validator's own gate
    stored_angle: float = 1e-8     # stored theta vs recomputed theta
    lagrangian: float = 1e-10      # max |Im <f_a, f_b>|
    angle: float = 1e-9            # arg det(frame) vs theta, mod 2 pi
    soliton: float = 1e-3          # relative, against the FD oracle
    fd_checks: int = 8             # points receiving the FD cross-check


class _Worst:
    """Track the largest residual in a category and where it happened."""

    __slots__ = ("value", "index")

    def __init__(self):
        self.value = 0.0
        self.index = -1

    def update(self, value: float, index: int):
        if value > self.value:
            self.value = value
            self.index = index


@dataclass
class VerificationReport:
    kind: str
    count: int
    maxima: dict = field(default_factory=dict)
    failures: tuple = ()
    violations: tuple = ()
    rows: tuple = ()  # per-point residuals when collected

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary_pairs(self):
        pairs = [("kind", self.kind), ("points", str(self.count)),
                 ("passed", "true" if self.passed else "false")]
        pairs += [("max_" + k, repr(float(v))) for k, v in sorted(self.maxima.items())]
        for i, msg in enumerate(self.failures):
            pairs.append((f"failure_{i}", msg))
        return pairs


def _fd_subset(count: int, fd_checks: int) -> np.ndarray:
    if fd_checks <= 0 or count == 0:
        return np.array([], dtype=int)
    return np.unique(np.linspace(0, count - 1, min(fd_checks, count)).round().astype(int))


def _finish(kind, count, worst, thresholds_by_name, rows=()):
    maxima = {name: w.value for name, w in worst.items()}
    violations = []
    failures = []
    for name, w in worst.items():
        tol = thresholds_by_name[name]
        if w.value > tol:
            violations.append((name, w.value, tol))
            failures.append(
                f"{name} residual {w.value:.6e} exceeds {tol:.1e} at point {w.index}")
    return VerificationReport(kind, count, maxima, tuple(failures),
                              tuple(violations), tuple(rows))


def verify_mesh(profile, mesh, thresholds: VerificationThresholds = None,
                *, collect_rows: bool = False) -> VerificationReport:
    """Recompute every invariant of a mesh and report the worst residuals.

    The returned report carries one failure line per violated invariant,
    naming it and locating the worst offending point.  With collect_rows the
    per-point residual table (closed-form soliton residual, not the FD one)
    is kept on the report.
    """
    th = thresholds or VerificationThresholds()
    if isinstance(profile, TranslatorProfile):
        return _verify_translator(profile, mesh, th, collect_rows)
    if getattr(profile, "kind", None) == "centred":
        return _verify_centred(profile, mesh, th, collect_rows)
    raise ValidationError(
        f"cannot verify meshes for profile kind {getattr(profile, 'kind', None)!r}")


def _verify_centred(profile, mesh, th: VerificationThresholds,
                    collect_rows: bool = False) -> VerificationReport:
    n = profile.n
    if mesh.n != n:
        raise ValidationError(
            f"mesh has {mesh.n} complex coordinates but the profile needs {n}")
    count = len(mesh)
    ts = np.asarray(mesh.params, dtype=float)
    if hasattr(profile, "prefetch"):
        profile.prefetch(sorted(set(ts.tolist())))
    wcache = {}
    worst = {name: _Worst() for name in
             ("reconstruction", "quadric", "stored_angle", "lagrangian",
              "angle", "soliton")}
    fd_at = set(_fd_subset(count, th.fd_checks).tolist())
    lam = np.asarray(profile.lambdas, dtype=float)
    rows = []

    for i in range(count):
        t = float(ts[i])
        z = mesh.points[i]
        if t not in wcache:
            wcache[t] = (np.asarray(profile.w_of(t)), float(profile.theta_of(t)))
        w, theta = wcache[t]
        x = (z / w).real
        rec = float(np.max(np.abs(z - x * w))) / (1.0 + float(np.max(np.abs(z))))
        quad = abs(float(np.sum(lam * x * x)) - profile.C)
        worst["reconstruction"].update(rec, i)
        worst["quadric"].update(quad, i)
        worst["stored_angle"].update(
            abs(math.remainder(float(mesh.thetas[i]) - theta, 2.0 * math.pi)), i)
        if rec > th.reconstruction or quad > th.quadric:
            # frame checks need a point that is actually on the immersion
            if collect_rows:
                rows.append((i, t, math.nan, math.nan, math.nan))
            continue
        fp = centred_frame(profile, x, t)
        worst["lagrangian"].update(fp.lagrangian_residual, i)
        worst["angle"].update(fp.angle_residual, i)
        Fperp = fp.normal_projection(fp.z)
        if collect_rows:
            sol = float(np.linalg.norm(
                profile.alpha * Fperp - profile.C * fp.mean_curvature()))
            rows.append((i, t, fp.lagrangian_residual, fp.angle_residual, sol))
        if i in fd_at:
            H_fd = centred_fd_mean_curvature(profile, x, t)
            H_norm = float(np.linalg.norm(H_fd))
            if profile.alpha == 0.0:
                # minimal case: the equation is H = 0, so the check is absolute
                worst["soliton"].update(H_norm, i)
            else:
                num = float(np.linalg.norm(profile.alpha * Fperp - profile.C * H_fd))
                worst["soliton"].update(num / max(H_norm, 1e-12), i)

    return _finish("centred", count, worst, {
        "reconstruction": th.reconstruction, "quadric": th.quadric,
        "stored_angle": th.stored_angle, "lagrangian": th.lagrangian,
        "angle": th.angle, "soliton": th.soliton}, rows)


def _verify_translator(profile: TranslatorProfile, mesh,
                       th: VerificationThresholds,
                       collect_rows: bool = False) -> VerificationReport:
    nb = profile.base.n
    if mesh.n != nb + 1:
        raise ValidationError(
            f"mesh has {mesh.n} complex coordinates but the translator needs {nb + 1}")
    count = len(mesh)
    ts = np.asarray(mesh.params, dtype=float)
    base = profile.base
    if hasattr(base, "prefetch"):
        base.prefetch(sorted(set(ts.tolist())))
    wcache = {}
    worst = {name: _Worst() for name in
             ("reconstruction", "last_coordinate", "stored_angle", "maslov",
              "lagrangian", "angle", "soliton")}
    fd_at = set(_fd_subset(count, th.fd_checks).tolist())
    lam = np.asarray(base.lambdas, dtype=float)
    alpha = profile.alpha
    maslov_ref = alpha * profile.K.imag
    rows = []

    for i in range(count):
        t = float(ts[i])
        z = mesh.points[i]
        if t not in wcache:
            wcache[t] = (np.asarray(base.w_of(t)), float(profile.theta_of(t)),
                         profile.beta_of(t))
        w, theta, beta = wcache[t]
        x = (z[:-1] / w).real
        rec = float(np.max(np.abs(z[:-1] - x * w))) / (1.0 + float(np.max(np.abs(z))))
        worst["reconstruction"].update(rec, i)
        zn = -0.5 * float(np.sum(lam * x * x)) + beta
        worst["last_coordinate"].update(abs(z[-1] - zn) / (1.0 + abs(zn)), i)
        worst["stored_angle"].update(
            abs(math.remainder(float(mesh.thetas[i]) - theta, 2.0 * math.pi)), i)
        worst["maslov"].update(
            abs(theta + alpha * z[-1].imag - maslov_ref), i)
        if rec > th.reconstruction:
            if collect_rows:
                rows.append((i, t, math.nan, math.nan, math.nan))
            continue
        fp = profile.frame_at(x, t)
        worst["lagrangian"].update(fp.lagrangian_residual, i)
        worst["angle"].update(fp.angle_residual, i)
        Tperp = fp.normal_projection(profile.translation_vector())
        if collect_rows:
            sol = float(np.linalg.norm(Tperp - fp.mean_curvature()))
            rows.append((i, t, fp.lagrangian_residual, fp.angle_residual, sol))
        if i in fd_at:
            H_fd = translator_fd_mean_curvature(profile, x, t)
            H_norm = float(np.linalg.norm(H_fd))
            num = float(np.linalg.norm(Tperp - H_fd))
            if alpha == 0.0:
                worst["soliton"].update(H_norm, i)
            else:
                worst["soliton"].update(num / max(H_norm, 1e-12), i)

    return _finish("translator", count, worst, {
        "reconstruction": th.reconstruction, "last_coordinate": th.reconstruction,
        "stored_angle": th.stored_angle, "maslov": th.stored_angle,
        "lagrangian": th.lagrangian, "angle": th.angle, "soliton": th.soliton}, rows)


def require_verified(report: VerificationReport) -> VerificationReport:
    """Raise VerificationError for the worst violated invariant unless all passed."""
    if not report.passed:
        name, value, tol = max(report.violations, key=lambda v: v[1] / v[2])
        raise VerificationError(name, value, tol)
    return report
