"""File formats: CSV reports, PLY vertex clouds, key=value profile records.

All floats are written with repr(), which round-trips doubles exactly and
keeps outputs byte-stable across runs.  Mesh CSV columns are
Re z1, Im z1, ..., Re zn, Im zn, s_or_y, theta in that order.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .meshing import Mesh

# fixed projection matrix seed for 3D PLY export; changing it would silently
# break byte-stability of archived outputs
_PROJECTION_SEED = 1729


def _fmt(v) -> str:
    return repr(float(v))


# -- mesh CSV ----------------------------------------------------------------

def mesh_csv_header(n: int):
    cols = []
    for j in range(1, n + 1):
        cols += [f"Re z{j}", f"Im z{j}"]
    return cols + ["s_or_y", "theta"]


def write_mesh_csv(path, mesh: Mesh) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(mesh_csv_header(mesh.n))
        for z, t, theta in zip(mesh.points, mesh.params, mesh.thetas):
            row = []
            for zz in z:
                row += [_fmt(zz.real), _fmt(zz.imag)]
            row += [_fmt(t), _fmt(theta)]
            writer.writerow(row)


def read_mesh_csv(path) -> Mesh:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if len(header) < 4 or header[-2:] != ["s_or_y", "theta"] or len(header) % 2 != 0:
            raise ValidationError(f"{path}: not a mesh CSV (bad header)")
        n = (len(header) - 2) // 2
        pts, pars, thetas = [], [], []
        for row in reader:
            if len(row) != len(header):
                raise ValidationError(f"{path}: row with {len(row)} fields, expected {len(header)}")
            vals = [float(v) for v in row]
            pts.append([complex(vals[2 * j], vals[2 * j + 1]) for j in range(n)])
            pars.append(vals[-2])
            thetas.append(vals[-1])
    return Mesh("unknown", np.array(pts, dtype=complex), np.array(pars), np.array(thetas))


# -- PLY vertex clouds -------------------------------------------------------

def projection_matrix(real_dim: int) -> np.ndarray:
    """Fixed orthonormal 3 x real_dim projection for viewing n >= 2 clouds."""
    rng = np.random.default_rng(_PROJECTION_SEED)
    mat = rng.normal(size=(real_dim, real_dim))
    q, _ = np.linalg.qr(mat)
    return q[:3]


def write_mesh_ply(path, mesh: Mesh, *, project3d: bool = False) -> None:
    """ASCII PLY vertex cloud.

    Without projection, x/y/z are the first three real coordinates and the
    remaining ones are kept as extra float properties c4..c{2n} (plus
    s_or_y and theta); with project3d a fixed orthonormal projection maps the
    full R^{2n} embedding onto x/y/z.
    """
    path = Path(path)
    # interleave to (Re z1, Im z1, Re z2, ...) ordering
    real = np.empty((len(mesh), 2 * mesh.n))
    real[:, 0::2] = mesh.points.real
    real[:, 1::2] = mesh.points.imag
    if project3d:
        coords = real @ projection_matrix(2 * mesh.n).T
        extra_names = []
        extras = np.empty((len(mesh), 0))
    else:
        dim = real.shape[1]
        if dim >= 3:
            coords = real[:, :3]
            extras = real[:, 3:]
        else:
            coords = np.column_stack([real, np.zeros((len(mesh), 3 - dim))])
            extras = np.empty((len(mesh), 0))
        extra_names = [f"c{k + 4}" for k in range(extras.shape[1])]
    with path.open("w") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {len(mesh)}\n")
        for name in ["x", "y", "z"] + extra_names + ["s_or_y", "theta"]:
            fh.write(f"property double {name}\n")
        fh.write("end_header\n")
        for i in range(len(mesh)):
            vals = [*coords[i], *extras[i], mesh.params[i], mesh.thetas[i]]
            fh.write(" ".join(_fmt(v) for v in vals) + "\n")


# -- tabular reports ---------------------------------------------------------

def write_trajectory_csv(path, traj) -> None:
    from .reduced_ode import export_trajectory_csv
    export_trajectory_csv(traj, path)


def write_profile_csv(path, profile, y_values) -> None:
    """Expander-style profile table: y, r_1..r_n, phi_1..phi_n, theta."""
    from .expander import profile_eval
    path = Path(path)
    n = profile.n
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y"] + [f"r_{j}" for j in range(1, n + 1)]
                        + [f"phi_{j}" for j in range(1, n + 1)] + ["theta"])
        for y in y_values:
            pt = profile_eval(profile, float(y))
            writer.writerow([_fmt(y)] + [_fmt(r) for r in pt.r]
                            + [_fmt(p) for p in pt.phis] + [_fmt(pt.theta)])


def write_plane_report_csv(path, angles) -> None:
    """Asymptotic-plane angles of an expander: psi_j +/- phibar_j per axis."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["j", "plane1_angle", "plane2_angle"])
        for j, (p, q) in enumerate(zip(angles.plane_plus, angles.plane_minus), start=1):
            writer.writerow([str(j), _fmt(p), _fmt(q)])


def write_orbit_report_csv(path, orbit, verdict=None, topology: str = "") -> None:
    """One-row orbit summary: u1, u2, S, gamma_1..gamma_n, case_tag, periodic_r, topology_tag."""
    path = Path(path)
    n = len(orbit.gamma)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["u1", "u2", "S"] + [f"gamma_{j}" for j in range(1, n + 1)]
                        + ["case_tag", "periodic_r", "topology_tag"])
        r = ""
        if verdict is not None and verdict.periodic:
            r = str(verdict.r)
        writer.writerow([_fmt(orbit.u1), _fmt(orbit.u2), _fmt(orbit.S)]
                        + [_fmt(g) for g in orbit.gamma]
                        + [orbit.case, r, topology])


def write_residual_csv(path, rows) -> None:
    """Residual report: point_id, s_or_y, lagrangian_residual, angle_residual, soliton_residual."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["point_id", "s_or_y", "lagrangian_residual",
                         "angle_residual", "soliton_residual"])
        for pid, t, lag, ang, sol in rows:
            writer.writerow([str(pid), _fmt(t), _fmt(lag), _fmt(ang), _fmt(sol)])


# -- key=value records -------------------------------------------------------

def write_keyvalues(path, pairs) -> None:
    path = Path(path)
    with path.open("w") as fh:
        for k, v in pairs:
            fh.write(f"{k} = {v}\n")


def read_keyvalues(path) -> dict:
    """Plain key = value lines; '#' starts a comment; later keys win."""
    path = Path(path)
    out = {}
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected key = value")
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def _fmt_tuple(vals) -> str:
    return ",".join(_fmt(v) for v in vals)


def _parse_tuple(s: str):
    s = s.strip()
    if not s:
        return ()
    return tuple(float(v) for v in s.split(","))


def write_profile_record(path, profile) -> None:
    """Serialize a profile so verify can rebuild it alongside its mesh."""
    from .translator import TranslatorProfile

    if isinstance(profile, TranslatorProfile):
        pairs = [("kind", "translator"),
                 ("K_re", _fmt(profile.K.real)), ("K_im", _fmt(profile.K.imag))]
        base_pairs = _profile_pairs(profile.base)
        pairs += [("base_" + k, v) for k, v in base_pairs]
        write_keyvalues(path, pairs)
        return
    write_keyvalues(path, _profile_pairs(profile))


def _profile_pairs(profile):
    from .expander import ExpanderProfile
    from .periodic import HamiltonianStationaryProfile, OrbitProfile

    if isinstance(profile, ExpanderProfile):
        return [("kind", "expander"), ("alpha", _fmt(profile.alpha)),
                ("a", _fmt_tuple(profile.a)), ("psi", _fmt_tuple(profile.psi)),
                ("u_star", _fmt(profile.u_star))]
    if isinstance(profile, HamiltonianStationaryProfile):
        sp = profile.spec
        return [("kind", "stationary"), ("alpha", _fmt(sp.params.alpha)),
                ("lambdas", _fmt_tuple(sp.params.lambdas)),
                ("alphas", _fmt_tuple(sp.alphas)), ("A", _fmt(sp.A)),
                ("psi", _fmt_tuple(sp.psi))]
    if isinstance(profile, OrbitProfile):
        sp = profile.spec
        return [("kind", "orbit"), ("alpha", _fmt(sp.params.alpha)),
                ("lambdas", _fmt_tuple(sp.params.lambdas)),
                ("alphas", _fmt_tuple(sp.alphas)), ("A", _fmt(sp.A)),
                ("psi", _fmt_tuple(sp.psi))]
    raise ValidationError(f"cannot serialize profile of type {type(profile).__name__}")


def read_profile_record(path):
    """Rebuild a profile object from a key=value record."""
    kv = read_keyvalues(path)
    return _profile_from_keyvalues(kv)


def _profile_from_keyvalues(kv: dict, prefix: str = ""):
    from .expander import ExpanderProfile
    from .params import SolitonParams
    from .periodic import PeriodicSpec, OrbitProfile, hamiltonian_stationary
    from .translator import TranslatorProfile

    def get(key, default=None):
        v = kv.get(prefix + key, default)
        if v is None:
            raise ValidationError(f"profile record is missing '{prefix}{key}'")
        return v

    kind = get("kind")
    if kind == "translator":
        base = _profile_from_keyvalues(kv, prefix="base_")
        K = complex(float(get("K_re")), float(get("K_im")))
        return TranslatorProfile(base, K=K)
    if kind == "expander":
        return ExpanderProfile(float(get("alpha")), _parse_tuple(get("a")),
                               _parse_tuple(get("psi")) or None,
                               float(get("u_star", "0.0")))
    if kind in ("orbit", "stationary"):
        params = SolitonParams(_parse_tuple(get("lambdas")), 1.0, float(get("alpha")))
        spec = PeriodicSpec(params, _parse_tuple(get("alphas")), float(get("A")),
                            _parse_tuple(get("psi")) or None)
        if kind == "stationary":
            return hamiltonian_stationary(spec)
        return OrbitProfile(spec)
    raise ValidationError(f"unknown profile kind {kind!r}")
