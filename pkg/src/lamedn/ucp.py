"""Empirical laboratory for unique-continuation estimates.

Ensembles of exact constant-coefficient elastic fields (point-source columns
and linear displacements) are integrated over balls, cones, and nested-ball
chains to fit three-sphere inequalities, check Caccioppoli-type bounds, and
measure smallness propagation -- both analytically and through FEM Green
probes on layered meshes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .core import DEFAULT_BOX, LameVector, sample_admissible
from .geometry import ConeChain, PartitionedMesh, eta_r

__all__ = [
    "SolutionMember",
    "SolutionEnsemble",
    "kelvin_ensemble",
    "linear_ensemble",
    "mixed_ensemble",
    "ball_l2",
    "cone_l2",
    "ThreeSphereFit",
    "three_sphere_fit",
    "caccioppoli_check",
    "cone_propagation_experiment",
    "interface_chain_experiment",
    "write_three_sphere_csv",
    "write_cone_csv",
]


# ---------------------------------------------------------------------------
# Exact solution ensembles
# ---------------------------------------------------------------------------

@dataclass
class SolutionMember:
    """One exact solution of the constant-coefficient system.

    kind "kelvin": u(x) = Gamma(x; source) @ direction with moduli (mu, nu);
    kind "linear": u(x) = matrix @ x (harmonic and divergence-affine, hence an
    exact solution for any moduli).  Both accept single points or (m, 3)
    batches.
    """

    kind: str
    index: int = 0
    mu: float = 1.0
    nu: float = 0.3
    source: np.ndarray = None
    direction: np.ndarray = None
    matrix: np.ndarray = None

    def __call__(self, x):
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        if self.kind == "linear":
            out = pts @ self.matrix.T
        else:
            from .backend import kelvin_batch
            out = kelvin_batch(pts, self.source, self.mu, self.nu) @ self.direction
        return out[0] if np.ndim(x) == 1 else out

    def grad(self, x):
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        if self.kind == "linear":
            out = np.broadcast_to(self.matrix, (len(pts), 3, 3)).copy()
        else:
            # (grad u)[i, k] = D[i, j, k] e_j with D[i, j, k] = d Gamma_ij / d x_k;
            # contracting the point-force column first keeps it one broadcast.
            e = self.direction
            r = pts - self.source
            rn = np.linalg.norm(r, axis=1)
            er = r @ e
            pref = 1.0 / (16.0 * math.pi * self.mu * (1.0 - self.nu))
            kappa = 3.0 - 4.0 * self.nu
            out = (np.eye(3) * er[:, None, None]
                   + r[:, :, None] * e[None, None, :]
                   - kappa * e[None, :, None] * r[:, None, :]) / rn[:, None, None] ** 3
            out -= 3.0 * er[:, None, None] * r[:, :, None] * r[:, None, :] / rn[:, None, None] ** 5
            out *= pref
        return out[0] if np.ndim(x) == 1 else out

    def check_ball(self, center, radius):
        """Raise if the closed ball exits this member's validity region."""
        if self.kind == "kelvin":
            dist = float(np.linalg.norm(np.asarray(center, float) - self.source))
            if dist <= radius * (1.0 + 1e-12):
                raise ValueError("integration ball contains the point source")

    def is_zero(self) -> bool:
        if self.kind == "linear":
            return not self.matrix.any()
        return not np.asarray(self.direction).any()


@dataclass
class SolutionEnsemble:
    """Indexed family of exact solutions sharing a validity ball.

    center/radius describe the region the generator guaranteed to be free of
    singularities; individual members may be valid on more.
    """

    members: list
    center: np.ndarray
    radius: float

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def scaled(self, factor: float) -> "SolutionEnsemble":
        out = []
        for m in self.members:
            if m.kind == "linear":
                out.append(SolutionMember(kind="linear", index=m.index,
                                          matrix=factor * m.matrix))
            else:
                out.append(SolutionMember(kind="kelvin", index=m.index, mu=m.mu, nu=m.nu,
                                          source=m.source.copy(),
                                          direction=factor * m.direction))
        return SolutionEnsemble(out, self.center.copy(), self.radius)


def _unit_vectors(rng, count):
    v = rng.normal(size=(count, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def kelvin_ensemble(count, center=(0.0, 0.0, 0.0), radius=1.0, seed=0,
                    source_band=(1.5, 4.0), randomize_moduli=False,
                    box=DEFAULT_BOX, source_cap=None) -> SolutionEnsemble:
    """Point-source columns with sources strictly outside the validity ball.

    Sources sit at distance U[source_band] * radius from the center, in random
    directions (restricted to the upper axis cap when source_cap=(axis_dim,
    min_cos) is given); directions of the columns are random unit vectors.
    Moduli are fixed (mu=1, nu=0.3) or drawn from the admissible box.
    """
    rng = np.random.default_rng(seed)
    center = np.asarray(center, dtype=float)
    members = []
    for i in range(count):
        while True:
            d = _unit_vectors(rng, 1)[0]
            if source_cap is None or d[source_cap[0]] >= source_cap[1]:
                break
        dist = rng.uniform(*source_band) * radius
        if randomize_moduli:
            L = sample_admissible(1, box, rng)
            mu = L.mus[0]
            lam = L.lambdas[0]
            nu = lam / (2.0 * (lam + mu))
        else:
            mu, nu = 1.0, 0.3
        members.append(SolutionMember(
            kind="kelvin", index=i, mu=float(mu), nu=float(nu),
            source=center + dist * d, direction=_unit_vectors(rng, 1)[0]))
    return SolutionEnsemble(members, center, float(radius))


def linear_ensemble(count, center=(0.0, 0.0, 0.0), radius=1.0, seed=0,
                    scale=1.0) -> SolutionEnsemble:
    """Random linear displacement fields u = A x (exact solutions: all second
    derivatives vanish)."""
    rng = np.random.default_rng(seed)
    members = [SolutionMember(kind="linear", index=i,
                              matrix=scale * rng.normal(size=(3, 3)))
               for i in range(count)]
    return SolutionEnsemble(members, np.asarray(center, dtype=float), float(radius))


def mixed_ensemble(count, center=(0.0, 0.0, 0.0), radius=1.0, seed=0,
                   linear_fraction=0.25, **kelvin_kwargs) -> SolutionEnsemble:
    n_lin = int(round(count * linear_fraction))
    lin = linear_ensemble(n_lin, center, radius, seed=seed + 1)
    kel = kelvin_ensemble(count - n_lin, center, radius, seed=seed, **kelvin_kwargs)
    members = kel.members + lin.members
    for i, m in enumerate(members):
        m.index = i
    return SolutionEnsemble(members, np.asarray(center, dtype=float), float(radius))


# ---------------------------------------------------------------------------
# Quadratures
# ---------------------------------------------------------------------------

def _panel_gauss(a, b, order, panels):
    """Composite Gauss-Legendre nodes/weights: `panels` equal subintervals of
    [a, b], `order` points each."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        h = 0.5 * (hi - lo)
        nodes.append(lo + h * (x + 1.0))
        weights.append(h * w)
    return np.concatenate(nodes), np.concatenate(weights)


def ball_l2(u, center, radius, order=6, panels=4) -> float:
    """Squared L2 norm of a (vector) field over a ball.

    Spherical tensor-product Gauss: composite Gauss-Legendre of the given
    order per axis on the (rho, theta, phi) grid decomposition.  The field is
    called on point batches; any component count is accepted (the squared
    Euclidean norm of the output is integrated).
    """
    if order < 2 or panels < 1:
        raise ValueError("order >= 2 and panels >= 1 required")
    if radius <= 0:
        raise ValueError("radius must be positive")
    if hasattr(u, "check_ball"):
        u.check_ball(center, radius)
    center = np.asarray(center, dtype=float)
    r_n, r_w = _panel_gauss(0.0, radius, order, panels)
    t_n, t_w = _panel_gauss(0.0, math.pi, order, panels)
    p_n, p_w = _panel_gauss(0.0, 2.0 * math.pi, order, panels)

    st, ct = np.sin(t_n), np.cos(t_n)
    cp, sp = np.cos(p_n), np.sin(p_n)
    # points[i_r, i_t, i_p, :]
    x = center[0] + r_n[:, None, None] * st[None, :, None] * cp[None, None, :]
    y = center[1] + r_n[:, None, None] * st[None, :, None] * sp[None, None, :]
    z = center[2] + r_n[:, None, None] * ct[None, :, None] + 0.0 * p_n[None, None, :]
    pts = np.stack([x, y, z], axis=-1).reshape(-1, 3)
    vals = np.asarray(u(pts), dtype=float).reshape(len(pts), -1)
    f = (vals ** 2).sum(axis=1).reshape(len(r_n), len(t_n), len(p_n))
    jac = (r_n ** 2 * r_w)[:, None, None] * (st * t_w)[None, :, None] * p_w[None, None, :]
    return float((f * jac).sum())


def cone_l2(u, rho, gamma3, order=6, panels=4) -> float:
    """Squared L2 norm over the truncated cone: apex at the origin, axis -e3,
    half-angle gamma3, cut at depth H rho with H = 1/tan(gamma3).

    Coordinates (x3, q, phi) with the cross-section disk of radius
    |x3| tan(gamma3) scaled to the unit q-interval.
    """
    tan3 = math.tan(gamma3)
    depth = rho / tan3
    z_n, z_w = _panel_gauss(-depth, 0.0, order, panels)
    q_n, q_w = _panel_gauss(0.0, 1.0, order, panels)
    p_n, p_w = _panel_gauss(0.0, 2.0 * math.pi, order, panels)

    rad = np.abs(z_n) * tan3                         # disk radius per slice
    rr = rad[:, None] * q_n[None, :]                  # (z, q)
    x = rr[:, :, None] * np.cos(p_n)[None, None, :]
    y = rr[:, :, None] * np.sin(p_n)[None, None, :]
    z = np.broadcast_to(z_n[:, None, None], x.shape)
    pts = np.stack([x, y, z], axis=-1).reshape(-1, 3)
    vals = np.asarray(u(pts), dtype=float).reshape(len(pts), -1)
    f = (vals ** 2).sum(axis=1).reshape(len(z_n), len(q_n), len(p_n))
    jac = (rad ** 2 * z_w)[:, None, None] * (q_n * q_w)[None, :, None] * p_w[None, None, :]
    return float((f * jac).sum())


# ---------------------------------------------------------------------------
# Three-sphere inequality fit
# ---------------------------------------------------------------------------

@dataclass
class ThreeSphereFit:
    theta0: float
    logC: float
    violation_rate: float
    n_fit: int
    n_test: int
    rows: list = field(default_factory=list, repr=False)


def three_sphere_fit(ensemble: SolutionEnsemble, r1, r2, r3,
                     fit_fraction=0.5, order=6, panels=4) -> ThreeSphereFit:
    """Chebyshev fit of log I2 <= theta log I1 + (1 - theta) log I3 + log C
    over concentric balls B_r1 in B_r2 in B_r3 at the ensemble center.

    With residuals r_i(theta) = log I2_i - theta log I1_i - (1-theta) log I3_i
    the fit minimizes the maximum violation of the uniform bound over the fit
    half: theta ranges over (0, 1) in a bounded 1-D search, the intercept is
    the Chebyshev-optimal (max+min)/2 so the objective is the residual spread,
    and log C is the max residual at the optimum (the bound is tight at the
    worst fit member).  The violation rate counts held-out members exceeding
    the fitted bound.
    """
    if not (0.0 < r1 <= r2 < r3):
        raise ValueError("radii must satisfy 0 < r1 <= r2 < r3")
    if len(ensemble) == 0:
        raise ValueError("ensemble is empty")

    rows = []
    logs = []
    for m in ensemble:
        if m.is_zero():
            continue
        i1 = ball_l2(m, ensemble.center, r1, order, panels)
        i2 = ball_l2(m, ensemble.center, r2, order, panels)
        i3 = ball_l2(m, ensemble.center, r3, order, panels)
        if min(i1, i2, i3) <= 0.0:
            continue
        rows.append((m.index, i1, i2, i3))
        logs.append((math.log(i1), math.log(i2), math.log(i3)))
    if not logs:
        raise ValueError("degenerate ensemble: every member vanishes")

    logs = np.asarray(logs)
    n_fit = max(1, int(round(len(logs) * fit_fraction)))
    fit, test = logs[:n_fit], logs[n_fit:]

    a1, b, a3 = fit[:, 0], fit[:, 1], fit[:, 2]

    def residuals(theta):
        return b - theta * a1 - (1.0 - theta) * a3

    def spread(theta):
        r = residuals(theta)
        return float(r.max() - r.min())

    res = minimize_scalar(spread, bounds=(1e-6, 1.0 - 1e-6),
                          method="bounded", options={"xatol": 1e-12})
    theta0 = float(min(max(res.x, 1e-6), 1.0 - 1e-6))
    logc = float(residuals(theta0).max())

    if len(test):
        viol = test[:, 1] - theta0 * test[:, 0] - (1.0 - theta0) * test[:, 2]
        rate = float(np.mean(viol > logc + 1e-9))
    else:
        rate = 0.0
    return ThreeSphereFit(theta0=theta0, logC=logc, violation_rate=rate,
                          n_fit=int(n_fit), n_test=int(len(test)), rows=rows)


def caccioppoli_check(ensemble: SolutionEnsemble, rho2, rho1,
                      order=6, panels=4) -> float:
    """Max over the ensemble of (rho1 - rho2)^2 * int_{B_rho2}|grad u|^2 /
    int_{B_rho1}|u|^2 -- the constant implied by the interior gradient bound.
    Zero-gradient members contribute 0."""
    if not (0.0 < rho2 < rho1):
        raise ValueError("need 0 < rho2 < rho1")
    worst = 0.0
    for m in ensemble:
        if m.is_zero():
            continue
        num = ball_l2(lambda x: m.grad(x).reshape(np.atleast_2d(x).shape[0], 9),
                      ensemble.center, rho2, order, panels)
        if num == 0.0:
            continue
        den = ball_l2(m, ensemble.center, rho1, order, panels)
        worst = max(worst, (rho1 - rho2) ** 2 * num / den)
    return float(worst)


# ---------------------------------------------------------------------------
# Cone smallness propagation
# ---------------------------------------------------------------------------

def cone_propagation_experiment(chain: ConeChain, ensemble: SolutionEnsemble,
                                eps_small: float, theta_bar=None,
                                order=6, panels=4) -> dict:
    """Measure the implied constant of the cone propagation bound
    |u(-r e3)| <= (C / r^{3/2}) eps^{eta_r} E^{1 - eta_r}.

    eps^2 is the L2 mass on the first chain ball B_{t sin gamma1}(w_1), E^2
    the mass on the whole truncated cone; members failing eps <= eps_small
    are screened out, zero members are skipped.  theta_bar defaults to a
    three-sphere fit on the first chain ball triple.
    """
    if theta_bar is None:
        first = SolutionEnsemble(list(ensemble.members), chain.centers[0].copy(),
                                 float(chain.r3k[0]))
        theta_bar = three_sphere_fit(first, chain.r1k[0], chain.r2k[0], chain.r3k[0],
                                     fit_fraction=1.0, order=order, panels=panels).theta0
    eta = eta_r(chain, theta_bar)
    probe = chain.centers[-1]          # w_{k0} = -r e3
    rows, skipped, screened = [], [], []
    for m in ensemble:
        if m.is_zero():
            skipped.append(m.index)
            continue
        eps2 = ball_l2(m, chain.centers[0], chain.r1k[0], order, panels)
        if eps2 > eps_small ** 2:
            screened.append(m.index)
            continue
        e2 = cone_l2(m, chain.rho, chain.gamma3, order, panels)
        eps, big_e = math.sqrt(eps2), math.sqrt(max(e2, eps2))
        value = float(np.linalg.norm(m(probe)))
        c_impl = value * chain.r ** 1.5 / (eps ** eta * big_e ** (1.0 - eta))
        if not math.isfinite(c_impl):
            raise ArithmeticError(f"non-finite implied constant for member {m.index}")
        rows.append({"member": int(m.index), "eps": eps, "E": big_e,
                     "value": value, "C_impl": c_impl})
    if not rows:
        raise ValueError("no members passed the smallness screen; "
                         "increase eps_small")
    return {
        "theta_bar": float(theta_bar),
        "eta_r": float(eta),
        "chi": chain.chi,
        "k0": chain.k0,
        "r": chain.r,
        "rows": rows,
        "max_C_impl": float(max(r["C_impl"] for r in rows)),
        "skipped": skipped,
        "screened_out": screened,
    }


# ---------------------------------------------------------------------------
# FEM interface-chain experiment
# ---------------------------------------------------------------------------

def _interp(mesh, cache, values, pts):
    """P1 interpolation of a nodal field at interior points."""
    from .fem import locate_point
    out = np.empty((len(pts), values.shape[1]))
    for i, p in enumerate(pts):
        tet = locate_point(cache, p)
        d = np.asarray(p, float) - mesh.vertices[mesh.tets[tet, 0]]
        bary = np.empty(4)
        bary[1:] = cache.grads[tet, 1:, :] @ d
        bary[0] = 1.0 - bary[1:].sum()
        out[i] = bary @ values[mesh.tets[tet]]
    return out


def interface_chain_experiment(mesh: PartitionedMesh, L: LameVector,
                               probe: dict = None) -> dict:
    """Observe a FEM Green-function column decaying through layered
    interfaces.

    The source sits near the observation face; |v| is sampled along the
    descending vertical line through it.  Reported: the depth profile, its
    per-layer means (with a monotone-trend flag), the two-sided relative jump
    at each interface, sup |v| * dist^{1/2}, a moduli-contrast sweep at a
    fixed probe point, and a source-depth sweep with the fitted exponent of
    |v(probe)| against the near-face smallness.
    """
    from .fem import assemble, build_cache, green_function, locate_point

    probe = dict(probe or {})
    if mesh.N < 2 and not probe.get("allow_single", False):
        raise ValueError("interface chain needs at least 2 layers "
                         "(pass allow_single=True to observe a single phase)")
    cache = probe.get("cache") or build_cache(mesh)
    n = mesh.n
    h = 1.0 / n
    lateral = probe.get("lateral", (0.5 + 0.5 * h, 0.5 + 0.5 * h))
    component = int(probe.get("component", 2))
    source = probe.get("source")
    if source is None:
        source = np.array([lateral[0], lateral[1], 1.0 - 2.0 * h])
    source = np.asarray(source, dtype=float)

    sys = assemble(mesh, L, cache)
    g = green_function(sys, source, component)
    vals = g.values

    # Depth profile along the vertical line below the source.
    z_lo, z_hi = probe.get("z_range", (1.5 * h, source[2] - 1.5 * h))
    zs = np.linspace(z_hi, z_lo, int(probe.get("profile_points", 25)))
    line = np.column_stack([np.full_like(zs, lateral[0]),
                            np.full_like(zs, lateral[1]), zs])
    vline = _interp(mesh, cache, vals, line)
    mags = np.linalg.norm(vline, axis=1)
    if not np.all(np.isfinite(mags)):
        raise ArithmeticError("non-finite Green values on the profile line")
    dists = np.linalg.norm(line - source, axis=1)
    profile = [{"z": float(z), "dist": float(d), "value": float(v)}
               for z, d, v in zip(zs, dists, mags)]

    # Layer means, ordered top (source side) to bottom.
    layer_means = []
    for j in range(mesh.N, 0, -1):
        lo, hi = 1.0 - (mesh.N - j + 1) / mesh.N, 1.0 - (mesh.N - j) / mesh.N
        sel = (zs > lo + 1e-12) & (zs < hi - 1e-12) & (zs < source[2] - h)
        if sel.any():
            layer_means.append(float(mags[sel].mean()))
    trend = all(a >= b for a, b in zip(layer_means, layer_means[1:]))

    # Two-sided traces at each interface: extrapolate linearly from each side
    # onto the plane (removes the smooth decay along the line) and compare.
    jumps = []
    for plane in mesh.interfaces:
        z0 = float(plane["point"][2])
        if not (z_lo < z0 < z_hi):
            continue
        dz = 0.25 * h
        side = _interp(mesh, cache, vals, np.array(
            [[lateral[0], lateral[1], z0 + 2 * dz],
             [lateral[0], lateral[1], z0 + dz],
             [lateral[0], lateral[1], z0 - dz],
             [lateral[0], lateral[1], z0 - 2 * dz]]))
        above = 2.0 * side[1] - side[0]
        below = 2.0 * side[2] - side[3]
        scale = max(np.linalg.norm(above), np.linalg.norm(below), 1e-300)
        traction = []
        for dz_t in (dz, -dz):
            pt = np.array([lateral[0], lateral[1], z0 + dz_t])
            tet = locate_point(cache, pt)
            lab = int(mesh.labels[tet])
            gr = np.einsum("id,ig->dg", vals[mesh.tets[tet]], cache.grads[tet])
            strain = 0.5 * (gr + gr.T)
            lam_e, mu_e = L.lambdas[lab - 1], L.mus[lab - 1]
            traction.append(lam_e * np.trace(strain) * np.array([0.0, 0.0, 1.0])
                            + 2.0 * mu_e * strain @ np.array([0.0, 0.0, 1.0]))
        t_scale = max(np.linalg.norm(traction[0]), np.linalg.norm(traction[1]), 1e-300)
        jumps.append({"z": z0,
                      "jump": float(np.linalg.norm(above - below) / scale),
                      "traction_jump": float(np.linalg.norm(traction[0] - traction[1])
                                             / t_scale)})

    sup_scaled = float(np.max(mags * np.sqrt(dists)))

    # Contrast sweep: scale the shear modulus of one layer (default: the
    # bottom layer, label N) against the fixed top layer.
    contrasts = probe.get("contrasts", (1.0, 2.0, 4.0))
    layer = int(probe.get("contrast_layer", L.N))
    probe_pt = np.array([lateral[0], lateral[1],
                         float(probe.get("probe_z", z_lo + h))])
    sweep = []
    for cmul in contrasts:
        lams, mus = list(L.lambdas), list(L.mus)
        mus[layer - 1] *= cmul
        g_c = green_function(assemble(mesh, LameVector(lams, mus), cache, warn=False),
                             source, component)
        val = float(np.linalg.norm(_interp(mesh, cache, g_c.values,
                                           probe_pt[None, :])[0]))
        sweep.append({"contrast": float(cmul), "value": val})

    # Source-depth sweep: near-face smallness vs deep response.  Valid source
    # heights keep 2 cells clear of both the observation face and the first
    # interface below it (the top layer spans [1 - 1/N, 1]).
    depths = probe.get("depths")
    if depths is None:
        d_min, d_max = 2.0 * h, 1.0 / mesh.N - 2.0 * h
        if d_max > d_min + 1e-12:
            depths = list(np.linspace(d_min, d_max, 3))
        else:
            depths = [d_min]
    ring_r = 4.0 * h
    angles = np.linspace(0.0, 2.0 * np.pi, 8, endpoint=False)
    exponent = None
    depth_rows = []
    for d in depths:
        src = np.array([lateral[0], lateral[1], 1.0 - d])
        g_d = green_function(sys, src, component)
        ring = np.column_stack([
            np.clip(lateral[0] + ring_r * np.cos(angles), 2 * h, 1 - 2 * h),
            np.clip(lateral[1] + ring_r * np.sin(angles), 2 * h, 1 - 2 * h),
            np.full_like(angles, 1.0 - 0.5 * h)])
        eps = float(np.linalg.norm(_interp(mesh, cache, g_d.values, ring), axis=1).max())
        deep = float(np.linalg.norm(_interp(mesh, cache, g_d.values, probe_pt[None, :])[0]))
        depth_rows.append({"depth": float(d), "eps": eps, "value": deep})
    if len(depth_rows) >= 2:
        le = np.log([r["eps"] for r in depth_rows])
        lv = np.log([max(r["value"], 1e-300) for r in depth_rows])
        exponent = float(np.polyfit(le, lv, 1)[0])

    return {
        "mesh": {"N": mesh.N, "n": mesh.n},
        "source": [float(c) for c in source],
        "profile": profile,
        "layer_means": layer_means,
        "monotone_trend": bool(trend),
        "interface_jumps": jumps,
        "sup_v_sqrt_dist": sup_scaled,
        "contrast_sweep": sweep,
        "depth_sweep": depth_rows,
        "depth_exponent": exponent,
    }


# ---------------------------------------------------------------------------
# CSV reports
# ---------------------------------------------------------------------------

def write_three_sphere_csv(path, fit: ThreeSphereFit):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["member_id", "r1_int", "r2_int", "r3_int"])
        for mid, i1, i2, i3 in fit.rows:
            w.writerow([mid, repr(float(i1)), repr(float(i2)), repr(float(i3))])


def write_cone_csv(path, report: dict):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["member_id", "eps", "E", "value", "C_impl"])
        for row in report["rows"]:
            w.writerow([row["member"], repr(float(row["eps"])), repr(float(row["E"])),
                        repr(float(row["value"])), repr(float(row["C_impl"]))])
