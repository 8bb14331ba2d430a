"""Forward map, Fréchet derivative, stability probes, and reconstruction.

The forward map F sends a piecewise-constant Lamé vector to the discrete
local DN matrix on Sigma.  Everything here works in the Gram-whitened
geometry of the DN operator norm: matrices are conjugated by G^{-1/2} once
and compared in spectral or Frobenius norm afterwards.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .core import DEFAULT_BOX, AdmissibleBox, LameVector, check_admissible
from .fem import DnMatrix, MeshCache, assemble, build_cache, dn_matrix
from .geometry import PartitionedMesh

__all__ = [
    "ForwardContext",
    "Jacobian",
    "build_context",
    "forward",
    "frechet_derivative",
    "star_norm",
    "q0_estimate",
    "lipschitz_probe",
    "reconstruct",
]


@dataclass
class ForwardContext:
    """Shared immutable state for repeated forward/derivative evaluations.

    probe_basis None means the full Sigma trace space (dense norms); that is
    the only mode implemented and is recorded in reports.
    """

    cache: MeshCache
    box: AdmissibleBox = DEFAULT_BOX
    probe_basis: object = None
    g_ihalf: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.g_ihalf is None:
            w, u = np.linalg.eigh(self.cache.gram_half)
            if w.min() <= 0:
                raise ValueError("Gram matrix must be positive definite")
            self.g_ihalf = (u / np.sqrt(w)) @ u.T

    @property
    def mesh(self) -> PartitionedMesh:
        return self.cache.mesh

    def gram_hash(self) -> str:
        return hashlib.sha256(np.ascontiguousarray(self.cache.gram_half).tobytes()).hexdigest()[:16]

    def mesh_info(self) -> dict:
        m = self.mesh
        return {"N": m.N, "n": m.n, "num_tets": m.num_tets,
                "sigma_dofs": int(self.cache.sigma_dofs.size), "r0": m.r0}


def build_context(mesh: PartitionedMesh, box: AdmissibleBox = DEFAULT_BOX) -> ForwardContext:
    return ForwardContext(cache=build_cache(mesh), box=box)


def forward(ctx: ForwardContext, L: LameVector) -> DnMatrix:
    """F(L): the DN matrix of the assembled system on the shared cache."""
    return dn_matrix(assemble(ctx.mesh, L, ctx.cache))


def star_norm(ctx: ForwardContext, delta: np.ndarray) -> float:
    """Operator norm ||G^{-1/2} delta G^{-1/2}||_2 using the cached root."""
    return float(np.linalg.norm(ctx.g_ihalf @ np.asarray(delta) @ ctx.g_ihalf, 2))


@dataclass
class Jacobian:
    """The 2N partial DN matrices J_p = dLambda/dL_p at the base point, in the
    flat ordering (lambda_1..lambda_N, mu_1..mu_N)."""

    mats: list
    L: LameVector
    gram_half: np.ndarray

    def directional(self, H) -> np.ndarray:
        H = np.asarray(H, dtype=float)
        out = np.zeros_like(self.mats[0])
        for hp, jp in zip(H, self.mats):
            out += hp * jp
        return out


def frechet_derivative(ctx: ForwardContext, L: LameVector) -> Jacobian:
    """Exact parameter Jacobian of the Schur complement.

    With P = [-K_II^{-1} K_IS; Id] the discrete harmonic prolongation from
    Sigma traces, each partial is J_p = P^T (dK/dL_p) P, where dK/dlambda_j =
    A_j^lam and dK/dmu_j = 2 A_j^mu; this is the derivative of the DN matrix
    because the Schur complement is an energy evaluated at the prolongation
    and the prolongation's own derivative drops out (stationarity).
    """
    cache = ctx.cache
    sys = assemble(ctx.mesh, L, cache)
    s_idx, i_idx = cache.sigma_dofs, cache.interior_dofs
    x = sys.factor.solve(sys.stiffness[i_idx][:, s_idx].toarray())

    mats = []
    for kind in ("lam", "mu"):
        per = cache.a_lam if kind == "lam" else cache.a_mu
        scale = 1.0 if kind == "lam" else 2.0
        for a in per:
            a_ss = a[s_idx][:, s_idx].toarray()
            a_is = a[i_idx][:, s_idx].toarray()
            a_ii_x = a[i_idx][:, i_idx] @ x
            j = scale * (a_ss - a_is.T @ x - x.T @ a_is + x.T @ a_ii_x)
            mats.append(0.5 * (j + j.T))
    return Jacobian(mats=mats, L=L, gram_half=cache.gram_half)


# ---------------------------------------------------------------------------
# q0: smallest whitened derivative norm over unit sup-norm directions
# ---------------------------------------------------------------------------

def _whitened(ctx: ForwardContext, jac: Jacobian) -> list:
    return [ctx.g_ihalf @ jp @ ctx.g_ihalf for jp in jac.mats]


def _spec_norm_and_grad(mats, h):
    """f(H) = ||sum H_p M_p||_2 and its gradient u^T M_p v from the top
    singular pair (subgradient at multiplicities)."""
    a = np.zeros_like(mats[0])
    for hp, mp in zip(h, mats):
        a += hp * mp
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    grad = np.array([u[:, 0] @ mp @ vt[0] for mp in mats])
    return s[0], grad


def _min_on_face(mats, p, starts):
    """Minimize f over the cube face H_p = +1, free coordinates in [-1,1]."""
    dim = len(mats)
    free = [q for q in range(dim) if q != p]

    def fun(v):
        h = np.empty(dim)
        h[p] = 1.0
        h[free] = v
        f, g = _spec_norm_and_grad(mats, h)
        return f, g[free]

    best = np.inf
    for v0 in starts:
        res = minimize(fun, v0, jac=True, method="L-BFGS-B",
                       bounds=[(-1.0, 1.0)] * (dim - 1),
                       options={"maxiter": 200, "ftol": 1e-14, "gtol": 1e-12})
        best = min(best, float(res.fun))
    return best


def q0_estimate(ctx: ForwardContext, samples) -> float:
    """min over samples and over ||H||_inf = 1 of ||F'(L)[H]||_star.

    Per sample: the smallest singular value of the stacked whitened-vec
    matrix handles the Euclidean sphere exactly (Frobenius surrogate); the
    sup-norm sphere is then searched face by face (H_p = +1 suffices by
    symmetry), each face being a bounded convex minimization seeded at the
    face vertices for 2N <= 8 and at 16 random points otherwise.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("q0_estimate needs at least one sample")
    overall = np.inf
    for L in samples:
        jac = frechet_derivative(ctx, L)
        mats = _whitened(ctx, jac)
        dim = len(mats)
        stacked = np.column_stack([m.ravel() for m in mats])
        if not stacked.any():
            import warnings
            warnings.warn("all-zero Jacobian: q0 = 0", stacklevel=2)
            return 0.0
        sv = np.linalg.svd(stacked, compute_uv=False)
        h_surrogate = np.linalg.svd(stacked, full_matrices=False)[2][-1]
        h_surrogate = h_surrogate / np.abs(h_surrogate).max()
        del sv

        if dim <= 8:
            from itertools import product
            vertices = [np.array(v, dtype=float) for v in product((-1.0, 1.0), repeat=dim - 1)]
        else:
            rng = np.random.default_rng(0)
            vertices = [rng.uniform(-1, 1, dim - 1) for _ in range(16)]
        best = np.inf
        for p in range(dim):
            starts = list(vertices)
            if abs(h_surrogate[p]) == 1.0:
                sgn = np.sign(h_surrogate[p])
                starts.append(np.delete(sgn * h_surrogate, p))
            best = min(best, _min_on_face(mats, p, starts))
        overall = min(overall, best)
    return float(overall)


# ---------------------------------------------------------------------------
# Empirical Lipschitz probe
# ---------------------------------------------------------------------------

def lipschitz_probe(ctx: ForwardContext, pairs) -> dict:
    """Ratios ||L1 - L2||_inf / ||F(L1) - F(L2)||_star over parameter pairs;
    returns {max_ratio, ratios, skipped, mesh, gram, gram_hash}."""
    ratios = []
    skipped = 0
    for L1, L2 in pairs:
        dl = np.abs(L1.as_array() - L2.as_array()).max()
        if dl == 0.0:
            skipped += 1
            continue
        f1 = forward(ctx, L1).entries
        f2 = forward(ctx, L2).entries
        denom = star_norm(ctx, f1 - f2)
        ratios.append(dl / denom)
    if not ratios:
        raise ValueError("no distinct pairs supplied")
    return {
        "max_ratio": float(max(ratios)),
        "ratios": [float(r) for r in ratios],
        "skipped": skipped,
        "mesh": ctx.mesh_info(),
        "gram": "spectral-half",
        "gram_hash": ctx.gram_hash(),
    }


# ---------------------------------------------------------------------------
# Projected Gauss-Newton
# ---------------------------------------------------------------------------

def _project_box(ctx: ForwardContext, arr: np.ndarray) -> np.ndarray:
    """Per-coordinate clip onto the box part of the admissible set."""
    a0 = ctx.box.alpha0
    n = arr.size // 2
    out = arr.copy()
    out[:n] = np.minimum(out[:n], 1.0 / a0)          # lambda_j <= 1/alpha0
    out[n:] = np.clip(out[n:], a0, 1.0 / a0)          # alpha0 <= mu_j <= 1/alpha0
    return out


def _project_feasible(ctx: ForwardContext, arr: np.ndarray) -> np.ndarray:
    """Box clip, then raise each lambda_j to the convexity half-space
    2 mu_j + 3 lambda_j >= beta0 when needed (increasing lambda preserves the
    box bound for any sane beta0 <= 3/alpha0)."""
    out = _project_box(ctx, arr)
    n = out.size // 2
    floor = (ctx.box.beta0 - 2.0 * out[n:]) / 3.0
    out[:n] = np.maximum(out[:n], floor)
    return out


def _admissible_point(ctx: ForwardContext, arr: np.ndarray) -> bool:
    ok, _ = check_admissible(LameVector.from_array(arr), ctx.box)
    return ok


def _project(ctx: ForwardContext, base: np.ndarray, step: np.ndarray) -> np.ndarray:
    """Clip base+step to the box; if the convexity half-spaces fail, back off
    along the step until the clipped point is admissible (base must be)."""
    cand = _project_box(ctx, base + step)
    if _admissible_point(ctx, cand):
        return cand
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _admissible_point(ctx, _project_box(ctx, base + mid * step)):
            lo = mid
        else:
            hi = mid
    return _project_box(ctx, base + lo * step)


def reconstruct(ctx: ForwardContext, Lambda_obs, L_init: LameVector, opts: dict = None):
    """Projected Gauss-Newton on the whitened residual
    r(L) = vec(G^{-1/2} (F(L) - Lambda_obs) G^{-1/2}).

    Levenberg damping: start 1e-6, x10 on rejected steps, /3 on accepted
    ones; stops when the step sup-norm falls below tol (default 1e-10) or at
    max_iters.  Returns (L_hat, trace) where trace records residual norms and
    parameter iterates; adds parameter errors when opts["truth"] is given.
    """
    opts = dict(opts or {})
    tol = float(opts.get("step_tol", 1e-10))
    max_iters = int(opts.get("max_iters", 50))
    damping = float(opts.get("damping", 1e-6))
    truth = opts.get("truth")

    obs = Lambda_obs.entries if isinstance(Lambda_obs, DnMatrix) else np.asarray(Lambda_obs)
    gih = ctx.g_ihalf

    def residual_vec(L):
        return (gih @ (forward(ctx, L).entries - obs) @ gih).ravel()

    cur = _project_feasible(ctx, L_init.as_array().copy())
    r = residual_vec(LameVector.from_array(cur))
    trace = [_trace_entry(0, r, cur, truth)]
    for k in range(1, max_iters + 1):
        jac = frechet_derivative(ctx, LameVector.from_array(cur))
        a = np.column_stack([(gih @ jp @ gih).ravel() for jp in jac.mats])
        ata = a.T @ a
        atr = a.T @ r
        accepted = False
        for _ in range(25):
            try:
                delta = np.linalg.solve(ata + damping * np.eye(ata.shape[0]), -atr)
            except np.linalg.LinAlgError:
                damping *= 10.0
                continue
            cand = _project(ctx, cur, delta)
            r_new = residual_vec(LameVector.from_array(cand))
            if np.linalg.norm(r_new) < np.linalg.norm(r):
                accepted = True
                break
            damping *= 10.0
            if damping > 1e14:
                break
        if not accepted:
            break
        step_inf = np.abs(cand - cur).max()
        cur, r = cand, r_new
        damping = max(damping / 3.0, 1e-14)
        trace.append(_trace_entry(k, r, cur, truth))
        if step_inf <= tol:
            break
    return LameVector.from_array(cur), trace


def _trace_entry(k, r, cur, truth):
    entry = {"k": int(k), "residual": float(np.linalg.norm(r)), "L": [float(v) for v in cur]}
    if truth is not None:
        entry["error_inf"] = float(np.abs(cur - truth.as_array()).max())
    return entry
