"""Local decomposition of positive unital maps at a fixed vector.

Given a positive unital phi: M_2 -> M_2 and a unit vector eta, the state
omega_eta(a) = <eta, phi(a) eta> induces a left ideal L, a right ideal R,
the quotient Hilbert space K_eta = M_2/L + M_2/R with its averaged inner
product, a unital Jordan morphism rho_eta and an operator V_eta with
phi(a) eta = V_eta rho_eta(a) V_eta* eta.

When phi lies in a maximal face (phi(|xi><xi|) eta = 0) the ideals are
known exactly, K_eta is four dimensional with an explicit orthonormal
basis, and the V_eta matrix collapses to a two-by-four array whose entries
decide whether the local identity upgrades to the global equality
phi(a) = V_eta rho_eta(a) V_eta* (the trace-condition iff).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    DimensionMismatch,
    NotInFace,
    NotPositiveEvidence,
    NotUnital,
    ShapeMismatch,
)
from .linalg import DEFAULT
from .maps import (
    MapObject,
    adjoint_map,
    apply_map,
    compose_transpose,
    k_positivity_search,
    map_from_action,
)

_KER_TOL = DEFAULT.kernel


def _unit_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > 1e-12:
        raise ShapeMismatch(f"vector must be normalized, |v| = {norm}")
    return v


def complete_basis(v: np.ndarray) -> np.ndarray:
    """Orthonormal basis whose first column is v (phase preserved)."""
    n = v.shape[0]
    q, _ = np.linalg.qr(np.column_stack([v, np.eye(n)])[:, :n])
    phase = v.conj() @ q[:, 0]
    q[:, 0] = q[:, 0] * (phase.conjugate() / abs(phase))
    return q


@dataclass(frozen=True)
class FaceSpec:
    """Maximal face data: the defining pair and completed bases."""

    xi: np.ndarray
    eta: np.ndarray
    xi_basis: np.ndarray = None
    eta_basis: np.ndarray = None

    def __post_init__(self):
        object.__setattr__(self, "xi", _unit_vector(self.xi))
        object.__setattr__(self, "eta", _unit_vector(self.eta))
        if self.xi_basis is None:
            object.__setattr__(self, "xi_basis", complete_basis(self.xi))
        if self.eta_basis is None:
            object.__setattr__(self, "eta_basis", complete_basis(self.eta))


def face_membership(phi: MapObject, face: FaceSpec, tol: float = 1e-8) -> bool:
    """phi is in F_{xi,eta} iff it is unital and phi(|xi><xi|) eta = 0."""
    m, n = phi.dim_in, phi.dim_out
    if face.xi.shape[0] != m or face.eta.shape[0] != n:
        raise ShapeMismatch("face vectors do not match the map dimensions")
    unital = np.linalg.norm(apply_map(phi, np.eye(m)) - np.eye(n))
    killed = np.linalg.norm(apply_map(phi, np.outer(face.xi, face.xi.conj())) @ face.eta)
    return unital <= tol and killed <= tol


def sample_face_map(face: FaceSpec, terms: int, seed: int) -> MapObject:
    """Random positive unital member of the face.

    Convex combination of conjugations a -> U a U* with U xi orthogonal to
    eta, and co-conjugations a -> V a^t V* with V conj(xi) orthogonal to
    eta; both constraints make the face condition exact by construction.
    """
    if face.xi.shape[0] != 2 or face.eta.shape[0] != 2:
        raise DimensionMismatch("face sampling is implemented for m = n = 2")
    rng = np.random.default_rng(seed)
    eta1, eta2 = face.eta_basis.T
    xi1, xi2 = face.xi_basis.T
    xic = face.xi.conj()
    xic_basis = complete_basis(xic / np.linalg.norm(xic))
    xic1, xic2 = xic_basis.T

    def constrained_unitary(src1, src2):
        # maps src1 -> phase * eta2 (orthogonal to eta), src2 -> phase * eta1
        th1, th2 = rng.uniform(0, 2 * np.pi, size=2)
        return (np.exp(1j * th1) * np.outer(eta2, src1.conj())
                + np.exp(1j * th2) * np.outer(eta1, src2.conj()))

    weights = rng.dirichlet(np.ones(2 * terms))
    side = 4
    choi = np.zeros((side, side), dtype=complex)
    for t in range(terms):
        u = constrained_unitary(xi1, xi2)
        choi += weights[t] * adjoint_map(u).choi
        v = constrained_unitary(xic1, xic2)
        choi += weights[terms + t] * compose_transpose(adjoint_map(v)).choi
    return MapObject(2, 2, linalg.herm_part(choi), label=f"face-sample:{seed}")


def symmetric_face_example() -> tuple[MapObject, FaceSpec]:
    """The equal-weight sigma_x example in the face of (e1, e1)."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    phi = map_from_action(lambda a: 0.5 * sx @ a @ sx + 0.5 * sx @ a.T @ sx, 2, 2,
                          label="sym-face")
    face = FaceSpec(xi=np.array([1.0, 0.0]), eta=np.array([1.0, 0.0]))
    return phi, face


@dataclass
class StormerData:
    """All objects of the local-decomposition construction."""

    omega_eta: np.ndarray                      # density-matrix form of omega_eta
    left_ideal_basis: list[np.ndarray]
    right_ideal_basis: list[np.ndarray]
    k_dim: int
    gram: np.ndarray                           # inner-product Gram on M_2 + M_2
    k_basis: list[tuple[str, np.ndarray, np.ndarray]]   # label + representatives
    rho_units: dict[tuple[int, int], np.ndarray]
    v_eta: np.ndarray                          # dim_out x k_dim, standard basis
    g_projection: np.ndarray
    eta: np.ndarray
    eta_basis: np.ndarray
    face_case: bool
    xi: np.ndarray | None
    alpha: complex | None
    beta: complex | None
    v_eta_face_matrix: np.ndarray | None       # 2 x 4 in the (k, eta) bases
    basis_orthonormality_residual: float
    v_lsq_residual: float
    v_norm: float
    _coord: object = None

    def rho_of(self, a: np.ndarray) -> np.ndarray:
        """Jordan morphism matrix for an arbitrary element, by linearity."""
        out = np.zeros((self.k_dim, self.k_dim), dtype=complex)
        for (i, j), r in self.rho_units.items():
            out += a[i, j] * r
        return out

    def coord(self, a1: np.ndarray, a2: np.ndarray) -> np.ndarray:
        """K_eta coordinates of the class of (a1, a2)."""
        return self._coord(a1, a2)


def _omega_functional(phi: MapObject, eta: np.ndarray):
    def omega(a):
        return complex(eta.conj() @ apply_map(phi, a) @ eta)
    return omega


def _gram_blocks(omega, m: int):
    units = [(i, j) for i in range(m) for j in range(m)]
    gl = np.zeros((m * m, m * m), dtype=complex)
    gr = np.zeros((m * m, m * m), dtype=complex)
    for a, (i, j) in enumerate(units):
        for b, (p, q) in enumerate(units):
            ua, ub = np.zeros((m, m), dtype=complex), np.zeros((m, m), dtype=complex)
            ua[i, j] = 1.0
            ub[p, q] = 1.0
            gl[a, b] = 0.5 * omega(ua.conj().T @ ub)
            gr[a, b] = 0.5 * omega(ub @ ua.conj().T)
    gram = np.zeros((2 * m * m, 2 * m * m), dtype=complex)
    gram[: m * m, : m * m] = gl
    gram[m * m:, m * m:] = gr
    return gl, gr, gram


def _kernel_basis(g: np.ndarray, m: int) -> list[np.ndarray]:
    w, v = np.linalg.eigh(linalg.herm_part(g))
    return [v[:, s].reshape(m, m) for s in range(len(w)) if w[s] < _KER_TOL]


def build_local_decomposition(
    phi: MapObject,
    eta,
    face: FaceSpec | None = None,
    check_positivity: bool = True,
    positivity_restarts: int = 8,
    seed: int = 0,
    tol: float = 1e-8,
) -> StormerData:
    """Carry out the quotient construction for (phi, eta).

    When phi sits in a maximal face (detected from the kernel of omega_eta
    or supplied explicitly) the ideals are taken exactly and the explicit
    four-element basis is emitted; otherwise the quotients are realized
    numerically from the Gram spectrum.
    """
    m, n = phi.dim_in, phi.dim_out
    if (m, n) != (2, 2):
        raise DimensionMismatch("the construction is implemented for M_2 -> M_2")
    eta = _unit_vector(eta)
    unital_res = np.linalg.norm(apply_map(phi, np.eye(m)) - np.eye(n))
    if unital_res > tol:
        raise NotUnital(f"phi(I) deviates from I by {unital_res:.3e}")
    if check_positivity:
        search = k_positivity_search(phi, k=1, restarts=positivity_restarts, seed=seed)
        if search.violation_found:
            raise NotPositiveEvidence(
                f"positivity violated on a product vector, value {search.value:.3e}")

    omega = _omega_functional(phi, eta)
    density = np.zeros((m, m), dtype=complex)
    for i in range(m):
        for j in range(m):
            density[j, i] = omega(_unit_mat(m, i, j))
    density = linalg.herm_part(density)

    gl, gr, gram = _gram_blocks(omega, m)
    left_basis = _kernel_basis(gl, m)
    right_basis = _kernel_basis(gr, m)

    xi = None
    if face is not None:
        xi = face.xi
    else:
        w_d, v_d = np.linalg.eigh(density)
        if w_d[0] < _KER_TOL:
            xi = v_d[:, 0]
    if xi is not None and np.linalg.norm(
            apply_map(phi, np.outer(xi, xi.conj())) @ eta) <= max(tol, 1e-8):
        return _build_face_case(phi, eta, xi, omega, density, gram,
                                left_basis, right_basis)
    return _build_generic(phi, eta, omega, density, gram, left_basis, right_basis)


def _unit_mat(m, i, j):
    e = np.zeros((m, m), dtype=complex)
    e[i, j] = 1.0
    return e


def _build_face_case(phi, eta, xi, omega, density, gram, left_basis, right_basis):
    xb = complete_basis(xi)
    e = {(i, j): np.outer(xb[:, i], xb[:, j].conj()) for i in range(2) for j in range(2)}
    eb = complete_basis(eta)
    eta1 = eb[:, 0]
    eta2 = eb[:, 1]
    # pin the free phase of eta2 so alpha is real nonnegative when possible
    alpha0 = np.sqrt(2) * (eta2.conj() @ apply_map(phi, e[(0, 1)]) @ eta1)
    if abs(alpha0) > 1e-12:
        eta2 = eta2 * (alpha0 / abs(alpha0))
        eb = np.column_stack([eta1, eta2])
    alpha = np.sqrt(2) * (eta2.conj() @ apply_map(phi, e[(0, 1)]) @ eta1)
    beta = np.sqrt(2) * (eta2.conj() @ apply_map(phi, e[(1, 0)]) @ eta1)

    s2 = np.sqrt(2)
    reps = [
        ("k1", s2 * e[(0, 1)], s2 * e[(0, 1)]),
        ("k2", s2 * e[(1, 0)], s2 * e[(1, 0)]),
        ("k3", e[(1, 1)], e[(1, 1)]),
        ("k4", e[(1, 1)], -e[(1, 1)]),
    ]

    def inner(pair_a, pair_b):
        return 0.5 * omega(pair_a[0].conj().T @ pair_b[0]) \
            + 0.5 * omega(pair_b[1] @ pair_a[1].conj().T)

    ortho = 0.0
    for a in range(4):
        for b in range(4):
            val = inner(reps[a][1:], reps[b][1:])
            ortho = max(ortho, abs(val - (1.0 if a == b else 0.0)))

    def coord(a1, a2):
        return np.array([inner((r1, r2), (a1, a2)) for _, r1, r2 in reps])

    rho_units = {}
    for p in range(2):
        for q in range(2):
            u = _unit_mat(2, p, q)
            cols = [coord(u @ r1, r2 @ u) for _, r1, r2 in reps]
            rho_units[(p, q)] = np.column_stack(cols)

    v_cols = [apply_map(phi, reps[0][1]) @ eta,
              apply_map(phi, reps[1][1]) @ eta,
              apply_map(phi, reps[2][1]) @ eta,
              np.zeros(2, dtype=complex)]
    v_eta = np.column_stack(v_cols)
    v_face = eb.conj().T @ v_eta
    g_proj = np.diag([1.0, 1.0, 1.0, 0.0]).astype(complex)

    return StormerData(
        omega_eta=density,
        left_ideal_basis=left_basis,
        right_ideal_basis=right_basis,
        k_dim=4,
        gram=gram,
        k_basis=reps,
        rho_units=rho_units,
        v_eta=v_eta,
        g_projection=g_proj,
        eta=eta,
        eta_basis=eb,
        face_case=True,
        xi=np.asarray(xi, dtype=complex),
        alpha=complex(alpha),
        beta=complex(beta),
        v_eta_face_matrix=v_face,
        basis_orthonormality_residual=float(ortho),
        v_lsq_residual=0.0,
        v_norm=float(np.linalg.norm(v_eta, 2)),
    )


def _build_generic(phi, eta, omega, density, gram, left_basis, right_basis):
    m = 2
    w, v = np.linalg.eigh(linalg.herm_part(gram))
    keep = w > _KER_TOL
    mu = w[keep]
    vk = v[:, keep]
    k_dim = int(keep.sum())
    q_mat = (np.sqrt(mu)[:, None]) * vk.conj().T          # K x 8
    q_plus = vk * (1.0 / np.sqrt(mu))[None, :]            # 8 x K

    def coord(a1, a2):
        c = np.concatenate([np.asarray(a1, dtype=complex).reshape(-1),
                            np.asarray(a2, dtype=complex).reshape(-1)])
        return q_mat @ c

    def rho_w(p, q):
        big = np.zeros((8, 8), dtype=complex)
        for i in range(m):
            for j in range(m):
                src = i * m + j
                if i == q:                       # E_pq E_ij = E_pj
                    big[p * m + j, src] += 1.0
                if j == p:                       # E_ij E_pq = E_iq
                    big[4 + i * m + q, 4 + src] += 1.0
        return big

    rho_units = {(p, q): q_mat @ rho_w(p, q) @ q_plus
                 for p in range(m) for q in range(m)}

    diag_cols = []
    phi_cols = []
    for i in range(m):
        for j in range(m):
            u = _unit_mat(m, i, j)
            diag_cols.append(coord(u, u))
            phi_cols.append(apply_map(phi, u) @ eta)
    d_mat = np.column_stack(diag_cols)                    # K x 4
    phi_mat = np.column_stack(phi_cols)                   # 2 x 4
    v_eta = phi_mat @ np.linalg.pinv(d_mat, rcond=1e-10)
    lsq = float(np.linalg.norm(v_eta @ d_mat - phi_mat))

    u_g, s_g, _ = np.linalg.svd(d_mat, full_matrices=False)
    rank = int((s_g > 1e-10 * max(1.0, s_g[0])).sum())
    basis_g = u_g[:, :rank]
    g_proj = basis_g @ basis_g.conj().T

    k_basis = [(f"kappa{s + 1}", q_plus[: 4, s].reshape(m, m),
                q_plus[4:, s].reshape(m, m)) for s in range(k_dim)]

    return StormerData(
        omega_eta=density,
        left_ideal_basis=left_basis,
        right_ideal_basis=right_basis,
        k_dim=k_dim,
        gram=gram,
        k_basis=k_basis,
        rho_units=rho_units,
        v_eta=v_eta,
        g_projection=g_proj,
        eta=eta,
        eta_basis=complete_basis(eta),
        face_case=False,
        xi=None,
        alpha=None,
        beta=None,
        v_eta_face_matrix=None,
        basis_orthonormality_residual=0.0,
        v_lsq_residual=lsq,
        v_norm=float(np.linalg.norm(v_eta, 2)),
    )


@dataclass
class LocdecReport:
    samples: int
    max_residual: float
    v_norm: float
    k_dim: int
    face_case: bool


def verify_locdec(phi: MapObject, eta, samples: int, seed: int = 0,
                  tol: float = 1e-9, data: StormerData | None = None) -> LocdecReport:
    """Max residual of phi(a) eta = V rho(a) V* eta over random a."""
    if data is None:
        data = build_local_decomposition(phi, eta, seed=seed)
    eta_v = data.eta
    v = data.v_eta
    v_star_eta = v.conj().T @ eta_v
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(max(1, samples)):
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        a /= np.linalg.norm(a)
        lhs = apply_map(phi, a) @ eta_v
        rhs = v @ (data.rho_of(a) @ v_star_eta)
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return LocdecReport(samples=samples, max_residual=worst, v_norm=data.v_norm,
                        k_dim=data.k_dim, face_case=data.face_case)


@dataclass
class Prop41Report:
    """Trace-condition residuals versus the global-equality residual."""

    tr_residuals: dict[str, float]
    alfabeta_residual: float
    global_residual: float
    eta2_residuals: dict[str, float]
    conditions_hold: bool
    equality_holds: bool
    inconsistent: bool
    alpha: complex
    beta: complex
    tol: float


def check_prop41(phi: MapObject, face: FaceSpec, tol: float = 1e-8) -> Prop41Report:
    """Check the iff between the trace conditions and the global equality.

    The iff verdict uses a tenfold hysteresis band: an inconsistency is
    flagged only when one side fails by more than 10*tol while the other
    holds within tol.
    """
    if not face_membership(phi, face, tol=max(tol, 1e-8)):
        raise NotInFace("map does not satisfy the face conditions")
    data = build_local_decomposition(phi, face.eta, face=face, tol=max(tol, 1e-8))
    xb = complete_basis(face.xi)
    e = {(i, j): np.outer(xb[:, i], xb[:, j].conj()) for i in range(2) for j in range(2)}
    eta1 = data.eta_basis[:, 0]
    eta2 = data.eta_basis[:, 1]

    tr = {
        "e12": abs(np.trace(apply_map(phi, e[(0, 1)]))),
        "e21": abs(np.trace(apply_map(phi, e[(1, 0)]))),
        "e22": abs(np.trace(apply_map(phi, e[(1, 1)])) - 1.0),
    }
    rhs = 2.0 * (abs(eta2.conj() @ apply_map(phi, e[(0, 1)]) @ eta1) ** 2
                 + abs(eta2.conj() @ apply_map(phi, e[(1, 0)]) @ eta1) ** 2)
    alfabeta = abs(np.trace(apply_map(phi, e[(0, 0)])) - rhs)

    v = data.v_eta
    global_res = 0.0
    eta2_res = {}
    for (i, j), mat in e.items():
        recon = v @ data.rho_of(mat) @ v.conj().T
        diff = apply_map(phi, mat) - recon
        global_res = max(global_res, float(np.linalg.norm(diff)))
        eta2_res[f"e{i + 1}{j + 1}"] = float(np.linalg.norm(diff @ eta2))

    cond_res = max(max(tr.values()), alfabeta)
    conditions_hold = cond_res <= tol
    equality_holds = global_res <= tol
    inconsistent = (cond_res > 10 * tol and global_res <= tol) or \
                   (global_res > 10 * tol and cond_res <= tol)
    return Prop41Report(
        tr_residuals={k: float(x) for k, x in tr.items()},
        alfabeta_residual=float(alfabeta),
        global_residual=global_res,
        eta2_residuals=eta2_res,
        conditions_hold=conditions_hold,
        equality_holds=equality_holds,
        inconsistent=inconsistent,
        alpha=data.alpha,
        beta=data.beta,
        tol=tol,
    )
