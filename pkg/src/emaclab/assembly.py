"""Element assembly of the mass/viscous/divergence/grad-div forms and the
five nonlinearity variants (CONV, SKEW, ROT, CONS, EMAC) with exact Newton
linearizations.

All element loops are vectorized over triangles with a single fixed
degree-6 quadrature rule; global insertion goes through COO->CSR summation,
which is deterministic regardless of evaluation schedule.  A scalar
per-triangle reference path (``nonlinear_residual_reference``) is kept for
debugging.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .fespace import FieldCoeffs, TaylorHoodSpace, VectorField
from .mesh import triangle_areas
from .quadrature import DEFAULT_RULE


class FormKind(enum.Enum):
    CONV = "conv"
    SKEW = "skew"
    ROT = "rot"
    CONS = "cons"
    EMAC = "emac"

    @classmethod
    def parse(cls, name: str) -> "FormKind":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown nonlinearity form {name!r}") from None


def _p2_basis(lam: np.ndarray):
    """P2 values and reference gradients at barycentric points lam (Q,3).

    Node order: vertices 0-2 then midpoints of the edges opposite vertices
    0-2 (matching mesh.edge_structure's tri_edges).
    """
    l0, l1, l2 = lam[:, 0], lam[:, 1], lam[:, 2]
    phi = np.stack(
        [
            l0 * (2 * l0 - 1),
            l1 * (2 * l1 - 1),
            l2 * (2 * l2 - 1),
            4 * l1 * l2,
            4 * l2 * l0,
            4 * l0 * l1,
        ],
        axis=1,
    )
    glam = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])  # d lambda / d(xi,eta)
    q = len(lam)
    gphi = np.zeros((q, 6, 2))
    for i in range(3):
        gphi[:, i] = (4 * lam[:, i] - 1)[:, None] * glam[i]
    for k, (a, b) in enumerate(((1, 2), (2, 0), (0, 1))):
        gphi[:, 3 + k] = 4 * (lam[:, a, None] * glam[b] + lam[:, b, None] * glam[a])
    return phi, gphi


class _ScatterPattern:
    """Frozen CSR sparsity for repeated element scatters.

    Element contributions arrive as a flat array aligned with (rows, cols);
    apply() sums duplicates into the precomputed CSR structure.  The
    summation order is fixed by a stable argsort, so assembly is
    deterministic regardless of how the element loop was scheduled.
    """

    def __init__(self, rows, cols, shape):
        self.shape = shape
        keys = rows.astype(np.int64) * shape[1] + cols
        self.perm = np.argsort(keys, kind="stable")
        sk = keys[self.perm]
        self.starts = np.nonzero(np.r_[True, sk[1:] != sk[:-1]])[0]
        uk = sk[self.starts]
        urows = uk // shape[1]
        self.indices = (uk % shape[1]).astype(np.int32)
        self.indptr = np.searchsorted(urows, np.arange(shape[0] + 1)).astype(np.int32)

    def apply(self, flat: np.ndarray) -> sp.csr_matrix:
        data = np.add.reduceat(flat[self.perm], self.starts)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=self.shape)


@dataclass
class AssemblyContext:
    phi: np.ndarray        # (Q, 6) P2 values
    psi: np.ndarray        # (Q, 3) P1 values
    phi_nn: np.ndarray     # (Q, 36) products phi[q,l]*phi[q,m]
    gphi: np.ndarray       # (T, Q, 6, 2) physical P2 gradients
    wdet: np.ndarray       # (Q, T) quadrature weight * |J|
    qpx: np.ndarray        # (Q, T) physical quadrature points
    qpy: np.ndarray
    cell_nodes: np.ndarray  # (T, 6) global scalar node ids
    cell_vdofs: np.ndarray  # (T, 12) global velocity dofs, 2*node+comp
    cell_pdofs: np.ndarray  # (T, 3)
    vv_pattern: _ScatterPattern
    pv_pattern: _ScatterPattern


def context(space: TaylorHoodSpace) -> AssemblyContext:
    if space._context is not None:
        return space._context

    mesh = space.mesh
    rule = DEFAULT_RULE
    lam = rule.points
    phi, gphi_ref = _p2_basis(lam)
    psi = lam.copy()

    tri = mesh.triangles
    p = mesh.vertices[tri]                       # (T, 3, 2)
    j11 = p[:, 1, 0] - p[:, 0, 0]
    j21 = p[:, 1, 1] - p[:, 0, 1]
    j12 = p[:, 2, 0] - p[:, 0, 0]
    j22 = p[:, 2, 1] - p[:, 0, 1]
    det = j11 * j22 - j12 * j21                  # = 2 * area > 0
    inv = np.empty((len(tri), 2, 2))
    inv[:, 0, 0] = j22 / det
    inv[:, 0, 1] = -j12 / det
    inv[:, 1, 0] = -j21 / det
    inv[:, 1, 1] = j11 / det
    # grad phi = J^{-T} grad_ref phi ; (J^{-T})_{km} = inv[m, k]
    gphi = np.einsum("tmk,qlm->tqlk", inv, gphi_ref)

    wdet = rule.weights[:, None] * det[None, :]
    qp = np.einsum("qv,tvd->qtd", lam, p)
    cell_nodes = np.concatenate([tri, mesh.num_vertices + space.tri_edges], axis=1)
    cell_vdofs = np.empty((len(tri), 12), dtype=np.int64)
    cell_vdofs[:, 0::2] = 2 * cell_nodes
    cell_vdofs[:, 1::2] = 2 * cell_nodes + 1
    cell_pdofs = tri.astype(np.int64)

    jrows = np.repeat(cell_vdofs, 12, axis=1).ravel()
    jcols = np.tile(cell_vdofs, (1, 12)).ravel()
    brows = np.repeat(cell_pdofs, 12, axis=1).ravel()
    bcols = np.tile(cell_vdofs, (1, 3)).ravel()
    nvd = space.num_vdofs

    ctx = AssemblyContext(
        phi=phi, psi=psi,
        phi_nn=(phi[:, :, None] * phi[:, None, :]).reshape(len(lam), 36),
        gphi=gphi, wdet=wdet,
        qpx=qp[:, :, 0], qpy=qp[:, :, 1],
        cell_nodes=cell_nodes, cell_vdofs=cell_vdofs, cell_pdofs=cell_pdofs,
        vv_pattern=_ScatterPattern(jrows, jcols, (nvd, nvd)),
        pv_pattern=_ScatterPattern(brows, bcols, (space.num_pdofs, nvd)),
    )
    space._context = ctx
    return ctx


def _values(u) -> np.ndarray:
    return u.values if isinstance(u, FieldCoeffs) else np.asarray(u, dtype=float)


def velocity_at_qp(ctx: AssemblyContext, u_full: np.ndarray):
    """Values U (Q,T,2) and gradients G (Q,T,2,2), G[...,c,k] = d u_c/d x_k."""
    t, q = ctx.gphi.shape[:2]
    ul = u_full[ctx.cell_vdofs].reshape(t, 6, 2)
    U = np.tensordot(ctx.phi, ul, axes=(1, 1))                     # (Q,T,2)
    gm = ctx.gphi.transpose(0, 2, 1, 3).reshape(t, 6, q * 2)
    G = np.matmul(ul.transpose(0, 2, 1), gm)                       # (T,2,Q*2)
    G = G.reshape(t, 2, q, 2).transpose(2, 0, 1, 3)                # (Q,T,2,2)
    return U, G


# ---------------------------------------------------------------------------
# Matrix assembly
# ---------------------------------------------------------------------------

def assemble_mass(space: TaylorHoodSpace) -> sp.csr_matrix:
    """Velocity mass matrix (SPD)."""
    ctx = context(space)
    mhat = np.einsum("qt,ql,qm->tlm", ctx.wdet, ctx.phi, ctx.phi)
    local = np.zeros((len(mhat), 12, 12))
    local[:, 0::2, 0::2] = mhat
    local[:, 1::2, 1::2] = mhat
    return ctx.vv_pattern.apply(local.ravel())


def assemble_viscous(space: TaylorHoodSpace) -> sp.csr_matrix:
    """(grad u, grad v), without the viscosity factor."""
    ctx = context(space)
    khat = np.einsum("qt,tqlk,tqmk->tlm", ctx.wdet, ctx.gphi, ctx.gphi)
    local = np.zeros((len(khat), 12, 12))
    local[:, 0::2, 0::2] = khat
    local[:, 1::2, 1::2] = khat
    return ctx.vv_pattern.apply(local.ravel())


def assemble_divergence(space: TaylorHoodSpace) -> sp.csr_matrix:
    """B with (B u)_q = (div u, psi_q); shape pressure x velocity."""
    ctx = context(space)
    be = np.einsum("qt,qk,tqlc->tklc", ctx.wdet, ctx.psi, ctx.gphi)
    return ctx.pv_pattern.apply(be.reshape(-1, 3, 12).ravel())


def assemble_graddiv(space: TaylorHoodSpace) -> sp.csr_matrix:
    """(div u, div v) stabilization matrix."""
    ctx = context(space)
    ge = np.einsum("qt,tqlc,tqme->tlcme", ctx.wdet, ctx.gphi, ctx.gphi)
    return ctx.vv_pattern.apply(ge.reshape(-1, 12, 12).ravel())


def gradient_load_vector(space: TaylorHoodSpace, w: VectorField) -> np.ndarray:
    """Right-hand side (grad w, grad v) for an analytic field w."""
    ctx = context(space)
    gw = w.gradient(ctx.qpx, ctx.qpy)            # (Q,T,2,2)
    r = np.einsum("qt,qtck,tqlk->tlc", ctx.wdet, gw, ctx.gphi)
    out = np.zeros(space.num_vdofs)
    np.add.at(out, ctx.cell_vdofs, r.reshape(-1, 12))
    return out


def load_vector(space: TaylorHoodSpace, f, t: float) -> np.ndarray:
    """(f(., t), v) for an analytic forcing f(x, y, t) -> (..., 2)."""
    ctx = context(space)
    fv = np.asarray(f(ctx.qpx, ctx.qpy, t), dtype=float)
    r = np.einsum("qt,qtc,ql->tlc", ctx.wdet, fv, ctx.phi)
    out = np.zeros(space.num_vdofs)
    np.add.at(out, ctx.cell_vdofs, r.reshape(-1, 12))
    return out


def combine_vv(ops: "Operators", Jn: sp.csr_matrix, mass: float, viscous: float,
               graddiv: float = 0.0, nonlinear: float = 1.0) -> sp.csr_matrix:
    """Linear combination of the velocity-block matrices.

    M, A, G and the nonlinear Jacobian are all assembled on the same frozen
    sparsity (the per-cell 12x12 union), so the combination is a flat-data
    sum with no pattern merging.
    """
    data = mass * ops.M.data + viscous * ops.A.data + nonlinear * Jn.data
    if graddiv:
        data = data + graddiv * ops.G.data
    return sp.csr_matrix((data, Jn.indices, Jn.indptr), shape=Jn.shape)


@dataclass
class Operators:
    """Assembled matrices for one space, plus their constrained reductions."""

    M: sp.csr_matrix
    A: sp.csr_matrix
    B: sp.csr_matrix
    G: sp.csr_matrix
    area_vec: np.ndarray          # pressure gauge vector, full
    Mr: sp.csr_matrix
    Ar: sp.csr_matrix
    Br: sp.csr_matrix
    Gr: sp.csr_matrix
    area_vec_r: np.ndarray
    domain_area: float


def operators(space: TaylorHoodSpace) -> Operators:
    if space._operators is not None:
        return space._operators
    M = assemble_mass(space)
    A = assemble_viscous(space)
    B = assemble_divergence(space)
    G = assemble_graddiv(space)
    m = space.pressure_area_vector()
    Pv, Pp = space.P_v, space.P_p
    ops = Operators(
        M=M, A=A, B=B, G=G, area_vec=m,
        Mr=(Pv.T @ M @ Pv).tocsr(),
        Ar=(Pv.T @ A @ Pv).tocsr(),
        Br=(Pp.T @ B @ Pv).tocsr(),
        Gr=(Pv.T @ G @ Pv).tocsr(),
        area_vec_r=Pp.T @ m,
        domain_area=float(triangle_areas(space.mesh).sum()),
    )
    space._operators = ops
    return ops


# ---------------------------------------------------------------------------
# Nonlinear forms.  At a quadrature point the integrand against the test
# function w is alpha . w + beta : grad w, with alpha/beta bilinear in the
# two argument slots (U1,G1) and (U2,G2):
#
#   CONV  b(u,v,w)        alpha_c = U1_k G2_{ck}
#   SKEW  b*(u,v,w)       alpha_c = U1_k G2_{ck} / 2,  beta_{ck} = -U1_k U2_c / 2
#   ROT   ((curl u)xv, w) alpha = omega(U1) * (-U2_y, U2_x)
#   CONS  b + (div u)v    alpha_c = U1_k G2_{ck} + tr(G1) U2_c
#   EMAC  c(u,v,w)        alpha_c = (G1_{ck}+G1_{kc}) U2_k + tr(G1) U2_c
# ---------------------------------------------------------------------------

def _alpha_beta(form: FormKind, U1, G1, U2, G2):
    if form is FormKind.CONV:
        return np.einsum("qtk,qtck->qtc", U1, G2), None
    if form is FormKind.SKEW:
        alpha = 0.5 * np.einsum("qtk,qtck->qtc", U1, G2)
        beta = -0.5 * np.einsum("qtk,qtc->qtck", U1, U2)
        return alpha, beta
    if form is FormKind.ROT:
        omega = G1[:, :, 1, 0] - G1[:, :, 0, 1]
        alpha = np.stack([-omega * U2[:, :, 1], omega * U2[:, :, 0]], axis=-1)
        return alpha, None
    if form is FormKind.CONS:
        div1 = G1[:, :, 0, 0] + G1[:, :, 1, 1]
        alpha = np.einsum("qtk,qtck->qtc", U1, G2) + div1[..., None] * U2
        return alpha, None
    if form is FormKind.EMAC:
        gsym = G1 + np.swapaxes(G1, 2, 3)
        div1 = G1[:, :, 0, 0] + G1[:, :, 1, 1]
        alpha = np.einsum("qtck,qtk->qtc", gsym, U2) + div1[..., None] * U2
        return alpha, None
    raise ValueError(form)


def eval_trilinear(form: FormKind, space: TaylorHoodSpace, u, v, w) -> float:
    """Quadrature value of the chosen trilinear form at discrete fields."""
    ctx = context(space)
    U1, G1 = velocity_at_qp(ctx, _values(u))
    U2, G2 = velocity_at_qp(ctx, _values(v))
    W, GW = velocity_at_qp(ctx, _values(w))
    alpha, beta = _alpha_beta(form, U1, G1, U2, G2)
    s = np.einsum("qt,qtc,qtc->", ctx.wdet, alpha, W)
    if beta is not None:
        s += np.einsum("qt,qtck,qtck->", ctx.wdet, beta, GW)
    return float(s)


def nonlinear_residual(form: FormKind, space: TaylorHoodSpace, u) -> np.ndarray:
    """Vector N(u) with N(u).w = eval_trilinear(form, u, u, w) for all w."""
    ctx = context(space)
    t, q = ctx.gphi.shape[:2]
    U, G = velocity_at_qp(ctx, _values(u))
    alpha, beta = _alpha_beta(form, U, G, U, G)
    aw = (ctx.wdet[..., None] * alpha).reshape(q, t * 2)
    r = (ctx.phi.T @ aw).reshape(6, t, 2).transpose(1, 0, 2)       # (T,6,2)
    if beta is not None:
        bw = (ctx.wdet[..., None, None] * beta).transpose(1, 0, 3, 2)  # (T,Q,k,c)
        r = r + np.matmul(
            ctx.gphi.transpose(0, 2, 1, 3).reshape(t, 6, q * 2),
            bw.reshape(t, q * 2, 2),
        )
    out = np.zeros(space.num_vdofs)
    np.add.at(out, ctx.cell_vdofs, r.reshape(t, 12))
    return out


# Contraction helpers used by the Jacobian; everything is phrased as plain
# matrix products so BLAS does the q-sums.

def _sumq_nn(ctx, F):
    """F (Q,T,...) -> out[t, l, :, m] = sum_q F[q,t,...] phi[q,l] phi[q,m]."""
    q = F.shape[0]
    flat = F.reshape(q, -1)
    out = ctx.phi_nn.T @ flat                    # (36, T*rest)
    return out.reshape((6, 6) + F.shape[1:])     # [l, m, t, ...]


def _sumq_n(ctx, H):
    """H (T,Q,6) -> out[t, lH, m] = sum_q H[t,q,lH] phi[q,m] (single GEMM)."""
    t = H.shape[0]
    flat = np.ascontiguousarray(H.transpose(0, 2, 1)).reshape(t * 6, -1)
    return (flat @ ctx.phi).reshape(t, 6, 6)


def _grad_value_product(ctx, Uw):
    """M1[t, (m,k), (l,c)] = sum_q gphi[t,q,m,k] phi[q,l] Uw[q,t,c] (batched GEMM)."""
    t, q = ctx.gphi.shape[:2]
    H = ctx.gphi.reshape(t, q, 12)                             # (t, q, 2m+k)
    W = (ctx.phi[:, None, :, None] * Uw[:, :, None, :])        # (q, t, l, c)
    W = np.ascontiguousarray(W.transpose(1, 0, 2, 3)).reshape(t, q, 12)
    return np.matmul(H.transpose(0, 2, 1), W).reshape(t, 6, 2, 6, 2)


def nonlinear_jacobian(form: FormKind, space: TaylorHoodSpace, u) -> sp.csr_matrix:
    """Exact derivative dN/du of the chosen form at state u."""
    ctx = context(space)
    U, G = velocity_at_qp(ctx, _values(u))
    N, D, WD = ctx.phi, ctx.gphi, ctx.wdet
    T = D.shape[0]
    Uw = WD[..., None] * U
    J = np.zeros((T, 6, 2, 6, 2))

    def add_diag(block):  # block (T, l1, l2) added to both diagonal components
        J[:, :, 0, :, 0] += block
        J[:, :, 1, :, 1] += block

    # M1[t, mk, lc] = sum_q D_{mk} phi_l (wdet*U)_c serves every value*gradient term
    M1 = _grad_value_product(ctx, Uw)
    # udotd_w[t, q, m] = wdet * U . grad phi_m
    udotd_w = np.ascontiguousarray(
        np.einsum("qtk,tqmk->qtm", WD[..., None] * U, D).transpose(1, 0, 2)
    )

    if form in (FormKind.CONV, FormKind.SKEW, FormKind.CONS):
        fac = 0.5 if form is FormKind.SKEW else 1.0
        Gw = WD[..., None, None] * G
        nn = _sumq_nn(ctx, Gw)                   # [l, m, t, a, b]
        J += fac * nn.transpose(2, 0, 3, 1, 4)
        # (U . grad phi_m) phi_l on the component diagonal
        trial = _sumq_n(ctx, udotd_w)            # [t, m, l]
        add_diag(fac * trial.transpose(0, 2, 1))
        if form is FormKind.SKEW:
            # beta: -(phi_m U_a) (grad phi_l)_b / 2 and -(U . grad phi_l) phi_m / 2
            J -= 0.5 * M1.transpose(0, 1, 4, 3, 2)   # [t, l, a, m, b] = M1[t, l, b, m, a]
            add_diag(-0.5 * _sumq_n(ctx, udotd_w))
        if form is FormKind.CONS:
            J += M1.transpose(0, 3, 4, 1, 2)         # [t,l,a,m,b] = M1[t, m, b, l, a]
            trw = WD * (G[:, :, 0, 0] + G[:, :, 1, 1])
            add_diag(_sumq_nn(ctx, trw).transpose(2, 0, 1))
    elif form is FormKind.EMAC:
        trial = _sumq_n(ctx, udotd_w)
        add_diag(trial.transpose(0, 2, 1))
        J += M1.transpose(0, 3, 2, 1, 4)             # [t,l,a,m,b] = M1[t, m, a, l, b]
        J += M1.transpose(0, 3, 4, 1, 2)             # [t,l,a,m,b] = M1[t, m, b, l, a]
        gsw = WD[..., None, None] * (G + np.swapaxes(G, 2, 3))
        J += _sumq_nn(ctx, gsw).transpose(2, 0, 3, 1, 4)
        trw = WD * (G[:, :, 0, 0] + G[:, :, 1, 1])
        add_diag(_sumq_nn(ctx, trw).transpose(2, 0, 1))
    elif form is FormKind.ROT:
        omega_nn = _sumq_nn(ctx, WD * (G[:, :, 1, 0] - G[:, :, 0, 1]))
        omega_nn = omega_nn.transpose(2, 0, 1)       # [t, l, m]
        M1v = M1                                     # [t, m, k, l, c]
        J[:, :, 0, :, 0] += M1v[:, :, 1, :, 1].transpose(0, 2, 1)
        J[:, :, 0, :, 1] -= M1v[:, :, 0, :, 1].transpose(0, 2, 1)
        J[:, :, 0, :, 1] -= omega_nn
        J[:, :, 1, :, 0] -= M1v[:, :, 1, :, 0].transpose(0, 2, 1)
        J[:, :, 1, :, 0] += omega_nn
        J[:, :, 1, :, 1] += M1v[:, :, 0, :, 0].transpose(0, 2, 1)
    else:
        raise ValueError(form)

    return ctx.vv_pattern.apply(J.reshape(T, 144).ravel())


def nonlinear_residual_reference(form: FormKind, space: TaylorHoodSpace, u) -> np.ndarray:
    """Slow per-triangle loop; debugging reference for the vectorized path."""
    ctx = context(space)
    uv = _values(u)
    out = np.zeros(space.num_vdofs)
    nq = ctx.phi.shape[0]
    for t in range(len(ctx.cell_vdofs)):
        dofs = ctx.cell_vdofs[t]
        ul = uv[dofs].reshape(6, 2)
        r = np.zeros((6, 2))
        for q in range(nq):
            U = ctx.phi[q] @ ul                       # (2,)
            G = ul.T @ ctx.gphi[t, q]                 # (2,2)
            alpha, beta = _alpha_beta(
                form, U[None, None], G[None, None], U[None, None], G[None, None]
            )
            a = alpha[0, 0]
            r += ctx.wdet[q, t] * np.outer(ctx.phi[q], a)
            if beta is not None:
                r += ctx.wdet[q, t] * ctx.gphi[t, q] @ beta[0, 0].T
        np.add.at(out, dofs, r.reshape(12))
    return out
