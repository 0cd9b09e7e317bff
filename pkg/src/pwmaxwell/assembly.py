"""Assembly of the Hermitian least-squares system.

The discrete field minimizes a weighted sum of squared face residuals:
on each boundary face the impedance mismatch -F x n + Phi(F) x n - g
(weight delta), and on each interior face the three jumps

    [[F x n]]        (weight alpha)
    [[Psi(F) x n]]   (weight beta)
    [[eps F . n]]    (weight theta)

with Phi(F) = sigma/(i omega mu) (curl F) x n, Psi(F) = (1/(i omega mu))
curl F, and jumps summing the traces from both sides with opposite
outward normals.  Expanding the squares gives a sesquilinear form whose
matrix is Hermitian positive semidefinite by construction; it is stored
in block form (diagonal blocks plus one block per interior face).

Every face integral uses the same mechanism: build the residual row
matrix B whose rows are sqrt(weight * quad_weight) times the residual
traces of each basis function, then accumulate B^H B (and B^H g on the
boundary).  The (j, l) block of an interior face is never stored; it is
the conjugate transpose of the (l, j) block.

For constant eps the alpha and theta terms can be merged into a single
full-vector jump [[F]] because |v x n|^2 + |v . n|^2 = |v|^2; assembly
with ``interface_form="combined"`` uses that version (it requires
theta * |eps|^2 == alpha, which the default weights satisfy).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .material import MaterialField, PenaltyWeights
from .mesh import Face, Mesh

__all__ = [
    "QuadRule",
    "HermitianBlockSystem",
    "face_quadrature",
    "trace_quantities",
    "assemble_system",
    "functional_J",
    "default_quadrature_order",
]


@lru_cache(maxsize=None)
def _gauss_1d(n1d: int):
    x, w = np.polynomial.legendre.leggauss(n1d)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


@dataclass(frozen=True)
class QuadRule:
    """Tensor Gauss-Legendre rule on a rectangular face."""

    n1d: int
    points: np.ndarray  # (n1d^2, 3)
    weights: np.ndarray  # (n1d^2,), scaled so they sum to the face area


def face_quadrature(face: Face, n1d: int) -> QuadRule:
    if n1d < 1:
        raise ValueError(f"quadrature order must be >= 1, got {n1d}")
    x, w = _gauss_1d(n1d)
    t1, t2 = [a for a in range(3) if a != face.axis]
    lo, hi = face.lo, face.hi
    # Affine map of the [-1,1]^2 rule; weight scale (len1/2)*(len2/2).
    c1 = 0.5 * (lo[t1] + hi[t1]) + 0.5 * (hi[t1] - lo[t1]) * x
    c2 = 0.5 * (lo[t2] + hi[t2]) + 0.5 * (hi[t2] - lo[t2]) * x
    pts = np.empty((n1d * n1d, 3))
    pts[:, face.axis] = lo[face.axis]
    g1, g2 = np.meshgrid(c1, c2, indexing="ij")
    pts[:, t1] = g1.ravel()
    pts[:, t2] = g2.ravel()
    scale = 0.25 * (hi[t1] - lo[t1]) * (hi[t2] - lo[t2])
    weights = scale * np.outer(w, w).ravel()
    return QuadRule(n1d=n1d, points=pts, weights=weights)


def default_quadrature_order(q: int, kappa_max_abs: float, h: float) -> int:
    """Points per direction for face quadrature.

    Grows with the basis order and with kappa*h (oscillation across one
    face), capped at 32.
    """
    if q < 1 or kappa_max_abs <= 0 or h <= 0:
        raise ValueError("default_quadrature_order needs positive inputs")
    return min(32, max(q + 2, math.ceil(kappa_max_abs * h / 2.0) + 3))


def trace_quantities(E, curlE, n, omega, mu, sigma, eps):
    """The four face traces of a field: E x n, Psi x n, Phi x n, eps (E.n).

    Broadcasts over leading axes of E/curlE; n is the (3,) face normal
    of the side being traced.
    """
    E = np.asarray(E)
    curlE = np.asarray(curlE)
    n = np.asarray(n, dtype=float)
    iomu = 1j * omega * mu
    e_x_n = np.cross(E, n)
    psi_x_n = np.cross(curlE, n) / iomu
    phi_x_n = sigma * np.cross(psi_x_n, n)
    eps_e_dot_n = eps * (E @ n)
    return e_x_n, psi_x_n, phi_x_n, eps_e_dot_n


class HermitianBlockSystem:
    """Block-sparse Hermitian system A X = b.

    diag[k] is the 2p x 2p block coupling element k with itself;
    face_blocks[f] is the (l, j) block of interior face f with
    l = face_pairs[f, 0] < j = face_pairs[f, 1].  The (j, l) block is
    implied by conjugate transposition and never stored.
    """

    def __init__(self, n_elements, block_size, diag, face_pairs, face_blocks, rhs,
                 g_energy=0.0, n1d=None):
        self.n_elements = int(n_elements)
        self.block_size = int(block_size)
        self.diag = diag
        self.face_pairs = face_pairs
        self.face_blocks = face_blocks
        self.rhs = rhs
        self.g_energy = float(g_energy)
        self.n1d = n1d
        self._sparse = None

    @property
    def dim(self) -> int:
        return self.n_elements * self.block_size

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """A @ x without materializing a sparse matrix."""
        bs = self.block_size
        X = np.asarray(x, dtype=complex).reshape(self.n_elements, bs)
        out = np.matmul(self.diag, X[:, :, None])[:, :, 0]
        if len(self.face_pairs):
            l = self.face_pairs[:, 0]
            j = self.face_pairs[:, 1]
            up = np.matmul(self.face_blocks, X[j][:, :, None])[:, :, 0]
            down = np.matmul(
                self.face_blocks.conj().transpose(0, 2, 1), X[l][:, :, None]
            )[:, :, 0]
            np.add.at(out, l, up)
            np.add.at(out, j, down)
        return out.ravel()

    def quadratic_form(self, x: np.ndarray) -> complex:
        x = np.asarray(x, dtype=complex).ravel()
        return complex(np.vdot(x, self.matvec(x)))

    def frobenius_norm(self) -> float:
        s = float(np.sum(np.abs(self.diag) ** 2))
        s += 2.0 * float(np.sum(np.abs(self.face_blocks) ** 2))
        return math.sqrt(s)

    def to_sparse(self):
        """CSR matrix with both triangles populated."""
        if self._sparse is not None:
            return self._sparse
        import scipy.sparse as sp

        bs = self.block_size
        nf = len(self.face_pairs)
        nblocks = self.n_elements + 2 * nf
        data = np.empty((nblocks, bs, bs), dtype=complex)
        rows = np.empty(nblocks, dtype=np.int64)
        cols = np.empty(nblocks, dtype=np.int64)
        data[: self.n_elements] = self.diag
        rows[: self.n_elements] = np.arange(self.n_elements)
        cols[: self.n_elements] = np.arange(self.n_elements)
        if nf:
            l = self.face_pairs[:, 0]
            j = self.face_pairs[:, 1]
            data[self.n_elements : self.n_elements + nf] = self.face_blocks
            rows[self.n_elements : self.n_elements + nf] = l
            cols[self.n_elements : self.n_elements + nf] = j
            data[self.n_elements + nf :] = self.face_blocks.conj().transpose(0, 2, 1)
            rows[self.n_elements + nf :] = j
            cols[self.n_elements + nf :] = l
        # BSR wants blocks grouped by block-row.
        order = np.argsort(rows, kind="stable")
        counts = np.bincount(rows, minlength=self.n_elements)
        indptr = np.zeros(self.n_elements + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        mat = sp.bsr_matrix(
            (data[order], cols[order], indptr), shape=(self.dim, self.dim)
        ).tocsr()
        self._sparse = mat
        return mat


def _interface_side_rows(E, C, n, eps, weights, quad_w, iomu, form):
    """Residual rows of one side of an interior face.

    E, C: (m, nb, 3) basis traces; returns (rows, nb).  Row scaling
    sqrt(weight * quad_weight) makes B^H B the weighted face integral.
    """
    m, nb = E.shape[:2]
    parts = []
    if form == "separate":
        sa = np.sqrt(weights.alpha * quad_w)
        parts.append(sa[:, None, None] * np.cross(E, n))
        sb = np.sqrt(weights.beta * quad_w)
        parts.append(sb[:, None, None] * (np.cross(C, n) / iomu))
        if weights.theta > 0.0:
            st = np.sqrt(weights.theta * quad_w)
            parts.append(st[:, None] * (eps * (E @ n)))
    else:  # combined full-vector jump; the sign lives in the caller's E
        sa = np.sqrt(weights.alpha * quad_w)
        parts.append(sa[:, None, None] * E)
        sb = np.sqrt(weights.beta * quad_w)
        parts.append(sb[:, None, None] * (np.cross(C, n) / iomu))
    rows = []
    for t in parts:
        if t.ndim == 3:
            rows.append(t.transpose(0, 2, 1).reshape(-1, nb))
        else:
            rows.append(t)
    return np.vstack(rows)


def _boundary_rows(E, C, n, sigma, delta, quad_w, iomu):
    """Impedance residual rows -E x n + Phi(E) x n, scaled by sqrt(delta w)."""
    exn = np.cross(E, n)
    phixn = sigma * np.cross(np.cross(C, n) / iomu, n)
    res = -exn + phixn
    sd = np.sqrt(delta * quad_w)
    m, nb = E.shape[:2]
    return (sd[:, None, None] * res).transpose(0, 2, 1).reshape(-1, nb)


def _check_bases(mesh: Mesh, bases) -> int:
    if len(bases) != mesh.n_elements:
        raise ValueError(
            f"need one basis per element: got {len(bases)} for "
            f"{mesh.n_elements} elements"
        )
    nb = bases[0].n_functions
    for k, b in enumerate(bases):
        if b.n_functions != nb:
            raise ValueError(
                f"inconsistent basis count: element {k} has {b.n_functions}, "
                f"element 0 has {nb}"
            )
    return nb


def _combined_form_guard(field: MaterialField, weights: PenaltyWeights):
    if not field.is_constant:
        raise ValueError("combined interface form requires constant epsilon")
    a = abs(field.epsilon[0])
    if abs(weights.theta * a * a - weights.alpha) > 1e-12 * max(weights.alpha, 1.0):
        raise ValueError(
            "combined interface form requires theta*|eps|^2 == alpha "
            f"(got theta*|eps|^2 = {weights.theta * a * a}, alpha = {weights.alpha})"
        )


def assemble_system(
    mesh: Mesh,
    field: MaterialField,
    bases,
    weights: PenaltyWeights,
    g,
    n1d: int,
    interface_form: str = "separate",
) -> HermitianBlockSystem:
    """Assemble A and b from the face residuals.

    g is the boundary datum: a callable g(points, normal) -> (m, 3)
    complex, or None for zero data.  interface_form "separate" penalizes
    the three jumps individually; "combined" merges the tangential and
    normal jumps into one full-vector jump (constant eps only).
    """
    if interface_form not in ("separate", "combined"):
        raise ValueError(f"unknown interface form {interface_form!r}")
    if interface_form == "combined":
        _combined_form_guard(field, weights)
    nb = _check_bases(mesh, bases)
    N = mesh.n_elements

    diag = np.zeros((N, nb, nb), dtype=complex)
    n_int = len(mesh.interior_faces)
    face_pairs = np.empty((n_int, 2), dtype=np.int64)
    face_blocks = np.zeros((n_int, nb, nb), dtype=complex)
    rhs = np.zeros(N * nb, dtype=complex)
    g_energy = 0.0

    for fi, face in enumerate(mesh.interior_faces):
        l, j = face.owner, face.neighbor
        face_pairs[fi] = (l, j)
        qr = face_quadrature(face, n1d)
        n = face.normal
        bl, bj = bases[l], bases[j]
        El = bl.eval_all(qr.points)
        Cl = bl.eval_curl_all(qr.points)
        Ej = bj.eval_all(qr.points)
        Cj = bj.eval_curl_all(qr.points)
        iomul = 1j * bl.omega * bl.mu
        iomuj = 1j * bj.omega * bj.mu
        if interface_form == "combined":
            # Full jump F_l - F_j: fold the minus sign into side j.
            Bl = _interface_side_rows(El, Cl, n, None, weights, qr.weights,
                                      iomul, "combined")
            Bj = _interface_side_rows(-Ej, Cj, -n, None, weights, qr.weights,
                                      iomuj, "combined")
        else:
            Bl = _interface_side_rows(El, Cl, n, field.epsilon[l], weights,
                                      qr.weights, iomul, "separate")
            Bj = _interface_side_rows(Ej, Cj, -n, field.epsilon[j], weights,
                                      qr.weights, iomuj, "separate")
        diag[l] += Bl.conj().T @ Bl
        diag[j] += Bj.conj().T @ Bj
        face_blocks[fi] += Bl.conj().T @ Bj

    for face in mesh.boundary_faces:
        k = face.owner
        qr = face_quadrature(face, n1d)
        n = face.normal
        bk = bases[k]
        E = bk.eval_all(qr.points)
        C = bk.eval_curl_all(qr.points)
        iomu = 1j * bk.omega * bk.mu
        B = _boundary_rows(E, C, n, field.sigma_of(k), weights.delta,
                           qr.weights, iomu)
        diag[k] += B.conj().T @ B
        if g is not None:
            gv = np.asarray(g(qr.points, n), dtype=complex)
            g_energy += float(weights.delta * np.sum(qr.weights * np.sum(np.abs(gv) ** 2, axis=1)))
            ghat = (np.sqrt(weights.delta * qr.weights)[:, None] * gv).ravel()
            rhs[k * nb : (k + 1) * nb] += B.conj().T @ ghat

    # Exact structural Hermitian-ness of the diagonal blocks: averaging
    # D and D^H is bitwise symmetric under conjugate transposition.
    diag += diag.conj().transpose(0, 2, 1)
    diag *= 0.5

    return HermitianBlockSystem(
        n_elements=N,
        block_size=nb,
        diag=diag,
        face_pairs=face_pairs,
        face_blocks=face_blocks,
        rhs=rhs,
        g_energy=g_energy,
        n1d=n1d,
    )


def functional_J(
    coeffs: np.ndarray,
    mesh: Mesh,
    field: MaterialField,
    bases,
    weights: PenaltyWeights,
    g,
    n1d: int,
) -> float:
    """The least-squares functional evaluated by direct face quadrature.

    Independent of the assembled matrix; satisfies
    J(x) = x^H A x - 2 Re(b^H x) + delta * sum of boundary |g|^2.
    """
    nb = _check_bases(mesh, bases)
    x = np.asarray(coeffs, dtype=complex).ravel()
    if x.size != mesh.n_elements * nb:
        raise ValueError(
            f"coefficient vector has length {x.size}, expected "
            f"{mesh.n_elements * nb}"
        )
    X = x.reshape(mesh.n_elements, nb)
    total = 0.0

    def _field_on(face_pts, k):
        E = np.einsum("mlc,l->mc", bases[k].eval_all(face_pts), X[k])
        C = np.einsum("mlc,l->mc", bases[k].eval_curl_all(face_pts), X[k])
        return E, C

    for face in mesh.interior_faces:
        l, j = face.owner, face.neighbor
        qr = face_quadrature(face, n1d)
        n = face.normal
        El, Cl = _field_on(qr.points, l)
        Ej, Cj = _field_on(qr.points, j)
        iomul = 1j * bases[l].omega * bases[l].mu
        iomuj = 1j * bases[j].omega * bases[j].mu
        jump_t = np.cross(El, n) + np.cross(Ej, -n)
        jump_psi = np.cross(Cl, n) / iomul + np.cross(Cj, -n) / iomuj
        jump_n = field.epsilon[l] * (El @ n) + field.epsilon[j] * (Ej @ -n)
        total += weights.alpha * float(np.sum(qr.weights * np.sum(np.abs(jump_t) ** 2, axis=1)))
        total += weights.beta * float(np.sum(qr.weights * np.sum(np.abs(jump_psi) ** 2, axis=1)))
        total += weights.theta * float(np.sum(qr.weights * np.abs(jump_n) ** 2))

    for face in mesh.boundary_faces:
        k = face.owner
        qr = face_quadrature(face, n1d)
        n = face.normal
        E, C = _field_on(qr.points, k)
        iomu = 1j * bases[k].omega * bases[k].mu
        res = -np.cross(E, n) + field.sigma_of(k) * np.cross(np.cross(C, n) / iomu, n)
        if g is not None:
            res = res - np.asarray(g(qr.points, n), dtype=complex)
        total += weights.delta * float(np.sum(qr.weights * np.sum(np.abs(res) ** 2, axis=1)))

    return total
