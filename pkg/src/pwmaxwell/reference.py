"""Reference fields, boundary data and error metrics.

Two analytic solutions of curl curl E - omega^2 mu eps E = 0 (mu = 1)
are built in:

* an electric dipole at a point x0 outside the domain,

      E(x) = -i omega I phi(x) a + (I / (i omega eps)) grad(grad phi . a),
      phi(x) = exp(i k r) / (4 pi r),   r = |x - x0|,   k = omega sqrt(eps),

  whose curl reduces to -i omega I grad(phi) x a because the gradient
  term is curl-free;

* a trigonometric field

      E(x) = (k x3 x1 cos(k x2), -x3 sin(k x2), -cos(k x1)),  k = omega sqrt(eps)

  (divergence-free with componentwise Laplacian -k^2 E, hence an exact
  solution).

Both expose closed-form curls, checked against finite differences.

The impedance boundary datum of a field is

    g = -E x n + (sigma / (i omega mu)) ((curl E) x n) x n,

which is tangential by construction.

Errors of a discrete field E_h (coefficients X over per-element bases):

* volume relative L2 error via tensor Gauss quadrature per element;
* vertex-based relative l2 error over all mesh vertices, evaluating
  E_h from the smallest-index element at vertices shared by several.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .assembly import _gauss_1d
from .mesh import Mesh

__all__ = [
    "ExactField",
    "DipoleParams",
    "dipole_field",
    "trig_field",
    "make_dipole_field",
    "make_trig_field",
    "impedance_trace_g",
    "relative_l2_error",
    "vertex_error",
    "check_curl_consistency",
    "maxwell_residual",
]


@dataclass(frozen=True)
class ExactField:
    """A reference electric field with its closed-form curl.

    ``eval`` and ``eval_curl`` map (m, 3) points to (m, 3) complex
    values (a single (3,) point is also accepted).
    """

    eval: Callable[[np.ndarray], np.ndarray]
    eval_curl: Callable[[np.ndarray], np.ndarray]
    kind: str  # "dipole" | "trig" | "custom"

    def __call__(self, points):
        return self.eval(points)


@dataclass(frozen=True)
class DipoleParams:
    x0: tuple = (0.6, 0.6, 0.6)
    a: tuple = (0.0, 0.0, 1.0)
    I: float = 1.0
    omega: float = 4.0 * np.pi
    epsilon: complex = 1.0 + 1.0j

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if abs(np.linalg.norm(a) - 1.0) > 1e-12:
            raise ValueError(f"dipole moment direction must be a unit vector, got {self.a}")
        if self.omega <= 0:
            raise ValueError("omega must be positive")


def dipole_field(x, params: DipoleParams):
    """E and curl E of the dipole at point(s) x.

    With u = (x - x0)/r the closed forms are

        grad phi            = phi' u,                phi' = phi (ik - 1/r)
        grad(grad phi . a)  = (phi'' - phi'/r)(u.a) u + (phi'/r) a,
                              phi'' = phi ((ik - 1/r)^2 + 1/r^2)
        curl E              = -i omega I phi' (u x a).
    """
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    single = np.asarray(x).ndim == 1
    x0 = np.asarray(params.x0, dtype=float)
    a = np.asarray(params.a, dtype=float)
    omega, I = params.omega, params.I
    k = complex(omega * np.sqrt(params.epsilon))

    dx = pts - x0
    r = np.linalg.norm(dx, axis=1)
    if np.any(r == 0.0):
        raise ValueError("dipole field evaluated at its source point")
    u = dx / r[:, None]
    phi = np.exp(1j * k * r) / (4.0 * np.pi * r)
    fac = 1j * k - 1.0 / r
    dphi = phi * fac
    d2phi = phi * (fac * fac + 1.0 / r**2)

    ua = u @ a
    grad_grad = (d2phi - dphi / r)[:, None] * ua[:, None] * u + (dphi / r)[:, None] * a
    E = -1j * omega * I * phi[:, None] * a + (I / (1j * omega * params.epsilon)) * grad_grad
    curlE = -1j * omega * I * dphi[:, None] * np.cross(u, a)
    if single:
        return E[0], curlE[0]
    return E, curlE


def trig_field(x, omega: float, epsilon: complex):
    """E and curl E of the trigonometric solution."""
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    single = np.asarray(x).ndim == 1
    k = complex(omega * np.sqrt(epsilon))
    x1, x2, x3 = pts[:, 0], pts[:, 1], pts[:, 2]
    E = np.stack(
        [k * x1 * x3 * np.cos(k * x2), -x3 * np.sin(k * x2), -np.cos(k * x1)],
        axis=1,
    )
    # Differentiated by hand:
    #   (curl E)_1 = dE3/dx2 - dE2/dx3 = 0 + sin(k x2)
    #   (curl E)_2 = dE1/dx3 - dE3/dx1 = k x1 cos(k x2) - k sin(k x1)
    #   (curl E)_3 = dE2/dx1 - dE1/dx2 = 0 + k^2 x1 x3 sin(k x2)
    curlE = np.stack(
        [
            np.sin(k * x2),
            k * x1 * np.cos(k * x2) - k * np.sin(k * x1),
            k * k * x1 * x3 * np.sin(k * x2),
        ],
        axis=1,
    )
    if single:
        return E[0], curlE[0]
    return E, curlE


def make_dipole_field(params: DipoleParams) -> ExactField:
    return ExactField(
        eval=lambda pts: dipole_field(pts, params)[0],
        eval_curl=lambda pts: dipole_field(pts, params)[1],
        kind="dipole",
    )


def make_trig_field(omega: float, epsilon: complex) -> ExactField:
    return ExactField(
        eval=lambda pts: trig_field(pts, omega, epsilon)[0],
        eval_curl=lambda pts: trig_field(pts, omega, epsilon)[1],
        kind="trig",
    )


def impedance_trace_g(exact: ExactField, x, n, omega: float, mu: float, sigma: float):
    """g = -E x n + (sigma/(i omega mu)) ((curl E) x n) x n; tangential."""
    n = np.asarray(n, dtype=float)
    E = exact.eval(x)
    C = exact.eval_curl(x)
    return -np.cross(E, n) + (sigma / (1j * omega * mu)) * np.cross(np.cross(C, n), n)


def _volume_rule(element, n1d):
    x, w = _gauss_1d(n1d)
    lo = element.bounds.min_corner
    hi = element.bounds.max_corner
    axes = [0.5 * (lo[a] + hi[a]) + 0.5 * (hi[a] - lo[a]) * x for a in range(3)]
    g = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([gi.ravel() for gi in g], axis=1)
    w3 = np.einsum("i,j,k->ijk", w, w, w).ravel()
    scale = np.prod(0.5 * (hi - lo))
    return pts, scale * w3


def relative_l2_error(mesh: Mesh, X, bases, exact: ExactField, n1d: int) -> float:
    """|| E_ex - E_h ||_L2 / || E_ex ||_L2 by per-element quadrature."""
    x = np.asarray(X, dtype=complex).ravel()
    nb = bases[0].n_functions
    num = 0.0
    den = 0.0
    for k, el in enumerate(mesh.elements):
        pts, w = _volume_rule(el, n1d)
        Eh = np.einsum("mlc,l->mc", bases[k].eval_all(pts), x[k * nb : (k + 1) * nb])
        Ex = exact.eval(pts)
        num += float(np.sum(w * np.sum(np.abs(Ex - Eh) ** 2, axis=1)))
        den += float(np.sum(w * np.sum(np.abs(Ex) ** 2, axis=1)))
    if den == 0.0:
        raise ValueError("reference field is zero on the domain; relative error undefined")
    return float(np.sqrt(num / den))


def vertex_error(mesh: Mesh, X, bases, exact: ExactField) -> float:
    """Relative l2 error over mesh vertices.

    Vertices shared by several elements take E_h from the element with
    the smallest index (grid coordinates clipped downward).
    """
    x = np.asarray(X, dtype=complex).ravel()
    nb = bases[0].n_functions
    n = mesh.n
    verts = mesh.vertices
    m = n + 1
    idx = np.arange(len(verts))
    gx, rem = np.divmod(idx, m * m)
    gy, gz = np.divmod(rem, m)
    cells = np.stack(
        [np.clip(gx - 1, 0, n - 1), np.clip(gy - 1, 0, n - 1), np.clip(gz - 1, 0, n - 1)],
        axis=1,
    )
    owners = (cells[:, 0] * n + cells[:, 1]) * n + cells[:, 2]
    Ex = exact.eval(verts)
    num = 0.0
    den = float(np.sum(np.abs(Ex) ** 2))
    if den == 0.0:
        raise ValueError("reference field vanishes at all vertices; relative error undefined")
    for k in np.unique(owners):
        sel = owners == k
        Eh = np.einsum(
            "mlc,l->mc", bases[k].eval_all(verts[sel]), x[k * nb : (k + 1) * nb]
        )
        num += float(np.sum(np.abs(Ex[sel] - Eh) ** 2))
    return float(np.sqrt(num / den))


def check_curl_consistency(exact: ExactField, points, step: float = 1e-5,
                           rtol: float = 1e-6) -> float:
    """Max relative deviation of eval_curl from centered differences of eval.

    Returns the worst relative error; raises if it exceeds rtol.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    curl_fd = _fd_curl(exact.eval, pts, step)
    curl_cf = np.atleast_2d(exact.eval_curl(pts))
    scale = np.maximum(np.linalg.norm(curl_cf, axis=1), 1e-12)
    rel = np.linalg.norm(curl_fd - curl_cf, axis=1) / scale
    worst = float(rel.max())
    if worst > rtol:
        raise ValueError(
            f"closed-form curl deviates from finite differences: "
            f"max relative error {worst:.3e} > {rtol:.1e}"
        )
    return worst


def _fd_curl(f, pts, step):
    """Centered-difference curl of a vector field at (m, 3) points."""
    partials = []
    for axis in range(3):
        e = np.zeros(3)
        e[axis] = step
        partials.append((np.atleast_2d(f(pts + e)) - np.atleast_2d(f(pts - e))) / (2 * step))
    d = partials  # d[j][:, i] = dE_i/dx_j
    return np.stack(
        [
            d[1][:, 2] - d[2][:, 1],
            d[2][:, 0] - d[0][:, 2],
            d[0][:, 1] - d[1][:, 0],
        ],
        axis=1,
    )


def maxwell_residual(exact: ExactField, points, omega: float, mu: float,
                     epsilon: complex, step: float = 1e-5) -> float:
    """Max relative residual of curl curl E - omega^2 mu eps E at points.

    The outer curl is finite-differenced on the closed-form inner curl.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    curlcurl = _fd_curl(exact.eval_curl, pts, step)
    E = np.atleast_2d(exact.eval(pts))
    k2 = omega**2 * mu * epsilon
    res = curlcurl - k2 * E
    scale = np.maximum(np.abs(k2) * np.linalg.norm(E, axis=1), 1e-12)
    return float((np.linalg.norm(res, axis=1) / scale).max())
