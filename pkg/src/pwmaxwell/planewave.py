"""Vector plane-wave basis on each element.

Each element carries 2p propagating plane waves

    E_l(x) = sqrt(mu) * F_l * exp(i kappa d_l . x),    l = 0 .. 2p-1,

where the p directions d_0 .. d_{p-1} are spread over the unit sphere
and each direction contributes the circular polarization pair

    F_l     = G_l + i G_l x d_l,
    F_{l+p} = G_l - i G_l x d_l,

with G_l a real unit vector orthogonal to d_l.  Both members of a pair
share the direction d_l.  Useful identities (exact in exact arithmetic):

    d_l . F_l = 0,   |F_l|^2 = 2,
    d_l x F_l = +i F_l          (first member),
    d_l x F_{l+p} = -i F_{l+p}  (second member),

so curl E_l = i kappa d_l x E_l = -/+ kappa E_l and every basis function
satisfies curl curl E - kappa^2 E = 0 elementwise.

The directions form a staggered equal-area grid: p = (q+1)^2 points with
cos(polar angle) at the q+1 midpoint levels 1 - 2(m+1/2)/(q+1) and q+1
azimuths per level, offset by half a step from one level to the next.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .material import MaterialField

__all__ = [
    "DirectionSet",
    "PWBasis",
    "direction_set",
    "polarization",
    "basis_for_element",
]

_AXES = np.eye(3)


@dataclass(frozen=True)
class DirectionSet:
    q: int
    p: int
    directions: np.ndarray  # (p, 3) unit vectors


@lru_cache(maxsize=None)
def direction_set(q: int) -> DirectionSet:
    """p = (q+1)^2 unit directions on a staggered equal-area grid."""
    if not isinstance(q, (int, np.integer)) or q < 1:
        raise ValueError(f"direction order q must be an integer >= 1, got {q!r}")
    q = int(q)
    levels = q + 1
    dirs = np.empty((levels * levels, 3))
    for m in range(levels):
        c = 1.0 - 2.0 * (m + 0.5) / levels
        s = np.sqrt(1.0 - c * c)
        for nn in range(levels):
            phi = 2.0 * np.pi * (nn + 0.5 * m) / levels
            dirs[m * levels + nn] = (s * np.cos(phi), s * np.sin(phi), c)
    dirs.flags.writeable = False
    return DirectionSet(q=q, p=levels * levels, directions=dirs)


def polarization(d: np.ndarray) -> np.ndarray:
    """Real unit vector orthogonal to d.

    Deterministic rule: project out the coordinate axis least aligned
    with d (ties broken toward the smaller axis index) by taking the
    normalized cross product d x e_a.
    """
    d = np.asarray(d, dtype=float)
    a = int(np.argmin(np.abs(d)))  # argmin returns the first minimizer
    g = np.cross(d, _AXES[a])
    nrm = np.linalg.norm(g)
    if nrm == 0.0:
        raise ValueError(f"degenerate direction {d.tolist()}")
    return g / nrm


@lru_cache(maxsize=None)
def _pair_data(q: int):
    """Directions (duplicated for the pair), F and d x F, shapes (2p, 3)."""
    ds = direction_set(q)
    d = ds.directions
    g = np.array([polarization(dk) for dk in d])
    gxd = np.cross(g, d)
    f_plus = g + 1j * gxd
    f_minus = g - 1j * gxd
    dirs2 = np.vstack([d, d])
    pol2 = np.vstack([f_plus, f_minus])
    dxf = np.cross(dirs2, pol2)
    for arr in (dirs2, pol2, dxf):
        arr.flags.writeable = False
    return dirs2, pol2, dxf


@dataclass(frozen=True)
class PWBasis:
    """The 2p plane waves of one element.

    ``directions`` holds each pair direction twice (rows l and l+p), so
    all arrays are indexed uniformly by the basis index l = 0 .. 2p-1.
    """

    element_index: int
    q: int
    kappa: complex
    omega: float
    mu: float
    directions: np.ndarray  # (2p, 3) real
    polarizations: np.ndarray  # (2p, 3) complex
    dir_cross_pol: np.ndarray  # (2p, 3) complex, d_l x F_l

    @property
    def n_functions(self) -> int:
        return self.directions.shape[0]

    def _phases(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.exp(1j * self.kappa * (pts @ self.directions.T))  # (m, 2p)

    def eval_all(self, points: np.ndarray) -> np.ndarray:
        """All basis fields at the given points, shape (m, 2p, 3)."""
        ph = self._phases(points)
        return np.sqrt(self.mu) * ph[:, :, None] * self.polarizations[None, :, :]

    def eval_curl_all(self, points: np.ndarray) -> np.ndarray:
        """curl of each basis field, shape (m, 2p, 3).

        curl E_l = i kappa d_l x E_l since the polarization is constant.
        """
        ph = self._phases(points)
        amp = 1j * self.kappa * np.sqrt(self.mu)
        return amp * ph[:, :, None] * self.dir_cross_pol[None, :, :]

    def eval_E(self, l: int, x: np.ndarray) -> np.ndarray:
        """Basis field l at point(s) x; (3,) for a single point."""
        self._check_index(l)
        single = np.asarray(x).ndim == 1
        out = self.eval_all(x)[:, l, :]
        return out[0] if single else out

    def eval_curl_E(self, l: int, x: np.ndarray) -> np.ndarray:
        self._check_index(l)
        single = np.asarray(x).ndim == 1
        out = self.eval_curl_all(x)[:, l, :]
        return out[0] if single else out

    def _check_index(self, l: int):
        if not 0 <= l < self.n_functions:
            raise IndexError(
                f"basis index {l} out of range [0, {self.n_functions})"
            )


def basis_for_element(
    k: int, q: int, omega: float, field: MaterialField
) -> PWBasis:
    """Plane-wave basis of element k with its local wavenumber."""
    dirs2, pol2, dxf = _pair_data(q)
    kappa = field.kappa_of(k, omega)
    return PWBasis(
        element_index=k,
        q=q,
        kappa=kappa,
        omega=float(omega),
        mu=field.mu,
        directions=dirs2,
        polarizations=pol2,
        dir_cross_pol=dxf,
    )
