"""Piecewise-constant material data and least-squares penalty weights.

The permeability mu is a single positive constant for the whole domain.
The permittivity eps is complex and constant per element; layered media
are described by boxes that assign a value to every element whose center
they contain.  Each element k then carries

    kappa_k = omega * sqrt(mu * eps_k)      (principal square root)
    sigma_k = sqrt(mu / |eps_k|)

and the penalty weights of the least-squares functional are built from
the extremes of |eps| over the mesh:

    delta = alpha = |eps|_max^4 / |eps|_min^4
    beta          = |eps|_max^4 / |eps|_min^5
    theta         = |eps|_max^2 / |eps|_min^4   (0 for the "old" variant)

For constant eps these reduce to delta = alpha = 1, beta = 1/|eps|,
theta = 1/|eps|^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh

__all__ = ["MaterialField", "PenaltyWeights", "penalty_parameters"]

VARIANTS = ("new", "old")


@dataclass(frozen=True)
class PenaltyWeights:
    delta: float
    alpha: float
    beta: float
    theta: float


class MaterialField:
    """Per-element permittivity plus a global permeability.

    Attributes
    ----------
    mu : float
        Global permeability, > 0.
    epsilon : ndarray of complex
        One value per element, |eps| > 0.
    """

    def __init__(self, mesh: Mesh, epsilon_values, mu: float = 1.0):
        if mu <= 0:
            raise ValueError(f"mu must be positive, got {mu}")
        eps = np.asarray(epsilon_values, dtype=complex).copy()
        if eps.shape != (mesh.n_elements,):
            raise ValueError(
                f"need one epsilon per element: expected shape "
                f"({mesh.n_elements},), got {eps.shape}"
            )
        bad = np.nonzero(np.abs(eps) == 0.0)[0]
        if bad.size:
            raise ValueError(f"zero permittivity on element {bad[0]}")
        eps.flags.writeable = False
        self.mu = float(mu)
        self.epsilon = eps
        self.n_elements = mesh.n_elements

    @classmethod
    def constant(cls, mesh: Mesh, epsilon, mu: float = 1.0) -> "MaterialField":
        return cls(mesh, np.full(mesh.n_elements, complex(epsilon)), mu=mu)

    @classmethod
    def from_regions(cls, mesh: Mesh, regions, mu: float = 1.0) -> "MaterialField":
        """Assign per-element values from (Box, epsilon) pairs.

        The first region containing an element's center wins.  Every
        element center must be covered; an uncovered element is an
        error (it would silently get an undefined material otherwise).
        """
        eps = np.zeros(mesh.n_elements, dtype=complex)
        covered = np.zeros(mesh.n_elements, dtype=bool)
        centers = np.array([e.center for e in mesh.elements])
        for box, value in regions:
            mask = box.contains(centers) & ~covered
            eps[mask] = complex(value)
            covered |= mask
        if not covered.all():
            k = int(np.nonzero(~covered)[0][0])
            c = centers[k]
            raise ValueError(
                f"element {k} (center {c.tolist()}) is not covered by any "
                f"permittivity region"
            )
        return cls(mesh, eps, mu=mu)

    def _check(self, k: int):
        if not 0 <= k < self.n_elements:
            raise IndexError(f"element index {k} out of range [0, {self.n_elements})")

    def epsilon_of(self, k: int) -> complex:
        self._check(k)
        return complex(self.epsilon[k])

    def kappa_of(self, k: int, omega: float) -> complex:
        """Element wavenumber omega * sqrt(mu * eps_k), principal branch."""
        self._check(k)
        if omega <= 0:
            raise ValueError(f"omega must be positive, got {omega}")
        return complex(omega * np.sqrt(self.mu * self.epsilon[k]))

    def sigma_of(self, k: int) -> float:
        self._check(k)
        return float(np.sqrt(self.mu / np.abs(self.epsilon[k])))

    @property
    def eps_abs_max(self) -> float:
        return float(np.max(np.abs(self.epsilon)))

    @property
    def eps_abs_min(self) -> float:
        return float(np.min(np.abs(self.epsilon)))

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.epsilon == self.epsilon[0]))


def penalty_parameters(field: MaterialField, variant: str = "new") -> PenaltyWeights:
    """Penalty weights for the least-squares functional.

    variant "new" includes the normal-jump weight theta; "old" sets
    theta = 0 and keeps the other weights unchanged.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}, expected one of {VARIANTS}")
    big = field.eps_abs_max
    small = field.eps_abs_min
    delta = big**4 / small**4
    beta = big**4 / small**5
    theta = big**2 / small**4 if variant == "new" else 0.0
    return PenaltyWeights(delta=delta, alpha=delta, beta=beta, theta=theta)
