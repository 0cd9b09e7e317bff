"""Shared builders for the test suite.

Most tests want a small assembled system without repeating the mesh /
material / basis / quadrature boilerplate; build_problem bundles it.
"""

from __future__ import annotations

from types import SimpleNamespace

import numpy as np

from pwmaxwell.assembly import assemble_system, default_quadrature_order
from pwmaxwell.material import MaterialField, penalty_parameters
from pwmaxwell.mesh import Box, build_uniform_mesh
from pwmaxwell.planewave import basis_for_element
from pwmaxwell.reference import DipoleParams, impedance_trace_g, make_dipole_field

UNIT_BOX = Box((-0.5, -0.5, -0.5), (0.5, 0.5, 0.5))


def build_problem(n=2, q=2, epsilon=1 + 1j, omega=4 * np.pi, variant="new",
                  g=None, n1d=None, interface_form="separate", box=None,
                  epsilon_values=None, mu=1.0):
    """Assemble a small system; returns mesh/field/bases/weights/system."""
    box = box if box is not None else UNIT_BOX
    mesh = build_uniform_mesh(box, n)
    if epsilon_values is not None:
        field = MaterialField(mesh, epsilon_values, mu=mu)
    else:
        field = MaterialField.constant(mesh, epsilon, mu=mu)
    weights = penalty_parameters(field, variant)
    bases = [basis_for_element(k, q, omega, field) for k in range(mesh.n_elements)]
    if n1d is None:
        kmax = max(abs(field.kappa_of(k, omega)) for k in range(mesh.n_elements))
        n1d = default_quadrature_order(q, kmax, mesh.h)
    system = assemble_system(mesh, field, bases, weights, g, n1d,
                             interface_form=interface_form)
    return SimpleNamespace(mesh=mesh, field=field, weights=weights, bases=bases,
                           n1d=n1d, system=system, omega=omega)


def dipole_g(omega=4 * np.pi, epsilon=1 + 1j, mu=1.0):
    """Boundary datum of the default dipole; returns (g, exact_field)."""
    params = DipoleParams(omega=omega, epsilon=epsilon)
    exact = make_dipole_field(params)
    sigma = float(np.sqrt(mu / abs(epsilon)))

    def g(pts, n):
        return impedance_trace_g(exact, pts, n, omega, mu, sigma)

    return g, exact


def random_layered_epsilon(rng, n_elements, lo=0.5, hi=3.0):
    """Random per-element permittivity with positive real and imag parts."""
    return rng.uniform(lo, hi, n_elements) + 1j * rng.uniform(lo, hi, n_elements)
