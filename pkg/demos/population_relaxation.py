"""Slow population relaxation of a random three-level system.

For small sigma the coherences die at rates of order lambda^2 while the
populations drift to the uniform state on the much longer time scale set by
the smallest nonzero eigenvalue of T.

    python3 demos/population_relaxation.py
"""

import numpy as np

from resodyn import BathParams, CouplingParams, FormFactor, bath_functions
from resodyn.dynamics import PerturbativePropagator, manifold_distance
from resodyn.model import check_a4, random_density_matrix, random_system


def main():
    rng = np.random.default_rng(7)
    bf = bath_functions(FormFactor(), BathParams(1.0))
    spec = random_system(rng, 3)
    while not check_a4(spec, bf):
        spec = random_system(rng, 3)
    cp = CouplingParams(0.002, 0.1)
    prop = PerturbativePropagator.build(spec, bf, cp)
    rho0 = random_density_matrix(rng, 3)

    fast = min(prop.spectrum.value(a, b).imag for a in range(3) for b in range(3) if a != b)
    slow = 2 * cp.sigma ** 2 / cp.lam ** 2 * prop.tmat.xi[1]
    print(f"T spectrum {np.round(prop.tmat.xi, 6)}")
    print(f"slowest coherence rate {fast:.3e}, slowest population rate {slow:.3e}")
    print(f"{'t':>10} {'p0':>9} {'p1':>9} {'p2':>9} {'offdiag':>10}")
    for t in np.concatenate([[0.0], np.geomspace(1 / fast, 10 / slow, 10)]):
        rho = prop.evolve(rho0, t)
        p = rho.diagonal().real
        print(f"{t:10.3g} {p[0]:9.5f} {p[1]:9.5f} {p[2]:9.5f} {manifold_distance(rho):10.3e}")


if __name__ == "__main__":
    main()
