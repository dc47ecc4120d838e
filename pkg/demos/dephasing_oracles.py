"""Pure dephasing checked against brute-force baths.

At sigma = 0 the reduced dynamics is exact.  The first table compares the
continuum result with a 2000-mode discrete bath.  The second compares a
single-mode bath with a truncated Fock-space propagation.

    python3 demos/dephasing_oracles.py
"""

import numpy as np

from resodyn import BathParams, CouplingParams, FormFactor, bath_functions
from resodyn.dynamics import dephasing_exact
from resodyn.model import spin_boson_spec
from resodyn.oracle import (DiscreteBath, TruncatedSystem, discrete_dephasing, trace_distance,
                            truncated_trajectory)


def main():
    beta, lam = 1.0, 0.5
    spec = spin_boson_spec()
    rho0 = np.array([[0.6, 0.3 - 0.1j], [0.3 + 0.1j, 0.4]])
    bf = bath_functions(FormFactor(), BathParams(beta))
    disc = DiscreteBath.from_form_factor(FormFactor(), beta, 2000)

    print("continuum vs 2000-mode bath")
    print(f"{'t':>6} {'Gamma(t)':>14} {'|rho_01| exact':>16} {'trace dist':>11}")
    for t in (0.5, 1.0, 2.0, 5.0, 10.0):
        exact = dephasing_exact(spec, bf, CouplingParams(0.0, lam), rho0, t).rho
        approx = discrete_dephasing(disc, spec, lam, rho0, t).rho
        print(f"{t:6.2f} {bf.gamma(t):14.8f} {abs(exact[0, 1]):16.10f} {trace_distance(exact, approx):11.2e}")

    one = DiscreteBath([1.0], [0.8], beta)
    times = np.linspace(0.0, 4 * np.pi, 9)
    traj = truncated_trajectory(TruncatedSystem(spec, one, 0.0, lam, 30), rho0, beta, times)
    print()
    print("single mode: closed form vs truncated Fock space (30 quanta)")
    print(f"{'t':>6} {'|rho_01|':>12} {'trace dist':>11}")
    for st, t in zip(traj.states, times):
        ref = discrete_dephasing(one, spec, lam, rho0, t).rho
        # the coherence recovers at every period 2 pi of the mode
        print(f"{t:6.3f} {abs(ref[0, 1]):12.8f} {trace_distance(st, ref):11.2e}")
    print(f"energy drift {np.ptp(traj.energies):.1e}, trace drift {np.max(np.abs(traj.traces - 1)):.1e}")


if __name__ == "__main__":
    main()
