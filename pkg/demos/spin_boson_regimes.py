"""Spin-boson resonances across the overlapping/isolated transition.

Sweeps gamma = sigma / lambda^2 through gamma_star and prints the motion of
w3 and w4 together with the decoherence rate and its two limiting laws.

    python3 demos/spin_boson_regimes.py
"""

import math

import numpy as np

from resodyn import BathParams, CouplingParams, FormFactor, bath_functions
from resodyn.spin_boson import decoherence_rate, gamma_star, sweep_row, w_eigenpairs

LAM = 0.1


def main():
    xi0 = bath_functions(FormFactor(), BathParams(1.0)).xi0
    gs = gamma_star(xi0)
    print(f"xi0 = {xi0:.6f}   gamma_star = {gs:.6f}   lambda = {LAM}")
    print(f"{'gamma/g*':>9} {'regime':>12} {'w3':>24} {'w4':>24} {'rate':>11}")
    for ratio in np.geomspace(0.01, 100, 17):
        row = sweep_row(ratio * gs, LAM, xi0)
        w3 = complex(row["re_w3"], row["im_w3"])
        w4 = complex(row["re_w4"], row["im_w4"])
        rate = w4.imag if row["regime"] == "overlapping" else w3.imag
        print(f"{ratio:9.3g} {row['regime']:>12} {w3:24.6g} {w4:24.6g} {rate:11.4e}")

    # below gamma_star w3, w4 move along the imaginary axis towards each other;
    # above it they share one imaginary part and separate horizontally
    small = CouplingParams(0.01 * gs * LAM ** 2, LAM)
    large = CouplingParams(100 * gs * LAM ** 2, LAM)
    r_small = decoherence_rate(w_eigenpairs(small, xi0))
    r_large = decoherence_rate(w_eigenpairs(large, xi0))
    print()
    print(f"small gamma: rate = {r_small:.6e}, 2/(pi xi0) sigma^2/lambda^2 = "
          f"{2 / (math.pi * xi0) * small.sigma ** 2 / LAM ** 2:.6e}")
    print(f"large gamma: rate = {r_large:.6e}, (pi xi0/4) lambda^2 = {math.pi * xi0 / 4 * LAM ** 2:.6e}")


if __name__ == "__main__":
    main()
