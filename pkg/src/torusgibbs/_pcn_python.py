"""Pure-numpy pCN inner loop: the import-time fallback for the compiled core.

Must mirror torusgibbs._pcn_core.run_pcn_block step for step; both consume
pre-drawn noise/uniform blocks so the random stream is backend independent.
"""

import math

import numpy as np


def run_pcn_block(u, noise, uniforms, contraction, step_size, dx, pot_coeff,
                  p_exp, mass_cutoff, phi0, mass0, snap_mask, snap_values,
                  snap_phi, snap_mass):
    phi = phi0
    mass = mass0
    accepts = 0
    n_snaps = 0
    quartic = p_exp == 4.0
    half_p = p_exp / 2.0
    for t in range(noise.shape[0]):
        w = contraction * u + step_size * noise[t]
        a2 = w.real**2 + w.imag**2
        mass_w = dx * float(a2.sum())
        pw = dx * float((a2 * a2).sum() if quartic else (a2**half_p).sum())
        phi_w = pot_coeff * pw
        dphi = phi_w - phi
        if mass_w <= mass_cutoff and (dphi >= 0.0 or uniforms[t] < math.exp(dphi)):
            u[:] = w
            phi = phi_w
            mass = mass_w
            accepts += 1
        if snap_mask[t]:
            snap_values[n_snaps] = u
            snap_phi[n_snaps] = phi
            snap_mass[n_snaps] = mass
            n_snaps += 1
    return accepts, phi, mass, n_snaps
