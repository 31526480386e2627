# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pCN inner loop.

Runs a block of accept/reject steps over pre-drawn physical-space proposal
noise and uniforms, so that all randomness is produced by the caller's
generator in a backend-independent order.  Mirrors _pcn_python exactly.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, pow

cnp.import_array()


def run_pcn_block(double complex[::1] u,
                  double complex[:, ::1] noise,
                  double[::1] uniforms,
                  double contraction,
                  double step_size,
                  double dx,
                  double pot_coeff,
                  double p_exp,
                  double mass_cutoff,
                  double phi0,
                  double mass0,
                  cnp.uint8_t[::1] snap_mask,
                  double complex[:, ::1] snap_values,
                  double[::1] snap_phi,
                  double[::1] snap_mass):
    cdef Py_ssize_t big_k = noise.shape[0]
    cdef Py_ssize_t n = noise.shape[1]
    cdef Py_ssize_t t, j
    cdef int accepts = 0
    cdef Py_ssize_t n_snaps = 0
    cdef double phi = phi0
    cdef double mass = mass0
    cdef double mass_w, pw, phi_w, dphi, wr, wi, a2
    cdef double half_p = p_exp / 2.0
    cdef bint quartic = p_exp == 4.0
    cdef bint accept
    cdef double complex[::1] w = np.empty(n, dtype=np.complex128)

    with nogil:
        for t in range(big_k):
            mass_w = 0.0
            pw = 0.0
            for j in range(n):
                w[j] = contraction * u[j] + step_size * noise[t, j]
                wr = w[j].real
                wi = w[j].imag
                a2 = wr * wr + wi * wi
                mass_w += a2
                if quartic:
                    pw += a2 * a2
                else:
                    pw += pow(a2, half_p)
            mass_w *= dx
            pw *= dx
            phi_w = pot_coeff * pw
            dphi = phi_w - phi
            accept = mass_w <= mass_cutoff and (dphi >= 0.0 or uniforms[t] < exp(dphi))
            if accept:
                for j in range(n):
                    u[j] = w[j]
                phi = phi_w
                mass = mass_w
                accepts += 1
            if snap_mask[t]:
                for j in range(n):
                    snap_values[n_snaps, j] = u[j]
                snap_phi[n_snaps] = phi
                snap_mass[n_snaps] = mass
                n_snaps += 1

    return accepts, phi, mass, int(n_snaps)
