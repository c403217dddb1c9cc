"""Numba update kernels for the leapfrog scheme and the CPML corrections.

Every kernel writes each cell exactly once from values it does not write,
so prange parallelism is race-free and results are bit-identical for any
thread count.  Reductions (energy sums) run serially in a fixed order for
the same reason.

Index conventions follow grid.py.  Tangential E on the outer box stays at
its initial zero (a PEC shell) because the loops cover interior nodes only.
Scalar arguments must already be cast to the field dtype so float32 runs
stay in float32.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

_OPTS = dict(parallel=True, cache=True)


# ---------------------------------------------------------------- H updates

@njit(**_OPTS)
def update_hx(hx, ey, ez, dt_mu, inv_dy, inv_dz, iky_h, ikz_h):
    nxp1, ny, nz = hx.shape
    for i in prange(nxp1):
        for j in range(ny):
            for k in range(nz):
                hx[i, j, k] += dt_mu * (
                    (ey[i, j, k + 1] - ey[i, j, k]) * inv_dz * ikz_h[k]
                    - (ez[i, j + 1, k] - ez[i, j, k]) * inv_dy * iky_h[j])


@njit(**_OPTS)
def update_hy(hy, ez, ex, dt_mu, inv_dz, inv_dx, ikz_h, ikx_h):
    nx, nyp1, nz = hy.shape
    for i in prange(nx):
        for j in range(nyp1):
            for k in range(nz):
                hy[i, j, k] += dt_mu * (
                    (ez[i + 1, j, k] - ez[i, j, k]) * inv_dx * ikx_h[i]
                    - (ex[i, j, k + 1] - ex[i, j, k]) * inv_dz * ikz_h[k])


@njit(**_OPTS)
def update_hz(hz, ex, ey, dt_mu, inv_dx, inv_dy, ikx_h, iky_h):
    nx, ny, nzp1 = hz.shape
    for i in prange(nx):
        for j in range(ny):
            for k in range(nzp1):
                hz[i, j, k] += dt_mu * (
                    (ex[i, j + 1, k] - ex[i, j, k]) * inv_dy * iky_h[j]
                    - (ey[i + 1, j, k] - ey[i, j, k]) * inv_dx * ikx_h[i])


# ---------------------------------------------------------------- E updates

@njit(**_OPTS)
def update_ex(ex, hy, hz, ca, cb, inv_dy, inv_dz, iky_e, ikz_e):
    nx, nyp1, nzp1 = ex.shape
    for i in prange(nx):
        for j in range(1, nyp1 - 1):
            for k in range(1, nzp1 - 1):
                ex[i, j, k] = ca[i, j, k] * ex[i, j, k] + cb[i, j, k] * (
                    (hz[i, j, k] - hz[i, j - 1, k]) * inv_dy * iky_e[j]
                    - (hy[i, j, k] - hy[i, j, k - 1]) * inv_dz * ikz_e[k])


@njit(**_OPTS)
def update_ey(ey, hz, hx, ca, cb, inv_dz, inv_dx, ikz_e, ikx_e):
    nxp1, ny, nzp1 = ey.shape
    for i in prange(1, nxp1 - 1):
        for j in range(ny):
            for k in range(1, nzp1 - 1):
                ey[i, j, k] = ca[i, j, k] * ey[i, j, k] + cb[i, j, k] * (
                    (hx[i, j, k] - hx[i, j, k - 1]) * inv_dz * ikz_e[k]
                    - (hz[i, j, k] - hz[i - 1, j, k]) * inv_dx * ikx_e[i])


@njit(**_OPTS)
def update_ez(ez, hx, hy, ca, cb, inv_dx, inv_dy, ikx_e, iky_e):
    nxp1, nyp1, nz = ez.shape
    for i in prange(1, nxp1 - 1):
        for j in range(1, nyp1 - 1):
            for k in range(nz):
                ez[i, j, k] = ca[i, j, k] * ez[i, j, k] + cb[i, j, k] * (
                    (hy[i, j, k] - hy[i - 1, j, k]) * inv_dx * ikx_e[i]
                    - (hx[i, j, k] - hx[i, j - 1, k]) * inv_dy * iky_e[j])


# --------------------------------------------------- CPML slab corrections
# psi arrays hold the low slab in [0, t) and the high slab in [t, 2t) along
# the stretched axis; b/a profiles are indexed by the global node index.

@njit(**_OPTS)
def cpml_ex_y(ex, hz, cb, psi, b, a, inv_dy, t):
    nx, nyp1, nzp1 = ex.shape
    ny = nyp1 - 1
    for i in prange(nx):
        for jj in range(t):
            for k in range(1, nzp1 - 1):
                j = 1 + jj
                d = (hz[i, j, k] - hz[i, j - 1, k]) * inv_dy
                p = b[j] * psi[i, jj, k] + a[j] * d
                psi[i, jj, k] = p
                ex[i, j, k] += cb[i, j, k] * p
            for k in range(1, nzp1 - 1):
                j = ny - t + jj
                d = (hz[i, j, k] - hz[i, j - 1, k]) * inv_dy
                p = b[j] * psi[i, t + jj, k] + a[j] * d
                psi[i, t + jj, k] = p
                ex[i, j, k] += cb[i, j, k] * p


@njit(**_OPTS)
def cpml_ex_z(ex, hy, cb, psi, b, a, inv_dz, t):
    nx, nyp1, nzp1 = ex.shape
    nz = nzp1 - 1
    for i in prange(nx):
        for j in range(1, nyp1 - 1):
            for kk in range(t):
                k = 1 + kk
                d = (hy[i, j, k] - hy[i, j, k - 1]) * inv_dz
                p = b[k] * psi[i, j, kk] + a[k] * d
                psi[i, j, kk] = p
                ex[i, j, k] -= cb[i, j, k] * p
            for kk in range(t):
                k = nz - t + kk
                d = (hy[i, j, k] - hy[i, j, k - 1]) * inv_dz
                p = b[k] * psi[i, j, t + kk] + a[k] * d
                psi[i, j, t + kk] = p
                ex[i, j, k] -= cb[i, j, k] * p


@njit(**_OPTS)
def cpml_ey_z(ey, hx, cb, psi, b, a, inv_dz, t):
    nxp1, ny, nzp1 = ey.shape
    nz = nzp1 - 1
    for i in prange(1, nxp1 - 1):
        for j in range(ny):
            for kk in range(t):
                k = 1 + kk
                d = (hx[i, j, k] - hx[i, j, k - 1]) * inv_dz
                p = b[k] * psi[i, j, kk] + a[k] * d
                psi[i, j, kk] = p
                ey[i, j, k] += cb[i, j, k] * p
            for kk in range(t):
                k = nz - t + kk
                d = (hx[i, j, k] - hx[i, j, k - 1]) * inv_dz
                p = b[k] * psi[i, j, t + kk] + a[k] * d
                psi[i, j, t + kk] = p
                ey[i, j, k] += cb[i, j, k] * p


@njit(**_OPTS)
def cpml_ey_x(ey, hz, cb, psi, b, a, inv_dx, t):
    nxp1, ny, nzp1 = ey.shape
    nx = nxp1 - 1
    for j in prange(ny):
        for ii in range(t):
            for k in range(1, nzp1 - 1):
                i = 1 + ii
                d = (hz[i, j, k] - hz[i - 1, j, k]) * inv_dx
                p = b[i] * psi[ii, j, k] + a[i] * d
                psi[ii, j, k] = p
                ey[i, j, k] -= cb[i, j, k] * p
            for k in range(1, nzp1 - 1):
                i = nx - t + ii
                d = (hz[i, j, k] - hz[i - 1, j, k]) * inv_dx
                p = b[i] * psi[t + ii, j, k] + a[i] * d
                psi[t + ii, j, k] = p
                ey[i, j, k] -= cb[i, j, k] * p


@njit(**_OPTS)
def cpml_ez_x(ez, hy, cb, psi, b, a, inv_dx, t):
    nxp1, nyp1, nz = ez.shape
    nx = nxp1 - 1
    for j in prange(1, nyp1 - 1):
        for ii in range(t):
            for k in range(nz):
                i = 1 + ii
                d = (hy[i, j, k] - hy[i - 1, j, k]) * inv_dx
                p = b[i] * psi[ii, j, k] + a[i] * d
                psi[ii, j, k] = p
                ez[i, j, k] += cb[i, j, k] * p
            for k in range(nz):
                i = nx - t + ii
                d = (hy[i, j, k] - hy[i - 1, j, k]) * inv_dx
                p = b[i] * psi[t + ii, j, k] + a[i] * d
                psi[t + ii, j, k] = p
                ez[i, j, k] += cb[i, j, k] * p


@njit(**_OPTS)
def cpml_ez_y(ez, hx, cb, psi, b, a, inv_dy, t):
    nxp1, nyp1, nz = ez.shape
    ny = nyp1 - 1
    for i in prange(1, nxp1 - 1):
        for jj in range(t):
            for k in range(nz):
                j = 1 + jj
                d = (hx[i, j, k] - hx[i, j - 1, k]) * inv_dy
                p = b[j] * psi[i, jj, k] + a[j] * d
                psi[i, jj, k] = p
                ez[i, j, k] -= cb[i, j, k] * p
            for k in range(nz):
                j = ny - t + jj
                d = (hx[i, j, k] - hx[i, j - 1, k]) * inv_dy
                p = b[j] * psi[i, t + jj, k] + a[j] * d
                psi[i, t + jj, k] = p
                ez[i, j, k] -= cb[i, j, k] * p


@njit(**_OPTS)
def cpml_hx_z(hx, ey, psi, b, a, inv_dz, dt_mu, t):
    nxp1, ny, nz = hx.shape
    for i in prange(nxp1):
        for j in range(ny):
            for kk in range(t):
                k = kk
                d = (ey[i, j, k + 1] - ey[i, j, k]) * inv_dz
                p = b[k] * psi[i, j, kk] + a[k] * d
                psi[i, j, kk] = p
                hx[i, j, k] += dt_mu * p
            for kk in range(t):
                k = nz - t + kk
                d = (ey[i, j, k + 1] - ey[i, j, k]) * inv_dz
                p = b[k] * psi[i, j, t + kk] + a[k] * d
                psi[i, j, t + kk] = p
                hx[i, j, k] += dt_mu * p


@njit(**_OPTS)
def cpml_hx_y(hx, ez, psi, b, a, inv_dy, dt_mu, t):
    nxp1, ny, nz = hx.shape
    for i in prange(nxp1):
        for jj in range(t):
            for k in range(nz):
                j = jj
                d = (ez[i, j + 1, k] - ez[i, j, k]) * inv_dy
                p = b[j] * psi[i, jj, k] + a[j] * d
                psi[i, jj, k] = p
                hx[i, j, k] -= dt_mu * p
            for k in range(nz):
                j = ny - t + jj
                d = (ez[i, j + 1, k] - ez[i, j, k]) * inv_dy
                p = b[j] * psi[i, t + jj, k] + a[j] * d
                psi[i, t + jj, k] = p
                hx[i, j, k] -= dt_mu * p


@njit(**_OPTS)
def cpml_hy_x(hy, ez, psi, b, a, inv_dx, dt_mu, t):
    nx, nyp1, nz = hy.shape
    for j in prange(nyp1):
        for ii in range(t):
            for k in range(nz):
                i = ii
                d = (ez[i + 1, j, k] - ez[i, j, k]) * inv_dx
                p = b[i] * psi[ii, j, k] + a[i] * d
                psi[ii, j, k] = p
                hy[i, j, k] += dt_mu * p
            for k in range(nz):
                i = nx - t + ii
                d = (ez[i + 1, j, k] - ez[i, j, k]) * inv_dx
                p = b[i] * psi[t + ii, j, k] + a[i] * d
                psi[t + ii, j, k] = p
                hy[i, j, k] += dt_mu * p


@njit(**_OPTS)
def cpml_hy_z(hy, ex, psi, b, a, inv_dz, dt_mu, t):
    nx, nyp1, nz = hy.shape
    for i in prange(nx):
        for j in range(nyp1):
            for kk in range(t):
                k = kk
                d = (ex[i, j, k + 1] - ex[i, j, k]) * inv_dz
                p = b[k] * psi[i, j, kk] + a[k] * d
                psi[i, j, kk] = p
                hy[i, j, k] -= dt_mu * p
            for kk in range(t):
                k = nz - t + kk
                d = (ex[i, j, k + 1] - ex[i, j, k]) * inv_dz
                p = b[k] * psi[i, j, t + kk] + a[k] * d
                psi[i, j, t + kk] = p
                hy[i, j, k] -= dt_mu * p


@njit(**_OPTS)
def cpml_hz_y(hz, ex, psi, b, a, inv_dy, dt_mu, t):
    nx, ny, nzp1 = hz.shape
    for i in prange(nx):
        for jj in range(t):
            for k in range(nzp1):
                j = jj
                d = (ex[i, j + 1, k] - ex[i, j, k]) * inv_dy
                p = b[j] * psi[i, jj, k] + a[j] * d
                psi[i, jj, k] = p
                hz[i, j, k] += dt_mu * p
            for k in range(nzp1):
                j = ny - t + jj
                d = (ex[i, j + 1, k] - ex[i, j, k]) * inv_dy
                p = b[j] * psi[i, t + jj, k] + a[j] * d
                psi[i, t + jj, k] = p
                hz[i, j, k] += dt_mu * p


@njit(**_OPTS)
def cpml_hz_x(hz, ey, psi, b, a, inv_dx, dt_mu, t):
    nx, ny, nzp1 = hz.shape
    for j in prange(ny):
        for ii in range(t):
            for k in range(nzp1):
                i = ii
                d = (ey[i + 1, j, k] - ey[i, j, k]) * inv_dx
                p = b[i] * psi[ii, j, k] + a[i] * d
                psi[ii, j, k] = p
                hz[i, j, k] -= dt_mu * p
            for k in range(nzp1):
                i = nx - t + ii
                d = (ey[i + 1, j, k] - ey[i, j, k]) * inv_dx
                p = b[i] * psi[t + ii, j, k] + a[i] * d
                psi[t + ii, j, k] = p
                hz[i, j, k] -= dt_mu * p


# ----------------------------------------------------------- reductions etc.

@njit(cache=True)
def electric_energy(e, ca, cb, dt, dv):
    """(eps/2) E^2 dV with eps = dt (1 + ca) / (2 cb); PEC edges (cb = 0)
    hold E = 0 and contribute nothing.  Serial: summation order is fixed."""
    acc = 0.0
    nx, ny, nz = e.shape
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                cbv = cb[i, j, k]
                if cbv > 0.0:
                    eps = dt * (1.0 + ca[i, j, k]) / (2.0 * cbv)
                    acc += 0.5 * eps * e[i, j, k] * e[i, j, k] * dv
    return acc


@njit(cache=True)
def magnetic_energy(h_old, h_new, mu, dv):
    """(mu/2) H_old . H_new dV: the staggered form conserved by leapfrog."""
    acc = 0.0
    nx, ny, nz = h_old.shape
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                acc += 0.5 * mu * h_old[i, j, k] * h_new[i, j, k] * dv
    return acc


@njit(**_OPTS)
def accumulate_phasor(acc, src, phase):
    """acc += src * phase over a 3-D slab view (running DFT step)."""
    n0, n1, n2 = src.shape
    for i in prange(n0):
        for j in range(n1):
            for k in range(n2):
                acc[i, j, k] += src[i, j, k] * phase


@njit(parallel=True, cache=True)
def radiation_sums(px, py, pz, jx, jy, jz, mx, my, mz, k_wave, cos_t, sin_t, cos_p, sin_p):
    """Radiation vectors over a direction grid.

    Inputs are flattened surface samples: positions p* and current moments
    j*, m* (complex, area element already folded in).  Returns a
    (T, P, 4) complex array with N_theta, N_phi, L_theta, L_phi.
    """
    nt = cos_t.shape[0]
    nph = cos_p.shape[0]
    m = px.shape[0]
    out = np.zeros((nt, nph, 4), dtype=np.complex128)
    for it in prange(nt):
        ct = cos_t[it]
        st = sin_t[it]
        for ip in range(nph):
            cp = cos_p[ip]
            sp = sin_p[ip]
            rx = st * cp
            ry = st * sp
            rz = ct
            nx_ = 0.0 + 0.0j
            ny_ = 0.0 + 0.0j
            nz_ = 0.0 + 0.0j
            lx = 0.0 + 0.0j
            ly = 0.0 + 0.0j
            lz = 0.0 + 0.0j
            for q in range(m):
                ph = k_wave * (rx * px[q] + ry * py[q] + rz * pz[q])
                f = np.cos(ph) + 1j * np.sin(ph)
                nx_ += jx[q] * f
                ny_ += jy[q] * f
                nz_ += jz[q] * f
                lx += mx[q] * f
                ly += my[q] * f
                lz += mz[q] * f
            n_theta = (nx_ * cp + ny_ * sp) * ct - nz_ * st
            n_phi = -nx_ * sp + ny_ * cp
            l_theta = (lx * cp + ly * sp) * ct - lz * st
            l_phi = -lx * sp + ly * cp
            out[it, ip, 0] = n_theta
            out[it, ip, 1] = n_phi
            out[it, ip, 2] = l_theta
            out[it, ip, 3] = l_phi
    return out
