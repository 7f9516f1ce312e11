"""One-body kernels of the charge density, current density and free energy.

Each observable is a fermion bilinear sum_{nm} K_nm a_n^dag a_m minus a
c-number subtraction chosen so the reference vacuum expectation vanishes.
Kernels are built per grid site; the subtraction constants depend on the
vacuum, so they are kept separate from the kernels and attached on demand.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .lattice import ALPHA, ModeBasis
from .vacua import OccupationSet


@dataclass(frozen=True)
class OneBodyKernel:
    """Mode-basis coefficient matrix plus subtraction constant."""

    coefficients: np.ndarray
    subtraction: float
    label: str

    def with_subtraction(self, c: float) -> "OneBodyKernel":
        return replace(self, subtraction=float(c))

    def restricted(self, mode_indices) -> "OneBodyKernel":
        """Kernel restricted to a subset of modes (subtraction dropped)."""
        idx = np.asarray(mode_indices, dtype=int)
        return OneBodyKernel(
            self.coefficients[np.ix_(idx, idx)], 0.0, self.label + "|subset"
        )


@dataclass(frozen=True)
class RenormalizationConstants:
    """Per-site charge/current subtractions and the scalar energy subtraction."""

    rho: np.ndarray   # (N,)
    current: np.ndarray  # (N,)
    xi: float


def charge_kernel(basis: ModeBasis, site: int) -> OneBodyKernel:
    """K_nm = q phi_n(x_j)^dag phi_m(x_j)."""
    f = basis.phi[site]  # (2, 2N)
    k = basis.config.charge * f.conj().T @ f
    return OneBodyKernel(k, 0.0, f"charge(x_{site})")


def current_kernel(basis: ModeBasis, site: int) -> OneBodyKernel:
    """K_nm = q phi_n(x_j)^dag alpha phi_m(x_j)."""
    f = basis.phi[site]
    k = basis.config.charge * f.conj().T @ ALPHA @ f
    return OneBodyKernel(k, 0.0, f"current(x_{site})")


def free_hamiltonian_kernel(basis: ModeBasis, occ: OccupationSet | None = None) -> OneBodyKernel:
    """Diagonal kernel lam_n E_n; subtraction = occupied-energy sum if given."""
    k = np.diag((basis.lam * basis.energy).astype(complex))
    xi = 0.0
    if occ is not None:
        xi = float(np.sum(basis.lam[list(occ.indices)] * basis.energy[list(occ.indices)]))
    return OneBodyKernel(k, xi, "free_energy")


def renorm_constants(basis: ModeBasis, occ: OccupationSet) -> RenormalizationConstants:
    """Vacuum expectations of the unsubtracted bilinears, per site.

    rho_R(x) = q sum_occ |phi_n(x)|^2, J_R(x) = q sum_occ phi_n^dag alpha phi_n,
    xi_R = sum_occ lam_n E_n.  For momentum-symmetric occupations both per-site
    arrays are constant across the grid.
    """
    idx = list(occ.indices)
    q = basis.config.charge
    if not idx:
        n = basis.config.site_count
        return RenormalizationConstants(np.zeros(n), np.zeros(n), 0.0)
    occ_phi = basis.phi[:, :, idx]  # (N, 2, n_occ)
    rho = q * np.einsum("jsn,jsn->j", occ_phi.conj(), occ_phi).real
    cur = q * np.einsum("jsn,st,jtn->j", occ_phi.conj(), ALPHA, occ_phi).real
    xi = float(np.sum(basis.lam[idx] * basis.energy[idx]))
    return RenormalizationConstants(rho, cur, xi)


def pair_functions(basis: ModeBasis, n: int, m: int, points: np.ndarray):
    """Scalar functions rho_nm(x) and j_nm(x) sampled at arbitrary points.

    rho_nm = q phi_n^dag phi_m and j_nm = q phi_n^dag alpha phi_m; both are
    single-frequency plane waves at momentum p_m - p_n.
    """
    q = basis.config.charge
    u_n = basis.spinors[:, n]
    u_m = basis.spinors[:, m]
    phase = np.exp(1j * (basis.momentum[m] - basis.momentum[n]) * points)
    norm = q / basis.config.box_length
    rho = norm * np.vdot(u_n, u_m) * phase
    cur = norm * (u_n.conj() @ ALPHA @ u_m) * phase
    return rho, cur


def continuity_pair_residual(basis: ModeBasis) -> float:
    """Max residual of d/dx(j_nm) = -i (e_n - e_m) rho_nm over all mode pairs.

    The pair functions carry a single momentum-transfer frequency that can
    exceed the N-point Nyquist window, so the derivative is taken by FFT on a
    refined grid (2N+1 points) that resolves every transfer exactly.  The
    identity is exact up to rounding; e_n = lam_n E_n.
    """
    n_sites = basis.config.site_count
    length = basis.config.box_length
    fine = 2 * n_sites + 1
    xs = np.arange(fine) * (length / fine)
    p_fine = 2.0 * np.pi * np.fft.fftfreq(fine, d=length / fine)
    eps = basis.lam * basis.energy
    worst = 0.0
    for n in range(basis.mode_count):
        for m in range(basis.mode_count):
            rho, cur = pair_functions(basis, n, m, xs)
            div = np.fft.ifft(1j * p_fine * np.fft.fft(cur))
            target = -1j * (eps[n] - eps[m]) * rho
            worst = max(worst, float(np.abs(div - target).max()))
    return worst
