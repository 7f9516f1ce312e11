"""First-order vacuum current response and its gauge variation.

The retarded response of the vacuum current to an external potential is a
mode-pair sum over transitions out of the occupied set, with interaction
picture phases set by single-particle energy differences (the per-vacuum
energy subtraction removes any overall phase).  Two computational paths are
provided for the response to a pure-gauge potential:

* the direct Kubo integral of the retarded kernels against (A0, A);
* the equal-time contraction of the vacuum's charge-current commutator
  kernel with the gauge scalar chi.

The two agree (up to time-quadrature error) when the Kubo integral smears
the potential with exact Fourier-space integrals, under which the spatial
surface term of the derivation vanishes identically on the periodic
lattice.  The ``site`` smearing instead matches the site-diagonal coupling
used by the evolution module and is the right convention for comparisons
against finite-difference evolution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import ALPHA, ModeBasis
from .schwinger import SchwingerKernel, schwinger_band, schwinger_standard
from .vacua import OccupationSet, VacuumSpec, occupation_set


@dataclass
class ResponseKernel:
    """Mode-pair data of the retarded current/charge response of a vacuum."""

    basis: ModeBasis
    occupied: OccupationSet
    omega: np.ndarray            # (P,) energy differences e_n - e_m
    transfer: np.ndarray         # (P,) integer momentum transfers k_m - k_n
    current_weight: np.ndarray   # (P,) q u_n^dag alpha u_m / L
    charge_weight: np.ndarray    # (P,) q u_n^dag u_m / L

    @classmethod
    def build(cls, basis: ModeBasis, occ: OccupationSet) -> "ResponseKernel":
        occupied = np.array(sorted(occ.indices), dtype=int)
        unoccupied = np.array(sorted(occ.complement), dtype=int)
        q = basis.config.charge
        length = basis.config.box_length
        u = basis.spinors
        eps = basis.lam * basis.energy
        omega, transfer, wj, wr = [], [], [], []
        for n in occupied:
            for m in unoccupied:
                omega.append(eps[n] - eps[m])
                transfer.append(basis.momentum_index[m] - basis.momentum_index[n])
                wj.append((u[:, n].conj() @ ALPHA @ u[:, m]) * q / length)
                wr.append(np.vdot(u[:, n], u[:, m]) * q / length)
        return cls(basis, occ, np.array(omega), np.array(transfer, dtype=int),
                   np.array(wj, dtype=complex), np.array(wr, dtype=complex))

    def _site_matrix(self, weights: np.ndarray) -> np.ndarray:
        base = 2.0 * np.pi / self.basis.config.box_length
        grid = self.basis.config.grid
        return weights[None, :] * np.exp(
            1j * base * np.outer(grid, self.transfer))

    def current_pair_matrix(self) -> np.ndarray:
        """J_p(x) over (site, pair)."""
        return self._site_matrix(self.current_weight)

    def charge_pair_matrix(self) -> np.ndarray:
        return self._site_matrix(self.charge_weight)

    def retarded_current_current(self, tau: float) -> np.ndarray:
        """R_JJ(x, y; tau) = i <[J(x,tau), J(y,0)]>, zero for tau < 0."""
        return self._retarded(self.current_pair_matrix(),
                              self.current_pair_matrix(), tau)

    def retarded_current_charge(self, tau: float) -> np.ndarray:
        """R_Jrho(x, y; tau) = i <[J(x,tau), rho(y,0)]>, zero for tau < 0."""
        return self._retarded(self.current_pair_matrix(),
                              self.charge_pair_matrix(), tau)

    def _retarded(self, amat, bmat, tau: float) -> np.ndarray:
        n = self.basis.config.site_count
        if tau < 0:
            return np.zeros((n, n))
        z = (amat * np.exp(1j * self.omega * tau)[None, :]) @ bmat.conj().T
        return -2.0 * z.imag


def _simpson_weights(n_samples: int, h: float) -> np.ndarray:
    w = np.ones(n_samples)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def _time_grid(t_start: float, t_stop: float, max_frequency: float,
               samples_per_period: int):
    span = t_stop - t_start
    period = 2.0 * np.pi / max(max_frequency, 1e-12)
    n_intervals = max(16, int(np.ceil(span / period * samples_per_period)))
    n_intervals += n_intervals % 2  # Simpson needs an even interval count
    ts = np.linspace(t_start, t_stop, n_intervals + 1)
    return ts, _simpson_weights(n_intervals + 1, span / n_intervals)


def first_order_current(kernel: ResponseKernel, potential, t: float,
                        t_start: float, smearing: str = "site",
                        samples_per_period: int = 40) -> np.ndarray:
    """Linear-in-potential vacuum current at time t on the grid.

    ``smearing`` selects how the potential enters the spatial integrals:
    "site" couples it site-diagonally, matching the evolution module's
    Hamiltonian exactly; "fourier" evaluates the integrals of the pair
    functions against the potential's bandlimited interpolant exactly, the
    convention under which the pure-gauge response reduces to the
    commutator-kernel contraction.
    """
    if smearing not in ("site", "fourier"):
        raise ValueError(f"unknown smearing {smearing!r}")
    basis = kernel.basis
    n_sites = basis.config.site_count
    if t <= t_start:
        return np.zeros(n_sites)
    fastest = 2.0 * basis.max_energy
    ts, weights = _time_grid(t_start, t, fastest, samples_per_period)

    jmat = kernel.current_pair_matrix()
    rmat = kernel.charge_pair_matrix()
    a = basis.config.spacing
    length = basis.config.box_length
    freqs = np.fft.fftfreq(n_sites, d=1.0 / n_sites).astype(int)
    index_of_transfer = {int(k): i for i, k in enumerate(freqs)}

    integral = np.zeros(kernel.omega.shape, dtype=complex)
    for t_prime, w in zip(ts, weights):
        a_vec = potential.a(t_prime)
        a0_vec = potential.a0(t_prime)
        if smearing == "site":
            source = a * (jmat.conj().T @ (-a_vec) + rmat.conj().T @ a0_vec)
        else:
            a_hat = np.fft.fft(a_vec) / n_sites
            a0_hat = np.fft.fft(a0_vec) / n_sites
            coef_a = np.array([
                a_hat[index_of_transfer[d]] if d in index_of_transfer else 0.0
                for d in kernel.transfer
            ])
            coef_a0 = np.array([
                a0_hat[index_of_transfer[d]] if d in index_of_transfer else 0.0
                for d in kernel.transfer
            ])
            source = length * (-kernel.current_weight.conj() * coef_a
                               + kernel.charge_weight.conj() * coef_a0)
        integral += w * source * np.exp(-1j * kernel.omega * t_prime)

    # delta<J> = -i * int <[J_I(t), V_I(t')]> dt'; the sign is fixed by the
    # integrated dynamics (centered-difference linearization of the evolution
    # module reproduces it)
    z = jmat @ (np.exp(1j * kernel.omega * t) * integral)
    return 2.0 * z.imag


def vacuum_response_kernel(basis: ModeBasis, spec: VacuumSpec) -> ResponseKernel:
    return ResponseKernel.build(basis, occupation_set(spec, basis))


def commutator_kernel(basis: ModeBasis, spec: VacuumSpec) -> SchwingerKernel:
    if spec.kind == "band":
        return schwinger_band(basis, spec)
    if spec.kind == "standard":
        return schwinger_standard(basis)
    raise ValueError("commutator kernel requires a filled-sea or band vacuum")


def gauge_variation_response(basis: ModeBasis, spec: VacuumSpec, gauge,
                             t: float) -> np.ndarray:
    """delta J(x, t) = i * integral of I(x,y) chi(y,t) dy.

    The contraction pairs the commutator kernel's bandlimited interpolant
    with chi exactly in Fourier space; chi enters only through its value at
    the evaluation time.  The overall sign follows the same convention as
    ``first_order_current`` (fixed against the integrated dynamics), so the
    two paths agree rather than merely being proportional.
    """
    kernel = commutator_kernel(basis, spec)
    return contract_kernel_with_chi(kernel, gauge.chi(t))


def contract_kernel_with_chi(kernel: SchwingerKernel,
                             chi_values: np.ndarray) -> np.ndarray:
    basis = kernel.basis
    n = basis.config.site_count
    chi_values = np.asarray(chi_values, dtype=float)
    if chi_values.shape != (n,):
        raise ValueError("chi must be sampled on the grid")
    chi_hat = np.fft.fft(chi_values) / n
    freqs = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    index_of = {int(k): i for i, k in enumerate(freqs)}
    base = 2.0 * np.pi / basis.config.box_length
    grid = basis.config.grid
    out = np.zeros(n, dtype=complex)
    for d, c in kernel.coefficients.items():
        if d not in index_of:
            continue
        out += c * chi_hat[index_of[d]] * np.exp(1j * base * d * grid)
    out = 1j * basis.config.box_length * out
    return out.real


def deep_state_coupling(basis: ModeBasis, potential_fn, t_span, packet,
                        deep_mode: int, x_oversample: int = 4,
                        samples_per_period: int = 20) -> complex:
    """Spacetime overlap of a deep negative mode with a driven packet.

    Computes the transition amplitude integral of phi_n^dag(x,t) V(x,t)
    Phi(x,t) over the box and the window ``t_span``, where Phi is the
    positive-branch packet (indices, coefficients) evolving freely and n is
    a negative-branch mode.  For fixed smooth V and packet the magnitude
    falls as the deep mode's momentum and energy grow, because the integrand
    oscillates faster in both space and time.
    """
    if basis.lam[deep_mode] >= 0:
        raise ValueError("deep_mode must be a negative-branch mode")
    idx, coeffs = packet
    idx = np.asarray(idx, dtype=int)
    coeffs = np.asarray(coeffs, dtype=complex)
    t0, t1 = map(float, t_span)
    if t1 <= t0:
        raise ValueError("empty time window")

    n_fine = x_oversample * basis.config.site_count
    xs = np.arange(n_fine) * (basis.config.box_length / n_fine)
    dx = basis.config.box_length / n_fine
    phi_fine = basis.sample(xs)  # (n_fine, 2, 2N)
    deep = phi_fine[:, :, deep_mode]
    packet_modes = phi_fine[:, :, idx]

    deep_eps = basis.lam[deep_mode] * basis.energy[deep_mode]
    packet_eps = basis.lam[idx] * basis.energy[idx]
    fastest = abs(deep_eps) + np.abs(packet_eps).max()
    ts, weights = _time_grid(t0, t1, fastest, samples_per_period)

    total = 0.0 + 0.0j
    for t, w in zip(ts, weights):
        phi_t = packet_modes @ (coeffs * np.exp(-1j * packet_eps * t))
        v = np.asarray(potential_fn(xs, t))
        integrand = np.einsum("js,js->", deep.conj(), v[:, None] * phi_t)
        total += w * dx * integrand * np.exp(1j * deep_eps * t)
    return complex(total)
