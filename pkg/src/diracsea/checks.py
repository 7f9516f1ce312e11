"""Self-verification suite: exact-algebra gates and Fock-oracle comparisons.

Used by the command-line ``verify`` subcommand and by the acceptance tests.
Each check returns the measured defect together with the tolerance it is
held to, so callers can print one line per check and fail on any excess.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fock
from .lattice import LatticeConfig, ModeBasis, apply_free_hamiltonian, build_basis
from .operators import (
    OneBodyKernel,
    charge_kernel,
    continuity_pair_residual,
    current_kernel,
    free_hamiltonian_kernel,
    renorm_constants,
)
from .schwinger import schwinger_band, schwinger_standard
from .vacua import OccupationSet, VacuumSpec, occupation_set


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.value <= self.tolerance

    def line(self) -> str:
        state = "ok  " if self.passed else "FAIL"
        return f"{state} {self.name}: {self.value:.3e} (tol {self.tolerance:.1e})"


def orthonormality_defect(basis: ModeBasis) -> float:
    gram = basis.config.spacing * basis.flat.conj().T @ basis.flat
    return float(np.abs(gram - np.eye(basis.mode_count)).max())


def completeness_defect(basis: ModeBasis) -> float:
    n = basis.config.site_count
    outer = np.einsum("jan,kbn->jakb", basis.phi, basis.phi.conj())
    target = np.zeros_like(outer)
    idx = np.arange(n)
    target[idx, 0, idx, 0] = 1.0 / basis.config.spacing
    target[idx, 1, idx, 1] = 1.0 / basis.config.spacing
    return float(np.abs(outer - target).max())


def eigenrelation_defect(basis: ModeBasis) -> float:
    worst = 0.0
    for n in range(basis.mode_count):
        image = apply_free_hamiltonian(basis, basis.phi[:, :, n])
        target = basis.lam[n] * basis.energy[n] * basis.phi[:, :, n]
        worst = max(worst, float(np.abs(image - target).max()))
    return worst


def hermiticity_defect(basis: ModeBasis, rng: np.random.Generator,
                       trials: int = 4) -> float:
    n = basis.config.site_count
    worst = 0.0
    for _ in range(trials):
        f = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
        g = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
        left = basis.inner(f, apply_free_hamiltonian(basis, g))
        right = np.conj(basis.inner(g, apply_free_hamiltonian(basis, f)))
        worst = max(worst, abs(left - right))
    return worst


def anticommutator_defect(mode_count: int) -> float:
    ladders = fock.build_ladders(mode_count)
    eye = ladders.identity()
    worst = 0.0

    def maxabs(matrix):
        return 0.0 if matrix.nnz == 0 else float(np.abs(matrix.data).max())

    for i in range(mode_count):
        for j in range(mode_count):
            mixed = (ladders.lowering[i] @ ladders.raising[j]
                     + ladders.raising[j] @ ladders.lowering[i])
            worst = max(worst, maxabs((mixed - eye) if i == j else mixed))
            both = (ladders.lowering[i] @ ladders.lowering[j]
                    + ladders.lowering[j] @ ladders.lowering[i])
            worst = max(worst, maxabs(both))
    return worst


def algebra_gate(site_counts=(5, 7, 9, 11), masses=(0.0, 1.0, 5.0),
                 ladder_sizes=(2, 6, 10), seed: int = 0) -> list[CheckResult]:
    """Exact-identity gate: orthonormality, completeness, eigenrelation,
    hermiticity, per-pair continuity, and ladder anticommutators.

    The lattice identities run over the full (N, m) grid; the anticommutator
    check runs at the Fock-feasible mode counts (2^(2N) states put the larger
    lattices far beyond the oracle's reach).
    """
    rng = np.random.default_rng(seed)
    defects = {"orthonormality": 0.0, "completeness": 0.0,
               "eigenrelation": 0.0, "hermiticity": 0.0, "continuity": 0.0}
    for n_sites in site_counts:
        for mass in masses:
            basis = build_basis(LatticeConfig(2.0 * np.pi, n_sites, mass))
            defects["orthonormality"] = max(defects["orthonormality"],
                                            orthonormality_defect(basis))
            defects["completeness"] = max(defects["completeness"],
                                          completeness_defect(basis))
            defects["eigenrelation"] = max(defects["eigenrelation"],
                                           eigenrelation_defect(basis))
            defects["hermiticity"] = max(defects["hermiticity"],
                                         hermiticity_defect(basis, rng))
            defects["continuity"] = max(defects["continuity"],
                                        continuity_pair_residual(basis))
    results = [CheckResult(f"{name} (N={min(site_counts)}..{max(site_counts)}, "
                           f"m in {list(masses)})", value, 1e-12)
               for name, value in defects.items()]
    for mode_count in ladder_sizes:
        results.append(CheckResult(f"anticommutators (M={mode_count})",
                                   anticommutator_defect(mode_count), 1e-12))
    return results


def _subset_occupation(basis: ModeBasis, spec: VacuumSpec, subset) -> list[int]:
    """Positions within ``subset`` that the vacuum occupies."""
    subset = list(subset)
    occupied = []
    edge = None
    if spec.kind == "band":
        edge = basis.config.mass + spec.band_width
    for local, global_index in enumerate(subset):
        if basis.lam[global_index] > 0:
            continue
        if edge is None or basis.energy[global_index] <= edge:
            occupied.append(local)
    return occupied


def oracle_commutator_defect(basis: ModeBasis, spec: VacuumSpec,
                             mode_indices=None) -> float:
    """Brute-force <vac|[rho(y), J(x)]|vac> against the mode-sum kernel.

    With ``mode_indices`` the comparison runs on a mode subset, where the
    kernel has nonvanishing grid values; on the full basis both sides vanish
    identically and the comparison still exercises the whole pipeline.
    """
    subset = (list(range(basis.mode_count)) if mode_indices is None
              else list(mode_indices))
    ladders = fock.build_ladders(len(subset))
    occ = OccupationSet(tuple(_subset_occupation(basis, spec, subset)),
                        len(subset))
    vacuum = fock.build_vacuum_vector(ladders, occ)

    if spec.kind == "band":
        kernel = schwinger_band(basis, spec, mode_indices=subset)
    else:
        kernel = schwinger_standard(basis, mode_indices=subset)
    grid = basis.config.grid
    values = kernel.evaluate(grid, grid)

    n_sites = basis.config.site_count
    rho_ops = [fock.bilinear_matrix(ladders,
                                    charge_kernel(basis, j).restricted(subset))
               for j in range(n_sites)]
    cur_ops = [fock.bilinear_matrix(ladders,
                                    current_kernel(basis, j).restricted(subset))
               for j in range(n_sites)]
    worst = 0.0
    for j in range(n_sites):          # x index of J
        for k in range(n_sites):      # y index of rho
            oracle = fock.commutator_expectation(vacuum, rho_ops[k], cur_ops[j])
            worst = max(worst, abs(oracle - values[j, k]))
    return worst


def oracle_subtraction_defect(basis: ModeBasis, spec: VacuumSpec) -> float:
    """Vacuum expectations of subtracted rho, J, H0 on the oracle vector."""
    occ = occupation_set(spec, basis)
    ladders = fock.build_ladders(basis.mode_count)
    vacuum = fock.build_vacuum_vector(ladders, occ)
    constants = renorm_constants(basis, occ)
    worst = 0.0
    for j in range(basis.config.site_count):
        rho_op = fock.bilinear_matrix(
            ladders, charge_kernel(basis, j).with_subtraction(constants.rho[j]))
        cur_op = fock.bilinear_matrix(
            ladders, current_kernel(basis, j).with_subtraction(constants.current[j]))
        worst = max(worst, abs(fock.expectation(vacuum, rho_op)))
        worst = max(worst, abs(fock.expectation(vacuum, cur_op)))
    h0_op = fock.bilinear_matrix(ladders, free_hamiltonian_kernel(basis, occ))
    worst = max(worst, abs(fock.expectation(vacuum, h0_op)))
    return worst


def spectrum_positivity(basis: ModeBasis) -> tuple[float, int]:
    """(most negative eigenvalue, number of zeros) of the sea-vacuum H0."""
    occ = occupation_set(VacuumSpec("standard"), basis)
    ladders = fock.build_ladders(basis.mode_count)
    kernel = free_hamiltonian_kernel(basis, occ)
    spectrum = fock.spectrum_of_h0_sector(ladders, kernel, occ)
    zeros = int(np.sum(np.abs(spectrum) <= 1e-12))
    return float(spectrum.min()), zeros


def band_spectrum_negative_level(basis: ModeBasis, spec: VacuumSpec):
    """(min eigenvalue, single-move level E_m - E_n, present-in-spectrum)."""
    occ = occupation_set(spec, basis)
    ladders = fock.build_ladders(basis.mode_count)
    kernel = free_hamiltonian_kernel(basis, occ)
    spectrum = fock.spectrum_of_h0_sector(ladders, kernel, occ)
    edge = basis.config.mass + spec.band_width
    negatives = basis.lam < 0
    band_energies = basis.energy[negatives & (basis.energy <= edge)]
    below_energies = basis.energy[negatives & (basis.energy > edge)]
    if len(below_energies) == 0:
        raise ValueError("band vacuum has no below-band modes")
    move = float(band_energies.min() - below_energies.max())   # closest move
    present = bool(np.any(np.abs(spectrum - move) <= 1e-12))
    return float(spectrum.min()), move, present


def oracle_suite(seed: int = 0) -> list[CheckResult]:
    """Fock-oracle comparisons at desk scale (M <= 10)."""
    results = []

    basis3 = build_basis(LatticeConfig(2.0 * np.pi, 3, 1.0))
    results.append(CheckResult(
        "oracle commutator, full basis (N=3, M=6), filled sea",
        oracle_commutator_defect(basis3, VacuumSpec("standard")), 1e-10))

    basis7 = build_basis(LatticeConfig(2.0 * np.pi, 7, 1.0))
    subset = [i for i in range(basis7.mode_count)
              if basis7.momentum_index[i] in (-1, 0, 1, 2)]
    results.append(CheckResult(
        "oracle commutator, 4-momentum subset (M=8), filled sea",
        oracle_commutator_defect(basis7, VacuumSpec("standard"), subset), 1e-10))
    band7 = VacuumSpec("band", 1.0)
    results.append(CheckResult(
        "oracle commutator, 4-momentum subset (M=8), band vacuum",
        oracle_commutator_defect(basis7, band7, subset), 1e-10))

    basis5 = build_basis(LatticeConfig(2.0 * np.pi, 5, 1.0))
    results.append(CheckResult(
        "oracle vacuum subtractions (M=10), filled sea",
        oracle_subtraction_defect(basis5, VacuumSpec("standard")), 1e-12))
    results.append(CheckResult(
        "oracle vacuum subtractions (M=10), band vacuum",
        oracle_subtraction_defect(basis5, VacuumSpec("band", 1.0)), 1e-12))

    minimum, zeros = spectrum_positivity(basis5)
    results.append(CheckResult(
        "sea-vacuum spectrum minimum (M=10)", max(0.0, -minimum), 1e-12))
    results.append(CheckResult(
        "sea-vacuum spectrum zero multiplicity defect", abs(zeros - 1), 0.5))

    band5 = VacuumSpec("band", 1.0)
    minimum, move, present = band_spectrum_negative_level(basis5, band5)
    results.append(CheckResult(
        "band-vacuum negative level exists", 0.0 if minimum < 0 else 1.0, 0.5))
    results.append(CheckResult(
        "band-vacuum single-move level present", 0.0 if present else 1.0, 0.5))

    del seed
    return results


def schwinger_suite() -> list[CheckResult]:
    """Kernel invariants on a mid-size lattice."""
    results = []
    basis = build_basis(LatticeConfig(2.0 * np.pi, 9, 1.0))
    kernel = schwinger_standard(basis)
    fine = np.linspace(0.0, basis.config.box_length, 4 * 9, endpoint=False)
    results.append(CheckResult(
        "kernel real part (filled sea, oversampled)",
        float(np.abs(kernel.evaluate(fine, fine).real).max()), 1e-12))

    from .schwinger import divergence_diag_closed_form, divergence_of_kernel
    div = divergence_of_kernel(kernel)
    closed = divergence_diag_closed_form(basis)
    rel = float(np.abs(np.diag(div) - closed).max() / np.abs(closed[0]))
    results.append(CheckResult(
        "divergence: spectral path vs closed form (relative)", rel, 1e-10))
    results.append(CheckResult(
        "divergence diagonal imaginary part is negative",
        0.0 if closed[0].imag < 0 else 1.0, 0.5))

    spec = VacuumSpec("band", 0.5 * (basis.max_energy - 1.0))
    band_kernel = schwinger_band(basis, spec)
    results.append(CheckResult(
        "band kernel coincident-point values",
        float(np.abs(np.diag(band_kernel.values)).max()), 1e-12))
    from .schwinger import f2_identity_check
    results.append(CheckResult(
        "intra-band double-sum identity residual",
        f2_identity_check(basis, spec), 1e-12))
    return results


def run_verification(seed: int = 0) -> list[CheckResult]:
    results = []
    results.extend(algebra_gate(seed=seed))
    results.extend(oracle_suite(seed=seed))
    results.extend(schwinger_suite())
    return results
