"""Periodic spectral lattice and the free Dirac single-particle problem in 1+1 D.

Conventions used throughout the package:

* two-component spinors with alpha = sigma_x, beta = sigma_z, so the
  single-particle Hamiltonian at momentum p is h(p) = p*sigma_x + m*sigma_z;
* grid points x_j = j*L/N (N odd), momenta p_k = 2*pi*k/L with
  k = -(N-1)/2 .. (N-1)/2, which keeps the momentum window symmetric;
* box normalization: phi_n(x) = u_n exp(i p_n x) / sqrt(L), with the grid
  inner product <f,g> = a * sum_j f(x_j)^dag g(x_j), a = L/N.

With these choices orthonormality and completeness of the 2N modes are exact
on the grid up to rounding.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

ALPHA = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
BETA = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


@dataclass(frozen=True)
class LatticeConfig:
    """Box length, odd site count, fermion mass and charge."""

    box_length: float
    site_count: int
    mass: float
    charge: float = 1.0

    def __post_init__(self):
        if self.box_length <= 0:
            raise ValueError(f"box_length must be positive, got {self.box_length}")
        if self.site_count < 1 or self.site_count % 2 == 0:
            raise ValueError(
                f"site_count must be an odd positive integer, got {self.site_count}"
            )
        if self.mass < 0:
            raise ValueError(f"mass must be non-negative, got {self.mass}")

    @classmethod
    def from_dict(cls, d: dict) -> "LatticeConfig":
        """Build from the CLI JSON keys {"L", "N", "m", "q"}."""
        try:
            return cls(
                box_length=float(d["L"]),
                site_count=int(d["N"]),
                mass=float(d["m"]),
                charge=float(d.get("q", 1.0)),
            )
        except KeyError as exc:
            raise ValueError(f"lattice config missing key {exc}") from exc

    @property
    def spacing(self) -> float:
        return self.box_length / self.site_count

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.site_count) * self.spacing

    @property
    def momentum_indices(self) -> np.ndarray:
        half = (self.site_count - 1) // 2
        return np.arange(-half, half + 1)

    @property
    def momenta(self) -> np.ndarray:
        return 2.0 * np.pi * self.momentum_indices / self.box_length

    def to_dict(self) -> dict:
        return {
            "L": self.box_length,
            "N": self.site_count,
            "m": self.mass,
            "q": self.charge,
        }

    def __str__(self):
        return json.dumps(self.to_dict())


def mode_energy(p: float, m: float) -> float:
    """Positive branch energy sqrt(p^2 + m^2)."""
    return float(np.hypot(p, m))


def _eigenspinors(p: float, m: float) -> tuple[np.ndarray, np.ndarray]:
    """Unit eigenvectors (u_plus, u_minus) of p*sigma_x + m*sigma_z.

    Phase convention: first nonzero component real positive.  The doubly
    degenerate p = 0, m = 0 point is fixed to (1,0) / (0,1).
    """
    if p == 0.0 and m == 0.0:
        return np.array([1.0, 0.0], dtype=complex), np.array([0.0, 1.0], dtype=complex)
    h2 = np.array([[m, p], [p, -m]], dtype=float)
    _, vec = np.linalg.eigh(h2)  # ascending: column 0 -> -E, column 1 -> +E
    out = []
    for col in (1, 0):
        u = vec[:, col]
        lead = u[0] if abs(u[0]) > 1e-12 else u[1]
        out.append((u * np.sign(lead)).astype(complex))
    return out[0], out[1]


@dataclass(frozen=True)
class Mode:
    """One plane-wave eigenstate of the free Dirac problem."""

    momentum_index: int
    momentum: float
    lam: int           # +1 positive branch, -1 negative branch
    energy: float
    spinor: np.ndarray  # unit 2-vector, fixed phase


class ModeBasis:
    """Complete orthonormal set of 2N plane-wave spinor modes on the grid.

    Modes are ordered by (lam descending, |k|, k); the sampled wavefunctions
    are exposed both as ``phi`` with shape (N, 2, 2N) (site, spinor, mode) and
    flattened site-major as ``flat`` with shape (2N, 2N).
    """

    def __init__(self, config: LatticeConfig, modes: Sequence[Mode]):
        self.config = config
        self.modes = tuple(modes)
        N = config.site_count
        self.lam = np.array([md.lam for md in self.modes])
        self.energy = np.array([md.energy for md in self.modes])
        self.momentum = np.array([md.momentum for md in self.modes])
        self.momentum_index = np.array([md.momentum_index for md in self.modes])
        self.spinors = np.stack([md.spinor for md in self.modes], axis=1)  # (2, 2N)
        phase = np.exp(1j * np.outer(config.grid, self.momentum))  # (N, 2N)
        self.phi = (
            phase[:, None, :] * self.spinors[None, :, :] / np.sqrt(config.box_length)
        )
        self.flat = self.phi.reshape(2 * N, 2 * N)
        # sqrt(a) * flat is unitary; h0 is exactly U diag(lam E) U^dag
        self._unitary = np.sqrt(config.spacing) * self.flat

    def __len__(self):
        return len(self.modes)

    @property
    def mode_count(self) -> int:
        return len(self.modes)

    @property
    def max_energy(self) -> float:
        return float(self.energy.max())

    def sample(self, points: np.ndarray) -> np.ndarray:
        """Wavefunctions at arbitrary positions, shape (len(points), 2, 2N)."""
        points = np.asarray(points, dtype=float)
        phase = np.exp(1j * np.outer(points, self.momentum))
        return (
            phase[:, None, :]
            * self.spinors[None, :, :]
            / np.sqrt(self.config.box_length)
        )

    def inner(self, f: np.ndarray, g: np.ndarray) -> complex:
        """Grid inner product a * sum_j f^dag g for flat or (N,2) fields."""
        return complex(self.config.spacing * np.vdot(f.ravel(), g.ravel()))

    def free_hamiltonian_matrix(self) -> np.ndarray:
        """Dense 2N x 2N matrix of h0 in the site-spinor basis."""
        u = self._unitary
        return (u * (self.lam * self.energy)) @ u.conj().T

    def mode_coefficients(self, psi: np.ndarray) -> np.ndarray:
        """Expansion coefficients c with psi = sum_n c_n phi_n."""
        return self.config.spacing * (self.flat.conj().T @ psi.ravel())


def build_basis(config: LatticeConfig) -> ModeBasis:
    """All 2N free modes of the lattice, sorted (lam desc, |k|, k)."""
    modes = []
    for k in config.momentum_indices:
        p = 2.0 * np.pi * k / config.box_length
        e = mode_energy(p, config.mass)
        u_plus, u_minus = _eigenspinors(p, config.mass)
        modes.append(Mode(int(k), p, +1, e, u_plus))
        modes.append(Mode(int(k), p, -1, e, u_minus))
    modes.sort(key=lambda md: (-md.lam, abs(md.momentum_index), md.momentum_index))
    return ModeBasis(config, modes)


def spectral_derivative(values: np.ndarray, box_length: float) -> np.ndarray:
    """d/dx of a periodic grid function via FFT (leading axis is the grid)."""
    n = values.shape[0]
    p = 2.0 * np.pi * np.fft.fftfreq(n, d=box_length / n)
    shape = (n,) + (1,) * (values.ndim - 1)
    out = np.fft.ifft(1j * p.reshape(shape) * np.fft.fft(values, axis=0), axis=0)
    return out.real if np.isrealobj(values) else out


def apply_free_hamiltonian(basis: ModeBasis, psi: np.ndarray) -> np.ndarray:
    """Apply h0 = -i alpha d/dx + m beta spectrally to a grid spinor field.

    Accepts shape (N, 2) or flat (2N,); returns the same shape.
    """
    config = basis.config
    N = config.site_count
    if psi.size != 2 * N:
        raise ValueError(f"field of size {psi.size} does not match grid N={N}")
    flat_input = psi.ndim == 1
    field = psi.reshape(N, 2)
    p = 2.0 * np.pi * np.fft.fftfreq(N, d=config.spacing)
    ft = np.fft.fft(field, axis=0)
    kinetic = np.fft.ifft(p[:, None] * ft[:, ::-1], axis=0)  # alpha swaps components
    mass_term = config.mass * field * np.array([1.0, -1.0])[None, :]
    out = kinetic + mass_term
    return out.ravel() if flat_input else out
