"""Vacuum definitions: bare, filled sea, and finite-band sea.

The band vacuum occupies only the negative-branch modes with energies in
[-(m + width), -m], both edges inclusive, so width = 0 still occupies the
E = m shell and growing the width is monotone in the occupied set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import Mode, ModeBasis

KINDS = ("bare", "standard", "band")

POSITIVE = "positive"
IN_BAND = "in_band"
BELOW_BAND = "below_band"


@dataclass(frozen=True)
class VacuumSpec:
    kind: str
    band_width: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"vacuum kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "band":
            if self.band_width is None or self.band_width < 0:
                raise ValueError("band vacuum requires a non-negative band_width")
        elif self.band_width is not None:
            raise ValueError("band_width is only meaningful for kind='band'")

    @classmethod
    def from_dict(cls, d: dict) -> "VacuumSpec":
        """Build from the CLI JSON keys {"vacuum", "delta_Ew"}."""
        kind = d.get("vacuum", "standard")
        if kind == "band":
            return cls("band", float(d["delta_Ew"]))
        return cls(kind)

    def to_dict(self) -> dict:
        out = {"vacuum": self.kind}
        if self.kind == "band":
            out["delta_Ew"] = self.band_width
        return out


@dataclass(frozen=True)
class OccupationSet:
    """Occupied mode indices of a determinant vacuum, plus the mode count."""

    indices: tuple[int, ...]
    mode_count: int

    def __post_init__(self):
        if any(i < 0 or i >= self.mode_count for i in self.indices):
            raise ValueError("occupation indices out of range")

    def __len__(self):
        return len(self.indices)

    def __contains__(self, i):
        return i in set(self.indices)

    @property
    def complement(self) -> tuple[int, ...]:
        occupied = set(self.indices)
        return tuple(i for i in range(self.mode_count) if i not in occupied)

    def density_matrix(self) -> np.ndarray:
        d = np.zeros((self.mode_count, self.mode_count))
        for i in self.indices:
            d[i, i] = 1.0
        return d


def classify(mode: Mode, spec: VacuumSpec, mass: float) -> str:
    """Region of a single mode: positive, in_band, or below_band.

    For bare/standard vacua every negative-branch mode counts as in_band.
    The band keeps energies in [m, m + width], both edges inclusive.
    """
    if mode.lam > 0:
        return POSITIVE
    if spec.kind != "band":
        return IN_BAND
    return IN_BAND if mode.energy <= mass + spec.band_width else BELOW_BAND


def occupation_set(spec: VacuumSpec, basis: ModeBasis) -> OccupationSet:
    """Occupied mode indices realizing the requested vacuum on this basis."""
    M = basis.mode_count
    if spec.kind == "bare":
        return OccupationSet((), M)
    negative = np.where(basis.lam < 0)[0]
    if spec.kind == "standard":
        return OccupationSet(tuple(int(i) for i in negative), M)
    m = basis.config.mass
    edge = m + spec.band_width
    e_max = basis.max_energy
    if edge >= e_max:
        raise ValueError(
            "band vacuum needs headroom below the momentum cutoff: "
            f"m + band_width = {edge:g} must stay below E_max = {e_max:g} "
            f"(max admissible band_width here is {e_max - m:g} exclusive)"
        )
    occupied = [int(i) for i in negative if basis.energy[i] <= edge]
    return OccupationSet(tuple(occupied), M)


def classify_indices(spec: VacuumSpec, basis: ModeBasis):
    """Index arrays (positive, in_band, below_band) for the whole basis."""
    positive = np.where(basis.lam > 0)[0]
    negative = np.where(basis.lam < 0)[0]
    if spec.kind != "band":
        return positive, negative, np.array([], dtype=int)
    edge = basis.config.mass + spec.band_width
    in_band = negative[basis.energy[negative] <= edge]
    below = negative[basis.energy[negative] > edge]
    return positive, in_band, below


def density_matrix(occ: OccupationSet) -> np.ndarray:
    return occ.density_matrix()


def coupled_band_spec(basis: ModeBasis, headroom_fraction: float = 0.5) -> VacuumSpec:
    """Band spec with width tied to the cutoff: width = fraction * (E_max - m).

    This realizes the infinite-band limit as a family over growing cutoffs;
    at fixed truncation taking the width to the cutoff would collapse the band
    vacuum onto the filled sea and erase the distinction being studied.
    """
    if not 0.0 < headroom_fraction < 1.0:
        raise ValueError("headroom_fraction must lie strictly between 0 and 1")
    width = headroom_fraction * (basis.max_energy - basis.config.mass)
    return VacuumSpec("band", width)
