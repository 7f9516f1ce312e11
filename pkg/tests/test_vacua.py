import numpy as np
import pytest

from diracsea import fock
from diracsea.vacua import (
    BELOW_BAND,
    IN_BAND,
    POSITIVE,
    OccupationSet,
    VacuumSpec,
    classify,
    classify_indices,
    coupled_band_spec,
    density_matrix,
    occupation_set,
)

TWO_PI = 2.0 * np.pi


def test_spec_validation():
    with pytest.raises(ValueError):
        VacuumSpec("sea")
    with pytest.raises(ValueError):
        VacuumSpec("band")                      # missing width
    with pytest.raises(ValueError):
        VacuumSpec("band", -0.5)
    with pytest.raises(ValueError):
        VacuumSpec("standard", 1.0)             # width without band
    assert VacuumSpec.from_dict({"vacuum": "band", "delta_Ew": 2.0}).band_width == 2.0
    assert VacuumSpec.from_dict({}).kind == "standard"


def test_classify_regions(basis_n9):
    mass = basis_n9.config.mass
    spec = VacuumSpec("band", 1.0)
    for mode in basis_n9.modes:
        region = classify(mode, spec, mass)
        if mode.lam > 0:
            assert region == POSITIVE
        elif mode.energy <= mass + 1.0:
            assert region == IN_BAND
        else:
            assert region == BELOW_BAND
    # p=0 negative mode is in the band for any width, including zero
    rest = [md for md in basis_n9.modes if md.momentum_index == 0 and md.lam < 0][0]
    assert classify(rest, VacuumSpec("band", 0.0), mass) == IN_BAND
    # exact upper edge counts as inside
    edge_mode = [md for md in basis_n9.modes if md.lam < 0][3]
    width = edge_mode.energy - mass
    assert classify(edge_mode, VacuumSpec("band", width), mass) == IN_BAND
    # standard vacuum: every negative mode is band-classified
    for mode in basis_n9.modes:
        expected = POSITIVE if mode.lam > 0 else IN_BAND
        assert classify(mode, VacuumSpec("standard"), mass) == expected


def test_classify_partitions_negative_branch(basis_n9):
    positive, in_band, below = classify_indices(VacuumSpec("band", 1.2), basis_n9)
    negatives = set(np.where(basis_n9.lam < 0)[0])
    assert set(in_band) | set(below) == negatives
    assert set(in_band) & set(below) == set()
    assert set(positive) == set(np.where(basis_n9.lam > 0)[0])


def test_occupation_sets(basis_n5):
    assert occupation_set(VacuumSpec("bare"), basis_n5).indices == ()
    standard = occupation_set(VacuumSpec("standard"), basis_n5)
    assert len(standard) == 5
    assert all(basis_n5.lam[i] < 0 for i in standard.indices)


def test_band_occupation_counts(basis_n9):
    # width just above sqrt(p_1^2 + m^2) - m occupies the p = 0, +-p_1 modes
    p1 = TWO_PI / basis_n9.config.box_length
    width = np.hypot(p1, 1.0) - 1.0 + 1e-9
    occ = occupation_set(VacuumSpec("band", width), basis_n9)
    assert len(occ) == 3
    ks = sorted(basis_n9.momentum_index[list(occ.indices)])
    assert ks == [-1, 0, 1]


def test_band_headroom_guard(basis_n9):
    e_max = basis_n9.max_energy
    with pytest.raises(ValueError) as err:
        occupation_set(VacuumSpec("band", e_max - 1.0), basis_n9)
    assert "E_max" in str(err.value)


def test_band_monotone_in_width(basis_n9):
    previous = set()
    for width in np.linspace(0.0, 0.9 * (basis_n9.max_energy - 1.0), 12):
        occ = occupation_set(VacuumSpec("band", width), basis_n9)
        assert previous <= set(occ.indices)
        previous = set(occ.indices)


def test_density_matrix():
    empty = OccupationSet((), 6)
    assert np.abs(density_matrix(empty)).max() == 0.0
    full = OccupationSet(tuple(range(6)), 6)
    assert np.allclose(density_matrix(full), np.eye(6))
    some = OccupationSet((0, 3, 4), 6)
    d = density_matrix(some)
    assert np.abs(d @ d - d).max() < 1e-15
    assert np.abs(d - d.conj().T).max() == 0.0
    assert d.trace() == pytest.approx(3.0)


def test_occupation_set_bounds():
    with pytest.raises(ValueError):
        OccupationSet((7,), 6)


def test_coupled_band_spec(basis_n9):
    spec = coupled_band_spec(basis_n9)
    assert spec.kind == "band"
    assert spec.band_width == pytest.approx(
        0.5 * (basis_n9.max_energy - basis_n9.config.mass))
    with pytest.raises(ValueError):
        coupled_band_spec(basis_n9, headroom_fraction=1.0)


def test_vacuum_annihilation_conditions(basis_n3):
    """Oracle check of the defining conditions of each vacuum."""
    ladders = fock.build_ladders(basis_n3.mode_count)

    bare = fock.build_vacuum_vector(ladders, occupation_set(VacuumSpec("bare"),
                                                            basis_n3))
    for n in range(basis_n3.mode_count):
        assert np.abs(ladders.lowering[n] @ bare).max() == 0.0

    standard_occ = occupation_set(VacuumSpec("standard"), basis_n3)
    sea = fock.build_vacuum_vector(ladders, standard_occ)
    for n in range(basis_n3.mode_count):
        if n in standard_occ:
            assert np.abs(ladders.raising[n] @ sea).max() < 1e-15
        else:
            assert np.abs(ladders.lowering[n] @ sea).max() < 1e-15

    band_occ = occupation_set(VacuumSpec("band", 0.2), basis_n3)
    band = fock.build_vacuum_vector(ladders, band_occ)
    _, in_band, below = classify_indices(VacuumSpec("band", 0.2), basis_n3)
    for n in np.where(basis_n3.lam > 0)[0]:
        assert np.abs(ladders.lowering[n] @ band).max() < 1e-15
    for n in in_band:
        assert np.abs(ladders.raising[n] @ band).max() < 1e-15
    for n in below:
        assert np.abs(ladders.lowering[n] @ band).max() < 1e-15
