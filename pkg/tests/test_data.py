"""Cleaning rules, label files, coverage checks and split construction."""

import numpy as np
import pytest

from conftest import toy_dataset, toy_spectrum
from mzembed.data import (
    MIN_MZ_DECIMALS,
    MIN_PEAKS,
    MoleculeRecord,
    Peak,
    Spectrum,
    clean_spectra,
    load_molecules,
    make_split,
    parse_fingerprints,
    parse_properties,
    read_manifest,
    rejection_reason,
    validate_coverage,
    write_manifest,
    write_rejection_log,
)
from mzembed.data.labels import PROPERTY_NAMES
from mzembed.errors import DataError, ParseError


def spectrum_with(n_fragments, decimals):
    frags = tuple(Peak(100.0 + i, 1.0) for i in range(n_fragments))
    return Spectrum(
        id="s",
        precursor=Peak(500.0, 1.0),
        fragments=frags,
        structure_id="m",
        mz_decimals=(decimals,) * (n_fragments + 1),
    )


class TestCleaning:
    def test_minimums_are_paper_values(self):
        assert MIN_PEAKS == 5
        assert MIN_MZ_DECIMALS == 3

    def test_five_peaks_total_pass(self):
        # 4 fragments + precursor = 5 peaks.
        assert rejection_reason(spectrum_with(4, 4)) is None

    def test_four_peaks_total_rejected(self):
        reason = rejection_reason(spectrum_with(3, 4))
        assert reason is not None and "peak" in reason

    def test_low_decimals_rejected(self):
        reason = rejection_reason(spectrum_with(6, 2))
        assert reason is not None and "decimal" in reason

    def test_exactly_three_decimals_pass(self):
        assert rejection_reason(spectrum_with(6, 3)) is None

    def test_missing_decimal_records_rejected(self):
        s = Spectrum(
            id="s", precursor=Peak(500.0, 1.0),
            fragments=tuple(Peak(100.0 + i, 1.0) for i in range(6)),
        )
        assert s.mz_decimals is None
        assert rejection_reason(s) is not None

    def test_clean_spectra_partitions(self):
        good = spectrum_with(6, 4)
        bad = Spectrum(
            id="t", precursor=Peak(500.0, 1.0),
            fragments=(Peak(100.0, 1.0),),
            mz_decimals=(4, 4),
        )
        kept, rejected = clean_spectra([good, bad])
        assert [s.id for s in kept] == ["s"]
        assert rejected[0][0] == "t"

    def test_rejection_log_round_trip(self, tmp_path):
        path = tmp_path / "rej.tsv"
        write_rejection_log(path, [("t", "only 2 peaks, need at least 5")])
        body = path.read_text()
        assert body.startswith("spectrum_id\treason\n")
        assert "t\tonly 2 peaks" in body


class TestLabels:
    def test_property_names_match_reported_order(self):
        assert PROPERTY_NAMES == (
            "atomic_logp",
            "num_h_acceptors",
            "num_h_donors",
            "polar_surface_area",
            "num_rotatable_bonds",
            "num_aromatic_rings",
            "num_aliphatic_rings",
            "num_heteroatoms",
            "fraction_csp3",
            "qed",
        )

    def test_fingerprint_hex_decoding(self):
        fps = parse_fingerprints("m1\tf0a1\nm2\t0000\n")
        assert np.array_equal(
            fps["m1"][:8], [1, 1, 1, 1, 0, 0, 0, 0]
        )  # f -> 1111 (MSB first)
        assert np.array_equal(fps["m1"][8:12], [1, 0, 1, 0])  # a -> 1010
        assert fps["m2"].sum() == 0
        assert fps["m1"].dtype == np.uint8

    def test_fingerprint_width_must_be_uniform(self):
        with pytest.raises(ParseError):
            parse_fingerprints("m1\tf0a1\nm2\t00\n")

    def test_fingerprint_bad_hex_rejected(self):
        with pytest.raises(ParseError):
            parse_fingerprints("m1\txyzw\n")

    def test_properties_header_is_strict(self):
        header = "structure_id\t" + "\t".join(PROPERTY_NAMES)
        row = "m1\t" + "\t".join("1.0" for _ in PROPERTY_NAMES)
        props = parse_properties(header + "\n" + row + "\n")
        assert props["m1"].shape == (10,)
        scrambled = "structure_id\t" + "\t".join(reversed(PROPERTY_NAMES))
        with pytest.raises(ParseError):
            parse_properties(scrambled + "\n" + row + "\n")

    def test_properties_must_be_finite(self):
        header = "structure_id\t" + "\t".join(PROPERTY_NAMES)
        row = "m1\t" + "\t".join(["1.0"] * 9 + ["nan"])
        with pytest.raises(ParseError):
            parse_properties(header + "\n" + row + "\n")

    def test_load_molecules_requires_matching_ids(self, tmp_path):
        fp = tmp_path / "fp.tsv"
        fp.write_text("m1\tff\nm2\t00\n")
        pr = tmp_path / "props.tsv"
        header = "structure_id\t" + "\t".join(PROPERTY_NAMES)
        pr.write_text(header + "\nm1\t" + "\t".join(["1.0"] * 10) + "\n")
        with pytest.raises(DataError):
            load_molecules(fp, pr)

    def test_validate_coverage_names_missing_structures(self):
        spectra, molecules = toy_dataset(n_structures=3, spectra_per=2)
        validate_coverage(spectra, molecules)
        del molecules["m1"]
        with pytest.raises(DataError) as err:
            validate_coverage(spectra, molecules)
        assert "m1" in str(err.value)

    def test_unlabeled_spectra_are_exempt(self):
        spectra, molecules = toy_dataset(n_structures=2, spectra_per=2)
        rng = np.random.default_rng(0)
        unlabeled = toy_spectrum("anon", None, rng)
        validate_coverage(spectra + [unlabeled], molecules)


class TestSplits:
    def test_split_is_disjoint_and_complete(self):
        spectra, _ = toy_dataset(n_structures=10, spectra_per=4)
        assignment = make_split(spectra, n_novel=2, n_known=5, seed=0)
        all_ids = {s.id for s in spectra}
        assert assignment.train_ids | assignment.known_ids | assignment.novel_ids == all_ids
        assert not assignment.train_ids & assignment.known_ids
        assert not assignment.train_ids & assignment.novel_ids
        assert not assignment.known_ids & assignment.novel_ids

    def test_novel_structures_move_wholesale(self):
        spectra, _ = toy_dataset(n_structures=8, spectra_per=3)
        assignment = make_split(spectra, n_novel=3, n_known=0, seed=1)
        by_structure = {}
        for s in spectra:
            by_structure.setdefault(s.structure_id, set()).add(s.id)
        assert len(assignment.novel_structures) == 3
        for structure in assignment.novel_structures:
            assert by_structure[structure] <= assignment.novel_ids

    def test_known_structures_stay_in_train(self):
        spectra, _ = toy_dataset(n_structures=6, spectra_per=3)
        assignment = make_split(spectra, n_novel=0, n_known=6, seed=2)
        remaining = {}
        for s in spectra:
            if s.id in assignment.train_ids:
                remaining[s.structure_id] = remaining.get(s.structure_id, 0) + 1
        for s in spectra:
            if s.id in assignment.known_ids:
                assert remaining.get(s.structure_id, 0) >= 1

    def test_unlabeled_spectra_always_train(self):
        spectra, _ = toy_dataset(n_structures=4, spectra_per=3)
        rng = np.random.default_rng(0)
        anon = toy_spectrum("anon", None, rng)
        assignment = make_split(spectra + [anon], n_novel=1, n_known=2, seed=0)
        assert "anon" in assignment.train_ids

    def test_same_seed_same_split(self):
        spectra, _ = toy_dataset(n_structures=10, spectra_per=4)
        a = make_split(spectra, n_novel=2, n_known=5, seed=9)
        b = make_split(spectra, n_novel=2, n_known=5, seed=9)
        assert a.novel_ids == b.novel_ids and a.known_ids == b.known_ids
        c = make_split(spectra, n_novel=2, n_known=5, seed=10)
        assert a.novel_ids != c.novel_ids or a.known_ids != c.known_ids

    def test_impossible_requests_raise(self):
        spectra, _ = toy_dataset(n_structures=3, spectra_per=2)
        with pytest.raises(DataError):
            make_split(spectra, n_novel=4, n_known=0, seed=0)
        with pytest.raises(DataError):
            # Each 2-spectrum structure can spare exactly one known spectrum.
            make_split(spectra, n_novel=0, n_known=4, seed=0)

    def test_manifest_round_trip(self, tmp_path):
        spectra, _ = toy_dataset(n_structures=6, spectra_per=3)
        assignment = make_split(spectra, n_novel=1, n_known=3, seed=5)
        path = tmp_path / "manifest.tsv"
        write_manifest(path, spectra, assignment)
        again = read_manifest(path, spectra)
        assert again.train_ids == assignment.train_ids
        assert again.known_ids == assignment.known_ids
        assert again.novel_ids == assignment.novel_ids
        assert again.novel_structures == assignment.novel_structures

    def test_manifest_rejects_unknown_spectra(self, tmp_path):
        spectra, _ = toy_dataset(n_structures=4, spectra_per=3)
        assignment = make_split(spectra, n_novel=1, n_known=2, seed=5)
        path = tmp_path / "manifest.tsv"
        write_manifest(path, spectra, assignment)
        with pytest.raises(DataError):
            read_manifest(path, spectra[:-1])
