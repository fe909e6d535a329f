"""Shared synthetic-data builders and the acceptance summary hook."""

import numpy as np
import pytest

from mzembed.data import MoleculeRecord, Peak, Spectrum
from mzembed.embed import normalize_intensities


def toy_molecule(structure_id, rng, n_bits=64, density=0.3):
    fingerprint = (rng.random(n_bits) < density).astype(np.uint8)
    properties = rng.normal(0.0, 2.0, 10)
    return MoleculeRecord(
        structure_id=structure_id, fingerprint=fingerprint, properties=properties
    )


def toy_spectrum(
    spectrum_id,
    structure_id,
    rng,
    n_peaks=(6, 12),
    mz_range=(80.0, 900.0),
    normalize=True,
    mz_decimals=4,
):
    n = int(rng.integers(*n_peaks))
    mz = np.sort(rng.uniform(*mz_range, n))
    mz = np.round(mz, mz_decimals)
    intensity = rng.uniform(0.05, 1.0, n)
    fragments = tuple(Peak(float(m), float(v)) for m, v in zip(mz, intensity))
    spectrum = Spectrum(
        id=spectrum_id,
        precursor=Peak(float(np.round(rng.uniform(900.0, 1100.0), mz_decimals)), 1.0),
        fragments=fragments,
        structure_id=structure_id,
        mz_decimals=(mz_decimals,) * (n + 1),
    )
    return normalize_intensities(spectrum) if normalize else spectrum


def toy_dataset(n_structures=5, spectra_per=4, seed=42, **spectrum_kw):
    """Labeled spectra plus their molecule records."""
    rng = np.random.default_rng(seed)
    molecules = {
        f"m{i}": toy_molecule(f"m{i}", rng) for i in range(n_structures)
    }
    spectra = [
        toy_spectrum(f"s{i}_{j}", f"m{i}", rng, **spectrum_kw)
        for i in range(n_structures)
        for j in range(spectra_per)
    ]
    return spectra, molecules


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# ------------------------------------------------------------------
# Acceptance reporting: one pass/fail line per numbered criterion.
# ------------------------------------------------------------------

_ACCEPTANCE_RESULTS = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1].split("[")[0]
    if report.when == "call":
        _ACCEPTANCE_RESULTS[name] = report.outcome
    elif report.when == "setup" and report.outcome != "passed":
        _ACCEPTANCE_RESULTS[name] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE_RESULTS):
        number = int(name.split("_")[2])
        outcome = _ACCEPTANCE_RESULTS[name]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        label = name.split("_", 3)[3].replace("_", " ")
        terminalreporter.write_line(f"criterion {number:2d} [{verdict}] {label}")
