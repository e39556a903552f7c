import numpy as np
import pytest

from mixedstab.errors import NumericalError
from mixedstab.mesh import Family, generate
from mixedstab.stability import (DEFAULT_THRESHOLD, StabilityReport,
                                 babuska_infsup, brezzi_coercivity,
                                 brezzi_infsup, classify_spectrum,
                                 divdiv_spectrum, infsup_to_laplace,
                                 laplace_eigenvalue, reproduce_table,
                                 run_case, stokes_infsup, threshold_sweep)

TWO_PI_SQ = 2 * np.pi ** 2


def test_classify_spectrum_counts_and_clips():
    values = np.array([-1e-15, 2e-9, 0.25, 0.81])
    dim, beta, reduced, warning = classify_spectrum(values, 1e-4)
    assert dim == 2
    assert beta == 0.0
    assert reduced == 0.5
    assert warning is None


def test_classify_spectrum_warns_on_cluster():
    values = np.array([9.9e-5, 1.01e-4, 0.5])
    dim, _, _, warning = classify_spectrum(values, 1e-4)
    assert dim == 1
    assert warning is not None and "cluster" in warning


def test_classify_spectrum_rejects_all_below():
    with pytest.raises(NumericalError):
        classify_spectrum(np.array([1e-9, 1e-8]), 1e-4)


def test_brezzi_infsup_diagonal_anchor(forms_for):
    res = brezzi_infsup(forms_for(Family.DIAGONAL, 4, 1))
    assert res.dim_spurious == 0
    assert abs(res.beta - 0.847171) < 5e-5
    assert res.beta == res.beta_reduced
    # eigenvalues live in [0, 1)
    assert res.spectrum.values[0] > 0.5
    assert res.spectrum.values[-1] < 1.0


def test_brezzi_infsup_unionjack_anchor(forms_for):
    res = brezzi_infsup(forms_for(Family.UNIONJACK, 4, 1))
    assert res.dim_spurious == 4
    assert res.beta == 0.0
    assert abs(res.beta_reduced - 0.976985) < 5e-5


def test_coercivity_is_one_with_divergence_free_kernel(forms_for):
    forms = forms_for(Family.DIAGONAL, 4, 1)
    res = brezzi_coercivity(forms)
    assert res.kernel_dim == forms.V_h.ndofs - forms.Q_h.ndofs  # 50 - 32
    assert abs(res.alpha - 1.0) < 1e-9
    # kernel fields are exactly divergence-free
    assert np.max(np.abs(forms.B @ res.kernel)) < 1e-10


def test_babuska_positive_and_below_brezzi(forms_for):
    forms = forms_for(Family.DIAGONAL, 4, 1)
    beta = brezzi_infsup(forms).beta
    res = babuska_infsup(forms)
    assert res.gamma > 0.01
    assert res.gamma <= beta + 1e-12


def test_babuska_zero_with_spurious_modes(forms_for):
    forms = forms_for(Family.UNIONJACK, 4, 1)
    dim = brezzi_infsup(forms).dim_spurious
    res = babuska_infsup(forms, dim_spurious=dim)
    assert res.gamma == 0.0
    assert "spurious" in res.note


def test_stokes_below_divergence_norm_constant(forms_for):
    forms = forms_for(Family.DIAGONAL, 4, 2)
    stokes = stokes_infsup(forms)
    brezzi = brezzi_infsup(forms)
    assert stokes.beta <= brezzi.beta
    assert stokes.constant_mode > 0.5  # constant pressure is not degenerate
    assert stokes.dim_spurious == 0


def test_laplace_eigenvalue_stable_pair(forms_for):
    res = laplace_eigenvalue(forms_for(Family.DIAGONAL, 8, 2))
    assert abs(res.mu - TWO_PI_SQ) < 5e-3


def test_eigenvalue_map_and_divdiv_route(forms_for):
    forms = forms_for(Family.DIAGONAL, 4, 1)
    lam = brezzi_infsup(forms).spectrum.values
    mu = laplace_eigenvalue(forms).spectrum.values
    mapped = infsup_to_laplace(lam)
    assert np.max(np.abs(mu - mapped) / (1.0 + np.abs(mu))) < 1e-10
    dd = divdiv_spectrum(forms).values
    positive = np.sort(dd[dd > 1e-10])
    assert len(positive) == len(mu)
    assert np.max(np.abs(positive - np.sort(mu))) < 1e-8


def test_threshold_sweep_monotone(forms_for):
    forms = forms_for(Family.UNIONJACK, 6, 1)
    rows = threshold_sweep(forms, (1e-2, 1e-4, 1e-6, 1e-8))
    dims = [dim for _, dim, _ in rows]
    assert dims == sorted(dims, reverse=True)
    assert dims[1] == 12  # n(n-2)/2 at the default threshold


def test_run_case_report_fields(forms_for):
    report = run_case(Family.UNIONJACK, 4, 1,
                      forms=forms_for(Family.UNIONJACK, 4, 1),
                      with_alpha=True, with_gamma=True, with_stokes=True)
    assert report.family == "unionjack"
    assert report.sigma == 4 and report.dim_spurious == 4
    assert report.gamma == 0.0
    assert abs(report.alpha - 1.0) < 1e-9
    assert report.beta_h1_reduced <= report.beta_div_reduced
    row = report.csv_row()
    assert len(row.split(",")) == len(StabilityReport.CSV_HEADER.split(","))


def test_run_case_with_imported_mesh():
    from mixedstab.mesh import export_mesh, import_mesh

    mesh = import_mesh(export_mesh(generate(Family.CRISSCROSS, 4)))
    report = run_case(mesh=mesh, r=1)
    assert report.family == "imported"
    assert report.n is None
    assert report.sigma == 16 and report.dim_spurious == 16


def test_reproduce_table_t2_small():
    table = reproduce_table("T2", n_values=[4, 6])
    assert table.header[0] == "n"
    got = {row[0]: row for row in table.rows}
    assert abs(got[4][1] - 0.847171) < 5e-5
    assert abs(got[6][2] - 0.626865) < 5e-5
    assert got[4][4] == 1 and got[6][6] == 12
    text = table.to_csv()
    assert text.splitlines()[1].startswith("4,0.847171")


def test_reproduce_table_t1_structure():
    table = reproduce_table("T1", n_values=[4], r_values=[1])
    assert table.header == ["family", "n", "r", "sigma", "dimN"]
    by_family = {row[0]: row for row in table.rows}
    assert by_family["crisscross"][3] == 16
    assert by_family["crisscross"][4] == 16
    assert by_family["diagonal"][3] == 0


def test_reproduce_table_parallel_matches_serial():
    serial = reproduce_table("T2", n_values=[4, 6], jobs=1)
    parallel = reproduce_table("T2", n_values=[4, 6], jobs=2)
    assert serial.to_csv() == parallel.to_csv()


def test_reproduce_table_rejects_unknown():
    with pytest.raises(ValueError):
        reproduce_table("T9")


def test_default_threshold_value():
    assert DEFAULT_THRESHOLD == 1e-4
