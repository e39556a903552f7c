"""Stability constants of the mixed discretization.

All constants come from small dense generalized eigenproblems:

* Brezzi inf-sup: B A_div^{-1} B^T p = lambda M_Q p; beta = sqrt(min lambda).
  Eigenvalues below the zero threshold count the spurious pressure modes
  N_h = {q : <div v, q> = 0 for all v}; the reduced constant skips them.
* Brezzi coercivity: the form <u, v> against the div-norm on the discrete
  divergence-free subspace (nullspace basis of B).
* Babuska: smallest-modulus eigenvalue of the full indefinite pencil.
* Stokes inf-sup: same Schur construction with the H1 matrix A_1.
* Mixed Laplace eigenvalue: B M_V^{-1} B^T p = mu M_Q p; the continuous
  problem's smallest eigenvalue on the unit square is 2 pi^2.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .assembly import assemble, build_spaces
from .eigensolve import Spectrum, schur_complement, sym_generalized_eig
from .errors import EigensolveError, NumericalError
from .mesh import Family, generate, singular_vertices

DEFAULT_THRESHOLD = 1e-4
SWEEP_THRESHOLDS = (1e-3, 1e-4, 1e-5, 1e-6)


def classify_spectrum(values, threshold):
    """Split a nonnegative pencil spectrum at the zero threshold.

    Returns
    -------
    (dim_spurious, beta, beta_reduced, warning)
        beta = sqrt(clip(min eigenvalue, 0)); beta_reduced skips the
        eigenvalues below the threshold.  warning is set when the
        eigenvalues on either side of the split are less than a decade
        apart, i.e. the threshold sits inside a cluster rather than in a
        clean spectral gap.
    """
    values = np.asarray(values)
    dim = int(np.count_nonzero(values < threshold))
    if dim == len(values):
        raise NumericalError(
            f"all {len(values)} eigenvalues fall below the threshold {threshold}")
    beta = float(np.sqrt(max(values[0], 0.0)))
    beta_reduced = float(np.sqrt(values[dim]))
    warning = None
    if dim > 0 and values[dim] < 10.0 * abs(values[dim - 1]):
        warning = (f"threshold {threshold:g} splits a cluster: eigenvalues "
                   f"{values[dim - 1]:.3e} and {values[dim]:.3e}")
    return dim, beta, beta_reduced, warning


@dataclass
class InfSupResult:
    beta: float
    beta_reduced: float
    dim_spurious: int
    spectrum: Spectrum
    warning: str | None = None


def brezzi_infsup(forms, threshold=DEFAULT_THRESHOLD, vectors=False):
    """Brezzi inf-sup constant in the H(div) norm, with spurious modes."""
    s = schur_complement(forms.B, forms.A_div, label="hdiv")
    spec = sym_generalized_eig(s, forms.M_Q, vectors=vectors, problem="brezzi-infsup")
    spec.threshold = threshold
    dim, beta, beta_reduced, warning = classify_spectrum(spec.values, threshold)
    return InfSupResult(beta, beta_reduced, dim, spec, warning)


@dataclass
class CoercivityResult:
    alpha: float
    kernel_dim: int
    kernel: np.ndarray  # (dim V_h, kernel_dim), orthonormal columns


def brezzi_coercivity(forms, rank_tol=1e-10):
    """Coercivity constant of <u, v> on the discrete divergence-free space.

    An orthonormal nullspace basis Z of B is computed by SVD and the form
    is compared against the div-norm on span(Z); since the divergence of
    the pair's velocity space lies in the pressure space, every kernel
    field is exactly divergence-free and the constant equals one.
    """
    b = forms.B.toarray()
    _, svals, vt = sla.svd(b, full_matrices=True)
    rank = int(np.count_nonzero(svals > rank_tol * max(svals[0], 1.0)))
    z = vt[rank:].T
    if z.shape[1] == 0:
        raise NumericalError("discrete divergence-free space is empty")
    a_z = z.T @ (forms.M_V @ z)
    m_z = z.T @ (forms.A_div @ z)
    spec = sym_generalized_eig(a_z, m_z, problem="brezzi-coercivity")
    alpha = float(np.min(np.abs(spec.values)))
    return CoercivityResult(alpha=alpha, kernel_dim=z.shape[1], kernel=z)


@dataclass
class BabuskaResult:
    gamma: float
    spectrum: Spectrum | None
    note: str | None = None


def babuska_infsup(forms, dim_spurious=None):
    """Babuska constant of the full mixed form on V_h x Q_h.

    Smallest-modulus eigenvalue of the symmetric indefinite pencil with
    the mixed form on the left and the graph norm (div-norm plus pressure
    mass) on the right.  Singular when spurious modes exist: with a known
    positive spurious dimension the constant is reported as exactly zero.
    """
    if dim_spurious is not None and dim_spurious > 0:
        return BabuskaResult(0.0, None,
                             note=f"singular pencil: {dim_spurious} spurious modes")
    m_v = forms.M_V.toarray()
    b = forms.B.toarray()
    n_v, n_q = forms.V_h.ndofs, forms.Q_h.ndofs
    lhs = np.zeros((n_v + n_q, n_v + n_q))
    lhs[:n_v, :n_v] = m_v
    lhs[:n_v, n_v:] = b.T
    lhs[n_v:, :n_v] = b
    rhs = np.zeros_like(lhs)
    rhs[:n_v, :n_v] = forms.A_div.toarray()
    rhs[n_v:, n_v:] = forms.M_Q.toarray()
    spec = sym_generalized_eig(lhs, rhs, problem="babuska")
    gamma = float(np.min(np.abs(spec.values)))
    return BabuskaResult(gamma, spec)


@dataclass
class StokesResult:
    beta: float
    beta_reduced: float
    dim_spurious: int
    constant_mode: float
    spectrum: Spectrum


def stokes_infsup(forms, threshold=DEFAULT_THRESHOLD):
    """Inf-sup constant of the divergence form in the full H1 norm.

    The spectrum is computed without a zero-mean pressure constraint;
    the Rayleigh quotient of the constant pressure is reported separately
    so its position in the spectrum is visible.
    """
    s = schur_complement(forms.B, forms.A_1, label="h1")
    spec = sym_generalized_eig(s, forms.M_Q, problem="stokes-infsup")
    spec.threshold = threshold
    dim, beta, beta_reduced, _ = classify_spectrum(spec.values, threshold)
    ones = np.ones(forms.Q_h.ndofs)
    constant_mode = float((ones @ (s @ ones)) / (ones @ (forms.M_Q @ ones)))
    return StokesResult(beta, beta_reduced, dim, constant_mode, spec)


@dataclass
class LaplaceResult:
    mu: float
    spectrum: Spectrum


def laplace_eigenvalue(forms, threshold=DEFAULT_THRESHOLD):
    """Smallest positive eigenvalue of the mixed Laplace pencil.

    B M_V^{-1} B^T p = mu M_Q p.  The continuous problem's smallest
    eigenvalue on the unit square is 2 pi^2; how close the discrete value
    comes depends on the stability of the pair.
    """
    s = schur_complement(forms.B, forms.M_V, label="laplace")
    spec = sym_generalized_eig(s, forms.M_Q, problem="mixed-laplace")
    spec.threshold = threshold
    mu = spec.smallest_at_least(threshold)
    return LaplaceResult(mu, spec)


def divdiv_spectrum(forms):
    """Eigenvalues of <div u, div v> against the vector mass.

    The positive part of this spectrum coincides with the mixed Laplace
    pencil's positive spectrum (the div-div route to the same operator).
    """
    return sym_generalized_eig(forms.K, forms.M_V, problem="divdiv")


def infsup_to_laplace(lam):
    """Eigenvalue map between the inf-sup and mixed Laplace pencils."""
    lam = np.asarray(lam, dtype=float)
    return lam / (1.0 - lam)


@dataclass
class StabilityReport:
    """One row of the stability study for a (family, n, r) case."""

    family: str
    n: int | None
    r: int
    sigma: int
    dim_spurious: int
    beta_div: float
    beta_div_reduced: float
    threshold: float
    alpha: float | None = None
    gamma: float | None = None
    beta_h1: float | None = None
    beta_h1_reduced: float | None = None
    stokes_constant_mode: float | None = None
    warnings: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    CSV_HEADER = "family,n,r,sigma,dimN,beta_div,beta_div_reduced,alpha,beta_h1,threshold"

    def csv_row(self):
        def num(x):
            return "" if x is None else f"{x:.6f}"

        n = "" if self.n is None else str(self.n)
        return (f"{self.family},{n},{self.r},{self.sigma},{self.dim_spurious},"
                f"{num(self.beta_div)},{num(self.beta_div_reduced)},"
                f"{num(self.alpha)},{num(self.beta_h1)},{self.threshold:g}")


def case_forms(family, n, r, mesh=None):
    """Mesh + spaces + assembled forms for one case."""
    if mesh is None:
        mesh = generate(family, n)
    v_h, q_h = build_spaces(mesh, r)
    return assemble(v_h, q_h)


def run_case(family=None, n=None, r=1, *, mesh=None, threshold=DEFAULT_THRESHOLD,
             with_alpha=False, with_gamma=False, with_stokes=False, forms=None):
    """Full stability study for one case; returns a StabilityReport."""
    timings = {}
    t0 = time.perf_counter()
    if forms is None:
        forms = case_forms(family, n, r, mesh=mesh)
    mesh = forms.mesh
    timings["assemble"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    sigma = singular_vertices(mesh).sigma
    timings["singular_vertices"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    infsup = brezzi_infsup(forms, threshold=threshold)
    timings["brezzi_infsup"] = time.perf_counter() - t0

    report = StabilityReport(
        family=mesh.family.value, n=mesh.n, r=forms.V_h.degree, sigma=sigma,
        dim_spurious=infsup.dim_spurious, beta_div=infsup.beta,
        beta_div_reduced=infsup.beta_reduced, threshold=threshold,
        timings=timings)
    if infsup.warning:
        report.warnings.append(infsup.warning)

    if with_alpha:
        t0 = time.perf_counter()
        report.alpha = brezzi_coercivity(forms).alpha
        timings["coercivity"] = time.perf_counter() - t0
    if with_gamma:
        t0 = time.perf_counter()
        report.gamma = babuska_infsup(forms, dim_spurious=infsup.dim_spurious).gamma
        timings["babuska"] = time.perf_counter() - t0
    if with_stokes:
        t0 = time.perf_counter()
        stokes = stokes_infsup(forms, threshold=threshold)
        report.beta_h1 = stokes.beta
        report.beta_h1_reduced = stokes.beta_reduced
        report.stokes_constant_mode = stokes.constant_mode
        timings["stokes"] = time.perf_counter() - t0
    return report


def threshold_sweep(forms, thresholds=SWEEP_THRESHOLDS):
    """Spurious-mode count and reduced constant per threshold.

    The spectrum is computed once; rows are (threshold, dim_spurious,
    beta_reduced) ordered as given.
    """
    spec = brezzi_infsup(forms, threshold=max(thresholds)).spectrum
    rows = []
    for thr in thresholds:
        dim, _, beta_reduced, _ = classify_spectrum(spec.values, thr)
        rows.append((float(thr), dim, beta_reduced))
    return rows


TABLE_FAMILIES = (Family.DIAGONAL, Family.ZIGZAG, Family.FLIPPED, Family.UNIONJACK)

TABLE_DEFAULTS = {
    "T1": (None, (4, 6, 8)),
    "T2": (1, tuple(range(4, 17, 2))),
    "T3": (2, tuple(range(4, 15, 2))),
    "T4": (3, tuple(range(4, 13, 2))),
}


@dataclass
class TableReport:
    which: str
    r: int | None
    threshold: float
    header: list
    rows: list

    def to_csv(self):
        lines = [",".join(self.header)]
        for row in self.rows:
            cells = []
            for x in row:
                if x is None:
                    cells.append("")
                elif isinstance(x, float):
                    cells.append(f"{x:.6f}")
                else:
                    cells.append(str(x))
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def _table_case(args):
    family, n, r, threshold = args
    return run_case(family, n, r, threshold=threshold)


def reproduce_table(which, n_values=None, r_values=None,
                    threshold=DEFAULT_THRESHOLD, jobs=1):
    """Recompute one of the four golden tables.

    T1 lists sigma and the spurious dimension per (family, n, r); T2, T3
    and T4 list the inf-sup constants of the four diagonal-pattern
    families at r = 1, 2, 3 (reduced constants and mode counts where the
    family has spurious modes).

    Returns
    -------
    TableReport
    """
    which = which.upper()
    if which not in TABLE_DEFAULTS:
        raise ValueError(f"unknown table {which!r} (expected T1..T4)")
    r_default, n_default = TABLE_DEFAULTS[which]
    n_values = list(n_values) if n_values is not None else list(n_default)

    if which == "T1":
        r_list = list(r_values) if r_values is not None else [1, 2, 3]
        cases = [(fam, n, r, threshold)
                 for fam in GENERATED_FAMILIES_T1 for n in n_values for r in r_list]
        reports = _run_cases(cases, jobs)
        rows = [[rep.family, rep.n, rep.r, rep.sigma, rep.dim_spurious]
                for rep in reports]
        return TableReport(which, None, threshold,
                           ["family", "n", "r", "sigma", "dimN"], rows)

    r = r_default
    cases = [(fam, n, r, threshold) for n in n_values for fam in TABLE_FAMILIES]
    reports = _run_cases(cases, jobs)
    by_key = {(rep.family, rep.n): rep for rep in reports}
    rows = []
    for n in n_values:
        diag = by_key[(Family.DIAGONAL.value, n)]
        zig = by_key[(Family.ZIGZAG.value, n)]
        flip = by_key[(Family.FLIPPED.value, n)]
        uj = by_key[(Family.UNIONJACK.value, n)]
        if which == "T2":
            rows.append([n, diag.beta_div, zig.beta_div,
                         flip.beta_div_reduced, flip.dim_spurious,
                         uj.beta_div_reduced, uj.dim_spurious])
        else:
            rows.append([n, diag.beta_div, zig.beta_div, flip.beta_div,
                         uj.beta_div_reduced, uj.dim_spurious])
    if which == "T2":
        header = ["n", "beta_diagonal", "beta_zigzag", "beta_flipped_reduced",
                  "dimN_flipped", "beta_unionjack_reduced", "dimN_unionjack"]
    else:
        header = ["n", "beta_diagonal", "beta_zigzag", "beta_flipped",
                  "beta_unionjack_reduced", "dimN_unionjack"]
    return TableReport(which, r, threshold, header, rows)


GENERATED_FAMILIES_T1 = (Family.DIAGONAL, Family.FLIPPED, Family.ZIGZAG,
                         Family.CRISSCROSS, Family.UNIONJACK)


def _run_cases(cases, jobs):
    if jobs and jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_table_case, cases))
    return [_table_case(c) for c in cases]
