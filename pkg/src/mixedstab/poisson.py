"""Mixed source problem and convergence study.

Solves M_V u + B^T p = 0, B u = G via the pressure Schur complement
S = B M_V^{-1} B^T, and measures errors of (u_h, p_h) against high-order
interpolants of the closed-form solution

    p(x, y) = sin(2 pi x) sin(2 pi y),   u = grad p,   g = div u.

Source and reference fields are replaced by degree-6 continuous Lagrange
interpolants before computing loads and errors, so the reported numbers
are reproducible run to run; all integrals use degree-14 quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .assembly import (assemble, build_spaces, cell_geometry,
                       scalar_lagrange_space, vector_lagrange_space,
                       pressure_mass_solve)
from .element import quadrature
from .errors import NumericalError, SpuriousModeError
from .mesh import Family, generate

INTERPOLANT_DEGREE = 6
ERROR_QUAD_DEGREE = 14
DENSE_SCHUR_LIMIT = 3200  # dim Q_h above which the Schur solve goes iterative


@dataclass
class FieldCoefficients:
    """Coefficients of a finite element field, one real per DOF."""

    space: object
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.space.ndofs,):
            raise ValueError(
                f"coefficient vector has length {self.values.shape}, "
                f"space has {self.space.ndofs} dofs")


def interpolate(f, space):
    """Nodal interpolant of a callable field.

    ``f`` maps an (npts, 2) array of coordinates to values: shape (npts,)
    for a scalar space, (npts, 2) for a vector one.  Vector components
    interleave in the coefficient vector, matching the DOF layout.
    """
    pts = space.interpolation_points
    vals = np.asarray(f(pts), dtype=float)
    if space.is_vector:
        if vals.shape != (len(pts), 2):
            raise ValueError(f"vector field returned shape {vals.shape}")
        coeffs = vals.reshape(-1)
    else:
        if vals.shape != (len(pts),):
            raise ValueError(f"scalar field returned shape {vals.shape}")
        coeffs = vals
    return FieldCoefficients(space, coeffs)


def manufactured_solution():
    """Closed-form pressure, velocity and source on the unit square."""
    two_pi = 2.0 * np.pi

    def p(pts):
        return np.sin(two_pi * pts[:, 0]) * np.sin(two_pi * pts[:, 1])

    def u(pts):
        sx, cx = np.sin(two_pi * pts[:, 0]), np.cos(two_pi * pts[:, 0])
        sy, cy = np.sin(two_pi * pts[:, 1]), np.cos(two_pi * pts[:, 1])
        return two_pi * np.stack([cx * sy, sx * cy], axis=-1)

    def g(pts):
        return -2.0 * two_pi ** 2 * p(pts)

    return p, u, g


def _cell_coefficients(field):
    """Per-cell coefficient table, shape (ncells, local dofs)."""
    return field.values[field.space.cell_dofs]


def _physical_points(mesh, ref_points):
    """Map reference points into every cell: (ncells, npts, 2)."""
    a = mesh.vertices[mesh.cells[:, 0]]
    b = mesh.vertices[mesh.cells[:, 1]]
    c = mesh.vertices[mesh.cells[:, 2]]
    x, y = ref_points[:, 0], ref_points[:, 1]
    return (a[:, None, :]
            + x[None, :, None] * (b - a)[:, None, :]
            + y[None, :, None] * (c - a)[:, None, :])


def eval_scalar(field, ref_points):
    """Field values at reference points in every cell: (ncells, npts)."""
    tab = field.space.element.tabulate(ref_points)
    return np.einsum("qk,ck->cq", tab, _cell_coefficients(field))


def eval_vector(field, ref_points):
    """Vector field values at reference points: (ncells, npts, 2)."""
    tab = field.space.element.tabulate(ref_points)  # scalar basis
    coef = _cell_coefficients(field)
    ncells, nloc = coef.shape
    comp = coef.reshape(ncells, nloc // 2, 2)
    return np.einsum("qk,ckd->cqd", tab, comp)


def eval_divergence(field, ref_points):
    """Divergence of a vector field at reference points: (ncells, npts)."""
    dtab = field.space.element.tabulate_gradients(ref_points)  # (nq, nb, 2)
    _, inv_jac_t, _ = cell_geometry(field.space.mesh)
    grad = np.einsum("cde,qke->cqkd", inv_jac_t, dtab)  # physical gradients
    coef = _cell_coefficients(field)
    comp = coef.reshape(len(coef), -1, 2)
    # div = d(u_x)/dx + d(u_y)/dy
    return np.einsum("cqkd,ckd->cq", grad, comp)


def load_vector(g_field, q_space, quad_degree=ERROR_QUAD_DEGREE):
    """Right-hand side <g, psi> against the pressure basis."""
    if g_field.space.mesh is not q_space.mesh:
        raise ValueError("source field and pressure space use different meshes")
    rule = quadrature(quad_degree)
    _, _, det = cell_geometry(q_space.mesh)
    gvals = eval_scalar(g_field, rule.points)
    psi = q_space.element.tabulate(rule.points)
    cellwise = np.einsum("q,cq,qk->ck", rule.weights, gvals, psi) * det[:, None]
    out = np.zeros(q_space.ndofs)
    np.add.at(out, q_space.cell_dofs, cellwise)
    return out


def solve_mixed(forms, g_field, quad_degree=ERROR_QUAD_DEGREE, rtol=1e-12):
    """Solve the mixed source problem for (u_h, p_h).

    Eliminates the velocity with a sparse factorization of M_V and solves
    the pressure Schur system S p = -G, S = B M_V^{-1} B^T — densely for
    moderate pressure counts, by preconditioned CG (exact block pressure
    mass preconditioner) beyond DENSE_SCHUR_LIMIT.  The assembled-system
    residual is checked to 1e-10 relative.
    """
    rhs = load_vector(g_field, forms.Q_h, quad_degree=quad_degree)
    m_v = forms.M_V.tocsc()
    b = forms.B.tocsr()
    solve_mv = spla.splu(m_v).solve
    n_q = forms.Q_h.ndofs

    if n_q <= DENSE_SCHUR_LIMIT:
        x = solve_mv(b.T.toarray())           # M_V^{-1} B^T
        s = b @ x
        try:
            chol = sla.cho_factor(s)
        except sla.LinAlgError as exc:
            raise SpuriousModeError(
                "pressure Schur complement is singular (spurious pressure "
                "modes); project them out and solve the reduced problem "
                "instead") from exc
        p = sla.cho_solve(chol, -rhs)
        u = -(x @ p)
    else:
        def apply_s(q):
            return b @ solve_mv(b.T @ q)

        s_op = spla.LinearOperator((n_q, n_q), matvec=apply_s)
        precond = spla.LinearOperator(
            (n_q, n_q), matvec=lambda q: pressure_mass_solve(forms, q))
        p, info = spla.cg(s_op, -rhs, rtol=rtol, atol=0.0, M=precond,
                          maxiter=10 * n_q)
        if info != 0:
            raise NumericalError(
                f"Schur-complement CG did not converge (info={info}); "
                "possible spurious pressure modes")
        u = -solve_mv(b.T @ p)

    scale = max(np.linalg.norm(rhs), 1.0)
    res_u = np.linalg.norm(forms.M_V @ u + b.T @ p)
    res_p = np.linalg.norm(b @ u - rhs)
    if max(res_u, res_p) > 1e-10 * scale:
        raise NumericalError(
            f"mixed solve residual too large: |M_V u + B^T p| = {res_u:.2e}, "
            f"|B u - G| = {res_p:.2e} against scale {scale:.2e}")
    return (FieldCoefficients(forms.V_h, u), FieldCoefficients(forms.Q_h, p))


@dataclass
class ErrorNorms:
    p_l2: float
    u_div: float    # divergence seminorm
    u_l2: float
    u_hdiv: float


def error_norms(u_h, p_h, u_ref, p_ref, quad_degree=ERROR_QUAD_DEGREE):
    """Errors of (u_h, p_h) against reference fields on the same mesh."""
    mesh = u_h.space.mesh
    for other in (p_h, u_ref, p_ref):
        if other.space.mesh is not mesh:
            raise ValueError("error_norms requires fields on one mesh")
    rule = quadrature(quad_degree)
    _, _, det = cell_geometry(mesh)

    def integral(cellwise_sq):
        return float(np.einsum("cq,q,c->", cellwise_sq, rule.weights, det))

    dp = eval_scalar(p_h, rule.points) - eval_scalar(p_ref, rule.points)
    du = eval_vector(u_h, rule.points) - eval_vector(u_ref, rule.points)
    ddiv = eval_divergence(u_h, rule.points) - eval_divergence(u_ref, rule.points)
    p_sq = integral(dp ** 2)
    u_sq = integral(np.sum(du ** 2, axis=-1))
    div_sq = integral(ddiv ** 2)
    return ErrorNorms(
        p_l2=np.sqrt(p_sq),
        u_div=np.sqrt(div_sq),
        u_l2=np.sqrt(u_sq),
        u_hdiv=np.sqrt(u_sq + div_sq),
    )


NORM_KEYS = ("p_l2", "u_div", "u_l2", "u_hdiv")


@dataclass
class ConvergenceReport:
    """Errors and observed rates of the source problem over a mesh sequence."""

    r: int
    family: str
    n_values: list
    errors: dict       # norm key -> list of errors, one per n
    rates: dict        # norm key -> list (len n-1), None unless n doubles
    normalized: dict   # norm key -> errors / errors[0]

    CSV_HEADER = "r,n,err_p_L2,err_u_div,err_u_L2,err_u_Hdiv,rate_p,rate_u_div,rate_u_L2"

    def csv_rows(self):
        rows = []
        for i, n in enumerate(self.n_values):
            cells = [str(self.r), str(n)]
            cells += [f"{self.errors[k][i]:.6e}" for k in NORM_KEYS]
            for k in ("p_l2", "u_div", "u_l2"):
                rate = None if i == 0 else self.rates[k][i - 1]
                cells.append("" if rate is None else f"{rate:.6f}")
            rows.append(",".join(cells))
        return rows

    def to_csv(self):
        return "\n".join([self.CSV_HEADER] + self.csv_rows()) + "\n"


def default_n_values(r):
    return [4, 8, 16, 32] if r <= 2 else [4, 8, 16]


def convergence_study(r, n_values=None, family=Family.DIAGONAL):
    """Solve the source problem over a mesh sequence and report rates.

    Rates are log2 ratios of consecutive errors, reported only when the
    next n doubles the previous one; normalized errors divide by the
    first-mesh error.
    """
    if n_values is None:
        n_values = default_n_values(r)
    n_values = list(n_values)
    p_exact, u_exact, g_exact = manufactured_solution()

    errors = {k: [] for k in NORM_KEYS}
    for n in n_values:
        mesh = generate(family, n)
        v_h, q_h = build_spaces(mesh, r)
        forms = assemble(v_h, q_h)
        p6_scalar = scalar_lagrange_space(mesh, INTERPOLANT_DEGREE)
        p6_vector = vector_lagrange_space(mesh, INTERPOLANT_DEGREE)
        g_h = interpolate(g_exact, p6_scalar)
        u_h, p_h = solve_mixed(forms, g_h)
        norms = error_norms(u_h, p_h,
                            interpolate(u_exact, p6_vector),
                            interpolate(p_exact, p6_scalar))
        for k in NORM_KEYS:
            errors[k].append(getattr(norms, k))

    rates = {k: [] for k in NORM_KEYS}
    for i in range(1, len(n_values)):
        doubled = n_values[i] == 2 * n_values[i - 1]
        for k in NORM_KEYS:
            if doubled and errors[k][i] > 0:
                rates[k].append(float(np.log2(errors[k][i - 1] / errors[k][i])))
            else:
                rates[k].append(None)
    normalized = {k: [e / errors[k][0] for e in errors[k]] for k in NORM_KEYS}
    return ConvergenceReport(r=r, family=family.value, n_values=n_values,
                             errors=errors, rates=rates, normalized=normalized)
