"""Assembly of moment relaxations for polynomial optimization.

Every hierarchy member is assembled as one generic moment SDP

    minimize   <theta, y>
    s.t.       L_p[y] = 0       for equality polynomials p,
               L_q[y] >= 0      (psd) for inequality polynomials q,
               M_k[y] >= 0,
               <nu, y> = 1,

where the objective/normalizer pair (theta, nu) and the variable space
depend on the hierarchy kind:

  homogenized       theta = f~,                nu = x0^d        (x0 >= 0 kept)
  homogenized_even  same, without x0 >= 0      (even degrees only)
  denominator       theta = (1+|x|^2)^m f,     nu = (1+|x|^2)^m, original vars
  power_x0(l)       theta = x0^(2l) f~,        nu = x0^(2l+d)
  standard          theta = f,                 nu = 1

Equality polynomials are encoded as scalar rows <p * x^g, y> = 0 over all
monomials x^g with deg(p * x^g) <= 2k, which spans the same truncated ideal
as the matrix condition L_p[y] = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse

from .poly import (Polynomial, PopProblem, basis_index, monomial_basis,
                   sphere_equation, sum_of_squares_norm)
from . import sdp


class OrderTooSmallError(ValueError):
    """The relaxation order cannot accommodate some constraint degree."""


class InfeasibleRelaxationError(ValueError):
    """The linear moment constraints are inconsistent (no normalized y)."""


@dataclass(frozen=True)
class HierarchyKind:
    """Identifier of one member family of the relaxation hierarchy."""

    name: str
    power: int = 0  # x0 exponent parameter, used by power_x0 only

    def __str__(self):
        if self.name == "power_x0":
            return f"power_x0({self.power})"
        return self.name


HOMOGENIZED = HierarchyKind("homogenized")
HOMOGENIZED_EVEN = HierarchyKind("homogenized_even")
DENOMINATOR = HierarchyKind("denominator")
STANDARD = HierarchyKind("standard")


def power_x0(ell: int) -> HierarchyKind:
    if ell < 0:
        raise ValueError("power must be nonnegative")
    return HierarchyKind("power_x0", ell)


@dataclass(frozen=True)
class HomogenizedProblem:
    """Problem data lifted to the unit sphere in (x0, x) coordinates.

    ``base`` lives in nvars+1 variables with x0 first.  Its equalities end
    with the sphere equation |x~|^2 - 1; when ``includes_x0_constraint`` the
    inequalities end with the polynomial x0.
    """

    base: PopProblem
    objective_degree: int
    includes_x0_constraint: bool


def build_homogenized(prob: PopProblem, even_variant: bool = False) -> HomogenizedProblem:
    """Homogenize all problem data and append the sphere (and x0) constraints."""
    if even_variant:
        bad = []
        if prob.objective.degree() % 2 == 1:
            bad.append("objective")
        bad += [f"inequality {j}" for j, c in enumerate(prob.inequalities)
                if c.degree() % 2 == 1]
        if bad:
            raise ValueError(
                "even variant requires even degrees for the objective and all "
                "inequalities; odd: " + ", ".join(bad))
    n1 = prob.nvars + 1
    d = prob.objective.degree()
    eqs = [c.homogenize() for c in prob.equalities]
    eqs.append(sphere_equation(n1))
    ineqs = [c.homogenize() for c in prob.inequalities]
    if not even_variant:
        ineqs.append(Polynomial.variable(n1, 0))
    base = PopProblem(n1, prob.objective.homogenize(), tuple(eqs), tuple(ineqs))
    return HomogenizedProblem(base, d, not even_variant)


@dataclass
class Pencil:
    """Symmetric matrix pencil y -> mat(coeffs @ y) of a localizing matrix."""

    label: str
    poly: Polynomial
    basis: tuple  # monomials indexing rows/columns
    size: int
    coeffs: scipy.sparse.csr_matrix  # (size*size, tms_dim)

    def evaluate(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(self.coeffs @ y).reshape(self.size, self.size)


def localizing_pencil(p: Polynomial, k: int, label: str = "") -> Pencil:
    """Pencil of the localizing matrix of p at order k: entry (a, b) is the
    functional y -> sum_g p_g y_{g + a + b} over basis monomials of degree
    <= k - ceil(deg(p)/2).  p = 1 yields the moment matrix."""
    deg = p.degree()
    if 2 * k < deg:
        raise OrderTooSmallError(f"order {k} too small for degree-{deg} polynomial")
    t = k - math.ceil(deg / 2)
    rows_basis = monomial_basis(p.nvars, t)
    idx = basis_index(p.nvars, 2 * k)
    s = len(rows_basis)
    data, ri, ci = [], [], []
    for i, a in enumerate(rows_basis):
        for j, b in enumerate(rows_basis):
            ab = tuple(x + y for x, y in zip(a, b))
            for g, c in p.terms.items():
                ri.append(i * s + j)
                ci.append(idx[tuple(x + y for x, y in zip(ab, g))])
                data.append(c)
    coeffs = scipy.sparse.csr_matrix(
        (data, (ri, ci)), shape=(s * s, len(idx)))
    return Pencil(label or f"loc[{p.to_string()}]", p, rows_basis, s, coeffs)


@dataclass
class MomentRelaxation:
    """One assembled moment SDP instance of the hierarchy."""

    kind: HierarchyKind
    nvars: int          # variables of the tms space (n or n+1)
    order: int
    tms_dim: int
    basis: tuple
    objective_vector: np.ndarray
    objective_poly: Polynomial
    normalizer_vector: np.ndarray
    normalizer_poly: Polynomial
    normalizer_power: int | None   # x0 exponent of nu for homogenized kinds
    eq_A: np.ndarray               # rows: <p x^g, y> = 0, then <nu, y> = 1
    eq_b: np.ndarray
    eq_row_meta: list              # ("eq", i, gamma) or ("normalizer", None, None)
    psd_pencils: list              # moment pencil first
    source: PopProblem
    hom: HomogenizedProblem | None = None

    @property
    def moment_pencil(self) -> Pencil:
        return self.psd_pencils[0]


def _relaxed_space(kind: HierarchyKind, prob: PopProblem, k: int):
    """Resolve (theta, nu, equalities, inequalities, nvars, hom, nu_power)."""
    d = prob.objective.degree()
    if kind.name in ("homogenized", "homogenized_even", "power_x0"):
        hp = build_homogenized(prob, even_variant=(kind.name == "homogenized_even"))
        n1 = hp.base.nvars
        theta = hp.base.objective
        nu_pow = d
        if kind.name == "power_x0":
            ell = kind.power
            theta = theta * Polynomial.monomial(n1, (2 * ell,) + (0,) * (n1 - 1))
            nu_pow = 2 * ell + d
        nu = Polynomial.monomial(n1, (nu_pow,) + (0,) * (n1 - 1))
        return theta, nu, hp.base.equalities, hp.base.inequalities, n1, hp, nu_pow
    if kind.name == "denominator":
        m = k - math.ceil(d / 2)
        if m < 0:
            raise OrderTooSmallError(f"order {k} below ceil(deg(f)/2)")
        den = (1.0 + sum_of_squares_norm(prob.nvars)) ** m
        return (den * prob.objective, den, prob.equalities, prob.inequalities,
                prob.nvars, None, None)
    if kind.name == "standard":
        one = Polynomial.constant(prob.nvars, 1.0)
        return (prob.objective, one, prob.equalities, prob.inequalities,
                prob.nvars, None, None)
    raise ValueError(f"unknown hierarchy kind {kind.name!r}")


def assemble(kind: HierarchyKind, prob: PopProblem, k: int) -> MomentRelaxation:
    """Assemble the order-k moment relaxation of the given kind."""
    theta, nu, eqs, ineqs, nv, hom, nu_pow = _relaxed_space(kind, prob, k)
    two_k = 2 * k
    for p in (theta, nu, *eqs, *ineqs):
        if p.degree() > two_k:
            raise OrderTooSmallError(
                f"order {k} too small: degree {p.degree()} exceeds 2k = {two_k}")
    basis = monomial_basis(nv, two_k)
    idx = basis_index(nv, two_k)
    dim = len(basis)

    pencils = [localizing_pencil(Polynomial.constant(nv, 1.0), k, label="moment")]
    for j, q in enumerate(ineqs):
        pencils.append(localizing_pencil(q, k, label=f"ineq{j}"))

    rows, meta = [], []
    for i, p in enumerate(eqs):
        if p.is_zero:
            continue
        shifts = monomial_basis(nv, two_k - p.degree())
        pmonos = list(p.terms.items())
        for g in shifts:
            row = np.zeros(dim)
            for mono, c in pmonos:
                row[idx[tuple(a + b for a, b in zip(mono, g))]] += c
            rows.append(row)
            meta.append(("eq", i, g))
    nu_vec = nu.coefficient_vector(two_k)
    rows.append(nu_vec)
    meta.append(("normalizer", None, None))
    eq_A = np.array(rows)
    eq_b = np.zeros(len(rows))
    eq_b[-1] = 1.0

    return MomentRelaxation(
        kind=kind, nvars=nv, order=k, tms_dim=dim, basis=basis,
        objective_vector=theta.coefficient_vector(two_k), objective_poly=theta,
        normalizer_vector=nu_vec, normalizer_poly=nu, normalizer_power=nu_pow,
        eq_A=eq_A, eq_b=eq_b, eq_row_meta=meta, psd_pencils=pencils,
        source=prob, hom=hom)


def _independent_rows(rows: np.ndarray, tol: float) -> list:
    """Indices of a maximal independent row subset (rank-revealing QR)."""
    if rows.shape[0] == 0:
        return []
    r = scipy.linalg.qr(rows.T, mode="r", pivoting=True)
    diag = np.abs(np.diag(r[0]))
    piv = r[1]
    if diag.size == 0 or diag[0] == 0.0:
        return []
    rank = int(np.sum(diag > tol * diag[0]))
    return sorted(piv[:rank].tolist())


def to_sdp_instance(rel: MomentRelaxation, row_tol: float = 1e-10):
    """Preprocess the relaxation into a full-row-rank SDP instance.

    Redundant equality rows are removed by rank-revealing QR and the kept
    rows (normalizer included) are scaled to unit norm.  Returns
    ``(instance, kept_row_indices)``.
    """
    norms = np.linalg.norm(rel.eq_A, axis=1)
    if norms[-1] == 0.0:
        raise InfeasibleRelaxationError("normalizer polynomial is zero")
    if np.any(norms == 0.0):
        raise ValueError("zero equality row in the relaxation")
    scaled = rel.eq_A / norms[:, None]
    data = scaled[:-1]
    kept = _independent_rows(data, row_tol)
    nu_row = scaled[-1]
    if kept:
        resid = nu_row - data[kept].T @ np.linalg.lstsq(
            data[kept].T, nu_row, rcond=None)[0]
        if np.linalg.norm(resid) <= row_tol:
            raise InfeasibleRelaxationError(
                "normalizer lies in the span of the equality rows; "
                "<nu, y> = 1 is inconsistent with the moment equalities")
    kept_all = kept + [rel.eq_A.shape[0] - 1]
    A = scaled[kept_all]
    b = rel.eq_b[kept_all] / norms[kept_all]
    pencils = [sdp.SdpPencil(label=p.label, size=p.size, coeffs=p.coeffs)
               for p in rel.psd_pencils]
    inst = sdp.SdpInstance(c=rel.objective_vector.copy(), A=A, b=b,
                           pencils=pencils)
    return inst, kept_all


@dataclass
class SosCertificate:
    """Weighted-SOS representation recovered from moment duality:

        theta - gamma * nu = sum_j sigma_j * q_j + sum_p phi_p * p

    with sigma_j = [x]^T G_j [x] for psd Gram matrices G_j.  ``residual`` is
    the max-norm coefficient defect of this polynomial identity.
    """

    gamma: float
    grams: list            # (label, basis monomials, psd Gram matrix)
    multipliers: dict      # equality index -> Polynomial phi_p
    residual: float


def sos_certificate_from_dual(rel: MomentRelaxation, sol) -> SosCertificate:
    """Reconstruct the SOS-side certificate from an SDP solution's duals."""
    if sol.pencil_duals is None:
        raise ValueError(f"no dual information available (status {sol.status})")
    _, kept = to_sdp_instance(rel)
    norms = np.linalg.norm(rel.eq_A, axis=1)

    resid = rel.objective_vector.copy()
    grams = []
    for pen, Z in zip(rel.psd_pencils, sol.pencil_duals):
        resid -= pen.coeffs.T @ Z.reshape(-1)
        grams.append((pen.label, pen.basis, Z))

    gamma = 0.0
    multipliers = {}
    for dual, row_id in zip(sol.eq_duals, kept):
        coef = dual / norms[row_id]  # dual of the unit-scaled row
        kind_, i, g = rel.eq_row_meta[row_id]
        resid -= coef * rel.eq_A[row_id]
        if kind_ == "normalizer":
            gamma = coef
        else:
            phi = multipliers.get(i, Polynomial.zero(rel.nvars))
            multipliers[i] = phi + Polynomial.monomial(rel.nvars, g, coef)
    return SosCertificate(gamma=gamma, grams=grams, multipliers=multipliers,
                          residual=float(np.max(np.abs(resid))))
