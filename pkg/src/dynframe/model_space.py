"""Model spaces of orbit frames inside ``l2`` of a window, truncated
convolutions and polynomial symbols.

The analysis operator ``Theta`` of a certified orbit frame maps ``C^d`` onto
a ``d``-dimensional subspace of ``l2(W)``. Its orthogonal projection ``P``
is (up to truncation) co-invariant under the left regular representation,
and compressing ``lambda`` to the range of ``P`` reproduces the orbit frame
up to equivalence. Every check here reports the residual next to the budget
it was compared against; truncation budgets are ``10 sqrt(tau) + 1e-8``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import linalg
from .commutant import commutant_basis
from .dynamical import OperatorTuple, OrbitDiagnosis, classify_orbit, orbit_frame, rep_matrix
from .errors import NotCertified
from .frames import EquivalenceResult, Frame, analysis_matrix, frames_equivalent, range_basis
from .semigroup import (
    FreeAbelian,
    NumericalSG,
    Window,
    enumerate_window,
    generator_shifts,
    left_regular_adjoint,
    multiplication_table,
)

EXACT_TOL = 1e-10
BUDGET_FACTOR = 10.0
BUDGET_FLOOR = 1e-8
ANGLE_TOL = 1e-8


def tau_budget(tau: float) -> float:
    return BUDGET_FACTOR * np.sqrt(max(tau, 0.0)) + BUDGET_FLOOR


@dataclass(frozen=True)
class Check:
    """A residual compared against a tolerance."""

    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tolerance)

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance, "passed": self.passed}


@dataclass(frozen=True, eq=False)
class ModelSpace:
    """Range of the analysis operator of a certified orbit frame.

    ``basis`` is an orthonormal basis of ``Theta(C^d)`` (columns), so the
    projection is ``P = basis basis*`` (equal to ``Theta S^{-1} Theta*``).
    """

    tuple_: OperatorTuple
    xi: np.ndarray
    window: Window
    theta: np.ndarray
    basis: np.ndarray
    tau: float
    diagnosis: OrbitDiagnosis

    @property
    def P(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @cached_property
    def table(self) -> np.ndarray:
        return multiplication_table(self.window)

    def compression(self, s) -> np.ndarray:
        """``lambda_P(s) = P lambda_W(s) P`` on ``l2(W)``."""
        return self.P @ _shift(self.window, self.table, s) @ self.P

    def compressions(self) -> dict:
        return {g: self.compression(g) for g in self.window.descriptor.generators()}


def _shift(W: Window, table: np.ndarray, s) -> np.ndarray:
    n = len(W)
    M = np.zeros((n, n), dtype=np.complex128)
    row = table[W.position(s)]
    cols = np.nonzero(row >= 0)[0]
    M[row[cols], cols] = 1.0
    return M


def build_model_space(T: OperatorTuple, xi, W: Window, diagnosis: OrbitDiagnosis | None = None) -> ModelSpace:
    """Model space of the orbit of ``xi``; the orbit must be a certified frame.

    Raises
    ------
    NotCertified
        If :func:`classify_orbit` does not return ``Frame``.
    """
    diag = classify_orbit(T, xi, W) if diagnosis is None else diagnosis
    if not diag.is_frame:
        raise NotCertified(f"orbit is {diag.classification}, not a certified frame ({diag.note})")
    F = orbit_frame(T, xi, W)
    return ModelSpace(
        tuple_=T,
        xi=linalg.as_cvector(xi),
        window=W,
        theta=analysis_matrix(F),
        basis=range_basis(F),
        tau=float(diag.tau),
        diagnosis=diag,
    )


@dataclass(frozen=True)
class IntertwiningCheck:
    """``lambda_W(s)* Theta`` against ``Theta pi(s)*``.

    Rows ``w`` with ``s w`` inside the window agree exactly; the remaining
    rows carry orbit vectors outside the window and are bounded by
    ``sqrt(tau)`` in total.
    """

    interior: Check
    full: Check
    interior_rows: int
    boundary_rows: int

    @property
    def passed(self) -> bool:
        return self.interior.passed and self.full.passed

    def to_dict(self) -> dict:
        return {
            "checks": [self.interior.to_dict(), self.full.to_dict()],
            "interior_rows": self.interior_rows,
            "boundary_rows": self.boundary_rows,
            "passed": self.passed,
        }


def check_intertwining(M: ModelSpace, s, theta: np.ndarray | None = None) -> IntertwiningCheck:
    """Spectral-norm residual of ``lambda_W(s)* Theta - Theta pi(s)*``.

    The interior residual is relative to ``||Theta|| max(1, ||pi(s)||)``; the
    full-window residual is absolute and budgeted by ``sqrt(tau)``. Pass a
    modified ``theta`` to test a corrupted analysis matrix against ``M``.
    """
    W = M.window
    th = M.theta if theta is None else np.asarray(theta, dtype=np.complex128)
    s = W.descriptor.element(s)
    pis = rep_matrix(M.tuple_, s)
    R = left_regular_adjoint(s, W) @ th - th @ pis.conj().T
    inside = M.table[W.position(s)] >= 0 if s in W else np.zeros(len(W), dtype=bool)
    scale = linalg.opnorm(M.theta) * max(1.0, linalg.opnorm(pis))
    interior = linalg.opnorm(R[inside]) / scale if inside.any() else 0.0
    full = linalg.opnorm(R)
    return IntertwiningCheck(
        interior=Check("intertwining_interior", float(interior), EXACT_TOL),
        full=Check("intertwining_full_window", float(full), float(np.sqrt(M.tau)) + 1e-12),
        interior_rows=int(inside.sum()),
        boundary_rows=int((~inside).sum()),
    )


def coinvariance_residual(basis: np.ndarray, W: Window, s, table: np.ndarray | None = None) -> float:
    """``||P lambda_W(s) - P lambda_W(s) P||`` for ``P = basis basis*``."""
    table = multiplication_table(W) if table is None else table
    Q = np.asarray(basis, dtype=np.complex128)
    row = table[W.position(s)]
    Y = np.zeros((Q.shape[1], len(W)), dtype=np.complex128)
    valid = row >= 0
    Y[:, valid] = Q[row[valid]].conj().T
    R = Y - (Y @ Q) @ Q.conj().T
    return linalg.opnorm(R)


def check_coinvariance(M: ModelSpace, s) -> Check:
    return Check(f"coinvariance{tuple(s)}", coinvariance_residual(M.basis, M.window, s, M.table), tau_budget(M.tau))


def model_frame(M: ModelSpace, start=None, basis=None) -> Frame:
    """The family ``lambda_P(n) P delta_e`` in coordinates of ``M.basis``.

    ``start`` replaces ``P delta_e`` by another vector of the range, given in
    basis coordinates; ``basis`` replaces the range of ``P`` by another
    subspace of ``l2(W)``. Both exist for negative controls.
    """
    Q = M.basis if basis is None else np.asarray(basis, dtype=np.complex128)
    c = Q[0].conj() if start is None else linalg.as_cvector(start)
    u = Q @ c
    Qc = Q.conj()
    vecs = np.empty((len(M.window), Q.shape[1]), dtype=np.complex128)
    for i, row in enumerate(M.table):
        valid = row >= 0
        vecs[i] = Qc[row[valid]].T @ u[valid]
    return Frame(vecs, M.window.elements)


def model_frame_equivalence(M: ModelSpace, start=None, basis=None) -> EquivalenceResult:
    """Equivalence of the model frame with the orbit frame of ``M``."""
    F = orbit_frame(M.tuple_, M.xi, M.window)
    return frames_equivalent(F, model_frame(M, start, basis))


# -- truncated convolutions and symbols --------------------------------------


def truncated_convolution(p, W: Window, table: np.ndarray | None = None) -> np.ndarray:
    """``sum_m p_m lambda_W(m)``: entry ``(n, t)`` is ``p_m`` when ``n = m t``."""
    p = linalg.as_cvector(p, "coefficients")
    if p.shape[0] != len(W):
        raise ValueError(f"{p.shape[0]} coefficients for a window of {len(W)} elements")
    table = multiplication_table(W) if table is None else table
    n = len(W)
    out = np.zeros((n, n), dtype=np.complex128)
    for m in np.nonzero(p)[0]:
        row = table[m]
        cols = np.nonzero(row >= 0)[0]
        out[row[cols], cols] += p[m]
    return out


def cohyperinvariance_residuals(basis: np.ndarray, W: Window, table: np.ndarray | None = None) -> np.ndarray:
    """``||P C_m - P C_m P||`` for every basis convolution ``C_m = Conv(delta_m)``, ``m`` in ``W``."""
    table = multiplication_table(W) if table is None else table
    return np.array([coinvariance_residual(basis, W, m, table) for m in W.elements])


def check_cohyperinvariance(M: ModelSpace) -> Check:
    """Largest co-invariance residual over the truncated commutant basis."""
    res = cohyperinvariance_residuals(M.basis, M.window, M.table)
    return Check("cohyperinvariance", float(res.max()), tau_budget(M.tau))


def random_projector_basis(n: int, d: int, rng) -> np.ndarray:
    """Orthonormal basis of a uniformly random ``d``-dimensional subspace of ``C^n``."""
    G = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    Q, _ = np.linalg.qr(G)
    return Q


@dataclass(frozen=True)
class CommutantStructure:
    """Truncated commutant of the shift tuple versus truncated convolutions."""

    window_size: int
    dimension: int
    max_angle: float
    angle_tol: float = ANGLE_TOL

    @property
    def passed(self) -> bool:
        return self.dimension == self.window_size and self.max_angle <= self.angle_tol

    def to_dict(self) -> dict:
        return {
            "window_size": self.window_size,
            "commutant_dimension": self.dimension,
            "checks": [
                {"name": "dimension_equals_window", "value": self.dimension, "tolerance": self.window_size,
                 "passed": self.dimension == self.window_size},
                {"name": "max_principal_angle", "value": self.max_angle, "tolerance": self.angle_tol,
                 "passed": self.max_angle <= self.angle_tol},
            ],
            "passed": self.passed,
        }


def truncated_commutant_structure(W: Window) -> CommutantStructure:
    """Compare the commutant of ``{lambda_W(g)}`` with ``span{Conv(delta_m)}``."""
    B = commutant_basis(generator_shifts(W))
    table = multiplication_table(W)
    n = len(W)
    conv = np.empty((n * n, n), dtype=np.complex128)
    for m in range(n):
        e = np.zeros(n)
        e[m] = 1.0
        conv[:, m] = truncated_convolution(e, W, table).reshape(-1)
    comm = B.basis.reshape(B.r, -1).T
    angles = linalg.principal_angles(comm, conv) if B.r == n else np.array([np.pi / 2])
    return CommutantStructure(n, B.r, float(np.max(angles)))


@dataclass(frozen=True, eq=False)
class PolySymbol:
    """Polynomial ``phi = sum_m coeffs[m] z^m`` supported on a lower-set window."""

    window: Window
    coeffs: np.ndarray

    def __post_init__(self):
        c = linalg.as_cvector(self.coeffs, "coefficients").copy()
        if c.shape[0] != len(self.window):
            raise ValueError(f"{c.shape[0]} coefficients for a window of {len(self.window)} elements")
        if not isinstance(self.window.descriptor, (FreeAbelian, NumericalSG)):
            raise ValueError("symbols live on windows of Z_+^k or numerical semigroups")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degrees(self) -> np.ndarray:
        """Total degree of each monomial."""
        return self.window.coords.sum(axis=1)

    @property
    def degree(self) -> int:
        nz = np.nonzero(self.coeffs)[0]
        return int(self.degrees[nz].max()) if nz.size else 0

    def coefficient(self, m) -> complex:
        m = tuple(m) if not isinstance(m, (int, np.integer)) else (int(m),)
        pos = self.window.index.get(m)
        return complex(self.coeffs[pos]) if pos is not None else 0.0j

    def on_window(self, W: Window) -> np.ndarray:
        """Coefficients transported to another window (dropping monomials outside it)."""
        if W.descriptor != self.window.descriptor:
            raise ValueError("symbol and window live on different semigroups")
        out = np.zeros(len(W), dtype=np.complex128)
        for e, c in zip(self.window.elements, self.coeffs):
            pos = W.index.get(e)
            if pos is not None:
                out[pos] = c
        return out

    @classmethod
    def monomial(cls, W: Window, m, coefficient=1.0) -> "PolySymbol":
        c = np.zeros(len(W), dtype=np.complex128)
        c[W.position(m)] = coefficient
        return cls(W, c)


def multiplication_operator(phi: PolySymbol, W: Window | None = None) -> np.ndarray:
    """Compression of multiplication by ``phi`` to the monomials of ``W``."""
    W = phi.window if W is None else W
    return truncated_convolution(phi.on_window(W), W)


def fejer_average(phi: PolySymbol, n: int) -> PolySymbol:
    """Degree-``j`` part scaled by ``(n + 1 - j) / (n + 1)`` for ``j <= n``, zero above."""
    if n < 0:
        raise ValueError("Fejer order must be non-negative")
    j = phi.degrees
    weight = np.clip((n + 1 - j) / (n + 1), 0.0, None)
    return PolySymbol(phi.window, phi.coeffs * weight)


def fejer_double_sum(phi: PolySymbol, n: int) -> PolySymbol:
    """``1/(n+1) sum_{k<=n} sum_{j<=k} phi_j`` summed literally (cross-check)."""
    j = phi.degrees
    out = np.zeros_like(phi.coeffs)
    for k in range(n + 1):
        for jj in range(k + 1):
            out = out + np.where(j == jj, phi.coeffs, 0.0)
    return PolySymbol(phi.window, out / (n + 1))


def dilate_window(W: Window, factor: int = 2) -> Window:
    """Window with every cap (box, total degree or cap) multiplied by ``factor``."""
    if W.spec is None:
        raise ValueError("only spec-built windows can be dilated")
    (kind, value), = W.spec.items()
    if isinstance(value, (list, tuple)):
        value = [factor * int(v) for v in value]
    else:
        value = factor * int(value)
    return enumerate_window(W.descriptor, {kind: value})


def fejer_norm_check(phi: PolySymbol, n: int) -> Check:
    """``||M_{psi_n}||_W <= ||M_phi||_{2W} + 1e-8`` on the symbol's window."""
    psi = fejer_average(phi, n)
    lhs = linalg.opnorm(multiplication_operator(psi))
    rhs = linalg.opnorm(multiplication_operator(phi, dilate_window(phi.window)))
    return Check(f"fejer_norm_n{n}", float(lhs), float(rhs) + BUDGET_FLOOR)
