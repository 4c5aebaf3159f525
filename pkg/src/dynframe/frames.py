"""Finite frames: analysis and frame operators, bounds, duals, reconstruction
and equivalence.

A :class:`Frame` stores its vectors as the rows of an ``(n, d)`` array, so
the analysis matrix is simply the entrywise conjugate of that array.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import linalg
from .errors import IndexMismatch, InconsistentVerdicts, NonConvergence, NotAFrame

FRAME_TOL = 1e-10
PARSEVAL_TOL = 1e-10
EQUIV_TOL = 1e-8
# computed range projectors carry an error of order eps * cond(Theta)
PROJECTOR_FLOOR = 10.0


class FrameClass(str, enum.Enum):
    FRAME = "Frame"
    PARSEVAL = "Parseval"
    BESSEL_ONLY = "BesselOnly"
    INCOMPLETE = "Incomplete"

    def __str__(self):
        return self.value

    @property
    def is_frame(self) -> bool:
        return self in (FrameClass.FRAME, FrameClass.PARSEVAL)


@dataclass(frozen=True, eq=False)
class Frame:
    """Ordered family ``f_w`` in ``C^d`` indexed by ``index``.

    Parameters
    ----------
    vectors : array_like, shape (n, d)
        Row ``i`` is the frame vector attached to ``index[i]``.
    index : sequence, optional
        Labels of the rows (window elements, ``(sensor, time)`` pairs, ...).
        Defaults to ``0..n-1``.
    """

    vectors: np.ndarray
    index: tuple = None

    def __post_init__(self):
        V = linalg.as_cmatrix(self.vectors, "frame vectors").copy()
        V.setflags(write=False)
        object.__setattr__(self, "vectors", V)
        idx = tuple(range(V.shape[0])) if self.index is None else tuple(self.index)
        if len(idx) != V.shape[0]:
            raise IndexMismatch(f"{len(idx)} labels for {V.shape[0]} vectors")
        object.__setattr__(self, "index", idx)

    @classmethod
    def from_columns(cls, columns, index=None) -> "Frame":
        return cls(np.asarray(columns).T, index)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return self.vectors.shape[0]

    @cached_property
    def _svd(self) -> linalg.SvdResult:
        return linalg.svd(analysis_matrix(self), full_matrices=False)


@dataclass(frozen=True)
class FrameReport:
    lower: float
    upper: float
    classification: FrameClass
    condition: float
    rank: int

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "classification": str(self.classification),
            "condition": self.condition if np.isfinite(self.condition) else "inf",
            "rank": self.rank,
        }


def analysis_matrix(F: Frame) -> np.ndarray:
    """``Theta`` with ``(Theta x)_w = <x, f_w>``: row ``w`` is ``conj(f_w)``."""
    return F.vectors.conj()


def synthesis_matrix(F: Frame) -> np.ndarray:
    return F.vectors.T.copy()


def frame_operator(F: Frame) -> np.ndarray:
    """``S = Theta* Theta = sum_w f_w f_w*``."""
    theta = analysis_matrix(F)
    return theta.conj().T @ theta


def frame_bounds(F: Frame, tol: float = FRAME_TOL, parseval_tol: float = PARSEVAL_TOL) -> FrameReport:
    """Optimal frame bounds and classification of a finite family.

    The bounds are the extreme eigenvalues of ``S``, obtained as squared
    singular values of the analysis matrix so that small lower bounds keep
    their relative accuracy. The family is a frame when ``Theta`` has full
    column rank at the relative cutoff ``tol``; a family spanning only at
    machine precision is reported as ``BesselOnly``.
    """
    s = F._svd.s
    d = F.dim
    smax = float(s[0]) if s.size else 0.0
    smin = float(s[d - 1]) if s.size >= d else 0.0
    lower, upper = smin**2, smax**2
    rank = F._svd.rank(tol)
    if smax == 0.0 or rank < d:
        eps_rank = F._svd.rank(np.finfo(float).eps * max(F.vectors.shape))
        cls = FrameClass.BESSEL_ONLY if smax > 0.0 and eps_rank == d else FrameClass.INCOMPLETE
    elif abs(lower - 1.0) <= parseval_tol and abs(upper - 1.0) <= parseval_tol:
        cls = FrameClass.PARSEVAL
    else:
        cls = FrameClass.FRAME
    condition = upper / lower if lower > 0.0 else float("inf")
    return FrameReport(lower, upper, cls, condition, rank)


def _require_frame(F: Frame, tol: float = FRAME_TOL) -> FrameReport:
    rep = frame_bounds(F, tol)
    if not rep.classification.is_frame:
        raise NotAFrame(
            f"family is {rep.classification} (bounds {rep.lower:.3e}, {rep.upper:.3e}, rank {rep.rank}/{F.dim})"
        )
    return rep


def inverse_frame_operator(F: Frame) -> np.ndarray:
    """``S^{-1}`` assembled from the SVD of ``Theta`` (``S^{-1} = V diag(s^-2) V*``)."""
    _require_frame(F)
    res = F._svd
    V = res.vh.conj().T
    return (V / res.s**2) @ V.conj().T


def canonical_dual(F: Frame) -> Frame:
    """Canonical dual frame ``S^{-1} f_w``."""
    Sinv = inverse_frame_operator(F)
    return Frame(F.vectors @ Sinv.T, F.index)


def reconstruct(
    F: Frame,
    coeffs,
    method: str = "dual",
    rel_tol: float = 1e-12,
    max_iter: int = 10_000,
    bounds: tuple[float, float] | None = None,
) -> np.ndarray:
    """Recover ``x`` from ``c = Theta x``.

    ``method="dual"`` applies the canonical dual, ``x = S^{-1} Theta* c``,
    evaluated as the pseudo-inverse of ``Theta``. ``method="iterative"`` runs
    the frame algorithm ``x <- x + 2/(C1+C2) Theta*(c - Theta x)`` until the
    relative update falls below ``rel_tol``.
    """
    rep = _require_frame(F)
    c = linalg.as_cvector(coeffs, "coefficients")
    if c.shape[0] != len(F):
        raise IndexMismatch(f"{c.shape[0]} coefficients for {len(F)} frame vectors")
    theta = analysis_matrix(F)
    if method in ("dual", "direct-dual", "direct"):
        res = F._svd
        return res.vh.conj().T @ ((res.u.conj().T @ c) / res.s)
    if method != "iterative":
        raise ValueError(f"unknown reconstruction method {method!r}")
    lo, hi = bounds if bounds is not None else (rep.lower, rep.upper)
    relax = 2.0 / (lo + hi)
    target = relax * (theta.conj().T @ c)
    # x <- (I - relax S) x + relax Theta* c, with S applied as a d x d matrix
    step = np.eye(F.dim) - relax * frame_operator(F)
    x = np.zeros(F.dim, dtype=np.complex128)
    for _ in range(max_iter):
        x_new = step @ x + target
        delta = np.linalg.norm(x_new - x)
        x = x_new
        if delta <= rel_tol * np.linalg.norm(x):
            return x
    raise NonConvergence(f"frame algorithm did not reach relative update {rel_tol} in {max_iter} iterations")


def iteration_rate(report: FrameReport) -> float:
    """Contraction factor ``(C2 - C1) / (C2 + C1)`` of the frame algorithm."""
    return (report.upper - report.lower) / (report.upper + report.lower)


def range_basis(F: Frame) -> np.ndarray:
    """Orthonormal basis of ``Theta(C^d)``, computed as ``Theta S^{-1/2}`` up to a unitary."""
    _require_frame(F)
    res = F._svd
    return (analysis_matrix(F) @ res.vh.conj().T) / res.s


def range_projector(F: Frame) -> np.ndarray:
    """Orthogonal projection ``P = Theta S^{-1} Theta*`` onto the analysis range."""
    Q = range_basis(F)
    return Q @ Q.conj().T


@dataclass(frozen=True)
class EquivalenceResult:
    """Outcome of :func:`frames_equivalent`.

    ``witness`` solves ``T f_w = g_w`` in the least-squares sense; the
    two verdicts come from the witness residual and from comparing the
    range projectors.
    """

    equivalent: bool
    witness: np.ndarray
    residual: float
    residual_tol: float
    sigma_ratio: float
    sigma_tol: float
    projector_distance: float
    projector_tol: float
    witness_verdict: bool
    projector_verdict: bool
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "equivalent": self.equivalent,
            "witness_verdict": self.witness_verdict,
            "projector_verdict": self.projector_verdict,
            "residual": self.residual,
            "residual_tol": self.residual_tol,
            "sigma_ratio": self.sigma_ratio,
            "sigma_tol": self.sigma_tol,
            "projector_distance": self.projector_distance,
            "projector_tol": self.projector_tol,
        }


def frames_equivalent(F: Frame, G: Frame, tol: float = EQUIV_TOL, strict: bool = True) -> EquivalenceResult:
    """Decide whether ``T f_w = g_w`` for a bounded invertible ``T``.

    Two independent tests run and must agree:

    * witness: least-squares ``T`` with relative residual at most ``tol``
      and full column rank (``sigma_min >= tol * sigma_max``);
    * range: ``||P_F - P_G|| <= tol`` for the analysis-range projectors,
      with ``tol`` raised to the accuracy floor
      ``10 eps (cond(Theta_F) + cond(Theta_G))`` of computed projectors.

    The ambient dimensions may differ, in which case ``T`` is rectangular.
    A disagreement raises :class:`InconsistentVerdicts` unless ``strict`` is
    false.
    """
    if len(F) != len(G) or F.index != G.index:
        raise IndexMismatch("frames are indexed by different windows")
    _require_frame(F)
    _require_frame(G)
    # rows: f_w^T T^T = g_w^T
    Tt, res = linalg.lstsq(F.vectors, G.vectors)
    T = Tt.T
    gnorm = np.linalg.norm(G.vectors)
    rel_res = res / gnorm
    sv = linalg.singular_values(T)
    full_col = T.shape[0] >= T.shape[1] and sv[0] > 0.0
    sigma_ratio = float(sv[-1] / sv[0]) if full_col else 0.0
    witness_ok = bool(rel_res <= tol and full_col and sigma_ratio >= tol)

    dist = linalg.opnorm(range_projector(F) - range_projector(G))
    kappa = sum(float(X._svd.s[0] / X._svd.s[X.dim - 1]) for X in (F, G))
    proj_tol = max(tol, PROJECTOR_FLOOR * np.finfo(float).eps * kappa)
    proj_ok = bool(dist <= proj_tol)
    if strict and witness_ok != proj_ok:
        raise InconsistentVerdicts(
            f"witness verdict {witness_ok} (residual {rel_res:.3e}, sigma ratio {sigma_ratio:.3e}) "
            f"disagrees with range verdict {proj_ok} (projector distance {dist:.3e})"
        )
    return EquivalenceResult(
        equivalent=witness_ok and proj_ok,
        witness=T,
        residual=float(rel_res),
        residual_tol=tol,
        sigma_ratio=sigma_ratio,
        sigma_tol=tol,
        projector_distance=float(dist),
        projector_tol=proj_tol,
        witness_verdict=witness_ok,
        projector_verdict=proj_ok,
    )

