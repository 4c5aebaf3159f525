"""Commutants of commuting tuples and intertwiners between frame vectors.

The commutant ``{T : T A_i = A_i T}`` is the nullspace of the stacked
Sylvester operators ``T -> A_i T - T A_i``; with column-major vectorization
each block is ``I (x) A_i - A_i^T (x) I``. An intertwiner mapping ``xi`` to
``eta`` is then a small least-squares problem in commutant coordinates.
"""
from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .dynamical import OperatorTuple, classify_orbit, orbit_frame, random_commuting_tuple, random_vector
from .errors import InconsistentVerdicts, NotCertified, NotFound
from .frames import frames_equivalent
from .io import matrix_to_json
from .semigroup import Window, enumerate_window

NULLSPACE_TOL = 1e-10
RESIDUAL_TOL = 1e-8
INVERTIBLE_TOL = 1e-8


@dataclass(frozen=True)
class CommutantBasis:
    """Frobenius-orthonormal basis ``basis[m]`` (shape ``(r, d, d)``) of the commutant."""

    d: int
    basis: np.ndarray

    @property
    def r(self) -> int:
        return self.basis.shape[0]

    def __len__(self):
        return self.r

    def assemble(self, coeffs) -> np.ndarray:
        return np.tensordot(np.asarray(coeffs, dtype=np.complex128), self.basis, axes=1)

    def coordinates(self, M) -> tuple[np.ndarray, float]:
        """Orthogonal projection of ``M`` onto the span: coefficients and Frobenius residual."""
        M = linalg.as_cmatrix(M)
        c = np.einsum("mij,ij->m", self.basis.conj(), M)
        return c, float(np.linalg.norm(M - self.assemble(c)))


def sylvester_stack(matrices) -> np.ndarray:
    """Rows of ``vec(A_i T - T A_i)`` for all ``i``, each block scaled by ``1/||A_i||``."""
    blocks = []
    for A in matrices:
        A = linalg.as_cmatrix(A)
        d = A.shape[0]
        scale = linalg.opnorm(A)
        eye = np.eye(d)
        K = np.kron(eye, A) - np.kron(A.T, eye)
        blocks.append(K / scale if scale > 0.0 else K)
    return np.vstack(blocks)


def commutant_basis(T, tol: float = NULLSPACE_TOL) -> CommutantBasis:
    """Basis of the commutant of every generator matrix of ``T``.

    ``T`` may be an :class:`OperatorTuple` or a plain sequence of square
    matrices (used for truncated shift tuples). Each Sylvester block is
    normalized by ``||A_i||``, so the nullspace cutoff ``tol`` is applied on
    an absolute scale; a generator that is a multiple of the identity up to
    rounding then contributes no constraints.
    """
    mats = T.matrices if isinstance(T, OperatorTuple) else [linalg.as_cmatrix(M) for M in T]
    d = mats[0].shape[0]
    K = sylvester_stack(mats)
    res = linalg.svd(K, full_matrices=K.shape[0] < K.shape[1])
    rank = int(np.count_nonzero(res.s > tol))
    N = res.vh[rank:].conj().T
    basis = np.stack([N[:, m].reshape(d, d, order="F") for m in range(N.shape[1])]).astype(np.complex128)
    return CommutantBasis(d, basis)


def commutation_residual(M, matrices) -> float:
    """``max_i ||M A_i - A_i M|| / (||M|| ||A_i||)``."""
    mnorm = linalg.opnorm(M)
    worst = 0.0
    for A in matrices:
        scale = mnorm * linalg.opnorm(A)
        if scale > 0.0:
            worst = max(worst, linalg.opnorm(M @ A - A @ M) / scale)
    return worst


@dataclass(frozen=True)
class Intertwiner:
    matrix: np.ndarray
    vector_residual: float
    commutation_residual: float
    sigma_min: float
    sigma_max: float
    invertible: bool
    coefficients: np.ndarray = field(repr=False, default=None)

    @property
    def sigma_ratio(self) -> float:
        return self.sigma_min / self.sigma_max if self.sigma_max > 0.0 else 0.0

    def to_dict(self) -> dict:
        return {
            "matrix": matrix_to_json(self.matrix),
            "vector_residual": self.vector_residual,
            "vector_tol": RESIDUAL_TOL,
            "commutation_residual": self.commutation_residual,
            "commutation_tol": RESIDUAL_TOL,
            "sigma_min": self.sigma_min,
            "sigma_max": self.sigma_max,
            "sigma_ratio": self.sigma_ratio,
            "sigma_tol": INVERTIBLE_TOL,
            "invertible": self.invertible,
        }


def intertwiner(
    T: OperatorTuple,
    xi,
    eta,
    basis: CommutantBasis | None = None,
    tol: float = RESIDUAL_TOL,
    invertible_tol: float = INVERTIBLE_TOL,
) -> Intertwiner:
    """Commutant element ``X`` with ``X xi = eta`` (minimum-norm coordinates).

    Raises
    ------
    NotFound
        If the best commutant element misses ``eta`` by more than
        ``tol * ||eta||``.
    """
    xi = linalg.as_cvector(xi, "xi")
    eta = linalg.as_cvector(eta, "eta")
    if not np.any(xi):
        raise ValueError("xi must be non-zero")
    if xi.shape != eta.shape or xi.shape[0] != T.dim:
        raise ValueError("xi and eta must both live in the representation space")
    B = commutant_basis(T) if basis is None else basis
    K = np.einsum("mij,j->im", B.basis, xi)
    c, res = linalg.lstsq(K, eta)
    enorm = float(np.linalg.norm(eta))
    rel = res / enorm if enorm > 0.0 else res
    if rel > tol:
        raise NotFound(f"no commutant element maps xi to eta (relative residual {rel:.3e} > {tol:.0e})")
    X = B.assemble(c)
    sv = linalg.singular_values(X)
    smax, smin = float(sv[0]), float(sv[-1])
    return Intertwiner(
        matrix=X,
        vector_residual=float(rel),
        commutation_residual=commutation_residual(X, T.matrices),
        sigma_min=smin,
        sigma_max=smax,
        invertible=bool(smax > 0.0 and smin >= invertible_tol * smax),
        coefficients=c,
    )


class EquivalenceStatus(str, enum.Enum):
    EQUIVALENT = "Equivalent"
    INTERTWINED_NOT_EQUIVALENT = "Intertwined-NotEquivalent"
    NOT_INTERTWINED = "NotIntertwined"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class FrameVectorVerdict:
    status: EquivalenceStatus
    witness: Intertwiner | None
    frame_check: object
    diagnosis_xi: object
    diagnosis_eta: object

    @property
    def equivalent(self) -> bool:
        return self.status is EquivalenceStatus.EQUIVALENT

    def to_dict(self) -> dict:
        return {
            "status": str(self.status),
            "equivalent": self.equivalent,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "frame_check": self.frame_check.to_dict(),
            "xi": self.diagnosis_xi.to_dict(),
            "eta": self.diagnosis_eta.to_dict(),
        }


def are_equivalent_frame_vectors(
    T: OperatorTuple,
    xi,
    eta,
    W: Window,
    basis: CommutantBasis | None = None,
    diagnoses: tuple | None = None,
) -> FrameVectorVerdict:
    """Decide equivalence of two frame vectors in two independent ways.

    The commutant route looks for an invertible intertwiner; the range route
    compares the analysis ranges of the truncated orbit frames. Both must
    agree (:class:`InconsistentVerdicts` otherwise).

    Raises
    ------
    NotCertified
        If either orbit is not certified as a frame on ``W``.
    """
    dx, de = diagnoses if diagnoses is not None else (classify_orbit(T, xi, W), classify_orbit(T, eta, W))
    for name, diag in (("xi", dx), ("eta", de)):
        if not diag.is_frame:
            raise NotCertified(f"{name} is not a certified frame vector ({diag.classification}, {diag.note})")
    F, G = orbit_frame(T, xi, W), orbit_frame(T, eta, W)
    check = frames_equivalent(F, G, strict=False)
    try:
        X = intertwiner(T, xi, eta, basis)
    except NotFound:
        X = None
        status = EquivalenceStatus.NOT_INTERTWINED
    else:
        ok = X.invertible and X.commutation_residual <= RESIDUAL_TOL
        status = EquivalenceStatus.EQUIVALENT if ok else EquivalenceStatus.INTERTWINED_NOT_EQUIVALENT
    if (status is EquivalenceStatus.EQUIVALENT) != check.equivalent:
        raise InconsistentVerdicts(
            f"commutant verdict {status} disagrees with range verdict {check.equivalent} "
            f"(projector distance {check.projector_distance:.3e}, witness residual {check.residual:.3e})"
        )
    return FrameVectorVerdict(status, X, check, dx, de)


# -- randomized centrality experiment ----------------------------------------

DEFAULT_CAPS = {1: 40, 2: 12, 3: 6}
MAX_RESAMPLES = 50


def default_window_spec(k: int) -> dict:
    return {"box": DEFAULT_CAPS.get(k, 4)}


def thread_count() -> int:
    env = os.environ.get("DYNFRAME_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _run_trial(cfg: dict, trial: int, seed_seq: np.random.SeedSequence) -> dict:
    rng = np.random.default_rng(seed_seq)
    ds = cfg["d"] if isinstance(cfg["d"], (list, tuple)) else [cfg["d"]]
    d = int(ds[trial % len(ds)])
    orders = tuple(cfg.get("group_orders", ()))
    window = cfg.get("window") or default_window_spec(cfg["k"])
    for attempt in range(MAX_RESAMPLES):
        T = random_commuting_tuple(d, cfg["k"], cfg["rho_max"], cfg["scheme"], seed=rng, group_orders=orders)
        W = enumerate_window(T.descriptor, window)
        xi, eta = random_vector(d, rng), random_vector(d, rng)
        dx, de = classify_orbit(T, xi, W), classify_orbit(T, eta, W)
        if dx.is_frame and de.is_frame:
            break
    else:
        return {"trial": trial, "d": d, "status": "Uncertified", "passed": False, "resamples": MAX_RESAMPLES}
    v = are_equivalent_frame_vectors(T, xi, eta, W, diagnoses=(dx, de))
    w = v.witness
    return {
        "trial": trial,
        "d": d,
        "status": str(v.status),
        "passed": v.equivalent,
        "resamples": attempt,
        "window_size": len(W),
        "vector_residual": None if w is None else w.vector_residual,
        "commutation_residual": None if w is None else w.commutation_residual,
        "sigma_ratio": None if w is None else w.sigma_ratio,
        "projector_distance": v.frame_check.projector_distance,
        "witness_residual": v.frame_check.residual,
        "condition_xi": dx.upper / dx.lower,
        "condition_eta": de.upper / de.lower,
        "tau": max(dx.tau, de.tau),
    }


def normalize_config(config: dict) -> dict:
    cfg = {
        "k": int(config.get("k", 1)),
        "d": config.get("d", 4),
        "scheme": config.get("scheme", "poly"),
        "rho_max": float(config.get("rho_max", 0.9)),
        "trials": int(config.get("trials", 100)),
        "seed": config.get("seed"),
        "group_orders": [int(n) for n in config.get("group_orders", [])],
        "window": config.get("window"),
    }
    if cfg["trials"] < 1:
        raise ValueError("trials must be at least 1")
    if cfg["seed"] is None:
        raise ValueError("a seed is required")
    cfg["seed"] = int(cfg["seed"])
    return cfg


def centrality_experiment(config: dict, threads: int | None = None) -> dict:
    """Sample random tuples and frame-vector pairs and test their equivalence.

    ``config`` keys: ``k``, ``d`` (int or list cycled over trials),
    ``scheme``, ``rho_max``, ``trials``, ``seed`` and optionally
    ``group_orders`` (hybrid representations) and ``window``. Each trial
    uses its own spawned seed, so results do not depend on the thread count.
    """
    cfg = normalize_config(config)
    children = np.random.SeedSequence(cfg["seed"]).spawn(cfg["trials"])
    n_threads = threads or thread_count()
    if n_threads > 1:
        with ThreadPoolExecutor(n_threads) as pool:
            records = list(pool.map(lambda a: _run_trial(cfg, *a), enumerate(children)))
    else:
        records = [_run_trial(cfg, i, s) for i, s in enumerate(children)]

    def worst(key, fn=max):
        vals = [r[key] for r in records if r.get(key) is not None]
        return fn(vals) if vals else None

    passed = sum(r["passed"] for r in records)
    summary = {
        "passed": passed,
        "total": len(records),
        "max_vector_residual": worst("vector_residual"),
        "max_commutation_residual": worst("commutation_residual"),
        "min_sigma_ratio": worst("sigma_ratio", min),
        "max_projector_distance": worst("projector_distance"),
        "worst_condition": max(worst("condition_xi") or 0.0, worst("condition_eta") or 0.0),
        "total_resamples": sum(r["resamples"] for r in records),
    }
    return {"config": cfg, "summary": summary, "trials": records, "passed": passed == len(records)}
