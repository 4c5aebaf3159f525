"""Representations of commutative semigroups by commuting matrices and
their orbit frames.

A representation of ``Z_+^k`` is a commuting tuple ``(A_1, ..., A_k)``
acting by ``pi(n) = A_1^{n_1} ... A_k^{n_k}``. Hybrid representations of
``G x Z_+^m`` add unitaries of finite order for the generators of the
finite abelian group ``G``; numerical semigroups are represented by one
matrix per generator.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import unitary_group

from . import linalg
from .errors import CommutationViolated, NotCertifiable
from .frames import Frame, FrameReport, frame_bounds
from .semigroup import (
    Descriptor,
    FiniteAbelian,
    FreeAbelian,
    NumericalSG,
    Product,
    Window,
    conductor,
    product,
    representable,
)

COMMUTE_TOL = 1e-10
ORDER_TOL = 1e-10
MAX_POWER = 512


def _atoms(desc: Descriptor) -> list:
    return desc.factors() if isinstance(desc, Product) else [desc]


def _generator_kinds(desc: Descriptor) -> list:
    """``("group", N)``, ``("free", None)`` or ``("numerical", g)`` per generator."""
    kinds = []
    for atom in _atoms(desc):
        if isinstance(atom, FiniteAbelian):
            kinds.extend(("group", n) for n in atom.orders)
        elif isinstance(atom, FreeAbelian):
            kinds.extend(("free", None) for _ in range(atom.k))
        elif isinstance(atom, NumericalSG):
            kinds.extend(("numerical", g) for g in atom.generators_)
        else:  # pragma: no cover
            raise TypeError(atom)
    return kinds


@dataclass(frozen=True, eq=False)
class OperatorTuple:
    """Commuting generator matrices of a representation of ``descriptor``.

    ``matrices`` follow ``descriptor.generators()``. Construction checks
    pairwise commutation (relative to ``||A_i|| ||A_j||``), ``U^N = I`` for
    generators of finite order ``N`` and, for numerical semigroups, the
    pairwise relations ``A_i^{g_j} = A_j^{g_i}``.
    """

    descriptor: Descriptor
    matrices: tuple

    def __post_init__(self):
        mats = tuple(linalg.as_cmatrix(M, "generator").copy() for M in self.matrices)
        kinds = _generator_kinds(self.descriptor)
        if len(mats) != len(kinds):
            raise ValueError(f"{len(mats)} matrices for {len(kinds)} generators of {self.descriptor}")
        d = mats[0].shape[0]
        for M in mats:
            if M.shape != (d, d):
                raise ValueError(f"generator matrices must all be {d}x{d}, got {M.shape}")
            M.setflags(write=False)
        object.__setattr__(self, "matrices", mats)
        for i, j in itertools.combinations(range(len(mats)), 2):
            Ai, Aj = mats[i], mats[j]
            scale = linalg.opnorm(Ai) * linalg.opnorm(Aj)
            gap = linalg.opnorm(Ai @ Aj - Aj @ Ai)
            if gap > COMMUTE_TOL * max(scale, np.finfo(float).tiny):
                raise CommutationViolated(f"generators {i} and {j} do not commute (||[A_i, A_j]|| = {gap:.3e})")
        for M, (kind, val) in zip(mats, kinds):
            if kind == "group":
                err = linalg.opnorm(np.linalg.matrix_power(M, val) - np.eye(d))
                if err > ORDER_TOL:
                    raise ValueError(f"group generator fails U^{val} = I (error {err:.3e})")
        num = [(M, val) for M, (kind, val) in zip(mats, kinds) if kind == "numerical"]
        for (Mi, gi), (Mj, gj) in itertools.combinations(num, 2):
            lhs, rhs = np.linalg.matrix_power(Mi, gj), np.linalg.matrix_power(Mj, gi)
            if linalg.opnorm(lhs - rhs) > COMMUTE_TOL * max(linalg.opnorm(lhs), linalg.opnorm(rhs), 1.0):
                raise CommutationViolated(f"numerical generators {gi}, {gj} violate A^{gj} = B^{gi}")

    # -- constructors

    @classmethod
    def free(cls, *A) -> "OperatorTuple":
        return cls(FreeAbelian(len(A)), tuple(A))

    @classmethod
    def single(cls, A) -> "OperatorTuple":
        return cls.free(A)

    @classmethod
    def hybrid(cls, U, orders, A) -> "OperatorTuple":
        """Representation of ``Z_N1 x ... x Z_Nl x Z_+^m``: unitaries ``U`` first, then ``A``."""
        U, A = list(U), list(A)
        if not A:
            return cls(FiniteAbelian(tuple(orders)), tuple(U))
        if not U:
            return cls.free(*A)
        return cls(Product(FiniteAbelian(tuple(orders)), FreeAbelian(len(A))), tuple(U) + tuple(A))

    @classmethod
    def numerical(cls, A, generators) -> "OperatorTuple":
        """Representation ``n -> A^n`` of the numerical semigroup spanned by ``generators``."""
        desc = NumericalSG(tuple(generators))
        A = linalg.as_cmatrix(A)
        return cls(desc, tuple(np.linalg.matrix_power(A, g) for g in desc.generators_))

    # -- accessors

    @property
    def dim(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def kinds(self) -> list:
        return _generator_kinds(self.descriptor)

    @property
    def A(self) -> tuple:
        return tuple(M for M, (k, _) in zip(self.matrices, self.kinds) if k != "group")

    @property
    def U(self) -> tuple:
        return tuple(M for M, (k, _) in zip(self.matrices, self.kinds) if k == "group")

    @property
    def orders(self) -> tuple:
        return tuple(v for k, v in self.kinds if k == "group")

    def adjoint(self) -> "OperatorTuple":
        return OperatorTuple(self.descriptor, tuple(M.conj().T for M in self.matrices))

    def conjugate(self, V) -> "OperatorTuple":
        """The similar tuple ``V^{-1} A_i V``."""
        V = linalg.as_cmatrix(V)
        Vinv = np.linalg.inv(V)
        return OperatorTuple(self.descriptor, tuple(Vinv @ M @ V for M in self.matrices))


def rep_matrix(T: OperatorTuple, n) -> np.ndarray:
    """``pi(n)`` as a product of generator powers (repeated squaring)."""
    n = T.descriptor.element(n)
    out = np.eye(T.dim, dtype=np.complex128)
    for M, c, (kind, val) in zip(T.matrices, T.descriptor.factorize(n), T.kinds):
        if kind == "group":
            c %= val
        if c:
            out = np.linalg.matrix_power(M, c) @ out
    return out


def rep_apply(T: OperatorTuple, n, x) -> np.ndarray:
    """``pi(n) x``."""
    x = linalg.as_cvector(x)
    if x.shape[0] != T.dim:
        raise ValueError(f"vector of length {x.shape[0]} for a {T.dim}-dimensional representation")
    n = T.descriptor.element(n)
    y = x.copy()
    for M, c, (kind, val) in zip(T.matrices, T.descriptor.factorize(n), T.kinds):
        if kind == "group":
            c %= val
        if c:
            y = np.linalg.matrix_power(M, c) @ y
    return y


def _check_window(T: OperatorTuple, W: Window):
    if W.descriptor != T.descriptor:
        raise ValueError(f"window over {W.descriptor} used with a representation of {T.descriptor}")


def orbit_frame(T: OperatorTuple, xi, W: Window) -> Frame:
    """The family ``pi(n) xi`` over the window, built one generator step at a time."""
    _check_window(T, W)
    xi = linalg.as_cvector(xi, "xi")
    if xi.shape[0] != T.dim:
        raise ValueError(f"xi has length {xi.shape[0]}, representation acts on C^{T.dim}")
    if not np.any(xi):
        raise ValueError("orbit generator xi must be non-zero")
    vecs = np.empty((len(W), T.dim), dtype=np.complex128)
    vecs[0] = xi
    for pos in range(1, len(W)):
        i, v = W.predecessor(W.elements[pos])
        vecs[pos] = T.matrices[i] @ vecs[W.index[v]]
    return Frame(vecs, W.elements)


# -- tail certificates -------------------------------------------------------


@dataclass(frozen=True)
class TailBound:
    """Certified upper bound ``tau`` on the orbit energy outside a window.

    For each unbounded generator ``A`` the certificate is a power ``L`` with
    ``||A^L|| < 1``; ``gain`` bounds ``sum_n ||A^n y||^2 / ||y||^2``.
    """

    tau: float
    powers: tuple = ()
    contractions: tuple = ()
    gains: tuple = ()
    group_weight: float = 1.0

    certified = True

    def to_dict(self) -> dict:
        return {
            "tau": self.tau,
            "certified": True,
            "powers": list(self.powers),
            "contractions": list(self.contractions),
            "gains": list(self.gains),
            "group_weight": self.group_weight,
        }


def _power_norms(A: np.ndarray, max_power: int) -> np.ndarray:
    norms = np.empty(max_power + 1)
    P = np.eye(A.shape[0], dtype=np.complex128)
    for r in range(max_power + 1):
        norms[r] = linalg.opnorm(P)
        if r >= 1 and norms[r] == 0.0:
            norms[r + 1 :] = 0.0
            break
        P = A @ P
    return norms


def _contraction_powers(norms: np.ndarray) -> np.ndarray:
    valid = np.nonzero(norms[1:] < 1.0)[0] + 1
    return valid


def _gain(norms: np.ndarray, powers: np.ndarray):
    """Smallest ``sum_{r<L} ||A^r||^2 / (1 - ||A^L||^2)`` over admissible ``L``."""
    sq = norms**2
    csum = np.concatenate(([0.0], np.cumsum(sq)))
    vals = csum[powers] / (1.0 - sq[powers])
    best = int(np.argmin(vals))
    return float(vals[best]), int(powers[best])


def _vector_tail(A: np.ndarray, start: np.ndarray, norms: np.ndarray, powers: np.ndarray) -> float:
    """Bound on ``sum_{r>=1} ||A^r y||^2`` from ``y = start`` via ``||A^L|| < 1``."""
    L_max = int(powers.max())
    terms = np.empty(L_max)
    y = start
    for r in range(L_max):
        y = A @ y
        terms[r] = np.vdot(y, y).real
    csum = np.cumsum(terms)
    vals = csum[powers - 1] / (1.0 - norms[powers] ** 2)
    return float(vals.min())


def _group_weight(T: OperatorTuple) -> float:
    U, orders = T.U, T.orders
    if not U:
        return 1.0
    total = 0.0
    for g in itertools.product(*(range(n) for n in orders)):
        M = np.eye(T.dim, dtype=np.complex128)
        for Ui, c in zip(U, g):
            M = np.linalg.matrix_power(Ui, c) @ M
        total += linalg.opnorm(M) ** 2
    return total


def tail_mass(T: OperatorTuple, xi, W: Window, max_power: int = MAX_POWER) -> TailBound:
    """Certified bound on ``sum_{n not in W} ||pi(n) xi||^2``.

    Supported windows: box or total-degree windows of ``Z_+^k`` (optionally
    times a fully enumerated finite group), and cap windows of a numerical
    semigroup whose cap reaches past its conductor. The bound is rigorous:
    it uses ``||A^L|| < 1`` for some ``L <= max_power`` per generator, the
    exact orbit terms just outside the window, and a union bound over the
    directions in which an element can leave a box.

    Raises
    ------
    NotCertifiable
        If some generator has no contracting power up to ``max_power`` or
        the window shape is not covered.
    """
    _check_window(T, W)
    xi = linalg.as_cvector(xi, "xi")
    if W.spec is None:
        raise NotCertifiable("tail bounds need a window built from a box/total_degree/cap spec")
    atoms = _atoms(T.descriptor)
    unbounded = [a for a in atoms if not isinstance(a, FiniteAbelian)]
    group_weight = _group_weight(T)
    if not unbounded:
        if len(W) != math.prod(a.size for a in atoms):
            raise NotCertifiable("finite group window is not the whole group")
        return TailBound(0.0, group_weight=group_weight)
    if len(unbounded) != 1:
        raise NotCertifiable("tail bounds support a single free or numerical factor")
    atom = unbounded[0]
    if atom is not atoms[-1]:
        raise NotCertifiable("tail bounds need the unbounded factor last")
    (kind, value), = W.spec.items()

    if isinstance(atom, FreeAbelian):
        k = atom.k
        if kind == "total_degree":
            caps = [int(value) // k] * k
        else:
            caps = list(value) if isinstance(value, (list, tuple)) else [int(value)] * k
            if len(caps) == 1:
                caps = caps * k
        A = T.A
        norms = [_power_norms(Ai, max_power) for Ai in A]
        powers = [_contraction_powers(nm) for nm in norms]
        for i, p in enumerate(powers):
            if p.size == 0:
                raise NotCertifiable(
                    f"generator {i}: no power L <= {max_power} with ||A^L|| < 1 "
                    f"(spectral radius {linalg.spectral_radius(A[i]):.4f})"
                )
        gains, best_L = zip(*(_gain(nm, p) for nm, p in zip(norms, powers)))
        tau = 0.0
        for i, Ai in enumerate(A):
            start = np.linalg.matrix_power(Ai, caps[i]) @ xi
            other = math.prod(g for j, g in enumerate(gains) if j != i)
            tau += group_weight * other * _vector_tail(Ai, start, norms[i], powers[i])
        return TailBound(
            float(tau),
            powers=tuple(best_L),
            contractions=tuple(float(nm[L]) for nm, L in zip(norms, best_L)),
            gains=tuple(float(g) for g in gains),
            group_weight=group_weight,
        )

    # numerical semigroup: every n > cap in S is n' + j*a with n' in (cap - a, cap]
    gens = atom.generators_
    cap = int(value[0] if isinstance(value, (list, tuple)) else value)
    a = gens[0]
    if cap < conductor(gens) + a - 1:
        raise NotCertifiable(f"cap {cap} too small: need at least conductor + {a} - 1 = {conductor(gens) + a - 1}")
    offset = T.descriptor.ncoords - 1
    M = T.A[0]
    norms = _power_norms(M, max_power)
    powers = _contraction_powers(norms)
    if powers.size == 0:
        raise NotCertifiable(f"generator {a}: no power L <= {max_power} with ||A^L|| < 1")
    table = representable(gens, cap)
    identity = T.descriptor.identity()
    tau = 0.0
    for n in range(max(cap - a + 1, 0), cap + 1):
        if table[n]:
            elem = identity[:offset] + (n,)
            tau += _vector_tail(M, rep_apply(T, elem, xi), norms, powers)
    gain, L = _gain(norms, powers)
    return TailBound(
        float(group_weight * tau),
        powers=(L,),
        contractions=(float(norms[L]),),
        gains=(gain,),
        group_weight=group_weight,
    )


# -- classification ----------------------------------------------------------


class OrbitClass(str, enum.Enum):
    FRAME = "Frame"
    BESSEL_NOT_COMPLETE = "BesselNotComplete"
    NOT_BESSEL = "NotBessel"
    UNDECIDED = "Undecided"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class OrbitDiagnosis:
    classification: OrbitClass
    lower: float
    upper: float
    tau: float | None
    spectral_radii: tuple
    krylov_rank: int
    dim: int
    report: FrameReport
    tail: TailBound | None = None
    note: str = ""

    @property
    def is_frame(self) -> bool:
        return self.classification is OrbitClass.FRAME

    def to_dict(self) -> dict:
        return {
            "classification": str(self.classification),
            "lower": self.lower,
            "upper": self.upper if np.isfinite(self.upper) else "inf",
            "tau": self.tau,
            "spectral_radii": list(self.spectral_radii),
            "krylov_rank": self.krylov_rank,
            "dim": self.dim,
            "truncated": self.report.to_dict(),
            "tail": None if self.tail is None else self.tail.to_dict(),
            "note": self.note,
        }


def classify_orbit(T: OperatorTuple, xi, W: Window, tol: float = 1e-10, max_power: int = MAX_POWER) -> OrbitDiagnosis:
    """Frame property of the full orbit ``{pi(n) xi}`` from its truncation.

    Completeness is the numerical rank of the truncated orbit; the Bessel
    property needs a tail certificate. A complete orbit under a generator of
    spectral radius at least one is provably not Bessel: a common left
    eigenvector ``v`` with ``<xi, v> != 0`` yields coefficients
    ``lambda^n <xi, v>`` along that generator. The frame bounds returned for
    a ``Frame`` verdict enclose the true ones: ``S_W <= S <= S_W + tau I``.
    """
    F = orbit_frame(T, xi, W)
    rep = frame_bounds(F, tol)
    d = T.dim
    complete = rep.rank == d
    radii = tuple(linalg.spectral_radius(A) for A in T.A)
    try:
        tail = tail_mass(T, xi, W, max_power)
    except NotCertifiable as exc:
        tail, note = None, str(exc)
    else:
        note = ""
    if complete and tail is not None:
        cls = OrbitClass.FRAME
        upper = rep.upper + tail.tau
    elif complete and any(r >= 1.0 for r in radii):
        cls, upper = OrbitClass.NOT_BESSEL, float("inf")
        note = note or "complete orbit under a generator with spectral radius >= 1"
    elif tail is not None:
        cls, upper = OrbitClass.BESSEL_NOT_COMPLETE, rep.upper + tail.tau
    else:
        cls, upper = OrbitClass.UNDECIDED, float("inf")
    return OrbitDiagnosis(
        classification=cls,
        lower=rep.lower if complete else 0.0,
        upper=upper,
        tau=None if tail is None else tail.tau,
        spectral_radii=radii,
        krylov_rank=rep.rank,
        dim=d,
        report=rep,
        tail=tail,
        note=note,
    )


# -- random commuting tuples -------------------------------------------------

SCHEMES = ("poly", "triangular", "diagonal")


def _cgauss(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _poly(coeffs, B):
    out = np.zeros_like(B)
    eye = np.eye(B.shape[0], dtype=np.complex128)
    for c in coeffs[::-1]:
        out = out @ B + c * eye
    return out


def random_commuting_tuple(
    d: int,
    k: int,
    rho_max: float = 0.9,
    scheme: str = "poly",
    seed=None,
    group_orders=(),
) -> OperatorTuple:
    """Random commuting tuple on ``C^d`` with ``rho(A_i) <= rho_max``.

    Schemes
    -------
    ``"poly"``
        ``A_i = p_i(B)`` for one random ``B`` and random polynomials of
        degree ``d - 1``, rescaled to spectral radius ``rho_max * u_i``
        with ``u_i`` uniform on ``[1/2, 1]``.
    ``"triangular"``
        Polynomials of one random upper-triangular matrix, conjugated by a
        common random unitary, rescaled the same way.
    ``"diagonal"``
        Diagonal matrices with entries uniform in the disk of radius
        ``rho_max``.

    With ``group_orders`` the tuple becomes a hybrid representation: each
    coordinate of a common eigenbasis gets a random character of the finite
    group, the unitaries act by those characters, and the ``A_i`` are built
    blockwise on the character eigenspaces.
    """
    if d < 1 or k < 1:
        raise ValueError("need d >= 1 and k >= 1")
    if not 0.0 < rho_max < 1.0:
        raise ValueError("rho_max must lie in (0, 1)")
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")
    rng = np.random.default_rng(seed)
    orders = tuple(int(n) for n in group_orders)

    if orders:
        chars = np.stack([rng.integers(0, n, size=d) for n in orders], axis=1)
        order = np.lexsort(chars.T[::-1])
        chars = chars[order]
        _, starts = np.unique(chars, axis=0, return_index=True)
        bounds = sorted(starts.tolist()) + [d]
        blocks = [range(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]
    else:
        chars = np.zeros((d, 0), dtype=int)
        blocks = [range(d)]

    if scheme == "diagonal":
        A = []
        for _ in range(k):
            r = rho_max * np.sqrt(rng.uniform(0.0, 1.0, d))
            A.append(np.diag(r * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, d))))
        Q = np.eye(d, dtype=np.complex128)
    else:
        A = [np.zeros((d, d), dtype=np.complex128) for _ in range(k)]
        for blk in blocks:
            m = len(blk)
            base = _cgauss(rng, m, m)
            if scheme == "triangular":
                base = np.triu(base)
            sl = slice(blk.start, blk.stop)
            for i in range(k):
                A[i][sl, sl] = _poly(_cgauss(rng, m), base)
        if scheme == "triangular" or orders:
            Q = unitary_group.rvs(d, random_state=rng) if d > 1 else np.eye(1, dtype=np.complex128)
        else:
            Q = np.eye(d, dtype=np.complex128)
        scaled = []
        for Ai in A:
            rho = linalg.spectral_radius(Ai)
            target = rho_max * rng.uniform(0.5, 1.0)
            scaled.append(Ai * (target / rho) if rho > 0.0 else Ai)
        A = scaled
    A = [Q @ Ai @ Q.conj().T for Ai in A]
    U = []
    for j, n in enumerate(orders):
        phases = np.exp(2j * np.pi * chars[:, j] / n)
        U.append(Q @ np.diag(phases) @ Q.conj().T)
    if not orders:
        return OperatorTuple.free(*A)
    return OperatorTuple.hybrid(U, orders, A)


def random_vector(d: int, rng) -> np.ndarray:
    return _cgauss(rng, d)
