"""Dynamical sampling: observe ``<A^n f, g_j>`` for a few sensors ``g_j``
over times ``0..N`` and recover the initial state ``f``.

The samples are the analysis coefficients of ``f`` against the family
``(A*)^n g_j``, so recovery is frame reconstruction over the index set of
``(sensor, time)`` pairs.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .dynamical import OperatorTuple, OrbitDiagnosis, classify_orbit
from .errors import DimMismatch, InconsistentVerdicts, NotAFrame
from .frames import Frame, FrameReport, frame_bounds, reconstruct
from .semigroup import enumerate_window

SAMPLE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SamplingScheme:
    """Evolution ``A``, sensors ``g_j`` (rows of ``sensors``) and times ``0..N``."""

    A: np.ndarray
    sensors: np.ndarray
    N: int

    def __post_init__(self):
        A = linalg.as_cmatrix(self.A, "evolution")
        if A.shape[0] != A.shape[1]:
            raise DimMismatch(f"evolution must be square, got {A.shape}")
        G = np.atleast_2d(np.asarray(self.sensors, dtype=np.complex128))
        if G.ndim != 2 or G.shape[0] < 1:
            raise ValueError("need at least one sensor")
        if G.shape[1] != A.shape[0]:
            raise DimMismatch(f"sensors have length {G.shape[1]}, state space is C^{A.shape[0]}")
        if int(self.N) < 0:
            raise ValueError("time horizon N must be non-negative")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "sensors", G)
        object.__setattr__(self, "N", int(self.N))

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.sensors.shape[0]

    @property
    def index(self) -> tuple:
        return tuple((j, n) for j in range(self.p) for n in range(self.N + 1))


def collect_samples(scheme: SamplingScheme, f) -> np.ndarray:
    """Sample table ``y[j, n] = <A^n f, g_j>``, cross-checked against ``<f, (A*)^n g_j>``.

    Raises
    ------
    DimMismatch
        If ``f`` does not live in the state space.
    InconsistentVerdicts
        If the forward and adjoint evaluations disagree beyond ``1e-12``
        relative to the largest sample.
    """
    f = linalg.as_cvector(f, "state")
    if f.shape[0] != scheme.dim:
        raise DimMismatch(f"state has length {f.shape[0]}, scheme acts on C^{scheme.dim}")
    G = scheme.sensors
    forward = np.empty((scheme.p, scheme.N + 1), dtype=np.complex128)
    x = f.copy()
    for n in range(scheme.N + 1):
        forward[:, n] = G.conj() @ x
        x = scheme.A @ x
    adjoint = sampling_vectors(scheme).conj() @ f
    adjoint = adjoint.reshape(scheme.p, scheme.N + 1)
    scale = max(float(np.abs(forward).max()), float(np.linalg.norm(f) * np.abs(G).max()), np.finfo(float).tiny)
    gap = float(np.abs(forward - adjoint).max())
    if gap > SAMPLE_TOL * scale:
        raise InconsistentVerdicts(f"forward and adjoint samples differ by {gap:.3e} (scale {scale:.3e})")
    return forward


def sampling_vectors(scheme: SamplingScheme) -> np.ndarray:
    """Rows ``(A*)^n g_j`` in sensor-major order."""
    Ah = scheme.A.conj().T
    out = np.empty((scheme.p, scheme.N + 1, scheme.dim), dtype=np.complex128)
    for j, g in enumerate(scheme.sensors):
        h = g.copy()
        for n in range(scheme.N + 1):
            out[j, n] = h
            h = Ah @ h
    return out.reshape(-1, scheme.dim)


class SamplingClass(str, enum.Enum):
    FRAME = "Frame"
    INCOMPLETE = "Incomplete"
    NOT_BESSEL = "NotBessel"
    UNDECIDED = "Undecided"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SamplingDiagnosis:
    """Verdict on the infinite-time system ``{(A*)^n g_j}``.

    ``report`` describes the finite family actually sampled; ``upper``
    adds the certified tails of every sensor orbit.
    """

    classification: SamplingClass
    report: FrameReport
    rank: int
    dim: int
    upper: float
    tau: float | None
    sensors: tuple = field(default=())

    @property
    def is_frame(self) -> bool:
        return self.classification is SamplingClass.FRAME

    def to_dict(self) -> dict:
        return {
            "classification": str(self.classification),
            "rank": self.rank,
            "dim": self.dim,
            "lower": self.report.lower,
            "upper": self.upper if np.isfinite(self.upper) else "inf",
            "tau": self.tau,
            "truncated": self.report.to_dict(),
            "sensors": [d.to_dict() for d in self.sensors],
        }


def recovery_frame(scheme: SamplingScheme) -> tuple[Frame, SamplingDiagnosis]:
    """Sampling frame over ``(sensor, time)`` and its diagnosis.

    Completeness is decided on the union of the sensor orbits; each sensor
    orbit is classified separately under ``A*`` to certify its tail. A
    complete system under ``rho(A) >= 1`` cannot be Bessel.
    """
    F = Frame(sampling_vectors(scheme), scheme.index)
    rep = frame_bounds(F)
    Tstar = OperatorTuple.single(scheme.A.conj().T)
    W = enumerate_window(Tstar.descriptor, {"cap": scheme.N})
    per_sensor = []
    for g in scheme.sensors:
        if np.any(g):
            per_sensor.append(classify_orbit(Tstar, g, W))
    taus = [d.tau for d in per_sensor]
    tau = float(sum(taus)) if per_sensor and all(t is not None for t in taus) else None
    complete = rep.rank == scheme.dim
    if not complete:
        cls, upper = SamplingClass.INCOMPLETE, rep.upper + (tau if tau is not None else np.inf)
    elif tau is not None:
        cls, upper = SamplingClass.FRAME, rep.upper + tau
    elif linalg.spectral_radius(scheme.A) >= 1.0:
        cls, upper = SamplingClass.NOT_BESSEL, np.inf
    else:
        cls, upper = SamplingClass.UNDECIDED, np.inf
    return F, SamplingDiagnosis(cls, rep, rep.rank, scheme.dim, float(upper), tau, tuple(per_sensor))


@dataclass(frozen=True)
class RecoveryReport:
    recovered: np.ndarray
    rel_error: float | None
    lower: float
    upper: float
    condition: float
    noise_gain: float
    method: str = "dual"

    def to_dict(self) -> dict:
        from .io import vector_to_json

        return {
            "recovered": vector_to_json(self.recovered),
            "rel_error": self.rel_error,
            "lower": self.lower,
            "upper": self.upper,
            "condition": self.condition,
            "noise_gain": self.noise_gain,
            "method": self.method,
        }


def recover(scheme: SamplingScheme, samples, truth=None, method: str = "dual", diagnosis=None) -> RecoveryReport:
    """Reconstruct ``f`` from a sample table.

    ``noise_gain`` is ``sqrt(sum_k ||dual_k||^2)``: for i.i.d. noise of
    standard deviation ``sigma`` the root-mean-square error is
    ``sigma * noise_gain``.

    Raises
    ------
    NotAFrame
        Unless the sampling system is certified as a frame.
    """
    Y = np.atleast_2d(np.asarray(samples, dtype=np.complex128))
    if Y.shape != (scheme.p, scheme.N + 1):
        raise DimMismatch(f"sample table has shape {Y.shape}, expected {(scheme.p, scheme.N + 1)}")
    F, diag = recovery_frame(scheme) if diagnosis is None else diagnosis
    if not diag.is_frame:
        raise NotAFrame(f"sampling system is {diag.classification}, recovery is not stable")
    fhat = reconstruct(F, Y.reshape(-1), method=method)
    rel = None
    if truth is not None:
        truth = linalg.as_cvector(truth, "truth")
        tn = float(np.linalg.norm(truth))
        err = float(np.linalg.norm(fhat - truth))
        rel = err / tn if tn > 0.0 else err
    gain = float(np.sqrt(np.sum(1.0 / F._svd.s**2)))
    return RecoveryReport(fhat, rel, diag.report.lower, diag.report.upper, diag.report.condition, gain, method)


# -- cycle-graph diffusion demo ----------------------------------------------


def diffusion_matrix(n_nodes: int, eps: float, radius: float = 0.99) -> np.ndarray:
    """``(1 - 2 eps) I + eps (L + R)`` on the cycle, scaled to spectral radius ``radius``."""
    if n_nodes < 2:
        raise ValueError("need at least two nodes")
    if not 0.0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    shift = np.roll(np.eye(n_nodes), 1, axis=0)
    A = (1.0 - 2.0 * eps) * np.eye(n_nodes) + eps * (shift + shift.T)
    return radius * A / linalg.spectral_radius(A)


def complex_noise(rng, shape) -> np.ndarray:
    """I.i.d. complex Gaussian entries with ``E|z|^2 = 1``."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def demo_diffusion(
    n_nodes: int = 16,
    eps: float = 0.1,
    sensors=(0, 1),
    steps: int | None = None,
    seed=0,
    noise_levels=(1e-4, 1e-3, 1e-2),
    monte_carlo: int = 200,
) -> dict:
    """Evolve, sample, certify and recover on a diffusing cycle graph.

    Also runs the single-sensor control (node ``sensors[0]`` alone), a
    noise sweep with one common noise draw scaled across ``noise_levels``
    (log-log slope of the error) and a Monte Carlo check of the RMS error
    against ``sigma * noise_gain``.
    """
    steps = 4 * n_nodes if steps is None else int(steps)
    rng = np.random.default_rng(seed)
    A = diffusion_matrix(n_nodes, eps)
    G = np.eye(n_nodes)[list(sensors)]
    scheme = SamplingScheme(A, G, steps - 1)
    f = complex_noise(rng, n_nodes)
    Y = collect_samples(scheme, f)
    F, diag = recovery_frame(scheme)
    single = SamplingScheme(A, G[:1], steps - 1)
    _, single_diag = recovery_frame(single)

    out = {
        "n_nodes": n_nodes,
        "eps": eps,
        "sensors": list(sensors),
        "steps": steps,
        "spectral_radius": linalg.spectral_radius(A),
        "diagnosis": diag.to_dict(),
        "single_sensor": {"sensor": int(sensors[0]), "diagnosis": single_diag.to_dict()},
    }
    if not diag.is_frame:
        out["recovery"] = None
        return out
    rep = recover(scheme, Y, truth=f, diagnosis=(F, diag))
    zero = recover(scheme, np.zeros_like(Y), truth=None, diagnosis=(F, diag))
    noise = complex_noise(rng, Y.shape)
    errors = []
    for sigma in noise_levels:
        r = recover(scheme, Y + sigma * noise, diagnosis=(F, diag))
        errors.append(float(np.linalg.norm(r.recovered - f)))
    slope = float(np.polyfit(np.log10(noise_levels), np.log10(errors), 1)[0]) if len(noise_levels) > 1 else None
    sigma = noise_levels[-1]
    mc = []
    for _ in range(monte_carlo):
        r = recover(scheme, Y + sigma * complex_noise(rng, Y.shape), diagnosis=(F, diag))
        mc.append(float(np.linalg.norm(r.recovered - f)) ** 2)
    out["recovery"] = {
        "rel_error": rep.rel_error,
        "lower": rep.lower,
        "upper": rep.upper,
        "condition": rep.condition,
        "noise_gain": rep.noise_gain,
        "zero_state_norm": float(np.linalg.norm(zero.recovered)),
    }
    out["noise"] = {
        "levels": list(noise_levels),
        "errors": errors,
        "slope": slope,
        "monte_carlo_sigma": sigma,
        "monte_carlo_trials": monte_carlo,
        "rms_error": float(np.sqrt(np.mean(mc))),
        "predicted_rms": sigma * rep.noise_gain,
    }
    return out
