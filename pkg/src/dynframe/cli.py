"""Command-line interface: ``dynframe <command> [flags]``.

Every command writes one JSON report (to ``--out`` or stdout) with the
configuration, seed, package version, a timestamp, the list of checks
(value, tolerance, passed) and the result payload. Exit status is 0 when
all checks pass, 1 when a verdict fails (the report is still written) and
2 for unusable input.
"""
from __future__ import annotations

import argparse
import datetime
import sys

import numpy as np

from . import __version__, io
from .commutant import are_equivalent_frame_vectors, centrality_experiment, commutant_basis, commutation_residual
from .dynamical import classify_orbit
from .errors import DynFrameError, InconsistentVerdicts, NotCertified
from .frames import frame_bounds, frame_operator, reconstruct
from .model_space import (
    build_model_space,
    check_cohyperinvariance,
    check_coinvariance,
    check_intertwining,
    cohyperinvariance_residuals,
    fejer_average,
    fejer_double_sum,
    fejer_norm_check,
    model_frame_equivalence,
    random_projector_basis,
    truncated_commutant_structure,
)
from .sampling import SamplingScheme, demo_diffusion, recover
from .semigroup import NumericalSG, enumerate_window, parse_window_spec


class UsageError(Exception):
    """Input that cannot be turned into a computation (exit status 2)."""


def _check(name, value, tolerance, passed=None) -> dict:
    if passed is None:
        passed = bool(value <= tolerance)
    return {"name": name, "value": value, "tolerance": tolerance, "passed": bool(passed)}


def _load(path, decoder, what):
    try:
        return decoder(io.load_json(path))
    except FileNotFoundError as exc:
        raise UsageError(f"{what}: file not found: {path}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"{what} ({path}): {exc}") from exc


def _window(T, spec):
    try:
        return enumerate_window(T.descriptor, parse_window_spec(spec))
    except ValueError as exc:
        raise UsageError(f"window: {exc}") from exc


# -- commands ----------------------------------------------------------------


def cmd_frame_check(args):
    F = _load(args.frame, io.frame_from_json, "frame")
    rep = frame_bounds(F)
    S = frame_operator(F)
    trace_gap = abs(np.trace(S).real - float(np.sum(np.abs(F.vectors) ** 2)))
    checks = [
        _check("is_frame", rep.classification.value, "Frame|Parseval", rep.classification.is_frame),
        _check("trace_identity", trace_gap / max(np.trace(S).real, 1e-300), 1e-12),
    ]
    result = {"report": rep.to_dict()}
    if rep.classification.is_frame:
        rng = np.random.default_rng(args.seed if args.seed is not None else 0)
        x = rng.standard_normal(F.dim) + 1j * rng.standard_normal(F.dim)
        c = F.vectors.conj() @ x
        xr = reconstruct(F, c, method=args.method)
        err = float(np.linalg.norm(xr - x) / np.linalg.norm(x))
        checks.append(_check("roundtrip_rel_error", err, 1e-8))
    return checks, result


def cmd_orbit(args):
    T = _load(args.tuple, io.tuple_from_json, "tuple")
    xi = _load(args.xi, io.vector_from_json, "xi")
    W = _window(T, args.window)
    diag = classify_orbit(T, xi, W)
    return [_check("classification", str(diag.classification), "Frame", diag.is_frame)], {
        "window_size": len(W),
        "diagnosis": diag.to_dict(),
    }


def cmd_equiv(args):
    T = _load(args.tuple, io.tuple_from_json, "tuple")
    xi = _load(args.xi, io.vector_from_json, "xi")
    eta = _load(args.eta, io.vector_from_json, "eta")
    W = _window(T, args.window)
    try:
        v = are_equivalent_frame_vectors(T, xi, eta, W)
    except NotCertified as exc:
        return [_check("certified_frame_vectors", str(exc), "Frame", False)], {"status": "Rejected"}
    checks = [_check("equivalent", str(v.status), "Equivalent", v.equivalent)]
    if v.witness is not None:
        w = v.witness
        checks += [
            _check("vector_residual", w.vector_residual, 1e-8),
            _check("commutation_residual", w.commutation_residual, 1e-8),
            _check("sigma_ratio", w.sigma_ratio, 1e-8, w.sigma_ratio >= 1e-8),
        ]
    checks.append(
        _check("projector_distance", v.frame_check.projector_distance, v.frame_check.projector_tol,
               v.frame_check.projector_verdict == v.equivalent)
    )
    return checks, v.to_dict()


def cmd_commutant(args):
    T = _load(args.tuple, io.tuple_from_json, "tuple")
    B = commutant_basis(T)
    _, id_res = B.coordinates(np.eye(T.dim))
    comm = max(commutation_residual(M, T.matrices) for M in B.basis)
    gram = np.einsum("mij,nij->mn", B.basis.conj(), B.basis)
    ortho = float(np.abs(gram - np.eye(B.r)).max())
    checks = [
        _check("identity_membership", id_res, 1e-10),
        _check("max_commutation_residual", comm, 1e-8),
        _check("basis_orthonormality", ortho, 1e-12),
    ]
    return checks, {"dimension": B.r, "basis": [io.matrix_to_json(M) for M in B.basis]}


def cmd_model_space(args):
    T = _load(args.tuple, io.tuple_from_json, "tuple")
    xi = _load(args.xi, io.vector_from_json, "xi")
    W = _window(T, args.window)
    try:
        M = build_model_space(T, xi, W)
    except NotCertified as exc:
        return [_check("certified_frame", str(exc), "Frame", False)], {}
    checks = []
    for g in W.descriptor.generators():
        ic = check_intertwining(M, g)
        checks += [dict(c.to_dict(), name=f"{c.name}{g}") for c in (ic.interior, ic.full)]
        checks.append(check_coinvariance(M, g).to_dict())
    eq = model_frame_equivalence(M)
    checks.append(_check("model_frame_equivalent", eq.residual, eq.residual_tol, eq.equivalent))
    P = M.P
    checks.append(_check("projector_idempotent", float(np.linalg.norm(P @ P - P, 2)), 1e-10))
    return checks, {"window_size": len(W), "rank": M.rank, "tau": M.tau, "equivalence": eq.to_dict()}


def cmd_cohyper(args):
    T = _load(args.tuple, io.tuple_from_json, "tuple")
    xi = _load(args.xi, io.vector_from_json, "xi")
    W = _window(T, args.window)
    try:
        M = build_model_space(T, xi, W)
    except NotCertified as exc:
        return [_check("certified_frame", str(exc), "Frame", False)], {}
    chk = check_cohyperinvariance(M)
    result = {"window_size": len(W), "tau": M.tau, "budget": chk.tolerance}
    if args.controls:
        rng = np.random.default_rng(args.seed)
        res = [
            float(cohyperinvariance_residuals(random_projector_basis(len(W), M.rank, rng), W, M.table).max())
            for _ in range(args.controls)
        ]
        result["negative_controls"] = {"residuals": res, "failing": sum(r >= 1e-2 for r in res)}
    return [chk.to_dict()], result


def cmd_fejer(args):
    phi = _load(args.phi, io.symbol_from_json, "symbol")
    psi = fejer_average(phi, args.n)
    literal = fejer_double_sum(phi, args.n)
    j = phi.degrees
    expected = phi.coeffs * np.clip(j / (args.n + 1), None, 1.0)
    factor_gap = float(np.abs((phi.coeffs - psi.coeffs) - expected).max())
    checks = [
        _check("double_sum_agreement", float(np.abs(psi.coeffs - literal.coeffs).max()), 1e-12),
        _check("error_factor", factor_gap, 1e-12),
        fejer_norm_check(phi, args.n).to_dict(),
    ]
    return checks, {"psi": io.symbol_to_json(psi), "n": args.n}


def cmd_recover(args):
    raw = _load(args.scheme, lambda o: o, "scheme")
    try:
        scheme = SamplingScheme(io.matrix_from_json(raw["A"]), io.matrix_from_json(raw["sensors"]), int(raw["N"]))
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"scheme: {exc}") from exc
    Y = _load(args.samples, io.samples_from_json, "samples")
    truth = _load(args.truth, io.vector_from_json, "truth") if args.truth else None
    try:
        rep = recover(scheme, Y, truth=truth, method=args.method)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    except DynFrameError as exc:
        return [_check("certified_frame", str(exc), "Frame", False)], {}
    checks = [_check("certified_frame", "Frame", "Frame", True)]
    if rep.rel_error is not None:
        checks.append(_check("rel_error", rep.rel_error, args.tol))
    return checks, rep.to_dict()


def cmd_demo(args):
    out = demo_diffusion(args.nodes, args.eps, tuple(args.sensors), args.steps, seed=args.seed)
    checks = [_check("classification", out["diagnosis"]["classification"], "Frame",
                     out["diagnosis"]["classification"] == "Frame")]
    if out.get("recovery"):
        checks.append(_check("rel_error", out["recovery"]["rel_error"], 1e-6))
        checks.append(_check("noise_slope_deviation", abs(out["noise"]["slope"] - 1.0), 0.05))
    return checks, out


def cmd_centrality(args):
    cfg = io.load_json(args.config) if args.config else {}
    for key in ("k", "d", "scheme", "rho_max", "trials", "group_orders", "window"):
        val = getattr(args, key)
        if val is not None:
            cfg[key] = val
    cfg["seed"] = args.seed
    try:
        rep = centrality_experiment(cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    s = rep["summary"]
    checks = [_check("pairs_equivalent", s["passed"], s["total"], s["passed"] == s["total"])]
    if s["max_vector_residual"] is not None:
        checks += [
            _check("max_vector_residual", s["max_vector_residual"], 1e-8),
            _check("max_commutation_residual", s["max_commutation_residual"], 1e-8),
            _check("min_sigma_ratio", s["min_sigma_ratio"], 1e-8, s["min_sigma_ratio"] >= 1e-8),
        ]
    return checks, rep


def cmd_conjecture_probe(args):
    try:
        desc = NumericalSG(tuple(args.numerical))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    W = enumerate_window(desc, {"cap": args.cap})
    st = truncated_commutant_structure(W)
    d = st.to_dict()
    return d["checks"], {"generators": list(desc.generators_), "cap": args.cap, **{k: v for k, v in d.items() if k != "checks"}}


# -- argument parsing --------------------------------------------------------


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _window_arg(text):
    try:
        return parse_window_spec(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dynframe", description="Dynamical frames: verification experiments.")
    p.add_argument("--version", action="version", version=f"dynframe {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_, seed_required=False):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--out", help="report path (default: stdout)")
        sp.add_argument("--seed", type=int, required=seed_required, help="random seed")
        sp.set_defaults(func=func)
        return sp

    sp = add("frame-check", cmd_frame_check, "bounds, classification and reconstruction of a frame")
    sp.add_argument("--frame", required=True)
    sp.add_argument("--method", choices=("dual", "iterative"), default="dual")

    for name, func, help_ in (
        ("orbit", cmd_orbit, "classify the orbit of a vector"),
        ("model-space", cmd_model_space, "model-space identities for an orbit frame"),
        ("cohyper", cmd_cohyper, "co-hyperinvariance of the analysis range"),
    ):
        sp = add(name, func, help_)
        sp.add_argument("--tuple", required=True)
        sp.add_argument("--xi", required=True)
        sp.add_argument("--window", required=True, type=_window_arg)
        if name == "cohyper":
            sp.add_argument("--controls", type=int, default=0, help="random-projector negative controls")

    sp = add("equiv", cmd_equiv, "equivalence of two frame vectors")
    sp.add_argument("--tuple", required=True)
    sp.add_argument("--xi", required=True)
    sp.add_argument("--eta", required=True)
    sp.add_argument("--window", required=True, type=_window_arg)

    sp = add("commutant", cmd_commutant, "commutant basis of a tuple")
    sp.add_argument("--tuple", required=True)

    sp = add("fejer", cmd_fejer, "Fejer average of a polynomial symbol")
    sp.add_argument("--phi", required=True)
    sp.add_argument("--n", type=int, required=True)

    sp = add("recover", cmd_recover, "recover a state from space-time samples")
    sp.add_argument("--scheme", required=True, help='JSON {"A", "sensors", "N"}')
    sp.add_argument("--samples", required=True)
    sp.add_argument("--truth")
    sp.add_argument("--method", choices=("dual", "iterative"), default="dual")
    sp.add_argument("--tol", type=float, default=1e-6)

    sp = add("demo", cmd_demo, "diffusion-on-a-cycle sampling demo", seed_required=True)
    sp.add_argument("--nodes", type=int, default=16)
    sp.add_argument("--eps", type=float, default=0.1)
    sp.add_argument("--sensors", type=_int_list, default=[0, 1])
    sp.add_argument("--steps", type=int)

    sp = add("centrality", cmd_centrality, "randomized equivalence of frame-vector pairs", seed_required=True)
    sp.add_argument("--config")
    sp.add_argument("--k", type=int)
    sp.add_argument("--d", type=_int_list)
    sp.add_argument("--scheme", choices=("poly", "triangular", "diagonal"))
    sp.add_argument("--rho-max", dest="rho_max", type=float)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--group-orders", dest="group_orders", type=_int_list)
    sp.add_argument("--window", type=_window_arg)

    sp = add("conjecture-probe", cmd_conjecture_probe, "commutant dimension of truncated shifts")
    sp.add_argument("--numerical", type=_int_list, required=True)
    sp.add_argument("--cap", type=int, required=True)
    return p


def _config(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func", "out", "command")}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "d", None) is not None and len(args.d) == 1:
        args.d = args.d[0]
    try:
        checks, result = args.func(args)
    except InconsistentVerdicts as exc:
        checks, result = [_check("consistent_verdicts", str(exc), "agreement", False)], {}
    except UsageError as exc:
        print(f"dynframe {args.command}: {exc}", file=sys.stderr)
        return 2
    except (ValueError, DynFrameError) as exc:
        print(f"dynframe {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    passed = all(c["passed"] for c in checks)
    report = {
        "command": args.command,
        "version": __version__,
        "config": _config(args),
        "seed": args.seed,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "checks": checks,
        "result": result,
        "passed": passed,
    }
    if args.out:
        io.write_json_atomic(args.out, report)
    else:
        sys.stdout.write(io.dumps(report))
    return 0 if passed else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
