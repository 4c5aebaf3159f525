"""JSON codecs for matrices, vectors, tuples, frames, symbols and sample
tables, plus atomic report writing.

Complex matrices are stored as ``{"rows", "cols", "re", "im"}`` with the
real and imaginary parts flattened row-major; vectors are ``r x 1``
matrices. Plain (nested) lists of real numbers are accepted on input.
"""
from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .semigroup import FreeAbelian, Window, descriptor_from_json, enumerate_window, parse_window_spec


def matrix_to_json(M) -> dict:
    M = np.atleast_2d(np.asarray(M, dtype=np.complex128))
    return {
        "rows": int(M.shape[0]),
        "cols": int(M.shape[1]),
        "re": M.real.ravel().tolist(),
        "im": M.imag.ravel().tolist(),
    }


def matrix_from_json(obj) -> np.ndarray:
    if isinstance(obj, dict):
        try:
            rows, cols = int(obj["rows"]), int(obj["cols"])
            re = np.asarray(obj["re"], dtype=float)
            im = np.asarray(obj.get("im", np.zeros(rows * cols)), dtype=float)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"bad matrix JSON: {exc}") from exc
        if re.size != rows * cols or im.size != rows * cols:
            raise ValueError(f"matrix JSON has {re.size}/{im.size} entries for shape {rows}x{cols}")
        return (re + 1j * im).reshape(rows, cols)
    M = np.asarray(obj, dtype=np.complex128)
    if M.ndim != 2:
        raise ValueError(f"matrix must be 2-D, got shape {M.shape}")
    return M


def vector_to_json(v) -> dict:
    return matrix_to_json(np.asarray(v, dtype=np.complex128).reshape(-1, 1))


def vector_from_json(obj) -> np.ndarray:
    if isinstance(obj, dict) and "rows" not in obj and "re" in obj:
        re = np.asarray(obj["re"], dtype=float)
        return re + 1j * np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    if isinstance(obj, dict):
        M = matrix_from_json(obj)
        if 1 not in M.shape:
            raise ValueError(f"vector JSON has shape {M.shape}")
        return M.reshape(-1)
    v = np.asarray(obj, dtype=np.complex128)
    if v.ndim != 1:
        raise ValueError(f"vector must be 1-D, got shape {v.shape}")
    return v


def tuple_to_json(T) -> dict:
    from .semigroup import NumericalSG

    out = {"dim": T.dim, "descriptor": T.descriptor.to_json()}
    if isinstance(T.descriptor, NumericalSG):
        out["generators"] = [matrix_to_json(M) for M in T.matrices]
        return out
    out["A"] = [matrix_to_json(M) for M in T.A]
    if T.U:
        out["U"] = [{"order": n, "matrix": matrix_to_json(M)} for n, M in zip(T.orders, T.U)]
    return out


def tuple_from_json(obj: dict):
    """Build an :class:`OperatorTuple` from ``{"dim", "A": [...], "U": [...]}``.

    ``"numerical": [g1, g2, ...]`` turns a single matrix ``A`` into the
    representation ``n -> A^n`` of that numerical semigroup. A full
    ``"descriptor"`` with ``"generators"`` matrices is also accepted.
    """
    from .dynamical import OperatorTuple

    if not isinstance(obj, dict):
        raise ValueError("tuple JSON must be an object")
    if "generators" in obj and "descriptor" in obj:
        T = OperatorTuple(descriptor_from_json(obj["descriptor"]), tuple(matrix_from_json(M) for M in obj["generators"]))
    else:
        A = [matrix_from_json(M) for M in obj.get("A", [])]
        U = obj.get("U", [])
        if "numerical" in obj:
            if len(A) != 1 or U:
                raise ValueError("numerical semigroup tuples take exactly one matrix A")
            T = OperatorTuple.numerical(A[0], obj["numerical"])
        else:
            if not A and not U:
                raise ValueError("tuple JSON needs at least one matrix")
            T = OperatorTuple.hybrid(
                [matrix_from_json(u["matrix"]) for u in U], [int(u["order"]) for u in U], A
            )
    if "dim" in obj and int(obj["dim"]) != T.dim:
        raise ValueError(f"declared dim {obj['dim']} but matrices are {T.dim}x{T.dim}")
    return T


def window_to_json(W: Window):
    return W.spec if W.spec is not None else {"elements": [list(e) for e in W.elements]}


def window_from_json(obj, descriptor) -> Window:
    if isinstance(obj, dict) and "elements" in obj:
        return Window.from_elements(descriptor, [tuple(e) for e in obj["elements"]])
    return enumerate_window(descriptor, parse_window_spec(obj))


def frame_to_json(F, W: Window | None = None) -> dict:
    out = {"dim": F.dim, "vectors": [vector_to_json(v) for v in F.vectors]}
    if W is not None:
        out["window"] = window_to_json(W)
        out["descriptor"] = W.descriptor.to_json()
    return out


def frame_from_json(obj: dict):
    from .frames import Frame

    vecs = [vector_from_json(v) for v in obj["vectors"]]
    if not vecs:
        raise ValueError("frame JSON has no vectors")
    F = Frame(np.stack(vecs))
    if "dim" in obj and int(obj["dim"]) != F.dim:
        raise ValueError(f"declared dim {obj['dim']} but vectors have length {F.dim}")
    if "window" in obj:
        desc = descriptor_from_json(obj["descriptor"]) if "descriptor" in obj else FreeAbelian(1)
        W = window_from_json(obj["window"], desc)
        if len(W) != len(F):
            raise ValueError(f"window has {len(W)} elements for {len(F)} vectors")
        F = Frame(F.vectors, W.elements)
    return F


def symbol_to_json(phi) -> dict:
    return {
        "window": window_to_json(phi.window),
        "descriptor": phi.window.descriptor.to_json(),
        "coeffs": {"re": phi.coeffs.real.tolist(), "im": phi.coeffs.imag.tolist()},
    }


def symbol_from_json(obj: dict):
    from .model_space import PolySymbol

    k = int(obj.get("k", 1))
    desc = descriptor_from_json(obj["descriptor"]) if "descriptor" in obj else FreeAbelian(k)
    W = window_from_json(obj["window"], desc)
    coeffs = vector_from_json(obj["coeffs"])
    return PolySymbol(W, coeffs)


def samples_to_json(Y) -> dict:
    Y = np.atleast_2d(np.asarray(Y, dtype=np.complex128))
    return {
        "sensors": int(Y.shape[0]),
        "times": int(Y.shape[1]),
        "re": Y.real.ravel().tolist(),
        "im": Y.imag.ravel().tolist(),
    }


def samples_from_json(obj: dict) -> np.ndarray:
    p, n = int(obj["sensors"]), int(obj["times"])
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros(p * n)), dtype=float)
    if re.size != p * n or im.size != p * n:
        raise ValueError(f"sample table has {re.size} entries for {p} sensors x {n} times")
    return (re + 1j * im).reshape(p, n)


def load_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (complex, np.complexfloating)):
        return {"re": o.real, "im": o.imag}
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_default) + "\n"


def write_json_atomic(path, obj) -> None:
    """Write ``obj`` as JSON through a temporary file in the same directory."""
    text = dumps(obj)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", suffix=".json", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
