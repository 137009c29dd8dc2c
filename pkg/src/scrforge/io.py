"""Plain-text persistence: matrix CSVs, system directories and SCR bundles."""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .binarize import SCRSystem
from .errors import IngestionError, InvalidInputError
from .linalg import SHIFT_CONVENTION
from .reservoir import LinearReadout, LinearReservoir

FORMAT_VERSION = "1"


def write_matrix(path, M) -> None:
    """One row per line, comma separated, shortest round-trip float repr, no header."""
    M = np.atleast_2d(np.asarray(M))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in M:
            fh.write(",".join(repr(float(v)) if M.dtype.kind == "f" else str(int(v)) for v in row))
            fh.write("\n")


def read_matrix(path) -> np.ndarray:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(c) for c in line.split(",")])
            except ValueError:
                raise IngestionError(f"{os.fspath(path)}: non-numeric cell", line=lineno) from None
            if len(rows[-1]) != len(rows[0]):
                raise IngestionError(f"{os.fspath(path)}: ragged row", line=lineno)
    if not rows:
        raise IngestionError(f"{os.fspath(path)}: empty matrix file")
    return np.array(rows)


def write_manifest(path, items: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for k, v in items.items():
            fh.write(f"{k}={repr(v) if isinstance(v, float) else v}\n")


def read_manifest(path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise IngestionError(f"{os.fspath(path)}: expected key=value", line=lineno)
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def save_system(R: LinearReservoir, directory) -> Path:
    """``manifest.txt`` plus ``W.csv``, ``V.csv``, ``A.csv``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_matrix(d / "W.csv", R.W)
    write_matrix(d / "V.csv", R.V)
    write_matrix(d / "A.csv", R.readout.A)
    write_manifest(d / "manifest.txt", {
        "kind": "linear_reservoir", "format": FORMAT_VERSION, "n": R.n, "m": R.m, "d": R.d,
        "lambda": R.lam, "input_bound": R.input_bound,
    })
    return d


def load_system(directory) -> LinearReservoir:
    d = Path(directory)
    if not (d / "manifest.txt").is_file():
        raise InvalidInputError(f"{d}: no manifest.txt")
    man = read_manifest(d / "manifest.txt")
    try:
        bound = float(man.get("input_bound", "1.0"))
    except ValueError:
        raise InvalidInputError("manifest input_bound is not a number") from None
    for name in ("W.csv", "V.csv"):
        if not (d / name).is_file():
            raise InvalidInputError(f"{d}: missing {name}")
    W = read_matrix(d / "W.csv")
    V = read_matrix(d / "V.csv")
    A = read_matrix(d / "A.csv") if (d / "A.csv").is_file() else np.eye(W.shape[0])
    R = LinearReservoir(W, V, LinearReadout(A), bound)
    for key, actual in (("n", R.n), ("m", R.m), ("d", R.d)):
        if key in man and int(man[key]) != actual:
            raise InvalidInputError(f"manifest {key}={man[key]} disagrees with the matrices ({actual})")
    return R


def save_scr(scr: SCRSystem, directory) -> Path:
    """Manifest, bit-packed signs (1 for +1), a CSV mirror of the signs and the readout.

    The stored readout acts on the cycle block average, so the full readout
    is ``base_readout.A @ L``.
    """
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    bits = np.packbits((scr.V_scr > 0).astype(np.uint8).reshape(-1))
    (d / "signs.bin").write_bytes(bits.tobytes())
    write_matrix(d / "V.csv", scr.V_scr)
    write_matrix(d / "readout.csv", scr.base_readout.A)
    write_manifest(d / "manifest.txt", {
        "kind": "simple_cycle_reservoir", "format": FORMAT_VERSION, "n_scr": scr.n, "n_cycle": scr.n_cycle,
        "k": scr.k, "N_avg": scr.N_avg, "m": scr.m, "d": scr.d, "lambda": scr.lam,
        "input_bound": scr.input_bound, "shift_convention": SHIFT_CONVENTION,
    })
    return d


def load_scr(directory) -> SCRSystem:
    d = Path(directory)
    man = read_manifest(d / "manifest.txt")
    n_scr, m = int(man["n_scr"]), int(man["m"])
    raw = np.frombuffer((d / "signs.bin").read_bytes(), dtype=np.uint8)
    signs = np.unpackbits(raw)[: n_scr * m].reshape(n_scr, m).astype(np.int8) * 2 - 1
    return SCRSystem(lam=float(man["lambda"]), n_cycle=int(man["n_cycle"]), k=int(man["k"]),
                     N_avg=int(man["N_avg"]), V_scr=signs,
                     base_readout=LinearReadout(read_matrix(d / "readout.csv"), composed=True),
                     input_bound=float(man["input_bound"]))
