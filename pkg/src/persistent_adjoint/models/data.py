"""Synthetic datasets and their CSV layout.

A dataset directory holds

``w_true.csv``   true parameter matrix, ``n`` rows of ``n`` values, no header
``w0.csv``       initial parameter matrix, same layout
``inputs.csv``   header ``instance,v0,...,v{n-1}``; one row per instance
                 (log total concentrations or external drives)
``targets.csv``  same layout as ``inputs.csv``; equilibrium states

Numbers are written with 17 significant digits so a save/load round trip is
exact.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..adjoint import solve_primal
from .parallel import make_parallel

TARGET_TOL = 1e-12


@dataclass
class Dataset:
    kind: str
    seed: int
    w_true: np.ndarray
    inputs: np.ndarray
    targets: np.ndarray
    w0: np.ndarray

    @property
    def n(self):
        return self.inputs.shape[1]

    @property
    def m(self):
        return self.inputs.shape[0]


def _sym(a):
    out = (a + a.T) / 2.0
    np.fill_diagonal(out, 0.0)
    return out


def generate_dataset(kind: str, n: int, m: int, seed: int) -> Dataset:
    """Random true parameters, random inputs, and their equilibrium targets.

    All draws are standard normal from a PCG64 generator seeded with
    ``seed``, in the fixed order: true parameters, inputs, initial
    parameters.  Reaction-rate matrices are symmetrised as ``(A + A^T)/2``.
    """
    if kind not in ("crn", "nn"):
        raise ValueError(f"unknown model kind {kind!r}")
    rng = np.random.Generator(np.random.PCG64(seed))
    a_true = rng.standard_normal((n, n))
    inputs = rng.standard_normal((m, n))
    a0 = rng.standard_normal((n, n))
    if kind == "crn":
        w_true, w0 = _sym(a_true), _sym(a0)
    else:
        w_true, w0 = a_true, a0
    system, _ = make_parallel(kind, inputs, np.zeros_like(inputs))
    x_star = solve_primal(system, system.params(w_true), TARGET_TOL)
    return Dataset(kind, seed, w_true, inputs, x_star.reshape(m, n), w0)


def _write_rows(path, rows):
    n = rows.shape[1]
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["instance"] + [f"v{k}" for k in range(n)])
        for i, row in enumerate(rows):
            out.writerow([i] + [repr(float(v)) for v in row])


def _read_rows(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return np.array([[float(v) for v in r[1:]] for r in rows[1:]])


def save_dataset(ds: Dataset, directory) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    np.savetxt(d / "w_true.csv", ds.w_true, delimiter=",", fmt="%.17g")
    np.savetxt(d / "w0.csv", ds.w0, delimiter=",", fmt="%.17g")
    _write_rows(d / "inputs.csv", ds.inputs)
    _write_rows(d / "targets.csv", ds.targets)
    (d / "dataset.json").write_text(json.dumps({"kind": ds.kind, "seed": ds.seed}) + "\n")


def load_dataset(directory) -> Dataset:
    d = Path(directory)
    meta = json.loads((d / "dataset.json").read_text())
    return Dataset(
        kind=meta["kind"],
        seed=int(meta["seed"]),
        w_true=np.atleast_2d(np.loadtxt(d / "w_true.csv", delimiter=",")),
        inputs=_read_rows(d / "inputs.csv"),
        targets=_read_rows(d / "targets.csv"),
        w0=np.atleast_2d(np.loadtxt(d / "w0.csv", delimiter=",")),
    )
