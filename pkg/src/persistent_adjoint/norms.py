"""Vector norms, their duals, and induced matrix norms.

Norms are described by :class:`NormSpec` values rather than functions so that
traces and reports can record which norm produced a number.  Supported kinds:

``"max"``            max-abs (infinity) norm
``"sum"``            sum-abs (1) norm
``"euclidean"``      2-norm
``"frobenius"``      2-norm of the flattened array
``"stacked-sum"``    sum of an inner norm over consecutive blocks
``"stacked-max"``    max of an inner norm over consecutive blocks
``"weighted-pair"``  ``p1 * ||x||_A + p2 * ||y||_B`` for ``v = (x, y)``
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

SIMPLE_KINDS = ("max", "sum", "euclidean", "frobenius")
KINDS = SIMPLE_KINDS + ("stacked-sum", "stacked-max", "weighted-pair")

_SIMPLE_DUALS = {"max": "sum", "sum": "max", "euclidean": "euclidean", "frobenius": "frobenius"}


@dataclass(frozen=True)
class NormSpec:
    kind: str
    blocks: Optional[Tuple[int, ...]] = None
    inner: Optional["NormSpec"] = None
    weights: Optional[Tuple[float, float]] = None
    parts: Optional[Tuple["NormSpec", "NormSpec"]] = None
    sizes: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.kind in ("stacked-sum", "stacked-max"):
            if self.blocks is None or self.inner is None:
                raise ValueError(f"{self.kind} norm needs block sizes and an inner norm")
            if any(int(b) <= 0 for b in self.blocks):
                raise ValueError("block sizes must be positive")
        if self.kind == "weighted-pair":
            if self.weights is None or self.parts is None or self.sizes is None:
                raise ValueError("weighted-pair norm needs weights, parts and sizes")
            p1, p2 = self.weights
            if not (p1 > 0 and p2 > 0):
                raise ValueError(f"weighted-pair weights must be positive, got {self.weights}")

    @property
    def size(self) -> Optional[int]:
        """Expected vector length, or None when any length is accepted."""
        if self.kind in ("stacked-sum", "stacked-max"):
            return int(sum(self.blocks))
        if self.kind == "weighted-pair":
            return int(sum(self.sizes))
        return None

    def __str__(self):
        if self.kind in SIMPLE_KINDS:
            return self.kind
        if self.kind == "weighted-pair":
            a, b = self.parts
            return f"weighted-pair({self.weights[0]:g}*{a} + {self.weights[1]:g}*{b})"
        return f"{self.kind}[{len(self.blocks)}x{self.inner}]"


MAX = NormSpec("max")
SUM = NormSpec("sum")
EUCLIDEAN = NormSpec("euclidean")
FROBENIUS = NormSpec("frobenius")


def stacked_sum(n_blocks: int, block_size: int, inner: NormSpec = MAX) -> NormSpec:
    """Sum of ``inner`` norms over ``n_blocks`` equal blocks."""
    return NormSpec("stacked-sum", blocks=(block_size,) * n_blocks, inner=inner)


def stacked_max(n_blocks: int, block_size: int, inner: NormSpec = SUM) -> NormSpec:
    """Max of ``inner`` norms over ``n_blocks`` equal blocks."""
    return NormSpec("stacked-max", blocks=(block_size,) * n_blocks, inner=inner)


def weighted_pair(p1: float, first: NormSpec, second: NormSpec, sizes, p2: float = 1.0) -> NormSpec:
    return NormSpec(
        "weighted-pair",
        weights=(float(p1), float(p2)),
        parts=(first, second),
        sizes=(int(sizes[0]), int(sizes[1])),
    )


def _split(v, blocks):
    return np.split(v, np.cumsum(blocks)[:-1])


def norm(spec: NormSpec, v) -> float:
    """Evaluate the norm described by ``spec`` on the vector ``v``."""
    v = np.asarray(v, dtype=float).ravel()
    expected = spec.size
    if expected is not None and v.size != expected:
        raise ValueError(f"{spec} expects length {expected}, got {v.size}")

    kind = spec.kind
    if kind == "max":
        return float(np.max(np.abs(v))) if v.size else 0.0
    if kind == "sum":
        return float(np.sum(np.abs(v)))
    if kind in ("euclidean", "frobenius"):
        return float(np.linalg.norm(v))
    if kind in ("stacked-sum", "stacked-max"):
        inner = spec.inner
        if inner.kind in SIMPLE_KINDS and len(set(spec.blocks)) == 1:
            # equal blocks: vectorised fast path
            rows = v.reshape(len(spec.blocks), spec.blocks[0])
            if inner.kind == "max":
                vals = np.max(np.abs(rows), axis=1)
            elif inner.kind == "sum":
                vals = np.sum(np.abs(rows), axis=1)
            else:
                vals = np.sqrt(np.sum(rows * rows, axis=1))
        else:
            vals = np.array([norm(inner, part) for part in _split(v, spec.blocks)])
        return float(vals.sum() if kind == "stacked-sum" else vals.max())
    # weighted-pair
    p1, p2 = spec.weights
    a, b = spec.parts
    x, y = v[: spec.sizes[0]], v[spec.sizes[0]:]
    return p1 * norm(a, x) + p2 * norm(b, y)


def dual(spec: NormSpec) -> NormSpec:
    """Return the dual norm.

    ``max`` and ``sum`` are dual to each other, the Euclidean norm is
    self-dual, and the dual of a stacked sum is the stacked max of the block
    duals (and vice versa).  Weighted pairs have no dual here.
    """
    if spec.kind in _SIMPLE_DUALS:
        return NormSpec(_SIMPLE_DUALS[spec.kind])
    if spec.kind == "stacked-sum":
        return NormSpec("stacked-max", blocks=spec.blocks, inner=dual(spec.inner))
    if spec.kind == "stacked-max":
        return NormSpec("stacked-sum", blocks=spec.blocks, inner=dual(spec.inner))
    raise ValueError(f"no dual available for {spec.kind} norms")


def operator_norm_upper(matrix, spec: NormSpec) -> float:
    """Induced matrix norm for the max-abs (max row sum) or sum-abs (max column sum) norm."""
    a = np.abs(np.atleast_2d(np.asarray(matrix, dtype=float)))
    if spec.kind == "max":
        return float(a.sum(axis=1).max()) if a.size else 0.0
    if spec.kind == "sum":
        return float(a.sum(axis=0).max()) if a.size else 0.0
    raise ValueError(f"induced norm not supported for {spec.kind} norms")
