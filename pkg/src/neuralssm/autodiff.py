"""Reverse-mode gradient tape over dense matrix operations.

The tape is define-by-run: recording an operation computes its primal value
immediately and appends a node, so a forward pass is just ordinary function
calls.  ``backward`` then walks the node list in reverse, accumulating
adjoints.  Values are 2-D float64 matrices throughout; scalars are 1x1.

Supported kinds: matmul, add, subtract, scalar_scale, hadamard, relu,
sigmoid, exp, row_softmax, sum_of_squares, concat, slice.  ``add`` and
``subtract`` additionally accept bias-style broadcasting where one operand
has a singleton row and/or column dimension.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import NumericError, ShapeError
from .numerics import as_matrix

KINDS = (
    "matmul",
    "add",
    "subtract",
    "scalar_scale",
    "hadamard",
    "relu",
    "sigmoid",
    "exp",
    "row_softmax",
    "sum_of_squares",
    "concat",
    "slice",
)


class TapeValue:
    """Handle to one recorded value: primal now, adjoint after backward."""

    __slots__ = ("tape", "idx")

    def __init__(self, tape: "Tape", idx: int):
        self.tape = tape
        self.idx = idx

    @property
    def value(self) -> np.ndarray:
        return self.tape._values[self.idx]

    @property
    def shape(self) -> tuple[int, int]:
        return self.tape._values[self.idx].shape

    @property
    def adjoint(self) -> np.ndarray | None:
        return self.tape._adjoints[self.idx]

    @property
    def trainable(self) -> bool:
        return self.tape._kinds[self.idx] == "leaf"

    def __repr__(self) -> str:
        return f"TapeValue(idx={self.idx}, shape={self.shape})"


def _stable_sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _row_softmax(x: np.ndarray) -> np.ndarray:
    shifted = x - x.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _reduce_to(adj: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Sum the adjoint of a broadcast operand back down to its shape."""
    if adj.shape == shape:
        return adj
    if shape[0] == 1 and adj.shape[0] > 1:
        adj = adj.sum(axis=0, keepdims=True)
    if shape[1] == 1 and adj.shape[1] > 1:
        adj = adj.sum(axis=1, keepdims=True)
    return adj


def _check_addable(sa: tuple[int, int], sb: tuple[int, int], kind: str) -> tuple[int, int]:
    ra, ca = sa
    rb, cb = sb
    if (ra == rb or ra == 1 or rb == 1) and (ca == cb or ca == 1 or cb == 1):
        out = (max(ra, rb), max(ca, cb))
        if out == sa or out == sb:
            return out
        # Mutual broadcast like (n,1)+(1,m) is outside the bias-addition contract.
        raise ShapeError(f"{kind}: only bias-style broadcasting is supported, got {sa} and {sb}")
    raise ShapeError(f"{kind}: shapes {sa} and {sb} do not conform")


class Tape:
    """Append-only record of operations; one backward pass per forward pass.

    ``dtype`` sets the working precision of everything recorded; float64 is
    the default, float32 roughly halves the memory traffic of long batched
    rollouts at a gradient accuracy that is ample for Adam-style training.
    """

    def __init__(self, dtype=np.float64):
        self.dtype = np.dtype(dtype)
        self._kinds: list[str] = []
        self._inputs: list[tuple[int, ...]] = []
        self._values: list[np.ndarray] = []
        self._attrs: list = []
        self._adjoints: list[np.ndarray | None] = []
        # _needs[i]: does node i sit above a trainable leaf?  Lets backward
        # skip whole constant subtrees.
        self._needs: list[bool] = []
        self._swept = True  # adjoints are clear

    def __len__(self) -> int:
        return len(self._kinds)

    def _append(self, kind: str, inputs: tuple[int, ...], value: np.ndarray, attr=None) -> TapeValue:
        self._kinds.append(kind)
        self._inputs.append(inputs)
        self._values.append(value)
        self._attrs.append(attr)
        self._adjoints.append(None)
        needs = self._needs
        needs.append(kind == "leaf" or any(needs[i] for i in inputs))
        return TapeValue(self, len(self._kinds) - 1)

    def _coerce(self, value) -> np.ndarray:
        if type(value) is np.ndarray and value.ndim == 2 and value.dtype == self.dtype:
            return value
        return as_matrix(value).astype(self.dtype, copy=False)

    def leaf(self, value, name: str | None = None) -> TapeValue:
        """Trainable leaf; its adjoint is reported by backward."""
        return self._append("leaf", (), self._coerce(value), name)

    def constant(self, value) -> TapeValue:
        """Non-trainable input; never receives a gradient."""
        return self._append("const", (), self._coerce(value))

    def record(self, kind: str, *inputs: TapeValue, **attrs) -> TapeValue:
        """Record one operation and compute its primal value.

        ``attrs`` carries non-differentiable arguments: ``factor`` for
        scalar_scale, ``rows``/``cols`` index pairs for slice.
        """
        for tv in inputs:
            if tv.tape is not self:
                raise ValueError("all inputs must live on the same tape")
        vals = [self._values[tv.idx] for tv in inputs]
        ids = tuple(tv.idx for tv in inputs)

        if kind == "matmul":
            a, b = vals
            if a.shape[1] != b.shape[0]:
                raise ShapeError(f"matmul: inner dimensions differ, {a.shape} @ {b.shape}")
            return self._append(kind, ids, a @ b)
        if kind in ("add", "subtract"):
            a, b = vals
            _check_addable(a.shape, b.shape, kind)
            out = a + b if kind == "add" else a - b
            return self._append(kind, ids, out)
        if kind == "scalar_scale":
            (a,) = vals
            factor = float(attrs["factor"])
            return self._append(kind, ids, factor * a, factor)
        if kind == "hadamard":
            a, b = vals
            if a.shape != b.shape:
                raise ShapeError(f"hadamard: shapes differ, {a.shape} vs {b.shape}")
            return self._append(kind, ids, a * b)
        if kind == "relu":
            (a,) = vals
            return self._append(kind, ids, np.maximum(a, 0.0))
        if kind == "sigmoid":
            (a,) = vals
            return self._append(kind, ids, _stable_sigmoid(a))
        if kind == "exp":
            (a,) = vals
            return self._append(kind, ids, np.exp(a))
        if kind == "row_softmax":
            (a,) = vals
            return self._append(kind, ids, _row_softmax(a))
        if kind == "sum_of_squares":
            (a,) = vals
            flat = a.ravel()
            return self._append(kind, ids, np.array([[flat @ flat]]))
        if kind == "concat":
            if not vals:
                raise ShapeError("concat: needs at least one input")
            width = vals[0].shape[1]
            if any(v.shape[1] != width for v in vals):
                raise ShapeError("concat: column counts differ")
            sizes = tuple(v.shape[0] for v in vals)
            return self._append(kind, ids, np.concatenate(vals, axis=0), sizes)
        if kind == "slice":
            (a,) = vals
            rows = attrs.get("rows", (0, a.shape[0]))
            cols = attrs.get("cols", (0, a.shape[1]))
            r0, r1 = rows
            c0, c1 = cols
            if not (0 <= r0 < r1 <= a.shape[0] and 0 <= c0 < c1 <= a.shape[1]):
                raise ShapeError(f"slice: window rows={rows} cols={cols} outside shape {a.shape}")
            return self._append(kind, ids, a[r0:r1, c0:c1].copy(), (rows, cols, a.shape))
        raise ShapeError(f"unknown operation kind: {kind!r}")

    def zero_adjoints(self) -> None:
        self._adjoints = [None] * len(self._kinds)
        self._swept = True

    def backward(self, loss: TapeValue) -> dict[int, np.ndarray]:
        """Reverse accumulation from a scalar loss.

        Returns the gradient of every trainable leaf, keyed by node id.
        Adjoints of each value are also left readable on the tape until
        ``zero_adjoints`` is called; a second backward without zeroing is
        rejected to keep passes from silently mixing.
        """
        if loss.tape is not self:
            raise ValueError("loss lives on a different tape")
        if loss.shape != (1, 1):
            raise ShapeError(f"backward requires a 1x1 scalar loss, got shape {loss.shape}")
        if not self._swept:
            raise RuntimeError("adjoints from a previous backward pass present; call zero_adjoints first")
        self._swept = False

        adj = self._adjoints
        adj[loss.idx] = np.ones((1, 1), dtype=self.dtype)
        grads: dict[int, np.ndarray] = {}
        kinds = self._kinds
        all_inputs = self._inputs
        vals = self._values
        needs = self._needs
        for i in range(loss.idx, -1, -1):
            g = adj[i]
            if g is None or not needs[i]:
                continue
            kind = kinds[i]
            ids = all_inputs[i]
            if kind == "leaf":
                grads[i] = g
                continue
            if kind == "matmul":
                ia, ib = ids
                if needs[ia]:
                    self._bump(ia, g @ vals[ib].T)
                if needs[ib]:
                    self._bump(ib, vals[ia].T @ g)
            elif kind == "add":
                ia, ib = ids
                if needs[ia]:
                    self._bump(ia, _reduce_to(g, vals[ia].shape))
                if needs[ib]:
                    self._bump(ib, _reduce_to(g, vals[ib].shape))
            elif kind == "subtract":
                ia, ib = ids
                if needs[ia]:
                    self._bump(ia, _reduce_to(g, vals[ia].shape))
                if needs[ib]:
                    self._bump(ib, _reduce_to(-g, vals[ib].shape))
            elif kind == "scalar_scale":
                self._bump(ids[0], self._attrs[i] * g)
            elif kind == "hadamard":
                ia, ib = ids
                if needs[ia]:
                    self._bump(ia, g * vals[ib])
                if needs[ib]:
                    self._bump(ib, g * vals[ia])
            elif kind == "relu":
                self._bump(ids[0], g * (vals[ids[0]] > 0.0))
            elif kind == "sigmoid":
                y = vals[i]
                self._bump(ids[0], g * y * (1.0 - y))
            elif kind == "exp":
                self._bump(ids[0], g * vals[i])
            elif kind == "row_softmax":
                y = vals[i]
                self._bump(ids[0], y * (g - np.sum(g * y, axis=1, keepdims=True)))
            elif kind == "sum_of_squares":
                self._bump(ids[0], (2.0 * g[0, 0]) * vals[ids[0]])
            elif kind == "concat":
                r = 0
                for child, size in zip(ids, self._attrs[i]):
                    if needs[child]:
                        self._bump(child, g[r : r + size, :])
                    r += size
            elif kind == "slice":
                (r0, r1), (c0, c1), full = self._attrs[i]
                padded = np.zeros(full, dtype=self.dtype)
                padded[r0:r1, c0:c1] = g
                self._bump(ids[0], padded)
            else:  # pragma: no cover
                raise AssertionError(f"no adjoint rule for {kind}")
        return grads

    def _bump(self, idx: int, contribution: np.ndarray) -> None:
        # First write stores the array as-is (most nodes have one consumer);
        # later writes allocate a fresh sum so shared adjoints never alias.
        cur = self._adjoints[idx]
        if cur is None:
            self._adjoints[idx] = contribution
        else:
            self._adjoints[idx] = cur + contribution


# Thin wrappers so model code reads like the math.  They validate like
# ``record`` but skip its kind dispatch, which matters inside rollout loops.


def matmul(a: TapeValue, b: TapeValue) -> TapeValue:
    tape = a.tape
    va = tape._values[a.idx]
    vb = tape._values[b.idx]
    if va.shape[1] != vb.shape[0]:
        raise ShapeError(f"matmul: inner dimensions differ, {va.shape} @ {vb.shape}")
    return tape._append("matmul", (a.idx, b.idx), va @ vb)


def add(a: TapeValue, b: TapeValue) -> TapeValue:
    tape = a.tape
    va = tape._values[a.idx]
    vb = tape._values[b.idx]
    if va.shape != vb.shape:
        _check_addable(va.shape, vb.shape, "add")
    return tape._append("add", (a.idx, b.idx), va + vb)


def subtract(a: TapeValue, b: TapeValue) -> TapeValue:
    tape = a.tape
    va = tape._values[a.idx]
    vb = tape._values[b.idx]
    if va.shape != vb.shape:
        _check_addable(va.shape, vb.shape, "subtract")
    return tape._append("subtract", (a.idx, b.idx), va - vb)


def scale(a: TapeValue, factor: float) -> TapeValue:
    factor = float(factor)
    return a.tape._append("scalar_scale", (a.idx,), factor * a.tape._values[a.idx], factor)


def hadamard(a: TapeValue, b: TapeValue) -> TapeValue:
    return a.tape.record("hadamard", a, b)


def relu(a: TapeValue) -> TapeValue:
    tape = a.tape
    return tape._append("relu", (a.idx,), np.maximum(tape._values[a.idx], 0.0))


def sigmoid(a: TapeValue) -> TapeValue:
    return a.tape.record("sigmoid", a)


def exp(a: TapeValue) -> TapeValue:
    return a.tape.record("exp", a)


def row_softmax(a: TapeValue) -> TapeValue:
    return a.tape.record("row_softmax", a)


def sum_of_squares(a: TapeValue) -> TapeValue:
    tape = a.tape
    flat = tape._values[a.idx].ravel()
    return tape._append("sum_of_squares", (a.idx,), np.array([[flat @ flat]]))


def concat_rows(*parts: TapeValue) -> TapeValue:
    return parts[0].tape.record("concat", *parts)


def slice_rows(a: TapeValue, r0: int, r1: int) -> TapeValue:
    return a.tape.record("slice", a, rows=(r0, r1))


def finite_difference_check(
    f: Callable[..., TapeValue],
    leaf_values: list[np.ndarray],
    eps: float = 1e-5,
) -> float:
    """Compare the tape gradient of ``f`` against central finite differences.

    ``f`` builds a scalar TapeValue from TapeValue arguments (one per entry
    of ``leaf_values``); it is re-run on fresh tapes for every perturbed
    evaluation.  Returns the max over all leaf entries of
    ``|g_ad - g_fd| / (1e-8 + |g_ad| + |g_fd|)``.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    leaf_values = [as_matrix(v).copy() for v in leaf_values]

    tape = Tape()
    tvs = [tape.leaf(v) for v in leaf_values]
    out = f(*tvs)
    if out.shape != (1, 1):
        raise ShapeError("finite_difference_check requires a scalar-valued function")
    grads = tape.backward(out)
    ad = [grads.get(tv.idx, np.zeros_like(v)) for tv, v in zip(tvs, leaf_values)]

    def primal(vals: list[np.ndarray]) -> float:
        t = Tape()
        y = f(*[t.constant(v) for v in vals])
        p = float(y.value[0, 0])
        if not np.isfinite(p):
            raise NumericError("function value non-finite at perturbed point")
        return p

    worst = 0.0
    for k, base in enumerate(leaf_values):
        it = np.nditer(base, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = base[idx]
            base[idx] = orig + eps
            up = primal(leaf_values)
            base[idx] = orig - eps
            dn = primal(leaf_values)
            base[idx] = orig
            g_fd = (up - dn) / (2.0 * eps)
            g_ad = ad[k][idx]
            rel = abs(g_ad - g_fd) / (1e-8 + abs(g_ad) + abs(g_fd))
            if rel > worst:
                worst = rel
    return worst
