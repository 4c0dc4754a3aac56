"""Dense matrix math with reverse-mode differentiation on a recording tape.

Every value is a float64 matrix: vectors are ``N x 1``, scalars ``1 x 1``.
Operations validate shapes, reject non-finite results, and record a backward
closure on the tape of whichever operand is tracked.  Walking the record in
reverse order accumulates gradients for every registered parameter.

The module is single-threaded and deterministic: identical inputs replay to
bit-identical values and gradients.
"""

from __future__ import annotations

from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionError,
    DomainError,
    EmptySelectionError,
    TapeError,
)
from .sparse import SparseAdjacency

LOG_EPS = 1e-12   # probability floor applied before any logarithm
NORM_EPS = 1e-12  # row-norm floor in l2_normalize_rows


def _as_matrix(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DimensionError(f"expected a matrix, got array of rank {arr.ndim}")
    return arr


class Tensor:
    """A float64 matrix, optionally attached to a node on a tape."""

    __slots__ = ("values", "tape", "node_id")

    def __init__(self, values, tape: "Tape | None" = None, node_id: int = -1):
        self.values = _as_matrix(values)
        self.tape = tape
        self.node_id = node_id

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    def item(self) -> float:
        if self.values.size != 1:
            raise DimensionError(f"item() needs a 1x1 tensor, got {self.shape}")
        return float(self.values[0, 0])

    def detach(self) -> "Tensor":
        """The same values as a constant (drops any tape attachment)."""
        return Tensor(self.values)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        tracked = "tracked" if self.tape is not None else "const"
        return f"Tensor(shape={self.shape}, {tracked})"


def constant(values) -> Tensor:
    """Wrap values as an untracked tensor; detaches tracked tensors."""
    if isinstance(values, Tensor):
        return values if values.tape is None else values.detach()
    return Tensor(values)


class _OpNode:
    __slots__ = ("out_id", "in_ids", "vjp")

    def __init__(self, out_id: int, in_ids: tuple[int, ...], vjp: Callable):
        self.out_id = out_id
        self.in_ids = in_ids
        self.vjp = vjp


class Tape:
    """Ordered record of operations plus the parameters they consume."""

    def __init__(self):
        self._records: list[_OpNode] = []
        self._params: dict[str, Tensor] = {}
        self._next_id = 0

    def _new_id(self) -> int:
        nid = self._next_id
        self._next_id += 1
        return nid

    def parameter(self, values, name: str) -> Tensor:
        """Register a named leaf whose gradient ``backward`` will report."""
        if name in self._params:
            raise TapeError(f"parameter {name!r} already registered on this tape")
        t = Tensor(values, self, self._new_id())
        self._params[name] = t
        return t

    def parameters(self) -> Mapping[str, Tensor]:
        return dict(self._params)

    def reset(self) -> None:
        """Drop every recorded operation and parameter."""
        self._records.clear()
        self._params.clear()
        self._next_id = 0

    def __len__(self) -> int:
        return len(self._records)


def _t(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _tape_of(*tensors: Tensor) -> Tape | None:
    tape = None
    for t in tensors:
        if t is None or t.tape is None:
            continue
        if tape is None:
            tape = t.tape
        elif tape is not t.tape:
            raise TapeError("operands are recorded on different tapes")
    return tape


def _emit(tape: Tape | None, values: np.ndarray, inputs: Sequence[Tensor], vjp) -> Tensor:
    values = _as_matrix(values)
    if not np.isfinite(values).all():
        raise DomainError("operation produced a non-finite value")
    if tape is None:
        return Tensor(values)
    out = Tensor(values, tape, tape._new_id())
    tape._records.append(_OpNode(out.node_id, tuple(t.node_id for t in inputs), vjp))
    return out


def backward(tape: Tape, loss: Tensor) -> dict[str, np.ndarray]:
    """Gradients of a scalar loss for every parameter registered on ``tape``.

    Parameters that do not influence the loss get exact zero gradients.
    """
    if not isinstance(loss, Tensor) or loss.tape is not tape or loss.node_id < 0:
        raise TapeError("loss was not produced by operations on this tape")
    if loss.shape != (1, 1):
        raise DimensionError(f"loss must be 1x1, got {loss.shape}")

    grads: dict[int, np.ndarray] = {loss.node_id: np.ones((1, 1))}
    for node in reversed(tape._records):
        g = grads.pop(node.out_id, None)
        if g is None:
            continue
        for in_id, gin in zip(node.in_ids, node.vjp(g)):
            if in_id < 0 or gin is None:
                continue
            acc = grads.get(in_id)
            grads[in_id] = gin if acc is None else acc + gin

    out: dict[str, np.ndarray] = {}
    for name, p in tape._params.items():
        g = grads.get(p.node_id)
        out[name] = np.zeros_like(p.values) if g is None else g
    return out


# ---------------------------------------------------------------------------
# operations


def matmul(a, b) -> Tensor:
    a, b = _t(a), _t(b)
    if a.cols != b.rows:
        raise DimensionError(f"matmul: inner dimensions differ ({a.shape} x {b.shape})")
    tape = _tape_of(a, b)
    av, bv = a.values, b.values
    ta, tb = a.tape is not None, b.tape is not None

    def vjp(g):
        return (g @ bv.T if ta else None, av.T @ g if tb else None)

    return _emit(tape, av @ bv, (a, b), vjp)


def spmm(adj: SparseAdjacency, x) -> Tensor:
    """Sparse adjacency times dense matrix; the adjacency is never tracked."""
    x = _t(x)
    if adj.n != x.rows:
        raise DimensionError(f"spmm: adjacency is {adj.n}x{adj.n}, matrix has {x.rows} rows")
    tracked = x.tape is not None

    def vjp(g):
        return (adj.matmul_dense_t(g) if tracked else None,)

    return _emit(x.tape, adj.matmul_dense(x.values), (x,), vjp)


def add(a, b) -> Tensor:
    a, b = _t(a), _t(b)
    if a.shape != b.shape:
        raise DimensionError(f"add: shapes differ ({a.shape} vs {b.shape})")
    ta, tb = a.tape is not None, b.tape is not None

    def vjp(g):
        return (g if ta else None, g if tb else None)

    return _emit(_tape_of(a, b), a.values + b.values, (a, b), vjp)


def sub(a, b) -> Tensor:
    a, b = _t(a), _t(b)
    if a.shape != b.shape:
        raise DimensionError(f"sub: shapes differ ({a.shape} vs {b.shape})")
    ta, tb = a.tape is not None, b.tape is not None

    def vjp(g):
        return (g if ta else None, -g if tb else None)

    return _emit(_tape_of(a, b), a.values - b.values, (a, b), vjp)


def mul(a, b) -> Tensor:
    """Elementwise product (used for dropout masks among other things)."""
    a, b = _t(a), _t(b)
    if a.shape != b.shape:
        raise DimensionError(f"mul: shapes differ ({a.shape} vs {b.shape})")
    av, bv = a.values, b.values
    ta, tb = a.tape is not None, b.tape is not None

    def vjp(g):
        return (g * bv if ta else None, g * av if tb else None)

    return _emit(_tape_of(a, b), av * bv, (a, b), vjp)


def scale(a, c: float) -> Tensor:
    a = _t(a)
    c = float(c)
    tracked = a.tape is not None

    def vjp(g):
        return (c * g if tracked else None,)

    return _emit(a.tape, c * a.values, (a,), vjp)


def affine(a, mult: float, offset: float) -> Tensor:
    """``mult * a + offset`` with scalar constants."""
    a = _t(a)
    mult, offset = float(mult), float(offset)
    tracked = a.tape is not None

    def vjp(g):
        return (mult * g if tracked else None,)

    return _emit(a.tape, mult * a.values + offset, (a,), vjp)


def add_rowvec(a, v) -> Tensor:
    """Broadcast-add a 1 x C row (bias) to every row of an N x C matrix."""
    a, v = _t(a), _t(v)
    if v.rows != 1 or v.cols != a.cols:
        raise DimensionError(f"add_rowvec: bias {v.shape} does not broadcast over {a.shape}")
    ta, tv = a.tape is not None, v.tape is not None

    def vjp(g):
        return (g if ta else None, g.sum(axis=0, keepdims=True) if tv else None)

    return _emit(_tape_of(a, v), a.values + v.values, (a, v), vjp)


def relu(a) -> Tensor:
    a = _t(a)
    mask = a.values > 0.0
    tracked = a.tape is not None

    def vjp(g):
        return (g * mask if tracked else None,)

    return _emit(a.tape, np.where(mask, a.values, 0.0), (a,), vjp)


def sigmoid(a) -> Tensor:
    a = _t(a)
    x = a.values
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    tracked = a.tape is not None

    def vjp(g):
        return (g * out * (1.0 - out) if tracked else None,)

    return _emit(a.tape, out, (a,), vjp)


def sum_all(a) -> Tensor:
    a = _t(a)
    tracked = a.tape is not None
    shape = a.shape

    def vjp(g):
        return (np.full(shape, g[0, 0]) if tracked else None,)

    return _emit(a.tape, np.array([[a.values.sum()]]), (a,), vjp)


def softmax_rows(z, temps) -> Tensor:
    """Row-wise softmax of ``z / temp``, numerically stabilized.

    ``temps`` is either a positive scalar or an ``N x 1`` vector of per-row
    temperatures; the vector form may itself be tracked, in which case
    gradients flow into it.
    """
    z = _t(z)
    temps_t: Tensor | None
    if isinstance(temps, (int, float)):
        if temps <= 0:
            raise DomainError(f"temperature must be positive, got {temps}")
        tau = float(temps)
        temps_t = None
    else:
        temps_t = _t(temps)
        if temps_t.shape != (z.rows, 1):
            raise DimensionError(
                f"temperatures must be {z.rows}x1, got {temps_t.shape}"
            )
        if (temps_t.values <= 0).any():
            raise DomainError("all temperatures must be positive")
        tau = temps_t.values

    u = z.values / tau
    u = u - u.max(axis=1, keepdims=True)
    e = np.exp(u)
    s = e / e.sum(axis=1, keepdims=True)

    zv = z.values
    tz = z.tape is not None
    tt = temps_t is not None and temps_t.tape is not None
    inputs = (z,) if temps_t is None else (z, temps_t)

    def vjp(g):
        du = s * (g - (g * s).sum(axis=1, keepdims=True))
        gz = du / tau if tz else None
        gt = -(du * zv).sum(axis=1, keepdims=True) / (tau * tau) if tt else None
        return (gz,) if temps_t is None else (gz, gt)

    return _emit(_tape_of(*inputs), s, inputs, vjp)


def kl_div_rows(p, q) -> Tensor:
    """Mean over rows of ``sum_c p_c * ln(p_c / q_c)``.

    Zero numerator terms contribute zero; ``q`` is floored at ``LOG_EPS``.
    """
    p, q = _t(p), _t(q)
    if p.shape != q.shape:
        raise DimensionError(f"kl_div_rows: shapes differ ({p.shape} vs {q.shape})")
    n = p.rows
    pv, qv = p.values, q.values
    logp = np.log(np.maximum(pv, LOG_EPS))
    logq = np.log(np.maximum(qv, LOG_EPS))
    terms = np.where(pv > 0, pv * (logp - logq), 0.0)
    value = np.array([[terms.sum() / n]])
    tp, tq = p.tape is not None, q.tape is not None

    def vjp(g):
        gs = g[0, 0] / n
        gp = gs * (logp - logq + 1.0) if tp else None
        gq = -gs * pv / np.maximum(qv, LOG_EPS) if tq else None
        return (gp, gq)

    return _emit(_tape_of(p, q), value, (p, q), vjp)


def cross_entropy_masked(logits, labels, mask) -> Tensor:
    """Mean negative log-likelihood of 2-class logits over masked rows."""
    logits = _t(logits)
    labels = np.asarray(labels).reshape(-1)
    mask = np.asarray(mask, dtype=bool).reshape(-1)
    if logits.cols != 2:
        raise DimensionError(f"logits must be Nx2, got {logits.shape}")
    if labels.shape[0] != logits.rows or mask.shape[0] != logits.rows:
        raise DimensionError("labels/mask length must equal the number of rows")
    if not mask.any():
        raise EmptySelectionError("mask selects no rows")
    sel = labels[mask]
    if not np.isin(sel, (0, 1)).all():
        raise DomainError("labels under the mask must be 0 or 1")

    lv = logits.values
    m = lv.max(axis=1, keepdims=True)
    lse = m + np.log(np.exp(lv - m).sum(axis=1, keepdims=True))
    logprob = lv - lse
    idx = np.flatnonzero(mask)
    picked = logprob[idx, sel.astype(int)]
    count = idx.size
    value = np.array([[-picked.mean()]])
    tracked = logits.tape is not None

    def vjp(g):
        if not tracked:
            return (None,)
        grad = np.zeros_like(lv)
        sm = np.exp(logprob[idx])
        sm[np.arange(count), sel.astype(int)] -= 1.0
        grad[idx] = sm * (g[0, 0] / count)
        return (grad,)

    return _emit(logits.tape, value, (logits,), vjp)


def l2_normalize_rows(r) -> Tensor:
    """Scale every row to unit Euclidean norm; all-zero rows stay zero."""
    r = _t(r)
    rv = r.values
    norms = np.sqrt((rv * rv).sum(axis=1, keepdims=True))
    active = norms >= NORM_EPS
    f = np.where(active, norms, 1.0)
    out = np.where(active, rv / f, 0.0)
    tracked = r.tape is not None

    def vjp(g):
        if not tracked:
            return (None,)
        base = g / f
        corr = rv * ((g * rv).sum(axis=1, keepdims=True) / (f * f * f))
        return (np.where(active, base - corr, 0.0),)

    return _emit(r.tape, out, (r,), vjp)


def mean_row_sqnorm(x) -> Tensor:
    """Mean over rows of the squared row norm (``sum(x^2) / N``)."""
    x = _t(x)
    n = x.rows
    xv = x.values
    value = np.array([[(xv * xv).sum() / n]])
    tracked = x.tape is not None

    def vjp(g):
        return ((2.0 / n) * g[0, 0] * xv if tracked else None,)

    return _emit(x.tape, value, (x,), vjp)


def entropy_rows(p) -> Tensor:
    """Shannon entropy of each probability row (natural log), as ``N x 1``."""
    p = _t(p)
    pv = p.values
    if (pv < 0).any():
        raise DomainError("entropy_rows: negative probability")
    logp = np.log(np.maximum(pv, LOG_EPS))
    value = -(pv * logp).sum(axis=1, keepdims=True)
    tracked = p.tape is not None

    def vjp(g):
        return (-g * (logp + 1.0) if tracked else None,)

    return _emit(p.tape, value, (p,), vjp)
