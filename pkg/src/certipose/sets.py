"""Sparse polynomial zonotopes over a shared factor space.

A polynomial zonotope is the set

    { O + sum_i (prod_k alpha_k^E[k,i]) G[..,i] + sum_j beta_j GI[..,j]
      : alpha_k, beta_j in [-1, 1] }

where the dependent factors ``alpha`` are keyed by integer ids so that sets
produced from the same source uncertainty keep their correlations through
sums and products.  Vector-valued (:class:`PolyZonotope`) and matrix-valued
(:class:`MatPolyZonotope`) variants share the same factor bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Interval",
    "FactorAssignment",
    "PolyZonotope",
    "MatPolyZonotope",
    "make_box",
    "mink_sum",
    "mat_mul",
    "sample",
    "interval_hull",
    "support_upper",
    "split_linear_error",
    "index",
    "stack",
    "linear_map",
    "mat_combine",
]

COEFF_TOL = 1e-12  # structural equality of coefficients
MEMBER_TOL = 1e-9  # slack for membership-style checks


# ---------------------------------------------------------------------------
# Intervals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    """Axis-aligned box [lo, hi] with element-wise lo <= hi."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape:
            raise ValueError(f"interval bounds shape mismatch: {lo.shape} vs {hi.shape}")
        if np.any(lo > hi):
            raise ValueError("interval requires lo <= hi element-wise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.size

    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def radius(self) -> np.ndarray:
        return 0.5 * (self.hi - self.lo)

    def contains(self, x, tol: float = MEMBER_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def sample(self, rng: np.random.Generator, n: int | None = None) -> np.ndarray:
        if n is None:
            return rng.uniform(self.lo, self.hi)
        return rng.uniform(self.lo, self.hi, size=(n, self.dim))


@dataclass(frozen=True)
class FactorAssignment:
    """Concrete values for the factors of a polynomial zonotope.

    ``alpha`` maps factor id -> value in [-1, 1]; ``beta`` is indexed
    positionally against the independent generators of the set it is used
    with.  Only evaluation (:func:`sample`) consumes assignments.
    """

    alpha: dict[int, float]
    beta: np.ndarray

    def __post_init__(self):
        beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
        object.__setattr__(self, "beta", beta)
        vals = np.array(list(self.alpha.values()) + list(beta), dtype=float)
        if vals.size and (np.any(vals < -1.0 - 1e-15) or np.any(vals > 1.0 + 1e-15)):
            raise ValueError("factor values must lie in [-1, 1]")

    @staticmethod
    def random(rng: np.random.Generator, ids: Sequence[int], q: int) -> "FactorAssignment":
        a = rng.uniform(-1.0, 1.0, size=len(ids))
        b = rng.uniform(-1.0, 1.0, size=q)
        return FactorAssignment(dict(zip((int(i) for i in ids), a)), b)


# ---------------------------------------------------------------------------
# Shared helpers on raw (offset, dep, indep, expmat, ids) data
# ---------------------------------------------------------------------------


def _check_ids(ids: np.ndarray):
    if ids.ndim != 1:
        raise ValueError("ids must be a 1-d integer vector")
    if ids.size and (np.any(ids <= 0) or np.any(np.diff(ids) <= 0)):
        raise ValueError("ids must be positive, strictly increasing, duplicate-free")


def _merge_factor_space(ids1, E1, ids2, E2):
    """Align two exponent matrices on the union of their id spaces."""
    ids = np.union1d(ids1, ids2)
    out1 = np.zeros((ids.size, E1.shape[1]), dtype=np.int64)
    out2 = np.zeros((ids.size, E2.shape[1]), dtype=np.int64)
    if ids1.size:
        out1[np.searchsorted(ids, ids1), :] = E1
    if ids2.size:
        out2[np.searchsorted(ids, ids2), :] = E2
    return ids, out1, out2


def _compact(offset, dep, expmat):
    """Fold all-zero exponent columns into the offset and merge duplicates.

    ``dep`` has generators stacked along the last axis.
    """
    h = expmat.shape[1]
    if h == 0:
        return offset, dep, expmat
    const = ~np.any(expmat, axis=0)
    if np.any(const):
        offset = offset + dep[..., const].sum(axis=-1)
        dep = dep[..., ~const]
        expmat = expmat[:, ~const]
    # all-zero generator columns contribute nothing: drop them
    if expmat.shape[1]:
        nonzero = np.any(dep.reshape(-1, expmat.shape[1]), axis=0)
        if not np.all(nonzero):
            dep = dep[..., nonzero]
            expmat = expmat[:, nonzero]
    h = expmat.shape[1]
    if h > 1:
        cols = np.ascontiguousarray(expmat.T)
        seen: dict[bytes, int] = {}
        keep: list[int] = []
        inv = np.empty(h, dtype=np.intp)
        for i in range(h):
            key = cols[i].tobytes()
            j = seen.get(key)
            if j is None:
                j = len(keep)
                seen[key] = j
                keep.append(i)
            inv[i] = j
        if len(keep) < h:
            merged = np.zeros(dep.shape[:-1] + (len(keep),), dtype=float)
            flat = dep.reshape(-1, h)
            out = merged.reshape(-1, len(keep))
            np.add.at(out.T, inv, flat.T)
            dep = merged
            expmat = expmat[:, keep]
    return offset, dep, expmat


def _monomials(expmat: np.ndarray, ids: np.ndarray, fa: FactorAssignment) -> np.ndarray:
    missing = [int(i) for i in ids if int(i) not in fa.alpha]
    if missing:
        raise KeyError(f"factor assignment missing ids {missing}")
    if expmat.shape[1] == 0:
        return np.zeros(0)
    if ids.size == 0:
        return np.ones(expmat.shape[1])
    avec = np.array([fa.alpha[int(i)] for i in ids], dtype=float)
    return np.prod(avec[:, None] ** expmat, axis=0)


# ---------------------------------------------------------------------------
# Vector-valued polynomial zonotopes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolyZonotope:
    """Polynomial zonotope in R^n.

    offset: (n,), dep: (n, h), indep: (n, q), expmat: (p, h), ids: (p,).
    Immutable; all operations return new instances.
    """

    offset: np.ndarray
    dep: np.ndarray
    indep: np.ndarray
    expmat: np.ndarray
    ids: np.ndarray

    def __post_init__(self):
        offset = np.asarray(self.offset, dtype=float).reshape(-1)
        dep = np.asarray(self.dep, dtype=float)
        indep = np.asarray(self.indep, dtype=float)
        expmat = np.asarray(self.expmat, dtype=np.int64)
        ids = np.asarray(self.ids, dtype=np.int64).reshape(-1)
        n = offset.size
        dep = dep.reshape(n, -1) if dep.size else dep.reshape(n, 0)
        indep = indep.reshape(n, -1) if indep.size else indep.reshape(n, 0)
        expmat = expmat.reshape(ids.size, -1) if expmat.size else expmat.reshape(ids.size, 0)
        if expmat.shape[1] != dep.shape[1]:
            if expmat.size == 0 and dep.shape[1] == 0:
                expmat = np.zeros((ids.size, 0), dtype=np.int64)
            else:
                raise ValueError("expmat columns must match dependent generator count")
        if np.any(expmat < 0):
            raise ValueError("exponents must be non-negative")
        _check_ids(ids)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "dep", dep)
        object.__setattr__(self, "indep", indep)
        object.__setattr__(self, "expmat", expmat)
        object.__setattr__(self, "ids", ids)

    # -- structure ---------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.offset.size

    @property
    def n_dep(self) -> int:
        return self.dep.shape[1]

    @property
    def n_indep(self) -> int:
        return self.indep.shape[1]

    @staticmethod
    def point(c) -> "PolyZonotope":
        c = np.asarray(c, dtype=float).reshape(-1)
        n = c.size
        return PolyZonotope(c, np.zeros((n, 0)), np.zeros((n, 0)),
                            np.zeros((0, 0), dtype=np.int64), np.zeros(0, dtype=np.int64))

    def compact(self) -> "PolyZonotope":
        o, g, e = _compact(self.offset, self.dep, self.expmat)
        return PolyZonotope(o, g, self.indep, e, self.ids)

    def prune_zero_indep(self, tol: float = 0.0) -> "PolyZonotope":
        if self.n_indep == 0:
            return self
        keep = np.any(np.abs(self.indep) > tol, axis=0)
        return PolyZonotope(self.offset, self.dep, self.indep[:, keep], self.expmat, self.ids)

    def as_matrix(self) -> "MatPolyZonotope":
        """View as an (n x 1) matrix polynomial zonotope."""
        return MatPolyZonotope(self.offset[:, None], self.dep[:, None, :],
                               self.indep[:, None, :], self.expmat, self.ids)

    def to_json_dict(self) -> dict:
        return {
            "offset": self.offset.tolist(),
            "dep": self.dep.tolist(),
            "indep": self.indep.tolist(),
            "expmat": self.expmat.tolist(),
            "ids": self.ids.tolist(),
        }

    @staticmethod
    def from_json_dict(d: dict) -> "PolyZonotope":
        n = len(d["offset"])
        return PolyZonotope(
            np.array(d["offset"], dtype=float),
            np.array(d["dep"], dtype=float).reshape(n, -1),
            np.array(d["indep"], dtype=float).reshape(n, -1),
            np.array(d["expmat"], dtype=np.int64).reshape(len(d["ids"]), -1),
            np.array(d["ids"], dtype=np.int64),
        )


# ---------------------------------------------------------------------------
# Matrix-valued polynomial zonotopes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MatPolyZonotope:
    """Matrix polynomial zonotope in R^{n x m}.

    offset: (n, m), dep: (n, m, h), indep: (n, m, q), expmat: (p, h), ids: (p,).
    """

    offset: np.ndarray
    dep: np.ndarray
    indep: np.ndarray
    expmat: np.ndarray
    ids: np.ndarray

    def __post_init__(self):
        offset = np.asarray(self.offset, dtype=float)
        if offset.ndim != 2:
            raise ValueError("matrix offset must be 2-d")
        n, m = offset.shape
        dep = np.asarray(self.dep, dtype=float)
        dep = dep.reshape(n, m, -1) if dep.size else dep.reshape(n, m, 0)
        indep = np.asarray(self.indep, dtype=float)
        indep = indep.reshape(n, m, -1) if indep.size else indep.reshape(n, m, 0)
        ids = np.asarray(self.ids, dtype=np.int64).reshape(-1)
        expmat = np.asarray(self.expmat, dtype=np.int64)
        expmat = (expmat.reshape(ids.size, -1) if expmat.size
                  else np.zeros((ids.size, dep.shape[2]), dtype=np.int64))
        if dep.shape[2] and ids.size == 0 and not expmat.size:
            raise ValueError("dependent generators require an exponent matrix")
        if expmat.shape[1] != dep.shape[2]:
            raise ValueError("expmat columns must match dependent generator count")
        if np.any(expmat < 0):
            raise ValueError("exponents must be non-negative")
        _check_ids(ids)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "dep", dep)
        object.__setattr__(self, "indep", indep)
        object.__setattr__(self, "expmat", expmat)
        object.__setattr__(self, "ids", ids)

    @property
    def shape(self) -> tuple[int, int]:
        return self.offset.shape

    @property
    def n_dep(self) -> int:
        return self.dep.shape[2]

    @property
    def n_indep(self) -> int:
        return self.indep.shape[2]

    @staticmethod
    def constant(M) -> "MatPolyZonotope":
        M = np.asarray(M, dtype=float)
        n, m = M.shape
        return MatPolyZonotope(M, np.zeros((n, m, 0)), np.zeros((n, m, 0)),
                               np.zeros((0, 0), dtype=np.int64), np.zeros(0, dtype=np.int64))

    def compact(self) -> "MatPolyZonotope":
        o, g, e = _compact(self.offset, self.dep, self.expmat)
        return MatPolyZonotope(o, g, self.indep, e, self.ids)

    def col(self, k: int) -> PolyZonotope:
        n, m = self.shape
        if not 0 <= k < m:
            raise IndexError(f"column {k} out of range for shape {self.shape}")
        return PolyZonotope(self.offset[:, k], self.dep[:, k, :], self.indep[:, k, :],
                            self.expmat, self.ids)

    def row_block(self, rows) -> "MatPolyZonotope":
        rows = np.arange(self.shape[0])[rows]
        return MatPolyZonotope(self.offset[rows, :], self.dep[rows, :, :],
                               self.indep[rows, :, :], self.expmat, self.ids)

    def entry(self, i: int, j: int) -> PolyZonotope:
        n, m = self.shape
        if not (0 <= i < n and 0 <= j < m):
            raise IndexError(f"entry ({i},{j}) out of range for shape {self.shape}")
        return PolyZonotope(self.offset[i:i + 1, j], self.dep[i:i + 1, j, :],
                            self.indep[i:i + 1, j, :], self.expmat, self.ids)

    def as_vector(self) -> PolyZonotope:
        if self.shape[1] != 1:
            raise ValueError("only (n x 1) matrices convert to vectors")
        return self.col(0)

    def to_json_dict(self) -> dict:
        return {
            "offset": self.offset.tolist(),
            "dep": self.dep.tolist(),
            "indep": self.indep.tolist(),
            "expmat": self.expmat.tolist(),
            "ids": self.ids.tolist(),
        }

    @staticmethod
    def from_json_dict(d: dict) -> "MatPolyZonotope":
        return MatPolyZonotope(
            np.array(d["offset"], dtype=float),
            np.array(d["dep"], dtype=float),
            np.array(d["indep"], dtype=float),
            np.array(d["expmat"], dtype=np.int64),
            np.array(d["ids"], dtype=np.int64),
        )


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def make_box(iv: Interval, ids: Sequence[int]) -> PolyZonotope:
    """Axis-aligned box as a polynomial zonotope with one factor per axis."""
    ids = np.asarray(list(ids), dtype=np.int64)
    if ids.size != iv.dim:
        raise ValueError(f"need {iv.dim} ids, got {ids.size}")
    _check_ids(ids)
    n = iv.dim
    return PolyZonotope(iv.center(), np.diag(iv.radius()), np.zeros((n, 0)),
                        np.eye(n, dtype=np.int64), ids)


def mink_sum(a, b):
    """Exact Minkowski sum; ids are merged, generators concatenated."""
    if isinstance(a, PolyZonotope) != isinstance(b, PolyZonotope):
        raise ValueError("mink_sum operands must both be vectors or both matrices")
    vec = isinstance(a, PolyZonotope)
    if vec:
        if a.dim != b.dim:
            raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    else:
        if a.shape != b.shape:
            raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    ids, E1, E2 = _merge_factor_space(a.ids, a.expmat, b.ids, b.expmat)
    offset = a.offset + b.offset
    dep = np.concatenate([a.dep, b.dep], axis=-1)
    indep = np.concatenate([a.indep, b.indep], axis=-1)
    expmat = np.concatenate([E1, E2], axis=1)
    cls = PolyZonotope if vec else MatPolyZonotope
    return cls(offset, dep, indep, expmat, ids)


def mat_mul(m1: MatPolyZonotope, m2: MatPolyZonotope) -> MatPolyZonotope:
    """Set-valued matrix product.

    Dependent x dependent terms stay exact with summed exponents.  Any term
    that involves an independent generator loses its factor identity: those
    contributions are bounded entry-wise and re-homed as fresh independent
    generators, which is sound but drops the dependency.
    """
    if m1.shape[1] != m2.shape[0]:
        raise ValueError(f"inner dimensions mismatch: {m1.shape} x {m2.shape}")
    n, m = m1.shape[0], m2.shape[1]
    ids, E1, E2 = _merge_factor_space(m1.ids, m1.expmat, m2.ids, m2.expmat)
    h1, h2 = m1.n_dep, m2.n_dep
    q1, q2 = m1.n_indep, m2.n_indep

    offset = m1.offset @ m2.offset

    dep_parts, exp_parts = [], []
    if h2:
        dep_parts.append(np.einsum("nk,kmh->nmh", m1.offset, m2.dep))
        exp_parts.append(E2)
    if h1:
        dep_parts.append(np.einsum("nkh,km->nmh", m1.dep, m2.offset))
        exp_parts.append(E1)
    if h1 and h2:
        cross = np.einsum("nka,kmb->nmab", m1.dep, m2.dep).reshape(n, m, h1 * h2)
        dep_parts.append(cross)
        exp_parts.append((E1[:, :, None] + E2[:, None, :]).reshape(ids.size, h1 * h2))
    dep = (np.concatenate(dep_parts, axis=-1) if dep_parts else np.zeros((n, m, 0)))
    expmat = (np.concatenate(exp_parts, axis=1) if exp_parts
              else np.zeros((ids.size, 0), dtype=np.int64))

    indep_parts = []
    if q2:
        indep_parts.append(np.einsum("nk,kmq->nmq", m1.offset, m2.indep))
    if q1:
        indep_parts.append(np.einsum("nkq,km->nmq", m1.indep, m2.offset))
    # entry-wise magnitude bound for dep x indep and indep x indep products
    rad = np.zeros((n, m))
    if h1 and q2:
        rad += np.abs(np.einsum("nka,kmb->nmab", m1.dep, m2.indep)).sum(axis=(2, 3))
    if q1 and h2:
        rad += np.abs(np.einsum("nka,kmb->nmab", m1.indep, m2.dep)).sum(axis=(2, 3))
    if q1 and q2:
        rad += np.abs(np.einsum("nka,kmb->nmab", m1.indep, m2.indep)).sum(axis=(2, 3))
    if np.any(rad > 0):
        ii, jj = np.nonzero(rad)
        cols = np.zeros((n, m, ii.size))
        cols[ii, jj, np.arange(ii.size)] = rad[ii, jj]
        indep_parts.append(cols)
    indep = (np.concatenate(indep_parts, axis=-1) if indep_parts else np.zeros((n, m, 0)))
    if indep.shape[-1]:
        nonzero = np.any(indep.reshape(n * m, -1), axis=0)
        indep = indep[..., nonzero]

    offset, dep, expmat = _compact(offset, dep, expmat)
    return MatPolyZonotope(offset, dep, indep, expmat, ids)


def linear_map(A, p: PolyZonotope) -> PolyZonotope:
    """Exact image of a polynomial zonotope under a constant linear map."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[1] != p.dim:
        raise ValueError(f"matrix columns {A.shape[1]} != set dimension {p.dim}")
    return PolyZonotope(A @ p.offset, A @ p.dep, A @ p.indep, p.expmat, p.ids)


def sample(p, fa: FactorAssignment):
    """Evaluate the defining expression at a concrete factor assignment."""
    mono = _monomials(p.expmat, p.ids, fa)
    if fa.beta.size != p.indep.shape[-1]:
        raise ValueError(f"beta has {fa.beta.size} entries, set has {p.indep.shape[-1]}")
    val = p.offset + p.dep @ mono if isinstance(p, PolyZonotope) else \
        p.offset + np.einsum("nmh,h->nm", p.dep, mono)
    if fa.beta.size:
        val = val + (p.indep @ fa.beta if isinstance(p, PolyZonotope)
                     else np.einsum("nmq,q->nm", p.indep, fa.beta))
    return val


def interval_hull(p: PolyZonotope) -> Interval:
    """Sound axis-aligned bounding box (every monomial lies in [-1, 1])."""
    rad = np.abs(p.dep).sum(axis=1) + np.abs(p.indep).sum(axis=1)
    return Interval(p.offset - rad, p.offset + rad)


def support_upper(p: PolyZonotope, direction) -> float:
    """Sound upper bound on the support function max_{s in P} dir^T s."""
    d = np.asarray(direction, dtype=float).reshape(-1)
    if d.size != p.dim:
        raise ValueError(f"direction dim {d.size} != set dim {p.dim}")
    return float(d @ p.offset + np.abs(d @ p.dep).sum() + np.abs(d @ p.indep).sum())


def support_argmax(p: PolyZonotope, direction) -> np.ndarray:
    """A point of the zonotope relaxation attaining :func:`support_upper`."""
    d = np.asarray(direction, dtype=float).reshape(-1)
    pt = p.offset.copy()
    if p.n_dep:
        pt = pt + p.dep @ np.sign(d @ p.dep)
    if p.n_indep:
        pt = pt + p.indep @ np.sign(d @ p.indep)
    return pt


def split_linear_error(p: PolyZonotope, input_ids: Sequence[int]):
    """Split into (linear-in-input part, remainder part).

    The linear part keeps the offset plus every dependent generator whose
    exponent column is a unit vector on one of ``input_ids``; the remainder
    keeps everything else (higher-order dependent columns and all independent
    generators) around a zero offset.  Their Minkowski sum represents the
    original set.
    """
    input_ids = np.asarray(list(input_ids), dtype=np.int64)
    if input_ids.size and not np.all(np.isin(input_ids, p.ids)):
        missing = set(input_ids.tolist()) - set(p.ids.tolist())
        raise ValueError(f"input ids {sorted(missing)} not present in set")
    deg = p.expmat.sum(axis=0)
    is_unit = deg == 1
    if np.any(is_unit):
        row_of_max = np.argmax(p.expmat, axis=0)
        on_input = np.isin(p.ids[row_of_max], input_ids)
        is_unit = is_unit & on_input
    lin = PolyZonotope(p.offset, p.dep[:, is_unit], np.zeros((p.dim, 0)),
                       p.expmat[:, is_unit], p.ids)
    err = PolyZonotope(np.zeros(p.dim), p.dep[:, ~is_unit], p.indep,
                       p.expmat[:, ~is_unit], p.ids)
    return lin, err


def index(p, sel):
    """Slice a set representation; expmat/ids are unchanged.

    For vectors ``sel`` selects rows; for matrices pass ``(i, j)`` for a
    scalar entry or an integer column index.
    """
    if isinstance(p, PolyZonotope):
        rows = np.arange(p.dim)[sel]
        rows = np.atleast_1d(rows)
        return PolyZonotope(p.offset[rows], p.dep[rows, :], p.indep[rows, :],
                            p.expmat, p.ids)
    if isinstance(sel, tuple):
        return p.entry(*sel)
    return p.col(sel)


def _union_ids(parts) -> np.ndarray:
    ids = np.zeros(0, dtype=np.int64)
    for q in parts:
        ids = np.union1d(ids, q.ids)
    return ids


def _align_exps(ids: np.ndarray, q) -> np.ndarray:
    """Exponent matrix of ``q`` lifted onto the id space ``ids``."""
    out = np.zeros((ids.size, q.expmat.shape[1]), dtype=np.int64)
    if q.ids.size:
        out[np.searchsorted(ids, q.ids), :] = q.expmat
    return out


def stack(parts: Iterable[PolyZonotope]) -> PolyZonotope:
    """Vertically concatenate vector sets over the shared factor space.

    Dependent columns with identical exponent vectors are merged, so stacked
    outputs computed from the same factors keep their coupling; independent
    generators stay block-diagonal (their error factors are distinct).
    """
    parts = list(parts)
    if not parts:
        raise ValueError("stack of zero sets")
    ids = _union_ids(parts)
    n_total = sum(q.dim for q in parts)
    offset = np.concatenate([q.offset for q in parts])
    dep_cols, exp_cols, indep_blocks = [], [], []
    row0 = 0
    for q in parts:
        g = np.zeros((n_total, q.n_dep))
        g[row0:row0 + q.dim, :] = q.dep
        dep_cols.append(g)
        exp_cols.append(_align_exps(ids, q))
        gi = np.zeros((n_total, q.n_indep))
        gi[row0:row0 + q.dim, :] = q.indep
        indep_blocks.append(gi)
        row0 += q.dim
    dep = np.concatenate(dep_cols, axis=1)
    expmat = np.concatenate(exp_cols, axis=1)
    indep = np.concatenate(indep_blocks, axis=1)
    return PolyZonotope(offset, dep, indep, expmat, ids).compact()


def mat_combine(shape: tuple[int, int], const, terms) -> MatPolyZonotope:
    """Build ``const + sum_k placement_k * scalar_k`` as a matrix set.

    Each term is ``(placement, scalar)`` with a constant placement matrix and
    a 1-d :class:`PolyZonotope`; the scalar's generators are broadcast onto
    the placement, so a factor appearing in several entries stays a single
    shared generator.
    """
    n, m = shape
    offset = np.array(const, dtype=float).reshape(n, m).copy()
    terms = [(np.array(pl, dtype=float).reshape(n, m), s) for pl, s in terms]
    for _, s in terms:
        if s.dim != 1:
            raise ValueError("mat_combine terms must be scalar sets")
    ids = _union_ids([s for _, s in terms])
    dep_parts, exp_parts, indep_parts = [], [], []
    for placement, s in terms:
        e = _align_exps(ids, s)
        offset += placement * float(s.offset[0])
        if s.n_dep:
            dep_parts.append(placement[:, :, None] * s.dep[0][None, None, :])
            exp_parts.append(e)
        if s.n_indep:
            indep_parts.append(placement[:, :, None] * s.indep[0][None, None, :])
    dep = np.concatenate(dep_parts, axis=-1) if dep_parts else np.zeros((n, m, 0))
    expmat = (np.concatenate(exp_parts, axis=1) if exp_parts
              else np.zeros((ids.size, 0), dtype=np.int64))
    indep = np.concatenate(indep_parts, axis=-1) if indep_parts else np.zeros((n, m, 0))
    o, g, e = _compact(offset, dep, expmat)
    return MatPolyZonotope(o, g, indep, e, ids)


def tile_columns(v: PolyZonotope, m: int) -> MatPolyZonotope:
    """Repeat a vector set into every column of an (n x m) matrix set."""
    ones = MatPolyZonotope.constant(np.ones((1, m)))
    return mat_mul(v.as_matrix(), ones)
