"""In-process partitioned table engine with data-parallel relational operations.

Tables are immutable columnar row collections split into partitions. Scalar
columns are numpy arrays per partition; array-valued columns are lists of
numpy arrays (one per row). Operators process partitions independently (on a
thread pool when the ExecConfig asks for more than one worker) and collect
results in partition order, so every operation is deterministic up to
floating-point reassociation across partition layouts.

Joins come in exactly two forms: equi joins, which hash-shuffle both inputs
by key, and predicate joins, which broadcast the smaller table against every
partition of the larger one and evaluate the predicate over partition block
pairs (a filtered Cartesian product). Predicates receive two column dicts
whose arrays are shaped (n1, 1) and (1, n2), so plain numpy expressions
produce the (n1, n2) pair mask.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .model import InputError, ParameterError

# Cap on pair-mask elements evaluated at once in predicate joins.
_MAX_PAIR_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class ExecConfig:
    """Worker pool size and target partition count for table operators."""

    workers: int = 1
    target_partitions: int | None = None

    def __post_init__(self):
        if self.workers < 1:
            raise ParameterError(f"workers must be >= 1, got {self.workers}")
        if self.target_partitions is not None and self.target_partitions < 1:
            raise ParameterError(
                f"target_partitions must be >= 1, got {self.target_partitions}"
            )

    @property
    def partitions(self) -> int:
        if self.target_partitions is not None:
            return self.target_partitions
        return 4 * self.workers


def _chunk_len(chunk) -> int:
    return len(chunk)


def _is_array_column(chunk) -> bool:
    return isinstance(chunk, list)


def _empty_like(chunk):
    if _is_array_column(chunk):
        return []
    return np.empty(0, dtype=chunk.dtype)


def _take(chunk, idx):
    if _is_array_column(chunk):
        return [chunk[i] for i in idx]
    return chunk[idx]


def _concat_chunks(chunks):
    if not chunks:
        return np.empty(0, dtype=np.float64)
    if _is_array_column(chunks[0]):
        out = []
        for c in chunks:
            out.extend(c)
        return out
    return np.concatenate(chunks)


def _split_chunk(chunk, n_parts):
    # same boundaries for scalar and array columns, or partitions go ragged
    base, rem = divmod(len(chunk), n_parts)
    bounds = [0]
    for i in range(n_parts):
        bounds.append(bounds[-1] + base + (1 if i < rem else 0))
    return [chunk[bounds[i]: bounds[i + 1]] for i in range(n_parts)]


class Table:
    """Immutable columnar table split into row partitions."""

    __slots__ = ("_partitions", "_columns")

    def __init__(self, partitions: list[dict], columns: tuple[str, ...] | None = None):
        if columns is None:
            if not partitions:
                raise InputError("cannot infer columns of a table with no partitions")
            columns = tuple(partitions[0])
        columns = tuple(columns)
        for part in partitions:
            if set(part) != set(columns):
                raise InputError(
                    f"partition columns {sorted(part)} != schema {sorted(columns)}"
                )
            lengths = {name: _chunk_len(part[name]) for name in columns}
            if len(set(lengths.values())) > 1:
                raise InputError(f"ragged partition column lengths: {lengths}")
        self._partitions = partitions
        self._columns = columns

    # -- construction -----------------------------------------------------

    @classmethod
    def from_columns(cls, data: dict, num_partitions: int = 1) -> "Table":
        columns = tuple(data)
        chunks = {}
        for name, values in data.items():
            if isinstance(values, list) and values and isinstance(
                values[0], (list, np.ndarray)
            ):
                chunks[name] = [np.asarray(v) for v in values]
            else:
                chunks[name] = np.asarray(values)
        table = cls([chunks], columns)
        return table.repartition(num_partitions) if num_partitions > 1 else table

    @classmethod
    def from_rows(cls, rows: list[dict], columns: tuple[str, ...],
                  num_partitions: int = 1) -> "Table":
        data = {name: [row[name] for row in rows] for name in columns}
        return cls.from_columns(data, num_partitions)

    # -- inspection -------------------------------------------------------

    @property
    def columns(self) -> tuple[str, ...]:
        return self._columns

    @property
    def num_partitions(self) -> int:
        return len(self._partitions)

    def partition_lengths(self) -> list[int]:
        return [
            _chunk_len(part[self._columns[0]]) if self._columns else 0
            for part in self._partitions
        ]

    def num_rows(self) -> int:
        return sum(self.partition_lengths())

    def column(self, name: str):
        if name not in self._columns:
            raise InputError(f"unknown column {name!r}")
        return _concat_chunks([part[name] for part in self._partitions])

    def to_rows(self) -> list[dict]:
        rows = []
        for part in self._partitions:
            n = _chunk_len(part[self._columns[0]]) if self._columns else 0
            materialized = {
                name: (chunk if _is_array_column(chunk) else chunk.tolist())
                for name, chunk in part.items()
            }
            for i in range(n):
                rows.append({name: materialized[name][i] for name in self._columns})
        return rows

    # -- plumbing ---------------------------------------------------------

    def repartition(self, n_parts: int) -> "Table":
        if n_parts < 1:
            raise ParameterError("partition count must be >= 1")
        whole = {name: self.column(name) for name in self._columns}
        parts = [
            {name: _split_chunk(whole[name], n_parts)[i] for name in self._columns}
            for i in range(n_parts)
        ]
        return Table(parts, self._columns)

    def select(self, names) -> "Table":
        names = tuple(names)
        for name in names:
            if name not in self._columns:
                raise InputError(f"unknown column {name!r}")
        parts = [{name: part[name] for name in names} for part in self._partitions]
        return Table(parts, names)

    def rename(self, mapping: dict) -> "Table":
        new_columns = tuple(mapping.get(name, name) for name in self._columns)
        if len(set(new_columns)) != len(new_columns):
            raise InputError(f"rename produces duplicate columns: {new_columns}")
        parts = [
            {mapping.get(name, name): chunk for name, chunk in part.items()}
            for part in self._partitions
        ]
        return Table(parts, new_columns)

    def with_column(self, name: str, fn: Callable[[dict], Any],
                    exec_cfg: "ExecConfig | None" = None) -> "Table":
        """Append a column computed per partition by fn(block) -> chunk."""
        if name in self._columns:
            raise InputError(f"column {name!r} already exists")

        def add(part):
            chunk = fn(part)
            if not _is_array_column(chunk):
                chunk = np.asarray(chunk)
            out = dict(part)
            out[name] = chunk
            return out

        parts = _map_partitions(add, self._partitions, exec_cfg)
        return Table(parts, self._columns + (name,))

    def union(self, other: "Table") -> "Table":
        if set(self._columns) != set(other._columns):
            raise InputError("union requires identical column sets")
        other_parts = [
            {name: part[name] for name in self._columns} for part in other._partitions
        ]
        return Table(self._partitions + other_parts, self._columns)


def _map_partitions(fn, parts, exec_cfg: ExecConfig | None):
    if exec_cfg is None or exec_cfg.workers <= 1 or len(parts) <= 1:
        return [fn(p) for p in parts]
    with ThreadPoolExecutor(max_workers=exec_cfg.workers) as pool:
        return list(pool.map(fn, parts))


# -- fold specification ---------------------------------------------------


@dataclass(frozen=True)
class Fold:
    """Aggregation fold: init/step/merge/finish.

    merge must be associative and commutative over fold states; that contract
    is what makes group_aggregate deterministic across partition layouts and
    worker counts. step_block, when given, must equal folding every row of
    the block through step; it is used as a vectorized fast path for global
    (key-less) aggregation.
    """

    init: Callable[[], Any]
    step: Callable[[Any, dict], Any]
    merge: Callable[[Any, Any], Any]
    finish: Callable[[Any], Any] = lambda state: state
    step_block: Callable[[Any, dict], Any] | None = None


def fold_sum(column: str) -> Fold:
    """Sum of a scalar column."""
    return Fold(
        init=lambda: 0.0,
        step=lambda s, row: s + row[column],
        merge=lambda a, b: a + b,
        step_block=lambda s, block: s + float(np.sum(block[column]))
        if len(block[column])
        else s,
    )


def fold_count_sum(column: str) -> Fold:
    """(row count, sum of a scalar column) in one pass."""
    return Fold(
        init=lambda: (0, 0.0),
        step=lambda s, row: (s[0] + 1, s[1] + row[column]),
        merge=lambda a, b: (a[0] + b[0], a[1] + b[1]),
        step_block=lambda s, block: (
            s[0] + len(block[column]),
            s[1] + (float(np.sum(block[column])) if len(block[column]) else 0.0),
        ),
    )


def fold_collect(column: str) -> Fold:
    """Collect a scalar column into a sorted numpy array per group."""
    return Fold(
        init=lambda: [],
        step=lambda s, row: s + [row[column]],
        merge=lambda a, b: a + b,
        finish=lambda s: np.sort(np.asarray(s, dtype=np.float64)),
    )


# -- operators -------------------------------------------------------------


def count(t: Table) -> int:
    """Number of rows."""
    return t.num_rows()


def distinct(t: Table, exec_cfg: ExecConfig | None = None) -> Table:
    """One representative row per equal-record class, first occurrence kept."""

    def row_keys(part):
        n = _chunk_len(part[t.columns[0]]) if t.columns else 0
        cols = []
        for name in t.columns:
            chunk = part[name]
            if _is_array_column(chunk):
                cols.append([tuple(np.asarray(a).tolist()) for a in chunk])
            else:
                cols.append(chunk.tolist())
        return [tuple(col[i] for col in cols) for i in range(n)]

    def local(part):
        keys = row_keys(part)
        seen = {}
        for i, key in enumerate(keys):
            if key not in seen:
                seen[key] = i
        idx = sorted(seen.values())
        return {name: _take(part[name], idx) for name in t.columns}, [
            keys[i] for i in idx
        ]

    locals_ = _map_partitions(local, t._partitions, exec_cfg)
    seen = set()
    kept_parts = []
    for part, keys in locals_:
        idx = []
        for i, key in enumerate(keys):
            if key not in seen:
                seen.add(key)
                idx.append(i)
        kept_parts.append({name: _take(part[name], idx) for name in t.columns})
    out = Table(kept_parts, t.columns)
    n_parts = exec_cfg.partitions if exec_cfg is not None else t.num_partitions
    return out.repartition(max(1, n_parts))


def explode(t: Table, array_column: str, exec_cfg: ExecConfig | None = None) -> Table:
    """One output row per array element; other columns are duplicated."""
    if array_column not in t.columns:
        raise InputError(f"unknown column {array_column!r}")

    def one(part):
        arr_chunk = part[array_column]
        if not _is_array_column(arr_chunk):
            raise ParameterError(f"column {array_column!r} is not array-valued")
        lengths = np.fromiter(
            (len(a) for a in arr_chunk), dtype=np.int64, count=len(arr_chunk)
        )
        out = {}
        for name in t.columns:
            if name == array_column:
                nonempty = [np.asarray(a) for a in arr_chunk if len(a)]
                out[name] = (
                    np.concatenate(nonempty) if nonempty else np.empty(0)
                )
            else:
                chunk = part[name]
                if _is_array_column(chunk):
                    out[name] = [
                        a for a, c in zip(chunk, lengths) for _ in range(int(c))
                    ]
                else:
                    out[name] = np.repeat(chunk, lengths)
        return out

    return Table(_map_partitions(one, t._partitions, exec_cfg), t.columns)


def group_aggregate(
    t: Table,
    key_columns,
    fold: Fold,
    exec_cfg: ExecConfig | None = None,
    value_column: str = "value",
) -> Table:
    """One row per distinct key with the finished fold value.

    key_columns may be empty for a global aggregate, which then yields a
    single-row table holding only the value column.
    """
    key_columns = tuple(key_columns)
    for name in key_columns:
        if name not in t.columns:
            raise InputError(f"unknown key column {name!r}")
        if _is_array_column(t._partitions[0][name]) if t._partitions else False:
            raise ParameterError("array-valued columns cannot be grouping keys")
    if value_column in key_columns:
        raise InputError(f"value column {value_column!r} collides with a key")

    def map_side(part):
        n = _chunk_len(part[t.columns[0]]) if t.columns else 0
        states: dict = {}
        if not key_columns and fold.step_block is not None:
            states[()] = fold.step_block(fold.init(), part)
            return states
        key_cols = [part[name].tolist() for name in key_columns]
        mats = {
            name: (chunk if _is_array_column(chunk) else chunk.tolist())
            for name, chunk in part.items()
        }
        for i in range(n):
            key = tuple(col[i] for col in key_cols)
            state = states.get(key)
            if state is None:
                state = fold.init()
            row = {name: mats[name][i] for name in t.columns}
            states[key] = fold.step(state, row)
        return states

    partial = _map_partitions(map_side, t._partitions, exec_cfg)
    merged: dict = {}
    for states in partial:
        for key, state in states.items():
            if key in merged:
                merged[key] = fold.merge(merged[key], state)
            else:
                merged[key] = state

    keys = list(merged)
    values = [fold.finish(merged[k]) for k in keys]
    if not keys and not key_columns:
        # a global fold over an empty table still yields one finished row
        values = [fold.finish(fold.init())]
    data: dict = {}
    for pos, name in enumerate(key_columns):
        data[name] = np.asarray([k[pos] for k in keys])
    if values and isinstance(values[0], np.ndarray):
        data[value_column] = [np.asarray(v) for v in values]
    elif values and isinstance(values[0], (tuple, list)):
        # structured states (e.g. (count, sum)) stay opaque row objects
        data[value_column] = list(values)
    else:
        data[value_column] = np.asarray(values)
    out = Table([data], tuple(key_columns) + (value_column,))
    n_parts = exec_cfg.partitions if exec_cfg is not None else 1
    return out.repartition(max(1, min(n_parts, max(1, out.num_rows()))))


def _gather_pairs(left_part, right_part, li, ri, columns_left, columns_right):
    out = {}
    for name in columns_left:
        out[name] = _take(left_part[name], li)
    for name in columns_right:
        out[name] = _take(right_part[name], ri)
    return out


def join(
    t1: Table,
    t2: Table,
    exec_cfg: ExecConfig | None = None,
    equi_keys: list[tuple[str, str]] | None = None,
    predicate: Callable[[dict, dict], np.ndarray] | None = None,
) -> Table:
    """Join two tables.

    With equi_keys (pairs of (left column, right column)), rows pair up on
    exactly equal key tuples after a hash shuffle of both sides. Without keys
    the join is a filtered Cartesian product: the smaller table is broadcast
    against every partition of the larger and `predicate` selects pairs.
    Exactly one of equi_keys / predicate may drive the join; a predicate of
    None with no keys yields the full cross product.
    """
    collisions = sorted(set(t1.columns) & set(t2.columns))
    if collisions:
        raise InputError(f"join column collision: {collisions}")
    if equi_keys is not None and predicate is not None:
        raise ParameterError("join takes equi_keys or a predicate, not both")
    out_columns = t1.columns + t2.columns
    n_parts = exec_cfg.partitions if exec_cfg is not None else 4

    if equi_keys is not None:
        return _equi_join(t1, t2, equi_keys, n_parts, exec_cfg, out_columns)
    return _predicate_join(t1, t2, predicate, n_parts, exec_cfg, out_columns)


def _combined_keys(t: Table, names) -> np.ndarray:
    cols = []
    for name in names:
        chunk = t.column(name)
        if _is_array_column(chunk) or not np.issubdtype(chunk.dtype, np.integer):
            raise ParameterError(f"equi-join key {name!r} must be an integer column")
        cols.append(chunk.astype(np.int64))
    return np.stack(cols, axis=1) if cols else np.empty((t.num_rows(), 0), np.int64)


def _equi_join(t1, t2, equi_keys, n_parts, exec_cfg, out_columns):
    left_names = [pair[0] for pair in equi_keys]
    right_names = [pair[1] for pair in equi_keys]
    lk = _combined_keys(t1, left_names)
    rk = _combined_keys(t2, right_names)
    # exact shared integer codes for multi-column keys
    both = np.concatenate([lk, rk], axis=0)
    _, codes = np.unique(both, axis=0, return_inverse=True)
    codes = codes.ravel()
    lcodes = codes[: len(lk)]
    rcodes = codes[len(lk):]

    lpart = {name: t1.column(name) for name in t1.columns}
    rpart = {name: t2.column(name) for name in t2.columns}
    lbucket = lcodes % n_parts
    rbucket = rcodes % n_parts

    lorder = np.argsort(lbucket, kind="stable")
    rorder = np.argsort(rbucket, kind="stable")
    lbounds = np.searchsorted(lbucket[lorder], np.arange(n_parts + 1))
    rbounds = np.searchsorted(rbucket[rorder], np.arange(n_parts + 1))

    def bucket_task(b):
        lidx = lorder[lbounds[b]: lbounds[b + 1]]
        ridx = rorder[rbounds[b]: rbounds[b + 1]]
        lc = lcodes[lidx]
        rc = rcodes[ridx]
        if len(lc) == 0 or len(rc) == 0:
            return _gather_pairs(
                lpart, rpart, np.empty(0, np.int64), np.empty(0, np.int64),
                t1.columns, t2.columns,
            )
        rsort = np.argsort(rc, kind="stable")
        rc_sorted = rc[rsort]
        lo = np.searchsorted(rc_sorted, lc, side="left")
        hi = np.searchsorted(rc_sorted, lc, side="right")
        counts = hi - lo
        total = int(counts.sum())
        li = np.repeat(np.arange(len(lc)), counts)
        starts = np.repeat(lo, counts)
        offsets = np.arange(total) - np.repeat(
            np.concatenate([[0], np.cumsum(counts)[:-1]]), counts
        )
        ri = rsort[starts + offsets]
        return _gather_pairs(
            lpart, rpart, lidx[li], ridx[ri], t1.columns, t2.columns
        )

    parts = _map_partitions(bucket_task, list(range(n_parts)), exec_cfg)
    return Table(parts, out_columns)


def _predicate_join(t1, t2, predicate, n_parts, exec_cfg, out_columns):
    for t in (t1, t2):
        for name in t.columns:
            for part in t._partitions:
                if _is_array_column(part[name]):
                    raise ParameterError(
                        "predicate joins require scalar columns only"
                    )
    # broadcast the smaller table against partitions of the larger
    if t1.num_rows() >= t2.num_rows():
        big, small, big_is_left = t1.repartition(n_parts), t2, True
    else:
        big, small, big_is_left = t2.repartition(n_parts), t1, False
    small_block = {name: small.column(name) for name in small.columns}
    n_small = small.num_rows()

    def part_task(big_block):
        n_big = _chunk_len(big_block[big.columns[0]]) if big.columns else 0
        li_chunks, ri_chunks = [], []
        step = max(1, _MAX_PAIR_ELEMENTS // max(1, n_small))
        for s in range(0, n_big, step):
            e = min(n_big, s + step)
            sub = {name: big_block[name][s:e] for name in big.columns}
            if big_is_left:
                lview = {name: sub[name][:, None] for name in t1.columns}
                rview = {name: small_block[name][None, :] for name in t2.columns}
            else:
                lview = {name: small_block[name][:, None] for name in t1.columns}
                rview = {name: sub[name][None, :] for name in t2.columns}
            if predicate is None:
                n1 = (e - s) if big_is_left else n_small
                n2 = n_small if big_is_left else (e - s)
                ii, jj = np.meshgrid(
                    np.arange(n1), np.arange(n2), indexing="ij"
                )
                ii, jj = ii.ravel(), jj.ravel()
            else:
                mask = predicate(lview, rview)
                ii, jj = np.nonzero(mask)
            if big_is_left:
                li_chunks.append(ii + s)
                ri_chunks.append(jj)
            else:
                li_chunks.append(ii)
                ri_chunks.append(jj + s)
        li = np.concatenate(li_chunks) if li_chunks else np.empty(0, np.int64)
        ri = np.concatenate(ri_chunks) if ri_chunks else np.empty(0, np.int64)
        if big_is_left:
            return _gather_pairs(
                big_block, small_block, li, ri, t1.columns, t2.columns
            )
        return _gather_pairs(
            small_block, big_block, li, ri, t1.columns, t2.columns
        )

    parts = _map_partitions(part_task, big._partitions, exec_cfg)
    return Table(parts, out_columns)
