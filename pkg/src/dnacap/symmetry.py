"""Channel symmetry classification.

A matrix is doubly-permutation when its rows are permutations of one
another and likewise its columns.  A channel is symmetric in Gallager's
sense when the output columns split into blocks whose restricted matrices
are each doubly-permutation; that structure makes the uniform input law
capacity-achieving.  The partition search below is exhaustive (up to a
budget), so a negative answer is a certificate, not a heuristic.
"""

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .channel import Dmc, MergedChannel, binomial_extend
from .errors import SearchBudgetExceeded

PARTITION_QUANTUM = 1e-9
DOUBLY_PERM_TOL = 1e-12
DEFAULT_COLUMN_CAP = 5000
DEFAULT_NODE_BUDGET = 5_000_000


@dataclass(frozen=True)
class SymmetryReport:
    is_doubly_permutation: bool
    gallager_partition: tuple | None
    is_modulo_additive: bool
    atom_labels: tuple | None
    search_completed: bool = True

    @property
    def is_gallager_symmetric(self) -> bool | None:
        """True/False when the search completed, None when undecided."""
        if self.gallager_partition is not None:
            return True
        return False if self.search_completed else None

    def to_dict(self) -> dict:
        return {
            "is_doubly_permutation": self.is_doubly_permutation,
            "gallager_symmetric": (
                "undecided" if self.is_gallager_symmetric is None else self.is_gallager_symmetric
            ),
            "gallager_partition": (
                None if self.gallager_partition is None
                else [list(b) for b in self.gallager_partition]
            ),
            "is_modulo_additive": self.is_modulo_additive,
            "atom_labels": None if self.atom_labels is None else list(self.atom_labels),
        }


def _as_matrix(m) -> np.ndarray:
    if isinstance(m, (Dmc, MergedChannel)):
        return np.asarray(m.rows, dtype=float)
    return np.asarray(m, dtype=float)


def _tokens(mat: np.ndarray, quantum: float) -> np.ndarray:
    return np.round(mat / quantum).astype(np.int64)


def is_doubly_permutation(m) -> bool:
    """True iff all rows are mutual permutations and (when there is more
    than one column) all columns are as well, compared as sorted multisets
    after quantization at 1e-12."""
    mat = _as_matrix(m)
    tok = _tokens(mat, DOUBLY_PERM_TOL)
    return _rows_mutually_permuted(tok) and _cols_mutually_permuted(tok)


def _rows_mutually_permuted(tok: np.ndarray) -> bool:
    base = np.sort(tok[0])
    return all(np.array_equal(np.sort(r), base) for r in tok[1:])


def _cols_mutually_permuted(tok: np.ndarray) -> bool:
    if tok.shape[1] <= 1:
        return True
    base = np.sort(tok[:, 0])
    return all(np.array_equal(np.sort(tok[:, j]), base) for j in range(1, tok.shape[1]))


def gallager_partition(ch, column_cap: int = DEFAULT_COLUMN_CAP,
                       node_budget: int = DEFAULT_NODE_BUDGET):
    """Partition of the output columns into doubly-permutation blocks, or
    None when provably no partition exists.

    Columns are first grouped by their sorted-value fingerprint (columns in
    a common block must be mutual permutations, so blocks never straddle
    fingerprint classes); each class is then covered by depth-first search
    over candidate blocks.  Exceeding column_cap or node_budget raises
    SearchBudgetExceeded, an undecided outcome distinct from "not symmetric".
    """
    mat = _as_matrix(ch)
    if mat.shape[1] > column_cap:
        raise SearchBudgetExceeded(
            f"{mat.shape[1]} output columns exceed the cap of {column_cap}; undecided"
        )
    tok = _tokens(mat, PARTITION_QUANTUM)
    classes: dict = {}
    for j in range(tok.shape[1]):
        classes.setdefault(tuple(np.sort(tok[:, j])), []).append(j)
    budget = [node_budget]
    partition = []
    for cols in classes.values():
        blocks = _cover_class(tok[:, cols], budget)
        if blocks is None:
            return None
        partition.extend(tuple(cols[j] for j in blk) for blk in blocks)
    partition.sort(key=lambda blk: blk[0])
    return tuple(partition)


def _cover_class(tok: np.ndarray, budget: list):
    """Exact cover of one fingerprint class by row-permutation blocks.

    Within a class the column condition holds automatically, so a subset of
    columns is a valid block iff every value occurs equally often in each
    row of the restricted matrix.  Candidates are generated by DFS over
    column indices with a spread bound: adding a column raises each row's
    count of one value by one, so a partial block whose per-value row
    spread exceeds the number of addable columns can never even out.
    """
    nx, ny = tok.shape
    vals, inv = np.unique(tok, return_inverse=True)
    ids = inv.reshape(tok.shape)
    nv = vals.size
    col_incr = np.zeros((ny, nv, nx), dtype=np.int32)
    for c in range(ny):
        for x in range(nx):
            col_incr[c, ids[x, c], x] = 1

    def candidate_blocks(avail):
        pivot = avail[0]
        rest = avail[1:]
        found = []

        def dfs(counts, chosen, next_idx):
            budget[0] -= 1
            if budget[0] < 0:
                raise SearchBudgetExceeded("partition search node budget exhausted; undecided")
            if (counts == counts[:, :1]).all():
                found.append(list(chosen))
            for k in range(next_idx, len(rest)):
                c = rest[k]
                nxt = counts + col_incr[c]
                remaining = len(rest) - k - 1
                spread = (nxt.max(axis=1) - nxt.min(axis=1)).max()
                if spread <= remaining:
                    chosen.append(c)
                    dfs(nxt, chosen, k + 1)
                    chosen.pop()

        dfs(col_incr[pivot].copy(), [pivot], 0)
        return found

    def cover(avail):
        if not avail:
            return []
        for blk in candidate_blocks(avail):
            taken = set(blk)
            sub = cover([c for c in avail if c not in taken])
            if sub is not None:
                return [blk] + sub
        return None

    return cover(list(range(ny)))


# Small doubly-permutation atoms, as value-index patterns (up to row and
# column permutation).  Entry k stands for the k-th distinct value.  Matching
# allows value relabeling, under which the three cyclic-type 4x4 atoms
# coincide, so templates are tried in a fixed priority order (cyclic first)
# and the first hit wins.
_ATOM_PATTERNS = [
    ("U(2,1)", [[0], [0]]),
    ("U(2,2)", [[0, 1], [1, 0]]),
    ("U(3,1)", [[0], [0], [0]]),
    ("U(3,3)", [[0, 1, 2], [1, 2, 0], [2, 0, 1]]),
    ("U(4,1)", [[0], [0], [0], [0]]),
    ("U(4,2)", [[0, 1], [0, 1], [1, 0], [1, 0]]),
    ("U(4,4)C", [[0, 1, 2, 3], [1, 2, 3, 0], [2, 3, 0, 1], [3, 0, 1, 2]]),
    ("U(4,4)A", [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]]),
    ("U(4,4)B", [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 1, 0], [3, 2, 0, 1]]),
    ("U(4,4)D", [[0, 1, 2, 3], [1, 3, 0, 2], [2, 0, 3, 1], [3, 2, 1, 0]]),
]


def _pattern_signature(block: np.ndarray) -> frozenset:
    """All row/column-permuted relabelings of a small block, as a set of
    canonical tuples (first-appearance value indexing)."""
    nr, nc = block.shape
    sigs = set()
    for rp in permutations(range(nr)):
        for cp in permutations(range(nc)):
            arr = block[np.ix_(rp, cp)]
            seen: dict = {}
            flat = []
            for v in arr.ravel():
                seen.setdefault(v, len(seen))
                flat.append(seen[v])
            sigs.add(tuple(flat))
    return frozenset(sigs)


def match_atom(block) -> str | None:
    """Best-effort label from the small-atom taxonomy for blocks with at
    most 4 rows and columns; None when nothing matches."""
    tok = _tokens(_as_matrix(block), PARTITION_QUANTUM)
    nr, nc = tok.shape
    if nr > 4 or nc > 4:
        return None
    sig = _pattern_signature(tok)
    for label, pattern in _ATOM_PATTERNS:
        pat = np.array(pattern)
        if pat.shape != (nr, nc):
            continue
        if _pattern_signature(pat) & sig:
            return label
    return None


def check_extension_symmetry(w: Dmc, d: int, column_cap: int = DEFAULT_COLUMN_CAP,
                             node_budget: int = DEFAULT_NODE_BUDGET) -> SymmetryReport:
    """Symmetry report for the d-order merged extension of w."""
    ext = binomial_extend(w, d)
    mat = np.asarray(ext.rows)
    doubly = is_doubly_permutation(mat)
    modadd = Dmc(mat).is_modulo_additive() if mat.shape[0] == mat.shape[1] else False
    try:
        partition = gallager_partition(mat, column_cap=column_cap, node_budget=node_budget)
        completed = True
    except SearchBudgetExceeded:
        partition, completed = None, False
    labels = None
    if partition is not None and w.num_inputs <= 4:
        labels = tuple(match_atom(mat[:, list(blk)]) for blk in partition)
    return SymmetryReport(
        is_doubly_permutation=doubly,
        gallager_partition=partition,
        is_modulo_additive=modadd,
        atom_labels=labels,
        search_completed=completed,
    )
