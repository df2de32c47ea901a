"""Propagation-tensor network: per-lag b sites and the grow/step MPOs.

The augmented state with legs ordered newest first is advanced by a
staircase MPO whose sites are built from the influence matrices:

    head    [b_0]: emits the new Liouville leg, weighted by diag(I_0);
    site k  [b_k]: copy the history leg (delta in/out) and weight it by
                   I_k(alpha, j), where the internal bond alpha carries
                   the value of the newest leg;
    tail    [b_{n-1}]: same as a site but terminating the bond chain;
    summed tail [b_K]: the oldest leg is summed over with weight I_K,
                   realising the finite-memory drop of stale history.

Because I_k for k >= 2 depends on the newest leg only through the
eigenvalue difference Ominus, the bond can be relabelled by degeneracy
classes from the second internal bond onwards.  The first internal bond
always carries the full Liouville index: I_1 contains the free propagator
elementwise, which distinguishes members of one class.

MPO sites use the (left bond, output, input, right bond) convention of
:mod:`temposim.tensornet`; the head consumes a dummy input leg of
dimension 1 and the summed tail emits a dummy output leg of dimension 1,
so the staircase offset reduces to padding the state with a trivial site.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ContractShapeError
from .liouville import IndexClasses, InfluenceTable, check_class_rows
from .tensornet import (
    MatrixProductOperator,
    MatrixProductState,
    TruncationPolicy,
    mps_apply_mpo,
)

__all__ = [
    "BSite",
    "build_bsite",
    "build_head_site",
    "build_tail_site",
    "build_summed_tail_site",
    "build_grow_mpo",
    "build_step_mpo",
    "apply_grow",
    "apply_step",
]


@dataclass
class BSite:
    """One rank-4 site of the propagation MPO."""

    lag: int
    tensor: np.ndarray  # (left bond, out, in, right bond)
    reduced: bool

    @property
    def bond_dims(self):
        return (self.tensor.shape[0], self.tensor.shape[3])


def _row_space(table: InfluenceTable, classes: Optional[IndexClasses],
               lag: int):
    """Bond labels and the influence rows they select for a given lag.

    Lags >= 2 may use class representatives (validated); lag 0/1 rows must
    keep the full index.
    """
    matrix = table[lag] if lag <= table.memory else None
    if classes is None or lag < 2:
        dim = table.basis.liouville_dim
        rows = matrix if matrix is not None else None
        return dim, rows
    if matrix is not None:
        check_class_rows(matrix, classes, lag)
        rows = matrix[classes.representatives]
    else:
        rows = None
    return classes.count, rows


def build_bsite(k: int, table: InfluenceTable,
                classes: Optional[IndexClasses] = None) -> BSite:
    """Interior propagation site for lag k.

    Beyond the memory window (k > K) the site is the exact identity on
    both legs.  With ``classes`` supplied the bond legs are indexed by
    Ominus classes for k >= 2 (members of one class must produce equal
    influence rows, otherwise a ClassConsistencyError is raised); for
    k = 1 the left bond keeps the full Liouville index and the site maps
    it to its class on the right bond.
    """
    if k < 0:
        raise ValueError("lag must be >= 0")
    d2 = table.basis.liouville_dim
    eye = np.eye(d2)
    if k > table.memory:
        dim = classes.count if (classes is not None and k >= 2) else d2
        tensor = np.einsum("ab,ji->ajib", np.eye(dim), eye).astype(complex)
        return BSite(lag=k, tensor=tensor, reduced=classes is not None)
    if classes is not None and k == 1:
        # bridge: full index in, class label out
        proj = np.zeros((d2, classes.count))
        proj[np.arange(d2), classes.labels] = 1.0
        tensor = np.einsum("ac,aj,ji->ajic", proj, table[1], eye)
        return BSite(lag=1, tensor=tensor.astype(complex), reduced=True)
    dim, rows = _row_space(table, classes, k)
    tensor = np.einsum("ab,aj,ji->ajib", np.eye(dim), rows, eye)
    return BSite(lag=k, tensor=tensor.astype(complex), reduced=classes is not None)


def build_head_site(table: InfluenceTable) -> BSite:
    """b_0 cap: emits the new leg weighted by the diagonal of I_0.

    The right bond always carries the full new index (needed by I_1 one
    site further along).
    """
    d2 = table.basis.liouville_dim
    tensor = np.zeros((1, d2, 1, d2), dtype=complex)
    diag = np.diag(table[0])
    tensor[0, np.arange(d2), 0, np.arange(d2)] = diag
    return BSite(lag=0, tensor=tensor, reduced=False)


def build_tail_site(k: int, table: InfluenceTable,
                    classes: Optional[IndexClasses] = None) -> BSite:
    """b_{n-1} cap terminating the bond chain (oldest retained leg)."""
    d2 = table.basis.liouville_dim
    dim, rows = _row_space(table, classes, k)
    tensor = np.einsum("aj,ji->aji", rows,
                       np.eye(d2)).reshape(dim, d2, d2, 1)
    return BSite(lag=k, tensor=tensor.astype(complex),
                 reduced=classes is not None and k >= 2)


def build_summed_tail_site(k: int, table: InfluenceTable,
                           classes: Optional[IndexClasses] = None) -> BSite:
    """Summed cap: drops the oldest leg, weighting the sum by I_k."""
    dim, rows = _row_space(table, classes, k)
    d2 = table.basis.liouville_dim
    tensor = rows.reshape(dim, 1, d2, 1)
    return BSite(lag=k, tensor=tensor.astype(complex),
                 reduced=classes is not None and k >= 2)


def build_grow_mpo(n: int, table: InfluenceTable,
                   classes: Optional[IndexClasses] = None
                   ) -> MatrixProductOperator:
    """Staircase MPO growing an (n-1)-leg state to n legs (2 <= n <= K+1).

    Site m consumes history leg m-1 of the padded state and re-emits it
    one position later; site 0 emits the new leg.
    """
    if n < 2 or n > table.memory + 1:
        raise ValueError(
            f"grow MPO requires 2 <= n <= K + 1 = {table.memory + 1}, got {n}")
    sites = [build_head_site(table).tensor]
    for k in range(1, n - 1):
        sites.append(build_bsite(k, table, classes).tensor)
    sites.append(build_tail_site(n - 1, table, classes).tensor)
    return MatrixProductOperator(sites)


def build_step_mpo(memory: int, table: InfluenceTable,
                   classes: Optional[IndexClasses] = None
                   ) -> MatrixProductOperator:
    """Fixed-memory propagation MPO: grow by one leg, drop the oldest.

    Equals the grow MPO at n = K + 1 with the earliest output leg summed
    over.  Applying it to a K-leg state returns a K-leg state advanced by
    one timestep (a trailing dummy leg of dimension 1 remains for the
    caller to squeeze).
    """
    if memory < 1:
        raise ValueError(f"memory must be >= 1, got {memory}")
    if memory > table.memory:
        raise ValueError(
            f"step MPO needs lags up to {memory}, table covers {table.memory}")
    sites = [build_head_site(table).tensor]
    for k in range(1, memory):
        sites.append(build_bsite(k, table, classes).tensor)
    sites.append(build_summed_tail_site(memory, table, classes).tensor)
    return MatrixProductOperator(sites)


def _pad_front(mps: MatrixProductState) -> MatrixProductState:
    dummy = np.ones((1, 1, 1), dtype=complex)
    return MatrixProductState([dummy] + [s for s in mps.sites],
                              discarded_weight=mps.discarded_weight)


def apply_grow(state: MatrixProductState, grow_mpo: MatrixProductOperator,
               policy: TruncationPolicy) -> MatrixProductState:
    """Grow an (n-1)-leg state by one leg with the staircase MPO."""
    if grow_mpo.n_sites != state.n_sites + 1:
        raise ContractShapeError(
            f"grow MPO with {grow_mpo.n_sites} sites cannot act on a "
            f"{state.n_sites}-leg state")
    return mps_apply_mpo(_pad_front(state), grow_mpo, policy)


def apply_step(state: MatrixProductState, step_mpo: MatrixProductOperator,
               policy: TruncationPolicy) -> MatrixProductState:
    """Advance a K-leg state one timestep at fixed memory length."""
    if step_mpo.n_sites != state.n_sites + 1:
        raise ContractShapeError(
            f"step MPO with {step_mpo.n_sites} sites cannot act on a "
            f"{state.n_sites}-leg state")
    out = mps_apply_mpo(_pad_front(state), step_mpo, policy)
    # drop the trailing dummy leg left by the summed tail
    sites = list(out.sites)
    last = sites.pop()  # (chi, 1, 1)
    sites[-1] = np.tensordot(sites[-1], last[:, 0, :], axes=([2], [0]))
    return MatrixProductState(sites, discarded_weight=out.discarded_weight)
