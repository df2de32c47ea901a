"""Dense tensor algebra, truncated SVDs and matrix-product representations.

Conventions
-----------
Dense tensors are complex numpy arrays stored in C (row-major) order, i.e.
the *last* index runs fastest.  An MPS site is a rank-3 array with legs

    (left bond, physical, right bond)

and boundary sites keep explicit bonds of dimension 1.  An MPO site is a
rank-4 array with legs

    (left bond, output, input, right bond).

All operations here are pure functions: they never mutate their inputs and
are deterministic for identical inputs and truncation policy.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np
import scipy.linalg

from .errors import ContractShapeError, SvdConvergenceError

__all__ = [
    "TruncationPolicy",
    "SvdResult",
    "MatrixProductState",
    "MatrixProductOperator",
    "svd_truncate",
    "mps_from_tensor",
    "mps_apply_mpo",
    "mps_compress",
    "mps_contract_weighted",
]

OPEN = "open"


@dataclass(frozen=True)
class TruncationPolicy:
    """Singular-value truncation rule used by every compression step.

    ``relative_cutoff`` is interpreted relative to the largest singular
    value of each decomposed matrix: values below
    ``relative_cutoff * s_max`` are dropped.  A cutoff of 0 keeps every
    singular value (exact sweeps).  ``max_bond`` optionally caps the
    retained rank.
    """

    relative_cutoff: float = 1e-12
    max_bond: Optional[int] = None

    def __post_init__(self):
        if not 0.0 <= self.relative_cutoff < 1.0:
            raise ValueError(
                f"relative_cutoff must lie in [0, 1), got {self.relative_cutoff}")
        if self.max_bond is not None and self.max_bond < 1:
            raise ValueError(f"max_bond must be >= 1, got {self.max_bond}")


@dataclass
class SvdResult:
    """Truncated SVD ``M ~ U @ diag(singular_values) @ Vdag``.

    ``discarded_weight`` is the Frobenius norm of the dropped part,
    ``sqrt(sum of squared discarded singular values)``, and bounds the
    reconstruction error.
    """

    U: np.ndarray
    singular_values: np.ndarray
    Vdag: np.ndarray
    discarded_weight: float

    @property
    def rank(self) -> int:
        return len(self.singular_values)

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.singular_values) @ self.Vdag


def _svd(matrix: np.ndarray):
    # gesdd occasionally fails to converge on ill-conditioned input;
    # retry with the slower but more robust gesvd driver.
    try:
        return np.linalg.svd(matrix, full_matrices=False)
    except np.linalg.LinAlgError:
        pass
    try:
        return scipy.linalg.svd(matrix, full_matrices=False,
                                lapack_driver="gesvd")
    except Exception as exc:  # pragma: no cover - depends on LAPACK
        raise SvdConvergenceError(
            f"SVD failed to converge for matrix of shape {matrix.shape}"
        ) from exc


def svd_truncate(matrix: np.ndarray, policy: TruncationPolicy) -> SvdResult:
    """Truncated singular value decomposition of a matrix.

    Retains singular values ``s >= policy.relative_cutoff * s_max`` (at
    least one, at most ``policy.max_bond``).

    Parameters
    ----------
    matrix:
        Finite-valued 2d array.
    policy:
        Truncation rule.

    Returns
    -------
    SvdResult
    """
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.size == 0:
        raise ValueError(f"expected a non-empty matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise SvdConvergenceError(
            f"non-finite entries in matrix of shape {matrix.shape}")
    u, s, vdag = _svd(matrix)
    keep = int(np.sum(s >= policy.relative_cutoff * s[0])) if s[0] > 0 else 1
    keep = max(keep, 1)
    if policy.max_bond is not None:
        keep = min(keep, policy.max_bond)
    discarded = float(np.sqrt(np.sum(s[keep:] ** 2)))
    return SvdResult(
        U=np.ascontiguousarray(u[:, :keep]),
        singular_values=s[:keep].copy(),
        Vdag=np.ascontiguousarray(vdag[:keep, :]),
        discarded_weight=discarded,
    )


@dataclass
class MatrixProductState:
    """Matrix product state: a chain of rank-3 site tensors.

    ``discarded_weight`` accumulates the truncation weights of every SVD
    that produced this state, which bounds the distance between the exact
    and the compressed contraction.
    """

    sites: List[np.ndarray]
    discarded_weight: float = 0.0

    def __post_init__(self):
        self.validate()

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def physical_dims(self) -> List[int]:
        return [s.shape[1] for s in self.sites]

    @property
    def bond_dims(self) -> List[int]:
        """Internal bond dimensions (length ``n_sites - 1``)."""
        return [s.shape[2] for s in self.sites[:-1]]

    @property
    def max_bond(self) -> int:
        return max([1] + self.bond_dims)

    @property
    def total_size(self) -> int:
        """Total number of stored tensor elements."""
        return sum(s.size for s in self.sites)

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(s))) for s in self.sites)

    def validate(self):
        if not self.sites:
            raise ContractShapeError("MPS must contain at least one site")
        if self.sites[0].shape[0] != 1 or self.sites[-1].shape[2] != 1:
            raise ContractShapeError("boundary bonds must have dimension 1")
        for i, (a, b) in enumerate(zip(self.sites, self.sites[1:])):
            if a.shape[2] != b.shape[0]:
                raise ContractShapeError(
                    f"bond mismatch between sites {i} and {i + 1}: "
                    f"{a.shape[2]} != {b.shape[0]}")

    def copy(self) -> "MatrixProductState":
        return MatrixProductState([s.copy() for s in self.sites],
                                  self.discarded_weight)

    def to_dense(self) -> np.ndarray:
        """Contract all sites into a dense tensor of shape ``physical_dims``."""
        out = self.sites[0][0]  # (d0, chi)
        for site in self.sites[1:]:
            out = np.tensordot(out, site, axes=([-1], [0]))
        return np.ascontiguousarray(out[..., 0])

    @classmethod
    def from_product(cls, vectors: Sequence[np.ndarray]) -> "MatrixProductState":
        """Bond-1 MPS representing an outer product of vectors."""
        sites = [np.asarray(v, dtype=complex).reshape(1, -1, 1) for v in vectors]
        return cls(sites)


@dataclass
class MatrixProductOperator:
    """Matrix product operator: a chain of rank-4 site tensors."""

    sites: List[np.ndarray]

    def __post_init__(self):
        if not self.sites:
            raise ContractShapeError("MPO must contain at least one site")
        for i, (a, b) in enumerate(zip(self.sites, self.sites[1:])):
            if a.shape[3] != b.shape[0]:
                raise ContractShapeError(
                    f"bond mismatch between MPO sites {i} and {i + 1}: "
                    f"{a.shape[3]} != {b.shape[0]}")

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def out_dims(self) -> List[int]:
        return [s.shape[1] for s in self.sites]

    @property
    def in_dims(self) -> List[int]:
        return [s.shape[2] for s in self.sites]

    @property
    def bond_dims(self) -> List[int]:
        return [s.shape[3] for s in self.sites[:-1]]

    def to_dense(self) -> np.ndarray:
        """Contract into a dense tensor with legs (out_1..out_n, in_1..in_n)."""
        n = self.n_sites
        out = self.sites[0][0]  # (o, i, chi)
        for site in self.sites[1:]:
            out = np.tensordot(out, site, axes=([-1], [0]))
        out = out[..., 0]
        # legs currently alternate (o1, i1, o2, i2, ...); regroup
        perm = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
        return np.ascontiguousarray(out.transpose(perm))

    @classmethod
    def identity(cls, dims: Sequence[int]) -> "MatrixProductOperator":
        sites = [np.eye(d, dtype=complex).reshape(1, d, d, 1) for d in dims]
        return cls(sites)


def mps_from_tensor(tensor: np.ndarray,
                    policy: TruncationPolicy) -> MatrixProductState:
    """Factorise a dense tensor into an MPS by a sequential SVD sweep.

    The contraction of the result reproduces the input within the
    accumulated discarded weight (exact for ``relative_cutoff=0``).
    """
    tensor = np.asarray(tensor, dtype=complex)
    if tensor.ndim < 1:
        raise ValueError("tensor must have rank >= 1")
    dims = tensor.shape
    if tensor.ndim == 1:
        return MatrixProductState([tensor.reshape(1, -1, 1)])
    sites = []
    discarded_sq = 0.0
    carry = tensor.reshape(1, -1)  # (chi * remaining)
    chi = 1
    for k, d in enumerate(dims[:-1]):
        mat = carry.reshape(chi * d, -1)
        res = svd_truncate(mat, policy)
        discarded_sq += res.discarded_weight ** 2
        sites.append(res.U.reshape(chi, d, res.rank))
        carry = (res.singular_values[:, None] * res.Vdag)
        chi = res.rank
    sites.append(carry.reshape(chi, dims[-1], 1))
    return MatrixProductState(sites, discarded_weight=float(np.sqrt(discarded_sq)))


def _right_canonicalize(sites: List[np.ndarray]) -> List[np.ndarray]:
    """Sweep right to left with LQ decompositions (no truncation)."""
    sites = list(sites)
    for i in range(len(sites) - 1, 0, -1):
        chi_l, d, chi_r = sites[i].shape
        mat = sites[i].reshape(chi_l, d * chi_r)
        # LQ via QR of the conjugate transpose
        q, r = np.linalg.qr(mat.conj().T)
        k = q.shape[1]
        sites[i] = q.conj().T.reshape(k, d, chi_r)
        sites[i - 1] = np.tensordot(sites[i - 1], r.conj().T, axes=([2], [0]))
    return sites


def _sweep_left(sites: List[np.ndarray], policy: TruncationPolicy) -> float:
    """Right-to-left truncated SVD sweep (in place); returns sum of squares
    of the discarded weights.  Leaves the chain right-canonical."""
    discarded_sq = 0.0
    for i in range(len(sites) - 1, 0, -1):
        chi_l, d, chi_r = sites[i].shape
        res = svd_truncate(sites[i].reshape(chi_l, d * chi_r), policy)
        discarded_sq += res.discarded_weight ** 2
        sites[i] = res.Vdag.reshape(res.rank, d, chi_r)
        carry = res.U * res.singular_values
        sites[i - 1] = np.tensordot(sites[i - 1], carry, axes=([2], [0]))
    return discarded_sq


def _sweep_right(sites: List[np.ndarray], policy: TruncationPolicy) -> float:
    """Left-to-right truncated SVD sweep (in place); returns sum of squares
    of the discarded weights.  Leaves the chain left-canonical."""
    discarded_sq = 0.0
    for i in range(len(sites) - 1):
        chi_l, d, chi_r = sites[i].shape
        res = svd_truncate(sites[i].reshape(chi_l * d, chi_r), policy)
        discarded_sq += res.discarded_weight ** 2
        sites[i] = res.U.reshape(chi_l, d, res.rank)
        carry = res.singular_values[:, None] * res.Vdag
        sites[i + 1] = np.tensordot(carry, sites[i + 1], axes=([1], [0]))
    return discarded_sq


def mps_compress(mps: MatrixProductState,
                 policy: TruncationPolicy) -> MatrixProductState:
    """Compress an MPS with two directional truncation sweeps.

    The state is first brought to right-canonical form, then swept left to
    right and right to left with truncated SVDs, so every local truncation
    discards true Schmidt coefficients.  Bond dimensions never grow.
    """
    if mps.n_sites == 1:
        return mps.copy()
    sites = _right_canonicalize(mps.sites)
    discarded_sq = _sweep_right(sites, policy)
    discarded_sq += _sweep_left(sites, policy)
    return MatrixProductState(
        sites,
        discarded_weight=mps.discarded_weight + float(np.sqrt(discarded_sq)))


def mps_apply_mpo(mps: MatrixProductState,
                  mpo: MatrixProductOperator,
                  policy: TruncationPolicy) -> MatrixProductState:
    """Apply an MPO to an MPS and compress the result.

    Contraction proceeds site by site (zip-up) with immediate truncation,
    which bounds intermediate bonds by ``bond * d^2``, followed by the
    two-direction compression sweep of :func:`mps_compress`.
    """
    if mpo.n_sites != mps.n_sites:
        raise ContractShapeError(
            f"MPO has {mpo.n_sites} sites but MPS has {mps.n_sites}")
    for i, (d_in, d_mps) in enumerate(zip(mpo.in_dims, mps.physical_dims)):
        if d_in != d_mps:
            raise ContractShapeError(
                f"input leg mismatch at site {i}: MPO expects {d_in}, "
                f"MPS has {d_mps}")
    n = mps.n_sites
    sites: List[np.ndarray] = []
    discarded_sq = 0.0
    carry = np.ones((1, 1, 1), dtype=complex)  # (new bond, mps bond, mpo bond)
    for i in range(n):
        a = mps.sites[i]      # (chi_a, d, chi_b)
        w = mpo.sites[i]      # (nu, p, d, mu)
        t = np.tensordot(carry, a, axes=([1], [0]))      # (x, nu, d, chi_b)
        t = np.tensordot(t, w, axes=([1, 2], [0, 2]))    # (x, chi_b, p, mu)
        t = t.transpose(0, 2, 1, 3)                      # (x, p, chi_b, mu)
        x, p, chi_b, mu = t.shape
        if i == n - 1:
            sites.append(t.reshape(x, p, chi_b * mu))
        else:
            res = svd_truncate(t.reshape(x * p, chi_b * mu), policy)
            discarded_sq += res.discarded_weight ** 2
            sites.append(res.U.reshape(x, p, res.rank))
            carry = (res.singular_values[:, None] * res.Vdag).reshape(
                res.rank, chi_b, mu)
    # the zip leaves sites 0..n-2 left-canonical, so the right-to-left
    # sweep truncates true Schmidt coefficients straight away; the return
    # sweep completes the two-direction compression
    discarded_sq += _sweep_left(sites, policy)
    discarded_sq += _sweep_right(sites, policy)
    return MatrixProductState(
        sites,
        discarded_weight=mps.discarded_weight + float(np.sqrt(discarded_sq)))


def mps_contract_weighted(
        mps: MatrixProductState,
        weights: Sequence[Union[np.ndarray, str]],
) -> Union[complex, np.ndarray]:
    """Contract every physical leg with a weight vector.

    Each entry of ``weights`` is either a vector of the site's physical
    dimension or the string ``"open"`` (at most once).  With all legs
    weighted the result is a scalar; with one open leg it is the vector
    over that leg, e.g. the reduced density vector when the open leg is
    the newest one and every other weight is all ones.
    """
    if len(weights) != mps.n_sites:
        raise ContractShapeError(
            f"got {len(weights)} weights for {mps.n_sites} sites")
    open_sites = [i for i, w in enumerate(weights) if isinstance(w, str)]
    if len(open_sites) > 1:
        raise ContractShapeError("at most one leg may be left open")

    def site_matrix(i):
        w = np.asarray(weights[i], dtype=complex)
        if w.shape != (mps.sites[i].shape[1],):
            raise ContractShapeError(
                f"weight length {w.shape} does not match physical dimension "
                f"{mps.sites[i].shape[1]} at site {i}")
        return np.tensordot(w, mps.sites[i], axes=([0], [1]))  # (chi_l, chi_r)

    if not open_sites:
        vec = np.ones(1, dtype=complex)
        for i in range(mps.n_sites):
            vec = vec @ site_matrix(i)
        return complex(vec[0])

    k = open_sites[0]
    left = np.ones(1, dtype=complex)
    for i in range(k):
        left = left @ site_matrix(i)
    right = np.ones(1, dtype=complex)
    for i in range(mps.n_sites - 1, k, -1):
        right = site_matrix(i) @ right
    # (chi_l, d, chi_r) against left and right boundary vectors
    return np.einsum("l,ldr,r->d", left, mps.sites[k], right)
