"""Dense symmetric matrix primitives behind the Bures-Wasserstein formulas."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import (
    DimensionMismatchError,
    EigenDecompositionError,
    InputError,
    NotPositiveSemidefiniteError,
)

FloatArray = NDArray[np.float64]

# Eigenvalues in (-PSD_CLAMP * ||A||_F, 0) are rounding noise and clamp to zero.
PSD_CLAMP = 1e-9
# Strict PD requires every eigenvalue >= STRICT_FLOOR * max(1, largest).
STRICT_FLOOR = 1e-12
# Components below this magnitude are ignored when fixing eigenvector signs.
_SIGN_TOL = 1e-12


def _as_square(entries: ArrayLike) -> FloatArray:
    arr = np.array(entries, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise InputError(f"expected a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("matrix entries must be finite")
    return arr


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """A dense symmetric matrix. The constructor stores (A + Aᵀ) / 2."""

    entries: FloatArray
    name: str = ""

    def __post_init__(self) -> None:
        arr = _as_square(self.entries)
        sym = (arr + arr.T) / 2.0
        sym.setflags(write=False)
        object.__setattr__(self, "entries", sym)

    @classmethod
    def identity(cls, dim: int) -> SymMatrix:
        return cls(np.eye(dim))

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    def norm(self) -> float:
        """Frobenius norm."""
        return float(np.linalg.norm(self.entries, "fro"))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SymMatrix):
            return NotImplemented
        return bool(np.array_equal(self.entries, other.entries))

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"SymMatrix{label}({self.entries.tolist()})"


@dataclass(frozen=True, eq=False)
class SpdMatrix:
    """A symmetric positive semidefinite matrix with its cached spectrum bounds.

    With ``strict=True`` the smallest eigenvalue must also clear
    ``STRICT_FLOOR * max(1, largest)``.
    """

    base: SymMatrix
    strict: bool = False
    spectral_floor: float = field(init=False)
    spectral_ceiling: float = field(init=False)

    def __post_init__(self) -> None:
        values, _ = sym_eigen(self.base)
        largest = float(values[0])
        smallest = float(values[-1])
        if smallest < -PSD_CLAMP * self.base.norm():
            raise NotPositiveSemidefiniteError(
                f"{self._label()} is not PSD: smallest eigenvalue {smallest:.6g}"
            )
        if self.strict and smallest < STRICT_FLOOR * max(1.0, largest):
            raise NotPositiveSemidefiniteError(
                f"{self._label()} is not strictly positive definite: "
                f"smallest eigenvalue {smallest:.6g}"
            )
        object.__setattr__(self, "spectral_floor", smallest)
        object.__setattr__(self, "spectral_ceiling", largest)

    @classmethod
    def from_array(
        cls, entries: ArrayLike, *, strict: bool = False, name: str = ""
    ) -> SpdMatrix:
        return cls(SymMatrix(np.asarray(entries, dtype=np.float64), name=name), strict)

    @classmethod
    def identity(cls, dim: int) -> SpdMatrix:
        return cls(SymMatrix.identity(dim))

    @property
    def entries(self) -> FloatArray:
        return self.base.entries

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def is_singular(self) -> bool:
        """True when the matrix fails the strict PD floor."""
        return self.spectral_floor < STRICT_FLOOR * max(1.0, self.spectral_ceiling)

    def norm(self) -> float:
        return self.base.norm()

    def trace(self) -> float:
        return float(np.trace(self.entries))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpdMatrix):
            return NotImplemented
        return self.base == other.base

    def _label(self) -> str:
        return self.base.name or f"{self.dim}x{self.dim} matrix"


def sym_eigen(matrix: SymMatrix) -> tuple[FloatArray, FloatArray]:
    """Eigenvalues in descending order and the matching orthonormal eigenvectors.

    Ties keep LAPACK's order, and each eigenvector is signed so that its first
    non-negligible component is positive.
    """
    try:
        values, vectors = np.linalg.eigh(matrix.entries)
    except np.linalg.LinAlgError as exc:
        label = matrix.name or f"{matrix.dim}x{matrix.dim} matrix"
        raise EigenDecompositionError(
            f"eigendecomposition of {label} did not converge"
        ) from exc
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    leading = np.argmax(np.abs(vectors) > _SIGN_TOL, axis=0)
    signs = np.sign(vectors[leading, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return values, vectors * signs


def spd_sqrt(matrix: SpdMatrix | SymMatrix) -> SpdMatrix:
    """Principal square root of a PSD matrix.

    Eigenvalues within ``PSD_CLAMP * ||A||_F`` below zero are clamped; anything
    more negative raises ``NotPositiveSemidefiniteError``.
    """
    base = matrix.base if isinstance(matrix, SpdMatrix) else matrix
    values, vectors = sym_eigen(base)
    if values[-1] < -PSD_CLAMP * base.norm():
        raise NotPositiveSemidefiniteError(
            f"{base.name or 'matrix'} is not PSD: smallest eigenvalue {values[-1]:.6g}"
        )
    root = (vectors * np.sqrt(np.clip(values, 0.0, None))) @ vectors.T
    return SpdMatrix.from_array(root)


def frobenius_distance(
    a: SymMatrix | SpdMatrix, b: SymMatrix | SpdMatrix
) -> float:
    if a.dim != b.dim:
        raise DimensionMismatchError(
            f"cannot compare {a.dim}x{a.dim} and {b.dim}x{b.dim} matrices"
        )
    return float(np.linalg.norm(a.entries - b.entries, "fro"))


# Stacked helpers for the hot paths. They take raw arrays of shape (..., d, d)
# and skip the dataclass wrappers.


def _stacked_eigh(mats: FloatArray) -> tuple[FloatArray, FloatArray]:
    sym = (mats + np.swapaxes(mats, -1, -2)) / 2.0
    try:
        values, vectors = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise EigenDecompositionError(
            f"eigendecomposition of a {sym.shape} stack did not converge"
        ) from exc
    norms = np.linalg.norm(sym, axis=(-2, -1))
    if np.any(values[..., 0] < -PSD_CLAMP * norms):
        raise NotPositiveSemidefiniteError("matrix stack contains a non-PSD matrix")
    return np.clip(values, 0.0, None), vectors


def sqrtm_psd(mats: FloatArray) -> FloatArray:
    """Principal square roots of a stack of PSD matrices."""
    values, vectors = _stacked_eigh(mats)
    return (vectors * np.sqrt(values)[..., None, :]) @ np.swapaxes(vectors, -1, -2)


def sqrtm_and_inverse(mat: FloatArray) -> tuple[FloatArray, FloatArray]:
    """Square root and inverse square root of one strictly PD matrix."""
    values, vectors = _stacked_eigh(mat)
    if values[0] <= 0.0:
        raise NotPositiveSemidefiniteError("matrix is singular, no inverse root")
    roots = np.sqrt(values)
    return (vectors * roots) @ vectors.T, (vectors / roots) @ vectors.T


def trace_sqrtm_psd(mats: FloatArray) -> FloatArray:
    """trace(M^{1/2}) for each PSD matrix in a stack."""
    sym = (mats + np.swapaxes(mats, -1, -2)) / 2.0
    try:
        values = np.linalg.eigvalsh(sym)
    except np.linalg.LinAlgError as exc:
        raise EigenDecompositionError(
            "eigenvalue computation did not converge"
        ) from exc
    return np.sqrt(np.clip(values, 0.0, None)).sum(axis=-1)
