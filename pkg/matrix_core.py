"""Complex Hermitian linear algebra with certified positive-definiteness.

Every positive-definite matrix is certified once, at construction, by a
Cholesky factorization whose pivots must exceed ``PIVOT_TOLERANCE`` times the
largest diagonal entry. The factor is kept with the matrix so that quadratic
forms, traces of inverses and log-determinants reuse it instead of forming
explicit inverses.

Matrices are immutable: their arrays are read-only and every operation returns
fresh objects, so instances can be shared freely between threads.
"""
import os
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import LinAlgError, cholesky, solve_triangular

from error_handler import ConfigurationError, NotPositiveDefinite, NumericalBreakdown, ZeroVector

ComplexVector = NDArray[np.complex128]

PIVOT_TOLERANCE = 1e-13
TINY_NORM = 1e-300
IMAG_RESIDUE_TOLERANCE = 1e-10

HPD1_MAGIC = 'HPD1'


def as_vector(x: ArrayLike, where: str = 'vector') -> ComplexVector:
    """
    Copy ``x`` into a read-only finite complex 1-D array.

    Args:
        x: Array-like of numbers
        where (str): Name used in error messages

    Returns:
        ComplexVector: Validated copy
    """
    v = np.array(x, dtype=np.complex128, copy=True)
    if v.ndim != 1 or v.size == 0:
        raise ConfigurationError(f"{where} must be a non-empty 1-D array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise NumericalBreakdown(f"non-finite entries in {where}")
    v.setflags(write=False)
    return v


def real_part(value: complex, scale: float, what: str = 'quadratic form') -> float:
    """Drop the imaginary residue of a value that must be real."""
    value = complex(value)
    if abs(value.imag) > IMAG_RESIDUE_TOLERANCE * max(abs(value.real), scale, TINY_NORM):
        raise NumericalBreakdown(f"{what} has imaginary residue {value.imag:.3e}")
    return value.real


class HermitianMatrix:
    """
    Immutable m×m complex Hermitian matrix.

    Only the lower triangle and the real part of the diagonal of the input are
    read; the upper triangle is rebuilt as the conjugate transpose, so the
    result is Hermitian bit-for-bit.
    """

    __slots__ = ('_entries',)

    def __init__(self, entries: ArrayLike):
        a = np.array(entries, dtype=np.complex128, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ConfigurationError(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NumericalBreakdown("non-finite matrix entries")
        strict_lower = np.tril(a, -1)
        h = strict_lower + strict_lower.conj().T
        h[np.diag_indices(a.shape[0])] = a.diagonal().real
        h.setflags(write=False)
        self._entries = h

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    @property
    def entries(self) -> NDArray[np.complex128]:
        return self._entries

    def scaled(self, c: float) -> 'HermitianMatrix':
        return HermitianMatrix(self._entries * c)

    def to_pds(self) -> 'HermitianPDS':
        """Certify positive-definiteness (raises NotPositiveDefinite)."""
        return HermitianPDS(self._entries)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim})"


class HermitianPDS(HermitianMatrix):
    """Hermitian positive-definite matrix together with its Cholesky factor."""

    __slots__ = ('_factor',)

    def __init__(self, entries: ArrayLike):
        super().__init__(entries)
        self._factor = _certified_factor(self._entries)

    @classmethod
    def identity(cls, m: int) -> 'HermitianPDS':
        return cls(np.eye(m, dtype=np.complex128))

    @classmethod
    def _from_parts(cls, entries: NDArray, factor: NDArray) -> 'HermitianPDS':
        obj = cls.__new__(cls)
        entries.setflags(write=False)
        factor.setflags(write=False)
        obj._entries = entries
        obj._factor = factor
        return obj

    @property
    def factor(self) -> NDArray[np.complex128]:
        return self._factor

    def scaled(self, c: float) -> 'HermitianPDS':
        """c·A for c > 0, rescaling the stored factor instead of refactorizing."""
        if not c > 0 or not np.isfinite(c):
            raise NotPositiveDefinite(f"scale factor {c} is not a positive finite number")
        return HermitianPDS._from_parts(self._entries * c, self._factor * np.sqrt(c))


def _certified_factor(a: NDArray[np.complex128]) -> NDArray[np.complex128]:
    try:
        factor = cholesky(a, lower=True, check_finite=False)
    except LinAlgError as e:
        raise NotPositiveDefinite(str(e), context={'dim': a.shape[0]})
    pivots = factor.diagonal().real
    threshold = PIVOT_TOLERANCE * float(a.diagonal().real.max())
    if not np.all(np.isfinite(factor)) or np.any(pivots * pivots <= threshold):
        raise NotPositiveDefinite(
            f"smallest pivot {float(pivots.min()) ** 2:.3e} below tolerance {threshold:.3e}",
            context={'dim': a.shape[0]}
        )
    factor.setflags(write=False)
    return factor


def factorize(A: HermitianPDS) -> NDArray[np.complex128]:
    """
    Lower-triangular L with L·Lᴴ = A.

    Args:
        A (HermitianPDS): Certified matrix

    Returns:
        ndarray: Read-only lower-triangular factor
    """
    return A.factor


def solve_lower(A: HermitianPDS, b: ArrayLike) -> NDArray[np.complex128]:
    """L⁻¹·b for the Cholesky factor of A (b may be a vector or a column stack)."""
    return solve_triangular(A.factor, b, lower=True, check_finite=False)


def quad_form(x: ArrayLike, A: HermitianPDS) -> float:
    """
    xᴴ A⁻¹ x computed through the Cholesky factor.

    Args:
        x: Nonzero vector of dimension A.dim
        A (HermitianPDS): Certified matrix

    Returns:
        float: Strictly positive value

    Raises:
        ZeroVector: If ‖x‖ = 0
    """
    v = as_vector(x, 'quad_form argument')
    if np.linalg.norm(v) == 0.0:
        raise ZeroVector('quad_form')
    w = solve_lower(A, v)
    return real_part(np.vdot(w, w), 0.0)


def quad_forms(X: NDArray, A: HermitianPDS) -> NDArray[np.float64]:
    """Batched xₙᴴ A⁻¹ xₙ for the rows of X (shape N×m)."""
    W = solve_lower(A, np.asarray(X).T)
    return np.einsum('ij,ij->j', W.conj(), W).real


def inv_trace(A: HermitianPDS) -> float:
    """Tr(A⁻¹) = ‖L⁻¹‖²_F."""
    L_inv = solve_lower(A, np.eye(A.dim, dtype=np.complex128))
    return float(np.sum(np.abs(L_inv) ** 2))


def log_det(A: HermitianPDS) -> float:
    """log det A as twice the sum of log pivots."""
    return float(2.0 * np.sum(np.log(A.factor.diagonal().real)))


def frob_norm(A: Union[HermitianMatrix, ArrayLike]) -> float:
    entries = A.entries if isinstance(A, HermitianMatrix) else np.asarray(A)
    return float(np.linalg.norm(entries, 'fro'))


def relative_difference(A: Union[HermitianMatrix, ArrayLike],
                        B: Union[HermitianMatrix, ArrayLike]) -> float:
    """‖A − B‖_F / ‖B‖_F."""
    a = A.entries if isinstance(A, HermitianMatrix) else np.asarray(A)
    b = B.entries if isinstance(B, HermitianMatrix) else np.asarray(B)
    return float(np.linalg.norm(a - b, 'fro') / np.linalg.norm(b, 'fro'))


def inverse(A: HermitianPDS) -> HermitianPDS:
    """A⁻¹ = L⁻ᴴ L⁻¹ as a fresh certified matrix."""
    L_inv = solve_lower(A, np.eye(A.dim, dtype=np.complex128))
    return HermitianPDS(L_inv.conj().T @ L_inv)


def trace_product(A: Union[HermitianMatrix, ArrayLike], B: Union[HermitianMatrix, ArrayLike]) -> float:
    """Re Tr(A·B) for Hermitian A and B, without forming the product."""
    a = A.entries if isinstance(A, HermitianMatrix) else np.asarray(A)
    b = B.entries if isinstance(B, HermitianMatrix) else np.asarray(B)
    value = np.sum(a * b.T)
    return real_part(value, float(np.linalg.norm(a) * np.linalg.norm(b)), 'trace product')


def write_hpd1(A: HermitianMatrix, path: str) -> None:
    """
    Dump a matrix in HPD1 format: header ``HPD1 <m>`` then m·m lines ``re im``
    in row-major order, using locale-independent round-trip decimals.
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    lines = [f"{HPD1_MAGIC} {A.dim}"]
    for z in A.entries.ravel():
        lines.append(f"{float(z.real)!r} {float(z.imag)!r}")
    with open(path, 'w', encoding='ascii', newline='\n') as f:
        f.write('\n'.join(lines) + '\n')


def read_hpd1(path: str) -> HermitianPDS:
    """Load an HPD1 file and certify it as positive definite."""
    with open(path, 'r', encoding='ascii') as f:
        header = f.readline().split()
        if len(header) != 2 or header[0] != HPD1_MAGIC:
            raise ConfigurationError(f"{path}: missing '{HPD1_MAGIC} <m>' header")
        m = int(header[1])
        values = np.loadtxt(f, dtype=np.float64, ndmin=2)
    if values.shape != (m * m, 2):
        raise ConfigurationError(f"{path}: expected {m * m} 're im' lines, got {values.shape[0]}")
    entries = (values[:, 0] + 1j * values[:, 1]).reshape(m, m)
    return HermitianPDS(entries)
