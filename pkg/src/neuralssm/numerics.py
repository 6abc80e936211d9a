"""Dense linear-algebra kernels, eigenvalue analysis, and seeded randomness.

All numeric data is carried as 2-D float64 ``numpy.ndarray`` matrices
(row-major, shape metadata on the array itself).  Column/row vectors are
matrices with one of the dimensions equal to one.
"""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceError, DataError, NumericError, ShapeError

MAX_EIG_DIM = 64


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array; 1-D input becomes a column vector."""
    m = np.asarray(values, dtype=np.float64)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    elif m.ndim == 1:
        m = m.reshape(-1, 1)
    elif m.ndim != 2:
        raise ShapeError(f"{name} must be at most 2-D, got ndim={m.ndim}")
    return m


def require_finite(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    if not np.all(np.isfinite(m)):
        raise NumericError(f"{name} contains non-finite entries")
    return m


def require_square(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {m.shape}")
    return m


def eigenvalues(m) -> list[complex]:
    """Eigenvalues of a real square matrix, with multiplicity.

    Sorted by descending magnitude, ties broken by descending real part and
    then descending imaginary part so reports are deterministic.  Complex
    eigenvalues of real input come out as conjugate pairs.
    """
    a = as_matrix(m)
    require_square(a, "eigenvalue input")
    n = a.shape[0]
    if n > MAX_EIG_DIM:
        raise ShapeError(f"eigenvalue input limited to {MAX_EIG_DIM}x{MAX_EIG_DIM}, got {n}")
    require_finite(a, "eigenvalue input")
    try:
        vals = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails at n<=64
        raise ConvergenceError(f"eigenvalue iteration did not converge: {exc}") from exc
    order = np.lexsort((-vals.imag, -vals.real, -np.abs(vals)))
    return [complex(v) for v in vals[order]]


def spectral_radius(m) -> float:
    """Maximum eigenvalue magnitude."""
    vals = eigenvalues(m)
    return max(abs(v) for v in vals) if vals else 0.0


def char_poly_residual(a: np.ndarray, lam: complex) -> float:
    """|det(a - lam*I)| evaluated by direct cofactor expansion (n <= 4).

    Deliberately independent of the eigensolver so it can act as an oracle.
    """
    a = as_matrix(a)
    require_square(a)
    n = a.shape[0]
    if n > 4:
        raise ShapeError("direct determinant oracle limited to n <= 4")
    b = a.astype(np.complex128) - lam * np.eye(n)
    return abs(_det_direct(b))


def _det_direct(b: np.ndarray) -> complex:
    n = b.shape[0]
    if n == 1:
        return b[0, 0]
    if n == 2:
        return b[0, 0] * b[1, 1] - b[0, 1] * b[1, 0]
    # Laplace expansion along the first row.
    total = 0.0 + 0.0j
    for j in range(n):
        minor = np.delete(np.delete(b, 0, axis=0), j, axis=1)
        total += ((-1) ** j) * b[0, j] * _det_direct(minor)
    return total


class SeededRng:
    """Deterministic counter-based random generator with explicit splitting.

    Built on the Philox bit generator keyed through ``numpy.random.SeedSequence``
    so the same (seed, split path) yields the same stream on every platform.
    ``split`` derives an independent child stream, e.g. one per sweep restart,
    that is reproducible in isolation.
    """

    def __init__(self, seed: int, _path: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.path = tuple(int(p) for p in _path)
        seq = np.random.SeedSequence(self.seed, spawn_key=self.path)
        self._gen = np.random.Generator(np.random.Philox(seq))

    def split(self, *indices: int) -> "SeededRng":
        """Child generator for the given index path; independent of this one."""
        return SeededRng(self.seed, self.path + tuple(indices))

    def uniform(self, lo: float, hi: float, shape) -> np.ndarray:
        return rng_uniform(self, lo, hi, shape)

    def normal(self, scale: float, shape) -> np.ndarray:
        out = self._gen.normal(0.0, scale, size=shape)
        return np.atleast_2d(np.asarray(out, dtype=np.float64))

    def integers(self, lo: int, hi: int) -> int:
        return int(self._gen.integers(lo, hi))

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, path={self.path})"


def rng_uniform(rng: SeededRng, lo: float, hi: float, shape) -> np.ndarray:
    """Matrix of i.i.d. uniform draws on [lo, hi); advances the stream."""
    if not lo < hi:
        raise ValueError(f"uniform bounds must satisfy lo < hi, got [{lo}, {hi})")
    if isinstance(shape, int):
        shape = (shape, 1)
    out = rng._gen.uniform(lo, hi, size=shape)
    return np.atleast_2d(np.asarray(out, dtype=np.float64))


def format_float(x: float) -> str:
    """Shortest decimal string that round-trips the float exactly."""
    return repr(float(x))


def write_matrix_csv(path, m) -> None:
    """Matrix exchange format: one CSV row per matrix row, '.' decimal, no header."""
    a = as_matrix(m)
    with open(path, "w", encoding="ascii") as fh:
        for row in a:
            fh.write(",".join(format_float(v) for v in row) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    rows: list[list[float]] = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(tok) for tok in line.split(",")])
            except ValueError as exc:
                raise DataError(f"{path}: line {lineno}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: empty matrix file")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise DataError(f"{path}: ragged rows")
    return np.array(rows, dtype=np.float64)
