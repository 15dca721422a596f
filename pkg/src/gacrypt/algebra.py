"""Prime-field arithmetic and dense linear algebra over F_q.

Residues are stored reduced to [0, q).  Matrices wrap numpy int64 arrays for
moduli up to 2**61 (the machine-word backend) and object arrays of Python
ints beyond that; both go through the same interface.  The canonical byte
encoding defined here is shared by every other module: integers are written
big-endian padded to ``ceil(log256(q))`` bytes, matrices carry a
(rows, cols) u32 little-endian header, and a field header is the modulus as
a u32-length-prefixed big-endian integer.
"""

from __future__ import annotations

import random
import struct

import numpy as np

from . import backend
from .errors import DimensionMismatch, FieldMismatch, Malformed, RngFailure, Singular

_MR_ROUNDS = 64
_SAMPLE_RETRY_CAP = 10_000


def is_probable_prime(n: int, rounds: int = _MR_ROUNDS) -> bool:
    """Miller-Rabin with ``rounds`` random bases (error < 4**-rounds)."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for _ in range(rounds):
        a = random.randrange(2, n - 1)
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = (x * x) % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _u32(x: int) -> bytes:
    return struct.pack("<I", x)


def read_u32(buf: bytes, off: int) -> tuple[int, int]:
    if off + 4 > len(buf):
        raise Malformed("truncated u32")
    return struct.unpack_from("<I", buf, off)[0], off + 4


class PrimeField:
    """The field F_q for a prime modulus q >= 2."""

    __slots__ = ("q", "width")

    def __init__(self, q: int, check_prime: bool = True):
        q = int(q)
        if q < 2:
            raise ValueError("modulus must be >= 2")
        if check_prime and not is_probable_prime(q):
            raise ValueError(f"{q} is not prime")
        self.q = q
        # bytes needed to hold any residue in [0, q)
        self.width = max(1, ((q - 1).bit_length() + 7) // 8)

    @property
    def dtype(self):
        return np.int64 if self.q < (1 << 62) else object

    def element(self, value: int) -> "FieldElement":
        return FieldElement(value, self)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and self.q == other.q

    def __hash__(self):
        return hash(("PrimeField", self.q))

    def __repr__(self):
        return f"PrimeField({self.q})"

    # -- canonical encoding -------------------------------------------------

    def encode_header(self) -> bytes:
        qb = self.q.to_bytes((self.q.bit_length() + 7) // 8, "big")
        return _u32(len(qb)) + qb

    @staticmethod
    def decode_header(buf: bytes, off: int, check_prime: bool = False):
        n, off = read_u32(buf, off)
        if n == 0 or off + n > len(buf):
            raise Malformed("truncated field header")
        q = int.from_bytes(buf[off : off + n], "big")
        if q < 2:
            raise Malformed("modulus below 2")
        return PrimeField(q, check_prime=check_prime), off + n

    def entries_byte_matrix(self, arr2d: np.ndarray) -> np.ndarray:
        """(B, N) residues -> (B, N*width) uint8, each entry big-endian padded."""
        w = self.width
        b, n = arr2d.shape
        shifts = (8 * np.arange(w - 1, -1, -1, dtype=np.int64)).reshape(1, 1, w)
        by = ((arr2d.astype(np.int64)[:, :, None] >> shifts) & 0xFF).astype(np.uint8)
        return by.reshape(b, n * w)

    def entries_from_byte_matrix(self, mat: np.ndarray, count: int) -> np.ndarray:
        """(B, count*width) uint8 -> (B, count) int64; rejects values >= q."""
        w = self.width
        b = mat.shape[0]
        if mat.shape[1] != count * w:
            raise Malformed("byte block has wrong width")
        by = mat.reshape(b, count, w).astype(np.uint64)
        shifts = (8 * np.arange(w - 1, -1, -1, dtype=np.uint64)).reshape(1, 1, w)
        vals = (by << shifts).sum(axis=2, dtype=np.uint64)
        if np.any(vals >= np.uint64(self.q)):
            raise Malformed("entry not reduced mod q")
        return vals.astype(np.int64)

    def encode_entries(self, arr: np.ndarray) -> bytes:
        """Flattened residues, each big-endian padded to ``self.width`` bytes."""
        flat = np.asarray(arr).reshape(-1)
        if self.dtype is object:
            return b"".join(int(v).to_bytes(self.width, "big") for v in flat)
        return self.entries_byte_matrix(flat.reshape(1, -1)).tobytes()

    def decode_entries(self, buf: bytes, off: int, count: int):
        w = self.width
        end = off + count * w
        if end > len(buf):
            raise Malformed("truncated entries")
        if self.dtype is object:
            vals = [
                int.from_bytes(buf[off + i * w : off + (i + 1) * w], "big")
                for i in range(count)
            ]
            if any(v >= self.q for v in vals):
                raise Malformed("entry not reduced mod q")
            return np.array(vals, dtype=object), end
        by = np.frombuffer(buf, dtype=np.uint8, count=count * w, offset=off)
        vals = self.entries_from_byte_matrix(by.reshape(1, count * w), count)
        return vals.reshape(count), end


class FieldElement:
    """A residue in [0, q) with closed field arithmetic."""

    __slots__ = ("value", "field")

    def __init__(self, value: int, field: PrimeField):
        self.field = field
        self.value = int(value) % field.q

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldMismatch("elements of different fields")
            return other.value
        return int(other) % self.field.q

    def __add__(self, other):
        return FieldElement(self.value + self._coerce(other), self.field)

    def __sub__(self, other):
        return FieldElement(self.value - self._coerce(other), self.field)

    def __mul__(self, other):
        return FieldElement(self.value * self._coerce(other), self.field)

    def __neg__(self):
        return FieldElement(-self.value, self.field)

    def inverse(self) -> "FieldElement":
        if self.value == 0:
            raise ZeroDivisionError("inverse of zero")
        return FieldElement(pow(self.value, -1, self.field.q), self.field)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o == 0:
            raise ZeroDivisionError("division by zero")
        return FieldElement(self.value * pow(o, -1, self.field.q), self.field)

    def __pow__(self, e: int):
        return FieldElement(pow(self.value, e, self.field.q), self.field)

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field == other.field and self.value == other.value
        return NotImplemented

    def __hash__(self):
        return hash((self.field.q, self.value))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} (mod {self.field.q})"


class Matrix:
    """Dense matrix over a prime field, entries reduced mod q."""

    __slots__ = ("field", "a")

    def __init__(self, field: PrimeField, a):
        arr = np.array(a, dtype=field.dtype, copy=True)
        if arr.ndim != 2:
            raise DimensionMismatch("matrix must be 2-dimensional")
        self.field = field
        self.a = arr % field.q

    @classmethod
    def from_array(cls, field: PrimeField, arr: np.ndarray) -> "Matrix":
        """Wrap an already reduced array without copying."""
        m = object.__new__(cls)
        m.field = field
        m.a = arr
        return m

    @classmethod
    def identity(cls, field: PrimeField, n: int) -> "Matrix":
        return cls.from_array(field, np.eye(n, dtype=field.dtype))

    @classmethod
    def zeros(cls, field: PrimeField, rows: int, cols: int) -> "Matrix":
        return cls.from_array(field, np.zeros((rows, cols), dtype=field.dtype))

    @property
    def rows(self) -> int:
        return self.a.shape[0]

    @property
    def cols(self) -> int:
        return self.a.shape[1]

    def __getitem__(self, ij) -> FieldElement:
        return FieldElement(int(self.a[ij]), self.field)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.field == other.field and np.array_equal(self.a, other.a)

    def __hash__(self):
        return hash((self.field.q, self.a.shape, self.a.tobytes() if self.a.dtype != object else tuple(self.a.reshape(-1))))

    def __repr__(self):
        return f"Matrix({self.rows}x{self.cols} over F_{self.field.q})"

    def transpose(self) -> "Matrix":
        return Matrix.from_array(self.field, np.ascontiguousarray(self.a.T))

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return mat_mul(self, other)

    def rank(self) -> int:
        return rank(self)

    def rref(self) -> "Matrix":
        r, _ = backend.rref(self.a, self.field.q)
        return Matrix.from_array(self.field, r)

    def encode(self) -> bytes:
        return (
            _u32(self.rows)
            + _u32(self.cols)
            + self.field.encode_entries(self.a)
        )

    @classmethod
    def decode(cls, field: PrimeField, buf: bytes, off: int = 0):
        rows, off = read_u32(buf, off)
        cols, off = read_u32(buf, off)
        if rows == 0 or cols == 0 or rows > 2**20 or cols > 2**20:
            raise Malformed("bad matrix dimensions")
        vals, off = field.decode_entries(buf, off, rows * cols)
        return cls.from_array(field, vals.reshape(rows, cols)), off


class InvertibleMatrix:
    """A square full-rank matrix with a lazily cached inverse."""

    __slots__ = ("inner", "_inverse")

    def __init__(self, inner: Matrix, inverse: Matrix | None = None, checked: bool = False):
        if inner.rows != inner.cols:
            raise DimensionMismatch("invertible matrix must be square")
        if not checked and rank(inner) != inner.rows:
            raise Singular("matrix is not full rank")
        self.inner = inner
        self._inverse = inverse

    @property
    def field(self) -> PrimeField:
        return self.inner.field

    @property
    def n(self) -> int:
        return self.inner.rows

    def inverse(self) -> "InvertibleMatrix":
        if self._inverse is None:
            self._inverse = mat_inv(self.inner).inner
        return InvertibleMatrix(self._inverse, inverse=self.inner, checked=True)

    def __eq__(self, other):
        if isinstance(other, InvertibleMatrix):
            return self.inner == other.inner
        return NotImplemented

    def __repr__(self):
        return f"InvertibleMatrix({self.n}x{self.n} over F_{self.field.q})"


def _check_same_field(a: Matrix, b: Matrix):
    if a.field != b.field:
        raise FieldMismatch("matrices over different fields")


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    """Standard matrix product over F_q."""
    _check_same_field(a, b)
    if a.cols != b.rows:
        raise DimensionMismatch(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    out = backend.matmul(a.a, b.a, a.field.q)[0]
    return Matrix.from_array(a.field, out)


def mat_inv(a: Matrix) -> InvertibleMatrix:
    """Inverse of a square matrix; raises Singular when rank deficient."""
    if a.rows != a.cols:
        raise DimensionMismatch("only square matrices can be inverted")
    inv, ok = backend.inverses(a.a, a.field.q)
    if not ok[0]:
        raise Singular("matrix is not invertible")
    return InvertibleMatrix(Matrix.from_array(a.field, inv[0]), inverse=a, checked=True)


def rank(a: Matrix) -> int:
    """Row-echelon rank over F_q."""
    return int(backend.ranks(a.a, a.field.q)[0])


def det(a: Matrix) -> FieldElement:
    """Determinant over F_q via Gaussian elimination."""
    if a.rows != a.cols:
        raise DimensionMismatch("determinant needs a square matrix")
    return FieldElement(int(backend.dets(a.a, a.field.q)[0]), a.field)


def sample_invertible(rng: np.random.Generator, n: int, field: PrimeField) -> InvertibleMatrix:
    """Uniform element of GL(n, q) by rejection on uniform matrices."""
    arr = sample_invertible_arrays(rng, n, field, 1)[0]
    m = Matrix.from_array(field, arr)
    return InvertibleMatrix(m, checked=True)


def sample_invertible_arrays(rng: np.random.Generator, n: int, field: PrimeField, count: int) -> np.ndarray:
    """Batch form of :func:`sample_invertible`, returning an (count, n, n) array."""
    q = field.q
    if q >= (1 << 62):
        raise ValueError("batch sampling requires a machine-word modulus")
    out = np.empty((count, n, n), dtype=np.int64)
    need = np.arange(count)
    for _ in range(_SAMPLE_RETRY_CAP):
        cand = rng.integers(0, q, size=(len(need), n, n), dtype=np.int64)
        ok = backend.full_rank_flags(cand, q) == 1
        out[need[ok]] = cand[ok]
        need = need[~ok]
        if len(need) == 0:
            return out
        cand = cand[~ok]
    raise RngFailure("invertible-matrix rejection sampling exceeded retry cap")


def row_space_equal(a: Matrix, b: Matrix) -> bool:
    """True iff the row spaces of a and b coincide (compared via RREF)."""
    _check_same_field(a, b)
    if a.cols != b.cols:
        raise DimensionMismatch("row spaces live in different ambient spaces")
    ra, ka = backend.rref(a.a, a.field.q)
    rb, kb = backend.rref(b.a, b.field.q)
    if ka != kb:
        return False
    return np.array_equal(ra[:ka], rb[:kb])
