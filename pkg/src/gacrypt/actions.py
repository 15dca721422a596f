"""Group actions: the abstract descriptor and concrete instantiations.

A :class:`GroupAction` bundles everything the computational model needs:
group product / inverse / identity, the action map, uniform samplers for
group and set elements, encode/decode codecs with recognizers that are total
on arbitrary bytes, and size descriptors.  Three actions ship here:

* :class:`GlatAction` -- tuples of invertible matrices acting on 3-tensors
  by change of basis on each mode (the main construction);
* :class:`DlogAction` -- units of Z_p scaling the nonzero residues, the
  classical discrete-log action (realized additively);
* :class:`AmsiAction` -- GL(n, q) acting on tuples of alternating matrices
  by congruence.

:class:`DiagonalAction` applies one group element to d independent set
elements, which is how the classical DDH-style games are expressed.

Besides the scalar interface there is a *batch* interface: a batch is an
opaque column of elements.  The generic representation is a plain list; the
tensor action packs batches into contiguous int64 arrays so that protocol
bulk work (thousands of small actions per signature) runs in a handful of
kernel calls, and en/decodes whole batches through uint8 byte matrices.

Wire format: every element encoding begins with a one-byte action id
(0x01 tensor, 0x02 dlog, 0x03 alternating) followed by the parameter header
(modulus and dimensions), then the payload in the algebra module's canonical
encoding.  Decoders reject anything that does not parse back to a valid
element of this exact action.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .algebra import Matrix, PrimeField, read_u32, sample_invertible_arrays
from .errors import (
    DimensionMismatch,
    InvalidElement,
    Malformed,
    NotAlternating,
    RngFailure,
    TooLarge,
)

ACTION_ID_GLAT = 0x01
ACTION_ID_DLOG = 0x02
ACTION_ID_AMSI = 0x03

_SEED_RETRY_CAP = 10_000


def _u32(x):
    return struct.pack("<I", x)


class XofStream:
    """Deterministic byte stream: SHAKE256(tag | seed | counter) blocks."""

    def __init__(self, tag: bytes, seed: bytes):
        self._prefix = tag + seed
        self._block = 0
        self._buf = b""

    def take(self, n: int) -> bytes:
        while len(self._buf) < n:
            h = hashlib.shake_256(self._prefix + _u32(self._block))
            self._buf += h.digest(136)
            self._block += 1
        out, self._buf = self._buf[:n], self._buf[n:]
        return out

    def residue(self, q: int, width: int) -> int:
        # rejection keeps the value exactly uniform mod q
        lim = (256**width // q) * q
        for _ in range(_SEED_RETRY_CAP):
            x = int.from_bytes(self.take(width), "big")
            if x < lim:
                return x % q
        raise RngFailure("seeded residue sampling exceeded retry cap")


def gl_order(n: int, q: int) -> int:
    """|GL(n, q)| = prod_{i=0}^{n-1} (q^n - q^i)."""
    qn = q**n
    out = 1
    for i in range(n):
        out *= qn - q**i
    return out


class GroupAction:
    """Base descriptor; scalar methods are abstract, bulk methods are loops."""

    name = "abstract"

    # -- scalar interface ---------------------------------------------------

    def identity(self):
        raise NotImplementedError

    def prod(self, g, h):
        raise NotImplementedError

    def inv(self, g):
        raise NotImplementedError

    def act(self, g, s):
        raise NotImplementedError

    def sample_group(self, rng):
        raise NotImplementedError

    def sample_set(self, rng):
        raise NotImplementedError

    def eq_group(self, g, h) -> bool:
        return self.encode_group(g) == self.encode_group(h)

    def eq_set(self, s, t) -> bool:
        return self.encode_set(s) == self.encode_set(t)

    def encode_group(self, g) -> bytes:
        raise NotImplementedError

    def decode_group(self, buf: bytes):
        raise NotImplementedError

    def encode_set(self, s) -> bytes:
        raise NotImplementedError

    def decode_set(self, buf: bytes):
        raise NotImplementedError

    def is_group_encoding(self, buf: bytes) -> bool:
        """C_G: total recognizer, true iff buf decodes to a group element."""
        try:
            self.decode_group(buf)
            return True
        except Malformed:
            return False

    def is_set_encoding(self, buf: bytes) -> bool:
        """C_S: total recognizer, true iff buf decodes to a set element."""
        try:
            self.decode_set(buf)
            return True
        except Malformed:
            return False

    def group_from_seed(self, seed: bytes):
        """Deterministic R_G: the uniform sampler driven by an XOF of the seed."""
        raise NotImplementedError

    # -- size descriptors ----------------------------------------------------

    group_order: int | None = None
    set_size: int | None = None

    def log2_group_size(self) -> float:
        if self.group_order is None:
            raise NotImplementedError
        return math.log2(self.group_order)

    def log2_set_size(self) -> float:
        if self.set_size is None:
            raise NotImplementedError
        return math.log2(self.set_size)

    def pra_plausible(self) -> bool:
        """Whether a dominant orbit is ruled out at these parameters.

        Generic rule: every orbit has at most |G| elements, so two uniform
        set elements share one with probability <= |G|/|S|; demand
        log|S| > log|G|.  Subclasses refine this.
        """
        return self.log2_set_size() > self.log2_group_size()

    def iter_group(self):
        raise TooLarge(f"{self.name}: group enumeration not supported")

    def iter_set(self):
        raise TooLarge(f"{self.name}: set enumeration not supported")

    def group_encoding_length(self) -> int:
        return len(self.encode_group(self.identity()))

    # -- list interface (loops; overridden where batching pays) ---------------

    @staticmethod
    def _pair_lengths(xs, ys):
        n = max(len(xs), len(ys))
        if len(xs) not in (1, n) or len(ys) not in (1, n):
            raise DimensionMismatch("bulk operands must have equal length or length 1")
        return n

    def act_many(self, gs, ss):
        n = self._pair_lengths(gs, ss)
        return [
            self.act(gs[i if len(gs) > 1 else 0], ss[i if len(ss) > 1 else 0])
            for i in range(n)
        ]

    def prod_many(self, gs, hs):
        n = self._pair_lengths(gs, hs)
        return [
            self.prod(gs[i if len(gs) > 1 else 0], hs[i if len(hs) > 1 else 0])
            for i in range(n)
        ]

    def inv_many(self, gs):
        return [self.inv(g) for g in gs]

    def sample_group_many(self, rng, n):
        return self.group_batch_list(self.sample_group_batch(rng, n))

    def sample_set_many(self, rng, n):
        return self.set_batch_list(self.sample_set_batch(rng, n))

    def encode_group_many(self, gs):
        return [self.encode_group(g) for g in gs]

    def encode_set_many(self, ss):
        return [self.encode_set(s) for s in ss]

    # -- batch interface -------------------------------------------------------
    #
    # A batch is an opaque column of elements; the default representation is
    # a plain list.  Byte-matrix forms hold one fixed-width encoding per row.

    def group_batch(self, elements):
        return list(elements)

    def set_batch(self, elements):
        return list(elements)

    def group_batch_list(self, b):
        return list(b)

    def set_batch_list(self, b):
        return list(b)

    def group_batch_len(self, b) -> int:
        return len(b)

    def set_batch_len(self, b) -> int:
        return len(b)

    def group_batch_get(self, b, i):
        return b[i]

    def set_batch_get(self, b, i):
        return b[i]

    def group_batch_tile(self, b, k: int):
        return list(b) * k

    def set_batch_tile(self, b, k: int):
        return list(b) * k

    def group_batch_where(self, bits, ones, zeros):
        return [ones[i] if bit else zeros[i] for i, bit in enumerate(bits)]

    def set_batch_where(self, bits, ones, zeros):
        return [ones[i] if bit else zeros[i] for i, bit in enumerate(bits)]

    def set_batch_eq(self, a, b) -> bool:
        if self.set_batch_len(a) != self.set_batch_len(b):
            return False
        return all(self.eq_set(x, y) for x, y in zip(a, b))

    def sample_group_batch(self, rng, n):
        return [self.sample_group(rng) for _ in range(n)]

    def sample_set_batch(self, rng, n):
        return [self.sample_set(rng) for _ in range(n)]

    def act_batch(self, gb, sb):
        return self.act_many(gb, sb)

    def prod_batch(self, ga, gb):
        return self.prod_many(ga, gb)

    def inv_batch(self, gb):
        return self.inv_many(gb)

    @staticmethod
    def _rows_from_encodings(encs):
        if not encs:
            raise ValueError("empty batch has no byte matrix")
        n = len(encs[0])
        if any(len(e) != n for e in encs):
            raise ValueError("variable-width encodings cannot form a byte matrix")
        return np.frombuffer(b"".join(encs), dtype=np.uint8).reshape(len(encs), n)

    def group_batch_bytes(self, gb) -> np.ndarray:
        """(B, W) uint8 matrix whose rows are the canonical group encodings."""
        return self._rows_from_encodings(self.encode_group_many(self.group_batch_list(gb)))

    def set_batch_bytes(self, sb) -> np.ndarray:
        return self._rows_from_encodings(self.encode_set_many(self.set_batch_list(sb)))

    def group_batch_from_bytes(self, mat: np.ndarray):
        return [self.decode_group(row.tobytes()) for row in mat]

    def set_batch_from_bytes(self, mat: np.ndarray):
        return [self.decode_set(row.tobytes()) for row in mat]

    def decode_group_many(self, encs):
        return [self.decode_group(e) for e in encs]

    def decode_set_many(self, encs):
        return [self.decode_set(e) for e in encs]


class GlatAction(GroupAction):
    """Product of general linear groups acting on d1 x d2 x d3 tensors.

    A group element is a triple of invertible int64 matrices (one per mode);
    a set element is an int64 array of shape dims.  The action multiplies
    each mode by its matrix, which equals the full change-of-basis sum.
    Group batches are triples of (B, d, d) arrays, set batches are
    (B, d1, d2, d3) arrays; elements of a batch are views and must be
    treated as immutable.
    """

    name = "glat"

    def __init__(self, field: PrimeField, dims):
        dims = tuple(int(d) for d in dims)
        if len(dims) != 3 or any(d < 1 for d in dims):
            raise DimensionMismatch("dims must be three positive integers")
        if field.q >= (1 << 62):
            raise ValueError("tensor actions require a machine-word modulus (q < 2**62)")
        self.field = field
        self.dims = dims
        self.header = (
            bytes([ACTION_ID_GLAT])
            + field.encode_header()
            + b"".join(_u32(d) for d in dims)
        )
        self.group_order = 1
        for d in dims:
            self.group_order *= gl_order(d, field.q)
        self.set_size = field.q ** (dims[0] * dims[1] * dims[2])
        self._mode_hdr = [_u32(d) + _u32(d) for d in dims]

    def __repr__(self):
        return f"GlatAction(q={self.field.q}, dims={self.dims})"

    # -- scalar ops ------------------------------------------------------------

    def identity(self):
        return tuple(np.eye(d, dtype=np.int64) for d in self.dims)

    def prod(self, g, h):
        return self.group_batch_get(self.prod_batch(self._g1(g), self._g1(h)), 0)

    def inv(self, g):
        return self.group_batch_get(self.inv_batch(self._g1(g)), 0)

    def act(self, g, s):
        self._check_tensor(s)
        return backend.glat_apply(g[0], g[1], g[2], s, self.field.q)[0]

    @staticmethod
    def _g1(g):
        return tuple(m[np.newaxis] for m in g)

    def _check_tensor(self, s):
        if s.shape != self.dims:
            raise DimensionMismatch(f"tensor shape {s.shape} != {self.dims}")

    def sample_group(self, rng):
        return self.group_batch_get(self.sample_group_batch(rng, 1), 0)

    def sample_set(self, rng):
        return rng.integers(0, self.field.q, size=self.dims, dtype=np.int64)

    def eq_group(self, g, h):
        return all(np.array_equal(g[j], h[j]) for j in range(3))

    def eq_set(self, s, t):
        return np.array_equal(s, t)

    # -- batches -----------------------------------------------------------------

    def group_batch(self, elements):
        if isinstance(elements, tuple) and len(elements) == 3 and elements[0].ndim == 3:
            return elements
        return tuple(
            np.ascontiguousarray(np.stack([g[j] for g in elements])) for j in range(3)
        )

    def set_batch(self, elements):
        if isinstance(elements, np.ndarray) and elements.ndim == 4:
            return elements
        return np.ascontiguousarray(np.stack(list(elements)))

    def group_batch_list(self, b):
        return [tuple(b[j][i] for j in range(3)) for i in range(b[0].shape[0])]

    def set_batch_list(self, b):
        return list(b)

    def group_batch_len(self, b):
        return b[0].shape[0]

    def set_batch_len(self, b):
        return b.shape[0]

    def group_batch_get(self, b, i):
        return (b[0][i], b[1][i], b[2][i])

    def set_batch_get(self, b, i):
        return b[i]

    def group_batch_tile(self, b, k):
        return tuple(np.tile(b[j], (k, 1, 1)) for j in range(3))

    def set_batch_tile(self, b, k):
        return np.tile(b, (k, 1, 1, 1))

    def group_batch_where(self, bits, ones, zeros):
        m = np.asarray(bits, dtype=bool).reshape(-1, 1, 1)
        return tuple(np.where(m, ones[j], zeros[j]) for j in range(3))

    def set_batch_where(self, bits, ones, zeros):
        m = np.asarray(bits, dtype=bool).reshape(-1, 1, 1, 1)
        return np.where(m, ones, zeros)

    def set_batch_eq(self, a, b):
        return a.shape == b.shape and np.array_equal(a, b)

    def sample_group_batch(self, rng, n):
        return tuple(sample_invertible_arrays(rng, d, self.field, n) for d in self.dims)

    def sample_set_batch(self, rng, n):
        return rng.integers(0, self.field.q, size=(n, *self.dims), dtype=np.int64)

    def act_batch(self, gb, sb):
        return backend.glat_apply(gb[0], gb[1], gb[2], sb, self.field.q)

    def prod_batch(self, ga, gb):
        q = self.field.q
        return tuple(backend.matmul(ga[j], gb[j], q) for j in range(3))

    def inv_batch(self, gb):
        q = self.field.q
        out = []
        for j in range(3):
            invj, ok = backend.inverses(gb[j], q)
            if not ok.all():
                raise InvalidElement("group component not invertible")
            out.append(invj)
        return tuple(out)

    # -- list API routed through batches -----------------------------------------

    def act_many(self, gs, ss):
        gb = self.group_batch(gs) if not self._is_group_batch(gs) else gs
        sb = self.set_batch(ss) if not self._is_set_batch(ss) else ss
        return list(self.act_batch(gb, sb))

    def prod_many(self, gs, hs):
        n = max(len(gs), len(hs))
        out = self.prod_batch(self.group_batch(gs), self.group_batch(hs))
        return self.group_batch_list(out) if n > 1 else [self.group_batch_get(out, 0)]

    def inv_many(self, gs):
        return self.group_batch_list(self.inv_batch(self.group_batch(gs)))

    @staticmethod
    def _is_group_batch(x):
        return isinstance(x, tuple) and len(x) == 3 and getattr(x[0], "ndim", 0) == 3

    @staticmethod
    def _is_set_batch(x):
        return isinstance(x, np.ndarray) and x.ndim == 4

    # -- codecs -------------------------------------------------------------------

    def set_batch_bytes(self, sb):
        sb = self.set_batch(sb)
        b = sb.shape[0]
        hdr = np.frombuffer(self.header, dtype=np.uint8)
        ent = self.field.entries_byte_matrix(sb.reshape(b, -1))
        out = np.empty((b, hdr.size + ent.shape[1]), dtype=np.uint8)
        out[:, : hdr.size] = hdr
        out[:, hdr.size :] = ent
        return out

    def group_batch_bytes(self, gb):
        b = self.group_batch_len(gb)
        cols = [np.broadcast_to(np.frombuffer(self.header, dtype=np.uint8), (b, len(self.header)))]
        for j in range(3):
            mh = np.frombuffer(self._mode_hdr[j], dtype=np.uint8)
            cols.append(np.broadcast_to(mh, (b, mh.size)))
            cols.append(self.field.entries_byte_matrix(gb[j].reshape(b, -1)))
        return np.concatenate(cols, axis=1)

    def set_batch_from_bytes(self, mat):
        b = mat.shape[0]
        hl = len(self.header)
        count = self.dims[0] * self.dims[1] * self.dims[2]
        if mat.shape[1] != hl + count * self.field.width:
            raise Malformed("wrong encoding width")
        hdr = np.frombuffer(self.header, dtype=np.uint8)
        if not np.array_equal(mat[:, :hl], np.broadcast_to(hdr, (b, hl))):
            raise Malformed("wrong action header")
        vals = self.field.entries_from_byte_matrix(mat[:, hl:], count)
        return np.ascontiguousarray(vals.reshape(b, *self.dims))

    def group_batch_from_bytes(self, mat):
        b = mat.shape[0]
        hdr = np.frombuffer(self.header, dtype=np.uint8)
        hl = hdr.size
        w = self.field.width
        if mat.shape[1] != self.group_encoding_length():
            raise Malformed("wrong encoding width")
        if not np.array_equal(mat[:, :hl], np.broadcast_to(hdr, (b, hl))):
            raise Malformed("wrong action header")
        off = hl
        mats = []
        for j, d in enumerate(self.dims):
            mh = np.frombuffer(self._mode_hdr[j], dtype=np.uint8)
            if not np.array_equal(mat[:, off : off + mh.size], np.broadcast_to(mh, (b, mh.size))):
                raise Malformed("group component has wrong shape header")
            off += mh.size
            vals = self.field.entries_from_byte_matrix(mat[:, off : off + d * d * w], d * d)
            off += d * d * w
            comp = np.ascontiguousarray(vals.reshape(b, d, d))
            if not backend.full_rank_flags(comp, self.field.q).all():
                raise Malformed("group component not invertible")
            mats.append(comp)
        if off != mat.shape[1]:
            raise Malformed("trailing bytes after group element")
        return tuple(mats)

    def encode_set(self, s) -> bytes:
        self._check_tensor(s)
        return self.header + self.field.encode_entries(s)

    def encode_set_many(self, ss):
        mat = self.set_batch_bytes(self.set_batch(ss))
        buf = mat.tobytes()
        step = mat.shape[1]
        return [buf[i * step : (i + 1) * step] for i in range(mat.shape[0])]

    def decode_set(self, buf: bytes):
        if len(buf) != self.set_encoding_length():
            raise Malformed("wrong encoding length")
        mat = np.frombuffer(buf, dtype=np.uint8).reshape(1, -1)
        return self.set_batch_from_bytes(mat)[0]

    def decode_set_many(self, encs):
        return list(self.set_batch_from_bytes(self._rows_from_encodings(encs)))

    def encode_group(self, g) -> bytes:
        return self.group_batch_bytes(self._g1(g)).tobytes()

    def encode_group_many(self, gs):
        mat = self.group_batch_bytes(self.group_batch(gs))
        buf = mat.tobytes()
        step = mat.shape[1]
        return [buf[i * step : (i + 1) * step] for i in range(mat.shape[0])]

    def decode_group(self, buf: bytes):
        if len(buf) != self.group_encoding_length():
            raise Malformed("wrong encoding length")
        mat = np.frombuffer(buf, dtype=np.uint8).reshape(1, -1)
        gb = self.group_batch_from_bytes(mat)
        return self.group_batch_get(gb, 0)

    def decode_group_many(self, encs):
        gb = self.group_batch_from_bytes(self._rows_from_encodings(encs))
        return self.group_batch_list(gb)

    def group_encoding_length(self) -> int:
        w = self.field.width
        return len(self.header) + sum(8 + d * d * w for d in self.dims)

    def set_encoding_length(self) -> int:
        return len(self.header) + self.dims[0] * self.dims[1] * self.dims[2] * self.field.width

    # -- seeded sampling -----------------------------------------------------------

    def group_from_seed(self, seed: bytes):
        stream = XofStream(b"RG-glat", seed)
        q = self.field.q
        w = self.field.width
        mats = []
        for d in self.dims:
            for _ in range(_SEED_RETRY_CAP):
                m = np.array(
                    [stream.residue(q, w) for _ in range(d * d)], dtype=np.int64
                ).reshape(d, d)
                if backend.full_rank_flags(m, q)[0]:
                    mats.append(m)
                    break
            else:
                raise RngFailure("seeded GL sampling exceeded retry cap")
        return tuple(mats)

    # -- enumeration / predicates ----------------------------------------------------

    def iter_group(self):
        per_mode = [list(_iter_gl(d, self.field.q)) for d in self.dims]
        for m1 in per_mode[0]:
            for m2 in per_mode[1]:
                for m3 in per_mode[2]:
                    yield (m1, m2, m3)

    def iter_set(self):
        import itertools

        count = self.dims[0] * self.dims[1] * self.dims[2]
        for combo in itertools.product(range(self.field.q), repeat=count):
            yield np.array(combo, dtype=np.int64).reshape(self.dims)

    def pra_plausible(self) -> bool:
        # dimension count of the set must exceed that of the group, i.e.
        # d1*d2*d3 > d1^2 + d2^2 + d3^2 (n^3 > 3n^2 for cubes), so that
        # |G|/|S| <= q^-(gap) is negligible.
        d1, d2, d3 = self.dims
        return d1 * d2 * d3 > d1 * d1 + d2 * d2 + d3 * d3


def _iter_gl(n: int, q: int):
    import itertools

    for combo in itertools.product(range(q), repeat=n * n):
        m = np.array(combo, dtype=np.int64).reshape(n, n)
        if backend.full_rank_flags(m, q)[0]:
            yield np.ascontiguousarray(m)


class DlogAction(GroupAction):
    """Units of Z_p acting on nonzero residues by multiplication.

    This realizes the cyclic group C_p additively: "s to the power a" becomes
    a*s mod p.  Transitive, so useful mainly through its diagonal powers.
    """

    name = "dlog"

    def __init__(self, p: int, check_prime: bool = True):
        self.field = PrimeField(p, check_prime=check_prime)
        self.p = self.field.q
        self.header = bytes([ACTION_ID_DLOG]) + self.field.encode_header()
        self.group_order = self.p - 1
        self.set_size = self.p - 1

    def __repr__(self):
        return f"DlogAction(p={self.p})"

    def _check_unit(self, a):
        if not (1 <= a < self.p):
            raise InvalidElement(f"{a} is not a unit mod {self.p}")

    def identity(self):
        return 1

    def prod(self, g, h):
        self._check_unit(g)
        self._check_unit(h)
        return (g * h) % self.p

    def inv(self, g):
        self._check_unit(g)
        return pow(g, -1, self.p)

    def act(self, g, s):
        self._check_unit(g)
        if not (1 <= s < self.p):
            raise InvalidElement("set element must be a nonzero residue")
        return (g * s) % self.p

    def sample_group(self, rng):
        return int(rng.integers(1, self.p))

    def sample_set(self, rng):
        return int(rng.integers(1, self.p))

    def eq_group(self, g, h):
        return g == h

    def eq_set(self, s, t):
        return s == t

    def _encode_residue(self, v) -> bytes:
        return self.header + int(v).to_bytes(self.field.width, "big")

    def _decode_residue(self, buf: bytes) -> int:
        if not buf.startswith(self.header):
            raise Malformed("wrong action header")
        body = buf[len(self.header) :]
        if len(body) != self.field.width:
            raise Malformed("wrong residue width")
        v = int.from_bytes(body, "big")
        if not (1 <= v < self.p):
            raise Malformed("residue out of range")
        return v

    encode_group = _encode_residue
    decode_group = _decode_residue
    encode_set = _encode_residue
    decode_set = _decode_residue

    def group_from_seed(self, seed: bytes):
        stream = XofStream(b"RG-dlog", seed)
        return stream.residue(self.p - 1, self.field.width) + 1

    def iter_group(self):
        return iter(range(1, self.p))

    def iter_set(self):
        return iter(range(1, self.p))


class AmsiAction(GroupAction):
    """GL(n, q) acting on d-tuples of alternating matrices by congruence.

    A set element is a (d, n, n) array whose slices all satisfy
    v^t A v = 0 (skew-symmetric with zero diagonal); the action sends each
    slice A_i to C A_i C^t.  Tuples are the ordered spanning representatives
    of the underlying matrix spaces; subspace equality is a separate
    comparison (:meth:`span_equal`).
    """

    name = "amsi"

    def __init__(self, field: PrimeField, n: int, d: int):
        if n < 1 or d < 1:
            raise DimensionMismatch("need n >= 1 and d >= 1")
        self.field = field
        self.n = int(n)
        self.d = int(d)
        self.header = (
            bytes([ACTION_ID_AMSI]) + field.encode_header() + _u32(self.n) + _u32(self.d)
        )
        self.group_order = gl_order(self.n, field.q)
        self.set_size = field.q ** (self.d * self.n * (self.n - 1) // 2)

    def __repr__(self):
        return f"AmsiAction(q={self.field.q}, n={self.n}, d={self.d})"

    def check_alternating(self, tup):
        if tup.shape != (self.d, self.n, self.n):
            raise DimensionMismatch("tuple has wrong shape")
        q = self.field.q
        neg = (q - tup) % q
        if not np.array_equal(tup.transpose(0, 2, 1), neg):
            raise NotAlternating("matrix is not skew-symmetric")
        if np.any(tup[:, np.arange(self.n), np.arange(self.n)] != 0):
            raise NotAlternating("matrix has a nonzero diagonal entry")

    def identity(self):
        return np.eye(self.n, dtype=np.int64)

    def prod(self, g, h):
        return backend.matmul(g, h, self.field.q)[0]

    def inv(self, g):
        invg, ok = backend.inverses(g, self.field.q)
        if not ok[0]:
            raise InvalidElement("not invertible")
        return invg[0]

    def act(self, g, s):
        self.check_alternating(s)
        q = self.field.q
        left = backend.matmul(g[np.newaxis], s, q)
        ct = np.ascontiguousarray(g.T)
        return backend.matmul(left, ct[np.newaxis], q)

    def sample_group(self, rng):
        return sample_invertible_arrays(rng, self.n, self.field, 1)[0]

    def sample_set(self, rng):
        q = self.field.q
        out = np.zeros((self.d, self.n, self.n), dtype=np.int64)
        iu = np.triu_indices(self.n, k=1)
        for i in range(self.d):
            vals = rng.integers(0, q, size=len(iu[0]), dtype=np.int64)
            out[i][iu] = vals
            out[i][(iu[1], iu[0])] = (q - vals) % q
        return out

    def eq_group(self, g, h):
        return np.array_equal(g, h)

    def eq_set(self, s, t):
        return np.array_equal(s, t)

    def span_equal(self, s, t) -> bool:
        """Subspace comparison: row spaces of the flattened tuples coincide."""
        from .algebra import row_space_equal

        a = Matrix(self.field, s.reshape(self.d, self.n * self.n))
        b = Matrix(self.field, t.reshape(self.d, self.n * self.n))
        return row_space_equal(a, b)

    def encode_group(self, g) -> bytes:
        return self.header + _u32(self.n) + _u32(self.n) + self.field.encode_entries(g)

    def decode_group(self, buf: bytes):
        off = self._check_header(buf)
        rows, off = read_u32(buf, off)
        cols, off = read_u32(buf, off)
        if rows != self.n or cols != self.n:
            raise Malformed("wrong group shape")
        vals, off = self.field.decode_entries(buf, off, self.n * self.n)
        if off != len(buf):
            raise Malformed("trailing bytes")
        m = np.ascontiguousarray(vals.reshape(self.n, self.n))
        if not backend.full_rank_flags(m, self.field.q)[0]:
            raise Malformed("not invertible")
        return m

    def encode_set(self, s) -> bytes:
        return self.header + self.field.encode_entries(s)

    def decode_set(self, buf: bytes):
        off = self._check_header(buf)
        count = self.d * self.n * self.n
        vals, off = self.field.decode_entries(buf, off, count)
        if off != len(buf):
            raise Malformed("trailing bytes")
        tup = vals.reshape(self.d, self.n, self.n)
        try:
            self.check_alternating(tup)
        except NotAlternating as e:
            raise Malformed(str(e)) from e
        return tup

    def _check_header(self, buf: bytes) -> int:
        if not buf.startswith(self.header):
            raise Malformed("wrong action header")
        return len(self.header)

    def group_from_seed(self, seed: bytes):
        stream = XofStream(b"RG-amsi", seed)
        q = self.field.q
        w = self.field.width
        for _ in range(_SEED_RETRY_CAP):
            m = np.array(
                [stream.residue(q, w) for _ in range(self.n * self.n)], dtype=np.int64
            ).reshape(self.n, self.n)
            if backend.full_rank_flags(m, q)[0]:
                return m
        raise RngFailure("seeded GL sampling exceeded retry cap")

    def iter_group(self):
        return _iter_gl(self.n, self.field.q)

    def pra_plausible(self) -> bool:
        return self.d * self.n * (self.n - 1) // 2 > self.n * self.n


class DiagonalAction(GroupAction):
    """The d-fold diagonal power: one group element acts on a d-tuple."""

    name = "diagonal"

    def __init__(self, base: GroupAction, d: int):
        if d < 1:
            raise DimensionMismatch("d must be >= 1")
        self.base = base
        self.d = int(d)
        self.group_order = base.group_order
        self.set_size = None if base.set_size is None else base.set_size**self.d

    def __repr__(self):
        return f"DiagonalAction({self.base!r}, d={self.d})"

    def identity(self):
        return self.base.identity()

    def prod(self, g, h):
        return self.base.prod(g, h)

    def inv(self, g):
        return self.base.inv(g)

    def act(self, g, s):
        if len(s) != self.d:
            raise DimensionMismatch("tuple has wrong arity")
        return tuple(self.base.act(g, si) for si in s)

    def sample_group(self, rng):
        return self.base.sample_group(rng)

    def sample_set(self, rng):
        return tuple(self.base.sample_set(rng) for _ in range(self.d))

    def eq_group(self, g, h):
        return self.base.eq_group(g, h)

    def eq_set(self, s, t):
        return len(s) == len(t) == self.d and all(
            self.base.eq_set(a, b) for a, b in zip(s, t)
        )

    def encode_group(self, g):
        return self.base.encode_group(g)

    def decode_group(self, buf):
        return self.base.decode_group(buf)

    def encode_set(self, s):
        parts = [_u32(self.d)]
        for si in s:
            e = self.base.encode_set(si)
            parts.append(_u32(len(e)))
            parts.append(e)
        return b"".join(parts)

    def decode_set(self, buf):
        d, off = read_u32(buf, 0)
        if d != self.d:
            raise Malformed("wrong tuple arity")
        out = []
        for _ in range(self.d):
            n, off = read_u32(buf, off)
            if off + n > len(buf):
                raise Malformed("truncated tuple component")
            out.append(self.base.decode_set(buf[off : off + n]))
            off += n
        if off != len(buf):
            raise Malformed("trailing bytes")
        return tuple(out)

    def group_from_seed(self, seed: bytes):
        return self.base.group_from_seed(seed)

    def iter_group(self):
        return self.base.iter_group()

    def iter_set(self):
        import itertools

        for combo in itertools.product(list(self.base.iter_set()), repeat=self.d):
            yield tuple(combo)

    def pra_plausible(self) -> bool:
        # d independent points, one group element: log|S^d| = d log|S|
        return self.d * self.base.log2_set_size() > self.base.log2_group_size()


def diagonal(base: GroupAction, d: int) -> GroupAction:
    """The d-diagonal power of an action (d=1 returns the base itself)."""
    if d == 1:
        return base
    return DiagonalAction(base, d)


@dataclass
class SelfCheckReport:
    """Outcome of randomized verification of the group-action laws."""

    action: str
    trials: int
    checks: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def descriptor_selfcheck(desc: GroupAction, trials: int, rng) -> SelfCheckReport:
    """Randomized check of identity, compatibility, inverse and codec laws."""
    rep = SelfCheckReport(action=desc.name, trials=trials)
    ident = desc.identity()

    def check(cond, label):
        rep.checks += 1
        if not cond:
            rep.violations.append(label)

    for i in range(trials):
        g = desc.sample_group(rng)
        h = desc.sample_group(rng)
        s = desc.sample_set(rng)
        check(desc.eq_set(desc.act(ident, s), s), f"trial {i}: identity law")
        check(
            desc.eq_set(desc.act(desc.prod(g, h), s), desc.act(g, desc.act(h, s))),
            f"trial {i}: compatibility law",
        )
        check(
            desc.eq_group(desc.prod(desc.inv(g), g), ident),
            f"trial {i}: inverse law",
        )
        check(
            desc.eq_set(desc.act(desc.inv(g), desc.act(g, s)), s),
            f"trial {i}: inverse action law",
        )
        check(desc.eq_group(desc.prod(g, ident), g), f"trial {i}: right identity")
        eg = desc.encode_group(g)
        es = desc.encode_set(s)
        check(desc.is_group_encoding(eg), f"trial {i}: recognizer accepts group")
        check(desc.is_set_encoding(es), f"trial {i}: recognizer accepts set")
        check(
            desc.eq_group(desc.decode_group(eg), g), f"trial {i}: group codec roundtrip"
        )
        check(desc.eq_set(desc.decode_set(es), s), f"trial {i}: set codec roundtrip")
    return rep
