"""Named parameter profiles for the tensor action and the protocols built on it.

TOY is small enough for exhaustive brute-force oracles; SMALL is the default
for randomized testing and for every construction that needs the
no-dominant-orbit predicate (the smallest cube with d^3 > 3d^2); DEMO uses a
61-bit Mersenne prime for benchmarking the kernels.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, replace

from .actions import GlatAction
from .algebra import PrimeField, read_u32
from .errors import Malformed

HASH_IDS = {"shake256": 1}
_HASH_NAMES = {v: k for k, v in HASH_IDS.items()}


@dataclass(frozen=True)
class ParamProfile:
    name: str
    q: int
    dims: tuple[int, int, int]
    lam: int
    ell: int
    t: int
    s: int
    hash_id: str = "shake256"

    def action(self) -> GlatAction:
        return GlatAction(PrimeField(self.q), self.dims)

    def pra_ready(self) -> bool:
        """Whether PRA-based schemes may run at these parameters."""
        return self.action().pra_plausible()

    def encode(self) -> bytes:
        nb = self.name.encode()
        qb = self.q.to_bytes((self.q.bit_length() + 7) // 8, "big")
        return (
            struct.pack("<I", len(nb))
            + nb
            + struct.pack("<I", len(qb))
            + qb
            + struct.pack("<III", *self.dims)
            + struct.pack("<IIII", self.lam, self.ell, self.t, self.s)
            + bytes([HASH_IDS[self.hash_id]])
        )

    @staticmethod
    def decode(buf: bytes, off: int = 0) -> tuple["ParamProfile", int]:
        n, off = read_u32(buf, off)
        if off + n > len(buf):
            raise Malformed("truncated profile name")
        name = buf[off : off + n].decode(errors="replace")
        off += n
        n, off = read_u32(buf, off)
        if n == 0 or off + n > len(buf):
            raise Malformed("truncated modulus")
        q = int.from_bytes(buf[off : off + n], "big")
        off += n
        if off + 12 > len(buf):
            raise Malformed("truncated dims")
        dims = struct.unpack_from("<III", buf, off)
        off += 12
        if off + 16 > len(buf):
            raise Malformed("truncated protocol params")
        lam, ell, t, s = struct.unpack_from("<IIII", buf, off)
        off += 16
        if off + 1 > len(buf):
            raise Malformed("truncated hash id")
        hid = buf[off]
        off += 1
        if hid not in _HASH_NAMES:
            raise Malformed("unknown hash id")
        return (
            ParamProfile(name, q, tuple(dims), lam, ell, t, s, _HASH_NAMES[hid]),
            off,
        )


PROFILES = {
    "TOY": ParamProfile("TOY", q=2, dims=(2, 2, 2), lam=16, ell=16, t=16, s=2),
    "SMALL": ParamProfile("SMALL", q=251, dims=(4, 4, 4), lam=128, ell=128, t=128, s=2),
    "DEMO": ParamProfile(
        "DEMO", q=(1 << 61) - 1, dims=(9, 9, 9), lam=128, ell=128, t=128, s=2
    ),
}


def get_profile(name: str | None = None, **overrides) -> ParamProfile:
    """Look up a named profile; None falls back to $GA_PROFILE then SMALL."""
    if name is None:
        name = os.environ.get("GA_PROFILE", "SMALL")
    key = name.upper()
    if key not in PROFILES:
        raise KeyError(f"unknown profile {name!r}; expected one of {sorted(PROFILES)}")
    prof = PROFILES[key]
    return replace(prof, **overrides) if overrides else prof
