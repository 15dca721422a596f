"""Two signature schemes over the identification protocol.

``unruh_*`` implements the hash-revealing transform: each of t repetitions
commits once, answers s distinct challenges, publishes hashes of every
response, and reveals only the response selected by H1 over the whole
table.  ``fs_*`` is the classic Fiat-Shamir transform (challenge = hash of
public key, message and commitment), whose soundness story at these
parameters rests on the dual-mode key generator: uniform fake pairs
(s, t) are valid-keyless except with probability |G|/|S|, so the
no-dominant-orbit predicate is enforced before fake keys are issued.

All random-oracle calls go through one SHAKE256 instance with single-byte
domain tags; every hash input field is u32-length-prefixed.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass

import numpy as np

from .actions import GroupAction
from .errors import DominantOrbitRisk, Malformed
from .sigma_id import (
    IdKeyPair,
    IdPublicKey,
    Transcript,
    challenge_from_bytes,
    challenge_to_bytes,
    kg,
    prover_commit,
    prover_respond,
    sample_challenge,
    verify,
)

DOMAIN_FS_CHAL = 0x01
DOMAIN_UNRUH_H1 = 0x02
DOMAIN_UNRUH_H2 = 0x03

MAGIC_UNRUH = b"GAS1"
MAGIC_FS = b"GAF1"


def _u32(x):
    return struct.pack("<I", x)


def xof(domain: int, fields, out_len: int) -> bytes:
    """SHAKE256 with a domain-tag byte and u32-length-prefixed input fields."""
    h = hashlib.shake_256()
    h.update(bytes([domain]))
    for f in fields:
        h.update(_u32(len(f)))
        h.update(f)
    return h.digest(out_len)


@dataclass(frozen=True)
class SignatureParams:
    """Security parameter, underlying ID parameters, and table shape (t, s)."""

    action: GroupAction
    lam: int = 128
    ell: int = 128
    t: int = 128
    s: int = 2
    hash_id: str = "shake256"

    def __post_init__(self):
        if self.s < 2:
            raise ValueError("need s >= 2 distinct challenges per repetition")
        if self.t < 1 or self.ell < 1:
            raise ValueError("t and ell must be positive")
        if self.ell < 62 and self.s > 2**self.ell:
            raise ValueError("s exceeds the challenge space of the underlying ID")
        if self.hash_id != "shake256":
            raise ValueError("unknown hash algorithm")

    @classmethod
    def from_profile(cls, profile) -> "SignatureParams":
        return cls(
            action=profile.action(),
            lam=profile.lam,
            ell=profile.ell,
            t=profile.t,
            s=profile.s,
            hash_id=profile.hash_id,
        )

    @property
    def response_len(self) -> int:
        """ell_re: byte length of one (fixed-width) response encoding."""
        return self.ell * self.action.group_encoding_length()


def encode_response(action: GroupAction, r: list) -> bytes:
    """Concatenated fixed-width group encodings; the H2 pre-image."""
    return b"".join(action.encode_group_many(r))


def decode_response(action: GroupAction, buf: bytes, ell: int) -> list:
    gw = action.group_encoding_length()
    if len(buf) != ell * gw:
        raise Malformed("response block has wrong length")
    return [action.decode_group(buf[i * gw : (i + 1) * gw]) for i in range(ell)]


# -- Fiat-Shamir ---------------------------------------------------------------


@dataclass
class FsSignature:
    commitment: list
    response: list


def fs_keygen(params: SignatureParams, rng) -> IdKeyPair:
    return kg(params.action, params.ell, rng)


def fs_challenge(params: SignatureParams, pk_bytes: bytes, message: bytes, commitment_encs) -> tuple:
    out = xof(
        DOMAIN_FS_CHAL,
        [pk_bytes, message, *commitment_encs],
        (params.ell + 7) // 8,
    )
    bits = np.unpackbits(np.frombuffer(out, dtype=np.uint8), bitorder="little")
    return tuple(int(b) for b in bits[: params.ell])


def fs_sign(params: SignatureParams, kp: IdKeyPair, message: bytes, rng) -> FsSignature:
    state, commitment = prover_commit(kp, rng)
    c = fs_challenge(
        params,
        kp.public().encode(),
        message,
        params.action.encode_set_many(commitment),
    )
    r = prover_respond(state, kp, c)
    return FsSignature(commitment, r)


def fs_verify(params: SignatureParams, pk: IdPublicKey, message: bytes, sig: FsSignature) -> bool:
    if len(sig.commitment) != params.ell or len(sig.response) != params.ell:
        return False
    c = fs_challenge(
        params, pk.encode(), message, params.action.encode_set_many(sig.commitment)
    )
    return verify(pk, Transcript(sig.commitment, c, sig.response))


def fs_signature_to_bytes(params: SignatureParams, sig: FsSignature) -> bytes:
    act = params.action
    parts = [MAGIC_FS, _u32(params.ell)]
    for e in act.encode_set_many(sig.commitment):
        parts += [_u32(len(e)), e]
    for e in act.encode_group_many(sig.response):
        parts += [_u32(len(e)), e]
    return b"".join(parts)


def fs_signature_from_bytes(params: SignatureParams, buf: bytes) -> FsSignature:
    from .algebra import read_u32

    act = params.action
    if buf[:4] != MAGIC_FS:
        raise Malformed("bad magic")
    ell, off = read_u32(buf, 4)
    if ell != params.ell:
        raise Malformed("repetition count mismatch")
    commitment, response = [], []
    for dest, decode in ((commitment, act.decode_set), (response, act.decode_group)):
        for _ in range(ell):
            n, off = read_u32(buf, off)
            if off + n > len(buf):
                raise Malformed("truncated element")
            dest.append(decode(buf[off : off + n]))
            off += n
    if off != len(buf):
        raise Malformed("trailing bytes")
    return FsSignature(commitment, response)


def fs_verify_bytes(params: SignatureParams, pk: IdPublicKey, message: bytes, buf: bytes) -> bool:
    try:
        sig = fs_signature_from_bytes(params, buf)
    except Malformed:
        return False
    return fs_verify(params, pk, message, sig)


def dual_mode_fake_keygen(
    action: GroupAction, ell: int, rng, allow_dominant: bool = False
) -> IdPublicKey:
    """Fake public key: ell uniform pairs, valid-keyless w.p. >= 1 - |G|/|S| each."""
    if not action.pra_plausible() and not allow_dominant:
        raise DominantOrbitRisk(
            "parameters admit a dominant orbit; fake keys would be distinguishable"
        )
    s = action.sample_set_many(rng, ell)
    t = action.sample_set_many(rng, ell)
    return IdPublicKey(action, ell, s, t)


# -- Unruh-style hash-revealing transform ---------------------------------------


@dataclass
class UnruhSignature:
    """t commitments, a t x s table of (challenge, response-hash), and the
    t revealed responses selected by H1."""

    t: int
    s: int
    ell: int
    commitments: list  # flat, t*ell set elements
    challenges: list  # [t][s] challenge bit tuples
    hashes: list  # [t][s] bytes of length ell_re
    responses: list  # [t] lists of ell group elements


def j_chunk_bits(s: int) -> int:
    return max(1, math.ceil(math.log2(s)))


def j_hash_len(t: int, s: int) -> int:
    return (t * j_chunk_bits(s) + 7) // 8


def parse_j_indices(h1: bytes, t: int, s: int) -> list[int]:
    """Split H1 output into t chunks (LSB-first), reduce mod s, shift to [1, s]."""
    b = j_chunk_bits(s)
    bits = np.unpackbits(np.frombuffer(h1, dtype=np.uint8), bitorder="little")
    out = []
    for i in range(t):
        chunk = bits[i * b : (i + 1) * b]
        val = 0
        for k, x in enumerate(chunk):
            val |= int(x) << k
        out.append(val % s + 1)
    return out


def j_indices_to_bytes(js: list[int], t: int, s: int) -> bytes:
    """Inverse of :func:`parse_j_indices` on the used bits (s a power of two)."""
    b = j_chunk_bits(s)
    if 1 << b != s:
        raise ValueError("exact inverse exists only for power-of-two s")
    bits = np.zeros(((t * b + 7) // 8) * 8, dtype=np.uint8)
    for i, j in enumerate(js):
        val = j - 1
        for k in range(b):
            bits[i * b + k] = (val >> k) & 1
    return np.packbits(bits, bitorder="little").tobytes()


def _h1_fields(pk_bytes, message, commitment_encs, challenges, hashes):
    fields = [pk_bytes, message, *commitment_encs]
    for row_c, row_h in zip(challenges, hashes):
        for c, h in zip(row_c, row_h):
            fields.append(challenge_to_bytes(c))
            fields.append(h)
    return fields


def unruh_sign(params: SignatureParams, kp: IdKeyPair, message: bytes, rng) -> UnruhSignature:
    act = params.action
    ell, t, s = params.ell, params.t, params.s
    total = t * ell

    # i) t independent commitments plus responses to s distinct challenges each
    h_all = act.sample_group_many(rng, total)
    i_all = act.act_many(h_all, kp.s * t)
    hg_all = act.prod_many(h_all, kp.g_inverses() * t)

    challenges = []
    for _ in range(t):
        row = []
        seen = set()
        while len(row) < s:
            c = sample_challenge(rng, ell)
            if c in seen:
                continue
            seen.add(c)
            row.append(c)
        challenges.append(row)

    h_encs = act.encode_group_many(h_all)
    hg_encs = act.encode_group_many(hg_all)
    width = params.response_len
    hashes = []
    for i in range(t):
        base = i * ell
        row = []
        for j in range(s):
            c = challenges[i][j]
            r_enc = b"".join(
                hg_encs[base + k] if c[k] else h_encs[base + k] for k in range(ell)
            )
            row.append(xof(DOMAIN_UNRUH_H2, [r_enc], width))
        hashes.append(row)

    # ii) J indices from H1 over the whole table
    i_encs = act.encode_set_many(i_all)
    h1 = xof(
        DOMAIN_UNRUH_H1,
        _h1_fields(kp.public().encode(), message, i_encs, challenges, hashes),
        j_hash_len(t, s),
    )
    js = parse_j_indices(h1, t, s)

    # iii) reveal the selected responses
    responses = []
    for i, j in enumerate(js):
        c = challenges[i][j - 1]
        base = i * ell
        responses.append(
            [hg_all[base + k] if c[k] else h_all[base + k] for k in range(ell)]
        )
    return UnruhSignature(t, s, ell, i_all, challenges, hashes, responses)


def unruh_verify(params: SignatureParams, pk: IdPublicKey, message: bytes, sig: UnruhSignature) -> bool:
    act = params.action
    ell, t, s = params.ell, params.t, params.s
    if (sig.t, sig.s, sig.ell) != (t, s, ell):
        return False
    if (
        len(sig.commitments) != t * ell
        or len(sig.challenges) != t
        or len(sig.hashes) != t
        or len(sig.responses) != t
    ):
        return False
    width = params.response_len
    for row_c, row_h in zip(sig.challenges, sig.hashes):
        if len(row_c) != s or len(row_h) != s:
            return False
        if any(len(c) != ell for c in row_c) or any(len(h) != width for h in row_h):
            return False
        # challenge distinctness within each repetition
        if len(set(row_c)) != s:
            return False
    if any(len(r) != ell for r in sig.responses):
        return False

    i_encs = act.encode_set_many(sig.commitments)
    h1 = xof(
        DOMAIN_UNRUH_H1,
        _h1_fields(pk.encode(), message, i_encs, sig.challenges, sig.hashes),
        j_hash_len(t, s),
    )
    js = parse_j_indices(h1, t, s)

    # hash consistency of revealed responses
    for i, j in enumerate(js):
        r_enc = encode_response(act, sig.responses[i])
        if sig.hashes[i][j - 1] != xof(DOMAIN_UNRUH_H2, [r_enc], width):
            return False

    # one bulk ID verification across all t repetitions
    flat_r = [g for row in sig.responses for g in row]
    flat_c = []
    for i, j in enumerate(js):
        flat_c.extend(sig.challenges[i][j - 1])
    bases = [
        (pk.t * t)[i] if flat_c[i] else (pk.s * t)[i] for i in range(t * ell)
    ]
    try:
        outs = act.act_many(flat_r, bases)
    except Exception:
        return False
    from .sigma_id import _all_eq_set

    return _all_eq_set(act, outs, sig.commitments)


def unruh_signature_to_bytes(params: SignatureParams, sig: UnruhSignature) -> bytes:
    act = params.action
    parts = [MAGIC_UNRUH, _u32(sig.t), _u32(sig.s), _u32(sig.ell)]
    for e in act.encode_set_many(sig.commitments):
        parts += [_u32(len(e)), e]
    for row_c, row_h in zip(sig.challenges, sig.hashes):
        for c, h in zip(row_c, row_h):
            cb = challenge_to_bytes(c)
            parts += [_u32(len(cb)), cb, _u32(len(h)), h]
    for r in sig.responses:
        e = encode_response(act, r)
        parts += [_u32(len(e)), e]
    return b"".join(parts)


def unruh_signature_from_bytes(params: SignatureParams, buf: bytes) -> UnruhSignature:
    from .algebra import read_u32

    act = params.action
    if buf[:4] != MAGIC_UNRUH:
        raise Malformed("bad magic")
    t, off = read_u32(buf, 4)
    s, off = read_u32(buf, off)
    ell, off = read_u32(buf, off)
    if (t, s, ell) != (params.t, params.s, params.ell):
        raise Malformed("table shape mismatch")
    commitments = []
    for _ in range(t * ell):
        n, off = read_u32(buf, off)
        if off + n > len(buf):
            raise Malformed("truncated commitment")
        commitments.append(act.decode_set(buf[off : off + n]))
        off += n
    challenges, hashes = [], []
    for _ in range(t):
        row_c, row_h = [], []
        for _ in range(s):
            n, off = read_u32(buf, off)
            if off + n > len(buf):
                raise Malformed("truncated challenge")
            row_c.append(challenge_from_bytes(buf[off : off + n], ell))
            off += n
            n, off = read_u32(buf, off)
            if off + n > len(buf):
                raise Malformed("truncated hash")
            row_h.append(buf[off : off + n])
            off += n
        challenges.append(row_c)
        hashes.append(row_h)
    responses = []
    for _ in range(t):
        n, off = read_u32(buf, off)
        if off + n > len(buf):
            raise Malformed("truncated response")
        responses.append(decode_response(act, buf[off : off + n], ell))
        off += n
    if off != len(buf):
        raise Malformed("trailing bytes")
    return UnruhSignature(t, s, ell, commitments, challenges, hashes, responses)


def unruh_verify_bytes(params: SignatureParams, pk: IdPublicKey, message: bytes, buf: bytes) -> bool:
    try:
        sig = unruh_signature_from_bytes(params, buf)
    except Malformed:
        return False
    return unruh_verify(params, pk, message, sig)
