"""The three-move identification protocol and its parallel repetition.

One round commits to I = h . s for fresh random h; the challenge bit picks
whether the prover reveals h (checked against s) or h g^-1 (checked against
t = g . s).  The ell-fold parallel repetition runs independent rounds and
accepts only if all do.  The module also carries the honest-verifier
simulator and the special-soundness extractor, both generic over any
:class:`~gacrypt.actions.GroupAction`.

Prover states hold one-time randomness: reusing one across two different
challenges leaks the secret (that leak *is* the extractor).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .actions import GroupAction
from .errors import (
    ExtractFail,
    Malformed,
    NotAccepting,
    SameChallenge,
    StateMismatch,
)


def _u32(x):
    return struct.pack("<I", x)


def challenge_to_bytes(bits) -> bytes:
    """Pack challenge bits LSB-first into ceil(ell/8) bytes."""
    arr = np.asarray(bits, dtype=np.uint8)
    return np.packbits(arr, bitorder="little").tobytes()


def challenge_from_bytes(buf: bytes, ell: int):
    if len(buf) != (ell + 7) // 8:
        raise Malformed("challenge has wrong length")
    bits = np.unpackbits(np.frombuffer(buf, dtype=np.uint8), bitorder="little")
    if bits[ell:].any():
        raise Malformed("padding bits of challenge must be zero")
    return tuple(int(b) for b in bits[:ell])


def sample_challenge(rng, ell: int):
    return tuple(int(b) for b in rng.integers(0, 2, size=ell))


@dataclass
class IdPublicKey:
    """ell pairs (s_i, t_i) claimed pairwise isomorphic."""

    action: GroupAction
    ell: int
    s: list
    t: list
    _encoded: bytes | None = field(default=None, repr=False, compare=False)

    def encode(self) -> bytes:
        if self._encoded is None:
            parts = [_u32(self.ell)]
            for es, et in zip(
                self.action.encode_set_many(self.s), self.action.encode_set_many(self.t)
            ):
                parts += [_u32(len(es)), es, _u32(len(et)), et]
            self._encoded = b"".join(parts)
        return self._encoded

    @staticmethod
    def decode(action: GroupAction, buf: bytes, off: int = 0):
        from .algebra import read_u32

        ell, off = read_u32(buf, off)
        if ell == 0 or ell > 2**20:
            raise Malformed("bad repetition count")
        s, t = [], []
        for _ in range(ell):
            for dest in (s, t):
                n, off = read_u32(buf, off)
                if off + n > len(buf):
                    raise Malformed("truncated public key element")
                dest.append(action.decode_set(buf[off : off + n]))
                off += n
        return IdPublicKey(action, ell, s, t), off


@dataclass
class IdKeyPair:
    """Public pairs plus the witnesses g_i with t_i = g_i . s_i."""

    action: GroupAction
    ell: int
    s: list
    t: list
    g: list
    _g_inv: list | None = field(default=None, repr=False, compare=False)

    def public(self) -> IdPublicKey:
        return IdPublicKey(self.action, self.ell, self.s, self.t)

    def g_inverses(self) -> list:
        if self._g_inv is None:
            self._g_inv = self.action.inv_many(self.g)
        return self._g_inv


@dataclass
class ProverState:
    """One-time commitment randomness; do not share across challenges."""

    keypair: IdKeyPair
    h: list
    commitments: list
    _h_ginv: list | None = field(default=None, repr=False, compare=False)

    def responses_for_one_bits(self) -> list:
        if self._h_ginv is None:
            self._h_ginv = self.keypair.action.prod_many(
                self.h, self.keypair.g_inverses()
            )
        return self._h_ginv


@dataclass
class Transcript:
    commitment: list
    challenge: tuple
    response: list


def kg(action: GroupAction, ell: int, rng) -> IdKeyPair:
    """ell independent instances: s_i uniform, g_i uniform, t_i = g_i . s_i."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    s = action.sample_set_many(rng, ell)
    g = action.sample_group_many(rng, ell)
    t = action.act_many(g, s)
    return IdKeyPair(action, ell, s, t, g)


def prover_commit(kp: IdKeyPair, rng) -> tuple[ProverState, list]:
    h = kp.action.sample_group_many(rng, kp.ell)
    return commit_with(kp, h)


def commit_with(kp: IdKeyPair, h: list) -> tuple[ProverState, list]:
    """Deterministic commitment from explicit randomness (enumeration hook)."""
    if len(h) != kp.ell:
        raise StateMismatch("randomness list has wrong length")
    commitments = kp.action.act_many(h, kp.s)
    state = ProverState(kp, h, commitments)
    return state, commitments


def prover_respond(state: ProverState, kp: IdKeyPair, challenge) -> list:
    if state.keypair is not kp:
        raise StateMismatch("state belongs to a different key pair")
    if len(challenge) != kp.ell:
        raise StateMismatch("challenge has wrong length")
    ones = state.responses_for_one_bits()
    return [ones[i] if c else state.h[i] for i, c in enumerate(challenge)]


def verify(pk: IdPublicKey, transcript: Transcript) -> bool:
    """Total deterministic verification; malformed transcripts return False."""
    act = pk.action
    c = transcript.challenge
    if (
        len(transcript.commitment) != pk.ell
        or len(c) != pk.ell
        or len(transcript.response) != pk.ell
        or any(b not in (0, 1) for b in c)
    ):
        return False
    bases = [pk.t[i] if c[i] else pk.s[i] for i in range(pk.ell)]
    try:
        outs = act.act_many(transcript.response, bases)
    except Exception:
        return False
    return _all_eq_set(act, outs, transcript.commitment)


def _all_eq_set(action, xs, ys) -> bool:
    if isinstance(xs, list) and xs and isinstance(xs[0], np.ndarray):
        try:
            return np.array_equal(np.stack(xs), np.stack(ys))
        except ValueError:
            return False
    return all(action.eq_set(x, y) for x, y in zip(xs, ys))


def simulate(pk: IdPublicKey, rng) -> Transcript:
    """HVZK simulator: pick the challenge first, then commit consistently."""
    c = sample_challenge(rng, pk.ell)
    h = pk.action.sample_group_many(rng, pk.ell)
    return simulate_with(pk, h, c)


def simulate_with(pk: IdPublicKey, h: list, c) -> Transcript:
    bases = [pk.t[i] if c[i] else pk.s[i] for i in range(pk.ell)]
    commitments = pk.action.act_many(h, bases)
    return Transcript(commitments, tuple(c), list(h))


def extract(pk: IdPublicKey, t1: Transcript, t2: Transcript) -> list:
    """Special-soundness extractor.

    For every position where the challenges differ, recovers
    g_i = (r_i answering 1)^-1 o (r_i answering 0) and checks it maps s_i to
    t_i.  Positions with equal challenge bits yield None (unrecovered).
    """
    if tuple(t1.challenge) == tuple(t2.challenge):
        raise SameChallenge("challenges are identical")
    act = pk.action
    if not _all_eq_set(act, t1.commitment, t2.commitment):
        raise NotAccepting("transcripts have different commitments")
    if not verify(pk, t1) or not verify(pk, t2):
        raise NotAccepting("both transcripts must be accepting")
    out = []
    for i in range(pk.ell):
        c1, c2 = t1.challenge[i], t2.challenge[i]
        if c1 == c2:
            out.append(None)
            continue
        r0 = t1.response[i] if c1 == 0 else t2.response[i]
        r1 = t1.response[i] if c1 == 1 else t2.response[i]
        g = act.prod(act.inv(r1), r0)
        if not act.eq_set(act.act(g, pk.s[i]), pk.t[i]):
            raise ExtractFail(f"recovered witness fails at position {i}")
        out.append(g)
    return out


# -- wire format --------------------------------------------------------------


def transcript_to_bytes(pk_or_action, transcript: Transcript) -> bytes:
    """action header | ell u32 | length-prefixed I's | packed challenge | r's."""
    action = getattr(pk_or_action, "action", pk_or_action)
    ell = len(transcript.commitment)
    parts = [getattr(action, "header", b""), _u32(ell)]
    for e in action.encode_set_many(transcript.commitment):
        parts += [_u32(len(e)), e]
    parts.append(challenge_to_bytes(transcript.challenge))
    for e in action.encode_group_many(transcript.response):
        parts += [_u32(len(e)), e]
    return b"".join(parts)


def transcript_from_bytes(action: GroupAction, buf: bytes) -> Transcript:
    from .algebra import read_u32

    hdr = getattr(action, "header", b"")
    if not buf.startswith(hdr):
        raise Malformed("wrong action header")
    off = len(hdr)
    ell, off = read_u32(buf, off)
    if ell == 0 or ell > 2**20:
        raise Malformed("bad repetition count")
    commitment = []
    for _ in range(ell):
        n, off = read_u32(buf, off)
        if off + n > len(buf):
            raise Malformed("truncated commitment")
        commitment.append(action.decode_set(buf[off : off + n]))
        off += n
    nb = (ell + 7) // 8
    if off + nb > len(buf):
        raise Malformed("truncated challenge")
    challenge = challenge_from_bytes(buf[off : off + nb], ell)
    off += nb
    response = []
    for _ in range(ell):
        n, off = read_u32(buf, off)
        if off + n > len(buf):
            raise Malformed("truncated response")
        response.append(action.decode_group(buf[off : off + n]))
        off += n
    if off != len(buf):
        raise Malformed("trailing bytes after transcript")
    return Transcript(commitment, challenge, response)


def verify_bytes(pk: IdPublicKey, buf: bytes) -> bool:
    try:
        transcript = transcript_from_bytes(pk.action, buf)
    except Malformed:
        return False
    return verify(pk, transcript)
