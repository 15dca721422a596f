"""Brute-force ground truth at tiny parameters.

Everything here is exhaustive or exact: full group enumeration, orbit
computation by applying every group element, witness search by scanning, and
statistical distance over exact rational probability tables.  Operations
refuse (TooLarge) rather than approximate beyond the enumeration ceiling.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .actions import GroupAction
from .errors import NotNormalized, TooLarge

ENUMERATION_LIMIT = 1 << 24


@dataclass
class EnumeratedGroup:
    """Complete listing of a group, with an index by canonical encoding."""

    action: GroupAction
    elements: list
    index: dict  # encoding -> position in elements

    @property
    def size(self) -> int:
        return len(self.elements)

    def position(self, g) -> int:
        return self.index[self.action.encode_group(g)]


def enumerate_group(desc: GroupAction, limit: int = ENUMERATION_LIMIT) -> EnumeratedGroup:
    """List every group element; refuses when the analytic order exceeds limit."""
    order = desc.group_order
    if order is None:
        raise TooLarge("group order unknown; refusing open-ended enumeration")
    if order > min(limit, ENUMERATION_LIMIT):
        raise TooLarge(f"|G| = {order} exceeds the enumeration ceiling")
    elements = list(desc.iter_group())
    index = {desc.encode_group(g): i for i, g in enumerate(elements)}
    if len(index) != order:
        raise AssertionError(
            f"enumeration found {len(index)} distinct elements, analytic order {order}"
        )
    return EnumeratedGroup(desc, elements, index)


@dataclass
class Orbit:
    """The orbit of a base point, stored as sorted canonical encodings."""

    action: GroupAction
    base: object
    encodings: list  # sorted canonical encodings of every member
    members: dict  # encoding -> one witness g with g . base = member

    @property
    def size(self) -> int:
        return len(self.encodings)

    def __contains__(self, s) -> bool:
        return self.action.encode_set(s) in self.members


def orbit_of(desc: GroupAction, s, group: EnumeratedGroup | None = None) -> Orbit:
    """Exact orbit of s, applying every enumerated group element."""
    if group is None:
        group = enumerate_group(desc)
    members = {}
    outs = desc.act_many(group.elements, [s])
    for g, t in zip(group.elements, outs):
        enc = desc.encode_set(t)
        if enc not in members:
            members[enc] = g
    return Orbit(desc, s, sorted(members), members)


def orbit_partition(desc: GroupAction, group: EnumeratedGroup | None = None) -> list[Orbit]:
    """All orbits of the action, covering the full (enumerable) set."""
    if group is None:
        group = enumerate_group(desc)
    seen = set()
    orbits = []
    for s in desc.iter_set():
        enc = desc.encode_set(s)
        if enc in seen:
            continue
        orb = orbit_of(desc, s, group)
        seen.update(orb.encodings)
        orbits.append(orb)
    return orbits


def find_isomorphism_bruteforce(desc: GroupAction, s, t, group: EnumeratedGroup | None = None):
    """Any witness g with g . s = t, or None when s and t sit in different orbits."""
    if group is None:
        group = enumerate_group(desc)
    target = desc.encode_set(t)
    outs = desc.act_many(group.elements, [s])
    for g, out in zip(group.elements, outs):
        if desc.encode_set(out) == target:
            return g
    return None


def exact_statistical_distance(dist_a: dict, dist_b: dict) -> Fraction:
    """Total variation distance (1/2) sum |pA - pB| in exact arithmetic."""
    for name, d in (("first", dist_a), ("second", dist_b)):
        total = sum(d.values(), Fraction(0))
        if total != 1:
            raise NotNormalized(f"{name} distribution sums to {total}")
    keys = set(dist_a) | set(dist_b)
    acc = Fraction(0)
    for k in keys:
        acc += abs(dist_a.get(k, Fraction(0)) - dist_b.get(k, Fraction(0)))
    return acc / 2


def self_reduce(solver, desc: GroupAction, s, t, attempts: int, rng):
    """Random self-reduction of the inversion problem within one orbit.

    Re-randomizes the pair as (h . s, h' . t), asks the solver for a witness
    between those, conjugates it back, and only returns compositions that
    verifiably map s to t.  Returns None when every attempt fails.
    """
    for _ in range(attempts):
        h = desc.sample_group(rng)
        hp = desc.sample_group(rng)
        g = solver(desc.act(h, s), desc.act(hp, t))
        if g is None:
            continue
        # solver: g . (h.s) = hp.t, hence (hp^-1 g h) . s = t
        candidate = desc.prod(desc.inv(hp), desc.prod(g, h))
        if desc.eq_set(desc.act(candidate, s), t):
            return candidate
    return None


def distribution_from_counts(counts: dict, total: int) -> dict:
    """Exact probability table from tallies (values become Fractions)."""
    return {k: Fraction(v, total) for k, v in counts.items()}
