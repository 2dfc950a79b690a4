"""Dirichlet characters mod q, conductors, Gauss sums and root numbers.

A character is stored as an exponent vector against explicit generators of
(Z/qZ)^*.  Its value at n is e(angle(n) / E) where E is the group exponent
and ``angle`` is an integer reduced mod E before any floating point is used.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .arith import MultiplicativeTables, factorize


@dataclass(frozen=True)
class Generator:
    residue: int  # generator mod q (CRT-lifted)
    order: int
    prime: int  # prime whose local group it generates
    prime_power: int


@dataclass(frozen=True)
class Character:
    index: int
    exponent_vector: tuple[int, ...]
    conductor: int
    parity: int
    group: "CharacterGroup" = field(repr=False, compare=False)

    @property
    def q(self) -> int:
        return self.group.q

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.group.q

    def angle(self, n: int) -> int | None:
        """Integer angle A with chi(n) = e(A / E), or None when (n, q) > 1."""
        return self.group.angle(self.exponent_vector, n)

    def __call__(self, n: int) -> complex:
        a = self.angle(n)
        if a is None:
            return 0j
        return complex(self.group.roots[a])

    def conjugate(self) -> "Character":
        return self.group.characters[self.group.conj_index[self.index]]


@dataclass(frozen=True)
class GaussData:
    gauss_sum: complex
    root_number: complex


class CharacterGroup:
    """The full character group mod q in a fixed enumeration order."""

    def __init__(self, q: int):
        if q < 1:
            raise ValueError(f"modulus must be positive, got {q}")
        self.q = q
        self.generators = _generators(q)
        self.orders = tuple(g.order for g in self.generators)
        self.exponent = math.lcm(*self.orders) if self.orders else 1
        E = self.exponent
        self.roots = np.exp(2j * np.pi * np.arange(E) / E)
        self.dlog = _discrete_logs(q, self.generators)
        vectors = list(itertools.product(*[range(o) for o in self.orders]))
        index_of = {v: i for i, v in enumerate(vectors)}
        self.conj_index = np.array(
            [index_of[tuple((-k) % o for k, o in zip(v, self.orders))] for v in vectors], dtype=np.int64
        )
        chars = []
        for i, v in enumerate(vectors):
            cond = _conductor(v, self.generators)
            parity_angle = self.angle(v, q - 1) if q > 2 else 0
            parity = 1 if parity_angle in (0, None) else -1
            chars.append(Character(i, v, cond, parity, self))
        self.characters = chars
        self.primitive_index = [c.index for c in chars if c.conductor == q]

    @property
    def no_primitive(self) -> bool:
        return not self.primitive_index

    def angle(self, exponents, n: int) -> int | None:
        h = n % self.q
        if self.q == 1:
            return 0
        d = self.dlog[h]
        if d[0] < 0:
            return None
        E = self.exponent
        return sum(int(k) * int(x) * (E // o) for k, x, o in zip(exponents, d, self.orders)) % E

    def angle_table(self, indices=None, residues=None) -> np.ndarray:
        """Integer angles for characters x residues; -1 marks non-units."""
        if indices is None:
            indices = range(len(self.characters))
        if residues is None:
            residues = np.arange(self.q)
        residues = np.asarray(residues) % self.q
        indices = list(indices)
        if not self.orders:
            ang = np.zeros((len(indices), len(residues)), dtype=np.int64)
            ang[:, self.dlog[residues, 0] < 0] = -1
            return ang
        E = self.exponent
        expo = np.array([self.characters[i].exponent_vector for i in indices], dtype=np.int64)
        scale = np.array([E // o for o in self.orders], dtype=np.int64)
        d = self.dlog[residues]
        ang = ((expo * scale) @ d.T) % E
        ang[:, d[:, 0] < 0] = -1
        return ang

    def value_table(self, indices=None, residues=None) -> np.ndarray:
        ang = self.angle_table(indices, residues)
        vals = self.roots[np.where(ang < 0, 0, ang)]
        vals[ang < 0] = 0
        return vals

    @cached_property
    def primitive_gauss(self) -> dict[int, complex]:
        return {i: gauss_sum(self.characters[i]) for i in self.primitive_index}


def _primitive_root(p: int) -> int:
    phi = p - 1
    fac = [r for r, _ in factorize(phi)] if phi > 1 else []
    for g in range(2, p):
        if all(pow(g, phi // r, p) != 1 for r in fac):
            return g
    return 1


def _primitive_root_prime_power(p: int, e: int) -> int:
    g = _primitive_root(p)
    if e >= 2 and pow(g, p - 1, p * p) == 1:
        g += p
    return g


def _crt_lift(r: int, m: int, q: int) -> int:
    # x = r mod m, x = 1 mod q/m
    rest = q // m
    if rest == 1:
        return r % q
    inv = pow(rest, -1, m)
    return (1 + rest * ((r - 1) * inv % m)) % q


def _generators(q: int) -> list[Generator]:
    gens = []
    for p, e in factorize(q) if q > 1 else []:
        pe = p**e
        if p == 2:
            if e == 1:
                continue
            gens.append(Generator(_crt_lift(pe - 1, pe, q), 2, 2, pe))
            if e >= 3:
                gens.append(Generator(_crt_lift(5, pe, q), 2 ** (e - 2), 2, pe))
        else:
            g = _primitive_root_prime_power(p, e)
            gens.append(Generator(_crt_lift(g, pe, q), pe // p * (p - 1), p, pe))
    return gens


def _discrete_logs(q: int, gens: list[Generator]) -> np.ndarray:
    """dlog[h, i] = exponent of generator i in h (or -1 for non-units)."""
    r = max(len(gens), 1)
    out = np.full((q, r), -1, dtype=np.int64)
    if q == 1:
        out[0, :] = 0
        return out
    if not gens:  # q == 2
        out[1, :] = 0
        return out
    h = np.arange(q)
    unit = np.gcd(h, q) == 1
    col = 0
    by_prime: dict[int, list[Generator]] = {}
    for g in gens:
        by_prime.setdefault(g.prime, []).append(g)
    for p, gs in by_prime.items():
        pe = gs[0].prime_power
        local = h % pe
        if p == 2:
            # (Z/2^e)^* = <-1> x <5>
            e = pe.bit_length() - 1
            sign_exp = np.where(local % 4 == 1, 0, 1)
            if e >= 3:
                five = {}
                x = 1
                for j in range(pe // 4):
                    five[x] = j
                    x = x * 5 % pe
                pos = np.where(sign_exp == 0, local, (-local) % pe)
                five_exp = np.array([five.get(int(v), -1) for v in pos])
                out[:, col] = sign_exp
                out[:, col + 1] = five_exp
                col += 2
            else:
                out[:, col] = sign_exp
                col += 1
        else:
            g = gs[0].residue % pe
            table = np.full(pe, -1, dtype=np.int64)
            x = 1
            for j in range(gs[0].order):
                table[x] = j
                x = x * g % pe
            out[:, col] = table[local]
            col += 1
    out[~unit, :] = -1
    return out


def _conductor(exponents, gens: list[Generator]) -> int:
    """Product of local conductors read off the exponent vector."""
    cond = 1
    by_prime: dict[int, list[tuple[Generator, int]]] = {}
    for g, k in zip(gens, exponents):
        by_prime.setdefault(g.prime, []).append((g, k))
    for p, items in by_prime.items():
        if p == 2:
            sign_k = items[0][1]
            if len(items) == 2:
                g5, k5 = items[1]
                order5 = g5.order // math.gcd(k5, g5.order)
                if order5 > 1:
                    cond *= 4 * order5
                    continue
            if sign_k:
                cond *= 4
        else:
            g, k = items[0]
            order = g.order // math.gcd(k, g.order)
            if order > 1:
                a = 0
                while order % p == 0:
                    order //= p
                    a += 1
                cond *= p ** (a + 1)
    return cond


def build_group(q: int) -> CharacterGroup:
    return CharacterGroup(q)


def conductor(chi: Character) -> int:
    return chi.conductor


def conductor_bruteforce(chi: Character) -> int:
    """Smallest c | q such that chi is trivial on units congruent to 1 mod c."""
    q = chi.q
    for c in sorted(d for d in range(1, q + 1) if q % d == 0):
        if all(chi.angle(h) == 0 for h in range(1, q + 1, c) if math.gcd(h, q) == 1):
            return c
    return q


def gauss_sum(chi: Character) -> complex:
    """tau(chi) = sum_h chi(h) e(h/q), angles combined exactly before exponentiating."""
    grp = chi.group
    q, E = grp.q, grp.exponent
    if q == 1:
        return 1 + 0j
    ang = grp.angle_table([chi.index])[0]
    h = np.arange(q)
    mask = ang >= 0
    num = (ang[mask] * q + h[mask] * E) % (E * q)
    terms = np.exp(2j * np.pi * num / (E * q))
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def gauss_root_data(chi: Character, kappa: int) -> GaussData:
    """Gauss sum and root number i^kappa tau(chi)^2 / q of a primitive character."""
    if not chi.is_primitive:
        raise ValueError(f"character {chi.index} mod {chi.q} is not primitive (conductor {chi.conductor})")
    tau = chi.group.primitive_gauss[chi.index] if chi.index in chi.group.primitive_gauss else gauss_sum(chi)
    return GaussData(gauss_sum=tau, root_number=(1j**kappa) * tau * tau / chi.q)


def primitive_twist_sum(q: int, a: int, tables: MultiplicativeTables) -> int:
    """sum over primitive chi mod q of chi(a), by the Mobius formula."""
    if math.gcd(a, q) != 1:
        raise ValueError(f"a={a} is not coprime to q={q}")
    g = math.gcd(q, a - 1) if a != 1 else q
    return int(
        sum(int(tables.mobius[q // c]) * int(tables.totient[c]) for c in tables.divisors(q) if g % c == 0)
    )


def primitive_twist_sum_bruteforce(group: CharacterGroup, a: int) -> complex:
    if math.gcd(a, group.q) != 1:
        raise ValueError(f"a={a} is not coprime to q={group.q}")
    vals = [group.characters[i](a) for i in group.primitive_index]
    return complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))
