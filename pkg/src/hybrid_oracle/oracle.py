"""Reed-Muller representation of the hidden Boolean function.

Inputs are integers whose bit ``j`` (LSB first) holds ``x_{j+1}``.  A
monomial index ``k`` names the variable subset of its monomial the same
way, so gate ``k`` is activated by ``x`` exactly when ``k & x == k``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

DEFAULT_ENUMERATION_CAP = 1 << 24
EXPLICIT_MAX_BITS = 24

_MASK64 = (1 << 64) - 1


class BudgetExceeded(RuntimeError):
    """Activated set larger than the enumeration budget."""


def _splitmix64(z: np.ndarray) -> np.ndarray:
    z = z + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _parity64(z: np.ndarray) -> np.ndarray:
    for shift in (32, 16, 8, 4, 2, 1):
        z = z ^ (z >> np.uint64(shift))
    return (z & np.uint64(1)).astype(np.uint8)


@dataclass(frozen=True)
class OracleSpec:
    """Hidden function h*(x) = XOR of a_k over activated monomials.

    Either ``coeffs`` (explicit mode, ``n <= 24``) or ``seed`` (seeded
    mode, any ``n``) is set.  In seeded mode ``a_k`` is the parity of a
    64-bit splitmix hash of ``k`` keyed by the seed.
    """

    n: int
    coeffs: tuple[int, ...] | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if (self.coeffs is None) == (self.seed is None):
            raise ValueError("exactly one of coeffs or seed must be given")
        if self.coeffs is not None:
            if self.n > EXPLICIT_MAX_BITS:
                raise ValueError(f"explicit mode supports n <= {EXPLICIT_MAX_BITS}")
            if len(self.coeffs) != 1 << self.n:
                raise ValueError(f"expected {1 << self.n} coefficients, got {len(self.coeffs)}")
            if any(a not in (0, 1) for a in self.coeffs):
                raise ValueError("coefficients must be 0 or 1")
        elif not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must be a uint64")

    @classmethod
    def explicit(cls, coeffs: Sequence[int]) -> "OracleSpec":
        size = len(coeffs)
        n = size.bit_length() - 1
        if size < 2 or size != 1 << n:
            raise ValueError("coefficient vector length must be a power of two >= 2")
        return cls(n=n, coeffs=tuple(int(a) for a in coeffs))

    @classmethod
    def seeded(cls, n: int, seed: int) -> "OracleSpec":
        return cls(n=n, seed=seed)

    @property
    def mode(self) -> str:
        return "explicit" if self.coeffs is not None else "seeded"

    def coefficients(self, indices) -> np.ndarray:
        """Coefficients ``a_k`` for an array of monomial indices (uint8)."""
        if self.coeffs is not None:
            return np.asarray(self.coeffs, dtype=np.uint8)[np.asarray(indices, dtype=np.int64)]
        if self.n > 64:
            return np.array([self.coefficient(int(k)) for k in indices], dtype=np.uint8)
        k = np.asarray(indices, dtype=np.uint64)
        return _parity64(_splitmix64(k ^ np.uint64(self.seed)))

    def coefficient(self, k: int) -> int:
        if self.coeffs is not None:
            return self.coeffs[k]
        # fold wide indices into 64 bits limb by limb
        h = np.array([self.seed], dtype=np.uint64)
        while True:
            h = _splitmix64(np.array([k & _MASK64], dtype=np.uint64) ^ h)
            k >>= 64
            if not k:
                break
        return int(_parity64(h)[0])

    def to_json(self) -> str:
        doc = {"n": self.n, "mode": self.mode}
        if self.coeffs is not None:
            doc["coeffs"] = list(self.coeffs)
        else:
            doc["seed"] = self.seed
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "OracleSpec":
        doc = json.loads(text)
        mode = doc.get("mode")
        if mode == "explicit":
            spec = cls(n=int(doc["n"]), coeffs=tuple(doc["coeffs"]))
        elif mode == "seeded":
            spec = cls(n=int(doc["n"]), seed=int(doc["seed"]))
        else:
            raise ValueError(f"unknown oracle mode {mode!r}")
        return spec


def word_from_bits(bits: str) -> int:
    """Encode ``"x1x2...xn"`` (x1 first) as an integer with x1 in the LSB."""
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"not a bit string: {bits!r}")
    return sum(1 << j for j, b in enumerate(bits) if b == "1")


def hamming_weight(x: int) -> int:
    return int(x).bit_count()


def _check_word(oracle: OracleSpec, x: int) -> None:
    if x < 0 or x >> oracle.n:
        raise ValueError(f"input {x} does not fit in {oracle.n} bits")


def activated_indices(oracle: OracleSpec, x: int) -> Iterator[int]:
    """Yield the activated gate indices (submasks of ``x``) in ascending order."""
    _check_word(oracle, x)
    k = 0
    while True:
        yield k
        if k == x:
            return
        k = (k - x) & x


def activated_array(oracle: OracleSpec, x: int, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """Activated indices as a sorted uint64 array (requires ``n <= 64``)."""
    _check_word(oracle, x)
    kappa = 1 << hamming_weight(x)
    if kappa > cap:
        raise BudgetExceeded(f"kappa = 2^{hamming_weight(x)} exceeds enumeration cap {cap}")
    if oracle.n > 64:
        return np.fromiter(activated_indices(oracle, x), dtype=object, count=kappa)
    # scatter the bits of a counter onto the set-bit positions of x (monotone)
    counter = np.arange(kappa, dtype=np.uint64)
    out = np.zeros(kappa, dtype=np.uint64)
    positions = [p for p in range(oracle.n) if (x >> p) & 1]
    for j, p in enumerate(positions):
        out |= ((counter >> np.uint64(j)) & np.uint64(1)) << np.uint64(p)
    return out


def activated_gates(oracle: OracleSpec, x: int, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """Gate bits ``a_k`` along the activated stream (0 -> sigma_z, 1 -> i sigma_y)."""
    return oracle.coefficients(activated_array(oracle, x, cap))


def truth_value(oracle: OracleSpec, x: int, cap: int = DEFAULT_ENUMERATION_CAP) -> int:
    return int(np.bitwise_xor.reduce(activated_gates(oracle, x, cap)))


def truth_table(oracle: OracleSpec) -> np.ndarray:
    """All 2^n outputs, via the binary Moebius transform of the coefficients."""
    if oracle.n > EXPLICIT_MAX_BITS:
        raise BudgetExceeded(f"truth table needs n <= {EXPLICIT_MAX_BITS}")
    table = oracle.coefficients(np.arange(1 << oracle.n)).copy()
    return moebius_transform(table)


def moebius_transform(values: np.ndarray) -> np.ndarray:
    """In-place XOR superset-sum transform; it is its own inverse."""
    size = values.shape[-1]
    step = 1
    while step < size:
        view = values.reshape(values.shape[:-1] + (size // (2 * step), 2, step))
        view[..., 1, :] ^= view[..., 0, :]
        step *= 2
    return values
