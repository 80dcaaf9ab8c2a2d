"""Joint distributions on finite alphabets and their subset-entropy vectors.

Conventions used throughout the package:

* Random variables are numbered 1..n (n <= 8).  A nonempty subset of
  variables is encoded as an integer bitmask in [1, 2**n - 1] with bit
  i-1 set iff variable i belongs to the subset.  The canonical linear
  order of subsets is plain integer order of the bitmasks, which for
  n = 4 yields the column order

      h1 h2 h12 h3 h13 h23 h123 h4 h14 h24 h124 h34 h134 h234 h1234.

* A joint pmf is stored densely as a flat vector indexed by the
  mixed-radix encoding of outcome tuples with x1 as the least
  significant digit:  index = x1 + |X1|*(x2 + |X2|*(x3 + ...)).

* Entropies are in bits (log base 2).  The 0*log(0) = 0 convention is
  implemented by skipping masses below 1e-300; masses in [-1e-15, 0)
  arising from floating-point arithmetic are clamped to zero, anything
  more negative is an error.

All public types are immutable after construction (their numpy buffers
are marked read-only), so values can be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import InvalidArgumentError, InvalidDistributionError

MAX_VARIABLES = 8
MAX_CELLS = 10**7
MASS_SUM_ATOL = 1e-12
ENTROPY_SUM_ATOL = 1e-6
ZERO_MASS_CUTOFF = 1e-300
NEGATIVE_MASS_CLAMP = 1e-15

# A subset of variables is just its bitmask.
SubsetIndex = int


def subset_masks(n: int) -> range:
    """All nonempty subset bitmasks of {1..n} in canonical order."""
    return range(1, 1 << n)


def full_mask(n: int) -> SubsetIndex:
    return (1 << n) - 1


def mask_vars(mask: SubsetIndex) -> tuple[int, ...]:
    """1-based variable indices contained in ``mask``, ascending."""
    return tuple(i + 1 for i in range(mask.bit_length()) if (mask >> i) & 1)


def mask_from_vars(vars_: Sequence[int]) -> SubsetIndex:
    mask = 0
    for v in vars_:
        if v < 1:
            raise InvalidArgumentError(f"variable indices are 1-based, got {v}")
        mask |= 1 << (v - 1)
    return mask


def mask_label(mask: SubsetIndex) -> str:
    """Human-readable subset name, e.g. mask 0b1101 -> '134'."""
    return "".join(str(v) for v in mask_vars(mask))


@dataclass(frozen=True)
class AlphabetSpec:
    """Shape of the product alphabet X1 x ... x Xn.

    Args:
        sizes: per-variable alphabet cardinalities, all >= 1.  The dense
            product must not exceed ``MAX_CELLS`` cells.
    """

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if not 1 <= len(sizes) <= MAX_VARIABLES:
            raise InvalidArgumentError(
                f"variable count must be in [1, {MAX_VARIABLES}], got {len(sizes)}")
        if any(s < 1 for s in sizes):
            raise InvalidArgumentError(f"alphabet sizes must be >= 1, got {sizes}")
        if math.prod(sizes) > MAX_CELLS:
            raise InvalidArgumentError(
                f"product alphabet has {math.prod(sizes)} cells, exceeds {MAX_CELLS}")

    @property
    def n(self) -> int:
        return len(self.sizes)

    @property
    def num_cells(self) -> int:
        return math.prod(self.sizes)

    def index_of(self, outcome: Sequence[int]) -> int:
        """Mixed-radix index of an outcome tuple (x1 least significant)."""
        if len(outcome) != self.n:
            raise InvalidArgumentError(
                f"outcome has {len(outcome)} coordinates, expected {self.n}")
        idx = 0
        stride = 1
        for x, s in zip(outcome, self.sizes):
            if not 0 <= x < s:
                raise InvalidArgumentError(f"outcome {tuple(outcome)} out of range for {self.sizes}")
            idx += x * stride
            stride *= s
        return idx

    def outcome_of(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.num_cells:
            raise InvalidArgumentError(f"cell index {index} out of range")
        out = []
        for s in self.sizes:
            out.append(index % s)
            index //= s
        return tuple(out)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class JointPmf:
    """Dense joint pmf over an :class:`AlphabetSpec`.

    Entries must lie in [0, 1] (values in [-1e-15, 0) are clamped to 0)
    and sum to 1 within ``sum_atol``.  The default tolerance is the
    strict 1e-12 used everywhere inside the package; file loaders relax
    it explicitly because published tables are truncated prints.
    """

    spec: AlphabetSpec
    mass: np.ndarray
    sum_atol: float = field(default=MASS_SUM_ATOL, compare=False, repr=False)

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=np.float64)
        if mass.shape != (self.spec.num_cells,):
            raise InvalidArgumentError(
                f"mass has shape {mass.shape}, expected ({self.spec.num_cells},)")
        lowest = mass.min() if mass.size else 0.0
        if lowest < -NEGATIVE_MASS_CLAMP:
            raise InvalidDistributionError(f"negative mass {lowest} below clamp threshold")
        if lowest < 0.0:
            mass = np.where(mass < 0.0, 0.0, mass)
        if mass.max(initial=0.0) > 1.0 + MASS_SUM_ATOL:
            raise InvalidDistributionError(f"mass entry {mass.max()} exceeds 1")
        total = float(mass.sum())
        if abs(total - 1.0) > self.sum_atol:
            raise InvalidDistributionError(
                f"mass sums to {total!r}, deviates from 1 by more than {self.sum_atol}")
        object.__setattr__(self, "mass", _readonly(mass))

    @classmethod
    def uniform(cls, spec: AlphabetSpec) -> "JointPmf":
        c = spec.num_cells
        return cls(spec, np.full(c, 1.0 / c))

    @classmethod
    def from_atoms(cls, spec: AlphabetSpec, atoms, sum_atol: float = MASS_SUM_ATOL) -> "JointPmf":
        """Build from an iterable of (outcome tuple, probability) pairs."""
        mass = np.zeros(spec.num_cells)
        for outcome, prob in atoms:
            mass[spec.index_of(outcome)] += float(prob)
        return cls(spec, mass, sum_atol)

    def atoms(self, threshold: float = 0.0) -> Iterator[tuple[tuple[int, ...], float]]:
        """Yield (outcome, probability) for entries strictly above ``threshold``."""
        for idx in np.nonzero(self.mass > threshold)[0]:
            yield self.spec.outcome_of(int(idx)), float(self.mass[idx])


@dataclass(frozen=True)
class EntropyVector:
    """Subset entropies (bits) in canonical order; length 2**n - 1.

    The same type carries target rays and polymatroids that do not come
    from a distribution, so nonnegativity is not enforced here.  ``note``
    is free-form provenance metadata (e.g. the normalization mode used by
    a centroid construction) and does not participate in equality.
    """

    n: int
    values: np.ndarray
    note: str = field(default="", compare=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != ((1 << self.n) - 1,):
            raise InvalidArgumentError(
                f"entropy vector for n={self.n} needs {(1 << self.n) - 1} entries, "
                f"got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("entropy vector entries must be finite")
        object.__setattr__(self, "values", _readonly(values))

    @classmethod
    def from_values(cls, values, note: str = "") -> "EntropyVector":
        values = np.asarray(values, dtype=np.float64)
        n = int(values.size + 1).bit_length() - 1
        if (1 << n) - 1 != values.size:
            raise InvalidArgumentError(f"length {values.size} is not 2**n - 1 for any n")
        return cls(n, values, note)

    def __getitem__(self, mask: SubsetIndex) -> float:
        """Entropy of the subset encoded by a canonical bitmask (1-based)."""
        if not 1 <= mask <= full_mask(self.n):
            raise InvalidArgumentError(f"subset mask {mask} out of range for n={self.n}")
        return float(self.values[mask - 1])

    def __len__(self) -> int:
        return self.values.size

    @property
    def joint(self) -> float:
        """Entropy of the full variable set h_N."""
        return float(self.values[-1])

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def scaled(self, a: float) -> "EntropyVector":
        return EntropyVector(self.n, self.values * a, self.note)


def _as_grid(p: JointPmf) -> np.ndarray:
    # C-order view with axis k holding variable n-k, so that x1 varies fastest
    return p.mass.reshape(tuple(reversed(p.spec.sizes)))


def marginalize(p: JointPmf, mask: SubsetIndex) -> np.ndarray:
    """Marginal pmf of the variables in ``mask``.

    The result is a flat vector over the kept variables in increasing
    variable order, using the same little-endian mixed-radix encoding as
    the joint mass.
    """
    n = p.spec.n
    if not 1 <= mask <= full_mask(n):
        raise InvalidArgumentError(f"subset mask {mask} must be nonempty and within {{1..{n}}}")
    if mask == full_mask(n):
        return p.mass.copy()
    grid = _as_grid(p)
    drop = tuple(k for k in range(n) if not (mask >> (n - 1 - k)) & 1)
    return np.ascontiguousarray(grid.sum(axis=drop)).ravel()


def shannon_entropy(mass) -> float:
    """Shannon entropy in bits of a probability vector.

    Accepts masses with tiny negative noise (>= -1e-15, clamped to 0) and
    requires the total to be within 1e-6 of 1.
    """
    mass = np.asarray(mass, dtype=np.float64).ravel()
    lowest = mass.min() if mass.size else 0.0
    if lowest < -NEGATIVE_MASS_CLAMP:
        raise InvalidDistributionError(f"negative mass {lowest} below clamp threshold")
    total = float(mass.sum())
    if abs(total - 1.0) > ENTROPY_SUM_ATOL:
        raise InvalidDistributionError(f"mass sums to {total!r}, not a distribution")
    pos = mass[mass > ZERO_MASS_CUTOFF]
    return float(-(pos * np.log2(pos)).sum())


def entropy_vector(p: JointPmf) -> EntropyVector:
    """Entropies of every nonempty subset of variables, canonical order."""
    n = p.spec.n
    out = np.empty((1 << n) - 1)
    for mask in subset_masks(n):
        out[mask - 1] = shannon_entropy(marginalize(p, mask))
    return EntropyVector(n, out)


def total_variation(p: JointPmf, q: JointPmf) -> float:
    """Perturbation size between two pmfs on the same alphabet: sum |p - q|."""
    if p.spec != q.spec:
        raise InvalidArgumentError(f"alphabet mismatch: {p.spec.sizes} vs {q.spec.sizes}")
    return float(np.abs(p.mass - q.mass).sum())


def perturb_two_point(p: JointPmf, i: int, j: int, lam: float) -> JointPmf:
    """Redistribute the mass of cells ``i`` and ``j``: p'(i) = lam * (p(i)+p(j)).

    The complementary cell receives the exact remainder of the pair mass,
    so the total stays put to the last ulp.  All other cells are copied
    unchanged.
    """
    c = p.spec.num_cells
    if not (0 <= i < c and 0 <= j < c):
        raise InvalidArgumentError(f"cell indices ({i}, {j}) out of range for {c} cells")
    if i == j:
        raise InvalidArgumentError("perturbation cells must be distinct")
    if not 0.0 <= lam <= 1.0:
        raise InvalidArgumentError(f"lambda must be in [0, 1], got {lam}")
    mass = p.mass.copy()
    pair = mass[i] + mass[j]
    mass[i] = lam * pair
    mass[j] = pair - mass[i]
    return JointPmf(p.spec, mass)
