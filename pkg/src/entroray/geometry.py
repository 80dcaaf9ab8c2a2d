"""Ray geometry of entropy space.

Rays, normalized (tangent) distance, the polymatroid axioms in elemental
form, the four-variable Ingleton functionals, hyperplanes through the
origin, the tight/modular decomposition, and centroid rays.

A "ray" E_h = {a*h : a > 0} is represented by any of its points, stored
as an :class:`~entroray.core.EntropyVector`.  The normalized distance

    d_norm(x, y) = ||x - y'|| / ||y'||,   y' = projection of x onto E_y,

equals tan(theta) for the angle theta between the two rays, so it is
symmetric and invariant under positive rescaling of either argument.  It
is undefined when x . y <= 0; polymatroids never trigger that case.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .core import EntropyVector, full_mask, mask_from_vars, mask_label, mask_vars
from .errors import DegenerateInputError, InvalidArgumentError, UndefinedDistanceError

RANK_RTOL = 1e-8
ORTHOGONALITY_RTOL = 1e-15
POLYMATROID_TOL = 1e-9
INGLETON_PAIR_DEFAULT = (3, 4)


@dataclass(frozen=True)
class Hyperplane:
    """Hyperplane through the origin, {h : sum_a g_a * h_a = 0}.

    ``g`` holds one coefficient per nonempty subset in canonical order.
    Hyperplanes constructed by :func:`hyperplane_through` are normalized
    so that the first coefficient of largest magnitude equals -1;
    hyperplanes loaded from coefficient tables keep the file's scaling,
    because the (scale-dependent) incidence values g . h of published
    tables are only reproducible at the published scale.
    """

    n: int
    g: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=np.float64)
        if g.shape != ((1 << self.n) - 1,):
            raise InvalidArgumentError(
                f"hyperplane for n={self.n} needs {(1 << self.n) - 1} coefficients")
        if not np.all(np.isfinite(g)):
            raise InvalidArgumentError("hyperplane coefficients must be finite")
        if not np.any(g):
            raise InvalidArgumentError("hyperplane coefficient vector must be nonzero")
        g = g.copy()
        g.flags.writeable = False
        object.__setattr__(self, "g", g)

    @classmethod
    def from_values(cls, values) -> "Hyperplane":
        values = np.asarray(values, dtype=np.float64)
        n = int(values.size + 1).bit_length() - 1
        if (1 << n) - 1 != values.size:
            raise InvalidArgumentError(f"length {values.size} is not 2**n - 1 for any n")
        return cls(n, values)

    def normalized(self) -> "Hyperplane":
        """Rescale so the first coefficient of largest magnitude is -1."""
        a = np.abs(self.g)
        k = int(np.argmax(a >= a.max() * (1.0 - 1e-12)))
        return Hyperplane(self.n, -self.g / self.g[k])

    def incidence(self, h: EntropyVector) -> float:
        """Raw inner product sum_a g_a * h_a (zero iff h lies on the plane)."""
        return float(self.g @ h.values)


@dataclass(frozen=True)
class RaySet:
    """Ordered, labelled collection of rays with a common variable count."""

    n: int
    rays: tuple[EntropyVector, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        rays = tuple(self.rays)
        labels = tuple(str(s) for s in self.labels)
        if len(rays) != len(labels):
            raise InvalidArgumentError(
                f"{len(rays)} rays but {len(labels)} labels")
        if len(set(labels)) != len(labels):
            raise InvalidArgumentError("ray labels must be unique")
        for lab, r in zip(labels, rays):
            if r.n != self.n:
                raise InvalidArgumentError(f"ray {lab!r} has n={r.n}, expected {self.n}")
            if not np.any(r.values):
                raise InvalidArgumentError(f"ray {lab!r} is the zero vector")
        object.__setattr__(self, "rays", rays)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_arrays(cls, n: int, rows, labels) -> "RaySet":
        return cls(n, tuple(EntropyVector(n, np.asarray(r)) for r in rows), tuple(labels))

    def __len__(self) -> int:
        return len(self.rays)

    def __iter__(self):
        return iter(zip(self.labels, self.rays))

    def get(self, label: str) -> EntropyVector:
        try:
            return self.rays[self.labels.index(label)]
        except ValueError:
            raise InvalidArgumentError(f"no ray labelled {label!r}") from None

    def matrix(self) -> np.ndarray:
        return np.array([r.values for r in self.rays])

    def subset(self, labels) -> "RaySet":
        labels = tuple(labels)
        return RaySet(self.n, tuple(self.get(lab) for lab in labels), labels)


def _check_vectors(x: EntropyVector, y: EntropyVector):
    if x.n != y.n:
        raise InvalidArgumentError(f"variable counts differ: {x.n} vs {y.n}")
    nx = x.norm()
    ny = y.norm()
    if nx == 0.0 or ny == 0.0:
        raise InvalidArgumentError("ray distance needs nonzero vectors")
    dot = float(x.values @ y.values)
    if dot <= ORTHOGONALITY_RTOL * nx * ny:
        raise UndefinedDistanceError(
            f"normalized distance undefined: inner product {dot} is not positive")
    return dot


def ray_projection(x: EntropyVector, y: EntropyVector) -> tuple[float, EntropyVector]:
    """Closest point to ``x`` on the open ray E_y.

    Returns the scale a* = (x.y)/(y.y) > 0 and the projected point a* y.
    """
    dot = _check_vectors(x, y)
    a = dot / float(y.values @ y.values)
    return a, EntropyVector(y.n, a * y.values)


def normalized_distance(x: EntropyVector, y: EntropyVector) -> float:
    """Tangent-of-angle distance between the rays E_x and E_y."""
    _check_vectors(x, y)
    a = float(x.values @ y.values) / float(y.values @ y.values)
    yp = a * y.values
    return float(np.linalg.norm(x.values - yp) / np.linalg.norm(yp))


def elemental_forms(n: int):
    """Elemental Shannon inequalities as (label, coefficient vector) pairs.

    Monotonicity elementals h_N - h_{N minus i} >= 0 and conditional
    mutual informations I(i;j|K) >= 0 for i < j, K inside N minus {i,j}.
    Together they imply every Shannon-type inequality.
    """
    forms = []
    fm = full_mask(n)
    for i in range(1, n + 1):
        vec = np.zeros((1 << n) - 1)
        vec[fm - 1] += 1.0
        vec[(fm ^ (1 << (i - 1))) - 1] -= 1.0
        forms.append((f"H(N)-H(N\\{i})", vec))
    for i, j in itertools.combinations(range(1, n + 1), 2):
        rest = [v for v in range(1, n + 1) if v not in (i, j)]
        for r in range(len(rest) + 1):
            for ks in itertools.combinations(rest, r):
                kmask = mask_from_vars(ks) if ks else 0
                vec = np.zeros((1 << n) - 1)
                vec[(kmask | (1 << (i - 1))) - 1] += 1.0
                vec[(kmask | (1 << (j - 1))) - 1] += 1.0
                if kmask:
                    vec[kmask - 1] -= 1.0
                vec[(kmask | (1 << (i - 1)) | (1 << (j - 1))) - 1] -= 1.0
                cond = f"|{mask_label(kmask)}" if kmask else ""
                forms.append((f"I({i};{j}{cond})", vec))
    return forms


@dataclass(frozen=True)
class PolymatroidReport:
    """Outcome of the elemental Shannon-inequality check; truthy iff clean."""

    ok: bool
    tol: float
    violations: tuple[tuple[str, float], ...] = field(default=())

    def __bool__(self) -> bool:
        return self.ok


def is_polymatroid(h: EntropyVector, tol: float = POLYMATROID_TOL) -> PolymatroidReport:
    """Check the elemental monotonicity/submodularity forms with slack >= -tol."""
    bad = []
    for label, vec in elemental_forms(h.n):
        slack = float(vec @ h.values)
        if slack < -tol:
            bad.append((label, slack))
    return PolymatroidReport(not bad, tol, tuple(bad))


def _check_pair(pair) -> tuple[int, int]:
    i, j = pair
    if not (1 <= i <= 4 and 1 <= j <= 4 and i != j):
        raise InvalidArgumentError(f"conditioning pair must be two distinct of 1..4, got {pair}")
    return (min(i, j), max(i, j))


def ingleton_delta(h: EntropyVector, pair=INGLETON_PAIR_DEFAULT) -> float:
    """Ingleton expression with ``pair`` in the conditioning role.

    For the default pair (3, 4):

        h12 + h13 + h23 + h14 + h24 - h1 - h2 - h123 - h124 - h34.

    The inequality delta >= 0 holds for every group-representable point;
    a negative value certifies Ingleton violation.
    """
    if h.n != 4:
        raise InvalidArgumentError(f"Ingleton functionals are defined for n=4, got n={h.n}")
    k, l = _check_pair(pair)
    i, j = sorted(set((1, 2, 3, 4)) - {k, l})
    m = mask_from_vars
    return float(
        h[m((i, j))] + h[m((i, k))] + h[m((j, k))] + h[m((i, l))] + h[m((j, l))]
        - h[m((i,))] - h[m((j,))] - h[m((i, j, k))] - h[m((i, j, l))] - h[m((k, l))])


def ingleton_delta_all_pairs(h: EntropyVector) -> dict[tuple[int, int], float]:
    """The six Ingleton expressions keyed by conditioning pair."""
    return {p: ingleton_delta(h, p) for p in itertools.combinations((1, 2, 3, 4), 2)}


def ingleton_score(h: EntropyVector, pair=INGLETON_PAIR_DEFAULT) -> float:
    """Scale-invariant score delta_pair / h_N (h_N must be positive)."""
    if h.n != 4:
        raise InvalidArgumentError(f"Ingleton functionals are defined for n=4, got n={h.n}")
    hn = h.joint
    if hn <= 0.0:
        raise InvalidArgumentError(f"Ingleton score needs h_N > 0, got {hn}")
    return ingleton_delta(h, pair) / hn


def min_ingleton_score(h: EntropyVector) -> float:
    """Convenience minimum of the score over the six pairs (never a default)."""
    return min(ingleton_score(h, p) for p in itertools.combinations((1, 2, 3, 4), 2))


def violation_index(h: EntropyVector, pair=INGLETON_PAIR_DEFAULT) -> float:
    """Scale-invariant index -delta_pair / ||h|| (positive iff violating)."""
    nrm = h.norm()
    if nrm == 0.0:
        raise InvalidArgumentError("violation index needs a nonzero vector")
    return -ingleton_delta(h, pair) / nrm


def hyperplane_score(plane: Hyperplane, h: EntropyVector) -> float:
    """Incidence measure (g . h) / h_N; zero iff h lies on the plane."""
    if plane.n != h.n:
        raise InvalidArgumentError(f"variable counts differ: {plane.n} vs {h.n}")
    hn = h.joint
    if hn == 0.0:
        raise InvalidArgumentError("hyperplane score needs h_N != 0")
    return plane.incidence(h) / hn


def hyperplane_through(points) -> Hyperplane:
    """The unique hyperplane through the origin containing 2**n - 2 points.

    ``points`` must span a (2**n - 2)-dimensional subspace (rank checked
    with relative tolerance 1e-8); the coefficient vector spans the
    one-dimensional null space and is returned in normalized form.
    """
    rows = [p.values if isinstance(p, EntropyVector) else np.asarray(p, float) for p in points]
    A = np.array(rows, dtype=np.float64)
    m, d = A.shape
    if m != d - 1:
        raise InvalidArgumentError(
            f"need {d - 1} points to pin a hyperplane in {d} dimensions, got {m}")
    _, s, vt = np.linalg.svd(A)
    if s[m - 1] <= RANK_RTOL * s[0]:
        raise DegenerateInputError(
            f"points are rank deficient: smallest/largest singular value "
            f"{s[m - 1]:.3e}/{s[0]:.3e}")
    return Hyperplane.from_values(vt[d - 1]).normalized()


def hyperplanes_leave_one_out(rays: RaySet) -> list[tuple[str, Hyperplane]]:
    """For 2**n - 1 rays, the hyperplane through each (2**n - 2)-subset.

    Returns (dropped label, hyperplane) pairs in ray order.  Applied to a
    conic apex point plus the base rays of a pyramid this produces the
    full hyperplane description of the cone.
    """
    mat = rays.matrix()
    if len(rays) != mat.shape[1] - 1:
        raise InvalidArgumentError(
            f"need exactly {mat.shape[1] - 1} rays, got {len(rays)}")
    out = []
    for k, lab in enumerate(rays.labels):
        pts = np.delete(mat, k, axis=0)
        out.append((lab, hyperplane_through(pts)))
    return out


def tighten(h: EntropyVector) -> tuple[EntropyVector, EntropyVector]:
    """Split a polymatroid into modular + tight parts, h = h_mod + h_ti.

    The modular part has weights w_i = h_N - h_{N minus i}, summed over
    the subset; the remainder is tight: h_ti(N minus i) = h_ti(N) for
    every i.  Requires a polymatroid input (checked at 1e-9); outside the
    polymatroid cone the decomposition guarantees do not hold.
    """
    report = is_polymatroid(h)
    if not report:
        raise InvalidArgumentError(
            f"tighten needs a polymatroid; violated: {report.violations[:3]}")
    n = h.n
    fm = full_mask(n)
    w = np.array([h[fm] - h[fm ^ (1 << (i - 1))] for i in range(1, n + 1)])
    mod = np.empty((1 << n) - 1)
    for mask in range(1, 1 << n):
        mod[mask - 1] = sum(w[i] for i in range(n) if (mask >> i) & 1)
    h_mod = EntropyVector(n, mod, note="modular part")
    h_ti = EntropyVector(n, h.values - mod, note="tight part")
    return h_mod, h_ti


CENTROID_MODES = ("unit-norm", "last-coordinate-one")


def centroid_ray(rays: RaySet, normalization: str = "unit-norm") -> EntropyVector:
    """Mean of the rays' normalized representatives.

    ``unit-norm`` averages r/||r||; ``last-coordinate-one`` averages
    r/r_N (requires positive r_N).  The mode is recorded in the output's
    ``note`` field.
    """
    if normalization not in CENTROID_MODES:
        raise InvalidArgumentError(f"normalization must be one of {CENTROID_MODES}")
    if len(rays) == 0:
        raise InvalidArgumentError("centroid of an empty ray set")
    mat = rays.matrix()
    if normalization == "unit-norm":
        reps = mat / np.linalg.norm(mat, axis=1, keepdims=True)
    else:
        last = mat[:, -1]
        if np.any(last <= 0.0):
            raise InvalidArgumentError("last-coordinate-one mode needs positive h_N on every ray")
        reps = mat / last[:, None]
    return EntropyVector(rays.n, reps.mean(axis=0), note=f"centroid:{normalization}")


def permute_variables(h: EntropyVector, perm) -> EntropyVector:
    """Rename variable i to perm[i-1] (a permutation of 1..n).

    The returned vector g satisfies g_{perm(alpha)} = h_alpha for every
    subset alpha, i.e. it is the entropy vector of the relabelled
    variables.
    """
    perm = tuple(int(v) for v in perm)
    if sorted(perm) != list(range(1, h.n + 1)):
        raise InvalidArgumentError(f"perm must be a permutation of 1..{h.n}, got {perm}")
    out = np.empty_like(h.values)
    for mask in range(1, (1 << h.n)):
        new_mask = mask_from_vars(perm[v - 1] for v in mask_vars(mask))
        out[new_mask - 1] = h.values[mask - 1]
    return EntropyVector(h.n, out, note=h.note)


def apply_linear_map(h: EntropyVector, matrix) -> EntropyVector:
    """Apply a user-supplied linear map on entropy space (plug-in hook).

    The package ships no particular transformation; this exists so that
    externally defined maps on tight polymatroids can be composed with
    the functionals above.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    d = (1 << h.n) - 1
    if matrix.shape != (d, d):
        raise InvalidArgumentError(f"matrix must be {d}x{d}, got {matrix.shape}")
    return EntropyVector(h.n, matrix @ h.values, note="mapped")
