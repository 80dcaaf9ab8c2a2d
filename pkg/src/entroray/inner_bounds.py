"""Grid generation inside the Ingleton pyramid and violation filtering.

For four variables the polymatroid cone splits into the cone satisfying
all six Ingleton inequalities and six congruent "pyramids" on which one
Ingleton expression goes negative.  The (3,4)-pyramid is spanned by the
Vamos ray (apex) and 14 base rays lying on the Ingleton hyperplane; the
grids G_k seed inner-bound searches with conic combinations

    G_1 = {apex} + base rays,     G_k = {apex + sum of k-1 distinct base rays}.

Entropic points found near Ingleton-violating grid rays extend the
conic hull beyond what group-representable constructions reach; the ray
sets emitted here are meant to be fed to external polytope tooling for
hull and volume computations, which this package does not perform.
"""

from __future__ import annotations

import dataclasses
import itertools

import numpy as np

from .core import EntropyVector
from .errors import InvalidArgumentError
from .geometry import RaySet, ingleton_delta_all_pairs
from .search import JobError, SearchConfig, SearchJob, SearchOutcome, batch_run

DEDUP_TOL = 1e-9
GRID_LEVELS = (1, 2, 3, 4, 5)


def _dedup(rows, labels):
    """Drop rays that duplicate an earlier one up to positive scaling."""
    kept_rows, kept_labels, kept_units = [], [], []
    for row, lab in zip(rows, labels):
        unit = row / np.linalg.norm(row)
        dup = any(np.max(np.abs(unit - u)) <= DEDUP_TOL for u in kept_units)
        if not dup:
            kept_rows.append(row)
            kept_labels.append(lab)
            kept_units.append(unit)
    return kept_rows, kept_labels


def generate_grid(vamos: EntropyVector, base: RaySet, level: int) -> RaySet:
    """Grid rays at the given level.

    Level 1 is the apex plus the base rays themselves; level k >= 2 takes
    the apex plus every sum of k-1 distinct base rays, so the raw counts
    are 15, 14, C(14,2)=91, C(14,3)=364, C(14,4)=1001 before removing
    duplicates (distinct extreme rays produce none, but degenerate user
    input must not crash).
    """
    if level not in GRID_LEVELS:
        raise InvalidArgumentError(f"grid level must be in {GRID_LEVELS}, got {level}")
    if len(base) != 14:
        raise InvalidArgumentError(f"need exactly 14 base rays, got {len(base)}")
    if vamos.n != base.n:
        raise InvalidArgumentError("apex and base rays disagree on variable count")
    if not np.any(vamos.values):
        raise InvalidArgumentError("apex ray must be nonzero")
    if level == 1:
        rows = [vamos.values] + [r.values for r in base.rays]
        labels = ["G1:v"] + [f"G1:{lab}" for lab in base.labels]
    else:
        rows, labels = [], []
        for combo in itertools.combinations(range(14), level - 1):
            rows.append(vamos.values + sum(base.rays[k].values for k in combo))
            labels.append("G%d:v+%s" % (level, "+".join(base.labels[k] for k in combo)))
    rows, labels = _dedup(rows, labels)
    return RaySet.from_arrays(base.n, rows, labels)


def filter_ingleton_violating(points: RaySet, tol: float = 0.0) -> RaySet:
    """Keep exactly the rays whose minimal Ingleton expression is < -tol."""
    if points.n != 4:
        raise InvalidArgumentError("Ingleton filtering is defined for n=4")
    keep = [(lab, r) for lab, r in points
            if min(ingleton_delta_all_pairs(r).values()) < -tol]
    return RaySet(points.n,
                  tuple(r for _, r in keep),
                  tuple(lab for lab, _ in keep))


def nearest_points_for_rayset(targets: RaySet, start, template: SearchConfig,
                              master_seed: int, parallelism: int = 1,
                              ) -> tuple[RaySet, list[SearchOutcome | JobError]]:
    """One seeded distance search per target ray.

    Job k targets ray k from the common ``start`` distribution with the
    template's parameters and the stream derived from (master_seed, k).
    Returns the found entropy vectors as a ray set (labels
    ``near:<target label>``, failed jobs omitted) together with the full
    outcome list aligned with the input order.
    """
    jobs = []
    for ray in targets.rays:
        cfg = dataclasses.replace(template, objective="dnorm", target=ray,
                                  waypoints=None, waypoint_deltas=None)
        jobs.append(SearchJob(start, cfg))
    results = batch_run(jobs, master_seed, parallelism)
    rows, labels = [], []
    for lab, res in zip(targets.labels, results):
        if isinstance(res, SearchOutcome):
            rows.append(res.final_h.values)
            labels.append(f"near:{lab}")
    found = RaySet.from_arrays(targets.n, rows, labels) if rows else RaySet(targets.n, (), ())
    return found, results
