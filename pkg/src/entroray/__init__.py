"""Entropy-vector geometry and randomized nearest-ray search.

Searches for finite-alphabet joint distributions whose subset-entropy
vectors are nearest (in normalized ray distance) to a target ray, with
Ingleton-score and violation-index objectives, hyperplane-guided and
waypointed variants, grid-based inner-bound ray generation, and a
fixture harness anchoring the numerics to published reference values.
"""

from .core import (AlphabetSpec, EntropyVector, JointPmf, SubsetIndex,
                   entropy_vector, full_mask, marginalize, mask_from_vars,
                   mask_label, mask_vars, perturb_two_point, shannon_entropy,
                   subset_masks, total_variation)
from .data import (FOUR_ATOM_BETA, FixtureCheck, emit_trace_csv, fc_hyperplanes,
                   fixture_path, fixtures_dir, four_atom_pmf,
                   gamma4_extreme_rays, load_fixture_pmf, load_fixture_rays,
                   load_ray_table, load_sparse_pmf, pyramid_rays, run_record,
                   vamos_permutations, verify_fixtures, write_ray_table,
                   write_run_records, write_sparse_pmf)
from .errors import (DegenerateInputError, EntrorayError, InvalidArgumentError,
                     InvalidDistributionError, ParseError,
                     UndefinedDistanceError)
from .geometry import (Hyperplane, PolymatroidReport, RaySet, apply_linear_map,
                       centroid_ray, elemental_forms, hyperplane_score,
                       hyperplane_through, hyperplanes_leave_one_out,
                       ingleton_delta, ingleton_delta_all_pairs, ingleton_score,
                       is_polymatroid, min_ingleton_score, normalized_distance,
                       permute_variables, ray_projection, tighten,
                       violation_index)
from .inner_bounds import (filter_ingleton_violating, generate_grid,
                           nearest_points_for_rayset)
from .search import (JobError, SearchConfig, SearchJob, SearchOutcome,
                     TraceEntry, batch_run, count_improving_proposals,
                     derive_centroid_start, hyperplane_guided_search,
                     nearest_point_search, objective_search, run_search,
                     waypoint_search)

__version__ = "0.1.0"

__all__ = [
    "AlphabetSpec", "EntropyVector", "JointPmf", "SubsetIndex",
    "entropy_vector", "marginalize", "shannon_entropy", "total_variation",
    "perturb_two_point", "subset_masks", "mask_vars", "mask_from_vars",
    "mask_label", "full_mask",
    "Hyperplane", "RaySet", "PolymatroidReport", "ray_projection",
    "normalized_distance", "is_polymatroid", "elemental_forms",
    "ingleton_delta", "ingleton_delta_all_pairs", "ingleton_score",
    "min_ingleton_score", "violation_index", "hyperplane_score",
    "hyperplane_through", "hyperplanes_leave_one_out", "tighten",
    "centroid_ray", "permute_variables", "apply_linear_map",
    "SearchConfig", "SearchOutcome", "SearchJob", "JobError", "TraceEntry",
    "nearest_point_search", "objective_search", "hyperplane_guided_search",
    "waypoint_search", "batch_run", "run_search", "derive_centroid_start",
    "count_improving_proposals",
    "generate_grid", "filter_ingleton_violating", "nearest_points_for_rayset",
    "load_sparse_pmf", "write_sparse_pmf", "load_ray_table", "write_ray_table",
    "write_run_records", "run_record", "emit_trace_csv", "verify_fixtures",
    "FixtureCheck", "fixtures_dir", "fixture_path", "load_fixture_pmf",
    "load_fixture_rays", "pyramid_rays", "fc_hyperplanes", "four_atom_pmf",
    "FOUR_ATOM_BETA", "vamos_permutations", "gamma4_extreme_rays",
    "EntrorayError", "InvalidArgumentError", "InvalidDistributionError",
    "UndefinedDistanceError", "DegenerateInputError", "ParseError",
]
