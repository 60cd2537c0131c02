from .measure import WeightedMeasure, build_measure, density_values
from .fields import ScalarField, make_field, get_function, function_names, field_from_values
from .sampling import SampledManifold, sample_manifold, neighbour_pairs, edge_lengths, build_atlas, DEFAULT_K
from .distances import graph_distance, local_distances, distance_rows, ball
from .lipschitz import lip_global, lip_a_est, lip_pointwise_est, lipa_scale_sweep, edge_slopes
from .extension import McShaneExtension, mcshane_extend, check_lipschitz
