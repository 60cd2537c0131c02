from .fields import (CovectorField, VectorField, covector_field, vector_field, pairing, l2_norm,
                     cauchy_schwarz_audit, module_parallelogram_defect, dual_norms, sample_norms)
from .differential import pointwise_differential, differential_field, differential_components
from .wug import WugLadder, WugRung, wug_ladder, wug_estimate
from .hilbertian import (HilbertianityReport, hilbertianity_check, refinement_study, sandwich_audit, classify,
                         effective_support, VERDICTS, CSV_HEADER)
