from .norms import (
    MinkowskiNorm,
    FAMILIES,
    eval_norm,
    euclidean,
    weighted_lp,
    quartic_blend,
    custom_table,
    quartic_blend_value,
    quartic_blend_grad_half_sq,
)
from .duality import (
    DualNormResult,
    dual_norm,
    dual_norm_ascent,
    dual_norm_newton,
    closed_form_dual,
    dual_table_norm,
    unit_directions,
)
from .validation import (
    ConvexityReport,
    Violation,
    validate_minkowski,
    parallelogram_defect,
    recover_gram,
    is_inner_product,
    inner_product_norm,
    equivalence_constant,
)
from .registry import get_norm, norm_names
