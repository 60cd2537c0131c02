from .dual import DualFunctional
from .instance import (
    QuotientInstance,
    make_instance,
    instance_from_dict,
    random_instance,
    random_instances,
    INSTANCE_FAMILIES,
)
from .solvers import LiftResult, SupportResult, minimal_lift_solve, quotient_support, certificate
from .projection import QuotientElement, VectorResult, project_P, minimal_lift, iota_embed, abstract_norm
from .batch import (
    CSV_HEADER,
    run_batch,
    evaluate_instance,
    load_instances,
    default_batch,
    batch_summary,
    csv_rows,
)
