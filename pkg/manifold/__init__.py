from .specs import (
    Manifold,
    EuclideanSpace,
    Sphere2,
    FlatTorus2,
    FinslerPlane,
    halton_points,
    fibonacci_sphere,
)
from .geodesics import (
    geodesic_shoot,
    geodesic_shoot_batch,
    exp_map,
    speed_profile,
    shooting_log,
    christoffel_symbols,
    rk4_integrate,
)
from .charts import ChartData, build_chart, bilipschitz_radius, chart_distortion, certified_chart
from .registry import manifold_from_dict, get_manifold, manifold_names, KINDS
