from .cover import CoverData, build_cover, cover_from_charts, admissible_radius, OVERLAP_CAP
from .partition import PartitionOfUnity, build_partition, bump, BUMP_SLOPE
from .mollify import MollifiedFunction, mollify, kernel_stencil, keys_kernel
from .approximate import (ChartFunction, ChartPlan, SmoothingPlan, SmoothedFunction, SmoothingReport,
                          smooth_approximate, build_smoothing, audit_smoothing, choose_scale, chart_function,
                          CSV_HEADER)
