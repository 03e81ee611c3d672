"""caplab: cap functions, Fourier decay of arclength measures, and lacunary
maximal averages over convex planar curves, probed numerically."""

from .body import (
    Cap,
    ConvexBody,
    CoveringReport,
    box_count,
    circle,
    codim_fit,
    ellipse,
    flat_spot_body,
    support_function_body,
)
from .criterion import (
    CriterionReport,
    cap_integral,
    cap_weight,
    classify,
    classify_multi,
    l2_decision,
    lq_functional,
)
from .curve import (
    ExpFlatCurve,
    GraphCurve,
    IterExpFlatCurve,
    PartitionTable,
    PowerCurve,
    TabulatedCurve,
    partition,
    partition_weight_scan,
)
from .grid import (
    Field2D,
    SpectralProjector,
    along_curve_max,
    band_project,
    dilated_average,
    hyperbolic_growth,
    hyperbolic_max,
    lacunary_max,
    load_field,
    opnorm_lower,
    random_bandlimited,
    save_field,
    square_function,
    strip_spec,
    strip_test,
)
from .oscint import (
    LocalCurve,
    OscIntegralResult,
    band_multiplier,
    boundary_ft,
    ft_cap_ratio,
    ft_ratio_sweep,
    mollifier_square_sum,
    multiplier,
    multiplier_decay_scan,
    multiplier_dyadic,
    shell_sup,
)

__version__ = "0.1.0"
