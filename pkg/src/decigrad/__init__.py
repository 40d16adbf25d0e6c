"""Path attributions for small numpy networks.

Integrated gradients, Left-IG and importance-weighted gradient integration
on uniform or adaptive alpha grids, with perturbation metrics and the
Riemann-error experiments built on top.
"""

from .attribution import AttributionMap, gradient_map, idg_uniform, integrated_gradients, left_ig, normalize_for_display
from .experiments import ablation_nm, approx_error, error_curve, saturation_report
from .methods import METHODS, attribute
from .metrics import MetricConfig, deletion_curve, evaluate_batch, insertion_curve
from .nn import Network, forward, grad_input
from .path import StraightLinePath, decision_region, importance_factor, logit_curve
from .sampling import ASConfig, idg_adaptive, ig_adaptive

__version__ = "0.1.0"

__all__ = [
    "AttributionMap",
    "ASConfig",
    "MetricConfig",
    "METHODS",
    "Network",
    "StraightLinePath",
    "ablation_nm",
    "approx_error",
    "attribute",
    "decision_region",
    "deletion_curve",
    "error_curve",
    "evaluate_batch",
    "forward",
    "grad_input",
    "gradient_map",
    "idg_adaptive",
    "idg_uniform",
    "ig_adaptive",
    "importance_factor",
    "insertion_curve",
    "integrated_gradients",
    "left_ig",
    "logit_curve",
    "normalize_for_display",
    "saturation_report",
]
