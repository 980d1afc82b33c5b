"""raycut: template-driven ray-graph min-cut segmentation.

A seed point inside the object spawns a fan of rays through a normalized
template shape; graph nodes are spaced along each ray in proportion to the
template's boundary distance, an s-t min cut picks one boundary index per
ray, and the cut is reconstructed into a contour/mesh and a binary mask.
"""

from ._accel import USING_NUMBA
from .cost import CostParams, estimate_average, node_cost, sample_intensity
from .errors import *  # noqa: F401,F403 (stable error names are part of the API)
from .field import ScalarField
from .geometry import (RayFan, TemplateShape, builtin_template, cast_rays,
                       circle_template, close_contour, icosphere_template,
                       load_tpl, normalize_template, parse_tpl,
                       ray_segment_intersect, ray_triangle_intersect,
                       save_tpl, square_template, star_template)
from .graph import RayGraph, build_ray_graph
from .io import PhantomSpec, make_phantom, read_image_2d, read_volume
from .metrics import EvalReport, dice, evaluate_pair, summarize
from .mincut import CutResult, FlowNetwork, brute_force_min_cut, max_flow
from .pipeline import (SegmentConfig, SegmentationResult, iterate_seed,
                       segment, voxelize)
from .shapemodel import (ShapeModel, align_shapes, estimate_delta, fit_pca,
                         project, synthesize)

__version__ = "0.1.0"
