"""Magnetic Schrodinger operators on weighted graphs.

Operators (``d_sigma``, ``delta_sigma``, ``Delta_sigma``, ``H``), machine
checks of their identities and energy inequalities, the weighted path
metric with its cut-off families, and diagnostics for three essential
self-adjointness criteria.
"""

__version__ = "0.1.0"

from .exceptions import (EigensolverError, GraphParseError, GraphValidationError,
                         SingularSystemError, TruncationError)
from .graph import (Ball, MagneticGraph, OrientedEdge, ball, degree, graph_from_dict,
                    hop_distances, incident, load_graph, save_graph)
from .families import FAMILIES, gen_family, make_family
from .operators import (TruncatedOperator, assemble, d_plain, d_sigma, delta_sigma,
                        edge_value, indicator, inner_e, inner_v, laplacian_sigma,
                        norm_v, physical_laplacian, schrodinger, support, vertex_field)
from .metric import (CutoffFamily, MetricProfile, completeness_profile, dist,
                     edge_length, metric_ball, phi_n, psi_R)
from .identities import (CheckResult, HarmonicExtension, check_cutoff_energy_bound,
                         check_general_product_identity, check_ground_form_identity,
                         check_kato, check_leibniz, check_psi_energy_bound,
                         harmonic_extension)
from .criteria import (AssumptionASequence, FormBoundEstimate, assumption_a,
                       bounded_degree, form_bound, spectrum, theorem_report)
