"""LP solver, convex hulls, ICHM projection, link envelopes and mesh export"""
from reachspan.polytope.hull import Polytope, contains, convex_hull, hull_union, volume
from reachspan.polytope.ichm import ichm
from reachspan.polytope.links import LinkEnvelope, link_reachable
from reachspan.polytope.lp import LPResult, LPStatus, solve_lp
from reachspan.polytope.mesh import export_mesh, load_polytope_json

__all__ = [
    "LPResult",
    "LPStatus",
    "LinkEnvelope",
    "Polytope",
    "contains",
    "convex_hull",
    "export_mesh",
    "hull_union",
    "ichm",
    "link_reachable",
    "load_polytope_json",
    "solve_lp",
    "volume",
]
