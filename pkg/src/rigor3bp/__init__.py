"""Validated numerics for a computer assisted proof in the planar circular
restricted three body problem: interval arithmetic, a Lohner type Taylor
integrator, rigorous Poincare maps, h-sets and covering relations, and a
pipeline that re-checks every covering relation of the proof.
"""

from .covering import (
    CheckParams,
    CoveringVerdict,
    LinearMap,
    Orientation,
    PoincareSectionMap,
    Stage,
    Status,
    check_covering_backward,
    check_covering_direct,
    check_covering_fuzzy,
    check_hyperbolicity,
    check_unique_fixed_point,
)
from .data import ProofData, Relation, proof_data, relations
from .errors import DomainFailure, NonTransversal, Rigor3bpError
from .hset import Edge, FuzzyHSet, HSet, Location, is_r_symmetric, parse_hset, r_action
from .interval import Interval, dec
from .model import Branch, SystemParams, jacobi, lift, sym_r, vector_field
from .pipeline import (
    LemmaReport,
    ProofRun,
    RunConfig,
    TransitionGraph,
    assemble_certificate,
    verify_dp_enclosures,
    verify_exterior_chain,
    verify_heteroclinic_chain,
    verify_hyperbolic_coverings,
    verify_interior_chain,
    verify_lyapunov,
)
from .poincare import MapKind, PlanarSet, poincare_batch

__version__ = "0.1.0"

__all__ = [
    "Interval", "dec", "Branch", "SystemParams", "jacobi", "lift", "sym_r", "vector_field",
    "MapKind", "PlanarSet", "poincare_batch", "HSet", "FuzzyHSet", "Edge", "Location", "parse_hset", "r_action",
    "is_r_symmetric", "Stage", "CheckParams", "CoveringVerdict", "Status", "Orientation", "LinearMap",
    "PoincareSectionMap", "check_covering_direct", "check_covering_backward", "check_covering_fuzzy",
    "check_hyperbolicity", "check_unique_fixed_point", "ProofData", "Relation", "proof_data", "relations",
    "RunConfig", "ProofRun", "LemmaReport", "TransitionGraph", "verify_lyapunov", "verify_dp_enclosures",
    "verify_hyperbolic_coverings", "verify_heteroclinic_chain", "verify_exterior_chain", "verify_interior_chain",
    "assemble_certificate", "Rigor3bpError", "DomainFailure", "NonTransversal",
]
