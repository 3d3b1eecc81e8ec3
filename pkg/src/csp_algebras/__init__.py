"""Constraint satisfaction over templates induced by collections of algebras."""

from .algebra import (Algebra, AlgebraCollection, AlgebraMap, align_to_collection,
                      endo_first_kind,
                      endo_second_kind, gamma_B, lift_outer, minv_member, rho_B, trace,
                      trace_arity)
from .bwwitness import (apply_endos, bounded_width_witness, build_w_terms,
                        find_bulatov_ops, verify_witness)
from .clone import (MultiSortedOp, OpTable, check_identity, enumerate_polymorphisms,
                    pp_closure, preserves)
from .errors import (ContractError, CSPError, GuardExceeded, NonCosetError, NotFoundError,
                     ParseError, PremiseError, SignatureError)
from .estimators import BoundedWidthWitness, InducedTemplate, WeakRelaxationSolver
from .liftred import (from_prototype, lifted_language, reduce_strong, reduce_to_union,
                      to_prototype)
from .relax import (build_M, check_trace_pp, green_cohen_collection, weak_relax_pipeline,
                    witness_lifted_hom)
from .relcore import (DomainTable, Instance, Relation, Template, check_homomorphism,
                      power_relation, project)
from .solver import gac_preprocess, is_satisfiable, solve

__all__ = [name for name, obj in list(globals().items())
           if not name.startswith("_") and not isinstance(obj, type(__import__("sys")))]
