"""Estimator-style wrappers over the pipelines.

A template plays the role of training data: ``fit`` takes a template and
``predict`` or ``transform`` take instances or nothing at all.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .algebra import align_to_collection, gamma_B
from .bwwitness import bounded_width_witness
from .relax import build_M, weak_relax_pipeline
from .validation import check_collection, check_instance, check_template


def _elements(template):
    return sorted({a for d in template.domains for a in template.domains.elements(d)})


class WeakRelaxationSolver(BaseEstimator):
    """Solve instances of a fixed template through the induced relaxation.

    ``predict`` returns one assignment (or None) per instance.
    """

    def __init__(self, collection=None, relaxed_route="direct", lifted_solver=None,
                 consistency="gac"):
        self.collection = collection
        self.relaxed_route = relaxed_route
        self.lifted_solver = lifted_solver
        self.consistency = consistency

    def fit(self, template, y=None):
        self.template_ = check_template(template)
        coll = self.collection if self.collection is not None else build_M(_elements(template))
        self.collection_ = check_collection(coll)
        return self

    def solve(self, instance):
        """The full outcome for one instance, transcript included."""
        check_is_fitted(self, "template_")
        check_instance(instance, self.template_)
        return weak_relax_pipeline(instance, self.template_, self.collection_,
                                   relaxed_route=self.relaxed_route,
                                   lifted_solver=self.lifted_solver,
                                   consistency=self.consistency)

    def predict(self, instances):
        check_is_fitted(self, "template_")
        return [self.solve(inst).solution for inst in instances]


class InducedTemplate(TransformerMixin, BaseEstimator):
    """Map templates to the template they induce over a collection.

    Domains are matched to collection domains by their elements.
    """

    def __init__(self, collection=None):
        self.collection = collection

    def fit(self, template, y=None):
        self.collection_ = check_collection(
            self.collection if self.collection is not None
            else build_M(_elements(check_template(template))))
        return self

    def transform(self, template):
        check_is_fitted(self, "collection_")
        aligned, _ = align_to_collection(check_template(template), self.collection_)
        return gamma_B(aligned, self.collection_)


class BoundedWidthWitness(BaseEstimator):
    """Find and verify a bounded-width witness for a template over M."""

    def __init__(self, n_max=6):
        self.n_max = n_max

    def fit(self, template, y=None):
        check_template(template)
        if self.n_max < 3:
            raise ValueError("n_max must be at least 3")
        coloring, simp, report = bounded_width_witness(template, range(3, self.n_max + 1))
        self.coloring_ = coloring
        self.simplification_ = simp
        self.report_ = report
        return self

    def predict(self, X=None):
        """True when every checked arity passed."""
        check_is_fitted(self, "report_")
        return bool(self.report_)
