"""Input checks shared by the estimator layer and the command line."""

from __future__ import annotations

from .algebra import AlgebraCollection
from .errors import SignatureError
from .relcore import Instance, Template


def check_template(template) -> Template:
    if not isinstance(template, Template):
        raise TypeError(f"expected a Template, got {type(template).__name__}")
    if not template.relations:
        raise ValueError("template has no relations")
    return template


def check_instance(instance, template: Template | None = None) -> Instance:
    """Type check, plus arity and sort checks when a template is given."""
    if not isinstance(instance, Instance):
        raise TypeError(f"expected an Instance, got {type(instance).__name__}")
    if template is not None:
        instance.check_against(template)
    return instance


def check_collection(coll, template: Template | None = None) -> AlgebraCollection:
    """Type check; with a template, every template domain needs an algebra."""
    if not isinstance(coll, AlgebraCollection):
        raise TypeError(f"expected an AlgebraCollection, got {type(coll).__name__}")
    if template is not None:
        for dom in template.domains:
            elems = template.domains.elements(dom)
            if not any(coll.domains.elements(d) == elems for d in coll.domain_ids):
                raise SignatureError(f"no algebras over the elements of domain {dom}")
    return coll
