import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from csp_algebras.errors import SignatureError
from csp_algebras.estimators import BoundedWidthWitness, InducedTemplate, WeakRelaxationSolver
from csp_algebras.relax import build_M, green_cohen_collection
from csp_algebras.relcore import Instance, Template
from csp_algebras.validation import check_collection, check_instance, check_template

from oracles import XOR0, XOR1, gf2_brute, xor_instance


def parity():
    return Template.single_sorted((0, 1), [XOR0, XOR1], ["x0", "x1"])


def test_params_round_trip():
    est = WeakRelaxationSolver(relaxed_route="union")
    assert est.get_params()["relaxed_route"] == "union"
    assert clone(est).get_params() == est.get_params()


def test_predict_requires_fit():
    with pytest.raises(NotFittedError):
        WeakRelaxationSolver().predict([])


def test_solver_predicts():
    eqs_sat = [((0, 1, 2), 1), ((1, 2, 3), 0)]
    eqs_unsat = [((0, 1, 2), 1), ((0, 1, 2), 0)]
    est = WeakRelaxationSolver().fit(parity())
    sat, unsat = est.predict([xor_instance(eqs_sat, 4), xor_instance(eqs_unsat, 4)])
    assert unsat is None
    assert tuple(sat[f"x{i}"] for i in range(4)) in gf2_brute(4, eqs_sat)


def test_solver_rejects_bad_instance():
    est = WeakRelaxationSolver().fit(parity())
    with pytest.raises(TypeError):
        est.solve("not an instance")


def test_induced_transformer():
    tr = InducedTemplate().fit(parity())
    out = tr.transform(parity())
    assert len(out.relations) == 2
    # mu on every coordinate preserves both parity relations
    mu = tr.collection_.by_name((0, 1), "mu")
    assert (mu, mu, mu) in out.relations[0]


def test_witness_estimator(xor_template):
    est = BoundedWidthWitness(n_max=4).fit(xor_template)
    assert est.predict() is True
    assert sorted(est.report_.per_arity) == [3, 4]
    with pytest.raises(ValueError):
        BoundedWidthWitness(n_max=2).fit(xor_template)


def test_validators(neq2):
    assert check_template(neq2) is neq2
    with pytest.raises(TypeError):
        check_template([])
    inst = Instance.from_constraints([(0, ("a", "b"))], 1)
    assert check_instance(inst, neq2) is inst
    check_collection(green_cohen_collection((0, 1)), neq2)
    check_collection(build_M((0, 1, 2)), neq2)
    with pytest.raises(SignatureError):
        check_collection(green_cohen_collection((0, 1, 2)), neq2)
