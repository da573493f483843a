import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hexeval import (
    PluginDescriptor,
    PluginRegistry,
    Verdict,
    ground_program,
    make_validator,
    minimize_nogood_deletion,
    minimize_nogood_quickxplain,
    parse_program,
)
from hexeval.errors import MinimizationError
from hexeval.interface import PREDICATE

from helpers import (
    CountingValidator,
    brute_force_minimal_nogoods,
    needle_plugin,
    synthetic_instance,
    table_plugin,
)

MINIMIZERS = {
    "deletion": minimize_nogood_deletion,
    "quickxplain": minimize_nogood_quickxplain,
}


def nonempty_plugin():
    """Nonemptiness of the first input; the second is read by nobody but
    still declared fully relevant, so its atoms show up in nogoods."""

    def oracle(query):
        view = query.extensions[0]
        if view.true_tuples():
            return Verdict.TRUE
        if not view.unassigned_tuples():
            return Verdict.FALSE
        return Verdict.UNKNOWN

    return PluginDescriptor(
        name="nonempty",
        input_signature=(PREDICATE, PREDICATE),
        output_arity=0,
        oracle=oracle,
    )


@pytest.fixture
def ignores_second_input():
    registry = PluginRegistry().register(nonempty_plugin())
    gp = ground_program(
        parse_program("p(a). q(a). q(b). r :- &nonempty[p,q]."), registry
    )
    inst = gp.externals[0]
    ids = {gp.table.text(a): a for a in inst.relevant_input_atoms}
    return registry, gp, inst, ids


class TestDeletion:
    def test_drops_ignored_input(self, ignores_second_input):
        registry, gp, inst, ids = ignores_second_input
        nogood = frozenset(
            {ids["p(a)"], ids["q(a)"], ids["q(b)"], -inst.replacement_id}
        )
        validator = make_validator(inst, registry, Verdict.TRUE)
        result = minimize_nogood_deletion(nogood, validator)
        assert result == frozenset({ids["p(a)"], -inst.replacement_id})
        assert result in brute_force_minimal_nogoods(nogood, validator)

    def test_already_minimal_unchanged(self, ignores_second_input):
        registry, gp, inst, ids = ignores_second_input
        nogood = frozenset({ids["p(a)"], -inst.replacement_id})
        validator = make_validator(inst, registry, Verdict.TRUE)
        assert minimize_nogood_deletion(nogood, validator) == nogood

    def test_all_inputs_irrelevant(self):
        registry = PluginRegistry().register(
            table_plugin("always", 3, lambda true_set: True)
        )
        inst = synthetic_instance("always", [1, 2, 3], 50)
        validator = make_validator(inst, registry, Verdict.TRUE)
        nogood = frozenset({1, -2, 3, -50})
        assert minimize_nogood_deletion(nogood, validator) == frozenset({-50})

    def test_invalid_input_rejected(self, ignores_second_input):
        registry, gp, inst, ids = ignores_second_input
        # claims verdict FALSE although p(a) is fixed true
        validator = make_validator(inst, registry, Verdict.FALSE)
        nogood = frozenset({ids["p(a)"], inst.replacement_id})
        with pytest.raises(MinimizationError):
            minimize_nogood_deletion(nogood, validator)

    def test_deletion_order_ascending_id(self):
        # two atoms, either alone suffices: ascending order keeps the larger
        registry = PluginRegistry().register(
            table_plugin("any", 2, lambda true_set: bool(true_set))
        )
        inst = synthetic_instance("any", [1, 2], 50)
        validator = make_validator(inst, registry, Verdict.TRUE)
        result = minimize_nogood_deletion(frozenset({1, 2, -50}), validator)
        assert result == frozenset({2, -50})


class TestQuickXplain:
    def test_finds_minimal(self, ignores_second_input):
        registry, gp, inst, ids = ignores_second_input
        nogood = frozenset(
            {ids["p(a)"], ids["q(a)"], ids["q(b)"], -inst.replacement_id}
        )
        validator = make_validator(inst, registry, Verdict.TRUE)
        result = minimize_nogood_quickxplain(nogood, validator)
        assert len(result) == 2
        assert result in brute_force_minimal_nogoods(nogood, validator)

    def test_singleton(self):
        registry = PluginRegistry().register(
            table_plugin("always", 0, lambda true_set: True)
        )
        inst = synthetic_instance("always", [], 50)
        validator = make_validator(inst, registry, Verdict.TRUE)
        assert minimize_nogood_quickxplain(frozenset({-50}), validator) == frozenset(
            {-50}
        )

    def test_invalid_input_rejected(self, ignores_second_input):
        registry, gp, inst, ids = ignores_second_input
        validator = make_validator(inst, registry, Verdict.FALSE)
        with pytest.raises(MinimizationError):
            minimize_nogood_quickxplain(
                frozenset({ids["p(a)"], inst.replacement_id}), validator
            )

    def test_fewer_calls_on_needle(self):
        # one relevant literal among 128 input literals
        atoms = list(range(1, 129))
        replacement = 500
        for needle in (0, 17, 63, 127):
            registry = PluginRegistry().register(needle_plugin("needle", needle))
            inst = synthetic_instance("needle", atoms, replacement)
            partial = {a: True for a in atoms}
            nogood = frozenset(set(atoms) | {-replacement})
            deletion_validator = CountingValidator(
                make_validator(inst, registry, Verdict.TRUE)
            )
            qx_validator = CountingValidator(
                make_validator(inst, registry, Verdict.TRUE)
            )
            d_result = minimize_nogood_deletion(nogood, deletion_validator)
            q_result = minimize_nogood_quickxplain(nogood, qx_validator)
            assert d_result == frozenset({atoms[needle], -replacement})
            assert q_result == frozenset({atoms[needle], -replacement})
            assert qx_validator.calls < deletion_validator.calls
            assert qx_validator.calls < 128


def random_table_case(seed, size):
    rng = random.Random(seed)
    table = {
        frozenset(s)
        for s in _subsets(range(size))
        if rng.random() < 0.5
    }
    registry = PluginRegistry().register(
        table_plugin("tbl", size, lambda true_set: true_set in table)
    )
    atoms = list(range(1, size + 1))
    inst = synthetic_instance("tbl", atoms, 99)
    assignment = {a: rng.random() < 0.5 for a in atoms}
    true_set = frozenset(i for i, a in enumerate(atoms) if assignment[a])
    verdict = Verdict.TRUE if true_set in table else Verdict.FALSE
    lits = [a if assignment[a] else -a for a in atoms]
    lits.append(-99 if verdict is Verdict.TRUE else 99)
    return registry, inst, frozenset(lits), verdict


def _subsets(items):
    from itertools import chain, combinations

    items = list(items)
    return chain.from_iterable(combinations(items, r) for r in range(len(items) + 1))


class TestBothMinimizers:
    @given(st.integers(0, 10**6), st.integers(1, 6))
    @settings(max_examples=60, deadline=None)
    def test_valid_minimal_subset_properties(self, seed, size):
        registry, inst, nogood, verdict = random_table_case(seed, size)
        validator = make_validator(inst, registry, verdict)
        reference = brute_force_minimal_nogoods(nogood, validator)
        for name, minimize in MINIMIZERS.items():
            result = minimize(nogood, validator)
            assert result <= nogood, name
            assert -inst.replacement_id in result or inst.replacement_id in result
            assert validator(result), name
            for lit in result:
                assert not validator(result - {lit}), (name, lit)
            assert result in reference, name
