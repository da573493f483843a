"""Plugin interface: three-valued oracles, nogood learning and minimization.

A nogood is a frozenset of signed atom ids: ``+a`` stands for "atom a is
true", ``-a`` for "atom a is false".  An assignment violates a nogood when
it matches every signed literal in it, so nogoods are the unit in which
forbidden assignments are recorded and learned.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional

from .errors import (
    DuplicatePluginError,
    EvaluationError,
    MinimizationError,
    PluginError,
    UnknownPluginError,
)

PREDICATE = "predicate"
CONSTANT = "constant"

DEP_IRRELEVANT = "irrelevant"
DEP_MONOTONE = "monotone"
DEP_ANTIMONOTONE = "antimonotone"
DEP_FULL = "full"

_DEP_TAGS = (DEP_IRRELEVANT, DEP_MONOTONE, DEP_ANTIMONOTONE, DEP_FULL)


class Verdict(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"

    @staticmethod
    def of(value):
        if isinstance(value, Verdict):
            return value
        if value is True:
            return Verdict.TRUE
        if value is False:
            return Verdict.FALSE
        raise EvaluationError("oracle returned %r instead of a verdict" % (value,))


Nogood = frozenset  # of signed atom ids


def make_nogood(literals: Iterable[int]) -> Nogood:
    ng = frozenset(literals)
    if not ng:
        raise ValueError("nogoods must be nonempty")
    for lit in ng:
        if lit == 0 or -lit in ng:
            raise ValueError("inconsistent nogood literals: %r" % sorted(ng))
    return ng


class _PartialExtension:
    """Read-only mapping from argument tuples to truth, backed by the
    instance's atom map and the current partial assignment."""

    __slots__ = ("_atom_map", "_partial")

    def __init__(self, atom_map, partial):
        self._atom_map = atom_map
        self._partial = partial

    def get(self, args, default=None):
        atom_id = self._atom_map.get(args)
        if atom_id is None:
            return default
        return self._partial[atom_id]

    def items(self):
        partial = self._partial
        for args, atom_id in self._atom_map.items():
            yield args, partial[atom_id]

    def __iter__(self):
        return iter(self._atom_map)

    def __len__(self):
        return len(self._atom_map)


class PredicateView:
    """Three-valued extension of one predicate input position.

    Tuples that are not part of the grounding are false in every
    completion, so ``value`` reports False for them.
    """

    def __init__(self, name, values):
        self.name = name
        self._values = values  # args tuple -> True | False | None

    def value(self, args):
        return self._values.get(tuple(args), False)

    def domain(self):
        return frozenset(self._values)

    def true_tuples(self):
        return frozenset(t for t, v in self._values.items() if v is True)

    def false_tuples(self):
        return frozenset(t for t, v in self._values.items() if v is False)

    def unassigned_tuples(self):
        return frozenset(t for t, v in self._values.items() if v is None)

    def __repr__(self):
        return "PredicateView(%s, %r)" % (self.name, dict(self._values.items()))


@dataclass(frozen=True)
class OracleQuery:
    """What an oracle sees: constant inputs, predicate extensions, outputs."""

    constants: tuple
    extensions: tuple  # of PredicateView, one per predicate position
    outputs: tuple


@dataclass(frozen=True)
class InventionQuery:
    """Enumerator input: constant inputs, all-true extensions, current domain."""

    constants: tuple
    extensions: tuple
    domain: frozenset


@dataclass(frozen=True)
class PluginDescriptor:
    """Declaration of an external predicate.

    oracle(OracleQuery) -> Verdict (or bool); must be deterministic and
    side-effect free, and a non-unknown verdict under a partial extension
    must hold under every completion of it.

    enumerator(InventionQuery) -> iterable of output term tuples; must
    cover every tuple the oracle can accept for the given constant inputs
    under any extension drawn from the queried domain.
    """

    name: str
    input_signature: tuple
    output_arity: int
    oracle: Callable
    enumerator: Optional[Callable] = None
    dependency_info: Optional[tuple] = None

    def __post_init__(self):
        for kind in self.input_signature:
            if kind not in (PREDICATE, CONSTANT):
                raise PluginError("bad input kind %r for &%s" % (kind, self.name))
        if self.dependency_info is not None:
            if len(self.dependency_info) != len(self.input_signature):
                raise PluginError(
                    "&%s: dependency_info length does not match the input signature"
                    % self.name
                )
            for tag in self.dependency_info:
                if tag not in _DEP_TAGS:
                    raise PluginError("bad dependency tag %r for &%s" % (tag, self.name))

    def dependency_tag(self, position):
        if self.dependency_info is None:
            return DEP_FULL
        return self.dependency_info[position]

    def check_arities(self, external_atom):
        if len(external_atom.inputs) != len(self.input_signature):
            raise PluginError(
                "&%s expects %d inputs, got %d"
                % (self.name, len(self.input_signature), len(external_atom.inputs))
            )
        if len(external_atom.outputs) != self.output_arity:
            raise PluginError(
                "&%s expects %d outputs, got %d"
                % (self.name, self.output_arity, len(external_atom.outputs))
            )


class PluginRegistry:
    """Name -> descriptor map; frozen before solving starts."""

    def __init__(self):
        self._plugins = {}
        self._frozen = False

    def register(self, descriptor):
        if self._frozen:
            raise PluginError("registry is frozen; cannot register &%s" % descriptor.name)
        if descriptor.name in self._plugins:
            raise DuplicatePluginError("plugin &%s already registered" % descriptor.name)
        self._plugins[descriptor.name] = descriptor
        return self

    def resolve(self, name):
        try:
            return self._plugins[name]
        except KeyError:
            raise UnknownPluginError("unknown external predicate &%s" % name) from None

    def freeze(self):
        self._frozen = True
        return self

    def __contains__(self, name):
        return name in self._plugins

    def names(self):
        return tuple(self._plugins)


# ---------------------------------------------------------------------------
# Oracle evaluation under partial assignments


def evaluate_oracle(instance, partial, registry):
    """Evaluate an external instance under a three-valued input assignment.

    ``partial`` maps every relevant input atom id to True/False/None.  The
    verdict of a complete assignment is never unknown; a plugin breaking
    that contract (or raising) is reported with the instance identity.
    """
    if set(partial) != set(instance.relevant_input_atoms):
        raise EvaluationError(
            "%s: partial assignment does not cover exactly the relevant input atoms"
            % instance
        )
    return _evaluate_trusted(instance, partial, registry)


def _evaluate_trusted(instance, partial, registry):
    """As evaluate_oracle, but trusts the caller to cover the relevant atoms."""
    descriptor = registry.resolve(instance.plugin)
    views = tuple(
        PredicateView(name, _PartialExtension(atom_map, partial))
        for name, atom_map in zip(instance.input_predicates, instance.pred_atom_maps)
    )
    query = OracleQuery(instance.input_constants, views, instance.outputs)
    try:
        verdict = Verdict.of(descriptor.oracle(query))
    except PluginError as exc:
        raise EvaluationError("%s: %s" % (instance, exc)) from exc
    except Exception as exc:  # noqa: BLE001 - plugin code is arbitrary
        raise EvaluationError("%s: oracle raised %r" % (instance, exc)) from exc
    if verdict is Verdict.UNKNOWN and None not in partial.values():
        raise EvaluationError("%s: unknown verdict on a complete assignment" % instance)
    return verdict


# ---------------------------------------------------------------------------
# Nogood learning


def _replacement_literal(instance, verdict):
    # Sign opposite to the verdict: forbids the wrong guess.
    if verdict is Verdict.TRUE:
        return -instance.replacement_id
    if verdict is Verdict.FALSE:
        return instance.replacement_id
    raise ValueError("cannot learn from an unknown verdict")


def default_learn_nogood(instance, partial, verdict):
    """Input-output nogood over a complete input assignment."""
    lits = [_replacement_literal(instance, verdict)]
    for atom_id in instance.relevant_input_atoms:
        value = partial[atom_id]
        if value is None:
            raise ValueError("default_learn_nogood requires a complete assignment")
        lits.append(atom_id if value else -atom_id)
    return make_nogood(lits)


def learn_partial_nogood(instance, partial, verdict):
    """Input-output nogood keeping only the assigned input literals.

    A subset of the complete-assignment nogood, hence usually smaller.
    """
    lits = [_replacement_literal(instance, verdict)]
    for atom_id in instance.relevant_input_atoms:
        value = partial[atom_id]
        if value is not None:
            lits.append(atom_id if value else -atom_id)
    return make_nogood(lits)


def make_validator(instance, registry, verdict):
    """Validator closure for nogood minimization.

    A candidate nogood is valid iff it still contains the replacement
    literal and fixing exactly its input literals (everything else
    unassigned) reproduces the triggering verdict.
    """
    verdict = Verdict.of(verdict)
    replacement = _replacement_literal(instance, verdict)

    def validator(candidate):
        if replacement not in candidate:
            return False
        partial = {atom_id: None for atom_id in instance.relevant_input_atoms}
        for lit in candidate:
            atom_id = abs(lit)
            if atom_id == instance.replacement_id:
                continue
            partial[atom_id] = lit > 0
        return _evaluate_trusted(instance, partial, registry) is verdict

    return validator


# ---------------------------------------------------------------------------
# Nogood minimization


def minimize_nogood_deletion(nogood, validator):
    """Deletion filter: drop literals one by one, ascending atom id.

    Returns a validator-valid, inclusion-minimal subset of the input.
    """
    if not validator(nogood):
        raise MinimizationError("input nogood is not validator-valid")
    current = set(nogood)
    for lit in sorted(nogood, key=abs):
        candidate = frozenset(current - {lit})
        if candidate and validator(candidate):
            current = candidate
    return frozenset(current)


def minimize_nogood_quickxplain(nogood, validator):
    """QuickXplain-style divide and conquer minimization.

    Better than the deletion filter when most literals are irrelevant:
    validator calls are O(k*log(n/k) + k) for k relevant among n literals.
    """
    if not validator(nogood):
        raise MinimizationError("input nogood is not validator-valid")
    ordered = sorted(nogood, key=abs)

    def recurse(background, delta, candidates):
        if delta and validator(frozenset(background)):
            return []
        if len(candidates) == 1:
            return list(candidates)
        half = len(candidates) // 2
        left, right = candidates[:half], candidates[half:]
        keep_right = recurse(background + left, left, right)
        keep_left = recurse(background + keep_right, keep_right, left)
        return keep_left + keep_right

    return frozenset(recurse([], [], ordered))


MINIMIZERS = {
    "off": None,
    "deletion": minimize_nogood_deletion,
    "quickxplain": minimize_nogood_quickxplain,
}


def minimize_nogood(nogood, validator, mode):
    fn = MINIMIZERS[mode]
    if fn is None:
        return nogood
    return fn(nogood, validator)
