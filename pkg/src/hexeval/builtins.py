"""Builtin external predicates.

The catalog spans the interesting oracle shapes: string concatenation and
list manipulation are generative (they drive value invention), diff is
monotone in one position and antimonotone in the other, atLeast is
monotone, first declares an irrelevant input position, and id is the
smallest oracle producing cyclic justifications.
"""

from __future__ import annotations

from .errors import PluginError
from .interface import (
    CONSTANT,
    DEP_ANTIMONOTONE,
    DEP_FULL,
    DEP_IRRELEVANT,
    DEP_MONOTONE,
    PREDICATE,
    PluginDescriptor,
    PluginRegistry,
    Verdict,
)
from .syntax import Compound, Constant, Integer, term_sort_key

NIL = Constant("nil")


def _as_string(term, who):
    if isinstance(term, Constant):
        return term.name
    raise PluginError("&%s: non-string input %s" % (who, term))


def _concat_oracle(query):
    left, right = (_as_string(t, "concat") for t in query.constants)
    out = query.outputs[0]
    return Verdict.TRUE if out == Constant(left + right) else Verdict.FALSE


def _concat_enumerate(query):
    left, right = (_as_string(t, "concat") for t in query.constants)
    return {(Constant(left + right),)}


def _id_oracle(query):
    # True iff the arity-0 atom of the input predicate is true.
    value = query.extensions[0].value(())
    if value is None:
        return Verdict.UNKNOWN
    return Verdict.TRUE if value else Verdict.FALSE


def _diff_oracle(query):
    out = query.outputs
    in_p = query.extensions[0].value(out)
    in_q = query.extensions[1].value(out)
    if in_p is False or in_q is True:
        return Verdict.FALSE
    if in_p is True and in_q is False:
        return Verdict.TRUE
    return Verdict.UNKNOWN


def _diff_enumerate(query):
    # Anything in the first extension may survive the subtraction.
    return query.extensions[0].true_tuples()


def _at_least_k(query):
    k = query.constants[0]
    if not isinstance(k, Integer):
        raise PluginError("&atLeast: bound must be an integer, got %s" % k)
    return k.value


def _at_least_oracle(query):
    k = _at_least_k(query)
    view = query.extensions[0]
    true_count = len(view.true_tuples())
    if true_count >= k:
        return Verdict.TRUE
    if true_count + len(view.unassigned_tuples()) < k:
        return Verdict.FALSE
    return Verdict.UNKNOWN


def _first_oracle(query):
    # Nonemptiness of the first extension; second input and output unread.
    view = query.extensions[0]
    if view.true_tuples():
        return Verdict.TRUE
    if not view.unassigned_tuples():
        return Verdict.FALSE
    return Verdict.UNKNOWN


def _first_enumerate(query):
    if not query.extensions[0].domain():
        return set()
    return {(term,) for term in query.domain}


def as_list(term):
    """Decode a cons/nil chain into a Python list of terms."""
    items = []
    while True:
        if term == NIL:
            return items
        if isinstance(term, Compound) and term.functor == "cons" and len(term.args) == 2:
            items.append(term.args[0])
            term = term.args[1]
            continue
        raise PluginError("malformed list term %s" % term)


def from_list(items):
    term = NIL
    for item in reversed(items):
        term = Compound("cons", (item, term))
    return term


def _head_oracle(query):
    items = as_list(query.constants[0])
    if not items:
        return Verdict.FALSE
    return Verdict.TRUE if query.outputs[0] == items[0] else Verdict.FALSE


def _head_enumerate(query):
    items = as_list(query.constants[0])
    return {(items[0],)} if items else set()


def _tail_oracle(query):
    items = as_list(query.constants[0])
    if not items:
        return Verdict.FALSE
    return Verdict.TRUE if query.outputs[0] == from_list(items[1:]) else Verdict.FALSE


def _tail_enumerate(query):
    items = as_list(query.constants[0])
    return {(from_list(items[1:]),)} if items else set()


def _append_oracle(query):
    items = as_list(query.constants[0]) + as_list(query.constants[1])
    return Verdict.TRUE if query.outputs[0] == from_list(items) else Verdict.FALSE


def _append_enumerate(query):
    items = as_list(query.constants[0]) + as_list(query.constants[1])
    return {(from_list(items),)}


CATALOG = (
    PluginDescriptor(
        name="concat",
        input_signature=(CONSTANT, CONSTANT),
        output_arity=1,
        oracle=_concat_oracle,
        enumerator=_concat_enumerate,
    ),
    PluginDescriptor(
        name="id",
        input_signature=(PREDICATE,),
        output_arity=0,
        oracle=_id_oracle,
    ),
    PluginDescriptor(
        name="diff",
        input_signature=(PREDICATE, PREDICATE),
        output_arity=1,
        oracle=_diff_oracle,
        enumerator=_diff_enumerate,
        dependency_info=(DEP_MONOTONE, DEP_ANTIMONOTONE),
    ),
    PluginDescriptor(
        name="atLeast",
        input_signature=(PREDICATE, CONSTANT),
        output_arity=0,
        oracle=_at_least_oracle,
        dependency_info=(DEP_MONOTONE, DEP_FULL),
    ),
    PluginDescriptor(
        name="first",
        input_signature=(PREDICATE, PREDICATE),
        output_arity=1,
        oracle=_first_oracle,
        enumerator=_first_enumerate,
        dependency_info=(DEP_FULL, DEP_IRRELEVANT),
    ),
    PluginDescriptor(
        name="head",
        input_signature=(CONSTANT,),
        output_arity=1,
        oracle=_head_oracle,
        enumerator=_head_enumerate,
    ),
    PluginDescriptor(
        name="tail",
        input_signature=(CONSTANT,),
        output_arity=1,
        oracle=_tail_oracle,
        enumerator=_tail_enumerate,
    ),
    PluginDescriptor(
        name="append",
        input_signature=(CONSTANT, CONSTANT),
        output_arity=1,
        oracle=_append_oracle,
        enumerator=_append_enumerate,
    ),
)


def builtin_registry():
    """Fresh registry holding every builtin plugin."""
    registry = PluginRegistry()
    for descriptor in CATALOG:
        registry.register(descriptor)
    return registry
