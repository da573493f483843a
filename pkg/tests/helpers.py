"""Shared test utilities: program families, random program generation, and
independent reference implementations used as test oracles."""

from __future__ import annotations

import random
from itertools import chain, combinations, product

from hexeval import (
    Integer,
    PluginDescriptor,
    PluginRegistry,
    Verdict,
    builtin_registry,
    ground_program,
    parse_program,
    solve,
)
from hexeval.grounding import ExternalInstance
from hexeval.interface import PREDICATE
from hexeval.syntax import Atom, Compound, Constant, Variable


def powerset(iterable):
    items = list(iterable)
    return chain.from_iterable(combinations(items, r) for r in range(len(items) + 1))


# ---------------------------------------------------------------------------
# Program families


def setminus_program(n):
    elems = ["e%d" % i for i in range(n)]
    lines = ["dom(%s)." % e for e in elems]
    lines.append("sel(X)  :- dom(X), &diff[dom,nsel](X).")
    lines.append("nsel(X) :- dom(X), &diff[dom,sel](X).")
    return "\n".join(lines)


CONCAT_PROGRAM = (
    "firstname(pat). lastname(doe).\n"
    "fullname(Full) :- &concat[F,L](Full), firstname(F), lastname(L)."
)

ID_LOOP_PROGRAM = "p :- &id[p]."


def diff_chain_program(links, elems=2):
    lines = ["d(e%d)." % i for i in range(elems)]
    lines.append("sel(X) :- d(X), not nsel(X).")
    lines.append("nsel(X) :- d(X), not sel(X).")
    lines.append("l0(X) :- d(X), &diff[sel,nsel](X).")
    for i in range(1, links):
        lines.append("l%d(X) :- d(X), &diff[l%d,nsel](X)." % (i, i - 1))
    return "\n".join(lines)


def solve_texts(text, registry=None, config=None):
    registry = registry or builtin_registry()
    program = parse_program(text)
    gp = ground_program(program, registry)
    return solve(gp, registry, config).answer_texts()


# ---------------------------------------------------------------------------
# Random program generation

_EXTERNAL_KINDS = ("diff", "atLeast", "first", "id", "none")


def random_program(seed, allow_weak=False):
    """A small random program: guaranteed safe, bounded grounding."""
    rng = random.Random(repr(seed))
    consts = ["a", "b", "c"][: rng.randint(1, 3)]
    preds = ["p", "q", "r"][: rng.randint(2, 3)]
    props = ["s", "t"][: rng.randint(0, 2)]
    lines = ["d(%s)." % c for c in consts]
    for pred in preds:
        for c in consts:
            if rng.random() < 0.2:
                lines.append("%s(%s)." % (pred, c))
    for prop in props:
        if rng.random() < 0.3:
            lines.append("%s." % prop)
    if rng.random() < 0.6:
        one, two = rng.sample(preds, 2) if len(preds) >= 2 else (preds[0], preds[0])
        lines.append("%s(X) :- d(X), not %s(X)." % (one, two))
        lines.append("%s(X) :- d(X), not %s(X)." % (two, one))
    for _ in range(rng.randint(1, 4)):
        lines.append(_random_rule(rng, consts, preds, props))
    if rng.random() < 0.35:
        body = "%s(X), d(X)" % rng.choice(preds)
        lines.append(":- %s, not %s(X)." % (body, rng.choice(preds)))
    if allow_weak:
        for _ in range(rng.randint(1, 3)):
            weight = rng.choice([1, 1, 2, 3, -1])
            level = rng.randint(1, 2)
            pred = rng.choice(preds)
            lines.append(":~ %s(X), d(X). [%d@%d]" % (pred, weight, level))
        if props and rng.random() < 0.5:
            lines.append(":~ %s. [%d@1]" % (rng.choice(props), rng.choice([1, 2])))
    return "\n".join(lines)


def _random_rule(rng, consts, preds, props):
    head_pred = rng.choice(preds + props)
    uses_var = head_pred in preds and rng.random() < 0.8
    if head_pred in props:
        head = head_pred
    elif uses_var:
        head = "%s(X)" % head_pred
    else:
        head = "%s(%s)" % (head_pred, rng.choice(consts))
    body = []
    if uses_var:
        body.append("d(X)")
    term = "X" if uses_var else rng.choice(consts)
    for _ in range(rng.randint(0, 2)):
        pred = rng.choice(preds)
        neg = "not " if rng.random() < 0.4 else ""
        body.append("%s%s(%s)" % (neg, pred, term))
    kind = rng.choice(_EXTERNAL_KINDS)
    if kind == "diff":
        one, two = rng.sample(preds, 2) if len(preds) >= 2 else (preds[0], "d")
        neg = "not " if rng.random() < 0.3 else ""
        body.append("%s&diff[%s,%s](%s)" % (neg, one, two, term))
    elif kind == "atLeast":
        bound = rng.randint(1, len(consts) + 1)
        neg = "not " if rng.random() < 0.3 else ""
        body.append("%s&atLeast[%s,%d]" % (neg, rng.choice(preds), bound))
    elif kind == "first":
        one, two = rng.choice(preds), rng.choice(preds)
        neg = "not " if rng.random() < 0.3 else ""
        body.append("%s&first[%s,%s](%s)" % (neg, one, two, term))
    elif kind == "id" and props:
        neg = "not " if rng.random() < 0.5 else ""
        body.append("%s&id[%s]" % (neg, rng.choice(props)))
    if not body:
        body.append("d(%s)" % rng.choice(consts))
    return "%s :- %s." % (head, ", ".join(body))


def generate_solvable(seed, max_atoms=16, allow_weak=False):
    """Random program whose grounding stays small; retries on blowups."""
    registry = builtin_registry()
    for attempt in range(50):
        text = random_program((seed, attempt), allow_weak=allow_weak)
        program = parse_program(text)
        gp = ground_program(program, registry)
        if len(gp.table.ordinary_ids()) <= max_atoms and len(gp.externals) <= 8:
            return text
    raise AssertionError("could not generate a small program for seed %r" % seed)


# ---------------------------------------------------------------------------
# Synthetic external instances and table oracles (for learning/minimization)


def table_plugin(name, size, accepts):
    """Plugin over one predicate with ``size`` integer-argument atoms.

    ``accepts(true_indices: frozenset) -> bool`` defines the two-valued
    oracle; the three-valued lift answers by completion agreement, which
    makes it sound by construction.
    """

    def oracle(query):
        view = query.extensions[0]
        fixed_true = {args[0].value for args in view.true_tuples()}
        open_idx = [args[0].value for args in view.unassigned_tuples()]
        verdicts = set()
        for extra in powerset(open_idx):
            verdicts.add(bool(accepts(frozenset(fixed_true) | frozenset(extra))))
            if len(verdicts) == 2:
                return Verdict.UNKNOWN
        return Verdict.TRUE if verdicts.pop() else Verdict.FALSE

    return PluginDescriptor(
        name=name, input_signature=(PREDICATE,), output_arity=0, oracle=oracle
    )


def needle_plugin(name, needle_index):
    """Verdict equals the truth of one single input atom; the rest is noise."""

    def oracle(query):
        value = query.extensions[0].value((Integer(needle_index),))
        if value is None:
            return Verdict.UNKNOWN
        return Verdict.TRUE if value else Verdict.FALSE

    return PluginDescriptor(
        name=name, input_signature=(PREDICATE,), output_arity=0, oracle=oracle
    )


def synthetic_instance(plugin_name, atom_ids, replacement_id):
    """ExternalInstance over atoms u(0), u(1), ... without a ground program."""
    instance = ExternalInstance(
        index=0,
        plugin=plugin_name,
        input_terms=(Constant("u"),),
        input_constants=(),
        input_predicates=("u",),
        outputs=(),
        replacement_id=replacement_id,
        negation_id=replacement_id + 1,
    )
    instance.pred_atom_maps = (
        {(Integer(i),): atom_id for i, atom_id in enumerate(atom_ids)},
    )
    instance.relevant_input_atoms = frozenset(atom_ids)
    return instance


def check_completion_soundness(instance, registry):
    """Exhaustively verify the three-valued soundness contract.

    For every partial interpretation over the instance's relevant atoms, a
    non-unknown verdict must equal the two-valued verdict of every
    completion.  Two-valued verdicts are memoized; determinism of oracles
    is part of their contract.
    """
    from hexeval import evaluate_oracle

    atoms = sorted(instance.relevant_input_atoms)
    k = len(atoms)
    memo = {}

    def complete_verdict(true_mask):
        hit = memo.get(true_mask)
        if hit is None:
            partial = {a: bool(true_mask & (1 << i)) for i, a in enumerate(atoms)}
            hit = evaluate_oracle(instance, partial, registry) is Verdict.TRUE
            memo[true_mask] = hit
        return hit

    checked = 0
    for assigned in range(1 << k):
        free = [1 << i for i in range(k) if not assigned & (1 << i)]
        sub = assigned
        while True:  # all true-sets within the assigned atoms
            partial = {
                a: (bool(sub & (1 << i)) if assigned & (1 << i) else None)
                for i, a in enumerate(atoms)
            }
            verdict = evaluate_oracle(instance, partial, registry)
            if verdict is not Verdict.UNKNOWN:
                expected = verdict is Verdict.TRUE
                extra = 0
                free_mask = sum(free)
                while True:  # all completions of the unassigned atoms
                    assert complete_verdict(sub | extra) == expected, (
                        "unsound verdict under partial %r" % partial
                    )
                    checked += 1
                    if extra == free_mask:
                        break
                    extra = (extra - free_mask) & free_mask
            if sub == 0:
                break
            sub = (sub - 1) & assigned
    return checked


class CountingValidator:
    def __init__(self, validator):
        self.validator = validator
        self.calls = 0

    def __call__(self, candidate):
        self.calls += 1
        return self.validator(candidate)


def brute_force_minimal_nogoods(nogood, validator):
    """All inclusion-minimal validator-valid subsets of a nogood."""
    valid = [
        frozenset(subset)
        for subset in powerset(sorted(nogood, key=abs))
        if subset and validator(frozenset(subset))
    ]
    return {
        s for s in valid if not any(other < s for other in valid)
    }


# ---------------------------------------------------------------------------
# Naive reference grounder for external-free programs


def naive_ground_rules(program, domain):
    """Full instantiation over the domain, pruned to potentially derivable
    positive bodies; returns (facts, rules) as text pairs."""

    def atoms_of(atom, subst):
        args = tuple(subst.get(t.name, t) if isinstance(t, Variable) else t for t in atom.args)
        return Atom(atom.predicate, args)

    def rule_vars(rule):
        out = set()
        for atom in rule.head:
            for t in atom.args:
                if isinstance(t, Variable):
                    out.add(t.name)
        for lit in rule.body:
            for t in lit.atom.args:
                if isinstance(t, Variable):
                    out.add(t.name)
        return sorted(out)

    instances = []
    for rule in program.rules:
        names = rule_vars(rule)
        for values in product(sorted(domain, key=str), repeat=len(names)):
            subst = dict(zip(names, values))
            head = tuple(atoms_of(a, subst) for a in rule.head)
            body = tuple(
                (atoms_of(l.atom, subst), l.negated) for l in rule.body
            )
            instances.append((head, body))

    derivable = set()
    changed = True
    while changed:
        changed = False
        for head, body in instances:
            if all(atom in derivable for atom, neg in body if not neg):
                for atom in head:
                    if atom not in derivable:
                        derivable.add(atom)
                        changed = True

    facts = set()
    rules = set()
    for head, body in instances:
        if not all(atom in derivable for atom, neg in body if not neg):
            continue
        if not body and len(head) == 1:
            facts.add(str(head[0]))
        else:
            rules.add(
                (
                    tuple(str(a) for a in head),
                    tuple(("not " if neg else "") + str(a) for a, neg in body),
                )
            )
    return facts, rules
