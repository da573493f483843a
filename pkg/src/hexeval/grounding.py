"""Grounding: instantiate a safe program over an interned atom table.

External atoms drive value invention: during the optimistic fixpoint every
plugin is queried with all potentially derivable input atoms set to true,
and every output constant it enumerates joins the domain (bounded by
``max_invention``).  Each distinct ground external atom is replaced by a
positive replacement atom plus a guess pair, leaving an ordinary ground
program for the solver.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import GroundingError, InventionBudgetError
from .interface import (
    CONSTANT,
    DEP_IRRELEVANT,
    PREDICATE,
    InventionQuery,
    PredicateView,
)
from .syntax import (
    Atom,
    Constant,
    ExternalAtom,
    Compound,
    Integer,
    Program,
    Variable,
    is_ground,
    substitute,
    subterms,
    term_sort_key,
    unsafe_variables,
    unsafe_variables_of_body,
)

ORDINARY = "ordinary"
REPL_POS = "e"
REPL_NEG = "ne"
AUX = "aux"

DEFAULT_INVENTION_BUDGET = 1000

_PRED_NAME_RE = re.compile(r"[a-z][A-Za-z0-9_]*\Z")


class AtomTable:
    """Bidirectional map between ground atom text and dense ids from 1."""

    def __init__(self):
        self._ids = {}
        self._texts = [None]
        self._kinds = [None]
        self._atoms = [None]

    def intern(self, text, kind=ORDINARY, atom=None):
        existing = self._ids.get(text)
        if existing is not None:
            return existing
        self._texts.append(text)
        self._kinds.append(kind)
        self._atoms.append(atom)
        atom_id = len(self._texts) - 1
        self._ids[text] = atom_id
        return atom_id

    def id_of(self, text):
        return self._ids.get(text)

    def text(self, atom_id):
        return self._texts[atom_id]

    def kind(self, atom_id):
        return self._kinds[atom_id]

    def atom(self, atom_id):
        return self._atoms[atom_id]

    def __len__(self):
        return len(self._texts) - 1

    def ids(self):
        return range(1, len(self._texts))

    def ordinary_ids(self):
        return [i for i in self.ids() if self._kinds[i] == ORDINARY]


def intern(table, text):
    """Intern a ground ordinary atom's text; same text, same id."""
    return table.intern(text)


class ExternalInstance:
    """One ground external atom: plugin, ground inputs/outputs, guess ids."""

    def __init__(self, index, plugin, input_terms, input_constants,
                 input_predicates, outputs, replacement_id, negation_id):
        self.index = index
        self.plugin = plugin
        self.input_terms = input_terms
        self.input_constants = input_constants
        self.input_predicates = input_predicates
        self.outputs = outputs
        self.replacement_id = replacement_id
        self.negation_id = negation_id
        self.pred_atom_maps = ()  # per predicate position: args tuple -> atom id
        self.relevant_input_atoms = frozenset()

    def __str__(self):
        return external_atom_text("&", self.plugin, self.input_terms, self.outputs)

    def __repr__(self):
        return "ExternalInstance(%s)" % self


def external_atom_text(prefix, plugin, input_terms, outputs):
    text = "%s%s" % (prefix, plugin)
    if input_terms:
        text += "[%s]" % ",".join(str(t) for t in input_terms)
    if outputs:
        text += "(%s)" % ",".join(str(t) for t in outputs)
    return text


@dataclass(frozen=True)
class GroundRule:
    head: tuple  # atom ids
    body: tuple  # signed atom ids; negative means default negation


@dataclass(frozen=True)
class GroundWeak:
    body: tuple
    weight: int
    level: int


@dataclass
class GroundProgram:
    rules: list
    guesses: list  # (replacement id, negation id) pairs
    externals: list
    weak: list
    table: AtomTable
    facts: frozenset

    @property
    def has_disjunctive_heads(self):
        return any(len(rule.head) >= 2 for rule in self.rules)

    def instance_by_replacement(self, atom_id):
        return self._by_replacement[atom_id]

    def finish(self):
        self._by_replacement = {inst.replacement_id: inst for inst in self.externals}
        return self

    def literal_text(self, lit):
        text = self.table.text(abs(lit))
        return ("not " + text) if lit < 0 else text

    def dump(self):
        lines = []
        if self.facts:
            lines.append("% facts")
            lines += ["%s." % self.table.text(a) for a in sorted(self.facts)]
        if self.rules:
            lines.append("% rules")
            for rule in self.rules:
                head = " | ".join(self.table.text(a) for a in rule.head)
                body = ", ".join(self.literal_text(l) for l in rule.body)
                if not rule.body:
                    lines.append("%s." % head)
                elif not rule.head:
                    lines.append(":- %s." % body)
                else:
                    lines.append("%s :- %s." % (head, body))
        if self.guesses:
            lines.append("% guesses")
            for e_id, ne_id in self.guesses:
                lines.append("%s | %s." % (self.table.text(e_id), self.table.text(ne_id)))
        if self.weak:
            lines.append("% weak constraints")
            for weak in self.weak:
                body = ", ".join(self.literal_text(l) for l in weak.body)
                lines.append(":~ %s. [%d@%d]" % (body, weak.weight, weak.level))
        return "\n".join(lines)


@dataclass(frozen=True)
class DomainResult:
    domain: frozenset
    textual: frozenset
    invented: tuple  # in discovery order


# ---------------------------------------------------------------------------
# Optimistic fixpoint instantiation


class _Engine:
    def __init__(self, program, registry, max_invention):
        self.program = program
        self.registry = registry
        self.max_invention = max_invention
        self.derivable = {}  # predicate -> ordered set (dict) of args tuples
        self.snapshot = {}
        self.domain = set()
        self.textual = set()
        self.invented = []
        self.rule_instances = {}  # (head atoms, body entries) -> None
        self.weak_instances = {}  # (body entries, weight, level) -> None
        self.changed = False

    # -- setup

    def seed(self):
        for rule in self.program.rules:
            if unsafe_variables(rule):
                raise GroundingError("unsafe rule: %s" % rule)
            for atom in rule.head:
                self._seed_terms(atom.args)
            self._seed_body(rule.body)
        for weak in self.program.weak_constraints:
            if unsafe_variables_of_body(weak.body):
                raise GroundingError("unsafe weak constraint: %s" % weak)
            self._seed_body(weak.body)

    def _seed_body(self, body):
        for lit in body:
            if isinstance(lit.atom, Atom):
                self._seed_terms(lit.atom.args)
            else:
                self._validate_external(lit.atom)
                self._seed_terms(lit.atom.inputs)
                self._seed_terms(lit.atom.outputs)

    def _seed_terms(self, terms):
        for term in terms:
            for sub in subterms(term):
                if is_ground(sub):
                    self.domain.add(sub)
                    self.textual.add(sub)

    def _validate_external(self, ext):
        descriptor = self.registry.resolve(ext.name)
        descriptor.check_arities(ext)
        for kind, term in zip(descriptor.input_signature, ext.inputs):
            if kind == PREDICATE:
                if not (isinstance(term, Constant) and _PRED_NAME_RE.match(term.name)):
                    raise GroundingError(
                        "&%s: input %s is declared as a predicate name" % (ext.name, term)
                    )

    # -- fixpoint

    def run(self):
        self.seed()
        while True:
            self.changed = False
            self.snapshot = {p: list(args) for p, args in self.derivable.items()}
            for rule in self.program.rules:
                for subst in self._solutions(list(rule.body), {}):
                    self._emit_rule(rule, subst)
            for weak in self.program.weak_constraints:
                for subst in self._solutions(list(weak.body), {}):
                    self._emit_weak(weak, subst)
            if not self.changed:
                return self

    def _derive(self, atom):
        per_pred = self.derivable.setdefault(atom.predicate, {})
        if atom.args not in per_pred:
            per_pred[atom.args] = None
            self.changed = True

    def _emit_rule(self, rule, subst):
        head = tuple(self._ground_atom(a, subst) for a in rule.head)
        body = tuple(self._ground_entry(l, subst) for l in rule.body)
        key = (head, body)
        if key not in self.rule_instances:
            self.rule_instances[key] = None
            self.changed = True
        for atom in head:
            self._derive(atom)

    def _emit_weak(self, weak, subst):
        body = tuple(self._ground_entry(l, subst) for l in weak.body)
        key = (body, weak.weight, weak.level)
        if key not in self.weak_instances:
            self.weak_instances[key] = None
            self.changed = True

    def _ground_atom(self, atom, subst):
        out = Atom(atom.predicate, tuple(substitute(t, subst) for t in atom.args))
        if not all(is_ground(t) for t in out.args):
            raise GroundingError("instantiation left variables in %s" % out)
        return out

    def _ground_entry(self, lit, subst):
        if isinstance(lit.atom, Atom):
            return ("a", self._ground_atom(lit.atom, subst), lit.negated)
        ext = lit.atom
        inputs = tuple(substitute(t, subst) for t in ext.inputs)
        outputs = tuple(substitute(t, subst) for t in ext.outputs)
        return ("e", ext.name, inputs, outputs, lit.negated)

    # -- body joins

    def _solutions(self, literals, subst):
        if not literals:
            yield dict(subst)
            return
        idx = self._pick(literals, subst)
        lit = literals[idx]
        rest = literals[:idx] + literals[idx + 1 :]
        if not lit.negated and isinstance(lit.atom, Atom):
            patterns = lit.atom.args
            for args in self.snapshot.get(lit.atom.predicate, ()):
                extended = _match_terms(patterns, args, subst)
                if extended is not None:
                    yield from self._solutions(rest, extended)
            return
        if not lit.negated and isinstance(lit.atom, ExternalAtom):
            ext = lit.atom
            inputs = tuple(substitute(t, subst) for t in ext.inputs)
            out_patterns = tuple(substitute(t, subst) for t in ext.outputs)
            if all(is_ground(t) for t in out_patterns):
                yield from self._solutions(rest, subst)
                return
            for tup in self._enumerate_outputs(ext.name, inputs):
                extended = _match_terms(out_patterns, tup, subst)
                if extended is not None:
                    yield from self._solutions(rest, extended)
            return
        # negated literal, fully bound: kept verbatim in the instance
        yield from self._solutions(rest, subst)

    def _pick(self, literals, subst):
        for i, lit in enumerate(literals):
            if lit.negated:
                continue
            if isinstance(lit.atom, Atom):
                return i
            free = set()
            for t in lit.atom.inputs:
                free |= _free_vars(t, subst)
            if not free:
                return i
        for i, lit in enumerate(literals):
            if lit.negated and not any(
                _free_vars(t, subst)
                for t in _literal_terms(lit.atom)
            ):
                return i
        raise AssertionError("no processable literal; safety check should prevent this")

    def _enumerate_outputs(self, name, ground_inputs):
        descriptor = self.registry.resolve(name)
        constants = []
        views = []
        for kind, term in zip(descriptor.input_signature, ground_inputs):
            if kind == PREDICATE:
                extension = {args: True for args in self.snapshot.get(term.name, ())}
                views.append(PredicateView(term.name, extension))
            else:
                constants.append(term)
        if descriptor.enumerator is None:
            raise GroundingError(
                "&%s has no enumerator and cannot bind free output variables" % name
            )
        query = InventionQuery(tuple(constants), tuple(views), frozenset(self.domain))
        tuples = {tuple(t) for t in descriptor.enumerator(query)}
        for tup in tuples:
            if len(tup) != descriptor.output_arity:
                raise GroundingError(
                    "&%s enumerated a tuple of arity %d, expected %d"
                    % (name, len(tup), descriptor.output_arity)
                )
            for term in tup:
                self._add_domain_term(term, name)
        return sorted(tuples, key=lambda t: tuple(term_sort_key(x) for x in t))

    def _add_domain_term(self, term, plugin):
        if not is_ground(term):
            raise GroundingError("&%s enumerated a non-ground term %s" % (plugin, term))
        for sub in subterms(term):
            if sub not in self.domain:
                self.domain.add(sub)
                self.invented.append(sub)
                if len(self.invented) > self.max_invention:
                    raise InventionBudgetError(plugin, self.max_invention)


def _literal_terms(atom):
    if isinstance(atom, Atom):
        return atom.args
    return atom.inputs + atom.outputs


def _free_vars(term, subst):
    if isinstance(term, Variable):
        return set() if term.name in subst else {term.name}
    if isinstance(term, Compound):
        out = set()
        for a in term.args:
            out |= _free_vars(a, subst)
        return out
    return set()


def _match_terms(patterns, ground_args, subst):
    if len(patterns) != len(ground_args):
        return None
    extended = dict(subst)
    for pattern, ground in zip(patterns, ground_args):
        if not _match_one(pattern, ground, extended):
            return None
    return extended


def _match_one(pattern, ground, subst):
    if isinstance(pattern, Variable):
        bound = subst.get(pattern.name)
        if bound is None:
            subst[pattern.name] = ground
            return True
        return bound == ground
    if isinstance(pattern, Compound):
        return (
            isinstance(ground, Compound)
            and ground.functor == pattern.functor
            and len(ground.args) == len(pattern.args)
            and all(_match_one(p, g, subst) for p, g in zip(pattern.args, ground.args))
        )
    return pattern == ground


# ---------------------------------------------------------------------------
# Public entry points


def compute_domain(program, registry, max_invention=DEFAULT_INVENTION_BUDGET):
    """Constants reachable by bounded value invention, with a report."""
    engine = _Engine(program, registry, max_invention).run()
    return DomainResult(
        domain=frozenset(engine.domain),
        textual=frozenset(engine.textual),
        invented=tuple(engine.invented),
    )


def ground_program(program, registry, max_invention=DEFAULT_INVENTION_BUDGET):
    """Ground a safe program, applying the external-atom guessing translation."""
    engine = _Engine(program, registry, max_invention).run()
    table = AtomTable()
    instances = {}
    guesses = []
    externals = []

    def intern_external(name, inputs, outputs):
        key = (name, inputs, outputs)
        found = instances.get(key)
        if found is not None:
            return found.replacement_id
        e_id = table.intern(external_atom_text("e_", name, inputs, outputs), REPL_POS)
        ne_id = table.intern(external_atom_text("ne_", name, inputs, outputs), REPL_NEG)
        descriptor = registry.resolve(name)
        input_constants = []
        input_predicates = []
        for kind, term in zip(descriptor.input_signature, inputs):
            if kind == PREDICATE:
                input_predicates.append(term.name)
            else:
                input_constants.append(term)
        instance = ExternalInstance(
            index=len(externals),
            plugin=name,
            input_terms=inputs,
            input_constants=tuple(input_constants),
            input_predicates=tuple(input_predicates),
            outputs=outputs,
            replacement_id=e_id,
            negation_id=ne_id,
        )
        instances[key] = instance
        externals.append(instance)
        guesses.append((e_id, ne_id))
        return e_id

    facts = []
    rule_drafts = []
    for head, body in engine.rule_instances:
        if not body and len(head) == 1:
            facts.append(table.intern(str(head[0]), ORDINARY, head[0]))
        else:
            rule_drafts.append((head, body))

    rules = []
    for head, body in rule_drafts:
        head_ids = tuple(table.intern(str(a), ORDINARY, a) for a in head)
        body_ids = []
        for entry in body:
            if entry[0] == "a":
                _, atom, negated = entry
                atom_id = table.intern(str(atom), ORDINARY, atom)
                body_ids.append(-atom_id if negated else atom_id)
            else:
                _, name, inputs, outputs, negated = entry
                e_id = intern_external(name, inputs, outputs)
                body_ids.append(-e_id if negated else e_id)
        rules.append(GroundRule(head_ids, tuple(body_ids)))

    weak = []
    for body, weight, level in engine.weak_instances:
        body_ids = []
        for entry in body:
            if entry[0] == "a":
                _, atom, negated = entry
                atom_id = table.intern(str(atom), ORDINARY, atom)
                body_ids.append(-atom_id if negated else atom_id)
            else:
                _, name, inputs, outputs, negated = entry
                e_id = intern_external(name, inputs, outputs)
                body_ids.append(-e_id if negated else e_id)
        weak.append(GroundWeak(tuple(body_ids), weight, level))

    # relevant input atoms: every ground atom of the input predicates present
    # in the grounding, except positions tagged irrelevant
    by_pred = {}
    for atom_id in table.ordinary_ids():
        atom = table.atom(atom_id)
        by_pred.setdefault(atom.predicate, []).append((atom.args, atom_id))
    for instance in externals:
        descriptor = registry.resolve(instance.plugin)
        maps = []
        relevant = set()
        pred_pos = 0
        for sig_index, kind in enumerate(descriptor.input_signature):
            if kind != PREDICATE:
                continue
            pred = instance.input_predicates[pred_pos]
            pred_pos += 1
            if descriptor.dependency_tag(sig_index) == DEP_IRRELEVANT:
                maps.append({})
                continue
            atom_map = dict(by_pred.get(pred, ()))
            maps.append(atom_map)
            relevant |= set(atom_map.values())
        instance.pred_atom_maps = tuple(maps)
        instance.relevant_input_atoms = frozenset(relevant)

    return GroundProgram(
        rules=rules,
        guesses=guesses,
        externals=externals,
        weak=weak,
        table=table,
        facts=frozenset(facts),
    ).finish()
