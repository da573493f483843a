"""Reduct-based semantics: dependency analysis, minimality checking, and a
brute-force reference implementation used as the test oracle.

A complete candidate that satisfies all rules and matches every oracle is an
answer set iff it is a minimal model of the reduct formed by the rules whose
bodies it satisfies.  When the atom dependency graph is acyclic, every
compatible candidate already has that property and the check can be skipped;
plugin-declared irrelevant input positions prune edges and make more graphs
acyclic.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .errors import GroundingError
from .grounding import ORDINARY, REPL_POS, ground_program
from .interface import Verdict, _evaluate_trusted, evaluate_oracle


# ---------------------------------------------------------------------------
# Dependency graph


@dataclass(frozen=True)
class DependencyGraph:
    """Nodes are ordinary atoms ('a', id) and external instances ('x', index).

    Edges run from positive ordinary body atoms to heads, from relevant
    input atoms to instances, and from instances to the heads of rules
    whose bodies mention the instance (under either sign; the oracle's
    dependence on its inputs has no usable sign structure).
    """

    nodes: frozenset
    edges: frozenset


def build_dependency_graph(gp, registry):
    nodes = set()
    edges = set()
    for atom_id in gp.table.ordinary_ids():
        nodes.add(("a", atom_id))
    for instance in gp.externals:
        node = ("x", instance.index)
        nodes.add(node)
        for atom_id in instance.relevant_input_atoms:
            edges.add((("a", atom_id), node))
    for rule in gp.rules:
        for body_lit in rule.body:
            atom_id = abs(body_lit)
            kind = gp.table.kind(atom_id)
            if kind == ORDINARY and body_lit > 0:
                src = ("a", atom_id)
            elif kind == REPL_POS:
                src = ("x", gp.instance_by_replacement(atom_id).index)
            else:
                continue
            for head_id in rule.head:
                edges.add((src, ("a", head_id)))
    return DependencyGraph(frozenset(nodes), frozenset(edges))


def needs_flp_check(graph):
    """True iff the dependency graph contains a cycle."""
    successors = {}
    for src, dst in graph.edges:
        successors.setdefault(src, []).append(dst)
    WHITE, GREY, BLACK = 0, 1, 2
    color = {node: WHITE for node in graph.nodes}
    for start in graph.nodes:
        if color[start] != WHITE:
            continue
        stack = [(start, iter(successors.get(start, ())))]
        color[start] = GREY
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if color.get(nxt, WHITE) == GREY:
                    return True
                if color.get(nxt, WHITE) == WHITE:
                    color[nxt] = GREY
                    stack.append((nxt, iter(successors.get(nxt, ()))))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                stack.pop()
    return False


# ---------------------------------------------------------------------------
# FLP reduct and minimality


@dataclass
class ReductProgram:
    gp: object
    rules: tuple  # the GroundRules whose bodies the candidate satisfies
    candidate: dict  # atom id -> bool over ordinary + replacement atoms


def _oracle_truth(gp, instance, truth_of, registry, memo=None):
    """Two-valued oracle verdict with input truth given by ``truth_of``."""
    if memo is not None:
        key = (
            instance.index,
            tuple(truth_of(a) for a in sorted(instance.relevant_input_atoms)),
        )
        hit = memo.get(key)
        if hit is not None:
            return hit
    partial = {a: truth_of(a) for a in instance.relevant_input_atoms}
    verdict = _evaluate_trusted(instance, partial, registry)
    result = verdict is Verdict.TRUE
    if memo is not None:
        memo[key] = result
    return result


def body_satisfied(gp, body, truth_of, registry, memo=None):
    for lit in body:
        atom_id = abs(lit)
        if gp.table.kind(atom_id) == ORDINARY:
            value = truth_of(atom_id)
        else:
            instance = gp.instance_by_replacement(atom_id)
            value = _oracle_truth(gp, instance, truth_of, registry, memo)
        if value == (lit < 0):
            return False
    return True


def flp_reduct(gp, candidate, registry, memo=None):
    """Rules whose bodies the candidate satisfies, oracles replacing guesses."""
    truth = lambda a: candidate[a]
    kept = tuple(
        rule for rule in gp.rules if body_satisfied(gp, rule.body, truth, registry, memo)
    )
    return ReductProgram(gp, kept, dict(candidate))


def is_minimal_model(reduct, candidate, registry, _cache=None):
    """No proper subset of the candidate's true ordinary atoms is a model.

    Facts hold in every model and are exempt from the subset search.  The
    search removes one atom at a time, then two, and so on; external body
    literals are re-evaluated through their oracles for every subset, with
    results memoized on the subset's restriction to the relevant inputs.
    """
    gp = reduct.gp
    removable = [
        atom_id
        for atom_id in gp.table.ordinary_ids()
        if candidate.get(atom_id) and atom_id not in gp.facts
    ]
    if not removable:
        return True
    bit = {atom_id: 1 << i for i, atom_id in enumerate(removable)}
    full = (1 << len(removable)) - 1

    compiled = []
    for rule in reduct.rules:
        pos_mask = 0
        neg_mask = 0
        ext = []
        dead = False
        for lit in rule.body:
            atom_id = abs(lit)
            if gp.table.kind(atom_id) == ORDINARY:
                b = bit.get(atom_id)
                if b is not None:
                    if lit > 0:
                        pos_mask |= b
                    else:
                        neg_mask |= b
                elif bool(candidate.get(atom_id)) != (lit > 0):
                    dead = True  # fixed-false body: rule holds in every subset
                    break
            else:
                ext.append((gp.instance_by_replacement(atom_id), lit > 0))
        if dead:
            continue
        head_mask = 0
        always_true_head = False
        for head_id in rule.head:
            b = bit.get(head_id)
            if b is not None:
                head_mask |= b
            elif candidate.get(head_id):
                always_true_head = True
                break
        if always_true_head:
            continue
        compiled.append((pos_mask, neg_mask, tuple(ext), head_mask))

    # Per-candidate memo keyed by the subset's relevant bits, backed by a
    # cross-candidate cache keyed by the full relevant truth vector.
    local = {}
    instance_info = {}
    if _cache is None:
        _cache = {}

    def oracle_truth(instance, keep):
        index = instance.index
        info = instance_info.get(index)
        if info is None:
            atoms = _cache.get(("atoms", index))
            if atoms is None:
                atoms = tuple(sorted(instance.relevant_input_atoms))
                _cache[("atoms", index)] = atoms
            rel_mask = 0
            fixed_key = 0
            moving = []
            for i, atom_id in enumerate(atoms):
                b = bit.get(atom_id)
                if b is not None:
                    rel_mask |= b
                    moving.append((b, 1 << i))
                elif candidate.get(atom_id):
                    fixed_key |= 1 << i
            info = (atoms, rel_mask, fixed_key, tuple(moving))
            instance_info[index] = info
        atoms, rel_mask, fixed_key, moving = info
        local_key = (index, keep & rel_mask)
        hit = local.get(local_key)
        if hit is not None:
            return hit
        global_key = fixed_key
        for local_bit, global_bit in moving:
            if keep & local_bit:
                global_key |= global_bit
        key = (index, global_key)
        hit = _cache.get(key)
        if hit is None:
            partial = {
                atom_id: bool(global_key & (1 << i)) for i, atom_id in enumerate(atoms)
            }
            hit = _evaluate_trusted(instance, partial, registry) is Verdict.TRUE
            _cache[key] = hit
        local[local_key] = hit
        return hit

    positions = range(len(removable))
    for count in range(1, len(removable) + 1):
        for removed in combinations(positions, count):
            keep = full
            for i in removed:
                keep &= ~(1 << i)
            satisfied = True
            for pos_mask, neg_mask, ext, head_mask in compiled:
                if keep & head_mask:
                    continue  # some head atom kept: rule satisfied outright
                if keep & pos_mask != pos_mask or keep & neg_mask:
                    continue
                if ext and not all(
                    oracle_truth(inst, keep) == positive for inst, positive in ext
                ):
                    continue
                satisfied = False
                break
            if satisfied:
                return False
    return True


# ---------------------------------------------------------------------------
# Brute-force reference semantics


def _compile_rules(gp, bit):
    compiled = []
    for rule in gp.rules:
        pos_mask = 0
        neg_mask = 0
        ext = []
        for lit in rule.body:
            atom_id = abs(lit)
            if gp.table.kind(atom_id) == ORDINARY:
                if lit > 0:
                    pos_mask |= bit[atom_id]
                else:
                    neg_mask |= bit[atom_id]
            else:
                ext.append((gp.instance_by_replacement(atom_id), lit > 0))
        head_mask = 0
        for head_id in rule.head:
            head_mask |= bit[head_id]
        compiled.append((pos_mask, neg_mask, tuple(ext), head_mask))
    return compiled


class _MaskOracles:
    def __init__(self, gp, registry, bit):
        self.gp = gp
        self.registry = registry
        self.bit = bit
        self.memo = {}
        self.rel_masks = {}
        for instance in gp.externals:
            mask = 0
            for atom_id in instance.relevant_input_atoms:
                mask |= bit[atom_id]
            self.rel_masks[instance.index] = mask

    def truth(self, instance, mask):
        key = (instance.index, mask & self.rel_masks[instance.index])
        hit = self.memo.get(key)
        if hit is None:
            bit = self.bit
            partial = {
                a: bool(mask & bit[a]) for a in instance.relevant_input_atoms
            }
            hit = _evaluate_trusted(instance, partial, self.registry) is Verdict.TRUE
            self.memo[key] = hit
        return hit


def _mask_satisfies(compiled, oracles, mask):
    for pos_mask, neg_mask, ext, head_mask in compiled:
        if mask & pos_mask != pos_mask or mask & neg_mask:
            continue
        if all(oracles.truth(inst, mask) == positive for inst, positive in ext):
            if not (mask & head_mask):
                return False
    return True


def _reduct_indices(compiled, oracles, mask):
    kept = []
    for index, (pos_mask, neg_mask, ext, _) in enumerate(compiled):
        if mask & pos_mask != pos_mask or mask & neg_mask:
            continue
        if all(oracles.truth(inst, mask) == positive for inst, positive in ext):
            kept.append(index)
    return kept


def brute_force_answer_sets(program, registry, max_atoms=18, max_invention=None):
    """Enumerate answer sets straight from the semantics definition.

    Every interpretation over the ordinary ground atoms is tested for rule
    satisfaction (oracle-evaluated externals) and for minimality of its own
    reduct.  Answer sets are returned as frozensets of atom texts.
    """
    kwargs = {} if max_invention is None else {"max_invention": max_invention}
    gp = ground_program(program, registry, **kwargs)
    ordinary = gp.table.ordinary_ids()
    if len(ordinary) > max_atoms:
        raise GroundingError(
            "grounding has %d ordinary atoms, limit is %d" % (len(ordinary), max_atoms)
        )
    bit = {atom_id: 1 << i for i, atom_id in enumerate(ordinary)}
    fact_mask = 0
    for atom_id in gp.facts:
        fact_mask |= bit[atom_id]
    free_bits = [bit[a] for a in ordinary if a not in gp.facts]
    compiled = _compile_rules(gp, bit)
    oracles = _MaskOracles(gp, registry, bit)

    models = []
    for free in range(1 << len(free_bits)):
        mask = fact_mask
        probe = free
        for b in free_bits:
            if probe & 1:
                mask |= b
            probe >>= 1
        if _mask_satisfies(compiled, oracles, mask):
            models.append(mask)

    answer_masks = []
    for mask in models:
        reduct = _reduct_indices(compiled, oracles, mask)
        reduct_rules = [compiled[i] for i in reduct]
        true_free = [b for b in free_bits if mask & b]
        minimal = True
        for count in range(1, len(true_free) + 1):
            for removed in combinations(true_free, count):
                sub = mask
                for b in removed:
                    sub &= ~b
                if _subset_models(reduct_rules, oracles, sub):
                    minimal = False
                    break
            if not minimal:
                break
        if minimal:
            answer_masks.append(mask)

    out = set()
    for mask in answer_masks:
        out.add(
            frozenset(
                gp.table.text(a) for a in ordinary if mask & bit[a]
            )
        )
    return out


def _subset_models(reduct_rules, oracles, sub):
    for pos_mask, neg_mask, ext, head_mask in reduct_rules:
        if sub & pos_mask != pos_mask or sub & neg_mask:
            continue
        if all(oracles.truth(inst, sub) == positive for inst, positive in ext):
            if not (sub & head_mask):
                return False
    return True


# ---------------------------------------------------------------------------
# Weak-constraint costs


def weak_cost(gp, model_texts_or_truth, registry):
    """Cost per level of a model given as a set of true ordinary atom texts."""
    if isinstance(model_texts_or_truth, (set, frozenset)):
        texts = model_texts_or_truth
        truth = lambda a: gp.table.text(a) in texts
    else:
        mapping = model_texts_or_truth
        truth = lambda a: bool(mapping.get(a))
    cost = {}
    memo = {}
    for weak in gp.weak:
        if body_satisfied(gp, weak.body, truth, registry, memo):
            cost[weak.level] = cost.get(weak.level, 0) + weak.weight
    return cost


def cost_key(cost, gp):
    """Lexicographic key: higher levels dominate, lower cost is better."""
    levels = sorted({weak.level for weak in gp.weak}, reverse=True)
    return tuple(cost.get(level, 0) for level in levels)


def brute_force_optimum(program, registry, max_atoms=18):
    """Optimal cost vector and the optimal answer sets, by enumeration."""
    gp = ground_program(program, registry)
    answer_sets = brute_force_answer_sets(program, registry, max_atoms=max_atoms)
    best_key = None
    best_cost = {}
    best = []
    for texts in sorted(answer_sets, key=sorted):
        cost = weak_cost(gp, texts, registry)
        key = cost_key(cost, gp)
        if best_key is None or key < best_key:
            best_key = key
            best_cost = cost
            best = [texts]
        elif key == best_key:
            best.append(texts)
    return best_cost, best
