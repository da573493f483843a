"""Conflict-driven nogood learning search over the guessing translation.

Model candidates are complete assignments satisfying the rule, guess and
support nogoods.  External guesses are checked against their oracles (early,
under partial assignments, when partial evaluation is on) and the resulting
input-output nogoods are learned and optionally minimized.  Compatible
candidates pass the reduct minimality check unless dependency analysis
proves it unnecessary for the whole program.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .grounding import ORDINARY, REPL_POS
from .interface import (
    Verdict,
    default_learn_nogood,
    evaluate_oracle,
    learn_partial_nogood,
    make_validator,
    minimize_nogood,
)
from .semantics import (
    body_satisfied,
    build_dependency_graph,
    cost_key,
    flp_reduct,
    is_minimal_model,
    needs_flp_check,
)

FLP_MODES = ("explicit", "skip-auto", "off")
MINIMIZATION_MODES = ("off", "deletion", "quickxplain")


@dataclass
class SolverConfig:
    partial_eval: bool = True
    eval_frequency: int = 1
    minimization: str = "deletion"
    flp_mode: str = "skip-auto"
    max_models: int = 0  # 0 enumerates everything
    optimization: bool = False

    def __post_init__(self):
        if self.eval_frequency < 1:
            raise ValueError("eval_frequency must be at least 1")
        if self.minimization not in MINIMIZATION_MODES:
            raise ValueError("bad minimization mode %r" % self.minimization)
        if self.flp_mode not in FLP_MODES:
            raise ValueError("bad flp mode %r" % self.flp_mode)


@dataclass
class SolverStats:
    """Counters over one solve run; external_calls covers oracle queries
    issued by the search (hooks, compatibility checks, minimization)."""

    decisions: int = 0
    conflicts: int = 0
    external_calls: int = 0
    candidates_checked: int = 0
    candidates_incompatible: int = 0
    flp_checks_run: int = 0
    flp_checks_skipped: int = 0
    flp_rejected: int = 0
    models: int = 0

    def lines(self):
        return [
            "Decisions      : %d" % self.decisions,
            "Conflicts      : %d" % self.conflicts,
            "External calls : %d" % self.external_calls,
            "Candidates     : %d" % self.candidates_checked,
            "Incompatible   : %d" % self.candidates_incompatible,
            "FLP checks run : %d" % self.flp_checks_run,
            "FLP skipped    : %d" % self.flp_checks_skipped,
            "FLP rejected   : %d" % self.flp_rejected,
            "Models         : %d" % self.models,
        ]


# ---------------------------------------------------------------------------
# Assignment


class Assignment:
    """Three-valued trail-based assignment with decision levels."""

    def __init__(self, num_atoms):
        self.num_atoms = num_atoms
        self.values = [None] * (num_atoms + 1)
        self.level_of = [0] * (num_atoms + 1)
        self.pos_of = [-1] * (num_atoms + 1)
        self.reason_of = [None] * (num_atoms + 1)
        self.trail = []
        self.level_starts = []
        self.qhead = 0

    @property
    def current_level(self):
        return len(self.level_starts)

    def value(self, atom_id):
        return self.values[atom_id]

    def satisfied(self, lit):
        v = self.values[lit if lit > 0 else -lit]
        return v is not None and v == (lit > 0)

    def unassigned(self, lit):
        return self.values[lit if lit > 0 else -lit] is None

    def assign(self, lit, reason):
        atom_id = lit if lit > 0 else -lit
        assert self.values[atom_id] is None
        self.values[atom_id] = lit > 0
        self.level_of[atom_id] = self.current_level
        self.pos_of[atom_id] = len(self.trail)
        self.reason_of[atom_id] = reason
        self.trail.append(lit)

    def new_level(self):
        self.level_starts.append(len(self.trail))

    def backjump(self, level):
        if level >= self.current_level:
            return
        cut = self.level_starts[level]
        for lit in self.trail[cut:]:
            atom_id = lit if lit > 0 else -lit
            self.values[atom_id] = None
            self.reason_of[atom_id] = None
        del self.trail[cut:]
        del self.level_starts[level:]
        self.qhead = min(self.qhead, len(self.trail))

    def complete(self):
        return len(self.trail) == self.num_atoms


# ---------------------------------------------------------------------------
# Nogood store with two watched literals


class NogoodStore:
    """Static and learned nogoods indexed for unit propagation.

    A nogood fires when all its signed literals are satisfied; watches sit
    on two non-satisfied literals so only satisfaction events are visited.
    """

    def __init__(self):
        self.nogoods = []
        self.watchers = {}
        self.watch_lits = []

    def __len__(self):
        return len(self.nogoods)

    def _watch(self, lit, idx):
        self.watchers.setdefault(lit, []).append(idx)

    def add(self, literals, assignment):
        """Insert a nogood under the current assignment.

        Returns ("ok", None), ("unit", (literal, nogood)) when the literal's
        complement must be asserted, or ("conflict", nogood).
        """
        ng = tuple(sorted(set(literals), key=lambda l: (abs(l), l)))
        assert ng, "empty nogood"
        assert all(-l not in ng for l in ng), "tautological nogood %r" % (ng,)
        idx = len(self.nogoods)
        self.nogoods.append(ng)
        if len(ng) == 1:
            lit = ng[0]
            self._watch(lit, idx)
            self.watch_lits.append([lit, lit])
            if assignment.satisfied(lit):
                return ("conflict", ng)
            if assignment.unassigned(lit):
                return ("unit", (lit, ng))
            return ("ok", None)
        non_sat = [l for l in ng if not assignment.satisfied(l)]
        if len(non_sat) >= 2:
            first, second = non_sat[0], non_sat[1]
            status = ("ok", None)
        elif len(non_sat) == 1:
            first = non_sat[0]
            by_age = sorted(
                (l for l in ng if l != first),
                key=lambda l: assignment.pos_of[abs(l)],
            )
            second = by_age[-1]
            if assignment.unassigned(first):
                status = ("unit", (first, ng))
            else:
                status = ("ok", None)  # defused: first is falsified
        else:
            by_age = sorted(ng, key=lambda l: assignment.pos_of[abs(l)])
            first, second = by_age[-1], by_age[-2]
            status = ("conflict", ng)
        self._watch(first, idx)
        self._watch(second, idx)
        self.watch_lits.append([first, second])
        return status


def propagate(assignment, store):
    """Run unit propagation to fixpoint; returns a violated nogood or None."""
    trail = assignment.trail
    while assignment.qhead < len(trail):
        lit = trail[assignment.qhead]
        assignment.qhead += 1
        watchers = store.watchers.get(lit)
        if not watchers:
            continue
        i = 0
        while i < len(watchers):
            idx = watchers[i]
            ng = store.nogoods[idx]
            if len(ng) == 1:
                return ng
            pair = store.watch_lits[idx]
            other = pair[1] if pair[0] == lit else pair[0]
            replacement = None
            for cand in ng:
                if cand != other and not assignment.satisfied(cand):
                    replacement = cand
                    break
            if replacement is not None:
                pair[0 if pair[0] == lit else 1] = replacement
                store.watchers.setdefault(replacement, []).append(idx)
                watchers[i] = watchers[-1]
                watchers.pop()
                continue
            if assignment.satisfied(other):
                return ng
            if assignment.values[abs(other)] is None:
                assignment.assign(-other, ng)
            i += 1
    return None


# ---------------------------------------------------------------------------
# Decisions and conflict analysis


class ActivityHeuristic:
    """Conflict-activity ordering; ascending-id tie break; prefers false."""

    def __init__(self, num_atoms, decay=0.95):
        self.activity = [0.0] * (num_atoms + 1)
        self.increment = 1.0
        self.decay_factor = decay

    def bump(self, atom_id):
        self.activity[atom_id] += self.increment
        if self.activity[atom_id] > 1e100:
            self.activity = [a * 1e-100 for a in self.activity]
            self.increment *= 1e-100

    def decay(self):
        self.increment /= self.decay_factor

    def pick(self, assignment):
        values = assignment.values
        activity = self.activity
        best = 0
        best_activity = -1.0
        for atom_id in range(1, len(values)):
            if values[atom_id] is None and activity[atom_id] > best_activity:
                best = atom_id
                best_activity = activity[atom_id]
        assert best, "decide called with a complete assignment"
        return -best


def decide(assignment, heuristic):
    """Open a new level and assign the heuristic's literal."""
    lit = heuristic.pick(assignment)
    assignment.new_level()
    assignment.assign(lit, None)
    return lit


def analyze_conflict(conflict, assignment, heuristic=None):
    """First-UIP resolution.

    Expects the maximal decision level among the conflict's literals to be
    the current one.  Returns (learned nogood, backjump level, uip literal),
    or None when every literal sits at level 0 (unsatisfiable).
    """
    level_of = assignment.level_of
    pos_of = assignment.pos_of
    level = assignment.current_level
    if all(level_of[abs(l)] == 0 for l in conflict):
        return None
    current = set(conflict)
    while True:
        at_level = [l for l in current if level_of[abs(l)] == level]
        assert at_level, "conflict below the current decision level"
        if len(at_level) == 1:
            uip = at_level[0]
            break
        lit = max(at_level, key=lambda l: pos_of[abs(l)])
        reason = assignment.reason_of[abs(lit)]
        assert reason is not None, "cannot resolve a decision literal"
        if heuristic is not None:
            heuristic.bump(abs(lit))
        current.remove(lit)
        for other in reason:
            if abs(other) != abs(lit):
                current.add(other)
    learned = tuple(sorted(current, key=lambda l: (abs(l), l)))
    if heuristic is not None:
        for l in learned:
            heuristic.bump(abs(l))
    backjump_level = max(
        (level_of[abs(l)] for l in current if l != uip), default=0
    )
    return learned, backjump_level, uip


# ---------------------------------------------------------------------------
# Static encoding


@dataclass
class Encoding:
    num_atoms: int
    nogoods: list
    aux_texts: dict
    body_atoms: dict
    weak_atoms: list


def encode_static_nogoods(gp):
    """Rule, guess and completion-support nogoods for a ground program.

    Support is routed through auxiliary body atoms (one per distinct body)
    so a true non-fact atom needs some rule body that derives it.  Weak
    constraint bodies reuse the same auxiliary atoms.
    """
    nogoods = []
    aux_texts = {}
    body_atoms = {}
    next_id = len(gp.table)

    def push(literals):
        ng = tuple(sorted(set(literals), key=lambda l: (abs(l), l)))
        if any(-l in ng for l in ng):
            return  # tautology: can never be violated
        nogoods.append(ng)

    def body_atom(body):
        aux = body_atoms.get(body)
        if aux is not None:
            return aux
        nonlocal next_id
        next_id += 1
        aux = next_id
        aux_texts[aux] = "@body%d" % len(body_atoms)
        body_atoms[body] = aux
        for lit in body:
            push((aux, -lit))
        push(tuple(body) + (-aux,))
        return aux

    for e_id, ne_id in gp.guesses:
        push((-e_id, -ne_id))
        push((e_id, ne_id))

    for rule in gp.rules:
        push(tuple(rule.body) + tuple(-h for h in rule.head))

    supports = {}
    for rule in gp.rules:
        for head_id in set(rule.head):
            if supports.get(head_id) is True:
                continue
            if not rule.body:
                supports[head_id] = True
            else:
                supports.setdefault(head_id, {})[body_atom(tuple(rule.body))] = None

    for atom_id in gp.table.ordinary_ids():
        if atom_id in gp.facts:
            continue
        sup = supports.get(atom_id)
        if sup is True:
            continue
        if not sup:
            push((atom_id,))
        else:
            push((atom_id,) + tuple(-aux for aux in sup))

    weak_atoms = [body_atom(weak.body) for weak in gp.weak]

    return Encoding(
        num_atoms=next_id,
        nogoods=nogoods,
        aux_texts=aux_texts,
        body_atoms=body_atoms,
        weak_atoms=weak_atoms,
    )


# ---------------------------------------------------------------------------
# External evaluation hooks


def _minimized(nogood, instance, registry, verdict, mode, stats=None):
    if mode == "off" or len(nogood) == 1:
        return nogood
    validator = make_validator(instance, registry, verdict)
    if stats is not None:
        plain = validator

        def validator(candidate):
            stats.external_calls += 1
            return plain(candidate)

    return minimize_nogood(nogood, validator, mode)


def external_propagation_hook(gp, assignment, registry, config, stats=None):
    """Input-output nogoods for every instance decidable right now.

    Gated on partial evaluation for incomplete assignments; the verdicts
    confirm or refute the replacement guesses and both directions yield a
    learnable nogood.
    """
    if not config.partial_eval and not assignment.complete():
        return []
    values = assignment.values
    out = []
    for instance in gp.externals:
        partial = {a: values[a] for a in instance.relevant_input_atoms}
        if stats is not None:
            stats.external_calls += 1
        verdict = evaluate_oracle(instance, partial, registry)
        if verdict is Verdict.UNKNOWN:
            continue
        nogood = learn_partial_nogood(instance, partial, verdict)
        out.append(_minimized(nogood, instance, registry, verdict, config.minimization, stats))
    return out


def verify_candidate(gp, candidate, registry, config=None, stats=None):
    """Check a complete candidate against every oracle.

    Returns the empty list when compatible, otherwise one (minimized)
    complete-assignment nogood per mismatched guess.
    """
    mode = config.minimization if config is not None else "off"
    mismatches = []
    for instance in gp.externals:
        partial = {a: candidate[a] for a in instance.relevant_input_atoms}
        if stats is not None:
            stats.external_calls += 1
        verdict = evaluate_oracle(instance, partial, registry)
        if (verdict is Verdict.TRUE) == candidate[instance.replacement_id]:
            continue
        nogood = default_learn_nogood(instance, partial, verdict)
        mismatches.append(_minimized(nogood, instance, registry, verdict, mode, stats))
    return mismatches


# ---------------------------------------------------------------------------
# The solver


class Solver:
    """Enumerates the answer sets of one ground program.

    A single instance is single-threaded; separate instances may share the
    (immutable) ground program and frozen registry.
    """

    def __init__(self, gp, registry, config=None, extra_nogoods=()):
        self.gp = gp
        self.registry = registry.freeze()
        self.config = config if config is not None else SolverConfig()
        self.encoding = encode_static_nogoods(gp)
        self.assignment = Assignment(self.encoding.num_atoms)
        self.store = NogoodStore()
        self.heuristic = ActivityHeuristic(self.encoding.num_atoms)
        self.stats = SolverStats()
        self.graph = build_dependency_graph(gp, registry)
        # disjunctive heads route through the explicit minimality check
        self.flp_needed = needs_flp_check(self.graph) or gp.has_disjunctive_heads
        self.learned_nogoods = []
        self.extra_nogoods = list(extra_nogoods)
        self._seen_external = set()
        self._seen_raw = set()  # unminimized nogoods, to skip re-minimization
        self._oracle_cache = {}  # two-valued verdicts shared across FLP checks
        self._reduct_memo = {}
        self._decisions_since_eval = 0
        self._exhausted = False
        self._started = False

    # -- plumbing

    def _integrate(self, literals):
        status, payload = self.store.add(literals, self.assignment)
        if status == "conflict":
            return payload
        if status == "unit":
            lit, reason = payload
            self.assignment.assign(-lit, reason)
        return None

    def _handle_conflict(self, conflict):
        self.stats.conflicts += 1
        max_level = max(self.assignment.level_of[abs(l)] for l in conflict)
        if max_level == 0:
            return False
        self.assignment.backjump(max_level)
        analysis = analyze_conflict(conflict, self.assignment, self.heuristic)
        if analysis is None:
            return False
        learned, backjump_level, uip = analysis
        self.assignment.backjump(backjump_level)
        status, payload = self.store.add(learned, self.assignment)
        if status == "conflict":
            return self._handle_conflict(payload)
        if status == "unit":
            lit, reason = payload
            self.assignment.assign(-lit, reason)
        self.heuristic.decay()
        return True

    def _bootstrap(self):
        assignment = self.assignment
        for ng in self.encoding.nogoods:
            status, payload = self.store.add(ng, assignment)
            if status == "conflict":
                return False
            if status == "unit":
                lit, reason = payload
                if assignment.unassigned(lit):
                    assignment.assign(-lit, reason)
                elif assignment.satisfied(lit):
                    return False
        for atom_id in sorted(self.gp.facts):
            value = assignment.values[atom_id]
            if value is False:
                return False
            if value is None:
                assignment.assign(atom_id, None)
        for extra in self.extra_nogoods:
            conflict = self._integrate(tuple(extra))
            if conflict is not None:
                return False
        return propagate(assignment, self.store) is None

    def _record_learned(self, nogood):
        if nogood in self._seen_external:
            return False
        self._seen_external.add(nogood)
        self.learned_nogoods.append(nogood)
        return True

    def _external_hook(self):
        values = self.assignment.values
        conflict = None
        for instance in self.gp.externals:
            partial = {a: values[a] for a in instance.relevant_input_atoms}
            self.stats.external_calls += 1
            verdict = evaluate_oracle(instance, partial, self.registry)
            if verdict is Verdict.UNKNOWN:
                continue
            raw = learn_partial_nogood(instance, partial, verdict)
            if raw in self._seen_raw:
                continue  # already minimized and stored earlier
            self._seen_raw.add(raw)
            nogood = _minimized(
                raw, instance, self.registry, verdict, self.config.minimization, self.stats
            )
            if not self._record_learned(nogood):
                continue
            found = self._integrate(nogood)
            if found is not None and conflict is None:
                conflict = found
        return conflict

    def _candidate_truth(self):
        values = self.assignment.values
        table = self.gp.table
        return {
            atom_id: values[atom_id]
            for atom_id in table.ids()
            if table.kind(atom_id) in (ORDINARY, REPL_POS)
        }

    def _block_candidate(self, candidate):
        if not candidate:
            return False  # empty grounding: the unique candidate is done
        literals = tuple(
            atom_id if value else -atom_id for atom_id, value in candidate.items()
        )
        conflict = self._integrate(literals) or literals
        return self._handle_conflict(conflict)

    def _handle_candidate(self):
        self.stats.candidates_checked += 1
        candidate = self._candidate_truth()
        mismatches = verify_candidate(
            self.gp, candidate, self.registry, self.config, self.stats
        )
        if mismatches:
            self.stats.candidates_incompatible += 1
            conflict = None
            for nogood in mismatches:
                self._record_learned(nogood)
                found = self._integrate(nogood)
                if found is not None and conflict is None:
                    conflict = found
            assert conflict is not None, "mismatch nogood must be violated"
            if not self._handle_conflict(conflict):
                self._exhausted = True
            return None
        run_check = self.config.flp_mode == "explicit" or (
            self.config.flp_mode == "skip-auto" and self.flp_needed
        )
        if run_check:
            self.stats.flp_checks_run += 1
            reduct = flp_reduct(self.gp, candidate, self.registry, self._reduct_memo)
            if not is_minimal_model(reduct, candidate, self.registry, self._oracle_cache):
                self.stats.flp_rejected += 1
                if not self._block_candidate(candidate):
                    self._exhausted = True
                return None
        else:
            self.stats.flp_checks_skipped += 1
        model = frozenset(
            atom_id
            for atom_id in self.gp.table.ordinary_ids()
            if self.assignment.values[atom_id]
        )
        if not self._block_candidate(candidate):
            self._exhausted = True
        return model

    def add_nogood(self, literals):
        """Inject a sound nogood between models during enumeration."""
        conflict = self._integrate(tuple(literals))
        if conflict is not None and not self._handle_conflict(conflict):
            self._exhausted = True

    # -- enumeration

    def models(self):
        """Generate answer sets as frozensets of true ordinary atom ids."""
        assert not self._started, "a Solver instance enumerates once"
        self._started = True
        if not self._bootstrap():
            return
        while True:
            if self._exhausted:
                return
            conflict = propagate(self.assignment, self.store)
            if conflict is not None:
                if not self._handle_conflict(conflict):
                    return
                continue
            if self.assignment.complete():
                model = self._handle_candidate()
                if model is not None:
                    self.stats.models += 1
                    yield model
                    if self.config.max_models and self.stats.models >= self.config.max_models:
                        return
                continue
            if (
                self.config.partial_eval
                and self._decisions_since_eval >= self.config.eval_frequency
            ):
                self._decisions_since_eval = 0
                conflict = self._external_hook()
                if conflict is not None:
                    if not self._handle_conflict(conflict):
                        return
                    continue
                if self.assignment.qhead < len(self.assignment.trail):
                    continue
            decide(self.assignment, self.heuristic)
            self.stats.decisions += 1
            self._decisions_since_eval += 1


@dataclass
class SolveResult:
    gp: object
    answer_sets: list
    stats: SolverStats
    learned_nogoods: tuple

    def answer_texts(self):
        table = self.gp.table
        return {
            frozenset(table.text(a) for a in model) for model in self.answer_sets
        }


def solve(gp, registry, config=None, extra_nogoods=()):
    """Enumerate all answer sets of a ground program."""
    solver = Solver(gp, registry, config, extra_nogoods)
    models = list(solver.models())
    return SolveResult(gp, models, solver.stats, tuple(solver.learned_nogoods))


@dataclass
class OptimizeResult:
    gp: object
    cost: dict
    answer_sets: list
    stats: SolverStats

    def answer_texts(self):
        table = self.gp.table
        return {
            frozenset(table.text(a) for a in model) for model in self.answer_sets
        }


def optimize(gp, registry, config=None):
    """Find the answer sets with lexicographically least weak-constraint cost.

    Levels are compared in descending order.  With nonnegative weights each
    improving model adds a bound nogood forbidding any superset of its
    violated weak constraints; equal-cost optima pruned that way are not
    reported, but the optimal cost itself is exact.
    """
    solver = Solver(gp, registry, config)
    gp_weak = solver.gp.weak
    nonneg = all(weak.weight >= 0 for weak in gp_weak)
    best_key = None
    best_cost = {}
    best_models = []
    for model in solver.models():
        truth = lambda atom_id: atom_id in model
        memo = {}
        cost = {}
        violated = []
        for i, weak in enumerate(gp_weak):
            if body_satisfied(solver.gp, weak.body, truth, solver.registry, memo):
                cost[weak.level] = cost.get(weak.level, 0) + weak.weight
                violated.append(solver.encoding.weak_atoms[i])
        key = cost_key(cost, solver.gp)
        if best_key is None or key < best_key:
            best_key = key
            best_cost = cost
            best_models = [model]
            if nonneg and violated:
                solver.add_nogood(violated)
        elif key == best_key:
            best_models.append(model)
    return OptimizeResult(solver.gp, best_cost, best_models, solver.stats)
