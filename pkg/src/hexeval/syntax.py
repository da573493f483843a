"""Program syntax: terms, atoms, rules, tokenizer, parser and the safety check.

The accepted language is a small ASP subset with one extension: external
atoms of the form ``&name[in1,...,ink](out1,...,outl)`` may occur in rule
bodies.  Statements end with ``.``; ``%`` starts a line comment; weak
constraints are written ``:~ body. [weight@level]``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import LexError, ParseError, SafetyError

_IDENT_RE = re.compile(r"[a-z][A-Za-z0-9_]*\Z")


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Constant:
    """Symbolic constant; printed quoted when not a plain identifier."""

    name: str

    def __str__(self):
        if _IDENT_RE.match(self.name):
            return self.name
        return '"%s"' % self.name.replace("\\", "\\\\").replace('"', '\\"')


@dataclass(frozen=True)
class Integer:
    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Variable:
    name: str

    def __post_init__(self):
        if not self.name or not self.name[0].isupper():
            raise ValueError("variable names must start uppercase: %r" % self.name)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Compound:
    functor: str
    args: tuple

    def __post_init__(self):
        if len(self.args) < 1:
            raise ValueError("compound terms need at least one argument")

    def __str__(self):
        return "%s(%s)" % (self.functor, ",".join(str(a) for a in self.args))


Term = Constant | Integer | Variable | Compound


def term_variables(term):
    """Set of variable names occurring in a term."""
    if isinstance(term, Variable):
        return {term.name}
    if isinstance(term, Compound):
        out = set()
        for a in term.args:
            out |= term_variables(a)
        return out
    return set()


def is_ground(term):
    return not term_variables(term)


def substitute(term, subst):
    if isinstance(term, Variable):
        return subst.get(term.name, term)
    if isinstance(term, Compound):
        return Compound(term.functor, tuple(substitute(a, subst) for a in term.args))
    return term


def subterms(term):
    """The term itself plus all nested argument terms."""
    yield term
    if isinstance(term, Compound):
        for a in term.args:
            yield from subterms(a)


def term_sort_key(term):
    """Total deterministic order over ground terms."""
    if isinstance(term, Integer):
        return (0, term.value, ())
    if isinstance(term, Constant):
        return (1, term.name, ())
    if isinstance(term, Compound):
        return (2, term.functor, tuple(term_sort_key(a) for a in term.args))
    return (3, term.name, ())


# ---------------------------------------------------------------------------
# Atoms, literals, rules


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple = ()

    def __str__(self):
        if not self.args:
            return self.predicate
        return "%s(%s)" % (self.predicate, ",".join(str(a) for a in self.args))


@dataclass(frozen=True)
class ExternalAtom:
    name: str
    inputs: tuple = ()
    outputs: tuple = ()

    def __str__(self):
        text = "&" + self.name
        if self.inputs:
            text += "[%s]" % ",".join(str(t) for t in self.inputs)
        if self.outputs:
            text += "(%s)" % ",".join(str(t) for t in self.outputs)
        return text


@dataclass(frozen=True)
class Literal:
    atom: Atom | ExternalAtom
    negated: bool = False

    def __str__(self):
        return ("not " if self.negated else "") + str(self.atom)


@dataclass(frozen=True)
class Rule:
    head: tuple = ()
    body: tuple = ()

    def __str__(self):
        head = " | ".join(str(a) for a in self.head)
        if not self.body:
            return head + "."
        body = ", ".join(str(l) for l in self.body)
        if not self.head:
            return ":- %s." % body
        return "%s :- %s." % (head, body)


@dataclass(frozen=True)
class WeakConstraint:
    body: tuple
    weight: int
    level: int

    def __str__(self):
        return ":~ %s. [%d@%d]" % (
            ", ".join(str(l) for l in self.body),
            self.weight,
            self.level,
        )


@dataclass(frozen=True)
class Program:
    rules: tuple = ()
    weak_constraints: tuple = ()

    def __str__(self):
        parts = [str(r) for r in self.rules]
        parts += [str(w) for w in self.weak_constraints]
        return "\n".join(parts)


def atom_variables(atom):
    out = set()
    if isinstance(atom, Atom):
        for t in atom.args:
            out |= term_variables(t)
    else:
        for t in atom.inputs:
            out |= term_variables(t)
        for t in atom.outputs:
            out |= term_variables(t)
    return out


# ---------------------------------------------------------------------------
# Tokenizer

_PUNCT = {
    ":-": "if",
    ":~": "weakif",
    ".": "dot",
    ",": "comma",
    "(": "lpar",
    ")": "rpar",
    "[": "lbracket",
    "]": "rbracket",
    "&": "amp",
    "|": "pipe",
    "@": "at",
    "-": "minus",
}


@dataclass(frozen=True)
class Token:
    type: str
    value: str
    line: int
    col: int


def tokenize(text):
    """Split program text into tokens, tracking 1-based line/column."""
    tokens = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def advance(k):
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if ch == "%":
            while i < n and text[i] != "\n":
                advance(1)
            continue
        start_line, start_col = line, col
        if ch == '"':
            advance(1)
            buf = []
            while True:
                if i >= n or text[i] == "\n":
                    raise LexError("unterminated string", start_line, start_col)
                c = text[i]
                if c == "\\":
                    if i + 1 >= n:
                        raise LexError("unterminated string", start_line, start_col)
                    nxt = text[i + 1]
                    if nxt not in ('"', "\\"):
                        raise LexError("bad escape \\%s" % nxt, line, col)
                    buf.append(nxt)
                    advance(2)
                    continue
                if c == '"':
                    advance(1)
                    break
                buf.append(c)
                advance(1)
            tokens.append(Token("str", "".join(buf), start_line, start_col))
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", text[i:j], start_line, start_col))
            advance(j - i)
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            if word == "not":
                kind = "not"
            elif word[0].isupper():
                kind = "var"
            elif word[0] == "_":
                raise LexError("identifiers may not start with '_'", start_line, start_col)
            else:
                kind = "ident"
            tokens.append(Token(kind, word, start_line, start_col))
            advance(j - i)
            continue
        two = text[i : i + 2]
        if len(two) == 2 and two in _PUNCT:
            tokens.append(Token(_PUNCT[two], two, start_line, start_col))
            advance(2)
            continue
        if ch in _PUNCT:
            tokens.append(Token(_PUNCT[ch], ch, start_line, start_col))
            advance(1)
            continue
        raise LexError("illegal character %r" % ch, start_line, start_col)
    tokens.append(Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0
        self.arities = {}  # predicate -> first seen arity

    @property
    def cur(self):
        return self.tokens[self.pos]

    def fail(self, message):
        raise ParseError(message, self.cur.line, self.cur.col)

    def accept(self, kind):
        if self.cur.type == kind:
            tok = self.cur
            self.pos += 1
            return tok
        return None

    def expect(self, kind, what=None):
        tok = self.accept(kind)
        if tok is None:
            self.fail("expected %s, found %r" % (what or kind, self.cur.value or "end of input"))
        return tok

    def parse(self):
        rules = []
        weaks = []
        while self.cur.type != "eof":
            if self.accept("weakif"):
                weaks.append(self.weak_constraint())
            else:
                rules.append(self.rule())
        return Program(tuple(rules), tuple(weaks))

    def rule(self):
        head = []
        if self.cur.type != "if":
            head.append(self.head_atom())
            while self.accept("pipe"):
                head.append(self.head_atom())
        body = []
        if self.accept("if"):
            body = self.body()
        self.expect("dot", "'.'")
        rule = Rule(tuple(head), tuple(body))
        unsafe = unsafe_variables(rule)
        if unsafe:
            raise SafetyError(str(rule), unsafe)
        return rule

    def weak_constraint(self):
        body = self.body()
        self.expect("dot", "'.'")
        self.expect("lbracket", "'['")
        weight = self.integer()
        self.expect("at", "'@'")
        level = self.integer()
        if level < 0:
            self.fail("weak constraint levels must be nonnegative")
        self.expect("rbracket", "']'")
        weak = WeakConstraint(tuple(body), weight, level)
        unsafe = unsafe_variables_of_body(weak.body)
        if unsafe:
            raise SafetyError(str(weak), unsafe)
        return weak

    def integer(self):
        neg = self.accept("minus") is not None
        tok = self.expect("int", "integer")
        value = int(tok.value)
        return -value if neg else value

    def body(self):
        literals = [self.literal()]
        while self.accept("comma"):
            literals.append(self.literal())
        return literals

    def literal(self):
        negated = self.accept("not") is not None
        if self.cur.type == "amp":
            return Literal(self.external_atom(), negated)
        return Literal(self.ordinary_atom(), negated)

    def head_atom(self):
        if self.cur.type == "amp":
            self.fail("external atoms may not occur in rule heads")
        return self.ordinary_atom()

    def ordinary_atom(self):
        tok = self.expect("ident", "predicate name")
        args = ()
        if self.accept("lpar"):
            args = tuple(self.terms())
            self.expect("rpar", "')'")
        seen = self.arities.get(tok.value)
        if seen is None:
            self.arities[tok.value] = len(args)
        elif seen != len(args):
            raise ParseError(
                "predicate %s used with arity %d after arity %d"
                % (tok.value, len(args), seen),
                tok.line,
                tok.col,
            )
        return Atom(tok.value, args)

    def external_atom(self):
        self.expect("amp", "'&'")
        tok = self.expect("ident", "external predicate name")
        inputs = ()
        outputs = ()
        if self.accept("lbracket"):
            inputs = tuple(self.terms())
            self.expect("rbracket", "']'")
        if self.accept("lpar"):
            outputs = tuple(self.terms())
            self.expect("rpar", "')'")
        return ExternalAtom(tok.value, inputs, outputs)

    def terms(self):
        out = [self.term()]
        while self.accept("comma"):
            out.append(self.term())
        return out

    def term(self):
        tok = self.cur
        if tok.type == "var":
            self.pos += 1
            return Variable(tok.value)
        if tok.type == "int":
            self.pos += 1
            return Integer(int(tok.value))
        if tok.type == "minus":
            self.pos += 1
            num = self.expect("int", "integer")
            return Integer(-int(num.value))
        if tok.type == "str":
            self.pos += 1
            return Constant(tok.value)
        if tok.type == "ident":
            self.pos += 1
            if self.accept("lpar"):
                args = tuple(self.terms())
                self.expect("rpar", "')'")
                return Compound(tok.value, args)
            return Constant(tok.value)
        self.fail("expected a term, found %r" % (tok.value or "end of input"))


def parse_program(text):
    """Parse program text into a validated Program.

    Raises LexError/ParseError with a location or SafetyError naming the
    unsafe variables of the offending rule.
    """
    return _Parser(tokenize(text)).parse()


# ---------------------------------------------------------------------------
# Safety


def _safe_closure(body):
    safe = set()
    changed = True
    while changed:
        changed = False
        for lit in body:
            if lit.negated:
                continue
            if isinstance(lit.atom, Atom):
                for t in lit.atom.args:
                    vs = term_variables(t)
                    if not vs <= safe:
                        safe |= vs
                        changed = True
            else:
                invars = set()
                for t in lit.atom.inputs:
                    invars |= term_variables(t)
                if invars <= safe:
                    for t in lit.atom.outputs:
                        vs = term_variables(t)
                        if not vs <= safe:
                            safe |= vs
                            changed = True
    return safe


def unsafe_variables_of_body(body, extra_vars=()):
    all_vars = set(extra_vars)
    for lit in body:
        all_vars |= atom_variables(lit.atom)
    return tuple(sorted(all_vars - _safe_closure(body)))


def unsafe_variables(rule):
    head_vars = set()
    for atom in rule.head:
        head_vars |= atom_variables(atom)
    return unsafe_variables_of_body(rule.body, head_vars)


def check_safety(rule, registry=None):
    """Return the tuple of unsafe variable names (empty means the rule is safe).

    With a registry, also validates that every external atom resolves to a
    registered plugin with matching input/output arities.
    """
    if registry is not None:
        for lit in rule.body:
            if isinstance(lit.atom, ExternalAtom):
                desc = registry.resolve(lit.atom.name)
                desc.check_arities(lit.atom)
    return unsafe_variables(rule)
