"""First-order terms and anti-unification.

Terms are the feature language attached to outline stages.  The central
operation is the least general generalization (anti-unification): the most
specific term that subsumes all inputs, with mismatching subterm pairs mapped
to shared variables.

Text grammar (also used in outline files and model output):

    term     := variable | constant | compound
    variable := NAME starting with an uppercase letter or "_"
    constant := NAME starting with a lowercase letter or digit
    compound := NAME "(" term ("," term)* ")"
    NAME     := [A-Za-z0-9_][A-Za-z0-9_-]*

JSON encoding: {"kind": "var", "name": ...} | {"kind": "const", "symbol": ...}
| {"kind": "compound", "functor": ..., "args": [...]}.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .errors import ParseFailure, ValidationFailure


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Constant:
    symbol: str

    def __str__(self) -> str:
        return self.symbol


@dataclass(frozen=True)
class Compound:
    functor: str
    args: tuple["Term", ...]

    def __post_init__(self):
        if not self.functor:
            raise ValidationFailure("compound functor must be non-empty")
        if not self.args:
            raise ValidationFailure("compound arity must be >= 1")

    def __str__(self) -> str:
        return f"{self.functor}({', '.join(str(a) for a in self.args)})"


Term = Union[Variable, Constant, Compound]


def is_ground(term: Term) -> bool:
    """True when the term contains no variables."""
    if isinstance(term, Variable):
        return False
    if isinstance(term, Constant):
        return True
    return all(is_ground(a) for a in term.args)


def variables(term: Term) -> list[Variable]:
    """Variables in pre-order, first occurrence only."""
    seen: list[Variable] = []

    def walk(t: Term):
        if isinstance(t, Variable):
            if t not in seen:
                seen.append(t)
        elif isinstance(t, Compound):
            for a in t.args:
                walk(a)

    walk(term)
    return seen


def rename_canonical(term: Term) -> Term:
    """Rename variables to X1, X2, ... in pre-order first-occurrence order."""
    mapping = {v: Variable(f"X{i + 1}") for i, v in enumerate(variables(term))}
    return substitute(term, mapping)


def substitute(term: Term, mapping: dict[Variable, Term]) -> Term:
    if isinstance(term, Variable):
        return mapping.get(term, term)
    if isinstance(term, Constant):
        return term
    return Compound(term.functor, tuple(substitute(a, mapping) for a in term.args))


def lgg2(s: Term, t: Term) -> Term:
    """Least general generalization of two terms.

    Equal subterms map to themselves; compounds with the same functor and
    arity generalize argument-wise; every other pair becomes a variable, and
    repeated occurrences of the same (s, t) pair reuse the same variable.
    Variables are named X1, X2, ... in first-occurrence order, skipping names
    already used by the inputs so surviving input variables are not captured.
    """
    memo: dict[tuple[Term, Term], Variable] = {}
    used = {v.name for v in variables(s)} | {v.name for v in variables(t)}
    counter = [0]

    def fresh() -> Variable:
        while True:
            counter[0] += 1
            name = f"X{counter[0]}"
            if name not in used:
                return Variable(name)

    def gen(a: Term, b: Term) -> Term:
        if a == b:
            return a
        if (
            isinstance(a, Compound)
            and isinstance(b, Compound)
            and a.functor == b.functor
            and len(a.args) == len(b.args)
        ):
            return Compound(a.functor, tuple(gen(x, y) for x, y in zip(a.args, b.args)))
        key = (a, b)
        if key not in memo:
            memo[key] = fresh()
        return memo[key]

    return gen(s, t)


def lggN(terms: list[Term]) -> Term:
    """Fold lgg2 over a non-empty term list; canonically renamed.

    The result subsumes every input and is permutation-invariant up to
    variable renaming.
    """
    if not terms:
        raise ValidationFailure("lggN requires at least one term")
    acc = terms[0]
    for t in terms[1:]:
        acc = lgg2(acc, t)
    return rename_canonical(acc)


def match(general: Term, specific: Term, binding: Optional[dict[Variable, Term]] = None
          ) -> Optional[dict[Variable, Term]]:
    """One-way matching: a substitution mapping general onto specific, or None.

    The substitution is consistent: a variable already bound must map to the
    identical term on every later occurrence.
    """
    if binding is None:
        binding = {}
    if isinstance(general, Variable):
        if general in binding:
            return binding if binding[general] == specific else None
        binding[general] = specific
        return binding
    if isinstance(general, Constant):
        return binding if general == specific else None
    if (
        isinstance(specific, Compound)
        and general.functor == specific.functor
        and len(general.args) == len(specific.args)
    ):
        for g, s in zip(general.args, specific.args):
            binding = match(g, s, binding)
            if binding is None:
                return None
        return binding
    return None


def subsumes(general: Term, specific: Term) -> bool:
    """True iff some consistent substitution maps general onto specific."""
    return match(general, specific) is not None


def variants(s: Term, t: Term) -> bool:
    """True when s and t are equal up to variable renaming."""
    return subsumes(s, t) and subsumes(t, s)


# --- text grammar ---

_NAME = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_-]*")


def parse_term(text: str) -> Term:
    """Parse the term text grammar; raises ParseFailure with position info."""
    term, pos = _parse(text, 0)
    pos = _skip_ws(text, pos)
    if pos != len(text):
        raise ParseFailure(f"trailing input at column {pos + 1}: {text[pos:]!r}")
    return term


def _skip_ws(text: str, pos: int) -> int:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos


def _parse(text: str, pos: int) -> tuple[Term, int]:
    pos = _skip_ws(text, pos)
    m = _NAME.match(text, pos)
    if not m:
        raise ParseFailure(f"expected a name at column {pos + 1} in {text!r}")
    name = m.group(0)
    pos = m.end()
    if pos < len(text) and text[pos] == "(":
        args = []
        pos += 1
        while True:
            arg, pos = _parse(text, pos)
            args.append(arg)
            pos = _skip_ws(text, pos)
            if pos >= len(text):
                raise ParseFailure(f"unterminated argument list in {text!r}")
            if text[pos] == ",":
                pos += 1
                continue
            if text[pos] == ")":
                pos += 1
                break
            raise ParseFailure(f"expected ',' or ')' at column {pos + 1} in {text!r}")
        return Compound(name, tuple(args)), pos
    if name[0].isupper() or name[0] == "_":
        return Variable(name), pos
    return Constant(name), pos


def format_term(term: Term) -> str:
    return str(term)


# --- JSON codec ---

def term_to_dict(term: Term) -> dict:
    if isinstance(term, Variable):
        return {"kind": "var", "name": term.name}
    if isinstance(term, Constant):
        return {"kind": "const", "symbol": term.symbol}
    return {
        "kind": "compound",
        "functor": term.functor,
        "args": [term_to_dict(a) for a in term.args],
    }


def term_from_dict(data: dict) -> Term:
    kind = data.get("kind")
    if kind == "var":
        return Variable(data["name"])
    if kind == "const":
        return Constant(data["symbol"])
    if kind == "compound":
        return Compound(data["functor"], tuple(term_from_dict(a) for a in data["args"]))
    raise ValidationFailure(f"unknown term kind: {kind!r}")


def parse_terms(text: str) -> list[Term]:
    """Parse a comma-separated term list, respecting nested parentheses."""
    items: list[Term] = []
    depth = 0
    start = 0
    stripped = text.strip()
    if not stripped:
        return items
    for i, ch in enumerate(stripped):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            items.append(parse_term(stripped[start:i]))
            start = i + 1
    items.append(parse_term(stripped[start:]))
    return items


def ground_or_raise(terms: Iterable[Term], context: str) -> None:
    for t in terms:
        if not is_ground(t):
            raise ValidationFailure(f"{context}: feature term {t} is not ground")
