"""First-order terms over a signature, plus the traversal primitives the
rest of the toolkit is built on: positions, substitutions, matching, and
replacement-map-aware (active-position) traversal.

Terms are immutable values with structural equality, so they can be shared
freely, used as dict keys, and compared for loop detection.  Positions are
1-indexed integer tuples; the empty tuple is the root.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Union

Position = tuple[int, ...]

ROOT: Position = ()


class TermError(Exception):
    """Base class for term-level errors."""


class InvalidPositionError(TermError):
    """Raised when a position does not exist in the given term."""


class MissingReplacementError(TermError):
    """Raised when a replacement map has no entry for a function symbol."""


@dataclass(frozen=True)
class FunSym:
    """A function symbol with a fixed arity.

    ``origin`` is ``None`` for symbols of the original signature and
    ``(rule_id, condition_index)`` for the fresh symbols introduced when a
    conditional rule is unraveled.
    """

    name: str
    arity: int
    origin: Optional[tuple[str, int]] = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("function symbol name must be non-empty")
        if self.arity < 0:
            raise ValueError(f"negative arity for {self.name!r}")
        if self.origin is not None and self.origin[1] < 1:
            raise ValueError(f"condition index must be >= 1, got {self.origin}")

    @property
    def is_usymbol(self) -> bool:
        return self.origin is not None

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Var:
    """A variable leaf."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class App:
    """An application ``sym(args...)``; arity is checked on construction."""

    sym: FunSym
    args: tuple["Term", ...] = ()

    def __post_init__(self) -> None:
        if len(self.args) != self.sym.arity:
            raise ValueError(
                f"{self.sym.name} has arity {self.sym.arity}, got {len(self.args)} arguments"
            )

    def __str__(self) -> str:
        return term_to_str(self)


Term = Union[Var, App]

# A substitution is a finite map from variable names to terms; application
# is simultaneous and capture-free (first-order terms have no binders).
Subst = Mapping[str, Term]


def app(sym: FunSym, *args: Term) -> App:
    return App(sym, tuple(args))


def term_size(t: Term) -> int:
    """Number of nodes in ``t``."""
    if isinstance(t, Var):
        return 1
    return 1 + sum(term_size(a) for a in t.args)


def term_to_str(t: Term) -> str:
    """Prefix rendering: ``f(a,b)``, constants and variables bare."""
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.sym.name
    return f"{t.sym.name}({','.join(term_to_str(a) for a in t.args)})"


def pretty(t: Term) -> str:
    """Human-oriented rendering: binary symbols with non-word names go infix."""
    if isinstance(t, Var):
        return t.name
    if t.sym.arity == 2 and not t.sym.name[0].isalnum() and not t.sym.is_usymbol:
        lhs, rhs = (pretty(a) for a in t.args)
        return f"({lhs} {t.sym.name} {rhs})"
    if not t.args:
        return t.sym.name
    return f"{t.sym.name}({','.join(pretty(a) for a in t.args)})"


def format_position(p: Position) -> str:
    """Dot-separated rendering; the root prints as ``e``."""
    return "e" if not p else ".".join(str(i) for i in p)


def positions(t: Term) -> set[Position]:
    """All valid positions of ``t``, including the root."""
    out: set[Position] = set()

    def walk(node: Term, here: Position) -> None:
        out.add(here)
        if isinstance(node, App):
            for i, arg in enumerate(node.args, start=1):
                walk(arg, here + (i,))

    walk(t, ROOT)
    return out


def subterm_at(t: Term, p: Position) -> Term:
    """The subterm of ``t`` rooted at ``p``; the root position is ``t`` itself."""
    node = t
    for depth, i in enumerate(p):
        if isinstance(node, Var) or not 1 <= i <= len(node.args):
            raise InvalidPositionError(
                f"position {format_position(p)} invalid at step {depth + 1} in {term_to_str(t)}"
            )
        node = node.args[i - 1]
    return node


def replace_at(t: Term, p: Position, u: Term) -> Term:
    """``t`` with the subterm at ``p`` replaced by ``u``."""
    if not p:
        return u
    if isinstance(t, Var) or not 1 <= p[0] <= len(t.args):
        raise InvalidPositionError(
            f"position {format_position(p)} invalid in {term_to_str(t)}"
        )
    i = p[0]
    new_args = t.args[: i - 1] + (replace_at(t.args[i - 1], p[1:], u),) + t.args[i:]
    return App(t.sym, new_args)


def vars_of(objects: Union[Term, Iterable[Term]]) -> list[str]:
    """Variable names in first-occurrence order of a left-to-right,
    depth-first traversal, duplicates suppressed.

    This is the toolkit's one fixed variable order; unraveling and the
    printers rely on it being deterministic.
    """
    if isinstance(objects, (Var, App)):
        objects = [objects]
    seen: dict[str, None] = {}

    def walk(node: Term) -> None:
        if isinstance(node, Var):
            seen.setdefault(node.name, None)
        else:
            for arg in node.args:
                walk(arg)

    for obj in objects:
        walk(obj)
    return list(seen)


def match(pattern: Term, subject: Term) -> Optional[dict[str, Term]]:
    """First-order matching: a substitution with ``pattern . sigma == subject``,
    or ``None``.  Non-linear patterns require equal bindings.
    """
    binding: dict[str, Term] = {}

    def walk(pat: Term, sub: Term) -> bool:
        if isinstance(pat, Var):
            bound = binding.get(pat.name)
            if bound is None:
                binding[pat.name] = sub
                return True
            return bound == sub
        if isinstance(sub, Var) or pat.sym != sub.sym:
            return False
        return all(walk(p, s) for p, s in zip(pat.args, sub.args))

    return binding if walk(pattern, subject) else None


def apply_subst(t: Term, sigma: Subst) -> Term:
    """Simultaneous replacement of variables by their images under ``sigma``;
    variables outside the domain stay put."""
    if isinstance(t, Var):
        return sigma.get(t.name, t)
    if not t.args:
        return t
    return App(t.sym, tuple(apply_subst(a, sigma) for a in t.args))


@dataclass(frozen=True)
class ReplacementMap:
    """Maps each function symbol to the argument indices open to rewriting."""

    entries: Mapping[FunSym, frozenset[int]]

    def __post_init__(self) -> None:
        for sym, indices in self.entries.items():
            if not indices <= frozenset(range(1, sym.arity + 1)):
                raise ValueError(
                    f"replacement entry {sorted(indices)} out of range for {sym.name}/{sym.arity}"
                )

    def active_indices(self, sym: FunSym) -> frozenset[int]:
        try:
            return self.entries[sym]
        except KeyError:
            raise MissingReplacementError(
                f"no replacement entry for {sym.name}/{sym.arity}"
            ) from None

    @classmethod
    def full(cls, symbols: Iterable[FunSym]) -> "ReplacementMap":
        """All argument positions active: plain rewriting."""
        return cls({s: frozenset(range(1, s.arity + 1)) for s in symbols})


def active_positions(t: Term, mu: ReplacementMap) -> set[Position]:
    """The positions reachable by descending only through active argument
    indices; the root is always active."""
    out: set[Position] = set()

    def walk(node: Term, here: Position) -> None:
        out.add(here)
        if isinstance(node, App) and node.args:
            for i in mu.active_indices(node.sym):
                walk(node.args[i - 1], here + (i,))

    walk(t, ROOT)
    return out


def mu_proper_subterms(t: Term, mu: ReplacementMap) -> set[Term]:
    """Subterms of ``t`` at active non-root positions."""
    return {subterm_at(t, p) for p in active_positions(t, mu) if p}


def is_original(t: Term) -> bool:
    """True iff no unraveling-introduced symbol occurs in ``t``."""
    if isinstance(t, Var):
        return True
    if t.sym.is_usymbol:
        return False
    return all(is_original(a) for a in t.args)


def fun_syms(t: Term) -> set[FunSym]:
    """The function symbols occurring in ``t``."""
    out: set[FunSym] = set()

    def walk(node: Term) -> None:
        if isinstance(node, App):
            out.add(node.sym)
            for arg in node.args:
                walk(arg)

    walk(t)
    return out
