"""Lexicographic path order and exhaustive precedence search.

The order compares terms through a strict total precedence on function
symbols, with left-to-right lexicographic status everywhere.  Orienting every
rule of a system proves its termination.

The search enumerates precedences as permutations of the signature (sorted by
name then arity, permutations in lexicographic order) and prunes prefixes
under which some rule is already unorientable for every completion.  Pruning
uses a three-valued variant of the order: with only a prefix of the
precedence fixed, a comparison is true, false, or undecided, and the order's
defining formula is positive in the precedence, so undecided never flips a
definite answer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .terms import App, FunSym, Term, Var, vars_of
from .unravel import Trs


class UnknownSymbolError(Exception):
    """A compared term uses a symbol outside the precedence."""


class SignatureTooLargeError(Exception):
    """The signature exceeds the search cap; use an external prover."""


@dataclass(frozen=True)
class Precedence:
    """A strict total order on function symbols, greatest first."""

    order: tuple[FunSym, ...]

    def __post_init__(self) -> None:
        if len(set(self.order)) != len(self.order):
            raise ValueError("precedence lists a symbol twice")

    def rank(self, sym: FunSym) -> int:
        try:
            return self.order.index(sym)
        except ValueError:
            raise UnknownSymbolError(f"{sym.name}/{sym.arity} not in precedence") from None

    def greater(self, f: FunSym, g: FunSym) -> bool:
        return self.rank(f) < self.rank(g)

    def __str__(self) -> str:
        return " > ".join(s.name for s in self.order)


def lpo_greater(s: Term, t: Term, prec: Precedence) -> bool:
    """The strict lexicographic path order induced by ``prec``."""
    ranks = {sym: i for i, sym in enumerate(prec.order)}

    def gt(a: Term, b: Term) -> bool:
        if isinstance(a, Var):
            return False
        if a.sym not in ranks:
            raise UnknownSymbolError(f"{a.sym.name}/{a.sym.arity} not in precedence")
        if isinstance(b, Var):
            return b.name in vars_of(a)
        if b.sym not in ranks:
            raise UnknownSymbolError(f"{b.sym.name}/{b.sym.arity} not in precedence")
        # (i) some argument of a is >= b
        if any(ai == b or gt(ai, b) for ai in a.args):
            return True
        ra, rb = ranks[a.sym], ranks[b.sym]
        if ra < rb:
            # (ii) greater root, a dominates every argument of b
            return all(gt(a, bj) for bj in b.args)
        if a.sym == b.sym:
            # (iii) equal roots: lexicographically greater arguments,
            # and a dominates every argument of b
            for ak, bk in zip(a.args, b.args):
                if ak == bk:
                    continue
                return gt(ak, bk) and all(gt(a, bj) for bj in b.args)
        return False

    return gt(s, t)


# Three-valued evaluation for pruning: True / False / None (undecided).

def _and3(a, b):
    if a is False or b is False:
        return False
    if a is True and b is True:
        return True
    return None


def _or3(a, b):
    if a is True or b is True:
        return True
    if a is False and b is False:
        return False
    return None


def _lpo3(s: Term, t: Term, ranks: dict[FunSym, int]) -> Optional[bool]:
    """Order verdict under a partial precedence: symbols present in ``ranks``
    are mutually ordered, the rest are undecided."""
    if isinstance(s, Var):
        return False
    if isinstance(t, Var):
        return t.name in vars_of(s)

    result: Optional[bool] = False
    for si in s.args:
        result = _or3(result, True if si == t else _lpo3(si, t, ranks))
        if result is True:
            return True

    dominates: Optional[bool] = True
    for tj in t.args:
        dominates = _and3(dominates, _lpo3(s, tj, ranks))
        if dominates is False:
            break

    if s.sym == t.sym:
        lex: Optional[bool] = False
        for sk, tk in zip(s.args, t.args):
            if sk == tk:
                continue
            lex = _lpo3(sk, tk, ranks)
            break
        result = _or3(result, _and3(lex, dominates))
    else:
        rs, rt = ranks.get(s.sym), ranks.get(t.sym)
        if rs is not None and rt is not None:
            root_greater: Optional[bool] = rs < rt
        else:
            root_greater = None
        result = _or3(result, _and3(root_greater, dominates))
    return result


def search_precedence(system: Trs, max_signature: int = 10) -> Optional[Precedence]:
    """First precedence (in the deterministic enumeration order) orienting
    every rule left-to-right, or None when the exhaustive search fails."""
    symbols = sorted(system.signature, key=lambda s: (s.name, s.arity))
    if len(symbols) > max_signature:
        raise SignatureTooLargeError(
            f"signature has {len(symbols)} symbols (cap {max_signature}); "
            "delegate to an external prover"
        )
    pairs = [(r.lhs, r.rhs) for r in system.rules]

    def extend(
        prefix: list[FunSym], remaining: list[FunSym], pending: list[tuple[Term, Term]]
    ) -> Optional[Precedence]:
        ranks = {sym: i for i, sym in enumerate(prefix)}
        # True verdicts are stable under extending the precedence, so only
        # rules still undecided at the parent prefix need re-evaluation.
        undecided = []
        for lhs, rhs in pending:
            verdict = _lpo3(lhs, rhs, ranks)
            if verdict is False:
                return None
            if verdict is not True:
                undecided.append((lhs, rhs))
        if not undecided:
            # Any completion works; the sorted one is lexicographically first.
            return Precedence(tuple(prefix + remaining))
        if not remaining:
            return None
        for i, sym in enumerate(remaining):
            found = extend(prefix + [sym], remaining[:i] + remaining[i + 1 :], undecided)
            if found is not None:
                return found
        return None

    return extend([], symbols, pairs)


def orients(system: Trs, prec: Precedence) -> bool:
    """Re-validate a certificate: every rule strictly decreasing."""
    return all(lpo_greater(r.lhs, r.rhs, prec) for r in system.rules)
