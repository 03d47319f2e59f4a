"""Unraveling of conditional systems into unconditional ones.

An n-condition rule is replaced by n+1 unconditional rules that thread the
condition evaluation through fresh symbols: the first rule starts evaluating
the first condition source while saving the left-hand side's variables, each
intermediate rule matches a condition target (binding its extra variables)
and starts the next condition, and the last rule releases the original
right-hand side.

The context-sensitive variant additionally restricts rewriting inside the
fresh symbols to their first argument (where condition evaluation happens),
leaving all argument positions of original symbols active.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .ctrs import ConditionalRule, Dctrs
from .terms import (
    App,
    FunSym,
    ReplacementMap,
    Term,
    Var,
    term_to_str,
    vars_of,
)


@dataclass(frozen=True)
class Rule:
    """An unconditional rewrite rule."""

    id: str
    lhs: Term
    rhs: Term

    def __post_init__(self) -> None:
        if isinstance(self.lhs, Var):
            raise ValueError(f"rule {self.id}: left-hand side is a variable")
        extra = set(vars_of(self.rhs)) - set(vars_of(self.lhs))
        if extra:
            raise ValueError(f"rule {self.id}: unbound right-hand variables {sorted(extra)}")

    def __str__(self) -> str:
        return f"{term_to_str(self.lhs)} -> {term_to_str(self.rhs)}"


def _signature_of(rules: Sequence[Rule], extra: Sequence[FunSym]) -> tuple[FunSym, ...]:
    from .terms import fun_syms

    symbols: set[FunSym] = set(extra)
    for rule in rules:
        symbols |= fun_syms(rule.lhs) | fun_syms(rule.rhs)
    return tuple(sorted(symbols, key=lambda s: (s.name, s.arity)))


@dataclass(frozen=True)
class Trs:
    """An unconditional term rewrite system."""

    signature: tuple[FunSym, ...]
    rules: tuple[Rule, ...]

    @classmethod
    def of(cls, rules: Sequence[Rule], extra_symbols: Sequence[FunSym] = ()) -> "Trs":
        return cls(_signature_of(rules, extra_symbols), tuple(rules))


@dataclass(frozen=True)
class Csrs:
    """A TRS paired with a replacement map restricting rewrite positions."""

    signature: tuple[FunSym, ...]
    rules: tuple[Rule, ...]
    mu: ReplacementMap

    @classmethod
    def of(
        cls, rules: Sequence[Rule], mu: ReplacementMap, extra_symbols: Sequence[FunSym] = ()
    ) -> "Csrs":
        return cls(_signature_of(rules, extra_symbols), tuple(rules), mu)

    @property
    def trs(self) -> Trs:
        return Trs(self.signature, self.rules)


def standard_mu_shape_problems(csrs: Csrs) -> list[str]:
    """Deviations from the canonical shape: all argument positions active on
    original symbols, only the first active on unraveling symbols."""
    problems = []
    for sym in csrs.signature:
        actual = csrs.mu.active_indices(sym)
        expected = frozenset({1}) if sym.is_usymbol else frozenset(range(1, sym.arity + 1))
        if actual != expected:
            problems.append(
                f"{sym.name}/{sym.arity}: mu is {sorted(actual)}, expected {sorted(expected)}"
            )
    return problems


Namer = Callable[[str, int, int], FunSym]


def default_u_symbol(rule_id: str, index: int, arity: int) -> FunSym:
    """The documented naming scheme for fresh symbols: ``U<i>_<rule id>``."""
    return FunSym(f"U{index}_{rule_id}", arity, origin=(rule_id, index))


def evar_sequence(rule: ConditionalRule, i: int) -> list[str]:
    """Extra variables of the i-th condition target: variables of ``t_i`` not
    bound by the left-hand side or earlier condition targets, in fixed
    first-occurrence order."""
    if not 1 <= i <= len(rule.conditions):
        raise IndexError(f"rule {rule.id} has {len(rule.conditions)} conditions, asked for {i}")
    bound = set(vars_of(rule.lhs))
    for _, t in rule.conditions[: i - 1]:
        bound |= set(vars_of(t))
    return [v for v in vars_of(rule.conditions[i - 1][1]) if v not in bound]


def unravel_rule(rule: ConditionalRule, namer: Namer = default_u_symbol) -> list[Rule]:
    """The n+1 unconditional rules encoding an n-condition rule (n > 0);
    unconditional rules pass through untouched."""
    n = len(rule.conditions)
    if n == 0:
        return [Rule(rule.id, rule.lhs, rule.rhs)]

    lhs_vars = vars_of(rule.lhs)
    extra_vars = [evar_sequence(rule, i) for i in range(1, n + 1)]

    def carried(i: int) -> list[Var]:
        # Arguments after the first for U_i: Var(lhs) then the extra
        # variables of conditions 1..i-1, in the fixed order.
        names = list(lhs_vars)
        for j in range(i - 1):
            names.extend(extra_vars[j])
        return [Var(v) for v in names]

    u_syms = [namer(rule.id, i, 1 + len(carried(i))) for i in range(1, n + 1)]

    out: list[Rule] = []
    s1 = rule.conditions[0][0]
    out.append(
        Rule(f"{rule.id}.1", rule.lhs, App(u_syms[0], (s1, *carried(1))))
    )
    for i in range(1, n):
        t_i = rule.conditions[i - 1][1]
        s_next = rule.conditions[i][0]
        out.append(
            Rule(
                f"{rule.id}.{i + 1}",
                App(u_syms[i - 1], (t_i, *carried(i))),
                App(u_syms[i], (s_next, *carried(i + 1))),
            )
        )
    t_n = rule.conditions[n - 1][1]
    out.append(Rule(f"{rule.id}.{n + 1}", App(u_syms[n - 1], (t_n, *carried(n))), rule.rhs))
    return out


def unravel(system: Dctrs, namer: Namer = default_u_symbol) -> Trs:
    """Replace every conditional rule by its unraveled rules, in place."""
    rules: list[Rule] = []
    for rule in system.rules:
        rules.extend(unravel_rule(rule, namer))
    return Trs.of(rules, extra_symbols=system.signature)


def unravel_cs(system: Dctrs, namer: Namer = default_u_symbol) -> Csrs:
    """The unraveled system with the canonical replacement map: original
    symbols fully active, fresh symbols active only in argument 1."""
    trs = unravel(system, namer)
    entries = {
        sym: (frozenset({1}) if sym.is_usymbol else frozenset(range(1, sym.arity + 1)))
        for sym in trs.signature
    }
    return Csrs(trs.signature, trs.rules, ReplacementMap(entries))
