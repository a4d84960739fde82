"""
Peças comuns aos dois oráculos: avaliação de expressões sobre memórias,
montagem da memória inicial e classificação dos procedimentos.

Memórias são dicionários ``nome -> Fraction``; depois de ``normalize`` os
nomes de globais, parâmetros e locais são distintos, então uma única
memória por quadro de procedimento basta.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Tuple

from common.exceptions import EvaluationError
from frontend import ast


@dataclass(frozen=True)
class WeightedOutcome:
    """Resultado de um procedimento: probabilidade, valor devolvido e globais finais."""

    probability: Fraction
    value: Fraction
    memory: Tuple[Tuple[str, Fraction], ...] = ()

    @property
    def globals(self) -> Dict[str, Fraction]:
        return dict(self.memory)


def clamp_value(value):
    """``⟨v⟩ = max(v, 0)``."""
    return value if value > 0 else Fraction(0)


def eval_expr(expr, memory):
    """
    Valor exato de uma expressão do AST.

    Aceita também ``⟨e⟩`` e ``[b]``, de modo que cotas lidas do manifesto
    são avaliadas pelo mesmo caminho.

    Raises:
        EvaluationError: variável não ligada ou divisão por zero
    """
    if isinstance(expr, ast.Num):
        return Fraction(expr.value)
    if isinstance(expr, ast.Var):
        try:
            return Fraction(memory[expr.name])
        except KeyError:
            raise EvaluationError(f"variável não ligada '{expr.name}'") from None
    if isinstance(expr, ast.Neg):
        return -eval_expr(expr.operand, memory)
    if isinstance(expr, ast.Clamp):
        return clamp_value(eval_expr(expr.operand, memory))
    if isinstance(expr, ast.Indicator):
        return Fraction(1) if eval_bool(expr.cond, memory) else Fraction(0)
    if isinstance(expr, ast.BinOp):
        left, right = eval_expr(expr.left, memory), eval_expr(expr.right, memory)
        if expr.op == '+':
            return left + right
        if expr.op == '-':
            return left - right
        if expr.op == '*':
            return left * right
        if right == 0:
            raise EvaluationError('divisão por zero')
        return left / right
    raise TypeError(f'Expressão desconhecida: {expr!r}')


_COMPARISONS = {
    '<': lambda a, b: a < b,
    '<=': lambda a, b: a <= b,
    '>': lambda a, b: a > b,
    '>=': lambda a, b: a >= b,
    '=': lambda a, b: a == b,
    '!=': lambda a, b: a != b,
}


def eval_bool(cond, memory):
    if isinstance(cond, ast.BoolLit):
        return cond.value
    if isinstance(cond, ast.Cmp):
        return _COMPARISONS[cond.op](eval_expr(cond.left, memory), eval_expr(cond.right, memory))
    if isinstance(cond, ast.Not):
        return not eval_bool(cond.operand, memory)
    if isinstance(cond, ast.And):
        return eval_bool(cond.left, memory) and eval_bool(cond.right, memory)
    if isinstance(cond, ast.Or):
        return eval_bool(cond.left, memory) or eval_bool(cond.right, memory)
    raise TypeError(f'Expressão booleana desconhecida: {cond!r}')


def freeze(memory):
    return tuple(sorted(memory.items()))


def global_part(program, memory):
    return tuple((g, memory[g]) for g in program.globals)


def procedure_memory(program, decl, args, globals_):
    """
    Memória de entrada de um quadro: parâmetros ligados aos argumentos e
    globais (ausentes valem 0).

    Raises:
        EvaluationError: número de argumentos diferente da aridade
    """
    if len(args) != decl.arity:
        raise EvaluationError(f'{decl.name} espera {decl.arity} argumentos, recebeu {len(args)}')
    globals_ = dict(globals_ or {})
    memory = {g: Fraction(globals_.get(g, 0)) for g in program.globals}
    memory.update({p: Fraction(v) for p, v in zip(decl.params, args)})
    return memory


def return_into(program, caller, target, value, callee_globals):
    """Memória do chamador após ``target := g(...)`` devolver ``value``."""
    memory = dict(caller)
    memory.update(callee_globals)
    memory[target] = value
    return memory


def nondeterministic_procedures(program):
    """Procedimentos cujo fecho de chamadas contém escolha não determinística."""
    calls = {d.name: set(ast.called_procedures(d.body)) for d in program.decls}
    marked = {d.name for d in program.decls if ast.contains_nondet(d.body)}
    changed = True
    while changed:
        changed = False
        for name, callees in calls.items():
            if name not in marked and callees & marked:
                marked.add(name)
                changed = True
    return marked
