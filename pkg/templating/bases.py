"""
Heurística de funções-base.

Das guardas do programa saem distâncias: ``l < r`` dá ``⟨r - l⟩`` e
``l <= r`` dá também ``⟨r - l + 1⟩``; igualdades valem nos dois sentidos.
Temporários introduzidos pelo parser (nomes com ``_``) não geram bases.
"""

import sympy as sp

from frontend import ast
from terms.atoms import TRUE, conjoin, guard_cubes, make_atom
from terms.symbols import program_symbol, to_sympy
from terms.term import Norm, Term, clamp

CONSTANT = Norm(TRUE, sp.Integer(1))


def is_temporary(name):
    return name.startswith('_')


def declared_locals(cmd):
    return [c.var for c in ast.walk(cmd) if isinstance(c, ast.Local) and not is_temporary(c.var)]


def _norm_of(term):
    """A única norma de um termo de uma parcela (coeficiente descartado)."""
    if len(term.summands) != 1:
        return None
    return term.summands[0][1]


def _add(bases, norm):
    if norm is not None and norm not in bases:
        bases.append(norm)


def _distances(cond):
    """Pares ``(e, folga)`` de cada comparação: gera ``⟨e⟩`` e, se folga, ``⟨e + 1⟩``."""
    if isinstance(cond, ast.Cmp):
        left, right = to_sympy(cond.left), to_sympy(cond.right)
        if cond.op in ('<', '>'):
            low, high = (left, right) if cond.op == '<' else (right, left)
            return [(high - low, False)]
        if cond.op in ('<=', '>='):
            low, high = (left, right) if cond.op == '<=' else (right, left)
            return [(high - low, True)]
        return [(right - left, False), (left - right, False)]
    if isinstance(cond, (ast.And, ast.Or)):
        return _distances(cond.left) + _distances(cond.right)
    if isinstance(cond, ast.Not):
        return _distances(cond.operand)
    return []


def _allowed(expr, allowed):
    return expr.free_symbols and expr.free_symbols <= allowed


def collect_base_functions(cmd, variables, facts=()):
    """
    Funções-base para templates.

    Args:
        cmd: comando cujas guardas são inspecionadas (corpo do procedimento
            ou o próprio laço)
        variables: nomes das variáveis de programa admitidas nas bases
        facts: átomos de invariantes já estabelecidos

    Returns:
        lista ordenada e sem repetição de Norm, começando pela constante 1
    """
    names = [v for v in variables if not is_temporary(v)]
    allowed = {program_symbol(v) for v in names}
    bases = [CONSTANT]
    for name in names:
        _add(bases, _norm_of(clamp(program_symbol(name))))
    conditions = list(ast.guards(cmd))
    for cond in conditions:
        for expr, slack in _distances(cond):
            expr = sp.expand(expr)
            if not _allowed(expr, allowed):
                continue
            _add(bases, _norm_of(clamp(expr)))
            if slack:
                _add(bases, _norm_of(clamp(expr + 1)))
    for atom in facts:
        if _allowed(atom.expr, allowed):
            _add(bases, _norm_of(clamp(atom.expr)))
    return bases


def guarded_extensions(cmd, variables):
    """
    ``[g]·1`` e ``[g]·⟨v⟩`` para guardas que são um único cubo sobre as
    variáveis admitidas; para guardas atômicas, também para a negação.
    """
    names = [v for v in variables if not is_temporary(v)]
    allowed = {program_symbol(v) for v in names}
    extensions = []
    for cond in ast.guards(cmd):
        cubes = guard_cubes(cond)
        if len(cubes) != 1 or not cubes[0]:
            continue
        cube = cubes[0]
        candidates = [cube]
        if len(cube) == 1:
            (atom,) = cube
            negated = atom.negate()
            if not isinstance(negated, bool):
                candidates.append(frozenset({negated}))
        for guard in candidates:
            symbols = set().union(*(a.free_symbols for a in guard))
            if not symbols <= allowed:
                continue
            _add(extensions, Norm(guard, sp.Integer(1)))
            for name in names:
                symbol = program_symbol(name)
                extended = conjoin(guard, make_atom(symbol))
                if extended is not None:
                    _add(extensions, _norm_of(Term.build([(1, extended, symbol)])))
    return extensions
