"""
Fatos de caminho: análise direta simples que acompanha guardas e
igualdades lineares válidas em cada ponto do programa.

Fatos são guardas (conjunções de átomos); ``None`` marca ponto inalcançável.
"""

import sympy as sp

from frontend import ast
from terms.atoms import TRUE, conjoin, guard_cubes, make_atom
from terms.symbols import program_symbol, to_sympy


def assigned_variables(cmd):
    """Nomes escritos por ``cmd`` (amostragens, chamadas e locais declaradas)."""
    names = set()
    for sub in ast.walk(cmd):
        if isinstance(sub, (ast.Sample, ast.Call, ast.Local)):
            names.add(sub.var)
    return names


def kill(facts, names):
    """Descarta os fatos que mencionam alguma das variáveis."""
    if facts is None:
        return None
    symbols = {program_symbol(n) for n in names}
    return frozenset(a for a in facts if not a.free_symbols & symbols)


def guard_facts(cond, positive=True):
    """Fatos garantidos por ``cond`` quando ela é um único cubo; senão nenhum."""
    cubes = guard_cubes(cond, positive)
    if not cubes:
        return None
    return cubes[0] if len(cubes) == 1 else TRUE


def _is_linear(expr):
    symbols = expr.free_symbols
    if not symbols:
        return True
    if not expr.is_polynomial(*symbols):
        return False
    return sp.Poly(expr, *symbols).total_degree() <= 1


def equality_facts(var, expr):
    """``x = e`` como dois átomos, quando ``e`` é linear e não menciona ``x``."""
    if var in ast.expr_vars(expr):
        return TRUE
    value = to_sympy(expr)
    if not _is_linear(value):
        return TRUE
    x = program_symbol(var)
    return conjoin(make_atom(x - value), make_atom(value - x))


def after_assignment(facts, var, expr=None):
    facts = kill(facts, {var})
    if facts is None or expr is None:
        return facts
    return conjoin(facts, equality_facts(var, expr))


def common_facts(*branches):
    """Fatos presentes em todos os ramos alcançáveis."""
    reachable = [b for b in branches if b is not None]
    if not reachable:
        return None
    return frozenset.intersection(*reachable)


def post_facts(cmd, facts, global_names=()):
    """Fatos após executar ``cmd`` a partir de ``facts``."""
    if facts is None:
        return None
    if isinstance(cmd, ast.Skip):
        return facts
    if isinstance(cmd, ast.Sample):
        return after_assignment(facts, cmd.var, ast.as_assignment(cmd))
    if isinstance(cmd, ast.Call):
        return kill(facts, {cmd.var, *global_names})
    if isinstance(cmd, ast.Return):
        return None
    if isinstance(cmd, ast.Local):
        inner = after_assignment(facts, cmd.var, cmd.init)
        return kill(post_facts(cmd.body, inner, global_names), {cmd.var})
    if isinstance(cmd, ast.Seq):
        return post_facts(cmd.second, post_facts(cmd.first, facts, global_names), global_names)
    if isinstance(cmd, ast.If):
        then = post_facts(cmd.then, conjoin(facts, guard_facts(cmd.cond)), global_names)
        orelse = post_facts(cmd.orelse, conjoin(facts, guard_facts(cmd.cond, False)), global_names)
        return common_facts(then, orelse)
    if isinstance(cmd, ast.While):
        head = loop_head_facts(cmd, facts, global_names)
        return conjoin(head, guard_facts(cmd.cond, False))
    if isinstance(cmd, ast.NonDet):
        return common_facts(
            post_facts(cmd.left, facts, global_names),
            post_facts(cmd.right, facts, global_names),
        )
    raise TypeError(f'Comando desconhecido: {cmd!r}')


def loop_head_facts(loop, facts, global_names=()):
    """Fatos que sobrevivem a qualquer número de iterações do laço."""
    written = assigned_variables(loop.body)
    if any(isinstance(c, ast.Call) for c in ast.walk(loop.body)):
        written |= set(global_names)
    return kill(facts, written)
