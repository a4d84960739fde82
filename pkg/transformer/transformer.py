"""
Transformador de expectativas sobre termos.

``et_command`` percorre o comando de trás para frente devolvendo a
pré-esperança como Term; chamadas, laços e escolhas não determinísticas
emitem condições laterais no AnalysisState. Os fatos de caminho fluem no
sentido direto e entram nos contextos dessas condições.
"""

import logging

import sympy as sp

from frontend import ast
from templating.bases import collect_base_functions, guarded_extensions, is_temporary
from templating.templates import (
    make_instantiation,
    make_join_template,
    make_loop_template,
    make_procedure_templates,
)
from terms.atoms import TRUE, conjoin, guard_cubes
from terms.expectation import expected_term
from terms.symbols import RETURN, arg_symbol, program_symbol, to_sympy
from terms.term import ZERO, add, guard_sum, substitute
from transformer.facts import (
    after_assignment,
    guard_facts,
    kill,
    loop_head_facts,
    post_facts,
)

logger = logging.getLogger(__name__)


def _context(st, facts):
    caller = st.templates[st.procedure]
    return conjoin(caller.ctx, facts) if facts is not None else None


def _emit_guarded(st, ctx, cubes, lhs, rhs, rule, loc):
    """``[b]·lhs ≤ rhs``; um cubo só vai para o contexto."""
    if not cubes:
        return
    if len(cubes) == 1:
        st.emit(conjoin(ctx, cubes[0]) if ctx is not None else None, lhs, rhs, rule, loc)
    else:
        st.emit(ctx, guard_sum(cubes, lhs), rhs, rule, loc)


def et_call(cmd, cont, st, facts, scope):
    callee = st.templates[cmd.proc]
    caller = st.templates[st.procedure]
    in_scope = ()
    if st.settings.instantiate_locals:
        in_scope = [v for v in scope if v not in st.program.globals and not is_temporary(v)]
    instantiation = make_instantiation(callee, caller.logicals, st.unknowns, in_scope)
    ctx = _context(st, facts)
    for tau in instantiation.values():
        st.emit(ctx, ZERO, tau, 'call-context', cmd.loc)
    after = kill(facts, {cmd.var, *st.program.globals})
    st.emit(
        _context(st, after),
        substitute(cont, {program_symbol(cmd.var): RETURN}),
        substitute(callee.k, instantiation),
        'call',
        cmd.loc,
    )
    mapping = dict(instantiation)
    for param, arg in zip(callee.params, cmd.args):
        mapping[arg_symbol(param)] = to_sympy(arg)
    return substitute(callee.h, mapping)


def et_while(cmd, cont, post, st, facts, scope):
    head = loop_head_facts(cmd, facts, st.program.globals)
    caller = st.templates[st.procedure]
    bases = collect_base_functions(cmd, scope, head or ())
    extensions = guarded_extensions(cmd, scope) if st.settings.guarded else ()
    u = make_loop_template(bases, st.settings.kind, st.unknowns, cont, caller.logicals, extensions)
    body = et_command(cmd.body, u, post, st, conjoin(head, guard_facts(cmd.cond)), scope)
    ctx = _context(st, head)
    _emit_guarded(st, ctx, guard_cubes(cmd.cond), body, u, 'while-body', cmd.loc)
    _emit_guarded(st, ctx, guard_cubes(cmd.cond, False), cont, u, 'while-exit', cmd.loc)
    return u


def et_nondet(cmd, cont, post, st, facts, scope):
    left = et_command(cmd.left, cont, post, st, facts, scope)
    right = et_command(cmd.right, cont, post, st, facts, scope)
    if left == right:
        return left
    caller = st.templates[st.procedure]
    u = make_join_template([left, right], st.unknowns, caller.logicals)
    ctx = _context(st, facts)
    st.emit(ctx, left, u, 'nondet-left', cmd.loc)
    st.emit(ctx, right, u, 'nondet-right', cmd.loc)
    return u


def et_command(cmd, cont, post, st, facts=TRUE, scope=()):
    """
    Pré-esperança de ``cmd`` em forma de termo.

    Args:
        cmd: comando normalizado
        cont: pós-esperança (continuação)
        post: pós-esperança do procedimento, aplicada em ``return``
        st: AnalysisState
        facts: fatos válidos antes de ``cmd`` (None se inalcançável)
        scope: variáveis de programa no escopo

    Returns:
        Term

    Raises:
        UnsupportedExpansion: esperança simbólica sem forma fechada
    """
    if isinstance(cmd, ast.Skip):
        return cont
    if isinstance(cmd, ast.Sample):
        return expected_term(cmd.var, cmd.dist, cont)
    if isinstance(cmd, ast.Call):
        return et_call(cmd, cont, st, facts, scope)
    if isinstance(cmd, ast.Return):
        return substitute(post, {RETURN: to_sympy(cmd.expr)})
    if isinstance(cmd, ast.Local):
        inner = et_command(
            cmd.body, cont, post, st,
            after_assignment(facts, cmd.var, cmd.init),
            tuple(scope) + (cmd.var,),
        )
        return substitute(inner, {program_symbol(cmd.var): to_sympy(cmd.init)})
    if isinstance(cmd, ast.Seq):
        middle = post_facts(cmd.first, facts, st.program.globals)
        rest = et_command(cmd.second, cont, post, st, middle, scope)
        return et_command(cmd.first, rest, post, st, facts, scope)
    if isinstance(cmd, ast.If):
        then = et_command(cmd.then, cont, post, st, conjoin(facts, guard_facts(cmd.cond)), scope)
        orelse = et_command(cmd.orelse, cont, post, st, conjoin(facts, guard_facts(cmd.cond, False)), scope)
        return add(guard_sum(guard_cubes(cmd.cond), then), guard_sum(guard_cubes(cmd.cond, False), orelse))
    if isinstance(cmd, ast.While):
        return et_while(cmd, cont, post, st, facts, scope)
    if isinstance(cmd, ast.NonDet):
        return et_nondet(cmd, cont, post, st, facts, scope)
    raise TypeError(f'Comando desconhecido: {cmd!r}')


def et_procedure(decl, st):
    """``(ET_k⟦corpo⟧ k[ℓr ↦ 0])[params ↦ ℓa]``."""
    pair = st.templates[decl.name]
    st.procedure = decl.name
    default = substitute(pair.k, {RETURN: sp.Integer(0)})
    scope = tuple(decl.params) + tuple(st.program.globals)
    body = et_command(decl.body, default, pair.k, st, TRUE, scope)
    return substitute(body, {program_symbol(p): arg_symbol(p) for p in decl.params})


def entry_procedure(program, entry=None):
    if entry is None:
        return program.decls[-1].name
    program.procedure(entry)
    return entry


def reachable_procedures(program, entry=None):
    """Procedimentos alcançáveis a partir da entrada no grafo de chamadas, em ordem de declaração."""
    entry = entry_procedure(program, entry)
    seen = {entry}
    pending = [entry]
    while pending:
        name = pending.pop()
        for callee in ast.called_procedures(program.procedure(name).body):
            if callee not in seen:
                seen.add(callee)
                pending.append(callee)
    return [d.name for d in program.decls if d.name in seen]


def build_templates(st, names):
    for name in names:
        if name not in st.templates:
            st.templates[name] = make_procedure_templates(
                st.program.procedure(name),
                st.program,
                kind=st.settings.kind,
                unknowns=st.unknowns,
                logicals=st.settings.logicals,
                guarded=st.settings.guarded,
            )


def generate_constraints(program, st, entry=None):
    """
    Condições laterais do programa inteiro.

    Para cada procedimento alcançável: ``Γ_f ⊢ 0 ≤ h_f``, as condições
    emitidas pelo corpo e ``Γ_f ⊢ ET⟦f⟧ ≤ h_f``.

    Returns:
        lista de SideCondition (a mesma de ``st.conditions``)
    """
    names = reachable_procedures(program, entry)
    build_templates(st, names)
    for name in names:
        decl = program.procedure(name)
        pair = st.templates[name]
        st.procedure = name
        st.emit(pair.ctx, ZERO, pair.h, 'non-negativity', decl.loc)
        lhs = et_procedure(decl, st)
        st.emit(pair.ctx, lhs, pair.h, 'procedure', decl.loc)
    logger.info(f'{len(st.conditions)} condições laterais geradas para {", ".join(names)}')
    return st.conditions
