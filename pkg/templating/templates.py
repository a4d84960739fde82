"""
Templates de cotas com coeficientes desconhecidos.

Cada procedimento recebe um par ``⟨h_f, k_f⟩``: ``h_f`` cota a
pré-esperança em função dos argumentos (``ℓa_x``), globais e lógicas
livres; ``k_f`` é a pós-esperança medida, ``⟨ℓr⟩`` mais as lógicas.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, Tuple

import sympy as sp

from common.utils import FreshNames
from terms.atoms import TRUE, conjoin, make_atom
from terms.symbols import RETURN, Unknown, arg_symbol, is_logical, logical, program_symbol
from terms.term import Norm, Term, clamp, substitute, substitute_unknowns
from templating.bases import CONSTANT, collect_base_functions, guarded_extensions

logger = logging.getLogger(__name__)

LINEAR = 'linear'
SIMPLE_MIXED = 'simple-mixed'
KINDS = (LINEAR, SIMPLE_MIXED)


class UnknownFactory:
    """Gera coeficientes desconhecidos sem colisão dentro de uma análise."""

    def __init__(self):
        self._names = FreshNames()
        self.created = []

    def new(self, prefix):
        symbol = Unknown(self._names.fresh(prefix))
        self.created.append(symbol)
        return symbol

    def by_role(self, role):
        return [u for u in self.created if u.role == role]


@dataclass(frozen=True)
class TemplatePair:
    proc: str
    params: Tuple[str, ...]
    h: Term
    k: Term
    ctx: frozenset
    logicals: Tuple[sp.Symbol, ...] = ()
    bases: Tuple[Norm, ...] = field(default=(), compare=False)

    @property
    def arguments(self):
        return tuple(arg_symbol(p) for p in self.params)


def _is_mixable(norm):
    """Normas ``⟨e⟩`` (ou guardadas) que participam de quadrados e produtos."""
    return norm != CONSTANT and not any(is_logical(s) for s in norm.free_symbols)


def _mixed_norms(bases):
    """
    Extensões simple-mixed: ``e²`` para cada ``⟨e⟩`` (ou ``[g]·e²``) e
    ``[g₁ ∧ g₂]·e₁·e₂`` para cada par.
    """
    mixable = [b for b in bases if _is_mixable(b)]
    extra = []
    for norm in mixable:
        guard = norm.guard
        if len(guard) == 1:
            (atom,) = guard
            if not atom.strict and sp.expand(atom.expr - norm.body) == 0:
                guard = TRUE
        extra.append(Norm(guard, sp.expand(norm.body ** 2)))
    for first, second in itertools.combinations(mixable, 2):
        guard = conjoin(first.guard, second.guard)
        if guard is not None:
            extra.append(Norm(guard, sp.expand(first.body * second.body)))
    return extra


def make_template(bases, kind=LINEAR, unknowns=None, logicals=(), extensions=(), prefix='c'):
    """
    Combinação das bases com coeficientes novos.

    Args:
        bases: Norms candidatas (a constante 1 é sempre incluída)
        kind: ``linear`` ou ``simple-mixed``
        unknowns: UnknownFactory da análise
        logicals: lógicas livres, cada uma com um coeficiente próprio
        extensions: bases guardadas, que não entram nas misturas
        prefix: prefixo dos desconhecidos (``c`` procedimentos, ``e`` invariantes)

    Returns:
        Term
    """
    if kind not in KINDS:
        raise ValueError(f'Tipo de template desconhecido: {kind}')
    unknowns = unknowns or UnknownFactory()
    norms = [CONSTANT] + [b for b in bases if b != CONSTANT]
    for norm in extensions:
        if norm not in norms:
            norms.append(norm)
    if kind == SIMPLE_MIXED:
        for norm in _mixed_norms(bases):
            if norm not in norms:
                norms.append(norm)
    pairs = [(unknowns.new(prefix), n.guard, n.body) for n in norms]
    pairs.extend((unknowns.new(prefix), TRUE, symbol) for symbol in logicals)
    return Term.build(pairs)


def procedure_logicals(count):
    return tuple(logical(i) for i in range(count))


def logical_context(logicals):
    return conjoin(*(make_atom(symbol) for symbol in logicals))


def make_procedure_templates(decl, program, kind=LINEAR, unknowns=None, logicals=1, guarded=True):
    """
    Par ``⟨h_f, k_f⟩`` e contexto ``Γ_f`` de um procedimento.

    ``k_f = ⟨ℓr⟩ + Σ cᵢ·⟨gᵢ⟩ + Σ ℓⱼ``; ``h_f`` é um template sobre as bases
    de parâmetros e globais, com os parâmetros renomeados para ``ℓa_x``.
    """
    unknowns = unknowns or UnknownFactory()
    symbols = procedure_logicals(logicals)
    variables = list(decl.params) + list(program.globals)
    bases = collect_base_functions(decl.body, variables)
    extensions = guarded_extensions(decl.body, variables) if guarded else []
    renaming = {program_symbol(p): arg_symbol(p) for p in decl.params}
    h = make_template(bases, kind, unknowns, symbols, extensions)
    h = substitute(h, renaming)
    k_pairs = [(1, frozenset({make_atom(RETURN)}), RETURN)]
    for name in program.globals:
        k_pairs.extend(
            (unknowns.new('c'), g, b) for _, g, b in clamp(program_symbol(name)).triples
        )
    k_pairs.extend((1, TRUE, symbol) for symbol in symbols)
    pair = TemplatePair(
        proc=decl.name,
        params=tuple(decl.params),
        h=h,
        k=Term.build(k_pairs),
        ctx=logical_context(symbols),
        logicals=symbols,
        bases=tuple(bases) + tuple(extensions),
    )
    logger.debug(f'Templates de {decl.name}: h = {pair.h}; k = {pair.k}')
    return pair


def make_loop_template(bases, kind, unknowns, continuation=None, logicals=(), extensions=()):
    """Template de invariante ``u`` (coeficientes ``e``): bases do laço, normas da continuação e lógicas."""
    norms = list(bases)
    if continuation is not None:
        for norm in continuation.norms:
            if norm.body in logicals and not norm.guard:
                continue
            if norm not in norms:
                norms.append(norm)
    return make_template(norms, kind, unknowns, logicals, extensions, prefix='e')


def make_join_template(terms, unknowns, logicals=()):
    """Template para o máximo de ramos não determinísticos, sobre as normas dos ramos."""
    norms = []
    for term in terms:
        for norm in term.norms:
            if norm.body in logicals and not norm.guard:
                continue
            if norm not in norms:
                norms.append(norm)
    return make_template(norms, LINEAR, unknowns, logicals, prefix='e')


def make_instantiation(callee, scope_logicals, unknowns, locals_in_scope=()):
    """
    ``τⱼ = d₀ + Σᵢ dᵢ·ℓᵢ (+ Σₖ dₖ·⟨xₖ⟩)`` para cada lógica do procedimento chamado.

    Returns:
        dict lógica do chamado -> Term
    """
    instantiation = {}
    for target in callee.logicals:
        pairs = [(unknowns.new('d'), TRUE, sp.Integer(1))]
        pairs.extend((unknowns.new('d'), TRUE, symbol) for symbol in scope_logicals)
        for name in locals_in_scope:
            pairs.extend((unknowns.new('d'), g, b) for _, g, b in clamp(program_symbol(name)).triples)
        instantiation[target] = Term.build(pairs)
    return instantiation


def instantiate_bound(pair, model):
    """
    Cota concreta a partir de ``h_f``.

    Aplica o modelo (desconhecidos ausentes valem 0), zera as lógicas livres
    e devolve o termo sobre os nomes normalizados dos parâmetros.
    """
    values = {u: model.get(u, model.get(u.name, 0)) for u in pair.h.unknowns}
    term = substitute_unknowns(pair.h, values)
    mapping = {symbol: sp.Integer(0) for symbol in pair.logicals}
    mapping.update({arg_symbol(p): program_symbol(p) for p in pair.params})
    return substitute(term, mapping)
