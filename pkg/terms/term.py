"""
Termos: combinações lineares ``Σ cᵢ·[bᵢ]·eᵢ`` de normas.

Os coeficientes são polinômios em desconhecidos (e racionais); guardas e
corpos mencionam variáveis de programa e lógicas. Termos são imutáveis e
canônicos: normas iguais são somadas e parcelas nulas descartadas.
"""

from dataclasses import dataclass
from typing import Tuple

import sympy as sp

from common.exceptions import TermSubstitutionError
from terms.atoms import TRUE, Atom, conjoin, guard_symbols, make_atom, sorted_atoms, substitute_guard


@dataclass(frozen=True)
class Norm:
    guard: frozenset
    body: sp.Expr

    @property
    def free_symbols(self):
        return guard_symbols(self.guard) | self.body.free_symbols

    def sort_key(self):
        return (
            [a.sort_key() for a in sorted_atoms(self.guard)],
            sp.default_sort_key(self.body),
        )


def _split_content(body):
    """Separa o conteúdo numérico positivo do corpo: ``4/5·x`` -> ``(4/5, x)``."""
    body = sp.expand(body)
    if body.is_Number:
        return body, sp.Integer(1)
    content, primitive = body.as_content_primitive()
    if content.is_Rational and content < 0:
        content, primitive = -content, -primitive
    return content, sp.expand(primitive)


def _pieces(guard, body):
    """Sem guarda, o corpo é separado em monômios com o sinal no coeficiente."""
    if guard:
        return [_split_content(body)]
    pieces = []
    for monomial in sp.Add.make_args(sp.expand(body)):
        pieces.append(monomial.as_coeff_Mul())
    return pieces


@dataclass(frozen=True)
class Term:
    summands: Tuple[Tuple[sp.Expr, Norm], ...] = ()

    @classmethod
    def build(cls, pairs):
        """Canoniza uma sequência de pares (coeficiente, guarda, corpo)."""
        merged = {}
        for coeff, guard, body in pairs:
            if guard is None:
                continue
            for content, piece in _pieces(guard, body):
                scaled = sp.expand(coeff * content)
                if scaled == 0 or piece == 0:
                    continue
                norm = Norm(guard, piece)
                merged[norm] = merged.get(norm, sp.Integer(0)) + scaled
        summands = []
        for norm in sorted(merged, key=Norm.sort_key):
            coeff = sp.expand(merged[norm])
            if coeff != 0:
                summands.append((coeff, norm))
        return cls(tuple(summands))

    @property
    def triples(self):
        return [(c, n.guard, n.body) for c, n in self.summands]

    @property
    def norms(self):
        return [n for _, n in self.summands]

    @property
    def free_symbols(self):
        symbols = set()
        for coeff, norm in self.summands:
            symbols |= coeff.free_symbols | norm.free_symbols
        return symbols

    @property
    def variables(self):
        """Símbolos de guardas e corpos (não inclui desconhecidos dos coeficientes)."""
        symbols = set()
        for norm in self.norms:
            symbols |= norm.free_symbols
        return symbols

    @property
    def unknowns(self):
        symbols = set()
        for coeff, _ in self.summands:
            symbols |= coeff.free_symbols
        return symbols

    def is_zero(self):
        return not self.summands

    def coefficient(self, norm):
        for coeff, own in self.summands:
            if own == norm:
                return coeff
        return sp.Integer(0)

    def __add__(self, other):
        return add(self, other)

    def __str__(self):
        from terms.printer import format_term
        return format_term(self)


ZERO = Term()


def constant(value=1):
    return Term.build([(sp.sympify(value), TRUE, sp.Integer(1))])


def norm_term(guard, body, coeff=1):
    return Term.build([(sp.sympify(coeff), guard, sp.sympify(body))])


def clamp(expr, coeff=1):
    """``⟨e⟩ = [e >= 0]·e``."""
    expr = sp.expand(sp.sympify(expr))
    atom = make_atom(expr)
    if atom is False:
        return ZERO
    guard = TRUE if atom is True else frozenset({atom})
    return norm_term(guard, expr, coeff)


def variable(symbol, coeff=1):
    """Termo ``coeff·symbol`` sem guarda (para lógicas, que são não negativas no contexto)."""
    return norm_term(TRUE, symbol, coeff)


def add(*terms):
    return Term.build([triple for t in terms for triple in t.triples])


def scale(coeff, term):
    coeff = sp.sympify(coeff)
    return Term.build([(coeff * c, g, b) for c, g, b in term.triples])


def weight(factor, term):
    """
    Multiplica ``term`` por uma expressão sobre variáveis de programa.

    Fatores numéricos vão para os coeficientes; os demais entram no corpo
    das normas (probabilidades dinâmicas como ``1/n``).
    """
    factor = sp.sympify(factor)
    if factor.is_Number:
        return scale(factor, term)
    return Term.build([(c, g, b * factor) for c, g, b in term.triples])


def guard_mul(guard, term):
    """
    ``[b]·Σ cᵢ·[bᵢ]·eᵢ = Σ cᵢ·[b ∧ bᵢ]·eᵢ``.

    Args:
        guard: guarda (frozenset de átomos), um Atom, ou None (falso)
    """
    if guard is None or guard is False:
        return ZERO
    if guard is True:
        return term
    if isinstance(guard, Atom):
        guard = frozenset({guard})
    return Term.build([(c, conjoin(guard, g), b) for c, g, b in term.triples])


def guard_sum(cubes, term):
    """Soma de ``[cubo]·term`` sobre cubos disjuntos."""
    return add(*(guard_mul(cube, term) for cube in cubes))


def substitute(term, mapping):
    """
    Substituição simultânea.

    Args:
        term: Term
        mapping: símbolo -> expressão sympy, ou símbolo -> Term; termos só
            podem ocupar o lugar de uma lógica que aparece sozinha no corpo
            de uma norma cuja guarda não a menciona

    Raises:
        TermSubstitutionError: substituição de Term em posição não absorvível
    """
    expressions = {k: sp.sympify(v) for k, v in mapping.items() if not isinstance(v, Term)}
    terms = {k: v for k, v in mapping.items() if isinstance(v, Term)}
    keys = set(mapping)
    triples = []
    for coeff, norm in term.summands:
        if not norm.free_symbols & keys:
            triples.append((coeff, norm.guard, norm.body))
            continue
        guard = substitute_guard(norm.guard, expressions) if expressions else norm.guard
        if guard is None:
            continue
        body = norm.body.xreplace(expressions) if expressions else norm.body
        replaced = set(terms) & (guard_symbols(guard) | body.free_symbols)
        if not replaced:
            triples.append((coeff, guard, body))
            continue
        if body not in terms or guard_symbols(guard) & set(terms):
            raise TermSubstitutionError(
                f'termo substituído em posição não absorvível: [{", ".join(map(str, guard))}]·{body}'
            )
        triples.extend(guard_mul(guard, scale(coeff, terms[body])).triples)
    return Term.build(triples)


def substitute_unknowns(term, model):
    """Aplica um modelo (desconhecido -> racional) aos coeficientes."""
    values = {k: sp.Rational(v.numerator, v.denominator) if hasattr(v, 'numerator') else v
              for k, v in model.items()}
    return Term.build([(c.xreplace(values), g, b) for c, g, b in term.triples])
