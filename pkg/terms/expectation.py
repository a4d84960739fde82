import logging
import math

import sympy as sp

from common.exceptions import UnsupportedExpansion
from frontend import ast
from terms.atoms import conjoin, make_atom
from terms.symbols import as_symbol, to_sympy
from terms.term import Term, add, substitute, weight

logger = logging.getLogger(__name__)


def _table(x, term, entries):
    """Σ pᵢ·t[x ↦ vᵢ] para uma tabela finita de pares (p, v) já em sympy."""
    return add(*(weight(p, substitute(term, {x: v})) for p, v in entries if p != 0))


def _constant_int(expr, what):
    if not expr.is_Integer:
        return None
    value = int(expr)
    if value < 0:
        raise UnsupportedExpansion(f'{what} negativo: {value}')
    return value


def binomial_table(n, p):
    return [
        (sp.Integer(math.comb(n, k)) * p ** k * (1 - p) ** (n - k), sp.Integer(k))
        for k in range(n + 1)
    ]


def hypergeometric_table(population, successes, draws):
    if successes > population or draws > population:
        raise UnsupportedExpansion(
            f'Hypergeometric({population}, {successes}, {draws}) fora do domínio'
        )
    total = math.comb(population, draws)
    low, high = max(0, draws + successes - population), min(draws, successes)
    return [
        (sp.Rational(math.comb(successes, k) * math.comb(population - successes, draws - k), total), sp.Integer(k))
        for k in range(low, high + 1)
    ]


def _moment_expansion(x, term, mean, second, validity, dist_name):
    """
    Expansão por momentos para suporte dinâmico.

    Cada parcela que menciona ``x`` precisa ter corpo polinomial de grau no
    máximo 2 em ``x`` e guarda cujos átomos em ``x`` são consequência de
    ``x >= 0``.
    """
    triples = []
    for coeff, guard, body in term.triples:
        if x not in body.free_symbols and not any(x in a.free_symbols for a in guard):
            triples.append((coeff, guard, body))
            continue
        kept = []
        for atom in guard:
            if x not in atom.free_symbols:
                kept.append(atom)
                continue
            offset = sp.expand(atom.expr - x)
            if atom.strict or not offset.is_Number or offset < 0:
                raise UnsupportedExpansion(
                    f'{dist_name} dinâmica sob guarda {atom} não suportada'
                )
        try:
            poly = sp.Poly(body, x)
        except sp.PolynomialError as exc:
            raise UnsupportedExpansion(f'{dist_name} dinâmica sob corpo {body}', original_exception=exc)
        if poly.degree() > 2 or any(x in c.free_symbols for c in poly.all_coeffs()):
            raise UnsupportedExpansion(f'{dist_name} dinâmica sob corpo de grau {poly.degree()}')
        coefficients = dict(zip(range(poly.degree(), -1, -1), poly.all_coeffs()))
        if coefficients.get(2, 0) != 0 and second is None:
            raise UnsupportedExpansion(f'{dist_name} dinâmica só admite corpos lineares')
        expected = coefficients.get(0, 0) + coefficients.get(1, 0) * mean
        if second is not None:
            expected += coefficients.get(2, 0) * second
        triples.append((coeff, conjoin(frozenset(kept), validity), expected))
    return Term.build(triples)


def _validity(*atoms):
    return conjoin(*(make_atom(a) for a in atoms))


def expected_term(var, dist, term):
    """
    Representação em termos da esperança de ``term`` sob ``var ~ dist``.

    Args:
        var: nome ou símbolo da variável amostrada
        dist: distribuição do AST
        term: Term pós-esperança

    Returns:
        Term equivalente a Σᵥ Pr[v]·term[var ↦ v]

    Raises:
        UnsupportedExpansion: suporte dinâmico sob norma fora do fragmento
    """
    x = as_symbol(var)
    if x not in term.variables:
        return term
    if isinstance(dist, ast.DiscreteTable):
        return _table(x, term, [(to_sympy(p), to_sympy(v)) for p, v in dist.entries])
    if isinstance(dist, ast.Bernoulli):
        p = to_sympy(dist.prob)
        return _table(x, term, [(p, sp.Integer(1)), (1 - p, sp.Integer(0))])
    if isinstance(dist, ast.Uniform):
        lo, hi = to_sympy(dist.lo), to_sympy(dist.hi)
        if not (lo.is_Integer and hi.is_Integer) or lo > hi:
            raise UnsupportedExpansion(f'Uniform({lo}, {hi}) exige limites inteiros constantes')
        share = sp.Rational(1, int(hi - lo) + 1)
        return _table(x, term, [(share, sp.Integer(v)) for v in range(int(lo), int(hi) + 1)])
    if isinstance(dist, ast.Binomial):
        n, p = to_sympy(dist.trials), to_sympy(dist.prob)
        trials = _constant_int(n, 'número de tentativas')
        if trials is not None and p.is_Number:
            return _table(x, term, binomial_table(trials, p))
        logger.debug(f'Binomial dinâmica expandida por momentos: n={n}, p={p}')
        mean = n * p
        second = n * p * (1 - p) + n ** 2 * p ** 2
        return _moment_expansion(x, term, mean, second, _validity(n), 'Binomial')
    if isinstance(dist, ast.Hypergeometric):
        population, successes, draws = (to_sympy(e) for e in ast.dist_exprs(dist))
        values = [_constant_int(e, 'parâmetro') for e in (population, successes, draws)]
        if all(v is not None for v in values):
            return _table(x, term, hypergeometric_table(*values))
        mean = draws * successes / population
        validity = _validity(population - 1, successes, population - successes, draws, population - draws)
        return _moment_expansion(x, term, mean, None, validity, 'Hypergeometric')
    raise TypeError(f'Distribuição desconhecida: {dist!r}')
