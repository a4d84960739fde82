"""
Linearização de Handelman.

Uma desigualdade ``p₁ ≥ 0, …, pₖ ≥ 0 ⊢ g ≥ 0`` vale se ``g`` é uma
combinação não negativa de produtos das premissas. Cada produto de grau
até ``d`` ganha um multiplicador ``λ ≥ 0`` e os coeficientes de cada
monômio nas variáveis universais são igualados.
"""

import itertools
import logging
import operator
from dataclasses import dataclass, field
from functools import reduce
from typing import List

import sympy as sp

from constraints.casesplit import case_split
from templating.templates import UnknownFactory

logger = logging.getLogger(__name__)


@dataclass
class Linearized:
    """Equações ``e = 0`` sobre desconhecidos e os multiplicadores introduzidos."""

    equations: List[sp.Expr] = field(default_factory=list)
    multipliers: List[sp.Symbol] = field(default_factory=list)


def premise_products(premises, degree):
    """Produtos de até ``degree`` premissas (com repetição), incluindo o produto vazio."""
    products = []
    for size in range(degree + 1):
        for combination in itertools.combinations_with_replacement(premises, size):
            products.append(reduce(operator.mul, combination, sp.Integer(1)))
    return products


def coefficient_equations(expr, variables):
    """Coeficientes (em desconhecidos) de cada monômio de ``expr`` nas variáveis."""
    expr = sp.expand(expr)
    if not variables:
        return [expr] if expr != 0 else []
    poly = sp.Poly(expr, *variables)
    return [sp.expand(c) for c in poly.as_dict().values() if sp.expand(c) != 0]


def handelman_linearize(inequality, degree, unknowns=None):
    """
    Restrições sobre coeficientes equivalentes a um certificado de Handelman.

    Args:
        inequality: PolyInequality
        degree: grau máximo dos produtos de premissas (>= 1)
        unknowns: UnknownFactory da análise, para os multiplicadores ``lam``

    Returns:
        Linearized
    """
    if degree < 1:
        raise ValueError(f'grau de Handelman inválido: {degree}')
    unknowns = unknowns or UnknownFactory()
    result = Linearized()
    combination = sp.Integer(0)
    for product in premise_products(list(inequality.premises), degree):
        multiplier = unknowns.new('lam')
        result.multipliers.append(multiplier)
        combination += multiplier * product
    result.equations = coefficient_equations(inequality.goal - combination, list(inequality.variables))
    return result


@dataclass
class ConstraintSystem:
    """Restrições sobre coeficientes de uma análise inteira."""

    equations: List[sp.Expr] = field(default_factory=list)
    unknowns: List[sp.Symbol] = field(default_factory=list)
    cases: int = 0

    def by_role(self, *roles):
        return [u for u in self.unknowns if u.role in roles]


def linearize_conditions(conditions, degree, unknowns=None):
    """
    Divide cada condição em casos e aplica Handelman em cada caso.

    Raises:
        UnsupportedCondition: propagado de ``case_split``
    """
    multipliers = unknowns or UnknownFactory()
    system = ConstraintSystem()
    seen = set()
    for condition in conditions:
        for symbol in sorted(condition.unknowns, key=lambda s: s.name):
            if symbol not in seen:
                seen.add(symbol)
                system.unknowns.append(symbol)
        for inequality in case_split(condition):
            system.cases += 1
            linearized = handelman_linearize(inequality, degree, multipliers)
            system.equations.extend(linearized.equations)
            system.unknowns.extend(linearized.multipliers)
    logger.info(
        f'{len(conditions)} condições, {system.cases} casos, grau {degree}: '
        f'{len(system.equations)} equações sobre {len(system.unknowns)} desconhecidos'
    )
    return system
