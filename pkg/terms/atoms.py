"""
Átomos e guardas.

Um átomo ``Atom(e, strict)`` afirma ``e >= 0`` (ou ``e > 0``). Uma guarda é
um ``frozenset`` de átomos lido como conjunção; ``TRUE`` é o conjunto vazio e
``None`` representa a guarda falsa.

Átomos lineares sobre variáveis inteiras são apertados na construção:
``x > y`` vira ``x - y - 1 >= 0`` e coeficientes são divididos pelo mdc.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import sympy as sp

from frontend import ast
from terms.symbols import is_integral, to_sympy

TRUE = frozenset()

_NEGATED_OP = {'<': '>=', '<=': '>', '>': '<=', '>=': '<', '=': '!=', '!=': '='}


@dataclass(frozen=True)
class Atom:
    expr: sp.Expr
    strict: bool = False

    @property
    def free_symbols(self):
        return self.expr.free_symbols

    def negate(self):
        return make_atom(-self.expr, not self.strict)

    def sort_key(self):
        return (sp.default_sort_key(self.expr), self.strict)

    def __str__(self):
        return f"{self.expr} {'>' if self.strict else '>='} 0"


def _linear_coefficients(expr):
    """``{símbolo: coef, 1: const}`` se ``expr`` for linear com coeficientes racionais."""
    coefficients = expr.as_coefficients_dict()
    for key, value in coefficients.items():
        if not value.is_Rational:
            return None
        if key != 1 and not key.is_Symbol:
            return None
    return coefficients


def _content(expr):
    values = list(expr.as_coefficients_dict().values())
    if not values or not all(v.is_Rational for v in values):
        return sp.Integer(1)
    numerator = math.gcd(*(int(v.p) for v in values))
    denominator = math.lcm(*(int(v.q) for v in values))
    return sp.Rational(numerator, denominator) if numerator else sp.Integer(1)


def make_atom(expr, strict=False):
    """
    Normaliza ``expr >= 0`` (ou ``> 0``).

    Returns:
        Atom, ou ``True``/``False`` quando a comparação é constante
    """
    expr = sp.expand(sp.sympify(expr))
    if expr.is_Number:
        return bool(expr > 0) if strict else bool(expr >= 0)
    coefficients = _linear_coefficients(expr)
    if coefficients is not None and all(is_integral(s) for s in expr.free_symbols):
        scale = math.lcm(*(int(v.q) for v in coefficients.values()))
        integers = {k: int(v * scale) for k, v in coefficients.items()}
        constant = integers.pop(1, 0)
        divisor = math.gcd(*integers.values())
        # sum(b_i x_i) >= -constant / divisor, com lado esquerdo inteiro
        threshold = Fraction(-constant, divisor)
        bound = math.floor(threshold) + 1 if strict else math.ceil(threshold)
        linear = sp.Add(*(sp.Integer(v // divisor) * k for k, v in integers.items()))
        return Atom(linear - bound, False)
    return Atom(sp.expand(expr / _content(expr)), strict)


def split_constant(atom):
    """``(parte variável, constante)`` de ``atom.expr``."""
    constant, rest = atom.expr.as_coeff_Add()
    return rest, constant


def conjoin(*atoms_or_guards):
    """
    Conjunção simplificada.

    Mantém o átomo mais apertado por parte variável e detecta contradições
    entre limites opostos.

    Returns:
        guarda (frozenset) ou None se for insatisfatível de forma evidente
    """
    tightest = {}
    for item in atoms_or_guards:
        if item is None or item is False:
            return None
        if item is True:
            continue
        for atom in (item if isinstance(item, frozenset) else (item,)):
            if atom is None or atom is False:
                return None
            if atom is True:
                continue
            rest, constant = split_constant(atom)
            current = tightest.get(rest)
            if current is None:
                tightest[rest] = atom
                continue
            _, old = split_constant(current)
            if constant < old or (constant == old and atom.strict):
                tightest[rest] = atom
    for rest, atom in tightest.items():
        opposite = tightest.get(-rest)
        if opposite is None:
            continue
        # rest >= -c1 e rest <= c2
        _, c1 = split_constant(atom)
        _, c2 = split_constant(opposite)
        if -c1 > c2 or (-c1 == c2 and (atom.strict or opposite.strict)):
            return None
    return frozenset(tightest.values())


def sorted_atoms(guard):
    return sorted(guard, key=Atom.sort_key)


def negate_guard(guard):
    """Cubos disjuntos cuja união é a negação de ``guard``."""
    cubes = []
    prefix = TRUE
    for atom in sorted_atoms(guard):
        cube = conjoin(prefix, atom.negate())
        if cube is not None:
            cubes.append(cube)
        prefix = conjoin(prefix, atom)
        if prefix is None:
            break
    return cubes


def substitute_guard(guard, mapping):
    """Substituição simultânea de símbolos por expressões; None se ficar falsa."""
    atoms = []
    for atom in guard:
        if not atom.free_symbols & mapping.keys():
            atoms.append(atom)
            continue
        new = make_atom(atom.expr.xreplace(mapping), atom.strict)
        if new is False:
            return None
        if new is not True:
            atoms.append(new)
    return conjoin(frozenset(atoms))


def guard_symbols(guard):
    symbols = set()
    for atom in guard:
        symbols |= atom.free_symbols
    return symbols


def comparison_atoms(op, left, right):
    """
    Cubos de uma comparação entre expressões sympy.

    Returns:
        lista de guardas (dois cubos para ``!=``)
    """
    if op == '<':
        cubes = [(make_atom(right - left, True),)]
    elif op == '<=':
        cubes = [(make_atom(right - left),)]
    elif op == '>':
        cubes = [(make_atom(left - right, True),)]
    elif op == '>=':
        cubes = [(make_atom(left - right),)]
    elif op == '=':
        cubes = [(make_atom(left - right), make_atom(right - left))]
    elif op == '!=':
        cubes = [(make_atom(right - left, True),), (make_atom(left - right, True),)]
    else:
        raise ValueError(f'Operador desconhecido: {op}')
    result = []
    for atoms in cubes:
        cube = conjoin(*atoms)
        if cube is not None:
            result.append(cube)
    return result


def guard_cubes(cond, positive=True):
    """
    DNF disjunta de uma expressão booleana do AST.

    ``a or b`` vira ``cubos(a) + cubos(not a and b)``; assim a soma dos
    colchetes de Iverson dos cubos é o colchete da expressão original.
    """
    if isinstance(cond, ast.BoolLit):
        return [TRUE] if cond.value == positive else []
    if isinstance(cond, ast.Cmp):
        op = cond.op if positive else _NEGATED_OP[cond.op]
        return comparison_atoms(op, to_sympy(cond.left), to_sympy(cond.right))
    if isinstance(cond, ast.Not):
        return guard_cubes(cond.operand, not positive)
    conjunctive = isinstance(cond, ast.And) == positive
    if not isinstance(cond, (ast.And, ast.Or)):
        raise TypeError(f'Expressão booleana desconhecida: {cond!r}')
    if conjunctive:
        return _product(guard_cubes(cond.left, positive), guard_cubes(cond.right, positive))
    first = guard_cubes(cond.left, positive)
    rest = _product(guard_cubes(cond.left, not positive), guard_cubes(cond.right, positive))
    return first + rest


def _product(left, right):
    cubes = []
    for a in left:
        for b in right:
            cube = conjoin(a, b)
            if cube is not None:
                cubes.append(cube)
    return cubes
