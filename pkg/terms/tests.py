import math
from fractions import Fraction

import numpy as np
import sympy as sp
from django.test import SimpleTestCase

from common.exceptions import TermSubstitutionError, UnsupportedExpansion
from frontend import ast
from frontend.normalize import normalize
from frontend.parser import parse_expectation, parse_program
from terms.atoms import TRUE, Atom, conjoin, guard_cubes, make_atom, negate_guard
from terms.evaluation import environment, eval_guard, eval_term
from terms.expectation import expected_term
from terms.printer import format_bound, format_term
from terms.symbols import RETURN, Unknown, arg_symbol, logical, program_symbol
from terms.term import (
    ZERO, add, clamp, constant, guard_mul, guard_sum, norm_term, scale, substitute, variable, weight,
)

X, Y = program_symbol('x'), program_symbol('y')
B, C, N = program_symbol('b'), program_symbol('c'), program_symbol('n')
ELL = logical()

CASES = 1000


def truth(cond, memory):
    """Valor de verdade de uma expressão booleana do AST, por avaliação direta."""
    if isinstance(cond, ast.BoolLit):
        return cond.value
    if isinstance(cond, ast.Not):
        return not truth(cond.operand, memory)
    if isinstance(cond, ast.And):
        return truth(cond.left, memory) and truth(cond.right, memory)
    if isinstance(cond, ast.Or):
        return truth(cond.left, memory) or truth(cond.right, memory)
    left, right = value(cond.left, memory), value(cond.right, memory)
    return {
        '<': left < right, '<=': left <= right, '>': left > right,
        '>=': left >= right, '=': left == right, '!=': left != right,
    }[cond.op]


def value(expr, memory):
    if isinstance(expr, ast.Num):
        return Fraction(expr.value)
    if isinstance(expr, ast.Var):
        return Fraction(memory[expr.name])
    if isinstance(expr, ast.Neg):
        return -value(expr.operand, memory)
    left, right = value(expr.left, memory), value(expr.right, memory)
    return {'+': left + right, '-': left - right, '*': left * right, '/': left / right}[expr.op]


def random_linear(rng):
    a, b, c = (int(v) for v in rng.integers(-3, 4, size=3))
    return a * X + b * Y + c


def random_ast_expr(rng):
    a, b, c = (int(v) for v in rng.integers(-3, 4, size=3))
    return ast.BinOp('+', ast.BinOp('*', ast.Num(a), ast.Var('x')),
                     ast.BinOp('+', ast.BinOp('*', ast.Num(b), ast.Var('y')), ast.Num(c)))


def random_bexpr(rng, depth=2):
    kind = int(rng.integers(0, 5)) if depth > 0 else 0
    if kind <= 1:
        op = ['<', '<=', '>', '>=', '=', '!='][int(rng.integers(0, 6))]
        return ast.Cmp(op, random_ast_expr(rng), ast.Num(int(rng.integers(-3, 4))))
    if kind == 2:
        return ast.And(random_bexpr(rng, depth - 1), random_bexpr(rng, depth - 1))
    if kind == 3:
        return ast.Or(random_bexpr(rng, depth - 1), random_bexpr(rng, depth - 1))
    return ast.Not(random_bexpr(rng, depth - 1))


def random_guard(rng):
    atoms = [make_atom(random_linear(rng), bool(rng.integers(0, 2))) for _ in range(int(rng.integers(0, 3)))]
    return conjoin(*atoms)


def random_term(rng, extra=()):
    triples = []
    bodies = [X, Y, ELL, sp.Integer(1), *extra]
    for _ in range(int(rng.integers(1, 4))):
        coeff = sp.Rational(int(rng.integers(0, 5)), int(rng.integers(1, 4)))
        body = bodies[int(rng.integers(0, len(bodies)))] if rng.random() < 0.5 else random_linear(rng)
        norm = clamp(body) if rng.random() < 0.5 else norm_term(TRUE, body)
        triples.append(guard_mul(random_guard(rng), scale(coeff, norm)))
    return add(*triples)


def random_memory(rng):
    return {
        'x': int(rng.integers(-6, 7)),
        'y': int(rng.integers(-6, 7)),
        'b': int(rng.integers(-6, 7)),
        'ℓ': int(rng.integers(0, 10)),
    }


class AtomTest(SimpleTestCase):
    """
    Testes de átomos e guardas.
    """

    def test_integer_tightening(self):
        """
        Testa x > y vira x - y - 1 >= 0 e 2x - 3 >= 0 vira x - 2 >= 0.
        """
        self.assertEqual(make_atom(X - Y, strict=True), Atom(X - Y - 1))
        self.assertEqual(make_atom(2 * X - 3), Atom(X - 2))
        self.assertEqual(make_atom(4 * X + 2 * Y), Atom(2 * X + Y))

    def test_constant_atoms(self):
        """
        Testa comparações constantes viram booleanos.
        """
        self.assertIs(make_atom(sp.Integer(3)), True)
        self.assertIs(make_atom(sp.Integer(0), strict=True), False)

    def test_real_atoms_keep_strictness(self):
        """
        Testa que átomos sobre lógicas reais mantêm a estrita e só perdem o conteúdo.
        """
        self.assertEqual(make_atom(2 * ELL, strict=True), Atom(ELL, True))

    def test_negation_involutive(self):
        """
        Testa ¬¬a = a em átomos aleatórios.
        """
        rng = np.random.default_rng(1)
        for _ in range(200):
            atom = make_atom(random_linear(rng) + ELL * int(rng.integers(0, 2)), bool(rng.integers(0, 2)))
            if isinstance(atom, bool):
                continue
            self.assertEqual(atom.negate().negate(), atom)

    def test_contradiction(self):
        """
        Testa 0 <= ℓ e ℓ < 0 é insatisfatível; x > y e y >= x também.
        """
        self.assertIsNone(conjoin(make_atom(ELL), make_atom(-ELL, strict=True)))
        self.assertIsNone(conjoin(make_atom(X - Y, strict=True), make_atom(Y - X)))
        self.assertIsNotNone(conjoin(make_atom(X - 3), make_atom(3 - X)))

    def test_tightest_kept(self):
        """
        Testa que só o limite mais apertado sobrevive.
        """
        guard = conjoin(make_atom(N), make_atom(N, strict=True))

        self.assertEqual(guard, frozenset({Atom(N - 1)}))

    def test_guard_cubes_disjoint_and_complete(self):
        """
        Testa que exatamente um cubo vale onde a expressão vale, e nenhum onde não vale.
        """
        rng = np.random.default_rng(2)
        for _ in range(CASES):
            cond = random_bexpr(rng)
            memory = random_memory(rng)
            env = environment(memory)
            cubes = guard_cubes(cond)
            hits = sum(1 for cube in cubes if eval_guard(cube, env))
            self.assertEqual(hits, 1 if truth(cond, memory) else 0, msg=str(cond))

    def test_negate_guard(self):
        """
        Testa que a negação de uma guarda é uma partição do complemento.
        """
        rng = np.random.default_rng(3)
        for _ in range(300):
            guard = random_guard(rng)
            if guard is None:
                continue
            env = environment(random_memory(rng))
            hits = sum(1 for cube in negate_guard(guard) if eval_guard(cube, env))
            self.assertEqual(hits, 0 if eval_guard(guard, env) else 1)


class TermAlgebraTest(SimpleTestCase):
    """
    Testes das operações sobre termos.
    """

    def test_guard_mul_example(self):
        """
        Testa guard_mul(n > 0, ⟨n⟩) avaliado ponto a ponto.
        """
        (cube,) = guard_cubes(ast.Cmp('>', ast.Var('n'), ast.Num(0)))
        term = guard_mul(cube, clamp(N))

        for n in range(-3, 4):
            self.assertEqual(eval_term(term, {'n': n}), max(n, 0))

    def test_guard_mul_true_false(self):
        """
        Testa guard_mul com true e false.
        """
        term = add(clamp(N), variable(ELL))

        self.assertEqual(guard_mul(frozenset(), term), term)
        self.assertEqual(guard_mul(None, term), ZERO)

    def test_guard_mul_law(self):
        """
        Testa eval(guard_mul(b, t)) = [b]·eval(t) em 1000 casos aleatórios.
        """
        rng = np.random.default_rng(4)
        for _ in range(CASES):
            cond = random_bexpr(rng)
            term = random_term(rng)
            memory = random_memory(rng)
            expected = eval_term(term, memory) if truth(cond, memory) else 0
            self.assertEqual(eval_term(guard_sum(guard_cubes(cond), term), memory), expected)

    def test_substitute_program_variable(self):
        """
        Testa (⟨b⟩ + ℓ)[b ↦ b+1] = ⟨b+1⟩ + ℓ.
        """
        term = add(clamp(B), variable(ELL))

        self.assertEqual(substitute(term, {B: B + 1}), add(clamp(B + 1), variable(ELL)))
        self.assertEqual(substitute(term, {B: B}), term)

    def test_substitute_law(self):
        """
        Testa eval(t[x ↦ e], m) = eval(t, m[x ↦ e(m)]) em casos aleatórios.
        """
        rng = np.random.default_rng(5)
        for _ in range(CASES):
            term = random_term(rng)
            replacement = random_linear(rng)
            memory = random_memory(rng)
            shifted = dict(memory, x=int(replacement.subs({X: memory['x'], Y: memory['y']})))
            self.assertEqual(eval_term(substitute(term, {X: replacement}), memory), eval_term(term, shifted))

    def test_substitute_logical_by_term(self):
        """
        Testa (⟨ℓr⟩ + ℓ)[ℓ ↦ d0 + d1·ℓ] = ⟨ℓr⟩ + d0 + d1·ℓ.
        """
        d0, d1 = Unknown('d0'), Unknown('d1')
        tau = add(constant(d0), variable(ELL, d1))
        result = substitute(add(clamp(RETURN), variable(ELL)), {ELL: tau})

        self.assertEqual(result, add(clamp(RETURN), constant(d0), variable(ELL, d1)))

    def test_substitute_term_in_guard_rejected(self):
        """
        Testa que substituir termo numa lógica dentro de guarda é erro.
        """
        tau = constant(Unknown('d0'))

        with self.assertRaises(TermSubstitutionError):
            substitute(clamp(ELL - X), {ELL: tau})

    def test_add_and_scale(self):
        """
        Testa neutro da soma, escala por zero e a continuação de balls.
        """
        term = add(clamp(B), variable(ELL))
        continuation = add(scale(sp.Rational(1, 5), clamp(B + 1)), scale(sp.Rational(4, 5), clamp(B)))

        self.assertEqual(add(term, ZERO), term)
        self.assertEqual(scale(0, term), ZERO)
        self.assertEqual(len(continuation.summands), 2)
        self.assertEqual(eval_term(continuation, {'b': 4}), Fraction(1, 5) * 5 + Fraction(4, 5) * 4)

    def test_merge_identical_norms(self):
        """
        Testa que normas iguais são somadas.
        """
        term = add(clamp(N, sp.Rational(1, 2)), clamp(N, sp.Rational(1, 2)))

        self.assertEqual(term, clamp(N))

    def test_dynamic_weights_of_logical_cancel(self):
        """
        Testa que (1/n)·ℓ + (1 - 1/n)·ℓ volta a ser ℓ, que ainda pode ser substituído.
        """
        p = 1 / N

        term = add(weight(p, variable(ELL)), weight(1 - p, variable(ELL)))

        self.assertEqual(term, variable(ELL))

    def test_eval_examples(self):
        """
        Testa avaliações pontuais de termos.
        """
        self.assertEqual(eval_term(clamp(N, sp.Rational(1, 5)), {'n': 10}), 2)
        self.assertEqual(eval_term(clamp(X), {'x': -3}), 0)
        self.assertEqual(eval_term(add(clamp(RETURN), variable(ELL)), valuation={'ℓr': 2, 'ℓ': 3}), 5)

    def test_eval_with_model(self):
        """
        Testa avaliação com coeficientes desconhecidos e um modelo.
        """
        c0 = Unknown('c0')
        term = add(constant(c0), clamp(N, c0))

        self.assertEqual(eval_term(term, {'n': 3}, model={c0: Fraction(1, 2)}), 2)

    def test_format_bound(self):
        """
        Testa que ℓa_x volta ao nome do parâmetro, exceto quando colide com outro símbolo.
        """
        program = normalize(parse_program('def g(n) { return n }\ndef f(n) { return n }'))
        renamed = program.procedure('f').params[0]
        self.assertEqual(renamed, 'n_1')

        self.assertEqual(format_bound(clamp(arg_symbol('n'), sp.Rational(1, 5))), '1/5·⟨n⟩')
        self.assertEqual(format_bound(clamp(arg_symbol(renamed)), program), '⟨n⟩')
        self.assertIn('ℓa_n', format_bound(add(clamp(arg_symbol('n')), clamp(N))))

    def test_non_negativity(self):
        """
        Testa que normas ⟨e⟩ com coeficientes não negativos nunca avaliam negativo.
        """
        rng = np.random.default_rng(6)
        for _ in range(CASES):
            term = add(*(guard_mul(random_guard(rng), clamp(random_linear(rng), int(rng.integers(0, 4))))
                         for _ in range(3)))
            self.assertGreaterEqual(eval_term(term, random_memory(rng)), 0)


class ExpectedTermTest(SimpleTestCase):
    """
    Testes da esperança simbólica.
    """

    def test_balls_continuation(self):
        """
        Testa expected_term(c, Bernoulli(1/5), [c=1]·⟨b+1⟩ + [c≠1]·⟨b⟩).
        """
        c_is_one = ast.Cmp('=', ast.Var('c'), ast.Num(1))
        term = add(guard_sum(guard_cubes(c_is_one), clamp(B + 1)),
                   guard_sum(guard_cubes(ast.Not(c_is_one)), clamp(B)))
        result = expected_term('c', ast.Bernoulli(parse_expectation('1/5')), term)

        expected = add(scale(sp.Rational(1, 5), clamp(B + 1)), scale(sp.Rational(4, 5), clamp(B)))
        self.assertEqual(result, expected)
        self.assertIn('1/5·⟨b + 1⟩', format_term(result))
        self.assertIn('4/5·⟨b⟩', format_term(result))

    def test_uniform_constant(self):
        """
        Testa expected_term(x, Uniform(0, 2), ⟨x⟩) = 1.
        """
        result = expected_term('x', ast.Uniform(ast.Num(0), ast.Num(2)), clamp(X))

        self.assertEqual(result, constant(1))

    def test_independence(self):
        """
        Testa que x ausente do termo deixa o termo intacto.
        """
        term = add(clamp(Y), variable(ELL))

        self.assertEqual(expected_term('x', ast.Bernoulli(parse_expectation('1/3')), term), term)

    def test_dynamic_binomial(self):
        """
        Testa Binomial(n, 1/2) sob ⟨x⟩ + ℓ pela regra de momentos.
        """
        dist = ast.Binomial(ast.Var('n'), parse_expectation('1/2'))
        result = expected_term('x', dist, add(clamp(X), variable(ELL)))

        for n in range(0, 8):
            self.assertEqual(eval_term(result, {'n': n}, {'ℓ': 1}), Fraction(n, 2) + 1)

    def test_dynamic_binomial_square(self):
        """
        Testa E[x²] = np(1-p) + n²p² para Binomial dinâmica.
        """
        dist = ast.Binomial(ast.Var('n'), parse_expectation('1/3'))
        result = expected_term('x', dist, norm_term(frozenset(), X ** 2))

        for n in range(0, 6):
            p = Fraction(1, 3)
            self.assertEqual(eval_term(result, {'n': n}), n * p * (1 - p) + n * n * p * p)

    def test_dynamic_unsupported(self):
        """
        Testa que guarda em x fora do fragmento falha de forma controlada.
        """
        dist = ast.Binomial(ast.Var('n'), parse_expectation('1/2'))

        with self.assertRaises(UnsupportedExpansion):
            expected_term('x', dist, clamp(X - 3))

    def test_dynamic_probability(self):
        """
        Testa Bernoulli(1/n) multiplicando o corpo das normas.
        """
        dist = ast.Bernoulli(parse_expectation('1/n'))
        result = expected_term('x', dist, clamp(Y + X))

        for n in range(1, 6):
            self.assertEqual(eval_term(result, {'n': n, 'y': 3}), Fraction(1, n) * 4 + (1 - Fraction(1, n)) * 3)

    def _brute_force(self, dist_table, term, memory):
        return sum(
            (p * eval_term(term, dict(memory, x=v)) for p, v in dist_table),
            Fraction(0),
        )

    def _random_distribution(self, rng):
        kind = int(rng.integers(0, 5))
        if kind == 0:
            p = Fraction(int(rng.integers(0, 6)), 5)
            return ast.Bernoulli(parse_expectation(f'{p.numerator}/{p.denominator}')), [(p, 1), (1 - p, 0)]
        if kind == 1:
            lo = int(rng.integers(-3, 3))
            hi = lo + int(rng.integers(0, 4))
            share = Fraction(1, hi - lo + 1)
            return ast.Uniform(parse_expectation(str(lo)), parse_expectation(str(hi))), \
                [(share, v) for v in range(lo, hi + 1)]
        if kind == 2:
            n = int(rng.integers(0, 6))
            p = Fraction(int(rng.integers(0, 4)), 3)
            table = [(math.comb(n, k) * p ** k * (1 - p) ** (n - k), k) for k in range(n + 1)]
            return ast.Binomial(ast.Num(n), parse_expectation(f'{p.numerator}/{p.denominator}')), table
        if kind == 3:
            population = int(rng.integers(1, 7))
            successes = int(rng.integers(0, population + 1))
            draws = int(rng.integers(0, population + 1))
            total = math.comb(population, draws)
            table = [
                (Fraction(math.comb(successes, k) * math.comb(population - successes, draws - k), total), k)
                for k in range(0, draws + 1)
                if k <= successes and draws - k <= population - successes
            ]
            dist = ast.Hypergeometric(ast.Num(population), ast.Num(successes), ast.Num(draws))
            return dist, table
        first = Fraction(int(rng.integers(0, 5)), 4)
        entries = ((parse_expectation(f'{first.numerator}/{first.denominator}'), ast.Num(2)),
                   (parse_expectation(f'{(1 - first).numerator}/{(1 - first).denominator}'), ast.Var('y')))
        return ast.DiscreteTable(entries), None

    def test_against_brute_force(self):
        """
        Testa expected_term contra a soma finita exata, 1000 casos.
        """
        rng = np.random.default_rng(7)
        for _ in range(CASES):
            dist, table = self._random_distribution(rng)
            term = random_term(rng, extra=(X * Y,))
            memory = random_memory(rng)
            if table is None:
                first = value(dist.entries[0][0], memory)
                table = [(first, 2), (1 - first, memory['y'])]
            result = expected_term('x', dist, term)
            self.assertEqual(eval_term(result, memory), self._brute_force(table, term, memory))

    def test_linearity(self):
        """
        Testa E[a·t1 + b·t2] = a·E[t1] + b·E[t2].
        """
        rng = np.random.default_rng(8)
        for _ in range(CASES):
            dist, _ = self._random_distribution(rng)
            t1, t2 = random_term(rng), random_term(rng)
            a = sp.Rational(int(rng.integers(0, 5)), int(rng.integers(1, 4)))
            b = sp.Rational(int(rng.integers(0, 5)), int(rng.integers(1, 4)))
            memory = random_memory(rng)
            left = expected_term('x', dist, add(scale(a, t1), scale(b, t2)))
            right = add(scale(a, expected_term('x', dist, t1)), scale(b, expected_term('x', dist, t2)))
            self.assertEqual(eval_term(left, memory), eval_term(right, memory))
