from fractions import Fraction

import numpy as np
from django.test import SimpleTestCase

from common.exceptions import EvaluationError, SupportExplosion
from frontend import ast
from frontend.parser import parse_expectation, parse_program
from frontend.tests import load_benchmark
from oracle.distributions import draw, support
from oracle.exact import ExactOracle, exact_expectation
from oracle.montecarlo import monte_carlo
from oracle.semantics import eval_expr, nondeterministic_procedures


def benchmark(name):
    return parse_program(load_benchmark(name))


def first_sample(program):
    return next(c.dist for c in ast.walk(program.decls[0].body) if isinstance(c, ast.Sample))


class ExactOracleTest(SimpleTestCase):
    """
    Testes do oráculo exato de profundidade finita.
    """

    def test_balls(self):
        """
        Testa balls com n = 3 na profundidade 4: 3/5.
        """
        self.assertEqual(exact_expectation(benchmark('balls.pw'), args=(3,), depth=4), Fraction(3, 5))

    def test_depth_zero(self):
        """
        Testa que a profundidade 0 vale 0 para qualquer entrada.
        """
        for name, args in (('balls.pw', (3,)), ('one.pw', ()), ('pick.pw', ())):
            self.assertEqual(exact_expectation(benchmark(name), args=args, depth=0), 0)

    def test_throws_partial_sum(self):
        """
        Testa throws na profundidade 10: soma parcial da série geométrica, abaixo de 5.
        """
        expected = sum(k * Fraction(1, 5) * Fraction(4, 5) ** (k - 1) for k in range(1, 11))

        value = exact_expectation(benchmark('throws.pw'), depth=10)

        self.assertEqual(value, expected)
        self.assertLess(value, 5)

    def test_depth_monotonicity(self):
        """
        Testa que o valor não diminui com a profundidade.
        """
        cases = (('throws.pw', ()), ('balls.pw', (5,)), ('rdwalk.pw', (4,)), ('every5.pw', (5,)), ('rec1.pw', (3,)))
        for name, args in cases:
            values = [exact_expectation(benchmark(name), args=args, depth=i) for i in range(8)]
            self.assertEqual(values, sorted(values), name)

    def test_loops(self):
        """
        Testa laços: countdown e binomial_update.
        """
        self.assertEqual(exact_expectation(benchmark('countdown.pw'), args=(5,)), 5)
        self.assertEqual(exact_expectation(benchmark('binomial_update.pw'), args=(4,)), 2)

    def test_distributions(self):
        """
        Testa dado, binomial e hipergeométrica.
        """
        self.assertEqual(exact_expectation(benchmark('die.pw')), Fraction(7, 2))
        self.assertEqual(exact_expectation(benchmark('binomial_draw.pw'), args=(4,)), 2)
        program = parse_program('def h(): var x ~ Hypergeometric(10, 4, 3); return x')
        self.assertEqual(exact_expectation(program), Fraction(6, 5))

    def test_demonic_choice(self):
        """
        Testa que a escolha não determinística toma o máximo: pick vale 3.
        """
        program = benchmark('pick.pw')

        self.assertEqual(nondeterministic_procedures(program), {'pick'})
        self.assertEqual(exact_expectation(program), 3)

    def test_biased_coin(self):
        """
        Testa biased_coin: 3/2·x1 quando x1 > x2 ≥ 0, senão x1; acima de ⟨x1⟩ + 1/2·[x1 > x2] em (10, 0).
        """
        program = benchmark('biased_coin.pw')
        cases = (((10, 0), 15), ((3, 1), Fraction(9, 2)), ((1, 3), 1), ((0, 0), 0))
        for args, expected in cases:
            self.assertEqual(exact_expectation(program, args=args), expected, args)
        self.assertGreater(exact_expectation(program, args=(10, 0)), 10 + Fraction(1, 2))

    def test_rdwalk_below_two(self):
        """
        Testa rdwalk com n < 2: a guarda n > 1 falha e o valor é 0.
        """
        program = benchmark('rdwalk.pw')

        for n in (-3, 0, 1):
            self.assertEqual(exact_expectation(program, args=(n,), depth=20), 0)
        self.assertGreater(exact_expectation(program, args=(2,), depth=20), 0)

    def test_choice_after_call(self):
        """
        Testa que a escolha vê o valor devolvido pela chamada: max(2x, 1 - x) com x ~ Bernoulli(1/2).
        """
        program = parse_program(
            'def coin(): var c ~ Bernoulli(1/2); return c\n'
            'def f() { var x := coin(); if (*) { return 2 * x } else { return 1 - x } }'
        )

        self.assertEqual(exact_expectation(program, entry='f'), Fraction(3, 2))

    def test_globals(self):
        """
        Testa que globais entram com o valor inicial e são atualizadas pela chamada.
        """
        program = parse_program('global g\ndef inc() { g := g + 1; return 0 }\ndef f() { var x := inc(); return g }')

        self.assertEqual(exact_expectation(program, entry='f', globals_={'g': 4}), 5)

    def test_outcomes(self):
        """
        Testa os resultados ponderados do dado.
        """
        outcomes = ExactOracle(benchmark('die.pw')).outcomes()

        self.assertEqual([o.value for o in outcomes], [1, 2, 3, 4, 5, 6])
        self.assertTrue(all(o.probability == Fraction(1, 6) for o in outcomes))

    def test_unroll_cap(self):
        """
        Testa que a massa além do limite de desdobramentos contribui 0.
        """
        program = parse_program('def f() { var x := 0; while (x >= 0) { x := x + 1 }; return x }')

        self.assertEqual(exact_expectation(program, unroll=10), 0)

    def test_support_explosion(self):
        """
        Testa o limite de estados.
        """
        with self.assertRaises(SupportExplosion):
            exact_expectation(benchmark('binomial_update.pw'), args=(10,), state_cap=3)

    def test_division_by_zero(self):
        """
        Testa probabilidade 1/n avaliada com n = 0.
        """
        with self.assertRaises(EvaluationError):
            exact_expectation(parse_program('def f(n): var x ~ Bernoulli(1/n); return x'), args=(0,))

    def test_linearity(self):
        """
        Testa E[a·y + b·z] = a·E[y] + b·E[z] em corpos sem laços nem chamadas.
        """
        rng = np.random.default_rng(5)
        dists = ('Uniform(0, 3)', 'Bernoulli(1/3)', 'Binomial(4, 1/4)', 'Discrete(1/2: 1, 1/4: 5, 1/4: 0)')
        for _ in range(20):
            a, b = (int(v) for v in rng.integers(0, 5, size=2))
            first, second = (dists[int(i)] for i in rng.integers(0, len(dists), size=2))
            combined = parse_program(f'def f() {{ var y ~ {first}; var z ~ {second}; return {a} * y + {b} * z }}')
            alone_y = parse_program(f'def f() {{ var y ~ {first}; return y }}')
            alone_z = parse_program(f'def f() {{ var z ~ {second}; return z }}')

            self.assertEqual(
                exact_expectation(combined),
                a * exact_expectation(alone_y) + b * exact_expectation(alone_z),
            )


class DistributionTest(SimpleTestCase):
    """
    Testes das tabelas exatas e dos sorteios.
    """

    def test_support_sums_to_one(self):
        """
        Testa que as tabelas somam 1 e descartam probabilidade zero.
        """
        program = parse_program('def f(n): var x ~ Binomial(n, 1/3); var y ~ Uniform(2, 4); return x')
        dist = first_sample(program)

        table = support(dist, {'n': Fraction(5)})

        self.assertEqual(sum(p for p, _ in table), 1)
        self.assertEqual(len(table), 6)

    def test_invalid_probability(self):
        """
        Testa Bernoulli com probabilidade fora de [0, 1] em tempo de execução.
        """
        program = parse_program('def f(n): var x ~ Bernoulli(n); return x')

        with self.assertRaises(EvaluationError):
            exact_expectation(program, args=(2,))

    def test_draw_in_support(self):
        """
        Testa que sorteios caem no suporte.
        """
        program = parse_program('def f(): var x ~ Hypergeometric(6, 2, 3); return x')
        dist = first_sample(program)
        rng = np.random.default_rng(0)
        values = {v for _, v in support(dist, {})}

        for _ in range(200):
            self.assertIn(draw(dist, {}, rng), values)

    def test_bound_expression(self):
        """
        Testa a avaliação de cotas com norma e colchete.
        """
        expr = parse_expectation('1/5 * ⟨n⟩ + [n > 2]')

        self.assertEqual(eval_expr(expr, {'n': 4}), Fraction(9, 5))
        self.assertEqual(eval_expr(expr, {'n': -3}), 0)


class MonteCarloTest(SimpleTestCase):
    """
    Testes do estimador Monte-Carlo.
    """

    def test_constant(self):
        """
        Testa que return 7 dá média exatamente 7 e erro padrão 0.
        """
        estimate = monte_carlo(parse_program('def f(): return 7'), samples=50, seed=1)

        self.assertEqual(estimate.mean, 7.0)
        self.assertEqual(estimate.stderr, 0.0)
        self.assertEqual(estimate.truncated, 0)

    def test_balls_agreement(self):
        """
        Testa balls com n = 10: média a menos de 4σ de 2.
        """
        estimate = monte_carlo(benchmark('balls.pw'), args=(10,), samples=20000, seed=3)

        self.assertLessEqual(abs(estimate.mean - 2), 4 * estimate.stderr)
        self.assertGreater(estimate.stderr, 0)

    def test_geo_zero(self):
        """
        Testa geo com continuação nula: média 0.
        """
        estimate = monte_carlo(benchmark('geo.pw'), samples=500, seed=0)

        self.assertEqual(estimate.mean, 0.0)

    def test_seeded(self):
        """
        Testa que a mesma semente dá a mesma estimativa, com qualquer número de workers.
        """
        program = benchmark('throws.pw')

        first = monte_carlo(program, samples=3000, seed=9, chunk=500)
        second = monte_carlo(program, samples=3000, seed=9, chunk=500, workers=3)

        self.assertEqual(first.mean, second.mean)
        self.assertEqual(first.stderr, second.stderr)

    def test_demonic_choice(self):
        """
        Testa que pick fica com o ramo de valor 3.
        """
        estimate = monte_carlo(benchmark('pick.pw'), samples=200, seed=2)

        self.assertEqual(estimate.mean, 3.0)

    def test_truncation(self):
        """
        Testa que execuções além da profundidade máxima são contadas e valem 0.
        """
        estimate = monte_carlo(benchmark('throws.pw'), samples=2000, seed=4, maxdepth=2)

        self.assertGreater(estimate.truncated, 0)
        self.assertLess(estimate.mean, 5)

    def test_agreement_with_exact(self):
        """
        Testa concordância entre Monte-Carlo e o oráculo exato em benchmarks de suporte finito.
        """
        cases = (('die.pw', ()), ('binomial_update.pw', (6,)), ('every5.pw', (3,)), ('hire.pw', (5,)))
        for name, args in cases:
            program = benchmark(name)
            exact = exact_expectation(program, args=args, depth=60)
            estimate = monte_carlo(program, args=args, samples=5000, seed=6)
            self.assertLessEqual(abs(estimate.mean - float(exact)), 4 * estimate.stderr + 1e-9, name)

    def test_choice_subsamples_have_own_budget(self):
        """
        Testa que cada subamostra de uma escolha recebe os passos restantes, sem dividi-los com as outras.

        Cada ramo gasta uns 50 passos; 16 subamostras somam bem mais que 200.
        """
        program = parse_program(
            'def f() { var x := 0; if (*) { x := 0 } else { x := 1 }; while (x < 40) { x := x + 2 }; return x }'
        )

        estimate = monte_carlo(program, samples=20, seed=1, maxsteps=200, nondet_subsamples=8)

        self.assertEqual(estimate.truncated, 0)
        self.assertEqual(estimate.mean, 41.0)
        self.assertEqual(exact_expectation(program), 41)

    def test_choice_subsample_truncation_counted(self):
        """
        Testa que subamostras truncadas valem 0 e marcam a amostra como truncada.
        """
        program = parse_program(
            'def f() { var x := 0; if (*) { x := 0 } else { x := 1 }; while (x < 40) { x := x + 2 }; return x }'
        )

        estimate = monte_carlo(program, samples=20, seed=1, maxsteps=30, nondet_subsamples=4)

        self.assertEqual(estimate.truncated, 20)
        self.assertEqual(estimate.mean, 0.0)
