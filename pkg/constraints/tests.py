import shutil
from fractions import Fraction
from unittest import skipUnless

import numpy as np
import sympy as sp
from django.conf import settings
from django.test import SimpleTestCase

from common.exceptions import SolverError, UnsupportedCondition
from constraints.casesplit import PolyInequality, case_split, feasible
from constraints.checking import check_model
from constraints.handelman import ConstraintSystem, handelman_linearize, linearize_conditions, premise_products
from constraints.optimize import Objective, build_objective, optimize
from constraints.smtlib import SAT, UNKNOWN, UNSAT, emit_smt, parse_model, to_smt
from constraints.solver import SolverResult, SolverService
from frontend.normalize import normalize
from frontend.parser import parse_program
from frontend.tests import load_benchmark
from templating.bases import CONSTANT
from templating.templates import UnknownFactory
from terms.atoms import TRUE, make_atom
from terms.evaluation import environment, eval_expr, eval_guard, eval_term
from terms.symbols import Unknown, logical, program_symbol
from terms.term import ZERO, add, clamp, constant, guard_mul, norm_term, variable
from transformer.state import AnalysisState, Origin, SideCondition, TemplateSettings
from transformer.transformer import generate_constraints

X, Y, N = program_symbol('x'), program_symbol('y'), program_symbol('n')
ELL = logical()
ORIGIN = Origin('test', 'f')

CASES = 1000
HAS_SOLVER = shutil.which(settings.PEVALYZER['SOLVER']) is not None


def load_program(name):
    return normalize(parse_program(load_benchmark(name)))


def balls_conditions(**options):
    program = load_program('balls.pw')
    st = AnalysisState(program, TemplateSettings(guarded=False, **options))
    return generate_constraints(program, st), st


def balls_model(conditions, st):
    """Modelo ``c1 = d0 = 1/5``, ``c2 = d1 = 1``, ``c0 = 0``."""
    pair = st.templates['balls']
    (context,) = [c for c in conditions if c.origin.rule == 'call-context']
    tau = context.rhs
    ell_norm = variable(ELL).norms[0]
    arg_norm = [n for n in pair.h.norms if n not in (CONSTANT, ell_norm)][0]
    return {
        pair.h.coefficient(CONSTANT): Fraction(0),
        pair.h.coefficient(arg_norm): Fraction(1, 5),
        pair.h.coefficient(ell_norm): Fraction(1),
        tau.coefficient(CONSTANT): Fraction(1, 5),
        tau.coefficient(ell_norm): Fraction(1),
    }


def random_atom(rng):
    a, b = (int(v) for v in rng.integers(-2, 3, size=2))
    if a == 0 and b == 0:
        a = 1
    return make_atom(a * X + b * Y + int(rng.integers(-3, 4)), bool(rng.integers(0, 2)))


def random_guard(rng):
    atoms = [random_atom(rng) for _ in range(int(rng.integers(0, 3)))]
    atoms = [a for a in atoms if not isinstance(a, bool)]
    return frozenset(atoms)


def random_term(rng):
    bodies = (sp.Integer(1), X, Y, X * Y, X - Y)
    pairs = []
    for _ in range(int(rng.integers(1, 3))):
        coeff = sp.Rational(int(rng.integers(-4, 5)), int(rng.integers(1, 4)))
        pairs.append(norm_term(random_guard(rng), bodies[int(rng.integers(0, len(bodies)))], coeff))
    return add(*pairs)


def holds(premises, point):
    return all(eval_expr(p, point) >= 0 for p in premises)


def random_premises(rng):
    """Até duas premissas lineares distintas sobre x e y."""
    premises = []
    for _ in range(2):
        atom = make_atom(int(rng.integers(-2, 3)) * X + int(rng.integers(-2, 3)) * Y + int(rng.integers(0, 6)))
        if not isinstance(atom, bool) and atom.expr not in premises:
            premises.append(atom.expr)
    return tuple(premises)


class CaseSplitTest(SimpleTestCase):
    """
    Testes da eliminação de colchetes por análise de casos.
    """

    def test_two_feasible_cases(self):
        """
        Testa que os átomos {n > 0, 0 ≤ ℓ}, com 0 ≤ ℓ no contexto, geram dois casos.
        """
        condition = SideCondition(
            frozenset({make_atom(ELL)}),
            guard_mul(make_atom(N, strict=True), constant(1)),
            add(variable(ELL), constant(1)),
            ORIGIN,
        )

        cases = case_split(condition)

        self.assertEqual(len(cases), 2)
        premises = {frozenset(c.premises) for c in cases}
        self.assertEqual(premises, {frozenset({N - 1, ELL}), frozenset({-N, ELL})})
        goals = {c.goal for c in cases}
        self.assertEqual(goals, {ELL, ELL + 1})

    def test_no_guards(self):
        """
        Testa que condição sem guardas vira um único caso sem premissas.
        """
        condition = SideCondition(TRUE, constant(1), constant(2), ORIGIN)

        (case,) = case_split(condition)

        self.assertEqual(case.premises, ())
        self.assertEqual(case.goal, 1)

    def test_infeasible_context(self):
        """
        Testa que o contexto 0 ≤ ℓ ∧ ℓ < 0 não gera casos.
        """
        ctx = frozenset({make_atom(ELL), make_atom(-ELL, strict=True)})
        condition = SideCondition(ctx, constant(5), ZERO, ORIGIN)

        self.assertEqual(case_split(condition), [])

    def test_non_linear_guard(self):
        """
        Testa que guarda não linear é rejeitada.
        """
        condition = SideCondition(TRUE, guard_mul(make_atom(X * Y), constant(1)), ZERO, ORIGIN)

        with self.assertRaises(UnsupportedCondition):
            case_split(condition)

    def test_denominator_sign(self):
        """
        Testa que o denominador n é resolvido pela premissa n ≥ 1.
        """
        lhs = guard_mul(make_atom(N - 1), norm_term(TRUE, 1 / N))
        condition = SideCondition(TRUE, lhs, constant(1), ORIGIN)

        cases = case_split(condition)

        self.assertEqual(len(cases), 2)
        goals = {c.goal for c in cases}
        self.assertIn(sp.expand(N - 1), goals)
        self.assertIn(sp.Integer(1), goals)

    def test_feasibility(self):
        """
        Testa a checagem de viabilidade com átomos estritos sobre lógicas reais.
        """
        self.assertTrue(feasible([make_atom(ELL, strict=True), make_atom(1 - ELL, strict=True)]))
        self.assertFalse(feasible([make_atom(ELL, strict=True), make_atom(-ELL)]))
        self.assertFalse(feasible([make_atom(X - 1), make_atom(-X)]))

    def test_case_split_equivalence(self):
        """
        Testa, em condições aleatórias, que os casos cobrem o contexto e preservam o sinal de rhs - lhs.
        """
        rng = np.random.default_rng(7)
        for _ in range(CASES):
            condition = SideCondition(random_guard(rng), random_term(rng), random_term(rng), ORIGIN)
            cases = case_split(condition)
            for _ in range(10):
                point = environment({X: int(rng.integers(-4, 7)), Y: int(rng.integers(-4, 7))})
                matching = [c for c in cases if holds(c.premises, point)]
                if not eval_guard(condition.ctx, point):
                    self.assertEqual(matching, [])
                    continue
                self.assertEqual(len(matching), 1, str(condition))
                difference = eval_term(condition.rhs, env=point) - eval_term(condition.lhs, env=point)
                self.assertEqual(eval_expr(matching[0].goal, point) >= 0, difference >= 0, str(condition))


class HandelmanTest(SimpleTestCase):
    """
    Testes da linearização de Handelman.
    """

    def substituted(self, linearized, values):
        model = dict(zip(linearized.multipliers, values))
        model.update({m: 0 for m in linearized.multipliers if m not in model})
        return [sp.expand(e.xreplace(model)) for e in linearized.equations]

    def test_quadratic_certificate(self):
        """
        Testa n² - n = λ·(n - 1) + λ'·(n - 1)² sob n - 1 ≥ 0 em grau 2.
        """
        inequality = PolyInequality((N - 1,), N ** 2 - N, (N,))

        linearized = handelman_linearize(inequality, 2)

        self.assertEqual(len(linearized.multipliers), 3)
        self.assertTrue(all(e == 0 for e in self.substituted(linearized, [0, 1, 1])))
        self.assertFalse(all(e == 0 for e in self.substituted(linearized, [0, 1, 0])))

    def test_zero_goal(self):
        """
        Testa que o objetivo nulo é resolvido com todos os multiplicadores zero.
        """
        inequality = PolyInequality((N - 1, N + 2), sp.Integer(0), (N,))

        linearized = handelman_linearize(inequality, 1)

        self.assertTrue(all(e == 0 for e in self.substituted(linearized, [])))

    def test_logical_without_premises(self):
        """
        Testa que c0 - ℓ sem premissas exige coeficiente -1 = 0 para ℓ.
        """
        c0 = Unknown('c0')
        inequality = PolyInequality((), c0 - ELL, (ELL,))

        linearized = handelman_linearize(inequality, 1)

        self.assertIn(sp.Integer(-1), linearized.equations)

    def test_invalid_degree(self):
        """
        Testa que grau zero é rejeitado.
        """
        with self.assertRaises(ValueError):
            handelman_linearize(PolyInequality((), sp.Integer(0), ()), 0)

    def test_certificate_soundness(self):
        """
        Testa que um modelo das equações faz o objetivo valer nos pontos que satisfazem as premissas.
        """
        rng = np.random.default_rng(11)
        monomials = [sp.Integer(1), X, Y, X * Y, X ** 2, Y ** 2]
        for _ in range(10):
            premises = random_premises(rng)
            unknowns = UnknownFactory()
            positive = [unknowns.new('c') for _ in monomials]
            negative = [unknowns.new('c') for _ in monomials]
            goal = sum((p - q) * m for p, q, m in zip(positive, negative, monomials))
            linearized = handelman_linearize(PolyInequality(premises, goal, (X, Y)), 2, unknowns)

            model = {m: sp.Rational(int(rng.integers(0, 4)), int(rng.integers(1, 3))) for m in linearized.multipliers}
            products = premise_products(list(premises), 2)
            poly = sp.Poly(sum(model[m] * p for m, p in zip(linearized.multipliers, products)), X, Y)
            for p, q, m in zip(positive, negative, monomials):
                value = poly.coeff_monomial(m)
                model[p], model[q] = max(value, 0), max(-value, 0)

            self.assertTrue(all(sp.expand(e.xreplace(model)) == 0 for e in linearized.equations))
            concrete = sp.expand(goal.xreplace(model))
            for _ in range(1000):
                point = environment({X: int(rng.integers(-20, 21)), Y: int(rng.integers(-20, 21))})
                if holds(premises, point):
                    self.assertGreaterEqual(eval_expr(concrete, point), 0)

    def test_linearize_balls(self):
        """
        Testa que as condições de balls viram equações sobre desconhecidos e multiplicadores.
        """
        conditions, _ = balls_conditions()

        system = linearize_conditions(conditions, 1)

        self.assertGreater(system.cases, len(conditions))
        self.assertTrue(system.by_role('multiplier'))
        self.assertEqual({u.name for u in system.by_role('procedure')}, {'c0', 'c1', 'c2'})
        for equation in system.equations:
            self.assertTrue(all(isinstance(s, Unknown) for s in equation.free_symbols))


class SmtLibTest(SimpleTestCase):
    """
    Testes da emissão de scripts e da leitura de modelos.
    """

    def test_parse_fraction(self):
        """
        Testa a leitura de um modelo com valor fracionário.
        """
        result = parse_model('sat\n((c1 (/ 1 5)))\n')

        self.assertEqual(result.status, SAT)
        self.assertEqual(result.values, {'c1': Fraction(1, 5)})

    def test_parse_unsat(self):
        """
        Testa o status unsat, ignorando o erro de get-value que o segue.
        """
        result = parse_model('unsat\n(error "line 9 column 10: model is not available")\n')

        self.assertEqual(result.status, UNSAT)
        self.assertEqual(result.values, {})

    def test_parse_decimal(self):
        """
        Testa que 0.5 é lido exatamente como 1/2 e negativos como (- x).
        """
        result = parse_model('sat\n((c0 0.5) (d1 (- (/ 3.0 4.0))) (|ℓ x| 2.0))')

        self.assertEqual(result.values['c0'], Fraction(1, 2))
        self.assertEqual(result.values['d1'], Fraction(-3, 4))
        self.assertEqual(result.values['ℓ x'], Fraction(2))

    def test_parse_irrational(self):
        """
        Testa que valores algébricos irracionais viram unknown.
        """
        result = parse_model('sat\n((c0 (root-obj (+ (^ x 2) (- 2)) 1)))')

        self.assertEqual(result.status, UNKNOWN)
        self.assertIn('irracional', result.reason)

    def test_parse_malformed(self):
        """
        Testa saídas malformadas.
        """
        for output in ('sat\n((c0 1)', '', '(error "unknown logic")'):
            with self.assertRaises(SolverError):
                parse_model(output)

    def test_emit_shape(self):
        """
        Testa declarações, não negatividade, igualdades e get-value.
        """
        c0, c1 = Unknown('c0'), Unknown('c1')

        script = emit_smt([c0 * c1 - sp.Rational(1, 5)], [c1, c0])

        self.assertIn('(set-logic QF_NRA)', script)
        self.assertLess(script.index('c0 () Real'), script.index('c1 () Real'))
        self.assertIn('(assert (>= c0 0.0))', script)
        self.assertIn('(assert (= (+ (- (/ 1.0 5.0)) (* c0 c1)) 0.0))', script)
        self.assertIn('(get-value (c0 c1))', script)
        self.assertTrue(script.rstrip().endswith('(exit)'))

    def test_emit_objectives(self):
        """
        Testa que objetivos omitem a lógica e viram minimize em ordem.
        """
        c0, c1 = Unknown('c0'), Unknown('c1')

        script = emit_smt([], [c0, c1], objectives=[c0, c1])

        self.assertNotIn('set-logic', script)
        self.assertLess(script.index('(minimize c0)'), script.index('(minimize c1)'))

    def test_emit_empty(self):
        """
        Testa que o conjunto vazio dá um script trivialmente satisfatível.
        """
        script = emit_smt()

        self.assertNotIn('assert', script)
        self.assertNotIn('get-value', script)
        self.assertIn('(check-sat)', script)

    def test_to_smt_powers(self):
        """
        Testa potências inteiras e símbolos com caracteres especiais.
        """
        self.assertEqual(to_smt(Unknown('c0') ** 2), '(* c0 c0)')
        self.assertEqual(to_smt(sp.Symbol('ℓ')), '|ℓ|')


class CheckModelTest(SimpleTestCase):
    """
    Testes da checagem de modelos por amostragem.
    """

    def test_balls_model_passes(self):
        """
        Testa que c1 = d0 = 1/5, c2 = d1 = 1, c0 = 0 satisfaz balls em 10⁴ amostras.
        """
        conditions, st = balls_conditions()

        report = check_model(conditions, balls_model(conditions, st), trials=10000)

        self.assertTrue(report.passed, [str(f) for f in report.failures])
        self.assertGreater(report.trials, 0)

    def test_balls_model_fails_without_slope(self):
        """
        Testa que c1 = 0 viola a condição principal com testemunha n ≥ 1.
        """
        conditions, st = balls_conditions()
        model = balls_model(conditions, st)
        pair = st.templates['balls']
        for norm in pair.h.norms:
            if norm not in (CONSTANT, variable(ELL).norms[0]):
                model[pair.h.coefficient(norm)] = Fraction(0)

        report = check_model(conditions, model)

        self.assertFalse(report.passed)
        failure = report.failures[0]
        self.assertIn('procedure', failure.origin)
        self.assertGreaterEqual(failure.witness['ℓa_n'], 1)
        self.assertGreater(failure.lhs, failure.rhs)

    def test_hire_model(self):
        """
        Testa que c0 = 0, c1 = c2 = d0 = d1 = 1 satisfaz hire.
        """
        program = load_program('hire.pw')
        st = AnalysisState(program, TemplateSettings(guarded=False))
        conditions = generate_constraints(program, st)
        model = {u: Fraction(1) for c in conditions for u in c.unknowns}
        model[st.templates['hire'].h.coefficient(CONSTANT)] = Fraction(0)

        report = check_model(conditions, model)

        self.assertTrue(report.passed, [str(f) for f in report.failures])

    def test_empty(self):
        """
        Testa que o conjunto vazio de condições passa.
        """
        report = check_model([], {})

        self.assertTrue(report.passed)
        self.assertEqual(report.trials, 0)

    def test_seeded(self):
        """
        Testa que a mesma semente dá a mesma testemunha.
        """
        conditions = [SideCondition(TRUE, clamp(X), constant(3), ORIGIN)]

        first = check_model(conditions, {}, seed=3)
        second = check_model(conditions, {}, seed=3)

        self.assertFalse(first.passed)
        self.assertEqual(first.failures[0].witness, second.failures[0].witness)


class ObjectiveTest(SimpleTestCase):
    """
    Testes do objetivo lexicográfico.
    """

    def test_balls_objective(self):
        """
        Testa primário c0 e secundário com pesos positivos em c1 e c2.
        """
        conditions, st = balls_conditions()
        pair = st.templates['balls']

        objective = build_objective(pair)

        self.assertEqual(objective.primary, pair.h.coefficient(CONSTANT))
        self.assertEqual(objective.secondary.free_symbols, pair.h.unknowns - {objective.primary})
        score = objective.score(balls_model(conditions, st))
        self.assertEqual(score[0], 0)
        self.assertGreater(score[1], 0)

    def test_score_missing_unknowns(self):
        """
        Testa que desconhecidos ausentes do modelo valem zero no placar.
        """
        c0, c1 = Unknown('c0'), Unknown('c1')

        score = Objective(c0, 2 * c1 + 1).score({c0: Fraction(3)})

        self.assertEqual(score, (Fraction(3), Fraction(1)))


class ScriptedSolver:
    """
    Solver de teste: a alternância sempre devolve o ponto ``c0 = 3``; a
    busca binária acha ``c0 = 1`` (com ``d0 = 0``) uma única vez.
    """

    def __init__(self):
        self.tags = []
        self.found = False

    def run(self, script, tag='query'):
        self.tags.append(tag)
        if tag == 'feasibility':
            return SolverResult(SAT, {'c0': Fraction(3), 'd0': Fraction(1)})
        if tag.startswith('min-template'):
            return SolverResult(SAT, {'c0': Fraction(1 if self.found else 3)})
        if tag.startswith('min-instantiation'):
            return SolverResult(SAT, {'d0': Fraction(0 if self.found else 1)})
        if tag.startswith('bisect') and not self.found:
            self.found = True
            return SolverResult(SAT, {'c0': Fraction(1), 'd0': Fraction(0)})
        return SolverResult(UNSAT)


class OptimizerTest(SimpleTestCase):
    """
    Testes da estratégia de otimização sem solver externo.
    """

    def system(self):
        c0, d0 = Unknown('c0'), Unknown('d0')
        return ConstraintSystem(equations=[d0 * (c0 - 3) * (c0 - 1)], unknowns=[c0, d0]), c0, d0

    def test_refine_escapes_local_optimum(self):
        """
        Testa que, com instanciações, a busca binária no sistema completo melhora um ótimo local da alternância.
        """
        system, c0, d0 = self.system()
        service = ScriptedSolver()

        result = optimize(system, Objective(sp.Integer(0), c0), service)

        self.assertEqual(result.status, SAT)
        self.assertEqual(result.model[c0], 1)
        self.assertEqual(result.model[d0], 0)
        self.assertEqual(result.score, (0, 1))
        self.assertTrue(any(t.startswith('bisect-secondary') for t in service.tags))
        self.assertTrue(service.tags[-1].startswith('min-'))

    def test_no_refinement_without_instantiations(self):
        """
        Testa que sistemas lineares (sem instanciações) não fazem a busca binária.
        """
        c0 = Unknown('c0')
        system = ConstraintSystem(equations=[c0 - 3], unknowns=[c0])
        service = ScriptedSolver()

        result = optimize(system, Objective(sp.Integer(0), c0), service)

        self.assertEqual(result.model[c0], 3)
        self.assertFalse(any(t.startswith('bisect') for t in service.tags))


@skipUnless(HAS_SOLVER, 'solver SMT não instalado')
class SolverTest(SimpleTestCase):
    """
    Testes com o solver externo.
    """

    def test_unsat_script(self):
        """
        Testa que a igualdade 1 = 0 é insatisfatível.
        """
        result = SolverService().run(emit_smt([sp.Integer(1)], [Unknown('c0')]), 'unsat')

        self.assertEqual(result.status, UNSAT)

    def test_missing_solver(self):
        """
        Testa que um executável inexistente levanta SolverError.
        """
        with self.assertRaises(SolverError):
            SolverService(solver='pevalyzer-no-such-solver').run(emit_smt(), 'missing')

    def test_balls_round_trip(self):
        """
        Testa que o modelo devolvido para balls passa na checagem e dá c1 = 1/5 após otimizar.
        """
        conditions, st = balls_conditions()
        system = linearize_conditions(conditions, 1, st.unknowns)
        service = SolverService()

        result = optimize(system, build_objective(st.templates['balls']), service)

        self.assertEqual(result.status, SAT)
        self.assertTrue(check_model(conditions, result.model).passed)
        pair = st.templates['balls']
        self.assertEqual(result.model[pair.h.coefficient(CONSTANT)], 0)
        slope = [n for n in pair.h.norms if n not in (CONSTANT, variable(ELL).norms[0])][0]
        self.assertEqual(result.model[pair.h.coefficient(slope)], Fraction(1, 5))
        self.assertGreater(service.statistics['queries'], 1)

    def test_feasibility_only(self):
        """
        Testa a estratégia none: só a consulta de viabilidade.
        """
        conditions, st = balls_conditions()
        system = linearize_conditions(conditions, 1, st.unknowns)

        result = optimize(system, None, SolverService(), strategy='none')

        self.assertEqual(result.status, SAT)
        self.assertTrue(check_model(conditions, result.model).passed)
