from fractions import Fraction

import numpy as np
import sympy as sp
from django.test import SimpleTestCase

from frontend import ast
from frontend.normalize import normalize
from frontend.parser import parse_program
from frontend.tests import load_benchmark
from templating.bases import CONSTANT
from templating.templates import make_procedure_templates
from terms.atoms import make_atom
from terms.evaluation import environment, eval_term
from terms.symbols import RETURN, arg_symbol, logical, program_symbol
from terms.term import ZERO, add, clamp, guard_mul, scale, substitute, variable
from transformer.facts import assigned_variables, guard_facts, kill, post_facts
from transformer.state import AnalysisState, TemplateSettings
from transformer.transformer import (
    build_templates,
    et_command,
    et_procedure,
    generate_constraints,
    reachable_procedures,
)

ELL = logical()
N = program_symbol('n')


def load_program(name):
    return normalize(parse_program(load_benchmark(name)))


def analysis_state(program, guarded=False, **options):
    return AnalysisState(program, TemplateSettings(guarded=guarded, **options))


def random_model(rng, unknowns):
    return {u: Fraction(int(rng.integers(0, 12)), int(rng.integers(1, 4))) for u in unknowns}


def by_rule(conditions, rule):
    return [c for c in conditions if c.origin.rule == rule]


class FactsTest(SimpleTestCase):
    """
    Testes da análise direta de fatos de caminho.
    """

    def test_assigned_variables(self):
        """
        Testa que amostragens, chamadas e locais contam como escrita.
        """
        program = load_program('balls.pw')

        names = assigned_variables(program.decls[0].body)

        self.assertIn('b', names)
        self.assertNotIn('n', names)

    def test_kill(self):
        """
        Testa que fatos sobre variáveis escritas são descartados.
        """
        x = program_symbol('x')
        facts = frozenset({make_atom(N - 1), make_atom(x)})

        self.assertEqual(kill(facts, {'x'}), frozenset({make_atom(N - 1)}))
        self.assertIsNone(kill(None, {'x'}))

    def test_guard_facts(self):
        """
        Testa fatos de guardas de um cubo, de vários cubos e da negação.
        """
        cond = ast.Cmp('>', ast.Var('n'), ast.Num(0))
        disjunction = ast.Or(cond, ast.Cmp('<', ast.Var('n'), ast.Num(-3)))

        self.assertEqual(guard_facts(cond), frozenset({make_atom(N - 1)}))
        self.assertEqual(guard_facts(cond, False), frozenset({make_atom(-N)}))
        self.assertEqual(guard_facts(disjunction), frozenset())

    def test_post_facts_through_branches(self):
        """
        Testa que só fatos comuns aos dois ramos sobrevivem ao if.
        """
        program = parse_program('def f(n) { var x := 0; if (n > 0) { x := 1 } else { skip }; return x }')
        local = program.decls[0].body
        body = local.body.first

        facts = post_facts(body, frozenset({make_atom(program_symbol('x')), make_atom(-program_symbol('x'))}))

        self.assertEqual(facts, frozenset())


class TransformerTest(SimpleTestCase):
    """
    Testes das regras do transformador de expectativas.
    """

    def setUp(self):
        self.rng = np.random.default_rng(11)

    def test_skip_and_return(self):
        """
        Testa Skip como identidade e return 0 sob ⟨ℓr⟩ + ℓ resultando em ℓ.
        """
        program = parse_program('def f(): return 0')
        st = analysis_state(program)
        build_templates(st, ['f'])
        st.procedure = 'f'
        post = add(clamp(RETURN), variable(ELL))
        cont = clamp(N)

        self.assertEqual(et_command(ast.Skip(), cont, post, st), cont)
        self.assertEqual(et_command(ast.Return(ast.Num(0)), cont, post, st), variable(ELL))

    def test_return_only_procedure(self):
        """
        Testa que def f(): return 0 transforma para ℓ.
        """
        program = parse_program('def f(): return 0')
        st = analysis_state(program)
        build_templates(st, ['f'])

        self.assertEqual(et_procedure(program.decls[0], st), variable(ELL))

    def test_straight_line_single_condition(self):
        """
        Testa que um procedimento sem chamadas nem laços gera só a condição principal.
        """
        program = parse_program('def f(x) { x := x + 1; return x }')
        st = analysis_state(program)

        conditions = generate_constraints(program, st)

        self.assertEqual([c.origin.rule for c in conditions], ['non-negativity', 'procedure'])

    def test_balls_conditions(self):
        """
        Testa as condições de balls: contexto da instanciação, chamada e condição principal.
        """
        program = load_program('balls.pw')
        st = analysis_state(program)

        conditions = generate_constraints(program, st)

        self.assertEqual(
            [c.origin.rule for c in conditions],
            ['non-negativity', 'call-context', 'call', 'procedure'],
        )
        (context,) = by_rule(conditions, 'call-context')
        (call,) = by_rule(conditions, 'call')
        (main,) = by_rule(conditions, 'procedure')
        tau = context.rhs
        self.assertEqual(context.lhs, ZERO)
        self.assertEqual(set(tau.norms), {CONSTANT, variable(ELL).norms[0]})
        self.assertTrue(all(u.role == 'instantiation' for u in tau.unknowns))
        expected_lhs = add(
            scale(sp.Rational(1, 5), clamp(RETURN + 1)),
            scale(sp.Rational(4, 5), clamp(RETURN)),
            variable(ELL),
        )
        self.assertEqual(call.lhs, expected_lhs)
        self.assertEqual(call.rhs, add(clamp(RETURN), tau))
        self.assertIn(make_atom(ELL), call.ctx)

        pair = st.templates['balls']
        arg = arg_symbol('n')
        expected_main = add(
            guard_mul(make_atom(arg - 1), substitute(pair.h, {arg: arg - 1, ELL: tau})),
            guard_mul(make_atom(-arg), variable(ELL)),
        )
        unknowns = main.unknowns | expected_main.unknowns
        for _ in range(200):
            env = environment(
                {arg: int(self.rng.integers(-5, 30))},
                {ELL: Fraction(int(self.rng.integers(0, 40)), 3)},
                random_model(self.rng, unknowns),
            )
            self.assertEqual(eval_term(main.lhs, env=env), eval_term(expected_main, env=env))
        self.assertEqual(main.rhs, pair.h)

    def test_hire_premise(self):
        """
        Testa que a chamada em hire carrega a premissa 0 < n e a continuação com 1/n.
        """
        program = load_program('hire.pw')
        st = analysis_state(program)

        (call,) = by_rule(generate_constraints(program, st), 'call')

        self.assertIn(make_atom(N - 1), call.ctx)
        value = eval_term(call.lhs, {'n': 4}, {RETURN: 2, ELL: 1})
        self.assertEqual(value, Fraction(1, 4) * 3 + Fraction(3, 4) * 2 + 1)

    def test_binomial_update_loop(self):
        """
        Testa o laço de binomial_update: template com ⟨N - n⟩ e as duas condições do laço.
        """
        program = load_program('binomial_update.pw')
        st = analysis_state(program)

        conditions = generate_constraints(program, st)

        body = by_rule(conditions, 'while-body')
        exit_ = by_rule(conditions, 'while-exit')
        self.assertEqual(len(body), 1)
        self.assertEqual(len(exit_), 1)
        big_n = program_symbol('N')
        self.assertIn(clamp(big_n - N).norms[0], body[0].rhs.norms)
        self.assertIn(clamp(program_symbol('x')).norms[0], body[0].rhs.norms)
        self.assertIn(make_atom(N - big_n), exit_[0].ctx)
        self.assertIn(make_atom(big_n - N - 1), body[0].ctx)
        self.assertTrue(all(u.role == 'invariant' for u in body[0].rhs.unknowns))

    def test_nondet_join(self):
        """
        Testa que a escolha demoníaca gera duas condições contra um template novo.
        """
        program = load_program('pick.pw')
        st = analysis_state(program)

        conditions = generate_constraints(program, st)

        left = by_rule(conditions, 'nondet-left')
        right = by_rule(conditions, 'nondet-right')
        self.assertEqual(len(left), 1)
        self.assertEqual(len(right), 1)
        self.assertEqual(left[0].rhs, right[0].rhs)
        self.assertEqual(eval_term(left[0].lhs, valuation={ELL: 0}), 3)
        self.assertEqual(eval_term(right[0].lhs, valuation={ELL: 0}), 2)

    def test_geo_zero_continuation(self):
        """
        Testa que geo avalia para zero com modelo nulo e ℓ = 0.
        """
        program = load_program('geo.pw')
        st = analysis_state(program)
        build_templates(st, ['geo'])

        term = et_procedure(program.decls[0], st)

        model = {u: 0 for u in term.unknowns}
        self.assertEqual(eval_term(term, valuation={ELL: 0}, model=model), 0)

    def test_unreachable_code_emits_nothing(self):
        """
        Testa que uma chamada após return não gera condições.
        """
        program = parse_program('def f(n) { var y := 0; return 0; y := f(n) }')
        st = analysis_state(program)

        conditions = generate_constraints(program, st)

        self.assertFalse(by_rule(conditions, 'call'))

    def test_reachable_procedures(self):
        """
        Testa que só procedimentos alcançáveis pela entrada entram na análise.
        """
        program = parse_program(
            'def g() { return 1 }\n'
            'def unused() { return 2 }\n'
            'def f() { var x := 0; x := g(); return x }'
        )

        self.assertEqual(reachable_procedures(program), ['g', 'f'])
        self.assertEqual(reachable_procedures(program, 'unused'), ['unused'])

    def test_determinism(self):
        """
        Testa que duas análises do mesmo programa produzem as mesmas condições.
        """
        program = load_program('rdwalk.pw')

        first = generate_constraints(program, analysis_state(program, guarded=True))
        second = generate_constraints(program, analysis_state(program, guarded=True))

        self.assertEqual([str(c) for c in first], [str(c) for c in second])

    def test_instantiation_with_locals(self):
        """
        Testa que a opção de locais no escopo amplia a instanciação.
        """
        program = load_program('balls.pw')
        st = analysis_state(program, instantiate_locals=True)

        (context,) = by_rule(generate_constraints(program, st), 'call-context')

        self.assertIn(clamp(N).norms[0], context.rhs.norms)

    def test_templates_match_standalone(self):
        """
        Testa que os templates do estado têm o formato dos templates isolados.
        """
        program = load_program('balls.pw')
        st = analysis_state(program)
        build_templates(st, ['balls'])

        standalone = make_procedure_templates(program.decls[0], program, guarded=False)

        self.assertEqual(set(st.templates['balls'].h.norms), set(standalone.h.norms))
