from fractions import Fraction

import numpy as np
import sympy as sp
from django.test import SimpleTestCase

from frontend.normalize import normalize
from frontend.parser import parse_program
from frontend.tests import load_benchmark
from templating.bases import CONSTANT, collect_base_functions, declared_locals, guarded_extensions
from templating.templates import (
    SIMPLE_MIXED,
    UnknownFactory,
    instantiate_bound,
    make_instantiation,
    make_procedure_templates,
    make_template,
)
from terms.atoms import TRUE, conjoin, make_atom
from terms.evaluation import eval_term
from terms.symbols import RETURN, arg_symbol, logical, program_symbol
from terms.term import Norm, Term, clamp, norm_term


def load_program(name):
    return normalize(parse_program(load_benchmark(name)))


def clamped(expr):
    return clamp(expr).norms[0]


N = program_symbol('n')
ELL = logical()


class BaseFunctionTest(SimpleTestCase):
    """
    Testes da heurística de funções-base.
    """

    def test_balls_bases(self):
        """
        Testa que balls produz exatamente 1, ⟨n⟩ e ⟨b⟩.
        """
        decl = load_program('balls.pw').decls[0]
        variables = list(decl.params) + declared_locals(decl.body)

        bases = collect_base_functions(decl.body, variables)

        self.assertEqual(set(bases), {CONSTANT, clamped(N), clamped(program_symbol('b'))})

    def test_loop_guard_distance(self):
        """
        Testa que o laço de binomial_update (n < N) gera ⟨N - n⟩.
        """
        decl = load_program('binomial_update.pw').decls[0]
        variables = list(decl.params) + declared_locals(decl.body)

        bases = collect_base_functions(decl.body, variables)

        self.assertIn(clamped(program_symbol('N') - program_symbol('n')), bases)
        self.assertIn(clamped(program_symbol('x')), bases)

    def test_no_guards(self):
        """
        Testa um procedimento sem guardas com um parâmetro.
        """
        decl = parse_program('def f(x): return x').decls[0]

        bases = collect_base_functions(decl.body, decl.params)

        self.assertEqual(bases, [CONSTANT, clamped(program_symbol('x'))])

    def test_non_strict_guard_adds_shifted_distance(self):
        """
        Testa que k <= 5 gera ⟨5 - k⟩ e ⟨6 - k⟩.
        """
        decl = parse_program('def f(k): while (k <= 5) { k := k + 1 }; return k').decls[0]
        k = program_symbol('k')

        bases = collect_base_functions(decl.body, decl.params)

        self.assertIn(clamped(5 - k), bases)
        self.assertIn(clamped(6 - k), bases)

    def test_guarded_extension_of_range(self):
        """
        Testa que a guarda 0 < i <= 5 de every-5 gera [1 ≤ i ≤ 5]·i e [1 ≤ i ≤ 5].
        """
        decl = load_program('every5.pw').decls[0]
        i = program_symbol('i')
        cube = conjoin(make_atom(i - 1), make_atom(5 - i))

        extensions = guarded_extensions(decl.body, decl.params)

        self.assertIn(Norm(cube, i), extensions)
        self.assertIn(Norm(cube, sp.Integer(1)), extensions)

    def test_guarded_extension_of_atom_includes_negation(self):
        """
        Testa que a guarda atômica n > 0 também gera a extensão da negação.
        """
        decl = load_program('hire.pw').decls[0]

        extensions = guarded_extensions(decl.body, decl.params)

        self.assertIn(Norm(frozenset({make_atom(N - 1)}), sp.Integer(1)), extensions)
        self.assertIn(Norm(frozenset({make_atom(-N)}), sp.Integer(1)), extensions)

    def test_temporaries_are_ignored(self):
        """
        Testa que a guarda sobre o temporário do Bernoulli não gera base.
        """
        decl = load_program('balls.pw').decls[0]

        extensions = guarded_extensions(decl.body, ['n', '_s0'])

        self.assertTrue(all(not (n.free_symbols - {N}) for n in extensions))


class TemplateTest(SimpleTestCase):
    """
    Testes de construção de templates e instanciações.
    """

    def test_linear_template_with_logical(self):
        """
        Testa {1, ⟨ℓa⟩} linear com a lógica ℓ: c0 + c1·⟨ℓa⟩ + c2·ℓ.
        """
        arg = arg_symbol('n')
        unknowns = UnknownFactory()

        template = make_template([CONSTANT, clamped(arg)], unknowns=unknowns, logicals=(ELL,))

        self.assertEqual(set(template.norms), {CONSTANT, clamped(arg), Norm(TRUE, ELL)})
        self.assertEqual({u.name for u in template.unknowns}, {'c0', 'c1', 'c2'})

    def test_constant_template(self):
        """
        Testa que {1} linear é apenas c0.
        """
        template = make_template([CONSTANT])

        self.assertEqual(template.norms, [CONSTANT])
        self.assertEqual(len(template.unknowns), 1)

    def test_simple_mixed_template(self):
        """
        Testa o template simple-mixed sobre ⟨x⟩ e ⟨y⟩ com seis coeficientes.
        """
        x, y = program_symbol('x'), program_symbol('y')

        template = make_template([clamped(x), clamped(y)], SIMPLE_MIXED)

        self.assertEqual(len(template.unknowns), 6)
        self.assertIn(Norm(TRUE, x ** 2), template.norms)
        self.assertIn(Norm(TRUE, y ** 2), template.norms)
        self.assertIn(Norm(frozenset({make_atom(x), make_atom(y)}), x * y), template.norms)

    def test_balls_procedure_templates(self):
        """
        Testa h = c0 + c1·⟨ℓa_n⟩ + c2·ℓ, k = ⟨ℓr⟩ + ℓ e Γ = 0 ≤ ℓ para balls.
        """
        program = load_program('balls.pw')

        pair = make_procedure_templates(program.decls[0], program, guarded=False)

        arg = arg_symbol('n')
        self.assertEqual(set(pair.h.norms), {CONSTANT, clamped(arg), Norm(TRUE, ELL)})
        self.assertEqual(pair.k, Term.build([(1, frozenset({make_atom(RETURN)}), RETURN), (1, TRUE, ELL)]))
        self.assertEqual(pair.ctx, frozenset({make_atom(ELL)}))

    def test_hire_procedure_templates(self):
        """
        Testa que hire tem o mesmo formato de templates que balls.
        """
        program = load_program('hire.pw')

        pair = make_procedure_templates(program.decls[0], program, guarded=False)

        self.assertEqual(len(pair.h.unknowns), 3)
        self.assertIn(clamped(arg_symbol('n')), pair.h.norms)

    def test_nullary_procedure(self):
        """
        Testa o caso degenerado de aridade zero sem globais: h = c0 + c1·ℓ.
        """
        program = parse_program('def f(): return 0')

        pair = make_procedure_templates(program.decls[0], program)

        self.assertEqual(set(pair.h.norms), {CONSTANT, Norm(TRUE, ELL)})
        self.assertEqual(len(pair.k.summands), 2)

    def test_globals_get_coefficients_in_post(self):
        """
        Testa que cada global entra em k com um coeficiente desconhecido.
        """
        program = parse_program('global g\ndef f() { g := g + 1; return 0 }')

        pair = make_procedure_templates(program.decls[0], program)

        g = program_symbol('g')
        self.assertEqual(len(pair.k.unknowns), 1)
        self.assertIn(clamped(g), pair.k.norms)

    def test_fresh_unknowns_never_collide(self):
        """
        Testa que templates de uma mesma análise não repetem desconhecidos.
        """
        program = load_program('double_recursive.pw')
        unknowns = UnknownFactory()

        pairs = [make_procedure_templates(d, program, unknowns=unknowns) for d in program.decls]
        make_instantiation(pairs[0], (ELL,), unknowns)

        names = [u.name for u in unknowns.created]
        self.assertEqual(len(names), len(set(names)))
        self.assertEqual({u.role for u in unknowns.by_role('instantiation')}, {'instantiation'})

    def test_instantiation(self):
        """
        Testa τ = d0 + d1·ℓ com ℓ no escopo e τ = d0 sem lógicas.
        """
        program = load_program('balls.pw')
        unknowns = UnknownFactory()
        pair = make_procedure_templates(program.decls[0], program, unknowns=unknowns)

        with_scope = make_instantiation(pair, (ELL,), unknowns)[ELL]
        without = make_instantiation(pair, (), unknowns)[ELL]

        self.assertEqual(set(with_scope.norms), {CONSTANT, Norm(TRUE, ELL)})
        self.assertTrue(all(u.role == 'instantiation' for u in with_scope.unknowns))
        self.assertEqual(without.norms, [CONSTANT])

    def test_instantiate_bound(self):
        """
        Testa que o modelo c1 = 1/5 (demais zero) dá a cota 1/5·⟨n⟩.
        """
        program = load_program('balls.pw')
        pair = make_procedure_templates(program.decls[0], program, guarded=False)
        coefficient = pair.h.coefficient(clamped(arg_symbol('n')))
        model = {u: Fraction(1, 5) if u == coefficient else Fraction(1) for u in pair.h.unknowns}
        model[pair.h.coefficient(CONSTANT)] = Fraction(0)

        bound = instantiate_bound(pair, model)

        self.assertEqual(bound, clamp(N, sp.Rational(1, 5)))

    def test_templates_are_non_negative(self):
        """
        Testa que templates avaliam para valores não negativos com modelos não negativos e ℓ ≥ 0.
        """
        rng = np.random.default_rng(7)
        for name in ('balls.pw', 'every5.pw', 'binomial_update.pw', 'hire.pw'):
            program = load_program(name)
            pair = make_procedure_templates(program.decls[-1], program, SIMPLE_MIXED)
            for _ in range(200):
                model = {u: Fraction(int(rng.integers(0, 10)), int(rng.integers(1, 5))) for u in pair.h.unknowns}
                memory = {arg: int(rng.integers(-20, 21)) for arg in pair.arguments}
                valuation = {ELL: Fraction(int(rng.integers(0, 50)), 3)}

                self.assertGreaterEqual(eval_term(pair.h, memory, valuation, model), 0)

    def test_norm_term_guard_is_kept(self):
        """
        Testa que normas guardadas sobrevivem à construção do template.
        """
        guard = frozenset({make_atom(N - 1)})

        template = make_template([Norm(guard, N)])

        self.assertIn(norm_term(guard, N).norms[0], template.norms)
