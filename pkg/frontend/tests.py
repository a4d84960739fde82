from pathlib import Path

from django.conf import settings
from django.test import SimpleTestCase

from common.exceptions import FrontendError
from frontend import ast
from frontend.normalize import normalize
from frontend.parser import Parser, parse_expectation, parse_program
from frontend.printer import print_program
from frontend.wellformed import check_well_formed


def load_benchmark(name):
    return (Path(settings.BENCHMARKS_DIR) / name).read_text(encoding='utf-8')


def parse_unchecked(source):
    return Parser(source).parse_program()


class ParserTest(SimpleTestCase):
    """
    Testes do parser e dos açúcares sintáticos.
    """

    def test_balls_listing(self):
        """
        Testa que a listagem de balls vira um procedimento de aridade 1 começando por var b.
        """
        program = parse_program(load_benchmark('balls.pw'))

        self.assertEqual(len(program.decls), 1)
        decl = program.decls[0]
        self.assertEqual(decl.name, 'balls')
        self.assertEqual(decl.arity, 1)
        self.assertIsInstance(decl.body, ast.Local)
        self.assertEqual(decl.body.var, 'b')
        self.assertEqual(decl.body.init, ast.Num(0))

    def test_minimal_program(self):
        """
        Testa o programa mínimo de aridade zero.
        """
        program = parse_program('def f(): return 0')

        self.assertEqual(program.decls[0].arity, 0)
        self.assertEqual(program.decls[0].body, ast.Return(ast.Num(0)))

    def test_unbound_variable(self):
        """
        Testa que variável não ligada é reportada com o nome e a posição.
        """
        with self.assertRaises(FrontendError) as ctx:
            parse_program('def f(x): return y')

        self.assertIn("'y'", str(ctx.exception.detail))
        self.assertEqual(ctx.exception.line, 1)

    def test_arity_mismatch(self):
        """
        Testa chamada com número errado de argumentos.
        """
        with self.assertRaises(FrontendError) as ctx:
            parse_program('def f(x): return x\ndef g(): var y := f(1, 2); return y')

        self.assertEqual(ctx.exception.get_codes(), 'arity_error')

    def test_decimal_literal_rejected(self):
        """
        Testa que literais decimais são erro léxico.
        """
        with self.assertRaises(FrontendError) as ctx:
            parse_program('def f(): return 0.5')

        self.assertEqual(ctx.exception.get_codes(), 'lex_error')

    def test_syntax_error_location(self):
        """
        Testa erro sintático com linha e coluna.
        """
        with self.assertRaises(FrontendError) as ctx:
            parse_program('def f():\n  return (1 +')

        self.assertEqual(ctx.exception.line, 2)

    def test_call_right_of_connective_rejected(self):
        """
        Testa que chamada ou amostragem à direita de and/or é erro, pois o curto-circuito poderia pulá-la.
        """
        sources = (
            'def g(x): return x\ndef f(x) { if (x > 0 and g(x) > 1) { return 1 } else { return 0 } }',
            'def f(x) { if (x > 0 || Bernoulli(1/2)) { return 1 } else { return 0 } }',
            'def f(x) { if (x > 0 ∧ (x < 3 or Bernoulli(1/2))) { return 1 } else { return 0 } }',
        )
        for source in sources:
            with self.assertRaises(FrontendError) as ctx:
                parse_program(source)
            self.assertEqual(ctx.exception.get_codes(), 'parse_error')
            self.assertIn('and/or', str(ctx.exception.detail))

    def test_call_left_of_connective_hoisted(self):
        """
        Testa que o operando esquerdo, sempre avaliado, continua içado antes do if.
        """
        program = parse_program('def f(x) { if (Bernoulli(1/2) and x > 0) { return 1 } else { return 0 } }')

        samples = [c for c in ast.walk(program.decls[0].body) if isinstance(c, ast.Sample)]
        self.assertEqual(len(samples), 1)

    def test_assignment_is_dirac(self):
        """
        Testa que x := e vira a distribuição de Dirac em e.
        """
        program = parse_program('def f(x) { x := x + 1; return x }')
        first = program.decls[0].body.first

        self.assertEqual(
            first,
            ast.Sample('x', ast.DiscreteTable(((ast.Num(1), ast.BinOp('+', ast.Var('x'), ast.Num(1))),))),
        )

    def test_bernoulli_guard_desugaring(self):
        """
        Testa if (Bernoulli(p)) vira local t := 0; t ~ Bernoulli(p); if (t = 1).
        """
        program = parse_program('def f() { if (Bernoulli(1/2)) { return 1 } else { return 0 } }')
        body = program.decls[0].body

        self.assertIsInstance(body, ast.Local)
        temp = body.var
        self.assertEqual(body.init, ast.Num(0))
        sample, branch = body.body.first, body.body.second
        self.assertEqual(sample, ast.Sample(temp, ast.Bernoulli(ast.BinOp('/', ast.Num(1), ast.Num(2)))))
        self.assertEqual(branch.cond, ast.Cmp('=', ast.Var(temp), ast.Num(1)))
        self.assertEqual(branch.orelse, ast.Return(ast.Num(0)))

    def test_nondeterministic_choice(self):
        """
        Testa if (*) vira NonDet.
        """
        program = parse_program('def f() { if (*) { return 1 } else { return 2 } }')

        self.assertEqual(
            program.decls[0].body,
            ast.NonDet(ast.Return(ast.Num(1)), ast.Return(ast.Num(2))),
        )

    def test_expression_level_sampling(self):
        """
        Testa o içamento de amostragem dentro de expressão para um temporário.
        """
        program = parse_program('def f(x) { x := x + Bernoulli(1/2); return x }')
        body = program.decls[0].body

        self.assertIsInstance(body, ast.Local)
        self.assertIsInstance(body.body.first, ast.Sample)
        self.assertIsInstance(body.body.first.dist, ast.Bernoulli)
        update = ast.as_assignment(body.body.second.first)
        self.assertEqual(update, ast.BinOp('+', ast.Var('x'), ast.Var(body.var)))

    def test_expression_level_call(self):
        """
        Testa o içamento de chamada em return (1 + throws()).
        """
        program = parse_program(load_benchmark('throws.pw'))
        orelse = program.decls[0].body.body.second.orelse

        self.assertIsInstance(orelse, ast.Local)
        self.assertEqual(orelse.body.first, ast.Call(orelse.var, 'throws', ()))
        self.assertEqual(orelse.body.second, ast.Return(ast.BinOp('+', ast.Num(1), ast.Var(orelse.var))))

    def test_chained_comparison(self):
        """
        Testa 0 < i <= 5 vira uma conjunção.
        """
        program = parse_program(load_benchmark('every5.pw'))
        cond = program.decls[0].body.cond

        self.assertEqual(
            cond,
            ast.And(ast.Cmp('<', ast.Num(0), ast.Var('i')), ast.Cmp('<=', ast.Var('i'), ast.Num(5))),
        )

    def test_multiple_declarations(self):
        """
        Testa var d, number, k sem inicializador.
        """
        program = parse_program(load_benchmark('every_while.pw'))
        body = program.decls[0].body

        names = []
        while isinstance(body, ast.Local):
            names.append(body.var)
            self.assertEqual(body.init, ast.Num(0))
            body = body.body
        self.assertEqual(names, ['d', 'number', 'k'])

    def test_discrete_table(self):
        """
        Testa a sintaxe Discrete(p: v, ...).
        """
        program = parse_program('def f() { var x ~ Discrete(1/4: 1, 3/4: 5); return x }')
        sample = program.decls[0].body.body.first

        self.assertIsInstance(sample.dist, ast.DiscreteTable)
        self.assertEqual(len(sample.dist.entries), 2)

    def test_globals(self):
        """
        Testa declaração de globais.
        """
        program = parse_program('global g, h\ndef f() { g := h; return 0 }')

        self.assertEqual(program.globals, ('g', 'h'))

    def test_parse_expectation(self):
        """
        Testa expressões de cota com normas e colchetes de Iverson.
        """
        self.assertEqual(
            parse_expectation('1/5 * ⟨n⟩'),
            ast.BinOp('*', ast.BinOp('/', ast.Num(1), ast.Num(5)), ast.Clamp(ast.Var('n'))),
        )
        self.assertEqual(parse_expectation('norm(n)'), ast.Clamp(ast.Var('n')))
        self.assertEqual(
            parse_expectation('[x > y] * x'),
            ast.BinOp('*', ast.Indicator(ast.Cmp('>', ast.Var('x'), ast.Var('y'))), ast.Var('x')),
        )


class NormalizeTest(SimpleTestCase):
    """
    Testes da renomeação alfa.
    """

    def test_shared_local_renamed(self):
        """
        Testa que a segunda declaração de b recebe o nome b_1.
        """
        program = parse_program(
            'def f() { var b := 1; return b }\n'
            'def g() { var b := 2; return b }'
        )
        normal = normalize(program)

        self.assertEqual(normal.decls[0].body.var, 'b')
        self.assertEqual(normal.decls[1].body.var, 'b_1')
        self.assertEqual(normal.decls[1].body.body, ast.Return(ast.Var('b_1')))
        self.assertEqual(normal.source_name('b_1'), 'b')

    def test_shadowing_parameter(self):
        """
        Testa que uma local que sombreia o parâmetro é renomeada.
        """
        normal = normalize(parse_program('def f(x) { var x := 1; return x }'))
        body = normal.decls[0].body

        self.assertEqual(normal.decls[0].params, ('x',))
        self.assertEqual(body.var, 'x_1')
        self.assertEqual(body.body, ast.Return(ast.Var('x_1')))

    def test_idempotent(self):
        """
        Testa normalize(normalize(p)) == normalize(p) em todo o corpus.
        """
        for path in sorted(Path(settings.BENCHMARKS_DIR).glob('*.pw')):
            with self.subTest(path.name):
                once = normalize(parse_program(path.read_text(encoding='utf-8')))
                self.assertEqual(normalize(once), once)

    def test_convention_unchanged(self):
        """
        Testa que um programa já normalizado volta estruturalmente igual.
        """
        program = parse_program(load_benchmark('balls.pw'))

        self.assertEqual(normalize(program), program)

    def test_normalized_corpus_well_formed(self):
        """
        Testa que todo o corpus normalizado não tem diagnósticos.
        """
        for path in sorted(Path(settings.BENCHMARKS_DIR).glob('*.pw')):
            with self.subTest(path.name):
                program = normalize(parse_program(path.read_text(encoding='utf-8')))
                self.assertEqual(check_well_formed(program), [])


class WellFormedTest(SimpleTestCase):
    """
    Testes dos diagnósticos de boa formação.
    """

    def test_throws_ok(self):
        """
        Testa que throws não gera diagnósticos.
        """
        program = normalize(parse_program(load_benchmark('throws.pw')))

        self.assertEqual(check_well_formed(program), [])

    def test_wrong_argument_count(self):
        """
        Testa um diagnóstico para chamada com aridade errada.
        """
        program = parse_unchecked('def f(x) { return x }\ndef g() { var y := f(); return y }')
        diagnostics = check_well_formed(program)

        self.assertEqual(len(diagnostics), 1)
        self.assertEqual(diagnostics[0].kind, 'arity')

    def test_uniform_bounds(self):
        """
        Testa Uniform(5, 2) gera um diagnóstico.
        """
        program = parse_unchecked('def f() { var x ~ Uniform(5, 2); return x }')
        diagnostics = check_well_formed(program)

        self.assertEqual(len(diagnostics), 1)
        self.assertEqual(diagnostics[0].kind, 'distribution')

    def test_probability_range(self):
        """
        Testa probabilidade constante fora de [0, 1] e tabela que não soma 1.
        """
        program = parse_unchecked(
            'def f() { var x ~ Bernoulli(3/2); var y ~ Discrete(1/2: 1, 1/4: 2); return x }'
        )
        kinds = [d.kind for d in check_well_formed(program)]

        self.assertEqual(kinds, ['distribution', 'distribution'])

    def test_duplicate_procedure(self):
        """
        Testa procedimentos com o mesmo nome.
        """
        program = parse_unchecked('def f() { return 0 }\ndef f() { return 1 }')

        self.assertEqual([d.kind for d in check_well_formed(program)], ['duplicate'])

    def test_naming_convention(self):
        """
        Testa que nomes repetidos só são violação no modo normalizado.
        """
        program = parse_unchecked('def f(b) { return b }\ndef g() { var b := 2; return b }')

        self.assertEqual([d.kind for d in check_well_formed(program)], ['naming'])
        self.assertEqual(check_well_formed(program, normalized=False), [])


class PrinterTest(SimpleTestCase):
    """
    Testes do pretty-printer.
    """

    def test_round_trip_corpus(self):
        """
        Testa parse(print(p)) == p em todos os arquivos do corpus.
        """
        for path in sorted(Path(settings.BENCHMARKS_DIR).glob('*.pw')):
            with self.subTest(path.name):
                program = parse_program(path.read_text(encoding='utf-8'))
                self.assertEqual(parse_program(print_program(program)), program)

    def test_parenthesization(self):
        """
        Testa que associatividade e precedência sobrevivem à impressão.
        """
        source = (
            'def f(a, b, c) {\n'
            '    if (not (a < b or b < c) and (a = 1 or c != 2)) {\n'
            '        return a - (b - c) * -(a + 1)\n'
            '    }\n'
            '    return 0\n'
            '}\n'
        )
        program = parse_program(source)

        self.assertEqual(parse_program(print_program(program)), program)
