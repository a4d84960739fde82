from fractions import Fraction

from django.test import SimpleTestCase

from common.exceptions import FrontendError, PevalyzerException, SolverError
from common.utils import FreshNames, format_fraction, parse_rational


class UtilsTest(SimpleTestCase):
    """
    Testes dos utilitários compartilhados.
    """

    def test_format_fraction(self):
        """
        Testa a formatação de racionais exatos.
        """
        self.assertEqual(format_fraction(Fraction(3, 1)), '3')
        self.assertEqual(format_fraction(Fraction(-2, 6)), '-1/3')
        self.assertEqual(format_fraction(0), '0')

    def test_parse_rational(self):
        """
        Testa a leitura sem passar por float.
        """
        self.assertEqual(parse_rational('1/5'), Fraction(1, 5))
        self.assertEqual(parse_rational(' 0.1 '), Fraction(1, 10))
        self.assertEqual(parse_rational(3), Fraction(3))
        with self.assertRaises(ValueError):
            parse_rational('um quinto')

    def test_fresh_names(self):
        """
        Testa que nomes frescos evitam reservados e os já gerados.
        """
        names = FreshNames(reserved={'x0', 'b_1'})

        self.assertEqual(names.fresh('x'), 'x1')
        self.assertEqual(names.fresh('x'), 'x2')
        self.assertEqual(names.rename('b'), 'b_2')
        self.assertEqual(names.rename('b'), 'b_3')
        names.reserve('y_0')
        self.assertEqual(names.fresh('y', '_'), 'y_1')


class ExceptionsTest(SimpleTestCase):
    """
    Testes da hierarquia de exceções.
    """

    def test_message_and_code(self):
        """
        Testa detail, code e a exceção original.
        """
        cause = OSError('sem permissão')
        exc = SolverError('z3 não iniciou', original_exception=cause)

        self.assertIsInstance(exc, PevalyzerException)
        self.assertEqual(exc.message, 'z3 não iniciou')
        self.assertEqual(exc.detail.code, SolverError.default_code)
        self.assertIs(exc.original_exception, cause)

    def test_frontend_position(self):
        """
        Testa o prefixo linha:coluna dos erros de fonte.
        """
        exc = FrontendError("variável 'y' não ligada", line=3, column=7, kind='scope')

        self.assertEqual(exc.message, "3:7: variável 'y' não ligada")
        self.assertEqual(exc.detail.code, 'scope_error')
        self.assertEqual((exc.line, exc.column), (3, 7))
