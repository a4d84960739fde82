"""
Parser descendente recursivo para arquivos ``.pw``.

Produz diretamente o AST núcleo. Os açúcares sintáticos são eliminados
durante o parse:

- ``x := e`` vira ``x ~ Discrete(1: e)`` (Dirac);
- ``if (Bernoulli(p)) {C} else {D}`` vira
  ``var t := 0; t ~ Bernoulli(p); if (t = 1) {C} else {D}``;
- amostragens e chamadas dentro de expressões (``x := x + Bernoulli(1/2)``,
  ``return (1 + throws())``) são içadas para um temporário fresco declarado
  no bloco corrente, avaliado da esquerda para a direita;
- ``if (*) {C} else {D}`` vira ``NonDet(C, D)``.
"""

import logging

from common.exceptions import FrontendError
from common.utils import FreshNames

from frontend import ast
from frontend.lexer import tokenize

logger = logging.getLogger(__name__)

COMPARISONS = ('<', '<=', '>', '>=', '=', '!=')
ASSIGN_OPS = (':=', '=')


class _LocalItem:
    """Declaração ``var`` pendente; o escopo vai até o fim do bloco."""

    __slots__ = ('name', 'init', 'loc')

    def __init__(self, name, init, loc):
        self.name = name
        self.init = init
        self.loc = loc


def fold_block(items):
    """Monta o comando de um bloco: cada ``var`` cobre o restante do bloco."""
    command = ast.Skip()
    for item in reversed(items):
        if isinstance(item, _LocalItem):
            command = ast.Local(item.name, item.init, command, loc=item.loc)
        elif isinstance(command, ast.Skip):
            command = item
        elif isinstance(item, ast.Skip):
            continue
        else:
            command = ast.Seq(item, command, loc=item.loc)
    return command


class Parser:

    def __init__(self, source, bound_mode=False):
        self.tokens = tokenize(source)
        self.pos = 0
        self.bound_mode = bound_mode
        self.fresh = FreshNames(t.value for t in self.tokens if t.kind == 'ident')
        # itens içados pela expressão em análise; None desabilita o içamento
        self.pending = None
        # profundidade de operandos direitos de and/or, que podem não ser avaliados
        self.lazy = 0
        self.short_circuit_error = None

    # Utilitários de tokens

    @property
    def current(self):
        return self.tokens[self.pos]

    def peek(self, offset=1):
        index = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[index]

    def advance(self):
        token = self.tokens[self.pos]
        if token.kind != 'eof':
            self.pos += 1
        return token

    def error(self, message, token=None):
        token = token or self.current
        return FrontendError(message, token.line, token.column, kind='parse')

    def expect_op(self, value):
        if not self.current.is_op(value):
            found = self.current.value or 'fim do arquivo'
            raise self.error(f"esperava '{value}', encontrou '{found}'")
        return self.advance()

    def expect_keyword(self, value):
        if not self.current.is_keyword(value):
            raise self.error(f"esperava '{value}'")
        return self.advance()

    def expect_ident(self):
        if self.current.kind != 'ident':
            raise self.error(f"esperava identificador, encontrou '{self.current.value}'")
        return self.advance()

    def skip_separators(self):
        while self.current.is_op(';'):
            self.advance()

    # Programa

    def parse_program(self):
        globals_, decls = [], []
        self.skip_separators()
        while self.current.kind != 'eof':
            if self.current.is_keyword('global'):
                self.advance()
                globals_.append(self.expect_ident().value)
                while self.current.is_op(','):
                    self.advance()
                    globals_.append(self.expect_ident().value)
            elif self.current.is_keyword('def'):
                decls.append(self.parse_procedure())
            else:
                raise self.error("esperava 'def' ou 'global'")
            self.skip_separators()
        return ast.Program(tuple(globals_), tuple(decls))

    def parse_procedure(self):
        start = self.expect_keyword('def')
        name = self.expect_ident().value
        self.expect_op('(')
        params = []
        if not self.current.is_op(')'):
            params.append(self.expect_ident().value)
            while self.current.is_op(','):
                self.advance()
                params.append(self.expect_ident().value)
        self.expect_op(')')
        if self.current.is_op('{'):
            body = self.parse_block()
        else:
            self.expect_op(':')
            items = self.parse_statements(lambda tok: tok.kind == 'eof' or tok.is_keyword('def', 'global'))
            body = fold_block(items)
        return ast.ProcedureDecl(name, tuple(params), body, loc=(start.line, start.column))

    # Comandos

    def parse_block(self):
        self.expect_op('{')
        items = self.parse_statements(lambda tok: tok.is_op('}'))
        self.expect_op('}')
        return fold_block(items)

    def parse_statements(self, at_end):
        items = []
        self.skip_separators()
        while not at_end(self.current):
            if self.current.kind == 'eof':
                raise self.error("bloco não terminado")
            items.extend(self.parse_statement())
            self.skip_separators()
        return items

    def parse_statement(self):
        token = self.current
        loc = (token.line, token.column)
        outer, self.pending = self.pending, []
        if token.is_keyword('skip'):
            self.advance()
            command = [ast.Skip(loc=loc)]
        elif token.is_keyword('var', 'local'):
            self.advance()
            command = self.parse_declarations(loc)
        elif token.is_keyword('return'):
            self.advance()
            command = [ast.Return(self.parse_expr(), loc=loc)]
        elif token.is_keyword('if'):
            command = [self.parse_if()]
        elif token.is_keyword('while'):
            command = [self.parse_while()]
        elif token.kind == 'ident':
            name = self.advance().value
            command = [self.parse_assignment(name, loc)]
        else:
            raise self.error(f"comando inesperado '{token.value}'")
        items, self.pending = self.pending, outer
        return items + command

    def parse_declarations(self, loc):
        items = []
        while True:
            name_token = self.expect_ident()
            name = name_token.value
            decl_loc = (name_token.line, name_token.column)
            if self.current.is_op(*ASSIGN_OPS, '~'):
                mark = len(self.pending)
                assignment = self.parse_assignment(name, decl_loc)
                # os itens içados do inicializador precedem a declaração
                items.extend(self.pending[mark:])
                del self.pending[mark:]
                init = ast.as_assignment(assignment)
                if init is not None and name not in ast.expr_vars(init):
                    items.append(_LocalItem(name, init, decl_loc))
                else:
                    items.append(_LocalItem(name, ast.Num(0), decl_loc))
                    items.append(assignment)
            else:
                items.append(_LocalItem(name, ast.Num(0), decl_loc))
            if not self.current.is_op(','):
                break
            self.advance()
        return items

    def _last_hoist(self, expr, mark=0):
        """Os dois últimos itens içados, se definem exatamente o temporário ``expr``."""
        if not isinstance(expr, ast.Var) or self.pending is None or len(self.pending) - mark < 2:
            return None
        local, command = self.pending[-2], self.pending[-1]
        if isinstance(local, _LocalItem) and local.name == expr.name \
                and isinstance(command, (ast.Sample, ast.Call)) and command.var == expr.name:
            return command
        return None

    def parse_assignment(self, name, loc):
        if not self.current.is_op(*ASSIGN_OPS, '~'):
            raise self.error("esperava ':=' ou '~'")
        self.advance()
        mark = len(self.pending)
        expr = self.parse_expr()
        command = self._last_hoist(expr, mark)
        # ``x ~ Bernoulli(p)`` e ``x := f(e)`` dispensam o temporário
        if command is not None:
            del self.pending[-2:]
            if isinstance(command, ast.Sample):
                return ast.Sample(name, command.dist, loc=loc)
            return ast.Call(name, command.proc, command.args, loc=loc)
        return ast.assign(name, expr, loc=loc)

    def parse_if(self):
        start = self.expect_keyword('if')
        loc = (start.line, start.column)
        self.expect_op('(')
        if self.current.is_op('*') and self.peek().is_op(')'):
            self.advance()
            self.advance()
            left = self.parse_block()
            right = self.parse_else()
            return ast.NonDet(left, right, loc=loc)
        cond = self.parse_bexpr()
        self.expect_op(')')
        then = self.parse_block()
        orelse = self.parse_else()
        return ast.If(cond, then, orelse, loc=loc)

    def parse_else(self):
        if not self.current.is_keyword('else'):
            return ast.Skip()
        self.advance()
        if self.current.is_keyword('if'):
            outer, self.pending = self.pending, []
            command = self.parse_if()
            items, self.pending = self.pending, outer
            return fold_block(items + [command])
        return self.parse_block()

    def parse_while(self):
        start = self.expect_keyword('while')
        self.expect_op('(')
        outer, self.pending = self.pending, None
        cond = self.parse_bexpr()
        self.pending = outer
        self.expect_op(')')
        body = self.parse_block()
        return ast.While(cond, body, loc=(start.line, start.column))

    # Expressões booleanas

    def parse_bexpr(self):
        left = self.parse_and()
        while self.current.is_keyword('or'):
            token = self.advance()
            left = ast.Or(left, self.parse_lazy(self.parse_and), loc=(token.line, token.column))
        return left

    def parse_and(self):
        left = self.parse_not()
        while self.current.is_keyword('and'):
            token = self.advance()
            left = ast.And(left, self.parse_lazy(self.parse_not), loc=(token.line, token.column))
        return left

    def parse_lazy(self, parse):
        self.lazy += 1
        try:
            return parse()
        finally:
            self.lazy -= 1

    def parse_not(self):
        if self.current.is_keyword('not'):
            token = self.advance()
            return ast.Not(self.parse_not(), loc=(token.line, token.column))
        return self.parse_bool_atom()

    def parse_bool_atom(self):
        token = self.current
        if token.is_keyword('true', 'false'):
            self.advance()
            return ast.BoolLit(token.value == 'true', loc=(token.line, token.column))
        if token.is_op('('):
            # tenta ``( bexpr )``; se não fechar um booleano, recomeça como comparação
            saved_pos = self.pos
            saved_pending = None if self.pending is None else len(self.pending)
            try:
                self.advance()
                inner = self.parse_bexpr()
                self.expect_op(')')
                if not self.current.is_op(*COMPARISONS, '+', '-', '*', '/'):
                    return inner
            except FrontendError as exc:
                if exc is self.short_circuit_error:
                    raise
            self.pos = saved_pos
            if saved_pending is not None:
                del self.pending[saved_pending:]
        return self.parse_comparison()

    def parse_comparison(self):
        token = self.current
        loc = (token.line, token.column)
        mark = None if self.pending is None else len(self.pending)
        left = self.parse_expr()
        if not self.current.is_op(*COMPARISONS):
            command = None if mark is None else self._last_hoist(left, mark)
            if isinstance(command, ast.Sample) and isinstance(command.dist, ast.Bernoulli):
                return ast.Cmp('=', left, ast.Num(1), loc=loc)
            raise self.error('esperava uma comparação')
        result = None
        while self.current.is_op(*COMPARISONS):
            op = self.advance().value
            right = self.parse_expr()
            cmp = ast.Cmp(op, left, right, loc=loc)
            result = cmp if result is None else ast.And(result, cmp, loc=loc)
            left = right
        return result

    # Expressões inteiras

    def parse_expr(self):
        left = self.parse_term()
        while self.current.is_op('+', '-'):
            token = self.advance()
            left = ast.BinOp(token.value, left, self.parse_term(), loc=(token.line, token.column))
        return left

    def parse_term(self):
        left = self.parse_unary()
        while self.current.is_op('*', '/'):
            token = self.advance()
            left = ast.BinOp(token.value, left, self.parse_unary(), loc=(token.line, token.column))
        return left

    def parse_unary(self):
        if self.current.is_op('-'):
            token = self.advance()
            return ast.Neg(self.parse_unary(), loc=(token.line, token.column))
        return self.parse_atom()

    def parse_atom(self):
        token = self.current
        loc = (token.line, token.column)
        if token.kind == 'num':
            self.advance()
            return ast.Num(int(token.value), loc=loc)
        if token.is_op('('):
            self.advance()
            inner = self.parse_expr()
            self.expect_op(')')
            return inner
        if self.bound_mode and token.is_op('⟨'):
            self.advance()
            inner = self.parse_expr()
            self.expect_op('⟩')
            return ast.Clamp(inner, loc=loc)
        if self.bound_mode and token.is_op('['):
            self.advance()
            cond = self.parse_bexpr()
            self.expect_op(']')
            return ast.Indicator(cond, loc=loc)
        if token.kind == 'ident':
            self.advance()
            if not self.current.is_op('('):
                return ast.Var(token.value, loc=loc)
            if self.bound_mode and token.value == 'norm':
                self.advance()
                inner = self.parse_expr()
                self.expect_op(')')
                return ast.Clamp(inner, loc=loc)
            if token.value in ast.DISTRIBUTIONS:
                command = ast.Sample('', self.parse_distribution(token.value, loc), loc=loc)
            else:
                command = ast.Call('', token.value, self.parse_args(), loc=loc)
            return self.hoist(command, token)
        raise self.error(f"expressão inesperada '{token.value or 'fim do arquivo'}'")

    def parse_args(self):
        self.expect_op('(')
        args = []
        if not self.current.is_op(')'):
            args.append(self.parse_expr())
            while self.current.is_op(','):
                self.advance()
                args.append(self.parse_expr())
        self.expect_op(')')
        return tuple(args)

    def parse_distribution(self, name, loc):
        if name == 'Discrete':
            self.expect_op('(')
            entries = []
            while True:
                prob = self.parse_expr()
                self.expect_op(':')
                entries.append((prob, self.parse_expr()))
                if not self.current.is_op(','):
                    break
                self.advance()
            self.expect_op(')')
            return ast.DiscreteTable(tuple(entries), loc=loc)
        arity = {'Bernoulli': 1, 'Uniform': 2, 'Binomial': 2, 'Hypergeometric': 3}[name]
        args = self.parse_args()
        if len(args) != arity:
            raise FrontendError(
                f'{name} espera {arity} argumento(s), recebeu {len(args)}',
                loc[0], loc[1], kind='parse',
            )
        return {
            'Bernoulli': ast.Bernoulli,
            'Uniform': ast.Uniform,
            'Binomial': ast.Binomial,
            'Hypergeometric': ast.Hypergeometric,
        }[name](*args, loc=loc)

    def hoist(self, command, token):
        what = 'amostragem' if isinstance(command, ast.Sample) else 'chamada'
        if self.lazy:
            self.short_circuit_error = self.error(f'{what} à direita de and/or não é permitida: o curto-circuito pode não avaliá-la', token)
            raise self.short_circuit_error
        if self.pending is None:
            raise self.error(f'{what} não é permitida nesta posição', token)
        base = '_s' if isinstance(command, ast.Sample) else '_r'
        name = self.fresh.fresh(base)
        loc = command.loc
        self.pending.append(_LocalItem(name, ast.Num(0), loc))
        if isinstance(command, ast.Sample):
            self.pending.append(ast.Sample(name, command.dist, loc=loc))
        else:
            self.pending.append(ast.Call(name, command.proc, command.args, loc=loc))
        return ast.Var(name, loc=loc)


def parse_program(source):
    """
    Analisa um programa PWHILE.

    Args:
        source: texto UTF-8 do arquivo ``.pw``

    Returns:
        Program com os açúcares já eliminados

    Raises:
        FrontendError: erro léxico ou sintático, aridade incorreta ou variável
            não ligada, sempre com linha e coluna
    """
    from frontend.wellformed import check_well_formed

    program = Parser(source).parse_program()
    for diagnostic in check_well_formed(program, normalized=False):
        if diagnostic.kind in ('arity', 'unbound'):
            raise FrontendError(diagnostic.message, diagnostic.line, diagnostic.column, kind=diagnostic.kind)
    logger.debug(f'Programa analisado: {[d.name for d in program.decls]}')
    return program


def parse_expectation(text):
    """Analisa uma expressão de cota (``1/5 * ⟨n⟩``, ``[x > y] * x``...)."""
    parser = Parser(text, bound_mode=True)
    expr = parser.parse_expr()
    if parser.current.kind != 'eof':
        raise parser.error(f"texto inesperado '{parser.current.value}'")
    return expr
