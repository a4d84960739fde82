import logging
from dataclasses import replace

from common.utils import FreshNames

from frontend import ast

logger = logging.getLogger(__name__)


def rename_expr(expr, env):
    """Renomeia variáveis livres de uma expressão (inteira ou booleana)."""
    if isinstance(expr, ast.Var):
        name = env.get(expr.name, expr.name)
        return expr if name == expr.name else ast.Var(name, loc=expr.loc)
    if isinstance(expr, (ast.Num, ast.BoolLit)):
        return expr
    if isinstance(expr, (ast.BinOp, ast.Cmp, ast.And, ast.Or)):
        return replace(expr, left=rename_expr(expr.left, env), right=rename_expr(expr.right, env))
    if isinstance(expr, (ast.Neg, ast.Not, ast.Clamp)):
        return replace(expr, operand=rename_expr(expr.operand, env))
    if isinstance(expr, ast.Indicator):
        return replace(expr, cond=rename_expr(expr.cond, env))
    raise TypeError(f'Expressão desconhecida: {expr!r}')


def rename_distribution(dist, env):
    if isinstance(dist, ast.DiscreteTable):
        entries = tuple((rename_expr(p, env), rename_expr(v, env)) for p, v in dist.entries)
        return replace(dist, entries=entries)
    if isinstance(dist, ast.Bernoulli):
        return replace(dist, prob=rename_expr(dist.prob, env))
    if isinstance(dist, ast.Uniform):
        return replace(dist, lo=rename_expr(dist.lo, env), hi=rename_expr(dist.hi, env))
    if isinstance(dist, ast.Binomial):
        return replace(dist, trials=rename_expr(dist.trials, env), prob=rename_expr(dist.prob, env))
    return replace(
        dist,
        population=rename_expr(dist.population, env),
        successes=rename_expr(dist.successes, env),
        draws=rename_expr(dist.draws, env),
    )


class _Renamer:

    def __init__(self, program):
        reserved = set(program.globals)
        for decl in program.decls:
            reserved.update(decl.params)
            reserved.update(c.var for c in ast.walk(decl.body) if isinstance(c, ast.Local))
        self.fresh = FreshNames(reserved)
        self.bound = set()
        self.aliases = dict(program.aliases)

    def bind(self, name):
        if name not in self.bound:
            self.bound.add(name)
            return name
        fresh = self.fresh.rename(name)
        self.bound.add(fresh)
        self.aliases[fresh] = self.aliases.get(name, name)
        logger.debug(f"Variável '{name}' renomeada para '{fresh}'")
        return fresh

    def command(self, cmd, env):
        if isinstance(cmd, ast.Skip):
            return cmd
        if isinstance(cmd, ast.Sample):
            return replace(cmd, var=env.get(cmd.var, cmd.var), dist=rename_distribution(cmd.dist, env))
        if isinstance(cmd, ast.Call):
            args = tuple(rename_expr(a, env) for a in cmd.args)
            return replace(cmd, var=env.get(cmd.var, cmd.var), args=args)
        if isinstance(cmd, ast.Return):
            return replace(cmd, expr=rename_expr(cmd.expr, env))
        if isinstance(cmd, ast.Local):
            init = rename_expr(cmd.init, env)
            name = self.bind(cmd.var)
            return replace(cmd, var=name, init=init, body=self.command(cmd.body, {**env, cmd.var: name}))
        if isinstance(cmd, ast.Seq):
            return replace(cmd, first=self.command(cmd.first, env), second=self.command(cmd.second, env))
        if isinstance(cmd, ast.If):
            return replace(
                cmd,
                cond=rename_expr(cmd.cond, env),
                then=self.command(cmd.then, env),
                orelse=self.command(cmd.orelse, env),
            )
        if isinstance(cmd, ast.While):
            return replace(cmd, cond=rename_expr(cmd.cond, env), body=self.command(cmd.body, env))
        if isinstance(cmd, ast.NonDet):
            return replace(cmd, left=self.command(cmd.left, env), right=self.command(cmd.right, env))
        raise TypeError(f'Comando desconhecido: {cmd!r}')

    def run(self, program):
        for name in program.globals:
            self.bind(name)
        headers = []
        for decl in program.decls:
            env = {}
            params = []
            for param in decl.params:
                env[param] = self.bind(param)
                params.append(env[param])
            headers.append((decl, tuple(params), env))
        decls = tuple(
            replace(decl, params=params, body=self.command(decl.body, env))
            for decl, params, env in headers
        )
        return ast.Program(program.globals, decls, aliases=tuple(sorted(self.aliases.items())))


def normalize(program):
    """
    Renomeação alfa: globais, parâmetros e locais passam a ter nomes distintos
    em todo o programa.

    Globais mantêm o nome; depois vêm os parâmetros, na ordem das declarações,
    e por fim as locais. Um nome já usado recebe o sufixo ``_1``, ``_2``...
    A operação é idempotente.

    Args:
        program: Program vindo de parse_program

    Returns:
        Program normalizado, com ``aliases`` mapeando nomes novos aos do fonte
    """
    return _Renamer(program).run(program)
