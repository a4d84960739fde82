from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from frontend import ast


@dataclass(frozen=True)
class Diagnostic:
    kind: str  # 'arity', 'unbound', 'duplicate', 'naming', 'distribution', 'syntax'
    message: str
    procedure: Optional[str] = None
    line: Optional[int] = None
    column: Optional[int] = None

    def __str__(self):
        where = f'{self.line}:{self.column}: ' if self.line is not None else ''
        return f'{where}{self.message}'


def constant_value(expr):
    """Valor racional de uma expressão sem variáveis; None se depender da memória."""
    if isinstance(expr, ast.Num):
        return Fraction(expr.value)
    if isinstance(expr, ast.Neg):
        inner = constant_value(expr.operand)
        return None if inner is None else -inner
    if isinstance(expr, ast.BinOp):
        left, right = constant_value(expr.left), constant_value(expr.right)
        if left is None or right is None:
            return None
        if expr.op == '+':
            return left + right
        if expr.op == '-':
            return left - right
        if expr.op == '*':
            return left * right
        if right == 0:
            return None
        return left / right
    return None


class _Checker:

    def __init__(self, program, normalized):
        self.program = program
        self.normalized = normalized
        self.procedures = program.procedures
        self.diagnostics = []

    def report(self, kind, message, procedure=None, node=None):
        loc = getattr(node, 'loc', None) or (None, None)
        self.diagnostics.append(Diagnostic(kind, message, procedure, loc[0], loc[1]))

    def run(self):
        program = self.program
        for name, count in Counter(d.name for d in program.decls).items():
            if count > 1:
                self.report('duplicate', f"procedimento '{name}' declarado {count} vezes")
        for name, count in Counter(program.globals).items():
            if count > 1:
                self.report('duplicate', f"global '{name}' declarada {count} vezes")
        binders = list(program.globals)
        for decl in program.decls:
            for name, count in Counter(decl.params).items():
                if count > 1:
                    self.report('duplicate', f"parâmetro '{name}' repetido em '{decl.name}'", decl.name, decl)
            binders.extend(decl.params)
            binders.extend(c.var for c in ast.walk(decl.body) if isinstance(c, ast.Local))
            self.check_command(decl.body, set(program.globals) | set(decl.params), decl)
        if self.normalized:
            for name, count in Counter(binders).items():
                if count > 1:
                    self.report('naming', f"variável '{name}' ligada {count} vezes após a normalização")
        return self.diagnostics

    def check_expr(self, expr, scope, decl):
        if isinstance(expr, (ast.Clamp, ast.Indicator)):
            self.report('syntax', 'normas e colchetes de Iverson só valem em expressões de cota', decl.name, expr)
            return
        for name in sorted(ast.expr_vars(expr) - scope):
            self.report('unbound', f"variável não ligada '{name}'", decl.name, expr)

    def check_probability(self, expr, scope, decl):
        self.check_expr(expr, scope, decl)
        value = constant_value(expr)
        if value is not None and not 0 <= value <= 1:
            self.report('distribution', f'probabilidade {value} fora de [0, 1]', decl.name, expr)
        return value

    def check_distribution(self, dist, scope, decl):
        if isinstance(dist, ast.Bernoulli):
            self.check_probability(dist.prob, scope, decl)
        elif isinstance(dist, ast.Uniform):
            lo, hi = constant_value(dist.lo), constant_value(dist.hi)
            if lo is None or hi is None:
                self.report('distribution', 'Uniform exige limites constantes', decl.name, dist)
            elif lo > hi or lo.denominator != 1 or hi.denominator != 1:
                self.report('distribution', f'Uniform({lo}, {hi}) inválida: exige inteiros com lo <= hi', decl.name, dist)
        elif isinstance(dist, ast.Binomial):
            self.check_expr(dist.trials, scope, decl)
            self.check_probability(dist.prob, scope, decl)
        elif isinstance(dist, ast.Hypergeometric):
            for expr in ast.dist_exprs(dist):
                self.check_expr(expr, scope, decl)
        elif isinstance(dist, ast.DiscreteTable):
            probs = [self.check_probability(p, scope, decl) for p, _ in dist.entries]
            for _, value in dist.entries:
                self.check_expr(value, scope, decl)
            if all(p is not None for p in probs) and sum(probs) != 1:
                self.report('distribution', f'probabilidades somam {sum(probs)}, não 1', decl.name, dist)

    def check_command(self, cmd, scope, decl):
        if isinstance(cmd, ast.Sample):
            if cmd.var not in scope:
                self.report('unbound', f"atribuição a variável não ligada '{cmd.var}'", decl.name, cmd)
            self.check_distribution(cmd.dist, scope, decl)
        elif isinstance(cmd, ast.Call):
            if cmd.var not in scope:
                self.report('unbound', f"atribuição a variável não ligada '{cmd.var}'", decl.name, cmd)
            callee = self.procedures.get(cmd.proc)
            if callee is None:
                self.report('unbound', f"procedimento não declarado '{cmd.proc}'", decl.name, cmd)
            elif callee.arity != len(cmd.args):
                self.report(
                    'arity',
                    f"'{cmd.proc}' espera {callee.arity} argumento(s), recebeu {len(cmd.args)}",
                    decl.name, cmd,
                )
            for arg in cmd.args:
                self.check_expr(arg, scope, decl)
        elif isinstance(cmd, ast.Return):
            self.check_expr(cmd.expr, scope, decl)
        elif isinstance(cmd, ast.Local):
            self.check_expr(cmd.init, scope, decl)
            self.check_command(cmd.body, scope | {cmd.var}, decl)
        elif isinstance(cmd, (ast.If, ast.While)):
            self.check_expr(cmd.cond, scope, decl)
            for child in ast.sub_commands(cmd):
                self.check_command(child, scope, decl)
        else:
            for child in ast.sub_commands(cmd):
                self.check_command(child, scope, decl)


def check_well_formed(program, normalized=True):
    """
    Verifica os invariantes do programa.

    Args:
        program: Program (normalizado, salvo quando ``normalized=False``)
        normalized: exige também nomes ligados distintos em todo o programa

    Returns:
        Lista de Diagnostic; vazia quando o programa é bem formado
    """
    return _Checker(program, normalized).run()
