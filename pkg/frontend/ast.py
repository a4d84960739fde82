"""
AST núcleo da linguagem PWHILE.

Todos os nós são dataclasses imutáveis; a posição no fonte (``loc``) não
participa da igualdade, de modo que dois programas são iguais quando têm a
mesma estrutura.
"""

from dataclasses import dataclass, field
from functools import reduce
from typing import Optional, Tuple, Union


Location = Optional[Tuple[int, int]]


def _loc():
    return field(default=None, compare=False, repr=False)


# Expressões inteiras

@dataclass(frozen=True)
class Num:
    value: int
    loc: Location = _loc()


@dataclass(frozen=True)
class Var:
    name: str
    loc: Location = _loc()


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*', '/'
    left: 'Expr'
    right: 'Expr'
    loc: Location = _loc()


@dataclass(frozen=True)
class Neg:
    operand: 'Expr'
    loc: Location = _loc()


@dataclass(frozen=True)
class Clamp:
    """``⟨e⟩``: só aparece em expressões de cota (manifesto, testes)."""
    operand: 'Expr'
    loc: Location = _loc()


@dataclass(frozen=True)
class Indicator:
    """``[b]``: colchete de Iverson, só em expressões de cota."""
    cond: 'BExpr'
    loc: Location = _loc()


Expr = Union[Num, Var, BinOp, Neg, Clamp, Indicator]


# Expressões booleanas

@dataclass(frozen=True)
class BoolLit:
    value: bool
    loc: Location = _loc()


@dataclass(frozen=True)
class Cmp:
    op: str  # '<', '<=', '>', '>=', '=', '!='
    left: Expr
    right: Expr
    loc: Location = _loc()


@dataclass(frozen=True)
class And:
    left: 'BExpr'
    right: 'BExpr'
    loc: Location = _loc()


@dataclass(frozen=True)
class Or:
    left: 'BExpr'
    right: 'BExpr'
    loc: Location = _loc()


@dataclass(frozen=True)
class Not:
    operand: 'BExpr'
    loc: Location = _loc()


BExpr = Union[BoolLit, Cmp, And, Or, Not]


# Distribuições

@dataclass(frozen=True)
class Bernoulli:
    prob: Expr
    loc: Location = _loc()


@dataclass(frozen=True)
class Uniform:
    lo: Expr
    hi: Expr
    loc: Location = _loc()


@dataclass(frozen=True)
class Binomial:
    trials: Expr
    prob: Expr
    loc: Location = _loc()


@dataclass(frozen=True)
class Hypergeometric:
    population: Expr
    successes: Expr
    draws: Expr
    loc: Location = _loc()


@dataclass(frozen=True)
class DiscreteTable:
    entries: Tuple[Tuple[Expr, Expr], ...]  # (probabilidade, valor)
    loc: Location = _loc()


SamplingExpr = Union[Bernoulli, Uniform, Binomial, Hypergeometric, DiscreteTable]

DISTRIBUTIONS = ('Bernoulli', 'Uniform', 'Binomial', 'Hypergeometric', 'Discrete')


# Comandos

@dataclass(frozen=True)
class Skip:
    loc: Location = _loc()


@dataclass(frozen=True)
class Sample:
    var: str
    dist: SamplingExpr
    loc: Location = _loc()


@dataclass(frozen=True)
class Call:
    var: str
    proc: str
    args: Tuple[Expr, ...]
    loc: Location = _loc()


@dataclass(frozen=True)
class Return:
    expr: Expr
    loc: Location = _loc()


@dataclass(frozen=True)
class Local:
    var: str
    init: Expr
    body: 'Command'
    loc: Location = _loc()


@dataclass(frozen=True)
class Seq:
    first: 'Command'
    second: 'Command'
    loc: Location = _loc()


@dataclass(frozen=True)
class If:
    cond: BExpr
    then: 'Command'
    orelse: 'Command'
    loc: Location = _loc()


@dataclass(frozen=True)
class While:
    cond: BExpr
    body: 'Command'
    loc: Location = _loc()


@dataclass(frozen=True)
class NonDet:
    left: 'Command'
    right: 'Command'
    loc: Location = _loc()


Command = Union[Skip, Sample, Call, Return, Local, Seq, If, While, NonDet]


@dataclass(frozen=True)
class ProcedureDecl:
    name: str
    params: Tuple[str, ...]
    body: Command
    loc: Location = _loc()

    @property
    def arity(self):
        return len(self.params)


@dataclass(frozen=True)
class Program:
    globals: Tuple[str, ...]
    decls: Tuple[ProcedureDecl, ...]
    # nome normalizado -> nome no fonte (preenchido por normalize)
    aliases: Tuple[Tuple[str, str], ...] = field(default=(), compare=False)

    def procedure(self, name):
        for decl in self.decls:
            if decl.name == name:
                return decl
        raise KeyError(name)

    @property
    def procedures(self):
        return {decl.name: decl for decl in self.decls}

    def source_name(self, name):
        return dict(self.aliases).get(name, name)


# Construtores auxiliares

def assign(var, expr, loc=None):
    """``x := e`` é açúcar para a distribuição de Dirac em ``e``."""
    return Sample(var, DiscreteTable(((Num(1), expr),)), loc=loc)


def as_assignment(cmd):
    """Devolve a expressão atribuída se ``cmd`` for uma atribuição determinística."""
    if isinstance(cmd, Sample) and isinstance(cmd.dist, DiscreteTable) and len(cmd.dist.entries) == 1:
        prob, value = cmd.dist.entries[0]
        if prob == Num(1):
            return value
    return None


def seq(*commands):
    commands = [c for c in commands if not isinstance(c, Skip)]
    if not commands:
        return Skip()
    return reduce(lambda rest, first: Seq(first, rest), reversed(commands[:-1]), commands[-1])


def flatten_seq(cmd):
    if isinstance(cmd, Seq):
        return flatten_seq(cmd.first) + flatten_seq(cmd.second)
    return [cmd]


def expr_vars(expr):
    """Variáveis livres de uma expressão inteira ou booleana."""
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, (Num, BoolLit)):
        return set()
    if isinstance(expr, (BinOp, Cmp, And, Or)):
        return expr_vars(expr.left) | expr_vars(expr.right)
    if isinstance(expr, (Neg, Not, Clamp)):
        return expr_vars(expr.operand)
    if isinstance(expr, Indicator):
        return expr_vars(expr.cond)
    raise TypeError(f'Expressão desconhecida: {expr!r}')


def dist_exprs(dist):
    if isinstance(dist, Bernoulli):
        return [dist.prob]
    if isinstance(dist, Uniform):
        return [dist.lo, dist.hi]
    if isinstance(dist, Binomial):
        return [dist.trials, dist.prob]
    if isinstance(dist, Hypergeometric):
        return [dist.population, dist.successes, dist.draws]
    if isinstance(dist, DiscreteTable):
        return [e for entry in dist.entries for e in entry]
    raise TypeError(f'Distribuição desconhecida: {dist!r}')


def sub_commands(cmd):
    if isinstance(cmd, Local):
        return [cmd.body]
    if isinstance(cmd, (Seq,)):
        return [cmd.first, cmd.second]
    if isinstance(cmd, If):
        return [cmd.then, cmd.orelse]
    if isinstance(cmd, While):
        return [cmd.body]
    if isinstance(cmd, NonDet):
        return [cmd.left, cmd.right]
    return []


def walk(cmd):
    """Percorre os comandos em pré-ordem."""
    yield cmd
    for child in sub_commands(cmd):
        yield from walk(child)


def guards(cmd):
    """Guardas de ``if``/``while`` que ocorrem em ``cmd``."""
    return [c.cond for c in walk(cmd) if isinstance(c, (If, While))]


def contains_nondet(cmd):
    return any(isinstance(c, NonDet) for c in walk(cmd))


def called_procedures(cmd):
    return [c.proc for c in walk(cmd) if isinstance(c, Call)]
