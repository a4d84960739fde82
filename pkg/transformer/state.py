from dataclasses import dataclass, field
from typing import Dict, List, Optional

from frontend import ast
from templating.templates import LINEAR, TemplatePair, UnknownFactory
from terms.printer import format_guard, format_term
from terms.term import Term


@dataclass(frozen=True)
class Origin:
    """Regra que emitiu a condição e a posição no fonte."""

    rule: str
    procedure: str
    loc: ast.Location = None

    def __str__(self):
        where = f' em {self.loc[0]}:{self.loc[1]}' if self.loc else ''
        return f'{self.rule} ({self.procedure}{where})'


@dataclass(frozen=True)
class SideCondition:
    """``ctx ⊢ lhs ≤ rhs``, válida se vale para toda memória e valoração que satisfaz ``ctx``."""

    ctx: frozenset
    lhs: Term
    rhs: Term
    origin: Origin

    @property
    def variables(self):
        symbols = self.lhs.variables | self.rhs.variables
        for atom in self.ctx:
            symbols |= atom.free_symbols
        return symbols

    @property
    def unknowns(self):
        return self.lhs.unknowns | self.rhs.unknowns

    def __str__(self):
        return f'{format_guard(self.ctx)} ⊢ {format_term(self.lhs)} ≤ {format_term(self.rhs)}'


@dataclass
class TemplateSettings:
    kind: str = LINEAR
    logicals: int = 1
    guarded: bool = True
    instantiate_locals: bool = False


@dataclass
class AnalysisState:
    """
    Estado de uma análise: templates por procedimento, condições emitidas
    (só cresce) e o gerador de desconhecidos. Um por tarefa.
    """

    program: ast.Program
    settings: TemplateSettings = field(default_factory=TemplateSettings)
    unknowns: UnknownFactory = field(default_factory=UnknownFactory)
    templates: Dict[str, TemplatePair] = field(default_factory=dict)
    conditions: List[SideCondition] = field(default_factory=list)
    procedure: Optional[str] = None

    def emit(self, ctx, lhs, rhs, rule, loc=None):
        if ctx is None:
            return None
        condition = SideCondition(ctx, lhs, rhs, Origin(rule, self.procedure, loc))
        self.conditions.append(condition)
        return condition
