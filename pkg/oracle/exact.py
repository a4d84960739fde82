"""
Oráculo exato: aproximações de profundidade finita da semântica de
esperanças.

Com profundidade ``i`` cada chamada consome uma unidade; chamadas com
orçamento esgotado e laços além do limite de desdobramentos contribuem 0,
de modo que o valor é uma cota inferior, não decrescente em ``i``.

Procedimentos sem escolha não determinística são resumidos por
distribuições de ``(valor devolvido, globais)`` memoizadas por argumentos,
globais e profundidade. Onde há escolha, a avaliação é por continuações e
toma o máximo entre os ramos.
"""

import logging
from collections import defaultdict
from fractions import Fraction

from django.conf import settings

from common.exceptions import EvaluationError, SupportExplosion
from frontend import ast
from frontend.normalize import normalize
from oracle.distributions import support
from oracle.semantics import (
    WeightedOutcome,
    clamp_value,
    eval_bool,
    eval_expr,
    freeze,
    global_part,
    nondeterministic_procedures,
    procedure_memory,
    return_into,
)
from transformer.transformer import entry_procedure

logger = logging.getLogger(__name__)


def _merge(target, source):
    for key, probability in source.items():
        target[key] += probability
    return target


def _without(memory, name):
    return {k: v for k, v in memory.items() if k != name}


class ExactOracle:
    """
    Avaliador exato de um programa.

    Uma instância por programa e configuração; o cache de resumos vale para
    todas as consultas feitas nela.
    """

    def __init__(self, program, depth=None, unroll=None, state_cap=None):
        config = settings.PEVALYZER
        self.program = normalize(program)
        self.depth = config['ORACLE_DEPTH'] if depth is None else depth
        self.unroll = unroll or config['ORACLE_UNROLL']
        self.state_cap = state_cap or config['ORACLE_STATE_CAP']
        self.nondet = nondeterministic_procedures(self.program)
        self._summaries = {}
        self._steps = 0

    def _check(self, states):
        if len(states) > self.state_cap:
            raise SupportExplosion(f'{len(states)} estados excedem o limite de {self.state_cap}')

    def _step(self):
        self._steps += 1
        if self._steps > self.state_cap:
            raise SupportExplosion(f'avaliação excedeu {self.state_cap} passos')

    # Execução direta sobre distribuições de memórias

    def summary(self, name, args, globals_, depth):
        """
        Distribuição de ``(valor, globais)`` de ``name`` na aproximação ``depth``.

        Returns:
            dict ``(Fraction, tupla de globais) -> probabilidade``; a massa
            que falta é a das execuções cortadas
        """
        key = (name, tuple(args), tuple(globals_), depth)
        if key in self._summaries:
            return self._summaries[key]
        result = defaultdict(Fraction)
        if depth > 0:
            decl = self.program.procedure(name)
            memory = procedure_memory(self.program, decl, args, dict(globals_))
            running, returned = self._run(decl.body, {freeze(memory): Fraction(1)}, depth - 1)
            for (value, frozen), probability in returned.items():
                result[(value, global_part(self.program, dict(frozen)))] += probability
            for frozen, probability in running.items():
                result[(Fraction(0), global_part(self.program, dict(frozen)))] += probability
        self._summaries[key] = dict(result)
        return self._summaries[key]

    def _run(self, cmd, states, depth):
        """
        Executa ``cmd`` sobre uma distribuição de memórias.

        Returns:
            ``(em curso, devolvidos)``: memórias que seguem para o próximo
            comando e pares ``(valor, memória)`` que já executaram ``return``
        """
        running, returned = defaultdict(Fraction), defaultdict(Fraction)
        if not states:
            return running, returned
        self._check(states)
        if isinstance(cmd, ast.Skip):
            return _merge(running, states), returned
        if isinstance(cmd, ast.Return):
            for frozen, probability in states.items():
                returned[(eval_expr(cmd.expr, dict(frozen)), frozen)] += probability
            return running, returned
        if isinstance(cmd, ast.Sample):
            for frozen, probability in states.items():
                memory = dict(frozen)
                for weight, value in support(cmd.dist, memory):
                    running[freeze({**memory, cmd.var: value})] += probability * weight
            return running, returned
        if isinstance(cmd, ast.Call):
            for frozen, probability in states.items():
                memory = dict(frozen)
                args = tuple(eval_expr(a, memory) for a in cmd.args)
                callee = self.summary(cmd.proc, args, global_part(self.program, memory), depth)
                for (value, globals_), weight in callee.items():
                    after = return_into(self.program, memory, cmd.var, value, dict(globals_))
                    running[freeze(after)] += probability * weight
            return running, returned
        if isinstance(cmd, ast.Local):
            entered = defaultdict(Fraction)
            for frozen, probability in states.items():
                memory = dict(frozen)
                entered[freeze({**memory, cmd.var: eval_expr(cmd.init, memory)})] += probability
            inner, returned = self._run(cmd.body, entered, depth)
            for frozen, probability in inner.items():
                running[freeze(_without(dict(frozen), cmd.var))] += probability
            return running, returned
        if isinstance(cmd, ast.Seq):
            middle, returned = self._run(cmd.first, states, depth)
            running, later = self._run(cmd.second, middle, depth)
            return running, _merge(returned, later)
        if isinstance(cmd, ast.If):
            taken, skipped = self._split(cmd.cond, states)
            running, returned = self._run(cmd.then, taken, depth)
            other, later = self._run(cmd.orelse, skipped, depth)
            return _merge(running, other), _merge(returned, later)
        if isinstance(cmd, ast.While):
            return self._loop(cmd, states, depth)
        raise EvaluationError(f'escolha não determinística fora da avaliação por continuações: {cmd!r}')

    def _split(self, cond, states):
        taken, skipped = defaultdict(Fraction), defaultdict(Fraction)
        for frozen, probability in states.items():
            target = taken if eval_bool(cond, dict(frozen)) else skipped
            target[frozen] += probability
        return taken, skipped

    def _loop(self, cmd, states, depth):
        exited, returned = defaultdict(Fraction), defaultdict(Fraction)
        current = states
        for count in range(self.unroll + 1):
            current, leaving = self._split(cmd.cond, current)
            _merge(exited, leaving)
            if not current:
                break
            if count == self.unroll:
                logger.debug(f'Laço cortado após {self.unroll} iterações; massa perdida {sum(current.values())}')
                break
            current, later = self._run(cmd.body, current, depth)
            _merge(returned, later)
        return exited, returned

    # Avaliação por continuações (com escolha demoníaca)

    def _cps(self, cmd, memory, depth, cont, ret):
        self._step()
        if isinstance(cmd, ast.Skip):
            return cont(memory)
        if isinstance(cmd, ast.Return):
            return ret(eval_expr(cmd.expr, memory), memory)
        if isinstance(cmd, ast.Sample):
            return sum(
                (weight * cont({**memory, cmd.var: value}) for weight, value in support(cmd.dist, memory)),
                Fraction(0),
            )
        if isinstance(cmd, ast.Call):
            return self._cps_call(cmd, memory, depth, cont)
        if isinstance(cmd, ast.Local):
            entered = {**memory, cmd.var: eval_expr(cmd.init, memory)}
            return self._cps(cmd.body, entered, depth, lambda m: cont(_without(m, cmd.var)), ret)
        if isinstance(cmd, ast.Seq):
            return self._cps(
                cmd.first, memory, depth,
                lambda m: self._cps(cmd.second, m, depth, cont, ret),
                ret,
            )
        if isinstance(cmd, ast.If):
            branch = cmd.then if eval_bool(cmd.cond, memory) else cmd.orelse
            return self._cps(branch, memory, depth, cont, ret)
        if isinstance(cmd, ast.While):
            def loop(m, count):
                if not eval_bool(cmd.cond, m):
                    return cont(m)
                if count >= self.unroll:
                    return Fraction(0)
                return self._cps(cmd.body, m, depth, lambda after: loop(after, count + 1), ret)
            return loop(memory, 0)
        if isinstance(cmd, ast.NonDet):
            return max(
                self._cps(cmd.left, memory, depth, cont, ret),
                self._cps(cmd.right, memory, depth, cont, ret),
            )
        raise TypeError(f'Comando desconhecido: {cmd!r}')

    def _cps_call(self, cmd, memory, depth, cont):
        args = tuple(eval_expr(a, memory) for a in cmd.args)
        globals_ = global_part(self.program, memory)

        def back(value, callee_memory):
            callee_globals = global_part(self.program, callee_memory)
            return cont(return_into(self.program, memory, cmd.var, value, dict(callee_globals)))

        if cmd.proc not in self.nondet:
            return sum(
                (weight * back(value, dict(g)) for (value, g), weight in self.summary(cmd.proc, args, globals_, depth).items()),
                Fraction(0),
            )
        if depth == 0:
            return Fraction(0)
        decl = self.program.procedure(cmd.proc)
        callee = procedure_memory(self.program, decl, args, dict(globals_))
        return self._cps(decl.body, callee, depth - 1, lambda m: back(Fraction(0), m), back)

    # Consultas

    def expectation(self, entry=None, args=(), globals_=None):
        """
        ``et⁽ⁱ⁾⟦entry⟧(λv m.⟨v⟩)`` nos argumentos e globais dados.

        Raises:
            SupportExplosion: limite de estados ou de recursão excedido
            EvaluationError: distribuição inválida ou divisão por zero
        """
        entry = entry_procedure(self.program, entry)
        decl = self.program.procedure(entry)
        memory = procedure_memory(self.program, decl, args, globals_)
        self._steps = 0
        try:
            if entry in self.nondet:
                if self.depth == 0:
                    return Fraction(0)
                return self._cps(
                    decl.body, memory, self.depth - 1,
                    lambda m: Fraction(0),
                    lambda value, m: clamp_value(value),
                )
            outcomes = self.summary(entry, tuple(memory[p] for p in decl.params),
                                    global_part(self.program, memory), self.depth)
        except RecursionError as exc:
            raise SupportExplosion('recursão profunda demais na avaliação exata', original_exception=exc)
        return sum((p * clamp_value(value) for (value, _), p in outcomes.items()), Fraction(0))

    def outcomes(self, entry=None, args=(), globals_=None):
        """Resultados ponderados de um procedimento determinístico na escolha."""
        entry = entry_procedure(self.program, entry)
        if entry in self.nondet:
            raise EvaluationError(f'{entry} tem escolha não determinística; use expectation')
        decl = self.program.procedure(entry)
        memory = procedure_memory(self.program, decl, args, globals_)
        summary = self.summary(entry, tuple(memory[p] for p in decl.params),
                               global_part(self.program, memory), self.depth)
        return sorted(
            (WeightedOutcome(p, value, globals_) for (value, globals_), p in summary.items()),
            key=lambda o: (o.value, o.memory),
        )


def exact_expectation(program, entry=None, args=(), globals_=None, depth=None, unroll=None, state_cap=None):
    """
    Cota inferior exata da esperança de ``⟨retorno⟩``.

    Args:
        program: Program (normalizado ou não)
        entry: procedimento; por padrão o último declarado
        args: argumentos inteiros
        globals_: valores iniciais das globais (ausentes valem 0)
        depth: profundidade de chamadas ``i``
        unroll: limite de iterações por laço
        state_cap: limite de estados por distribuição e de passos

    Returns:
        Fraction
    """
    oracle = ExactOracle(program, depth, unroll, state_cap)
    value = oracle.expectation(entry, args, globals_)
    logger.debug(f'Valor exato de {entry or "entrada"}{tuple(args)} na profundidade {oracle.depth}: {value}')
    return value
