"""
Estimador Monte-Carlo de ``E[⟨retorno⟩]``.

Cada amostra executa o programa numa máquina de pilha explícita (quadros
com memória e pilha de trabalho), o que permite clonar o estado inteiro
numa escolha não determinística: cada ramo é continuado por subamostras
independentes e a amostra fica com o maior valor médio.

As amostras são divididas em blocos com sementes derivadas de
``numpy.random.SeedSequence``; o resultado não depende do número de
workers.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

import numpy as np
from django.conf import settings

from frontend import ast
from frontend.normalize import normalize
from oracle.distributions import draw
from oracle.semantics import clamp_value, eval_bool, eval_expr, procedure_memory
from transformer.transformer import entry_procedure

logger = logging.getLogger(__name__)


@dataclass
class MonteCarloEstimate:
    mean: float
    stderr: float
    samples: int
    truncated: int = 0
    seed: Optional[int] = None

    def upper(self, sigmas=4):
        return self.mean + sigmas * self.stderr

    def lower(self, sigmas=4):
        return self.mean - sigmas * self.stderr


class Truncated(Exception):
    pass


@dataclass
class _Frame:
    memory: dict
    work: list
    target: Optional[str] = None

    def clone(self):
        return _Frame(dict(self.memory), list(self.work), self.target)


@dataclass
class _Budget:
    steps: int
    maxdepth: int
    # alguma subamostra de uma escolha foi truncada
    truncated: bool = False

    def fork(self):
        """Orçamento próprio de uma subamostra, com os passos restantes."""
        return _Budget(self.steps, self.maxdepth)


@dataclass
class _Machine:
    """Estado completo de uma execução: globais e pilha de quadros."""

    program: ast.Program
    globals: dict
    frames: List[_Frame] = field(default_factory=list)

    def clone(self):
        return _Machine(self.program, dict(self.globals), [f.clone() for f in self.frames])

    def lookup(self):
        return {**self.globals, **self.frames[-1].memory}

    def store(self, name, value):
        if name in self.frames[-1].memory or name not in self.globals:
            self.frames[-1].memory[name] = value
        else:
            self.globals[name] = value


_POP_LOCAL = 'pop-local'


class Sampler:
    """
    Executor aleatório de um programa.

    Args:
        program: Program
        maxdepth: profundidade máxima de chamadas por execução
        maxsteps: passos máximos por execução; cada subamostra de uma escolha
            recebe os passos que restavam no ponto da escolha
        nondet_subsamples: subamostras por ramo numa escolha
    """

    def __init__(self, program, maxdepth=None, maxsteps=None, nondet_subsamples=None):
        config = settings.PEVALYZER
        self.program = normalize(program)
        self.maxdepth = maxdepth or config['MC_MAXDEPTH']
        self.maxsteps = maxsteps or config['MC_MAXSTEPS']
        self.nondet_subsamples = nondet_subsamples or config['MC_NONDET_SUBSAMPLES']

    def start(self, entry, args, globals_):
        decl = self.program.procedure(entry)
        memory = procedure_memory(self.program, decl, args, globals_)
        global_values = {g: memory.pop(g) for g in self.program.globals}
        return _Machine(self.program, global_values, [_Frame(memory, [decl.body])])

    def sample(self, machine, rng):
        """
        Uma amostra de ``⟨retorno⟩``.

        Returns:
            ``(valor, truncada)``; execuções truncadas valem 0, e uma subamostra
            truncada vale 0 na média do seu ramo e marca a amostra como truncada
        """
        budget = _Budget(self.maxsteps, self.maxdepth)
        try:
            value = clamp_value(self._execute(machine, rng, budget))
        except Truncated:
            return Fraction(0), True
        return value, budget.truncated

    def _execute(self, machine, rng, budget):
        while True:
            budget.steps -= 1
            if budget.steps < 0:
                raise Truncated()
            frame = machine.frames[-1]
            if not frame.work:
                result = self._return(machine, Fraction(0))
                if result is not None:
                    return result
                continue
            item = frame.work.pop()
            if isinstance(item, tuple) and item[0] == _POP_LOCAL:
                frame.memory.pop(item[1], None)
            elif isinstance(item, ast.Skip):
                pass
            elif isinstance(item, ast.Sample):
                machine.store(item.var, draw(item.dist, machine.lookup(), rng))
            elif isinstance(item, ast.Return):
                result = self._return(machine, eval_expr(item.expr, machine.lookup()))
                if result is not None:
                    return result
            elif isinstance(item, ast.Call):
                self._call(machine, item, budget)
            elif isinstance(item, ast.Local):
                frame.memory[item.var] = eval_expr(item.init, machine.lookup())
                frame.work.extend([(_POP_LOCAL, item.var), item.body])
            elif isinstance(item, ast.Seq):
                frame.work.extend([item.second, item.first])
            elif isinstance(item, ast.If):
                frame.work.append(item.then if eval_bool(item.cond, machine.lookup()) else item.orelse)
            elif isinstance(item, ast.While):
                if eval_bool(item.cond, machine.lookup()):
                    frame.work.extend([item, item.body])
            elif isinstance(item, ast.NonDet):
                return self._choose(machine, item, rng, budget)
            else:
                raise TypeError(f'Comando desconhecido: {item!r}')

    def _call(self, machine, cmd, budget):
        if len(machine.frames) >= budget.maxdepth:
            raise Truncated()
        lookup = machine.lookup()
        args = [eval_expr(a, lookup) for a in cmd.args]
        decl = self.program.procedure(cmd.proc)
        memory = dict(zip(decl.params, args))
        machine.frames.append(_Frame(memory, [decl.body], cmd.var))

    def _return(self, machine, value):
        """Desempilha um quadro; devolve o valor final quando a pilha esvazia."""
        frame = machine.frames.pop()
        if not machine.frames:
            return value
        machine.store(frame.target, value)
        return None

    def _choose(self, machine, cmd, rng, budget):
        """Continua cada ramo com subamostras e fica com o maior valor médio."""
        best = None
        for branch in (cmd.left, cmd.right):
            total = Fraction(0)
            for _ in range(self.nondet_subsamples):
                copy = machine.clone()
                copy.frames[-1].work.append(branch)
                own = budget.fork()
                try:
                    total += clamp_value(self._execute(copy, rng, own))
                except Truncated:
                    own.truncated = True
                budget.truncated = budget.truncated or own.truncated
            mean = total / self.nondet_subsamples
            best = mean if best is None or mean > best else best
        return best


def _chunk(sampler, entry, args, globals_, count, seed_sequence):
    rng = np.random.default_rng(seed_sequence)
    values = np.empty(count, dtype=float)
    truncated = 0
    for index in range(count):
        machine = sampler.start(entry, args, globals_)
        value, cut = sampler.sample(machine, rng)
        values[index] = float(value)
        truncated += cut
    return values, truncated


def monte_carlo(program, entry=None, args=(), globals_=None, samples=None, seed=None,
                maxdepth=None, maxsteps=None, chunk=None, workers=None, nondet_subsamples=None):
    """
    Estima ``E[⟨retorno⟩]`` por amostragem.

    Args:
        program: Program
        entry: procedimento; por padrão o último declarado
        args: argumentos inteiros
        globals_: valores iniciais das globais
        samples: número de amostras (>= 1)
        seed: semente; a mesma semente dá a mesma estimativa
        maxdepth: profundidade máxima de chamadas
        maxsteps: passos máximos por amostra
        chunk: amostras por bloco
        workers: blocos em paralelo
        nondet_subsamples: subamostras por ramo numa escolha não determinística

    Returns:
        MonteCarloEstimate com média, erro padrão e execuções truncadas
    """
    config = settings.PEVALYZER
    samples = samples or config['MC_SAMPLES']
    seed = config['SEED'] if seed is None else seed
    chunk = chunk or config['MC_CHUNK']
    workers = workers or config['WORKERS']
    if samples < 1:
        raise ValueError(f'número de amostras inválido: {samples}')
    sampler = Sampler(program, maxdepth, maxsteps, nondet_subsamples)
    entry = entry_procedure(sampler.program, entry)
    sizes = [min(chunk, samples - start) for start in range(0, samples, chunk)]
    sequences = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = list(zip(sizes, sequences))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: _chunk(sampler, entry, args, globals_, *job), jobs))
    else:
        results = [_chunk(sampler, entry, args, globals_, *job) for job in jobs]
    values = np.concatenate([v for v, _ in results])
    truncated = sum(t for _, t in results)
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / np.sqrt(len(values))) if len(values) > 1 else 0.0
    if truncated:
        logger.info(f'Monte-Carlo de {entry}{tuple(args)}: {truncated} de {samples} execuções truncadas')
    return MonteCarloEstimate(mean, stderr, samples, truncated, seed)
