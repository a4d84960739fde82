"""
Configuração de uma análise.

Os valores padrão vêm de ``settings.PEVALYZER`` (lidos do ambiente com
django-environ); as opções de linha de comando sobrescrevem campo a campo.
"""

from typing import List, Literal, Optional

from django.conf import settings
from pydantic import BaseModel, Field

from templating.templates import LINEAR, SIMPLE_MIXED

AUTO = 'auto'

# Graus de Handelman tentados por tipo de template, na ordem de escalada
DEGREES = {
    LINEAR: (1, 2, 3),
    SIMPLE_MIXED: (2, 3),
}


class AnalysisConfig(BaseModel):
    """
    Parâmetros de análise, validação e oráculos.

    Attributes:
        solver: executável do solver SMT
        solver_args: argumentos extras do solver
        solver_timeout: segundos por consulta
        smt_dump: diretório onde os scripts SMT são gravados (opcional)
        optimize: estratégia de otimização (alternating, bisect ou none)
        template_kind: auto escala de linear para simple-mixed
        handelman_degree: grau fixo; None segue a escalada padrão
        check_trials: sorteios por condição em check_model
        seed: semente de todas as etapas aleatórias
        workers: análises ou blocos de amostras em paralelo
    """
    solver: str = 'z3'
    solver_args: List[str] = ['-in', '-smt2']
    solver_timeout: float = Field(10.0, gt=0)
    smt_dump: Optional[str] = None
    optimize: Literal['alternating', 'bisect', 'none'] = 'alternating'
    bisect_steps: int = Field(16, ge=1)
    template_kind: Literal['auto', 'linear', 'simple-mixed'] = AUTO
    template_logicals: int = Field(1, ge=0)
    template_guarded: bool = True
    instantiate_locals: bool = False
    handelman_degree: Optional[int] = Field(None, ge=1)
    check_trials: int = Field(2000, ge=0)
    seed: int = 0
    oracle_depth: int = Field(12, ge=0)
    oracle_unroll: int = Field(200, ge=1)
    oracle_state_cap: int = Field(200000, ge=1)
    mc_samples: int = Field(100000, ge=1)
    mc_maxdepth: int = Field(1000, ge=1)
    mc_maxsteps: int = Field(100000, ge=1)
    mc_chunk: int = Field(1000, ge=1)
    mc_nondet_subsamples: int = Field(8, ge=1)
    workers: int = Field(1, ge=1)

    class Config:
        extra = 'forbid'

    @classmethod
    def from_settings(cls, **overrides):
        """
        Monta a configuração a partir de ``settings.PEVALYZER``.

        Args:
            **overrides: campos a sobrescrever; valores None são ignorados

        Raises:
            pydantic.ValidationError: valor inválido ou campo desconhecido
        """
        values = {key.lower(): value for key, value in settings.PEVALYZER.items()}
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)

    def attempts(self):
        """Pares ``(tipo de template, grau)`` na ordem de escalada."""
        kinds = (LINEAR, SIMPLE_MIXED) if self.template_kind == AUTO else (self.template_kind,)
        plan = []
        for kind in kinds:
            degrees = (self.handelman_degree,) if self.handelman_degree else DEGREES[kind]
            plan.extend((kind, degree) for degree in degrees)
        return plan
