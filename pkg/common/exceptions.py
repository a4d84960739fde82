from rest_framework.exceptions import APIException
from rest_framework import status


class PevalyzerException(APIException):
    """
    Exceção base do analisador.

    Segue o mesmo formato das exceções de API do projeto: carrega ``detail``,
    um ``code`` estável (usado nos relatórios) e, opcionalmente, a exceção
    original que causou a falha.
    """

    status_code = status.HTTP_500_INTERNAL_SERVER_ERROR
    default_code = 'analysis_error'

    def __init__(self, detail, code=None, original_exception=None):
        self.original_exception = original_exception
        super().__init__(detail, code or self.default_code)

    @property
    def message(self):
        return str(self.detail)


class FrontendError(PevalyzerException):
    """Erro léxico, sintático, de aridade ou de variável não ligada, com posição no fonte."""

    status_code = status.HTTP_400_BAD_REQUEST
    default_code = 'frontend_error'

    def __init__(self, detail, line=None, column=None, kind='parse', original_exception=None):
        self.line = line
        self.column = column
        self.kind = kind
        if line is not None:
            detail = f'{line}:{column}: {detail}'
        super().__init__(detail, code=f'{kind}_error', original_exception=original_exception)


class UnsupportedExpansion(PevalyzerException):
    """A esperança simbólica de uma distribuição não tem forma fechada para o termo dado."""

    status_code = status.HTTP_422_UNPROCESSABLE_ENTITY
    default_code = 'unsupported_expansion'


class UnsupportedCondition(PevalyzerException):
    """Condição lateral fora do fragmento tratável (guarda não linear, denominador sem sinal)."""

    status_code = status.HTTP_422_UNPROCESSABLE_ENTITY
    default_code = 'unsupported_condition'


class TermSubstitutionError(PevalyzerException):
    """Um termo foi substituído onde apenas expressões são admitidas."""

    default_code = 'term_substitution'


class SolverError(PevalyzerException):
    """Solver ausente, processo falhou ou saída malformada."""

    status_code = status.HTTP_502_BAD_GATEWAY
    default_code = 'solver_error'


class EvaluationError(PevalyzerException):
    """Falha na avaliação exata: símbolo não ligado, divisão por zero, distribuição inválida."""

    default_code = 'evaluation_error'


class SupportExplosion(PevalyzerException):
    """O oráculo exato ultrapassou o limite configurado de estados."""

    status_code = status.HTTP_507_INSUFFICIENT_STORAGE
    default_code = 'support_explosion'


class ManifestError(PevalyzerException):
    """Corpus ou manifesto de benchmarks ilegível, ou registro inválido."""

    status_code = status.HTTP_400_BAD_REQUEST
    default_code = 'manifest_error'
