"""
Manifesto do corpus de benchmarks (``manifest.toml``).

Cada registro ``[[program]]`` traz o arquivo, o procedimento de entrada, a
cota esperada na gramática de expressões dos ``.pw`` e o modo de
comparação.
"""

import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from fractions import Fraction
from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ValidationError, field_validator, model_validator

from common.exceptions import FrontendError, ManifestError
from common.utils import parse_rational
from frontend.parser import parse_expectation

logger = logging.getLogger(__name__)

EXACT, FACTOR, SOUND, ANY = 'exact', 'factor', 'sound', 'any'

MANIFEST_NAME = 'manifest.toml'


class BenchmarkExpectation(BaseModel):
    """
    Expectativa de um programa do corpus.

    Attributes:
        name: identificador do programa
        file: caminho relativo ao diretório do corpus
        entry: procedimento analisado; None usa o último declarado
        expected: cota esperada (``1/5 * ⟨n⟩``)
        mode: exact, factor, sound ou any
        factor: razão máxima ``cota / esperada`` no modo factor (>= 1)
        note: observação livre (reconstruções, por exemplo)
    """
    name: str
    file: str
    entry: Optional[str] = None
    expected: Optional[str] = None
    mode: Literal['exact', 'factor', 'sound', 'any'] = EXACT
    factor: Optional[Union[str, int]] = None
    note: Optional[str] = None

    @field_validator('expected')
    @classmethod
    def check_expected(cls, value):
        if value is not None:
            try:
                parse_expectation(value)
            except FrontendError as exc:
                raise ValueError(f'cota esperada inválida: {exc.message}')
        return value

    @model_validator(mode='after')
    def check_mode(self):
        if self.mode in (EXACT, FACTOR) and self.expected is None:
            raise ValueError(f"modo {self.mode} exige 'expected'")
        if self.mode == FACTOR and self.ratio < 1:
            raise ValueError(f'fator {self.factor} menor que 1')
        return self

    @property
    def ratio(self):
        return parse_rational(self.factor) if self.factor is not None else Fraction(1)

    @property
    def expected_expr(self):
        return parse_expectation(self.expected) if self.expected is not None else None


def load_manifest(path):
    """
    Lê um manifesto TOML.

    Args:
        path: caminho do ``manifest.toml``

    Returns:
        lista de BenchmarkExpectation na ordem do arquivo

    Raises:
        ManifestError: arquivo ilegível, TOML inválido, registro inválido ou
            nome repetido
    """
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding='utf-8'))
    except OSError as exc:
        raise ManifestError(f'não foi possível ler {path}: {exc}', original_exception=exc)
    except tomllib.TOMLDecodeError as exc:
        raise ManifestError(f'{path}: TOML inválido: {exc}', original_exception=exc)
    records: List[BenchmarkExpectation] = []
    for index, raw in enumerate(data.get('program', []), 1):
        try:
            records.append(BenchmarkExpectation(**raw))
        except (ValidationError, TypeError) as exc:
            raise ManifestError(f'{path}: registro {index} inválido: {exc}', original_exception=exc)
    names = [r.name for r in records]
    duplicates = sorted({n for n in names if names.count(n) > 1})
    if duplicates:
        raise ManifestError(f'{path}: nomes repetidos: {", ".join(duplicates)}')
    logger.debug(f'Manifesto {path}: {len(records)} programas')
    return records
