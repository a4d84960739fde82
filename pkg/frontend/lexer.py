import re
from dataclasses import dataclass

from common.exceptions import FrontendError


KEYWORDS = {
    'def', 'var', 'local', 'global', 'if', 'else', 'while', 'return', 'skip',
    'true', 'false', 'and', 'or', 'not',
}

# Ordem importa: operadores mais longos primeiro.
OPERATORS = [
    ':=', ':≈', '<-', '<=', '>=', '==', '!=', '&&', '||',
    '≔', '≤', '≥', '≠', '∧', '∨', '¬', '·', '⟨', '⟩',
    '(', ')', '{', '}', '[', ']', ',', ';', ':', '<', '>', '=', '+', '-', '*', '/', '~', '!',
]

# Grafias alternativas normalizadas para uma forma canônica.
CANONICAL = {
    '≔': ':=', ':≈': '~', '<-': '~', '≤': '<=', '≥': '>=', '≠': '!=', '==': '=',
    '∧': 'and', '&&': 'and', '∨': 'or', '||': 'or', '¬': 'not', '!': 'not', '·': '*',
}

_SPACE = re.compile(r'[ \t\r\f\v]+')
_NUMBER = re.compile(r'\d+')
_IDENT = re.compile(r'[A-Za-z_][A-Za-z0-9_]*')


@dataclass(frozen=True)
class Token:
    kind: str  # 'num', 'ident', 'keyword', 'op', 'eof'
    value: str
    line: int
    column: int

    def is_op(self, *values):
        return self.kind == 'op' and self.value in values

    def is_keyword(self, *values):
        return self.kind == 'keyword' and self.value in values


def tokenize(source):
    """Divide o fonte em tokens; comentários ``#`` vão até o fim da linha."""
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(source):
        char = source[pos]
        column = pos - line_start + 1
        if char == '\n':
            line += 1
            pos += 1
            line_start = pos
            continue
        if char == '#':
            end = source.find('\n', pos)
            pos = len(source) if end < 0 else end
            continue
        match = _SPACE.match(source, pos)
        if match:
            pos = match.end()
            continue
        match = _NUMBER.match(source, pos)
        if match:
            if source.startswith('.', match.end()) and match.end() + 1 < len(source) \
                    and source[match.end() + 1].isdigit():
                raise FrontendError(
                    'literais decimais não são aceitos; use racionais exatos como 1/5',
                    line, column, kind='lex',
                )
            tokens.append(Token('num', match.group(), line, column))
            pos = match.end()
            continue
        match = _IDENT.match(source, pos)
        if match:
            word = match.group()
            kind = 'keyword' if word in KEYWORDS else 'ident'
            tokens.append(Token(kind, word, line, column))
            pos = match.end()
            continue
        for op in OPERATORS:
            if source.startswith(op, pos):
                canonical = CANONICAL.get(op, op)
                kind = 'keyword' if canonical in ('and', 'or', 'not') else 'op'
                tokens.append(Token(kind, canonical, line, column))
                pos += len(op)
                break
        else:
            raise FrontendError(f'caractere inesperado {char!r}', line, column, kind='lex')
    tokens.append(Token('eof', '', line, pos - line_start + 1))
    return tokens
