import itertools
from fractions import Fraction


def format_fraction(value):
    """Formata um racional exato como ``p/q`` (ou inteiro quando q = 1)."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f'{value.numerator}/{value.denominator}'


def parse_rational(text):
    """Converte ``'1/5'``, ``'0.5'`` ou ``'3'`` em Fraction sem passar por float."""
    return Fraction(str(text).strip())


class FreshNames:
    """
    Gerador de nomes frescos.

    Evita colisões com um conjunto de nomes reservados e com tudo o que já
    foi gerado. Um gerador por análise; não é compartilhado entre tarefas.
    """

    def __init__(self, reserved=()):
        self.taken = set(reserved)
        self._counters = {}

    def reserve(self, *names):
        self.taken.update(names)

    def fresh(self, base, separator=''):
        counter = self._counters.setdefault((base, separator), itertools.count())
        while True:
            name = f'{base}{separator}{next(counter)}'
            if name not in self.taken:
                self.taken.add(name)
                return name

    def rename(self, name):
        """Nome fresco derivado de ``name``: ``b`` vira ``b_1``, ``b_2``..."""
        k = 1
        while f'{name}_{k}' in self.taken:
            k += 1
        fresh = f'{name}_{k}'
        self.taken.add(fresh)
        return fresh
