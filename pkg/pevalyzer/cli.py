"""
Ponto de entrada ``pevalyzer <comando>``.

Encaminha para os comandos de gerenciamento do Django: ``analyze``,
``bench`` e ``validate``.
"""

import os
import sys

COMMANDS = ('analyze', 'bench', 'validate')


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'pevalyzer.settings')
    from django.core.management import execute_from_command_line

    if not argv or argv[0] in ('-h', '--help'):
        sys.stdout.write(f'uso: pevalyzer {{{",".join(COMMANDS)}}} [opções]\n')
        sys.exit(0 if argv else 3)
    if argv[0] not in COMMANDS:
        sys.stderr.write(f"pevalyzer: comando desconhecido '{argv[0]}'; use {', '.join(COMMANDS)}\n")
        sys.exit(3)
    execute_from_command_line(['pevalyzer', *argv])
