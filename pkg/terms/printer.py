import sympy as sp

from terms.symbols import ARG_PREFIX, program_symbol, source_param


def format_expr(expr):
    return sp.sstr(sp.sympify(expr)).replace('**', '^').replace('*', '·')


def format_coeff(coeff):
    text = format_expr(coeff)
    return f'({text})' if isinstance(coeff, sp.Add) else text


def format_atom(atom):
    return f"{format_expr(atom.expr)} {'>' if atom.strict else '≥'} 0"


def format_guard(guard):
    if not guard:
        return 'true'
    return ' ∧ '.join(sorted(format_atom(a) for a in guard))


def format_norm(norm):
    body = norm.body
    if not norm.guard:
        return format_expr(body)
    if len(norm.guard) == 1:
        (atom,) = norm.guard
        if not atom.strict and sp.expand(atom.expr - body) == 0:
            return f'⟨{format_expr(body)}⟩'
    guard = f'[{format_guard(norm.guard)}]'
    if body == 1:
        return guard
    inner = format_expr(body)
    return f'{guard}·({inner})' if isinstance(body, sp.Add) else f'{guard}·{inner}'


def format_term(term):
    """Notação ``c·[b]·e`` com ``⟨e⟩`` para ``[e ≥ 0]·e`` e frações exatas."""
    if term.is_zero():
        return '0'
    parts = []
    for coeff, norm in term.summands:
        if not norm.guard and norm.body == 1:
            parts.append(format_expr(coeff))
        elif coeff == 1:
            parts.append(format_norm(norm))
        else:
            parts.append(f'{format_coeff(coeff)}·{format_norm(norm)}')
    return ' + '.join(parts)


def display_names(term, program=None):
    """``ℓa_x`` -> nome do parâmetro no fonte, quando não colide com outro símbolo."""
    from terms.term import substitute

    taken = {s.name for s in term.free_symbols}
    mapping = {}
    for symbol in sorted(term.variables, key=lambda s: s.name):
        if not symbol.name.startswith(ARG_PREFIX):
            continue
        name = source_param(symbol)
        if program is not None:
            name = program.source_name(name)
        if name in taken:
            name = source_param(symbol)
        if name in taken:
            continue
        taken.add(name)
        mapping[symbol] = program_symbol(name)
    return substitute(term, mapping) if mapping else term


def format_bound(term, program=None):
    return format_term(display_names(term, program))
