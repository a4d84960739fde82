from frontend import ast

INDENT = '    '

_EXPR_LEVEL = {'+': 1, '-': 1, '*': 2, '/': 2}


def format_expr(expr, level=0):
    """Imprime uma expressão com o mínimo de parênteses que preserva a árvore."""
    if isinstance(expr, ast.Num):
        text = str(expr.value)
        return f'({text})' if expr.value < 0 and level > 0 else text
    if isinstance(expr, ast.Var):
        return expr.name
    if isinstance(expr, ast.BinOp):
        mine = _EXPR_LEVEL[expr.op]
        text = f'{format_expr(expr.left, mine)} {expr.op} {format_expr(expr.right, mine + 1)}'
        return f'({text})' if mine < level else text
    if isinstance(expr, ast.Neg):
        return f'-{format_expr(expr.operand, 3)}'
    if isinstance(expr, ast.Clamp):
        return f'⟨{format_expr(expr.operand)}⟩'
    if isinstance(expr, ast.Indicator):
        return f'[{format_bexpr(expr.cond)}]'
    raise TypeError(f'Expressão desconhecida: {expr!r}')


def format_bexpr(cond, level=0):
    if isinstance(cond, ast.BoolLit):
        return 'true' if cond.value else 'false'
    if isinstance(cond, ast.Cmp):
        return f'{format_expr(cond.left)} {cond.op} {format_expr(cond.right)}'
    if isinstance(cond, ast.Or):
        text = f'{format_bexpr(cond.left, 1)} or {format_bexpr(cond.right, 2)}'
        return f'({text})' if level > 1 else text
    if isinstance(cond, ast.And):
        text = f'{format_bexpr(cond.left, 2)} and {format_bexpr(cond.right, 3)}'
        return f'({text})' if level > 2 else text
    if isinstance(cond, ast.Not):
        return f'not {format_bexpr(cond.operand, 3)}'
    raise TypeError(f'Expressão booleana desconhecida: {cond!r}')


def format_distribution(dist):
    if isinstance(dist, ast.DiscreteTable):
        entries = ', '.join(f'{format_expr(p)}: {format_expr(v)}' for p, v in dist.entries)
        return f'Discrete({entries})'
    name = type(dist).__name__
    return f"{name}({', '.join(format_expr(e) for e in ast.dist_exprs(dist))})"


def _statements(cmd, depth):
    pad = INDENT * depth
    if isinstance(cmd, ast.Seq):
        return _statements(cmd.first, depth) + _statements(cmd.second, depth)
    if isinstance(cmd, ast.Skip):
        return [f'{pad}skip']
    if isinstance(cmd, ast.Sample):
        value = ast.as_assignment(cmd)
        if value is not None:
            return [f'{pad}{cmd.var} := {format_expr(value)}']
        return [f'{pad}{cmd.var} ~ {format_distribution(cmd.dist)}']
    if isinstance(cmd, ast.Call):
        args = ', '.join(format_expr(a) for a in cmd.args)
        return [f'{pad}{cmd.var} := {cmd.proc}({args})']
    if isinstance(cmd, ast.Return):
        return [f'{pad}return {format_expr(cmd.expr)}']
    if isinstance(cmd, ast.Local):
        lines = [f'{pad}var {cmd.var} := {format_expr(cmd.init)}']
        if not isinstance(cmd.body, ast.Skip):
            lines += _statements(cmd.body, depth)
        return lines
    if isinstance(cmd, ast.If):
        lines = [f'{pad}if ({format_bexpr(cmd.cond)}) {{']
        lines += _block(cmd.then, depth)
        return lines + _else(cmd.orelse, depth)
    if isinstance(cmd, ast.NonDet):
        lines = [f'{pad}if (*) {{']
        lines += _block(cmd.left, depth)
        return lines + _else(cmd.right, depth)
    if isinstance(cmd, ast.While):
        lines = [f'{pad}while ({format_bexpr(cmd.cond)}) {{']
        lines += _block(cmd.body, depth)
        return lines + [f'{pad}}}']
    raise TypeError(f'Comando desconhecido: {cmd!r}')


def _block(cmd, depth):
    if isinstance(cmd, ast.Skip):
        return []
    return _statements(cmd, depth + 1)


def _else(cmd, depth):
    pad = INDENT * depth
    if isinstance(cmd, ast.Skip):
        return [f'{pad}}}']
    return [f'{pad}}} else {{'] + _block(cmd, depth) + [f'{pad}}}']


def format_command(cmd, depth=0):
    return '\n'.join(_statements(cmd, depth))


def print_program(program):
    """
    Sintaxe concreta canônica de um programa.

    Reanalisar o texto produzido reconstrói o mesmo AST núcleo.
    """
    lines = []
    if program.globals:
        lines.append(f"global {', '.join(program.globals)}")
        lines.append('')
    for decl in program.decls:
        lines.append(f"def {decl.name}({', '.join(decl.params)}) {{")
        lines += _block(decl.body, 0)
        lines.append('}')
        lines.append('')
    return '\n'.join(lines).rstrip() + '\n'
