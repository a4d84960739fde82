"""
Serializers dos relatórios em JSON.

A cota sai como termo estruturado: uma lista de parcelas com coeficiente
exato, átomos da guarda e corpo, além do texto formatado.
"""

from rest_framework import serializers
from rest_framework.renderers import JSONRenderer

from terms.printer import format_atom, format_expr, format_term
from terms.atoms import sorted_atoms


class TermField(serializers.Field):
    """Term -> ``{'text': ..., 'summands': [{'coefficient', 'guard', 'body'}]}``."""

    def __init__(self, **kwargs):
        kwargs.setdefault('read_only', True)
        super().__init__(**kwargs)

    def to_representation(self, term):
        return {
            'text': format_term(term),
            'summands': [
                {
                    'coefficient': format_expr(coeff),
                    'guard': [
                        {'expr': format_expr(atom.expr), 'strict': atom.strict, 'text': format_atom(atom)}
                        for atom in sorted_atoms(norm.guard)
                    ],
                    'body': format_expr(norm.body),
                }
                for coeff, norm in term.summands
            ],
        }


class AttemptSerializer(serializers.Serializer):
    kind = serializers.CharField()
    degree = serializers.IntegerField()
    status = serializers.CharField()
    conditions = serializers.IntegerField()
    equations = serializers.IntegerField()
    elapsed = serializers.FloatField()
    message = serializers.CharField(allow_null=True)


class AnalysisReportSerializer(serializers.Serializer):
    """
    Serializer do AnalysisReport.

    ``bound`` usa os nomes normalizados dos parâmetros; ``bound_text`` e
    ``params`` trazem a correspondência com o fonte.
    """
    program = serializers.CharField()
    entry = serializers.CharField(allow_null=True)
    status = serializers.CharField()
    bound = TermField(allow_null=True)
    bound_text = serializers.CharField(allow_null=True)
    params = serializers.ListField(child=serializers.ListField(child=serializers.CharField()))
    template_kind = serializers.CharField(allow_null=True)
    degree = serializers.IntegerField(allow_null=True)
    conditions = serializers.IntegerField()
    check_trials = serializers.IntegerField()
    solver = serializers.DictField()
    attempts = AttemptSerializer(many=True)
    elapsed = serializers.FloatField()
    message = serializers.CharField(allow_null=True)


class BenchmarkResultSerializer(serializers.Serializer):
    name = serializers.CharField()
    file = serializers.CharField()
    mode = serializers.CharField()
    expected = serializers.CharField(allow_null=True)
    factor = serializers.CharField(allow_null=True)
    note = serializers.CharField(allow_null=True)
    passed = serializers.BooleanField()
    reason = serializers.CharField(allow_null=True)
    report = AnalysisReportSerializer()


class BenchmarkRunSerializer(serializers.Serializer):
    directory = serializers.CharField()
    passed = serializers.IntegerField()
    failed = serializers.IntegerField()
    elapsed = serializers.FloatField()
    warnings = serializers.ListField(child=serializers.CharField())
    results = BenchmarkResultSerializer(many=True)


class ValidationPointSerializer(serializers.Serializer):
    args = serializers.DictField(child=serializers.IntegerField())
    bound = serializers.CharField()
    exact = serializers.CharField(allow_null=True)
    mean = serializers.FloatField()
    stderr = serializers.FloatField()
    samples = serializers.IntegerField()
    truncated = serializers.IntegerField()
    passed = serializers.BooleanField()
    message = serializers.CharField(allow_null=True)


class ValidationReportSerializer(serializers.Serializer):
    passed = serializers.BooleanField()
    depth = serializers.IntegerField()
    samples = serializers.IntegerField()
    seed = serializers.IntegerField()
    elapsed = serializers.FloatField()
    report = AnalysisReportSerializer()
    points = ValidationPointSerializer(many=True)


def render_json(serializer_class, instance):
    """Bytes JSON (UTF-8, indentado) do relatório."""
    data = serializer_class(instance).data
    return JSONRenderer().render(data, renderer_context={'indent': 2})


def write_json(path, serializer_class, instance):
    with open(path, 'wb') as handle:
        handle.write(render_json(serializer_class, instance))
